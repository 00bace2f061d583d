//! Numerical thresholds shared across the crate.

/// Central record of tolerance constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// A matrix counts as full rank when `s_min > rank_ratio * s_max`.
    pub rank_ratio: f64,
    /// One-sided Jacobi stops rotating a pair once `|<b_p,b_q>| <= jacobi_eps * |b_p||b_q|`.
    pub jacobi_eps: f64,
    pub jacobi_max_sweeps: usize,
    /// Power iterations used to estimate the spectral norm for step sizes.
    pub power_iterations: usize,
    /// Product of primal and dual steps is `(step_safety / |A|)^2`.
    pub step_safety: f64,
    /// Feasibility tolerance is `solver_feasibility * max(1, |y|_2)`.
    pub solver_feasibility: f64,
    /// Relative objective tolerance certified by the duality gap.
    pub solver_objective: f64,
    pub solver_max_iterations: usize,
    /// Iterations of persistent dual excess after which a problem is declared infeasible.
    pub infeasibility_patience: usize,
    /// Largest number of supports the brute-force RIP routine enumerates.
    pub rip_support_budget: u64,
}

pub const TOLERANCES: Tolerances = Tolerances {
    rank_ratio: 1e-12,
    jacobi_eps: 1e-15,
    jacobi_max_sweeps: 80,
    power_iterations: 100,
    step_safety: 0.95,
    solver_feasibility: 1e-9,
    solver_objective: 1e-7,
    solver_max_iterations: 50_000,
    infeasibility_patience: 1_000,
    rip_support_budget: 1_000_000,
};

impl Default for Tolerances {
    fn default() -> Self {
        TOLERANCES
    }
}
