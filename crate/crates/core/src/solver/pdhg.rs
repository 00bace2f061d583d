use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SolverError;
use crate::bos::SensingMatrix;
use crate::numerics::tolerances::TOLERANCES;
use crate::numerics::{
    cholesky, forward_substitute, forward_substitute_rows, norm1, norm2, norm_inf, CMatrix, CVector,
    LinalgError, RngStream,
};

/// Tunables of the primal-dual iteration. Every field has a default, so
/// partial JSON overrides are accepted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// `tol_f = feasibility_tol * max(1, |y|_2)`.
    pub feasibility_tol: f64,
    /// Relative duality-gap target `tol_o`.
    pub objective_tol: f64,
    pub max_iterations: usize,
    /// Iterations between convergence checks.
    pub check_every: usize,
    pub infeasibility_patience: usize,
    pub step_safety: f64,
    pub power_iterations: usize,
    /// Fixed primal/dual step ratio `sqrt(tau/sigma)`. When absent the ratio starts at
    /// `step_ratio_factor * |y| / sqrt(N)` and adapts at restarts.
    pub step_ratio: Option<f64>,
    pub step_ratio_factor: f64,
    /// Restart from the better of the current and averaged iterates when the merit stalls.
    pub restarts: bool,
    /// Whiten the constraint of BP instances with full row rank.
    pub precondition_bp: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            feasibility_tol: TOLERANCES.solver_feasibility,
            objective_tol: TOLERANCES.solver_objective,
            max_iterations: TOLERANCES.solver_max_iterations,
            check_every: 10,
            infeasibility_patience: TOLERANCES.infeasibility_patience,
            step_safety: TOLERANCES.step_safety,
            power_iterations: TOLERANCES.power_iterations,
            step_ratio: None,
            step_ratio_factor: 0.05,
            restarts: true,
            precondition_bp: true,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |what: &str| Err(SolverError::InvalidInput(what.to_string()));
        if !(self.feasibility_tol > 0.0) {
            return bad("feasibility_tol must be positive");
        }
        if !(self.objective_tol > 0.0) {
            return bad("objective_tol must be positive");
        }
        if self.max_iterations == 0 || self.check_every == 0 {
            return bad("max_iterations and check_every must be >= 1");
        }
        if !(self.step_safety > 0.0 && self.step_safety < 1.0) {
            return bad("step_safety must lie in (0, 1)");
        }
        if self.power_iterations == 0 {
            return bad("power_iterations must be >= 1");
        }
        if !(self.step_ratio_factor > 0.0 && self.step_ratio_factor.is_finite()) {
            return bad("step_ratio_factor must be positive");
        }
        if let Some(r) = self.step_ratio {
            if !(r > 0.0 && r.is_finite()) {
                return bad("step_ratio must be positive");
            }
        }
        Ok(())
    }
}

/// One QCBP instance `min |z|_1  s.t.  |A z - y|_2 <= eta`.
#[derive(Debug, Clone)]
pub struct QcbpSpec<'a> {
    pub matrix: &'a CMatrix,
    pub y: &'a [Complex64],
    pub eta: f64,
    pub options: SolverOptions,
}

impl<'a> QcbpSpec<'a> {
    pub fn new(a: &'a SensingMatrix, y: &'a [Complex64], eta: f64) -> Self {
        Self::from_matrix(a.matrix(), y, eta)
    }

    pub fn from_matrix(matrix: &'a CMatrix, y: &'a [Complex64], eta: f64) -> Self {
        Self {
            matrix,
            y,
            eta,
            options: SolverOptions::default(),
        }
    }

    pub fn with_options(mut self, options: SolverOptions) -> Self {
        self.options = options;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub x_hat: CVector,
    /// `|x_hat|_1`.
    pub objective: f64,
    /// `|A x_hat - y|_2`.
    pub feasibility_residual: f64,
    pub eta: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective of a dual-feasible point; a lower bound on the optimal value.
    pub dual_objective: f64,
    /// `objective - dual_objective`, an upper bound on the suboptimality of `x_hat`.
    pub duality_gap: f64,
    pub preconditioned: bool,
}

/// `A` with everything the iteration needs that does not depend on `(y, eta)`:
/// the norm estimate, the rank check and (lazily) the whitened operator for BP.
/// Share one across an eta grid.
#[derive(Debug)]
pub struct PreparedOperator<'a> {
    a: &'a CMatrix,
    options: SolverOptions,
    norm: f64,
    /// Cholesky factor of `A A*` when `A` has full row rank.
    factor: Option<CMatrix>,
    whitened: OnceLock<(CMatrix, f64)>,
}

/// Largest singular value by power iteration on `K* K`, from a fixed pseudo-random start.
fn operator_norm(k: &CMatrix, iterations: usize) -> f64 {
    let (m, n) = k.shape();
    let mut rng = RngStream::new(0x00c0_ffee, 0);
    let mut v: CVector = (0..n).map(|_| rng.complex_normal()).collect();
    let mut kv = vec![Complex64::new(0.0, 0.0); m];
    let mut estimate = 0.0;
    for _ in 0..iterations {
        let nv = norm2(&v);
        if nv == 0.0 {
            return 0.0;
        }
        v.iter_mut().for_each(|x| *x /= nv);
        k.apply_into(&v, &mut kv);
        estimate = norm2(&kv);
        k.apply_adjoint_into(&kv, &mut v);
    }
    estimate
}

impl<'a> PreparedOperator<'a> {
    pub fn new(a: &'a CMatrix, options: SolverOptions) -> Result<Self, SolverError> {
        options.validate()?;
        if !a.is_finite() {
            return Err(SolverError::InvalidInput("sensing matrix has non-finite entries".into()));
        }
        let factor = match cholesky(&a.row_gram(), TOLERANCES.rank_ratio) {
            Ok(l) => Some(l),
            Err(LinalgError::RankDeficient { .. }) => None,
            Err(e) => return Err(e.into()),
        };
        let norm = operator_norm(a, options.power_iterations);
        Ok(Self {
            a,
            options,
            norm,
            factor,
            whitened: OnceLock::new(),
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        self.a
    }

    pub fn options(&self) -> &SolverOptions {
        &self.options
    }

    /// Power-iteration estimate of `|A|_2`.
    pub fn norm_estimate(&self) -> f64 {
        self.norm
    }

    /// Whether `rank(A) = m`, i.e. `Az = y` is solvable for every `y`.
    pub fn full_row_rank(&self) -> bool {
        self.factor.is_some()
    }

    fn whitened(&self, l: &CMatrix) -> &(CMatrix, f64) {
        self.whitened.get_or_init(|| {
            let mut b = self.a.clone();
            forward_substitute_rows(l, &mut b).expect("factor matches operator rows");
            let norm = operator_norm(&b, self.options.power_iterations);
            (b, norm)
        })
    }

    pub fn solve(&self, y: &[Complex64], eta: f64) -> Result<SolveReport, SolverError> {
        let (m, n) = self.a.shape();
        if y.len() != m {
            return Err(LinalgError::DimensionMismatch {
                expected: m,
                actual: y.len(),
            }
            .into());
        }
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(SolverError::InvalidInput(format!("eta must be finite and >= 0, got {eta}")));
        }
        if y.iter().any(|z| !z.is_finite()) {
            return Err(SolverError::InvalidInput("measurements have non-finite entries".into()));
        }
        let y_norm = norm2(y);
        if y_norm <= eta {
            // Zero is feasible and has the smallest possible l1 norm.
            return Ok(SolveReport {
                x_hat: vec![Complex64::new(0.0, 0.0); n],
                objective: 0.0,
                feasibility_residual: y_norm,
                eta,
                iterations: 0,
                converged: true,
                dual_objective: 0.0,
                duality_gap: 0.0,
                preconditioned: false,
            });
        }
        let tol_f = self.options.feasibility_tol * y_norm.max(1.0);

        if eta == 0.0 && self.options.precondition_bp {
            if let Some(l) = &self.factor {
                let (b, b_norm) = self.whitened(l);
                let c = forward_substitute(l, y)?;
                if m == n {
                    return Ok(square_bp(self.a, y, b, &c));
                }
                let run = Iteration {
                    k: b,
                    k_norm: *b_norm,
                    data: &c,
                    radius: 0.0,
                    original: Some((self.a, y)),
                    tol_f,
                    options: &self.options,
                    detect_infeasible: false,
                };
                let mut report = run.run()?;
                report.preconditioned = true;
                return Ok(report);
            }
        }
        Iteration {
            k: self.a,
            k_norm: self.norm,
            data: y,
            radius: eta,
            original: None,
            tol_f,
            options: &self.options,
            detect_infeasible: self.factor.is_none(),
        }
        .run()
    }
}

/// Square full-rank BP: the feasible set is the single point `B* c` with `B`
/// unitary. `w = -B u` with `u` the phases of that point closes the gap.
fn square_bp(a: &CMatrix, y: &[Complex64], b: &CMatrix, c: &[Complex64]) -> SolveReport {
    let n = b.cols();
    let mut z = vec![Complex64::new(0.0, 0.0); n];
    b.apply_adjoint_into(c, &mut z);
    let phases: CVector = z
        .iter()
        .map(|v| if v.norm() > 0.0 { v / v.norm() } else { Complex64::new(0.0, 0.0) })
        .collect();
    let mut bu = vec![Complex64::new(0.0, 0.0); n];
    b.apply_into(&phases, &mut bu);
    let dual: f64 = bu.iter().zip(c).map(|(p, q)| (p.conj() * q).re).sum();
    let mut scratch = vec![Complex64::new(0.0, 0.0); a.rows()];
    let objective = norm1(&z);
    SolveReport {
        feasibility_residual: residual_norm(a, &z, y, &mut scratch),
        x_hat: z,
        objective,
        eta: 0.0,
        iterations: 0,
        converged: true,
        dual_objective: dual,
        duality_gap: objective - dual,
        preconditioned: true,
    }
}

struct Iteration<'a> {
    k: &'a CMatrix,
    k_norm: f64,
    data: &'a [Complex64],
    radius: f64,
    /// `(A, y)` when iterating on a whitened copy, for reporting the true residual.
    original: Option<(&'a CMatrix, &'a [Complex64])>,
    tol_f: f64,
    options: &'a SolverOptions,
    detect_infeasible: bool,
}

#[inline]
fn soft_threshold(v: Complex64, t: f64) -> Complex64 {
    let a = v.norm();
    if a > t {
        v * (1.0 - t / a)
    } else {
        Complex64::new(0.0, 0.0)
    }
}

fn residual_norm(a: &CMatrix, z: &[Complex64], y: &[Complex64], scratch: &mut [Complex64]) -> f64 {
    a.apply_into(z, scratch);
    scratch.iter_mut().zip(y).for_each(|(s, yi)| *s -= yi);
    norm2(scratch)
}

/// Merit and certificate of one candidate point.
struct Evaluation {
    feasibility: f64,
    dual: f64,
    objective: f64,
    gap: f64,
    excess: f64,
    /// Relative infeasibility plus relative gap; drives restarts and best-iterate tracking.
    merit: f64,
}

/// PDLP-style restart thresholds.
const RESTART_SUFFICIENT: f64 = 0.2;
const RESTART_NECESSARY: f64 = 0.8;
const RESTART_ARTIFICIAL: f64 = 0.36;
/// Weight of the newest movement ratio in the smoothed step ratio.
const RATIO_SMOOTHING: f64 = 0.5;

impl Iteration<'_> {
    fn evaluate(&self, z: &[Complex64], kz: &[Complex64], w: &[Complex64], ktw: &[Complex64], scratch: &mut [Complex64]) -> Evaluation {
        let feasibility = match self.original {
            Some((a, y)) => residual_norm(a, z, y, scratch),
            None => kz
                .iter()
                .zip(self.data)
                .map(|(p, q)| (p - q).norm_sqr())
                .sum::<f64>()
                .sqrt(),
        };
        // Scale w into {|K* w|_inf <= 1}; then D(w) = -Re<w, c> - eta |w|.
        let scale = norm_inf(ktw).max(1.0);
        let inner: f64 = w.iter().zip(self.data).map(|(wi, ci)| (wi.conj() * ci).re).sum();
        let dual = -inner / scale - self.radius * norm2(w) / scale;
        let objective = norm1(z);
        let gap = objective - dual;
        let excess = (feasibility - self.radius - self.tol_f).max(0.0);
        // An infeasible z can undercut the optimum, so the gap counts in absolute value.
        let merit = excess / norm2(self.data).max(1.0) + gap.abs() / objective.max(1.0);
        Evaluation {
            feasibility,
            dual,
            objective,
            gap,
            excess,
            merit,
        }
    }

    fn converged(&self, e: &Evaluation) -> bool {
        e.excess == 0.0 && e.gap <= self.options.objective_tol * e.objective.abs().max(1.0)
    }

    fn run(&self) -> Result<SolveReport, SolverError> {
        let (m, n) = self.k.shape();
        let opts = self.options;
        let zero = Complex64::new(0.0, 0.0);
        if self.k_norm == 0.0 {
            return Err(SolverError::InvalidInput(
                "sensing matrix is zero but the measurements are not".into(),
            ));
        }
        // sqrt(tau / sigma): balances primal and dual progress. |data| / sqrt(N) scales
        // like |x| / |w| when (A, y, eta) is scaled, so the default is scale covariant.
        let mut ratio = opts
            .step_ratio
            .unwrap_or_else(|| opts.step_ratio_factor * norm2(self.data) / (n as f64).sqrt());
        let mut tau = opts.step_safety * ratio / self.k_norm;
        let mut sigma = opts.step_safety / (ratio * self.k_norm);

        let mut z = vec![zero; n];
        let mut w = vec![zero; m];
        let mut kz = vec![zero; m];
        let mut kz_old = vec![zero; m];
        let mut ktw = vec![zero; n];
        let mut scratch = vec![zero; self.original.map_or(0, |(a, _)| a.rows())];

        // Running sums since the last restart, with their images under K and K*.
        let mut sum_z = vec![zero; n];
        let mut sum_kz = vec![zero; m];
        let mut sum_w = vec![zero; m];
        let mut sum_ktw = vec![zero; n];
        let mut avg = (vec![zero; n], vec![zero; m], vec![zero; m], vec![zero; n]);
        let mut count = 0usize;
        let mut anchor_z = z.clone();
        let mut anchor_w = w.clone();
        let mut anchor_merit = f64::INFINITY;
        let mut previous_candidate = f64::INFINITY;
        let mut last_restart = 0usize;

        let mut best: Option<(f64, SolveReport)> = None;
        let mut infeasible_run = 0usize;

        for it in 1..=opts.max_iterations {
            // Dual step: w <- prox_{sigma g*}(w + sigma K (2 z_k - z_{k-1})).
            for i in 0..m {
                w[i] += sigma * (2.0 * kz[i] - kz_old[i]);
            }
            if self.radius == 0.0 {
                for i in 0..m {
                    w[i] -= sigma * self.data[i];
                }
            } else {
                // v - sigma * proj_ball(v / sigma)
                let dist = w
                    .iter()
                    .zip(self.data)
                    .map(|(wi, ci)| (wi / sigma - ci).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                if dist <= self.radius {
                    w.iter_mut().for_each(|wi| *wi = zero);
                } else {
                    let shrink = 1.0 - self.radius / dist;
                    for i in 0..m {
                        w[i] = (w[i] - sigma * self.data[i]) * shrink;
                    }
                }
            }
            // Primal step: z <- soft(z - tau K* w, tau).
            self.k.apply_adjoint_into(&w, &mut ktw);
            for j in 0..n {
                z[j] = soft_threshold(z[j] - tau * ktw[j], tau);
            }
            std::mem::swap(&mut kz, &mut kz_old);
            self.k.apply_into(&z, &mut kz);

            if opts.restarts {
                count += 1;
                accumulate(&mut sum_z, &z);
                accumulate(&mut sum_kz, &kz);
                accumulate(&mut sum_w, &w);
                accumulate(&mut sum_ktw, &ktw);
            }

            if it % opts.check_every != 0 && it != opts.max_iterations {
                continue;
            }
            let current = self.evaluate(&z, &kz, &w, &ktw, &mut scratch);
            let report = |e: &Evaluation, x: &[Complex64], converged: bool| SolveReport {
                x_hat: x.to_vec(),
                objective: e.objective,
                feasibility_residual: e.feasibility,
                eta: self.radius,
                iterations: it,
                converged,
                dual_objective: e.dual,
                duality_gap: e.gap,
                preconditioned: false,
            };
            if self.converged(&current) {
                return Ok(report(&current, &z, true));
            }
            if best.as_ref().is_none_or(|(b, _)| current.merit < *b) {
                best = Some((current.merit, report(&current, &z, false)));
            }
            if self.detect_infeasible {
                if current.excess > 0.0 && current.dual > current.objective {
                    infeasible_run += opts.check_every;
                    if infeasible_run >= opts.infeasibility_patience {
                        return Err(SolverError::Infeasible {
                            iterations: it,
                            dual_objective: current.dual,
                        });
                    }
                } else {
                    infeasible_run = 0;
                }
            }
            if !opts.restarts || count == 0 {
                continue;
            }

            let inv = 1.0 / count as f64;
            scale_into(&mut avg.0, &sum_z, inv);
            scale_into(&mut avg.1, &sum_kz, inv);
            scale_into(&mut avg.2, &sum_w, inv);
            scale_into(&mut avg.3, &sum_ktw, inv);
            let average = self.evaluate(&avg.0, &avg.1, &avg.2, &avg.3, &mut scratch);
            if self.converged(&average) {
                return Ok(report(&average, &avg.0, true));
            }
            if best.as_ref().is_none_or(|(b, _)| average.merit < *b) {
                best = Some((average.merit, report(&average, &avg.0, false)));
            }
            let use_average = average.merit < current.merit;
            let candidate = if use_average { average.merit } else { current.merit };
            let restart = candidate <= RESTART_SUFFICIENT * anchor_merit
                || (candidate <= RESTART_NECESSARY * anchor_merit && candidate > previous_candidate)
                || (it - last_restart) as f64 >= RESTART_ARTIFICIAL * it as f64;
            previous_candidate = candidate;
            if !restart {
                continue;
            }
            if use_average {
                z.copy_from_slice(&avg.0);
                kz.copy_from_slice(&avg.1);
                w.copy_from_slice(&avg.2);
            }
            kz_old.copy_from_slice(&kz);
            if opts.step_ratio.is_none() {
                let dz = distance(&z, &anchor_z);
                let dw = distance(&w, &anchor_w);
                if dz > 1e-12 && dw > 1e-12 && anchor_merit.is_finite() {
                    ratio = (RATIO_SMOOTHING * (dz / dw).ln() + (1.0 - RATIO_SMOOTHING) * ratio.ln()).exp();
                    tau = opts.step_safety * ratio / self.k_norm;
                    sigma = opts.step_safety / (ratio * self.k_norm);
                }
            }
            anchor_z.copy_from_slice(&z);
            anchor_w.copy_from_slice(&w);
            anchor_merit = candidate;
            previous_candidate = f64::INFINITY;
            last_restart = it;
            count = 0;
            for v in [&mut sum_z, &mut sum_kz, &mut sum_w, &mut sum_ktw] {
                v.iter_mut().for_each(|x| *x = zero);
            }
        }
        let (_, mut report) = best.expect("at least one convergence check runs");
        report.iterations = opts.max_iterations;
        Ok(report)
    }
}

fn accumulate(sum: &mut [Complex64], v: &[Complex64]) {
    sum.iter_mut().zip(v).for_each(|(s, x)| *s += x);
}

fn scale_into(out: &mut [Complex64], v: &[Complex64], factor: f64) {
    out.iter_mut().zip(v).for_each(|(o, x)| *o = x * factor);
}

fn distance(u: &[Complex64], v: &[Complex64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
}

/// Solves `min |z|_1  s.t.  |A z - y|_2 <= eta`.
///
/// Returns the best iterate with `converged = false` when the iteration cap is
/// reached, and [`SolverError::Infeasible`] when `A` is rank deficient and the
/// dual objective keeps exceeding the primal one.
pub fn qcbp_solve(spec: &QcbpSpec<'_>) -> Result<SolveReport, SolverError> {
    PreparedOperator::new(spec.matrix, spec.options)?.solve(spec.y, spec.eta)
}

/// Basis pursuit: [`qcbp_solve`] with `eta = 0` and default options.
pub fn bp_solve(a: &CMatrix, y: &[Complex64]) -> Result<SolveReport, SolverError> {
    qcbp_solve(&QcbpSpec::from_matrix(a, y, 0.0))
}
