use std::cmp::Ordering;
use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::BosError;

/// Multi-index `nu` in `N_0^d`.
pub type MultiIndex = Vec<u32>;

/// A deduplicated, downward-closed set of multi-indices in graded
/// lexicographic order (total degree first, then larger leading components first).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawIndexSet", into = "RawIndexSet")]
pub struct IndexSet {
    dim: usize,
    indices: Vec<MultiIndex>,
}

#[derive(Serialize, Deserialize)]
struct RawIndexSet {
    dim: usize,
    indices: Vec<MultiIndex>,
}

impl TryFrom<RawIndexSet> for IndexSet {
    type Error = BosError;

    fn try_from(raw: RawIndexSet) -> Result<Self, Self::Error> {
        IndexSet::new(raw.dim, raw.indices)
    }
}

impl From<IndexSet> for RawIndexSet {
    fn from(set: IndexSet) -> Self {
        RawIndexSet {
            dim: set.dim,
            indices: set.indices,
        }
    }
}

fn graded_lex(a: &MultiIndex, b: &MultiIndex) -> Ordering {
    let da: u64 = a.iter().map(|&v| u64::from(v)).sum();
    let db: u64 = b.iter().map(|&v| u64::from(v)).sum();
    da.cmp(&db).then_with(|| b.cmp(a))
}

impl IndexSet {
    /// Validates dimension, duplicates and downward closedness, then sorts.
    pub fn new(dim: usize, mut indices: Vec<MultiIndex>) -> Result<Self, BosError> {
        if dim == 0 {
            return Err(BosError::InvalidParameter("index dimension must be >= 1".into()));
        }
        if indices.is_empty() {
            return Err(BosError::InvalidParameter("index set must be non-empty".into()));
        }
        if let Some(bad) = indices.iter().find(|nu| nu.len() != dim) {
            return Err(BosError::InvalidParameter(format!(
                "multi-index {bad:?} has length {} but dimension is {dim}",
                bad.len()
            )));
        }
        let mut seen = HashSet::with_capacity(indices.len());
        for nu in &indices {
            if !seen.insert(nu.clone()) {
                return Err(BosError::InvalidParameter(format!("duplicate multi-index {nu:?}")));
            }
        }
        for nu in &indices {
            for i in 0..dim {
                if nu[i] > 0 {
                    let mut lower = nu.clone();
                    lower[i] -= 1;
                    if !seen.contains(&lower) {
                        return Err(BosError::InvalidParameter(format!(
                            "index set is not downward closed: {nu:?} present but {lower:?} missing"
                        )));
                    }
                }
            }
        }
        indices.sort_by(graded_lex);
        Ok(Self { dim, indices })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn max_degree(&self) -> u32 {
        self.indices
            .iter()
            .flat_map(|nu| nu.iter().copied())
            .max()
            .unwrap_or(0)
    }

    /// Largest number of nonzero components over all indices.
    pub fn max_active(&self) -> usize {
        self.indices
            .iter()
            .map(|nu| nu.iter().filter(|&&v| v > 0).count())
            .max()
            .unwrap_or(0)
    }
}

/// All `nu` in `N_0^d` with `prod_i (nu_i + 1) <= budget`.
pub fn hyperbolic_cross(dim: usize, budget: u64) -> Result<IndexSet, BosError> {
    if dim == 0 || budget == 0 {
        return Err(BosError::InvalidParameter(format!(
            "hyperbolic cross needs dim >= 1 and budget >= 1, got dim={dim}, budget={budget}"
        )));
    }
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(dim);
    extend_cross(dim, budget, 1, &mut current, &mut out);
    IndexSet::new(dim, out)
}

fn extend_cross(
    dim: usize,
    budget: u64,
    product: u64,
    current: &mut MultiIndex,
    out: &mut Vec<MultiIndex>,
) {
    if current.len() == dim {
        out.push(current.clone());
        return;
    }
    let mut k: u64 = 0;
    while product * (k + 1) <= budget {
        current.push(k as u32);
        extend_cross(dim, budget, product * (k + 1), current, out);
        current.pop();
        k += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force enumeration over the full box `[0, budget)^d`.
    fn brute_force(dim: usize, budget: u64) -> Vec<MultiIndex> {
        let side = budget as usize;
        let total = side.pow(dim as u32);
        let mut out = Vec::new();
        for code in 0..total {
            let mut c = code;
            let nu: MultiIndex = (0..dim)
                .map(|_| {
                    let v = c % side;
                    c /= side;
                    v as u32
                })
                .collect();
            let prod: u64 = nu.iter().map(|&v| u64::from(v) + 1).product();
            if prod <= budget {
                out.push(nu);
            }
        }
        out
    }

    #[test]
    fn one_dimensional_cross_is_a_range() {
        let set = hyperbolic_cross(1, 11).unwrap();
        assert_eq!(set.len(), 11);
        let flat: Vec<u32> = set.indices().iter().map(|nu| nu[0]).collect();
        assert_eq!(flat, (0..11).collect::<Vec<_>>());
    }

    #[test]
    fn two_dimensional_budget_three() {
        let set = hyperbolic_cross(2, 3).unwrap();
        let want: Vec<MultiIndex> = vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![0, 2]];
        assert_eq!(set.indices(), want.as_slice());
        let mut brute = brute_force(2, 3);
        brute.sort_by(graded_lex);
        assert_eq!(set.indices(), brute.as_slice());
    }

    #[test]
    fn ten_dimensional_budget_eleven_has_581_indices() {
        let set = hyperbolic_cross(10, 11).unwrap();
        assert_eq!(set.len(), 581);
        assert_eq!(set.max_degree(), 10);
    }

    #[test]
    fn matches_brute_force_on_small_cases() {
        for (dim, budget) in [(2, 7), (3, 5), (4, 4), (3, 9)] {
            let set = hyperbolic_cross(dim, budget).unwrap();
            let mut brute = brute_force(dim, budget);
            brute.sort_by(graded_lex);
            assert_eq!(set.indices(), brute.as_slice(), "dim={dim} budget={budget}");
        }
    }

    #[test]
    fn invariant_under_coordinate_permutation() {
        let set = hyperbolic_cross(3, 8).unwrap();
        let as_set: HashSet<MultiIndex> = set.indices().iter().cloned().collect();
        for nu in set.indices() {
            let rotated = vec![nu[2], nu[0], nu[1]];
            let swapped = vec![nu[1], nu[0], nu[2]];
            assert!(as_set.contains(&rotated));
            assert!(as_set.contains(&swapped));
        }
    }

    #[test]
    fn rejects_non_downward_closed() {
        let err = IndexSet::new(2, vec![vec![0, 0], vec![2, 0]]).unwrap_err();
        assert!(err.to_string().contains("downward closed"));
    }

    #[test]
    fn rejects_duplicates() {
        assert!(IndexSet::new(1, vec![vec![0], vec![0]]).is_err());
    }

    #[test]
    fn serde_round_trip_validates() {
        let set = hyperbolic_cross(3, 4).unwrap();
        let json = serde_json::to_string(&set).unwrap();
        let back: IndexSet = serde_json::from_str(&json).unwrap();
        assert_eq!(set, back);
        let broken = r#"{"dim":1,"indices":[[1]]}"#;
        assert!(serde_json::from_str::<IndexSet>(broken).is_err());
    }
}
