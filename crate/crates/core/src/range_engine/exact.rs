//! Exhaustive law of `R_n` for short walks.

use super::RangeError;
use crate::step_models::{Site, StepDistribution};

/// Largest number of step sequences the enumeration will visit.
pub const EXACT_LEAF_LIMIT: f64 = 1e8;

/// `probabilities[r] = P(R_n = r)` for `r = 0..=n+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactRangeLaw {
    pub n: u64,
    pub probabilities: Vec<f64>,
}

impl ExactRangeLaw {
    pub fn mean(&self) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(r, p)| r as f64 * p)
            .sum()
    }

    pub fn second_moment(&self) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(r, p)| (r * r) as f64 * p)
            .sum()
    }

    /// `P(R_n <= m)`.
    pub fn cdf(&self, m: u64) -> f64 {
        self.probabilities
            .iter()
            .take(m as usize + 1)
            .sum()
    }
}

/// Enumerate every step sequence of length `n`.
pub fn exact_range_distribution(dist: &StepDistribution, n: u64) -> Result<ExactRangeLaw, RangeError> {
    let leaves = (dist.atoms().len() as f64).powi(n as i32);
    if leaves > EXACT_LEAF_LIMIT {
        return Err(RangeError::TooLarge {
            leaves,
            limit: EXACT_LEAF_LIMIT,
        });
    }
    let mut probabilities = vec![0.0; n as usize + 2];
    let mut visited: Vec<Site> = Vec::with_capacity(n as usize + 1);
    visited.push((0, 0));
    descend(dist, n, (0, 0), 1.0, &mut visited, &mut probabilities);
    Ok(ExactRangeLaw { n, probabilities })
}

fn descend(dist: &StepDistribution, left: u64, pos: Site, weight: f64, visited: &mut Vec<Site>, out: &mut [f64]) {
    if left == 0 {
        out[visited.len()] += weight;
        return;
    }
    for &((dx, dy), p) in dist.atoms() {
        let next = (pos.0 + dx, pos.1 + dy);
        let fresh = !visited.contains(&next);
        if fresh {
            visited.push(next);
        }
        descend(dist, left - 1, next, weight * p, visited, out);
        if fresh {
            visited.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_step_law() {
        let d = StepDistribution::default_aperiodic();
        let law = exact_range_distribution(&d, 1).unwrap();
        assert!((law.probabilities[1] - 0.2).abs() < 1e-15);
        assert!((law.probabilities[2] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn two_step_mean_by_hand() {
        // R_2 = 1 + [S1 != 0] + [S2 not in {0, S1}].
        let d = StepDistribution::default_aperiodic();
        let law = exact_range_distribution(&d, 2).unwrap();
        let mut mean = 0.0;
        for &(a, pa) in d.atoms() {
            for &(b, pb) in d.atoms() {
                let s1 = a;
                let s2 = (a.0 + b.0, a.1 + b.1);
                let r = 1 + u8::from(s1 != (0, 0)) + u8::from(s2 != (0, 0) && s2 != s1);
                mean += pa * pb * r as f64;
            }
        }
        assert!((law.mean() - mean).abs() < 1e-14);
    }

    #[test]
    fn sums_to_one_and_rejects_large() {
        let d = StepDistribution::default_aperiodic();
        for n in 1..=6 {
            let law = exact_range_distribution(&d, n).unwrap();
            assert!((law.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert_eq!(law.probabilities[0], 0.0);
        }
        assert!(matches!(exact_range_distribution(&d, 9), Err(RangeError::TooLarge { .. })));
    }
}
