//! Monte Carlo estimation of range statistics on Z^2.
//!
//! Every estimator draws replica `r` from the stream `stream.replica(r)` and
//! reduces results in replica order, so outputs depend only on the root seed,
//! the job index and the replica count, never on thread scheduling.

mod exact;
mod site_set;

pub use exact::{exact_range_distribution, ExactRangeLaw, EXACT_LEAF_LIMIT};
pub use site_set::SiteSet;

use std::f64::consts::PI;

use rayon::prelude::*;
use thiserror::Error;

use crate::quadrature::GaussRule;
use crate::stats::{log_mean_exp, mean_stderr, wilson_interval, Z95};
use crate::step_models::{RngStream, Site, StepDistribution};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RangeError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("enumeration needs {leaves} leaves, limit is {limit}")]
    TooLarge { leaves: f64, limit: f64 },
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<(), RangeError> {
    if cond {
        Ok(())
    } else {
        Err(RangeError::InvalidParameter(msg()))
    }
}

/// Speed `log n` and scale `n / log n`.
pub fn scales(n: u64) -> (f64, f64) {
    let tau = (n as f64).ln();
    (tau, n as f64 / tau)
}

/// One simulated range value with its provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeSample {
    pub n: u64,
    pub value: u64,
    pub stream: RngStream,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub n: u64,
    pub replicas: u64,
    pub mean: f64,
    pub stderr: f64,
}

impl MeanEstimate {
    /// `mean * log n / (2 pi n)`, which tends to 1.
    pub fn normalized(&self) -> f64 {
        let (tau, _) = scales(self.n);
        self.mean * tau / (2.0 * PI * self.n as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailEstimate {
    pub b: f64,
    pub n: u64,
    pub replicas: u64,
    pub hits: u64,
    pub p_hat: f64,
    pub ci95: (f64, f64),
    /// `-log(p_hat) / log n`; with no hits, the bound `log(replicas) / log n`.
    pub ldp_value: f64,
    /// Set when no replica fell below the level; `ldp_value` is then a lower bound.
    pub zero_hits: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    pub k: f64,
    pub n: u64,
    pub replicas: u64,
    pub estimate: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HittingEstimate {
    pub target_site: Site,
    pub s: f64,
    pub n: u64,
    pub replicas: u64,
    pub hits: u64,
    /// `log n * P(H_x < s T)`.
    pub scaled: f64,
    pub scaled_ci95: (f64, f64),
}

/// Walk `n` steps from the origin and count distinct visited sites.
pub fn range_of_walk<R: rand::Rng + ?Sized>(dist: &StepDistribution, n: u64, rng: &mut R, set: &mut SiteSet) -> u64 {
    set.clear();
    let (mut x, mut y) = (0i64, 0i64);
    set.insert(0, 0);
    for _ in 0..n {
        let (dx, dy) = dist.sample(rng);
        x += dx;
        y += dy;
        set.insert(x, y);
    }
    set.len() as u64
}

/// Range of one trajectory read off at increasing checkpoints (monotone by construction).
pub fn range_at_checkpoints(dist: &StepDistribution, checkpoints: &[u64], stream: RngStream) -> Vec<u64> {
    let mut rng = stream.rng();
    let last = checkpoints.iter().copied().max().unwrap_or(0);
    let mut set = SiteSet::with_capacity(capacity_hint(last));
    set.insert(0, 0);
    let (mut x, mut y) = (0i64, 0i64);
    let mut sorted: Vec<(usize, u64)> = checkpoints.iter().copied().enumerate().collect();
    sorted.sort_by_key(|c| c.1);
    let mut values = vec![0; checkpoints.len()];
    let mut step = 0;
    for (idx, cp) in sorted {
        while step < cp {
            let (dx, dy) = dist.sample(&mut rng);
            x += dx;
            y += dy;
            set.insert(x, y);
            step += 1;
        }
        values[idx] = set.len() as u64;
    }
    values
}

fn capacity_hint(n: u64) -> usize {
    let (_, t) = scales(n.max(3));
    (2.0 * PI * t * 1.5) as usize + 64
}

fn check_len(n: u64) -> Result<(), RangeError> {
    require(n >= 1, || "walk length must be at least 1".into())?;
    require(n < 1 << 30, || format!("walk length {n} exceeds 2^30"))
}

/// One trajectory of length `n`.
pub fn simulate_range(dist: &StepDistribution, n: u64, stream: RngStream) -> Result<RangeSample, RangeError> {
    check_len(n)?;
    let mut set = SiteSet::with_capacity(capacity_hint(n));
    let value = range_of_walk(dist, n, &mut stream.rng(), &mut set);
    Ok(RangeSample { n, value, stream })
}

/// Ranges of `replicas` independent walks, in replica order.
pub fn sample_ranges(
    dist: &StepDistribution,
    n: u64,
    replicas: u64,
    stream: RngStream,
) -> Result<Vec<u64>, RangeError> {
    check_len(n)?;
    let cap = capacity_hint(n);
    Ok((0..replicas)
        .into_par_iter()
        .map_init(
            || SiteSet::with_capacity(cap),
            |set, r| range_of_walk(dist, n, &mut stream.replica(r).rng(), set),
        )
        .collect())
}

pub fn estimate_mean_range(
    dist: &StepDistribution,
    n: u64,
    replicas: u64,
    stream: RngStream,
) -> Result<MeanEstimate, RangeError> {
    require(replicas >= 2, || "need at least 2 replicas".into())?;
    let ranges = sample_ranges(dist, n, replicas, stream)?;
    Ok(mean_from_ranges(n, &ranges))
}

pub fn mean_from_ranges(n: u64, ranges: &[u64]) -> MeanEstimate {
    let xs: Vec<f64> = ranges.iter().map(|&r| r as f64).collect();
    let (mean, stderr) = mean_stderr(&xs);
    MeanEstimate {
        n,
        replicas: ranges.len() as u64,
        mean,
        stderr,
    }
}

/// Direct Monte Carlo estimate of `P(R_n <= b n / log n)`.
pub fn estimate_tail(
    dist: &StepDistribution,
    n: u64,
    b: f64,
    replicas: u64,
    stream: RngStream,
) -> Result<TailEstimate, RangeError> {
    require(b > 0.0, || format!("level b = {b} must be positive"))?;
    require(replicas >= 1, || "need at least 1 replica".into())?;
    let ranges = sample_ranges(dist, n, replicas, stream)?;
    Ok(tail_from_ranges(n, b, &ranges))
}

/// Tail estimate at level `b` from precomputed ranges (common random numbers
/// across levels).
pub fn tail_from_ranges(n: u64, b: f64, ranges: &[u64]) -> TailEstimate {
    let (tau, t) = scales(n);
    let threshold = b * t;
    let replicas = ranges.len() as u64;
    let hits = ranges.iter().filter(|&&r| r as f64 <= threshold).count() as u64;
    let p_hat = hits as f64 / replicas as f64;
    let zero_hits = hits == 0;
    let ldp_value = if zero_hits {
        (replicas as f64).ln() / tau
    } else {
        -p_hat.ln() / tau
    };
    TailEstimate {
        b,
        n,
        replicas,
        hits,
        p_hat,
        ci95: wilson_interval(hits, replicas, Z95),
        ldp_value,
        zero_hits,
    }
}

/// Monte Carlo estimate of `E[R_n^k]` for `k` in (0, 1].
pub fn estimate_moment(
    dist: &StepDistribution,
    n: u64,
    k: f64,
    replicas: u64,
    stream: RngStream,
) -> Result<MomentEstimate, RangeError> {
    require(k > 0.0 && k <= 1.0, || format!("moment order {k} outside (0, 1]"))?;
    require(replicas >= 2, || "need at least 2 replicas".into())?;
    let ranges = sample_ranges(dist, n, replicas, stream)?;
    Ok(moment_from_ranges(n, k, &ranges))
}

pub fn moment_from_ranges(n: u64, k: f64, ranges: &[u64]) -> MomentEstimate {
    let xs: Vec<f64> = ranges.iter().map(|&r| (r as f64).powf(k)).collect();
    let (estimate, stderr) = mean_stderr(&xs);
    MomentEstimate {
        k,
        n,
        replicas: ranges.len() as u64,
        estimate,
        stderr,
    }
}

/// `(1 / log n) log mean exp(-c (log n / T) R_n)`.
pub fn exp_functional(
    dist: &StepDistribution,
    n: u64,
    c: f64,
    replicas: u64,
    stream: RngStream,
) -> Result<f64, RangeError> {
    require(c >= 0.0, || format!("c = {c} must be nonnegative"))?;
    require(replicas >= 1, || "need at least 1 replica".into())?;
    let ranges = sample_ranges(dist, n, replicas, stream)?;
    Ok(exp_functional_from_ranges(n, c, &ranges))
}

pub fn exp_functional_from_ranges(n: u64, c: f64, ranges: &[u64]) -> f64 {
    if c == 0.0 {
        return 0.0;
    }
    let (tau, t) = scales(n);
    let xs: Vec<f64> = ranges.iter().map(|&r| -c * tau / t * r as f64).collect();
    log_mean_exp(&xs) / tau
}

/// Estimate `log n * P(H_x < s T)` where `H_x` is the first visit to `x`.
pub fn estimate_hitting(
    dist: &StepDistribution,
    x: Site,
    s: f64,
    n: u64,
    replicas: u64,
    stream: RngStream,
) -> Result<HittingEstimate, RangeError> {
    require(x != (0, 0), || "target site must differ from the origin".into())?;
    require(s > 0.0, || format!("s = {s} must be positive"))?;
    check_len(n)?;
    let (tau, t) = scales(n);
    let horizon = s * t;
    require(horizon >= 1.0, || format!("s T = {horizon} below one step"))?;
    // H_x < s T  <=>  H_x <= ceil(s T) - 1
    let last = horizon.ceil() as u64 - 1;
    let hits: u64 = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream.replica(r).rng();
            let (mut px, mut py) = (0i64, 0i64);
            for _ in 0..last {
                let (dx, dy) = dist.sample(&mut rng);
                px += dx;
                py += dy;
                if (px, py) == x {
                    return 1u64;
                }
            }
            0
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    let (lo, hi) = wilson_interval(hits, replicas, Z95);
    Ok(HittingEstimate {
        target_site: x,
        s,
        n,
        replicas,
        hits,
        scaled: tau * hits as f64 / replicas as f64,
        scaled_ci95: (tau * lo, tau * hi),
    })
}

/// `2 pi int_0^s p_t(a) dt` for the rescaled point `a`, by Gauss-Legendre
/// quadrature of the planar Gaussian kernel.
pub fn hitting_target(a: (f64, f64), s: f64) -> f64 {
    let r2 = a.0 * a.0 + a.1 * a.1;
    assert!(r2 > 0.0 && s > 0.0);
    // Integrate in u = log t; the integrand t p_t(a) is smooth in u.
    let rule = GaussRule::new(16);
    let lo = (r2 / 200.0).min(s * 1e-6).ln();
    let hi = s.ln();
    let panels = 200;
    let width = (hi - lo) / panels as f64;
    (0..panels)
        .map(|k| {
            let a0 = lo + k as f64 * width;
            rule.integrate(a0, a0 + width, |u| {
                let t = u.exp();
                2.0 * PI * t * crate::kernels::gauss(t, r2)
            })
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::exp_integral_e1;

    fn law() -> StepDistribution {
        StepDistribution::default_aperiodic()
    }

    #[test]
    fn range_is_bounded_and_counts_origin() {
        let d = law();
        for r in 0..50 {
            let s = simulate_range(&d, 1, RngStream::new(1, r)).unwrap();
            assert!(s.value == 1 || s.value == 2);
            let s = simulate_range(&d, 37, RngStream::new(1, r)).unwrap();
            assert!(s.value >= 1 && s.value <= 38);
        }
        assert!(simulate_range(&d, 0, RngStream::new(1, 0)).is_err());
    }

    #[test]
    fn checkpoints_are_monotone() {
        let cps = [10, 100, 1000, 5000, 20000];
        let v = range_at_checkpoints(&law(), &cps, RngStream::new(9, 4));
        assert!(v.windows(2).all(|w| w[0] <= w[1]));
        let single = simulate_range(&law(), 20000, RngStream::new(9, 4)).unwrap();
        assert_eq!(v[4], single.value);
    }

    #[test]
    fn estimators_are_reproducible() {
        let d = law();
        let s = RngStream::split(42, 3, 0);
        assert_eq!(
            estimate_mean_range(&d, 500, 2, s).unwrap(),
            estimate_mean_range(&d, 500, 2, s).unwrap()
        );
        assert_eq!(
            estimate_moment(&d, 500, 0.5, 20, s).unwrap(),
            estimate_moment(&d, 500, 0.5, 20, s).unwrap()
        );
    }

    #[test]
    fn mean_range_small_n_sanity_band() {
        let n = 1000;
        let m = estimate_mean_range(&law(), n, 400, RngStream::new(5, 0)).unwrap();
        let scale = 2.0 * PI * n as f64 / (n as f64).ln();
        assert!(m.mean > 0.5 * scale && m.mean < 1.5 * scale, "{m:?}");
    }

    #[test]
    fn tail_edge_cases() {
        let d = law();
        let n = 200;
        let (_, t) = scales(n);
        let b = (n + 1) as f64 / t;
        let est = estimate_tail(&d, n, b, 50, RngStream::new(2, 0)).unwrap();
        assert_eq!(est.p_hat, 1.0);
        assert_eq!(est.ldp_value, 0.0);
        let est = estimate_tail(&d, n, 1e-6, 50, RngStream::new(2, 0)).unwrap();
        assert!(est.zero_hits);
        assert!((est.ldp_value - 50f64.ln() / (n as f64).ln()).abs() < 1e-15);
        assert!(est.ci95.0 <= est.p_hat && est.p_hat <= est.ci95.1);
        assert!(estimate_tail(&d, n, 0.0, 50, RngStream::new(2, 0)).is_err());
    }

    #[test]
    fn tail_and_exp_functional_monotone_under_common_numbers() {
        let n = 2000;
        let ranges = sample_ranges(&law(), n, 300, RngStream::new(8, 0)).unwrap();
        let levels = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0];
        let ps: Vec<f64> = levels.iter().map(|&b| tail_from_ranges(n, b, &ranges).p_hat).collect();
        assert!(ps.windows(2).all(|w| w[0] <= w[1]));
        let cs = [0.0, 0.1, 0.5, 1.0, 3.0];
        let vs: Vec<f64> = cs.iter().map(|&c| exp_functional_from_ranges(n, c, &ranges)).collect();
        assert_eq!(vs[0], 0.0);
        assert!(vs.windows(2).all(|w| w[1] <= w[0]));
        let (_, t) = scales(n);
        for (&c, &v) in cs.iter().zip(&vs) {
            assert!(v <= 0.0 && v >= -c * (n + 1) as f64 / t);
        }
    }

    #[test]
    fn first_moment_matches_mean() {
        let d = law();
        let s = RngStream::new(12, 0);
        let m = estimate_mean_range(&d, 3000, 100, s).unwrap();
        let k1 = estimate_moment(&d, 3000, 1.0, 100, s).unwrap();
        assert!((m.mean - k1.estimate).abs() <= 3.0 * m.stderr);
        assert!(estimate_moment(&d, 3000, 1.5, 100, s).is_err());
    }

    #[test]
    fn hitting_target_is_e1() {
        for (r, s) in [(1.0, 1.0), (0.5, 2.0), (2.0, 0.3)] {
            let got = hitting_target((r, 0.0), s);
            let e1 = exp_integral_e1(r * r / (2.0 * s));
            assert!((got - e1).abs() < 1e-10, "{got} {e1}");
        }
    }

    #[test]
    fn hitting_vanishes_for_tiny_horizon() {
        let n = 10_000;
        let (_, t) = scales(n);
        let est = estimate_hitting(&law(), (40, 0), 2.0 / t, n, 200, RngStream::new(4, 0)).unwrap();
        assert_eq!(est.hits, 0);
        assert!(estimate_hitting(&law(), (0, 0), 1.0, n, 10, RngStream::new(4, 0)).is_err());
    }
}
