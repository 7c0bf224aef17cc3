//! Summary statistics shared by the estimators.

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;
/// Two-sided 99% normal quantile.
pub const Z99: f64 = 2.575_829_303_548_901;

/// Sample mean and standard error of the mean, accumulated in index order.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Wilson score interval for `hits` successes out of `trials`.
pub fn wilson_interval(hits: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if hits == 0 { 0.0 } else { (centre - half).max(0.0).min(p) };
    let hi = if hits == trials { 1.0 } else { (centre + half).min(1.0).max(p) };
    (lo, hi)
}

/// `log(mean(exp(xs)))` with a max shift.
pub fn log_mean_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let s: f64 = xs.iter().map(|x| (x - m).exp()).sum();
    m + (s / xs.len() as f64).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_contains_point_estimate() {
        for (h, n) in [(0, 10), (3, 10), (10, 10), (500, 1000), (1, 100_000)] {
            let (lo, hi) = wilson_interval(h, n, Z95);
            let p = h as f64 / n as f64;
            assert!(lo <= p && p <= hi, "{h}/{n}: [{lo}, {hi}]");
        }
    }

    #[test]
    fn log_mean_exp_is_stable() {
        let xs = [1000.0, 1000.0 + 2f64.ln()];
        assert!((log_mean_exp(&xs) - (1000.0 + 1.5f64.ln())).abs() < 1e-12);
        assert_eq!(log_mean_exp(&[0.0, 0.0]), 0.0);
    }

    #[test]
    fn mean_and_stderr() {
        let (m, s) = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }
}
