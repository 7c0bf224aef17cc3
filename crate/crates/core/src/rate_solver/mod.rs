//! The variational problem behind the rate function.
//!
//! `chi(u)` is the infimum of the Dirichlet energy over unit-L2 profiles whose
//! footprint `int (1 - exp(-psi^2))` is at most `u`; `I(b) = chi(b / 2 pi) / 4 pi`.
//! Minimisers are radial and nonincreasing, so everything is solved on a
//! one-dimensional radial grid.

mod lagrangian;
mod profile;

pub use profile::RadialProfile;

use std::f64::consts::PI;

use rayon::prelude::*;
use thiserror::Error;

use crate::quadrature::golden_section;
use lagrangian::{NodeTerm, Outcome, Problem, Settings};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RateError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no convergence: constraint residual {constraint:.3e}, KKT residual {kkt:.3e}")]
    NoConvergence { constraint: f64, kkt: f64 },
    #[error("minimiser reaches the outer radius {r_max} after enlarging the domain")]
    BadDomain { r_max: f64 },
    #[error("rate curve has {samples} usable samples on (0, 2 pi], need at least {needed}")]
    CurveTooCoarse { samples: usize, needed: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Grid intervals `M`.
    pub intervals: usize,
    /// Outer radius in units of the natural length of the problem.
    pub r_max: f64,
    /// Gaussian start widths, in the same units as `r_max`.
    pub start_widths: Vec<f64>,
    pub mu0: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub tol_constraint: f64,
    pub tol_gradient: f64,
    pub tol_monotone: f64,
    /// Mass allowed beyond `0.75 r_max` before the domain is enlarged.
    pub tol_outer_mass: f64,
    pub max_doublings: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            intervals: 400,
            r_max: 8.0,
            start_widths: vec![0.3, 0.7, 1.2, 2.0],
            mu0: 10.0,
            max_outer: 40,
            max_inner: 200,
            tol_constraint: 1e-8,
            tol_gradient: 1e-7,
            tol_monotone: 1e-10,
            tol_outer_mass: 1e-9,
            max_doublings: 3,
        }
    }
}

impl SolverConfig {
    pub fn with_intervals(mut self, m: usize) -> Self {
        self.intervals = m;
        self
    }

    pub fn with_r_max(mut self, r_max: f64) -> Self {
        self.r_max = r_max;
        self
    }

    fn validate(&self) -> Result<(), RateError> {
        if self.intervals < 200 {
            return Err(RateError::InvalidParameter(format!("M = {} below 200", self.intervals)));
        }
        if self.r_max < 5.0 {
            return Err(RateError::InvalidParameter(format!("r_max = {} below 5", self.r_max)));
        }
        if self.start_widths.is_empty() {
            return Err(RateError::InvalidParameter("no start widths".into()));
        }
        Ok(())
    }

    fn settings(&self) -> Settings {
        Settings {
            tol_constraint: self.tol_constraint,
            tol_gradient: self.tol_gradient,
            max_outer: self.max_outer,
            max_inner: self.max_inner,
            mu0: self.mu0,
        }
    }
}

/// A constrained minimiser with its certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub value: f64,
    pub profile: RadialProfile,
    /// `sum w psi^2 - 1`.
    pub resid_mass: f64,
    /// Second constraint residual (footprint minus `u`, or `sum w psi^4 - 1`).
    pub resid_area: f64,
    pub kkt: f64,
    /// Index of the winning start width.
    pub start: usize,
}

/// Natural length of the `chi(u)` minimiser: the disk of area `u` for small
/// `u`, the quartic-norm scale `(2 (1 - u))^{-1/2}` for `u` near 1.
fn natural_length(u: f64) -> f64 {
    (u / (2.0 * (1.0 - u))).sqrt()
}

/// `chi(u)`.
pub fn chi(u: f64, cfg: &SolverConfig) -> Result<Solution, RateError> {
    if !(u > 0.0 && u.is_finite()) {
        return Err(RateError::InvalidParameter(format!("u = {u} must be positive")));
    }
    cfg.validate()?;
    if u >= 1.0 {
        // inf is 0, approached by spreading; return a wide feasible Gaussian.
        let r_max = 4.0 * cfg.r_max;
        let s = r_max / 6.0;
        let mut profile = RadialProfile::from_fn(r_max, cfg.intervals, |r| (-r * r / (2.0 * s * s)).exp());
        normalize(&mut profile);
        return Ok(Solution {
            value: 0.0,
            resid_mass: profile.mass() - 1.0,
            resid_area: (profile.area() - u).min(0.0),
            kkt: 0.0,
            start: 0,
            profile,
        });
    }
    let len = natural_length(u);
    solve_radial([(NodeTerm::Square, 1.0), (NodeTerm::Area, u)], len, cfg)
}

/// `I(b) = chi(b / 2 pi) / 4 pi`.
pub fn rate_i(b: f64, cfg: &SolverConfig) -> Result<f64, RateError> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(RateError::InvalidParameter(format!("b = {b} must be positive")));
    }
    Ok(chi(b / (2.0 * PI), cfg)?.value / (4.0 * PI))
}

/// `mu_2 = inf { |grad psi|^2 : |psi|_2 = 1, |psi|_4 = 1 }`.
pub fn mu2(cfg: &SolverConfig) -> Result<Solution, RateError> {
    cfg.validate()?;
    solve_radial([(NodeTerm::Square, 1.0), (NodeTerm::Quartic, 1.0)], 1.0, cfg)
}

/// Bessel `J_0` by its power series (accurate to rounding for `|x| <= 5`).
pub fn bessel_j0(x: f64) -> f64 {
    let q = -(x * x) / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        term *= q / (k * k) as f64;
        sum += term;
        if term.abs() < 1e-18 {
            break;
        }
    }
    sum
}

/// First positive zero of `J_0`, by bisection on [2, 3].
pub fn j01() -> f64 {
    let (mut lo, mut hi) = (2.0, 3.0);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if bessel_j0(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Principal Dirichlet eigenvalue of the disk of unit area, `pi j01^2`.
pub fn lambda2() -> f64 {
    PI * j01().powi(2)
}

fn normalize(p: &mut RadialProfile) {
    let s = p.mass().sqrt();
    p.values.iter_mut().for_each(|v| *v /= s);
}

fn gaussian_start(r_max: f64, m: usize, width: f64) -> RadialProfile {
    let mut p = RadialProfile::from_fn(r_max, m, |r| (-r * r / (2.0 * width * width)).exp());
    normalize(&mut p);
    p
}

/// Move `x` onto both constraints by Gauss-Newton minimum-norm corrections;
/// returns the input unchanged if that fails.
fn project(terms: [(NodeTerm, f64); 2], p: &RadialProfile) -> RadialProfile {
    let w = p.weights();
    let mut x = p.values.clone();
    let m = p.intervals();
    for _ in 0..100 {
        let mut c = [0.0; 2];
        let mut grads = [vec![0.0; m], vec![0.0; m]];
        for (i, &(term, target)) in terms.iter().enumerate() {
            c[i] = -target;
            for j in 0..m {
                let (f, f1, _) = term.eval(x[j]);
                c[i] += w[j] * f;
                grads[i][j] = f1;
            }
        }
        if c[0].abs().max(c[1].abs()) < 1e-12 {
            let mut out = p.clone();
            out.values = x;
            return out;
        }
        let g = |a: usize, b: usize| (0..m).map(|j| w[j] * grads[a][j] * grads[b][j]).sum::<f64>();
        let (g00, g01, g11) = (g(0, 0), g(0, 1), g(1, 1));
        let det = g00 * g11 - g01 * g01;
        if det.abs() < 1e-300 {
            break;
        }
        let b0 = (g11 * c[0] - g01 * c[1]) / det;
        let b1 = (g00 * c[1] - g01 * c[0]) / det;
        for j in 0..m {
            x[j] -= b0 * grads[0][j] + b1 * grads[1][j];
        }
        if x.iter().any(|v| !v.is_finite()) {
            break;
        }
    }
    p.clone()
}

fn outer_mass(p: &RadialProfile) -> f64 {
    let w = p.weights();
    let cut = 0.75 * p.r_max;
    p.radii()
        .zip(w.iter().zip(&p.values))
        .filter(|(r, _)| *r >= cut)
        .map(|(_, (w, v))| w * v * v)
        .sum()
}

fn solve_radial(terms: [(NodeTerm, f64); 2], len: f64, cfg: &SolverConfig) -> Result<Solution, RateError> {
    let settings = cfg.settings();
    let mut r_max = cfg.r_max * len;
    let mut m = cfg.intervals;
    for _ in 0..=cfg.max_doublings {
        let problem = Problem {
            m,
            dr: r_max / m as f64,
            terms,
        };
        let outcomes: Vec<Outcome> = cfg
            .start_widths
            .par_iter()
            .map(|&sigma| {
                let start = project(terms, &gaussian_start(r_max, m, sigma * len));
                problem.solve(&start.values, &settings)
            })
            .collect();
        let best = outcomes
            .iter()
            .enumerate()
            .filter(|(_, o)| o.converged)
            .min_by(|a, b| a.1.energy.total_cmp(&b.1.energy));
        let Some((start, best)) = best else {
            let worst = outcomes
                .iter()
                .min_by(|a, b| {
                    let va = a.residuals[0].abs().max(a.residuals[1].abs());
                    let vb = b.residuals[0].abs().max(b.residuals[1].abs());
                    va.total_cmp(&vb)
                })
                .expect("at least one start");
            return Err(RateError::NoConvergence {
                constraint: worst.residuals[0].abs().max(worst.residuals[1].abs()),
                kkt: worst.kkt,
            });
        };
        let profile = RadialProfile::new(r_max, best.values.clone());
        if outer_mass(&profile) > cfg.tol_outer_mass {
            r_max *= 2.0;
            m *= 2;
            continue;
        }
        return Ok(Solution {
            value: best.energy,
            profile,
            resid_mass: best.residuals[0],
            resid_area: best.residuals[1],
            kkt: best.kkt,
            start,
        });
    }
    Err(RateError::BadDomain { r_max })
}

/// One sample of the rate curve.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSample {
    pub b: f64,
    pub i: f64,
    pub chi_u: f64,
    pub resid_mass: f64,
    pub resid_area: f64,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateCurve {
    pub samples: Vec<RateSample>,
    /// `I` nonincreasing over the finite samples.
    pub monotone: bool,
}

/// `I` at `b_k = 2 pi k / points`, `k = 1..=points`.
pub fn rate_curve(points: usize, cfg: &SolverConfig) -> Result<RateCurve, RateError> {
    if points == 0 {
        return Err(RateError::InvalidParameter("need at least one point".into()));
    }
    cfg.validate()?;
    let samples: Vec<RateSample> = (1..=points)
        .map(|k| {
            let b = 2.0 * PI * k as f64 / points as f64;
            let u = k as f64 / points as f64;
            match chi(u, cfg) {
                Ok(s) => RateSample {
                    b,
                    i: s.value / (4.0 * PI),
                    chi_u: s.value,
                    resid_mass: s.resid_mass,
                    resid_area: s.resid_area,
                    status: "ok".into(),
                },
                Err(e) => RateSample {
                    b,
                    i: f64::NAN,
                    chi_u: f64::NAN,
                    resid_mass: f64::NAN,
                    resid_area: f64::NAN,
                    status: status_of(&e).into(),
                },
            }
        })
        .collect();
    let finite: Vec<f64> = samples.iter().filter(|s| s.i.is_finite()).map(|s| s.i).collect();
    let monotone = finite.windows(2).all(|w| w[1] <= w[0]);
    Ok(RateCurve { samples, monotone })
}

fn status_of(e: &RateError) -> &'static str {
    match e {
        RateError::NoConvergence { .. } => "no-convergence",
        RateError::BadDomain { .. } => "bad-domain",
        _ => "error",
    }
}

/// Minimum number of usable samples for [`legendre_inf`].
pub const LEGENDRE_MIN_SAMPLES: usize = 32;

/// `inf_b [b c + I(b)]` over the lower convex envelope of the sampled curve.
pub fn legendre_inf(c: f64, curve: &RateCurve) -> Result<f64, RateError> {
    if !(c >= 0.0 && c.is_finite()) {
        return Err(RateError::InvalidParameter(format!("c = {c} must be nonnegative")));
    }
    let mut pts: Vec<(f64, f64)> = curve
        .samples
        .iter()
        .filter(|s| s.i.is_finite() && s.b <= 2.0 * PI * (1.0 + 1e-12))
        .map(|s| (s.b, s.i))
        .collect();
    let covers = pts.iter().any(|p| p.0 >= 2.0 * PI * (1.0 - 1e-12));
    if pts.len() < LEGENDRE_MIN_SAMPLES || !covers {
        return Err(RateError::CurveTooCoarse {
            samples: pts.len(),
            needed: LEGENDRE_MIN_SAMPLES,
        });
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let hull = lower_hull(&pts);
    let envelope = |b: f64| {
        let k = hull.partition_point(|p| p.0 < b).clamp(1, hull.len() - 1);
        let (p, q) = (hull[k - 1], hull[k]);
        p.1 + (q.1 - p.1) * (b - p.0) / (q.0 - p.0)
    };
    let objective = |b: f64| b * c + envelope(b);
    let (k, _) = hull
        .iter()
        .enumerate()
        .map(|(k, p)| (k, p.0 * c + p.1))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("hull nonempty");
    let lo = hull[k.saturating_sub(1)].0;
    let hi = hull[(k + 1).min(hull.len() - 1)].0;
    let (_, refined) = golden_section(lo, hi, 1e-12 * hi, objective);
    Ok(refined.min(hull[k].0 * c + hull[k].1))
}

fn lower_hull(pts: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for &p in pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

/// Samples of `u chi(u)` for small `u` and `chi(u) / (1 - u)` for `u` near 1.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitReport {
    pub lambda2: f64,
    pub mu2: f64,
    /// `(u, u chi(u))` on {0.02, 0.05, 0.1, 0.2}.
    pub small: Vec<(f64, f64)>,
    /// `(u, chi(u) / (1 - u))` on {0.8, 0.9, 0.95}.
    pub large: Vec<(f64, f64)>,
    pub small_decreasing: bool,
    pub large_decreasing: bool,
    /// `0.02 chi(0.02) / lambda2`.
    pub small_ratio: f64,
    /// `chi(0.95) / (0.05 * 2 mu2)`.
    pub large_ratio: f64,
}

pub const SMALL_U: [f64; 4] = [0.02, 0.05, 0.1, 0.2];
pub const LARGE_U: [f64; 3] = [0.8, 0.9, 0.95];

pub fn chi_limit_checks(cfg: &SolverConfig) -> Result<LimitReport, RateError> {
    let l2 = lambda2();
    let m2 = mu2(cfg)?.value;
    let small = SMALL_U
        .iter()
        .map(|&u| Ok((u, u * chi(u, cfg)?.value)))
        .collect::<Result<Vec<_>, RateError>>()?;
    let large = LARGE_U
        .iter()
        .map(|&u| Ok((u, chi(u, cfg)?.value / (1.0 - u))))
        .collect::<Result<Vec<_>, RateError>>()?;
    Ok(LimitReport {
        lambda2: l2,
        mu2: m2,
        small_decreasing: small.windows(2).all(|w| w[1].1 < w[0].1),
        large_decreasing: large.windows(2).all(|w| w[1].1 < w[0].1),
        small_ratio: small[0].1 / l2,
        large_ratio: large[large.len() - 1].1 / (2.0 * m2),
        small,
        large,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bessel_zero_and_eigenvalue() {
        let j = j01();
        assert!((j - 2.404_825_557_695_773).abs() < 1e-13);
        assert!(bessel_j0(j).abs() < 1e-12);
        let l = lambda2();
        assert!((l - 18.168_414_535_537_227).abs() < 1e-10);
        assert!(l < 2.0 * PI * PI);
    }

    #[test]
    fn chi_vanishes_beyond_one() {
        let cfg = SolverConfig::default();
        let s = chi(1.5, &cfg).unwrap();
        assert_eq!(s.value, 0.0);
        assert!(s.resid_mass.abs() < 1e-6 && s.profile.area() <= 1.5);
        assert_eq!(rate_i(2.0 * PI, &cfg).unwrap(), 0.0);
        assert_eq!(rate_i(7.0, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn chi_decreases_and_certifies() {
        let cfg = SolverConfig::default();
        let a = chi(0.3, &cfg).unwrap();
        let b = chi(0.6, &cfg).unwrap();
        assert!(a.value > b.value && b.value > 0.0, "{} {}", a.value, b.value);
        for s in [&a, &b] {
            assert!(s.resid_mass.abs() < 1e-6 && s.resid_area.abs() < 1e-6);
            assert!(s.profile.is_nonincreasing(1e-10), "{}", s.profile.max_increase());
            assert!((s.profile.energy() - s.value).abs() < 1e-12 * s.value);
        }
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = SolverConfig::default().with_intervals(100);
        assert!(chi(0.5, &cfg).is_err());
        assert!(chi(-0.5, &SolverConfig::default()).is_err());
    }

    #[test]
    fn hull_drops_concave_points() {
        let pts = [(0.0, 4.0), (1.0, 3.5), (2.0, 1.0), (3.0, 0.0)];
        let h = lower_hull(&pts);
        assert_eq!(h, vec![(0.0, 4.0), (2.0, 1.0), (3.0, 0.0)]);
    }
}
