//! The Brownian-bridge hitting weight `phi_eps(y, z)`.

use std::f64::consts::PI;

use super::{gauss, image_shells, wrapped_sum, KernelError, TorusConfig, TorusPoint};
use crate::quadrature::{exp_integral_e1, GaussRule};

/// Quadrature settings for [`phi_eps`].
#[derive(Debug, Clone, PartialEq)]
pub struct PhiQuadrature {
    /// Gauss-Legendre order on each panel.
    pub order: usize,
    /// Geometrically graded panels on each half of the time interval.
    pub panels_per_half: usize,
    /// Width of the analytic end pieces as a fraction of `eps`.
    pub edge_fraction: f64,
    /// Inputs with `|y|` or `|z|` below this are rejected; `None` uses the
    /// lattice spacing of the config.
    pub cutoff: Option<f64>,
}

impl Default for PhiQuadrature {
    fn default() -> Self {
        Self {
            order: 12,
            panels_per_half: 18,
            edge_fraction: 1e-4,
            cutoff: None,
        }
    }
}

/// Kernel on the torus of side `len` with image shells fixed for time `t`.
fn torus_kernel(t: f64, x: TorusPoint, len: f64) -> f64 {
    wrapped_sum(t, x, len, image_shells(t, len, 1e-17) as i64)
}

fn torus_kernel_dt(t: f64, x: TorusPoint, len: f64) -> f64 {
    let shells = image_shells(t, len, 1e-17) as i64;
    let mut acc = 0.0;
    for a in -shells..=shells {
        for b in -shells..=shells {
            let dx = x.x + len * a as f64;
            let dy = x.y + len * b as f64;
            let r2 = dx * dx + dy * dy;
            acc += gauss(t, r2) * (r2 / (2.0 * t * t) - 1.0 / t);
        }
    }
    acc
}

/// `int_0^delta p^(N)_s(y) p^(N)_{eps - s}(z) ds` with the second factor
/// expanded to first order around `s = 0`; the Gaussian part integrates in
/// closed form through E1.
fn edge_piece(y: TorusPoint, z: TorusPoint, eps: f64, delta: f64, len: f64) -> f64 {
    let p = torus_kernel(eps, z, len);
    let dp = torus_kernel_dt(eps, z, len);
    let mut acc = 0.0;
    for a in -1..=1 {
        for b in -1..=1 {
            let dx = y.x + len * a as f64;
            let dy = y.y + len * b as f64;
            let half_r2 = 0.5 * (dx * dx + dy * dy);
            let x = half_r2 / delta;
            if x > 700.0 {
                continue;
            }
            let e1 = exp_integral_e1(x);
            let zeroth = e1 / (2.0 * PI);
            let first = (delta * (-x).exp() - half_r2 * e1) / (2.0 * PI);
            acc += p * zeroth - dp * first;
        }
    }
    acc
}

/// `phi_eps(y, z) = int_0^eps p^(N)_s(-y) p^(N)_{eps-s}(z) ds / p^(N)_eps(z - y)`
/// on the torus of `cfg`.
///
/// The interior `[d, eps - d]` with `d = edge_fraction * eps` is integrated by
/// Gauss-Legendre on panels graded towards both ends; the two end pieces use
/// the closed form of [`edge_piece`].
pub fn phi_eps(
    y: TorusPoint,
    z: TorusPoint,
    eps: f64,
    cfg: &TorusConfig,
    quad: &PhiQuadrature,
) -> Result<f64, KernelError> {
    let len = cfg.torus_len();
    phi_eps_on(y, z, eps, len, quad.cutoff.unwrap_or(cfg.spacing()), quad)
}

pub(crate) fn phi_eps_on(
    y: TorusPoint,
    z: TorusPoint,
    eps: f64,
    len: f64,
    cutoff: f64,
    quad: &PhiQuadrature,
) -> Result<f64, KernelError> {
    if !(eps > 0.0) {
        return Err(KernelError::NonpositiveTime(eps));
    }
    let y = TorusPoint::reduce(y.x, y.y, len);
    let z = TorusPoint::reduce(z.x, z.y, len);
    if y.norm() < cutoff || z.norm() < cutoff {
        return Err(KernelError::SingularInput {
            y: y.norm(),
            z: z.norm(),
            cutoff,
        });
    }
    let neg_y = TorusPoint::reduce(-y.x, -y.y, len);
    let delta = quad.edge_fraction * eps;
    let rule = GaussRule::new(quad.order);
    let integrand = |s: f64| torus_kernel(s, neg_y, len) * torus_kernel(eps - s, z, len);

    let half = 0.5 * eps;
    let ratio = (half / delta).powf(1.0 / quad.panels_per_half as f64);
    let mut interior = 0.0;
    let mut a = delta;
    for k in 0..quad.panels_per_half {
        let b = if k + 1 == quad.panels_per_half { half } else { a * ratio };
        interior += rule.integrate(a, b, integrand);
        interior += rule.integrate(eps - b, eps - a, integrand);
        a = b;
    }
    let left = edge_piece(neg_y, z, eps, delta, len);
    let right = edge_piece(z, neg_y, eps, delta, len);
    let diff = TorusPoint::reduce(z.x - y.x, z.y - y.y, len);
    Ok((interior + left + right) / torus_kernel(eps, diff, len))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> TorusConfig {
        TorusConfig::new(4.0, 100_000).unwrap()
    }

    /// Plain trapezoid on [0, eps] with the integrand's limit 0 at both ends.
    fn trapezoid_oracle(y: TorusPoint, z: TorusPoint, eps: f64, len: f64, points: usize) -> f64 {
        let f = |s: f64| {
            if s <= 0.0 || s >= eps {
                0.0
            } else {
                let neg_y = TorusPoint { x: -y.x, y: -y.y };
                wrapped_sum(s, neg_y, len, 4) * wrapped_sum(eps - s, z, len, 4)
            }
        };
        let h = eps / (points - 1) as f64;
        let mut acc = 0.5 * (f(0.0) + f(eps));
        for i in 1..points - 1 {
            acc += f(i as f64 * h);
        }
        let diff = TorusPoint { x: z.x - y.x, y: z.y - y.y };
        acc * h / wrapped_sum(eps, diff, len, 4)
    }

    #[test]
    fn spot_value_matches_trapezoid() {
        let c = cfg();
        let len = c.torus_len();
        let y = TorusPoint { x: 1.0, y: 0.0 };
        let z = TorusPoint { x: -1.0, y: 0.0 };
        let got = phi_eps(y, z, 1.0, &c, &PhiQuadrature::default()).unwrap();
        let oracle = trapezoid_oracle(y, z, 1.0, len, 10_000);
        assert!((got - oracle).abs() < 1e-5, "{got} vs {oracle}");
    }

    #[test]
    fn refinement_is_stable_near_the_cutoff() {
        let c = cfg();
        let fine = PhiQuadrature {
            order: 24,
            panels_per_half: 40,
            ..PhiQuadrature::default()
        };
        for (y, z) in [
            (TorusPoint { x: 0.05, y: 0.0 }, TorusPoint { x: 0.3, y: -0.2 }),
            (TorusPoint { x: 1.5, y: 1.1 }, TorusPoint { x: -0.7, y: 0.4 }),
        ] {
            let a = phi_eps(y, z, 0.5, &c, &PhiQuadrature::default()).unwrap();
            let b = phi_eps(y, z, 0.5, &c, &fine).unwrap();
            assert!(((a - b) / b).abs() < 1e-6, "{a} {b}");
        }
    }

    #[test]
    fn symmetric_in_its_arguments() {
        let c = cfg();
        let q = PhiQuadrature::default();
        for (y, z) in [
            ((0.3, 0.1), (-1.2, 0.8)),
            ((1.9, -1.9), (0.05, 0.2)),
            ((-0.6, 0.0), (0.0, 0.6)),
        ] {
            let y = TorusPoint { x: y.0, y: y.1 };
            let z = TorusPoint { x: z.0, y: z.1 };
            let a = phi_eps(y, z, 0.7, &c, &q).unwrap();
            let b = phi_eps(z, y, 0.7, &c, &q).unwrap();
            assert!(a >= 0.0);
            assert!((a - b).abs() < 1e-9, "{a} {b}");
        }
    }

    #[test]
    fn decays_away_from_origin() {
        let c = cfg();
        let q = PhiQuadrature::default();
        let eps = 0.05;
        let vals: Vec<f64> = [0.3, 0.8, 1.5, 1.95]
            .iter()
            .map(|&r| {
                let p = TorusPoint { x: r, y: 0.0 };
                phi_eps(p, p, eps, &c, &q).unwrap()
            })
            .collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]), "{vals:?}");
        assert!(vals[3] < 1e-10);
    }

    #[test]
    fn rejects_singular_inputs() {
        let c = cfg();
        let y = TorusPoint { x: 0.5 * c.spacing(), y: 0.0 };
        let z = TorusPoint { x: 1.0, y: 0.0 };
        assert!(matches!(
            phi_eps(y, z, 1.0, &c, &PhiQuadrature::default()),
            Err(KernelError::SingularInput { .. })
        ));
    }
}
