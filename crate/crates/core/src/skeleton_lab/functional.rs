//! The functionals `Phi_{n,eta,rho}` and `Phi_{infty,eta,rho}` of a pair measure.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::{BridgeKernel, EmpiricalPairMeasure, SkeletonError};
use crate::kernels::{phi_eps_on, PhiQuadrature};

/// Which bridge weight enters the inner integral.
#[derive(Clone, Copy)]
pub enum PhiMode<'a> {
    /// `2 pi phi_eps` of the Brownian bridge.
    Limit(&'a PhiQuadrature),
    /// `tau b_{n,eps}` of the lattice bridge.
    Finite(&'a dyn BridgeKernel),
}

/// `int dx (1 - exp(-eta sum_atoms w g(y - x, z - x)))` over the torus, with
/// atoms having `y - x` or `z - x` inside the ball of radius `rho` dropped.
///
/// The outer integral is an equal-weight rule on `G = ceil(L / stride)`
/// points per axis. With `rho = 0`, an atom sitting exactly on `x` makes the
/// integrand 1 at that point.
pub fn phi_functional(
    mu: &EmpiricalPairMeasure,
    eta: f64,
    rho: f64,
    stride: usize,
    mode: PhiMode<'_>,
) -> Result<f64, SkeletonError> {
    if !(eta > 0.0) || !(rho >= 0.0) || stride == 0 {
        return Err(SkeletonError::InvalidParameter(format!(
            "need eta > 0, rho >= 0, stride >= 1; got {eta}, {rho}, {stride}"
        )));
    }
    let cfg = &mu.cfg;
    let l = cfg.sites();
    let g = (l as usize).div_ceil(stride) as i64;
    let cell = (cfg.torus_len() / g as f64).powi(2);
    let len = cfg.torus_len();
    let values: Result<Vec<f64>, SkeletonError> = (0..g * g)
        .into_par_iter()
        .map(|idx| {
            let x = (cfg.lo() + (idx / g) * l / g, cfg.lo() + (idx % g) * l / g);
            let mut load = 0.0;
            for (&(y, z), &w) in mu.atoms.iter().zip(&mu.weights) {
                let dy = cfg.wrap_site((y.0 - x.0, y.1 - x.1));
                let dz = cfg.wrap_site((z.0 - x.0, z.1 - x.1));
                let (ry, rz) = (cfg.site_distance(dy, (0, 0)), cfg.site_distance(dz, (0, 0)));
                if ry < rho || rz < rho {
                    continue;
                }
                let weight = match mode {
                    PhiMode::Limit(quad) => {
                        if ry == 0.0 || rz == 0.0 {
                            return Ok(1.0);
                        }
                        let (py, pz) = (cfg.site_point(dy), cfg.site_point(dz));
                        2.0 * PI * phi_eps_on(py, pz, mu.eps, len, 0.0, quad)?
                    }
                    PhiMode::Finite(kernel) => {
                        if dy == (0, 0) || dz == (0, 0) {
                            // the walk sits on x at a block endpoint
                            return Ok(1.0);
                        }
                        kernel.tau() * kernel.bridge(dy, dz)?
                    }
                };
                load += w * weight;
            }
            Ok(-(-eta * load).exp_m1())
        })
        .collect();
    Ok(values?.iter().sum::<f64>() * cell)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::TorusConfig;

    fn measure(cfg: TorusConfig) -> EmpiricalPairMeasure {
        EmpiricalPairMeasure::new(
            cfg,
            0.5,
            vec![((3, 1), (-2, 4)), ((-2, 4), (6, -5)), ((6, -5), (0, 7))],
            vec![1.0 / 3.0; 3],
        )
        .unwrap()
    }

    #[test]
    fn bounded_by_torus_area_and_monotone_in_eta() {
        let cfg = TorusConfig::new(2.0, 400).unwrap();
        let mu = measure(cfg);
        let quad = PhiQuadrature::default();
        let mut last = 0.0;
        for eta in [1e-6, 0.1, 1.0, 10.0] {
            let v = phi_functional(&mu, eta, 0.0, 2, PhiMode::Limit(&quad)).unwrap();
            assert!(v >= last && v <= cfg.torus_len().powi(2) + 1e-12);
            last = v;
        }
        let tiny = phi_functional(&mu, 1e-9, 0.1, 2, PhiMode::Limit(&quad)).unwrap();
        assert!(tiny < 1e-7);
    }

    #[test]
    fn cutoff_only_removes_mass() {
        let cfg = TorusConfig::new(2.0, 400).unwrap();
        let mu = measure(cfg);
        let quad = PhiQuadrature::default();
        let mut last = f64::INFINITY;
        for rho in [0.0, 0.1, 0.2, 0.4] {
            let v = phi_functional(&mu, 2.0, rho, 2, PhiMode::Limit(&quad)).unwrap();
            assert!(v <= last + 1e-12, "rho = {rho}");
            last = v;
        }
    }
}
