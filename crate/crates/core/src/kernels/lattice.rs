//! Exact transition probabilities of the walk on the periodic lattice.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::{wrapped_sum, KernelError, TorusConfig, TorusPoint};
use crate::step_models::{Site, StepDistribution};

/// Grids with more sites per side than this use the spectral route under
/// [`KernelMethod::Auto`].
pub const DP_MAX_SIDE: i64 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelMethod {
    #[default]
    Auto,
    /// Step-by-step convolution with the step law, O(k L^2 |support|).
    Dp,
    /// Inverse DFT of the k-th power of the characteristic function, O(L^2 log L).
    Spectral,
}

/// Row-major `L x L` table of values indexed by lattice site.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTable {
    cfg: TorusConfig,
    values: Vec<f64>,
}

impl KernelTable {
    pub fn zeros(cfg: &TorusConfig) -> Self {
        let l = cfg.sites() as usize;
        Self {
            cfg: *cfg,
            values: vec![0.0; l * l],
        }
    }

    pub fn delta(cfg: &TorusConfig, at: Site) -> Self {
        let mut t = Self::zeros(cfg);
        t.values[cfg.offset(at)] = 1.0;
        t
    }

    pub fn config(&self) -> &TorusConfig {
        &self.cfg
    }

    pub fn get(&self, s: Site) -> f64 {
        self.values[self.cfg.offset(s)]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Iterate `(site, value)` over the whole grid.
    pub fn iter(&self) -> impl Iterator<Item = (Site, f64)> + '_ {
        let l = self.cfg.sites();
        let lo = self.cfg.lo();
        self.values
            .iter()
            .enumerate()
            .map(move |(k, &v)| ((lo + k as i64 / l, lo + k as i64 % l), v))
    }

    /// One step of the walk: `out(s) = sum_v law(v) * self(s - v)`.
    pub(crate) fn step(&self, dist: &StepDistribution, out: &mut KernelTable) {
        let l = self.cfg.sites() as usize;
        out.values.iter_mut().for_each(|v| *v = 0.0);
        for &((dx, dy), p) in dist.atoms() {
            let di = dx.rem_euclid(l as i64) as usize;
            let dj = dy.rem_euclid(l as i64) as usize;
            for i in 0..l {
                let src = &self.values[i * l..(i + 1) * l];
                let ti = (i + di) % l;
                let dst = &mut out.values[ti * l..(ti + 1) * l];
                // columns j -> j + dj, split at the wrap point
                let split = l - dj;
                for (d, s) in dst[dj..].iter_mut().zip(&src[..split]) {
                    *d += p * s;
                }
                for (d, s) in dst[..dj].iter_mut().zip(&src[split..]) {
                    *d += p * s;
                }
            }
        }
    }
}

/// `p_k(a, .)` for the walk on the periodic lattice of `cfg`.
pub fn rw_torus_kernel_row(
    k: u64,
    a: Site,
    dist: &StepDistribution,
    cfg: &TorusConfig,
    method: KernelMethod,
) -> KernelTable {
    let method = match method {
        KernelMethod::Auto if cfg.sites() > DP_MAX_SIDE => KernelMethod::Spectral,
        KernelMethod::Auto => KernelMethod::Dp,
        m => m,
    };
    match method {
        KernelMethod::Spectral => spectral_row(k, a, dist, cfg),
        _ => {
            let mut cur = KernelTable::delta(cfg, a);
            let mut next = KernelTable::zeros(cfg);
            for _ in 0..k {
                cur.step(dist, &mut next);
                std::mem::swap(&mut cur, &mut next);
            }
            cur
        }
    }
}

/// Exact k-step probability between two grid points of the torus.
pub fn rw_torus_kernel(
    k: u64,
    a: TorusPoint,
    b: TorusPoint,
    dist: &StepDistribution,
    cfg: &TorusConfig,
) -> Result<f64, KernelError> {
    let sa = cfg.point_site(a)?;
    let sb = cfg.point_site(b)?;
    Ok(rw_torus_kernel_row(k, sa, dist, cfg, KernelMethod::Auto).get(sb))
}

/// Characteristic function of the step law at the Fourier modes of the grid,
/// row-major over `(m1, m2) in [0, L)^2`.
pub(crate) fn grid_symbol(dist: &StepDistribution, cfg: &TorusConfig) -> Vec<f64> {
    let l = cfg.sites() as usize;
    let w = 2.0 * PI / l as f64;
    let mut out = Vec::with_capacity(l * l);
    for m1 in 0..l {
        for m2 in 0..l {
            out.push(dist.char_fn(w * m1 as f64, w * m2 as f64));
        }
    }
    out
}

fn spectral_row(k: u64, a: Site, dist: &StepDistribution, cfg: &TorusConfig) -> KernelTable {
    let l = cfg.sites() as usize;
    let exp = i32::try_from(k).ok();
    let mut buf: Vec<Complex64> = grid_symbol(dist, cfg)
        .into_iter()
        .map(|phi| {
            let v = match exp {
                Some(e) => phi.powi(e),
                None => phi.signum().powf(k as f64) * phi.abs().powf(k as f64),
            };
            Complex64::new(v, 0.0)
        })
        .collect();
    inverse_dft_2d(&mut buf, l);
    // buf[u] now holds p_k(0, d) for the displacement d with offset u in [0, L)^2.
    let norm = 1.0 / (l * l) as f64;
    let mut out = KernelTable::zeros(cfg);
    for u1 in 0..l {
        for u2 in 0..l {
            let b = (a.0 + u1 as i64, a.1 + u2 as i64);
            out.values[cfg.offset(b)] = buf[u1 * l + u2].re * norm;
        }
    }
    out
}

pub(crate) fn inverse_dft_2d(buf: &mut [Complex64], l: usize) {
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_inverse(l);
    for row in buf.chunks_exact_mut(l) {
        fft.process(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); l];
    for j in 0..l {
        for i in 0..l {
            col[i] = buf[i * l + j];
        }
        fft.process(&mut col);
        for i in 0..l {
            buf[i * l + j] = col[i];
        }
    }
}

/// Circular convolution of two displacement tables anchored at the origin:
/// `out(s) = sum_u a(u) b(s - u)`.
pub fn circular_convolve(a: &KernelTable, b: &KernelTable) -> KernelTable {
    let cfg = a.cfg;
    let mut out = KernelTable::zeros(&cfg);
    let cells: Vec<(Site, f64)> = a.iter().filter(|(_, v)| *v != 0.0).collect();
    for (s, _) in b.iter() {
        let mut acc = 0.0;
        for &(u, av) in &cells {
            acc += av * b.get((s.0 - u.0, s.1 - u.1));
        }
        out.values[cfg.offset(s)] = acc;
    }
    out
}

/// Largest deviation `max_b |p_K(0, b) - h^2 p^(N)_{K h^2}(b)|` between the
/// lattice kernel after `K = floor(eps T)` steps and the wrapped Gaussian,
/// together with `K`.
pub fn lclt_discrepancy(cfg: &TorusConfig, eps: f64, dist: &StepDistribution) -> (f64, u64) {
    let k = (eps * cfg.t_scale()).floor().max(1.0) as u64;
    let h2 = cfg.spacing().powi(2);
    let t = k as f64 * h2;
    let row = rw_torus_kernel_row(k, (0, 0), dist, cfg, KernelMethod::Auto);
    let len = cfg.torus_len();
    let shells = super::image_shells(t, len, 1e-16) as i64;
    let worst = row
        .iter()
        .map(|(s, p)| {
            let x = cfg.site_point(s);
            (p - h2 * wrapped_sum(t, x, len, shells)).abs()
        })
        .fold(0.0, f64::max);
    (worst, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> TorusConfig {
        // n = 500: T ~ 80.5, 4 * sqrt(T) ~ 35.9 -> 36 sites per side
        TorusConfig::new(4.0, 500).unwrap()
    }

    #[test]
    fn zero_and_one_step() {
        let cfg = small_cfg();
        let d = StepDistribution::default_aperiodic();
        let p0 = rw_torus_kernel_row(0, (3, -2), &d, &cfg, KernelMethod::Dp);
        assert_eq!(p0.get((3, -2)), 1.0);
        assert_eq!(p0.sum(), 1.0);
        let p1 = rw_torus_kernel_row(1, (3, -2), &d, &cfg, KernelMethod::Dp);
        for &(v, w) in d.atoms() {
            assert!((p1.get((3 + v.0, -2 + v.1)) - w).abs() < 1e-15);
        }
    }

    #[test]
    fn one_step_wraps_around() {
        let cfg = small_cfg();
        let d = StepDistribution::default_aperiodic();
        let lo = cfg.lo();
        let hi = lo + cfg.sites() - 1;
        let p1 = rw_torus_kernel_row(1, (hi, 0), &d, &cfg, KernelMethod::Dp);
        assert!((p1.get((lo + 1, 0)) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn dp_and_spectral_agree() {
        let cfg = small_cfg();
        let d = StepDistribution::default_aperiodic();
        for k in [1, 7, 60] {
            let a = rw_torus_kernel_row(k, (2, 5), &d, &cfg, KernelMethod::Dp);
            let b = rw_torus_kernel_row(k, (2, 5), &d, &cfg, KernelMethod::Spectral);
            let diff = a
                .values()
                .iter()
                .zip(b.values())
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            assert!(diff < 1e-13, "k={k} diff={diff}");
        }
    }

    #[test]
    fn rows_sum_to_one_and_are_symmetric() {
        let cfg = small_cfg();
        let d = StepDistribution::default_aperiodic();
        let k = 40;
        let from_a = rw_torus_kernel_row(k, (1, 4), &d, &cfg, KernelMethod::Dp);
        let from_b = rw_torus_kernel_row(k, (-6, 9), &d, &cfg, KernelMethod::Dp);
        assert!((from_a.sum() - 1.0).abs() < 1e-12);
        // equal up to summation order
        assert!((from_a.get((-6, 9)) - from_b.get((1, 4))).abs() < 1e-17);
    }

    #[test]
    fn chapman_kolmogorov() {
        let cfg = small_cfg();
        let d = StepDistribution::default_aperiodic();
        let p3 = rw_torus_kernel_row(3, (0, 0), &d, &cfg, KernelMethod::Dp);
        let p5 = rw_torus_kernel_row(5, (0, 0), &d, &cfg, KernelMethod::Dp);
        let p8 = rw_torus_kernel_row(8, (0, 0), &d, &cfg, KernelMethod::Dp);
        let conv = circular_convolve(&p3, &p5);
        let err = conv
            .values()
            .iter()
            .zip(p8.values())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-10);
    }

    #[test]
    fn point_api_rejects_off_grid() {
        let cfg = small_cfg();
        let d = StepDistribution::default_aperiodic();
        let on = cfg.site_point((1, 0));
        let off = TorusPoint { x: 0.5 * cfg.spacing(), y: 0.0 };
        assert!(matches!(rw_torus_kernel(1, on, off, &d, &cfg), Err(KernelError::OffGrid(..))));
        let origin = cfg.site_point((0, 0));
        assert!((rw_torus_kernel(1, origin, on, &d, &cfg).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn lattice_kernel_approaches_gaussian() {
        let d = StepDistribution::default_aperiodic();
        let mut scaled = Vec::new();
        for n in [1_000u64, 10_000, 100_000] {
            let cfg = TorusConfig::new(4.0, n).unwrap();
            let (err, _) = lclt_discrepancy(&cfg, 1.0, &d);
            scaled.push(err * cfg.t_scale());
        }
        // T * max error -> 0 (the error is o(1/T)).
        assert!(scaled.windows(2).all(|w| w[1] < w[0]), "{scaled:?}");
    }
}
