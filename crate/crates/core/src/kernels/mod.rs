//! Planar and torus heat kernels.
//!
//! Continuum kernels live on the torus `[-N/2, N/2)^2`; the random walk lives
//! on the rescaled periodic lattice of spacing `h = T^{-1/2}` where
//! `T = n / log n`. Lattice sites are addressed by integer indices in
//! `[-L/2, L/2)` with `L = round(N / h)` sites per side.

mod bridge_weight;
mod lattice;

pub use bridge_weight::{phi_eps, PhiQuadrature};
pub(crate) use bridge_weight::phi_eps_on;
pub(crate) use lattice::grid_symbol;
pub use lattice::{
    circular_convolve, lclt_discrepancy, rw_torus_kernel, rw_torus_kernel_row, KernelMethod, KernelTable,
};

use std::f64::consts::PI;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("time must be positive, got {0}")]
    NonpositiveTime(f64),
    #[error("walk length n = {0} must be at least 3")]
    WalkTooShort(u64),
    #[error("torus side {side} has only {sites} lattice sites per side (need at least 8)")]
    DegenerateTorus { side: f64, sites: f64 },
    #[error("point ({0}, {1}) is not on the lattice")]
    OffGrid(f64, f64),
    #[error("input too close to the origin: |y| = {y}, |z| = {z}, cutoff {cutoff}")]
    SingularInput { y: f64, z: f64, cutoff: f64 },
}

/// Torus side `N` together with the walk length `n` and the scales derived from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusConfig {
    side: f64,
    n: u64,
    t_scale: f64,
    sites: i64,
}

impl TorusConfig {
    pub fn new(side: f64, n: u64) -> Result<Self, KernelError> {
        if n < 3 {
            return Err(KernelError::WalkTooShort(n));
        }
        let t_scale = n as f64 / (n as f64).ln();
        let per_side = side * t_scale.sqrt();
        if !(per_side >= 8.0) {
            return Err(KernelError::DegenerateTorus {
                side,
                sites: per_side,
            });
        }
        Ok(Self {
            side,
            n,
            t_scale,
            sites: per_side.round() as i64,
        })
    }

    /// Config with a prescribed scale `T`, bypassing `n` (test fixtures only).
    #[cfg(test)]
    pub(crate) fn with_t_scale(side: f64, t_scale: f64) -> Self {
        Self {
            side,
            n: 0,
            t_scale,
            sites: (side * t_scale.sqrt()).round() as i64,
        }
    }

    /// Nominal torus side N.
    pub fn side(&self) -> f64 {
        self.side
    }

    /// Side of the periodic lattice actually simulated, `L * h`.
    pub fn torus_len(&self) -> f64 {
        self.sites as f64 * self.spacing()
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Speed `tau = log n`.
    pub fn tau(&self) -> f64 {
        (self.n as f64).ln()
    }

    /// Scale of the mean `T = n / log n`.
    pub fn t_scale(&self) -> f64 {
        self.t_scale
    }

    /// Lattice spacing `h = T^{-1/2}`.
    pub fn spacing(&self) -> f64 {
        self.t_scale().sqrt().recip()
    }

    /// Lattice sites per side.
    pub fn sites(&self) -> i64 {
        self.sites
    }

    /// Smallest site index, `-(L / 2)`.
    pub fn lo(&self) -> i64 {
        -(self.sites / 2)
    }

    /// Wrap a lattice index into `[lo, lo + L)`.
    #[inline]
    pub fn wrap_index(&self, i: i64) -> i64 {
        (i - self.lo()).rem_euclid(self.sites) + self.lo()
    }

    pub fn wrap_site(&self, (i, j): (i64, i64)) -> (i64, i64) {
        (self.wrap_index(i), self.wrap_index(j))
    }

    /// Row-major offset of a (wrapped) site in an `L x L` table.
    #[inline]
    pub fn offset(&self, (i, j): (i64, i64)) -> usize {
        let lo = self.lo();
        let a = (i - lo).rem_euclid(self.sites) as usize;
        let b = (j - lo).rem_euclid(self.sites) as usize;
        a * self.sites as usize + b
    }

    pub fn site_point(&self, (i, j): (i64, i64)) -> TorusPoint {
        let (i, j) = self.wrap_site((i, j));
        let h = self.spacing();
        TorusPoint {
            x: i as f64 * h,
            y: j as f64 * h,
        }
    }

    /// Lattice index of a torus point that lies on the grid.
    pub fn point_site(&self, p: TorusPoint) -> Result<(i64, i64), KernelError> {
        let s = self.t_scale().sqrt();
        let (fi, fj) = (p.x * s, p.y * s);
        let (ri, rj) = (fi.round(), fj.round());
        if (fi - ri).abs() > 1e-6 || (fj - rj).abs() > 1e-6 {
            return Err(KernelError::OffGrid(p.x, p.y));
        }
        Ok(self.wrap_site((ri as i64, rj as i64)))
    }

    /// Torus (minimum-image) distance between two sites, in continuum units.
    pub fn site_distance(&self, a: (i64, i64), b: (i64, i64)) -> f64 {
        let (di, dj) = self.wrap_site((a.0 - b.0, a.1 - b.1));
        (di as f64).hypot(dj as f64) * self.spacing()
    }

    /// `x+`: componentwise `floor(x * T^{1/2})`, not wrapped.
    pub fn project_plus(&self, x: (f64, f64)) -> (i64, i64) {
        let s = self.t_scale().sqrt();
        ((x.0 * s).floor() as i64, (x.1 * s).floor() as i64)
    }
}

/// A point of the continuum torus, coordinates in `[-N/2, N/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusPoint {
    pub x: f64,
    pub y: f64,
}

impl TorusPoint {
    pub fn reduce(x: f64, y: f64, side: f64) -> Self {
        let r = |v: f64| {
            let w = (v + side / 2.0).rem_euclid(side) - side / 2.0;
            // rem_euclid can round up to exactly `side`.
            if w >= side / 2.0 {
                w - side
            } else {
                w
            }
        };
        Self { x: r(x), y: r(y) }
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// `x-`: floor onto the lattice first, then wrap into the fundamental domain.
pub fn project_minus(x: (f64, f64), cfg: &TorusConfig) -> TorusPoint {
    cfg.site_point(cfg.project_plus(x))
}

/// Planar Gaussian kernel `exp(-|x|^2 / 2t) / (2 pi t)`.
pub fn gauss_kernel(t: f64, x: (f64, f64)) -> Result<f64, KernelError> {
    if !(t > 0.0) {
        return Err(KernelError::NonpositiveTime(t));
    }
    Ok(gauss(t, x.0 * x.0 + x.1 * x.1))
}

#[inline]
pub(crate) fn gauss(t: f64, r2: f64) -> f64 {
    (-r2 / (2.0 * t)).exp() / (2.0 * PI * t)
}

/// Number of image shells `Z` kept by [`torus_gauss_kernel`]: the smallest
/// `Z >= 1` with `sum_{k > Z} 8k exp(-((k-1)N)^2 / 2t) / (2 pi t) < tol`.
/// Every image in shell `k` lies at distance at least `(k - 1/2) N` from a
/// point of the fundamental domain, so this bounds the dropped mass.
pub fn image_shells(t: f64, side: f64, tol: f64) -> usize {
    let shell = |k: usize| 8.0 * k as f64 * gauss(t, ((k as f64 - 1.0) * side).powi(2));
    // Shell terms rise (8k growth) and then fall super-exponentially; collect
    // them until negligible and read off the suffix sums.
    let mut terms = vec![0.0, shell(1)];
    let mut k = 2;
    loop {
        let term = shell(k);
        terms.push(term);
        let peaked = term < terms[k - 1];
        if term == 0.0 || (peaked && term < tol * 1e-6) {
            break;
        }
        k += 1;
    }
    let mut tail = 0.0;
    let mut z = terms.len() - 1;
    while z > 1 && tail + terms[z] < tol {
        tail += terms[z];
        z -= 1;
    }
    z
}

/// Wrapped Gaussian kernel on the torus of side `side`, truncated so that the
/// dropped images weigh less than `tol`.
pub fn torus_gauss_kernel(t: f64, x: TorusPoint, side: f64, tol: f64) -> Result<f64, KernelError> {
    if !(t > 0.0) {
        return Err(KernelError::NonpositiveTime(t));
    }
    let z = image_shells(t, side, tol) as i64;
    Ok(wrapped_sum(t, x, side, z))
}

#[inline]
pub(crate) fn wrapped_sum(t: f64, x: TorusPoint, side: f64, shells: i64) -> f64 {
    let mut acc = 0.0;
    for a in -shells..=shells {
        let dx = x.x + side * a as f64;
        for b in -shells..=shells {
            let dy = x.y + side * b as f64;
            acc += gauss(t, dx * dx + dy * dy);
        }
    }
    acc
}

/// Local-CLT error envelope `c * min(t^-2, |x-y|^-2 t^-1)`, up to constants.
pub fn lclt_error_bound(t: f64, x: (f64, f64), y: (f64, f64), c: f64) -> f64 {
    let d2 = (x.0 - y.0).powi(2) + (x.1 - y.1).powi(2);
    let first = t.powi(-2);
    if d2 == 0.0 {
        c * first
    } else {
        c * first.min(1.0 / (d2 * t))
    }
}
