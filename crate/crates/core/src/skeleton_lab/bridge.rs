//! Exact bridge hitting probabilities on the periodic lattice.
//!
//! For a walk started at `y`, `f_k(y)` is the chance of first reaching the
//! origin at step `k`. The renewal identity
//! `p_k(-y) = sum_{j <= k} f_j(y) p_{k-j}(0)` gives `f` from the kernels, and
//! `b(y, z) = sum_{k <= K} f_k(y) p_{K-k}(z) / p_K(z - y)`.

use std::f64::consts::PI;

use super::{blocks, SkeletonError};
use crate::kernels::{KernelTable, TorusConfig, TorusPoint};
use crate::step_models::{Site, StepDistribution};

/// Bridge weights below this are treated as unreachable.
pub(crate) const MIN_BRIDGE_WEIGHT: f64 = 1e-12;
/// Fourier modes whose power has dropped below this are skipped.
const MODE_CUTOFF: f64 = 1e-25;

#[derive(Debug, Clone, PartialEq)]
pub struct BridgeEstimate {
    pub y: TorusPoint,
    pub z: TorusPoint,
    pub eps: f64,
    pub block: u64,
    pub estimate: f64,
    /// Zero: the value is computed exactly, not sampled.
    pub replicas: u64,
    pub ci95: (f64, f64),
}

/// Scalar kernels `p_k(d)`, `k = 0..=K`, for a handful of displacements,
/// summed over the Fourier modes of the grid.
fn scalar_kernels(dist: &StepDistribution, cfg: &TorusConfig, k_max: u64, disp: &[Site]) -> Vec<Vec<f64>> {
    let l = cfg.sites();
    let symbol = crate::kernels::grid_symbol(dist, cfg);
    let mut order: Vec<usize> = (0..symbol.len()).collect();
    order.sort_by(|&a, &b| symbol[b].abs().total_cmp(&symbol[a].abs()));
    let phi: Vec<f64> = order.iter().map(|&i| symbol[i]).collect();
    let cos_table: Vec<f64> = (0..l).map(|j| (2.0 * PI * j as f64 / l as f64).cos()).collect();
    let cosines: Vec<Vec<f64>> = disp
        .iter()
        .map(|&(d1, d2)| {
            order
                .iter()
                .map(|&i| {
                    let (m1, m2) = ((i as i64) / l, (i as i64) % l);
                    cos_table[(m1 * d1 + m2 * d2).rem_euclid(l) as usize]
                })
                .collect()
        })
        .collect();
    let log_cut = MODE_CUTOFF.ln();
    let mut power = vec![1.0; phi.len()];
    let mut active = phi.len();
    let norm = 1.0 / (l * l) as f64;
    let mut out = vec![Vec::with_capacity(k_max as usize + 1); disp.len()];
    for k in 0..=k_max {
        if k > 0 {
            while active > 0 && (phi[active - 1].abs().ln() * k as f64) < log_cut {
                active -= 1;
            }
        }
        for (row, c) in out.iter_mut().zip(&cosines) {
            let s: f64 = power[..active].iter().zip(&c[..active]).map(|(p, c)| p * c).sum();
            row.push(s * norm);
        }
        for (p, f) in power[..active].iter_mut().zip(&phi) {
            *p *= f;
        }
    }
    out
}

/// First-passage law `f_k`, `k = 0..=K`, to the origin from `p_k(-y)` and `p_k(0)`.
fn first_passage(from: &[f64], ret: &[f64]) -> Vec<f64> {
    let mut f = vec![0.0; from.len()];
    for k in 1..from.len() {
        let conv: f64 = (1..k).map(|j| f[j] * ret[k - j]).sum();
        f[k] = from[k] - conv;
    }
    f
}

/// `b_{n,eps}(y, z)`: probability that the torus walk from `y` visits the
/// origin within `K = floor(eps T)` steps given `S_K = z`.
pub fn bridge_hit_prob(
    dist: &StepDistribution,
    cfg: &TorusConfig,
    eps: f64,
    y: TorusPoint,
    z: TorusPoint,
) -> Result<BridgeEstimate, SkeletonError> {
    let (k, _) = blocks(cfg, eps)?;
    let ys = cfg.point_site(y)?;
    let zs = cfg.point_site(z)?;
    if ys == (0, 0) || zs == (0, 0) {
        return Err(SkeletonError::InvalidParameter("endpoints must differ from the origin".into()));
    }
    let neg_y = cfg.wrap_site((-ys.0, -ys.1));
    let gap = cfg.wrap_site((zs.0 - ys.0, zs.1 - ys.1));
    let rows = scalar_kernels(dist, cfg, k, &[neg_y, (0, 0), zs, gap]);
    let weight = rows[3][k as usize];
    if !(weight >= MIN_BRIDGE_WEIGHT) {
        return Err(SkeletonError::ZeroBridgeWeight(weight));
    }
    let f = first_passage(&rows[0], &rows[1]);
    let ku = k as usize;
    let joint: f64 = (1..=ku).map(|j| f[j] * rows[2][ku - j]).sum();
    let b = (joint / weight).clamp(0.0, 1.0);
    Ok(BridgeEstimate {
        y,
        z,
        eps,
        block: k,
        estimate: b,
        replicas: 0,
        ci95: (b, b),
    })
}

/// Bridge hitting weights `b(y, z)` for displacements on a lattice.
pub trait BridgeKernel: Sync {
    /// Speed `tau` multiplying the weight in the finite-n functional.
    fn tau(&self) -> f64;
    fn bridge(&self, y: Site, z: Site) -> Result<f64, SkeletonError>;
}

/// Every `p_k(0, .)` and `f_k(.)` for `k <= K`, giving `b(y, z)` in `O(K)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BridgeTable {
    pub(crate) cfg: TorusConfig,
    pub(crate) block: u64,
    /// `(K + 1) x L x L`, row `k` holding `p_k(0, .)`.
    pub(crate) kernel: Vec<f64>,
    /// `(K + 1) x L x L`, row `k` holding `f_k(.)`.
    pub(crate) first: Vec<f64>,
}

impl BridgeTable {
    /// Largest `(K + 1) L^2` accepted.
    pub const CELL_LIMIT: f64 = 2.5e7;
    /// Largest `K^2 L^2` accepted for the renewal pass.
    pub const WORK_LIMIT: f64 = 4e9;

    pub fn build(dist: &StepDistribution, cfg: &TorusConfig, eps: f64) -> Result<Self, SkeletonError> {
        let (k, _) = blocks(cfg, eps)?;
        let l2 = (cfg.sites() * cfg.sites()) as usize;
        let cells = (k + 1) as f64 * l2 as f64;
        if cells > Self::CELL_LIMIT {
            return Err(SkeletonError::TooLarge {
                cells,
                limit: Self::CELL_LIMIT,
            });
        }
        let work = (k as f64).powi(2) * l2 as f64;
        if work > Self::WORK_LIMIT {
            return Err(SkeletonError::TooLarge {
                cells: work,
                limit: Self::WORK_LIMIT,
            });
        }
        let ku = k as usize;
        let mut kernel = Vec::with_capacity((ku + 1) * l2);
        let mut cur = KernelTable::delta(cfg, (0, 0));
        let mut next = KernelTable::zeros(cfg);
        for step in 0..=ku {
            kernel.extend_from_slice(cur.values());
            if step < ku {
                cur.step(dist, &mut next);
                std::mem::swap(&mut cur, &mut next);
            }
        }
        let origin = cfg.offset((0, 0));
        let ret: Vec<f64> = (0..=ku).map(|j| kernel[j * l2 + origin]).collect();
        // P_y(S_k = 0) = p_k(0, -y); index the target by the start site y.
        let reflect: Vec<usize> = (0..l2)
            .map(|o| {
                let l = cfg.sites();
                let s = (cfg.lo() + o as i64 / l, cfg.lo() + o as i64 % l);
                cfg.offset((-s.0, -s.1))
            })
            .collect();
        let mut first = vec![0.0; (ku + 1) * l2];
        for step in 1..=ku {
            let (done, rest) = first.split_at_mut(step * l2);
            let row = &mut rest[..l2];
            let from = &kernel[step * l2..(step + 1) * l2];
            for (o, v) in row.iter_mut().enumerate() {
                *v = from[reflect[o]];
            }
            for j in 1..step {
                let r = ret[step - j];
                for (v, f) in row.iter_mut().zip(&done[j * l2..(j + 1) * l2]) {
                    *v -= f * r;
                }
            }
        }
        Ok(Self {
            cfg: *cfg,
            block: k,
            kernel,
            first,
        })
    }

    pub fn config(&self) -> &TorusConfig {
        &self.cfg
    }

    pub fn block(&self) -> u64 {
        self.block
    }

    fn l2(&self) -> usize {
        (self.cfg.sites() * self.cfg.sites()) as usize
    }

    /// `p_k(0, d)`.
    pub fn kernel(&self, k: u64, d: Site) -> f64 {
        self.kernel[k as usize * self.l2() + self.cfg.offset(d)]
    }

    /// Probability that the walk from `y` first visits the origin at step `k`.
    pub fn first_passage(&self, k: u64, y: Site) -> f64 {
        self.first[k as usize * self.l2() + self.cfg.offset(y)]
    }
}

impl BridgeKernel for BridgeTable {
    fn tau(&self) -> f64 {
        self.cfg.tau()
    }

    fn bridge(&self, y: Site, z: Site) -> Result<f64, SkeletonError> {
        let k = self.block as usize;
        let l2 = self.l2();
        let weight = self.kernel(self.block, (z.0 - y.0, z.1 - y.1));
        if !(weight >= MIN_BRIDGE_WEIGHT) {
            return Err(SkeletonError::ZeroBridgeWeight(weight));
        }
        let (oy, oz) = (self.cfg.offset(y), self.cfg.offset(z));
        let joint: f64 = (1..=k).map(|j| self.first[j * l2 + oy] * self.kernel[(k - j) * l2 + oz]).sum();
        Ok((joint / weight).clamp(0.0, 1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn law() -> StepDistribution {
        StepDistribution::default_aperiodic()
    }

    #[test]
    fn scalar_kernels_match_dp() {
        let cfg = TorusConfig::new(4.0, 400).unwrap();
        let d = [(3, -2), (0, 0), (-7, 5)];
        let rows = scalar_kernels(&law(), &cfg, 40, &d);
        let mut cur = KernelTable::delta(&cfg, (0, 0));
        let mut next = KernelTable::zeros(&cfg);
        for k in 0..=40 {
            for (row, &s) in rows.iter().zip(&d) {
                assert!((row[k] - cur.get(s)).abs() < 1e-14, "k = {k}, d = {s:?}");
            }
            cur.step(&law(), &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
    }

    #[test]
    fn table_agrees_with_scalar_path() {
        let cfg = TorusConfig::new(4.0, 300).unwrap();
        let eps = 0.5;
        let table = BridgeTable::build(&law(), &cfg, eps).unwrap();
        for (y, z) in [((2, 1), (-3, 4)), ((5, 0), (5, 0)), ((-1, -1), (1, 1))] {
            let a = table.bridge(y, z).unwrap();
            let b = bridge_hit_prob(&law(), &cfg, eps, cfg.site_point(y), cfg.site_point(z))
                .unwrap()
                .estimate;
            assert!((a - b).abs() < 1e-10, "{y:?} {z:?}: {a} vs {b}");
        }
    }

    #[test]
    fn first_passage_is_subprobability() {
        let cfg = TorusConfig::new(4.0, 300).unwrap();
        let table = BridgeTable::build(&law(), &cfg, 1.0).unwrap();
        for y in [(1, 0), (4, -3), (10, 10)] {
            let total: f64 = (0..=table.block()).map(|k| table.first_passage(k, y)).sum();
            assert!((0.0..=1.0 + 1e-12).contains(&total));
            assert!((0..=table.block()).all(|k| table.first_passage(k, y) >= -1e-15));
        }
        assert!((table.first_passage(1, (1, 0)) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn too_large_tables_are_refused() {
        let cfg = TorusConfig::new(4.0, 1_000_000).unwrap();
        assert!(matches!(
            BridgeTable::build(&law(), &cfg, 1.0),
            Err(SkeletonError::TooLarge { .. })
        ));
    }
}
