//! Block decomposition of a walk on the rescaled torus.
//!
//! A walk of length `n` is cut into `m = floor(tau / eps)` blocks of
//! `K = floor(eps T)` steps. The skeleton records the block endpoints, the
//! pair measure puts mass `eps / tau` on each consecutive pair, and the
//! hole-cut range removes visited sites close to block endpoints.

mod bridge;
mod cache;
mod functional;
mod mgf;

pub use bridge::{bridge_hit_prob, BridgeEstimate, BridgeKernel, BridgeTable};
pub use cache::{KernelCache, CACHE_MAGIC, CACHE_VERSION};
pub use functional::{phi_functional, PhiMode};
pub use mgf::{bridge_range_mgf, MgfEstimate};

use thiserror::Error;

use crate::kernels::{KernelError, TorusConfig, TorusPoint};
use crate::range_engine::SiteSet;
use crate::step_models::{RngStream, Site, StepDistribution};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SkeletonError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("block length eps T = {0} is below one step")]
    BlockTooShort(f64),
    #[error("hole radius {q} is not below half the torus side {half_side}")]
    ScaleTooSmall { q: f64, half_side: f64 },
    #[error("bridge weight p_K(y, z) = {0:e} is too small to condition on")]
    ZeroBridgeWeight(f64),
    #[error("table of {cells} cells exceeds the limit {limit}")]
    TooLarge { cells: f64, limit: f64 },
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("cache: {0}")]
    Cache(String),
}

/// Block length `K = floor(eps T)` and block count `m = floor(tau / eps)`.
pub fn blocks(cfg: &TorusConfig, eps: f64) -> Result<(u64, usize), SkeletonError> {
    let tau = cfg.tau();
    if !(eps > 0.0 && eps <= tau * (1.0 + 1e-12)) {
        return Err(SkeletonError::InvalidParameter(format!("eps = {eps} outside (0, tau = {tau}]")));
    }
    let k = eps * cfg.t_scale();
    if k < 1.0 {
        return Err(SkeletonError::BlockTooShort(k));
    }
    let m = ((tau / eps) * (1.0 + 1e-12)).floor() as usize;
    Ok((k.floor() as u64, m.max(1)))
}

/// Positions of one walk, unwrapped, in lattice units.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub positions: Vec<(i32, i32)>,
}

impl Trajectory {
    pub fn simulate(dist: &StepDistribution, n: u64, stream: RngStream) -> Self {
        let mut rng = stream.rng();
        let mut positions = Vec::with_capacity(n as usize + 1);
        let (mut x, mut y) = (0i32, 0i32);
        positions.push((x, y));
        for _ in 0..n {
            let (dx, dy) = dist.sample(&mut rng);
            x += dx as i32;
            y += dy as i32;
            positions.push((x, y));
        }
        Self { positions }
    }

    pub fn len(&self) -> u64 {
        self.positions.len() as u64 - 1
    }

    pub fn is_empty(&self) -> bool {
        self.positions.len() <= 1
    }

    pub fn site(&self, k: u64) -> Site {
        let (x, y) = self.positions[k as usize];
        (x as i64, y as i64)
    }
}

/// The walk observed at the block endpoints `S_{iK}`, `i = 1..=m`, on the torus.
#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonPath {
    pub eps: f64,
    pub cfg: TorusConfig,
    pub block: u64,
    /// Wrapped lattice sites of the skeleton points.
    pub sites: Vec<Site>,
}

impl SkeletonPath {
    pub fn points(&self) -> Vec<TorusPoint> {
        self.sites.iter().map(|&s| self.cfg.site_point(s)).collect()
    }
}

/// Simulate a walk of length `n` and read off its skeleton.
pub fn skeleton_of(
    dist: &StepDistribution,
    cfg: &TorusConfig,
    eps: f64,
    stream: RngStream,
) -> Result<(SkeletonPath, Trajectory), SkeletonError> {
    let (k, m) = blocks(cfg, eps)?;
    let traj = Trajectory::simulate(dist, cfg.n(), stream);
    // integer positions are on the grid already, so x- is just the wrap
    let sites = (1..=m as u64).map(|i| cfg.wrap_site(traj.site(i * k))).collect();
    Ok((
        SkeletonPath {
            eps,
            cfg: *cfg,
            block: k,
            sites,
        },
        traj,
    ))
}

/// Weighted atoms on pairs of torus sites.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalPairMeasure {
    pub cfg: TorusConfig,
    /// Block length of the bridges joining the pairs.
    pub eps: f64,
    pub atoms: Vec<(Site, Site)>,
    pub weights: Vec<f64>,
}

impl EmpiricalPairMeasure {
    pub fn new(cfg: TorusConfig, eps: f64, atoms: Vec<(Site, Site)>, weights: Vec<f64>) -> Result<Self, SkeletonError> {
        if !(eps > 0.0) || atoms.len() != weights.len() || weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(SkeletonError::InvalidParameter("atoms and nonnegative weights must match".into()));
        }
        let atoms = atoms
            .into_iter()
            .map(|(a, b)| (cfg.wrap_site(a), cfg.wrap_site(b)))
            .collect();
        Ok(Self {
            cfg,
            eps,
            atoms,
            weights,
        })
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn first_marginal(&self) -> Vec<Site> {
        self.atoms.iter().map(|a| a.0).collect()
    }

    pub fn second_marginal(&self) -> Vec<Site> {
        self.atoms.iter().map(|a| a.1).collect()
    }
}

/// `L_{n,eps}`: mass `eps / tau` on each consecutive skeleton pair. With
/// `origin_prepended` the first pair starts at the origin.
pub fn pair_measure(sk: &SkeletonPath, origin_prepended: bool) -> EmpiricalPairMeasure {
    let mut chain = Vec::with_capacity(sk.sites.len() + 1);
    if origin_prepended {
        chain.push((0, 0));
    }
    chain.extend_from_slice(&sk.sites);
    let atoms: Vec<(Site, Site)> = chain.windows(2).map(|w| (w[0], w[1])).collect();
    let weight = sk.eps / sk.cfg.tau();
    EmpiricalPairMeasure {
        cfg: sk.cfg,
        eps: sk.eps,
        weights: vec![weight; atoms.len()],
        atoms,
    }
}

/// Hole radius `Q = (log T log log T)^{-1/2}`.
pub fn hole_radius(cfg: &TorusConfig) -> f64 {
    let lt = cfg.t_scale().ln();
    (lt * lt.ln()).sqrt().recip()
}

/// Number of lattice sites strictly within distance `q` of a site.
pub fn ball_sites(cfg: &TorusConfig, q: f64) -> u64 {
    let r2 = q * q * cfg.t_scale();
    let r = r2.sqrt().ceil() as i64;
    let mut count = 0;
    for i in -r..=r {
        for j in -r..=r {
            if ((i * i + j * j) as f64) < r2 {
                count += 1;
            }
        }
    }
    count
}

#[derive(Debug, Clone, PartialEq)]
pub struct HoleCut {
    /// Distinct torus sites visited.
    pub range: u64,
    /// Distinct torus sites left after cutting.
    pub cut_range: u64,
    /// `(range - cut_range) / T`.
    pub deficit: f64,
    /// Sites removed from each block's visited set.
    pub removed: Vec<u64>,
    pub q: f64,
    pub ball_sites: u64,
    /// `(m + 1) * ball_sites / T`: every removed site lies in one of the
    /// `m + 1` balls around block endpoints.
    pub envelope: f64,
}

/// Cut holes of radius `Q` around both endpoints of every block.
///
/// A site visited at an interior time of block `i` within distance `Q` of
/// `S_{(i-1)K}` or `S_{iK}` is removed from that block's visited set; the last
/// block runs to time `n`.
pub fn hole_cut_range(traj: &Trajectory, eps: f64, cfg: &TorusConfig) -> Result<HoleCut, SkeletonError> {
    let lt = cfg.t_scale().ln();
    let q = hole_radius(cfg);
    let half = cfg.torus_len() / 2.0;
    if !(lt.ln() > 0.0) || !(q < half) {
        return Err(SkeletonError::ScaleTooSmall { q, half_side: half });
    }
    let (k, m) = blocks(cfg, eps)?;
    let n = traj.len();
    if n < k * m as u64 {
        return Err(SkeletonError::InvalidParameter(format!("trajectory of {n} steps is shorter than {m} blocks of {k}")));
    }
    let q2 = q * q * cfg.t_scale();
    let near = |a: Site, b: Site| {
        let (di, dj) = cfg.wrap_site((a.0 - b.0, a.1 - b.1));
        ((di * di + dj * dj) as f64) < q2
    };
    let cap = (n as usize / 4).max(64);
    let mut all = SiteSet::with_capacity(cap);
    let mut kept = SiteSet::with_capacity(cap);
    let mut cut = SiteSet::with_capacity(1024);
    let mut removed = Vec::with_capacity(m);
    for i in 0..m as u64 {
        let t0 = i * k;
        let t1 = if i + 1 == m as u64 { n } else { (i + 1) * k };
        let a = cfg.wrap_site(traj.site(t0));
        let b = cfg.wrap_site(traj.site(t1));
        cut.clear();
        for t in t0 + 1..t1 {
            let s = cfg.wrap_site(traj.site(t));
            if near(s, a) || near(s, b) {
                cut.insert(s.0, s.1);
            }
        }
        for t in t0..=t1 {
            let s = cfg.wrap_site(traj.site(t));
            all.insert(s.0, s.1);
            if !cut.contains(s.0, s.1) {
                kept.insert(s.0, s.1);
            }
        }
        removed.push(cut.len() as u64);
    }
    let ball = ball_sites(cfg, q);
    let t = cfg.t_scale();
    Ok(HoleCut {
        range: all.len() as u64,
        cut_range: kept.len() as u64,
        deficit: (all.len() - kept.len()) as f64 / t,
        removed,
        q,
        ball_sites: ball,
        envelope: (m as f64 + 1.0) * ball as f64 / t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn law() -> StepDistribution {
        StepDistribution::default_aperiodic()
    }

    #[test]
    fn skeleton_point_counts() {
        let cfg = TorusConfig::new(4.0, 10_000).unwrap();
        let tau = cfg.tau();
        let (sk, traj) = skeleton_of(&law(), &cfg, tau, RngStream::new(1, 0)).unwrap();
        assert_eq!(sk.sites.len(), 1);
        assert_eq!(traj.len(), 10_000);
        let (sk, _) = skeleton_of(&law(), &cfg, tau / 7.0, RngStream::new(1, 0)).unwrap();
        assert_eq!(sk.sites.len(), 7);
        let (again, _) = skeleton_of(&law(), &cfg, tau / 7.0, RngStream::new(1, 0)).unwrap();
        assert_eq!(sk, again);
        assert!(matches!(
            skeleton_of(&law(), &cfg, 1e-5, RngStream::new(1, 0)),
            Err(SkeletonError::BlockTooShort(_))
        ));
    }

    #[test]
    fn pair_measure_structure() {
        let cfg = TorusConfig::new(4.0, 10_000).unwrap();
        let eps = 0.7;
        let (sk, _) = skeleton_of(&law(), &cfg, eps, RngStream::new(3, 0)).unwrap();
        let mu = pair_measure(&sk, true);
        let m = (cfg.tau() / eps).floor();
        assert_eq!(mu.atoms.len(), m as usize);
        assert!((mu.mass() - m * eps / cfg.tau()).abs() < 1e-12);
        assert!(mu.mass() <= 1.0 && mu.mass() > 1.0 - eps / cfg.tau());
        let first = mu.first_marginal();
        let second = mu.second_marginal();
        assert_eq!(first[0], (0, 0));
        assert_eq!(&first[1..], &second[..second.len() - 1]);
    }

    #[test]
    fn hole_cut_never_increases_range() {
        let cfg = TorusConfig::new(4.0, 20_000).unwrap();
        for r in 0..5 {
            let (_, traj) = skeleton_of(&law(), &cfg, 1.0, RngStream::new(5, r)).unwrap();
            let h = hole_cut_range(&traj, 1.0, &cfg).unwrap();
            assert!(h.cut_range <= h.range);
            assert!(h.deficit <= h.envelope);
            assert_eq!(h.cut_range == h.range, h.removed.iter().all(|&c| c == 0));
        }
    }

    #[test]
    fn hole_cut_rejects_tiny_scales() {
        // at n = 3, log log T is barely positive and Q is about 15
        let cfg = TorusConfig::new(5.0, 3).unwrap();
        let traj = Trajectory::simulate(&law(), 3, RngStream::new(0, 0));
        assert!(matches!(
            hole_cut_range(&traj, 1.0, &cfg),
            Err(SkeletonError::ScaleTooSmall { .. })
        ));
    }

    #[test]
    fn ball_count_matches_area() {
        let cfg = TorusConfig::new(4.0, 1_000_000).unwrap();
        let q = hole_radius(&cfg);
        let exact = ball_sites(&cfg, q) as f64;
        let area = std::f64::consts::PI * q * q * cfg.t_scale();
        assert!((exact / area - 1.0).abs() < 0.02);
    }
}
