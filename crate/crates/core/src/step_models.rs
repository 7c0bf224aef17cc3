//! Step distributions on the integer lattice and reproducible random streams.
//!
//! A [`StepDistribution`] is a finite-support law on Z^2 that has been checked
//! to be symmetric, to have identity covariance, to generate the whole
//! lattice and to be aperiodic. Only validated laws can be constructed.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Lattice point in Z^2.
pub type Site = (i64, i64);

const MOMENT_TOL: f64 = 1e-12;
/// Longest word explored by the period check.
pub const PERIOD_WORD_LIMIT: usize = 6;

pub const DEFAULT_APERIODIC: &str = "default-aperiodic";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StepError {
    #[error("empty atom list")]
    Empty,
    #[error("duplicate lattice point ({0}, {1})")]
    DuplicateAtom(i64, i64),
    #[error("weight of atom ({x}, {y}) is {weight}, must be strictly positive")]
    NonPositiveWeight { x: i64, y: i64, weight: f64 },
    #[error("weights sum to {0}, expected 1")]
    BadTotal(f64),
    #[error("law is not symmetric: atom ({x}, {y}) has no mirror of equal weight")]
    NonSymmetric { x: i64, y: i64 },
    #[error("covariance is not the identity: {moment} = {value}, expected {expected}")]
    BadCovariance {
        moment: &'static str,
        value: f64,
        expected: f64,
    },
    #[error("support generates a sublattice of index {index}")]
    NotGenerating { index: i64 },
    #[error("walk has period {period}")]
    Periodic { period: u64 },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("bad fraction {num}/{den}")]
    BadFraction { num: i64, den: i64 },
}

/// How a step law is specified in configuration files.
///
/// Either `{ preset = "default-aperiodic" }` or
/// `{ atoms = [[dx, dy, p_num, p_den], ...] }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum StepSpec {
    Preset { preset: String },
    Atoms { atoms: Vec<[i64; 4]> },
}

impl Default for StepSpec {
    fn default() -> Self {
        StepSpec::Preset {
            preset: DEFAULT_APERIODIC.to_string(),
        }
    }
}

/// A validated finite-support step law.
#[derive(Clone)]
pub struct StepDistribution {
    name: String,
    atoms: Vec<(Site, f64)>,
    alias: WeightedAliasIndex<f64>,
}

impl fmt::Debug for StepDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StepDistribution")
            .field("name", &self.name)
            .field("atoms", &self.atoms)
            .finish()
    }
}

impl PartialEq for StepDistribution {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.atoms == other.atoms
    }
}

impl StepDistribution {
    /// Build a law from a named preset or an explicit atom list.
    pub fn from_spec(spec: &StepSpec) -> Result<Self, StepError> {
        match spec {
            StepSpec::Preset { preset } => Self::preset(preset),
            StepSpec::Atoms { atoms } => {
                let mut list = Vec::with_capacity(atoms.len());
                for &[dx, dy, num, den] in atoms {
                    if den <= 0 || num < 0 {
                        return Err(StepError::BadFraction { num, den });
                    }
                    list.push(((dx, dy), num as f64 / den as f64));
                }
                Self::new("custom", list)
            }
        }
    }

    pub fn preset(name: &str) -> Result<Self, StepError> {
        match name {
            // hold 1/5, axis steps 1/10 each, double axis steps 1/10 each:
            // per-coordinate variance 2*(1/10)*1 + 2*(1/10)*4 = 1.
            DEFAULT_APERIODIC => Self::new(
                DEFAULT_APERIODIC,
                vec![
                    ((0, 0), 0.2),
                    ((1, 0), 0.1),
                    ((-1, 0), 0.1),
                    ((0, 1), 0.1),
                    ((0, -1), 0.1),
                    ((2, 0), 0.1),
                    ((-2, 0), 0.1),
                    ((0, 2), 0.1),
                    ((0, -2), 0.1),
                ],
            ),
            other => Err(StepError::UnknownPreset(other.to_string())),
        }
    }

    pub fn default_aperiodic() -> Self {
        Self::preset(DEFAULT_APERIODIC).expect("default preset is valid")
    }

    /// Validate and build. Checks run in the order
    /// symmetry, generation, covariance, periodicity; the first failure is reported.
    pub fn new(name: &str, atoms: Vec<(Site, f64)>) -> Result<Self, StepError> {
        validate_atoms(&atoms)?;
        check_symmetry(&atoms)?;
        let index = lattice_index(&atoms);
        if index != 1 {
            return Err(StepError::NotGenerating { index });
        }
        check_covariance(&atoms)?;
        let period = period(&atoms);
        if period != 1 {
            return Err(StepError::Periodic { period });
        }
        let weights: Vec<f64> = atoms.iter().map(|a| a.1).collect();
        let alias = WeightedAliasIndex::new(weights).expect("weights validated");
        Ok(Self {
            name: name.to_string(),
            atoms,
            alias,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn atoms(&self) -> &[(Site, f64)] {
        &self.atoms
    }

    /// Largest sup-norm of a step.
    pub fn max_step(&self) -> i64 {
        self.atoms
            .iter()
            .map(|((x, y), _)| x.abs().max(y.abs()))
            .max()
            .unwrap_or(0)
    }

    /// Weight of the atom `v`, zero off the support.
    pub fn weight(&self, v: Site) -> f64 {
        self.atoms
            .iter()
            .find(|(s, _)| *s == v)
            .map_or(0.0, |a| a.1)
    }

    /// Characteristic function E[cos(theta . X)] (real because the law is symmetric).
    pub fn char_fn(&self, t1: f64, t2: f64) -> f64 {
        self.atoms
            .iter()
            .map(|&((x, y), p)| p * (t1 * x as f64 + t2 * y as f64).cos())
            .sum()
    }

    /// Stable 64-bit fingerprint of the atoms, used to key on-disk caches.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |v: u64| {
            for b in v.to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        };
        for &((x, y), p) in &self.atoms {
            eat(x as u64);
            eat(y as u64);
            eat(p.to_bits());
        }
        h
    }

    /// Draw one step in O(1) via the alias table.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Site {
        self.atoms[self.alias.sample(rng)].0
    }
}

fn validate_atoms(atoms: &[(Site, f64)]) -> Result<(), StepError> {
    if atoms.is_empty() {
        return Err(StepError::Empty);
    }
    for (i, &((x, y), w)) in atoms.iter().enumerate() {
        if !(w > 0.0) || !w.is_finite() {
            return Err(StepError::NonPositiveWeight { x, y, weight: w });
        }
        if atoms[..i].iter().any(|a| a.0 == (x, y)) {
            return Err(StepError::DuplicateAtom(x, y));
        }
    }
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    if (total - 1.0).abs() > MOMENT_TOL {
        return Err(StepError::BadTotal(total));
    }
    Ok(())
}

fn check_symmetry(atoms: &[(Site, f64)]) -> Result<(), StepError> {
    for &((x, y), w) in atoms {
        let mirrored = atoms
            .iter()
            .any(|&(s, m)| s == (-x, -y) && (m - w).abs() <= MOMENT_TOL);
        if !mirrored {
            return Err(StepError::NonSymmetric { x, y });
        }
    }
    let (m1, m2) = atoms.iter().fold((0.0, 0.0), |(a, b), &((x, y), p)| {
        (a + p * x as f64, b + p * y as f64)
    });
    debug_assert!(m1.abs() <= MOMENT_TOL && m2.abs() <= MOMENT_TOL);
    Ok(())
}

fn check_covariance(atoms: &[(Site, f64)]) -> Result<(), StepError> {
    let mut c11 = 0.0;
    let mut c22 = 0.0;
    let mut c12 = 0.0;
    for &((x, y), p) in atoms {
        let (x, y) = (x as f64, y as f64);
        c11 += p * x * x;
        c22 += p * y * y;
        c12 += p * x * y;
    }
    for (moment, value, expected) in [("E[X1^2]", c11, 1.0), ("E[X2^2]", c22, 1.0), ("E[X1 X2]", c12, 0.0)] {
        if (value - expected).abs() > MOMENT_TOL {
            return Err(StepError::BadCovariance {
                moment,
                value,
                expected,
            });
        }
    }
    Ok(())
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Index of the subgroup of Z^2 generated by the support (gcd of all 2x2
/// minors); 0 when the support is contained in a line.
pub fn lattice_index(atoms: &[(Site, f64)]) -> i64 {
    let mut g = 0;
    for (i, &((a, b), _)) in atoms.iter().enumerate() {
        for &((c, d), _) in &atoms[i + 1..] {
            g = gcd(g, a * d - b * c);
        }
    }
    g
}

/// Period of the walk: gcd of the lengths (at most [`PERIOD_WORD_LIMIT`]) of
/// words over the support that sum to zero. Returns 0 if no such word exists.
pub fn period(atoms: &[(Site, f64)]) -> u64 {
    use std::collections::HashSet;
    let mut frontier: HashSet<Site> = HashSet::from([(0, 0)]);
    let mut g = 0u64;
    for len in 1..=PERIOD_WORD_LIMIT as u64 {
        let mut next = HashSet::with_capacity(frontier.len() * atoms.len());
        for &(x, y) in &frontier {
            for &((dx, dy), _) in atoms {
                next.insert((x + dx, y + dy));
            }
        }
        if next.contains(&(0, 0)) {
            g = gcd(g as i64, len as i64) as u64;
            if g == 1 {
                break;
            }
        }
        frontier = next;
    }
    g
}

/// A reproducible random stream: one root seed, many independent indices.
///
/// Streams map onto ChaCha8 stream ids, so distinct indices under the same
/// root never overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub root: u64,
    pub index: u64,
}

impl RngStream {
    pub fn new(root: u64, index: u64) -> Self {
        Self { root, index }
    }

    /// Stream for replica `replica` of job `job`: index `job << 32 | replica`.
    pub fn split(root: u64, job: u32, replica: u32) -> Self {
        Self::new(root, (u64::from(job) << 32) | u64::from(replica))
    }

    /// Derived stream for replica `r` of this stream's job.
    pub fn replica(&self, r: u64) -> Self {
        let job = self.index >> 32;
        Self::new(self.root, (job << 32) | (r & 0xffff_ffff))
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.root);
        rng.set_stream(self.index);
        rng
    }
}
