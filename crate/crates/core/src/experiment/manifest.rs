//! Run manifests: a TOML file with a format version, one root seed and a job list.
//!
//! ```toml
//! format_version = 1
//! experiment = "demo"
//! output_dir = "out/demo"
//! seed = 7
//! law = { preset = "default-aperiodic" }   # optional
//!
//! [[job]]
//! id = "mean"
//! op = "mean-range"
//! n = [10000, 100000]
//! replicas = 50
//! band = [0.8, 1.1]
//! ```
//!
//! Unknown keys anywhere are errors. Job `k` (zero-based, in file order)
//! draws from stream `(seed, k)`; replica `r` of that job from `(seed, k, r)`.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Deserialize;

use super::ManifestError;
use crate::step_models::{StepDistribution, StepSpec};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub experiment: String,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub law: StepSpec,
    pub jobs: Vec<Job>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Job {
    pub id: String,
    pub op: JobOp,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    format_version: u32,
    experiment: String,
    output_dir: PathBuf,
    seed: u64,
    #[serde(default)]
    law: Option<StepSpec>,
    #[serde(default)]
    job: Vec<toml::Table>,
}

fn default_side() -> f64 {
    4.0
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeanRangeJob {
    pub n: Vec<u64>,
    pub replicas: u64,
    /// Accepted interval for the normalised mean at the largest `n`.
    pub band: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailJob {
    pub n: Vec<u64>,
    pub b: f64,
    pub replicas: u64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HittingJob {
    pub n: u64,
    pub s: f64,
    pub a: [f64; 2],
    pub replicas: u64,
    /// Relative tolerance around the Gaussian target.
    #[serde(default = "HittingJob::default_tolerance")]
    pub tolerance: f64,
}

impl HittingJob {
    fn default_tolerance() -> f64 {
        0.25
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactOracleJob {
    pub n_max: u64,
    pub replicas: u64,
    /// Family-wise coverage of the intervals at each `n`.
    #[serde(default = "ExactOracleJob::default_confidence")]
    pub confidence: f64,
}

impl ExactOracleJob {
    fn default_confidence() -> f64 {
        0.99
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelIdentitiesJob {
    #[serde(default = "default_side")]
    pub side: f64,
    pub n: u64,
    pub steps: [u64; 2],
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateZeroSetJob {
    pub zero: Vec<f64>,
    pub positive: Vec<f64>,
    /// `I(b) <= zero_tol` on `zero`.
    pub zero_tol: f64,
    /// `I(b) >= positive_min` on `positive`.
    pub positive_min: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChiSweepJob {
    pub u: Vec<f64>,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChiLimitsJob {
    pub small_band: [f64; 2],
    pub large_band: [f64; 2],
    /// Largest relative change of `mu_2` with half the grid step on twice the domain.
    pub certify: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateCurveJob {
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoleCutJob {
    pub n: Vec<u64>,
    pub eps: f64,
    pub walks: u64,
    #[serde(default = "default_side")]
    pub side: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BridgeMgfJob {
    pub n: Vec<u64>,
    pub eps: f64,
    pub theta: f64,
    pub x: Vec<[f64; 2]>,
    pub replicas: u64,
    pub max_ratio: f64,
    /// Allowed gap between the log moment and the mean exponent.
    pub centred: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BridgeWeightJob {
    pub n: Vec<u64>,
    pub eps: f64,
    #[serde(default = "default_side")]
    pub side: f64,
    pub y: [f64; 2],
    pub z: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub enum JobOp {
    MeanRange(MeanRangeJob),
    Tail(TailJob),
    Hitting(HittingJob),
    ExactOracle(ExactOracleJob),
    KernelIdentities(KernelIdentitiesJob),
    RateZeroSet(RateZeroSetJob),
    ChiSweep(ChiSweepJob),
    ChiLimits(ChiLimitsJob),
    RateCurve(RateCurveJob),
    HoleCut(HoleCutJob),
    BridgeMgf(BridgeMgfJob),
    BridgeWeight(BridgeWeightJob),
}

/// `(op name, module)` for every operation a job may name.
pub const OPERATIONS: [(&str, &str); 12] = [
    ("mean-range", "range_engine"),
    ("tail", "range_engine"),
    ("hitting", "range_engine"),
    ("exact-oracle", "range_engine"),
    ("kernel-identities", "kernels"),
    ("rate-zero-set", "rate_solver"),
    ("chi-sweep", "rate_solver"),
    ("chi-limits", "rate_solver"),
    ("rate-curve", "rate_solver"),
    ("hole-cut", "skeleton_lab"),
    ("bridge-mgf", "skeleton_lab"),
    ("bridge-weight", "skeleton_lab"),
];

impl JobOp {
    pub fn name(&self) -> &'static str {
        let i = match self {
            JobOp::MeanRange(_) => 0,
            JobOp::Tail(_) => 1,
            JobOp::Hitting(_) => 2,
            JobOp::ExactOracle(_) => 3,
            JobOp::KernelIdentities(_) => 4,
            JobOp::RateZeroSet(_) => 5,
            JobOp::ChiSweep(_) => 6,
            JobOp::ChiLimits(_) => 7,
            JobOp::RateCurve(_) => 8,
            JobOp::HoleCut(_) => 9,
            JobOp::BridgeMgf(_) => 10,
            JobOp::BridgeWeight(_) => 11,
        };
        OPERATIONS[i].0
    }

    fn parse(op: &str, params: toml::Table) -> Result<Self, String> {
        fn take<T: DeserializeOwned>(t: toml::Table) -> Result<T, String> {
            t.try_into().map_err(|e: toml::de::Error| e.message().trim().to_string())
        }
        Ok(match op {
            "mean-range" => JobOp::MeanRange(take(params)?),
            "tail" => JobOp::Tail(take(params)?),
            "hitting" => JobOp::Hitting(take(params)?),
            "exact-oracle" => JobOp::ExactOracle(take(params)?),
            "kernel-identities" => JobOp::KernelIdentities(take(params)?),
            "rate-zero-set" => JobOp::RateZeroSet(take(params)?),
            "chi-sweep" => JobOp::ChiSweep(take(params)?),
            "chi-limits" => JobOp::ChiLimits(take(params)?),
            "rate-curve" => JobOp::RateCurve(take(params)?),
            "hole-cut" => JobOp::HoleCut(take(params)?),
            "bridge-mgf" => JobOp::BridgeMgf(take(params)?),
            "bridge-weight" => JobOp::BridgeWeight(take(params)?),
            other => return Err(format!("unknown operation `{other}`")),
        })
    }

    /// Preconditions checked before any job runs.
    fn validate(&self) -> Result<(), String> {
        fn walk_lengths(ns: &[u64]) -> Result<(), String> {
            check(!ns.is_empty(), "n: need at least one walk length")?;
            check(ns.iter().all(|&n| (16..1 << 30).contains(&n)), "n: lengths must lie in [16, 2^30)")
        }
        fn check(ok: bool, msg: &str) -> Result<(), String> {
            if ok {
                Ok(())
            } else {
                Err(msg.to_string())
            }
        }
        fn increasing(ns: &[u64]) -> Result<(), String> {
            check(ns.windows(2).all(|w| w[0] < w[1]), "n: lengths must be increasing")
        }
        match self {
            JobOp::MeanRange(j) => {
                walk_lengths(&j.n)?;
                increasing(&j.n)?;
                check(j.replicas >= 2, "replicas: need at least 2")?;
                check(j.band[0] <= j.band[1], "band: empty interval")
            }
            JobOp::Tail(j) => {
                walk_lengths(&j.n)?;
                increasing(&j.n)?;
                check(j.b > 0.0 && j.b < 2.0 * std::f64::consts::PI, "b: must lie in (0, 2 pi)")?;
                check(j.replicas >= 1, "replicas: need at least 1")
            }
            JobOp::Hitting(j) => {
                walk_lengths(&[j.n])?;
                check(j.s > 0.0, "s: must be positive")?;
                check(j.a != [0.0, 0.0], "a: target must differ from the origin")?;
                check(j.replicas >= 1, "replicas: need at least 1")?;
                check(j.tolerance > 0.0, "tolerance: must be positive")
            }
            JobOp::ExactOracle(j) => {
                check((1..=8).contains(&j.n_max), "n_max: must lie in 1..=8")?;
                check(j.replicas >= 2, "replicas: need at least 2")?;
                check(j.confidence > 0.0 && j.confidence < 1.0, "confidence: must lie in (0, 1)")
            }
            JobOp::KernelIdentities(j) => {
                check(j.n >= 3, "n: must be at least 3")?;
                check(j.side > 0.0, "side: must be positive")?;
                check(j.steps[0] >= 1 && j.steps[1] >= 1, "steps: must be positive")
            }
            JobOp::RateZeroSet(j) => {
                check(
                    j.zero.iter().chain(&j.positive).all(|&b| b > 0.0 && b.is_finite()),
                    "zero, positive: levels must be positive",
                )?;
                check(j.zero_tol >= 0.0 && j.positive_min >= 0.0, "zero_tol, positive_min: must be nonnegative")
            }
            JobOp::ChiSweep(j) => {
                check(j.u.len() >= 2, "u: need at least two points")?;
                check(j.u.iter().all(|&u| u > 0.0 && u < 1.0), "u: must lie in (0, 1)")?;
                check(j.u.windows(2).all(|w| w[0] < w[1]), "u: must be increasing")?;
                check(j.margin >= 0.0, "margin: must be nonnegative")
            }
            JobOp::ChiLimits(j) => {
                check(j.small_band[0] <= j.small_band[1], "small_band: empty interval")?;
                check(j.large_band[0] <= j.large_band[1], "large_band: empty interval")?;
                check(j.certify > 0.0, "certify: must be positive")
            }
            JobOp::RateCurve(j) => check(j.points >= 1, "points: need at least one"),
            JobOp::HoleCut(j) => {
                walk_lengths(&j.n)?;
                increasing(&j.n)?;
                check(j.eps > 0.0, "eps: must be positive")?;
                check(j.walks >= 1, "walks: need at least one")?;
                check(j.side > 0.0, "side: must be positive")
            }
            JobOp::BridgeMgf(j) => {
                walk_lengths(&j.n)?;
                increasing(&j.n)?;
                check(j.eps > 0.0, "eps: must be positive")?;
                check(j.theta > 0.0 && j.theta <= 2.0, "theta: must lie in (0, 2]")?;
                check(!j.x.is_empty(), "x: need at least one endpoint")?;
                check(j.replicas >= 2, "replicas: need at least 2")?;
                check(j.max_ratio >= 1.0 && j.centred > 0.0, "max_ratio, centred: bad bounds")
            }
            JobOp::BridgeWeight(j) => {
                walk_lengths(&j.n)?;
                increasing(&j.n)?;
                check(j.eps > 0.0, "eps: must be positive")?;
                check(j.side > 0.0, "side: must be positive")?;
                check(j.y != [0.0, 0.0] && j.z != [0.0, 0.0], "y, z: must differ from the origin")
            }
        }
    }
}

impl RunManifest {
    pub fn from_path(path: &Path) -> Result<Self, ManifestError> {
        let text = std::fs::read_to_string(path).map_err(|e| ManifestError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    /// Parse and validate every job; nothing runs if any job is invalid.
    pub fn parse(text: &str) -> Result<Self, ManifestError> {
        let raw: RawManifest = toml::from_str(text).map_err(|e| ManifestError::Syntax(e.to_string()))?;
        if raw.format_version != FORMAT_VERSION {
            return Err(ManifestError::Version {
                found: raw.format_version,
                supported: FORMAT_VERSION,
            });
        }
        let law = raw.law.unwrap_or_default();
        StepDistribution::from_spec(&law).map_err(|e| ManifestError::Field {
            job: "law".into(),
            line: line_of(text, |l| l.starts_with("law"), 0),
            message: e.to_string(),
        })?;
        let mut jobs = Vec::with_capacity(raw.job.len());
        for (index, mut table) in raw.job.into_iter().enumerate() {
            let label = |t: &toml::Table| match t.get("id") {
                Some(toml::Value::String(s)) => s.clone(),
                _ => format!("#{index}"),
            };
            let id = label(&table);
            let line = line_of(text, |l| l == "[[job]]", index);
            let field = |message: String| ManifestError::Field {
                job: id.clone(),
                line,
                message,
            };
            let Some(toml::Value::String(_)) = table.remove("id") else {
                return Err(field("id: missing or not a string".into()));
            };
            let Some(toml::Value::String(op)) = table.remove("op") else {
                return Err(field("op: missing or not a string".into()));
            };
            let module = match table.remove("module") {
                None => None,
                Some(toml::Value::String(m)) => Some(m),
                Some(_) => return Err(field("module: not a string".into())),
            };
            let Some(&(_, owner)) = OPERATIONS.iter().find(|(name, _)| *name == op) else {
                return Err(ManifestError::UnknownOperation { job: id, op });
            };
            if let Some(m) = module {
                if m != owner {
                    return Err(field(format!("module: operation `{op}` belongs to `{owner}`, not `{m}`")));
                }
            }
            let op = JobOp::parse(&op, table).map_err(&field)?;
            op.validate().map_err(&field)?;
            if jobs.iter().any(|j: &Job| j.id == id) {
                return Err(field("id: duplicate job id".into()));
            }
            jobs.push(Job { id, op });
        }
        Ok(Self {
            experiment: raw.experiment,
            output_dir: raw.output_dir,
            seed: raw.seed,
            law,
            jobs,
        })
    }
}

/// One-based line of the `nth` line whose trimmed text satisfies `pred`, 0 if none.
fn line_of(text: &str, pred: impl Fn(&str) -> bool, nth: usize) -> usize {
    text.lines()
        .enumerate()
        .filter(|(_, l)| pred(l.trim()))
        .nth(nth)
        .map_or(0, |(i, _)| i + 1)
}

/// The bundled manifest reproducing every acceptance claim.
pub const PAPER_SUITE: &str = include_str!("../../manifests/paper-suite.toml");
