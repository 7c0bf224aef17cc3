//! Manifest-driven runs: every job writes one CSV, every claim one row of
//! `report.csv`.
//!
//! Output directory layout:
//!
//! - `experiment.id`: experiment name, then one job id per line
//! - `<job id>.csv`: the job's table
//! - `report.csv`: `claim,anchor,kind,measured,target,tolerance,values,verdict`
//!
//! Files are written to a temporary name and renamed, so a crash never leaves
//! a truncated table behind. Floats are written as `{:.16e}`.

mod jobs;
mod manifest;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use manifest::{
    BridgeMgfJob, BridgeWeightJob, ChiLimitsJob, ChiSweepJob, ExactOracleJob, HittingJob, HoleCutJob, Job, JobOp,
    KernelIdentitiesJob, MeanRangeJob, RateCurveJob, RateZeroSetJob, RunManifest, TailJob, FORMAT_VERSION,
    OPERATIONS, PAPER_SUITE,
};

use crate::step_models::StepDistribution;

pub const REPORT_FILE: &str = "report.csv";
pub const ID_FILE: &str = "experiment.id";
pub const REPORT_HEADER: [&str; 8] = [
    "claim",
    "anchor",
    "kind",
    "measured",
    "target",
    "tolerance",
    "values",
    "verdict",
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ManifestError {
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("manifest syntax: {0}")]
    Syntax(String),
    #[error("manifest format version {found}, this build reads {supported}")]
    Version { found: u32, supported: u32 },
    #[error("line {line}, job `{job}`: {message}")]
    Field { job: String, line: usize, message: String },
    #[error("job `{job}`: unknown operation `{op}`")]
    UnknownOperation { job: String, op: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RunError {
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{dir} holds experiment `{found}`, refusing to write `{expected}` into it")]
    ExperimentClash { dir: PathBuf, found: String, expected: String },
    /// Absent or unreadable files, each named with the reason.
    #[error("{dir}: missing or unreadable {missing:?}")]
    MissingArtifacts { dir: PathBuf, missing: Vec<String> },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |e| RunError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClaimKind {
    /// Passes when `|measured - target| <= tolerance`.
    Value,
    /// Passes when `values` move in the claimed direction by more than `tolerance` per step.
    Trend,
    /// Passes when `measured <= target`.
    AtMost,
    /// Passes when `measured >= target`.
    AtLeast,
    /// The job producing the claim failed.
    Error,
}

impl ClaimKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ClaimKind::Value => "value",
            ClaimKind::Trend => "trend",
            ClaimKind::AtMost => "at-most",
            ClaimKind::AtLeast => "at-least",
            ClaimKind::Error => "error",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "value" => ClaimKind::Value,
            "trend" => ClaimKind::Trend,
            "at-most" => ClaimKind::AtMost,
            "at-least" => ClaimKind::AtLeast,
            "error" => ClaimKind::Error,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Decreasing,
    Increasing,
    /// Each step may rise by at most the margin.
    NonIncreasing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub claim: String,
    pub anchor: String,
    pub kind: ClaimKind,
    pub measured: f64,
    pub target: f64,
    pub tolerance: f64,
    pub values: Vec<f64>,
    pub pass: bool,
}

impl ReportRow {
    pub fn value(claim: &str, anchor: &str, measured: f64, target: f64, tolerance: f64) -> Self {
        Self {
            claim: claim.into(),
            anchor: anchor.into(),
            kind: ClaimKind::Value,
            measured,
            target,
            tolerance,
            values: vec![measured],
            pass: (measured - target).abs() <= tolerance,
        }
    }

    pub fn at_most(claim: &str, anchor: &str, measured: f64, bound: f64) -> Self {
        Self {
            kind: ClaimKind::AtMost,
            pass: measured <= bound,
            ..Self::value(claim, anchor, measured, bound, 0.0)
        }
    }

    pub fn at_least(claim: &str, anchor: &str, measured: f64, bound: f64) -> Self {
        Self {
            kind: ClaimKind::AtLeast,
            pass: measured >= bound,
            ..Self::value(claim, anchor, measured, bound, 0.0)
        }
    }

    /// Monotone trend; for the strict directions `margin` is the smallest accepted step.
    /// `measured` is the last value, `target` the number of values.
    pub fn trend(claim: &str, anchor: &str, values: Vec<f64>, direction: Direction, margin: f64) -> Self {
        let pass = values.len() >= 2
            && values.windows(2).all(|w| match direction {
                Direction::Decreasing => w[0] - w[1] > margin,
                Direction::Increasing => w[1] - w[0] > margin,
                Direction::NonIncreasing => w[1] - w[0] <= margin,
            });
        Self {
            claim: claim.into(),
            anchor: anchor.into(),
            kind: ClaimKind::Trend,
            measured: values.last().copied().unwrap_or(f64::NAN),
            target: values.len() as f64,
            tolerance: margin,
            values,
            pass,
        }
    }

    pub fn error(claim: &str, message: &str) -> Self {
        Self {
            claim: claim.into(),
            anchor: message.into(),
            kind: ClaimKind::Error,
            measured: f64::NAN,
            target: f64::NAN,
            tolerance: f64::NAN,
            values: Vec::new(),
            pass: false,
        }
    }

    /// Require an extra condition on top of the row's own verdict.
    pub fn and(mut self, ok: bool) -> Self {
        self.pass &= ok;
        self
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.claim.clone(),
            self.anchor.clone(),
            self.kind.as_str().into(),
            fmt_f64(self.measured),
            fmt_f64(self.target),
            fmt_f64(self.tolerance),
            self.values.iter().map(|&v| fmt_f64(v)).collect::<Vec<_>>().join(";"),
            if self.pass { "PASS" } else { "FAIL" }.into(),
        ]
    }

    fn from_record(r: &csv::StringRecord) -> Result<Self, String> {
        let bad = |what: &str| format!("bad {what} in row {:?}", r.position().map(|p| p.line()));
        if r.len() != REPORT_HEADER.len() {
            return Err(bad("wrong column count"));
        }
        let num = |i: usize| r[i].parse::<f64>().map_err(|_| bad(REPORT_HEADER[i]));
        let values = if r[6].is_empty() {
            Vec::new()
        } else {
            r[6].split(';')
                .map(|v| v.parse::<f64>().map_err(|_| bad("values")))
                .collect::<Result<_, _>>()?
        };
        Ok(Self {
            claim: r[0].into(),
            anchor: r[1].into(),
            kind: ClaimKind::parse(&r[2]).ok_or_else(|| bad("kind"))?,
            measured: num(3)?,
            target: num(4)?,
            tolerance: num(5)?,
            values,
            pass: match &r[7] {
                "PASS" => true,
                "FAIL" => false,
                _ => return Err(bad("verdict")),
            },
        })
    }
}

impl fmt::Display for ReportRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<28} {:<8} measured {:>13.6e} target {:>13.6e}  {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.claim,
            self.kind.as_str(),
            self.measured,
            self.target,
            self.anchor
        )
    }
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// A CSV table held in memory until the job finishes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn write(&self, path: &Path) -> Result<(), RunError> {
        write_atomic(path, |w| {
            let mut out = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(w);
            out.write_record(&self.header)?;
            for r in &self.rows {
                out.write_record(r)?;
            }
            out.flush()?;
            Ok(())
        })
    }
}

fn write_atomic(
    path: &Path,
    body: impl FnOnce(&mut std::fs::File) -> Result<(), Box<dyn std::error::Error>>,
) -> Result<(), RunError> {
    let tmp = path.with_extension("tmp");
    let mut file = std::fs::File::create(&tmp).map_err(io_err(&tmp))?;
    body(&mut file).map_err(|e| RunError::Io {
        path: tmp.clone(),
        message: e.to_string(),
    })?;
    file.sync_all().map_err(io_err(&tmp))?;
    std::fs::rename(&tmp, path).map_err(io_err(path))
}

/// What one job hands back.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct JobOutput {
    pub table: Table,
    pub claims: Vec<ReportRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub dir: PathBuf,
    pub rows: Vec<ReportRow>,
}

impl RunSummary {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// Run every job of `manifest` into `dir` (the manifest's `output_dir` when `None`).
///
/// A failing job is recorded as an `error` row and the run moves on.
/// `progress` receives one line per finished job.
pub fn run_manifest(
    manifest: &RunManifest,
    dir: Option<&Path>,
    mut progress: impl FnMut(&str),
) -> Result<RunSummary, RunError> {
    let dir = dir.unwrap_or(&manifest.output_dir).to_path_buf();
    std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let id_path = dir.join(ID_FILE);
    if let Ok(text) = std::fs::read_to_string(&id_path) {
        let found = text.lines().next().unwrap_or("").to_string();
        if found != manifest.experiment {
            return Err(RunError::ExperimentClash {
                dir,
                found,
                expected: manifest.experiment.clone(),
            });
        }
    }
    let mut id_text = format!("{}\n", manifest.experiment);
    for job in &manifest.jobs {
        id_text.push_str(&job.id);
        id_text.push('\n');
    }
    write_atomic(&id_path, |f| Ok(f.write_all(id_text.as_bytes())?))?;

    let dist = StepDistribution::from_spec(&manifest.law).map_err(|e| ManifestError::Field {
        job: "law".into(),
        line: 0,
        message: e.to_string(),
    })?;
    let mut rows = Vec::new();
    for (k, job) in manifest.jobs.iter().enumerate() {
        let ctx = jobs::Context {
            dist: &dist,
            seed: manifest.seed,
            job: k as u32,
        };
        match jobs::execute(&job.op, &ctx) {
            Ok(out) => {
                out.table.write(&dir.join(format!("{}.csv", job.id)))?;
                let passed = out.claims.iter().filter(|c| c.pass).count();
                progress(&format!(
                    "{} ({}): {passed}/{} claims pass",
                    job.id,
                    job.op.name(),
                    out.claims.len()
                ));
                rows.extend(out.claims);
            }
            Err(message) => {
                let mut t = Table::new(&["error"]);
                t.push(vec![message.clone()]);
                t.write(&dir.join(format!("{}.csv", job.id)))?;
                progress(&format!("{} ({}): failed: {message}", job.id, job.op.name()));
                rows.push(ReportRow::error(&job.id, &message));
            }
        }
    }
    write_report(&dir.join(REPORT_FILE), &rows)?;
    Ok(RunSummary { dir, rows })
}

fn write_report(path: &Path, rows: &[ReportRow]) -> Result<(), RunError> {
    let mut t = Table::new(&REPORT_HEADER);
    for r in rows {
        t.push(r.record());
    }
    t.write(path)
}

fn parse_report(path: &Path) -> Result<Vec<ReportRow>, String> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| e.to_string())?;
    let header = reader.headers().map_err(|e| e.to_string())?;
    if header.iter().ne(REPORT_HEADER) {
        return Err(format!("unexpected header {header:?}"));
    }
    reader
        .records()
        .map(|r| ReportRow::from_record(&r.map_err(|e| e.to_string())?))
        .collect()
}

/// Read back a finished run, checking that every job's table is present.
pub fn read_report(dir: &Path) -> Result<RunSummary, RunError> {
    let id_path = dir.join(ID_FILE);
    let mut missing = Vec::new();
    let ids = match std::fs::read_to_string(&id_path) {
        Ok(text) => text.lines().skip(1).map(|l| format!("{l}.csv")).collect(),
        Err(_) => {
            missing.push(ID_FILE.to_string());
            Vec::new()
        }
    };
    for name in ids.iter().map(String::as_str).chain([REPORT_FILE]) {
        if !dir.join(name).is_file() {
            missing.push(name.to_string());
        }
    }
    if !missing.is_empty() {
        return Err(RunError::MissingArtifacts {
            dir: dir.to_path_buf(),
            missing,
        });
    }
    let rows = parse_report(&dir.join(REPORT_FILE)).map_err(|why| RunError::MissingArtifacts {
        dir: dir.to_path_buf(),
        missing: vec![format!("{REPORT_FILE} ({why})")],
    })?;
    Ok(RunSummary {
        dir: dir.to_path_buf(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn value_verdict_is_the_band(m in -1e6f64..1e6, t in -1e6f64..1e6, tol in 0.0f64..1e6) {
            let r = ReportRow::value("c", "a", m, t, tol);
            prop_assert_eq!(r.pass, (m - t).abs() <= tol);
        }

        #[test]
        fn floats_round_trip_exactly(bits in any::<u64>()) {
            let x = f64::from_bits(bits);
            prop_assume!(x.is_finite());
            prop_assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn rows_round_trip_through_csv() {
        let rows = vec![
            ReportRow::value("a", "mean, normalised", 0.9, 0.95, 0.15),
            ReportRow::trend("b", "x", vec![3.0, 2.0, 1.0], Direction::Decreasing, 0.0),
            ReportRow::at_most("c", "y", 2.0, 1.0),
            ReportRow::error("d", "boom"),
        ];
        assert!(rows[0].pass && rows[1].pass && !rows[2].pass && !rows[3].pass);
        let dir = tempfile::tempdir().unwrap();
        write_report(&dir.path().join(REPORT_FILE), &rows).unwrap();
        std::fs::write(dir.path().join(ID_FILE), "t\n").unwrap();
        let back = read_report(dir.path()).unwrap().rows;
        assert_eq!(back.len(), rows.len());
        for (a, b) in rows.iter().zip(&back) {
            assert_eq!(a.record(), b.record());
        }
    }

    #[test]
    fn trend_margin_is_strict() {
        let r = ReportRow::trend("t", "", vec![1.0, 1.0 + 1e-5], Direction::Increasing, 1e-4);
        assert!(!r.pass);
        assert!(!ReportRow::trend("t", "", vec![1.0], Direction::Increasing, 0.0).pass);
    }

    #[test]
    fn missing_artifacts_are_listed() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join(ID_FILE), "t\njob-a\n").unwrap();
        match read_report(dir.path()) {
            Err(RunError::MissingArtifacts { missing, .. }) => {
                assert_eq!(missing, vec!["job-a.csv".to_string(), REPORT_FILE.to_string()])
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn corrupted_report_is_named() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join(ID_FILE), "t\n").unwrap();
        std::fs::write(dir.path().join(REPORT_FILE), "claim,anchor\nx,y\n").unwrap();
        match read_report(dir.path()) {
            Err(RunError::MissingArtifacts { missing, .. }) => assert!(missing[0].starts_with(REPORT_FILE)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn clashing_experiment_is_refused() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join(ID_FILE), "other\n").unwrap();
        let m = RunManifest::parse("format_version = 1\nexperiment = \"t\"\noutput_dir = \"o\"\nseed = 1\n").unwrap();
        assert!(matches!(
            run_manifest(&m, Some(dir.path()), |_| {}),
            Err(RunError::ExperimentClash { .. })
        ));
    }
}
