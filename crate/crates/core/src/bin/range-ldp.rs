use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use range_ldp::experiment::{fmt_f64, read_report, run_manifest, RunManifest, RunSummary, PAPER_SUITE};
use range_ldp::range_engine::{estimate_hitting, estimate_mean_range, estimate_tail, hitting_target, scales};
use range_ldp::rate_solver::{chi, rate_curve, SolverConfig};
use range_ldp::{RngStream, StepDistribution};

/// Range of the planar random walk: estimators, rate function and experiment runs.
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "RANGE_LDP_WORKERS")]
    workers: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a manifest file, or `paper-suite` for the bundled one.
    Run {
        manifest: String,
        /// Output directory, overriding the manifest.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarise a finished run directory.
    Report { dir: PathBuf },
    /// chi(u) and its minimiser certificate.
    Chi {
        #[arg(long)]
        u: f64,
    },
    /// I(b) at b = 2 pi k / points, k = 1..=points, as CSV.
    RateCurve {
        #[arg(long)]
        points: usize,
    },
    /// Mean range against 2 pi n / log n.
    MeanRange {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        replicas: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// P(R_n <= b n / log n) and its large-deviation exponent.
    Tail {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        b: f64,
        #[arg(long)]
        replicas: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// log n P(H_x < s T) for the site nearest a sqrt(T).
    Hitting {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        ax: f64,
        #[arg(long)]
        ay: f64,
        #[arg(long, default_value_t = 20_000)]
        replicas: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

const USAGE: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { 0 });
        }
    };
    if let Some(w) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            eprintln!("cannot set up {w} workers: {e}");
            return ExitCode::from(USAGE);
        }
    }
    match dispatch(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(USAGE)
        }
    }
}

fn summarise(summary: &RunSummary) -> u8 {
    for row in &summary.rows {
        println!("{row}");
    }
    let failed: Vec<&str> = summary.rows.iter().filter(|r| !r.pass).map(|r| r.claim.as_str()).collect();
    println!("{} claims, {} failed", summary.rows.len(), failed.len());
    if failed.is_empty() {
        0
    } else {
        println!("failing: {}", failed.join(", "));
        1
    }
}

fn dispatch(cmd: Cmd) -> Result<u8, String> {
    let dist = StepDistribution::default_aperiodic();
    let err = |e: &dyn std::fmt::Display| e.to_string();
    match cmd {
        Cmd::Run { manifest, out } => {
            let m = if manifest == "paper-suite" {
                RunManifest::parse(PAPER_SUITE)
            } else {
                RunManifest::from_path(manifest.as_ref())
            }
            .map_err(|e| err(&e))?;
            let summary = run_manifest(&m, out.as_deref(), |line| eprintln!("{line}")).map_err(|e| err(&e))?;
            Ok(summarise(&summary))
        }
        Cmd::Report { dir } => {
            let summary = read_report(&dir).map_err(|e| err(&e))?;
            Ok(summarise(&summary))
        }
        Cmd::Chi { u } => {
            let s = chi(u, &SolverConfig::default()).map_err(|e| err(&e))?;
            println!("u,chi,resid_mass,resid_area,kkt,max_increase");
            println!(
                "{},{},{},{},{},{}",
                fmt_f64(u),
                fmt_f64(s.value),
                fmt_f64(s.resid_mass),
                fmt_f64(s.resid_area),
                fmt_f64(s.kkt),
                fmt_f64(s.profile.max_increase())
            );
            Ok(0)
        }
        Cmd::RateCurve { points } => {
            let curve = rate_curve(points, &SolverConfig::default()).map_err(|e| err(&e))?;
            println!("b,I,chi_u,resid_mass,resid_area,status");
            for s in &curve.samples {
                println!(
                    "{},{},{},{},{},{}",
                    fmt_f64(s.b),
                    fmt_f64(s.i),
                    fmt_f64(s.chi_u),
                    fmt_f64(s.resid_mass),
                    fmt_f64(s.resid_area),
                    s.status
                );
            }
            Ok(0)
        }
        Cmd::MeanRange { n, replicas, seed } => {
            let est = estimate_mean_range(&dist, n, replicas, RngStream::split(seed, 0, 0)).map_err(|e| err(&e))?;
            println!("n,replicas,mean,stderr,normalized");
            println!(
                "{n},{replicas},{},{},{}",
                fmt_f64(est.mean),
                fmt_f64(est.stderr),
                fmt_f64(est.normalized())
            );
            Ok(0)
        }
        Cmd::Tail { n, b, replicas, seed } => {
            let est = estimate_tail(&dist, n, b, replicas, RngStream::split(seed, 0, 0)).map_err(|e| err(&e))?;
            println!("n,b,replicas,hits,p_hat,ci_lo,ci_hi,ldp_value,zero_hits");
            println!(
                "{n},{},{replicas},{},{},{},{},{},{}",
                fmt_f64(b),
                est.hits,
                fmt_f64(est.p_hat),
                fmt_f64(est.ci95.0),
                fmt_f64(est.ci95.1),
                fmt_f64(est.ldp_value),
                est.zero_hits
            );
            Ok(0)
        }
        Cmd::Hitting {
            n,
            s,
            ax,
            ay,
            replicas,
            seed,
        } => {
            let (_, t) = scales(n);
            let site = ((ax * t.sqrt()).floor() as i64, (ay * t.sqrt()).floor() as i64);
            let est = estimate_hitting(&dist, site, s, n, replicas, RngStream::split(seed, 0, 0)).map_err(|e| err(&e))?;
            println!("n,s,site_x,site_y,replicas,scaled,ci_lo,ci_hi,target");
            println!(
                "{n},{},{},{},{replicas},{},{},{},{}",
                fmt_f64(s),
                site.0,
                site.1,
                fmt_f64(est.scaled),
                fmt_f64(est.scaled_ci95.0),
                fmt_f64(est.scaled_ci95.1),
                fmt_f64(hitting_target((ax, ay), s))
            );
            Ok(0)
        }
    }
}
