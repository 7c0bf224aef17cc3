//! One function per operation: run the module, fill the table, judge the claims.

use std::f64::consts::PI;

use statrs::distribution::{ContinuousCDF, Normal};

use super::manifest::*;
use super::{fmt_f64, Direction, JobOutput, ReportRow, Table};
use crate::kernels::{
    circular_convolve, phi_eps, rw_torus_kernel_row, torus_gauss_kernel, KernelMethod, PhiQuadrature, TorusConfig,
    TorusPoint,
};
use crate::range_engine::{
    estimate_hitting, exact_range_distribution, hitting_target, mean_from_ranges, sample_ranges, scales,
    tail_from_ranges,
};
use crate::rate_solver::{chi, lambda2, mu2, rate_curve, rate_i, Solution, SolverConfig, LARGE_U, SMALL_U};
use crate::skeleton_lab::{bridge_hit_prob, bridge_range_mgf, hole_cut_range, Trajectory};
use crate::step_models::{RngStream, StepDistribution};

/// Sub-run `s` of job `k` draws from stream job index `SUBRUNS * k + s`.
pub const SUBRUNS: u32 = 256;

const ESTIMATOR_HEADER: [&str; 8] = [
    "estimator",
    "n",
    "param",
    "replicas",
    "value",
    "stderr_or_ci_lo",
    "ci_hi",
    "seed",
];

const PROFILE_MONOTONE_TOL: f64 = 1e-10;
const PROFILE_FEASIBLE_TOL: f64 = 1e-6;

pub(super) struct Context<'a> {
    pub dist: &'a StepDistribution,
    pub seed: u64,
    pub job: u32,
}

impl Context<'_> {
    fn stream(&self, sub: usize) -> RngStream {
        assert!(sub < SUBRUNS as usize, "too many sub-runs in one job");
        RngStream::split(self.seed, self.job * SUBRUNS + sub as u32, 0)
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

struct Est {
    estimator: &'static str,
    n: u64,
    param: Option<f64>,
    replicas: Option<u64>,
    value: f64,
    lo: Option<f64>,
    hi: Option<f64>,
    stream: Option<RngStream>,
}

impl Est {
    fn exact(estimator: &'static str, n: u64, param: Option<f64>, value: f64) -> Self {
        Self {
            estimator,
            n,
            param,
            replicas: None,
            value,
            lo: None,
            hi: None,
            stream: None,
        }
    }

    fn row(self) -> Vec<String> {
        vec![
            self.estimator.into(),
            self.n.to_string(),
            opt(self.param),
            self.replicas.map(|r| r.to_string()).unwrap_or_default(),
            fmt_f64(self.value),
            opt(self.lo),
            opt(self.hi),
            self.stream
                .map(|s| format!("{}:{}", s.root, s.index >> 32))
                .unwrap_or_default(),
        ]
    }
}

fn fmt_all(xs: &[f64]) -> Vec<String> {
    xs.iter().map(|&x| fmt_f64(x)).collect()
}

fn band(b: [f64; 2]) -> (f64, f64) {
    (0.5 * (b[0] + b[1]), 0.5 * (b[1] - b[0]))
}

fn fail(e: impl std::fmt::Display) -> String {
    e.to_string()
}

pub(super) fn execute(op: &JobOp, ctx: &Context) -> Result<JobOutput, String> {
    match op {
        JobOp::MeanRange(j) => mean_range(j, ctx),
        JobOp::Tail(j) => tail(j, ctx),
        JobOp::Hitting(j) => hitting(j, ctx),
        JobOp::ExactOracle(j) => exact_oracle(j, ctx),
        JobOp::KernelIdentities(j) => kernel_identities(j, ctx),
        JobOp::RateZeroSet(j) => rate_zero_set(j),
        JobOp::ChiSweep(j) => chi_sweep(j),
        JobOp::ChiLimits(j) => chi_limits(j),
        JobOp::RateCurve(j) => curve(j),
        JobOp::HoleCut(j) => hole_cut(j, ctx),
        JobOp::BridgeMgf(j) => bridge_mgf(j, ctx),
        JobOp::BridgeWeight(j) => bridge_weight(j, ctx),
    }
}

fn mean_range(j: &MeanRangeJob, ctx: &Context) -> Result<JobOutput, String> {
    let mut table = Table::new(&ESTIMATOR_HEADER);
    let mut ratios = Vec::new();
    for (i, &n) in j.n.iter().enumerate() {
        let stream = ctx.stream(i);
        let ranges = sample_ranges(ctx.dist, n, j.replicas, stream).map_err(fail)?;
        let est = mean_from_ranges(n, &ranges);
        let norm = est.normalized();
        for (name, value, stderr) in [
            ("mean_range", est.mean, est.stderr),
            ("normalized_mean_range", norm, est.stderr * norm / est.mean),
        ] {
            table.push(
                Est {
                    estimator: name,
                    n,
                    param: None,
                    replicas: Some(j.replicas),
                    value,
                    lo: Some(stderr),
                    hi: None,
                    stream: Some(stream),
                }
                .row(),
            );
        }
        ratios.push(norm);
    }
    let (mid, half) = band(j.band);
    let claims = vec![
        ReportRow::value(
            "mean-range",
            "mean range over 2 pi n / log n at the largest n",
            *ratios.last().unwrap(),
            mid,
            half,
        ),
        ReportRow::trend(
            "mean-range-approach",
            "normalised mean range rises towards 1 with n",
            ratios,
            Direction::Increasing,
            0.0,
        ),
    ];
    Ok(JobOutput { table, claims })
}

fn tail(j: &TailJob, ctx: &Context) -> Result<JobOutput, String> {
    let rate = rate_i(j.b, &SolverConfig::default()).map_err(fail)?;
    let mut table = Table::new(&ESTIMATOR_HEADER);
    table.push(Est::exact("rate_i", 0, Some(j.b), rate).row());
    let mut gaps = Vec::new();
    let mut positive = true;
    for (i, &n) in j.n.iter().enumerate() {
        let stream = ctx.stream(i);
        let ranges = sample_ranges(ctx.dist, n, j.replicas, stream).map_err(fail)?;
        let est = tail_from_ranges(n, j.b, &ranges);
        let base = |estimator, value, lo, hi| Est {
            estimator,
            n,
            param: Some(j.b),
            replicas: Some(j.replicas),
            value,
            lo,
            hi,
            stream: Some(stream),
        };
        table.push(base("tail_probability", est.p_hat, Some(est.ci95.0), Some(est.ci95.1)).row());
        let (tau, _) = scales(n);
        let ldp_ci = (-est.ci95.1.ln() / tau, -est.ci95.0.ln() / tau);
        table.push(base("ldp_value", est.ldp_value, Some(ldp_ci.0), Some(ldp_ci.1)).row());
        positive &= !est.zero_hits && est.ldp_value > 0.0;
        gaps.push((est.ldp_value - rate).abs());
    }
    let claims = vec![ReportRow::trend(
        "tail-ldp-trend",
        "gap between -log P(R_n <= b T) / log n and I(b) does not grow with n",
        gaps,
        Direction::NonIncreasing,
        0.0,
    )
    .and(positive)];
    Ok(JobOutput { table, claims })
}

fn hitting(j: &HittingJob, ctx: &Context) -> Result<JobOutput, String> {
    let (_, t) = scales(j.n);
    let root = t.sqrt();
    let site = ((j.a[0] * root).floor() as i64, (j.a[1] * root).floor() as i64);
    let stream = ctx.stream(0);
    let est = estimate_hitting(ctx.dist, site, j.s, j.n, j.replicas, stream).map_err(fail)?;
    let target = hitting_target((j.a[0], j.a[1]), j.s);
    let mut table = Table::new(&ESTIMATOR_HEADER);
    table.push(
        Est {
            estimator: "scaled_hitting",
            n: j.n,
            param: Some(j.s),
            replicas: Some(j.replicas),
            value: est.scaled,
            lo: Some(est.scaled_ci95.0),
            hi: Some(est.scaled_ci95.1),
            stream: Some(stream),
        }
        .row(),
    );
    table.push(Est::exact("gaussian_target", j.n, Some(j.s), target).row());
    let claims = vec![ReportRow::value(
        "hitting-scaling",
        "log n P(H_x < s T) against 2 pi int_0^s p_t(a) dt",
        est.scaled,
        target,
        j.tolerance * target,
    )];
    Ok(JobOutput { table, claims })
}

/// Simulated mean and law of `R_n` against exhaustive enumeration, for every
/// `n <= n_max`. The mean gets a normal interval and the whole distribution
/// function a DKW band; Bonferroni over all `2 n_max` statements keeps the
/// family-wise coverage at `confidence`.
fn exact_oracle(j: &ExactOracleJob, ctx: &Context) -> Result<JobOutput, String> {
    let statements = 2.0 * j.n_max as f64;
    let alpha = (1.0 - j.confidence) / statements;
    let z = Normal::standard().inverse_cdf(1.0 - alpha / 2.0);
    let dkw = ((2.0 / alpha).ln() / (2.0 * j.replicas as f64)).sqrt();
    let mut table = Table::new(&ESTIMATOR_HEADER);
    let mut misses = 0u64;
    for n in 1..=j.n_max {
        let law = exact_range_distribution(ctx.dist, n).map_err(fail)?;
        let stream = ctx.stream(n as usize - 1);
        let ranges = sample_ranges(ctx.dist, n, j.replicas, stream).map_err(fail)?;
        let est = mean_from_ranges(n, &ranges);
        let mc = |estimator, param, value: f64, half: f64| Est {
            estimator,
            n,
            param,
            replicas: Some(j.replicas),
            value,
            lo: Some(value - half),
            hi: Some(value + half),
            stream: Some(stream),
        };
        table.push(mc("mean_range", None, est.mean, z * est.stderr).row());
        table.push(Est::exact("exact_mean", n, None, law.mean()).row());
        misses += u64::from((est.mean - law.mean()).abs() > z * est.stderr);
        let mut counts = vec![0u64; n as usize + 2];
        for &r in &ranges {
            counts[r as usize] += 1;
        }
        let mut below = 0u64;
        let mut sup: f64 = 0.0;
        for (m, c) in counts.iter().enumerate() {
            below += c;
            let emp = below as f64 / j.replicas as f64;
            let exact = law.cdf(m as u64);
            table.push(mc("cdf", Some(m as f64), emp, dkw).row());
            table.push(Est::exact("exact_cdf", n, Some(m as f64), exact).row());
            sup = sup.max((emp - exact).abs());
        }
        misses += u64::from(sup > dkw);
    }
    let claims = vec![ReportRow::value(
        "exact-oracle",
        "simulated mean and law of R_n inside confidence bands around exhaustive enumeration",
        misses as f64,
        0.0,
        0.0,
    )];
    Ok(JobOutput { table, claims })
}

fn kernel_identities(j: &KernelIdentitiesJob, ctx: &Context) -> Result<JobOutput, String> {
    let cfg = TorusConfig::new(j.side, j.n).map_err(fail)?;
    let dist = ctx.dist;
    let [a, b] = j.steps;
    let row = |k| rw_torus_kernel_row(k, (0, 0), dist, &cfg, KernelMethod::Dp);
    let (pa, pb, pab) = (row(a), row(b), row(a + b));
    let row_sum = [&pa, &pb, &pab]
        .iter()
        .map(|p| (p.sum() - 1.0).abs())
        .fold(0.0, f64::max);
    let ck = circular_convolve(&pa, &pb)
        .values()
        .iter()
        .zip(pab.values())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);

    let (t, m) = (0.9, 200);
    let dx = j.side / m as f64;
    let mut integral = 0.0;
    for i in 0..m {
        for k in 0..m {
            let p = TorusPoint {
                x: -j.side / 2.0 + (i as f64 + 0.5) * dx,
                y: -j.side / 2.0 + (k as f64 + 0.5) * dx,
            };
            integral += torus_gauss_kernel(t, p, j.side, 1e-14).map_err(fail)? * dx * dx;
        }
    }

    let quad = PhiQuadrature::default();
    let mut asym: f64 = 0.0;
    for (y, z) in [((0.3, 0.1), (-1.2, 0.8)), ((1.9, -1.9), (0.05, 0.2)), ((-0.6, 0.0), (0.0, 0.6))] {
        let y = TorusPoint { x: y.0, y: y.1 };
        let z = TorusPoint { x: z.0, y: z.1 };
        let f = phi_eps(y, z, 0.7, &cfg, &quad).map_err(fail)?;
        let g = phi_eps(z, y, 0.7, &cfg, &quad).map_err(fail)?;
        asym = asym.max((f - g).abs());
    }

    let checks = [
        ("kernel-row-sum", "lattice kernel rows sum to one", row_sum, 1e-12),
        ("kernel-chapman-kolmogorov", "p_a * p_b = p_(a+b) on the torus", ck, 1e-10),
        ("torus-gauss-normalization", "torus heat kernel integrates to one", (integral - 1.0).abs(), 1e-6),
        ("phi-symmetry", "phi_eps(y, z) = phi_eps(z, y)", asym, 1e-9),
    ];
    let mut table = Table::new(&["identity", "deviation", "tolerance"]);
    let mut claims = Vec::new();
    for (claim, anchor, dev, tol) in checks {
        table.push(vec![claim.into(), fmt_f64(dev), fmt_f64(tol)]);
        claims.push(ReportRow::at_most(claim, anchor, dev, tol));
    }
    Ok(JobOutput { table, claims })
}

fn rate_zero_set(j: &RateZeroSetJob) -> Result<JobOutput, String> {
    let cfg = SolverConfig::default();
    let mut table = Table::new(&["b", "I"]);
    let mut eval = |bs: &[f64]| -> Result<Vec<f64>, String> {
        bs.iter()
            .map(|&b| {
                let i = rate_i(b, &cfg).map_err(fail)?;
                table.push(fmt_all(&[b, i]));
                Ok(i)
            })
            .collect()
    };
    let zero = eval(&j.zero)?;
    let positive = eval(&j.positive)?;
    let claims = vec![
        ReportRow::at_most(
            "rate-zero",
            "I vanishes for b >= 2 pi",
            zero.iter().copied().fold(0.0, f64::max),
            j.zero_tol,
        ),
        ReportRow::at_least(
            "rate-positive",
            "I positive for b < 2 pi",
            positive.iter().copied().fold(f64::INFINITY, f64::min),
            j.positive_min,
        ),
    ];
    Ok(JobOutput { table, claims })
}

fn shape_claims(suffix: &str, sols: &[&Solution]) -> Vec<ReportRow> {
    let rise = sols
        .iter()
        .map(|s| s.profile.max_increase())
        .fold(f64::NEG_INFINITY, f64::max);
    let resid = sols
        .iter()
        .map(|s| s.resid_mass.abs().max(s.resid_area.abs()))
        .fold(0.0, f64::max);
    vec![
        ReportRow::at_most(
            &format!("minimizer-monotone{suffix}"),
            "returned minimisers nonincreasing in the radius",
            rise,
            PROFILE_MONOTONE_TOL,
        ),
        ReportRow::at_most(
            &format!("minimizer-feasible{suffix}"),
            "returned minimisers satisfy both constraints",
            resid,
            PROFILE_FEASIBLE_TOL,
        ),
    ]
}

const SOLUTION_HEADER: [&str; 7] = ["u", "chi", "resid_mass", "resid_area", "kkt", "max_increase", "start"];

fn solution_row(u: f64, s: &Solution) -> Vec<String> {
    let mut row = fmt_all(&[u, s.value, s.resid_mass, s.resid_area, s.kkt, s.profile.max_increase()]);
    row.push(s.start.to_string());
    row
}

fn chi_sweep(j: &ChiSweepJob) -> Result<JobOutput, String> {
    let cfg = SolverConfig::default();
    let sols = j.u.iter().map(|&u| chi(u, &cfg).map_err(fail)).collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(&SOLUTION_HEADER);
    for (&u, s) in j.u.iter().zip(&sols) {
        table.push(solution_row(u, s));
    }
    let mut claims = vec![ReportRow::trend(
        "chi-monotone",
        "chi strictly decreasing in u",
        sols.iter().map(|s| s.value).collect(),
        Direction::Decreasing,
        j.margin,
    )];
    claims.extend(shape_claims("", &sols.iter().collect::<Vec<_>>()));
    Ok(JobOutput { table, claims })
}

fn chi_limits(j: &ChiLimitsJob) -> Result<JobOutput, String> {
    let cfg = SolverConfig::default();
    let l2 = lambda2();
    let m2 = mu2(&cfg).map_err(fail)?;
    let fine_cfg = cfg.clone().with_intervals(4 * cfg.intervals).with_r_max(2.0 * cfg.r_max);
    let fine = mu2(&fine_cfg).map_err(fail)?;
    let solve = |us: &[f64]| us.iter().map(|&u| chi(u, &cfg).map_err(fail)).collect::<Result<Vec<_>, _>>();
    let small = solve(&SMALL_U)?;
    let large = solve(&LARGE_U)?;
    let small_v: Vec<f64> = SMALL_U.iter().zip(&small).map(|(u, s)| u * s.value).collect();
    let large_v: Vec<f64> = LARGE_U.iter().zip(&large).map(|(u, s)| s.value / (1.0 - u)).collect();

    let mut table = Table::new(&["quantity", "u", "value", "reference", "ratio"]);
    let mut push = |q: &str, u: Option<f64>, v: f64, r: f64| {
        let mut row = vec![q.to_string(), opt(u)];
        row.extend(fmt_all(&[v, r, v / r]));
        table.push(row);
    };
    push("lambda2", None, l2, l2);
    push("mu2", None, m2.value, fine.value);
    for (&u, &v) in SMALL_U.iter().zip(&small_v) {
        push("u_chi", Some(u), v, l2);
    }
    for (&u, &v) in LARGE_U.iter().zip(&large_v) {
        push("chi_over_1_minus_u", Some(u), v, 2.0 * m2.value);
    }

    let (s_mid, s_half) = band(j.small_band);
    let (l_mid, l_half) = band(j.large_band);
    let mut claims = vec![
        ReportRow::value(
            "lambda2-limit",
            "u chi(u) at the smallest u over the unit-area disk eigenvalue",
            small_v[0] / l2,
            s_mid,
            s_half,
        ),
        ReportRow::trend(
            "lambda2-monotone",
            "u chi(u) strictly decreasing in u for small u",
            small_v.clone(),
            Direction::Decreasing,
            0.0,
        ),
        ReportRow::at_most(
            "lambda2-disk-bound",
            "u chi(u) over lambda_2 stays below the disk trial bound",
            small_v.iter().map(|v| v / l2).fold(0.0, f64::max),
            1.0,
        ),
        ReportRow::value(
            "mu2-limit",
            "chi(u) / (1 - u) at the largest u over 2 mu_2",
            large_v[large_v.len() - 1] / (2.0 * m2.value),
            l_mid,
            l_half,
        ),
        ReportRow::trend(
            "mu2-monotone",
            "chi(u) / (1 - u) strictly decreasing in u near 1",
            large_v,
            Direction::Decreasing,
            0.0,
        ),
        ReportRow::at_most(
            "mu2-certified",
            "relative change of mu_2 with half the grid step on twice the domain",
            (m2.value / fine.value - 1.0).abs(),
            j.certify,
        ),
    ];
    let all: Vec<&Solution> = small.iter().chain(&large).chain([&m2, &fine]).collect();
    claims.extend(shape_claims("-limits", &all));
    Ok(JobOutput { table, claims })
}

fn curve(j: &RateCurveJob) -> Result<JobOutput, String> {
    let curve = rate_curve(j.points, &SolverConfig::default()).map_err(fail)?;
    let mut table = Table::new(&["b", "I", "chi_u", "resid_mass", "resid_area", "status"]);
    for s in &curve.samples {
        let mut row = fmt_all(&[s.b, s.i, s.chi_u, s.resid_mass, s.resid_area]);
        row.push(s.status.clone());
        table.push(row);
    }
    let finite: Vec<f64> = curve.samples.iter().map(|s| s.i).filter(|i| i.is_finite()).collect();
    let all_ok = finite.len() == curve.samples.len();
    let claims = vec![ReportRow::trend(
        "rate-curve-monotone",
        "I nonincreasing on (0, 2 pi]",
        finite,
        Direction::NonIncreasing,
        0.0,
    )
    .and(all_ok)];
    Ok(JobOutput { table, claims })
}

fn hole_cut(j: &HoleCutJob, ctx: &Context) -> Result<JobOutput, String> {
    let mut table = Table::new(&ESTIMATOR_HEADER);
    let mut means = Vec::new();
    let mut worst: f64 = 0.0;
    for (i, &n) in j.n.iter().enumerate() {
        let cfg = TorusConfig::new(j.side, n).map_err(fail)?;
        let stream = ctx.stream(i);
        let mut deficits = Vec::new();
        let mut envelope = f64::NAN;
        for w in 0..j.walks {
            let traj = Trajectory::simulate(ctx.dist, n, stream.replica(w));
            let cut = hole_cut_range(&traj, j.eps, &cfg).map_err(fail)?;
            worst = worst.max(cut.deficit / cut.envelope);
            envelope = cut.envelope;
            deficits.push(cut.deficit);
        }
        let (mean, stderr) = crate::stats::mean_stderr(&deficits);
        let max = deficits.iter().copied().fold(0.0, f64::max);
        let base = |estimator, value, lo| Est {
            estimator,
            n,
            param: Some(j.eps),
            replicas: Some(j.walks),
            value,
            lo,
            hi: None,
            stream: Some(stream),
        };
        table.push(base("hole_cut_deficit", mean, Some(stderr)).row());
        table.push(base("hole_cut_deficit_max", max, None).row());
        table.push(Est::exact("ball_count_envelope", n, Some(j.eps), envelope).row());
        means.push(mean);
    }
    let claims = vec![
        ReportRow::at_most(
            "hole-cut-envelope",
            "range lost to hole cutting, over T, within the ball-count envelope",
            worst,
            1.0,
        ),
        ReportRow::trend(
            "hole-cut-trend",
            "mean hole-cut deficit decreasing in n",
            means,
            Direction::Decreasing,
            0.0,
        ),
    ];
    Ok(JobOutput { table, claims })
}

fn bridge_mgf(j: &BridgeMgfJob, ctx: &Context) -> Result<JobOutput, String> {
    let mut table = Table::new(&ESTIMATOR_HEADER);
    let mut sups = Vec::new();
    let mut centred: f64 = 0.0;
    for (i, &n) in j.n.iter().enumerate() {
        let (tau, t) = scales(n);
        let scale = j.theta * tau / (j.eps * t);
        let mut sup: f64 = 0.0;
        for (k, x) in j.x.iter().enumerate() {
            let stream = ctx.stream(i * j.x.len() + k);
            let est = bridge_range_mgf(ctx.dist, n, j.eps, (x[0], x[1]), j.theta, j.replicas, stream).map_err(fail)?;
            let gap = est.log_estimate - scale * est.mean_range;
            let param = Some(x[0].hypot(x[1]));
            let base = |estimator, value, lo| Est {
                estimator,
                n,
                param,
                replicas: Some(j.replicas),
                value,
                lo,
                hi: None,
                stream: Some(stream),
            };
            table.push(base("bridge_mgf", est.estimate, Some(est.stderr)).row());
            table.push(base("bridge_mean_range", est.mean_range, None).row());
            table.push(base("centred_log_mgf", gap, None).row());
            table.push(base("effective_sample_size", est.ess, None).row());
            sup = sup.max(est.estimate);
            centred = centred.max(gap.abs());
        }
        sups.push(sup);
    }
    let hi = sups.iter().copied().fold(0.0, f64::max);
    let lo = sups.iter().copied().fold(f64::INFINITY, f64::min);
    let claims = vec![
        ReportRow::at_most(
            "bridge-moment-plateau",
            "sup over endpoints of the bridge range moment, max over min across n",
            hi / lo,
            j.max_ratio,
        ),
        ReportRow::at_most(
            "bridge-moment-centred",
            "log bridge moment minus its mean exponent",
            centred,
            j.centred,
        ),
    ];
    Ok(JobOutput { table, claims })
}

fn bridge_weight(j: &BridgeWeightJob, ctx: &Context) -> Result<JobOutput, String> {
    let quad = PhiQuadrature::default();
    let mut table = Table::new(&ESTIMATOR_HEADER);
    let mut gaps = Vec::new();
    for &n in &j.n {
        let cfg = TorusConfig::new(j.side, n).map_err(fail)?;
        let y = cfg.site_point(cfg.project_plus((j.y[0], j.y[1])));
        let z = cfg.site_point(cfg.project_plus((j.z[0], j.z[1])));
        let b = bridge_hit_prob(ctx.dist, &cfg, j.eps, y, z).map_err(fail)?.estimate;
        let phi = phi_eps(y, z, j.eps, &cfg, &quad).map_err(fail)?;
        let (tb, limit) = (cfg.tau() * b, 2.0 * PI * phi);
        table.push(Est::exact("scaled_bridge_hit", n, Some(j.eps), tb).row());
        table.push(Est::exact("two_pi_phi", n, Some(j.eps), limit).row());
        gaps.push((tb - limit).abs());
    }
    let claims = vec![ReportRow::trend(
        "bridge-weight-trend",
        "log n times the bridge hitting probability approaches 2 pi phi_eps",
        gaps,
        Direction::Decreasing,
        0.0,
    )];
    Ok(JobOutput { table, claims })
}
