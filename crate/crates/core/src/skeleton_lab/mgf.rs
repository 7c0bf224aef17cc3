//! Exponential moment of the range of a planar lattice bridge.
//!
//! Bridges from `0` to `x+ = floor(x sqrt(T))` of `K = floor(eps T)` steps are
//! drawn from a guided proposal: the step `v` at `s` with `m` steps left has
//! weight `law(v) g_{m-1}(x+ - s - v)`, where `g_j` is the exact `j`-step
//! kernel for `j <= EXACT_STEPS` and the Gaussian local limit beyond. The
//! final steps are exact, so every proposal ends at `x+`, and importance
//! weights `prod Z_t / g(x+ - s_{t+1})` correct for the Gaussian part.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;

use super::SkeletonError;
use crate::range_engine::{scales, SiteSet};
use crate::step_models::{RngStream, StepDistribution};

/// Remaining-step horizon below which the exact kernel guides the proposal.
pub const EXACT_STEPS: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct MgfEstimate {
    pub n: u64,
    pub eps: f64,
    pub theta: f64,
    /// Bridge endpoint `x+` in lattice units.
    pub endpoint: (i64, i64),
    pub block: u64,
    pub replicas: u64,
    pub estimate: f64,
    pub log_estimate: f64,
    pub stderr: f64,
    /// Importance-weighted mean of the bridge range.
    pub mean_range: f64,
    /// Effective sample size of the importance weights.
    pub ess: f64,
}

/// Exact kernels `p_j(d)` on a box of radius `EXACT_STEPS * max_step`, `j <= EXACT_STEPS`.
struct ExactKernels {
    radius: i64,
    side: usize,
    rows: Vec<Vec<f64>>,
}

impl ExactKernels {
    fn new(dist: &StepDistribution) -> Self {
        let radius = EXACT_STEPS as i64 * dist.max_step();
        let side = (2 * radius + 1) as usize;
        let mut cur = vec![0.0; side * side];
        cur[radius as usize * side + radius as usize] = 1.0;
        let mut rows = vec![cur.clone()];
        for _ in 0..EXACT_STEPS {
            let mut next = vec![0.0; side * side];
            for i in 0..side as i64 {
                for j in 0..side as i64 {
                    let v = cur[(i as usize) * side + j as usize];
                    if v == 0.0 {
                        continue;
                    }
                    for &((dx, dy), p) in dist.atoms() {
                        let (a, b) = (i + dx, j + dy);
                        // the box holds everything reachable, nothing falls off
                        next[a as usize * side + b as usize] += p * v;
                    }
                }
            }
            rows.push(next.clone());
            cur = next;
        }
        Self { radius, side, rows }
    }

    fn log_p(&self, j: usize, d: (i64, i64)) -> f64 {
        if d.0.abs() > self.radius || d.1.abs() > self.radius {
            return f64::NEG_INFINITY;
        }
        let o = (d.0 + self.radius) as usize * self.side + (d.1 + self.radius) as usize;
        self.rows[j][o].ln()
    }
}

/// `log g_j(d)`: exact for small `j`, Gaussian with identity covariance otherwise.
fn log_guide(exact: &ExactKernels, j: usize, d: (i64, i64)) -> f64 {
    if j <= EXACT_STEPS {
        exact.log_p(j, d)
    } else {
        let t = j as f64;
        -((d.0 * d.0 + d.1 * d.1) as f64) / (2.0 * t) - (2.0 * PI * t).ln()
    }
}

/// One guided bridge: returns `(log weight, range)`.
fn guided_bridge<R: Rng + ?Sized>(
    dist: &StepDistribution,
    exact: &ExactKernels,
    k: usize,
    target: (i64, i64),
    rng: &mut R,
    set: &mut SiteSet,
    logs: &mut Vec<f64>,
) -> (f64, u64) {
    set.clear();
    let mut s = (0i64, 0i64);
    set.insert(0, 0);
    let mut log_w = 0.0;
    for left in (1..=k).rev() {
        logs.clear();
        let mut top = f64::NEG_INFINITY;
        for &((dx, dy), p) in dist.atoms() {
            let l = p.ln() + log_guide(exact, left - 1, (target.0 - s.0 - dx, target.1 - s.1 - dy));
            top = top.max(l);
            logs.push(l);
        }
        if top == f64::NEG_INFINITY {
            return (f64::NEG_INFINITY, set.len() as u64);
        }
        let total: f64 = logs.iter().map(|l| (l - top).exp()).sum();
        let mut u = rng.random::<f64>() * total;
        let mut pick = logs.len() - 1;
        for (i, l) in logs.iter().enumerate() {
            let w = (l - top).exp();
            if u < w {
                pick = i;
                break;
            }
            u -= w;
        }
        let ((dx, dy), p) = dist.atoms()[pick];
        // Z_t / g(x - s - v) = exp(top) total / (exp(logs[pick]) / p)
        log_w += top + total.ln() - (logs[pick] - p.ln());
        s = (s.0 + dx, s.1 + dy);
        set.insert(s.0, s.1);
    }
    debug_assert_eq!(s, target);
    (log_w, set.len() as u64)
}

fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `E_{0,x+}[exp(theta tau / (eps T) R_{eps T})]` for the bridge of
/// `K = floor(eps T)` steps on the planar lattice, `T = n / log n`.
pub fn bridge_range_mgf(
    dist: &StepDistribution,
    n: u64,
    eps: f64,
    x: (f64, f64),
    theta: f64,
    replicas: u64,
    stream: RngStream,
) -> Result<MgfEstimate, SkeletonError> {
    if n < 3 || !(eps > 0.0) || !(theta > 0.0 && theta <= 2.0) || replicas < 2 {
        return Err(SkeletonError::InvalidParameter(format!(
            "need n >= 3, eps > 0, theta in (0, 2], replicas >= 2; got {n}, {eps}, {theta}, {replicas}"
        )));
    }
    let (tau, t) = scales(n);
    let span = eps * t;
    if span < 1.0 {
        return Err(SkeletonError::BlockTooShort(span));
    }
    let k = span.floor() as usize;
    let root = t.sqrt();
    let target = ((x.0 * root).floor() as i64, (x.1 * root).floor() as i64);
    let exact = ExactKernels::new(dist);
    let weight = log_guide(&exact, k, target);
    if !(weight.exp() > 0.0) {
        return Err(SkeletonError::ZeroBridgeWeight(weight.exp()));
    }
    let scale = theta * tau / span;
    let cap = (k / 2).max(64);
    let samples: Vec<(f64, u64)> = (0..replicas)
        .into_par_iter()
        .map_init(
            || (SiteSet::with_capacity(cap), Vec::with_capacity(dist.atoms().len())),
            |(set, logs), r| {
                let mut rng = stream.replica(r).rng();
                guided_bridge(dist, &exact, k, target, &mut rng, set, logs)
            },
        )
        .collect();
    let log_w = samples.iter().map(|s| s.0);
    let log_total = log_sum_exp(log_w.clone());
    if !log_total.is_finite() {
        return Err(SkeletonError::ZeroBridgeWeight(0.0));
    }
    let log_estimate = log_sum_exp(samples.iter().map(|&(w, r)| w + scale * r as f64)) - log_total;
    let ess = (2.0 * log_total - log_sum_exp(log_w.map(|w| 2.0 * w))).exp();
    let rel_var: f64 = samples
        .iter()
        .map(|&(w, r)| {
            let nw = (w - log_total).exp();
            (nw * ((scale * r as f64 - log_estimate).exp() - 1.0)).powi(2)
        })
        .sum();
    let mean_range: f64 = samples
        .iter()
        .map(|&(w, r)| (w - log_total).exp() * r as f64)
        .sum();
    let estimate = log_estimate.exp();
    Ok(MgfEstimate {
        n,
        eps,
        theta,
        endpoint: target,
        block: k as u64,
        replicas,
        estimate,
        log_estimate,
        stderr: estimate * rel_var.sqrt(),
        mean_range,
        ess,
    })
}
