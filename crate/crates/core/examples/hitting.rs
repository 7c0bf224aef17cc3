//! Rescaled hitting probability of a distant site against the Gaussian prediction.

use range_ldp::range_engine::{estimate_hitting, hitting_target, scales};
use range_ldp::{RngStream, StepDistribution};

fn main() {
    let dist = StepDistribution::default_aperiodic();
    let (a, s) = ((1.0, 0.0), 1.0);
    let target = hitting_target(a, s);
    println!("n,replicas,scaled,ci_lo,ci_hi,target");
    for (job, n) in [10_000u64, 100_000, 1_000_000].into_iter().enumerate() {
        let (_, t) = scales(n);
        let x = ((a.0 * t.sqrt()).floor() as i64, (a.1 * t.sqrt()).floor() as i64);
        let est = estimate_hitting(&dist, x, s, n, 20_000, RngStream::split(3, job as u32, 0)).expect("valid input");
        println!(
            "{n},{},{:.4},{:.4},{:.4},{target:.4}",
            est.replicas, est.scaled, est.scaled_ci95.0, est.scaled_ci95.1
        );
    }
}
