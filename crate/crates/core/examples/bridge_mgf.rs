//! Exponential moment of the bridge range across n, the plateau of the uniform bound.

use range_ldp::skeleton_lab::bridge_range_mgf;
use range_ldp::{RngStream, StepDistribution};

fn main() {
    let dist = StepDistribution::default_aperiodic();
    println!("n,x,block,estimate,stderr,ess");
    for (job, n) in [1_000u64, 10_000, 100_000].into_iter().enumerate() {
        for (i, x) in [(0.0, 0.0), (0.5, 0.0), (1.0, 0.0)].into_iter().enumerate() {
            let stream = RngStream::split(7, (3 * job + i) as u32, 0);
            let est = bridge_range_mgf(&dist, n, 1.0, x, 1.0, 4000, stream).expect("reachable endpoint");
            println!(
                "{n},{:?},{},{:.4},{:.4},{:.0}",
                x, est.block, est.estimate, est.stderr, est.ess
            );
        }
    }
}
