//! Mean range of the default walk against 2 pi n / log n.

use range_ldp::range_engine::estimate_mean_range;
use range_ldp::{RngStream, StepDistribution};

fn main() {
    let dist = StepDistribution::default_aperiodic();
    let replicas = 20;
    for n in [1_000u64, 10_000, 100_000, 1_000_000] {
        let start = std::time::Instant::now();
        let est = estimate_mean_range(&dist, n, replicas, RngStream::new(2024, n)).expect("valid n");
        println!(
            "n={n:>8} mean={:>12.1} stderr={:>8.1} normalized={:.4} ({:.2?})",
            est.mean,
            est.stderr,
            est.normalized(),
            start.elapsed()
        );
    }
}
