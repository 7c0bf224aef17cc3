//! Exhaustive law of R_n for short walks next to a simulated histogram.

use range_ldp::range_engine::{exact_range_distribution, sample_ranges};
use range_ldp::{RngStream, StepDistribution};

fn main() {
    let dist = StepDistribution::default_aperiodic();
    let n = 5;
    let law = exact_range_distribution(&dist, n).expect("small enough to enumerate");
    let replicas = 200_000;
    let ranges = sample_ranges(&dist, n, replicas, RngStream::new(9, 0)).expect("valid n");
    println!("r,exact,simulated");
    for (r, p) in law.probabilities.iter().enumerate() {
        let f = ranges.iter().filter(|&&x| x as usize == r).count() as f64 / replicas as f64;
        println!("{r},{p:.6},{f:.6}");
    }
    println!("mean {:.6}", law.mean());
}
