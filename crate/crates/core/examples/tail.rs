//! Lower tail of the range at level b T and its exponent against I(b).

use std::f64::consts::PI;

use range_ldp::range_engine::{sample_ranges, tail_from_ranges};
use range_ldp::rate_solver::{rate_i, SolverConfig};
use range_ldp::{RngStream, StepDistribution};

fn main() {
    let dist = StepDistribution::default_aperiodic();
    let rate = rate_i(PI, &SolverConfig::default()).expect("solver converges");
    println!("I(pi) = {rate:.6}");
    println!("n,b,hits,p_hat,ldp_value");
    for (job, n) in [1_000u64, 10_000].into_iter().enumerate() {
        let ranges = sample_ranges(&dist, n, 20_000, RngStream::split(5, job as u32, 0)).expect("valid n");
        // common random numbers across levels
        for b in [2.0, PI, 4.0] {
            let t = tail_from_ranges(n, b, &ranges);
            println!("{n},{b:.4},{},{:.5},{:.5}", t.hits, t.p_hat, t.ldp_value);
        }
    }
}
