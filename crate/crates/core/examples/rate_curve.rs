//! I(b) on (0, 2 pi] and the Legendre transform used for exponential functionals.

use range_ldp::rate_solver::{legendre_inf, rate_curve, SolverConfig};

fn main() {
    let curve = rate_curve(32, &SolverConfig::default()).expect("solver runs");
    println!("b,I,status");
    for s in &curve.samples {
        println!("{:.4},{:.6},{}", s.b, s.i, s.status);
    }
    println!("monotone: {}", curve.monotone);
    for c in [0.05, 0.1, 0.2] {
        println!("inf_b [b c + I(b)] at c = {c}: {:.6}", legendre_inf(c, &curve).expect("curve fine enough"));
    }
}
