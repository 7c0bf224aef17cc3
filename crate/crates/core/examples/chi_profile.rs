//! chi(u) across (0, 1), the limit constants and the small/large-u scalings.

use range_ldp::rate_solver::{chi, chi_limit_checks, lambda2, mu2, SolverConfig};

fn main() {
    let cfg = SolverConfig::default();
    let start = std::time::Instant::now();
    for k in 1..=9 {
        let u = k as f64 / 10.0;
        let s = chi(u, &cfg).expect("solver converges");
        println!(
            "u={u:.1} chi={:.8} mass_res={:+.1e} area_res={:+.1e} kkt={:.1e} start={} r_max={:.3} mono={:+.1e}",
            s.value,
            s.resid_mass,
            s.resid_area,
            s.kkt,
            s.start,
            s.profile.r_max,
            s.profile.max_increase()
        );
    }
    println!("lambda2 = {:.12}", lambda2());
    println!("mu2     = {:.8}", mu2(&cfg).expect("mu2 converges").value);
    let report = chi_limit_checks(&cfg).expect("limit checks run");
    for (u, v) in &report.small {
        println!("u={u:<5} u*chi = {v:.6}  ratio to lambda2 = {:.4}", v / report.lambda2);
    }
    for (u, v) in &report.large {
        println!("u={u:<5} chi/(1-u) = {v:.6}  ratio to 2 mu2 = {:.4}", v / (2.0 * report.mu2));
    }
    println!("small decreasing: {}, large decreasing: {}", report.small_decreasing, report.large_decreasing);
    println!("elapsed {:.2?}", start.elapsed());
}
