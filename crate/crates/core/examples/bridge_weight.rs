//! Exact lattice bridge hitting probability against its Brownian limit.

use std::f64::consts::PI;

use range_ldp::kernels::{phi_eps, PhiQuadrature, TorusConfig};
use range_ldp::skeleton_lab::bridge_hit_prob;
use range_ldp::StepDistribution;

fn main() {
    let dist = StepDistribution::default_aperiodic();
    let eps = 1.0;
    let quad = PhiQuadrature::default();
    println!("n,y,z,tau_b,two_pi_phi,gap");
    for n in [1_000u64, 10_000, 100_000, 1_000_000] {
        let cfg = TorusConfig::new(4.0, n).expect("valid torus");
        let y = cfg.site_point(cfg.project_plus((0.6, 0.2)));
        let z = cfg.site_point(cfg.project_plus((-0.5, 0.7)));
        let b = bridge_hit_prob(&dist, &cfg, eps, y, z).expect("reachable").estimate;
        let phi = phi_eps(y, z, eps, &cfg, &quad).expect("away from the origin");
        let tb = cfg.tau() * b;
        println!("{n},({:.3},{:.3}),({:.3},{:.3}),{tb:.6},{:.6},{:.6}", y.x, y.y, z.x, z.y, 2.0 * PI * phi, (tb - 2.0 * PI * phi).abs());
    }
}
