//! Skeleton of one walk, its pair measure and the functional Phi in both modes.

use range_ldp::kernels::{PhiQuadrature, TorusConfig};
use range_ldp::skeleton_lab::{pair_measure, phi_functional, skeleton_of, BridgeTable, PhiMode};
use range_ldp::{RngStream, StepDistribution};

fn main() {
    let dist = StepDistribution::default_aperiodic();
    let cfg = TorusConfig::new(4.0, 2_000).expect("valid torus");
    let eps = 1.0;
    let (sk, traj) = skeleton_of(&dist, &cfg, eps, RngStream::new(4, 0)).expect("blocks fit");
    println!("walk of {} steps, block {} steps, {} skeleton points", traj.len(), sk.block, sk.sites.len());
    for p in sk.points().iter().take(5) {
        println!("  ({:+.4}, {:+.4})", p.x, p.y);
    }
    let mu = pair_measure(&sk, true);
    println!("pair measure: {} atoms, mass {:.4}", mu.atoms.len(), mu.mass());
    let table = BridgeTable::build(&dist, &cfg, eps).expect("table fits in memory");
    let quad = PhiQuadrature::default();
    for eta in [0.5, 1.0, 2.0] {
        let finite = phi_functional(&mu, eta, 0.1, 2, PhiMode::Finite(&table)).expect("valid input");
        let limit = phi_functional(&mu, eta, 0.1, 2, PhiMode::Limit(&quad)).expect("valid input");
        println!("eta={eta}: finite {finite:.5}, limit {limit:.5}");
    }
}
