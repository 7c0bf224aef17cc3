//! Range deficit from cutting holes around block endpoints, averaged over walks.

use range_ldp::kernels::TorusConfig;
use range_ldp::skeleton_lab::{hole_cut_range, Trajectory};
use range_ldp::{RngStream, StepDistribution};

fn main() {
    let dist = StepDistribution::default_aperiodic();
    let eps = 1.0;
    let walks = 8;
    println!("n,q,mean_deficit,max_deficit,envelope");
    for (job, n) in [10_000u64, 100_000, 1_000_000].into_iter().enumerate() {
        let cfg = TorusConfig::new(4.0, n).expect("valid torus");
        let mut deficits = Vec::new();
        let mut last = None;
        for r in 0..walks {
            let traj = Trajectory::simulate(&dist, n, RngStream::split(11, job as u32, r));
            let cut = hole_cut_range(&traj, eps, &cfg).expect("scale large enough");
            deficits.push(cut.deficit);
            last = Some(cut);
        }
        let cut = last.unwrap();
        let mean = deficits.iter().sum::<f64>() / walks as f64;
        let max = deficits.iter().copied().fold(0.0, f64::max);
        println!("{n},{:.4},{mean:.5},{max:.5},{:.5}", cut.q, cut.envelope);
    }
}
