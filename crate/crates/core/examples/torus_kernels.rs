//! Exact lattice kernel on the torus against the wrapped Gaussian it approximates.

use range_ldp::kernels::{rw_torus_kernel_row, torus_gauss_kernel, KernelMethod, TorusConfig};
use range_ldp::StepDistribution;

fn main() {
    let dist = StepDistribution::default_aperiodic();
    let cfg = TorusConfig::new(4.0, 10_000).expect("valid torus");
    let h2 = cfg.spacing().powi(2);
    println!("k,row_sum,max_abs_gap_to_gaussian");
    for k in [10u64, 100, 1000] {
        let row = rw_torus_kernel_row(k, (0, 0), &dist, &cfg, KernelMethod::Auto);
        let t = k as f64 / cfg.t_scale();
        let gap = row
            .iter()
            .map(|(s, p)| {
                let g = torus_gauss_kernel(t, cfg.site_point(s), cfg.torus_len(), 1e-14).expect("positive time");
                (p / h2 - g).abs()
            })
            .fold(0.0, f64::max);
        println!("{k},{:.15},{gap:.4e}", row.sum());
    }
}
