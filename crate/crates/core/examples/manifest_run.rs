//! A small manifest run into a scratch directory, then its report read back.

use range_ldp::experiment::{read_report, run_manifest, RunManifest};

const MANIFEST: &str = r#"
format_version = 1
experiment = "demo"
output_dir = "out/demo"
seed = 7

[[job]]
id = "mean"
op = "mean-range"
n = [1000, 10000]
replicas = 50
band = [0.4, 0.7]

[[job]]
id = "kernels"
op = "kernel-identities"
n = 1000
steps = [3, 5]
"#;

fn main() {
    let m = RunManifest::parse(MANIFEST).expect("valid manifest");
    let dir = std::env::temp_dir().join("range-ldp-demo");
    let _ = std::fs::remove_dir_all(&dir);
    run_manifest(&m, Some(&dir), |line| println!("{line}")).expect("run completes");
    for row in read_report(&dir).expect("artifacts present").rows {
        println!("{row}");
    }
    println!("artifacts in {}", dir.display());
}
