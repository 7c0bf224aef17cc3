use std::path::Path;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_range-ldp"))
        .args(args)
        .env("RANGE_LDP_WORKERS", "2")
        .output()
        .unwrap()
}

fn manifest(dir: &Path, band: &str) -> String {
    let path = dir.join("m.toml");
    let text = format!(
        "format_version = 1\nexperiment = \"cli\"\noutput_dir = \"{}\"\nseed = 3\n\n\
         [[job]]\nid = \"kernels\"\nop = \"kernel-identities\"\nn = 1000\nsteps = [3, 5]\n\n\
         [[job]]\nid = \"mean\"\nop = \"mean-range\"\nn = [100, 1000]\nreplicas = 20\nband = {band}\n",
        dir.join("out").display()
    );
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn run_and_report_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let m = manifest(dir.path(), "[0.0, 2.0]");
    let out = bin(&["run", &m]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out_dir = dir.path().join("out");
    assert_eq!(bin(&["report", out_dir.to_str().unwrap()]).status.code(), Some(0));

    let m = manifest(dir.path(), "[5.0, 6.0]");
    let out = bin(&["run", &m]);
    assert_eq!(out.status.code(), Some(1));
    let report = bin(&["report", out_dir.to_str().unwrap()]);
    assert_eq!(report.status.code(), Some(1));
    let text = String::from_utf8_lossy(&report.stdout);
    assert!(text.contains("failing: mean-range"), "{text}");
}

#[test]
fn rerun_reproduces_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let m = manifest(dir.path(), "[0.0, 2.0]");
    let read = |name: &str| std::fs::read(dir.path().join("out").join(name)).unwrap();
    bin(&["run", &m]);
    let first = (read("mean.csv"), read("report.csv"));
    bin(&["run", &m]);
    assert_eq!(first, (read("mean.csv"), read("report.csv")));
    let csv = String::from_utf8(first.0).unwrap();
    assert!(csv.starts_with("estimator,n,param,replicas,value,stderr_or_ci_lo,ci_hi,seed\n"));
    assert!(!csv.contains('\r'));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(bin(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(bin(&["chi"]).status.code(), Some(2));
    assert_eq!(bin(&["chi", "--u=-1"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(bin(&["report", dir.path().to_str().unwrap()]).status.code(), Some(2));
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "format_version = 1\nexperiment = \"x\"\noutput_dir = \"o\"\nseed = 1\n[[job]]\nid = \"a\"\nop = \"teleport\"\n").unwrap();
    let out = bin(&["run", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("teleport"));
}

#[test]
fn single_verbs_print_csv() {
    let out = bin(&["mean-range", "--n", "500", "--replicas", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("n,replicas,mean,stderr,normalized\n500,10,"));
    let out = bin(&["hitting", "--n", "1000", "--s", "1", "--ax", "1", "--ay", "0", "--replicas", "100"]);
    assert_eq!(out.status.code(), Some(0));
}
