use std::path::PathBuf;
use std::process::{Command, Output};

fn spec(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../specs").join(name)
}

fn magjump(args: &[&str], out: &std::path::Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_magjump"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("MAGJUMP_SEED")
        .output()
        .expect("binary runs")
}

fn rows(path: PathBuf) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(|r| r.unwrap()).collect()
}

#[test]
fn verify_two_vertex_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = magjump(&["verify", spec("two_vertex.toml").to_str().unwrap()], dir.path());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert!(stdout.contains(", 0 failed"));
    assert!(!stdout.contains("FAIL"));
    let table = rows(dir.path().join("verify.csv"));
    assert!(table.len() > 20);
    assert!(table.iter().all(|r| &r[3] == "true"));
}

#[test]
fn spectrum_of_flux_four_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let out = magjump(&["spectrum", spec("cycle4_flux.toml").to_str().unwrap()], dir.path());
    assert!(out.status.success());
    let values: Vec<f64> = rows(dir.path().join("spectrum.csv"))
        .iter()
        .map(|r| r[1].parse().unwrap())
        .collect();
    for (got, want) in values.iter().zip([0.0, 4.0, 4.0, 8.0]) {
        assert!((got - want).abs() < 1e-10, "{values:?}");
    }
}

#[test]
fn validate_reports_broken_spec() {
    let dir = tempfile::tempdir().unwrap();
    let out = magjump(&["validate", spec("broken.toml").to_str().unwrap()], dir.path());
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("duplicate edge {b,a}"), "{stderr}");
    assert!(stderr.contains("edges[2].q: unknown vertex `c`"));
    assert!(stderr.contains("edges[2].b"));
}

#[test]
fn outputs_are_deterministic_for_a_seed() {
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let s = spec("cycle4_flux.toml");
    for d in [&d1, &d2] {
        assert!(magjump(&["fki", s.to_str().unwrap(), "--seed", "5"], d.path()).status.success());
        assert!(magjump(&["simulate", s.to_str().unwrap(), "--seed", "5"], d.path()).status.success());
    }
    for f in ["fki.csv", "paths.csv", "path_0.csv"] {
        let a = std::fs::read(d1.path().join(f)).unwrap();
        assert_eq!(a, std::fs::read(d2.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn seed_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(spec("cycle4_flux.toml")).unwrap().replace("seed = 1\n", "");
    let path = dir.path().join("noseed.toml");
    std::fs::write(&path, text).unwrap();
    let run = |seed: &str, out: &str| {
        let o = dir.path().join(out);
        let status = Command::new(env!("CARGO_BIN_EXE_magjump"))
            .args(["simulate", path.to_str().unwrap(), "--out", o.to_str().unwrap()])
            .env("MAGJUMP_SEED", seed)
            .output()
            .unwrap()
            .status;
        assert!(status.success());
        std::fs::read(o.join("paths.csv")).unwrap()
    };
    assert_eq!(run("3", "a"), run("3", "b"));
    assert_ne!(run("3", "c"), run("4", "d"));
}

#[test]
fn hamiltonian_and_hodge_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let s = spec("two_vertex.toml");
    assert!(magjump(&["hamiltonian", s.to_str().unwrap()], dir.path()).status.success());
    let h = rows(dir.path().join("hamiltonian.csv"));
    assert_eq!(h.len(), 4);
    // H(0,1) = -e^{i pi/2} n(0,1) = -2i.
    let h01: (f64, f64) = (h[1][2].parse().unwrap(), h[1][3].parse().unwrap());
    assert!(h01.0.abs() < 1e-15 && (h01.1 + 2.0).abs() < 1e-15);

    assert!(magjump(&["hodge", spec("cycle4_flux.toml").to_str().unwrap()], dir.path()).status.success());
    let u = rows(dir.path().join("hodge_u.csv"));
    assert!(u.iter().all(|r| r[1].parse::<f64>().unwrap().abs() < 1e-12));
}

#[test]
fn unknown_command_fails() {
    let dir = tempfile::tempdir().unwrap();
    assert!(!magjump(&["frobnicate"], dir.path()).status.success());
}
