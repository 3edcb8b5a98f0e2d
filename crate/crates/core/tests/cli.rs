use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn subeth(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subeth"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn diag_state(values: &[f64], kind: &str) -> String {
    let n = values.len();
    let entries: Vec<String> = (0..n * n)
        .map(|k| if k % (n + 1) == 0 { format!("[{},0]", values[k / (n + 1)]) } else { "[0,0]".into() })
        .collect();
    format!(r#"{{"kind":"{kind}","dim":{n},"site_dims":[{n}],"entries":[{}]}}"#, entries.join(","))
}

#[test]
fn minimal_audit_run_writes_one_table() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c.toml", "sizes = [{ n = 6, n_a = 2 }]\nexperiments = [\"inequality-audit\"]\n");
    let out = subeth(&["run", "--config", "c.toml", "--out-dir", "out", "--override", "audit.divergence_pairs=20"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut files: Vec<String> = std::fs::read_dir(dir.path().join("out"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    files.sort();
    assert_eq!(files, ["inequality_audit.csv", "manifest.json"]);
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["experiments"][0]["rows"], 20 + 2 * 500);
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "odd.toml", "sizes = [{ n = 9, n_a = 2 }]\n");
    let out = subeth(&["run", "--config", "odd.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("does not divide"));

    write(dir.path(), "big.toml", "sizes = [{ n = 14, n_a = 2 }]\n");
    let out = subeth(&["run", "--config", "big.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("N = 14"));

    assert_eq!(subeth(&["run", "--config", "missing.toml"], dir.path()).status.code(), Some(1));
    assert_eq!(subeth(&["frobnicate"], dir.path()).status.code(), Some(1));
}

#[test]
fn divergence_command() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "a.json", &diag_state(&[0.5, 0.5], "density"));
    write(dir.path(), "b.json", &diag_state(&[0.75, 0.25], "density"));
    write(dir.path(), "t.json", &diag_state(&[0.5, 0.5], "transition"));
    write(dir.path(), "c.json", &diag_state(&[0.5, 0.25, 0.25], "density"));

    let out = subeth(&["divergence", "a.json", "b.json", "--measure", "umegaki"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["umegaki"].as_f64().unwrap() - 0.5 * (4.0f64 / 3.0).ln()).abs() < 1e-12);
    assert!(v.get("bs").is_none());

    let out = subeth(&["divergence", "a.json", "a.json"], dir.path());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    for k in ["umegaki", "bs", "trace"] {
        assert!(v[k].as_f64().unwrap().abs() < 1e-12, "{k}");
    }
    assert_eq!(subeth(&["divergence", "t.json", "b.json", "--measure", "umegaki"], dir.path()).status.code(), Some(1));
    assert_eq!(subeth(&["divergence", "a.json", "c.json"], dir.path()).status.code(), Some(1));
}

#[test]
fn spectrum_command_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "ising.toml",
        "sizes = [{ n = 2, n_a = 1 }]\n[model]\nfamily = \"tfim_long\"\ncouplings = { J = 1.0, g = 0.0, h = 0.0 }\n",
    );
    let run = |name: &str| {
        let out = subeth(&["spectrum", "--config", "ising.toml", "--out", name], dir.path());
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read(dir.path().join(name)).unwrap()
    };
    let first = run("s1.csv");
    assert_eq!(String::from_utf8_lossy(&first), "n,index,energy\n2,0,-2.0\n2,1,-2.0\n2,2,2.0\n2,3,2.0\n");
    assert_eq!(first, run("s2.csv"));

    // mean eigenvalue equals Tr H / dim
    write(dir.path(), "tfim.toml", "sizes = [{ n = 4, n_a = 2 }]\n");
    let out = subeth(&["spectrum", "--config", "tfim.toml", "--out", "t.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    let e: Vec<f64> = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(e.len(), 16);
    assert!(e.windows(2).all(|w| w[0] <= w[1]));
    let h = subeth::models::build_hamiltonian(&subeth::LatticeSpec::chain(4, 2).unwrap(), &subeth::HamiltonianSpec::default()).unwrap();
    let trace: f64 = (0..16).map(|i| h.get(i, i).re).sum();
    assert!((e.iter().sum::<f64>() / 16.0 - trace / 16.0).abs() < 1e-12);
}
