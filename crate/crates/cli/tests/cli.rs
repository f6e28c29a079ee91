use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const TORSION: &str = r#"
[problem]
n = 2
R = 1.0
alpha = 1.0
kind = "torsion"

[perturbation]
normalization = "trigonometric"
modes = [{ degree = 2 }]

[output]
directory = "out"
formats = ["kv", "table"]
"#;

fn rsv(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rsv")).current_dir(dir).args(args).output().expect("binary runs")
}

fn setup(config: &str) -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("exp.toml"), config).unwrap();
    dir
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn second_variation_reports_the_closed_form_and_the_oracle() {
    let dir = setup(TORSION);
    let o = rsv(dir.path(), &["second-variation", "--config", "exp.toml"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains("Eddot0_symbolic = 13π/12"), "{out}");
    assert!(out.contains("oracle_match = true"), "{out}");
    let kv = std::fs::read_to_string(dir.path().join("out/second-variation.txt")).unwrap();
    assert_eq!(kv, out);
    let table = std::fs::read_to_string(dir.path().join("out/second-variation.tsv")).unwrap();
    assert!(table.starts_with("degree\tnorm_squared\tmu\tSddot\tF\tEddot\n"));
    assert!(!dir.path().join("out/second-variation.failures.json").exists());
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = setup(TORSION);
    let mut seen = Vec::new();
    for _ in 0..2 {
        let o = rsv(dir.path(), &["sweep", "--config", "exp.toml", "--out", "sweep"]);
        assert!(o.status.success());
        seen.push((stdout(&o), std::fs::read(dir.path().join("sweep/sweep.tsv")).unwrap()));
    }
    assert_eq!(seen[0], seen[1]);
    assert!(String::from_utf8_lossy(&seen[0].1).starts_with("t\tE\tlambda\tS\tV\tresidual\n"));
}

#[test]
fn steklov_table_for_torsion() {
    let dir = setup(TORSION);
    let o = rsv(dir.path(), &["steklov", "--config", "exp.toml", "--format", "kv"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("spectrum = 1; 2×2; 3×2; 4×2"), "{}", stdout(&o));
}

#[test]
fn failed_checks_exit_nonzero_with_a_failure_list() {
    let dir = setup(&TORSION.replace("alpha = 1.0", "alpha = -1.5"));
    let o = rsv(dir.path(), &["classify", "--config", "exp.toml"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("classification = Indefinite"));
    let failures: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/classify.failures.json")).unwrap()).unwrap();
    assert_eq!(failures[0]["check"], "classification_consistent");
    assert_eq!(String::from_utf8_lossy(&o.stderr), std::fs::read_to_string(dir.path().join("out/classify.failures.json")).unwrap());
}

#[test]
fn negative_alpha_within_the_negative_range_classifies_cleanly() {
    let dir = setup(&TORSION.replace("alpha = 1.0", "alpha = -0.5"));
    let o = rsv(dir.path(), &["classify", "--config", "exp.toml", "--seed", "3"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("classification = Negative"));
}

#[test]
fn config_errors_name_the_field() {
    let dir = setup(&TORSION.replace("n = 2", "n = 2\nradious = 3"));
    let o = rsv(dir.path(), &["surface", "--config", "exp.toml"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 4") && err.contains("radious"), "{err}");

    let dir = setup(&TORSION.replace("modes = [{ degree = 2 }]", "modes = [{ degree = 2, index = 5 }]"));
    let o = rsv(dir.path(), &["surface", "--config", "exp.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("perturbation.modes[0]"));
}

#[test]
fn coefficient_files_are_resolved_next_to_the_config() {
    let dir = setup(&TORSION.replace("modes = [{ degree = 2 }]", "file = \"coefs.txt\""));
    std::fs::write(dir.path().join("coefs.txt"), "# degree index coefficient\n2 0 1.0\n").unwrap();
    let sub = dir.path().join("elsewhere");
    std::fs::create_dir(&sub).unwrap();
    let o = rsv(&sub, &["surface", "--config", "../exp.toml"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("Sddot0_symbolic = 3π"));

    std::fs::remove_file(dir.path().join("coefs.txt")).unwrap();
    let o = rsv(dir.path(), &["surface", "--config", "exp.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("perturbation.file"));
}

#[test]
fn fd_step_comes_from_the_environment() {
    let dir = setup(TORSION);
    let run = |h: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_rsv"))
            .current_dir(dir.path())
            .env("RSV_FD_H", h)
            .args(["surface", "--config", "exp.toml"])
            .output()
            .unwrap();
        assert!(o.status.success());
        stdout(&o).lines().find(|l| l.starts_with("oracle_d2")).unwrap().to_string()
    };
    assert_ne!(run("5e-3"), run("1e-2"));
}

#[test]
fn missing_config_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = rsv(dir.path(), &["steklov"]);
    assert_eq!(o.status.code(), Some(2));
}
