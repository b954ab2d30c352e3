//! Golden-file tests over the machine report format. Regenerate with
//! `UPDATE_GOLDEN=1 cargo test -p noether-cli --test golden`.

use std::path::PathBuf;
use std::process::Command;

fn repo_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn assert_golden(mode: &str, fixture: &str) {
    let exe = env!("CARGO_BIN_EXE_noether");
    let fixture_path = repo_path(&format!("../../fixtures/{fixture}.prob"));
    let golden_path = repo_path(&format!("tests/golden/{fixture}_{mode}.txt"));

    let output = Command::new(exe)
        .arg(mode)
        .arg(&fixture_path)
        .args(["--format", "machine", "--seed", "42"])
        .env_remove("NOETHER_SEED")
        .output()
        .expect("failed to spawn binary");
    assert!(
        output.status.success(),
        "{mode} {fixture} failed:\n{}",
        String::from_utf8_lossy(&output.stderr)
    );

    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(golden_path.parent().unwrap()).unwrap();
        std::fs::write(&golden_path, &output.stdout).unwrap();
        return;
    }
    let expected = std::fs::read(&golden_path).unwrap_or_else(|_| {
        panic!(
            "missing golden file {} (run with UPDATE_GOLDEN=1 to create)",
            golden_path.display()
        )
    });
    assert_eq!(
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&expected),
        "stdout for `{mode} {fixture}` diverged from the golden file"
    );
}

#[test]
fn golden_spinning_particle_solve() {
    assert_golden("solve", "spinning_particle");
}

#[test]
fn golden_triple_dot_solve() {
    assert_golden("solve", "triple_dot");
}

#[test]
fn golden_hd_oscillator_transform() {
    assert_golden("transform", "hd_oscillator_transform");
}

#[test]
fn golden_spinning_particle_verify() {
    assert_golden("verify", "spinning_particle");
}
