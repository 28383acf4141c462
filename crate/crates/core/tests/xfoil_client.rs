//! The external solver client against stand-in solver scripts. A real
//! solver is exercised only when `XFOIL_BIN` names one.

use std::os::unix::fs::PermissionsExt;
use std::path::{Path, PathBuf};

use mcmo_core::airfoil::{
    airfoil_problem, kt_transform, AeroCache, AeroModel, CachedAero, KtParams, XfoilClient,
    XfoilConfig,
};
use mcmo_core::problem::EvalFailure;

/// Reads the session from stdin, then runs `body` with `$polar` and
/// `$alpha` set from the script.
fn fake_solver(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    let script = format!(
        r#"#!/bin/sh
polar=""
alpha=""
prev=""
while IFS= read -r line; do
  if [ "$prev" = "PACC" ] && [ -z "$polar" ]; then polar="$line"; fi
  case "$line" in "ALFA "*) alpha="${{line#ALFA }}";; esac
  prev="$line"
done
{body}
"#
    );
    std::fs::write(&path, script).unwrap();
    std::fs::set_permissions(&path, std::fs::Permissions::from_mode(0o755)).unwrap();
    path
}

const GOOD: &str = r#"cat > "$polar" <<EOT
 Calculated polar for: mcmo

   alpha    CL        CD       CDp       CM     Top_Xtr  Bot_Xtr
  ------ -------- --------- --------- -------- -------- --------
   $alpha   0.7215   7.12E-03   0.00231  -0.0512   0.5563   1.0000
EOT"#;

fn client(binary: PathBuf, work: &Path, timeout_secs: f64) -> XfoilClient {
    XfoilClient::new(XfoilConfig {
        binary: Some(binary),
        timeout_secs,
        work_dir: Some(work.to_path_buf()),
        ..XfoilConfig::default()
    })
    .unwrap()
}

fn params() -> KtParams {
    KtParams {
        mu_x: -0.1,
        mu_y: 0.05,
        beta: 10.0,
        alpha: 4.0,
    }
}

#[test]
fn successful_session() {
    let dir = tempfile::tempdir().unwrap();
    let solver = fake_solver(dir.path(), "good.sh", GOOD);
    let c = client(solver, dir.path(), 10.0)
        .coefficients(&params(), 1e6)
        .unwrap();
    assert_eq!(c.cl, 0.7215);
    assert_eq!(c.cd, 7.12e-3);
    // Scratch files are removed afterwards.
    let left: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().ends_with(".dat"))
        .collect();
    assert!(left.is_empty());
}

#[test]
fn coordinate_file_is_written_for_the_solver() {
    let dir = tempfile::tempdir().unwrap();
    let keep = dir.path().join("seen.dat");
    let body = format!(
        "cp \"$(ls {0}/airfoil_*.dat)\" {1}\n{GOOD}",
        dir.path().display(),
        keep.display()
    );
    let solver = fake_solver(dir.path(), "copy.sh", &body);
    client(solver, dir.path(), 10.0)
        .coefficients(&params(), 1e6)
        .unwrap();
    let text = std::fs::read_to_string(&keep).unwrap();
    let expected = kt_transform(&params(), XfoilConfig::default().points).unwrap();
    assert_eq!(text, expected.to_coordinate_text());
}

#[test]
fn failure_variants() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&str, &str, f64, EvalFailure); 4] = [
        ("slow.sh", "sleep 5", 0.001, EvalFailure::Timeout),
        ("exit.sh", "exit 3", 10.0, EvalFailure::ExitStatus(3)),
        (
            "empty.sh",
            r#"printf '  alpha CL CD\n ------ ------ ------\n' > "$polar""#,
            10.0,
            EvalFailure::NonConvergence,
        ),
        ("silent.sh", "true", 10.0, EvalFailure::Parse(String::new())),
    ];
    for (name, body, timeout, expected) in cases {
        let solver = fake_solver(dir.path(), name, body);
        let got = client(solver, dir.path(), timeout).coefficients(&params(), 1e6);
        match (&got, &expected) {
            (Err(EvalFailure::Parse(_)), EvalFailure::Parse(_)) => {}
            (Err(e), expected) => assert_eq!(e, expected, "{name}"),
            (Ok(c), _) => panic!("{name}: unexpected success {c:?}"),
        }
    }

    let malformed = fake_solver(
        dir.path(),
        "malformed.sh",
        r#"printf ' ------\n 4.0 0.7x 0.01\n' > "$polar""#,
    );
    assert!(matches!(
        client(malformed, dir.path(), 10.0).coefficients(&params(), 1e6),
        Err(EvalFailure::Parse(_))
    ));
}

#[test]
fn failures_become_flagged_problem_evaluations() {
    let dir = tempfile::tempdir().unwrap();
    let solver = fake_solver(dir.path(), "exit.sh", "exit 1");
    let cached = CachedAero::new(client(solver, dir.path(), 10.0), AeroCache::in_memory());
    let problem = airfoil_problem("airfoil-external", cached);
    let x = params().to_vec();
    assert_eq!(
        problem.evaluate(&x, &[1e6]),
        Err(EvalFailure::ExitStatus(1))
    );
    assert_eq!(
        problem.evaluate(&x, &[1e6]),
        Err(EvalFailure::ExitStatus(1))
    );
    assert_eq!(problem.evaluation_count(), 2);
    assert!(!problem.is_reentrant());
}

#[test]
fn real_solver_when_available() {
    let Some(binary) = std::env::var_os("XFOIL_BIN") else {
        eprintln!("XFOIL_BIN not set; skipping the real-solver check");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let c = client(PathBuf::from(binary), dir.path(), 60.0)
        .coefficients(&params(), 1e6)
        .unwrap();
    assert!(c.cl.is_finite() && c.cd.is_finite() && c.cd > 0.0, "{c:?}");
}
