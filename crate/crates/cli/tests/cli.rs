use std::path::Path;
use std::process::{Command, Output};

use fpp_cli::{parse_report, Document, ParsedReport};
use fpp_core::matrix_core::{sample_invertible, CMatrix, Rng, Tolerances};
use fpp_core::verify::Verdict;

fn fpp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fpp"))
        .args(args)
        .output()
        .expect("spawn fpp")
}

fn code(args: &[&str]) -> i32 {
    fpp(args).status.code().expect("exit code")
}

fn write_matrix(dir: &Path, name: &str, m: &CMatrix) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string(m).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn exit_codes_follow_verdicts() {
    assert_eq!(code(&["hua", "--n", "3", "--samples", "20"]), 0);
    assert_eq!(
        code(&["verify-preserver", "--n", "3", "--family", "random"]),
        1
    );
    assert_eq!(code(&["thm41", "--n", "3", "--family", "random"]), 1);
    assert_eq!(code(&["prop21", "--n", "3", "--rank-c", "2"]), 2);
    assert_eq!(code(&["prop21", "--n", "1"]), 2);
    assert_eq!(code(&["thm41", "--n", "3", "--rank-c", "1"]), 2);
    assert_eq!(
        code(&["verify-preserver", "--family", "tconj", "--rank-c", "1"]),
        2
    );
    assert_eq!(code(&["factorize", "--rank-c", "0"]), 2);
}

#[test]
fn usage_errors_exit_3() {
    assert_eq!(code(&[]), 3);
    assert_eq!(code(&["nope"]), 3);
    assert_eq!(code(&["hua", "--n", "0"]), 3);
    assert_eq!(code(&["hua", "--samples", "0"]), 3);
    assert_eq!(code(&["hua", "--tol", "1.5"]), 3);
    assert_eq!(code(&["thm41", "--alpha", "0,0"]), 3);
    assert_eq!(code(&["thm41", "--n", "9"]), 3);
    assert_eq!(code(&["factorize", "--n", "3", "--rank-c", "4"]), 3);
    assert_eq!(code(&["factorize", "--C", "/nonexistent/c.json"]), 3);
    assert_eq!(code(&["revalidate", "/nonexistent/report.json"]), 3);
    let out = fpp(&["hua", "--n", "0"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn help_exits_0() {
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["thm41", "--help"]), 0);
    assert_eq!(code(&["--version"]), 0);
}

#[test]
fn json_document_shape() {
    let out = fpp(&[
        "thm41", "--family", "tconj", "--n", "3", "--alpha", "2", "--seed", "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Document = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc.command, "thm41");
    assert!(doc.timestamp.is_some());
    assert_eq!(doc.artifacts["class"]["class"], "Antihomomorphism");
    let names: Vec<&str> = doc.reports.iter().map(|r| r.name.as_str()).collect();
    assert_eq!(
        names,
        [
            "z_inverse",
            "inverse_formula",
            "strong_invertibility",
            "jordan",
            "classification"
        ]
    );
    assert!(doc.artifacts["z_minus_alpha_d"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn prop21_writes_certificates() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.json");
    let o = out.to_str().unwrap();
    assert_eq!(
        code(&["prop21", "--n", "4", "--rank-c", "1", "--seed", "7", "--out", o]),
        0
    );
    let doc: Document = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc.artifacts["certificates"].as_array().unwrap().len(), 1);
}

#[test]
fn revalidate_round_trips_every_format() {
    let dir = tempfile::tempdir().unwrap();
    let configs: &[&[&str]] = &[
        &[
            "prop21",
            "--n",
            "5",
            "--rank-c",
            "2",
            "--samples",
            "3",
            "--seed",
            "4",
        ],
        &[
            "verify-preserver",
            "--n",
            "3",
            "--seed",
            "8",
            "--samples",
            "30",
        ],
        &["thm33", "--n", "3", "--rank-c", "0"],
        &["pointwise", "--map", "halving", "--m", "6"],
        &["hua", "--n", "2", "--samples", "30"],
        &[
            "verify-preserver",
            "--n",
            "2",
            "--family",
            "random",
            "--samples",
            "10",
        ],
    ];
    for (i, args) in configs.iter().enumerate() {
        for format in ["json", "csv", "text"] {
            let path = dir.path().join(format!("r{i}.{format}"));
            let p = path.to_str().unwrap();
            let mut full = args.to_vec();
            full.extend(["--format", format, "--out", p]);
            let first = code(&full);
            let re = fpp(&["revalidate", p]);
            assert_eq!(
                re.status.code(),
                Some(0),
                "{args:?} {format}: {}",
                String::from_utf8_lossy(&re.stdout)
            );
            // The revalidation itself reports Pass, independent of the
            // original verdict.
            let doc: Document = serde_json::from_slice(&re.stdout).unwrap();
            assert!(doc.reports[0].passed());
            let text = std::fs::read_to_string(&path).unwrap();
            let recorded = match parse_report(&text).unwrap() {
                ParsedReport::Json(d) => d.verdict,
                ParsedReport::Annotated { verdict, .. } => verdict,
            };
            let expected = [Verdict::Pass, Verdict::Fail, Verdict::Infeasible][first as usize];
            assert_eq!(recorded, expected);
        }
    }
}

#[test]
fn revalidate_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    let p = path.to_str().unwrap();
    assert_eq!(
        code(&["prop21", "--n", "4", "--rank-c", "1", "--seed", "7", "--out", p]),
        0
    );

    let mut doc: Document = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let cert = &mut doc.artifacts["certificates"][0];
    let a = &mut cert["witnesses"][0]["A"]["data"][0][0];
    *a = serde_json::json!(a.as_f64().unwrap() + 1.0);
    std::fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();
    let re = fpp(&["revalidate", p, "--format", "text"]);
    assert_eq!(re.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&re.stdout);
    assert!(stdout.contains("certificate defects: "), "{stdout}");
    assert!(!stdout.contains("certificate defects: 0e0"), "{stdout}");

    let path = dir.path().join("h.csv");
    let p = path.to_str().unwrap();
    assert_eq!(
        code(&[
            "hua",
            "--n",
            "2",
            "--samples",
            "5",
            "--format",
            "csv",
            "--out",
            p
        ]),
        0
    );
    let text = std::fs::read_to_string(&path)
        .unwrap()
        .replace("# verdict: Pass", "# verdict: Fail");
    std::fs::write(&path, text).unwrap();
    assert_eq!(code(&["revalidate", p]), 1);
}

#[test]
fn matrix_files_drive_the_instance() {
    let dir = tempfile::tempdir().unwrap();
    let tol = Tolerances::default();
    let mut rng = Rng::new(3);
    let u = write_matrix(
        dir.path(),
        "u.json",
        &sample_invertible(3, &mut rng, &tol).unwrap(),
    );
    let c = write_matrix(dir.path(), "c.json", &CMatrix::unit(3, 0, 0));
    let base = [
        "verify-preserver",
        "--n",
        "3",
        "--alpha",
        "1.5,0.5",
        "--U",
        &u,
        "--C",
        &c,
        "--samples",
        "20",
    ];
    assert_eq!(code(&base), 0);

    // A declared D inconsistent with the family fails.
    let d = write_matrix(dir.path(), "d.json", &CMatrix::identity(3));
    let mut wrong = base.to_vec();
    wrong.extend(["--D", d.as_str()]);
    assert_eq!(code(&wrong), 1);

    let singular = write_matrix(dir.path(), "s.json", &CMatrix::zeros(3, 3));
    assert_eq!(code(&["thm41", "--n", "3", "--U", &singular]), 3);
    let small = write_matrix(dir.path(), "small.json", &CMatrix::identity(2));
    assert_eq!(code(&["thm41", "--n", "3", "--C", &small]), 3);
    std::fs::write(dir.path().join("bad.json"), "{\"rows\":1}").unwrap();
    let bad = dir.path().join("bad.json");
    assert_eq!(
        code(&["factorize", "--n", "1", "--C", bad.to_str().unwrap()]),
        3
    );
}

#[test]
fn pointwise_halving_reports_kernel() {
    let out = fpp(&[
        "pointwise",
        "--map",
        "halving",
        "--m",
        "4",
        "--no-timestamp",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Document = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc.artifacts["kernel_dim"], 1);
    assert_eq!(doc.artifacts["injective"], false);
    assert_eq!(doc.artifacts["surjective"], false);
    assert!(doc
        .reports
        .iter()
        .all(|r| r.name != "zero_invertible_dichotomy_pointwise"));
}

#[test]
fn thm33_records_probe_without_claim() {
    let out = fpp(&["thm33", "--n", "3", "--family", "random", "--samples", "10"]);
    let doc: Document = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc.artifacts["invertibility_probe"]["samples"], 10);
    assert!(doc.reports.iter().all(|r| r.name != "invertibility_probe"));
}
