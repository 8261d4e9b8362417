//! End-to-end checks of the command-line interface: exit codes, file
//! round trips and the documented subcommand pipelines.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_minmax-mom"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin()
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn tempdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("minmax_mom_cli_{name}"));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn kv(path: &Path) -> Vec<(String, String)> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let (k, v) = l.split_once(',').unwrap();
            (k.to_string(), v.to_string())
        })
        .collect()
}

#[test]
fn generate_then_fit_pipeline() {
    let dir = tempdir("pipeline");
    let out = run(
        &[
            "generate",
            "--model",
            "prop2",
            "--n",
            "8000",
            "--x-level",
            "10",
            "--seed",
            "7",
            "--out",
            "d.csv",
            "--meta",
            "d.meta",
        ],
        &dir,
    );
    assert!(out.status.success(), "{out:?}");
    assert!(dir.join("d.csv").exists() && dir.join("d.meta").exists());

    let out = run(
        &[
            "fit",
            "--data",
            "d.csv",
            "--loss",
            "quantile",
            "--tau",
            "0.5",
            "--k",
            "10",
            "--max-iter",
            "50",
            "--seed",
            "3",
            "--out",
            "fit.csv",
        ],
        &dir,
    );
    assert!(out.status.success(), "{out:?}");
    let rows = kv(&dir.join("fit.csv"));
    assert!(rows.iter().any(|(k, _)| k == "t_hat_1"));
    assert!(rows.iter().any(|(k, v)| k == "k" && v == "10"));
}

#[test]
fn usage_errors_exit_one_naming_the_flag() {
    let dir = tempdir("usage");
    std::fs::write(dir.join("d.csv"), "y,x1\n1.0,2.0\n-1.0,0.5\n").unwrap();
    let out = run(
        &[
            "fit", "--data", "d.csv", "--loss", "l1", "--k", "0", "--out", "o.csv",
        ],
        &dir,
    );
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("--k"), "stderr should name --k: {err}");

    // Unknown flags are rejected by the parser.
    let out = run(&["fit", "--no-such-flag"], &dir);
    assert_eq!(out.status.code(), Some(1));

    // Missing files are named.
    let out = run(
        &[
            "fit",
            "--data",
            "missing.csv",
            "--loss",
            "l1",
            "--k",
            "1",
            "--out",
            "o.csv",
        ],
        &dir,
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.csv"));
}

#[test]
fn k1_fit_equals_erm_flag() {
    let dir = tempdir("k1_erm");
    let gen = run(
        &[
            "generate",
            "--model",
            "logistic-student",
            "--n",
            "120",
            "--d",
            "3",
            "--t-star-fill",
            "1.0",
            "--seed",
            "5",
            "--out",
            "d.csv",
        ],
        &dir,
    );
    assert!(gen.status.success());
    let common = [
        "--data",
        "d.csv",
        "--loss",
        "logistic",
        "--eps",
        "1e-9",
        "--max-iter",
        "80",
        "--seed",
        "21",
    ];
    let mut a = vec!["fit"];
    a.extend_from_slice(&common);
    a.extend_from_slice(&["--k", "1", "--out", "k1.csv"]);
    assert!(run(&a, &dir).status.success());
    let mut b = vec!["fit"];
    b.extend_from_slice(&common);
    b.extend_from_slice(&["--erm", "--out", "erm.csv"]);
    assert!(run(&b, &dir).status.success());

    let k1 = kv(&dir.join("k1.csv"));
    let erm = kv(&dir.join("erm.csv"));
    let coord = |rows: &[(String, String)], key: &str| -> String {
        rows.iter().find(|(k, _)| k == key).unwrap().1.clone()
    };
    for j in 1..=3 {
        assert_eq!(
            coord(&k1, &format!("t_hat_{j}")),
            coord(&erm, &format!("t_hat_{j}")),
            "coordinate {j} differs between --k 1 and --erm"
        );
    }
}

#[test]
fn generate_is_byte_deterministic() {
    let dir = tempdir("determinism");
    for name in ["a.csv", "b.csv"] {
        let out = run(
            &[
                "generate",
                "--model",
                "figure1",
                "--n",
                "60",
                "--d",
                "4",
                "--n-out",
                "6",
                "--t-star-fill",
                "0.5",
                "--seed",
                "9",
                "--out",
                name,
            ],
            &dir,
        );
        assert!(out.status.success());
    }
    let a = std::fs::read(dir.join("a.csv")).unwrap();
    let b = std::fs::read(dir.join("b.csv")).unwrap();
    assert_eq!(a, b, "same invocation must produce byte-identical output");
}

#[test]
fn csv_round_trip_preserves_bits() {
    let dir = tempdir("roundtrip");
    assert!(run(
        &[
            "generate",
            "--model",
            "prop1",
            "--n",
            "40",
            "--d",
            "3",
            "--v-scale",
            "10",
            "--t-star-fill",
            "2.0",
            "--seed",
            "13",
            "--out",
            "d.csv",
            "--meta",
            "d.meta",
        ],
        &dir,
    )
    .status
    .success());
    // Re-emitting the parsed dataset reproduces the file byte for byte.
    let ds = minmax_mom::data::Dataset::<f64>::read_csv(dir.join("d.csv")).unwrap();
    ds.write_csv(dir.join("d2.csv")).unwrap();
    assert_eq!(
        std::fs::read(dir.join("d.csv")).unwrap(),
        std::fs::read(dir.join("d2.csv")).unwrap()
    );
}

#[test]
fn cv_lepski_detect_and_analysis_commands() {
    let dir = tempdir("analysis");
    assert!(run(
        &[
            "generate",
            "--model",
            "logistic-student",
            "--n",
            "90",
            "--d",
            "2",
            "--t-star-fill",
            "1.0",
            "--seed",
            "3",
            "--out",
            "d.csv",
        ],
        &dir,
    )
    .status
    .success());

    let out = run(
        &[
            "cv",
            "--data",
            "d.csv",
            "--loss",
            "logistic",
            "--k-grid",
            "1,2,4",
            "--v-folds",
            "3",
            "--max-iter",
            "60",
            "--out",
            "cv.csv",
        ],
        &dir,
    );
    assert!(out.status.success(), "{out:?}");
    assert!(kv(&dir.join("cv.csv"))
        .iter()
        .any(|(k, _)| k == "selected_k"));

    std::fs::write(dir.join("cands.csv"), "x1,x2\n1.0,1.0\n0.5,0.5\n0.0,0.0\n").unwrap();
    let out = run(
        &[
            "lepski",
            "--data",
            "d.csv",
            "--loss",
            "logistic",
            "--k-grid",
            "1,2",
            "--thresholds",
            "1=100,2=100",
            "--candidates",
            "cands.csv",
            "--out",
            "lep.csv",
        ],
        &dir,
    );
    assert!(out.status.success(), "{out:?}");
    let rows = kv(&dir.join("lep.csv"));
    assert!(rows.iter().any(|(k, v)| k == "selected_k" && v == "1"));

    let out = run(
        &[
            "detect-outliers",
            "--data",
            "d.csv",
            "--loss",
            "logistic",
            "--k",
            "6",
            "--iterations",
            "150",
            "--burn-in",
            "30",
            "--seed",
            "2",
            "--out",
            "scores.csv",
        ],
        &dir,
    );
    assert!(out.status.success(), "{out:?}");
    let scores = std::fs::read_to_string(dir.join("scores.csv")).unwrap();
    assert!(scores.starts_with("index,score\n"));
    assert_eq!(scores.lines().count(), 91);

    let out = run(
        &[
            "complexity",
            "--data",
            "d.csv",
            "--sigma",
            "identity",
            "--gamma",
            "0.5",
            "--n-mc",
            "200",
            "--out",
            "cx.csv",
        ],
        &dir,
    );
    assert!(out.status.success(), "{out:?}");
    assert!(kv(&dir.join("cx.csv")).iter().any(|(k, _)| k == "r_fixed"));

    let out = run(
        &[
            "bernstein",
            "--loss",
            "l1",
            "--design",
            "constant",
            "--d",
            "1",
            "--t-star-fill",
            "0.4",
            "--noise",
            "gaussian",
            "--noise-sd",
            "1.0",
            "--r",
            "0.1",
            "--n-dirs",
            "4",
            "--n-x",
            "32",
            "--out",
            "bern.csv",
        ],
        &dir,
    );
    assert!(out.status.success(), "{out:?}");
    assert!(kv(&dir.join("bern.csv"))
        .iter()
        .any(|(k, v)| k == "passed" && v == "true"));
}

#[test]
fn experiment_spec_and_config_files() {
    let dir = tempdir("exp");
    std::fs::write(
        dir.join("exp.spec"),
        "name = prop1\nreplications = 2\nn = 80\nd = 4\nt_star_scale = 20\n\
         erm_max_iter = 400\nmom_max_iter = 200\nout_dir = results\n",
    )
    .unwrap();
    let out = run(&["experiment", "--spec", "exp.spec"], &dir);
    assert!(out.status.success(), "{out:?}");
    let records = std::fs::read_to_string(dir.join("results/prop1_records.csv")).unwrap();
    assert!(records.starts_with("seed,estimator,k,error_l2,test_error,runtime_ms"));
    assert!(dir.join("results/prop1_summary.csv").exists());

    // Unknown spec keys are rejected.
    std::fs::write(dir.join("bad.spec"), "name = prop1\nbogus_key = 1\n").unwrap();
    let out = run(&["experiment", "--spec", "bad.spec"], &dir);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus_key"));

    // Config files supply defaults; explicit flags win.
    std::fs::write(
        dir.join("d.csv"),
        "y,x1\n1.0,1.0\n-1.0,-2.0\n1.0,0.5\n-1.0,-0.25\n",
    )
    .unwrap();
    std::fs::write(dir.join("conf.ini"), "fit.loss = l1\nfit.max_iter = 10\n").unwrap();
    let out = run(
        &[
            "fit", "--config", "conf.ini", "--data", "d.csv", "--k", "2", "--seed", "4", "--out",
            "f.csv",
        ],
        &dir,
    );
    assert!(out.status.success(), "{out:?}");

    std::fs::write(dir.join("bad.ini"), "fit.unknown_thing = 1\n").unwrap();
    let out = run(
        &[
            "fit", "--config", "bad.ini", "--data", "d.csv", "--loss", "l1", "--k", "2", "--out",
            "f.csv",
        ],
        &dir,
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown_thing"));
}
