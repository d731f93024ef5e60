use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn anderson(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_anderson"))
        .args(args)
        .env_remove("ANDERSON_SEED")
        .output()
        .expect("binary runs")
}

fn json_stdout(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("JSON output")
}

fn write_ex1_lambda1(dir: &Path) -> String {
    let path = dir.join("ex1_lambda1.json");
    std::fs::write(&path, r#"{"breakpoints": [-0.5, 0.5], "values": [1.0]}"#).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn critical_lists_reflection_zeros() {
    let dir = tempfile::tempdir().unwrap();
    let pot = write_ex1_lambda1(dir.path());
    let v = json_stdout(&anderson(&[
        "critical",
        "--potential",
        &pot,
        "--k-range",
        "0.5",
        "10",
    ]));
    let pi2 = std::f64::consts::PI.powi(2);
    let zeros: Vec<f64> = v["results"]["reports"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| {
            r["reasons"]
                .as_array()
                .unwrap()
                .iter()
                .any(|x| x == "PositiveReflectionZero")
        })
        .map(|r| r["energy"].as_f64().unwrap())
        .collect();
    assert_eq!(zeros.len(), 3, "{zeros:?}");
    for (z, n) in zeros.iter().zip([1.0, 4.0, 9.0]) {
        assert!((z - (n * pi2 + 1.0)).abs() < 1e-7, "{z}");
    }
    assert_eq!(v["manifest"]["subcommand"], "critical");
    assert_eq!(
        v["manifest"]["potential_sha256"].as_str().unwrap().len(),
        64
    );
}

#[test]
fn gamma_is_byte_identical_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let pot = write_ex1_lambda1(dir.path());
    let run = |threads: &str| {
        let out = anderson(&[
            "gamma",
            "--potential",
            &pot,
            "--E",
            "2",
            "--steps",
            "100000",
            "--realizations",
            "100",
            "--seed",
            "7",
            "--threads",
            threads,
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        out.stdout
    };
    let a = run("1");
    assert_eq!(a, run("1"));
    assert_eq!(a, run("3"));
    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# manifest {"));
    assert_eq!(
        lines.next().unwrap(),
        "E,gamma_hat,std_error,n_steps,n_realizations,estimator,criticality_status"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[3], "100000");
    assert_eq!(row[6], "Regular");
    // 17 significant digits
    assert_eq!(
        row[1]
            .split('e')
            .next()
            .unwrap()
            .replace(['.', '-'], "")
            .len(),
        17
    );
}

#[test]
fn every_subcommand_is_deterministic_across_threads() {
    let cases: [&[&str]; 5] = [
        &["scatter", "--ex2", "59.2176", "--k-points", "50"],
        &["critical", "--ex1", "1", "--k-range", "0.5", "4"],
        &[
            "furstenberg",
            "--ex1",
            "1",
            "--E",
            "2,-1,10.869604401089358",
        ],
        &[
            "walk",
            "--pairs",
            "2048",
            "--realizations",
            "50",
            "--seed",
            "3",
        ],
        &["examples"],
    ];
    for args in cases {
        let one = anderson(&[args, &["--threads", "1"]].concat());
        let four = anderson(&[args, &["--threads", "4"]].concat());
        assert!(
            one.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&one.stderr)
        );
        assert_eq!(one.stdout, four.stdout, "{args:?}");
    }
}

#[test]
fn examples_lambda_j() {
    let v = json_stdout(&anderson(&["examples", "--lambda-j", "3"]));
    let nj = &v["results"]["nj"][0];
    assert_eq!(nj["N_j"], 80);
    assert_eq!(nj["pair_count"], 3);
    assert_eq!(nj["verified"], true);
    let v = json_stdout(&anderson(&["examples"]));
    assert_eq!(v["results"]["nj"].as_array().unwrap().len(), 5);
    let n80 = &v["results"]["example2_reflectionless"][3];
    assert_eq!(n80["N"], 80);
    assert_eq!(n80["pairs"].as_array().unwrap().len(), 3);
}

#[test]
fn seed_from_environment_and_config_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"ex1": 1.0, "E": [2.0], "steps": 500, "realizations": 4, "seed": 11}"#,
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let from_config = anderson(&["gamma", "--config", cfg]);
    let from_flag = anderson(&["gamma", "--config", cfg, "--seed", "11", "--steps", "500"]);
    assert!(from_config.status.success());
    assert_eq!(from_config.stdout, from_flag.stdout);
    let text = String::from_utf8(from_config.stdout).unwrap();
    assert!(text.contains("\"master_seed\":11"));
    assert!(text.contains(",500,4,vector,"));

    let env = Command::new(env!("CARGO_BIN_EXE_anderson"))
        .args([
            "gamma",
            "--ex1",
            "1",
            "--E",
            "2",
            "--steps",
            "500",
            "--realizations",
            "4",
        ])
        .env("ANDERSON_SEED", "11")
        .output()
        .unwrap();
    assert_eq!(String::from_utf8(env.stdout).unwrap(), text);
}

#[test]
fn exit_codes() {
    assert_eq!(anderson(&["nonsense"]).status.code(), Some(1));
    assert_eq!(anderson(&["gamma", "--ex1", "1"]).status.code(), Some(1));
    assert_eq!(
        anderson(&["scatter", "--ex1", "1", "--ex2", "1"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        anderson(&["critical", "--potential", "/nonexistent.json"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(anderson(&["--help"]).status.code(), Some(0));

    // k below the pole-exclusion radius is a numerical failure
    let out = anderson(&[
        "scatter",
        "--ex1",
        "1",
        "--k-range",
        "1e-9",
        "1",
        "--k-points",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let diag: Value = serde_json::from_slice(&out.stderr).expect("diagnostic JSON");
    assert_eq!(diag["error"], "KTooSmall");
}

#[test]
fn gnuplot_script_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("gamma.csv");
    let plot = dir.path().join("gamma.gp");
    let out = anderson(&[
        "gamma",
        "--ex1",
        "1",
        "--E",
        "2,5",
        "--steps",
        "300",
        "--realizations",
        "3",
        "--out",
        data.to_str().unwrap(),
        "--gnuplot",
        plot.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let script = std::fs::read_to_string(&plot).unwrap();
    assert!(script.contains(data.to_str().unwrap()));
    assert!(std::fs::read_to_string(&data).unwrap().lines().count() == 4);
    assert_eq!(
        anderson(&["examples", "--gnuplot", plot.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
}
