use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_ucp-lab");

fn ucp_lab(args: &[&str], cwd: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(cwd)
        .env_remove("UCPLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const UCP: &str = r#"{
  "experiment": "ucp",
  "seed": 4,
  "params": {
    "d": 1, "l_list": [5, 7], "bc": "periodic", "nodes_per_unit": 20, "n_eigs": 3,
    "delta": 0.3, "v0": {"kind": "cosine", "amplitude": 0.5}, "arrangement": {"kind": "lattice"}
  }
}"#;

const WEGNER: &str = r#"{
  "experiment": "wegner",
  "seed": 9,
  "params": {
    "model": {
      "v0": {"kind": "zero"}, "c_minus": 0.5, "c_plus": 0.5, "delta_minus": 0.3, "delta_plus": 0.45,
      "dist": {"kind": "uniform", "a": 0.0, "b": 1.0}
    },
    "wegner": {
      "d": 1, "l": 9, "bc": "dirichlet", "nodes_per_unit": 10,
      "energy": {"above_ground": 0.1}, "epsilons": [0.05, 0.1, 0.2], "n_real": 60
    }
  }
}"#;

fn write_config(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

#[test]
fn runs_are_byte_identical_across_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    write_config(tmp.path(), "ucp.json", UCP);
    write_config(tmp.path(), "wegner.json", WEGNER);
    for (threads, tag) in [("1", "a"), ("3", "b")] {
        for exp in ["ucp", "wegner"] {
            let out = format!("{exp}-{tag}");
            let o = ucp_lab(&["--threads", threads, "run", &format!("{exp}.json"), "--out", &out], tmp.path());
            assert!(o.status.success(), "{}", stderr(&o));
        }
    }
    for exp in ["ucp", "wegner"] {
        let a = std::fs::read(tmp.path().join(format!("{exp}-a/{exp}.csv"))).unwrap();
        let b = std::fs::read(tmp.path().join(format!("{exp}-b/{exp}.csv"))).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "{exp}.csv differs");
    }
}

#[test]
fn run_directory_is_self_describing() {
    let tmp = tempfile::tempdir().unwrap();
    write_config(tmp.path(), "ucp.json", UCP);
    let o = ucp_lab(&["run", "ucp.json", "--out", "r", "--set", "params.n_eigs=2"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let dir = tmp.path().join("r");
    for f in ["resolved_config.json", "provenance.log", "ucp.csv", "summary.json"] {
        assert!(dir.join(f).is_file(), "{f} missing");
    }
    let resolved: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("resolved_config.json")).unwrap()).unwrap();
    assert_eq!(resolved["params"]["n_eigs"], 2);
    assert_eq!(resolved["params"]["seed"], 4);
    assert!(resolved["params"]["eig"]["tol"].is_number(), "defaults are written out");
    let log = std::fs::read_to_string(dir.join("provenance.log")).unwrap();
    assert!(log.contains("threads:") && log.contains("wall_time_s:") && log.contains("status: ok"));
    // Two sizes with two eigenpairs each.
    let csv = std::fs::read_to_string(dir.join("ucp.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn missing_seed_exits_2_and_names_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    write_config(tmp.path(), "c.json", &UCP.replace("\"seed\": 4,", ""));
    let o = ucp_lab(&["run", "c.json"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("seed"), "{}", stderr(&o));
}

#[test]
fn schema_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    write_config(tmp.path(), "c.json", UCP);
    let o = ucp_lab(&["run", "c.json", "--set", "params.colour=1"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("colour"));

    write_config(tmp.path(), "bad.json", "{\n  \"experiment\": \"ucp\",\n  \"seed\": 1,\n");
    let o = ucp_lab(&["run", "bad.json"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line"), "{}", stderr(&o));

    // Even box sides are rejected by the library as invalid input.
    let o = ucp_lab(&["run", "c.json", "--set", "params.l_list=[4]", "--out", "even"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(tmp.path().join("even/provenance.log").is_file());
}

#[test]
fn constants_subcommand_matches_library() {
    let tmp = tempfile::tempdir().unwrap();
    let o = ucp_lab(
        &["constants", "--d", "2", "--kv", "1", "--delta", "0.3", "--bc", "periodic", "--out", "k"],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(tmp.path().join("k/constants.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);

    let input = ucp_lab::constants::ConstantsInput {
        d: 2,
        k_v: 1.0,
        delta: 0.3,
        bc: ucp_lab::geometry::BoundaryCondition::Periodic,
        ..Default::default()
    };
    let expected = ucp_lab::constants::constants_report(&input, &Default::default()).unwrap();
    assert_eq!(lines[0], ucp_lab::constants::ConstantsReport::CSV_HEADER);
    assert_eq!(lines[1], expected.csv_row());

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("k/summary.json")).unwrap()).unwrap();
    assert_eq!(json["ln_c_sfuc"].as_f64().unwrap(), expected.ln_c_sfuc);
}

#[test]
fn plot_data_reshapes_reports() {
    let tmp = tempfile::tempdir().unwrap();
    write_config(tmp.path(), "ucp.json", UCP);
    write_config(tmp.path(), "wegner.json", WEGNER);
    assert!(ucp_lab(&["run", "ucp.json", "--out", "r"], tmp.path()).status.success());
    assert!(ucp_lab(&["run", "wegner.json", "--out", "r"], tmp.path()).status.success());
    let o = ucp_lab(&["plot-data", "r", "--out", "p"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));

    let ratio = std::fs::read_to_string(tmp.path().join("p/ratio_vs_L.dat")).unwrap();
    let blocks: Vec<&str> = ratio.split("\n\n\n").collect();
    assert_eq!(blocks.len(), 3, "one block per eigen-index");
    for (k, b) in blocks.iter().enumerate() {
        assert!(b.starts_with(&format!("# eig_idx {k}")));
        let data: Vec<&str> = b.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data.len(), 2);
    }

    let loglog = std::fs::read_to_string(tmp.path().join("p/loglog.dat")).unwrap();
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("r/summary.json")).unwrap()).unwrap();
    let slope: f64 = loglog.lines().next().unwrap().strip_prefix("# slope ").unwrap().parse().unwrap();
    assert_eq!(slope, summary["slope"].as_f64().unwrap());
    assert_eq!(loglog.lines().filter(|l| !l.starts_with('#')).count(), 3);
    assert!(tmp.path().join("p/plots.gp").is_file());
}

#[test]
fn plot_data_empty_and_malformed() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("r");
    std::fs::create_dir(&dir).unwrap();
    std::fs::write(dir.join("lift.csv"), "t,lambda,hf_lhs,hf_rhs,gap,hf_skipped,ratio\n").unwrap();
    let o = ucp_lab(&["plot-data", "r"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("warning"));
    assert_eq!(std::fs::read_to_string(dir.join("lambda_vs_t.dat")).unwrap(), "");

    std::fs::write(dir.join("lift.csv"), "t,lambda\n0.0,1.0,extra\n").unwrap();
    assert_eq!(ucp_lab(&["plot-data", "r"], tmp.path()).status.code(), Some(1));
    std::fs::write(dir.join("lift.csv"), "t,lambda\n0.0,nan-ish\n").unwrap();
    assert_eq!(ucp_lab(&["plot-data", "r"], tmp.path()).status.code(), Some(1));
}

#[test]
fn gen_delone_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let args = [
        "gen-delone", "--d", "2", "--side", "5", "--bc", "periodic", "--m", "1", "--m-tilde", "0.2", "--delta", "0.05",
        "--n-extra", "3", "--seed", "8", "--out", "pts.json",
    ];
    let o = ucp_lab(&args, tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(tmp.path().join("pts.json")).unwrap();
    let arr = ucp_lab::geometry::DeloneArrangement::from_json(&text).unwrap();
    assert_eq!(arr.gamma1.len(), 25);
    assert_eq!(arr.gamma2.len(), 3);
    let window = ucp_lab::geometry::BoxSpec::centered(2, 5.0, ucp_lab::geometry::BoundaryCondition::Periodic).unwrap();
    assert!(arr.validate(&window).is_ok());
}

#[test]
fn other_experiments_run() {
    let tmp = tempfile::tempdir().unwrap();
    let lift = r#"{
      "experiment": "uncertainty", "seed": 0,
      "params": {
        "d": 1, "l": 5, "bc": "periodic", "nodes_per_unit": 20,
        "t_grid": [0.0, 0.5, 1.0],
        "model": {
          "v0": {"kind": "zero"}, "c_minus": 1.0, "c_plus": 1.0, "delta_minus": 0.3, "delta_plus": 0.45,
          "dist": {"kind": "uniform", "a": 0.0, "b": 1.0}
        }
      }
    }"#;
    let ssf = r#"{
      "experiment": "ssf", "seed": 3,
      "params": {"source": {"kind": "random_dense", "n": 40, "rank": 2, "n_pairs": 2}}
    }"#;
    write_config(tmp.path(), "lift.json", lift);
    write_config(tmp.path(), "ssf.json", ssf);
    let o = ucp_lab(&["run", "lift.json", "--out", "u"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let lift_csv = std::fs::read_to_string(tmp.path().join("u/lift.csv")).unwrap();
    assert_eq!(lift_csv.lines().count(), 4);
    assert!(tmp.path().join("u/uncertainty.csv").is_file());

    let o = ucp_lab(&["run", "ssf.json", "--out", "s"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("s/summary.json")).unwrap()).unwrap();
    assert!(summary["max_residual"].as_f64().unwrap() <= 1e-8);
    for p in summary["pairs"].as_array().unwrap() {
        assert!(p["xi_min"].as_i64().unwrap() >= 0 && p["xi_max"].as_i64().unwrap() <= 2);
    }
}

#[test]
fn selftest_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = ucp_lab(&["selftest"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(!String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}
