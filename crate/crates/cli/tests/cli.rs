//! End-to-end runs of the `reman` binary on small grids.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use reman_cli::config::RunConfig;
use reman_cli::output::parse_echo;

const SMALL: &str = r#"
[grid]
price_step = 0.5
analysis_price_step = 2.0
perception_step = 0.25
realistic_alpha = [0.5, 0.9]
realistic_beta = [0.0, 0.2]

[sweep]
fixed_fees = [0.0, 10000.0]
unit_fee_step = 50.0

[simulation]
seed = 42
replications = 2000
"#;

fn setup(config: &str) -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    fs::write(&path, config).unwrap();
    (dir, path)
}

fn reman(config: &Path, out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reman"))
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .arg("--quiet")
        .args(args)
        .output()
        .unwrap()
}

fn header(text: &str) -> &str {
    text.lines().find(|l| !l.starts_with('#')).unwrap()
}

fn rows(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

#[test]
fn csv_headers_are_stable() {
    let (dir, config) = setup(SMALL);
    let out = dir.path().join("out");
    let cases: [(&[&str], &str, &str); 8] = [
        (&["map"], "selection_map.csv", "alpha,beta_mag,best_model,profit_n,profit_o,profit_t,region_o,region_t,t_authorization_declined"),
        (&["dynamics"], "market_dynamics.csv", "alpha,beta_mag,best_model,q_n,q_r,total_q,baseline_q_n,reman_share,total_delta,qn_delta"),
        (&["impact", "production-dominant"], "impact_production-dominant.csv", "alpha,beta_mag,best_model,impact,baseline_impact,impact_delta,impact_n,impact_o,impact_t"),
        (&["impact", "consumption-dominant"], "impact_consumption-dominant.csv", "alpha,beta_mag,best_model,impact,baseline_impact,impact_delta,impact_n,impact_o,impact_t"),
        (&["contract-sweep"], "contract_sweep.csv", "case,fixed_fee,unit_fee,oem_profit,tpr_profit,system_profit,impact,new_quantity,reman_quantity,authorization_declined"),
        (&["stochastic-compare"], "stochastic_compare.csv", "alpha,beta_mag,model,profit_stochastic,profit_constant,profit_delta,expected_profit_delta,impact_stochastic,impact_constant,ei_delta,near_boundary"),
        (&["validate"], "validation.csv", "case,model,alpha,shift,new_price,new_quantity,reman_price,reman_quantity,reduced_profit,expected_profit,mc_mean,mc_std_error,replications,seed,sigmas_reduced,pass_reduced,sigmas_expected,pass_expected"),
        (&["thresholds", "--with-boundary"], "thresholds.csv", "name,alpha,value,basis"),
    ];
    for (args, file, want) in cases {
        let run = reman(&config, &out, args);
        assert!(run.status.success(), "{args:?}: {}", String::from_utf8_lossy(&run.stderr));
        let text = fs::read_to_string(out.join(file)).unwrap();
        assert_eq!(header(&text), want, "{file}");
        assert!(!rows(&text).is_empty(), "{file}");
    }
}

#[test]
fn map_rows_cover_the_grid() {
    let (dir, config) = setup(SMALL);
    let out = dir.path().join("out");
    assert!(reman(&config, &out, &["map"]).status.success());
    let text = fs::read_to_string(out.join("selection_map.csv")).unwrap();
    let body = rows(&text);
    assert_eq!(body.len(), 25);
    assert!(body[0].starts_with("0,0,N,"));
    for row in &body {
        let model = row.split(',').nth(2).unwrap();
        assert!(["N", "O", "T"].contains(&model), "{row}");
    }
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let (dir, config) = setup(SMALL);
    for (args, file) in [(&["map"][..], "selection_map.csv"), (&["validate"][..], "validation.csv")] {
        let a = dir.path().join("a");
        let b = dir.path().join("b");
        assert!(reman(&config, &a, args).status.success());
        assert!(reman(&config, &b, args).status.success());
        let (x, y) = (fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap());
        // the echoed output directory differs; the rest must not
        let strip = |bytes: &[u8]| {
            String::from_utf8_lossy(bytes).lines().filter(|l| !l.starts_with("# dir =")).collect::<Vec<_>>().join("\n")
        };
        assert_eq!(strip(&x), strip(&y), "{file}");
    }
}

#[test]
fn seed_changes_simulation_output() {
    let (dir, config) = setup(SMALL);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(reman(&config, &a, &["validate"]).status.success());
    assert!(reman(&config, &b, &["--seed", "43", "validate"]).status.success());
    let x = fs::read_to_string(a.join("validation.csv")).unwrap();
    let y = fs::read_to_string(b.join("validation.csv")).unwrap();
    assert_ne!(rows(&x), rows(&y));
}

#[test]
fn echo_block_reproduces_the_effective_config() {
    let (dir, config) = setup(SMALL);
    let out = dir.path().join("out");
    assert!(reman(&config, &out, &["--perception-step", "0.5", "map"]).status.success());
    let text = fs::read_to_string(out.join("selection_map.csv")).unwrap();
    assert!(text.starts_with("# reman "));
    assert!(text.lines().nth(1).unwrap().starts_with("# command: map"));
    let echoed = parse_echo(&text).unwrap();
    let mut want = RunConfig::from_toml(SMALL).unwrap();
    want.grid.perception_step = 0.5;
    want.output.dir = out.to_string_lossy().into_owned();
    assert_eq!(echoed, want);
    assert_eq!(rows(&text).len(), 9);
}

#[test]
fn optimize_writes_json_with_the_reference_optimum() {
    let (dir, config) = setup("");
    let out = dir.path().join("out");
    let run = reman(&config, &out, &["optimize", "n"]);
    assert!(run.status.success());
    let json: serde_json::Value = serde_json::from_slice(&fs::read(out.join("optimize_n.json")).unwrap()).unwrap();
    assert_eq!(json["outcome"]["decision"]["new_price"], 497.74);
    assert_eq!(json["outcome"]["decision"]["new_quantity"], 383);
    assert_eq!(json["approximation"]["profit"], 112500.0);
}

#[test]
fn contract_sweep_rows() {
    let (dir, config) = setup(SMALL);
    let out = dir.path().join("out");
    assert!(reman(&config, &out, &["contract-sweep"]).status.success());
    let text = fs::read_to_string(out.join("contract_sweep.csv")).unwrap();
    let body = rows(&text);
    // unit fees 50, 100, 150 for each fixed fee, then the coordination benchmark
    assert_eq!(body.len(), 7);
    assert!(body[0].starts_with("one-part,0,50.0000,"));
    assert!(body[3].starts_with("two-part,10000.0,50.0000,"));
    assert!(body[6].starts_with("coordination,,,"));
}

#[test]
fn exit_codes_distinguish_failure_kinds() {
    let (dir, config) = setup(SMALL);
    let out = dir.path().join("out");

    let (_d, bad) = setup("[market]\nnot_a_field = 1\n");
    assert_eq!(reman(&bad, &out, &["map"]).status.code(), Some(1));
    assert_eq!(reman(&config, &out, &["--price-step=-1", "map"]).status.code(), Some(1));
    assert_eq!(reman(&dir.path().join("missing.toml"), &out, &["map"]).status.code(), Some(1));

    // production above the product value leaves no threshold structure
    let (_d, expensive) = setup("[costs]\nproduction = 900.0\n");
    let run = reman(&expensive, &out, &["thresholds"]);
    assert_eq!(run.status.code(), Some(2), "{}", String::from_utf8_lossy(&run.stderr));

    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    assert_eq!(reman(&config, &blocker.join("sub"), &["thresholds"]).status.code(), Some(3));

    let usage = Command::new(env!("CARGO_BIN_EXE_reman")).arg("no-such-command").output().unwrap();
    assert_eq!(usage.status.code(), Some(1));
    let help = Command::new(env!("CARGO_BIN_EXE_reman")).arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
}
