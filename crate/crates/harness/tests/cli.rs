use std::path::Path;
use std::process::{Command, Output};

use amfw_harness::config::{DtConfig, ExperimentConfig, GridConfig};
use amfw_harness::csv;
use amfw_harness::error::HarnessError;
use amfw_harness::presets::{preset, presets};
use amfw_harness::run::{parse_bytes, run_experiment, run_memory, RunOptions, DEFAULT_MEMORY_CAP};

const SMALL: &str = r#"
# a two-level run on Problem 2
method = "amfw-hv"
estimator = "simultaneous"
correction = "extension"

[problem]
id = "problem2"

[grid]
h_inv = [8, 16]

[dt]
rule = "equal-to-h"
"#;

fn amfw(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_amfw"));
    cmd.args(args).env_remove("AMFW_MEMORY_CAP").env_remove("AMFW_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn configs_round_trip() {
    let cfg = ExperimentConfig::parse(SMALL).unwrap();
    let text = cfg.to_toml();
    let again = ExperimentConfig::parse(&text).unwrap();
    assert_eq!(again, cfg);
    assert_eq!(again.to_toml(), text);
    for p in presets() {
        let text = p.config.to_toml();
        let back = ExperimentConfig::parse(&text).unwrap();
        assert_eq!(back, p.config, "{}", p.name);
        assert_eq!(back.to_toml(), text);
    }
}

#[test]
fn unknown_keys_are_rejected() {
    for bad in [
        SMALL.replace("method =", "colour = \"red\"\nmethod ="),
        SMALL.replace("id = \"problem2\"", "id = \"problem2\"\nkappa = 1"),
        SMALL.replace("rule = \"equal-to-h\"", "rule = \"equal-to-h\"\nkappa = 2.0"),
        SMALL.replace("h_inv = [8, 16]", "h_inv = [8, 16]\nm = [3]"),
    ] {
        assert!(matches!(ExperimentConfig::parse(&bad), Err(HarnessError::Config(_))), "{bad}");
    }
}

#[test]
fn invalid_values_are_rejected() {
    let cases = [
        SMALL.replace("amfw-hv", "rk4"),
        SMALL.replace("problem2", "problem9"),
        SMALL.replace("\"extension\"", "\"sideways\""),
        SMALL.replace("[8, 16]", "[3]"),
        SMALL.replace("[8, 16]", "[16, 8]"),
        SMALL.replace("[8, 16]", "[]"),
        SMALL.replace("\"simultaneous\"", "\"spatial\""),
        SMALL.replace("rule = \"equal-to-h\"", "rule = \"fixed\"\nvalues = [0.1]"),
        SMALL.replace("rule = \"equal-to-h\"", "rule = \"kappa-h\"\nkappa = -1.0"),
        SMALL.replace("id = \"problem2\"", "id = \"problem2\"\nc = 1.0"),
        SMALL.replace("[grid]\nh_inv = [8, 16]", "[grid]\nh_inv = [8, 16]\nn = [7, 15]"),
        format!("norms = []\n{SMALL}"),
        format!("threads = 0\n{SMALL}"),
    ];
    for bad in cases {
        assert!(matches!(ExperimentConfig::parse(&bad), Err(HarnessError::Config(_))), "{bad}");
    }
}

#[test]
fn grid_forms_agree() {
    let by_h = GridConfig {
        h: Some(vec![0.125, 0.0625]),
        ..GridConfig::default()
    };
    let by_n = GridConfig {
        n: Some(vec![7, 15]),
        ..GridConfig::default()
    };
    assert_eq!(by_h.h_inv().unwrap(), vec![8, 16]);
    assert_eq!(by_n.h_inv().unwrap(), vec![8, 16]);
    let off = GridConfig {
        h: Some(vec![0.3]),
        ..GridConfig::default()
    };
    assert!(off.h_inv().is_err());
}

#[test]
fn single_level_has_empty_order_columns() {
    let cfg = ExperimentConfig::parse(&SMALL.replace("[8, 16]", "[8]")).unwrap();
    let out = run_experiment(&cfg, &RunOptions::default()).unwrap();
    let text = csv::render(&cfg, &out);
    let rows = csv::parse(&text).unwrap();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].p_l2.is_none() && rows[0].p_max.is_none());
    assert!(rows[0].ge_l2.unwrap() > 0.0);
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data[0], csv::HEADER);
    assert!(data[1].ends_with(','));
}

#[test]
fn selected_norms_only() {
    let cfg = ExperimentConfig::parse(&format!("norms = [\"max\"]\n{SMALL}")).unwrap();
    let out = run_experiment(&cfg, &RunOptions::default()).unwrap();
    let rows = csv::parse(&csv::render(&cfg, &out)).unwrap();
    assert!(rows.iter().all(|r| r.ge_l2.is_none() && r.ge_max.is_some()));
}

#[test]
fn csv_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let a = amfw(&["run", &cfg], &[("AMFW_THREADS", "2")]);
    let b = amfw(&["run", &cfg], &[("AMFW_THREADS", "2")]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let rows = csv::parse(&text).unwrap();
    assert_eq!(rows.len(), 2);
    // full precision
    let field = text.lines().last().unwrap().split(',').nth(2).unwrap();
    assert_eq!(field.split('e').next().unwrap().len(), 18);
    assert_eq!(field.parse::<f64>().unwrap(), rows[1].ge_l2.unwrap());
}

#[test]
fn output_path_from_config_and_flag() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("from_config.csv");
    let text = format!("output = {:?}\n{SMALL}", target.to_string_lossy());
    let cfg = write(dir.path(), "small.toml", &text);
    assert!(amfw(&["run", &cfg], &[]).status.success());
    let flag = dir.path().join("from_flag.csv");
    assert!(amfw(&["run", &cfg, "--output", &flag.to_string_lossy()], &[]).status.success());
    assert_eq!(std::fs::read(&target).unwrap(), std::fs::read(&flag).unwrap());
}

#[test]
fn dumped_preset_reproduces_the_preset() {
    let dir = tempfile::tempdir().unwrap();
    let dumped = dir.path().join("table1.toml");
    let out = amfw(&["preset", "table1", "--dump-config", &dumped.to_string_lossy()], &[]);
    assert!(out.status.success());
    let from_file = amfw(&["run", &dumped.to_string_lossy()], &[]);
    let direct = amfw(&["preset", "table1"], &[]);
    assert!(direct.status.success());
    assert_eq!(from_file.stdout, direct.stdout);
    let rows = csv::parse(&String::from_utf8(direct.stdout).unwrap()).unwrap();
    let at16 = rows.iter().find(|r| (1.0 / r.h - 16.0).abs() < 1e-9).unwrap();
    let ge = at16.ge_l2.unwrap();
    assert!((8.2e-3..=1.12e-2).contains(&ge), "{ge}");
}

#[test]
fn registry() {
    let all = presets();
    assert!(all.len() >= 10);
    let mut names: Vec<&str> = all.iter().map(|p| p.name).collect();
    names.sort_unstable();
    names.dedup();
    assert_eq!(names.len(), all.len());
    for p in &all {
        assert_eq!(preset(p.name).unwrap(), *p);
        p.config.validate().unwrap();
        let levels = p.config.grid.h_inv().unwrap();
        assert_eq!(levels, p.reference.iter().map(|r| r.h_inv).collect::<Vec<_>>());
    }
    assert!(preset("table99").is_none());
    let out = amfw(&["list"], &[]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), all.len() + 1);
    assert_eq!(text, String::from_utf8(amfw(&["list"], &[]).stdout).unwrap());
}

#[test]
fn preset_captions() {
    let p = preset("table2").unwrap().config;
    assert_eq!((p.problem.c, p.method.as_str(), p.dt.clone()), (Some(1.0), "AMFW-HV", DtConfig::EqualToH {}));
    let p = preset("table5").unwrap().config;
    assert_eq!(p.dt, DtConfig::KappaH53 { kappa: 0.25 });
    assert_eq!(preset("table10").unwrap().config.method, "AMFW-3/8");
}

#[test]
fn fine_3d_levels_are_skipped_not_dropped() {
    let cfg = ExperimentConfig::parse(
        &SMALL.replace("problem2", "problem3").replace("[8, 16]", "[128]"),
    )
    .unwrap();
    let out = run_experiment(&cfg, &RunOptions::default()).unwrap();
    assert!(out.report.rows.is_empty());
    assert_eq!(out.skipped.len(), 1);
    let text = csv::render(&cfg, &out);
    assert!(text.lines().any(|l| l.starts_with("# SKIPPED h=1/128")));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.toml", SMALL);
    let bad = write(dir.path(), "bad.toml", &SMALL.replace("method =", "speed = 1\nmethod ="));
    assert_eq!(amfw(&["run", &bad], &[]).status.code(), Some(2));
    assert_eq!(amfw(&["run", "/nonexistent/config.toml"], &[]).status.code(), Some(2));
    assert_eq!(amfw(&["run", &good], &[("AMFW_MEMORY_CAP", "1k")]).status.code(), Some(3));
    assert_eq!(amfw(&["run", &good], &[("AMFW_THREADS", "zero")]).status.code(), Some(2));
    assert_eq!(amfw(&["preset", "table99"], &[]).status.code(), Some(2));
    assert_eq!(amfw(&["stability", "rk4"], &[]).status.code(), Some(2));
    assert_eq!(HarnessError::Solver(amfw_core::AmfwError::Singular { row: 0 }).exit_code(), 4);
}

#[test]
fn zero_tolerance_verification_fails() {
    let out = amfw(&["verify", "--tables", "table1", "--tolerance-profile", "exact"], &[]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("table1: FAIL"));
    assert!(text.contains("SKIPPED"));
}

#[test]
fn stability_subcommand_writes_samples() {
    let out = amfw(&["stability", "AMFW-HV", "--d", "2", "--samples", "50", "--seed", "3"], &[]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("# condition_holds=true"));
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data[0], "sample,x1,x2,r,upper_gap,lower_gap");
    assert_eq!(data.len(), 51);
}

#[test]
fn memory_estimates() {
    assert!(run_memory(3, 64, 2) < run_memory(3, 128, 2));
    assert!(run_memory(3, 128, 4) < DEFAULT_MEMORY_CAP);
    assert_eq!(parse_bytes("16GiB").unwrap(), 16 << 30);
    assert_eq!(parse_bytes("512").unwrap(), 512);
    assert_eq!(parse_bytes("2m").unwrap(), 2 << 20);
    assert!(parse_bytes("lots").is_err());
}

#[test]
fn corrected_order_at_h_1_128() {
    let mut cfg = preset("table3").unwrap().config;
    cfg.grid = GridConfig {
        h_inv: Some(vec![64, 128]),
        ..GridConfig::default()
    };
    let opts = RunOptions {
        full: true,
        ..RunOptions::default()
    };
    let out = run_experiment(&cfg, &opts).unwrap();
    assert!(out.skipped.is_empty());
    let p = out.report.row_for(128).unwrap().p_max.unwrap();
    assert!((2.85..=3.15).contains(&p), "{p}");
}
