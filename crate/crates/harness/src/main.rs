use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use amfw_core::amfw::Tableau;
use amfw_core::stability::check_theorem1_condition;
use amfw_harness::config::ExperimentConfig;
use amfw_harness::csv;
use amfw_harness::error::{HarnessError, Result};
use amfw_harness::presets;
use amfw_harness::run::{run_experiment, RunOptions};
use amfw_harness::verify::{verify_preset, Profile, Status};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "amfw", version, about = "AMF-W convergence experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment file.
    Run {
        config: PathBuf,
        /// Write the CSV here instead of the configured output or stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Include 3D grids finer than h = 1/64.
        #[arg(long)]
        full: bool,
        /// Record the wall-clock time as a metadata line.
        #[arg(long)]
        timing: bool,
    },
    /// Run a named preset.
    Preset {
        name: String,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Write the preset configuration to this file instead of running it.
        #[arg(long)]
        dump_config: Option<PathBuf>,
        #[arg(long)]
        full: bool,
        #[arg(long)]
        timing: bool,
    },
    /// List the presets.
    List,
    /// Check presets against their published values.
    Verify {
        /// Comma-separated preset names (default: all).
        #[arg(long, value_delimiter = ',')]
        tables: Vec<String>,
        /// strict, default or exact.
        #[arg(long, default_value = "default")]
        tolerance_profile: String,
        #[arg(long)]
        full: bool,
    },
    /// Sample the boundedness condition of a method's stability function.
    Stability {
        method: String,
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Trial constant of the upper bound.
        #[arg(long, default_value_t = 0.1)]
        c: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn options(full: bool, timing: bool) -> Result<RunOptions> {
    let mut opts = RunOptions::from_env()?;
    opts.full = full;
    opts.timing = timing;
    Ok(opts)
}

fn run_config(cfg: &ExperimentConfig, output: Option<PathBuf>, full: bool, timing: bool) -> Result<()> {
    let outcome = run_experiment(cfg, &options(full, timing)?)?;
    let text = csv::render(cfg, &outcome);
    emit(&text, output.as_deref().or(cfg.output.as_deref()))
}

fn verify(tables: &[String], profile: &str, full: bool) -> Result<bool> {
    let profile = Profile::by_name(profile)
        .ok_or_else(|| HarnessError::Config(format!("unknown tolerance profile `{profile}`")))?;
    let selected = if tables.is_empty() {
        presets::presets()
    } else {
        tables
            .iter()
            .map(|t| {
                presets::preset(t).ok_or_else(|| HarnessError::Config(format!("unknown preset `{t}`")))
            })
            .collect::<Result<Vec<_>>>()?
    };
    let opts = options(full, false)?;
    let mut all_ok = true;
    for p in &selected {
        let res = verify_preset(p, profile, &opts)?;
        for c in &res.checks {
            println!("{}", c.line(p.name));
        }
        let status = res.status();
        all_ok &= status != Status::Fail;
        println!(
            "{}: {} ({} pass, {} fail, {} skipped)",
            p.name,
            status,
            res.count(Status::Pass),
            res.count(Status::Fail),
            res.count(Status::Skipped)
        );
    }
    Ok(all_ok)
}

fn stability(method: &str, d: usize, samples: usize, c: f64, seed: u64, output: Option<PathBuf>) -> Result<()> {
    let tab = Tableau::by_name(method).ok_or_else(|| HarnessError::Config(format!("unknown method `{method}`")))?;
    if !(1..=4).contains(&d) || samples == 0 {
        return Err(HarnessError::Config("need 1 <= d <= 4 and at least one sample".into()));
    }
    let rep = check_theorem1_condition(&tab, d, samples, c, seed)?;
    let mut out = String::new();
    let _ = writeln!(out, "# method={} d={d} samples={samples} c_trial={c} seed={seed}", rep.method);
    let _ = writeln!(out, "# max_upper_violation={}", csv::number(rep.max_upper_violation));
    let _ = writeln!(out, "# min_lower_margin={}", csv::number(rep.min_lower_margin));
    let _ = writeln!(out, "# satisfied_fraction={}", csv::number(rep.satisfied_fraction));
    let _ = writeln!(out, "# c_max={}", csv::number(rep.c_max));
    let _ = writeln!(out, "# condition_holds={}", rep.condition_holds());
    let xs: Vec<String> = (1..=d).map(|j| format!("x{j}")).collect();
    let _ = writeln!(out, "sample,{},r,upper_gap,lower_gap", xs.join(","));
    for (k, s) in rep.samples.iter().enumerate() {
        let xs: Vec<String> = s.x.iter().map(|&v| csv::number(v)).collect();
        let _ = writeln!(
            out,
            "{k},{},{},{},{}",
            xs.join(","),
            csv::number(s.r),
            csv::number(s.upper_gap),
            csv::number(s.lower_gap)
        );
    }
    eprintln!(
        "{}: d={d}, min(R+1)={:.3e}, C_max={:.3e}, condition {}",
        rep.method,
        rep.min_lower_margin,
        rep.c_max,
        if rep.condition_holds() { "holds" } else { "violated" }
    );
    emit(&out, output.as_deref())
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run {
            config,
            output,
            full,
            timing,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            run_config(&cfg, output, full, timing)?;
        }
        Command::Preset {
            name,
            output,
            dump_config,
            full,
            timing,
        } => {
            let p = presets::preset(&name).ok_or_else(|| HarnessError::Config(format!("unknown preset `{name}`")))?;
            match dump_config {
                Some(path) => std::fs::write(path, p.config.to_toml())?,
                None => run_config(&p.config, output, full, timing)?,
            }
        }
        Command::List => print!("{}", presets::list()),
        Command::Verify {
            tables,
            tolerance_profile,
            full,
        } => return verify(&tables, &tolerance_profile, full),
        Command::Stability {
            method,
            d,
            samples,
            c,
            seed,
            output,
        } => stability(&method, d, samples, c, seed, output)?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
