//! Command-line front end.
//!
//! Subcommands: `simulate`, `criterion`, `detect`, `sweep`,
//! `compare-divergence`. Every run is a deterministic function of its
//! configuration file (with flag overrides); all emitted JSON embeds the
//! resolved configuration. Exit codes: 0 success, 2 validation error,
//! 3 numerical failure.

use clap::{Parser, Subcommand};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use stickslip::config::{FrictionSpec, RunConfig};
use stickslip::criterion::{
    divergence, perturbation_margin, stribeck_report, CriterionReport, StribeckReport,
};
use stickslip::detector::{detect_stick_slip, find_return_with_trajectory, CycleReport};
use stickslip::export::{events_json, to_json_string, trajectory_csv};
use stickslip::model::{Mode, State};
use stickslip::simulate::simulate;
use stickslip::sweep::{run_sweep, sweep_csv, SweepSpec};
use stickslip::{Error, Result};

#[derive(Parser)]
#[command(name = "stickslip", version, about = "Dry-friction oscillator toolkit")]
struct Cli {
    /// Configuration file (JSON). For `sweep` this is the sweep spec.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for emitted files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Suppress the summary lines on stdout.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the full Filippov dynamics and write trajectory.csv plus
    /// events.json.
    Simulate {
        /// End time; overrides `t_end` from the configuration file.
        #[arg(long)]
        t_end: Option<f64>,
    },
    /// Evaluate the perturbation criterion and write criterion.json.
    Criterion,
    /// Detect a stick-slip cycle and write cycle.json.
    Detect,
    /// Run a parameter grid sweep and write sweep.csv plus sweep_meta.json.
    Sweep,
    /// Compare the perturbation margin with the divergence-based test and
    /// write divergence.json.
    CompareDivergence,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn config_path(cli: &Cli) -> Result<&Path> {
    cli.config
        .as_deref()
        .ok_or_else(|| Error::Config("--config is required".into()))
}

fn write_out(cli: &Cli, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(&cli.out)?;
    let path = cli.out.join(name);
    std::fs::write(&path, contents)?;
    if !cli.quiet {
        println!("wrote {}", path.display());
    }
    Ok(path)
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Simulate { t_end } => cmd_simulate(cli, *t_end),
        Command::Criterion => cmd_criterion(cli),
        Command::Detect => cmd_detect(cli),
        Command::Sweep => cmd_sweep(cli),
        Command::CompareDivergence => cmd_compare_divergence(cli),
    }
}

fn cmd_simulate(cli: &Cli, t_end_flag: Option<f64>) -> Result<()> {
    let cfg = RunConfig::from_path(config_path(cli)?)?;
    let t_end = t_end_flag.or(cfg.t_end).ok_or_else(|| {
        Error::Config("t_end is required (config key `t_end` or flag --t-end)".into())
    })?;
    if !(t_end > 0.0) {
        return Err(Error::invalid("t_end", format!("must be > 0, got {t_end}")));
    }
    let p = cfg.params()?;
    let law = cfg.friction.build()?;
    let icfg = cfg.integrator_config();
    let s0 = match cfg.initial {
        Some(init) => {
            let mode = if (init.x2 - p.v()).abs() <= icfg.event_tol {
                Mode::Stick
            } else if init.x2 < p.v() {
                Mode::SlipBelow
            } else {
                Mode::SlipAbove
            };
            State::new(init.x1, init.x2, mode)
        }
        None => {
            let (x1, x2) = p.grazing_point();
            State::new(x1, x2, Mode::SlipBelow)
        }
    };
    let traj = simulate(&s0, &p, law.as_ref(), t_end, &icfg)?;
    write_out(cli, "trajectory.csv", &trajectory_csv(&traj))?;
    write_out(cli, "events.json", &events_json(&traj.events)?)?;
    Ok(())
}

#[derive(Serialize)]
struct CriterionOutput<'a> {
    config: &'a RunConfig,
    n_panels: usize,
    report: CriterionReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    stribeck: Option<StribeckReport>,
}

fn cmd_criterion(cli: &Cli) -> Result<()> {
    let cfg = RunConfig::from_path(config_path(cli)?)?;
    let p = cfg.params()?;
    let law = cfg.friction.build()?;
    let report = perturbation_margin(law.as_ref(), &p)?;
    let stribeck = cfg
        .friction
        .stribeck_constants()?
        .map(|k| stribeck_report(&k, &p));
    let out = CriterionOutput {
        config: &cfg,
        n_panels: stickslip::criterion::DEFAULT_PANELS,
        report,
        stribeck,
    };
    write_out(cli, "criterion.json", &to_json_string(&out)?)?;
    Ok(())
}

#[derive(Serialize)]
struct DetectOutput<'a> {
    config: &'a RunConfig,
    report: CycleReport,
}

fn cmd_detect(cli: &Cli) -> Result<()> {
    let cfg = RunConfig::from_path(config_path(cli)?)?;
    let p = cfg.params()?;
    let law = cfg.friction.build()?;
    let report = detect_stick_slip(&p, law.as_ref(), cfg.horizon(), &cfg.integrator_config())?;
    let out = DetectOutput {
        config: &cfg,
        report,
    };
    write_out(cli, "cycle.json", &to_json_string(&out)?)?;
    Ok(())
}

#[derive(Serialize)]
struct SweepMeta<'a> {
    spec: &'a SweepSpec,
    toolkit_version: &'static str,
    records: usize,
}

fn cmd_sweep(cli: &Cli) -> Result<()> {
    let path = config_path(cli)?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let spec: SweepSpec = serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
    let records = run_sweep(&spec)?;
    write_out(cli, "sweep.csv", &sweep_csv(&records))?;
    let meta = SweepMeta {
        spec: &spec,
        toolkit_version: env!("CARGO_PKG_VERSION"),
        records: records.len(),
    };
    write_out(cli, "sweep_meta.json", &to_json_string(&meta)?)?;
    Ok(())
}

#[derive(Serialize)]
struct DivergenceSample {
    t: f64,
    x2: f64,
    divergence: f64,
}

#[derive(Serialize)]
struct CompareOutput<'a> {
    config: &'a RunConfig,
    perturbation_margin: f64,
    instability_margin: f64,
    /// Both tests predict the same sign.
    tests_agree: bool,
    /// Divergence of the below-branch field sampled along the detected
    /// slip arc (empty when no cycle was detected).
    divergence_samples: Vec<DivergenceSample>,
    cycle_exists: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

fn cmd_compare_divergence(cli: &Cli) -> Result<()> {
    let cfg = RunConfig::from_path(config_path(cli)?)?;
    let p = cfg.params()?;
    let k = cfg.friction.stribeck_constants()?.ok_or_else(|| {
        Error::Config(match cfg.friction {
            FrictionSpec::Coulomb => {
                "compare-divergence requires a Stribeck friction law".into()
            }
            _ => "missing Stribeck constants".into(),
        })
    })?;
    let law = cfg.friction.build()?;
    let crit = perturbation_margin(law.as_ref(), &p)?;
    let srep = stribeck_report(&k, &p);

    let mut samples = Vec::new();
    let mut cycle_exists = false;
    let mut note = None;
    if p.epsilon() > 0.0 {
        let icfg = cfg.integrator_config();
        let report = detect_stick_slip(&p, law.as_ref(), cfg.horizon(), &icfg)?;
        cycle_exists = report.exists;
        if report.exists {
            let (_, traj) = find_return_with_trajectory(&p, law.as_ref(), cfg.horizon(), &icfg)?;
            let stride = (traj.samples.len() / 64).max(1);
            for s in traj.samples.iter().step_by(stride) {
                samples.push(DivergenceSample {
                    t: s.t,
                    x2: s.x2,
                    divergence: divergence(s.x2, &k, &p)?,
                });
            }
        } else {
            note = Some("no cycle detected; divergence sampled nowhere".into());
        }
    } else {
        note = Some(
            "epsilon = 0: every divergence term carries epsilon, the test degenerates to 0"
                .into(),
        );
    }
    let tests_agree = (crit.margin > 0.0) == (srep.instability_margin > 0.0);
    let out = CompareOutput {
        config: &cfg,
        perturbation_margin: crit.margin,
        instability_margin: srep.instability_margin,
        tests_agree,
        divergence_samples: samples,
        cycle_exists,
        note,
    };
    write_out(cli, "divergence.json", &to_json_string(&out)?)?;
    Ok(())
}
