//! `nsl` — drive nonlocal conservation-law experiments from TOML configs.
//!
//! Subcommands: `run` (one scenario), `sweep` (one or two config axes),
//! `refine` (grid-refinement study), `threshold` (classify slope extrema
//! against the blow-up thresholds), `riccati` (integrate a quadratic
//! comparison ODE). Exit codes for `run`: 0 clean, 10 blow-up detected,
//! 20 numeric failure; configuration and usage errors exit 2. Logging goes
//! to stderr, controlled by `NSL_LOG` ∈ {error, warn, info, debug}.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use nsl_cli::config::RunConfig;
use nsl_cli::refine::refinement_study;
use nsl_cli::single::{run_single, RunStatus};
use nsl_cli::sweep::{run_sweep, SweepConfig};
use nsl_cli::artifacts;

use nsl_core::{
    blowup_time_closed_form, classify, riccati_solve, RiccatiProblem, ThresholdModel,
    ThresholdQuery, VRange,
};

#[derive(Parser)]
#[command(name = "nsl", version, about = "Nonlocal conservation laws: runs, sweeps, thresholds")]
struct Cli {
    /// TOML config file (required by run, sweep, refine).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Artifact directory; defaults to ./out for run, sweep, refine.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweep points.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Base seed override for seeded initial data.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate one configured scenario and write trace/snapshot artifacts.
    Run,
    /// Run a grid of scenarios over one or two axes and classify each point.
    Sweep,
    /// Rerun a scenario with dx halved per level and classify convergence.
    Refine {
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
    /// Classify slope extrema against a blow-up threshold.
    Threshold {
        /// constant/linear use the closed forms; the general variants route
        /// the same kernels through the box optimizer.
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long)]
        gamma: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        inf_slope: f64,
        #[arg(long, allow_negative_numbers = true)]
        sup_slope: f64,
        /// Box-search grid resolution (general models only).
        #[arg(long, default_value_t = 1001)]
        resolution: usize,
    },
    /// Integrate dA/dt = a(A - b1)(A - b2) and report its blow-up time.
    Riccati {
        #[arg(long, allow_negative_numbers = true)]
        a: f64,
        #[arg(long, allow_negative_numbers = true)]
        b1: f64,
        #[arg(long, allow_negative_numbers = true)]
        b2: f64,
        #[arg(long, allow_negative_numbers = true)]
        a0: f64,
        #[arg(long, default_value_t = 10.0)]
        t_max: f64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    Constant,
    Linear,
    GeneralConstant,
    GeneralLinear,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("NSL_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<u8> {
    let out = || cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    match &cli.cmd {
        Cmd::Run => {
            let cfg = load_run_config(cli)?;
            let out = out();
            let report = run_single(&cfg, &out)?;
            match report.status {
                RunStatus::Clean => {
                    println!(
                        "clean run to t = {} ({} steps); artifacts in {}",
                        report.t_end,
                        report.steps,
                        out.display()
                    );
                }
                RunStatus::BlowUp => {
                    let e = report.event.as_ref().expect("blow-up carries an event");
                    println!(
                        "blow-up detected at t = {} (x = {:.4}, peak slope {:.3}); artifacts in {}",
                        e.t_blowup.unwrap_or(f64::NAN),
                        e.x_location,
                        e.peak_slope,
                        out.display()
                    );
                }
                RunStatus::NumericFailure => {
                    eprintln!(
                        "numeric failure: {}",
                        report.error.as_deref().unwrap_or("unknown")
                    );
                }
            }
            Ok(report.exit_code())
        }
        Cmd::Sweep => {
            let path = cli.config.as_deref().ok_or_else(|| anyhow!("sweep requires --config"))?;
            let sw = SweepConfig::load(path)?;
            let out = out();
            let report = run_sweep(&sw, &out, cli.jobs, cli.seed)?;
            println!(
                "sweep: {} runs, {} detected, {} failed, soundness {:.4}; artifacts in {}",
                report.runs,
                report.detected,
                report.failed,
                report.soundness,
                out.display()
            );
            Ok(0)
        }
        Cmd::Refine { levels } => {
            let cfg = load_run_config(cli)?;
            let out = out();
            let report = refinement_study(&cfg, *levels, &out)?;
            let peaks: Vec<String> =
                report.levels.iter().map(|l| format!("{:.4}", l.peak_slope)).collect();
            println!(
                "refinement verdict: {:?} (peak slopes {}); artifacts in {}",
                report.verdict,
                peaks.join(" -> "),
                out.display()
            );
            Ok(0)
        }
        Cmd::Threshold { model, gamma, inf_slope, sup_slope, resolution } => {
            let query = threshold_query(*model, *gamma, *inf_slope, *sup_slope)?;
            let report = classify(&query, *resolution)?;
            let relation = if report.above { ">" } else { "<=" };
            let verdict = if report.above {
                "above: finite-time gradient blow-up guaranteed"
            } else {
                "not above: no guarantee from this threshold"
            };
            println!(
                "sup u0' = {} {} threshold {:.6} (gamma = {}, inf u0' = {}): {}",
                sup_slope, relation, report.threshold, gamma, inf_slope, verdict
            );
            if let Some(dir) = &cli.out {
                artifacts::write_json(&dir.join("threshold.json"), &report)?;
            } else {
                println!("{}", serde_json::to_string(&report)?);
            }
            Ok(0)
        }
        Cmd::Riccati { a, b1, b2, a0, t_max } => {
            let problem = RiccatiProblem::constant(*a, *b1, *b2, *a0, *t_max)?;
            let solution = riccati_solve(&problem)?;
            let closed = blowup_time_closed_form(*a, *b1, *b2, *a0);
            let last = solution.trace.last().copied().unwrap_or((0.0, *a0));
            match solution.blowup_time {
                Some(t) => match closed {
                    Some(c) => println!(
                        "blow-up at t = {t:.8} (closed form {c:.8}, rel err {:.2e})",
                        ((t - c) / c).abs()
                    ),
                    None => println!("blow-up at t = {t:.8}"),
                },
                None => println!("bounded through t = {}: A({}) = {}", t_max, last.0, last.1),
            }
            #[derive(serde::Serialize)]
            struct RiccatiOut {
                blowup_time: Option<f64>,
                closed_form: Option<f64>,
                t_end: f64,
                a_end: f64,
                steps: usize,
            }
            let out_json = RiccatiOut {
                blowup_time: solution.blowup_time,
                closed_form: closed,
                t_end: last.0,
                a_end: last.1,
                steps: solution.trace.len(),
            };
            if let Some(dir) = &cli.out {
                artifacts::write_json(&dir.join("riccati.json"), &out_json)?;
                write_riccati_csv(&dir.join("riccati.csv"), &solution.trace)?;
            } else {
                println!("{}", serde_json::to_string(&out_json)?);
            }
            Ok(0)
        }
    }
}

fn load_run_config(cli: &Cli) -> Result<RunConfig> {
    let path = cli.config.as_deref().ok_or_else(|| anyhow!("this subcommand requires --config"))?;
    RunConfig::load(path)
}

fn threshold_query(
    model: ModelArg,
    gamma: f64,
    inf_slope: f64,
    sup_slope: f64,
) -> Result<ThresholdQuery> {
    let model = match model {
        ModelArg::Constant => ThresholdModel::ConstantPotential,
        ModelArg::Linear => ThresholdModel::LinearPotential,
        ModelArg::GeneralConstant => ThresholdModel::General {
            flux: Box::new(nsl_core::FluxModel::arrhenius(1.0)?),
            kernel: Box::new(nsl_core::KernelSpec::constant(gamma, 1.0)?),
            v_range: VRange::KernelNorm,
        },
        ModelArg::GeneralLinear => ThresholdModel::General {
            flux: Box::new(nsl_core::FluxModel::arrhenius(1.0)?),
            kernel: Box::new(nsl_core::KernelSpec::linear(gamma)?),
            v_range: VRange::KernelNorm,
        },
    };
    Ok(ThresholdQuery { gamma, inf_slope, sup_slope, model })
}

fn write_riccati_csv(path: &Path, trace: &[(f64, f64)]) -> Result<()> {
    use std::io::Write;
    let mut w = std::io::BufWriter::new(
        std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
    );
    writeln!(w, "t,A")?;
    for (t, a) in trace {
        writeln!(w, "{t},{a}")?;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))
}
