//! Command-line front end: single runs, parameter sweeps, the acceptance
//! suite and kernel tables.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use log::info;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{load_config, override_field, parse_config, RunConfig, BENCHMARK_PRESET};
use crate::elasticity::opening;
use crate::error::{Error, Result};
use crate::kernels::{influence_dA_dl, influence_row};
use crate::model::DlForm;
use crate::output::{write_profiles, TimeSeriesRecord, TimeSeriesWriter};
use crate::solver::{consistent_initial, run_with, Termination};
use crate::validation::acceptance;

/// Relative output directories are resolved under this directory when set.
pub const OUTPUT_ROOT_VAR: &str = "PENNYFRAC_OUTPUT_ROOT";

#[derive(Debug, Parser)]
#[command(name = "pennyfrac", version, about = "Fluid-driven penny-shaped fracture with a lagging fluid front")]
pub struct Cli {
    /// Print failures to stderr as a JSON object.
    #[arg(long, global = true)]
    pub error_json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one simulation.
    Run {
        config: PathBuf,
        /// Output directory, overriding the one in the config.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Number of steps, overriding the config.
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Run one simulation per value of a config field, in parallel.
    Sweep {
        config: PathBuf,
        /// Field to vary, as `section.key`.
        #[arg(long)]
        param: String,
        /// Comma-separated values, e.g. "4e2 MPa,4e4 MPa,4e6 MPa".
        #[arg(long, value_delimiter = ',')]
        values: Vec<String>,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Run the acceptance suite; exits 0 only if every criterion passes.
    Validate,
    /// Tabulate A_k and its derivatives at the initial geometry of a config.
    KernelTable {
        config: PathBuf,
        /// Query radii per element.
        #[arg(long, default_value_t = 2)]
        per_element: usize,
        /// Write to this file instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print the bundled benchmark configuration.
    Preset,
}

#[derive(Debug, Serialize)]
struct ErrorSummary<'a> {
    kind: &'a str,
    exit_code: i32,
    message: String,
}

#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub steps_requested: usize,
    pub steps_accepted: usize,
    pub termination: Termination,
    pub error: Option<String>,
    pub final_time: f64,
    pub final_crack_radius: f64,
    pub final_fluid_radius: f64,
}

/// Parses `args` and executes the command, returning the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let json = cli.error_json;
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            let code = e.kind().exit_code();
            if json {
                let s = ErrorSummary {
                    kind: e.kind().as_str(),
                    exit_code: code,
                    message: e.to_string(),
                };
                eprintln!("{}", serde_json::to_string(&s).expect("summary serialises"));
            } else {
                eprintln!("error: {e}");
            }
            code
        }
    }
}

fn execute(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Run { config, output, steps } => {
            let mut cfg = load_config(&config)?;
            if let Some(n) = steps {
                cfg.steps = n;
            }
            let dir = resolve_output(output.unwrap_or_else(|| cfg.output.directory.clone()));
            let summary = run_to_dir(&cfg, &dir)?;
            finish_run(&summary)
        }
        Command::Sweep {
            config,
            param,
            values,
            threads,
            output,
            steps,
        } => sweep(&config, &param, &values, threads, output, steps),
        Command::Validate => {
            let verdicts = acceptance::run_all(|v| println!("{}", v.line()));
            let failed = verdicts.iter().filter(|v| !v.passed).count();
            println!("{} of {} criteria passed", verdicts.len() - failed, verdicts.len());
            Ok(if failed == 0 { 0 } else { 3 })
        }
        Command::KernelTable {
            config,
            per_element,
            output,
        } => {
            let cfg = load_config(&config)?;
            let text = kernel_table(&cfg, per_element)?;
            match output {
                Some(p) => {
                    let p = resolve_output(p);
                    if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                        fs::create_dir_all(dir).map_err(|source| Error::Io {
                            path: dir.to_path_buf(),
                            source,
                        })?;
                    }
                    fs::write(&p, text).map_err(|source| Error::Io { path: p.clone(), source })?;
                }
                None => print!("{text}"),
            }
            Ok(0)
        }
        Command::Preset => {
            print!("{BENCHMARK_PRESET}");
            Ok(0)
        }
    }
}

fn finish_run(summary: &RunSummary) -> Result<i32> {
    if summary.termination == Termination::Completed {
        Ok(0)
    } else {
        eprintln!(
            "run stopped after {} of {} steps: {}",
            summary.steps_accepted,
            summary.steps_requested,
            summary.error.as_deref().unwrap_or("unknown failure")
        );
        Ok(3)
    }
}

/// Joins relative paths onto the output root from the environment, if set.
pub fn resolve_output(dir: PathBuf) -> PathBuf {
    match std::env::var_os(OUTPUT_ROOT_VAR) {
        Some(root) if dir.is_relative() => PathBuf::from(root).join(dir),
        _ => dir,
    }
}

fn io(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Runs `cfg` and writes `config.toml`, `timeseries.csv`, `profiles/` and
/// `summary.json` into `dir`.
pub fn run_to_dir(cfg: &RunConfig, dir: &Path) -> Result<RunSummary> {
    cfg.validate()?;
    fs::create_dir_all(dir).map_err(io(dir))?;
    let cfg_path = dir.join("config.toml");
    fs::write(&cfg_path, cfg.to_toml()).map_err(io(&cfg_path))?;
    let problem = cfg.problem();
    let q = problem.engine()?;
    let initial = consistent_initial(cfg.initial_state()?, &problem);
    let profiles = dir.join("profiles");
    let every = cfg.output.profile_every;
    if every > 0 {
        write_profiles(&initial, &cfg.material, &q, &profiles.join(profile_name(0)))?;
    }
    let mut series = TimeSeriesWriter::create(&dir.join("timeseries.csv"))?;
    let mut failure: Option<Error> = None;
    let result = run_with(initial, &problem, cfg.steps, |rep| {
        if failure.is_some() {
            return;
        }
        let written = opening(&rep.state, &cfg.material, 0.0, &q).and_then(|w0| {
            series.push(&TimeSeriesRecord::from_report(rep, w0))?;
            if every > 0 && (rep.step % every == 0 || rep.step == cfg.steps) {
                write_profiles(&rep.state, &cfg.material, &q, &profiles.join(profile_name(rep.step)))?;
            }
            Ok(())
        });
        if let Err(e) = written {
            failure = Some(e);
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    series.finish()?;
    let summary = RunSummary {
        steps_requested: cfg.steps,
        steps_accepted: result.reports.len(),
        termination: result.termination,
        error: result.error.as_ref().map(|e| e.to_string()),
        final_time: result.final_state.time,
        final_crack_radius: result.final_state.crack_radius,
        final_fluid_radius: result.final_state.fluid_radius(),
    };
    let sum_path = dir.join("summary.json");
    let mut f = fs::File::create(&sum_path).map_err(io(&sum_path))?;
    writeln!(f, "{}", serde_json::to_string_pretty(&summary).expect("summary serialises")).map_err(io(&sum_path))?;
    info!("wrote {}", dir.display());
    Ok(summary)
}

fn profile_name(step: usize) -> String {
    format!("profile_{step:06}.csv")
}

fn variant_dir(param: &str, value: &str) -> String {
    let raw = format!("{param}={value}");
    raw.chars()
        .map(|c| if c.is_ascii_alphanumeric() || "._=-".contains(c) { c } else { '_' })
        .collect()
}

fn sweep(
    config: &Path,
    param: &str,
    values: &[String],
    threads: Option<usize>,
    output: Option<PathBuf>,
    steps: Option<usize>,
) -> Result<i32> {
    if values.is_empty() {
        return Err(Error::config("--values is empty", None));
    }
    let text = fs::read_to_string(config).map_err(io(config))?;
    let mut variants = Vec::new();
    for v in values {
        let v = v.trim();
        let mut cfg = parse_config(&override_field(&text, param, v)?)?;
        if let Some(n) = steps {
            cfg.steps = n;
        }
        variants.push((v.to_string(), cfg));
    }
    let base = resolve_output(output.unwrap_or_else(|| variants[0].1.output.directory.clone()));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::config(format!("thread pool: {e}"), None))?;
    let outcomes: Vec<(String, Result<RunSummary>)> = pool.install(|| {
        variants
            .par_iter()
            .map(|(v, cfg)| (v.clone(), run_to_dir(cfg, &base.join(variant_dir(param, v)))))
            .collect()
    });
    let mut code = 0;
    for (v, out) in outcomes {
        match out {
            Ok(s) => {
                println!(
                    "{param} = {v}: {:?} after {} steps, a = {:e} m, ell = {:e} m",
                    s.termination, s.steps_accepted, s.final_crack_radius, s.final_fluid_radius
                );
                if s.termination != Termination::Completed && code == 0 {
                    code = 3;
                }
            }
            Err(e) => {
                println!("{param} = {v}: error: {e}");
                if code == 0 {
                    code = e.kind().exit_code();
                }
            }
        }
    }
    Ok(code)
}

/// CSV of A_k, ∂A_k/∂r, ∂A_k/∂a and ∂A_k/∂ℓ at the midpoints of
/// `per_element` equal subintervals of each element, out to `a`.
/// The ∂A_k/∂ℓ cell is empty where the configured form is undefined.
pub fn kernel_table(cfg: &RunConfig, per_element: usize) -> Result<String> {
    let state = cfg.initial_state()?;
    let q = cfg.problem().engine()?;
    let a = state.crack_radius;
    let ell = state.fluid_radius();
    let step = state.mesh.h() / per_element.max(1) as f64;
    let form = cfg.settings.dl_form;
    let mut out = String::from("r,k,A,dA_dr,dA_da,dA_dl\n");
    for r in (0..).map(|i| (i as f64 + 0.5) * step).take_while(|&r| r < a) {
        let row = influence_row(r, a, &state.mesh, &q, DlForm::Exact)?;
        for k in 0..row.values.len() {
            let dl = match form {
                DlForm::Exact => format!("{:.16e}", row.d_dl[k]),
                DlForm::FrontNodeOnly => match influence_dA_dl(k, r, a, &state.mesh, &q, form) {
                    Ok(v) => format!("{v:.16e}"),
                    Err(_) if r > ell => String::new(),
                    Err(e) => return Err(e),
                },
            };
            out.push_str(&format!(
                "{:.16e},{k},{:.16e},{:.16e},{:.16e},{dl}\n",
                r, row.values[k], row.d_dr[k], row.d_da[k]
            ));
        }
    }
    Ok(out)
}
