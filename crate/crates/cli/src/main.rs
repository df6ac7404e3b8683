use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use neutral_dfs::effective::{dephaser_cycles, dephaser_phase, dressed_energies, pulse_effective_params, rotation_duration};
use neutral_dfs::experiment::{
    build_recipes, emit_plot, modulate_recipes, sweep_recipes, to_csv_string, ExperimentConfig, GateName, PlotSpec,
    RecipeSource,
};
use neutral_dfs::gates::{recipe_cnot, recipe_t, uphase_pulse, GateRecipe};
use neutral_dfs::noise::{path_stats, sample_path, OUConfig};
use neutral_dfs::optimizer::{tune_h, tune_phase_gate};
use neutral_dfs::units::to_two_pi_mhz;
use neutral_dfs::Error;

#[derive(Parser)]
#[command(name = "neutral-dfs", version, about = "Noisy simulation of protected neutral-atom gates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Experiment config file (JSON).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Named preset: fig-protected, fig-protected-se or fig-unprotected.
    #[arg(long)]
    preset: Option<String>,
    /// Override the trajectory count.
    #[arg(long)]
    n_traj: Option<usize>,
    /// Override the base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the recipe source (caption, solve, refine, file).
    #[arg(long)]
    source: Option<String>,
    /// CSV output path; stdout when neither this nor the config names one.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// One gate at one noise point.
    Simulate {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Gate name, e.g. T, H, U_phase, CNOT, H_unprotected.
        #[arg(long)]
        gate: String,
        /// Stationary variance τc/2 in (rad/s)².
        #[arg(long)]
        tau_c_over_2: f64,
    },
    /// Fidelity over the configured noise grid.
    Sweep {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// SVG plot path.
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Linear x axis in the plot.
        #[arg(long)]
        linear: bool,
    },
    /// Fidelity versus blockade-modulation depth at a fixed noise point.
    Modulate {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Modulation frequency f_m (Hz); overrides the config.
        #[arg(long)]
        frequency_hz: Option<f64>,
    },
    /// Refine a protected gate against the full Hamiltonian and save the recipe.
    Tune {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// H, U_phase or CNOT.
        #[arg(long)]
        gate: String,
        /// Recipe JSON output path.
        #[arg(long)]
        recipe_out: PathBuf,
    },
    /// Sample an Ornstein-Uhlenbeck path and report its statistics.
    OuStats {
        /// Relaxation time τ (s).
        #[arg(long, default_value_t = 1e-6)]
        tau: f64,
        /// Stationary variance τc/2 in (rad/s)².
        #[arg(long, default_value_t = 1e10)]
        variance: f64,
        #[arg(long, default_value_t = 1_000_000)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the path as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Effective-theory table for the caption drives.
    CheckEffective {
        /// Emit a flat JSON object instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Print a preset as a config document.
    Preset {
        /// fig-protected, fig-protected-se or fig-unprotected.
        name: String,
    },
}

/// Marks failures caused by the user's input.
#[derive(Debug)]
struct ConfigError(String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

fn load(args: &ConfigArgs) -> Result<ExperimentConfig> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)
                .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
            ExperimentConfig::from_json(&text).with_context(|| format!("in {}", path.display()))?
        }
        (None, Some(name)) => ExperimentConfig::preset(name)?,
        (None, None) => return Err(config_error("pass --config FILE or --preset NAME")),
    };
    if let Some(n) = args.n_traj {
        cfg.n_traj = n;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(src) = &args.source {
        cfg.recipe_source = serde_json::from_value(serde_json::Value::String(src.clone()))
            .map_err(|_| config_error(format!("unknown recipe source '{src}'")))?;
    }
    if let Some(out) = &args.out {
        cfg.output.csv = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn gate(name: &str) -> Result<GateName> {
    name.parse::<GateName>().map_err(|e| config_error(e.to_string()))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { cfg, gate: g, tau_c_over_2 } => {
            let mut cfg = load(&cfg)?;
            cfg.gates = vec![gate(&g)?];
            cfg.noise.tau_c_over_2 = vec![tau_c_over_2];
            cfg.validate()?;
            let recipes = build_recipes(&cfg)?;
            warn(&recipes);
            let rows = sweep_recipes(&cfg, &recipes)?;
            write_output(cfg.output.csv.as_deref(), &to_csv_string(&rows)?)
        }
        Command::Sweep { cfg, svg, linear } => {
            let cfg = load(&cfg)?;
            let recipes = build_recipes(&cfg)?;
            warn(&recipes);
            let csv = to_csv_string(&sweep_recipes(&cfg, &recipes)?)?;
            write_output(cfg.output.csv.as_deref(), &csv)?;
            if let Some(path) = svg.or(cfg.output.svg.clone()) {
                let plot = emit_plot(&csv, &PlotSpec { log_x: !linear, title: None })?;
                fs::write(&path, plot).with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(())
        }
        Command::Modulate { cfg, frequency_hz } => {
            let mut cfg = load(&cfg)?;
            if let Some(f) = frequency_hz {
                cfg.modulation.get_or_insert_with(Default::default).frequency_hz = Some(f);
            }
            let spec = cfg.modulation.as_ref().ok_or_else(|| config_error("modulation section is required"))?;
            if spec.frequency_hz.is_none() {
                return Err(config_error(
                    "modulation frequency is required: set modulation.frequency_hz or pass --frequency-hz",
                ));
            }
            cfg.validate()?;
            let recipes = build_recipes(&cfg)?;
            warn(&recipes);
            let rows = modulate_recipes(&cfg, &recipes)?;
            write_output(cfg.output.csv.as_deref(), &to_csv_string(&rows)?)
        }
        Command::Tune { cfg, gate: g, recipe_out } => {
            let cfg = load(&cfg)?;
            let params = cfg.protected_params();
            let recipe = match gate(&g)? {
                GateName::H => report(tune_h(&params, cfg.tuning.h_budget)?),
                GateName::UPhase => report(tune_phase_gate(&params, &cfg.tuning.phase_gate)?),
                GateName::Cnot => {
                    let h = report(tune_h(&params, cfg.tuning.h_budget)?);
                    let u = report(tune_phase_gate(&params, &cfg.tuning.phase_gate)?);
                    recipe_cnot(&h, &u)?
                }
                GateName::T => recipe_t(&params)?,
                other => return Err(config_error(format!("{other} has no tunable parameters"))),
            };
            eprintln!("{}: ideal infidelity {:e}", recipe.name, recipe.ideal_infidelity()?);
            fs::write(&recipe_out, recipe.to_json()?).with_context(|| format!("writing {}", recipe_out.display()))
        }
        Command::OuStats { tau, variance, steps, seed, csv } => {
            let path = sample_path(&OUConfig::from_variance(tau, variance, steps, seed))?;
            let stats = path_stats(&path)?;
            println!("samples          {}", path.len());
            println!("variance         {:e} (rad/s)^2  target {:e}  rel.err {:.3e}", stats.variance, variance, stats.variance / variance - 1.0);
            println!("correlation time {:e} s  target {:e}  rel.err {:.3e}", stats.autocorr_time, tau, stats.autocorr_time / tau - 1.0);
            if let Some(p) = csv {
                path.write_csv(fs::File::create(&p).with_context(|| format!("creating {}", p.display()))?)?;
            }
            Ok(())
        }
        Command::CheckEffective { json } => check_effective(json),
        Command::Preset { name } => {
            println!("{}", ExperimentConfig::preset(&name)?.to_json()?);
            Ok(())
        }
    }
}

fn report(r: neutral_dfs::optimizer::Refinement) -> GateRecipe {
    eprintln!(
        "{}: infidelity {:e} -> {:e} after {} evaluations",
        r.recipe.name, r.seed_infidelity, r.infidelity, r.evaluations
    );
    r.recipe
}

fn warn(recipes: &[GateRecipe]) {
    for r in recipes {
        for w in &r.warnings {
            eprintln!("warning: {}: {w}", r.name);
        }
    }
}

fn check_effective(json: bool) -> Result<()> {
    let cfg = ExperimentConfig::preset("fig-protected")?;
    let params = cfg.protected_params();
    let mut rows: Vec<(String, f64, &str)> = Vec::new();
    let t = recipe_t(&params)?;
    if let neutral_dfs::PulseSegment::Dephaser(d) = &t.schedule.segments[0] {
        let n = dephaser_cycles(d);
        let (phi, dur) = dephaser_phase(n, d.rabi, d.detuning);
        rows.push(("dephaser.cycles".into(), f64::from(n), ""));
        rows.push(("dephaser.detuning".into(), to_two_pi_mhz(d.detuning), "2pi MHz"));
        rows.push(("dephaser.phase".into(), phi, "rad"));
        rows.push(("dephaser.duration".into(), dur * 1e6, "us"));
    }
    let mut u_cfg = cfg.clone();
    u_cfg.gates = vec![GateName::UPhase];
    u_cfg.recipe_source = RecipeSource::Caption;
    let u = build_recipes(&u_cfg)?.remove(0);
    for (label, pulse) in [("rotation", &params.rotation), ("phase_gate", uphase_pulse(&u)?)] {
        let ep = pulse_effective_params(pulse)?;
        let exact = dressed_energies(pulse)?;
        rows.push((format!("{label}.omega_r"), to_two_pi_mhz(ep.omega_r), "2pi MHz"));
        rows.push((format!("{label}.omega_r_exact"), to_two_pi_mhz(exact.swap_frequency()), "2pi MHz"));
        rows.push((format!("{label}.delta_0"), to_two_pi_mhz(ep.delta_0), "2pi MHz"));
        rows.push((format!("{label}.delta_00"), to_two_pi_mhz(ep.delta_00), "2pi MHz"));
        rows.push((format!("{label}.delta_11"), to_two_pi_mhz(ep.delta_11), "2pi MHz"));
        if label == "rotation" {
            rows.push(("rotation.t_pi_over_4".into(), rotation_duration(std::f64::consts::FRAC_PI_4, &ep)? * 1e6, "us"));
        } else {
            rows.push(("phase_gate.t_4pi_over_omega_r".into(), 4.0 * std::f64::consts::PI / ep.omega_r.abs() * 1e6, "us"));
        }
    }
    if json {
        let map: serde_json::Map<String, serde_json::Value> =
            rows.into_iter().map(|(k, v, _)| (k, serde_json::Value::from(v))).collect();
        println!("{}", serde_json::to_string_pretty(&map)?);
    } else {
        for (k, v, unit) in rows {
            println!("{k:<32} {v:>16.6} {unit}");
        }
    }
    Ok(())
}

/// 2 for bad input, 3 for numerical failures, 1 otherwise.
fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::Config(_) | Error::Json(_) | Error::InvalidParameter(_)) => 2,
        Some(Error::NoSolution { .. } | Error::Singular { .. }) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
