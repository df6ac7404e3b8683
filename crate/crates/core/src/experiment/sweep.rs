//! Noise sweeps and blockade-modulation scans.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::atoms::BlockadeModulation;
use crate::engine::{average_compiled, min_fidelity, Propagator, PulseSegment, StateSet};
use crate::error::{Error, Result};
use crate::gates::{
    recipe_cnot, recipe_h, recipe_h_caption, recipe_t, recipe_unprotected, recipe_uphase, recipe_uphase_caption,
    GateRecipe, UnprotectedKind,
};
use crate::noise::OUConfig;
use crate::optimizer::{tune_h, tune_phase_gate};
use crate::units::to_two_pi_mhz;

use super::config::{ExperimentConfig, GateName, RecipeSource};

/// One sweep point of one gate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub gate: String,
    pub provenance: String,
    /// Stationary variance τc/2 ((rad/s)²).
    pub tau_c_over_2: f64,
    /// Standard deviation of ε₁ in units of 2π·MHz.
    #[serde(rename = "sigma_2pi_MHz")]
    pub sigma_2pi_mhz: f64,
    pub f_min: f64,
    pub argmin_state_id: usize,
    pub stderr: f64,
    pub mean_trace_loss: f64,
    pub mean_leakage: f64,
    pub n_traj: usize,
    pub seed: u64,
    pub state_seed: u64,
    /// Integration step (s).
    pub dt: f64,
    /// OU relaxation time (s).
    pub tau_ou: f64,
    pub alpha_e: f64,
    pub alpha_r: f64,
    /// Decay rates (1/s).
    pub gamma_e: f64,
    pub gamma_r: f64,
    #[serde(rename = "gamma_r_2pi_MHz")]
    pub gamma_r_2pi_mhz: f64,
    /// Gate duration (s).
    pub duration: f64,
}

/// One modulation depth of one gate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulationRow {
    pub gate: String,
    pub provenance: String,
    pub depth: f64,
    /// Modulation frequency f_m (Hz).
    pub f_m: f64,
    pub phase: f64,
    pub tau_c_over_2: f64,
    pub f_min: f64,
    pub argmin_state_id: usize,
    pub stderr: f64,
    pub mean_trace_loss: f64,
    pub mean_leakage: f64,
    pub n_traj: usize,
    pub seed: u64,
    pub state_seed: u64,
    pub dt: f64,
    pub gamma_e: f64,
    pub gamma_r: f64,
    pub duration: f64,
}

/// Builds or loads the configured recipes, in `cfg.gates` order.
pub fn build_recipes(cfg: &ExperimentConfig) -> Result<Vec<GateRecipe>> {
    cfg.validate()?;
    let params = cfg.protected_params();
    let src = cfg.recipe_source;
    let mut h: Option<GateRecipe> = None;
    let mut u: Option<GateRecipe> = None;
    let mut get_h = || -> Result<GateRecipe> {
        if h.is_none() {
            h = Some(match src {
                RecipeSource::Caption => recipe_h_caption(&params)?,
                RecipeSource::Solve | RecipeSource::File => recipe_h(&params)?,
                RecipeSource::Refine => tune_h(&params, cfg.tuning.h_budget)?.recipe,
            });
        }
        Ok(h.clone().expect("set above"))
    };
    let mut get_u = || -> Result<GateRecipe> {
        if u.is_none() {
            u = Some(match src {
                RecipeSource::Caption => recipe_uphase_caption(&params)?,
                RecipeSource::Solve | RecipeSource::File => recipe_uphase(&params)?,
                RecipeSource::Refine => tune_phase_gate(&params, &cfg.tuning.phase_gate)?.recipe,
            });
        }
        Ok(u.clone().expect("set above"))
    };
    let drive = &cfg.unprotected;
    cfg.gates
        .iter()
        .map(|&g| {
            if src == RecipeSource::File {
                let path = &cfg.recipe_files[&g];
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read recipe for {g} from {}: {e}", path.display())))?;
                return GateRecipe::from_json(&text);
            }
            match g {
                GateName::T => recipe_t(&params),
                GateName::H => get_h(),
                GateName::UPhase => get_u(),
                GateName::Cnot => recipe_cnot(&get_h()?, &get_u()?),
                GateName::HUnprotected => recipe_unprotected(UnprotectedKind::H, drive.omega, drive.delta_rr),
                GateName::CnotUnprotected => recipe_unprotected(UnprotectedKind::Cnot, drive.omega, drive.delta_rr),
                GateName::CzUnprotected => recipe_unprotected(UnprotectedKind::Cz, drive.omega, drive.delta_rr),
            }
        })
        .collect()
}

/// Result of one gate at one noise point.
struct Point {
    f_min: f64,
    argmin: usize,
    stderr: f64,
    trace_loss: f64,
    leakage: f64,
}

fn evaluate(prop: &Propagator, cfg: &ExperimentConfig, states: &StateSet, variance: f64) -> Result<Point> {
    let mut noise = OUConfig::from_variance(cfg.noise.tau_ou, variance, 0, cfg.seed);
    noise.dt = prop.dt();
    let avg = average_compiled(prop, &noise, cfg.noise.alphas(), cfg.n_traj)?;
    let m = min_fidelity(&avg, &prop.schedule().ideal_target, states)?;
    Ok(Point {
        f_min: m.f_min,
        argmin: m.argmin,
        stderr: m.stderr,
        trace_loss: avg.mean_trace_loss(),
        leakage: avg.mean_leakage(),
    })
}

/// Sweeps the configured noise grid, building the recipes first.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    let recipes = build_recipes(cfg)?;
    sweep_recipes(cfg, &recipes)
}

/// Sweeps the configured noise grid over given recipes.
///
/// Each recipe is compiled once and reused at every noise point; trajectory
/// `j` draws the same random numbers at every point.
pub fn sweep_recipes(cfg: &ExperimentConfig, recipes: &[GateRecipe]) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let dt = cfg.step();
    let mut rows = Vec::new();
    for recipe in recipes {
        let prop = Propagator::new(recipe.schedule.clone(), cfg.noise.alphas(), cfg.decay, dt)?;
        let states = StateSet::default_for(recipe.logical_dim(), cfg.states.seed)?;
        for &v in &cfg.noise.tau_c_over_2 {
            let p = evaluate(&prop, cfg, &states, v)?;
            rows.push(SweepRow {
                gate: recipe.name.clone(),
                provenance: recipe.provenance.label().into(),
                tau_c_over_2: v,
                sigma_2pi_mhz: to_two_pi_mhz(v.sqrt()),
                f_min: p.f_min,
                argmin_state_id: p.argmin,
                stderr: p.stderr,
                mean_trace_loss: p.trace_loss,
                mean_leakage: p.leakage,
                n_traj: cfg.n_traj,
                seed: cfg.seed,
                state_seed: cfg.states.seed,
                dt,
                tau_ou: cfg.noise.tau_ou,
                alpha_e: cfg.noise.alpha_e,
                alpha_r: cfg.noise.alpha_r,
                gamma_e: cfg.decay.gamma_e,
                gamma_r: cfg.decay.gamma_r,
                gamma_r_2pi_mhz: to_two_pi_mhz(cfg.decay.gamma_r),
                duration: recipe.duration(),
            });
        }
    }
    Ok(rows)
}

/// The recipe with every blockade segment modulated.
pub fn with_modulation(recipe: &GateRecipe, m: &BlockadeModulation) -> GateRecipe {
    let mut r = recipe.clone();
    for seg in &mut r.schedule.segments {
        if let PulseSegment::RydbergPair(p) = seg {
            p.modulation = Some(m.clone());
        }
    }
    r
}

/// Scans the modulation depths at a fixed noise point, building the recipes first.
pub fn run_modulation(cfg: &ExperimentConfig) -> Result<Vec<ModulationRow>> {
    modulation_spec(cfg)?;
    let recipes = build_recipes(cfg)?;
    modulate_recipes(cfg, &recipes)
}

fn modulation_spec(cfg: &ExperimentConfig) -> Result<(f64, &super::config::ModulationSpec)> {
    cfg.validate()?;
    let spec = cfg.modulation.as_ref().ok_or_else(|| Error::Config("modulation section is required".into()))?;
    let f_m = spec.frequency_hz.ok_or_else(|| {
        Error::Config("modulation.frequency_hz is required: there is no default modulation frequency".into())
    })?;
    Ok((f_m, spec))
}

/// Scans the modulation depths over given recipes.
pub fn modulate_recipes(cfg: &ExperimentConfig, recipes: &[GateRecipe]) -> Result<Vec<ModulationRow>> {
    let (f_m, spec) = modulation_spec(cfg)?;
    let variance = spec.tau_c_over_2.unwrap_or(cfg.noise.tau_c_over_2[0]);
    let dt = cfg.step();
    let mut rows = Vec::new();
    for recipe in recipes {
        let states = StateSet::default_for(recipe.logical_dim(), cfg.states.seed)?;
        for &depth in &spec.depths {
            let m = BlockadeModulation { depth, frequency_hz: f_m, phase: spec.phase };
            let r = with_modulation(recipe, &m);
            let prop = Propagator::new(r.schedule, cfg.noise.alphas(), cfg.decay, dt)?;
            let p = evaluate(&prop, cfg, &states, variance)?;
            rows.push(ModulationRow {
                gate: recipe.name.clone(),
                provenance: recipe.provenance.label().into(),
                depth,
                f_m,
                phase: spec.phase,
                tau_c_over_2: variance,
                f_min: p.f_min,
                argmin_state_id: p.argmin,
                stderr: p.stderr,
                mean_trace_loss: p.trace_loss,
                mean_leakage: p.leakage,
                n_traj: cfg.n_traj,
                seed: cfg.seed,
                state_seed: cfg.states.seed,
                dt,
                gamma_e: cfg.decay.gamma_e,
                gamma_r: cfg.decay.gamma_r,
                duration: recipe.duration(),
            });
        }
    }
    Ok(rows)
}

/// Writes rows as CSV with a header line.
pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Rows as a CSV string.
pub fn to_csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Csv(e.to_string()))
}

/// Reads rows written by [`write_csv`].
pub fn read_csv<T: for<'de> Deserialize<'de>>(text: &str) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}
