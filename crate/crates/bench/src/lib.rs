//! Fixtures shared by the benchmarks.

use neutral_dfs::engine::Propagator;
use neutral_dfs::gates::{recipe_h_caption, recipe_t, recipe_unprotected, GateRecipe, ProtectedParams, UnprotectedKind};
use neutral_dfs::noise::{sample_path, OUConfig, OUPath};
use neutral_dfs::{Alphas, DecayConfig, Result};

pub const TAU_OU: f64 = 1e-6;
pub const VARIANCE: f64 = 1e10;

/// Gates timed by the benchmarks, cheapest first.
pub fn recipes() -> Result<Vec<GateRecipe>> {
    let p = ProtectedParams::caption();
    let (omega, delta_rr) = neutral_dfs::gates::unprotected_caption();
    Ok(vec![
        recipe_t(&p)?,
        recipe_unprotected(UnprotectedKind::Cnot, omega, delta_rr)?,
        recipe_h_caption(&p)?,
    ])
}

/// A propagator at the default step and a noise path long enough for it.
pub fn compiled(recipe: &GateRecipe) -> Result<(Propagator, OUPath)> {
    let alphas = Alphas::default();
    let prop = Propagator::new(recipe.schedule.clone(), alphas, DecayConfig::none(), TAU_OU / 100.0)?;
    let mut cfg = OUConfig::from_variance(TAU_OU, VARIANCE, prop.samples_needed() - 1, 11);
    cfg.dt = prop.dt();
    let path = sample_path(&cfg)?.with_alphas(alphas);
    Ok((prop, path))
}
