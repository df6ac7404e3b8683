//! Local refinement of pulse parameters by bounded Nelder–Mead with restarts.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::PulseSegment;
use crate::error::{Error, Result};
use crate::gates::{phase_gate_family, recipe_h, GateRecipe, Provenance, ProtectedParams};
use crate::numkit::{Rng, C64};

/// Smallest evaluation budget accepted by [`refine`].
pub const MIN_BUDGET: usize = 50;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    /// Initial simplex edge as a fraction of each box width.
    pub initial_step: f64,
    /// Extra runs started from jittered copies of the best point.
    pub restarts: usize,
    /// Jitter of restart points as a fraction of each box width.
    pub jitter: f64,
    /// Stop a run once the simplex values spread less than this.
    pub value_tolerance: f64,
    pub rng_seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { initial_step: 0.05, restarts: 3, jitter: 0.01, value_tolerance: 1e-14, rng_seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    pub point: Vec<f64>,
    pub value: f64,
    pub seed_value: f64,
    pub evaluations: usize,
    /// Best value seen after each evaluation.
    pub history: Vec<f64>,
}

struct Counter<'a> {
    f: &'a dyn Fn(&[f64]) -> Result<f64>,
    lower: &'a [f64],
    width: Vec<f64>,
    budget: usize,
    history: Vec<f64>,
    best: (Vec<f64>, f64),
}

impl Counter<'_> {
    fn to_point(&self, s: &[f64]) -> Vec<f64> {
        s.iter().zip(self.lower).zip(&self.width).map(|((s, lo), w)| lo + s.clamp(0.0, 1.0) * w).collect()
    }

    fn exhausted(&self) -> bool {
        self.history.len() >= self.budget
    }

    /// Objective at scaled coordinates; failures and non-finite values count as 1.
    fn eval(&mut self, s: &[f64]) -> f64 {
        let x = self.to_point(s);
        let v = match (self.f)(&x) {
            Ok(v) if v.is_finite() => v,
            _ => 1.0,
        };
        if v < self.best.1 {
            self.best = (x, v);
        }
        self.history.push(self.best.1);
        v
    }
}

/// One Nelder–Mead run in the unit box starting at `start`.
fn nelder_mead(c: &mut Counter, start: &[f64], step: f64, tol: f64, budget: usize) {
    let n = start.len();
    let stop = c.history.len() + budget;
    let mut simplex: Vec<Vec<f64>> = vec![start.to_vec()];
    for i in 0..n {
        let mut v = start.to_vec();
        v[i] = if v[i] + step <= 1.0 { v[i] + step } else { v[i] - step };
        simplex.push(v);
    }
    let mut values: Vec<f64> = Vec::with_capacity(n + 1);
    for v in &simplex {
        if c.history.len() >= stop || c.exhausted() {
            return;
        }
        values.push(c.eval(v));
    }
    let clamp = |v: Vec<f64>| v.into_iter().map(|x| x.clamp(0.0, 1.0)).collect::<Vec<_>>();
    while c.history.len() < stop && !c.exhausted() {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();
        if values[n] - values[0] <= tol {
            break;
        }
        let centroid: Vec<f64> = (0..n).map(|j| simplex[..n].iter().map(|v| v[j]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| clamp(centroid.iter().zip(&simplex[n]).map(|(c, w)| c + t * (c - w)).collect());
        let xr = along(1.0);
        let fr = c.eval(&xr);
        if fr < values[0] {
            if c.exhausted() {
                simplex[n] = xr;
                values[n] = fr;
                break;
            }
            let xe = along(2.0);
            let fe = c.eval(&xe);
            (simplex[n], values[n]) = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
            continue;
        }
        if c.exhausted() {
            break;
        }
        let (xc, fc) = if fr < values[n] {
            let x = along(0.5);
            let f = c.eval(&x);
            (x, f)
        } else {
            let x = along(-0.5);
            let f = c.eval(&x);
            (x, f)
        };
        if fc < values[n].min(fr) {
            simplex[n] = xc;
            values[n] = fc;
            continue;
        }
        for i in 1..=n {
            if c.exhausted() {
                return;
            }
            simplex[i] = simplex[0].iter().zip(&simplex[i]).map(|(b, v)| b + 0.5 * (v - b)).collect();
            values[i] = c.eval(&simplex[i]);
        }
    }
}

/// Minimizes `f` over the box `[lower, upper]` starting at `seed`.
///
/// The budget is split evenly between the run from the seed and the restarts.
/// The result is never worse than the seed and is a pure function of the inputs.
pub fn minimize(
    f: &dyn Fn(&[f64]) -> Result<f64>,
    seed: &[f64],
    lower: &[f64],
    upper: &[f64],
    budget: usize,
    opts: &SearchOptions,
) -> Result<SearchResult> {
    let n = seed.len();
    if n == 0 || lower.len() != n || upper.len() != n {
        return Err(Error::Dimension("seed and bounds must have the same nonzero length".into()));
    }
    // Negated comparisons also reject NaN.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    for i in 0..n {
        if !(lower[i] <= seed[i] && seed[i] <= upper[i]) || !(lower[i] < upper[i]) {
            return Err(Error::InvalidParameter(format!(
                "parameter {i}: bounds [{}, {}] must be non-degenerate and contain the seed {}",
                lower[i], upper[i], seed[i]
            )));
        }
    }
    let width: Vec<f64> = lower.iter().zip(upper).map(|(l, u)| u - l).collect();
    let mut c = Counter { f, lower, width, budget, history: Vec::with_capacity(budget), best: (seed.to_vec(), f64::INFINITY) };
    let start: Vec<f64> = (0..n).map(|i| (seed[i] - lower[i]) / (upper[i] - lower[i])).collect();
    let seed_value = c.eval(&start);
    // The seed itself is the reference point, even if clamping moved it by rounding.
    c.best = (seed.to_vec(), seed_value);
    let runs = opts.restarts + 1;
    let per_run = (budget.saturating_sub(1) / runs).max(n + 2);
    nelder_mead(&mut c, &start, opts.initial_step, opts.value_tolerance, per_run);
    let mut rng = Rng::new(opts.rng_seed, 0);
    for _ in 0..opts.restarts {
        if c.exhausted() {
            break;
        }
        let best = c.best.0.clone();
        let from: Vec<f64> = (0..n)
            .map(|i| ((best[i] - lower[i]) / (upper[i] - lower[i]) + opts.jitter * (2.0 * rng.uniform() - 1.0)).clamp(0.0, 1.0))
            .collect();
        nelder_mead(&mut c, &from, opts.initial_step, opts.value_tolerance, per_run);
    }
    let (point, value) = c.best;
    Ok(SearchResult { point, value, seed_value, evaluations: c.history.len(), history: c.history })
}

/// Pulse parameters that refinement may move.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FreeParam {
    Duration,
    Omega0,
    Omega1,
    Delta,
    DeltaPrime,
}

impl FreeParam {
    pub const ALL: [FreeParam; 5] =
        [FreeParam::Duration, FreeParam::Omega0, FreeParam::Omega1, FreeParam::Delta, FreeParam::DeltaPrime];

    fn get(self, seg: &PulseSegment) -> Result<f64> {
        match (self, seg) {
            (FreeParam::Duration, s) => Ok(s.duration()),
            (FreeParam::Omega0, PulseSegment::RydbergPair(p)) => Ok(p.omega0.norm()),
            (FreeParam::Omega1, PulseSegment::RydbergPair(p)) => Ok(p.omega1.norm()),
            (FreeParam::Delta, PulseSegment::RydbergPair(p)) => Ok(p.delta),
            (FreeParam::DeltaPrime, PulseSegment::RydbergPair(p)) => Ok(p.delta_prime),
            _ => Err(Error::InvalidParameter(format!("{self:?} needs a Rydberg-pair segment"))),
        }
    }

    fn set(self, seg: &mut PulseSegment, v: f64) {
        match (self, seg) {
            (FreeParam::Duration, s) => s.set_duration(v),
            (FreeParam::Omega0, PulseSegment::RydbergPair(p)) => p.omega0 = C64::from_polar(v, p.omega0.arg()),
            (FreeParam::Omega1, PulseSegment::RydbergPair(p)) => p.omega1 = C64::from_polar(v, p.omega1.arg()),
            (FreeParam::Delta, PulseSegment::RydbergPair(p)) => p.delta = v,
            (FreeParam::DeltaPrime, PulseSegment::RydbergPair(p)) => p.delta_prime = v,
            _ => {}
        }
    }
}

/// Ideal-case refinement of one segment of a recipe.
#[derive(Clone, Debug, PartialEq)]
pub struct OptProblem {
    pub recipe: GateRecipe,
    /// Index of the segment whose parameters move.
    pub segment: usize,
    pub free: Vec<FreeParam>,
    pub seed: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub options: SearchOptions,
}

/// Default half-width of the search box relative to the seed.
pub const DEFAULT_BOUND_FRACTION: f64 = 0.1;

impl OptProblem {
    /// Box of `±fraction` around the current values of `free` on `segment`.
    pub fn new(recipe: GateRecipe, segment: usize, free: Vec<FreeParam>, fraction: f64) -> Result<Self> {
        let seg = recipe
            .schedule
            .segments
            .get(segment)
            .ok_or_else(|| Error::InvalidParameter(format!("recipe {} has no segment {segment}", recipe.name)))?;
        let seed = free.iter().map(|p| p.get(seg)).collect::<Result<Vec<_>>>()?;
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(Error::InvalidParameter(format!("bound fraction {fraction} must lie in (0, 1)")));
        }
        let lower = seed.iter().map(|&x| x - fraction * x.abs()).collect();
        let upper = seed.iter().map(|&x| x + fraction * x.abs()).collect();
        Ok(Self { recipe, segment, free, seed, lower, upper, options: SearchOptions::default() })
    }

    /// All five parameters of the recipe's single Rydberg-pair segment, `±10%`.
    pub fn around(recipe: GateRecipe) -> Result<Self> {
        let pairs: Vec<usize> = recipe
            .schedule
            .segments
            .iter()
            .enumerate()
            .filter(|(_, s)| matches!(s, PulseSegment::RydbergPair(_)))
            .map(|(i, _)| i)
            .collect();
        let [segment] = pairs[..] else {
            return Err(Error::InvalidParameter(format!(
                "recipe {} has {} Rydberg-pair segments, expected one",
                recipe.name,
                pairs.len()
            )));
        };
        Self::new(recipe, segment, FreeParam::ALL.to_vec(), DEFAULT_BOUND_FRACTION)
    }

    /// The recipe with the free parameters set to `x`.
    pub fn apply(&self, x: &[f64]) -> Result<GateRecipe> {
        let mut r = self.recipe.clone();
        for (p, &v) in self.free.iter().zip(x) {
            p.set(&mut r.schedule.segments[self.segment], v);
        }
        r.schedule.validate()?;
        Ok(r)
    }
}

/// `1 − F_min` of the noise-free, decay-free recipe against its target.
pub fn objective_infidelity(recipe: &GateRecipe) -> f64 {
    recipe.ideal_infidelity().map_or(1.0, |f| f.clamp(0.0, 1.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Refinement {
    pub recipe: GateRecipe,
    pub params: Vec<f64>,
    pub infidelity: f64,
    pub seed_infidelity: f64,
    pub evaluations: usize,
    pub history: Vec<f64>,
}

/// Refines the free parameters within the box; the result is never worse than the seed.
pub fn refine(problem: &OptProblem, budget: usize) -> Result<Refinement> {
    if budget < MIN_BUDGET {
        return Err(Error::InvalidParameter(format!("budget {budget} is below the minimum {MIN_BUDGET}")));
    }
    let f = |x: &[f64]| problem.apply(x).map(|r| objective_infidelity(&r));
    let res = minimize(&f, &problem.seed, &problem.lower, &problem.upper, budget, &problem.options)?;
    let mut recipe = problem.apply(&res.point)?;
    if res.point != problem.seed {
        recipe.provenance = Provenance::Refined;
    }
    Ok(Refinement {
        recipe,
        params: res.point,
        infidelity: res.value,
        seed_infidelity: res.seed_value,
        evaluations: res.evaluations,
        history: res.history,
    })
}

/// Settings of the phase-gate tuning pipeline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseGateTuning {
    /// Family members sampled around the seed.
    pub samples: usize,
    /// Best family members handed to local refinement.
    pub finalists: usize,
    /// Evaluation budget of each local refinement.
    pub budget: usize,
    pub rng_seed: u64,
}

impl Default for PhaseGateTuning {
    fn default() -> Self {
        Self { samples: 20_000, finalists: 12, budget: 2_000, rng_seed: 7 }
    }
}

/// Samples the aligned phase-gate family, refines the best members locally
/// and returns the best refined recipe.
pub fn tune_phase_gate(params: &ProtectedParams, tuning: &PhaseGateTuning) -> Result<Refinement> {
    let family = phase_gate_family(params, tuning.samples, tuning.rng_seed)?;
    let finalists: Vec<GateRecipe> = family.into_iter().take(tuning.finalists.max(1)).map(|(_, r)| r).collect();
    if finalists.is_empty() {
        return Err(Error::NoSolution { reason: "no aligned phase-gate family member".into(), best_residual: f64::NAN });
    }
    let results = finalists
        .into_par_iter()
        .map(|r| {
            let mut problem = OptProblem::around(r)?;
            problem.options.initial_step = FINE_STEP;
            refine(&problem, tuning.budget)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(results.into_iter().min_by(|a, b| a.infidelity.total_cmp(&b.infidelity)).expect("nonempty"))
}

/// Simplex edge used for long Rydberg pulses, whose infidelity oscillates on
/// the scale of the fast detuning periods.
pub const FINE_STEP: f64 = 0.002;

/// Refines the swap rotation of an H recipe.
pub fn tune_h(params: &ProtectedParams, budget: usize) -> Result<Refinement> {
    let mut problem = OptProblem::around(recipe_h(params)?)?;
    problem.options.initial_step = FINE_STEP;
    refine(&problem, budget)
}
