//! Noise averaging and the worst-case fidelity over input states.

use rayon::prelude::*;

use super::{Propagator, Schedule};
use crate::atoms::{Alphas, DecayConfig};
use crate::error::{Error, Result};
use crate::noise::{sample_path, OUConfig};
use crate::numkit::{kron, norm, random_state, superoperator, vectorize, outer, ComplexMatrix, Rng, C64, I, ONE, ZERO};

/// Register dimension up to which the full superoperator is kept.
pub const FULL_SUPEROPERATOR_MAX_DIM: usize = 16;

const NORM_TOL: f64 = 1e-10;

/// Result of averaging a schedule over noise trajectories.
#[derive(Clone, Debug)]
pub struct NoiseAverage {
    pub n_traj: usize,
    /// Logical-subspace block of each trajectory's propagator.
    pub blocks: Vec<ComplexMatrix>,
    /// Mean of `conj(A_j) ⊗ A_j` over the logical blocks.
    pub logical: ComplexMatrix,
    /// Mean of `conj(U_j) ⊗ U_j` on the whole register, for small registers.
    pub full: Option<ComplexMatrix>,
    /// Per-trajectory population lost to decay, averaged over logical inputs.
    pub trace_loss: Vec<f64>,
    /// Per-trajectory population left outside the logical subspace.
    pub leakage: Vec<f64>,
}

impl NoiseAverage {
    /// Average of explicit logical blocks, e.g. hand-built error channels.
    pub fn from_blocks(blocks: Vec<ComplexMatrix>) -> Result<Self> {
        let first = blocks.first().ok_or_else(|| Error::InvalidParameter("at least one trajectory is required".into()))?;
        let d = first.rows();
        if blocks.iter().any(|b| b.rows() != d || b.cols() != d) {
            return Err(Error::Dimension("logical blocks differ in shape".into()));
        }
        let n = blocks.len();
        Ok(Self {
            n_traj: n,
            logical: logical_superoperator(&blocks),
            full: None,
            trace_loss: vec![0.0; n],
            leakage: vec![0.0; n],
            blocks,
        })
    }

    /// Average of full-register propagators restricted to `logical_basis`.
    pub fn from_propagators(us: &[ComplexMatrix], logical_basis: &[usize]) -> Result<Self> {
        let blocks = us.iter().map(|u| u.select(logical_basis, logical_basis)).collect();
        let mut avg = Self::from_blocks(blocks)?;
        let dim = us[0].rows();
        if us.iter().any(|u| u.rows() != dim || u.cols() != dim) {
            return Err(Error::Dimension("propagators differ in shape".into()));
        }
        if dim <= FULL_SUPEROPERATOR_MAX_DIM {
            avg.full = Some(mean(us.iter().map(superoperator), dim * dim, us.len()));
        }
        for (j, u) in us.iter().enumerate() {
            let (loss, leak) = losses(u, logical_basis, |k| logical_basis[k]);
            avg.trace_loss[j] = loss;
            avg.leakage[j] = leak;
        }
        Ok(avg)
    }

    pub fn logical_dim(&self) -> usize {
        self.blocks[0].rows()
    }

    pub fn mean_trace_loss(&self) -> f64 {
        self.trace_loss.iter().sum::<f64>() / self.n_traj as f64
    }

    pub fn mean_leakage(&self) -> f64 {
        self.leakage.iter().sum::<f64>() / self.n_traj as f64
    }
}

fn mean(mats: impl Iterator<Item = ComplexMatrix>, dim: usize, n: usize) -> ComplexMatrix {
    let mut acc = ComplexMatrix::zeros(dim, dim);
    for m in mats {
        acc += &m;
    }
    acc.scale_real(1.0 / n as f64)
}

/// Mean of `conj(A_j) ⊗ A_j`.
pub fn logical_superoperator(blocks: &[ComplexMatrix]) -> ComplexMatrix {
    let d = blocks.first().map_or(0, ComplexMatrix::rows);
    mean(blocks.iter().map(superoperator), d * d, blocks.len().max(1))
}

/// Decay loss and leakage of the logical inputs, given columns indexed by logical input.
fn losses(cols: &ComplexMatrix, logical_basis: &[usize], col_of: impl Fn(usize) -> usize) -> (f64, f64) {
    let d = logical_basis.len();
    let (mut loss, mut leak) = (0.0, 0.0);
    for k in 0..d {
        let c = col_of(k);
        let total: f64 = (0..cols.rows()).map(|i| cols[(i, c)].norm_sqr()).sum();
        let inside: f64 = logical_basis.iter().map(|&i| cols[(i, c)].norm_sqr()).sum();
        loss += 1.0 - total;
        leak += total - inside;
    }
    (loss / d as f64, leak / d as f64)
}

struct Trajectory {
    block: ComplexMatrix,
    superop: Option<ComplexMatrix>,
    loss: f64,
    leakage: f64,
}

fn run_trajectory(prop: &Propagator, noise: &OUConfig, alphas: Alphas, j: usize, keep_full: bool) -> Result<Trajectory> {
    let schedule = prop.schedule();
    let mut cfg = noise.with_stream(noise.stream.wrapping_add(j as u64));
    cfg.steps = prop.samples_needed().saturating_sub(1);
    let path = sample_path(&cfg)?.with_alphas(alphas);
    let basis = &schedule.logical_basis;
    if keep_full {
        let u = prop.full(Some(&path))?;
        let (loss, leakage) = losses(&u, basis, |k| basis[k]);
        Ok(Trajectory { block: u.select(basis, basis), superop: Some(superoperator(&u)), loss, leakage })
    } else {
        let cols = prop.logical_columns(Some(&path))?;
        let (loss, leakage) = losses(&cols, basis, |k| k);
        Ok(Trajectory { block: prop.logical_block(&cols), superop: None, loss, leakage })
    }
}

/// Averages a compiled schedule over `n_traj` noise paths.
///
/// Trajectory `j` uses stream `noise.stream + j`, so two calls with the same
/// seed see the same random numbers regardless of the noise strength.
pub fn average_compiled(prop: &Propagator, noise: &OUConfig, alphas: Alphas, n_traj: usize) -> Result<NoiseAverage> {
    if n_traj == 0 {
        return Err(Error::InvalidParameter("n_traj must be at least 1".into()));
    }
    noise.validate()?;
    if (noise.dt - prop.dt()).abs() > 1e-9 * prop.dt() {
        return Err(Error::InvalidParameter(format!("noise step {} differs from engine step {}", noise.dt, prop.dt())));
    }
    let dim = prop.schedule().register.dim();
    let keep_full = dim <= FULL_SUPEROPERATOR_MAX_DIM;
    let trajs: Vec<Trajectory> = (0..n_traj)
        .into_par_iter()
        .map(|j| run_trajectory(prop, noise, alphas, j, keep_full))
        .collect::<Result<_>>()?;

    let full = keep_full.then(|| mean(trajs.iter().filter_map(|t| t.superop.clone()), dim * dim, n_traj));
    let blocks: Vec<ComplexMatrix> = trajs.iter().map(|t| t.block.clone()).collect();
    Ok(NoiseAverage {
        n_traj,
        logical: logical_superoperator(&blocks),
        full,
        trace_loss: trajs.iter().map(|t| t.loss).collect(),
        leakage: trajs.iter().map(|t| t.leakage).collect(),
        blocks,
    })
}

/// Compiles `schedule` at the noise step and averages it over `n_traj` paths.
pub fn average_superoperator(
    schedule: &Schedule,
    noise: &OUConfig,
    alphas: Alphas,
    decay: &DecayConfig,
    n_traj: usize,
) -> Result<NoiseAverage> {
    let prop = Propagator::new(schedule.clone(), alphas, *decay, noise.dt)?;
    average_compiled(&prop, noise, alphas, n_traj)
}

/// Logical coordinates of `psi`, which may be given in the logical basis or
/// embedded in a register of dimension `register_dim`.
fn logical_coords(psi: &[C64], d: usize, logical_basis: Option<&[usize]>) -> Result<Vec<C64>> {
    let nrm = norm(psi);
    if (nrm - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized { norm: nrm });
    }
    if psi.len() == d {
        return Ok(psi.to_vec());
    }
    let basis = logical_basis.ok_or_else(|| {
        Error::Dimension(format!("state of length {} for a {d}-dimensional logical space", psi.len()))
    })?;
    let coords: Vec<C64> = basis.iter().map(|&i| psi.get(i).copied().unwrap_or(ZERO)).collect();
    if (norm(&coords) - 1.0).abs() > NORM_TOL {
        return Err(Error::InvalidParameter("state has weight outside the logical subspace".into()));
    }
    Ok(coords)
}

fn check_ideal(avg: &NoiseAverage, ideal: &ComplexMatrix) -> Result<()> {
    let d = avg.logical_dim();
    if ideal.rows() != d || ideal.cols() != d {
        return Err(Error::Dimension(format!("ideal is {}x{}, logical space is {d}", ideal.rows(), ideal.cols())));
    }
    Ok(())
}

/// `F(ψ) = Re vec(ρ_ideal)† M_av vec(ρ)` with `ρ = |ψ⟩⟨ψ|` and `ρ_ideal = U ρ U†`.
///
/// `psi` is given in logical coordinates.
pub fn fidelity(avg: &NoiseAverage, ideal: &ComplexMatrix, psi: &[C64]) -> Result<f64> {
    check_ideal(avg, ideal)?;
    let psi = logical_coords(psi, avg.logical_dim(), None)?;
    let rho = vectorize(&outer(&psi))?;
    let target = vectorize(&outer(&ideal.mat_vec(&psi)))?;
    let out = avg.logical.matmul(&rho);
    let f: C64 = target.as_slice().iter().zip(out.as_slice()).map(|(a, b)| a.conj() * b).sum();
    Ok(f.re)
}

/// Same as [`fidelity`] for a state embedded in the register.
pub fn fidelity_embedded(avg: &NoiseAverage, schedule: &Schedule, psi: &[C64]) -> Result<f64> {
    let coords = logical_coords(psi, avg.logical_dim(), Some(&schedule.logical_basis))?;
    fidelity(avg, &schedule.ideal_target, &coords)
}

/// `|⟨U ψ| A_j |ψ⟩|²` for each trajectory.
pub fn fidelity_per_trajectory(avg: &NoiseAverage, ideal: &ComplexMatrix, psi: &[C64]) -> Result<Vec<f64>> {
    check_ideal(avg, ideal)?;
    let psi = logical_coords(psi, avg.logical_dim(), None)?;
    let phi = ideal.mat_vec(&psi);
    Ok(avg
        .blocks
        .iter()
        .map(|a| {
            let out = a.mat_vec(&psi);
            phi.iter().zip(&out).map(|(x, y)| x.conj() * y).sum::<C64>().norm_sqr()
        })
        .collect())
}

/// Finite set of normalized logical input states.
#[derive(Clone, Debug, PartialEq)]
pub struct StateSet {
    states: Vec<Vec<C64>>,
}

const FIBONACCI_POINTS: usize = 32;
const HAAR_STATES: usize = 64;

impl StateSet {
    pub fn new(states: Vec<Vec<C64>>) -> Result<Self> {
        let d = states.first().map(Vec::len).ok_or_else(|| Error::InvalidParameter("empty state set".into()))?;
        for s in &states {
            if s.len() != d {
                return Err(Error::Dimension("states differ in length".into()));
            }
            let n = norm(s);
            if (n - 1.0).abs() > NORM_TOL {
                return Err(Error::NotNormalized { norm: n });
            }
        }
        Ok(Self { states })
    }

    /// Six cardinal states followed by a Fibonacci grid on the Bloch sphere.
    pub fn single_qubit() -> Self {
        let mut states = cardinal_states();
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        for k in 0..FIBONACCI_POINTS {
            let z = 1.0 - (2 * k + 1) as f64 / FIBONACCI_POINTS as f64;
            let theta = z.acos();
            let phi = golden * k as f64;
            states.push(vec![C64::new((theta / 2.0).cos(), 0.0), C64::from_polar((theta / 2.0).sin(), phi)]);
        }
        Self { states }
    }

    /// Products of cardinal states, the four Bell states and seeded random states.
    pub fn two_qubit(seed: u64) -> Self {
        let card = cardinal_states();
        let mut states = Vec::new();
        for a in &card {
            for b in &card {
                states.push(
                    kron(&ComplexMatrix::column_vector(a), &ComplexMatrix::column_vector(b)).into_vec(),
                );
            }
        }
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let r = C64::new(s, 0.0);
        states.push(vec![r, ZERO, ZERO, r]);
        states.push(vec![r, ZERO, ZERO, -r]);
        states.push(vec![ZERO, r, r, ZERO]);
        states.push(vec![ZERO, r, -r, ZERO]);
        let mut rng = Rng::new(seed, 0);
        for _ in 0..HAAR_STATES {
            states.push(random_state(4, &mut rng));
        }
        Self { states }
    }

    /// Default set for a logical space of dimension `d`.
    pub fn default_for(d: usize, seed: u64) -> Result<Self> {
        match d {
            2 => Ok(Self::single_qubit()),
            4 => Ok(Self::two_qubit(seed)),
            _ => Err(Error::Dimension(format!("no default state set for logical dimension {d}"))),
        }
    }

    pub fn states(&self) -> &[Vec<C64>] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

fn cardinal_states() -> Vec<Vec<C64>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let r = C64::new(s, 0.0);
    let ir = I * s;
    vec![
        vec![ONE, ZERO],
        vec![ZERO, ONE],
        vec![r, r],
        vec![r, -r],
        vec![r, ir],
        vec![r, -ir],
    ]
}

/// Worst case over a state set.
#[derive(Clone, Debug, PartialEq)]
pub struct MinFidelity {
    pub f_min: f64,
    pub argmin: usize,
    pub state: Vec<C64>,
    /// Standard error of the trajectory mean at the minimizing state.
    pub stderr: f64,
}

pub fn min_fidelity(avg: &NoiseAverage, ideal: &ComplexMatrix, states: &StateSet) -> Result<MinFidelity> {
    let mut best: Option<(usize, f64)> = None;
    for (k, s) in states.states.iter().enumerate() {
        let f = fidelity(avg, ideal, s)?;
        if best.is_none_or(|(_, b)| f < b) {
            best = Some((k, f));
        }
    }
    let (argmin, f_min) = best.ok_or_else(|| Error::InvalidParameter("empty state set".into()))?;
    let state = states.states[argmin].clone();
    let per = fidelity_per_trajectory(avg, ideal, &state)?;
    let n = per.len() as f64;
    let stderr = if per.len() > 1 {
        let m = per.iter().sum::<f64>() / n;
        (per.iter().map(|f| (f - m).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
    } else {
        0.0
    };
    Ok(MinFidelity { f_min, argmin, state, stderr })
}
