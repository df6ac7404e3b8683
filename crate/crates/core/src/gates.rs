//! Protected gate recipes on DFS-encoded pairs and the unprotected baseline.
//!
//! A logical qubit lives on a pair of atoms as `|0_L⟩ = |01⟩`, `|1_L⟩ = |10⟩`.
//! Two logical qubits use atoms `(0, 1)` and `(2, 3)`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::atoms::{DriveMask, Level, LevelSet, RamanPulse, Register, RydbergPulse};
use crate::effective::{
    dressed_energies, phase_gate_candidates, ranges_near, solve_dephaser,
    PhaseGateSolution,
};
use crate::engine::{logical_indices, min_fidelity, NoiseAverage, Propagator, PulseSegment, Schedule, StateSet};
use crate::error::{Error, Result};
use crate::numkit::{norm, ComplexMatrix, Rng, C64, I, ONE, ZERO};
use crate::units::two_pi_mhz;
use crate::atoms::{Alphas, DecayConfig};

const NORM_TOL: f64 = 1e-10;
/// Step for noise-free propagation; only modulated segments are stepped.
const IDEAL_STEP: f64 = 1e-8;

/// Logical basis of `pairs` DFS-encoded qubits over `2·pairs` atoms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicalMap {
    pub pairs: Vec<(usize, usize)>,
}

impl LogicalMap {
    /// Pairs `(0, 1), (2, 3), …`.
    pub fn consecutive(n_logical: usize) -> Self {
        Self { pairs: (0..n_logical).map(|k| (2 * k, 2 * k + 1)).collect() }
    }

    pub fn n_logical(&self) -> usize {
        self.pairs.len()
    }

    pub fn n_atoms(&self) -> usize {
        self.pairs.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0)
    }

    /// Level assignment of every logical basis state, first logical qubit most significant.
    pub fn basis_levels(&self) -> Vec<Vec<Level>> {
        let n = self.n_logical();
        (0..1usize << n)
            .map(|bits| {
                let mut levels = vec![Level::Zero; self.n_atoms()];
                for (q, &(a, b)) in self.pairs.iter().enumerate() {
                    let one = (bits >> (n - 1 - q)) & 1 == 1;
                    let (la, lb) = if one { (Level::One, Level::Zero) } else { (Level::Zero, Level::One) };
                    levels[a] = la;
                    levels[b] = lb;
                }
                levels
            })
            .collect()
    }

    pub fn indices(&self, reg: &Register) -> Result<Vec<usize>> {
        logical_indices(reg, &self.basis_levels())
    }

    /// Register state for logical coordinates `psi`.
    pub fn embed(&self, reg: &Register, psi: &[C64]) -> Result<Vec<C64>> {
        let idx = self.indices(reg)?;
        if psi.len() != idx.len() {
            return Err(Error::Dimension(format!("{} amplitudes for {} logical states", psi.len(), idx.len())));
        }
        let mut v = vec![ZERO; reg.dim()];
        for (&i, &c) in idx.iter().zip(psi) {
            v[i] = c;
        }
        Ok(v)
    }
}

/// Two-atom CNOT, control atom 0, on the `{0,1}⊗{0,1}` basis.
pub fn cnot() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[
        [ONE, ZERO, ZERO, ZERO],
        [ZERO, ONE, ZERO, ZERO],
        [ZERO, ZERO, ZERO, ONE],
        [ZERO, ZERO, ONE, ZERO],
    ])
}

/// `c₀|01⟩ + c₁|10⟩` on two qubit atoms, i.e. CNOT applied to `(c₀|0⟩ + c₁|1⟩)|1⟩`.
pub fn encode_dfs(c0: C64, c1: C64) -> Result<Vec<C64>> {
    let n = norm(&[c0, c1]);
    if (n - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized { norm: n });
    }
    Ok(cnot().mat_vec(&[ZERO, c0, ZERO, c1]))
}

/// Inverse of [`encode_dfs`]: applies the CNOT again, giving `|ψ⟩|1⟩`.
pub fn decode_dfs(state: &[C64]) -> Result<Vec<C64>> {
    if state.len() != 4 {
        return Err(Error::Dimension(format!("two-atom state has 4 amplitudes, got {}", state.len())));
    }
    Ok(cnot().mat_vec(state))
}

pub fn hadamard() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[[ONE, ONE], [ONE, -ONE]]).scale_real(FRAC_1_SQRT_2)
}

/// `diag(1, e^{iφ})`.
pub fn phase_gate(phi: f64) -> ComplexMatrix {
    ComplexMatrix::from_diag(&[ONE, C64::from_polar(1.0, phi)])
}

/// `[[cos θ, i sin θ], [i sin θ, cos θ]]`.
pub fn swap_rotation(theta: f64) -> ComplexMatrix {
    let (c, s) = (C64::new(theta.cos(), 0.0), I * theta.sin());
    ComplexMatrix::from_rows(&[[c, s], [s, c]])
}

pub fn controlled_z() -> ComplexMatrix {
    ComplexMatrix::from_real_diag(&[1.0, 1.0, 1.0, -1.0])
}

/// CNOT with the first logical qubit as control.
pub fn logical_cnot() -> ComplexMatrix {
    cnot()
}

/// `|tr(A†B)|/d`, which is 1 exactly when `B = e^{iα}A` for unitary `A`.
pub fn phase_insensitive_overlap(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.adjoint().matmul(b).trace().norm() / a.rows() as f64
}

/// Where a recipe's parameters came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Caption,
    Solved,
    Refined,
    File,
}

impl Provenance {
    pub fn label(self) -> &'static str {
        match self {
            Provenance::Caption => "caption",
            Provenance::Solved => "solved",
            Provenance::Refined => "refined",
            Provenance::File => "file",
        }
    }
}

/// A named gate: a schedule, its ideal logical action and where its parameters came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateRecipe {
    pub name: String,
    pub schedule: Schedule,
    pub provenance: Provenance,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl GateRecipe {
    pub fn ideal_target(&self) -> &ComplexMatrix {
        &self.schedule.ideal_target
    }

    pub fn duration(&self) -> f64 {
        self.schedule.duration()
    }

    pub fn logical_dim(&self) -> usize {
        self.schedule.logical_dim()
    }

    /// Input states the recipe is scored on.
    pub fn state_set(&self) -> Result<StateSet> {
        StateSet::default_for(self.logical_dim(), 0)
    }

    /// Register columns of the logical inputs after noise-free, decay-free propagation.
    pub fn ideal_columns(&self) -> Result<ComplexMatrix> {
        Propagator::new(self.schedule.clone(), Alphas::default(), DecayConfig::none(), IDEAL_STEP)?.logical_columns(None)
    }

    /// Logical block of the noise-free propagator.
    pub fn ideal_logical_action(&self) -> Result<ComplexMatrix> {
        let cols = self.ideal_columns()?;
        let idx = &self.schedule.logical_basis;
        Ok(ComplexMatrix::from_fn(idx.len(), idx.len(), |i, j| cols[(idx[i], j)]))
    }

    /// Largest population left outside the logical subspace at the end of the
    /// noise-free schedule, over logical basis inputs.
    pub fn ideal_leakage(&self) -> Result<f64> {
        let cols = self.ideal_columns()?;
        let idx = &self.schedule.logical_basis;
        Ok((0..cols.cols())
            .map(|j| {
                let inside: f64 = idx.iter().map(|&i| cols[(i, j)].norm_sqr()).sum();
                let total: f64 = (0..cols.rows()).map(|i| cols[(i, j)].norm_sqr()).sum();
                total - inside
            })
            .fold(0.0, f64::max))
    }

    /// `1 − F_min` of the noise-free action over the recipe's state set.
    pub fn ideal_infidelity(&self) -> Result<f64> {
        let avg = NoiseAverage::from_blocks(vec![self.ideal_logical_action()?])?;
        Ok(1.0 - min_fidelity(&avg, self.ideal_target(), &self.state_set()?)?.f_min)
    }

    /// Largest distance of an eigenvalue of `target†·action` from the unit
    /// phase of their mean. Zero when the noise-free action equals the target
    /// up to a global phase.
    pub fn global_phase_deviation(&self) -> Result<f64> {
        let m = self.ideal_target().adjoint().matmul(&self.ideal_logical_action()?);
        let ev = crate::numkit::eigenvalues(&m)?;
        let mean = ev.iter().sum::<C64>() / ev.len() as f64;
        let phase = C64::from_polar(1.0, mean.arg());
        Ok(ev.iter().map(|l| (l - phase).norm()).fold(0.0, f64::max))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut r: GateRecipe = serde_json::from_str(text)?;
        r.schedule.validate()?;
        r.provenance = Provenance::File;
        Ok(r)
    }
}

/// Drive parameters of the protected gate set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtectedParams {
    /// Ω_d of the dephaser (rad/s).
    pub dephaser_rabi: f64,
    /// Smallest allowed `|Δ_d|/Ω_d`.
    pub dephaser_ratio_min: f64,
    /// Drive of the swap rotation; its duration is derived.
    pub rotation: RydbergPulse,
    /// Starting point of the phase-gate search.
    pub phase_seed: RydbergPulse,
    /// Half-width of the integer window searched around the seed.
    pub phase_search_span: i64,
    /// Candidates moving any parameter by more than this fraction are dropped.
    pub max_relative_move: f64,
}

/// Caption value of the swap-rotation time for θ = π/4.
pub const CAPTION_ROTATION_TIME: f64 = 120.20e-6;
/// Caption value of the phase-gate time.
pub const CAPTION_PHASE_GATE_TIME: f64 = 938.62e-6;

impl ProtectedParams {
    pub fn caption() -> Self {
        let pulse = |o0: f64, o1: f64, d: f64, dp: f64| RydbergPulse {
            atoms: (0, 1),
            omega0: C64::new(two_pi_mhz(o0), 0.0),
            omega1: C64::new(two_pi_mhz(o1), 0.0),
            delta: two_pi_mhz(d),
            delta_prime: two_pi_mhz(dp),
            delta_rr: two_pi_mhz(100.0),
            duration: 0.0,
            modulation: None,
            drive: DriveMask::Both,
        };
        let mut rotation = pulse(3.91, 1.97, 60.34, 30.70);
        rotation.duration = CAPTION_ROTATION_TIME;
        let mut phase_seed = pulse(3.93, 1.96, 60.48, 30.05);
        phase_seed.duration = CAPTION_PHASE_GATE_TIME;
        Self {
            dephaser_rabi: two_pi_mhz(5.0),
            dephaser_ratio_min: 9.95,
            rotation,
            phase_seed,
            phase_search_span: 3,
            max_relative_move: 0.1,
        }
    }
}

fn pair_register(first: LevelSet) -> Result<Register> {
    Register::new(vec![first, LevelSet::with_rydberg()], vec![(0, 1)])
}

fn single_logical(reg: Register, segments: Vec<PulseSegment>, target: ComplexMatrix) -> Result<Schedule> {
    let idx = LogicalMap::consecutive(1).indices(&reg)?;
    Schedule::new(reg, segments, target, idx)
}

fn perturbative_warning(p: &RydbergPulse) -> Option<String> {
    (!p.is_perturbative(RydbergPulse::PERTURBATIVE_RATIO)).then(|| {
        format!(
            "drive-to-detuning ratio {:.3} exceeds the perturbative threshold {}",
            p.perturbative_ratio(),
            RydbergPulse::PERTURBATIVE_RATIO
        )
    })
}

fn dephaser_segment(params: &ProtectedParams, phi: f64, atom: usize) -> Result<PulseSegment> {
    Ok(PulseSegment::Dephaser(solve_dephaser(phi, params.dephaser_rabi, params.dephaser_ratio_min, atom)?))
}

/// `T_L = P(π/4)`: one dephaser on the first atom of the pair.
pub fn recipe_t(params: &ProtectedParams) -> Result<GateRecipe> {
    let reg = Register::new(vec![LevelSet::with_rydberg(), LevelSet::qubit()], vec![(0, 1)])?;
    let schedule = single_logical(reg, vec![dephaser_segment(params, FRAC_PI_4, 0)?], phase_gate(FRAC_PI_4))?;
    Ok(GateRecipe { name: "T".into(), schedule, provenance: Provenance::Solved, warnings: vec![] })
}

/// Duration of the swap rotation by `|θ|` from the exact two-atom swap frequency.
pub fn exact_rotation_time(theta: f64, p: &RydbergPulse) -> Result<f64> {
    let w = dressed_energies(p)?.swap_frequency();
    if w == 0.0 {
        return Err(Error::Singular { factor: "swap frequency" });
    }
    Ok(2.0 * theta.abs() / w.abs())
}

/// `H_L = P(φ)·R(π/4)·P(φ)` with `φ ∈ {π/2, 3π/2}` chosen by simulating the rotation.
pub fn recipe_h(params: &ProtectedParams) -> Result<GateRecipe> {
    let mut rot = params.rotation.clone();
    rot.atoms = (0, 1);
    rot.duration = exact_rotation_time(FRAC_PI_4, &rot)?;
    let r = build_h(params, rot, Provenance::Solved)?;
    Ok(r)
}

/// H recipe around a given rotation pulse, with the dephaser phase selected automatically.
pub fn build_h(params: &ProtectedParams, rot: RydbergPulse, provenance: Provenance) -> Result<GateRecipe> {
    let reg = pair_register(LevelSet::with_rydberg())?;
    let rotation = PulseSegment::RydbergPair(rot.clone());
    let probe = single_logical(reg.clone(), vec![rotation.clone()], ComplexMatrix::identity(2))?;
    let probe = GateRecipe { name: "R".into(), schedule: probe, provenance, warnings: vec![] };
    let action = probe.ideal_logical_action()?;
    let h = hadamard();
    let phi = [FRAC_PI_2, 3.0 * FRAC_PI_2]
        .into_iter()
        .max_by(|&a, &b| {
            let score = |phi: f64| {
                let p = phase_gate(phi);
                phase_insensitive_overlap(&h, &p.matmul(&action).matmul(&p))
            };
            score(a).total_cmp(&score(b))
        })
        .expect("two candidates");
    let p = dephaser_segment(params, phi, 0)?;
    let schedule = single_logical(reg, vec![p.clone(), rotation, p], h)?;
    Ok(GateRecipe { name: "H".into(), schedule, provenance, warnings: perturbative_warning(&rot).into_iter().collect() })
}

/// Register for two logical qubits with Rydberg levels on the given atoms.
fn two_logical_register(rydberg: &[usize]) -> Result<Register> {
    let atoms = (0..4)
        .map(|a| if rydberg.contains(&a) { LevelSet::with_rydberg() } else { LevelSet::qubit() })
        .collect();
    Register::new(atoms, vec![(0, 1), (2, 3)])
}

fn two_logical(reg: Register, segments: Vec<PulseSegment>, target: ComplexMatrix) -> Result<Schedule> {
    let idx = LogicalMap::consecutive(2).indices(&reg)?;
    Schedule::new(reg, segments, target, idx)
}

/// Residuals of the phase conditions on the exact dressed energies, in turns:
/// no net swap, equal `|00⟩` and DFS phases, and a `π` offset on `|11⟩`.
fn dressed_phase_turns(p: &RydbergPulse) -> Result<[f64; 3]> {
    let e = dressed_energies(p)?;
    let t = p.duration / (2.0 * PI);
    Ok([(e.sym - e.anti) * t, (e.e00 - e.sym) * t, (e.e11 - e.sym) * t - 0.5])
}

fn with_aligned(seed: &RydbergPulse, u: [f64; 3]) -> RydbergPulse {
    let mut p = seed.clone();
    p.duration = seed.duration * u[0];
    p.delta = seed.delta * u[1];
    p.omega1 = seed.omega1 * u[2];
    p
}

/// Moves `(τ, Δ, |Ω₁|)` of an effective phase-gate solution so that the exact
/// two-atom dressed phases meet the phase-gate conditions.
pub fn align_dressed_phases(sol: &PhaseGateSolution) -> Result<RydbergPulse> {
    let seed = &sol.pulse;
    let start = dressed_phase_turns(seed)?;
    let target = start.map(f64::round);
    let resid = |u: [f64; 3]| -> Result<[f64; 3]> {
        let r = dressed_phase_turns(&with_aligned(seed, u))?;
        Ok([r[0] - target[0], r[1] - target[1], r[2] - target[2]])
    };
    let size = |r: &[f64; 3]| r.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut u = [1.0; 3];
    let mut r = resid(u)?;
    for _ in 0..50 {
        if size(&r) < 1e-11 {
            break;
        }
        let h = 1e-7;
        let mut jac = ComplexMatrix::zeros(3, 3);
        for j in 0..3 {
            let (mut up, mut um) = (u, u);
            up[j] += h;
            um[j] -= h;
            let (fp, fm) = (resid(up)?, resid(um)?);
            for i in 0..3 {
                jac[(i, j)] = C64::new((fp[i] - fm[i]) / (2.0 * h), 0.0);
            }
        }
        let rhs = ComplexMatrix::column_vector(&r.map(|x| C64::new(x, 0.0)));
        let step = crate::numkit::solve(&jac, &rhs)?;
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda > 1e-4 {
            let trial = [0, 1, 2].map(|i| u[i] - lambda * step[(i, 0)].re);
            if let Ok(rt) = resid(trial) {
                if size(&rt) < size(&r) {
                    u = trial;
                    r = rt;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if size(&r) > 1e-8 {
        return Err(Error::NoSolution { reason: "dressed-phase alignment did not converge".into(), best_residual: size(&r) });
    }
    Ok(with_aligned(seed, u))
}

fn uphase_from_pulse(mut pulse: RydbergPulse, provenance: Provenance) -> Result<GateRecipe> {
    pulse.atoms = (0, 2);
    let reg = two_logical_register(&[0, 2])?;
    let warnings = perturbative_warning(&pulse).into_iter().collect();
    let schedule = two_logical(reg, vec![PulseSegment::RydbergPair(pulse)], controlled_z())?;
    Ok(GateRecipe { name: "U_phase".into(), schedule, provenance, warnings })
}

/// Phase gate on atoms 0 and 2, the first atoms of the two logical pairs.
///
/// Every effective solution within the search window and the allowed move is
/// aligned on the exact dressed phases; the one with the lowest ideal
/// infidelity wins.
pub fn recipe_uphase(params: &ProtectedParams) -> Result<GateRecipe> {
    let seed = &params.phase_seed;
    let (kr, lr) = ranges_near(seed, params.phase_search_span)?;
    let candidates = phase_gate_candidates(seed.delta_rr, seed, kr, lr)?;
    let mut best: Option<(f64, GateRecipe)> = None;
    let mut last_err = None;
    for sol in candidates.iter().filter(|s| s.relative_move(seed) <= params.max_relative_move) {
        let pulse = match align_dressed_phases(sol) {
            Ok(p) => p,
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        let recipe = uphase_from_pulse(pulse, Provenance::Solved)?;
        let f = recipe.ideal_infidelity()?;
        if best.as_ref().is_none_or(|(b, _)| f < *b) {
            best = Some((f, recipe));
        }
    }
    match best {
        Some((_, r)) => Ok(r),
        None => Err(last_err.unwrap_or(Error::NoSolution {
            reason: "no phase-gate solution within the allowed parameter move".into(),
            best_residual: f64::NAN,
        })),
    }
}

/// Aligned members of the phase-gate solution family around the seed, best first.
///
/// Each sample scales `|Ω₀|` and `Δ′` of the nearest effective solution by
/// independent uniform factors within `±max_relative_move`, then re-aligns
/// `(τ, Δ, |Ω₁|)` on the dressed phases. Samples that fail to align or that
/// end up further than `max_relative_move` from the seed are dropped.
pub fn phase_gate_family(params: &ProtectedParams, samples: usize, rng_seed: u64) -> Result<Vec<(f64, GateRecipe)>> {
    let seed = &params.phase_seed;
    let (kr, lr) = ranges_near(seed, params.phase_search_span)?;
    let base = phase_gate_candidates(seed.delta_rr, seed, kr, lr)?.swap_remove(0);
    let m = params.max_relative_move;
    let mut rng = Rng::new(rng_seed, 0);
    let factors: Vec<(f64, f64)> =
        (0..samples).map(|_| (1.0 + m * (2.0 * rng.uniform() - 1.0), 1.0 + m * (2.0 * rng.uniform() - 1.0))).collect();
    let mut found: Vec<(f64, GateRecipe)> = factors
        .par_iter()
        .filter_map(|&(a, b)| {
            let mut sol = base.clone();
            sol.pulse.omega0 *= a;
            sol.pulse.delta_prime *= b;
            let pulse = align_dressed_phases(&sol).ok()?;
            if relative_move(&pulse, seed) > m {
                return None;
            }
            let recipe = uphase_from_pulse(pulse, Provenance::Solved).ok()?;
            Some((recipe.ideal_infidelity().ok()?, recipe))
        })
        .collect();
    found.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(found)
}

/// Largest relative change of duration, drive amplitudes and detunings.
fn relative_move(p: &RydbergPulse, seed: &RydbergPulse) -> f64 {
    let pairs = [
        (p.duration, seed.duration),
        (p.omega0.norm(), seed.omega0.norm()),
        (p.omega1.norm(), seed.omega1.norm()),
        (p.delta, seed.delta),
        (p.delta_prime, seed.delta_prime),
    ];
    pairs.iter().map(|(a, b)| (a / b - 1.0).abs()).fold(0.0, f64::max)
}

/// Phase gate from the unsolved seed pulse at its own duration.
pub fn recipe_uphase_caption(params: &ProtectedParams) -> Result<GateRecipe> {
    uphase_from_pulse(params.phase_seed.clone(), Provenance::Caption)
}

/// H recipe using the caption rotation time.
pub fn recipe_h_caption(params: &ProtectedParams) -> Result<GateRecipe> {
    let mut rot = params.rotation.clone();
    rot.atoms = (0, 1);
    build_h(params, rot, Provenance::Caption)
}

/// Phase-gate pulse of a recipe built by [`recipe_uphase`].
pub fn uphase_pulse(recipe: &GateRecipe) -> Result<&RydbergPulse> {
    match recipe.schedule.segments.as_slice() {
        [PulseSegment::RydbergPair(p)] => Ok(p),
        _ => Err(Error::InvalidParameter(format!("{} is not a single-pulse phase gate", recipe.name))),
    }
}

fn combined(a: Provenance, b: Provenance) -> Provenance {
    if a == b {
        a
    } else {
        a.min(b).max(Provenance::Solved)
    }
}

/// `CNOT_L = (I⊗H_L)·U_phase·(I⊗H_L)` with the H recipe moved to atoms (2, 3).
pub fn recipe_cnot(h: &GateRecipe, uphase: &GateRecipe) -> Result<GateRecipe> {
    if h.logical_dim() != 2 || uphase.logical_dim() != 4 {
        return Err(Error::Dimension("CNOT needs a one-qubit H and a two-qubit phase gate".into()));
    }
    let reg = two_logical_register(&[0, 2, 3])?;
    let h_segs = h.schedule.segments.iter().map(|s| s.remapped(&[2, 3])).collect::<Result<Vec<_>>>()?;
    let mut segments = h_segs.clone();
    segments.extend(uphase.schedule.segments.iter().cloned());
    segments.extend(h_segs);
    let schedule = two_logical(reg, segments, logical_cnot())?;
    let mut warnings = h.warnings.clone();
    warnings.extend(uphase.warnings.iter().cloned());
    warnings.dedup();
    Ok(GateRecipe { name: "CNOT".into(), schedule, provenance: combined(h.provenance, uphase.provenance), warnings })
}

/// The four protected recipes at the given parameters.
pub fn protected_set(params: &ProtectedParams) -> Result<Vec<GateRecipe>> {
    let t = recipe_t(params)?;
    let h = recipe_h(params)?;
    let u = recipe_uphase(params)?;
    let c = recipe_cnot(&h, &u)?;
    Ok(vec![t, h, u, c])
}

/// Baseline gates built from resonant single-atom pulses and the blockade CZ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnprotectedKind {
    H,
    Cnot,
    Cz,
}

/// Raman detuning in units of the rotation rate. Of the form `2(2m−1)`, so
/// that π and π/2 rotations both last whole periods of the bright-excited
/// oscillation and leave no excited population behind.
pub const RAMAN_DETUNING_RATIO: f64 = 998.0;

fn raman(atom: usize, omega: f64, angle: f64, phase: f64) -> PulseSegment {
    let detuning = RAMAN_DETUNING_RATIO * omega;
    PulseSegment::Raman(RamanPulse {
        atom,
        rabi_leg: RamanPulse::leg_for(omega, detuning),
        phase,
        detuning,
        duration: angle / omega,
    })
}

/// Single-atom Hadamard `Rx(π)·Ry(π/2)` (the `Ry` pulse first).
fn hadamard_segments(atom: usize, omega: f64) -> Vec<PulseSegment> {
    vec![raman(atom, omega, FRAC_PI_2, -FRAC_PI_2), raman(atom, omega, PI, 0.0)]
}

fn resonant(atoms: (usize, usize), drive: DriveMask, omega: f64, delta_rr: f64, angle: f64) -> PulseSegment {
    PulseSegment::RydbergPair(RydbergPulse {
        atoms,
        omega0: C64::new(omega, 0.0),
        omega1: ZERO,
        delta: 0.0,
        delta_prime: 0.0,
        delta_rr,
        duration: angle / omega,
        modulation: None,
        drive,
    })
}

/// Blockade CZ on `|0⟩ ↔ |r⟩`: π on the control, 2π on the target, π on the control.
fn cz_segments(control: usize, target: usize, omega: f64, delta_rr: f64) -> Vec<PulseSegment> {
    vec![
        resonant((control, target), DriveMask::First, omega, delta_rr, PI),
        resonant((control, target), DriveMask::Second, omega, delta_rr, 2.0 * PI),
        resonant((control, target), DriveMask::First, omega, delta_rr, PI),
    ]
}

/// Physical CNOT from `control` to `target`: `(I⊗H)·CZ·(I⊗H)`.
pub fn physical_cnot_segments(control: usize, target: usize, omega: f64, delta_rr: f64) -> Vec<PulseSegment> {
    let mut s = hadamard_segments(target, omega);
    s.extend(cz_segments(control, target, omega, delta_rr));
    s.extend(hadamard_segments(target, omega));
    s
}

/// Unprotected baseline at drive `omega` and blockade `delta_rr`.
///
/// `H` and `Cnot` act on DFS-encoded pairs through physical CNOTs:
/// `H_L = CNOT₀₁(H⊗I)CNOT₀₁` and `CNOT_L = CNOT₀₂·CNOT₀₃`. `Cz` acts on two
/// bare atoms with the computational basis as logical basis.
pub fn recipe_unprotected(kind: UnprotectedKind, omega: f64, delta_rr: f64) -> Result<GateRecipe> {
    if !(omega > 0.0 && delta_rr > 0.0) {
        return Err(Error::InvalidParameter("drive and blockade must be positive".into()));
    }
    let mut warnings = Vec::new();
    if omega >= delta_rr / 10.0 {
        warnings.push(format!("blockade regime violated: Ω = {omega:e} rad/s ≥ Δ_rr/10 = {:e} rad/s", delta_rr / 10.0));
    }
    let (name, schedule) = match kind {
        UnprotectedKind::Cz => {
            let reg = Register::new(vec![LevelSet::with_rydberg(); 2], vec![])?;
            let basis = [[Level::Zero, Level::Zero], [Level::Zero, Level::One], [Level::One, Level::Zero], [Level::One, Level::One]];
            let idx = logical_indices(&reg, &basis.map(|b| b.to_vec()))?;
            ("CZ", Schedule::new(reg, cz_segments(0, 1, omega, delta_rr), controlled_z(), idx)?)
        }
        UnprotectedKind::H => {
            let reg = Register::new(vec![LevelSet::with_rydberg(); 2], vec![(0, 1)])?;
            let mut segs = physical_cnot_segments(0, 1, omega, delta_rr);
            segs.extend(hadamard_segments(0, omega));
            segs.extend(physical_cnot_segments(0, 1, omega, delta_rr));
            ("H", single_logical(reg, segs, hadamard())?)
        }
        UnprotectedKind::Cnot => {
            let reg = Register::new(vec![LevelSet::with_rydberg(); 4], vec![(0, 1), (2, 3)])?;
            let mut segs = physical_cnot_segments(0, 3, omega, delta_rr);
            segs.extend(physical_cnot_segments(0, 2, omega, delta_rr));
            ("CNOT", two_logical(reg, segs, logical_cnot())?)
        }
    };
    Ok(GateRecipe { name: format!("{name}_unprotected"), schedule, provenance: Provenance::Caption, warnings })
}

/// Caption drive of the unprotected gates.
pub fn unprotected_caption() -> (f64, f64) {
    (two_pi_mhz(0.5), two_pi_mhz(100.0))
}
