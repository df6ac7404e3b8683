//! Perturbative four-photon theory of the two-atom Rydberg drive.
//!
//! [`effective_params`] gives the swap frequency and the light shifts of the
//! computational states; [`u_eff`] is the resulting two-atom evolution in the
//! qubit frame. The solvers in this module seed pulse parameters that the
//! full model later refines.

use std::f64::consts::{PI, TAU};
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::atoms::{rydberg_pair_hamiltonian, DephaserPulse, LevelSet, Register, RydbergPulse};
use crate::error::{Error, Result};
use crate::numkit::{eigh, ComplexMatrix, C64, ZERO};

/// Swap frequency Ω_R and light shifts Δ_0, Δ_00, Δ_11 (all rad/s).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveParams {
    pub omega_r: f64,
    pub delta_0: f64,
    pub delta_00: f64,
    pub delta_11: f64,
}

fn nonzero(x: f64, scale: f64, factor: &'static str) -> Result<f64> {
    if x.abs() <= 1e-12 * scale || !x.is_finite() {
        Err(Error::Singular { factor })
    } else {
        Ok(x)
    }
}

/// Effective parameters of the two-atom drive to fourth order in the Rabi frequencies.
pub fn effective_params(omega0: C64, omega1: C64, delta: f64, delta_p: f64, delta_rr: f64) -> Result<EffectiveParams> {
    let scale = delta.abs().max(delta_p.abs()).max(delta_rr.abs()).max(f64::MIN_POSITIVE);
    let d = nonzero(delta, scale, "Δ")?;
    let dp = nonzero(delta_p, scale, "Δ′")?;
    let d_m_dp = nonzero(delta - delta_p, scale, "Δ′ − Δ")?;
    let blockaded = nonzero(delta_rr + delta_p - 2.0 * delta, scale, "Δ_rr + Δ′ − 2Δ")?;
    let rr_00 = nonzero(delta_rr - 2.0 * delta, scale, "Δ_rr − 2Δ")?;
    let rr_11 = nonzero(delta_rr + 2.0 * delta_p - 2.0 * delta, scale, "Δ_rr + 2Δ′ − 2Δ")?;

    let a0 = omega0.norm_sqr();
    let a1 = omega1.norm_sqr();
    let drr = delta_rr;

    let omega_r = a0 * a1 / 8.0 * drr * (dp - 2.0 * d) / (blockaded * d * d * d_m_dp * d_m_dp);
    let delta_0 = a0 / (4.0 * d) + a1 / (4.0 * d_m_dp)
        - (a0 * a0 / d.powi(3)
            + a1 * a1 / d_m_dp.powi(3)
            + a0 * a1 * (2.0 * drr + dp - 2.0 * d) * (2.0 * d - dp) / (blockaded * d * d * d_m_dp * d_m_dp))
            / 16.0;
    let delta_00 = a0 / (2.0 * d) * (1.0 + (a1 / (2.0 * dp) - a0 * (drr - d) / (d * rr_00)) / (2.0 * d));
    let delta_11 =
        a1 / (2.0 * d_m_dp) * (1.0 + (a0 / (2.0 * dp) + a1 * (drr + dp - d) / (d_m_dp * rr_11)) / (-2.0 * d_m_dp));
    Ok(EffectiveParams { omega_r, delta_0, delta_00, delta_11 })
}

/// [`effective_params`] for a pulse.
pub fn pulse_effective_params(p: &RydbergPulse) -> Result<EffectiveParams> {
    effective_params(p.omega0, p.omega1, p.delta, p.delta_prime, p.delta_rr)
}

/// Effective two-atom evolution on `|00⟩, |01⟩, |10⟩, |11⟩`.
pub fn u_eff(t: f64, ep: &EffectiveParams, delta_p: f64) -> ComplexMatrix {
    let global = C64::from_polar(1.0, -(ep.delta_0 - delta_p) * t);
    let theta = ep.omega_r * t / 2.0;
    let c = C64::new(theta.cos(), 0.0);
    let s = C64::new(0.0, theta.sin());
    let m = ComplexMatrix::from_rows(&[
        [C64::from_polar(1.0, -(ep.delta_00 - ep.delta_0) * t), ZERO, ZERO, ZERO],
        [ZERO, c, s, ZERO],
        [ZERO, s, c, ZERO],
        [ZERO, ZERO, ZERO, C64::from_polar(1.0, -(ep.delta_11 - ep.delta_0) * t)],
    ]);
    m.scale(global)
}

/// Phase acquired by `|1⟩` and the duration of `n` full generalized-Rabi cycles.
pub fn dephaser_phase(n: u32, rabi: f64, detuning: f64) -> (f64, f64) {
    let w = rabi.hypot(detuning);
    let n = f64::from(n);
    (n * PI * (1.0 + detuning / w), n * TAU / w)
}

/// Number of full cycles a dephaser pulse performs.
pub fn dephaser_cycles(p: &DephaserPulse) -> u32 {
    (p.duration * p.generalized_rabi() / TAU).round() as u32
}

const MAX_DEPHASER_CYCLES: u32 = 1_000_000;

/// Smallest-`n` dephaser pulse producing `phi_target` with `|Δ_d| ≥ ratio_min·|Ω_d|`.
pub fn solve_dephaser(phi_target: f64, rabi: f64, ratio_min: f64, atom: usize) -> Result<DephaserPulse> {
    if !(phi_target > 0.0 && phi_target < TAU) {
        return Err(Error::InvalidParameter(format!("dephaser target phase {phi_target} outside (0, 2π)")));
    }
    if !(rabi.is_finite() && rabi != 0.0 && ratio_min.is_finite() && ratio_min >= 0.0) {
        return Err(Error::InvalidParameter(format!("dephaser rabi {rabi}, ratio_min {ratio_min}")));
    }
    for n in 1..=MAX_DEPHASER_CYCLES {
        let x = phi_target / (f64::from(n) * PI) - 1.0;
        if x.abs() >= 1.0 {
            continue;
        }
        let detuning = x * rabi.abs() / (1.0 - x * x).sqrt();
        if detuning.abs() >= ratio_min * rabi.abs() {
            let (_, duration) = dephaser_phase(n, rabi, detuning);
            return Ok(DephaserPulse { atom, rabi, detuning, duration });
        }
    }
    Err(Error::NoSolution {
        reason: format!("no dephaser with at most {MAX_DEPHASER_CYCLES} cycles reaches ratio {ratio_min}"),
        best_residual: f64::NAN,
    })
}

/// Duration of the swap rotation by angle `theta` (`θ = Ω_R t / 2`), using `|Ω_R|`.
pub fn rotation_duration(theta: f64, ep: &EffectiveParams) -> Result<f64> {
    if ep.omega_r == 0.0 {
        return Err(Error::Singular { factor: "Ω_R" });
    }
    Ok(2.0 * theta.abs() / ep.omega_r.abs())
}

/// The three phase-gate conditions at the gate time `τ = 4π/|Ω_R|`.
///
/// Components: `(Δ_00 − Δ_0)/Ω_R − k/2`, `(Δ_11 − Δ_0)/Ω_R − 1/4 − l/2`, and
/// the relative mismatch of `|Ω_R|·τ` against `4π`.
pub fn phase_gate_residuals(ep: &EffectiveParams, tau: f64, k: i64, l: i64) -> [f64; 3] {
    [
        (ep.delta_00 - ep.delta_0) / ep.omega_r - k as f64 / 2.0,
        (ep.delta_11 - ep.delta_0) / ep.omega_r - 0.25 - l as f64 / 2.0,
        ep.omega_r.abs() * tau / (4.0 * PI) - 1.0,
    ]
}

/// Continuous values of `(k, l)` at which the pulse would satisfy the phase conditions.
pub fn phase_gate_ratios(p: &RydbergPulse) -> Result<(f64, f64)> {
    let ep = pulse_effective_params(p)?;
    Ok((
        2.0 * (ep.delta_00 - ep.delta_0) / ep.omega_r,
        2.0 * ((ep.delta_11 - ep.delta_0) / ep.omega_r - 0.25),
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseGateSolution {
    pub pulse: RydbergPulse,
    pub k: i64,
    pub l: i64,
    pub tau: f64,
    pub residuals: [f64; 3],
}

impl PhaseGateSolution {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.abs()).fold(0.0, f64::max)
    }

    /// Largest relative change of the solved parameters against `seed`.
    pub fn relative_move(&self, seed: &RydbergPulse) -> f64 {
        let dd = (self.pulse.delta / seed.delta - 1.0).abs();
        let dw = (self.pulse.omega1.norm() / seed.omega1.norm() - 1.0).abs();
        dd.max(dw)
    }
}

pub const PHASE_GATE_TOLERANCE: f64 = 1e-6;

fn with_delta_omega1(seed: &RydbergPulse, delta: f64, omega1_abs: f64) -> RydbergPulse {
    let mut p = seed.clone();
    p.delta = delta;
    p.omega1 = C64::from_polar(omega1_abs, seed.omega1.arg());
    p
}

fn ratio_residual(seed: &RydbergPulse, u: [f64; 2], k: i64, l: i64) -> Option<[f64; 2]> {
    let p = with_delta_omega1(seed, u[0] * seed.delta, u[1] * seed.omega1.norm());
    let ep = pulse_effective_params(&p).ok()?;
    let r = phase_gate_residuals(&ep, 0.0, k, l);
    (r[0].is_finite() && r[1].is_finite()).then_some([r[0], r[1]])
}

/// Damped Newton iteration on the two ratio conditions over `(Δ, |Ω₁|)`.
fn newton_ratios(seed: &RydbergPulse, k: i64, l: i64) -> Option<(RydbergPulse, f64)> {
    let norm = |r: [f64; 2]| r[0].hypot(r[1]);
    let mut u = [1.0, 1.0];
    let mut r = ratio_residual(seed, u, k, l)?;
    for _ in 0..80 {
        if norm(r) < 1e-13 {
            break;
        }
        let h = 1e-7;
        let mut jac = [[0.0; 2]; 2];
        for j in 0..2 {
            let mut up = u;
            up[j] += h;
            let mut um = u;
            um[j] -= h;
            let (fp, fm) = (ratio_residual(seed, up, k, l)?, ratio_residual(seed, um, k, l)?);
            for i in 0..2 {
                jac[i][j] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let step = [
            (jac[1][1] * r[0] - jac[0][1] * r[1]) / det,
            (-jac[1][0] * r[0] + jac[0][0] * r[1]) / det,
        ];
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda > 1e-4 {
            let trial = [u[0] - lambda * step[0], u[1] - lambda * step[1]];
            if trial[1] > 0.0 {
                if let Some(rt) = ratio_residual(seed, trial, k, l) {
                    if norm(rt) < norm(r) {
                        u = trial;
                        r = rt;
                        accepted = true;
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let p = with_delta_omega1(seed, u[0] * seed.delta, u[1] * seed.omega1.norm());
    Some((p, norm(r)))
}

/// All phase-gate solutions in the given integer ranges, ordered by how far
/// they move the seed.
///
/// Root finding adjusts `Δ` and `|Ω₁|`; `|Ω₀|`, `Δ′` and `Δ_rr` stay at the
/// seed values. The gate time is always `4π/|Ω_R|`.
pub fn phase_gate_candidates(
    delta_rr: f64,
    seed: &RydbergPulse,
    k_range: RangeInclusive<i64>,
    l_range: RangeInclusive<i64>,
) -> Result<Vec<PhaseGateSolution>> {
    let mut seed = seed.clone();
    seed.delta_rr = delta_rr;
    pulse_effective_params(&seed)?;
    let mut out = Vec::new();
    let mut best_residual = f64::INFINITY;
    for k in k_range {
        for l in l_range.clone() {
            let Some((mut pulse, res)) = newton_ratios(&seed, k, l) else { continue };
            best_residual = best_residual.min(res);
            if res >= PHASE_GATE_TOLERANCE {
                continue;
            }
            let Ok(ep) = pulse_effective_params(&pulse) else { continue };
            let tau = 4.0 * PI / ep.omega_r.abs();
            pulse.duration = tau;
            let residuals = phase_gate_residuals(&ep, tau, k, l);
            out.push(PhaseGateSolution { pulse, k, l, tau, residuals });
        }
    }
    if out.is_empty() {
        return Err(Error::NoSolution {
            reason: "no phase-gate root in the requested (k, l) range".into(),
            best_residual,
        });
    }
    out.sort_by(|a, b| a.relative_move(&seed).total_cmp(&b.relative_move(&seed)));
    Ok(out)
}

/// Phase-gate solution closest to the seed within the integer ranges.
pub fn solve_phase_gate(
    delta_rr: f64,
    seed: &RydbergPulse,
    k_range: RangeInclusive<i64>,
    l_range: RangeInclusive<i64>,
) -> Result<PhaseGateSolution> {
    Ok(phase_gate_candidates(delta_rr, seed, k_range, l_range)?.swap_remove(0))
}

/// Integer ranges of half-width `span` around the seed's continuous `(k, l)`.
pub fn ranges_near(seed: &RydbergPulse, span: i64) -> Result<(RangeInclusive<i64>, RangeInclusive<i64>)> {
    let (k, l) = phase_gate_ratios(seed)?;
    let (k, l) = (k.round() as i64, l.round() as i64);
    Ok((k - span..=k + span, l - span..=l + span))
}

/// Exact energies of the dressed states that continue `|00⟩`, the symmetric
/// and antisymmetric DFS combinations, and `|11⟩`, in the qubit frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DressedEnergies {
    pub e00: f64,
    pub sym: f64,
    pub anti: f64,
    pub e11: f64,
}

impl DressedEnergies {
    /// Exact counterpart of the effective swap frequency, `E_anti − E_sym`.
    pub fn swap_frequency(&self) -> f64 {
        self.anti - self.sym
    }
}

/// Diagonalizes the full two-atom Hamiltonian of `p` (blockade modulation ignored).
pub fn dressed_energies(p: &RydbergPulse) -> Result<DressedEnergies> {
    let reg = Register::new(vec![LevelSet::with_rydberg(); 2], vec![])?;
    let mut pulse = p.clone();
    pulse.atoms = (0, 1);
    pulse.modulation = None;
    let h = rydberg_pair_hamiltonian(&pulse, &reg, 0.0)?;
    let (w, v) = eigh(&h)?;
    // Levels per atom are (0, 1, r): |00⟩ = 0, |01⟩ = 1, |10⟩ = 3, |11⟩ = 4.
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let overlap = |j: usize, coeffs: &[(usize, f64)]| -> f64 {
        coeffs.iter().map(|&(i, c)| v[(i, j)] * c).sum::<C64>().norm()
    };
    let pick = |coeffs: &[(usize, f64)]| -> f64 {
        let j = (0..9).max_by(|&a, &b| overlap(a, coeffs).total_cmp(&overlap(b, coeffs))).expect("nine states");
        w[j]
    };
    let dp = p.delta_prime;
    Ok(DressedEnergies {
        e00: pick(&[(0, 1.0)]),
        sym: pick(&[(1, s), (3, s)]) + dp,
        anti: pick(&[(1, s), (3, -s)]) + dp,
        e11: pick(&[(4, 1.0)]) + 2.0 * dp,
    })
}
