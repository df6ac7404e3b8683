//! Propagation of pulse schedules under collective dephasing and decay, and
//! the averaged-superoperator fidelity.

mod average;
mod propagator;

pub use average::{
    average_compiled, average_superoperator, fidelity, fidelity_embedded, fidelity_per_trajectory,
    logical_superoperator, min_fidelity, MinFidelity, NoiseAverage, StateSet, FULL_SUPEROPERATOR_MAX_DIM,
};
pub use propagator::{propagate, Propagator};

use serde::{Deserialize, Serialize};

use crate::atoms::{
    dephaser_hamiltonian, raman_hamiltonian, rydberg_pair_hamiltonian, DephaserPulse, Level, RamanPulse, Register,
    RydbergPulse,
};
use crate::error::{Error, Result};
use crate::numkit::ComplexMatrix;

/// One element of a schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PulseSegment {
    Dephaser(DephaserPulse),
    RydbergPair(RydbergPulse),
    Raman(RamanPulse),
    Idle { duration: f64 },
}

impl PulseSegment {
    pub fn duration(&self) -> f64 {
        match self {
            PulseSegment::Dephaser(p) => p.duration,
            PulseSegment::RydbergPair(p) => p.duration,
            PulseSegment::Raman(p) => p.duration,
            PulseSegment::Idle { duration } => *duration,
        }
    }

    pub fn set_duration(&mut self, t: f64) {
        match self {
            PulseSegment::Dephaser(p) => p.duration = t,
            PulseSegment::RydbergPair(p) => p.duration = t,
            PulseSegment::Raman(p) => p.duration = t,
            PulseSegment::Idle { duration } => *duration = t,
        }
    }

    /// Atoms the segment drives, in the order its Hamiltonian names them.
    pub fn active_atoms(&self) -> Vec<usize> {
        match self {
            PulseSegment::Dephaser(p) => vec![p.atom],
            PulseSegment::RydbergPair(p) => vec![p.atoms.0, p.atoms.1],
            PulseSegment::Raman(p) => vec![p.atom],
            PulseSegment::Idle { .. } => vec![],
        }
    }

    /// True when the Hamiltonian depends on time within the segment.
    pub fn is_time_dependent(&self) -> bool {
        matches!(self, PulseSegment::RydbergPair(p) if p.modulation.as_ref().is_some_and(|m| m.depth != 0.0))
    }

    /// The same pulse acting on atoms renumbered `0, 1, …` in active order.
    pub(crate) fn localized(&self) -> PulseSegment {
        let mut s = self.clone();
        match &mut s {
            PulseSegment::Dephaser(p) => p.atom = 0,
            PulseSegment::RydbergPair(p) => p.atoms = (0, 1),
            PulseSegment::Raman(p) => p.atom = 0,
            PulseSegment::Idle { .. } => {}
        }
        s
    }

    /// The same pulse with atom `a` replaced by `map[a]`.
    pub fn remapped(&self, map: &[usize]) -> Result<PulseSegment> {
        let m = |a: usize| map.get(a).copied().ok_or(Error::AtomOutOfRange { atom: a, len: map.len() });
        let mut s = self.clone();
        match &mut s {
            PulseSegment::Dephaser(p) => p.atom = m(p.atom)?,
            PulseSegment::RydbergPair(p) => p.atoms = (m(p.atoms.0)?, m(p.atoms.1)?),
            PulseSegment::Raman(p) => p.atom = m(p.atom)?,
            PulseSegment::Idle { .. } => {}
        }
        Ok(s)
    }

    /// Hamiltonian on `reg` at schedule time `time`.
    pub fn hamiltonian(&self, reg: &Register, time: f64) -> Result<ComplexMatrix> {
        match self {
            PulseSegment::Dephaser(p) => dephaser_hamiltonian(p, reg),
            PulseSegment::RydbergPair(p) => rydberg_pair_hamiltonian(p, reg, time),
            PulseSegment::Raman(p) => raman_hamiltonian(p, reg),
            PulseSegment::Idle { .. } => Ok(ComplexMatrix::zeros(reg.dim(), reg.dim())),
        }
    }

    pub(crate) fn validate(&self, reg: &Register) -> Result<()> {
        let t = self.duration();
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter(format!("segment duration {t} must be finite and non-negative")));
        }
        let active = self.active_atoms();
        for &a in &active {
            reg.level_set(a)?;
        }
        if active.len() == 2 && active[0] == active[1] {
            return Err(Error::InvalidParameter(format!("pair segment repeats atom {}", active[0])));
        }
        let sub = reg.subregister(&active)?;
        self.localized().hamiltonian(&sub, 0.0).map(|_| ())
    }
}

/// Register basis indices spanned by the logical basis states, in logical order.
pub fn logical_indices(reg: &Register, states: &[Vec<Level>]) -> Result<Vec<usize>> {
    states.iter().map(|s| reg.state_index(s)).collect()
}

/// A gate as a sequence of segments plus its ideal action on the logical subspace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub register: Register,
    pub segments: Vec<PulseSegment>,
    /// Ideal unitary on the logical basis.
    pub ideal_target: ComplexMatrix,
    /// Register basis index of each logical basis state.
    pub logical_basis: Vec<usize>,
}

impl Schedule {
    pub fn new(
        register: Register,
        segments: Vec<PulseSegment>,
        ideal_target: ComplexMatrix,
        logical_basis: Vec<usize>,
    ) -> Result<Self> {
        let s = Self { register, segments, ideal_target, logical_basis };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        for seg in &self.segments {
            seg.validate(&self.register)?;
        }
        let d = self.logical_basis.len();
        if self.ideal_target.rows() != d || self.ideal_target.cols() != d {
            return Err(Error::Dimension(format!(
                "ideal target is {}x{} but the logical basis has {d} states",
                self.ideal_target.rows(),
                self.ideal_target.cols()
            )));
        }
        if !self.ideal_target.is_unitary(1e-9) {
            return Err(Error::InvalidParameter("ideal target is not unitary".into()));
        }
        let n = self.register.dim();
        if let Some(&bad) = self.logical_basis.iter().find(|&&i| i >= n) {
            return Err(Error::Dimension(format!("logical basis index {bad} outside a {n}-dimensional register")));
        }
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        self.segments.iter().map(PulseSegment::duration).sum()
    }

    pub fn logical_dim(&self) -> usize {
        self.logical_basis.len()
    }

    /// Embeds a logical state vector into the register space.
    pub fn embed_logical(&self, psi: &[crate::numkit::C64]) -> Vec<crate::numkit::C64> {
        let mut v = vec![crate::numkit::ZERO; self.register.dim()];
        for (&i, &c) in self.logical_basis.iter().zip(psi) {
            v[i] = c;
        }
        v
    }
}
