//! Atomic register and rotating-frame Hamiltonians.
//!
//! Units are angular frequencies in rad/s and times in seconds, with ħ = 1.
//! Per-atom levels are ordered `(0, 1, e, r)` restricted to the members of
//! each atom's level set; the product basis is mixed-radix with atom 0 as the
//! most significant digit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{ComplexMatrix, C64, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Level {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "e")]
    E,
    #[serde(rename = "r")]
    R,
}

impl Level {
    pub fn label(self) -> &'static str {
        match self {
            Level::Zero => "0",
            Level::One => "1",
            Level::E => "e",
            Level::R => "r",
        }
    }
}

/// Ordered subset of `{0, 1, e, r}` that always holds the qubit levels.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Level>", into = "Vec<Level>")]
pub struct LevelSet(Vec<Level>);

impl LevelSet {
    pub fn new(levels: &[Level]) -> Result<Self> {
        let mut v = levels.to_vec();
        v.sort();
        v.dedup();
        if !(v.contains(&Level::Zero) && v.contains(&Level::One)) {
            return Err(Error::Register("every level set must contain 0 and 1".into()));
        }
        Ok(Self(v))
    }

    pub fn qubit() -> Self {
        Self(vec![Level::Zero, Level::One])
    }

    pub fn with_rydberg() -> Self {
        Self(vec![Level::Zero, Level::One, Level::R])
    }

    pub fn full() -> Self {
        Self(vec![Level::Zero, Level::One, Level::E, Level::R])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn levels(&self) -> &[Level] {
        &self.0
    }

    pub fn contains(&self, l: Level) -> bool {
        self.0.contains(&l)
    }

    pub fn position(&self, l: Level) -> Option<usize> {
        self.0.iter().position(|&x| x == l)
    }

    fn merged_excited(&self) -> Self {
        let v: Vec<Level> = self.0.iter().map(|&l| if l == Level::E { Level::R } else { l }).collect();
        Self::new(&v).expect("merging keeps qubit levels")
    }
}

impl TryFrom<Vec<Level>> for LevelSet {
    type Error = Error;
    fn try_from(v: Vec<Level>) -> Result<Self> {
        Self::new(&v)
    }
}

impl From<LevelSet> for Vec<Level> {
    fn from(s: LevelSet) -> Self {
        s.0
    }
}

/// Ordered atoms with their level sets and the pairs that carry logical qubits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Register {
    atoms: Vec<LevelSet>,
    logical_pairs: Vec<(usize, usize)>,
    /// When set, `e` and `r` name the same physical level.
    shared_excited: bool,
}

impl Register {
    /// Register with a shared excited level (`e` = `r`).
    pub fn new(atoms: Vec<LevelSet>, logical_pairs: Vec<(usize, usize)>) -> Result<Self> {
        Self::build(atoms, logical_pairs, true)
    }

    /// Register in which `e` and `r` are distinct levels.
    pub fn with_distinct_excited(atoms: Vec<LevelSet>, logical_pairs: Vec<(usize, usize)>) -> Result<Self> {
        Self::build(atoms, logical_pairs, false)
    }

    fn build(atoms: Vec<LevelSet>, logical_pairs: Vec<(usize, usize)>, shared_excited: bool) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Register("a register needs at least one atom".into()));
        }
        let mut used = vec![false; atoms.len()];
        for &(a, b) in &logical_pairs {
            for x in [a, b] {
                if x >= atoms.len() {
                    return Err(Error::AtomOutOfRange { atom: x, len: atoms.len() });
                }
                if used[x] {
                    return Err(Error::Register(format!("atom {x} belongs to more than one logical pair")));
                }
                used[x] = true;
            }
            if a == b {
                return Err(Error::Register(format!("logical pair ({a}, {b}) repeats an atom")));
            }
        }
        let atoms = if shared_excited { atoms.iter().map(LevelSet::merged_excited).collect() } else { atoms };
        Ok(Self { atoms, logical_pairs, shared_excited })
    }

    /// `n` atoms restricted to `{0, 1}`, no logical pairs.
    pub fn qubits(n: usize) -> Self {
        Self::new(vec![LevelSet::qubit(); n.max(1)], vec![]).expect("qubit register")
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[LevelSet] {
        &self.atoms
    }

    pub fn logical_pairs(&self) -> &[(usize, usize)] {
        &self.logical_pairs
    }

    pub fn shared_excited(&self) -> bool {
        self.shared_excited
    }

    pub fn dims(&self) -> Vec<usize> {
        self.atoms.iter().map(LevelSet::len).collect()
    }

    pub fn dim(&self) -> usize {
        self.atoms.iter().map(LevelSet::len).product()
    }

    pub fn level_set(&self, atom: usize) -> Result<&LevelSet> {
        self.atoms.get(atom).ok_or(Error::AtomOutOfRange { atom, len: self.atoms.len() })
    }

    /// The physical level a label refers to, after `e`/`r` sharing.
    pub fn resolve(&self, l: Level) -> Level {
        if self.shared_excited && l == Level::E {
            Level::R
        } else {
            l
        }
    }

    /// Index of `level` within `atom`'s level set.
    pub fn level_index(&self, atom: usize, level: Level) -> Result<usize> {
        let set = self.level_set(atom)?;
        set.position(self.resolve(level)).ok_or(Error::MissingLevel { atom, level: level.label() })
    }

    /// Product-basis index of per-atom level indices.
    pub fn basis_index(&self, digits: &[usize]) -> usize {
        debug_assert_eq!(digits.len(), self.atoms.len());
        digits.iter().zip(&self.atoms).fold(0, |acc, (&d, s)| acc * s.len() + d)
    }

    /// Per-atom level indices of a product-basis index.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.atoms.len()];
        for (k, s) in self.atoms.iter().enumerate().rev() {
            out[k] = index % s.len();
            index /= s.len();
        }
        out
    }

    /// Basis index of the product state given by level labels.
    pub fn state_index(&self, levels: &[Level]) -> Result<usize> {
        if levels.len() != self.atoms.len() {
            return Err(Error::Dimension(format!("{} labels for a {}-atom register", levels.len(), self.atoms.len())));
        }
        let digits = levels.iter().enumerate().map(|(a, &l)| self.level_index(a, l)).collect::<Result<Vec<_>>>()?;
        Ok(self.basis_index(&digits))
    }

    /// Register made of the listed atoms, in the listed order, without logical pairs.
    pub fn subregister(&self, atoms: &[usize]) -> Result<Register> {
        let sets = atoms.iter().map(|&a| self.level_set(a).cloned()).collect::<Result<Vec<_>>>()?;
        Ok(Register { atoms: sets, logical_pairs: vec![], shared_excited: self.shared_excited })
    }

    /// Per-basis-state sum of a per-atom, per-level weight.
    pub fn diagonal_sum(&self, weight: impl Fn(usize, Level) -> f64) -> Vec<f64> {
        let mut diag = vec![0.0];
        for (a, set) in self.atoms.iter().enumerate() {
            let w: Vec<f64> = set.levels().iter().map(|&l| weight(a, l)).collect();
            diag = diag.iter().flat_map(|&d| w.iter().map(move |&x| d + x)).collect();
        }
        diag
    }
}

/// Drive on `|1⟩ ↔ |e⟩` of one atom.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DephaserPulse {
    pub atom: usize,
    /// Rabi frequency Ω_d (rad/s).
    pub rabi: f64,
    /// Detuning Δ_d (rad/s).
    pub detuning: f64,
    pub duration: f64,
}

impl DephaserPulse {
    pub fn generalized_rabi(&self) -> f64 {
        self.rabi.hypot(self.detuning)
    }
}

/// Harmonic variation of the blockade shift.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockadeModulation {
    #[serde(default = "BlockadeModulation::default_depth")]
    pub depth: f64,
    pub frequency_hz: f64,
    #[serde(default)]
    pub phase: f64,
}

impl BlockadeModulation {
    pub const DEFAULT_DEPTH: f64 = 0.2;

    fn default_depth() -> f64 {
        Self::DEFAULT_DEPTH
    }

    pub fn new(frequency_hz: f64) -> Self {
        Self { depth: Self::DEFAULT_DEPTH, frequency_hz, phase: 0.0 }
    }

    /// Relative blockade factor `1 + m sin(2π f t + φ)`.
    pub fn factor(&self, time: f64) -> f64 {
        1.0 + self.depth * (std::f64::consts::TAU * self.frequency_hz * time + self.phase).sin()
    }
}

/// Which atoms of a pair the Rydberg lasers address.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriveMask {
    #[default]
    Both,
    First,
    Second,
}

/// Two-laser drive of `|0⟩ ↔ |r⟩` and `|1⟩ ↔ |r⟩` on a pair of atoms with blockade.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RydbergPulse {
    pub atoms: (usize, usize),
    pub omega0: C64,
    pub omega1: C64,
    /// Δ, detuning of the `|0⟩ ↔ |r⟩` laser (rad/s).
    pub delta: f64,
    /// Δ′, two-photon detuning (rad/s).
    pub delta_prime: f64,
    pub delta_rr: f64,
    pub duration: f64,
    #[serde(default)]
    pub modulation: Option<BlockadeModulation>,
    #[serde(default)]
    pub drive: DriveMask,
}

impl RydbergPulse {
    pub const PERTURBATIVE_RATIO: f64 = 0.1;

    /// Largest of `|Ω_i| / |scale|` over the drive amplitudes and the
    /// detuning scales that set the perturbative denominators.
    pub fn perturbative_ratio(&self) -> f64 {
        let drive = self.omega0.norm().max(self.omega1.norm());
        let scales = [
            self.delta,
            self.delta_prime,
            self.delta_prime - self.delta,
            self.delta_rr,
        ];
        let smallest = scales.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
        drive / smallest
    }

    pub fn is_perturbative(&self, threshold: f64) -> bool {
        self.perturbative_ratio() <= threshold
    }

    pub fn blockade_at(&self, time: f64) -> f64 {
        match &self.modulation {
            Some(m) => self.delta_rr * m.factor(time),
            None => self.delta_rr,
        }
    }

    pub fn drives(&self, which: usize) -> bool {
        matches!((self.drive, which), (DriveMask::Both, _) | (DriveMask::First, 0) | (DriveMask::Second, 1))
    }
}

/// Two-photon Raman rotation `|0⟩ ↔ |1⟩` through a far-detuned `|e⟩`.
///
/// Both legs have Rabi frequency `rabi_leg`; the `|1⟩` leg carries the phase
/// that sets the rotation axis `(cos φ, −sin φ, 0)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RamanPulse {
    pub atom: usize,
    pub rabi_leg: f64,
    pub phase: f64,
    pub detuning: f64,
    pub duration: f64,
}

impl RamanPulse {
    /// Leg Rabi frequency whose bright-state shift equals `omega` exactly.
    pub fn leg_for(omega: f64, detuning: f64) -> f64 {
        (2.0 * omega * (omega + detuning)).sqrt()
    }

    /// Energy of the bright state relative to the dark state, which is the
    /// effective rotation rate.
    pub fn effective_rabi(&self) -> f64 {
        0.5 * (-self.detuning + (self.detuning.powi(2) + 2.0 * self.rabi_leg.powi(2)).sqrt())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DecayConfig {
    pub gamma_e: f64,
    pub gamma_r: f64,
}

impl DecayConfig {
    pub fn new(gamma_e: f64, gamma_r: f64) -> Result<Self> {
        let d = Self { gamma_e, gamma_r };
        d.validate()?;
        Ok(d)
    }

    pub fn none() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_e >= 0.0 && self.gamma_r >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "decay rates must be non-negative (gamma_e = {}, gamma_r = {})",
                self.gamma_e, self.gamma_r
            )));
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.gamma_e == 0.0 && self.gamma_r == 0.0
    }

    /// Decay rate of a physical level in `reg`.
    pub fn rate(&self, reg: &Register, l: Level) -> f64 {
        match reg.resolve(l) {
            Level::R => self.gamma_r,
            Level::E => self.gamma_e,
            _ => 0.0,
        }
    }
}

/// Correlation factors of the excited-level shifts relative to `ε₁`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Alphas {
    pub alpha_e: f64,
    pub alpha_r: f64,
}

impl Default for Alphas {
    fn default() -> Self {
        Self { alpha_e: 1.5, alpha_r: 1.5 }
    }
}

impl Alphas {
    /// Noise weight of a physical level in `reg`.
    pub fn weight(&self, reg: &Register, l: Level) -> f64 {
        match reg.resolve(l) {
            Level::Zero => 0.0,
            Level::One => 1.0,
            Level::E => self.alpha_e,
            Level::R => self.alpha_r,
        }
    }
}

/// Lifts a single-atom operator to the register space.
pub fn embed(op: &ComplexMatrix, atom: usize, reg: &Register) -> Result<ComplexMatrix> {
    let d = reg.level_set(atom)?.len();
    if op.rows() != d || op.cols() != d {
        return Err(Error::Dimension(format!("atom {atom} has {d} levels, operator is {}x{}", op.rows(), op.cols())));
    }
    let dims = reg.dims();
    let left: usize = dims[..atom].iter().product();
    let right: usize = dims[atom + 1..].iter().product();
    Ok(ComplexMatrix::identity(left).kron(op).kron(&ComplexMatrix::identity(right)))
}

fn single_atom(reg: &Register, atom: usize) -> Result<ComplexMatrix> {
    let d = reg.level_set(atom)?.len();
    Ok(ComplexMatrix::zeros(d, d))
}

/// `−Δ_d|e⟩⟨e| + (Ω_d/2)(|e⟩⟨1| + |1⟩⟨e|)` on the pulse's atom.
pub fn dephaser_hamiltonian(p: &DephaserPulse, reg: &Register) -> Result<ComplexMatrix> {
    let mut h = single_atom(reg, p.atom)?;
    let (one, e) = (reg.level_index(p.atom, Level::One)?, reg.level_index(p.atom, Level::E)?);
    h[(e, e)] = C64::new(-p.detuning, 0.0);
    h[(e, one)] = C64::new(p.rabi / 2.0, 0.0);
    h[(one, e)] = C64::new(p.rabi / 2.0, 0.0);
    embed(&h, p.atom, reg)
}

/// Single-atom part of the Rydberg drive: energies `(0, −Δ′, −Δ)` and the two couplings.
fn rydberg_atom(p: &RydbergPulse, reg: &Register, atom: usize) -> Result<ComplexMatrix> {
    let mut h = single_atom(reg, atom)?;
    let (z, o, r) = (
        reg.level_index(atom, Level::Zero)?,
        reg.level_index(atom, Level::One)?,
        reg.level_index(atom, Level::R)?,
    );
    h[(o, o)] = C64::new(-p.delta_prime, 0.0);
    h[(r, r)] = C64::new(-p.delta, 0.0);
    h[(r, z)] = p.omega0 / 2.0;
    h[(z, r)] = p.omega0.conj() / 2.0;
    h[(r, o)] = p.omega1 / 2.0;
    h[(o, r)] = p.omega1.conj() / 2.0;
    Ok(h)
}

/// Rotating-frame pair Hamiltonian at `time`, including the blockade shift on `|rr⟩`.
pub fn rydberg_pair_hamiltonian(p: &RydbergPulse, reg: &Register, time: f64) -> Result<ComplexMatrix> {
    let (a, b) = p.atoms;
    if a == b {
        return Err(Error::InvalidParameter(format!("Rydberg pulse on a single atom ({a})")));
    }
    let (ra, rb) = (reg.level_index(a, Level::R)?, reg.level_index(b, Level::R)?);
    let mut h = ComplexMatrix::zeros(reg.dim(), reg.dim());
    for (k, atom) in [a, b].into_iter().enumerate() {
        if p.drives(k) {
            h += &embed(&rydberg_atom(p, reg, atom)?, atom, reg)?;
        }
    }
    let blockade = p.blockade_at(time);
    for i in 0..reg.dim() {
        let d = reg.digits(i);
        if d[a] == ra && d[b] == rb {
            h[(i, i)] += blockade;
        }
    }
    Ok(h)
}

/// Raman drive through `|e⟩` on one atom.
pub fn raman_hamiltonian(p: &RamanPulse, reg: &Register) -> Result<ComplexMatrix> {
    let mut h = single_atom(reg, p.atom)?;
    let (z, o, e) = (
        reg.level_index(p.atom, Level::Zero)?,
        reg.level_index(p.atom, Level::One)?,
        reg.level_index(p.atom, Level::E)?,
    );
    let leg0 = C64::new(p.rabi_leg / 2.0, 0.0);
    let leg1 = C64::from_polar(p.rabi_leg / 2.0, p.phase);
    h[(e, e)] = C64::new(-p.detuning, 0.0);
    h[(e, z)] = leg0;
    h[(z, e)] = leg0.conj();
    h[(e, o)] = leg1;
    h[(o, e)] = leg1.conj();
    embed(&h, p.atom, reg)
}

/// Diagonal of the collective noise Hamiltonian per unit `ε₁`.
pub fn noise_diagonal(alphas: &Alphas, reg: &Register) -> Vec<f64> {
    reg.diagonal_sum(|_, l| alphas.weight(reg, l))
}

/// `Σ_atoms ε₁|1⟩⟨1| + ε_e|e⟩⟨e| + ε_r|r⟩⟨r|` with one shared `ε₁`.
pub fn noise_hamiltonian(eps1: f64, alpha_e: f64, alpha_r: f64, reg: &Register) -> ComplexMatrix {
    let alphas = Alphas { alpha_e, alpha_r };
    ComplexMatrix::from_real_diag(&noise_diagonal(&alphas, reg).iter().map(|w| w * eps1).collect::<Vec<_>>())
}

/// Per-basis-state total decay rate.
pub fn decay_rates(d: &DecayConfig, reg: &Register) -> Vec<f64> {
    reg.diagonal_sum(|_, l| d.rate(reg, l))
}

/// `−i(γ_e/2 |e⟩⟨e| + γ_r/2 |r⟩⟨r|)` summed over atoms.
pub fn decay_term(d: &DecayConfig, reg: &Register) -> Result<ComplexMatrix> {
    d.validate()?;
    let diag: Vec<C64> = decay_rates(d, reg).iter().map(|g| C64::new(0.0, -g / 2.0)).collect();
    Ok(ComplexMatrix::from_diag(&diag))
}

/// Product basis state given by per-atom level labels.
pub fn basis_state(reg: &Register, levels: &[Level]) -> Result<Vec<C64>> {
    let mut v = vec![ZERO; reg.dim()];
    v[reg.state_index(levels)?] = C64::new(1.0, 0.0);
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{eigh, expm, I, ONE};
    use crate::units::two_pi_mhz;
    use Level::*;

    fn caption_r() -> RydbergPulse {
        RydbergPulse {
            atoms: (0, 1),
            omega0: C64::new(two_pi_mhz(3.91), 0.0),
            omega1: C64::new(two_pi_mhz(1.97), 0.0),
            delta: two_pi_mhz(60.34),
            delta_prime: two_pi_mhz(30.70),
            delta_rr: two_pi_mhz(100.0),
            duration: 120.2e-6,
            modulation: None,
            drive: DriveMask::Both,
        }
    }

    fn pair_reg() -> Register {
        Register::new(vec![LevelSet::with_rydberg(); 2], vec![(0, 1)]).unwrap()
    }

    #[test]
    fn level_set_needs_qubit_levels() {
        assert!(LevelSet::new(&[Zero, R]).is_err());
        assert_eq!(LevelSet::new(&[R, One, Zero]).unwrap(), LevelSet::with_rydberg());
    }

    #[test]
    fn shared_excited_merges_e_into_r() {
        let reg = Register::new(vec![LevelSet::full()], vec![]).unwrap();
        assert_eq!(reg.dim(), 3);
        assert_eq!(reg.level_index(0, E).unwrap(), reg.level_index(0, R).unwrap());
        let reg = Register::with_distinct_excited(vec![LevelSet::full()], vec![]).unwrap();
        assert_eq!(reg.dim(), 4);
        assert_ne!(reg.level_index(0, E).unwrap(), reg.level_index(0, R).unwrap());
    }

    #[test]
    fn register_rejects_overlapping_pairs() {
        let sets = vec![LevelSet::qubit(); 3];
        assert!(Register::new(sets.clone(), vec![(0, 1), (1, 2)]).is_err());
        assert!(Register::new(sets, vec![(0, 3)]).is_err());
    }

    #[test]
    fn digits_round_trip() {
        let reg = Register::new(vec![LevelSet::with_rydberg(), LevelSet::qubit(), LevelSet::full()], vec![]).unwrap();
        for i in 0..reg.dim() {
            assert_eq!(reg.basis_index(&reg.digits(i)), i);
        }
    }

    #[test]
    fn embed_identity_and_sigma_z() {
        let reg = Register::qubits(2);
        assert_eq!(embed(&ComplexMatrix::identity(2), 1, &reg).unwrap(), ComplexMatrix::identity(4));
        let z = ComplexMatrix::from_real_diag(&[1.0, -1.0]);
        assert_eq!(embed(&z, 0, &reg).unwrap(), ComplexMatrix::from_real_diag(&[1.0, 1.0, -1.0, -1.0]));
    }

    #[test]
    fn embed_errors() {
        let reg = Register::qubits(2);
        assert!(matches!(embed(&ComplexMatrix::identity(2), 2, &reg), Err(Error::AtomOutOfRange { .. })));
        assert!(matches!(embed(&ComplexMatrix::identity(3), 0, &reg), Err(Error::Dimension(_))));
    }

    #[test]
    fn embed_products_match_kron() {
        let reg = Register::new(vec![LevelSet::with_rydberg(), LevelSet::qubit()], vec![]).unwrap();
        let a = ComplexMatrix::from_fn(3, 3, |i, j| C64::new(i as f64 - 0.5 * j as f64, 0.1 * (i + j) as f64));
        let b = ComplexMatrix::from_fn(2, 2, |i, j| C64::new(1.0 + i as f64, -(j as f64)));
        let lhs = embed(&a, 0, &reg).unwrap().matmul(&embed(&b, 1, &reg).unwrap());
        assert!(lhs.max_abs_diff(&a.kron(&b)) < 1e-15);
    }

    #[test]
    fn dephaser_decoupled_limit() {
        let reg = Register::new(vec![LevelSet::with_rydberg()], vec![]).unwrap();
        let p = DephaserPulse { atom: 0, rabi: 0.0, detuning: 7.0, duration: 1.0 };
        let h = dephaser_hamiltonian(&p, &reg).unwrap();
        assert_eq!(h, ComplexMatrix::from_real_diag(&[0.0, 0.0, -7.0]));
    }

    #[test]
    fn dephaser_needs_excited_level() {
        let p = DephaserPulse { atom: 0, rabi: 1.0, detuning: 0.0, duration: 1.0 };
        assert!(matches!(dephaser_hamiltonian(&p, &Register::qubits(1)), Err(Error::MissingLevel { .. })));
    }

    #[test]
    fn rydberg_decoupled_limit() {
        let reg = pair_reg();
        let mut p = caption_r();
        p.omega0 = ZERO;
        p.omega1 = ZERO;
        let h = rydberg_pair_hamiltonian(&p, &reg, 0.0).unwrap();
        assert!(h.is_diagonal());
        let rr = reg.state_index(&[R, R]).unwrap();
        assert!((h[(rr, rr)].re - (-2.0 * p.delta + p.delta_rr)).abs() < 1e-6);
        let one_one = reg.state_index(&[One, One]).unwrap();
        assert_eq!(h[(one_one, one_one)].re, -2.0 * p.delta_prime);
    }

    #[test]
    fn rydberg_needs_r() {
        let p = caption_r();
        assert!(matches!(rydberg_pair_hamiltonian(&p, &Register::qubits(2), 0.0), Err(Error::MissingLevel { .. })));
    }

    #[test]
    fn drive_mask_leaves_other_atom_bare() {
        let reg = pair_reg();
        let mut p = caption_r();
        p.drive = DriveMask::First;
        let h = rydberg_pair_hamiltonian(&p, &reg, 0.0).unwrap();
        let a = reg.state_index(&[Zero, Zero]).unwrap();
        let b = reg.state_index(&[Zero, R]).unwrap();
        let c = reg.state_index(&[R, Zero]).unwrap();
        assert_eq!(h[(b, a)], ZERO);
        assert_eq!(h[(c, a)], p.omega0 / 2.0);
        assert_eq!(h[(b, b)], ZERO);
    }

    #[test]
    fn strong_blockade_suppresses_double_excitation() {
        let reg = pair_reg();
        let mut p = caption_r();
        p.delta_rr = two_pi_mhz(1e6);
        let h = rydberg_pair_hamiltonian(&p, &reg, 0.0).unwrap();
        let (_, v) = eigh(&h).unwrap();
        let rr = reg.state_index(&[R, R]).unwrap();
        let comp: Vec<usize> = [[Zero, Zero], [Zero, One], [One, Zero], [One, One]]
            .iter()
            .map(|l| reg.state_index(l).unwrap())
            .collect();
        for j in 0..9 {
            let col = v.column(j);
            let dominant = (0..9).max_by(|&a, &b| col[a].norm().total_cmp(&col[b].norm())).unwrap();
            if comp.contains(&dominant) {
                assert!(col[rr].norm() < 1e-4, "column {j}: {}", col[rr].norm());
            }
        }
    }

    #[test]
    fn modulation_only_moves_rr() {
        let reg = pair_reg();
        let mut p = caption_r();
        let h0 = rydberg_pair_hamiltonian(&p, &reg, 0.3e-6).unwrap();
        p.modulation = Some(BlockadeModulation::new(1e6));
        let t = 0.3e-6;
        let h1 = rydberg_pair_hamiltonian(&p, &reg, t).unwrap();
        let rr = reg.state_index(&[R, R]).unwrap();
        let diff = &h1 - &h0;
        let want = p.delta_rr * 0.2 * (std::f64::consts::TAU * 1e6 * t).sin();
        assert!((diff[(rr, rr)].re - want).abs() < 1e-6);
        diff.as_slice().iter().enumerate().filter(|(k, _)| *k != rr * 10).for_each(|(_, z)| assert_eq!(*z, ZERO));
    }

    #[test]
    fn raman_rotates_about_its_axis() {
        let reg = Register::new(vec![LevelSet::with_rydberg()], vec![]).unwrap();
        let omega = two_pi_mhz(0.5);
        let detuning = two_pi_mhz(1000.0);
        let p = RamanPulse { atom: 0, rabi_leg: RamanPulse::leg_for(omega, detuning), phase: 0.0, detuning, duration: 1e-6 };
        assert!((p.effective_rabi() - omega).abs() < 1e-6 * omega);
        let u = expm(&raman_hamiltonian(&p, &reg).unwrap().scale(-I * p.duration)).unwrap();
        // A π rotation about x sends |0⟩ to |1⟩ up to the small excited admixture.
        assert!(u[(1, 0)].norm_sqr() > 1.0 - 1e-3);
    }

    #[test]
    fn noise_examples() {
        let reg = Register::qubits(2);
        assert_eq!(noise_hamiltonian(0.0, 1.5, 1.5, &reg), ComplexMatrix::zeros(4, 4));
        let x = 3.0;
        assert_eq!(noise_hamiltonian(x, 1.5, 1.5, &reg), ComplexMatrix::from_real_diag(&[0.0, x, x, 2.0 * x]));
        let reg = Register::new(vec![LevelSet::with_rydberg()], vec![]).unwrap();
        let h = noise_hamiltonian(x, 1.0, 1.5, &reg);
        assert_eq!(h[(2, 2)].re, 1.5 * x);
    }

    #[test]
    fn decay_term_examples() {
        let reg = pair_reg();
        assert_eq!(decay_term(&DecayConfig::none(), &reg).unwrap(), ComplexMatrix::zeros(9, 9));
        assert!(DecayConfig::new(-1.0, 0.0).is_err());
        let single = Register::new(vec![LevelSet::with_rydberg()], vec![]).unwrap();
        let gamma = std::f64::consts::TAU * 5e3;
        let d = DecayConfig::new(0.0, gamma).unwrap();
        let t = 37e-6;
        let u = expm(&decay_term(&d, &single).unwrap().scale(C64::new(0.0, -t))).unwrap();
        assert!((u[(2, 2)].norm_sqr() - (-gamma * t).exp()).abs() < 1e-14);
        assert_eq!(u[(1, 1)], ONE);
    }

    #[test]
    fn caption_drive_is_hermitian() {
        let reg = pair_reg();
        assert!(rydberg_pair_hamiltonian(&caption_r(), &reg, 0.0).unwrap().is_hermitian(1e-12));
    }
}
