//! Segment-by-segment propagation.
//!
//! Each segment is propagated on its driven atoms only; the remaining atoms
//! pick up diagonal noise phases and decay. Within a segment the noise is
//! piecewise constant on the `dt` grid. Full steps use a precomputed
//! expansion of `exp(A + z·E)` in the noise amplitude `z`, where `A` is the
//! static step generator and `E` the normalized noise generator; the
//! coefficients are blocks of the exponential of a block-bidiagonal matrix.
//! Partial steps, large amplitudes and modulated blockades fall back to a
//! direct exponential.

use std::sync::OnceLock;

use super::{PulseSegment, Schedule};
use crate::atoms::{decay_rates, noise_diagonal, Alphas, DecayConfig, Level, Register};
use crate::error::{Error, Result};
use crate::noise::OUPath;
use crate::numkit::{expm, matmul_into, ComplexMatrix, C64, I, ONE, ZERO};

const DYSON_ORDER: usize = 20;
const DYSON_CUTOFF: f64 = 1e-17;
/// Relative tolerance for recognizing a step as a full grid step.
const GRID_TOL: f64 = 1e-9;

struct Block {
    idx: Vec<usize>,
    h0: ComplexMatrix,
    gamma: Vec<f64>,
    noise: Vec<f64>,
    rr: Vec<f64>,
    noise_scale: f64,
    /// `X_k` coefficients of the full-step expansion, `X_0 = exp(A)`.
    dyson: OnceLock<Result<Vec<Vec<C64>>, String>>,
}

impl Block {
    fn dim(&self) -> usize {
        self.idx.len()
    }

    /// `−i h (H0 + δ·rr + ε·noise) − h Γ/2`.
    fn generator(&self, h: f64, eps: f64, delta_mod: f64) -> ComplexMatrix {
        let mut g = self.h0.scale(-I * h);
        for i in 0..self.dim() {
            g[(i, i)] += C64::new(-self.gamma[i] * h / 2.0, -h * (eps * self.noise[i] + delta_mod * self.rr[i]));
        }
        g
    }

    fn dyson(&self, dt: f64) -> Result<&Vec<Vec<C64>>> {
        let r = self.dyson.get_or_init(|| {
            let d = self.dim();
            let a = self.generator(dt, 0.0, 0.0);
            let scale = if self.noise_scale > 0.0 { self.noise_scale } else { 1.0 };
            let order = if self.noise_scale > 0.0 { DYSON_ORDER } else { 0 };
            let n = (order + 1) * d;
            let mut big = ComplexMatrix::zeros(n, n);
            for b in 0..=order {
                for i in 0..d {
                    for j in 0..d {
                        big[(b * d + i, b * d + j)] = a[(i, j)];
                    }
                    if b < order {
                        big[(b * d + i, (b + 1) * d + i)] = C64::new(0.0, -self.noise[i] / scale);
                    }
                }
            }
            let e = expm(&big).map_err(|e| e.to_string())?;
            Ok((0..=order)
                .map(|k| {
                    let mut x = Vec::with_capacity(d * d);
                    for i in 0..d {
                        for j in 0..d {
                            x.push(e[(i, k * d + j)]);
                        }
                    }
                    x
                })
                .collect())
        });
        r.as_ref().map_err(|e| Error::InvalidParameter(e.clone()))
    }
}

struct CompiledSegment {
    segment: PulseSegment,
    start: f64,
    duration: f64,
    active_dim: usize,
    /// Real orthogonal change of basis `new = Q · old`, if any.
    transform: Option<ComplexMatrix>,
    blocks: Vec<Block>,
    frame: Vec<f64>,
    groups: Vec<Vec<usize>>,
    inactive_noise: Vec<f64>,
    inactive_gamma: Vec<f64>,
}

/// Swap-symmetric / antisymmetric basis of two identical atoms with `l` levels each.
fn exchange_basis(l: usize) -> ComplexMatrix {
    let n = l * l;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut q = ComplexMatrix::zeros(n, n);
    let mut row = 0;
    for x in 0..l {
        for y in x..l {
            if x == y {
                q[(row, x * l + x)] = ONE;
            } else {
                q[(row, x * l + y)] = C64::new(s, 0.0);
                q[(row, y * l + x)] = C64::new(s, 0.0);
            }
            row += 1;
        }
    }
    for x in 0..l {
        for y in x + 1..l {
            q[(row, x * l + y)] = C64::new(s, 0.0);
            q[(row, y * l + x)] = C64::new(-s, 0.0);
            row += 1;
        }
    }
    q
}

/// Diagonal of `Q diag(x) Qᵀ`, or `None` when that matrix is not diagonal.
fn transform_diag(q: &ComplexMatrix, x: &[f64]) -> Option<Vec<f64>> {
    let m = q.left_diag_mul_cols(&x.iter().map(|&v| C64::new(v, 0.0)).collect::<Vec<_>>()).matmul(&q.adjoint());
    let scale = x.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if i != j && m[(i, j)].norm() > 1e-12 * scale {
                return None;
            }
        }
    }
    Some(m.diag().iter().map(|z| z.re).collect())
}

/// Connected components of the off-diagonal coupling graph, each sorted.
fn components(h: &ComplexMatrix) -> Vec<Vec<usize>> {
    let n = h.rows();
    let tol = 1e-14 * h.max_abs().max(f64::MIN_POSITIVE);
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if h[(i, j)].norm() > tol || h[(j, i)].norm() > tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        match root_of[r] {
            Some(k) => out[k].push(i),
            None => {
                root_of[r] = Some(out.len());
                out.push(vec![i]);
            }
        }
    }
    out
}

impl CompiledSegment {
    fn new(seg: &PulseSegment, reg: &Register, alphas: &Alphas, decay: &DecayConfig, start: f64) -> Result<Self> {
        let active = seg.active_atoms();
        let inactive: Vec<usize> = (0..reg.len()).filter(|a| !active.contains(a)).collect();
        let sub = reg.subregister(&active)?;
        let rest = reg.subregister(&inactive)?;
        let local = seg.localized();

        let mut static_seg = local.clone();
        if let PulseSegment::RydbergPair(p) = &mut static_seg {
            p.modulation = None;
        }
        let h = static_seg.hamiltonian(&sub, 0.0)?;
        let n = sub.dim();
        let noise = noise_diagonal(alphas, &sub);
        let gamma = decay_rates(decay, &sub);
        let (rr, delta_rr) = match &local {
            PulseSegment::RydbergPair(p) => {
                let ra = sub.level_index(0, Level::R)?;
                let rb = sub.level_index(1, Level::R)?;
                let rr: Vec<f64> = (0..n)
                    .map(|i| {
                        let d = sub.digits(i);
                        if d[0] == ra && d[1] == rb {
                            1.0
                        } else {
                            0.0
                        }
                    })
                    .collect();
                (rr, p.delta_rr)
            }
            _ => (vec![0.0; n], 0.0),
        };
        let frame: Vec<f64> = (0..n).map(|i| h[(i, i)].re - delta_rr * rr[i]).collect();

        let mut transform = None;
        let (mut h_t, mut noise_t, mut gamma_t, mut rr_t) = (h.clone(), noise.clone(), gamma.clone(), rr.clone());
        if let PulseSegment::RydbergPair(p) = &local {
            let sets = sub.atoms();
            if p.drive == crate::atoms::DriveMask::Both && sets[0] == sets[1] {
                let q = exchange_basis(sets[0].len());
                if let (Some(nt), Some(gt), Some(rt)) =
                    (transform_diag(&q, &noise), transform_diag(&q, &gamma), transform_diag(&q, &rr))
                {
                    h_t = q.matmul(&h).matmul(&q.adjoint());
                    noise_t = nt;
                    gamma_t = gt;
                    rr_t = rt;
                    transform = Some(q);
                }
            }
        }

        let blocks = components(&h_t)
            .into_iter()
            .map(|idx| {
                let h0 = h_t.select(&idx, &idx);
                let pick = |v: &[f64]| idx.iter().map(|&i| v[i]).collect::<Vec<f64>>();
                let noise = pick(&noise_t);
                let noise_scale = noise.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                Block { h0, gamma: pick(&gamma_t), noise, rr: pick(&rr_t), noise_scale, idx, dyson: OnceLock::new() }
            })
            .collect();

        let dims = reg.dims();
        let mut groups = vec![vec![0usize; n]; rest.dim()];
        for full in 0..reg.dim() {
            let d = reg.digits(full);
            let a = active.iter().fold(0, |acc, &k| acc * dims[k] + d[k]);
            let c = inactive.iter().fold(0, |acc, &k| acc * dims[k] + d[k]);
            groups[c][a] = full;
        }

        Ok(Self {
            segment: local,
            start,
            duration: seg.duration(),
            active_dim: n,
            transform,
            blocks,
            frame,
            groups,
            inactive_noise: noise_diagonal(alphas, &rest),
            inactive_gamma: decay_rates(decay, &rest),
        })
    }

    fn blockade_shift(&self, time: f64) -> f64 {
        match &self.segment {
            PulseSegment::RydbergPair(p) => p.blockade_at(time) - p.delta_rr,
            _ => 0.0,
        }
    }

    /// Block propagators over the whole segment for the given noise path.
    fn block_propagators(&self, path: Option<&OUPath>, dt: f64) -> Result<(Vec<ComplexMatrix>, f64)> {
        let t0 = self.start;
        let t1 = self.start + self.duration;
        let modulated = self.segment.is_time_dependent();
        let quiet = match path {
            None => true,
            Some(p) => {
                let (first, last) = sample_range(t0, t1, dt);
                if last >= p.eps1.len() && self.duration > 0.0 {
                    return Err(Error::PathTooShort { needed: last + 1, available: p.eps1.len() });
                }
                self.duration == 0.0 || p.eps1[first..=last].iter().all(|&x| x == 0.0)
            }
        };
        if quiet && !modulated {
            let props = self
                .blocks
                .iter()
                .map(|b| expm(&b.generator(self.duration, 0.0, 0.0)))
                .collect::<Result<Vec<_>>>()?;
            return Ok((props, 0.0));
        }

        let mut acc: Vec<Vec<C64>> = self.blocks.iter().map(|b| ComplexMatrix::identity(b.dim()).into_vec()).collect();
        let mut tmp: Vec<Vec<C64>> = acc.clone();
        let mut step: Vec<Vec<C64>> = acc.clone();
        let mut eps_integral = 0.0;
        let mut t = t0;
        while t1 - t > GRID_TOL * dt {
            let i = (t / dt + GRID_TOL).floor() as usize;
            let end = ((i + 1) as f64 * dt).min(t1);
            let h = end - t;
            let eps = path.map_or(0.0, |p| p.eps1[i]);
            eps_integral += eps * h;
            let full = (h - dt).abs() <= GRID_TOL * dt;
            let delta_mod = if modulated { self.blockade_shift(t + h / 2.0) } else { 0.0 };
            for (k, b) in self.blocks.iter().enumerate() {
                let d = b.dim();
                let z = eps * dt * b.noise_scale;
                if !modulated && full && z.abs() <= 1.0 {
                    let xs = b.dyson(dt)?;
                    let s = &mut step[k];
                    s.copy_from_slice(&xs[0]);
                    let (mut zk, mut fact) = (1.0, 1.0);
                    for (order, x) in xs.iter().enumerate().skip(1) {
                        zk *= z;
                        fact *= order as f64;
                        if zk.abs() / fact < DYSON_CUTOFF {
                            break;
                        }
                        for (si, xi) in s.iter_mut().zip(x) {
                            *si += xi * zk;
                        }
                    }
                } else {
                    step[k].copy_from_slice(expm(&b.generator(h, eps, delta_mod))?.as_slice());
                }
                matmul_into(&step[k], &acc[k], &mut tmp[k], d, d, d);
                std::mem::swap(&mut acc[k], &mut tmp[k]);
            }
            t = end;
        }
        let props = self
            .blocks
            .iter()
            .zip(acc)
            .map(|(b, m)| ComplexMatrix::from_vec(b.dim(), b.dim(), m))
            .collect::<Result<Vec<_>>>()?;
        Ok((props, eps_integral))
    }

    /// Active-space propagator in the qubit frame and the inactive phases.
    fn operator(&self, path: Option<&OUPath>, dt: f64) -> Result<(ComplexMatrix, Vec<C64>)> {
        let (props, eps_integral) = self.block_propagators(path, dt)?;
        let n = self.active_dim;
        let mut u = ComplexMatrix::zeros(n, n);
        for (b, p) in self.blocks.iter().zip(&props) {
            for (i, &bi) in b.idx.iter().enumerate() {
                for (j, &bj) in b.idx.iter().enumerate() {
                    u[(bi, bj)] = p[(i, j)];
                }
            }
        }
        if let Some(q) = &self.transform {
            u = q.adjoint().matmul(&u).matmul(q);
        }
        let frame: Vec<C64> = self.frame.iter().map(|&f| C64::from_polar(1.0, f * self.duration)).collect();
        let u = u.left_diag_mul(&frame);
        let phases = self
            .inactive_noise
            .iter()
            .zip(&self.inactive_gamma)
            .map(|(&w, &g)| C64::new(-g * self.duration / 2.0, -w * eps_integral).exp())
            .collect();
        Ok((u, phases))
    }

    fn apply(&self, u: &ComplexMatrix, phases: &[C64], cols: &mut ComplexMatrix) {
        let n = self.active_dim;
        let m = cols.cols();
        let mut gathered = vec![ZERO; n];
        for j in 0..m {
            for (group, &ph) in self.groups.iter().zip(phases) {
                let mut any = false;
                for (a, &full) in group.iter().enumerate() {
                    gathered[a] = cols[(full, j)];
                    any |= gathered[a] != ZERO;
                }
                if !any {
                    continue;
                }
                for (a, &full) in group.iter().enumerate() {
                    let row = &u.as_slice()[a * n..(a + 1) * n];
                    let s: C64 = row.iter().zip(&gathered).map(|(x, y)| x * y).sum();
                    cols[(full, j)] = s * ph;
                }
            }
        }
    }
}

/// First and last noise-sample index touched by `[t0, t1)`.
fn sample_range(t0: f64, t1: f64, dt: f64) -> (usize, usize) {
    let first = (t0 / dt + GRID_TOL).floor() as usize;
    let last = ((t1 / dt - GRID_TOL).ceil() as usize).saturating_sub(1).max(first);
    (first, last)
}

/// A schedule compiled for a fixed noise model, decay and step.
pub struct Propagator {
    schedule: Schedule,
    dt: f64,
    segments: Vec<CompiledSegment>,
}

impl Propagator {
    pub fn new(schedule: Schedule, alphas: Alphas, decay: DecayConfig, dt: f64) -> Result<Self> {
        decay.validate()?;
        schedule.validate()?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("propagation step must be positive, got {dt}")));
        }
        let mut start = 0.0;
        let mut segments = Vec::with_capacity(schedule.segments.len());
        for seg in &schedule.segments {
            segments.push(CompiledSegment::new(seg, &schedule.register, &alphas, &decay, start)?);
            start += seg.duration();
        }
        Ok(Self { schedule, dt, segments })
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of noise samples a path must provide.
    pub fn samples_needed(&self) -> usize {
        sample_range(0.0, self.schedule.duration(), self.dt).1 + 1
    }

    /// Evolves the given register-space columns through the whole schedule.
    pub fn evolve(&self, path: Option<&OUPath>, mut cols: ComplexMatrix) -> Result<ComplexMatrix> {
        if cols.rows() != self.schedule.register.dim() {
            return Err(Error::Dimension(format!(
                "{} rows for a {}-dimensional register",
                cols.rows(),
                self.schedule.register.dim()
            )));
        }
        if let Some(p) = path {
            if (p.dt - self.dt).abs() > GRID_TOL * self.dt {
                return Err(Error::InvalidParameter(format!("path step {} differs from engine step {}", p.dt, self.dt)));
            }
        }
        for seg in &self.segments {
            if seg.duration == 0.0 {
                continue;
            }
            let (u, phases) = seg.operator(path, self.dt)?;
            seg.apply(&u, &phases, &mut cols);
        }
        Ok(cols)
    }

    /// Register-space images of the logical basis states (one column each).
    pub fn logical_columns(&self, path: Option<&OUPath>) -> Result<ComplexMatrix> {
        let n = self.schedule.register.dim();
        let cols = ComplexMatrix::from_fn(n, self.schedule.logical_dim(), |i, j| {
            if self.schedule.logical_basis[j] == i {
                ONE
            } else {
                ZERO
            }
        });
        self.evolve(path, cols)
    }

    /// Full register propagator.
    pub fn full(&self, path: Option<&OUPath>) -> Result<ComplexMatrix> {
        self.evolve(path, ComplexMatrix::identity(self.schedule.register.dim()))
    }

    /// Restriction of register columns to the logical basis rows.
    pub fn logical_block(&self, cols: &ComplexMatrix) -> ComplexMatrix {
        let idx = &self.schedule.logical_basis;
        ComplexMatrix::from_fn(idx.len(), cols.cols(), |i, j| cols[(idx[i], j)])
    }

    /// Logical action of the noise-free schedule.
    pub fn ideal_logical_action(&self) -> Result<ComplexMatrix> {
        let cols = self.logical_columns(None)?;
        Ok(self.logical_block(&cols))
    }
}

/// Full register propagator of `schedule` along `path`.
pub fn propagate(schedule: &Schedule, path: &OUPath, decay: &DecayConfig) -> Result<ComplexMatrix> {
    Propagator::new(schedule.clone(), path.alphas, *decay, path.dt)?.full(Some(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::{DephaserPulse, DriveMask, LevelSet, RydbergPulse};
    use crate::effective::dephaser_phase;
    use crate::units::two_pi_mhz;

    fn pair_schedule(segments: Vec<PulseSegment>) -> Schedule {
        let reg = Register::new(vec![LevelSet::with_rydberg(); 2], vec![(0, 1)]).unwrap();
        let basis = vec![reg.state_index(&[Level::Zero, Level::One]).unwrap(), reg.state_index(&[Level::One, Level::Zero]).unwrap()];
        Schedule::new(reg, segments, ComplexMatrix::identity(2), basis).unwrap()
    }

    fn r_pulse(t: f64) -> RydbergPulse {
        RydbergPulse {
            atoms: (0, 1),
            omega0: C64::new(two_pi_mhz(3.91), 0.0),
            omega1: C64::new(two_pi_mhz(1.97), 0.0),
            delta: two_pi_mhz(60.34),
            delta_prime: two_pi_mhz(30.70),
            delta_rr: two_pi_mhz(100.0),
            duration: t,
            modulation: None,
            drive: DriveMask::Both,
        }
    }

    /// Reference: dense per-step exponentials on the whole register.
    fn brute_force(s: &Schedule, path: &OUPath, decay: &DecayConfig) -> ComplexMatrix {
        let reg = &s.register;
        let noise = noise_diagonal(&path.alphas, reg);
        let gamma = decay_rates(decay, reg);
        let mut u = ComplexMatrix::identity(reg.dim());
        let mut start = 0.0;
        for seg in &s.segments {
            let h = seg.hamiltonian(reg, 0.0).unwrap();
            let active = seg.active_atoms();
            let sub = reg.subregister(&active).unwrap();
            let _ = sub;
            let (t0, t1) = (start, start + seg.duration());
            let mut t = t0;
            while t1 - t > 1e-9 * path.dt {
                let i = (t / path.dt + 1e-9).floor() as usize;
                let end = ((i + 1) as f64 * path.dt).min(t1);
                let hh = end - t;
                let mut g = h.scale(-I * hh);
                for k in 0..reg.dim() {
                    g[(k, k)] += C64::new(-gamma[k] * hh / 2.0, -hh * path.eps1[i] * noise[k]);
                }
                u = expm(&g).unwrap().matmul(&u);
                t = end;
            }
            // Qubit frame of the driven atoms.
            let mut frame = vec![0.0; reg.dim()];
            let hd = h.diag();
            if let PulseSegment::RydbergPair(p) = seg {
                for k in 0..reg.dim() {
                    let d = reg.digits(k);
                    let r = (reg.level_index(p.atoms.0, Level::R).unwrap(), reg.level_index(p.atoms.1, Level::R).unwrap());
                    frame[k] = hd[k].re - if d[p.atoms.0] == r.0 && d[p.atoms.1] == r.1 { p.delta_rr } else { 0.0 };
                }
            } else {
                for k in 0..reg.dim() {
                    frame[k] = hd[k].re;
                }
            }
            let f: Vec<C64> = frame.iter().map(|&x| C64::from_polar(1.0, x * seg.duration())).collect();
            u = u.left_diag_mul(&f);
            start = t1;
        }
        u
    }

    #[test]
    fn idle_is_identity() {
        let s = pair_schedule(vec![PulseSegment::Idle { duration: 3e-6 }]);
        let p = Propagator::new(s, Alphas::default(), DecayConfig::none(), 1e-8).unwrap();
        assert!(p.full(None).unwrap().max_abs_diff(&ComplexMatrix::identity(9)) < 1e-15);
    }

    #[test]
    fn dephaser_phase_on_logical_one() {
        let rabi = two_pi_mhz(5.0);
        let detuning = two_pi_mhz(-49.81);
        let (phi, t) = dephaser_phase(50, rabi, detuning);
        let s = pair_schedule(vec![PulseSegment::Dephaser(DephaserPulse { atom: 0, rabi, detuning, duration: t })]);
        let p = Propagator::new(s, Alphas::default(), DecayConfig::none(), 1e-8).unwrap();
        let a = p.ideal_logical_action().unwrap();
        let got = (a[(1, 1)] / a[(0, 0)]).arg();
        assert!((got - phi).abs() < 1e-6, "{got} vs {phi}");
        let zero = OUPath::zero(1e-8, p.samples_needed());
        let stepped = p.logical_block(&p.logical_columns(Some(&zero)).unwrap());
        assert!(stepped.max_abs_diff(&a) < 1e-15);
    }

    #[test]
    fn matches_dense_reference_with_noise_and_decay() {
        let segs = vec![
            PulseSegment::Dephaser(DephaserPulse { atom: 1, rabi: two_pi_mhz(5.0), detuning: two_pi_mhz(-20.0), duration: 0.137e-6 }),
            PulseSegment::RydbergPair(r_pulse(0.2533e-6)),
            PulseSegment::Idle { duration: 0.05e-6 },
        ];
        let s = pair_schedule(segs);
        let dt = 1e-8;
        let decay = DecayConfig::new(0.0, two_pi_mhz(0.1)).unwrap();
        let p = Propagator::new(s.clone(), Alphas::default(), decay, dt).unwrap();
        let n = p.samples_needed();
        let eps: Vec<f64> = (0..n).map(|i| 3e5 * ((i as f64) * 0.7).sin()).collect();
        let path = OUPath { dt, eps1: eps, alphas: Alphas::default() };
        let fast = p.full(Some(&path)).unwrap();
        let slow = brute_force(&s, &path, &decay);
        assert!(fast.max_abs_diff(&slow) < 1e-11, "{}", fast.max_abs_diff(&slow));
    }

    #[test]
    fn large_noise_falls_back_to_exponential() {
        let s = pair_schedule(vec![PulseSegment::RydbergPair(r_pulse(0.1e-6))]);
        let dt = 1e-8;
        let p = Propagator::new(s.clone(), Alphas::default(), DecayConfig::none(), dt).unwrap();
        let path = OUPath { dt, eps1: vec![2e8; p.samples_needed()], alphas: Alphas::default() };
        let fast = p.full(Some(&path)).unwrap();
        assert!(fast.max_abs_diff(&brute_force(&s, &path, &DecayConfig::none())) < 1e-11);
        assert!(fast.is_unitary(1e-10));
    }

    #[test]
    fn short_path_is_rejected() {
        let s = pair_schedule(vec![PulseSegment::RydbergPair(r_pulse(1e-6))]);
        let p = Propagator::new(s, Alphas::default(), DecayConfig::none(), 1e-8).unwrap();
        let path = OUPath { dt: 1e-8, eps1: vec![1.0; 10], alphas: Alphas::default() };
        assert!(matches!(p.full(Some(&path)), Err(Error::PathTooShort { .. })));
    }

    #[test]
    fn exchange_basis_is_orthogonal() {
        let q = exchange_basis(3);
        assert!(q.is_unitary(1e-15));
    }
}
