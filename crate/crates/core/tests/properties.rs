use neutral_dfs::atoms::{
    decay_term, dephaser_hamiltonian, noise_hamiltonian, raman_hamiltonian, rydberg_pair_hamiltonian, DephaserPulse,
    DriveMask, RamanPulse, RydbergPulse,
};
use neutral_dfs::effective::{effective_params, u_eff};
use neutral_dfs::engine::{average_compiled, logical_superoperator, NoiseAverage, Propagator};
use neutral_dfs::gates::{recipe_t, recipe_unprotected, ProtectedParams, UnprotectedKind};
use neutral_dfs::noise::{path_variance, sample_path, OUConfig, OUPath};
use neutral_dfs::numkit::{expm, kron, norm, random_state, Rng, ZERO};
use neutral_dfs::optimizer::{minimize, SearchOptions};
use neutral_dfs::units::{two_pi_khz, two_pi_mhz};
use neutral_dfs::{Alphas, ComplexMatrix, DecayConfig, Level, LevelSet, PulseSegment, Register, Schedule, C64};
use proptest::prelude::*;

fn cplx() -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| C64::new(a, b))
}

fn matrix(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    proptest::collection::vec(cplx(), n * n).prop_map(move |v| ComplexMatrix::from_vec(n, n, v).unwrap())
}

/// Gaussian-integer entries, so products are exact in floating point.
fn int_matrix(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    proptest::collection::vec((-50i32..50, -50i32..50), n * n).prop_map(move |v| {
        ComplexMatrix::from_vec(n, n, v.into_iter().map(|(a, b)| C64::new(a.into(), b.into())).collect()).unwrap()
    })
}

fn identity_error(m: &ComplexMatrix) -> f64 {
    m.max_abs_diff(&ComplexMatrix::identity(m.rows()))
}

fn pair_register() -> Register {
    Register::new(vec![LevelSet::with_rydberg(); 2], vec![(0, 1)]).unwrap()
}

fn pulse(o0: C64, o1: C64, d: f64, dp: f64, drr: f64, t: f64) -> RydbergPulse {
    RydbergPulse {
        atoms: (0, 1),
        omega0: o0 * two_pi_mhz(1.0),
        omega1: o1 * two_pi_mhz(1.0),
        delta: two_pi_mhz(d),
        delta_prime: two_pi_mhz(dp),
        delta_rr: two_pi_mhz(drr),
        duration: t,
        modulation: None,
        drive: DriveMask::Both,
    }
}

/// Idle-pair logical basis `|01⟩, |10⟩` with the identity as target.
fn pair_schedule(segments: Vec<PulseSegment>) -> Schedule {
    let reg = pair_register();
    let basis = vec![
        reg.state_index(&[Level::Zero, Level::One]).unwrap(),
        reg.state_index(&[Level::One, Level::Zero]).unwrap(),
    ];
    Schedule::new(reg, segments, ComplexMatrix::identity(2), basis).unwrap()
}

fn noisy_path(prop: &Propagator, variance: f64, seed: u64, alphas: Alphas) -> OUPath {
    let mut cfg = OUConfig::from_variance(1e-6, variance, prop.samples_needed() - 1, seed);
    cfg.dt = prop.dt();
    sample_path(&cfg).unwrap().with_alphas(alphas)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn expm_inverse(a in matrix(4), scale in 0.0..1.25f64) {
        let a = a.scale_real(scale);
        let prod = expm(&a).unwrap().matmul(&expm(&a.scale_real(-1.0)).unwrap());
        prop_assert!(identity_error(&prod) < 1e-10);
    }

    #[test]
    fn expm_of_skew_hermitian_is_unitary(a in matrix(5), scale in 0.0..3.0f64) {
        let h = (&a + &a.adjoint()).scale_real(0.5 * scale);
        let u = expm(&h.scale(C64::new(0.0, -1.0))).unwrap();
        prop_assert!(identity_error(&u.adjoint().matmul(&u)) < 1e-10);
    }

    #[test]
    fn kron_is_associative(a in int_matrix(2), b in int_matrix(2), c in int_matrix(3)) {
        prop_assert_eq!(kron(&kron(&a, &b), &c), kron(&a, &kron(&b, &c)));
    }

    #[test]
    fn rng_streams_repeat(seed in any::<u64>(), stream in any::<u64>()) {
        let mut r1 = Rng::new(seed, stream);
        let mut r2 = Rng::new(seed, stream);
        for _ in 0..64 {
            prop_assert_eq!(r1.gaussian().to_bits(), r2.gaussian().to_bits());
        }
    }

    #[test]
    fn drive_hamiltonians_are_hermitian(
        o0 in cplx(), o1 in cplx(), d in -80.0..80.0f64, dp in -40.0..40.0f64, drr in 10.0..200.0f64,
        rabi in 0.5..10.0f64, det in -60.0..60.0f64, phase in 0.0..6.3f64,
    ) {
        let reg = Register::new(vec![LevelSet::full(), LevelSet::with_rydberg()], vec![]).unwrap();
        let h = rydberg_pair_hamiltonian(&pulse(o0, o1, d, dp, drr, 1e-6), &reg, 0.0).unwrap();
        prop_assert!(h.is_hermitian(1e-12 * h.max_abs().max(1.0)));
        let dp = DephaserPulse { atom: 0, rabi: two_pi_mhz(rabi), detuning: two_pi_mhz(det), duration: 1e-6 };
        let h = dephaser_hamiltonian(&dp, &reg).unwrap();
        prop_assert!(h.is_hermitian(1e-12 * h.max_abs().max(1.0)));
        let rp = RamanPulse { atom: 0, rabi_leg: two_pi_mhz(rabi), phase, detuning: two_pi_mhz(det), duration: 1e-6 };
        let h = raman_hamiltonian(&rp, &reg).unwrap();
        prop_assert!(h.is_hermitian(1e-12 * h.max_abs().max(1.0)));
    }

    #[test]
    fn decay_term_is_anti_hermitian(ge in 0.0..1e5f64, gr in 0.0..1e5f64) {
        let reg = Register::with_distinct_excited(vec![LevelSet::full(); 2], vec![]).unwrap();
        let d = decay_term(&DecayConfig::new(ge, gr).unwrap(), &reg).unwrap();
        prop_assert!(d.is_anti_hermitian(1e-12 * d.max_abs().max(1.0)));
    }

    #[test]
    fn noise_commutes_with_diagonals(eps in -1e6..1e6f64, ae in -3.0..3.0f64, ar in -3.0..3.0f64, diag in proptest::collection::vec(-5.0..5.0f64, 16)) {
        let reg = Register::with_distinct_excited(vec![LevelSet::full(); 2], vec![]).unwrap();
        let n = noise_hamiltonian(eps, ae, ar, &reg);
        let d = ComplexMatrix::from_real_diag(&diag);
        prop_assert!((&n.matmul(&d) - &d.matmul(&n)).max_abs() == 0.0);
    }

    #[test]
    fn qubit_pair_noise_is_scalar_on_dfs(eps in -1e6..1e6f64, ae in -3.0..3.0f64, ar in -3.0..3.0f64) {
        let reg = Register::qubits(2);
        let n = noise_hamiltonian(eps, ae, ar, &reg);
        let (a, b) = (reg.state_index(&[Level::Zero, Level::One]).unwrap(), reg.state_index(&[Level::One, Level::Zero]).unwrap());
        prop_assert_eq!(n[(a, b)], ZERO);
        prop_assert!((n[(a, a)] - n[(b, b)]).norm() <= 1e-12 * n[(a, a)].norm().max(1.0));
    }

    #[test]
    fn u_eff_is_unitary(t in 0.0..1e-3f64, w in proptest::collection::vec(-1e7..1e7f64, 5)) {
        let ep = neutral_dfs::effective::EffectiveParams { omega_r: w[0], delta_0: w[1], delta_00: w[2], delta_11: w[3] };
        let u = u_eff(t, &ep, w[4]);
        prop_assert!(u.is_unitary(1e-12));
    }

    #[test]
    fn swap_frequency_ignores_drive_phases(
        a0 in 1.0..5.0f64, a1 in 1.0..5.0f64, p0 in 0.0..6.3f64, p1 in 0.0..6.3f64,
        d in 40.0..80.0f64, dp in 20.0..35.0f64,
    ) {
        let e = |o0: C64, o1: C64| effective_params(o0, o1, two_pi_mhz(d), two_pi_mhz(dp), two_pi_mhz(100.0)).unwrap();
        let real = e(C64::new(two_pi_mhz(a0), 0.0), C64::new(two_pi_mhz(a1), 0.0));
        let phased = e(C64::from_polar(two_pi_mhz(a0), p0), C64::from_polar(two_pi_mhz(a1), p1));
        prop_assert!((real.omega_r - phased.omega_r).abs() <= 1e-12 * real.omega_r.abs());
    }

    #[test]
    fn effective_params_scale_linearly(s in 0.1..10.0f64, a0 in 1.0..5.0f64, a1 in 1.0..5.0f64, d in 40.0..80.0f64, dp in 20.0..35.0f64) {
        let e = |k: f64| effective_params(
            C64::new(k * two_pi_mhz(a0), 0.0), C64::new(k * two_pi_mhz(a1), 0.0),
            k * two_pi_mhz(d), k * two_pi_mhz(dp), k * two_pi_mhz(100.0),
        ).unwrap();
        let (base, scaled) = (e(1.0), e(s));
        for (x, y) in [
            (base.omega_r, scaled.omega_r), (base.delta_0, scaled.delta_0),
            (base.delta_00, scaled.delta_00), (base.delta_11, scaled.delta_11),
        ] {
            prop_assert!((s * x - y).abs() <= 1e-10 * y.abs().max(1.0));
        }
    }

    #[test]
    fn channels_are_exact_multiples(seed in any::<u64>(), ae in -3.0..3.0f64, ar in -3.0..3.0f64) {
        let path = sample_path(&OUConfig::from_variance(1e-6, 1e10, 500, seed)).unwrap()
            .with_alphas(Alphas { alpha_e: ae, alpha_r: ar });
        for ((e1, ee), er) in path.eps1.iter().zip(path.eps_e()).zip(path.eps_r()) {
            prop_assert_eq!(ee.to_bits(), (ae * e1).to_bits());
            prop_assert_eq!(er.to_bits(), (ar * e1).to_bits());
        }
    }

    #[test]
    fn paths_repeat(seed in any::<u64>(), stream in any::<u64>()) {
        let cfg = OUConfig::from_variance(1e-6, 1e9, 300, seed).with_stream(stream);
        prop_assert_eq!(sample_path(&cfg).unwrap(), sample_path(&cfg).unwrap());
    }

    #[test]
    fn search_never_worsens_and_history_is_monotone(x0 in proptest::collection::vec(-2.0..2.0f64, 3), seed in proptest::collection::vec(-2.0..2.0f64, 3)) {
        let f = |x: &[f64]| -> neutral_dfs::Result<f64> {
            Ok(x.iter().zip(&x0).map(|(a, b)| (a - b).powi(2) + (3.0 * a).sin().powi(2)).sum())
        };
        let r = minimize(&f, &seed, &[-3.0; 3], &[3.0; 3], 200, &SearchOptions::default()).unwrap();
        prop_assert!(r.value <= r.seed_value);
        prop_assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(r.evaluations <= 200);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn norm_never_grows_under_decay(
        o0 in 1.0..4.0f64, o1 in 1.0..4.0f64, d in 20.0..60.0f64, dp in 5.0..30.0f64,
        ge in 0.0..5e4f64, gr in 0.0..5e4f64, seed in any::<u64>(),
    ) {
        let reg = pair_register();
        let mut rng = Rng::new(seed, 0);
        let psi = random_state(reg.dim(), &mut rng);
        let decay = DecayConfig::new(ge, gr).unwrap();
        let mut last = 1.0;
        for k in 1..=5 {
            let p = pulse(C64::new(o0, 0.0), C64::new(o1, 0.0), d, dp, 100.0, 0.4e-6 * k as f64);
            let prop = Propagator::new(pair_schedule(vec![PulseSegment::RydbergPair(p)]), Alphas::default(), decay, 1e-8).unwrap();
            let path = noisy_path(&prop, 1e10, seed, Alphas::default());
            let out = prop.full(Some(&path)).unwrap().mat_vec(&psi);
            let n = norm(&out);
            prop_assert!(n <= last + 1e-12, "norm grew from {last} to {n}");
            last = n;
        }
    }

    #[test]
    fn zero_decay_propagators_are_unitary(
        o0 in 1.0..4.0f64, o1 in 1.0..4.0f64, d in 20.0..60.0f64, dp in 5.0..30.0f64, seed in any::<u64>(),
    ) {
        let p = pulse(C64::new(o0, 0.0), C64::new(o1, 0.0), d, dp, 100.0, 3e-6);
        let dph = DephaserPulse { atom: 1, rabi: two_pi_mhz(5.0), detuning: two_pi_mhz(-30.0), duration: 0.7e-6 };
        let sched = pair_schedule(vec![PulseSegment::RydbergPair(p), PulseSegment::Dephaser(dph)]);
        let prop = Propagator::new(sched, Alphas::default(), DecayConfig::none(), 1e-8).unwrap();
        let path = noisy_path(&prop, 1e11, seed, Alphas::default());
        prop_assert!(prop.full(Some(&path)).unwrap().is_unitary(1e-9));
    }

    #[test]
    fn trajectory_order_does_not_matter(seed in any::<u64>(), n_traj in 2usize..12) {
        let p = pulse(C64::new(3.0, 0.0), C64::new(2.0, 0.0), 60.0, 30.0, 100.0, 2e-6);
        let decay = DecayConfig::new(0.0, two_pi_khz(5.0)).unwrap();
        let prop = Propagator::new(pair_schedule(vec![PulseSegment::RydbergPair(p)]), Alphas::default(), decay, 1e-8).unwrap();
        let mut cfg = OUConfig::from_variance(1e-6, 1e11, 0, seed);
        cfg.dt = prop.dt();
        let avg = average_compiled(&prop, &cfg, Alphas::default(), n_traj).unwrap();
        cfg.steps = prop.samples_needed() - 1;
        let mut blocks: Vec<ComplexMatrix> = (0..n_traj as u64).rev().map(|j| {
            let path = sample_path(&cfg.with_stream(j)).unwrap().with_alphas(Alphas::default());
            prop.logical_block(&prop.logical_columns(Some(&path)).unwrap())
        }).collect();
        let reversed = logical_superoperator(&blocks);
        prop_assert!(reversed.max_abs_diff(&avg.logical) <= 1e-15);
        blocks.reverse();
        prop_assert_eq!(&blocks, &avg.blocks);
        prop_assert!(NoiseAverage::from_blocks(blocks).unwrap().logical.max_abs_diff(&avg.logical) == 0.0);
    }
}

#[test]
fn ou_path_is_stationary() {
    let n = 1_000_000;
    let tau = 1e-6;
    let cfg = OUConfig::from_variance(tau, 1e10, n, 17);
    let path = sample_path(&cfg).unwrap();
    let half = |s: &[f64]| path_variance(&OUPath { dt: path.dt, eps1: s.to_vec(), alphas: path.alphas });
    let (a, b) = (half(&path.eps1[..n / 2]), half(&path.eps1[n / 2..]));
    // Relative sd of a variance estimate from N correlated samples is about sqrt(4τ/(N·dt)).
    let sd = (4.0 * tau / (cfg.dt * (n / 2) as f64)).sqrt();
    assert!((a / b - 1.0).abs() < 3.0 * std::f64::consts::SQRT_2 * sd, "{a} vs {b}");
}

#[test]
fn t_to_the_eighth_is_identity() {
    let t = recipe_t(&ProtectedParams::caption()).unwrap();
    let a = t.ideal_logical_action().unwrap();
    let mut p = ComplexMatrix::identity(2);
    for _ in 0..8 {
        p = p.matmul(&a);
    }
    let phase = p[(0, 0)] / p[(0, 0)].norm();
    assert!(p.max_abs_diff(&ComplexMatrix::identity(2).scale(phase)) < 1e-6);
}

#[test]
fn exact_constructions_pass_the_global_phase_certificate() {
    let t = recipe_t(&ProtectedParams::caption()).unwrap();
    assert!(t.global_phase_deviation().unwrap() < 1e-3);
    assert!(t.ideal_leakage().unwrap() < 1e-3);
    // Deep blockade: the residual phase of the imperfect blockade vanishes.
    let cz = recipe_unprotected(UnprotectedKind::Cz, two_pi_mhz(0.5), two_pi_mhz(20_000.0)).unwrap();
    assert!(cz.global_phase_deviation().unwrap() < 1e-3);
    assert!(cz.ideal_leakage().unwrap() < 1e-3);
}

#[test]
fn logical_action_is_unitary_without_rydberg_population() {
    let t = recipe_t(&ProtectedParams::caption()).unwrap();
    let a = t.ideal_logical_action().unwrap();
    assert!(a.is_unitary(1e-9));
    assert_eq!(a[(0, 1)].norm() + a[(1, 0)].norm(), 0.0);
}
