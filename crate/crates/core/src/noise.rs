//! Ornstein-Uhlenbeck dephasing paths.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::atoms::Alphas;
use crate::error::{Error, Result};
use crate::numkit::Rng;

/// Parameters of one sampled path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OUConfig {
    /// Relaxation time τ (s).
    pub tau: f64,
    /// Diffusion constant c ((rad/s)²/s).
    pub c: f64,
    pub dt: f64,
    pub steps: usize,
    pub seed: u64,
    pub stream: u64,
    /// Start from ε₁ = 0 instead of the stationary distribution.
    #[serde(default)]
    pub cold_start: bool,
}

impl OUConfig {
    /// Configuration with stationary variance `variance` = τc/2 and the default step τ/100.
    pub fn from_variance(tau: f64, variance: f64, steps: usize, seed: u64) -> Self {
        Self { tau, c: 2.0 * variance / tau, dt: tau / 100.0, steps, seed, stream: 0, cold_start: false }
    }

    pub fn stationary_variance(&self) -> f64 {
        self.tau * self.c / 2.0
    }

    pub fn with_stream(&self, stream: u64) -> Self {
        Self { stream, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidParameter(format!("OU relaxation time must be positive, got {}", self.tau)));
        }
        if !(self.c >= 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidParameter(format!("OU diffusion constant must be non-negative, got {}", self.c)));
        }
        if !(self.dt > 0.0 && self.dt <= self.tau / 10.0 * (1.0 + 1e-12)) {
            return Err(Error::InvalidParameter(format!("OU step {} must be positive and at most τ/10 = {}", self.dt, self.tau / 10.0)));
        }
        Ok(())
    }
}

/// A realization of `ε₁(t)` sampled at `t_i = i·dt`, held constant over each
/// step, together with the factors that derive `ε_e` and `ε_r` from it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OUPath {
    pub dt: f64,
    pub eps1: Vec<f64>,
    #[serde(default)]
    pub alphas: Alphas,
}

impl OUPath {
    /// Identically zero path of `steps + 1` samples.
    pub fn zero(dt: f64, steps: usize) -> Self {
        Self { dt, eps1: vec![0.0; steps + 1], alphas: Alphas::default() }
    }

    pub fn with_alphas(self, alphas: Alphas) -> Self {
        Self { alphas, ..self }
    }

    pub fn eps_e(&self) -> Vec<f64> {
        self.channel(self.alphas.alpha_e)
    }

    pub fn eps_r(&self) -> Vec<f64> {
        self.channel(self.alphas.alpha_r)
    }

    pub fn is_zero(&self) -> bool {
        self.eps1.iter().all(|&x| x == 0.0)
    }

    pub fn len(&self) -> usize {
        self.eps1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps1.is_empty()
    }

    /// Time span covered when each sample holds for one step.
    pub fn duration(&self) -> f64 {
        self.eps1.len() as f64 * self.dt
    }

    /// Correlated channel `α·ε₁`, e.g. `ε_e` or `ε_r`.
    pub fn channel(&self, alpha: f64) -> Vec<f64> {
        self.eps1.iter().map(|x| alpha * x).collect()
    }

    /// Writes `time_s,eps1_rad_s` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["time_s", "eps1_rad_s"])?;
        for (i, x) in self.eps1.iter().enumerate() {
            w.write_record([(i as f64 * self.dt).to_string(), x.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Samples a path with the Euler-Maruyama update
/// `ε(t+dt) = ε(t) − ε(t)·dt/τ + √c·G·√dt`.
///
/// `ε₁[0]` is drawn from the stationary distribution `N(0, τc/2)` unless the
/// configuration asks for a cold start.
pub fn sample_path(cfg: &OUConfig) -> Result<OUPath> {
    cfg.validate()?;
    let mut rng = Rng::new(cfg.seed, cfg.stream);
    let start = if cfg.cold_start { 0.0 } else { cfg.stationary_variance().sqrt() * rng.gaussian() };
    Ok(evolve(cfg, start, &mut rng))
}

/// Like [`sample_path`] but starting from a given `ε₁[0]`.
pub fn sample_path_from(cfg: &OUConfig, start: f64) -> Result<OUPath> {
    cfg.validate()?;
    let mut rng = Rng::new(cfg.seed, cfg.stream);
    Ok(evolve(cfg, start, &mut rng))
}

fn evolve(cfg: &OUConfig, start: f64, rng: &mut Rng) -> OUPath {
    let mut eps = Vec::with_capacity(cfg.steps + 1);
    eps.push(start);
    let decay = 1.0 - cfg.dt / cfg.tau;
    let kick = (cfg.c * cfg.dt).sqrt();
    let mut x = start;
    for _ in 0..cfg.steps {
        let g = rng.gaussian();
        x = x * decay + kick * g;
        eps.push(x);
    }
    OUPath { dt: cfg.dt, eps1: eps, alphas: Alphas::default() }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathStats {
    pub variance: f64,
    pub autocorr_time: f64,
}

pub const MIN_STATS_SAMPLES: usize = 1000;

/// Sample variance about the path mean.
pub fn path_variance(path: &OUPath) -> f64 {
    let n = path.eps1.len() as f64;
    if n == 0.0 {
        return 0.0;
    }
    let mean = path.eps1.iter().sum::<f64>() / n;
    path.eps1.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n
}

/// Empirical variance and exponential-fit correlation time.
///
/// The correlation time comes from a least-squares fit of `ln ρ(lag) = −lag·dt/τ`
/// through the origin, using lags while `ρ > 0.1`.
pub fn path_stats(path: &OUPath) -> Result<PathStats> {
    let n = path.eps1.len();
    if n < MIN_STATS_SAMPLES {
        return Err(Error::PathTooShort { needed: MIN_STATS_SAMPLES, available: n });
    }
    let mean = path.eps1.iter().sum::<f64>() / n as f64;
    let x: Vec<f64> = path.eps1.iter().map(|v| v - mean).collect();
    let c0 = x.iter().map(|v| v * v).sum::<f64>() / n as f64;
    if c0 == 0.0 || !c0.is_finite() {
        return Err(Error::DegeneratePath("constant path has no correlation time".into()));
    }
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for lag in 1..n / 10 {
        let c = x[..n - lag].iter().zip(&x[lag..]).map(|(a, b)| a * b).sum::<f64>() / (n - lag) as f64;
        let rho = c / c0;
        if rho <= 0.1 {
            break;
        }
        let t = lag as f64 * path.dt;
        sxy += t * rho.ln();
        sxx += t * t;
    }
    if sxx == 0.0 || sxy >= 0.0 {
        return Err(Error::DegeneratePath("correlation falls below 0.1 within one step".into()));
    }
    Ok(PathStats { variance: c0, autocorr_time: -sxx / sxy })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn cfg(steps: usize) -> OUConfig {
        OUConfig::from_variance(1e-6, (TAU * 50e3).powi(2), steps, 5)
    }

    #[test]
    fn zero_diffusion_is_deterministic() {
        let mut c = cfg(500);
        c.c = 0.0;
        c.cold_start = true;
        assert!(sample_path(&c).unwrap().eps1.iter().all(|&x| x == 0.0));
        let x0 = 3.5;
        let p = sample_path_from(&c, x0).unwrap();
        for (i, &x) in p.eps1.iter().enumerate() {
            assert!((x - x0 * (1.0 - c.dt / c.tau).powi(i as i32)).abs() < 1e-12);
        }
        assert!((p.eps1[100] - x0 * (-1.0f64).exp()).abs() < 0.02 * x0);
    }

    #[test]
    fn length_and_reproducibility() {
        let c = cfg(1000);
        let a = sample_path(&c).unwrap();
        assert_eq!(a.len(), 1001);
        let b = sample_path(&c).unwrap();
        assert!(a.eps1.iter().zip(&b.eps1).all(|(x, y)| x.to_bits() == y.to_bits()));
        assert_ne!(sample_path(&c.with_stream(1)).unwrap().eps1, a.eps1);
    }

    #[test]
    fn coarse_step_rejected() {
        let mut c = cfg(10);
        c.dt = c.tau / 5.0;
        assert!(sample_path(&c).is_err());
    }

    #[test]
    fn channels_are_exact_multiples() {
        let p = sample_path(&cfg(100)).unwrap();
        let e = p.channel(1.5);
        assert!(p.eps1.iter().zip(&e).all(|(x, y)| *y == 1.5 * x));
    }

    #[test]
    fn stats_preconditions() {
        let zero = OUPath::zero(1e-8, 5000);
        assert_eq!(path_variance(&zero), 0.0);
        assert!(matches!(path_stats(&zero), Err(Error::DegeneratePath(_))));
        assert!(matches!(path_stats(&OUPath::zero(1e-8, 10)), Err(Error::PathTooShort { .. })));
    }

    #[test]
    fn csv_export() {
        let p = sample_path(&cfg(3)).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("time_s,eps1_rad_s\n0,"));
        assert_eq!(text.lines().count(), 5);
    }
}
