//! Experiment configuration: a versioned JSON document plus named presets.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::atoms::{Alphas, BlockadeModulation, DecayConfig};
use crate::error::{Error, Result};
use crate::gates::ProtectedParams;
use crate::optimizer::PhaseGateTuning;
use crate::units::two_pi_khz;

pub const SCHEMA_VERSION: u32 = 1;

/// Gates an experiment can run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GateName {
    T,
    H,
    #[serde(rename = "U_phase")]
    UPhase,
    #[serde(rename = "CNOT")]
    Cnot,
    #[serde(rename = "H_unprotected")]
    HUnprotected,
    #[serde(rename = "CNOT_unprotected")]
    CnotUnprotected,
    #[serde(rename = "CZ_unprotected")]
    CzUnprotected,
}

impl GateName {
    pub const ALL: [GateName; 7] = [
        GateName::T,
        GateName::H,
        GateName::UPhase,
        GateName::Cnot,
        GateName::HUnprotected,
        GateName::CnotUnprotected,
        GateName::CzUnprotected,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GateName::T => "T",
            GateName::H => "H",
            GateName::UPhase => "U_phase",
            GateName::Cnot => "CNOT",
            GateName::HUnprotected => "H_unprotected",
            GateName::CnotUnprotected => "CNOT_unprotected",
            GateName::CzUnprotected => "CZ_unprotected",
        }
    }

    pub fn is_protected(self) -> bool {
        matches!(self, GateName::T | GateName::H | GateName::UPhase | GateName::Cnot)
    }
}

impl fmt::Display for GateName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for GateName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GateName::ALL
            .into_iter()
            .find(|g| g.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown gate '{s}'")))
    }
}

/// How recipes are obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecipeSource {
    /// Durations as printed next to the figures.
    #[default]
    Caption,
    /// Durations and phase-gate parameters solved from the effective theory.
    Solve,
    /// Solved, then refined against the full Hamiltonian.
    Refine,
    /// Loaded from recipe JSON files listed in `recipe_files`.
    File,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSweep {
    /// Stationary variances τc/2 ((rad/s)²).
    pub tau_c_over_2: Vec<f64>,
    /// OU relaxation time (s).
    pub tau_ou: f64,
    pub alpha_e: f64,
    pub alpha_r: f64,
}

impl NoiseSweep {
    pub fn alphas(&self) -> Alphas {
        Alphas { alpha_e: self.alpha_e, alpha_r: self.alpha_r }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    /// Seed of the random part of the two-qubit input set.
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulationSpec {
    #[serde(default = "ModulationSpec::default_depths")]
    pub depths: Vec<f64>,
    /// Modulation frequency f_m (Hz). Required by `run_modulation`.
    #[serde(default)]
    pub frequency_hz: Option<f64>,
    #[serde(default)]
    pub phase: f64,
    /// Noise point of the modulation scan; the first sweep value when absent.
    #[serde(default)]
    pub tau_c_over_2: Option<f64>,
}

impl ModulationSpec {
    fn default_depths() -> Vec<f64> {
        vec![0.0, BlockadeModulation::DEFAULT_DEPTH]
    }
}

impl Default for ModulationSpec {
    fn default() -> Self {
        Self { depths: Self::default_depths(), frequency_hz: None, phase: 0.0, tau_c_over_2: None }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default)]
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub svg: Option<PathBuf>,
}

/// Drive of the unprotected baseline (rad/s).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnprotectedDrive {
    pub omega: f64,
    pub delta_rr: f64,
}

impl Default for UnprotectedDrive {
    fn default() -> Self {
        let (omega, delta_rr) = crate::gates::unprotected_caption();
        Self { omega, delta_rr }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuningSpec {
    #[serde(default = "TuningSpec::default_h_budget")]
    pub h_budget: usize,
    #[serde(default)]
    pub phase_gate: PhaseGateTuning,
}

impl TuningSpec {
    pub const DEFAULT_H_BUDGET: usize = 800;

    fn default_h_budget() -> usize {
        Self::DEFAULT_H_BUDGET
    }
}

impl Default for TuningSpec {
    fn default() -> Self {
        Self { h_budget: Self::DEFAULT_H_BUDGET, phase_gate: PhaseGateTuning::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub gates: Vec<GateName>,
    #[serde(default)]
    pub recipe_source: RecipeSource,
    /// Recipe JSON per gate name, used with the `file` source.
    #[serde(default)]
    pub recipe_files: BTreeMap<GateName, PathBuf>,
    pub noise: NoiseSweep,
    #[serde(default = "DecayConfig::none")]
    pub decay: DecayConfig,
    pub n_traj: usize,
    pub seed: u64,
    /// Integration step (s); τ_ou/100 when absent.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub states: StateSpec,
    #[serde(default)]
    pub modulation: Option<ModulationSpec>,
    #[serde(default)]
    pub output: OutputPaths,
    /// Protected-gate drives; the caption set when absent.
    #[serde(default)]
    pub protected: Option<ProtectedParams>,
    #[serde(default)]
    pub unprotected: UnprotectedDrive,
    #[serde(default)]
    pub tuning: TuningSpec,
}

/// Log-spaced grid of `n` points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect(),
    }
}

/// Default noise grid of the figure presets ((rad/s)²).
pub const FIGURE_GRID: (f64, f64, usize) = (1e9, 1e10, 8);

pub const PRESETS: [&str; 3] = ["fig-protected", "fig-protected-se", "fig-unprotected"];

impl ExperimentConfig {
    /// A named preset reproducing one of the published figure setups.
    pub fn preset(name: &str) -> Result<Self> {
        let (lo, hi, n) = FIGURE_GRID;
        let mut cfg = ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            gates: vec![GateName::T, GateName::H, GateName::UPhase, GateName::Cnot],
            recipe_source: RecipeSource::Refine,
            recipe_files: BTreeMap::new(),
            noise: NoiseSweep { tau_c_over_2: log_grid(lo, hi, n), tau_ou: 1e-6, alpha_e: 1.5, alpha_r: 1.5 },
            decay: DecayConfig::none(),
            n_traj: 200,
            seed: 1,
            dt: None,
            states: StateSpec::default(),
            modulation: None,
            output: OutputPaths::default(),
            protected: None,
            unprotected: UnprotectedDrive::default(),
            tuning: TuningSpec::default(),
        };
        match name {
            "fig-protected" => {}
            "fig-protected-se" => {
                let g = two_pi_khz(5.0);
                cfg.decay = DecayConfig { gamma_e: g, gamma_r: g };
            }
            "fig-unprotected" => {
                cfg.gates = vec![GateName::HUnprotected, GateName::CnotUnprotected];
                cfg.recipe_source = RecipeSource::Caption;
            }
            _ => return Err(Error::Config(format!("unknown preset '{name}' (known: {})", PRESETS.join(", ")))),
        }
        Ok(cfg)
    }

    /// Parses and validates a config document. Errors name the offending line.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if let Err((key, msg)) = cfg.check() {
            return Err(Error::Config(match key_line(text, key) {
                Some(line) => format!("{msg} at line {line}"),
                None => msg,
            }));
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.check().map_err(|(_, msg)| Error::Config(msg))
    }

    pub fn protected_params(&self) -> ProtectedParams {
        self.protected.clone().unwrap_or_else(ProtectedParams::caption)
    }

    /// Integration step: the override, or τ_ou/100.
    pub fn step(&self) -> f64 {
        self.dt.unwrap_or(self.noise.tau_ou / 100.0)
    }

    /// First failed check as (JSON key, message).
    fn check(&self) -> std::result::Result<(), (&'static str, String)> {
        let positive = |x: f64| x > 0.0 && x.is_finite();
        let fail = |key: &'static str, msg: String| Err((key, msg));
        if self.schema_version != SCHEMA_VERSION {
            return fail("schema_version", format!("unsupported schema_version {} (expected {SCHEMA_VERSION})", self.schema_version));
        }
        if self.gates.is_empty() {
            return fail("gates", "gates must list at least one gate".into());
        }
        let n = &self.noise;
        if n.tau_c_over_2.is_empty() {
            return fail("tau_c_over_2", "noise.tau_c_over_2 must be nonempty".into());
        }
        if let Some(v) = n.tau_c_over_2.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return fail("tau_c_over_2", format!("noise.tau_c_over_2 entries must be finite and non-negative, got {v}"));
        }
        if !positive(n.tau_ou) {
            return fail("tau_ou", format!("noise.tau_ou must be positive, got {}", n.tau_ou));
        }
        for (key, a) in [("alpha_e", n.alpha_e), ("alpha_r", n.alpha_r)] {
            if !a.is_finite() {
                return fail(key, format!("noise.{key} must be finite"));
            }
        }
        for (key, g) in [("gamma_e", self.decay.gamma_e), ("gamma_r", self.decay.gamma_r)] {
            if !(g >= 0.0 && g.is_finite()) {
                return fail(key, format!("decay.{key} must be finite and non-negative, got {g}"));
            }
        }
        if self.n_traj == 0 {
            return fail("n_traj", "n_traj must be at least 1".into());
        }
        if let Some(dt) = self.dt {
            if !positive(dt) || dt > n.tau_ou / 10.0 * (1.0 + 1e-12) {
                return fail("dt", format!("dt must be positive and at most tau_ou/10 = {}, got {dt}", n.tau_ou / 10.0));
            }
        }
        if let Some(m) = &self.modulation {
            if m.depths.is_empty() {
                return fail("depths", "modulation.depths must be nonempty".into());
            }
            if let Some(d) = m.depths.iter().find(|d| !(**d >= 0.0 && **d < 1.0)) {
                return fail("depths", format!("modulation depths must lie in [0, 1), got {d}"));
            }
            if let Some(f) = m.frequency_hz {
                if !positive(f) {
                    return fail("frequency_hz", format!("modulation.frequency_hz must be positive, got {f}"));
                }
            }
            if let Some(v) = m.tau_c_over_2 {
                if !(v >= 0.0 && v.is_finite()) {
                    return fail("tau_c_over_2", format!("modulation.tau_c_over_2 must be non-negative, got {v}"));
                }
            }
        }
        let u = &self.unprotected;
        if !positive(u.omega) || !positive(u.delta_rr) {
            return fail("unprotected", "unprotected.omega and unprotected.delta_rr must be positive".into());
        }
        if self.recipe_source == RecipeSource::File {
            if let Some(g) = self.gates.iter().find(|g| !self.recipe_files.contains_key(g)) {
                return fail("recipe_files", format!("recipe_source is file but recipe_files has no entry for {g}"));
            }
        }
        Ok(())
    }
}

/// 1-based line of the first occurrence of `"key"` in `text`.
fn key_line(text: &str, key: &str) -> Option<usize> {
    let quoted = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&quoted)).map(|i| i + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_roundtrip() {
        for name in PRESETS {
            let cfg = ExperimentConfig::preset(name).unwrap();
            cfg.validate().unwrap();
            let back = ExperimentConfig::from_json(&cfg.to_json().unwrap()).unwrap();
            assert_eq!(back, cfg);
        }
        assert!(ExperimentConfig::preset("fig-4").is_err());
    }

    #[test]
    fn grid_spans_a_decade() {
        let g = log_grid(1e9, 1e10, 8);
        assert_eq!(g.len(), 8);
        assert_eq!(g[0], 1e9);
        assert!((g[7] / 1e10 - 1.0).abs() < 1e-14);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn gate_names_parse() {
        for g in GateName::ALL {
            assert_eq!(g.as_str().parse::<GateName>().unwrap(), g);
            assert_eq!(serde_json::to_string(&g).unwrap(), format!("\"{g}\""));
        }
    }

    fn minimal(n_traj: &str) -> String {
        format!(
            "{{\n  \"schema_version\": 1,\n  \"gates\": [\"T\"],\n  \"noise\": {{\n    \"tau_c_over_2\": [0.0],\n    \"tau_ou\": 1e-6,\n    \"alpha_e\": 1.5,\n    \"alpha_r\": 1.5\n  }},\n  \"n_traj\": {n_traj},\n  \"seed\": 3\n}}"
        )
    }

    #[test]
    fn minimal_document_parses() {
        let cfg = ExperimentConfig::from_json(&minimal("4")).unwrap();
        assert_eq!(cfg.recipe_source, RecipeSource::Caption);
        assert_eq!(cfg.step(), 1e-8);
        assert!(cfg.decay.is_zero());
    }

    #[test]
    fn semantic_error_names_line() {
        let e = ExperimentConfig::from_json(&minimal("0")).unwrap_err().to_string();
        assert!(e.contains("n_traj") && e.contains("line 10"), "{e}");
    }

    #[test]
    fn syntax_error_names_line() {
        let text = minimal("4").replace("\"seed\": 3", "\"seed\": ");
        let e = ExperimentConfig::from_json(&text).unwrap_err().to_string();
        assert!(e.contains("line 12"), "{e}");
    }

    #[test]
    fn unknown_field_rejected() {
        let text = minimal("4").replace("\"seed\": 3", "\"seed\": 3,\n  \"sede\": 4");
        assert!(ExperimentConfig::from_json(&text).is_err());
    }

    #[test]
    fn file_source_needs_paths() {
        let mut cfg = ExperimentConfig::preset("fig-protected").unwrap();
        cfg.recipe_source = RecipeSource::File;
        assert!(cfg.validate().is_err());
    }
}
