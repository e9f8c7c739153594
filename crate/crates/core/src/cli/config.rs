//! TOML experiment configuration. Thresholds are written in dB and angles in
//! degrees in the file; everything handed to the library is linear/radians.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::analysis::{InversionConfig, ScenarioConfig};
use crate::geometry::SectorGeometry;
use crate::pattern::{ArrayConfig, MlapConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    PatternCut,
    PolarHeatmap,
    CondCp,
    MSweep,
    Overall,
    AseVsN,
    AseVsNa,
    RatioSweep,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::PatternCut,
        Experiment::PolarHeatmap,
        Experiment::CondCp,
        Experiment::MSweep,
        Experiment::Overall,
        Experiment::AseVsN,
        Experiment::AseVsNa,
        Experiment::RatioSweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::PatternCut => "pattern-cut",
            Experiment::PolarHeatmap => "polar-heatmap",
            Experiment::CondCp => "cond-cp",
            Experiment::MSweep => "m-sweep",
            Experiment::Overall => "overall",
            Experiment::AseVsN => "ase-vs-n",
            Experiment::AseVsNa => "ase-vs-na",
            Experiment::RatioSweep => "ratio-sweep",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == s)
    }

    pub fn default_modes(self) -> Vec<Mode> {
        use Mode::*;
        match self {
            Experiment::PatternCut | Experiment::PolarHeatmap => vec![Exact, Mlap],
            Experiment::CondCp => vec![Exact, Mlap, Upper, Montecarlo],
            Experiment::MSweep => vec![Mlap, Upper],
            _ => vec![Mlap, Upper, Montecarlo],
        }
    }

    fn allowed_modes(self) -> &'static [Mode] {
        match self {
            Experiment::PatternCut | Experiment::PolarHeatmap => &[Mode::Exact, Mode::Mlap],
            _ => &[Mode::Exact, Mode::Mlap, Mode::Upper, Mode::Montecarlo],
        }
    }

    fn allowed_sweeps(self) -> &'static [SweepParam] {
        use SweepParam::*;
        match self {
            Experiment::PatternCut => &[R, ThetaDeg],
            Experiment::PolarHeatmap => &[R],
            _ => &[TauDb, NAntennas, NActive, Ratio, NLevels],
        }
    }

    pub fn default_sweep(self) -> Option<Sweep> {
        let grid = |lo: f64, step: f64, n: usize| (0..n).map(|i| lo + step * i as f64).collect();
        let (param, values) = match self {
            Experiment::PatternCut | Experiment::PolarHeatmap => return None,
            Experiment::CondCp => (SweepParam::TauDb, grid(0.0, 2.0, 21)),
            Experiment::MSweep => (SweepParam::NLevels, grid(1.0, 1.0, 15)),
            Experiment::Overall => (SweepParam::TauDb, grid(0.0, 5.0, 9)),
            Experiment::AseVsN => (SweepParam::NAntennas, vec![64.0, 128.0, 256.0, 512.0]),
            Experiment::AseVsNa => (SweepParam::NActive, vec![4.0, 8.0, 16.0, 24.0, 32.0]),
            Experiment::RatioSweep => (SweepParam::Ratio, grid(0.04, 0.04, 7)),
        };
        Some(Sweep { param, values })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Mlap,
    Upper,
    Montecarlo,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Mlap => "mlap",
            Mode::Upper => "upper",
            Mode::Montecarlo => "montecarlo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    TauDb,
    NAntennas,
    NActive,
    /// `N_a/N`, with `N_a` rounded to the nearest integer.
    Ratio,
    NLevels,
    /// Observation distance for pattern experiments.
    R,
    /// Observation angle for pattern experiments.
    ThetaDeg,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::TauDb => "tau_db",
            SweepParam::NAntennas => "n_antennas",
            SweepParam::NActive => "n_active",
            SweepParam::Ratio => "ratio",
            SweepParam::NLevels => "n_levels",
            SweepParam::R => "r",
            SweepParam::ThetaDeg => "theta_deg",
        }
    }

    fn integral(self) -> bool {
        matches!(self, SweepParam::NAntennas | SweepParam::NActive | SweepParam::NLevels)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

/// The tagged user for conditional experiments and the focal point for
/// pattern experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    pub kappa: usize,
    pub theta_deg: f64,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub name: Option<Experiment>,
    pub scenario: ScenarioConfig,
    pub quad: InversionConfig,
    pub target: Target,
    /// Threshold for experiments that sweep something other than `τ`.
    pub tau_db: f64,
    /// Thresholds of the m-sweep curves.
    pub taus_db: Option<Vec<f64>>,
    pub sweep: Option<Sweep>,
    pub modes: Option<Vec<Mode>>,
    pub n_trials: usize,
    pub seed: u64,
    pub output_path: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn effective_modes(&self, exp: Experiment) -> Vec<Mode> {
        self.modes.clone().unwrap_or_else(|| exp.default_modes())
    }

    pub fn effective_sweep(&self, exp: Experiment) -> Option<Sweep> {
        self.sweep.clone().or_else(|| exp.default_sweep())
    }

    pub fn effective_taus_db(&self) -> Vec<f64> {
        self.taus_db.clone().unwrap_or_else(|| vec![5.0, 20.0, 30.0, 35.0])
    }

    /// Checks everything that does not depend on the experiment name.
    pub fn validate(&self) -> Result<(), CliError> {
        let t = &self.target;
        let sc = &self.scenario;
        if t.kappa < 1 {
            return Err(cfg_err("experiment.kappa", "must be at least 1"));
        }
        if !(t.theta_deg.abs() <= 180.0 / sc.sector.n_sectors() as f64) {
            return Err(cfg_err("experiment.theta_deg", "outside the sector"));
        }
        if !(t.r > 0.0 && t.r <= sc.sector.cell_radius()) {
            return Err(cfg_err("experiment.r_m", "must lie in (0, cell_radius_m]"));
        }
        if !self.tau_db.is_finite() {
            return Err(cfg_err("experiment.tau_db", "must be finite"));
        }
        if let Some(taus) = &self.taus_db {
            if taus.is_empty() || taus.iter().any(|x| !x.is_finite()) {
                return Err(cfg_err("experiment.taus_db", "must be a nonempty list of finite values"));
            }
        }
        if let Some(m) = &self.modes {
            if m.is_empty() {
                return Err(cfg_err("experiment.modes", "must not be empty"));
            }
        }
        if let Some(s) = &self.sweep {
            check_sweep(s)?;
        }
        if self.n_trials < 1 {
            return Err(cfg_err("experiment.trials", "must be at least 1"));
        }
        self.quad.validate().map_err(|e| cfg_err("inversion", e))
    }

    /// Experiment-specific checks, including every swept scenario.
    pub fn validate_for(&self, exp: Experiment) -> Result<(), CliError> {
        self.validate()?;
        let modes = self.effective_modes(exp);
        if let Some(bad) = modes.iter().find(|m| !exp.allowed_modes().contains(m)) {
            return Err(cfg_err(
                "experiment.modes",
                format!("mode {} not available for {}", bad.name(), exp.name()),
            ));
        }
        if let Some(s) = &self.sweep {
            if !exp.allowed_sweeps().contains(&s.param) {
                return Err(cfg_err(
                    "experiment.sweep.param",
                    format!("{} cannot be swept in {}", s.param.name(), exp.name()),
                ));
            }
        }
        let conditional = matches!(exp, Experiment::CondCp | Experiment::MSweep);
        let mut scenarios = vec![self.scenario.clone()];
        if let Some(s) = self.effective_sweep(exp) {
            scenarios = s
                .values
                .iter()
                .map(|&v| apply_sweep(&self.scenario, s.param, v))
                .collect::<Result<_, _>>()?;
        }
        if conditional {
            if let Some(sc) = scenarios.iter().find(|sc| self.target.kappa > sc.n_active) {
                return Err(cfg_err(
                    "experiment.kappa",
                    format!("exceeds n_active = {}", sc.n_active),
                ));
            }
        }
        Ok(())
    }
}

/// Scenario with one swept parameter replaced. `τ` and pattern sweeps leave
/// it unchanged.
pub fn apply_sweep(base: &ScenarioConfig, param: SweepParam, v: f64) -> Result<ScenarioConfig, CliError> {
    let mut sc = base.clone();
    match param {
        SweepParam::NAntennas => {
            sc.array = ArrayConfig::new(v as u32, base.array.carrier_freq())
                .map_err(|e| cfg_err("experiment.sweep.values", e))?;
        }
        SweepParam::NActive => sc.n_active = v as usize,
        SweepParam::Ratio => {
            sc.n_active = ((v * base.array.n_antennas() as f64).round() as usize).max(1);
        }
        SweepParam::NLevels => sc.mlap.n_levels = v as u32,
        SweepParam::TauDb | SweepParam::R | SweepParam::ThetaDeg => {}
    }
    sc.validate().map_err(|e| cfg_err("experiment.sweep.values", format!("at {v}: {e}")))?;
    Ok(sc)
}

fn check_sweep(s: &Sweep) -> Result<(), CliError> {
    let key = "experiment.sweep.values";
    if s.values.iter().any(|v| !v.is_finite()) {
        return Err(cfg_err(key, "must be finite"));
    }
    if s.values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(cfg_err(key, "must be strictly increasing"));
    }
    if s.param.integral() && s.values.iter().any(|v| v.fract() != 0.0 || *v < 1.0) {
        return Err(cfg_err(key, format!("{} takes positive integers", s.param.name())));
    }
    if s.param == SweepParam::Ratio && s.values.iter().any(|v| *v <= 0.0) {
        return Err(cfg_err(key, "ratios must be positive"));
    }
    Ok(())
}

fn cfg_err(key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{key}: {msg}"))
}

// On-disk layout.

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ConfigFile {
    scenario: ScenarioSection,
    mlap: MlapConfig,
    inversion: InversionConfig,
    experiment: ExperimentSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ScenarioSection {
    n_antennas: u32,
    carrier_freq_hz: f64,
    n_sectors: u32,
    cell_radius_m: f64,
    los_radius_m: f64,
    n_active: usize,
    pathloss_exponent: f64,
    tx_power_w: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    noise_power_w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    noise: Option<NoiseSection>,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        Self {
            n_antennas: 256,
            carrier_freq_hz: 28e9,
            n_sectors: 3,
            cell_radius_m: 150.0,
            los_radius_m: 150.0,
            n_active: 15,
            pathloss_exponent: 2.0,
            tx_power_w: 10.0,
            noise_power_w: None,
            noise: None,
        }
    }
}

/// Thermal noise `psd + 10·log10(B) + F` in dBm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoiseSection {
    bandwidth_hz: f64,
    #[serde(default)]
    noise_figure_db: f64,
    #[serde(default = "thermal_psd")]
    psd_dbm_per_hz: f64,
}

fn thermal_psd() -> f64 {
    -174.0
}

impl NoiseSection {
    fn power_w(&self) -> Result<f64, CliError> {
        if !(self.bandwidth_hz > 0.0 && self.bandwidth_hz.is_finite()) {
            return Err(cfg_err("scenario.noise.bandwidth_hz", "must be positive"));
        }
        if !self.noise_figure_db.is_finite() || !self.psd_dbm_per_hz.is_finite() {
            return Err(cfg_err("scenario.noise", "values must be finite"));
        }
        let dbm = self.psd_dbm_per_hz + 10.0 * self.bandwidth_hz.log10() + self.noise_figure_db;
        Ok(10f64.powf((dbm - 30.0) / 10.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ExperimentSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<Experiment>,
    #[serde(skip_serializing_if = "Option::is_none")]
    modes: Option<Vec<Mode>>,
    kappa: usize,
    theta_deg: f64,
    r_m: f64,
    tau_db: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    taus_db: Option<Vec<f64>>,
    trials: usize,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<Sweep>,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            name: None,
            modes: None,
            kappa: 3,
            theta_deg: 0.0,
            r_m: 30.0,
            tau_db: 20.0,
            taus_db: None,
            trials: 10_000,
            seed: 0,
            output: None,
            sweep: None,
        }
    }
}

/// Parses a TOML document; absent keys take the default scenario.
pub fn parse_config(text: &str) -> Result<ExperimentSpec, CliError> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    let s = &file.scenario;
    let array = ArrayConfig::new(s.n_antennas, s.carrier_freq_hz)
        .map_err(|e| cfg_err("scenario.n_antennas / scenario.carrier_freq_hz", e))?;
    let sector = SectorGeometry::new(s.n_sectors, s.cell_radius_m, s.los_radius_m)
        .map_err(|e| cfg_err("scenario.n_sectors / cell_radius_m / los_radius_m", e))?;
    let noise_power = match (&s.noise_power_w, &s.noise) {
        (Some(_), Some(_)) => {
            return Err(cfg_err("scenario.noise", "give either noise_power_w or a [scenario.noise] table"))
        }
        (Some(p), None) => *p,
        (None, Some(n)) => n.power_w()?,
        (None, None) => 0.0,
    };
    let scenario = ScenarioConfig {
        array,
        sector,
        n_active: s.n_active,
        pathloss_exponent: s.pathloss_exponent,
        tx_power: s.tx_power_w,
        noise_power,
        mlap: file.mlap,
    };
    if s.n_active < 1 {
        return Err(cfg_err("scenario.n_active", "must be at least 1"));
    }
    if !(s.pathloss_exponent >= 2.0) {
        return Err(cfg_err("scenario.pathloss_exponent", "must be ≥ 2"));
    }
    if !(s.tx_power_w > 0.0 && s.tx_power_w.is_finite()) {
        return Err(cfg_err("scenario.tx_power_w", "must be positive"));
    }
    if !(noise_power >= 0.0 && noise_power.is_finite()) {
        return Err(cfg_err("scenario.noise_power_w", "must be ≥ 0"));
    }
    file.mlap.validate().map_err(|e| cfg_err("mlap", e))?;
    scenario.validate().map_err(|e| cfg_err("mlap.n_levels", e))?;
    let e = file.experiment;
    let spec = ExperimentSpec {
        name: e.name,
        scenario,
        quad: file.inversion,
        target: Target {
            kappa: e.kappa,
            theta_deg: e.theta_deg,
            r: e.r_m,
        },
        tau_db: e.tau_db,
        taus_db: e.taus_db,
        sweep: e.sweep,
        modes: e.modes,
        n_trials: e.trials,
        seed: e.seed,
        output_path: e.output,
    };
    spec.validate()?;
    Ok(spec)
}

/// Writes a spec back as TOML; `parse_config` of the result reproduces it.
pub fn emit_config(spec: &ExperimentSpec) -> String {
    let sc = &spec.scenario;
    let file = ConfigFile {
        scenario: ScenarioSection {
            n_antennas: sc.array.n_antennas(),
            carrier_freq_hz: sc.array.carrier_freq(),
            n_sectors: sc.sector.n_sectors(),
            cell_radius_m: sc.sector.cell_radius(),
            los_radius_m: sc.sector.los_radius(),
            n_active: sc.n_active,
            pathloss_exponent: sc.pathloss_exponent,
            tx_power_w: sc.tx_power,
            noise_power_w: Some(sc.noise_power),
            noise: None,
        },
        mlap: sc.mlap,
        inversion: spec.quad,
        experiment: ExperimentSection {
            name: spec.name,
            modes: spec.modes.clone(),
            kappa: spec.target.kappa,
            theta_deg: spec.target.theta_deg,
            r_m: spec.target.r,
            tau_db: spec.tau_db,
            taus_db: spec.taus_db.clone(),
            trials: spec.n_trials,
            seed: spec.seed,
            output: spec.output_path.clone(),
            sweep: spec.sweep.clone(),
        },
    };
    toml::to_string(&file).expect("config serializes")
}
