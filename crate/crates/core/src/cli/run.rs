use rayon::prelude::*;
use serde::Serialize;

use super::config::{apply_sweep, Experiment, ExperimentSpec, Mode, SweepParam};
use super::CliError;
use crate::analysis::{
    conditional_sinr_cp, level_probabilities_for, se_and_ase, sinr_equivalent_threshold, CpMode,
    InterferenceModel, ScenarioConfig, SinrThreshold,
};
use crate::error::Result;
use crate::geometry::PolarPoint;
use crate::montecarlo::{estimate_ase, estimate_conditional_cp, estimate_user_cps, EstimateWithError, TrialPlan};
use crate::pattern::{exact_gain, m_star, mlap_gain, mlap_levels};

/// One output record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub experiment: String,
    pub mode: String,
    pub sweep_param: String,
    pub sweep_value: Option<f64>,
    pub kappa: Option<usize>,
    pub tau_db: Option<f64>,
    pub metric: String,
    pub value: f64,
    pub std_error: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
    /// One message per row whose value could not be computed.
    pub diagnostics: Vec<String>,
}

impl ResultTable {
    pub fn all_failed(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.value.is_nan())
    }

    fn extend(&mut self, other: ResultTable) {
        self.rows.extend(other.rows);
        self.diagnostics.extend(other.diagnostics);
    }
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

// Row builder shared by one experiment.
struct Rows<'a> {
    experiment: &'a str,
    table: ResultTable,
}

impl<'a> Rows<'a> {
    fn new(experiment: &'a str) -> Self {
        Self {
            experiment,
            table: ResultTable::default(),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        mode: &str,
        sweep: (&str, Option<f64>),
        kappa: Option<usize>,
        tau_db: Option<f64>,
        metric: &str,
        value: Result<f64>,
        std_error: Option<f64>,
    ) {
        let value = match value {
            Ok(v) => v,
            Err(e) => {
                self.table.diagnostics.push(format!(
                    "{} {mode} {}={:?} tau_db={tau_db:?} {metric}: {e}",
                    self.experiment, sweep.0, sweep.1
                ));
                f64::NAN
            }
        };
        self.table.rows.push(ResultRow {
            experiment: self.experiment.to_string(),
            mode: mode.to_string(),
            sweep_param: sweep.0.to_string(),
            sweep_value: sweep.1,
            kappa,
            tau_db,
            metric: metric.to_string(),
            value,
            std_error: if value.is_nan() { None } else { std_error },
        });
    }
}

/// Runs the experiment named in `spec`.
pub fn run_experiment(spec: &ExperimentSpec) -> std::result::Result<ResultTable, CliError> {
    let exp = spec
        .name
        .ok_or_else(|| CliError::Config("experiment.name: no experiment selected".into()))?;
    spec.validate_for(exp)?;
    Ok(match exp {
        Experiment::PatternCut => pattern_cut(spec),
        Experiment::PolarHeatmap => polar_heatmap(spec),
        Experiment::CondCp | Experiment::MSweep => conditional(spec, exp)?,
        Experiment::Overall | Experiment::AseVsN | Experiment::AseVsNa | Experiment::RatioSweep => {
            network(spec, exp)?
        }
    })
}

fn focal_point(spec: &ExperimentSpec) -> PolarPoint {
    PolarPoint::new(spec.target.theta_deg.to_radians(), spec.target.r)
}

// Sorted grid with `extra` merged in.
fn grid_with(lo: f64, hi: f64, n: usize, extra: f64) -> Vec<f64> {
    let mut g: Vec<f64> = (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect();
    g.push(extra);
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

fn pattern_modes(spec: &ExperimentSpec, exp: Experiment) -> Vec<Mode> {
    spec.effective_modes(exp)
}

fn gain_at(spec: &ExperimentSpec, mode: Mode, obs: &PolarPoint) -> Result<f64> {
    let sc = &spec.scenario;
    let focal = focal_point(spec);
    match mode {
        Mode::Exact => exact_gain(&sc.array, obs, &focal),
        _ => mlap_levels(&sc.array, &sc.mlap, &focal).map(|lv| mlap_gain(&lv, obs)),
    }
}

fn pattern_cut(spec: &ExperimentSpec) -> ResultTable {
    let exp = Experiment::PatternCut;
    let sc = &spec.scenario;
    let rc = sc.sector.cell_radius();
    let hw_deg = sc.sector.half_width().to_degrees();
    let t = spec.target;
    let cuts = match &spec.sweep {
        Some(s) => vec![(s.param, s.values.clone())],
        None => vec![
            (SweepParam::R, grid_with(rc / 200.0, rc, 200, t.r)),
            (SweepParam::ThetaDeg, grid_with(-hw_deg, hw_deg, 241, t.theta_deg)),
        ],
    };
    let modes = pattern_modes(spec, exp);
    let mut rows = Rows::new(exp.name());
    for (param, values) in cuts {
        for &v in &values {
            let obs = match param {
                SweepParam::ThetaDeg => PolarPoint::new(v.to_radians(), t.r),
                _ => PolarPoint::new(t.theta_deg.to_radians(), v),
            };
            for &m in &modes {
                rows.push(m.name(), (param.name(), Some(v)), None, None, "gain", gain_at(spec, m, &obs), None);
            }
        }
    }
    rows.table
}

fn polar_heatmap(spec: &ExperimentSpec) -> ResultTable {
    let exp = Experiment::PolarHeatmap;
    let sc = &spec.scenario;
    let rc = sc.sector.cell_radius();
    let hw_deg = sc.sector.half_width().to_degrees();
    let radii = match &spec.sweep {
        Some(s) => s.values.clone(),
        None => (1..=60).map(|i| rc * i as f64 / 60.0).collect(),
    };
    let thetas: Vec<f64> = (0..61).map(|i| -hw_deg + 2.0 * hw_deg * i as f64 / 60.0).collect();
    let modes = pattern_modes(spec, exp);
    let mut rows = Rows::new(exp.name());
    for &r in &radii {
        let metric = format!("gain@r={r}");
        for &th in &thetas {
            let obs = PolarPoint::new(th.to_radians(), r);
            for &m in &modes {
                rows.push(m.name(), ("theta_deg", Some(th)), None, None, &metric, gain_at(spec, m, &obs), None);
            }
        }
    }
    rows.table
}

// One scenario evaluated at a list of thresholds; `sweep_value` is `None`
// when the thresholds themselves are the sweep.
struct Group {
    sweep_value: Option<f64>,
    scenario: ScenarioConfig,
    taus_db: Vec<f64>,
}

fn groups(spec: &ExperimentSpec, exp: Experiment) -> std::result::Result<(SweepParam, Vec<Group>), CliError> {
    let sweep = spec.effective_sweep(exp).expect("analysis experiments always sweep");
    if sweep.param == SweepParam::TauDb {
        let g = Group {
            sweep_value: None,
            scenario: spec.scenario.clone(),
            taus_db: sweep.values,
        };
        return Ok((sweep.param, vec![g]));
    }
    let taus = if exp == Experiment::MSweep {
        spec.effective_taus_db()
    } else {
        vec![spec.tau_db]
    };
    let gs = sweep
        .values
        .iter()
        .map(|&v| {
            Ok(Group {
                sweep_value: Some(v),
                scenario: apply_sweep(&spec.scenario, sweep.param, v)?,
                taus_db: taus.clone(),
            })
        })
        .collect::<std::result::Result<_, CliError>>()?;
    Ok((sweep.param, gs))
}

fn cp_mode(m: Mode) -> CpMode {
    match m {
        Mode::Exact => CpMode::Exact,
        Mode::Mlap => CpMode::Mlap,
        _ => CpMode::Upper,
    }
}

// Conditional coverage at every threshold, building the interference model once.
fn conditional_curve(spec: &ExperimentSpec, sc: &ScenarioConfig, mode: Mode, taus: &[f64]) -> Vec<Result<f64>> {
    let t = spec.target;
    let theta = t.theta_deg.to_radians();
    if mode == Mode::Upper || sc.n_active == 1 {
        return taus
            .par_iter()
            .map(|&tau| conditional_sinr_cp(tau, theta, t.r, t.kappa, sc, cp_mode(mode), &spec.quad))
            .collect();
    }
    let model = if mode == Mode::Exact {
        InterferenceModel::exact(theta, t.r, t.kappa, sc)
    } else {
        let focal = PolarPoint::new(theta, t.r);
        mlap_levels(&sc.array, &sc.mlap, &focal).and_then(|lv| {
            let probs = level_probabilities_for(&lv, t.kappa, sc)?;
            Ok(InterferenceModel::mlap(&lv, &probs, t.kappa, sc.n_active))
        })
    };
    let model = match model {
        Ok(m) => m,
        Err(e) => return taus.iter().map(|_| Err(e.clone())).collect(),
    };
    taus.par_iter()
        .map(|&tau| match sinr_equivalent_threshold(tau, t.r, sc)? {
            SinrThreshold::Feasible(tt) => model.coverage(tt, &spec.quad),
            SinrThreshold::Infeasible => Ok(0.0),
        })
        .collect()
}

fn split(est: Result<Vec<EstimateWithError>>, n: usize) -> Vec<(Result<f64>, Option<f64>)> {
    match est {
        Ok(v) => v.into_iter().map(|e| (Ok(e.value), Some(e.std_error))).collect(),
        Err(e) => (0..n).map(|_| (Err(e.clone()), None)).collect(),
    }
}

fn conditional(spec: &ExperimentSpec, exp: Experiment) -> std::result::Result<ResultTable, CliError> {
    let (param, groups) = groups(spec, exp)?;
    let modes = spec.effective_modes(exp);
    let t = spec.target;
    let anchor = PolarPoint::new(t.theta_deg.to_radians(), t.r);
    let parts: Vec<ResultTable> = groups
        .par_iter()
        .map(|g| {
            let mut rows = Rows::new(exp.name());
            let taus: Vec<f64> = g.taus_db.iter().map(|&x| db_to_linear(x)).collect();
            for &m in &modes {
                let values: Vec<(Result<f64>, Option<f64>)> = if m == Mode::Montecarlo {
                    let plan = TrialPlan::new(spec.n_trials, spec.seed, g.scenario.clone());
                    split(estimate_conditional_cp(&plan, t.kappa, anchor, &taus), taus.len())
                } else {
                    conditional_curve(spec, &g.scenario, m, &taus)
                        .into_iter()
                        .map(|v| (v, None))
                        .collect()
                };
                for ((value, se), &tau_db) in values.into_iter().zip(&g.taus_db) {
                    let sv = g.sweep_value.unwrap_or(tau_db);
                    rows.push(m.name(), (param.name(), Some(sv)), Some(t.kappa), Some(tau_db), "cp", value, se);
                }
            }
            rows.table
        })
        .collect();
    let mut table = ResultTable::default();
    for p in parts {
        table.extend(p);
    }
    if exp == Experiment::MSweep {
        let mut rows = Rows::new(exp.name());
        for tau_db in spec.effective_taus_db() {
            let v = m_star(&spec.scenario.array, &spec.scenario.mlap, db_to_linear(tau_db), Some(&anchor))
                .map(|m| m.m as f64);
            rows.push("mlap", ("tau_db", Some(tau_db)), Some(t.kappa), Some(tau_db), "m_star", v, None);
        }
        table.extend(rows.table);
    }
    Ok(table)
}

fn network(spec: &ExperimentSpec, exp: Experiment) -> std::result::Result<ResultTable, CliError> {
    let (param, groups) = groups(spec, exp)?;
    let modes = spec.effective_modes(exp);
    let per_user = exp == Experiment::Overall;
    let parts: Vec<ResultTable> = groups
        .par_iter()
        .map(|g| {
            let mut rows = Rows::new(exp.name());
            let sc = &g.scenario;
            let taus: Vec<f64> = g.taus_db.iter().map(|&x| db_to_linear(x)).collect();
            for &m in &modes {
                // (per-user CP with std errors, ASE with std error) per threshold
                type Point = (Vec<(Result<f64>, Option<f64>)>, (Result<f64>, Option<f64>));
                let points: Vec<Point> = if m == Mode::Montecarlo {
                    let plan = TrialPlan::new(spec.n_trials, spec.seed, sc.clone());
                    let ase = split(estimate_ase(&plan, &taus), taus.len());
                    let cps: Vec<Vec<(Result<f64>, Option<f64>)>> = if per_user {
                        match estimate_user_cps(&plan, &taus) {
                            Ok(u) => (0..taus.len())
                                .map(|j| u.iter().map(|k| (Ok(k[j].value), Some(k[j].std_error))).collect())
                                .collect(),
                            Err(e) => (0..taus.len())
                                .map(|_| (0..sc.n_active).map(|_| (Err(e.clone()), None)).collect())
                                .collect(),
                        }
                    } else {
                        vec![Vec::new(); taus.len()]
                    };
                    cps.into_iter().zip(ase).collect()
                } else {
                    taus.par_iter()
                        .map(|&tau| {
                            let rate = (1.0 + tau).log2();
                            match se_and_ase(tau, sc, cp_mode(m), &spec.quad) {
                                Ok((se, ase)) => {
                                    (se.into_iter().map(|s| (Ok(s / rate), None)).collect(), (Ok(ase), None))
                                }
                                Err(e) => (
                                    (0..sc.n_active).map(|_| (Err(e.clone()), None)).collect(),
                                    (Err(e), None),
                                ),
                            }
                        })
                        .collect()
                };
                for ((cps, ase), (&tau_db, &tau)) in points.into_iter().zip(g.taus_db.iter().zip(&taus)) {
                    let sweep = (param.name(), Some(g.sweep_value.unwrap_or(tau_db)));
                    let rate = (1.0 + tau).log2();
                    if per_user {
                        for (k, (cp, se)) in cps.into_iter().enumerate() {
                            let kappa = Some(k + 1);
                            let se_val = cp.as_ref().map(|c| c * rate).map_err(Clone::clone);
                            rows.push(m.name(), sweep, kappa, Some(tau_db), "cp", cp, se);
                            rows.push(m.name(), sweep, kappa, Some(tau_db), "se", se_val, se.map(|s| s * rate));
                        }
                    }
                    rows.push(m.name(), sweep, None, Some(tau_db), "ase", ase.0, ase.1);
                }
            }
            rows.table
        })
        .collect();
    let mut table = ResultTable::default();
    for p in parts {
        table.extend(p);
    }
    Ok(table)
}
