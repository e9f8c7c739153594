//! Monte Carlo estimation of coverage and area spectrum efficiency over
//! binomial point process realizations, using the exact beam gain.
//!
//! Trial `i` draws from a ChaCha8 generator seeded with the root seed and
//! switched to stream `i`, so estimates do not depend on how trials are
//! spread over threads. Trials run in fixed-size chunks and chunk sums are
//! combined in chunk order.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::ScenarioConfig;
use crate::error::{invalid, Result};
use crate::geometry::{sample_conditional_user_set, sample_user_set, OrderedUserSet, PolarPoint};
use crate::pattern::{array_response, exact_gain_phase, PhasePoint};

const CHUNK: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct TrialPlan {
    pub n_trials: usize,
    pub root_seed: u64,
    pub scenario: ScenarioConfig,
}

impl TrialPlan {
    pub fn new(n_trials: usize, root_seed: u64, scenario: ScenarioConfig) -> Self {
        Self {
            n_trials,
            root_seed,
            scenario,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trials < 1 {
            return Err(invalid("n_trials must be at least 1"));
        }
        self.scenario.validate()
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithError {
    pub value: f64,
    pub std_error: f64,
    pub n_trials: usize,
}

/// How cross-gains are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GainEvaluation {
    /// Second-order phase model, O(N) per pair via a recurrence.
    #[default]
    Fresnel,
    /// Inner products of exact-distance array responses.
    ArrayResponse,
}

/// Normalized interference `I_κ` at every user.
pub fn realize_interference(
    users: &OrderedUserSet,
    scenario: &ScenarioConfig,
    eval: GainEvaluation,
) -> Result<Vec<f64>> {
    let u = users.users();
    let n = u.len();
    let mut interference = vec![0.0; n];
    match eval {
        GainEvaluation::Fresnel => {
            let pts: Vec<PhasePoint> = u.iter().map(PhasePoint::new).collect();
            for i in 0..n {
                for j in i + 1..n {
                    let g = exact_gain_phase(&scenario.array, pts[i], pts[j]);
                    interference[i] += g;
                    interference[j] += g;
                }
            }
        }
        GainEvaluation::ArrayResponse => {
            let resp = u
                .iter()
                .map(|p| array_response(&scenario.array, p))
                .collect::<Result<Vec<_>>>()?;
            for i in 0..n {
                for j in i + 1..n {
                    let ip: num_complex::Complex64 =
                        resp[i].iter().zip(&resp[j]).map(|(a, b)| a.conj() * b).sum();
                    let g = ip.norm_sqr();
                    interference[i] += g;
                    interference[j] += g;
                }
            }
        }
    }
    Ok(interference)
}

/// `SIR_κ = 1/I_κ` for every user; infinite for a lone user.
pub fn realize_sir(users: &OrderedUserSet, scenario: &ScenarioConfig) -> Vec<f64> {
    realize_interference(users, scenario, GainEvaluation::Fresnel)
        .expect("Fresnel gains do not fail")
        .into_iter()
        .map(|i| 1.0 / i)
        .collect()
}

/// SINR with the serving beam's gain `N` and the transmit power split over
/// the `N_a` beams.
pub fn realize_sinr(users: &OrderedUserSet, scenario: &ScenarioConfig) -> Vec<f64> {
    let sir = realize_sir(users, scenario);
    if scenario.noise_power == 0.0 {
        return sir;
    }
    let scale = scenario.n_active as f64 * scenario.noise_power
        / (scenario.tx_power * scenario.array.n_antennas() as f64 * scenario.ref_pathloss());
    sir.iter()
        .zip(users.users())
        .map(|(s, u)| 1.0 / (1.0 / s + scale * u.r.powf(scenario.pathloss_exponent)))
        .collect()
}

/// Generator for trial `index` under `root_seed`.
pub fn trial_rng(root_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(root_seed);
    rng.set_stream(index);
    rng
}

// Runs every trial and returns (Σx, Σx²) per output, combined in chunk order.
fn accumulate<F>(plan: &TrialPlan, n_out: usize, trial: F) -> Result<Vec<(f64, f64)>>
where
    F: Fn(&mut ChaCha8Rng, &mut [f64]) -> Result<()> + Sync,
{
    plan.validate()?;
    let n_chunks = plan.n_trials.div_ceil(CHUNK);
    let chunks: Vec<Vec<(f64, f64)>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut sums = vec![(0.0, 0.0); n_out];
            let mut out = vec![0.0; n_out];
            let end = ((c + 1) * CHUNK).min(plan.n_trials);
            for i in c * CHUNK..end {
                let mut rng = trial_rng(plan.root_seed, i as u64);
                out.iter_mut().for_each(|x| *x = 0.0);
                trial(&mut rng, &mut out)?;
                for (s, x) in sums.iter_mut().zip(&out) {
                    s.0 += x;
                    s.1 += x * x;
                }
            }
            Ok(sums)
        })
        .collect::<Result<_>>()?;
    let mut total = vec![(0.0, 0.0); n_out];
    for chunk in chunks {
        for (t, s) in total.iter_mut().zip(chunk) {
            t.0 += s.0;
            t.1 += s.1;
        }
    }
    Ok(total)
}

fn finish(sums: Vec<(f64, f64)>, n: usize) -> Vec<EstimateWithError> {
    let nf = n as f64;
    sums.into_iter()
        .map(|(s, s2)| {
            let mean = s / nf;
            let var = if n > 1 {
                ((s2 - nf * mean * mean) / (nf - 1.0)).max(0.0)
            } else {
                0.0
            };
            EstimateWithError {
                value: mean,
                std_error: (var / nf).sqrt(),
                n_trials: n,
            }
        })
        .collect()
}

fn check_kappa(kappa: usize, n_active: usize) -> Result<()> {
    if kappa < 1 || kappa > n_active {
        return Err(invalid(format!("kappa {kappa} must lie in [1, {n_active}]")));
    }
    Ok(())
}

/// `P{SINR_κ > τ}` over fresh user sets, per threshold. With zero noise
/// power this is the SIR coverage.
pub fn estimate_overall_cp(plan: &TrialPlan, tau_grid: &[f64], kappa: usize) -> Result<Vec<EstimateWithError>> {
    let sc = &plan.scenario;
    check_kappa(kappa, sc.n_active)?;
    let sums = accumulate(plan, tau_grid.len(), |rng, out| {
        let users = sample_user_set(&sc.sector, sc.n_active, rng)?;
        let s = realize_sinr(&users, sc)[kappa - 1];
        for (o, &t) in out.iter_mut().zip(tau_grid) {
            *o = f64::from(u8::from(s > t));
        }
        Ok(())
    })?;
    Ok(finish(sums, plan.n_trials))
}

/// Coverage of every user at once: `result[κ−1][j]` is `P{SINR_κ > τ_j}`.
pub fn estimate_user_cps(plan: &TrialPlan, tau_grid: &[f64]) -> Result<Vec<Vec<EstimateWithError>>> {
    let sc = &plan.scenario;
    let nt = tau_grid.len();
    let sums = accumulate(plan, nt * sc.n_active, |rng, out| {
        let users = sample_user_set(&sc.sector, sc.n_active, rng)?;
        for (k, s) in realize_sinr(&users, sc).into_iter().enumerate() {
            for (j, &t) in tau_grid.iter().enumerate() {
                out[k * nt + j] = f64::from(u8::from(s > t));
            }
        }
        Ok(())
    })?;
    let flat = finish(sums, plan.n_trials);
    Ok(flat.chunks(nt.max(1)).map(|c| c.to_vec()).collect())
}

/// `P{SINR_κ > τ | user κ at anchor}` per threshold.
pub fn estimate_conditional_cp(
    plan: &TrialPlan,
    kappa: usize,
    anchor: PolarPoint,
    tau_grid: &[f64],
) -> Result<Vec<EstimateWithError>> {
    let sc = &plan.scenario;
    check_kappa(kappa, sc.n_active)?;
    if !sc.sector.contains(&anchor) || !(anchor.r > 0.0) {
        return Err(crate::error::domain(format!("anchor {anchor:?} outside the sector")));
    }
    let sums = accumulate(plan, tau_grid.len(), |rng, out| {
        let users = sample_conditional_user_set(kappa, anchor, sc.n_active, &sc.sector, rng)?;
        let s = realize_sinr(&users, sc)[kappa - 1];
        for (o, &t) in out.iter_mut().zip(tau_grid) {
            *o = f64::from(u8::from(s > t));
        }
        Ok(())
    })?;
    Ok(finish(sums, plan.n_trials))
}

/// Area spectrum efficiency `(N_s/(πR_c²))·Σ_κ 1{SINR_κ > τ}·log₂(1+τ)`
/// averaged over trials, per threshold.
pub fn estimate_ase(plan: &TrialPlan, tau_grid: &[f64]) -> Result<Vec<EstimateWithError>> {
    let sc = &plan.scenario;
    let rc = sc.sector.cell_radius();
    let density = sc.sector.n_sectors() as f64 / (PI * rc * rc);
    let sums = accumulate(plan, tau_grid.len(), |rng, out| {
        let users = sample_user_set(&sc.sector, sc.n_active, rng)?;
        let sinr = realize_sinr(&users, sc);
        for (o, &t) in out.iter_mut().zip(tau_grid) {
            let covered = sinr.iter().filter(|s| **s > t).count() as f64;
            *o = density * covered * (1.0 + t).log2();
        }
        Ok(())
    })?;
    Ok(finish(sums, plan.n_trials))
}
