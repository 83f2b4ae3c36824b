//! Monte Carlo estimator of coverage and ergodic rate.
//!
//! Trial `i` of a run with master seed `s` draws from
//! `ChaCha8Rng::seed_from_u64(trial_seed(s, i))`, in the order BS process,
//! RIS, connected-user direction, fading. Trials are grouped in blocks of
//! [`BLOCK`] and block partials are merged in index order, so results do not
//! depend on the thread count.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{link_gains, sinr_all, sinr_oma, Fading, LinkGains, PowerAllocation, TypicalLink};
use crate::error::{invalid, Result};
use crate::geometry::NetworkRealization;
use crate::params::{SystemParams, Thresholds};

pub const BLOCK: u64 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    RisNoma,
    RisOma,
    ConventionalNoma,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::RisNoma, Scenario::RisOma, Scenario::ConventionalNoma];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::RisNoma => "ris_noma",
            Scenario::RisOma => "ris_oma",
            Scenario::ConventionalNoma => "conventional_noma",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Analytic,
    Simulated,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Backend::Analytic => "analytic",
            Backend::Simulated => "simulated",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    CoverageT,
    CoverageC,
    RateT,
    RateC,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::CoverageT, Metric::CoverageC, Metric::RateT, Metric::RateC];

    pub fn is_probability(self) -> bool {
        matches!(self, Metric::CoverageT | Metric::CoverageC)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Metric::CoverageT => "coverage_t",
            Metric::CoverageC => "coverage_c",
            Metric::RateT => "rate_t",
            Metric::RateC => "rate_c",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub gamma_sic: f64,
    pub gamma_t: f64,
    pub gamma_c: f64,
    pub covered_t: bool,
    pub covered_c: bool,
    /// `log₂(1+γ_t)`, zero when SIC fails; halved for the orthogonal baseline.
    pub rate_t: f64,
    /// `log₂(1+min(γ_c, a_c/a_t))` under NOMA.
    pub rate_c: f64,
    pub saturated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricResult {
    pub estimate: f64,
    pub half_width_95: f64,
    pub n_trials: u64,
    pub backend: Backend,
    pub scenario: Scenario,
    pub metric: Metric,
}

/// Stable per-trial seed: `splitmix64(splitmix64(master) ^ index)`.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ index)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn trial_rng(master: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(trial_seed(master, index))
}

/// One network and fading draw, reduced to power-free link gains.
#[derive(Debug, Clone)]
pub struct TrialDraw {
    pub realization: NetworkRealization,
    pub gains: LinkGains,
}

impl TrialDraw {
    pub fn sample(params: &SystemParams, intercept: f64, rng: &mut ChaCha8Rng) -> Result<Self> {
        let realization = NetworkRealization::sample(&params.spatial, rng);
        Self::with_realization(realization, params, intercept, rng)
    }

    /// Draws fading for a given realization.
    pub fn with_realization(
        realization: NetworkRealization,
        params: &SystemParams,
        intercept: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        let fading = Fading::sample(realization.bs.len(), realization.serving, &params.channel, rng)?;
        let gains = link_gains(
            &realization,
            &fading,
            &params.spatial,
            &params.channel,
            &params.options,
            intercept,
        )?;
        Ok(Self { realization, gains })
    }
}

/// Target SINR that delivers `log₂(1+γ)` in half the resource.
pub fn oma_threshold(gamma: f64) -> f64 {
    (1.0 + gamma).powi(2) - 1.0
}

/// Applies powers, thresholds and scenario rules to one draw.
pub fn evaluate(
    gains: &LinkGains,
    power: &PowerAllocation,
    th: &Thresholds,
    scenario: Scenario,
    params: &SystemParams,
) -> TrialOutcome {
    match scenario {
        Scenario::RisNoma | Scenario::ConventionalNoma => {
            let link = if scenario == Scenario::RisNoma {
                TypicalLink::Ris
            } else {
                TypicalLink::Conventional
            };
            let s = sinr_all(gains, link, power, &params.options);
            let sic_ok = s.gamma_sic > th.gamma_sic;
            let cap = power.a_c / power.a_t;
            TrialOutcome {
                gamma_sic: s.gamma_sic,
                gamma_t: s.gamma_t,
                gamma_c: s.gamma_c,
                covered_t: sic_ok && s.gamma_t > th.gamma_t,
                covered_c: s.gamma_c > th.gamma_c,
                rate_t: if sic_ok {
                    s.gamma_t.ln_1p() / std::f64::consts::LN_2
                } else {
                    0.0
                },
                rate_c: s.gamma_c.min(cap).ln_1p() / std::f64::consts::LN_2,
                saturated: s.saturated,
            }
        }
        Scenario::RisOma => {
            let (gt, gc, saturated) = sinr_oma(gains, TypicalLink::Ris, power);
            TrialOutcome {
                gamma_sic: f64::MAX,
                gamma_t: gt,
                gamma_c: gc,
                covered_t: gt > oma_threshold(th.gamma_t),
                covered_c: gc > oma_threshold(th.gamma_c),
                rate_t: 0.5 * gt.ln_1p() / std::f64::consts::LN_2,
                rate_c: 0.5 * gc.ln_1p() / std::f64::consts::LN_2,
                saturated,
            }
        }
    }
}

/// One trial, reproducible from `(master_seed, trial_index)`.
pub fn run_trial(
    params: &SystemParams,
    th: &Thresholds,
    scenario: Scenario,
    trial_index: u64,
    master_seed: u64,
) -> Result<TrialOutcome> {
    let mut rng = trial_rng(master_seed, trial_index);
    let draw = TrialDraw::sample(params, params.intercept()?, &mut rng)?;
    Ok(evaluate(&draw.gains, &params.power, th, scenario, params))
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Sufficient statistics of one (evaluation point, scenario) pair.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Accumulator {
    pub n: u64,
    pub covered_t: u64,
    pub covered_c: u64,
    pub saturated: u64,
    pub rate_t: CompensatedSum,
    pub rate_t_sq: CompensatedSum,
    pub rate_c: CompensatedSum,
    pub rate_c_sq: CompensatedSum,
}

impl Accumulator {
    pub fn push(&mut self, o: &TrialOutcome) {
        self.n += 1;
        self.covered_t += o.covered_t as u64;
        self.covered_c += o.covered_c as u64;
        self.saturated += o.saturated as u64;
        self.rate_t.add(o.rate_t);
        self.rate_t_sq.add(o.rate_t * o.rate_t);
        self.rate_c.add(o.rate_c);
        self.rate_c_sq.add(o.rate_c * o.rate_c);
    }

    pub fn merge(&mut self, other: &Accumulator) {
        self.n += other.n;
        self.covered_t += other.covered_t;
        self.covered_c += other.covered_c;
        self.saturated += other.saturated;
        self.rate_t.merge(&other.rate_t);
        self.rate_t_sq.merge(&other.rate_t_sq);
        self.rate_c.merge(&other.rate_c);
        self.rate_c_sq.merge(&other.rate_c_sq);
    }

    /// Estimate and 95% half-width: binomial for coverage, CLT for rates.
    pub fn metric(&self, metric: Metric, scenario: Scenario) -> MetricResult {
        let n = self.n.max(1) as f64;
        let (estimate, half_width_95) = match metric {
            Metric::CoverageT | Metric::CoverageC => {
                let k = if metric == Metric::CoverageT {
                    self.covered_t
                } else {
                    self.covered_c
                };
                let p = k as f64 / n;
                (p, 1.96 * (p * (1.0 - p) / n).sqrt())
            }
            Metric::RateT | Metric::RateC => {
                let (s, sq) = if metric == Metric::RateT {
                    (&self.rate_t, &self.rate_t_sq)
                } else {
                    (&self.rate_c, &self.rate_c_sq)
                };
                let mean = s.value() / n;
                let var = (sq.value() / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
                (mean, 1.96 * (var / n).sqrt())
            }
        };
        MetricResult {
            estimate,
            half_width_95,
            n_trials: self.n,
            backend: Backend::Simulated,
            scenario,
            metric,
        }
    }
}

/// Powers and thresholds evaluated on every draw of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalPoint {
    pub power: PowerAllocation,
    pub thresholds: Thresholds,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub n_trials: u64,
    pub master_seed: u64,
    pub scenarios: Vec<Scenario>,
    /// Number of empty BS draws that were redrawn.
    pub resamples: u64,
    /// `accumulators[point][scenario]`.
    pub accumulators: Vec<Vec<Accumulator>>,
}

impl Simulation {
    pub fn metric(&self, point: usize, scenario: Scenario, metric: Metric) -> Option<MetricResult> {
        let j = self.scenarios.iter().position(|&s| s == scenario)?;
        Some(self.accumulators.get(point)?[j].metric(metric, scenario))
    }
}

/// Runs `n_trials` draws and evaluates every point and scenario on each.
pub fn simulate(
    params: &SystemParams,
    points: &[EvalPoint],
    scenarios: &[Scenario],
    n_trials: u64,
    master_seed: u64,
) -> Result<Simulation> {
    if n_trials == 0 {
        return Err(invalid("n_trials must be at least 1"));
    }
    if points.is_empty() || scenarios.is_empty() {
        return Err(invalid("simulation needs at least one point and one scenario"));
    }
    params.validate()?;
    for p in points {
        p.power.validate()?;
        p.thresholds.validate()?;
    }
    let intercept = params.intercept()?;
    let empty = vec![vec![Accumulator::default(); scenarios.len()]; points.len()];
    let n_blocks = n_trials.div_ceil(BLOCK);
    let blocks: Vec<(Vec<Vec<Accumulator>>, u64)> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = empty.clone();
            let mut resamples = 0u64;
            let end = ((b + 1) * BLOCK).min(n_trials);
            for i in b * BLOCK..end {
                let mut rng = trial_rng(master_seed, i);
                let draw = TrialDraw::sample(params, intercept, &mut rng)?;
                resamples += draw.realization.resamples as u64;
                for (pi, p) in points.iter().enumerate() {
                    for (si, &s) in scenarios.iter().enumerate() {
                        acc[pi][si].push(&evaluate(&draw.gains, &p.power, &p.thresholds, s, params));
                    }
                }
            }
            Ok((acc, resamples))
        })
        .collect::<Result<_>>()?;
    let mut accumulators = empty;
    let mut resamples = 0;
    for (acc, r) in &blocks {
        resamples += r;
        for (row, brow) in accumulators.iter_mut().zip(acc) {
            for (a, b) in row.iter_mut().zip(brow) {
                a.merge(b);
            }
        }
    }
    if resamples > 0 {
        log::info!("{resamples} empty BS draws were redrawn");
    }
    Ok(Simulation {
        n_trials,
        master_seed,
        scenarios: scenarios.to_vec(),
        resamples,
        accumulators,
    })
}

fn single(params: &SystemParams, th: &Thresholds, scenario: Scenario, n: u64, seed: u64) -> Result<Accumulator> {
    let point = EvalPoint {
        power: params.power,
        thresholds: *th,
    };
    Ok(simulate(params, &[point], &[scenario], n, seed)?.accumulators[0][0])
}

/// Coverage of the typical and the connected user.
pub fn estimate_coverage(
    params: &SystemParams,
    th: &Thresholds,
    scenario: Scenario,
    n_trials: u64,
    master_seed: u64,
) -> Result<(MetricResult, MetricResult)> {
    let acc = single(params, th, scenario, n_trials, master_seed)?;
    Ok((
        acc.metric(Metric::CoverageT, scenario),
        acc.metric(Metric::CoverageC, scenario),
    ))
}

/// Ergodic rates (BPCU) of the typical and the connected user.
pub fn estimate_ergodic(
    params: &SystemParams,
    th: &Thresholds,
    scenario: Scenario,
    n_trials: u64,
    master_seed: u64,
) -> Result<(MetricResult, MetricResult)> {
    let acc = single(params, th, scenario, n_trials, master_seed)?;
    Ok((acc.metric(Metric::RateT, scenario), acc.metric(Metric::RateC, scenario)))
}
