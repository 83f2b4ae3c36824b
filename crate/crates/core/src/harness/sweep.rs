//! Parameter sweeps over both back-ends, emitted as CSV.

use std::fmt;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{apply_axis, Config};
use crate::analytics::{
    coverage_connected, coverage_typical, ergodic_connected, ergodic_typical, Diagnostics, Evaluation,
};
use crate::error::{invalid, Error, Result};
use crate::params::{SystemParams, Thresholds};
use crate::simulator::{simulate, Backend, EvalPoint, Metric, Scenario, Simulation};

pub const MIN_SIMULATED_TRIALS: u64 = 10_000;

/// Column order of the sweep CSV.
pub const CSV_HEADER: [&str; 11] = [
    "series",
    "scenario",
    "backend",
    "metric",
    "axis",
    "axis_value",
    "estimate",
    "half_width",
    "n_trials",
    "seed",
    "status",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    /// BS transmit power `P_b` in dBm at fixed noise.
    #[serde(rename = "snr_dbm")]
    SnrDbm,
    /// RIS half-length in m.
    #[serde(rename = "L")]
    L,
    #[serde(rename = "lambda_b")]
    LambdaB,
    #[serde(rename = "r_c")]
    RC,
    #[serde(rename = "alpha_t")]
    AlphaT,
    /// All three SINR thresholds, linear.
    #[serde(rename = "threshold")]
    Threshold,
}

impl Axis {
    pub fn as_str(self) -> &'static str {
        match self {
            Axis::SnrDbm => "snr_dbm",
            Axis::L => "L",
            Axis::LambdaB => "lambda_b",
            Axis::RC => "r_c",
            Axis::AlphaT => "alpha_t",
            Axis::Threshold => "threshold",
        }
    }

    /// Axes that leave the network draws unchanged and can share one simulation.
    fn shares_draws(self) -> bool {
        matches!(self, Axis::SnrDbm | Axis::Threshold)
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One curve of a sweep: a name and fixed overrides applied before the axis.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSpec {
    pub name: String,
    pub overrides: Vec<(Axis, f64)>,
}

impl SeriesSpec {
    pub fn plain(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            overrides: Vec::new(),
        }
    }

    fn with(name: impl Into<String>, overrides: &[(Axis, f64)]) -> Self {
        Self {
            name: name.into(),
            overrides: overrides.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: Axis,
    pub grid: Vec<f64>,
    pub scenarios: Vec<Scenario>,
    pub backends: Vec<Backend>,
    pub metrics: Vec<Metric>,
    pub n_trials: u64,
    pub master_seed: u64,
    pub series: Vec<SeriesSpec>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(invalid("sweep grid must not be empty"));
        }
        if self.grid.iter().any(|v| !v.is_finite()) {
            return Err(invalid("sweep grid values must be finite"));
        }
        let up = self.grid.windows(2).all(|w| w[1] > w[0]);
        let down = self.grid.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return Err(invalid("sweep grid must be strictly monotone"));
        }
        if self.scenarios.is_empty() {
            return Err(invalid("sweep needs at least one scenario"));
        }
        if self.backends.is_empty() {
            return Err(invalid("sweep needs at least one backend"));
        }
        if self.metrics.is_empty() {
            return Err(invalid("sweep needs at least one metric"));
        }
        if self.series.is_empty() {
            return Err(invalid("sweep needs at least one series"));
        }
        if self.backends.contains(&Backend::Simulated) && self.n_trials < MIN_SIMULATED_TRIALS {
            return Err(invalid(format!(
                "simulated sweeps need n_trials >= {MIN_SIMULATED_TRIALS}, got {}",
                self.n_trials
            )));
        }
        for s in &self.series {
            if s.overrides.iter().any(|o| o.0 == self.axis) {
                return Err(invalid(format!("series {} overrides the sweep axis", s.name)));
            }
        }
        Ok(())
    }
}

pub const PRESETS: [&str; 6] = ["fig3", "fig4", "fig5", "fig6", "fig7", "fig8"];

const SNR_GRID: [f64; 7] = [0.0, 2.5, 5.0, 7.5, 10.0, 12.5, 15.0];

fn density(spacing: f64) -> f64 {
    1.0 / (spacing * spacing * std::f64::consts::PI)
}

/// Named sweep presets.
pub fn preset(name: &str) -> Result<SweepSpec> {
    let snr = |series: Vec<SeriesSpec>, scenarios: &[Scenario], metrics: &[Metric]| SweepSpec {
        axis: Axis::SnrDbm,
        grid: SNR_GRID.to_vec(),
        scenarios: scenarios.to_vec(),
        backends: vec![Backend::Analytic, Backend::Simulated],
        metrics: metrics.to_vec(),
        n_trials: 100_000,
        master_seed: 1,
        series,
    };
    let coverage = [Metric::CoverageT, Metric::CoverageC];
    let noma = [Scenario::RisNoma];
    Ok(match name {
        "fig3" => snr(
            [300.0, 600.0]
                .iter()
                .map(|&d| SeriesSpec::with(format!("lambda_{d}"), &[(Axis::LambdaB, density(d))]))
                .collect(),
            &noma,
            &coverage,
        ),
        "fig4" => snr(vec![SeriesSpec::plain("comparison")], &Scenario::ALL, &coverage),
        "fig5" => {
            let mut series = Vec::new();
            for l in [0.75, 1.5, 3.0] {
                for a in [2.5, 3.0, 4.0] {
                    series.push(SeriesSpec::with(
                        format!("L{l}_alpha_t{a}"),
                        &[(Axis::L, l), (Axis::AlphaT, a)],
                    ));
                }
            }
            snr(series, &noma, &[Metric::CoverageT])
        }
        "fig6" => SweepSpec {
            axis: Axis::L,
            grid: vec![0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0],
            scenarios: noma.to_vec(),
            backends: vec![Backend::Analytic],
            metrics: vec![Metric::CoverageT],
            n_trials: 100_000,
            master_seed: 1,
            series: [2.5, 3.0, 4.0]
                .iter()
                .map(|&a| SeriesSpec::with(format!("alpha_t{a}"), &[(Axis::AlphaT, a)]))
                .collect(),
        },
        "fig7" => snr(
            [200.0, 400.0, 600.0]
                .iter()
                .map(|&d| SeriesSpec::with(format!("lambda_{d}"), &[(Axis::LambdaB, density(d))]))
                .collect(),
            &noma,
            &[Metric::RateT],
        ),
        "fig8" => snr(
            [50.0, 75.0, 100.0]
                .iter()
                .map(|&r| SeriesSpec::with(format!("r_c{r}"), &[(Axis::RC, r)]))
                .collect(),
            &noma,
            &[Metric::RateC],
        ),
        other => {
            return Err(invalid(format!(
                "unknown preset {other:?}; expected one of {}",
                PRESETS.join(", ")
            )))
        }
    })
}

/// Analytic value of `metric` for the RIS-NOMA scenario.
pub fn analytic_metric(params: &SystemParams, th: &Thresholds, metric: Metric, order: usize) -> Result<Evaluation> {
    match metric {
        Metric::CoverageT => coverage_typical(params, th),
        Metric::CoverageC => coverage_connected(params, th),
        Metric::RateT => ergodic_typical(params, th),
        Metric::RateC => ergodic_connected(params, order),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub series: String,
    pub scenario: Scenario,
    pub backend: Backend,
    pub metric: Metric,
    pub axis: Axis,
    pub axis_value: f64,
    pub estimate: Option<f64>,
    pub half_width: Option<f64>,
    pub n_trials: Option<u64>,
    pub seed: Option<u64>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    /// Lines written after the table, without the leading `#`.
    pub comments: Vec<String>,
}

fn num(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.8e}")).unwrap_or_default()
}

impl SweepOutput {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let _ = w.write_record(CSV_HEADER);
        for r in &self.rows {
            let _ = w.write_record([
                r.series.clone(),
                r.scenario.to_string(),
                r.backend.to_string(),
                r.metric.to_string(),
                r.axis.to_string(),
                format!("{:.8e}", r.axis_value),
                num(r.estimate),
                num(r.half_width),
                r.n_trials.map(|n| n.to_string()).unwrap_or_default(),
                r.seed.map(|s| s.to_string()).unwrap_or_default(),
                r.status.clone(),
            ]);
        }
        let mut out = String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default();
        for c in &self.comments {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        out
    }

    pub fn failed(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| !matches!(r.status.as_str(), "ok" | "unsupported"))
            .count()
    }
}

fn status_of(e: &Error) -> &'static str {
    match e {
        Error::ProbabilityExcursion { .. } => "excursion",
        Error::InvalidParameter(_) => "invalid",
        Error::Domain(_) => "domain",
        _ => "error",
    }
}

fn diag_line(d: &Diagnostics) -> String {
    let mut s = format!(
        "evals={} nodes={} hyp2f1_calls={} hyp2f1_max_terms={}",
        d.integrand_evals, d.rule_nodes, d.hyp2f1_calls, d.hyp2f1_max_terms
    );
    if let Some(v) = d.pre_clamp {
        s.push_str(&format!(" pre_clamp={v:.8e}"));
    }
    if d.infeasible {
        s.push_str(" infeasible");
    }
    if d.unconverged {
        s.push_str(" unconverged");
    }
    s
}

struct Point {
    value: f64,
    params: Result<SystemParams>,
    thresholds: Thresholds,
}

fn grid_points(config: &Config, spec: &SweepSpec, series: &SeriesSpec) -> Vec<Point> {
    let mut base = config.params;
    let mut th = config.thresholds;
    for &(axis, v) in &series.overrides {
        apply_axis(axis, v, &mut base, &mut th);
    }
    spec.grid
        .iter()
        .map(|&value| {
            let mut p = base;
            let mut t = th;
            apply_axis(spec.axis, value, &mut p, &mut t);
            let params = p.validate().and(t.validate()).map(|_| p);
            Point {
                value,
                params,
                thresholds: t,
            }
        })
        .collect()
}

/// Simulations per grid point; one shared run when the axis leaves draws unchanged.
fn simulations(points: &[Point], spec: &SweepSpec) -> Vec<Result<(Simulation, usize)>> {
    let ok: Vec<&SystemParams> = points.iter().filter_map(|p| p.params.as_ref().ok()).collect();
    if spec.axis.shares_draws() && ok.len() == points.len() {
        let evals: Vec<EvalPoint> = points
            .iter()
            .map(|p| EvalPoint {
                power: p.params.as_ref().map(|q| q.power).unwrap_or(ok[0].power),
                thresholds: p.thresholds,
            })
            .collect();
        let shared = simulate(ok[0], &evals, &spec.scenarios, spec.n_trials, spec.master_seed);
        return match shared {
            Ok(sim) => (0..points.len()).map(|i| Ok((sim.clone(), i))).collect(),
            Err(e) => {
                let msg = e.to_string();
                points
                    .iter()
                    .map(|_| Err(Error::InvalidParameter(msg.clone())))
                    .collect()
            }
        };
    }
    points
        .iter()
        .map(|p| {
            let params = p.params.as_ref().map_err(|e| Error::InvalidParameter(e.to_string()))?;
            let point = EvalPoint {
                power: params.power,
                thresholds: p.thresholds,
            };
            simulate(params, &[point], &spec.scenarios, spec.n_trials, spec.master_seed).map(|s| (s, 0))
        })
        .collect()
}

/// Evaluates every grid point × scenario × backend × metric of every series.
///
/// Rows come out in series, grid, scenario, backend, metric order whatever the
/// thread count. Failed points become rows with a status other than `ok`.
pub fn run_sweep(config: &Config, spec: &SweepSpec) -> Result<SweepOutput> {
    spec.validate()?;
    let mut out = SweepOutput::default();
    for series in &spec.series {
        let started = Instant::now();
        let points = grid_points(config, spec, series);
        let analytic: Vec<Vec<Option<Result<Evaluation>>>> =
            if spec.backends.contains(&Backend::Analytic) && spec.scenarios.contains(&Scenario::RisNoma) {
                points
                    .par_iter()
                    .map(|p| {
                        spec.metrics
                            .iter()
                            .map(|&m| {
                                Some(match &p.params {
                                    Ok(params) => analytic_metric(params, &p.thresholds, m, config.chebyshev_order),
                                    Err(e) => Err(Error::InvalidParameter(e.to_string())),
                                })
                            })
                            .collect()
                    })
                    .collect()
            } else {
                points
                    .iter()
                    .map(|_| spec.metrics.iter().map(|_| None).collect())
                    .collect()
            };
        let sims = if spec.backends.contains(&Backend::Simulated) {
            simulations(&points, spec)
        } else {
            Vec::new()
        };
        for (gi, point) in points.iter().enumerate() {
            if let Err(e) = &point.params {
                out.comments.push(format!(
                    "error series={} {}={:.8e}: {e}",
                    series.name, spec.axis, point.value
                ));
            }
            if let Some(Ok(sim)) = sims.get(gi) {
                if sim.0.resamples > 0 && (gi == 0 || !spec.axis.shares_draws()) {
                    out.comments.push(format!(
                        "simulation series={} {}={:.8e}: resamples={}",
                        series.name, spec.axis, point.value, sim.0.resamples
                    ));
                }
            }
            for &scenario in &spec.scenarios {
                for &backend in &spec.backends {
                    for (mi, &metric) in spec.metrics.iter().enumerate() {
                        let mut row = SweepRow {
                            series: series.name.clone(),
                            scenario,
                            backend,
                            metric,
                            axis: spec.axis,
                            axis_value: point.value,
                            estimate: None,
                            half_width: None,
                            n_trials: None,
                            seed: None,
                            status: "ok".into(),
                        };
                        let tag = format!(
                            "series={} scenario={scenario} backend={backend} metric={metric} {}={:.8e}",
                            series.name, spec.axis, point.value
                        );
                        match backend {
                            Backend::Analytic if scenario != Scenario::RisNoma => {
                                row.status = "unsupported".into();
                            }
                            Backend::Analytic => match &analytic[gi][mi] {
                                Some(Ok(ev)) => {
                                    row.estimate = Some(ev.value);
                                    if ev.diagnostics.unconverged {
                                        row.status = "unconverged".into();
                                    }
                                    out.comments.push(format!("{tag}: {}", diag_line(&ev.diagnostics)));
                                }
                                Some(Err(e)) => {
                                    row.status = status_of(e).into();
                                    out.comments.push(format!("error {tag}: {e}"));
                                }
                                None => row.status = "error".into(),
                            },
                            Backend::Simulated => match &sims[gi] {
                                Ok((sim, idx)) => {
                                    if let Some(r) = sim.metric(*idx, scenario, metric) {
                                        row.estimate = Some(r.estimate);
                                        row.half_width = Some(r.half_width_95);
                                        row.n_trials = Some(r.n_trials);
                                        row.seed = Some(spec.master_seed);
                                    } else {
                                        row.status = "error".into();
                                    }
                                }
                                Err(e) => {
                                    row.status = status_of(e).into();
                                    out.comments.push(format!("error {tag}: {e}"));
                                }
                            },
                        }
                        out.rows.push(row);
                    }
                }
            }
        }
        log::info!("series {} finished in {:.2?}", series.name, started.elapsed());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> SweepSpec {
        SweepSpec {
            axis: Axis::SnrDbm,
            grid: vec![0.0, 10.0],
            scenarios: vec![Scenario::RisNoma],
            backends: vec![Backend::Analytic],
            metrics: vec![Metric::CoverageT, Metric::RateC],
            n_trials: 0,
            master_seed: 1,
            series: vec![SeriesSpec::plain("t")],
        }
    }

    #[test]
    fn spec_validation() {
        assert!(tiny().validate().is_ok());
        let mut s = tiny();
        s.scenarios.clear();
        assert!(s.validate().is_err());
        let mut s = tiny();
        s.grid = vec![1.0, 1.0];
        assert!(s.validate().is_err());
        let mut s = tiny();
        s.backends.push(Backend::Simulated);
        assert!(s.validate().is_err());
        s.n_trials = MIN_SIMULATED_TRIALS;
        assert!(s.validate().is_ok());
    }

    #[test]
    fn presets_are_valid() {
        for name in PRESETS {
            preset(name).unwrap().validate().unwrap();
        }
        assert!(preset("fig9").is_err());
    }

    #[test]
    fn analytic_rows_and_unsupported_scenarios() {
        let mut s = tiny();
        s.scenarios = vec![Scenario::RisNoma, Scenario::RisOma];
        let out = run_sweep(&Config::paper_defaults(), &s).unwrap();
        assert_eq!(out.rows.len(), 2 * 2 * 2);
        assert!(out
            .rows
            .iter()
            .filter(|r| r.scenario == Scenario::RisOma)
            .all(|r| r.status == "unsupported"));
        let cov: Vec<f64> = out
            .rows
            .iter()
            .filter(|r| r.scenario == Scenario::RisNoma && r.metric == Metric::CoverageT)
            .map(|r| r.estimate.unwrap())
            .collect();
        assert!(cov[1] > cov[0]);
        let csv = out.to_csv();
        assert!(csv
            .starts_with("series,scenario,backend,metric,axis,axis_value,estimate,half_width,n_trials,seed,status\n"));
        assert!(csv.lines().any(|l| l.starts_with("# series=t")));
    }

    #[test]
    fn failing_point_does_not_stop_sweep() {
        let mut s = tiny();
        s.axis = Axis::L;
        s.grid = vec![-1.0, 1.0];
        let out = run_sweep(&Config::paper_defaults(), &s).unwrap();
        assert_eq!(out.rows[0].status, "invalid");
        assert_eq!(out.rows[2].status, "ok");
        assert_eq!(out.failed(), 2);
    }
}
