//! Cross-checks of the analytic back-end against the simulator and the
//! oracles, reported as one row per check.

use std::fmt;

use super::config::Config;
use super::sweep::{run_sweep, Axis, SeriesSpec, SweepSpec, MIN_SIMULATED_TRIALS};
use crate::analytics::{
    coverage_connected, coverage_typical, coverage_typical_alpha2, coverage_typical_alpha4,
    coverage_typical_asymptotic_l, ergodic_connected, ergodic_slope_l, ergodic_typical, ergodic_typical_alpha2,
    ergodic_typical_alpha4,
};
use crate::error::{Error, Result};
use crate::oracle;
use crate::params::{SystemParams, Thresholds};
use crate::simulator::{simulate, Backend, EvalPoint, Metric, Scenario};
use crate::specfun::{erfc, gauss_2f1};

/// `P_b` grid of the analytic-versus-simulation checks, dBm.
pub const VALIDATION_SNR_DBM: [f64; 4] = [0.0, 5.0, 10.0, 15.0];
pub const SLOPE_GRID_M: [f64; 5] = [30.0, 60.0, 100.0, 200.0, 300.0];
pub const TREND_L_GRID_M: [f64; 8] = [0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0];
pub const TREND_SPACINGS_M: [f64; 3] = [600.0, 400.0, 200.0];
pub const TREND_R_C_M: [f64; 3] = [50.0, 75.0, 100.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Profile {
    #[default]
    Default,
    /// Halves every tolerance and asserts the α = 2 closed forms.
    Strict,
}

impl Profile {
    fn scale(self) -> f64 {
        match self {
            Profile::Default => 1.0,
            Profile::Strict => 0.5,
        }
    }
}

impl std::str::FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "default" => Ok(Profile::Default),
            "strict" => Ok(Profile::Strict),
            other => Err(Error::InvalidParameter(format!(
                "unknown profile {other:?} (default, strict)"
            ))),
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Profile::Default => "default",
            Profile::Strict => "strict",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Measured and logged but not asserted.
    Reported,
    /// Simulation too small to judge; not asserted.
    Underpowered,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Reported => "reported",
            CheckStatus::Underpowered => "underpowered",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub criterion: u8,
    pub name: String,
    /// Deviation compared against the tolerance; larger is worse.
    pub measured: f64,
    pub tolerance: f64,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub profile: Profile,
    pub n_trials: u64,
    pub master_seed: u64,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    /// Checks belonging to criterion `k`.
    pub fn criterion(&self, k: u8) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(move |c| c.criterion == k)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let _ = w.write_record(["criterion", "check", "measured", "tolerance", "status", "detail"]);
        for c in &self.checks {
            let _ = w.write_record([
                c.criterion.to_string(),
                c.name.clone(),
                format!("{:.8e}", c.measured),
                format!("{:.8e}", c.tolerance),
                c.status.to_string(),
                c.detail.clone(),
            ]);
        }
        let mut out = String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default();
        out.push_str(&format!(
            "# profile={} n_trials={} master_seed={} overall={}\n",
            self.profile,
            self.n_trials,
            self.master_seed,
            if self.passed() { "pass" } else { "fail" }
        ));
        out
    }
}

struct Suite<'a> {
    cfg: &'a Config,
    profile: Profile,
    checks: Vec<Check>,
}

impl Suite<'_> {
    fn push(&mut self, criterion: u8, name: &str, measured: f64, tolerance: f64, detail: String) {
        let tolerance = tolerance * self.profile.scale();
        let status = if measured <= tolerance {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        self.checks.push(Check {
            criterion,
            name: name.into(),
            measured,
            tolerance,
            status,
            detail,
        });
    }

    fn push_with(
        &mut self,
        criterion: u8,
        name: &str,
        measured: f64,
        tolerance: f64,
        status: CheckStatus,
        detail: String,
    ) {
        self.checks.push(Check {
            criterion,
            name: name.into(),
            measured,
            tolerance: tolerance * self.profile.scale(),
            status,
            detail,
        });
    }

    fn error(&mut self, criterion: u8, name: &str, e: &Error) {
        self.checks.push(Check {
            criterion,
            name: name.into(),
            measured: f64::NAN,
            tolerance: f64::NAN,
            status: CheckStatus::Fail,
            detail: format!("error: {e}"),
        });
    }

    /// Downgrades the last check to underpowered when the simulation is small.
    fn power_guard(&mut self, n: u64) {
        if n < MIN_SIMULATED_TRIALS {
            if let Some(c) = self.checks.last_mut() {
                c.status = CheckStatus::Underpowered;
                c.detail.push_str(&format!("; n_trials {n} < {MIN_SIMULATED_TRIALS}"));
            }
        }
    }

    fn params(&self) -> SystemParams {
        self.cfg.params
    }

    fn thresholds(&self) -> Thresholds {
        self.cfg.thresholds
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.6e}")).collect::<Vec<_>>().join(";")
}

fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Criteria 1–3 and the scenario orderings of 9, from one shared simulation.
fn analytic_vs_simulation(s: &mut Suite) -> Result<()> {
    let params = s.params();
    let th = s.thresholds();
    let n = s.cfg.validate.n_trials;
    let points: Vec<SystemParams> = VALIDATION_SNR_DBM.iter().map(|&d| params.with_p_b_dbm(d)).collect();
    let evals: Vec<EvalPoint> = points
        .iter()
        .map(|p| EvalPoint {
            power: p.power,
            thresholds: th,
        })
        .collect();
    let sim = simulate(&params, &evals, &Scenario::ALL, n, s.cfg.validate.master_seed)?;
    let mc = |i: usize, sc: Scenario, m: Metric| sim.metric(i, sc, m).map(|r| r.estimate).unwrap_or(f64::NAN);

    let mut gaps = [vec![], vec![], vec![], vec![]];
    for (i, p) in points.iter().enumerate() {
        let analytic = [
            coverage_typical(p, &th)?.value,
            coverage_connected(p, &th)?.value,
            ergodic_typical(p, &th)?.value,
            ergodic_connected(p, s.cfg.chebyshev_order)?.value,
        ];
        for (k, m) in Metric::ALL.iter().enumerate() {
            gaps[k].push(analytic[k] - mc(i, Scenario::RisNoma, *m));
        }
    }
    let grid = format!("P_b_dbm={}", join(&VALIDATION_SNR_DBM));
    s.push(
        1,
        "coverage_t_vs_mc",
        max_abs(&gaps[0]),
        0.05,
        format!("{grid}; analytic-mc={}", join(&gaps[0])),
    );
    s.power_guard(n);
    s.push(
        2,
        "coverage_c_vs_mc",
        max_abs(&gaps[1]),
        0.03,
        format!("{grid}; analytic-mc={}", join(&gaps[1])),
    );
    s.power_guard(n);
    s.push(
        3,
        "rate_t_vs_mc",
        max_abs(&gaps[2]),
        0.1,
        format!("{grid}; analytic-mc={}", join(&gaps[2])),
    );
    s.power_guard(n);
    s.push(
        3,
        "rate_c_vs_mc",
        max_abs(&gaps[3]),
        0.1,
        format!("{grid}; analytic-mc={}", join(&gaps[3])),
    );
    s.power_guard(n);

    // orderings: the measured value is the largest violation, zero if none
    let margin = |a: Scenario, b: Scenario, m: Metric| -> Vec<f64> {
        (0..points.len()).map(|i| mc(i, a, m) - mc(i, b, m)).collect()
    };
    let violation = |d: &[f64]| d.iter().fold(0.0f64, |v, x| v.max(-x));
    let noma_oma = margin(Scenario::RisNoma, Scenario::RisOma, Metric::CoverageC);
    s.push(
        9,
        "noma_c_coverage_ge_oma",
        violation(&noma_oma),
        0.0,
        format!("{grid}; ris_noma-ris_oma={}", join(&noma_oma)),
    );
    s.power_guard(n);
    let mut worst = 0.0f64;
    let mut detail = Vec::new();
    for sc in [Scenario::RisNoma, Scenario::RisOma] {
        let d = margin(sc, Scenario::ConventionalNoma, Metric::CoverageT);
        worst = worst.max(violation(&d));
        detail.push(format!("{sc}-conventional_noma={}", join(&d)));
    }
    s.push(
        9,
        "ris_t_coverage_ge_conventional",
        worst,
        0.0,
        format!("{grid}; {}", detail.join("; ")),
    );
    s.power_guard(n);
    let rates = margin(Scenario::RisNoma, Scenario::ConventionalNoma, Metric::RateT);
    s.push_with(
        9,
        "ris_t_rate_vs_conventional",
        violation(&rates),
        0.0,
        CheckStatus::Reported,
        format!("{grid}; ris_noma-conventional_noma={}", join(&rates)),
    );
    Ok(())
}

/// Criterion 4: kernel against the integral oracles.
fn kernel_oracles(s: &mut Suite) {
    let mut worst = 0.0f64;
    let mut poles = 0;
    let mut mismatch = Vec::new();
    for alpha in [2.0, 2.4, 3.0, 4.0] {
        let a = -2.0 / alpha;
        for m in 1..=8 {
            for z in [0.0, -0.1, -1.0, -10.0, -100.0] {
                let b = m as f64;
                match (gauss_2f1(a, b, 1.0 + a, z), oracle::hyp2f1_euler(a, b, 1.0 + a, z)) {
                    (Ok(k), Ok(o)) => worst = worst.max(((k - o) / o).abs()),
                    (Err(_), Err(_)) => poles += 1,
                    _ => mismatch.push(format!("alpha={alpha} m={m} z={z}")),
                }
            }
        }
    }
    if mismatch.is_empty() {
        s.push(
            4,
            "hyp2f1_vs_euler_integral",
            worst,
            1e-9,
            format!("max relative error; {poles} grid points are poles on both routes"),
        );
    } else {
        s.push(
            4,
            "hyp2f1_vs_euler_integral",
            f64::INFINITY,
            1e-9,
            format!("routes disagree on domain at {}", mismatch.join(";")),
        );
    }
    let worst = (0..=120)
        .map(|i| {
            let x = 0.05 * i as f64;
            let o = oracle::erfc_quadrature(x);
            ((erfc(x) - o) / o).abs()
        })
        .fold(0.0, f64::max);
    s.push(
        4,
        "erfc_vs_quadrature",
        worst,
        1e-10,
        "max relative error on [0, 6]".into(),
    );
}

/// Criterion 5: closed forms against the integrals they approximate.
fn closed_forms(s: &mut Suite) -> Result<()> {
    let th = s.thresholds();
    let mut p4 = s.params();
    p4.channel.alpha_t = 4.0;
    let integral = coverage_typical(&p4, &th)?.value;
    let closed = coverage_typical_alpha4(&p4, &th, 200)?.value;
    s.push(
        5,
        "alpha4_coverage_closed_form",
        ((closed - integral) / integral).abs(),
        1e-3,
        format!("K=200 closed={closed:.9e} integral={integral:.9e}"),
    );
    let integral = ergodic_typical(&p4, &th)?.value;
    let closed = ergodic_typical_alpha4(&p4, &th, 200, 200, 200)?.value;
    s.push(
        5,
        "alpha4_rate_closed_form",
        ((closed - integral) / integral).abs(),
        1e-2,
        format!("K=J=V=200 closed={closed:.9e} integral={integral:.9e}"),
    );

    // The α = 2 closed forms are logged, and asserted only under the strict profile.
    let mut p2 = s.params();
    p2.channel.alpha_t = 2.0;
    p2.channel.rho_t = 0.0;
    let strict = s.profile == Profile::Strict;
    let status = |gap: f64, tol: f64| {
        if !strict {
            CheckStatus::Reported
        } else if gap <= tol * 0.5 {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        }
    };
    let cov = coverage_typical_alpha2(&p2, &th)?;
    let rel = |gap: f64, base: f64| (gap / base).abs();
    let g = rel(cov.gap_verbatim(), cov.integral.value);
    s.push_with(
        5,
        "alpha2_coverage_closed_form",
        g,
        1e-3,
        status(g, 1e-3),
        format!(
            "rho_t=0 closed={:.9e} rederived={:.9e} integral={:.9e}",
            cov.verbatim, cov.rederived, cov.integral.value
        ),
    );
    let rate = ergodic_typical_alpha2(&p2, &th, 200, 200)?;
    let g = rel(rate.gap_verbatim(), rate.integral.value);
    s.push_with(
        5,
        "alpha2_rate_closed_form",
        g,
        1e-2,
        status(g, 1e-2),
        format!(
            "rho_t=0 J=V=200 closed={:.9e} rederived={:.9e} integral={:.9e}",
            rate.verbatim, rate.rederived, rate.integral.value
        ),
    );
    Ok(())
}

/// Criterion 6: large-aperture limit and the flattening rate.
fn asymptotics(s: &mut Suite) -> Result<()> {
    let th = s.thresholds();
    let p = s.params().with_half_length(20.0);
    let exact = coverage_typical(&p, &th)?.value;
    let limit = coverage_typical_asymptotic_l(&p, &th)?.upper_limit;
    s.push(
        6,
        "coverage_t_limit_at_L20",
        (exact - limit).abs(),
        0.05,
        format!("integral={exact:.9e} limit={limit:.9e}"),
    );
    let slope = ergodic_slope_l(&s.params(), &th, &SLOPE_GRID_M)?;
    s.push(
        6,
        "rate_t_slope_per_decade_L",
        slope.slope.abs(),
        0.05,
        format!("L_m={}; rate={}", join(&slope.half_lengths), join(&slope.rates)),
    );
    Ok(())
}

/// Criterion 7: sampler laws.
fn distributions(s: &mut Suite) {
    let n = s.cfg.validate.ks_samples;
    for r in oracle::ks_geometry(&s.params(), n, s.cfg.validate.master_seed ^ 0x6b73) {
        let detail = format!(
            "n={} critical value at 1% before profile scaling={:.6e}",
            r.n, r.critical
        );
        let name = format!("ks_{}", r.target.as_str());
        if r.target == oracle::KsTarget::AngleUnobstructed {
            let status = if r.passed() {
                CheckStatus::Reported
            } else {
                CheckStatus::Fail
            };
            s.push_with(
                7,
                &name,
                r.statistic,
                r.critical,
                status,
                format!("{detail}; BS exclusion removed"),
            );
        } else {
            s.push(7, &name, r.statistic, r.critical, detail);
        }
    }
}

/// Criterion 8: interference Laplace transforms.
fn laplace(s: &mut Suite) -> Result<()> {
    let p = s.params();
    let draws = s.cfg.validate.laplace_draws;
    let seed = s.cfg.validate.master_seed ^ 0x6c74;
    let (r_br0, r_ru0) = oracle::typical_reference_distances(&p);
    let sets = [
        (
            "laplace_connected_vs_mc",
            oracle::laplace_connected_mc(&p, &oracle::LAPLACE_GRID, draws, seed)?,
        ),
        (
            "laplace_typical_vs_mc",
            oracle::laplace_typical_mc(&p, r_br0, r_ru0, &oracle::LAPLACE_GRID, draws, seed)?,
        ),
    ];
    for (name, pts) in sets {
        let errs: Vec<f64> = pts.iter().map(|q| q.rel_error()).collect();
        s.push(
            8,
            name,
            max_abs(&errs),
            0.02,
            format!(
                "draws={draws}; s*E[I]={}; rel_err={}",
                join(&oracle::LAPLACE_GRID),
                join(&errs)
            ),
        );
    }
    Ok(())
}

/// Criterion 9: analytic trends.
fn trends(s: &mut Suite) -> Result<()> {
    let th = s.thresholds();
    let base = s.params();
    let rising = |v: &[f64]| v.windows(2).fold(0.0f64, |w, p| w.max(p[0] - p[1]));

    let cov: Vec<f64> = TREND_L_GRID_M
        .iter()
        .map(|&l| coverage_typical(&base.with_half_length(l), &th).map(|e| e.value))
        .collect::<Result<_>>()?;
    s.push(
        9,
        "coverage_t_nondecreasing_in_L",
        rising(&cov),
        0.0,
        format!("L_m={}; coverage_t={}", join(&TREND_L_GRID_M), join(&cov)),
    );

    let rate: Vec<f64> = TREND_SPACINGS_M
        .iter()
        .map(|&d| ergodic_typical(&base.with_lambda_b(1.0 / (d * d * std::f64::consts::PI)), &th).map(|e| e.value))
        .collect::<Result<_>>()?;
    let strict_rise = rate.windows(2).fold(0.0f64, |w, p| {
        if p[1] > p[0] {
            w
        } else {
            w.max(p[0] - p[1]).max(f64::MIN_POSITIVE)
        }
    });
    s.push(
        9,
        "rate_t_increasing_in_lambda_b",
        strict_rise,
        0.0,
        format!("spacing_m={}; rate_t={}", join(&TREND_SPACINGS_M), join(&rate)),
    );

    let rate: Vec<f64> = TREND_R_C_M
        .iter()
        .map(|&r| {
            let mut p = base;
            p.spatial.r_c = r;
            ergodic_connected(&p, s.cfg.chebyshev_order).map(|e| e.value)
        })
        .collect::<Result<_>>()?;
    let strict_fall = rate.windows(2).fold(0.0f64, |w, p| {
        if p[1] < p[0] {
            w
        } else {
            w.max(p[1] - p[0]).max(f64::MIN_POSITIVE)
        }
    });
    s.push(
        9,
        "rate_c_decreasing_in_r_c",
        strict_fall,
        0.0,
        format!("r_c_m={}; rate_c={}", join(&TREND_R_C_M), join(&rate)),
    );
    Ok(())
}

/// Criterion 10: a mixed sweep is byte-identical on one and on eight threads.
fn determinism(s: &mut Suite) -> Result<()> {
    let spec = SweepSpec {
        axis: Axis::SnrDbm,
        grid: vec![0.0, 10.0],
        scenarios: Scenario::ALL.to_vec(),
        backends: vec![Backend::Analytic, Backend::Simulated],
        metrics: Metric::ALL.to_vec(),
        n_trials: MIN_SIMULATED_TRIALS,
        master_seed: s.cfg.validate.master_seed,
        series: vec![SeriesSpec::plain("determinism")],
    };
    let run = |threads: usize| -> Result<String> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        pool.install(|| run_sweep(s.cfg, &spec)).map(|o| o.to_csv())
    };
    let one = run(1)?;
    let eight = run(8)?;
    let same = one == eight;
    s.push(
        10,
        "sweep_bytes_threads_1_vs_8",
        if same { 0.0 } else { 1.0 },
        0.0,
        format!("{} bytes; identical={same}", one.len()),
    );
    Ok(())
}

/// Runs the full cross-check suite. Failures are report content, never errors.
pub fn validate(config: &Config, profile: Profile) -> ValidationReport {
    let mut s = Suite {
        cfg: config,
        profile,
        checks: Vec::new(),
    };
    let stages: [(&str, u8, fn(&mut Suite) -> Result<()>); 6] = [
        ("analytic_vs_simulation", 1, analytic_vs_simulation),
        ("closed_forms", 5, closed_forms),
        ("asymptotics", 6, asymptotics),
        ("laplace", 8, laplace),
        ("trends", 9, trends),
        ("determinism", 10, determinism),
    ];
    for (i, (name, criterion, stage)) in stages.into_iter().enumerate() {
        let started = std::time::Instant::now();
        if let Err(e) = stage(&mut s) {
            s.error(criterion, name, &e);
        }
        log::info!("{name} finished in {:.2?}", started.elapsed());
        if i == 0 {
            kernel_oracles(&mut s);
        }
        if i == 2 {
            distributions(&mut s);
        }
    }
    s.checks.sort_by_key(|c| c.criterion);
    ValidationReport {
        profile,
        n_trials: config.validate.n_trials,
        master_seed: config.validate.master_seed,
        checks: s.checks,
    }
}
