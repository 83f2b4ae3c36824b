//! TOML configuration with unit-suffixed keys.
//!
//! Every file starts from the `paper-defaults` settings and overrides what it
//! names. Unknown keys are rejected. dBm and dB values become linear here and
//! nowhere else in the harness.

use std::path::Path;

use serde::Deserialize;

use super::sweep::{Axis, SeriesSpec, SweepSpec};
use crate::analytics::DEFAULT_CHEBYSHEV_ORDER;
use crate::channel::{
    dbm_to_watts, ConnectedIntra, InterceptRoute, InterferenceTail, PathLossModel, SicChannel, SPEED_OF_LIGHT,
};
use crate::error::{Error, Result};
use crate::params::{noise_dbm, SystemParams, Thresholds};
use crate::simulator::{Backend, Metric, Scenario};

pub const PAPER_DEFAULTS: &str = "paper-defaults";

/// Sample sizes and seed of the validation suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidateSettings {
    pub n_trials: u64,
    pub master_seed: u64,
    pub ks_samples: usize,
    pub laplace_draws: u64,
}

impl Default for ValidateSettings {
    fn default() -> Self {
        Self {
            n_trials: 200_000,
            master_seed: 1,
            ks_samples: 100_000,
            laplace_draws: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub params: SystemParams,
    pub thresholds: Thresholds,
    /// Chebyshev order for the connected-user rate.
    pub chebyshev_order: usize,
    pub sweep: Option<SweepSpec>,
    pub validate: ValidateSettings,
}

impl Config {
    pub fn paper_defaults() -> Self {
        Self {
            params: SystemParams::paper_defaults(),
            thresholds: Thresholds::default(),
            chebyshev_order: DEFAULT_CHEBYSHEV_ORDER,
            sweep: None,
            validate: ValidateSettings::default(),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    preset: Option<String>,
    spatial: Option<RawSpatial>,
    channel: Option<RawChannel>,
    power: Option<RawPower>,
    thresholds: Option<RawThresholds>,
    model: Option<RawModel>,
    sweep: Option<RawSweep>,
    validate: Option<RawValidate>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpatial {
    lambda_b_per_m2: Option<f64>,
    lambda_u_per_m2: Option<f64>,
    #[serde(rename = "R_L_m")]
    r_l_m: Option<f64>,
    r_c_m: Option<f64>,
    sim_radius_m: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChannel {
    #[serde(rename = "L_m")]
    l_m: Option<f64>,
    alpha_t: Option<f64>,
    alpha_c: Option<f64>,
    alpha_rf: Option<f64>,
    #[serde(rename = "C")]
    intercept: Option<f64>,
    f_c_hz: Option<f64>,
    rho_a: Option<f64>,
    rho_t: Option<f64>,
    m_t: Option<u32>,
    m_c: Option<u32>,
    phi_0_rad: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPower {
    #[serde(rename = "P_b_dbm")]
    p_b_dbm: Option<f64>,
    a_c: Option<f64>,
    a_t: Option<f64>,
    sigma2_dbm: Option<f64>,
    noise_figure_db: Option<f64>,
    bandwidth_hz: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawThresholds {
    gamma_sic: Option<f64>,
    gamma_t: Option<f64>,
    gamma_c: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    sic_channel: Option<SicChannel>,
    connected_intra: Option<ConnectedIntra>,
    interference_tail: Option<InterferenceTail>,
    intercept_route: Option<InterceptRoute>,
    typical_law: Option<String>,
    aperture_points: Option<usize>,
    chebyshev_order: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    series: Option<String>,
    axis: Axis,
    grid: Vec<f64>,
    scenarios: Vec<Scenario>,
    backends: Vec<Backend>,
    metrics: Vec<Metric>,
    n_trials: Option<u64>,
    master_seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawValidate {
    n_trials: Option<u64>,
    master_seed: Option<u64>,
    ks_samples: Option<usize>,
    laplace_draws: Option<u64>,
}

/// Reads a config file, or returns the defaults for the name `paper-defaults`.
pub fn load_config(path: impl AsRef<Path>) -> Result<Config> {
    let path = path.as_ref();
    if path.as_os_str() == PAPER_DEFAULTS {
        return Ok(Config::paper_defaults());
    }
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::ConfigNotFound(path.display().to_string()),
        _ => Error::Io(e),
    })?;
    parse_config(&text)
}

/// 1-based line of `key` inside `[section]`, or 0 when absent.
fn key_line(text: &str, section: &str, key: &str) -> usize {
    let mut current = String::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if let Some(name) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            current = name.trim().to_string();
            continue;
        }
        if current == section {
            if let Some(rest) = t.strip_prefix(key) {
                if rest.trim_start().starts_with('=') {
                    return i + 1;
                }
            }
        }
    }
    0
}

struct Checker<'a> {
    text: &'a str,
}

impl Checker<'_> {
    fn fail(&self, section: &str, key: &str, message: String) -> Error {
        Error::Config {
            line: key_line(self.text, section, key),
            message: format!("{section}.{key}: {message}"),
        }
    }

    fn positive(&self, section: &str, key: &str, v: Option<f64>) -> Result<Option<f64>> {
        match v {
            Some(x) if !(x > 0.0 && x.is_finite()) => {
                Err(self.fail(section, key, format!("must be positive and finite, got {x}")))
            }
            _ => Ok(v),
        }
    }

    fn within(&self, section: &str, key: &str, v: Option<f64>, lo: f64, hi: f64) -> Result<Option<f64>> {
        match v {
            Some(x) if !(lo..=hi).contains(&x) => {
                Err(self.fail(section, key, format!("must lie in [{lo}, {hi}], got {x}")))
            }
            _ => Ok(v),
        }
    }

    fn above(&self, section: &str, key: &str, v: Option<f64>, bound: f64) -> Result<Option<f64>> {
        match v {
            Some(x) if !(x > bound && x.is_finite()) => {
                Err(self.fail(section, key, format!("must exceed {bound}, got {x}")))
            }
            _ => Ok(v),
        }
    }
}

fn parse_error(text: &str, e: toml::de::Error) -> Error {
    let line = e
        .span()
        .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
        .unwrap_or(0);
    Error::Config {
        line,
        message: e.message().to_string(),
    }
}

pub fn parse_config(text: &str) -> Result<Config> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| parse_error(text, e))?;
    let ck = Checker { text };
    let mut cfg = Config::paper_defaults();
    if let Some(name) = &raw.preset {
        if name != PAPER_DEFAULTS {
            return Err(Error::Config {
                line: text
                    .lines()
                    .position(|l| l.trim_start().starts_with("preset"))
                    .map_or(0, |i| i + 1),
                message: format!("unknown preset {name:?}; the only base preset is {PAPER_DEFAULTS:?}"),
            });
        }
    }
    let p = &mut cfg.params;

    let s = raw.spatial.unwrap_or_default();
    if let Some(v) = ck.positive("spatial", "lambda_b_per_m2", s.lambda_b_per_m2)? {
        *p = p.with_lambda_b(v);
    }
    if let Some(v) = ck.positive("spatial", "lambda_u_per_m2", s.lambda_u_per_m2)? {
        p.spatial.lambda_u = v;
    }
    if let Some(v) = ck.positive("spatial", "R_L_m", s.r_l_m)? {
        p.spatial.los_radius = v;
    }
    if let Some(v) = ck.positive("spatial", "r_c_m", s.r_c_m)? {
        p.spatial.r_c = v;
    }
    if let Some(v) = ck.above("spatial", "sim_radius_m", s.sim_radius_m, p.spatial.los_radius)? {
        p.spatial.sim_radius = v;
    }
    let deficit = p.spatial.truncation_deficit(p.channel.alpha_c);
    if deficit >= crate::params::MAX_TRUNCATION_DEFICIT {
        return Err(ck.fail(
            "spatial",
            "sim_radius_m",
            format!("window loses {deficit:.2e} of the mean interference, limit 1e-3"),
        ));
    }

    let c = raw.channel.unwrap_or_default();
    if let Some(v) = ck.positive("channel", "L_m", c.l_m)? {
        p.channel.half_length = v;
    }
    if let Some(v) = ck.above("channel", "alpha_t", c.alpha_t, 1.0)? {
        p.channel.alpha_t = v;
    }
    if let Some(v) = ck.above("channel", "alpha_c", c.alpha_c, 2.0)? {
        p.channel.alpha_c = v;
    }
    if let Some(v) = ck.above("channel", "alpha_rf", c.alpha_rf, 2.0)? {
        p.channel.alpha_rf = v;
    }
    if let Some(v) = ck.positive("channel", "C", c.intercept)? {
        p.channel.intercept = v;
    }
    if let Some(v) = ck.positive("channel", "f_c_hz", c.f_c_hz)? {
        p.channel.f_c = v;
        p.channel.k = 2.0 * std::f64::consts::PI * v / SPEED_OF_LIGHT;
    }
    if let Some(v) = ck.within("channel", "rho_a", c.rho_a, f64::MIN_POSITIVE, 1.0 - f64::EPSILON)? {
        p.channel.rho_a = v;
    }
    if let Some(v) = ck.within("channel", "rho_t", c.rho_t, 0.0, 1.0)? {
        p.channel.rho_t = v;
    }
    for (key, v, slot) in [("m_t", c.m_t, &mut p.channel.m_t), ("m_c", c.m_c, &mut p.channel.m_c)] {
        if let Some(m) = v {
            if !(1..=20).contains(&m) {
                return Err(ck.fail("channel", key, format!("must lie in [1, 20], got {m}")));
            }
            *slot = m;
        }
    }
    if let Some(v) = c.phi_0_rad {
        p.channel.phi_0 = v;
    }

    let w = raw.power.unwrap_or_default();
    if let Some(v) = w.p_b_dbm {
        p.power.p_b = dbm_to_watts(v);
    }
    if let Some(v) = ck.within("power", "a_c", w.a_c, 0.0, 1.0)? {
        p.power.a_c = v;
        if w.a_t.is_none() {
            p.power.a_t = 1.0 - v;
        }
    }
    if let Some(v) = ck.within("power", "a_t", w.a_t, 0.0, 1.0)? {
        p.power.a_t = v;
        if w.a_c.is_none() {
            p.power.a_c = 1.0 - v;
        }
    }
    if !(p.power.a_c > p.power.a_t) {
        return Err(ck.fail(
            "power",
            if w.a_c.is_some() { "a_c" } else { "a_t" },
            format!(
                "a_c > a_t required, got a_c = {} and a_t = {}",
                p.power.a_c, p.power.a_t
            ),
        ));
    }
    if (p.power.a_c + p.power.a_t - 1.0).abs() > 1e-9 {
        return Err(ck.fail("power", "a_t", "a_c + a_t must equal 1".into()));
    }
    match (w.sigma2_dbm, w.noise_figure_db.or(w.bandwidth_hz.map(|_| 10.0))) {
        (Some(_), Some(_)) => {
            return Err(ck.fail(
                "power",
                "sigma2_dbm",
                "give either sigma2_dbm or noise_figure_db/bandwidth_hz, not both".into(),
            ))
        }
        (Some(v), None) => p.power.sigma2 = dbm_to_watts(v),
        (None, Some(nf)) => {
            let bw = ck
                .positive("power", "bandwidth_hz", w.bandwidth_hz)?
                .unwrap_or(p.channel.f_c);
            p.power.sigma2 = dbm_to_watts(noise_dbm(bw, nf));
        }
        (None, None) => {}
    }

    let t = raw.thresholds.unwrap_or_default();
    for (key, v, slot) in [
        ("gamma_sic", t.gamma_sic, &mut cfg.thresholds.gamma_sic),
        ("gamma_t", t.gamma_t, &mut cfg.thresholds.gamma_t),
        ("gamma_c", t.gamma_c, &mut cfg.thresholds.gamma_c),
    ] {
        if let Some(x) = ck.within("thresholds", key, v, 0.0, f64::MAX)? {
            *slot = x;
        }
    }

    let m = raw.model.unwrap_or_default();
    let o = &mut p.options;
    o.sic_channel = m.sic_channel.unwrap_or(o.sic_channel);
    o.connected_intra = m.connected_intra.unwrap_or(o.connected_intra);
    o.interference_tail = m.interference_tail.unwrap_or(o.interference_tail);
    o.intercept_route = m.intercept_route.unwrap_or(o.intercept_route);
    if let Some(law) = &m.typical_law {
        o.typical_law = match law.as_str() {
            "angle_averaged" => PathLossModel::AngleAveraged,
            "ris_approx" => PathLossModel::RisApprox,
            "conventional_rf" => PathLossModel::ConventionalRf,
            "general" => PathLossModel::General {
                quad_points: m.aperture_points.unwrap_or(64),
            },
            other => {
                return Err(ck.fail(
                    "model",
                    "typical_law",
                    format!("unknown law {other:?} (angle_averaged, ris_approx, general, conventional_rf)"),
                ))
            }
        };
    } else if m.aperture_points.is_some() {
        return Err(ck.fail(
            "model",
            "aperture_points",
            "only valid with typical_law = \"general\"".into(),
        ));
    }
    if let Some(k) = m.chebyshev_order {
        if k == 0 {
            return Err(ck.fail("model", "chebyshev_order", "must be at least 1".into()));
        }
        cfg.chebyshev_order = k;
    }

    cfg.params.validate().map_err(|e| Error::Config {
        line: 0,
        message: e.to_string(),
    })?;

    if let Some(sw) = raw.sweep {
        let spec = SweepSpec {
            axis: sw.axis,
            grid: sw.grid,
            scenarios: sw.scenarios,
            backends: sw.backends,
            metrics: sw.metrics,
            n_trials: sw.n_trials.unwrap_or(100_000),
            master_seed: sw.master_seed.unwrap_or(1),
            series: vec![SeriesSpec::plain(sw.series.unwrap_or_else(|| "custom".into()))],
        };
        spec.validate().map_err(|e| Error::Config {
            line: key_line(text, "sweep", "axis"),
            message: e.to_string(),
        })?;
        cfg.sweep = Some(spec);
    }

    let v = raw.validate.unwrap_or_default();
    let d = &mut cfg.validate;
    d.n_trials = v.n_trials.unwrap_or(d.n_trials);
    d.master_seed = v.master_seed.unwrap_or(d.master_seed);
    d.ks_samples = v.ks_samples.unwrap_or(d.ks_samples);
    d.laplace_draws = v.laplace_draws.unwrap_or(d.laplace_draws);
    if d.n_trials == 0 || d.ks_samples == 0 || d.laplace_draws == 0 {
        return Err(ck.fail("validate", "n_trials", "sample sizes must be at least 1".into()));
    }
    Ok(cfg)
}

/// Applies an axis value to a parameter bundle.
pub(crate) fn apply_axis(axis: Axis, value: f64, params: &mut SystemParams, th: &mut Thresholds) {
    match axis {
        Axis::SnrDbm => params.power.p_b = dbm_to_watts(value),
        Axis::L => params.channel.half_length = value,
        Axis::LambdaB => *params = params.with_lambda_b(value),
        Axis::RC => params.spatial.r_c = value,
        Axis::AlphaT => params.channel.alpha_t = value,
        Axis::Threshold => *th = Thresholds::uniform(value),
    }
}
