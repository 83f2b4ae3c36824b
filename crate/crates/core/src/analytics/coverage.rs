use std::f64::consts::PI;

use super::{alternating_sum, clamp_probability, ConnectedKernel, Diagnostics, Evaluation, Tally, TypicalKernel};
use crate::error::{Error, Result};
use crate::params::{SystemParams, Thresholds};
use crate::specfun::{chebyshev_gauss, erfcx, gamma};

/// Typical-user coverage from the nested integral.
pub fn coverage_typical(params: &SystemParams, th: &Thresholds) -> Result<Evaluation> {
    let Some(ups) = th.upsilon(&params.power) else {
        return Ok(Evaluation::infeasible());
    };
    let kernel = TypicalKernel::new(params)?;
    let tally = Tally::default();
    let raw = kernel.coverage(ups, &tally)?;
    let mut diagnostics = tally.into_diagnostics();
    let value = clamp_probability(raw, &mut diagnostics, "typical coverage", true)?;
    Ok(Evaluation { value, diagnostics })
}

/// Both readings of the `α_t = 2` closed form next to the nested integral.
#[derive(Debug, Clone, PartialEq)]
pub struct Alpha2Report {
    /// `(πλ/2) Σ (-1)^{n+1} C(m,n) (β₁R_L² + 2β₂)`, unclamped.
    pub verbatim: f64,
    /// `πλ Σ (-1)^{n+1} C(m,n) ln(1 + β₁R_L²/β₂) / (β₁R_L²)`.
    pub rederived: f64,
    pub integral: Evaluation,
}

impl Alpha2Report {
    pub fn gap_verbatim(&self) -> f64 {
        self.verbatim - self.integral.value
    }

    pub fn gap_rederived(&self) -> f64 {
        self.rederived - self.integral.value
    }
}

fn require_alpha(params: &SystemParams, alpha: f64) -> Result<()> {
    if params.channel.alpha_t != alpha {
        return Err(Error::Domain(format!(
            "closed form needs alpha_t = {alpha}, got {}",
            params.channel.alpha_t
        )));
    }
    Ok(())
}

/// `1/(β₁R²) ln(1 + β₁R²/β₂)`, the `y`-average of `1/(β₁y² + β₂)`.
pub(super) fn alpha2_kernel(b1: f64, b2: f64, r_l: f64) -> f64 {
    let t = b1 * r_l * r_l / b2;
    if t < 1e-8 {
        (1.0 - 0.5 * t) / b2
    } else {
        t.ln_1p() / (b1 * r_l * r_l)
    }
}

/// Typical-user coverage at `α_t = 2`. Only finite without inter-cell RIS
/// interference, so `ρ_t` must be zero.
pub fn coverage_typical_alpha2(params: &SystemParams, th: &Thresholds) -> Result<Alpha2Report> {
    require_alpha(params, 2.0)?;
    if params.channel.rho_t != 0.0 {
        return Err(Error::Domain(
            "alpha_t = 2 needs rho_t = 0 (interference diverges)".into(),
        ));
    }
    let Some(ups) = th.upsilon(&params.power) else {
        return Ok(Alpha2Report {
            verbatim: 0.0,
            rederived: 0.0,
            integral: Evaluation::infeasible(),
        });
    };
    let kernel = TypicalKernel::new(params)?;
    let tally = Tally::default();
    let lam = PI * params.spatial.lambda_b;
    let r_l = params.spatial.los_radius;
    let m = params.channel.m_t;
    let verbatim = 0.5
        * lam
        * alternating_sum(m, |n| {
            Ok(kernel.beta1(n, ups) * r_l * r_l + 2.0 * kernel.beta2(n, ups, &tally)?)
        })?;
    let rederived = lam
        * alternating_sum(m, |n| {
            Ok(alpha2_kernel(kernel.beta1(n, ups), kernel.beta2(n, ups, &tally)?, r_l))
        })?;
    Ok(Alpha2Report {
        verbatim,
        rederived,
        integral: coverage_typical(params, th)?,
    })
}

/// `π^{3/2}λ/(2R_L√β₁) Σ_i ω_i √(1-ϖ_i²) erfcx(β₂/(2√β₁Ξ_i²)) / Ξ_i`, the
/// Chebyshev form of the `α_t = 4` coverage for one binomial index.
pub(super) fn alpha4_term(b1: f64, b2: f64, r_l: f64, lambda_b: f64, rule: &crate::specfun::QuadratureRule) -> f64 {
    if b2.is_infinite() {
        return 0.0;
    }
    if b1 == 0.0 {
        return PI * lambda_b / b2;
    }
    let sb = b1.sqrt();
    let mut acc = 0.0;
    for (&w, &x) in rule.weights.iter().zip(&rule.nodes) {
        let xi = 0.5 * r_l * (x + 1.0);
        acc += w * (1.0 - x * x).sqrt() * erfcx(b2 / (2.0 * sb * xi * xi)) / xi;
    }
    PI.powf(1.5) * lambda_b / (2.0 * r_l * sb) * acc
}

/// Typical-user coverage at `α_t = 4` through `K`-point Chebyshev–Gauss
/// quadrature and the scaled complementary error function.
pub fn coverage_typical_alpha4(params: &SystemParams, th: &Thresholds, order: usize) -> Result<Evaluation> {
    require_alpha(params, 4.0)?;
    let Some(ups) = th.upsilon(&params.power) else {
        return Ok(Evaluation::infeasible());
    };
    let rule = chebyshev_gauss(order)?;
    let kernel = TypicalKernel::new(params)?;
    let tally = Tally::default();
    let raw = alternating_sum(params.channel.m_t, |n| {
        Ok(alpha4_term(
            kernel.beta1(n, ups),
            kernel.beta2(n, ups, &tally)?,
            params.spatial.los_radius,
            params.spatial.lambda_b,
            &rule,
        ))
    })?;
    let mut diagnostics = tally.into_diagnostics();
    diagnostics.rule_nodes = order;
    diagnostics.integrand_evals = (order as u64) * params.channel.m_t as u64;
    let value = clamp_probability(raw, &mut diagnostics, "typical coverage (alpha_t = 4)", true)?;
    Ok(Evaluation { value, diagnostics })
}

/// Connected-user coverage
/// `Σ (-1)^{n+1} C(m_c,n) exp(-μ₁r_c² - μ₂r_c^{α_c})`.
pub fn coverage_connected(params: &SystemParams, th: &Thresholds) -> Result<Evaluation> {
    let pa = &params.power;
    if pa.a_c <= pa.a_t * th.gamma_c {
        return Ok(Evaluation::infeasible());
    }
    let kernel = ConnectedKernel::new(params);
    let tally = Tally::default();
    let raw = kernel.coverage(th.gamma_c, &tally)?;
    let mut diagnostics = tally.into_diagnostics();
    let value = clamp_probability(raw, &mut diagnostics, "connected coverage", true)?;
    Ok(Evaluation { value, diagnostics })
}

/// Large-aperture behaviour of the typical-user coverage.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticL {
    /// Two-term expansion, clamped.
    pub value: f64,
    /// `Σ (-1)^{n+1} C(m,n) πλ/β₂`, clamped.
    pub upper_limit: f64,
    pub diagnostics: Diagnostics,
}

/// First-order expansion in `β₁` and its `L → ∞` limit.
pub fn coverage_typical_asymptotic_l(params: &SystemParams, th: &Thresholds) -> Result<AsymptoticL> {
    let Some(ups) = th.upsilon(&params.power) else {
        return Ok(AsymptoticL {
            value: 0.0,
            upper_limit: 0.0,
            diagnostics: Evaluation::infeasible().diagnostics,
        });
    };
    let kernel = TypicalKernel::new(params)?;
    let tally = Tally::default();
    let alpha = params.channel.alpha_t;
    let lam = PI * params.spatial.lambda_b;
    let r_l = params.spatial.los_radius;
    let m = params.channel.m_t;
    let limit = alternating_sum(m, |n| Ok(lam / kernel.beta2(n, ups, &tally)?))?;
    let correction = alternating_sum(m, |n| {
        let b2 = kernel.beta2(n, ups, &tally)?;
        Ok(kernel.beta1(n, ups) / b2.powf(0.5 * (alpha + 2.0)))
    })?;
    let second = 2.0 * lam * r_l.powf(alpha) / (2.0 + alpha) * gamma(0.5 * (alpha + 2.0)) * correction;
    let mut diagnostics = tally.into_diagnostics();
    let value = clamp_probability(limit - second, &mut diagnostics, "asymptotic coverage", false)?;
    let upper_limit = clamp_probability(limit, &mut diagnostics, "coverage upper limit", false)?;
    Ok(AsymptoticL {
        value,
        upper_limit,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defaults() -> SystemParams {
        SystemParams::paper_defaults()
    }

    #[test]
    fn infeasible_sic_is_flagged_zero() {
        let p = defaults();
        let th = Thresholds {
            gamma_sic: 1.5,
            ..Thresholds::default()
        };
        let e = coverage_typical(&p, &th).unwrap();
        assert_eq!(e.value, 0.0);
        assert!(e.diagnostics.infeasible);
    }

    #[test]
    fn sic_threshold_near_limit_kills_coverage() {
        let p = defaults();
        let th = Thresholds {
            gamma_sic: 1.5 * (1.0 - 1e-9),
            ..Thresholds::default()
        };
        assert!(coverage_typical(&p, &th).unwrap().value < 1e-6);
    }

    #[test]
    fn typical_monotone_in_thresholds_and_noise() {
        let p = defaults();
        let mut prev = 1.0;
        for g in [0.0, 0.005, 0.01, 0.05, 0.2, 1.0] {
            let v = coverage_typical(
                &p,
                &Thresholds {
                    gamma_t: g,
                    ..Default::default()
                },
            )
            .unwrap()
            .value;
            assert!(v <= prev + 1e-12, "gamma_t {g}: {v} > {prev}");
            prev = v;
        }
        let mut prev = 1.0;
        for g in [0.0, 0.1, 0.3, 0.6, 1.0, 1.4] {
            let th = Thresholds {
                gamma_sic: g,
                ..Default::default()
            };
            let v = coverage_typical(&p, &th).unwrap().value;
            assert!(v <= prev + 1e-12, "gamma_sic {g}");
            prev = v;
        }
        let mut prev = 1.0;
        for s in [0.0, 1e-13, 1e-12, 1e-11, 1e-10] {
            let mut q = defaults();
            q.power.sigma2 = s;
            let v = coverage_typical(&q, &Thresholds::default()).unwrap().value;
            assert!(v <= prev + 1e-12, "sigma2 {s}");
            prev = v;
        }
    }

    #[test]
    fn alpha4_coverage_closed_form_matches_integral() {
        let mut p = defaults();
        p.channel.alpha_t = 4.0;
        let th = Thresholds::default();
        let closed = coverage_typical_alpha4(&p, &th, 200).unwrap().value;
        let integral = coverage_typical(&p, &th).unwrap().value;
        assert!(((closed - integral) / integral).abs() < 1e-3, "{closed} vs {integral}");
        assert!(coverage_typical_alpha4(&defaults(), &th, 200).is_err());
    }

    #[test]
    fn alpha2_rederived_agrees_with_integral() {
        let mut p = defaults();
        p.channel.alpha_t = 2.0;
        p.channel.rho_t = 0.0;
        let r = coverage_typical_alpha2(&p, &Thresholds::default()).unwrap();
        assert!((r.rederived - r.integral.value).abs() < 1e-8, "{r:?}");
        p.channel.rho_t = 0.5;
        assert!(coverage_typical_alpha2(&p, &Thresholds::default()).is_err());
    }

    #[test]
    fn alpha2_vanishes_with_density() {
        let mut p = defaults();
        p.channel.alpha_t = 2.0;
        p.channel.rho_t = 0.0;
        p.spatial.lambda_b = 1e-30;
        let r = coverage_typical_alpha2(&p, &Thresholds::default()).unwrap();
        assert!(r.verbatim.abs() < 1e-20);
    }

    #[test]
    fn connected_binomial_telescopes() {
        let mut p = defaults();
        p.power.sigma2 = 0.0;
        p.spatial.lambda_b = 1e-300;
        let th = Thresholds {
            gamma_c: 0.0,
            ..Default::default()
        };
        let v = coverage_connected(&p, &th).unwrap().value;
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn connected_decreases_with_distance_and_density() {
        let th = Thresholds::default();
        let mut p = defaults();
        let near = coverage_connected(&p, &th).unwrap().value;
        p.spatial.r_c = 100.0;
        let far = coverage_connected(&p, &th).unwrap().value;
        assert!(far < near);
        let mut prev = 1.0;
        for d in [600.0, 400.0, 300.0, 200.0] {
            let q = defaults().with_lambda_b(1.0 / (d * d * PI));
            let v = coverage_connected(&q, &th).unwrap().value;
            assert!(v <= prev, "density at {d}");
            prev = v;
        }
        let infeasible = coverage_connected(&defaults(), &Thresholds { gamma_c: 1.5, ..th }).unwrap();
        assert!(infeasible.diagnostics.infeasible);
    }

    #[test]
    fn asymptote_limit_ignores_aperture_and_noise() {
        let th = Thresholds::default();
        let a = coverage_typical_asymptotic_l(&defaults(), &th).unwrap();
        let mut q = defaults().with_half_length(5.0);
        q.power.sigma2 = 1e-15;
        let b = coverage_typical_asymptotic_l(&q, &th).unwrap();
        assert_eq!(a.upper_limit, b.upper_limit);
        q.power.sigma2 = 0.0;
        let c = coverage_typical_asymptotic_l(&q, &th).unwrap();
        assert_eq!(c.value, c.upper_limit);
    }
}
