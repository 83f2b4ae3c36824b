use std::f64::consts::{LN_2, PI};

use super::coverage::{alpha2_kernel, alpha4_term};
use super::{alternating_sum, ConnectedKernel, Diagnostics, Evaluation, Tally, TypicalKernel};
use crate::error::{Error, Result};
use crate::params::{SystemParams, Thresholds};
use crate::specfun::{chebyshev_gauss, integrate, QuadratureRule};

/// Typical-user ergodic rate in BPCU, SIC-gated:
/// `(P(Υ₁) ln(1 + a_tΥ₁) + ∫_{a_tΥ₁}^∞ P(z/a_t)/(1+z) dz) / ln 2`.
pub fn ergodic_typical(params: &SystemParams, th: &Thresholds) -> Result<Evaluation> {
    let Some(ups1) = th.upsilon1(&params.power) else {
        return Ok(Evaluation::infeasible());
    };
    let a_t = params.power.a_t;
    if a_t == 0.0 {
        return Ok(Evaluation {
            value: 0.0,
            diagnostics: Diagnostics::default(),
        });
    }
    let kernel = TypicalKernel::new(params)?;
    let tally = Tally::default();
    let a = a_t * ups1;
    let head = kernel.reduced_coverage(ups1, &tally)? * a.ln_1p();

    // z = a + a_t((1-t)^{-q} - 1) turns the z^{-1-δ} tail into a regular endpoint.
    let q = 2.0 / kernel.delta;
    let mut failure = None;
    let tail = integrate(
        |t| {
            let one_minus = 1.0 - t;
            if one_minus <= 0.0 {
                return 0.0;
            }
            let stretch = one_minus.powf(-q);
            let z = a + a_t * (stretch - 1.0);
            let jac = a_t * q * stretch / one_minus;
            if !jac.is_finite() {
                return 0.0;
            }
            match kernel.reduced_coverage(z / a_t, &tally) {
                Ok(p) => p * jac / (1.0 + z),
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        0.0,
        1.0,
        1e-8,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    tally.note(&tail);
    Ok(Evaluation {
        value: (head + tail.value) / LN_2,
        diagnostics: tally.into_diagnostics(),
    })
}

/// Chebyshev–Gauss split of `∫_0^∞ P(Υ(z))/(1+z) dz`: `J` nodes on
/// `[0, A]` with `P(Υ₁)`, `V` nodes on `[A, ∞)` through `z = 2A/(ϖ+1)`.
fn chebyshev_split(
    a: f64,
    a_t: f64,
    ups1: f64,
    j_rule: &QuadratureRule,
    v_rule: &QuadratureRule,
    mut coverage: impl FnMut(f64) -> Result<f64>,
) -> Result<f64> {
    let mut head = 0.0;
    for (&w, &x) in j_rule.weights.iter().zip(&j_rule.nodes) {
        let xi = 0.5 * a * (x + 1.0);
        head += w * (1.0 - x * x).sqrt() * 0.5 * a / (1.0 + xi);
    }
    let mut tail = 0.0;
    for (&w, &x) in v_rule.weights.iter().zip(&v_rule.nodes) {
        let xi = 2.0 * a / (x + 1.0);
        tail += w * (1.0 - x * x).sqrt() * 2.0 * a / ((x + 1.0).powi(2) * (1.0 + xi)) * coverage(xi / a_t)?;
    }
    Ok((coverage(ups1)? * head + tail) / LN_2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicAlpha2Report {
    /// Chebyshev sums over the closed-form `(β₁R_L² + 2β₂)` coverage.
    pub verbatim: f64,
    /// Same sums over the logarithmic coverage kernel.
    pub rederived: f64,
    pub integral: Evaluation,
}

impl ErgodicAlpha2Report {
    pub fn gap_verbatim(&self) -> f64 {
        self.verbatim - self.integral.value
    }

    pub fn gap_rederived(&self) -> f64 {
        self.rederived - self.integral.value
    }
}

/// Typical-user ergodic rate at `α_t = 2` (requires `ρ_t = 0`), with orders `J`, `V`.
pub fn ergodic_typical_alpha2(
    params: &SystemParams,
    th: &Thresholds,
    j_order: usize,
    v_order: usize,
) -> Result<ErgodicAlpha2Report> {
    if params.channel.alpha_t != 2.0 {
        return Err(Error::Domain("closed form needs alpha_t = 2".into()));
    }
    if params.channel.rho_t != 0.0 {
        return Err(Error::Domain(
            "alpha_t = 2 needs rho_t = 0 (interference diverges)".into(),
        ));
    }
    let Some(ups1) = th.upsilon1(&params.power) else {
        return Ok(ErgodicAlpha2Report {
            verbatim: 0.0,
            rederived: 0.0,
            integral: Evaluation::infeasible(),
        });
    };
    let j_rule = chebyshev_gauss(j_order)?;
    let v_rule = chebyshev_gauss(v_order)?;
    let kernel = TypicalKernel::new(params)?;
    let tally = Tally::default();
    let lam = PI * params.spatial.lambda_b;
    let r_l = params.spatial.los_radius;
    let m = params.channel.m_t;
    let a_t = params.power.a_t;
    let a = a_t * ups1;
    let verbatim = chebyshev_split(a, a_t, ups1, &j_rule, &v_rule, |ups| {
        Ok(0.5
            * lam
            * alternating_sum(m, |n| {
                Ok(kernel.beta1(n, ups) * r_l * r_l + 2.0 * kernel.beta2(n, ups, &tally)?)
            })?)
    })?;
    let rederived = chebyshev_split(a, a_t, ups1, &j_rule, &v_rule, |ups| {
        Ok(lam
            * alternating_sum(m, |n| {
                Ok(alpha2_kernel(kernel.beta1(n, ups), kernel.beta2(n, ups, &tally)?, r_l))
            })?)
    })?;
    Ok(ErgodicAlpha2Report {
        verbatim,
        rederived,
        integral: ergodic_typical(params, th)?,
    })
}

/// Typical-user ergodic rate at `α_t = 4` as a triple Chebyshev–Gauss sum.
pub fn ergodic_typical_alpha4(
    params: &SystemParams,
    th: &Thresholds,
    k_order: usize,
    j_order: usize,
    v_order: usize,
) -> Result<Evaluation> {
    if params.channel.alpha_t != 4.0 {
        return Err(Error::Domain("closed form needs alpha_t = 4".into()));
    }
    let Some(ups1) = th.upsilon1(&params.power) else {
        return Ok(Evaluation::infeasible());
    };
    let k_rule = chebyshev_gauss(k_order)?;
    let j_rule = chebyshev_gauss(j_order)?;
    let v_rule = chebyshev_gauss(v_order)?;
    let kernel = TypicalKernel::new(params)?;
    let tally = Tally::default();
    let a_t = params.power.a_t;
    let value = chebyshev_split(a_t * ups1, a_t, ups1, &j_rule, &v_rule, |ups| {
        alternating_sum(params.channel.m_t, |n| {
            Ok(alpha4_term(
                kernel.beta1(n, ups),
                kernel.beta2(n, ups, &tally)?,
                params.spatial.los_radius,
                params.spatial.lambda_b,
                &k_rule,
            ))
        })
    })?;
    let mut diagnostics = tally.into_diagnostics();
    diagnostics.rule_nodes = k_order.max(j_order).max(v_order);
    diagnostics.integrand_evals = (k_order * (v_order + 1)) as u64 * params.channel.m_t as u64;
    Ok(Evaluation { value, diagnostics })
}

/// Connected-user ergodic rate `(1/ln 2) ∫_0^{Υ₂} P_c(z)/(1+z) dz` with a
/// `W`-point Chebyshev–Gauss rule, `Υ₂ = a_c/a_t`.
pub fn ergodic_connected(params: &SystemParams, order: usize) -> Result<Evaluation> {
    let rule = chebyshev_gauss(order)?;
    let pa = &params.power;
    let ups2 = pa.a_c / pa.a_t;
    let kernel = ConnectedKernel::new(params);
    let tally = Tally::default();
    let mut acc = 0.0;
    for (&w, &x) in rule.weights.iter().zip(&rule.nodes) {
        let xi = 0.5 * ups2 * (x + 1.0);
        acc += w * (1.0 - x * x).sqrt() * ups2 / (2.0 * (1.0 + xi)) * kernel.coverage(xi, &tally)?;
    }
    let mut diagnostics = tally.into_diagnostics();
    diagnostics.rule_nodes = order;
    diagnostics.integrand_evals = order as u64;
    Ok(Evaluation {
        value: acc / LN_2,
        diagnostics,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeReport {
    /// BPCU per decade of `L`, fitted over the top decade of the grid.
    pub slope: f64,
    pub half_lengths: Vec<f64>,
    pub rates: Vec<f64>,
}

/// Least-squares slope of `y` against `log10 x`, using the points with
/// `x ≥ max(x)/10`.
pub fn fit_slope_per_decade(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::InvalidParameter(
            "slope fit needs matching non-empty grids".into(),
        ));
    }
    let top = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(&xi, _)| xi >= top / 10.0 * (1.0 - 1e-12))
        .map(|(&xi, &yi)| (xi.log10(), yi))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InvalidParameter("top decade holds fewer than two points".into()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Slope of the typical-user ergodic rate against `log10 L`.
pub fn ergodic_slope_l(params: &SystemParams, th: &Thresholds, grid: &[f64]) -> Result<SlopeReport> {
    if grid.len() < 4 || grid.windows(2).any(|w| w[1] <= w[0]) || grid[0] <= 0.0 {
        return Err(Error::InvalidParameter(
            "L grid needs at least 4 increasing positive points".into(),
        ));
    }
    if grid[grid.len() - 1] < 10.0 * grid[0] {
        return Err(Error::InvalidParameter("L grid must span at least one decade".into()));
    }
    let rates = grid
        .iter()
        .map(|&l| ergodic_typical(&params.with_half_length(l), th).map(|e| e.value))
        .collect::<Result<Vec<_>>>()?;
    Ok(SlopeReport {
        slope: fit_slope_per_decade(grid, &rates)?,
        half_lengths: grid.to_vec(),
        rates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::coverage_typical;

    fn defaults() -> SystemParams {
        SystemParams::paper_defaults()
    }

    #[test]
    fn slope_fit_shapes() {
        let x = [10.0, 30.0, 100.0, 300.0];
        assert_eq!(fit_slope_per_decade(&x, &[2.0; 4]).unwrap(), 0.0);
        let lin: Vec<f64> = x.iter().map(|v: &f64| 1.0 + 0.5 * v.log10()).collect();
        assert!((fit_slope_per_decade(&x, &lin).unwrap() - 0.5).abs() < 1e-12);
        let big = [1e3, 1e4, 1e5, 1e6];
        let sat: Vec<f64> = big.iter().map(|l| 3.0 - 7.0 / (l * l)).collect();
        assert!(fit_slope_per_decade(&big, &sat).unwrap().abs() < 1e-8);
    }

    #[test]
    fn connected_rate_falls_with_distance() {
        let mut prev = f64::INFINITY;
        for r in [50.0, 75.0, 100.0] {
            let mut p = defaults();
            p.spatial.r_c = r;
            let v = ergodic_connected(&p, 200).unwrap().value;
            assert!(v < prev);
            prev = v;
        }
        let mut p = defaults();
        p.spatial.r_c = 1e5;
        assert!(ergodic_connected(&p, 200).unwrap().value < 1e-9);
    }

    #[test]
    fn typical_rate_vanishes_without_power() {
        let mut prev = f64::INFINITY;
        for a_t in [0.4, 0.1, 0.01, 0.001] {
            let mut p = defaults();
            p.power.a_t = a_t;
            p.power.a_c = 1.0 - a_t;
            let v = ergodic_typical(&p, &Thresholds::default()).unwrap().value;
            assert!(v < prev, "a_t {a_t}");
            prev = v;
        }
        assert!(prev < 1e-3, "{prev}");
    }

    #[test]
    fn rate_matches_coverage_integral() {
        // Integrate the public nested coverage over the typical threshold; the
        // ergodic path uses the reduced kernel instead.
        let p = defaults();
        let base = Thresholds::default();
        let rate = ergodic_typical(&p, &base).unwrap().value;
        let cov = |g: f64| coverage_typical(&p, &Thresholds { gamma_t: g, ..base }).unwrap().value;
        let knee = p.power.a_t * base.upsilon1(&p.power).unwrap();
        let head = cov(0.5 * knee) * knee.ln_1p();
        let q = p.channel.alpha_t;
        let rule = crate::specfun::gauss_legendre(96);
        let tail = 0.5
            * rule.apply(|x| {
                let t = 0.5 * (x + 1.0);
                let s = (1.0 - t).powf(-q);
                let g = knee + p.power.a_t * (s - 1.0);
                cov(g) / (1.0 + g) * p.power.a_t * q * s / (1.0 - t)
            });
        let numeric = (head + tail) / LN_2;
        assert!(((numeric - rate) / rate).abs() < 1e-3, "{numeric} vs {rate}");
    }

    #[test]
    fn alpha4_rate_closed_form_matches_integral() {
        let mut p = defaults();
        p.channel.alpha_t = 4.0;
        let th = Thresholds::default();
        let closed = ergodic_typical_alpha4(&p, &th, 200, 200, 200).unwrap().value;
        let integral = ergodic_typical(&p, &th).unwrap().value;
        assert!(((closed - integral) / integral).abs() < 1e-2, "{closed} vs {integral}");
    }

    #[test]
    fn alpha2_forms_reported() {
        let mut p = defaults();
        p.channel.alpha_t = 2.0;
        p.channel.rho_t = 0.0;
        let r = ergodic_typical_alpha2(&p, &Thresholds::default(), 200, 200).unwrap();
        assert!(r.verbatim.is_finite() && r.rederived.is_finite());
        assert!((r.gap_rederived() / r.integral.value).abs() < 5e-2, "{r:?}");
    }
}
