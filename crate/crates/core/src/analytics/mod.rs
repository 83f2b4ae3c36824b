//! Closed forms and low-dimensional integrals for coverage and ergodic rate.
//!
//! Every evaluator returns an [`Evaluation`]: the value plus a [`Diagnostics`]
//! record with quadrature effort, ₂F₁ term counts and clamp events.

mod coverage;
mod ergodic;

pub use coverage::{
    coverage_connected, coverage_typical, coverage_typical_alpha2, coverage_typical_alpha4,
    coverage_typical_asymptotic_l, Alpha2Report, AsymptoticL,
};
pub use ergodic::{
    ergodic_connected, ergodic_slope_l, ergodic_typical, ergodic_typical_alpha2, ergodic_typical_alpha4,
    fit_slope_per_decade, ErgodicAlpha2Report, SlopeReport,
};

use std::cell::Cell;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::params::{SystemParams, Thresholds};
use crate::specfun::{alzer_eta, gamma, gamma_p, hyp2f1};

/// Probabilities outside this band before clamping indicate a bug.
pub const EXCURSION_BAND: (f64, f64) = (-0.02, 1.02);

pub const DEFAULT_CHEBYSHEV_ORDER: usize = 200;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    /// Integrand evaluations across all quadratures.
    pub integrand_evals: u64,
    /// Chebyshev or fixed-rule nodes used.
    pub rule_nodes: usize,
    /// Largest ₂F₁ series length.
    pub hyp2f1_max_terms: usize,
    pub hyp2f1_calls: usize,
    /// Some panel quadrature hit its refinement limit.
    pub unconverged: bool,
    /// Threshold combination that makes the event impossible.
    pub infeasible: bool,
    /// Value before clamping to `[0, 1]`, when clamping changed it.
    pub pre_clamp: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub diagnostics: Diagnostics,
}

impl Evaluation {
    fn infeasible() -> Self {
        Self {
            value: 0.0,
            diagnostics: Diagnostics {
                infeasible: true,
                ..Default::default()
            },
        }
    }
}

/// Clamps a probability to `[0, 1]`, logging the raw value. With `strict`,
/// values outside [`EXCURSION_BAND`] are errors.
fn clamp_probability(raw: f64, diag: &mut Diagnostics, context: &str, strict: bool) -> Result<f64> {
    if !raw.is_finite() || (strict && (raw < EXCURSION_BAND.0 || raw > EXCURSION_BAND.1)) {
        return Err(Error::ProbabilityExcursion {
            value: raw,
            context: context.to_string(),
        });
    }
    let v = raw.clamp(0.0, 1.0);
    if v != raw {
        log::warn!("{context}: probability {raw} clamped to {v}");
        diag.pre_clamp = Some(raw);
    }
    Ok(v)
}

/// Quadrature and special-function bookkeeping shared by nested closures.
#[derive(Default)]
struct Tally {
    evals: Cell<u64>,
    terms: Cell<usize>,
    calls: Cell<usize>,
    unconverged: Cell<bool>,
}

impl Tally {
    fn note(&self, i: &crate::specfun::Integral) {
        self.evals.set(self.evals.get() + i.evals);
        if !i.converged {
            self.unconverged.set(true);
        }
    }

    fn hyp(&self, a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
        let h = hyp2f1(a, b, c, z)?;
        self.terms.set(self.terms.get().max(h.terms));
        self.calls.set(self.calls.get() + 1);
        Ok(h.value)
    }

    fn into_diagnostics(self) -> Diagnostics {
        Diagnostics {
            integrand_evals: self.evals.get(),
            hyp2f1_max_terms: self.terms.get(),
            hyp2f1_calls: self.calls.get(),
            unconverged: self.unconverged.get(),
            ..Default::default()
        }
    }
}

pub(crate) fn binomial(m: u32, n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * (m - n + i) as f64 / i as f64)
}

/// `Σ_{n=1}^{m} (-1)^{n+1} C(m,n) term(n)`, summed in descending magnitude
/// with Neumaier compensation.
fn alternating_sum(m: u32, mut term: impl FnMut(u32) -> Result<f64>) -> Result<f64> {
    let mut parts = Vec::with_capacity(m as usize);
    for n in 1..=m {
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        parts.push(sign * binomial(m, n) * term(n)?);
    }
    parts.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    Ok(neumaier(parts))
}

pub(crate) fn neumaier(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Coefficients of the coverage expressions at the configured thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageCoefficients {
    pub upsilon: f64,
    pub upsilon1: f64,
    /// `a_c / a_t`.
    pub upsilon2: f64,
    pub eta_t: f64,
    pub eta_c: f64,
    /// `β₁(n)`, `n = 1..m_t`.
    pub beta1: Vec<f64>,
    /// `β₂(n)`, infinite when the interference diverges.
    pub beta2: Vec<f64>,
    /// `μ₁(n)`, `n = 1..m_c`.
    pub mu1: Vec<f64>,
    pub mu2: Vec<f64>,
    /// `ς₁ = πλ_b r_c²`.
    pub varsigma1: f64,
    /// `ς₂ = P_b C / (m r_c^{α_c})`.
    pub varsigma2: f64,
}

impl CoverageCoefficients {
    pub fn new(params: &SystemParams, th: &Thresholds) -> Result<Self> {
        let pa = &params.power;
        let cp = &params.channel;
        let upsilon1 = th
            .upsilon1(pa)
            .ok_or_else(|| Error::Domain("SIC threshold is infeasible".into()))?;
        let upsilon = upsilon1.max(th.gamma_t / pa.a_t);
        let kernel = TypicalKernel::new(params)?;
        let tally = Tally::default();
        let mut beta1 = Vec::new();
        let mut beta2 = Vec::new();
        for n in 1..=cp.m_t {
            beta1.push(kernel.beta1(n, upsilon));
            beta2.push(kernel.beta2(n, upsilon, &tally)?);
        }
        let ck = ConnectedKernel::new(params);
        let mut mu1 = Vec::new();
        let mut mu2 = Vec::new();
        for n in 1..=cp.m_c {
            let (a, b) = ck.mu(n, th.gamma_c, &tally)?;
            mu1.push(a);
            mu2.push(b);
        }
        Ok(Self {
            upsilon,
            upsilon1,
            upsilon2: pa.a_c / pa.a_t,
            eta_t: kernel.eta,
            eta_c: ck.eta,
            beta1,
            beta2,
            mu1,
            mu2,
            varsigma1: PI * params.spatial.lambda_b * params.spatial.r_c.powi(2),
            varsigma2: pa.p_b * cp.intercept / (cp.m_t as f64 * params.spatial.r_c.powf(cp.alpha_c)),
        })
    }
}

/// `β₁`, `β₂` and the nested coverage integral of the typical user.
struct TypicalKernel<'a> {
    params: &'a SystemParams,
    intercept: f64,
    eta: f64,
    delta: f64,
}

impl<'a> TypicalKernel<'a> {
    fn new(params: &'a SystemParams) -> Result<Self> {
        Ok(Self {
            params,
            intercept: params.intercept()?,
            eta: alzer_eta(params.channel.m_t as f64),
            delta: 2.0 / params.channel.alpha_t,
        })
    }

    fn m(&self) -> f64 {
        self.params.channel.m_t as f64
    }

    /// `nηΥσ² / (P_b G)`.
    fn beta1(&self, n: u32, ups: f64) -> f64 {
        let pa = &self.params.power;
        n as f64 * self.eta * ups * pa.sigma2 / (pa.p_b * self.intercept)
    }

    /// `πλ ₂F₁(-δ, m; 1-δ; -ρ_t nηΥ/m)`.
    fn beta2(&self, n: u32, ups: f64, tally: &Tally) -> Result<f64> {
        let lam = PI * self.params.spatial.lambda_b;
        let rho = self.params.channel.rho_t;
        if rho == 0.0 || ups == 0.0 {
            return Ok(lam);
        }
        if self.params.channel.alpha_t <= 2.0 {
            return Ok(f64::INFINITY);
        }
        let z = -rho * n as f64 * self.eta * ups / self.m();
        Ok(lam * tally.hyp(-self.delta, self.m(), 1.0 - self.delta, z)?)
    }

    /// `J(k) = ∫_0^∞ exp(-u - k u^{α/2}) du`.
    fn j(&self, k: f64, tally: &Tally) -> f64 {
        if k == 0.0 {
            return 1.0;
        }
        let half_alpha = 0.5 * self.params.channel.alpha_t;
        let scale = if k > 1.0 { k.powf(-1.0 / half_alpha) } else { 1.0 };
        let i = crate::specfun::integrate_to_infinity(|u| (-u - k * u.powf(half_alpha)).exp(), scale, 1e-10);
        tally.note(&i);
        i.value
    }

    /// `2πλ ∫_0^{R_L} f(y) ∫_0^∞ x e^{-β₁(xy)^α - β₂x²} dx dy` with `u = β₂x²`.
    fn term(&self, b1: f64, b2: f64, tally: &Tally) -> f64 {
        if b2.is_infinite() {
            return 0.0;
        }
        let lam = PI * self.params.spatial.lambda_b;
        let alpha = self.params.channel.alpha_t;
        let r_l = self.params.spatial.los_radius;
        let c = b1 * b2.powf(-0.5 * alpha);
        if c == 0.0 {
            return lam / b2;
        }
        let outer = crate::specfun::integrate(
            |y| 2.0 * y / (r_l * r_l) * self.j(c * y.powf(alpha), tally),
            0.0,
            r_l,
            1e-8,
        );
        tally.note(&outer);
        lam / b2 * outer.value
    }

    /// Same term with the `y`-integral done in closed form:
    /// `∫_0^{R_L} f(y) e^{-κy^α} dy = δ Γ(δ) P(δ, w) w^{-δ}`, `w = κR_L^α`.
    fn reduced_term(&self, b1: f64, b2: f64, tally: &Tally) -> f64 {
        if b2.is_infinite() {
            return 0.0;
        }
        let lam = PI * self.params.spatial.lambda_b;
        let alpha = self.params.channel.alpha_t;
        let delta = self.delta;
        let c = b1 * b2.powf(-0.5 * alpha) * self.params.spatial.los_radius.powf(alpha);
        if c == 0.0 {
            return lam / b2;
        }
        let norm = delta * gamma(delta);
        let g = |w: f64| {
            if w < 1e-300 {
                1.0
            } else {
                norm * gamma_p(delta, w) * w.powf(-delta)
            }
        };
        // g ~ w^{-δ} past the knee, so the u-integrand falls like 1/u until e^{-u} takes over
        let knee = if c > 1.0 { c.powf(-delta) } else { 1.0 };
        let i = crate::specfun::integrate_two_scale(|u| (-u).exp() * g(c * u.powf(0.5 * alpha)), knee, 800.0, 1e-10);
        tally.note(&i);
        lam / b2 * i.value
    }

    fn reduced_coverage(&self, ups: f64, tally: &Tally) -> Result<f64> {
        alternating_sum(self.params.channel.m_t, |n| {
            let b1 = self.beta1(n, ups);
            let b2 = self.beta2(n, ups, tally)?;
            Ok(self.reduced_term(b1, b2, tally))
        })
    }

    /// Unclamped typical-user coverage at a given `Υ`.
    fn coverage(&self, ups: f64, tally: &Tally) -> Result<f64> {
        alternating_sum(self.params.channel.m_t, |n| {
            let b1 = self.beta1(n, ups);
            let b2 = self.beta2(n, ups, tally)?;
            Ok(self.term(b1, b2, tally))
        })
    }
}

/// `μ₁`, `μ₂` of the connected user.
struct ConnectedKernel<'a> {
    params: &'a SystemParams,
    eta: f64,
}

impl<'a> ConnectedKernel<'a> {
    fn new(params: &'a SystemParams) -> Self {
        Self {
            params,
            eta: alzer_eta(params.channel.m_c as f64),
        }
    }

    /// `(μ₁(n), μ₂(n))` at threshold `gamma`; infinite when `a_c ≤ a_t γ`.
    fn mu(&self, n: u32, gamma: f64, tally: &Tally) -> Result<(f64, f64)> {
        let pa = &self.params.power;
        let cp = &self.params.channel;
        let den = pa.a_c - pa.a_t * gamma;
        if den <= 0.0 {
            return Ok((f64::INFINITY, f64::INFINITY));
        }
        let m = cp.m_t as f64;
        let delta = 2.0 / cp.alpha_c;
        let x = n as f64 * self.eta * gamma / den;
        let f = tally.hyp(-delta, m, 1.0 - delta, -x / m)?;
        let mu1 = PI * self.params.spatial.lambda_b * (f - 1.0);
        let mu2 = x * pa.sigma2 / (pa.p_b * cp.intercept);
        Ok((mu1, mu2))
    }

    fn coverage(&self, gamma: f64, tally: &Tally) -> Result<f64> {
        let r_c = self.params.spatial.r_c;
        let alpha = self.params.channel.alpha_c;
        alternating_sum(self.params.channel.m_c, |n| {
            let (mu1, mu2) = self.mu(n, gamma, tally)?;
            Ok((-mu1 * r_c * r_c - mu2 * r_c.powf(alpha)).exp())
        })
    }
}

/// Laplace transform of the connected user's interference,
/// `exp(-ς₁(₂F₁(-2/α_c, m; 1-2/α_c; -ς₂ s) - 1))`.
pub fn laplace_connected(s: f64, params: &SystemParams) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::Domain(format!("Laplace argument {s} must be non-negative")));
    }
    let cp = &params.channel;
    let r_c = params.spatial.r_c;
    let m = cp.m_t as f64;
    let delta = 2.0 / cp.alpha_c;
    let sigma1 = PI * params.spatial.lambda_b * r_c * r_c;
    let sigma2 = params.power.p_b * cp.intercept / (m * r_c.powf(cp.alpha_c));
    let f = crate::specfun::gauss_2f1(-delta, m, 1.0 - delta, -sigma2 * s)?;
    Ok((-sigma1 * (f - 1.0)).exp())
}

/// Laplace transform of the RIS-reflected interference at the typical user,
/// `exp(-ς₃(₂F₁(-2/α_t, m; 1-2/α_t; -s ς₄) - 1))` with
/// `ς₃ = πλ r_BR0²`, `ς₄ = ρ_t P_b G / (m_t (r_RU0 r_BR0)^{α_t})`.
pub fn laplace_typical_ris(s: f64, r_br0: f64, r_ru0: f64, params: &SystemParams) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::Domain(format!("Laplace argument {s} must be non-negative")));
    }
    if !(r_br0 > 0.0 && r_ru0 > 0.0) {
        return Err(Error::Domain("distances must be positive".into()));
    }
    let cp = &params.channel;
    let m = cp.m_t as f64;
    let delta = 2.0 / cp.alpha_t;
    let sigma3 = PI * params.spatial.lambda_b * r_br0 * r_br0;
    let sigma4 = cp.rho_t * params.power.p_b * params.intercept()? / (m * (r_ru0 * r_br0).powf(cp.alpha_t));
    let f = crate::specfun::gauss_2f1(-delta, m, 1.0 - delta, -s * sigma4)?;
    Ok((-sigma3 * (f - 1.0)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), 6.0);
        assert_eq!(binomial(8, 3), 56.0);
        assert_eq!(binomial(5, 5), 1.0);
    }

    #[test]
    fn alternating_identity() {
        // Σ (-1)^{n+1} C(m,n) = 1
        for m in 1..=8 {
            assert!((alternating_sum(m, |_| Ok(1.0)).unwrap() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn laplace_at_zero_is_one() {
        let p = SystemParams::paper_defaults();
        assert_eq!(laplace_connected(0.0, &p).unwrap(), 1.0);
        assert_eq!(laplace_typical_ris(0.0, 300.0, 10.0, &p).unwrap(), 1.0);
        assert!(laplace_connected(-1.0, &p).is_err());
    }

    #[test]
    fn laplace_vanishing_density() {
        let mut p = SystemParams::paper_defaults();
        p.spatial.lambda_b = 1e-300;
        for s in [1e8, 1e12, 1e16] {
            assert!((laplace_connected(s, &p).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn laplace_completely_monotone() {
        let p = SystemParams::paper_defaults();
        let grid: Vec<f64> = (0..40).map(|i| 10f64.powf(6.0 + 0.25 * i as f64)).collect();
        for f in [&|s: f64| laplace_connected(s, &p).unwrap(), &|s: f64| {
            laplace_typical_ris(s, 266.0, 16.7, &p).unwrap()
        }] as [&dyn Fn(f64) -> f64; 2]
        {
            let v: Vec<f64> = grid.iter().map(|&s| f(s)).collect();
            assert!(v.windows(2).all(|w| w[1] <= w[0]));
            // log-convexity on a uniform grid in s
            let h = 1e9;
            for i in 1..30 {
                let s = i as f64 * h;
                let d2 = f(s + h).ln() - 2.0 * f(s).ln() + f(s - h).ln();
                assert!(d2 >= -1e-9, "second difference {d2} at {s}");
            }
        }
    }

    #[test]
    fn reduced_kernel_matches_nested() {
        let p = SystemParams::paper_defaults();
        let k = TypicalKernel::new(&p).unwrap();
        for ups in [0.025, 0.3, 5.0, 80.0] {
            let t = Tally::default();
            let a = k.coverage(ups, &t).unwrap();
            let b = k.reduced_coverage(ups, &t).unwrap();
            assert!((a - b).abs() < 1e-9 * a.abs().max(1e-3), "ups {ups}: {a} vs {b}");
        }
    }

    #[test]
    fn coefficients_at_defaults() {
        let p = SystemParams::paper_defaults();
        let c = CoverageCoefficients::new(&p, &Thresholds::default()).unwrap();
        assert!((c.upsilon - 0.025).abs() < 1e-15);
        assert!((c.upsilon2 - 1.5).abs() < 1e-15);
        assert!(c.beta2.iter().all(|&b| b > PI * p.spatial.lambda_b));
        assert!((c.varsigma1 - PI * p.spatial.lambda_b * 2500.0).abs() < 1e-18);
        assert_eq!(c.beta1.len(), 4);
    }
}
