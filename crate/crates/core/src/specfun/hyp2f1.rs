//! Gauss hypergeometric function ₂F₁(a, b; c; z) on the negative real axis.
//!
//! Three routes are used:
//! - the power series for `z ∈ [-1/2, 0]`,
//! - the Pfaff transform `(1-z)^{-b} ₂F₁(c-a, b; c; z/(z-1))` for moderate `|z|`,
//! - the `1/z` connection formula for large `|z|` when `a - b` is not an integer.

use super::gamma::ln_gamma_signed;
use super::SpecfunError;

pub const MAX_SERIES_TERMS: usize = 100_000;
const SERIES_EPS: f64 = 1e-16;
const PFAFF_LIMIT: f64 = -0.5;
const RECIPROCAL_LIMIT: f64 = -8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hyp2f1Method {
    Series,
    Pfaff,
    Reciprocal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyp2f1 {
    pub value: f64,
    /// Total series terms summed.
    pub terms: usize,
    pub method: Hyp2f1Method,
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

fn is_integer(x: f64) -> bool {
    x == x.round()
}

/// Plain power series, valid for `|z| < 1`.
fn series(a: f64, b: f64, c: f64, z: f64) -> Result<(f64, usize), SpecfunError> {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut small = 0;
    for k in 0..MAX_SERIES_TERMS {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        sum += term;
        if term == 0.0 {
            return Ok((sum, k + 1));
        }
        if term.abs() <= SERIES_EPS * sum.abs() {
            small += 1;
            if small == 2 {
                return Ok((sum, k + 1));
            }
        } else {
            small = 0;
        }
    }
    Err(SpecfunError::NonConvergence {
        partial: sum,
        terms: MAX_SERIES_TERMS,
    })
}

fn pfaff(a: f64, b: f64, c: f64, z: f64) -> Result<(f64, usize), SpecfunError> {
    let w = z / (z - 1.0);
    let scale = (1.0 - z).powf(-b);
    match series(c - a, b, c, w) {
        Ok((s, n)) => Ok((scale * s, n)),
        Err(SpecfunError::NonConvergence { partial, terms }) => Err(SpecfunError::NonConvergence {
            partial: scale * partial,
            terms,
        }),
        Err(e) => Err(e),
    }
}

/// Signed `Γ(p1)Γ(p2) / (Γ(q1)Γ(q2))`; zero when a denominator argument is a pole.
fn gamma_ratio(p1: f64, p2: f64, q1: f64, q2: f64) -> f64 {
    if is_nonpositive_integer(q1) || is_nonpositive_integer(q2) {
        return 0.0;
    }
    let (s1, l1) = ln_gamma_signed(p1);
    let (s2, l2) = ln_gamma_signed(p2);
    let (s3, l3) = ln_gamma_signed(q1);
    let (s4, l4) = ln_gamma_signed(q2);
    s1 * s2 * s3 * s4 * (l1 + l2 - l3 - l4).exp()
}

fn reciprocal(a: f64, b: f64, c: f64, z: f64) -> Result<(f64, usize), SpecfunError> {
    let iz = 1.0 / z;
    let mz = -z;
    let mut terms = 0;
    let mut part = |x: f64, y: f64| -> Result<f64, SpecfunError> {
        // Γ(c)Γ(y-x) / (Γ(y)Γ(c-x)) (-z)^{-x} ₂F₁(x, x-c+1; x-y+1; 1/z)
        let coef = gamma_ratio(c, y - x, y, c - x);
        if coef == 0.0 {
            return Ok(0.0);
        }
        let (s, n) = series(x, x - c + 1.0, x - y + 1.0, iz)?;
        terms += n;
        Ok(coef * mz.powf(-x) * s)
    };
    let value = part(a, b)? + part(b, a)?;
    Ok((value, terms))
}

/// ₂F₁(a, b; c; z) for `z ≤ 0` with term-count diagnostics.
pub fn hyp2f1(a: f64, b: f64, c: f64, z: f64) -> Result<Hyp2f1, SpecfunError> {
    if !(a.is_finite() && b.is_finite() && c.is_finite() && z.is_finite()) {
        return Err(SpecfunError::Domain(format!(
            "non-finite argument a={a}, b={b}, c={c}, z={z}"
        )));
    }
    if is_nonpositive_integer(c) {
        return Err(SpecfunError::Domain(format!("c = {c} is a pole")));
    }
    if z > 0.0 {
        return Err(SpecfunError::Domain(format!("z = {z} > 0 is not supported")));
    }
    if z == 0.0 {
        return Ok(Hyp2f1 {
            value: 1.0,
            terms: 0,
            method: Hyp2f1Method::Series,
        });
    }
    let (method, (value, terms)) = if z >= PFAFF_LIMIT {
        (Hyp2f1Method::Series, series(a, b, c, z)?)
    } else if z >= RECIPROCAL_LIMIT || is_integer(a - b) {
        (Hyp2f1Method::Pfaff, pfaff(a, b, c, z)?)
    } else {
        (Hyp2f1Method::Reciprocal, reciprocal(a, b, c, z)?)
    };
    Ok(Hyp2f1 { value, terms, method })
}

/// Value-only shorthand for [`hyp2f1`].
pub fn gauss_2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64, SpecfunError> {
    hyp2f1(a, b, c, z).map(|h| h.value)
}
