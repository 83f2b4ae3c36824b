use std::f64::consts::PI;
use std::sync::OnceLock;

use super::SpecfunError;

/// Nodes and weights of an interpolatory quadrature rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ w_i f(x_i)`.
    pub fn apply(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Chebyshev–Gauss rule of the first kind: `∫ f(x)/√(1-x²) dx ≈ (π/K) Σ f(x_i)`
/// with `x_i = cos((2i-1)π / 2K)`.
pub fn chebyshev_gauss(order: usize) -> Result<QuadratureRule, SpecfunError> {
    if order == 0 {
        return Err(SpecfunError::Domain("quadrature order must be positive".into()));
    }
    let k = order as f64;
    let nodes = (1..=order)
        .map(|i| ((2.0 * i as f64 - 1.0) * PI / (2.0 * k)).cos())
        .collect();
    Ok(QuadratureRule {
        nodes,
        weights: vec![PI / k; order],
    })
}

/// Gauss–Legendre rule on `[-1, 1]` by Newton iteration on `P_n`.
pub fn gauss_legendre(order: usize) -> QuadratureRule {
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            x = 0.0;
            dp = 1.0;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        weights[i] = w;
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
    }
    QuadratureRule { nodes, weights }
}

const PANEL_ORDER: usize = 128;
const MAX_PANELS: usize = 256;

fn panel_rule() -> &'static QuadratureRule {
    static RULE: OnceLock<QuadratureRule> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(PANEL_ORDER))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Integral {
    pub value: f64,
    pub evals: u64,
    pub converged: bool,
}

fn composite(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let rule = panel_rule();
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + h * p as f64;
        let mid = lo + 0.5 * h;
        total += 0.5 * h * rule.apply(|x| f(mid + 0.5 * h * x));
    }
    total
}

/// `∫_a^b f` with 128-point Gauss–Legendre panels, doubling the panel count
/// until successive estimates agree to `rel_tol`.
pub(crate) fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> Integral {
    let mut panels = 1;
    let mut prev = composite(&mut f, a, b, panels);
    let mut evals = PANEL_ORDER as u64;
    loop {
        panels *= 2;
        let next = composite(&mut f, a, b, panels);
        evals += (PANEL_ORDER * panels) as u64;
        let diff = (next - prev).abs();
        if diff <= rel_tol * next.abs() || diff < f64::MIN_POSITIVE {
            return Integral {
                value: next,
                evals,
                converged: true,
            };
        }
        if panels >= MAX_PANELS {
            return Integral {
                value: next,
                evals,
                converged: false,
            };
        }
        prev = next;
    }
}

/// `∫_0^∞ f` through `x = s·t/(1-t)`, `t ∈ [0, 1)`.
pub(crate) fn integrate_to_infinity(mut f: impl FnMut(f64) -> f64, scale: f64, rel_tol: f64) -> Integral {
    integrate(
        |t| {
            let one_minus = 1.0 - t;
            let x = scale * t / one_minus;
            let jac = scale / (one_minus * one_minus);
            let v = f(x);
            if v == 0.0 {
                0.0
            } else {
                v * jac
            }
        },
        0.0,
        1.0,
        rel_tol,
    )
}

/// `∫_0^{upper} f` for integrands with a knee at `s` and slow algebraic decay
/// beyond it: plain panels on `[0, s]`, then `u = s·e^x` up to `upper`.
pub(crate) fn integrate_two_scale(mut f: impl FnMut(f64) -> f64, s: f64, upper: f64, rel_tol: f64) -> Integral {
    let s = s.min(upper);
    let head = integrate(&mut f, 0.0, s, rel_tol);
    if s >= upper {
        return head;
    }
    let tail = integrate(
        |x| {
            let u = s * x.exp();
            f(u) * u
        },
        0.0,
        (upper / s).ln(),
        rel_tol,
    );
    Integral {
        value: head.value + tail.value,
        evals: head.evals + tail.evals,
        converged: head.converged && tail.converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chebyshev_integrates_polynomials_exactly() {
        let rule = chebyshev_gauss(5).unwrap();
        // ∫ x²/√(1-x²) = π/2, ∫ x⁸/√(1-x²) = 35π/128
        assert!((rule.apply(|x| x * x) - PI / 2.0).abs() < 1e-14);
        assert!((rule.apply(|x| x.powi(8)) - 35.0 * PI / 128.0).abs() < 1e-14);
        assert!(chebyshev_gauss(0).is_err());
    }

    #[test]
    fn chebyshev_nodes_in_open_interval() {
        let rule = chebyshev_gauss(400).unwrap();
        assert!(rule.nodes.iter().all(|&x| x > -1.0 && x < 1.0));
        assert!((rule.weights.iter().sum::<f64>() - PI).abs() < 1e-12);
    }

    #[test]
    fn legendre_weights_and_exactness() {
        for n in [1, 2, 7, 64, 128] {
            let r = gauss_legendre(n);
            assert!((r.weights.iter().sum::<f64>() - 2.0).abs() < 1e-13, "n={n}");
        }
        let r = gauss_legendre(10);
        // degree 19 exact: ∫ x^18 = 2/19
        assert!((r.apply(|x| x.powi(18)) - 2.0 / 19.0).abs() < 1e-15);
    }

    #[test]
    fn panels_converge() {
        let i = integrate(|x| x.sin(), 0.0, PI, 1e-12);
        assert!(i.converged);
        assert!((i.value - 2.0).abs() < 1e-13);
        let g = integrate_to_infinity(|x| (-x * x).exp(), 1.0, 1e-10);
        assert!((g.value - PI.sqrt() / 2.0).abs() < 1e-10);
    }
}
