use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(x: f64) -> f64 {
    // x is already shifted by one
    let mut a = LANCZOS[0];
    for (i, &p) in LANCZOS.iter().enumerate().skip(1) {
        a += p / (x + i as f64);
    }
    a
}

/// Gamma function. Poles at non-positive integers give infinity.
pub fn gamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return f64::INFINITY;
    }
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    if x > 171.7 {
        return f64::INFINITY;
    }
    let x = x - 1.0;
    let t = x + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * lanczos_sum(x)
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    ln_gamma_signed(x).1
}

/// Sign and log-magnitude of `Γ(x)` on the whole real line.
///
/// At the poles the magnitude is infinite and the sign is reported as `+1`.
pub fn ln_gamma_signed(x: f64) -> (f64, f64) {
    if x <= 0.0 && x == x.floor() {
        return (1.0, f64::INFINITY);
    }
    if x < 0.5 {
        let s = (PI * x).sin();
        let (sg, lg) = ln_gamma_signed(1.0 - x);
        return (s.signum() * sg, (PI / s.abs()).ln() - lg);
    }
    let x = x - 1.0;
    let t = x + LANCZOS_G + 0.5;
    (
        1.0,
        0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + lanczos_sum(x).ln(),
    )
}

/// Alzer constant `η = m (m!)^{-1/m}` for a Nakagami-m power variable.
pub fn alzer_eta(m: f64) -> f64 {
    m * (-ln_gamma(m + 1.0) / m).exp()
}

/// Alzer approximation `(1 - e^{-η x})^m` of the CDF of a unit-mean
/// Gamma(m, 1/m) variable. It is a lower bound of the exact CDF.
pub fn gamma_cdf_alzer_approx(m: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    (-(-alzer_eta(m) * x).exp_m1()).powf(m)
}

/// Regularized lower incomplete gamma `P(a, x) = γ(a, x)/Γ(a)`, `a > 0`, `x ≥ 0`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let log_prefix = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut ap = a;
        for _ in 0..10_000 {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * 1e-17 {
                break;
            }
        }
        (log_prefix.exp() * sum).min(1.0)
    } else {
        // modified Lentz on the continued fraction of Γ(a, x)
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        1.0 - log_prefix.exp() * h
    }
}
