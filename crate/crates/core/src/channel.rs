//! Path-loss laws, Nakagami-m fading and SINR assembly for the NOMA pair.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{NetworkRealization, Point, SpatialParams};
use crate::specfun::gauss_legendre;

pub const SPEED_OF_LIGHT: f64 = 3e8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// RIS half-length `L` in m.
    pub half_length: f64,
    pub alpha_t: f64,
    pub alpha_c: f64,
    pub alpha_rf: f64,
    /// Direct-link intercept `C`.
    pub intercept: f64,
    /// Frequency used for `C_RF`, in Hz.
    pub f_c: f64,
    pub rho_a: f64,
    pub rho_t: f64,
    pub m_t: u32,
    pub m_c: u32,
    /// Wavenumber in rad/m.
    pub k: f64,
    pub phi_0: f64,
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.half_length > 0.0 && self.half_length.is_finite()) {
            return Err(invalid(format!("L must be positive, got {}", self.half_length)));
        }
        if !(self.alpha_t > 1.0) {
            return Err(invalid(format!("alpha_t must exceed 1, got {}", self.alpha_t)));
        }
        if !(self.alpha_c > 2.0) {
            return Err(invalid(format!("alpha_c must exceed 2, got {}", self.alpha_c)));
        }
        if !(self.alpha_rf > 2.0) {
            return Err(invalid(format!("alpha_rf must exceed 2, got {}", self.alpha_rf)));
        }
        if !(self.intercept > 0.0 && self.intercept.is_finite()) {
            return Err(invalid(format!("intercept C must be positive, got {}", self.intercept)));
        }
        if !(self.f_c > 0.0) {
            return Err(invalid(format!("f_c must be positive, got {}", self.f_c)));
        }
        if !(self.rho_a > 0.0 && self.rho_a < 1.0) {
            return Err(invalid(format!("rho_a must lie in (0, 1), got {}", self.rho_a)));
        }
        if !(0.0..=1.0).contains(&self.rho_t) {
            return Err(invalid(format!("rho_t must lie in [0, 1], got {}", self.rho_t)));
        }
        if self.m_t == 0 || self.m_c == 0 {
            return Err(invalid("Nakagami parameters must be at least 1"));
        }
        if !(self.k > 0.0) {
            return Err(invalid(format!("wavenumber must be positive, got {}", self.k)));
        }
        Ok(())
    }

    /// `C_RF = (c / 4π f_c)²`.
    pub fn c_rf(&self) -> f64 {
        (SPEED_OF_LIGHT / (4.0 * PI * self.f_c)).powi(2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerAllocation {
    pub a_c: f64,
    pub a_t: f64,
    /// BS transmit power in W.
    pub p_b: f64,
    /// Noise power in W.
    pub sigma2: f64,
}

impl PowerAllocation {
    pub fn validate(&self) -> Result<()> {
        if !(self.a_t > 0.0 && self.a_c > self.a_t) {
            return Err(invalid(format!(
                "a_c > a_t required (and a_t > 0), got a_c={} a_t={}",
                self.a_c, self.a_t
            )));
        }
        if (self.a_c + self.a_t - 1.0).abs() > 1e-9 {
            return Err(invalid(format!("a_c + a_t must equal 1, got {}", self.a_c + self.a_t)));
        }
        if !(self.p_b > 0.0 && self.p_b.is_finite()) {
            return Err(invalid(format!("P_b must be positive, got {}", self.p_b)));
        }
        if !(self.sigma2 >= 0.0) {
            return Err(invalid(format!("sigma2 must be non-negative, got {}", self.sigma2)));
        }
        Ok(())
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Channel seen by the typical user when SIC decodes the connected user's
/// message (numerator of the SIC SINR).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SicChannel {
    /// Direct connected-user path loss `P_c(x_B, x_c)`.
    #[default]
    Direct,
    /// The typical user's own RIS path for both terms.
    Physical,
}

/// Channel carrying the typical user's layer in the connected user's SINR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConnectedIntra {
    /// The connected user's own link.
    #[default]
    Own,
    /// The RIS law `P_t(x_B, x_R)`.
    Ris,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterferenceTail {
    /// Add the mean interference of BSs beyond the simulated window.
    #[default]
    MeanField,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterceptRoute {
    /// Closed form of the angle-averaged intercept.
    #[default]
    Formula,
    /// Quadrature of the angle average.
    Oracle,
}

/// Law used for the serving link of the typical user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "law")]
pub enum PathLossModel {
    /// Aperture integral with the linear phase design.
    General { quad_points: usize },
    /// Far-field law with the realization's own angles.
    RisApprox,
    /// Far-field law with the angle-averaged intercept.
    #[default]
    AngleAveraged,
    /// Direct RF link `C d^{-α_RF}` from the BS to the user.
    ConventionalRf,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChannelOptions {
    pub sic_channel: SicChannel,
    pub connected_intra: ConnectedIntra,
    pub interference_tail: InterferenceTail,
    pub intercept_route: InterceptRoute,
    pub typical_law: PathLossModel,
}

/// Distances and signed angles of a BS–RIS–user link, RIS along the x-axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    /// BS position after mirroring onto the user's side of the RIS line.
    pub bs: Point,
    pub r_br0: f64,
    pub r_ru0: f64,
    pub theta_br0: f64,
    pub theta_ru0: f64,
}

impl LinkGeometry {
    pub fn new(bs: Point, ris: Point) -> Result<Self> {
        let user_side = -ris.y;
        if user_side == 0.0 {
            return Err(Error::Domain("user lies on the RIS line".into()));
        }
        let mut bs = bs;
        if (bs.y - ris.y) * user_side < 0.0 {
            bs.y = 2.0 * ris.y - bs.y;
        }
        if bs.y == ris.y {
            return Err(Error::Domain("BS lies on the RIS line".into()));
        }
        let r_br0 = bs.dist(ris);
        let r_ru0 = ris.norm();
        let theta_br0 = ((ris.x - bs.x) / r_br0).asin();
        let theta_ru0 = (-ris.x / r_ru0).asin();
        Ok(Self {
            bs,
            r_br0,
            r_ru0,
            theta_br0,
            theta_ru0,
        })
    }
}

/// `|∫_{-L}^{L} Ψ(l) e^{-jkΩ(l)} dl|²` with exact per-point distances, the RIS
/// centred at `ris_center` along the x-axis and the user at the origin.
///
/// The amplitude is `(cos θ_BR + cos θ_RU) / (8π (r_BR r_RU)^{α_t/2})`.
pub fn path_loss_general(
    bs: Point,
    ris_center: Point,
    params: &ChannelParams,
    phase_design: impl Fn(f64) -> f64,
    quad_points: usize,
) -> Result<f64> {
    if quad_points < 64 {
        return Err(invalid(format!("quad_points must be at least 64, got {quad_points}")));
    }
    let g = LinkGeometry::new(bs, ris_center)?;
    let bs = g.bs;
    let dy_b = (bs.y - ris_center.y).abs();
    let dy_u = ris_center.y.abs();
    let half = params.half_length;
    let rule = gauss_legendre(quad_points);
    let (mut re, mut im) = (0.0, 0.0);
    for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
        let l = half * t;
        let p = Point::new(ris_center.x + l, ris_center.y);
        let r_br = p.dist(bs);
        let r_ru = p.norm();
        let psi = (dy_b / r_br + dy_u / r_ru) / (8.0 * PI * (r_br * r_ru).powf(0.5 * params.alpha_t));
        let omega = r_br + r_ru - phase_design(l);
        let (s, c) = (params.k * omega).sin_cos();
        re += w * psi * c;
        im -= w * psi * s;
    }
    re *= half;
    im *= half;
    Ok(re * re + im * im)
}

/// Linear phase profile `Θ(l) = (sin θ_BR0 - sin θ_RU0) l + φ₀/k`.
pub fn linear_phase(l: f64, theta_br0: f64, theta_ru0: f64, params: &ChannelParams) -> f64 {
    (theta_br0.sin() - theta_ru0.sin()) * l + params.phi_0 / params.k
}

/// Far-field RIS law `C_RIS² (r_BR0 r_RU0)^{-α_t}`, `C_RIS = (L/4π)(cos θ_BR0 + cos θ_RU0)`.
pub fn path_loss_ris_approx(r_br0: f64, r_ru0: f64, theta_br0: f64, theta_ru0: f64, params: &ChannelParams) -> f64 {
    let c_ris = params.half_length / (4.0 * PI) * (theta_br0.cos() + theta_ru0.cos());
    c_ris * c_ris * (r_br0 * r_ru0).powf(-params.alpha_t)
}

/// Angle-averaged power intercept
/// `(L²/16π³)(π + sin(2ρ_aπ)/(4ρ_a - 12ρ_a² + ρ_a³))`.
pub fn ris_intercept_avg(params: &ChannelParams) -> Result<f64> {
    let r = params.rho_a;
    let den = 4.0 * r - 12.0 * r * r + r * r * r;
    if den.abs() < 1e-12 {
        return Err(Error::Domain(format!(
            "rho_a = {r} is a root of the intercept denominator; use the oracle route"
        )));
    }
    let l = params.half_length;
    Ok(l * l / (16.0 * PI.powi(3)) * (PI + (2.0 * r * PI).sin() / den))
}

/// `E[(L/4π)² (cos ρ_aθ + cos (1-ρ_a)θ)²]` for `θ ~ U(0, π)` by Gauss–Legendre.
pub fn ris_intercept_oracle(params: &ChannelParams) -> f64 {
    let r = params.rho_a;
    let rule = gauss_legendre(128);
    let avg = 0.5
        * rule.apply(|t| {
            let th = 0.5 * PI * (t + 1.0);
            let s = (r * th).cos() + ((1.0 - r) * th).cos();
            s * s
        });
    (params.half_length / (4.0 * PI)).powi(2) * avg
}

pub fn ris_intercept(params: &ChannelParams, route: InterceptRoute) -> Result<f64> {
    match route {
        InterceptRoute::Formula => ris_intercept_avg(params),
        InterceptRoute::Oracle => Ok(ris_intercept_oracle(params)),
    }
}

/// Conventional RF law `C_RF d^{-α_RF}`.
pub fn path_loss_rf(distance: f64, params: &ChannelParams) -> f64 {
    params.c_rf() * distance.powf(-params.alpha_rf)
}

/// Direct law `C d^{-α}`.
pub fn path_loss_direct(distance: f64, intercept: f64, alpha: f64) -> f64 {
    intercept * distance.powf(-alpha)
}

/// Unit-mean Gamma(m, 1/m) power gain `|h|²`.
#[derive(Debug, Clone, Copy)]
pub struct NakagamiPower(Gamma<f64>);

impl NakagamiPower {
    pub fn new(m: u32) -> Result<Self> {
        if m == 0 {
            return Err(invalid("Nakagami parameter must be at least 1"));
        }
        let m = m as f64;
        Gamma::new(m, 1.0 / m)
            .map(Self)
            .map_err(|e| invalid(format!("gamma distribution: {e}")))
    }
}

impl Distribution<f64> for NakagamiPower {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.0.sample(rng)
    }
}

pub fn sample_nakagami_power(m: u32, seed: u64) -> Result<f64> {
    let d = NakagamiPower::new(m)?;
    Ok(d.sample(&mut ChaCha8Rng::seed_from_u64(seed)))
}

/// Per-BS fading powers toward the typical and the connected user.
#[derive(Debug, Clone, PartialEq)]
pub struct Fading {
    pub typical: Vec<f64>,
    pub connected: Vec<f64>,
}

impl Fading {
    /// Interfering links use `m_t` toward both users; the serving link toward
    /// the connected user uses `m_c`.
    pub fn sample<R: Rng + ?Sized>(n_bs: usize, serving: usize, params: &ChannelParams, rng: &mut R) -> Result<Self> {
        let ht = NakagamiPower::new(params.m_t)?;
        let hc = NakagamiPower::new(params.m_c)?;
        let typical = (0..n_bs).map(|_| ht.sample(rng)).collect();
        let connected = (0..n_bs)
            .map(|i| if i == serving { hc.sample(rng) } else { ht.sample(rng) })
            .collect();
        Ok(Self { typical, connected })
    }

    /// All fading powers equal to one.
    pub fn unit(n_bs: usize) -> Self {
        Self {
            typical: vec![1.0; n_bs],
            connected: vec![1.0; n_bs],
        }
    }
}

/// Mean interference per unit fading from BSs beyond radius `r` of a PPP with
/// density `lambda`, law `gain · d^{-α}`.
pub fn tail_interference(lambda: f64, gain: f64, alpha: f64, r: f64) -> f64 {
    if gain == 0.0 || lambda == 0.0 {
        return 0.0;
    }
    if alpha <= 2.0 {
        return f64::INFINITY;
    }
    2.0 * PI * lambda * gain * r.powf(2.0 - alpha) / (alpha - 2.0)
}

/// Power-free link quantities of one realization; multiply by `P_b` for powers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGains {
    pub h_t0: f64,
    pub h_c0: f64,
    /// Serving RIS law toward the typical user.
    pub law_ris: f64,
    /// Serving direct law toward the typical user (conventional benchmark).
    pub law_conv: f64,
    /// `C r_c^{-α_c}`.
    pub law_c: f64,
    pub interference_ris: f64,
    pub interference_conv: f64,
    pub interference_c: f64,
}

/// Evaluates every link of a realization. `intercept` is the angle-averaged
/// RIS intercept used for interferers and the angle-averaged law.
pub fn link_gains(
    real: &NetworkRealization,
    fading: &Fading,
    spatial: &SpatialParams,
    cp: &ChannelParams,
    opts: &ChannelOptions,
    intercept: f64,
) -> Result<LinkGains> {
    if real.bs.is_empty() {
        return Err(invalid("realization has no base station"));
    }
    let b0 = real.serving_bs();
    let r_ru0 = real.ris.norm();
    let r_br0 = b0.dist(real.ris);
    let law_ris = match opts.typical_law {
        PathLossModel::AngleAveraged => intercept * (r_br0 * r_ru0).powf(-cp.alpha_t),
        PathLossModel::RisApprox => {
            let g = LinkGeometry::new(b0, real.ris)?;
            path_loss_ris_approx(g.r_br0, g.r_ru0, g.theta_br0, g.theta_ru0, cp)
        }
        PathLossModel::General { quad_points } => {
            let g = LinkGeometry::new(b0, real.ris)?;
            path_loss_general(
                b0,
                real.ris,
                cp,
                |l| linear_phase(l, g.theta_br0, g.theta_ru0, cp),
                quad_points,
            )?
        }
        PathLossModel::ConventionalRf => path_loss_direct(b0.norm(), cp.intercept, cp.alpha_rf),
    };
    let law_conv = path_loss_direct(b0.norm(), cp.intercept, cp.alpha_rf);
    let law_c = path_loss_direct(spatial.r_c, cp.intercept, cp.alpha_c);

    let ris_scale = cp.rho_t * intercept * r_ru0.powf(-cp.alpha_t);
    let (mut i_ris, mut i_conv, mut i_c) = (0.0, 0.0, 0.0);
    for (i, &p) in real.bs.iter().enumerate() {
        if i == real.serving {
            continue;
        }
        let ht = fading.typical[i];
        i_ris += ht * p.dist(real.ris).powf(-cp.alpha_t);
        i_conv += ht * p.norm().powf(-cp.alpha_rf);
        i_c += fading.connected[i] * p.dist(real.connected).powf(-cp.alpha_c);
    }
    let mut interference_ris = ris_scale * i_ris;
    let mut interference_conv = cp.intercept * i_conv;
    let mut interference_c = cp.intercept * i_c;
    if opts.interference_tail == InterferenceTail::MeanField {
        let r = spatial.sim_radius;
        let lam = spatial.lambda_b;
        interference_ris += tail_interference(lam, ris_scale, cp.alpha_t, r);
        interference_conv += tail_interference(lam, cp.intercept, cp.alpha_rf, r);
        interference_c += tail_interference(lam, cp.intercept, cp.alpha_c, r);
    }
    Ok(LinkGains {
        h_t0: fading.typical[real.serving],
        h_c0: fading.connected[real.serving],
        law_ris,
        law_conv,
        law_c,
        interference_ris,
        interference_conv,
        interference_c,
    })
}

/// Which serving link carries the typical user's signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TypicalLink {
    Ris,
    Conventional,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sinrs {
    pub gamma_sic: f64,
    pub gamma_t: f64,
    pub gamma_c: f64,
    /// Set when a vanishing denominator was replaced by `f64::MAX`.
    pub saturated: bool,
}

/// `num / den` with `+∞` replaced by the largest finite value.
pub fn sinr_ratio(num: f64, den: f64) -> (f64, bool) {
    let v = num / den;
    if v.is_nan() {
        (0.0, false)
    } else if v > f64::MAX {
        (f64::MAX, true)
    } else {
        (v, false)
    }
}

/// NOMA SINRs of the SIC step, the typical user and the connected user.
pub fn sinr_all(g: &LinkGains, link: TypicalLink, pa: &PowerAllocation, opts: &ChannelOptions) -> Sinrs {
    let (law_t, i_t) = match link {
        TypicalLink::Ris => (g.law_ris, g.interference_ris),
        TypicalLink::Conventional => (g.law_conv, g.interference_conv),
    };
    let pb = pa.p_b;
    let s_t = pb * g.h_t0 * law_t;
    let noise_t = pb * i_t + pa.sigma2;
    let sic_num = match opts.sic_channel {
        SicChannel::Direct => pa.a_c * pb * g.h_t0 * g.law_c,
        SicChannel::Physical => pa.a_c * s_t,
    };
    let (gamma_sic, f1) = sinr_ratio(sic_num, pa.a_t * s_t + noise_t);
    let (gamma_t, f2) = sinr_ratio(pa.a_t * s_t, noise_t);
    let intra = match opts.connected_intra {
        ConnectedIntra::Own => g.law_c,
        ConnectedIntra::Ris => law_t,
    };
    let (gamma_c, f3) = sinr_ratio(
        pa.a_c * pb * g.h_c0 * g.law_c,
        pa.a_t * pb * g.h_c0 * intra + pb * g.interference_c + pa.sigma2,
    );
    Sinrs {
        gamma_sic,
        gamma_t,
        gamma_c,
        saturated: f1 || f2 || f3,
    }
}

/// Full-power SINRs `(γ_t, γ_c, saturated)` of the orthogonal baseline.
pub fn sinr_oma(g: &LinkGains, link: TypicalLink, pa: &PowerAllocation) -> (f64, f64, bool) {
    let (law_t, i_t) = match link {
        TypicalLink::Ris => (g.law_ris, g.interference_ris),
        TypicalLink::Conventional => (g.law_conv, g.interference_conv),
    };
    let pb = pa.p_b;
    let (gt, f1) = sinr_ratio(pb * g.h_t0 * law_t, pb * i_t + pa.sigma2);
    let (gc, f2) = sinr_ratio(pb * g.h_c0 * g.law_c, pb * g.interference_c + pa.sigma2);
    (gt, gc, f1 || f2)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn params() -> ChannelParams {
        ChannelParams {
            half_length: 0.75,
            alpha_t: 2.4,
            alpha_c: 4.0,
            alpha_rf: 4.0,
            intercept: 0.01,
            f_c: 1e7,
            rho_a: 0.5,
            rho_t: 1.0,
            m_t: 4,
            m_c: 4,
            k: 2.0 * PI * 1e7 / SPEED_OF_LIGHT,
            phi_0: 0.0,
        }
    }

    #[test]
    fn validation() {
        assert!(params().validate().is_ok());
        let mut p = params();
        p.alpha_t = 1.0;
        assert!(p.validate().is_err());
        let mut p = params();
        p.rho_t = 1.5;
        assert!(p.validate().is_err());
        let pa = PowerAllocation {
            a_c: 0.4,
            a_t: 0.6,
            p_b: 1.0,
            sigma2: 0.0,
        };
        assert!(pa.validate().is_err());
    }

    #[test]
    fn phase_profile() {
        let mut p = params();
        p.phi_0 = 0.3;
        assert!((linear_phase(0.4, 0.7, 0.7, &p) - 0.3 / p.k).abs() < 1e-15);
        assert_eq!(linear_phase(0.0, 0.2, 1.1, &p), 0.3 / p.k);
        assert!((linear_phase(1.0, PI / 2.0, 0.0, &p) - (1.0 + 0.3 / p.k)).abs() < 1e-15);
    }

    #[test]
    fn far_field_law() {
        let p = params();
        let g = path_loss_ris_approx(10.0, 20.0, 0.0, 0.0, &p);
        let want = (0.75 / (2.0 * PI)).powi(2) * 200f64.powf(-2.4);
        assert!((g - want).abs() / want < 1e-14);
        let g = path_loss_ris_approx(100.0, 100.0, PI / 4.0, PI / 4.0, &p);
        let c2 = g / 1e4f64.powf(-2.4);
        assert!((c2 - 2.0 * 0.75f64.powi(2) / (16.0 * PI * PI)).abs() < 1e-15);
        // hand value 0.08441² = 0.0071251, rounded in the fourth digit
        assert!((c2 - 0.007_125_1).abs() / c2 < 2e-4);
        let mut half = p;
        half.half_length = 0.375;
        let q = path_loss_ris_approx(100.0, 100.0, PI / 4.0, PI / 4.0, &half);
        assert!((g / q - 4.0).abs() < 1e-12);
    }

    #[test]
    fn aperture_integral_matches_far_field() {
        let p = params();
        let ris = Point::new(8.0, -15.0);
        for bs in [
            Point::new(200.0, -300.0),
            Point::new(-150.0, 120.0),
            Point::new(40.0, -900.0),
        ] {
            let g = LinkGeometry::new(bs, ris).unwrap();
            let exact = path_loss_general(bs, ris, &p, |l| linear_phase(l, g.theta_br0, g.theta_ru0, &p), 128).unwrap();
            let approx = path_loss_ris_approx(g.r_br0, g.r_ru0, g.theta_br0, g.theta_ru0, &p);
            assert!(((exact - approx) / approx).abs() < 0.05, "{bs:?}: {exact} vs {approx}");
            let fine = path_loss_general(bs, ris, &p, |l| linear_phase(l, g.theta_br0, g.theta_ru0, &p), 256).unwrap();
            assert!(((fine - exact) / exact).abs() < 1e-6);
        }
    }

    #[test]
    fn aperture_integral_far_field_limit() {
        // at high frequency the phase design matters; gap must close with distance
        let mut p = params();
        p.k = 2.0 * PI * 3.5e9 / SPEED_OF_LIGHT;
        let scale = 100.0 * p.half_length;
        let ris = Point::new(0.3 * scale, -scale);
        let bs = Point::new(-2.0 * scale, -3.0 * scale);
        let g = LinkGeometry::new(bs, ris).unwrap();
        let exact = path_loss_general(bs, ris, &p, |l| linear_phase(l, g.theta_br0, g.theta_ru0, &p), 512).unwrap();
        let approx = path_loss_ris_approx(g.r_br0, g.r_ru0, g.theta_br0, g.theta_ru0, &p);
        assert!(((exact - approx) / approx).abs() < 0.01, "{exact} vs {approx}");
    }

    #[test]
    fn aperture_vanishes_and_rejects_degenerate() {
        let mut p = params();
        p.half_length = 1e-9;
        let ris = Point::new(1.0, -5.0);
        let g = path_loss_general(Point::new(50.0, -80.0), ris, &p, |_| 0.0, 64).unwrap();
        assert!(g < 1e-20);
        assert!(path_loss_general(Point::new(1.2, -5.0), ris, &params(), |_| 0.0, 64).is_err());
        assert!(path_loss_general(Point::new(50.0, -80.0), Point::new(3.0, 0.0), &params(), |_| 0.0, 64).is_err());
        assert!(path_loss_general(Point::new(50.0, -80.0), ris, &params(), |_| 0.0, 32).is_err());
    }

    #[test]
    fn opposite_side_bs_is_mirrored() {
        let ris = Point::new(2.0, -10.0);
        let a = LinkGeometry::new(Point::new(60.0, 50.0), ris).unwrap();
        let b = LinkGeometry::new(Point::new(60.0, -70.0), ris).unwrap();
        assert_eq!(a.bs, b.bs);
        assert!((a.r_br0 - b.r_br0).abs() < 1e-12);
    }

    #[test]
    fn intercept_routes() {
        let p = params();
        let formula = ris_intercept_avg(&p).unwrap();
        assert!((formula - 0.75f64.powi(2) / (16.0 * PI * PI)).abs() < 1e-16);
        // (1/π)∫(2cos(θ/2))² = 2, twice the closed form at ρ_a = 1/2
        let oracle = ris_intercept_oracle(&p);
        assert!((oracle / formula - 2.0).abs() < 1e-12);
        let mut double = p;
        double.half_length = 1.5;
        assert!((ris_intercept_avg(&double).unwrap() / formula - 4.0).abs() < 1e-12);
        let mut root = p;
        root.rho_a = 6.0 - 32f64.sqrt();
        assert!(matches!(ris_intercept_avg(&root), Err(Error::Domain(_))));
    }

    #[test]
    fn rf_law() {
        let p = params();
        let c_rf = path_loss_rf(1.0, &p);
        assert!((c_rf - (3e8 / (4.0 * PI * 1e7)).powi(2)).abs() < 1e-12);
        assert!((c_rf - 5.699_6).abs() / c_rf < 1e-4);
        assert!((path_loss_rf(10.0, &p) / path_loss_rf(20.0, &p) - 16.0).abs() < 1e-12);
    }

    #[test]
    fn nakagami_seeded() {
        assert_eq!(
            sample_nakagami_power(4, 7).unwrap(),
            sample_nakagami_power(4, 7).unwrap()
        );
        assert!(sample_nakagami_power(0, 7).is_err());
    }

    #[test]
    fn sinr_sentinel() {
        let (v, flag) = sinr_ratio(1.0, 0.0);
        assert!(flag && v == f64::MAX);
        assert_eq!(sinr_ratio(0.0, 0.0), (0.0, false));
    }

    fn fixture() -> (NetworkRealization, SpatialParams) {
        let real = NetworkRealization {
            bs: vec![
                Point::new(200.0, 50.0),
                Point::new(-400.0, 300.0),
                Point::new(100.0, -600.0),
            ],
            ris: Point::new(10.0, -5.0),
            serving: 0,
            connected: Point::new(250.0, 50.0),
            resamples: 0,
        };
        let spatial = SpatialParams::new(1.0 / (9e4 * PI), 1e-5, 25.0, 50.0).unwrap();
        (real, spatial)
    }

    fn close(a: f64, b: f64) -> bool {
        ((a - b) / b).abs() < 1e-12
    }

    #[test]
    fn three_bs_fixture() {
        let (real, spatial) = fixture();
        let mut cp = params();
        cp.m_t = 1;
        cp.m_c = 1;
        let mut opts = ChannelOptions::default();
        opts.interference_tail = InterferenceTail::None;
        let pa = PowerAllocation {
            a_c: 0.6,
            a_t: 0.4,
            p_b: 1e-3,
            sigma2: 1e-12,
        };
        let g = link_gains(
            &real,
            &Fading::unit(3),
            &spatial,
            &cp,
            &opts,
            ris_intercept_avg(&cp).unwrap(),
        )
        .unwrap();
        let s = sinr_all(&g, TypicalLink::Ris, &pa, &opts);
        assert!(close(s.gamma_sic, 0.941_982_177_284_670_9), "{}", s.gamma_sic);
        assert!(close(s.gamma_t, 0.013_305_692_701_654_397), "{}", s.gamma_t);
        assert!(close(s.gamma_c, 0.585_332_657_029_968_2), "{}", s.gamma_c);
        assert!(!s.saturated);

        opts.sic_channel = SicChannel::Physical;
        opts.connected_intra = ConnectedIntra::Ris;
        let s = sinr_all(&g, TypicalLink::Ris, &pa, &opts);
        assert!(close(s.gamma_sic, 0.019_696_463_955_776_813));
        assert!(close(s.gamma_c, 0.947_235_854_123_882_7));
    }

    #[test]
    fn lone_bs_without_noise_saturates() {
        let (mut real, spatial) = fixture();
        real.bs.truncate(1);
        let mut cp = params();
        cp.rho_t = 0.0;
        let opts = ChannelOptions {
            interference_tail: InterferenceTail::None,
            ..Default::default()
        };
        let pa = PowerAllocation {
            a_c: 0.6,
            a_t: 0.4,
            p_b: 1e-3,
            sigma2: 0.0,
        };
        let g = link_gains(&real, &Fading::unit(1), &spatial, &cp, &opts, 1e-3).unwrap();
        let s = sinr_all(&g, TypicalLink::Ris, &pa, &opts);
        assert_eq!(s.gamma_t, f64::MAX);
        assert!(s.saturated);
    }

    #[test]
    fn zero_typical_share() {
        let (real, spatial) = fixture();
        let cp = params();
        let opts = ChannelOptions::default();
        let pa = PowerAllocation {
            a_c: 1.0,
            a_t: 0.0,
            p_b: 1e-3,
            sigma2: 1e-12,
        };
        let g = link_gains(&real, &Fading::unit(3), &spatial, &cp, &opts, 2e-3).unwrap();
        let s = sinr_all(&g, TypicalLink::Ris, &pa, &opts);
        assert_eq!(s.gamma_t, 0.0);
        let want = pa.p_b * g.h_t0 * g.law_c / (pa.p_b * g.interference_ris + pa.sigma2);
        assert!(close(s.gamma_sic, want));
    }

    #[test]
    fn empty_realization_is_error() {
        let (mut real, spatial) = fixture();
        real.bs.clear();
        let r = link_gains(
            &real,
            &Fading::unit(0),
            &spatial,
            &params(),
            &ChannelOptions::default(),
            1e-3,
        );
        assert!(r.is_err());
    }
}
