//! Parameter bundles shared by both back-ends.

use std::f64::consts::PI;

use crate::channel::{dbm_to_watts, ris_intercept, ChannelOptions, ChannelParams, PowerAllocation, SPEED_OF_LIGHT};
use crate::error::{invalid, Result};
use crate::geometry::SpatialParams;

/// Largest tolerated share of mean connected-user interference lost to the window.
pub const MAX_TRUNCATION_DEFICIT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub spatial: SpatialParams,
    pub channel: ChannelParams,
    pub power: PowerAllocation,
    pub options: ChannelOptions,
}

impl SystemParams {
    /// Default system settings at `P_b = 0 dBm`.
    pub fn paper_defaults() -> Self {
        let lambda_b = 1.0 / (300.0 * 300.0 * PI);
        let f_c = 1e7;
        Self {
            spatial: SpatialParams::new(lambda_b, lambda_b, 25.0, 50.0).expect("default spatial parameters are valid"),
            channel: ChannelParams {
                half_length: 0.75,
                alpha_t: 2.4,
                alpha_c: 4.0,
                alpha_rf: 4.0,
                intercept: 0.01,
                f_c,
                rho_a: 0.5,
                rho_t: 1.0,
                m_t: 4,
                m_c: 4,
                k: 2.0 * PI * f_c / SPEED_OF_LIGHT,
                phi_0: 0.0,
            },
            power: PowerAllocation {
                a_c: 0.6,
                a_t: 0.4,
                p_b: dbm_to_watts(0.0),
                sigma2: dbm_to_watts(noise_dbm(f_c, 10.0)),
            },
            options: ChannelOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.spatial.validate()?;
        self.channel.validate()?;
        self.power.validate()?;
        let deficit = self.spatial.truncation_deficit(self.channel.alpha_c);
        if deficit >= MAX_TRUNCATION_DEFICIT {
            return Err(invalid(format!(
                "sim_radius {} loses {deficit:.2e} of the mean interference (limit {MAX_TRUNCATION_DEFICIT})",
                self.spatial.sim_radius
            )));
        }
        self.intercept()?;
        Ok(())
    }

    /// Angle-averaged RIS power intercept on the configured route.
    pub fn intercept(&self) -> Result<f64> {
        ris_intercept(&self.channel, self.options.intercept_route)
    }

    pub fn with_p_b_dbm(mut self, dbm: f64) -> Self {
        self.power.p_b = dbm_to_watts(dbm);
        self
    }

    pub fn with_half_length(mut self, l: f64) -> Self {
        self.channel.half_length = l;
        self
    }

    pub fn with_lambda_b(mut self, lambda_b: f64) -> Self {
        self.spatial.lambda_b = lambda_b;
        self.spatial.sim_radius = crate::geometry::default_sim_radius(lambda_b);
        self
    }
}

/// Thermal noise `-170 dBm/Hz + 10 log10(B) + N_f` in dBm.
pub fn noise_dbm(bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    -170.0 + 10.0 * bandwidth_hz.log10() + noise_figure_db
}

/// Linear SINR thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub gamma_sic: f64,
    pub gamma_t: f64,
    pub gamma_c: f64,
}

impl Thresholds {
    pub fn uniform(gamma: f64) -> Self {
        Self {
            gamma_sic: gamma,
            gamma_t: gamma,
            gamma_c: gamma,
        }
    }

    /// `γ = 2^{R/B_w} - 1` for the two users' target rates.
    pub fn from_rates(r_t: f64, r_c: f64, b_w: f64, gamma_sic: f64) -> Self {
        Self {
            gamma_sic,
            gamma_t: 2f64.powf(r_t / b_w) - 1.0,
            gamma_c: 2f64.powf(r_c / b_w) - 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (v, name) in [
            (self.gamma_sic, "gamma_sic"),
            (self.gamma_t, "gamma_t"),
            (self.gamma_c, "gamma_c"),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be a finite non-negative value, got {v}")));
            }
        }
        Ok(())
    }

    /// `Υ₁ = γ_SIC/(a_c - γ_SIC a_t)`, or `None` when SIC cannot succeed.
    pub fn upsilon1(&self, pa: &PowerAllocation) -> Option<f64> {
        let den = pa.a_c - self.gamma_sic * pa.a_t;
        (den > 0.0).then(|| self.gamma_sic / den)
    }

    /// `Υ = max(Υ₁, γ_t/a_t)`.
    pub fn upsilon(&self, pa: &PowerAllocation) -> Option<f64> {
        self.upsilon1(pa).map(|u| u.max(self.gamma_t / pa.a_t))
    }
}

impl Default for Thresholds {
    fn default() -> Self {
        Self::uniform(1e-2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let p = SystemParams::paper_defaults();
        p.validate().unwrap();
        assert!((noise_dbm(1e7, 10.0) + 90.0).abs() < 1e-12);
        assert!((p.power.sigma2 - 1e-12).abs() < 1e-24);
        assert!((p.power.p_b - 1e-3).abs() < 1e-18);
    }

    #[test]
    fn small_window_rejected() {
        let mut p = SystemParams::paper_defaults();
        p.spatial.sim_radius = 600.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn upsilon() {
        let pa = SystemParams::paper_defaults().power;
        let th = Thresholds::default();
        let u1 = th.upsilon1(&pa).unwrap();
        assert!((u1 - 0.01 / (0.6 - 0.004)).abs() < 1e-15);
        assert!((th.upsilon(&pa).unwrap() - 0.025).abs() < 1e-15);
        assert!(Thresholds::uniform(1.5).upsilon1(&pa).is_none());
    }

    #[test]
    fn thresholds_from_rates() {
        let th = Thresholds::from_rates(1e6, 2e6, 1e6, 0.01);
        assert!((th.gamma_t - 1.0).abs() < 1e-15);
        assert!((th.gamma_c - 3.0).abs() < 1e-15);
        assert!(Thresholds::uniform(-1.0).validate().is_err());
    }
}
