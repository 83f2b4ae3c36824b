//! Network geometry: base stations as a homogeneous PPP outside the LoS ball,
//! one RIS uniform inside it, the typical user at the origin.

use std::f64::consts::{LN_2, PI};
use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{invalid, Error, Result};
use crate::specfun::ln_gamma;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn dist_sq(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialParams {
    /// BS density per m².
    pub lambda_b: f64,
    /// User density per m².
    pub lambda_u: f64,
    /// LoS radius `R_L` in m; RISs live inside, BSs outside.
    pub los_radius: f64,
    /// BS to connected-user distance in m.
    pub r_c: f64,
    /// Outer radius of the simulated window in m.
    pub sim_radius: f64,
}

impl SpatialParams {
    /// Parameters with the default window `30/√(πλ_b)`.
    pub fn new(lambda_b: f64, lambda_u: f64, los_radius: f64, r_c: f64) -> Result<Self> {
        let p = Self {
            lambda_b,
            lambda_u,
            los_radius,
            r_c,
            sim_radius: default_sim_radius(lambda_b),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64, name: &str| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(format!("{name} must be positive and finite, got {v}")))
            }
        };
        pos(self.lambda_b, "lambda_b")?;
        pos(self.lambda_u, "lambda_u")?;
        pos(self.los_radius, "los_radius")?;
        pos(self.r_c, "r_c")?;
        pos(self.sim_radius, "sim_radius")?;
        if self.sim_radius <= self.los_radius {
            return Err(invalid(format!(
                "sim_radius {} must exceed los_radius {}",
                self.sim_radius, self.los_radius
            )));
        }
        Ok(())
    }

    /// Fraction of the mean interference `Σ |x|^{-α}` seen from distance `r_c`
    /// that falls outside the window: `(r_c / sim_radius)^{α-2}`.
    pub fn truncation_deficit(&self, alpha: f64) -> f64 {
        if alpha <= 2.0 {
            return 1.0;
        }
        (self.r_c / self.sim_radius).powf(alpha - 2.0)
    }

    /// Expected number of BSs in the simulated annulus.
    pub fn mean_bs_count(&self) -> f64 {
        self.lambda_b * PI * (self.sim_radius.powi(2) - self.los_radius.powi(2))
    }
}

pub fn default_sim_radius(lambda_b: f64) -> f64 {
    30.0 / (PI * lambda_b).sqrt()
}

/// BS locations of one PPP draw on the annulus `O(R_L, sim_radius)`.
pub fn sample_ppp<R: Rng + ?Sized>(params: &SpatialParams, rng: &mut R) -> Vec<Point> {
    let mean = params.mean_bs_count();
    let n = Poisson::new(mean).map(|d| d.sample(rng) as usize).unwrap_or(0);
    let r0 = params.los_radius * params.los_radius;
    let span = params.sim_radius * params.sim_radius - r0;
    (0..n)
        .map(|_| {
            let r = (r0 + span * rng.gen::<f64>()).sqrt();
            let phi = 2.0 * PI * rng.gen::<f64>();
            Point::new(r * phi.cos(), r * phi.sin())
        })
        .collect()
}

/// RIS location, uniform in the LoS ball.
pub fn sample_ris<R: Rng + ?Sized>(params: &SpatialParams, rng: &mut R) -> Point {
    let r = params.los_radius * rng.gen::<f64>().sqrt();
    let phi = 2.0 * PI * rng.gen::<f64>();
    Point::new(r * phi.cos(), r * phi.sin())
}

/// Density `2r/R_L²` of the RIS–user distance.
pub fn pdf_r_ru(r: f64, los_radius: f64) -> f64 {
    if (0.0..=los_radius).contains(&r) {
        2.0 * r / (los_radius * los_radius)
    } else {
        0.0
    }
}

pub fn cdf_r_ru(r: f64, los_radius: f64) -> f64 {
    (r / los_radius).clamp(0.0, 1.0).powi(2)
}

/// Density of the distance to the `n`-th nearest point of a PPP,
/// `2(πλ)^n r^{2n-1} e^{-πλr²} / (n-1)!`.
pub fn pdf_r_br(r: f64, n: u32, lambda_b: f64) -> f64 {
    if r <= 0.0 || n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    let lam = PI * lambda_b;
    let log = LN_2 + nf * lam.ln() + (2.0 * nf - 1.0) * r.ln() - lam * r * r - ln_gamma(nf);
    log.exp()
}

/// Nearest-point distance CDF `1 - e^{-πλr²}`.
pub fn cdf_r_br(r: f64, lambda_b: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    -(-PI * lambda_b * r * r).exp_m1()
}

/// CDF `θ/π` of the BS–RIS–user angle.
pub fn angle_theta_cdf(theta: f64) -> Result<f64> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::Domain(format!("theta = {theta} outside [0, π]")));
    }
    Ok(theta / PI)
}

/// Incident and reflected angles `(ρ_a θ, (1-ρ_a) θ)`.
pub fn split_angles(theta: f64, rho_a: f64) -> (f64, f64) {
    (rho_a * theta, (1.0 - rho_a) * theta)
}

/// Angle at `ris` between the directions to `bs` and to `user`, in `[0, π]`.
pub fn bs_ris_user_angle(bs: Point, ris: Point, user: Point) -> f64 {
    let (ax, ay) = (bs.x - ris.x, bs.y - ris.y);
    let (bx, by) = (user.x - ris.x, user.y - ris.y);
    let cross = ax * by - ay * bx;
    let dot = ax * bx + ay * by;
    cross.abs().atan2(dot)
}

/// One network draw seen by the typical user at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkRealization {
    pub bs: Vec<Point>,
    pub ris: Point,
    /// Index into `bs` of the BS nearest the RIS.
    pub serving: usize,
    pub connected: Point,
    /// Number of empty BS draws discarded before this one.
    pub resamples: u32,
}

impl NetworkRealization {
    /// Draws BSs (redrawing empty sets), the RIS, the serving BS and the
    /// connected user at distance `r_c` in a uniform direction.
    pub fn sample<R: Rng + ?Sized>(params: &SpatialParams, rng: &mut R) -> Self {
        let mut resamples = 0;
        let mut bs = sample_ppp(params, rng);
        while bs.is_empty() {
            resamples += 1;
            bs = sample_ppp(params, rng);
        }
        let ris = sample_ris(params, rng);
        let serving = nearest(&bs, ris);
        let psi = 2.0 * PI * rng.gen::<f64>();
        let b = bs[serving];
        let connected = Point::new(b.x + params.r_c * psi.cos(), b.y + params.r_c * psi.sin());
        Self {
            bs,
            ris,
            serving,
            connected,
            resamples,
        }
    }

    pub fn serving_bs(&self) -> Point {
        self.bs[self.serving]
    }

    pub fn theta(&self) -> f64 {
        bs_ris_user_angle(self.serving_bs(), self.ris, Point::ORIGIN)
    }

    /// Line-oriented text form; floats use shortest round-trip notation.
    pub fn to_text(&self) -> String {
        let mut s = String::from("# risnoma realization v1\n");
        let _ = writeln!(s, "ris {:e} {:e}", self.ris.x, self.ris.y);
        let _ = writeln!(s, "serving {}", self.serving);
        let _ = writeln!(s, "connected {:e} {:e}", self.connected.x, self.connected.y);
        let _ = writeln!(s, "resamples {}", self.resamples);
        for p in &self.bs {
            let _ = writeln!(s, "bs {:e} {:e}", p.x, p.y);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut bs = Vec::new();
        let mut ris = None;
        let mut serving = None;
        let mut connected = None;
        let mut resamples = 0;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |m: &str| Error::Parse(format!("line {}: {m}: {line:?}", i + 1));
            let mut it = line.split_whitespace();
            let tag = it.next().unwrap_or_default();
            let mut num = || -> Result<f64> {
                it.next()
                    .ok_or_else(|| bad("missing field"))?
                    .parse::<f64>()
                    .map_err(|_| bad("bad number"))
            };
            match tag {
                "ris" => ris = Some(Point::new(num()?, num()?)),
                "connected" => connected = Some(Point::new(num()?, num()?)),
                "bs" => bs.push(Point::new(num()?, num()?)),
                "serving" => serving = Some(num()? as usize),
                "resamples" => resamples = num()? as u32,
                _ => return Err(bad("unknown record")),
            }
        }
        let serving = serving.ok_or_else(|| Error::Parse("missing serving record".into()))?;
        if serving >= bs.len() {
            return Err(Error::Parse(format!("serving index {serving} out of range")));
        }
        Ok(Self {
            bs,
            ris: ris.ok_or_else(|| Error::Parse("missing ris record".into()))?,
            serving,
            connected: connected.ok_or_else(|| Error::Parse("missing connected record".into()))?,
            resamples,
        })
    }
}

/// Index of the point nearest `to`. Panics on an empty slice.
pub fn nearest(points: &[Point], to: Point) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, p) in points.iter().enumerate() {
        let d = p.dist_sq(to);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params() -> SpatialParams {
        SpatialParams::new(1.0 / (300.0f64.powi(2) * PI), 1e-5, 25.0, 50.0).unwrap()
    }

    #[test]
    fn default_window() {
        let p = params();
        assert!((p.sim_radius - 9000.0).abs() < 1e-9);
        assert!(p.truncation_deficit(4.0) < 1e-3);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(SpatialParams::new(0.0, 1.0, 25.0, 50.0).is_err());
        assert!(SpatialParams::new(1e-6, 1.0, -1.0, 50.0).is_err());
        let mut p = params();
        p.sim_radius = 10.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn points_lie_in_their_regions() {
        let p = params();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let r = NetworkRealization::sample(&p, &mut rng);
            assert!(r.ris.norm() <= p.los_radius);
            assert!(r
                .bs
                .iter()
                .all(|b| b.norm() >= p.los_radius && b.norm() <= p.sim_radius));
            assert!((r.connected.dist(r.serving_bs()) - p.r_c).abs() < 1e-9);
            let nearest = r.bs.iter().map(|b| b.dist(r.ris)).fold(f64::INFINITY, f64::min);
            assert_eq!(nearest, r.serving_bs().dist(r.ris));
        }
    }

    #[test]
    fn empty_draws_are_resampled() {
        // a window holding ~0.05 BSs on average forces redraws
        let p = SpatialParams {
            lambda_b: 1e-7,
            lambda_u: 1e-7,
            los_radius: 25.0,
            r_c: 50.0,
            sim_radius: 400.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let r = NetworkRealization::sample(&p, &mut rng);
        assert!(!r.bs.is_empty());
        assert!(r.resamples > 0);
    }

    #[test]
    fn densities() {
        assert_eq!(pdf_r_ru(30.0, 25.0), 0.0);
        assert!((pdf_r_ru(12.5, 25.0) - 0.04).abs() < 1e-15);
        assert_eq!(cdf_r_ru(25.0, 25.0), 1.0);
        let lam = 1e-5;
        // density integrates to the CDF
        let n = 20_000;
        let h = 300.0 / n as f64;
        let s: f64 = (0..n).map(|i| pdf_r_br((i as f64 + 0.5) * h, 1, lam) * h).sum();
        assert!((s - cdf_r_br(300.0, lam)).abs() < 1e-8);
        let lam = 1.0 / (300.0 * 300.0 * PI);
        assert!((pdf_r_br(300.0, 1, lam) - 2.0 / 300.0 * (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn theta_cdf_domain() {
        assert_eq!(angle_theta_cdf(0.0).unwrap(), 0.0);
        assert!((angle_theta_cdf(PI / 2.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(angle_theta_cdf(PI).unwrap(), 1.0);
        assert!(angle_theta_cdf(-0.1).is_err());
        assert!(angle_theta_cdf(3.2).is_err());
    }

    #[test]
    fn angle_between_links() {
        let ris = Point::new(0.0, 10.0);
        let a = bs_ris_user_angle(Point::new(10.0, 10.0), ris, Point::ORIGIN);
        assert!((a - PI / 2.0).abs() < 1e-15);
        let b = bs_ris_user_angle(Point::new(0.0, 100.0), ris, Point::ORIGIN);
        assert!((b - PI).abs() < 1e-15);
        assert_eq!(split_angles(1.0, 0.25), (0.25, 0.75));
    }

    #[test]
    fn text_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let r = NetworkRealization::sample(&params(), &mut rng);
        let back = NetworkRealization::from_text(&r.to_text()).unwrap();
        assert_eq!(back, r);
        assert!(NetworkRealization::from_text("ris 1 2\nserving 0\n").is_err());
    }
}
