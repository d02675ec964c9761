//! Spatial profiles of the vessel parameters and of the gravity projection.

use std::path::Path;

use crate::bfe::tube_law::{TubeLaw, WallParams};
use crate::error::{Error, Result};

/// Modulus of the gravitational acceleration, cm/s².
pub const G_MODULUS: f64 = 981.0;

/// Piecewise-linear C⁰ interpolant through strictly increasing samples.
#[derive(Clone, Debug, PartialEq)]
pub struct Polyline {
    xs: Vec<f64>,
    vs: Vec<f64>,
}

impl Polyline {
    pub fn new(xs: Vec<f64>, vs: Vec<f64>) -> Result<Self> {
        if xs.len() != vs.len() || xs.len() < 2 {
            return Err(Error::Config("a polyline needs at least two (x, value) samples".into()));
        }
        if xs.iter().chain(&vs).any(|v| !v.is_finite()) {
            return Err(Error::Config("polyline samples must be finite".into()));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("polyline abscissae must be strictly increasing".into()));
        }
        Ok(Self { xs, vs })
    }

    /// Reads a two-column `x,value` CSV file with a header row.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let (mut xs, mut vs) = (Vec::new(), Vec::new());
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            if record.len() != 2 {
                return Err(Error::Config(format!(
                    "{}: row {} has {} columns, expected 2",
                    path.display(),
                    line + 2,
                    record.len()
                )));
            }
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|_| {
                    Error::Config(format!("{}: row {}: invalid number {s:?}", path.display(), line + 2))
                })
            };
            xs.push(parse(&record[0])?);
            vs.push(parse(&record[1])?);
        }
        Self::new(xs, vs)
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.vs
    }

    fn segment(&self, x: f64) -> usize {
        let k = self.xs.partition_point(|&xk| xk <= x);
        k.clamp(1, self.xs.len() - 1) - 1
    }

    pub fn value(&self, x: f64) -> f64 {
        let k = self.segment(x);
        let (x0, x1) = (self.xs[k], self.xs[k + 1]);
        let t = (x - x0) / (x1 - x0);
        self.vs[k] + t * (self.vs[k + 1] - self.vs[k])
    }

    /// Slope of the segment containing `x` (right-continuous at breakpoints).
    pub fn derivative(&self, x: f64) -> f64 {
        let k = self.segment(x);
        (self.vs[k + 1] - self.vs[k]) / (self.xs[k + 1] - self.xs[k])
    }

    /// Exact `∫_a^b` of the interpolant.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        if b < a {
            return -self.integral(b, a);
        }
        let inner = self.xs.iter().copied().filter(|&x| x > a && x < b);
        let points: Vec<f64> = std::iter::once(a).chain(inner).chain(std::iter::once(b)).collect();
        points
            .windows(2)
            .map(|w| 0.5 * (w[1] - w[0]) * (self.value(w[0]) + self.value(w[1])))
            .sum()
    }

    fn check_covers(&self, length: f64, what: &str) -> Result<()> {
        let tol = 1e-9 * length.max(1.0);
        let (first, last) = (self.xs[0], *self.xs.last().unwrap());
        if (first - 0.0).abs() > tol || (last - length).abs() > tol {
            return Err(Error::Config(format!(
                "{what} samples must span [0, {length}], got [{first}, {last}]"
            )));
        }
        Ok(())
    }
}

/// Relative vertex values of the synthetic 12-segment gravity polyline.
const SYNTHETIC_GRAVITY: [f64; 13] = [
    0.97, 0.62, -0.18, -0.74, -0.95, -0.41, 0.33, 0.88, 0.56, -0.27, -0.83, -0.12, 0.45,
];

/// Synthetic gravity projection with 12 equal segments on `[0, length]`,
/// oscillating within `±|g|`.
pub fn synthetic_gravity_polyline(length: f64) -> Polyline {
    let n = SYNTHETIC_GRAVITY.len() - 1;
    let xs = (0..=n).map(|k| if k == n { length } else { length * k as f64 / n as f64 }).collect();
    let vs = SYNTHETIC_GRAVITY.iter().map(|v| v * G_MODULUS).collect();
    Polyline::new(xs, vs).expect("valid synthetic polyline")
}

/// One scalar vessel parameter as a function of the axial coordinate.
#[derive(Clone, Debug, PartialEq)]
pub enum ParamProfile {
    Constant(f64),
    /// Linear variation from `v0` at `x = 0` to `v1` at `x = length`.
    Linear { v0: f64, v1: f64, length: f64 },
    Samples(Polyline),
}

impl ParamProfile {
    /// Linear taper from 1.1× to 0.9× of `value` over `[0, length]`.
    pub fn taper(value: f64, length: f64) -> Self {
        ParamProfile::Linear { v0: 1.1 * value, v1: 0.9 * value, length }
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            ParamProfile::Constant(v) => *v,
            ParamProfile::Linear { v0, v1, length } => v0 + (v1 - v0) * (x / length),
            ParamProfile::Samples(p) => p.value(x),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            ParamProfile::Constant(_) => 0.0,
            ParamProfile::Linear { v0, v1, length } => (v1 - v0) / length,
            ParamProfile::Samples(p) => p.derivative(x),
        }
    }

    fn validate(&self, name: &str, length: f64, positive: bool) -> Result<()> {
        let ok = |v: f64| v.is_finite() && (!positive || v > 0.0);
        let bad = match self {
            ParamProfile::Constant(v) => !ok(*v),
            ParamProfile::Linear { v0, v1, length: l } => !ok(*v0) || !ok(*v1) || (l - length).abs() > 1e-12 * length,
            ParamProfile::Samples(p) => {
                p.check_covers(length, name)?;
                p.values().iter().any(|&v| !ok(v))
            }
        };
        if bad {
            return Err(Error::Config(format!("invalid profile for {name}: {self:?}")));
        }
        Ok(())
    }
}

/// Projection `g_x(x)` of gravity on the vessel axis, cm/s².
#[derive(Clone, Debug, PartialEq)]
pub enum GravityProfile {
    Constant(f64),
    /// `|g| (e^{−x} − e^{−L})`.
    Smooth { modulus: f64, length: f64 },
    Polyline(Polyline),
}

impl GravityProfile {
    pub fn smooth(length: f64) -> Self {
        GravityProfile::Smooth { modulus: G_MODULUS, length }
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            GravityProfile::Constant(g) => *g,
            GravityProfile::Smooth { modulus, length } => modulus * ((-x).exp() - (-length).exp()),
            GravityProfile::Polyline(p) => p.value(x),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            GravityProfile::Constant(_) => 0.0,
            GravityProfile::Smooth { modulus, .. } => -modulus * (-x).exp(),
            GravityProfile::Polyline(p) => p.derivative(x),
        }
    }

    /// `∫_a^b g_x dx`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        match self {
            GravityProfile::Constant(g) => g * (b - a),
            GravityProfile::Smooth { modulus, length } => {
                modulus * (((-a).exp() - (-b).exp()) - (-length).exp() * (b - a))
            }
            GravityProfile::Polyline(p) => p.integral(a, b),
        }
    }

    fn validate(&self, length: f64) -> Result<()> {
        match self {
            GravityProfile::Constant(g) if g.is_finite() => Ok(()),
            GravityProfile::Smooth { modulus, length: l } if modulus.is_finite() && (l - length).abs() <= 1e-12 * length => Ok(()),
            GravityProfile::Polyline(p) => {
                p.check_covers(length, "gravity")?;
                if p.values().iter().any(|v| v.abs() > G_MODULUS * (1.0 + 1e-12)) {
                    return Err(Error::Config(format!("gravity polyline exceeds |g| = {G_MODULUS}")));
                }
                Ok(())
            }
            other => Err(Error::Config(format!("invalid gravity profile {other:?}"))),
        }
    }
}

/// Physical description of one vessel, CGS units.
#[derive(Clone, Debug, PartialEq)]
pub struct VesselProfile {
    pub length: f64,
    /// Blood density, g/cm³.
    pub rho: f64,
    /// Friction coefficient `R < 0`, cm²/s.
    pub friction: f64,
    /// Relaxation time, s.
    pub epsilon: f64,
    pub tube_law: TubeLaw,
    pub a0: ParamProfile,
    pub h0: ParamProfile,
    pub ee: ParamProfile,
    pub ec: ParamProfile,
    pub pr: ParamProfile,
    pub gravity: GravityProfile,
}

pub const DEFAULT_RHO: f64 = 1.05;
pub const DEFAULT_MU: f64 = 0.04;
pub const DEFAULT_EPSILON: f64 = 1e-4;

/// Poiseuille friction coefficient `−8πμ/ρ`.
pub fn poiseuille_friction(mu: f64, rho: f64) -> f64 {
    profile_friction(mu, rho, 2.0)
}

/// Friction coefficient `−2(γ+2)πμ/ρ` for the axial velocity profile
/// `u(r) ∝ 1 − (r/R)^γ`; `γ = 2` is Poiseuille flow.
pub fn profile_friction(mu: f64, rho: f64, gamma: f64) -> f64 {
    -2.0 * (gamma + 2.0) * std::f64::consts::PI * mu / rho
}

impl VesselProfile {
    pub fn params_at(&self, x: f64) -> WallParams {
        WallParams {
            a0: self.a0.value(x),
            h0: self.h0.value(x),
            ee: self.ee.value(x),
            ec: self.ec.value(x),
            pr: self.pr.value(x),
        }
    }

    /// Axial derivatives of the parameters, in the same layout as [`WallParams`].
    pub fn params_derivative_at(&self, x: f64) -> WallParams {
        WallParams {
            a0: self.a0.derivative(x),
            h0: self.h0.derivative(x),
            ee: self.ee.derivative(x),
            ec: self.ec.derivative(x),
            pr: self.pr.derivative(x),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0) || !self.length.is_finite() {
            return Err(Error::Config(format!("vessel length must be positive, got {}", self.length)));
        }
        if !(self.rho > 0.0) || !(self.epsilon > 0.0) || !(self.friction <= 0.0) {
            return Err(Error::Config(format!(
                "need rho > 0, epsilon > 0 and friction <= 0 (got {}, {}, {})",
                self.rho, self.epsilon, self.friction
            )));
        }
        self.tube_law.validate()?;
        self.a0.validate("a0", self.length, true)?;
        self.h0.validate("h0", self.length, true)?;
        self.ee.validate("ee", self.length, true)?;
        self.ec.validate("ec", self.length, true)?;
        self.pr.validate("pr", self.length, false)?;
        self.gravity.validate(self.length)
    }

    /// Zero-flow hydrostatic pressure `p(x) = p(L) − ρ ∫_x^L g_x`.
    pub fn hydrostatic_pressure(&self, x: f64, outlet_pressure: f64) -> f64 {
        outlet_pressure - self.rho * self.gravity.integral(x, self.length)
    }

    /// Zero-flow hydrostatic area at `x`.
    pub fn hydrostatic_area(&self, x: f64, outlet_pressure: f64) -> Result<f64> {
        let p = self.hydrostatic_pressure(x, outlet_pressure);
        self.tube_law.invert(p, 0.0, &self.params_at(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn friction_examples() {
        let r = poiseuille_friction(0.04, 1.05);
        assert!((r + 8.0 * std::f64::consts::PI * 0.04 / 1.05).abs() < 1e-15);
        assert!((profile_friction(0.04, 1.05, 9.0) / r - 2.75).abs() < 1e-15);
    }

    #[test]
    fn smooth_gravity_examples() {
        let g = GravityProfile::smooth(10.0);
        assert_eq!(g.value(10.0), 0.0);
        let v = g.value(0.0);
        assert!((v - 981.0 * (1.0 - (-10.0_f64).exp())).abs() < 1e-12);
        assert!((v - 980.955).abs() < 1e-3);
    }

    #[test]
    fn polyline_examples() {
        let p = Polyline::new(vec![0.0, 5.0, 10.0], vec![981.0, -981.0, 981.0]).unwrap();
        assert_eq!(p.value(2.5), 0.0);
        assert_eq!(p.value(0.0), 981.0);
        assert_eq!(p.value(10.0), 981.0);
        assert_eq!(p.derivative(2.5), -392.4);
        assert_eq!(p.derivative(7.0), 392.4);
        assert!(p.integral(0.0, 10.0).abs() < 1e-12);
        assert!((p.integral(0.0, 2.5) - 0.5 * 2.5 * 981.0).abs() < 1e-12);
        assert!((p.integral(1.0, 7.0) + p.integral(7.0, 1.0)).abs() < 1e-12);
    }

    #[test]
    fn polyline_rejects_non_monotone() {
        assert!(matches!(Polyline::new(vec![0.0, 2.0, 1.0], vec![0.0; 3]), Err(Error::Config(_))));
        assert!(matches!(Polyline::new(vec![0.0], vec![0.0]), Err(Error::Config(_))));
    }

    #[test]
    fn gravity_polyline_must_cover_domain_and_bound() {
        let short = Polyline::new(vec![0.0, 5.0], vec![0.0, 0.0]).unwrap();
        assert!(GravityProfile::Polyline(short).validate(10.0).is_err());
        let strong = Polyline::new(vec![0.0, 10.0], vec![0.0, 2000.0]).unwrap();
        assert!(GravityProfile::Polyline(strong).validate(10.0).is_err());
        let ok = Polyline::new(vec![0.0, 10.0], vec![-981.0, 981.0]).unwrap();
        assert!(GravityProfile::Polyline(ok).validate(10.0).is_ok());
    }

    #[test]
    fn integrals_match_quadrature() {
        let poly = Polyline::new(vec![0.0, 1.0, 4.0, 10.0], vec![100.0, -50.0, 900.0, 0.0]).unwrap();
        for g in [GravityProfile::Constant(981.0), GravityProfile::smooth(10.0), GravityProfile::Polyline(poly)] {
            let (a, b) = (0.3, 8.9);
            let n = 200_000;
            let h = (b - a) / n as f64;
            let mid: f64 = (0..n).map(|k| g.value(a + (k as f64 + 0.5) * h)).sum::<f64>() * h;
            assert!((g.integral(a, b) - mid).abs() < 1e-5 * (1.0 + mid.abs()), "{g:?}");
        }
    }

    #[test]
    fn taper_endpoints() {
        let p = ParamProfile::taper(2.0, 10.0);
        assert!((p.value(0.0) - 2.2).abs() < 1e-15);
        assert!((p.value(10.0) - 1.8).abs() < 1e-15);
        assert!((p.derivative(3.0) + 0.04).abs() < 1e-15);
    }

    #[test]
    fn csv_round_trip() {
        let dir = std::env::temp_dir().join(format!("wbpc-profile-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("g.csv");
        std::fs::write(&path, "x,value\n0,1.5\n2.5,-3\n10,0\n").unwrap();
        let p = Polyline::from_csv(&path).unwrap();
        assert_eq!(p.xs(), &[0.0, 2.5, 10.0]);
        assert_eq!(p.values(), &[1.5, -3.0, 0.0]);
        std::fs::write(&path, "x,value\n0,abc\n").unwrap();
        assert!(matches!(Polyline::from_csv(&path), Err(Error::Config(_))));
        std::fs::remove_dir_all(&dir).ok();
    }
}
