//! Two-term elastic pressure–area relation
//!
//! `ζ(A, ψ) = Ke φe(A/A0) + Kc φc(A/A0) + Γ ψ`, `p = p_r + ζ`,
//!
//! with Laplace-law stiffness `K = √π h0 E / ((1 − ν²) √A0)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Strain function `φ(r)` of the area ratio `r = A/A0`, with `φ(1) = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "exponent", rename_all = "lowercase")]
pub enum StrainFunction {
    /// `r^m − 1`.
    Power(f64),
    /// `max(r − 1, 0)^m`: fibres recruited only under distension. Needs `m ≥ 2`
    /// for a C¹ pressure.
    Recruit(f64),
}

/// `x^m` with cheap paths for integer and half-integer exponents.
fn pow(x: f64, m: f64) -> f64 {
    let k = (2.0 * m) as i32;
    if k as f64 == 2.0 * m && k.abs() <= 32 {
        if k % 2 == 0 {
            x.powi(k / 2)
        } else {
            x.sqrt() * x.powi((k - 1) / 2)
        }
    } else {
        x.powf(m)
    }
}

impl StrainFunction {
    pub fn value(self, r: f64) -> f64 {
        match self {
            StrainFunction::Power(m) => pow(r, m) - 1.0,
            StrainFunction::Recruit(m) => {
                let s = r - 1.0;
                if s > 0.0 {
                    pow(s, m)
                } else {
                    0.0
                }
            }
        }
    }

    pub fn derivative(self, r: f64) -> f64 {
        match self {
            StrainFunction::Power(m) => m * pow(r, m - 1.0),
            StrainFunction::Recruit(m) => {
                let s = r - 1.0;
                if s > 0.0 {
                    m * pow(s, m - 1.0)
                } else {
                    0.0
                }
            }
        }
    }

    /// `(φ(r), φ'(r))` sharing one power evaluation.
    pub fn value_and_derivative(self, r: f64) -> (f64, f64) {
        match self {
            StrainFunction::Power(m) => {
                let p = pow(r, m - 1.0);
                (p * r - 1.0, m * p)
            }
            StrainFunction::Recruit(m) => {
                let s = r - 1.0;
                if s > 0.0 {
                    let p = pow(s, m - 1.0);
                    (p * s, m * p)
                } else {
                    (0.0, 0.0)
                }
            }
        }
    }

    /// Antiderivative of `r φ'(r)`, used by the pressure integral.
    pub fn moment(self, r: f64) -> f64 {
        match self {
            StrainFunction::Power(m) => m * pow(r, m + 1.0) / (m + 1.0),
            StrainFunction::Recruit(m) => {
                let s = r - 1.0;
                if s > 0.0 {
                    pow(s, m) + m * pow(s, m + 1.0) / (m + 1.0)
                } else {
                    0.0
                }
            }
        }
    }

    fn validate(self) -> Result<()> {
        match self {
            StrainFunction::Power(m) if m > 0.0 && m.is_finite() => Ok(()),
            StrainFunction::Recruit(m) if m >= 2.0 && m.is_finite() => Ok(()),
            other => Err(Error::Config(format!("invalid strain function {other:?}"))),
        }
    }
}

/// Wall parameters at one point of the vessel, CGS units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WallParams {
    pub a0: f64,
    pub h0: f64,
    pub ee: f64,
    pub ec: f64,
    pub pr: f64,
}

/// Pressure and its partial derivatives at one state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TubeLawEval {
    /// Transmural part `ζ`.
    pub zeta: f64,
    /// Total pressure `p_r + ζ`.
    pub pressure: f64,
    pub d_a: f64,
    pub d_psi: f64,
    pub d_a0: f64,
    pub d_h0: f64,
    pub d_ee: f64,
    pub d_ec: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TubeLaw {
    pub elastin: StrainFunction,
    pub collagen: StrainFunction,
    /// Viscoelastic coefficient multiplying `ψ`.
    pub gamma: f64,
    /// Wall Poisson ratio.
    pub poisson: f64,
}

impl Default for TubeLaw {
    fn default() -> Self {
        Self::power()
    }
}

impl TubeLaw {
    /// Power law with exponents ½ (elastin) and 3 (collagen).
    pub fn power() -> Self {
        Self {
            elastin: StrainFunction::Power(0.5),
            collagen: StrainFunction::Power(3.0),
            gamma: 0.0,
            poisson: 0.5,
        }
    }

    /// Elastin power law ½ with collagen recruited beyond the reference area.
    pub fn recruitment() -> Self {
        Self {
            collagen: StrainFunction::Recruit(3.0),
            ..Self::power()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.elastin.validate()?;
        self.collagen.validate()?;
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(Error::Config(format!("gamma must be >= 0, got {}", self.gamma)));
        }
        if !(self.poisson >= 0.0 && self.poisson < 1.0) {
            return Err(Error::Config(format!("poisson ratio must lie in [0, 1), got {}", self.poisson)));
        }
        Ok(())
    }

    pub fn stiffness(&self, h0: f64, e: f64, a0: f64) -> f64 {
        std::f64::consts::PI.sqrt() * h0 * e / ((1.0 - self.poisson * self.poisson) * a0.sqrt())
    }

    pub fn evaluate(&self, a: f64, psi: f64, w: &WallParams) -> Result<TubeLawEval> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::Domain(format!("tube law needs A > 0, got {a}")));
        }
        Ok(self.evaluate_unchecked(a, psi, w))
    }

    /// [`TubeLaw::evaluate`] without the positivity check.
    pub(crate) fn evaluate_unchecked(&self, a: f64, psi: f64, w: &WallParams) -> TubeLawEval {
        let r = a / w.a0;
        let base = std::f64::consts::PI.sqrt() * w.h0 / ((1.0 - self.poisson * self.poisson) * w.a0.sqrt());
        let (ke, kc) = (base * w.ee, base * w.ec);
        let (fe, dfe) = self.elastin.value_and_derivative(r);
        let (fc, dfc) = self.collagen.value_and_derivative(r);
        let zeta = ke * fe + kc * fc + self.gamma * psi;
        let elastic = ke * fe + kc * fc;
        TubeLawEval {
            zeta,
            pressure: w.pr + zeta,
            d_a: (ke * dfe + kc * dfc) / w.a0,
            d_psi: self.gamma,
            d_a0: -elastic / (2.0 * w.a0) - (ke * dfe + kc * dfc) * r / w.a0,
            d_h0: elastic / w.h0,
            d_ee: ke * fe / w.ee,
            d_ec: kc * fc / w.ec,
        }
    }

    pub fn pressure(&self, a: f64, psi: f64, w: &WallParams) -> Result<f64> {
        Ok(self.evaluate(a, psi, w)?.pressure)
    }

    /// Sound speed `c = √((A/ρ) ∂ζ/∂A)`.
    pub fn sound_speed(&self, a: f64, w: &WallParams, rho: f64) -> Result<f64> {
        let e = self.evaluate(a, 0.0, w)?;
        Ok((a / rho * e.d_a).sqrt())
    }

    /// `B(A) = ∫ (a/ρ) ∂ζ/∂A da`, so that `B'(A) = c²` (up to a constant).
    pub fn pressure_integral(&self, a: f64, w: &WallParams, rho: f64) -> f64 {
        let r = a / w.a0;
        let ke = self.stiffness(w.h0, w.ee, w.a0);
        let kc = self.stiffness(w.h0, w.ec, w.a0);
        w.a0 / rho * (ke * self.elastin.moment(r) + kc * self.collagen.moment(r))
    }

    /// Area with total pressure `p` at the given `ψ`, by safeguarded Newton.
    pub fn invert(&self, p: f64, psi: f64, w: &WallParams) -> Result<f64> {
        let f = |a: f64| -> Result<(f64, f64)> {
            let e = self.evaluate(a, psi, w)?;
            Ok((e.pressure - p, e.d_a))
        };
        let (mut lo, mut hi) = (w.a0, w.a0);
        while f(lo)?.0 > 0.0 {
            lo *= 0.5;
            if lo < 1e-12 * w.a0 {
                return Err(Error::Domain(format!("pressure {p} is below the collapse range")));
            }
        }
        while f(hi)?.0 < 0.0 {
            hi *= 2.0;
            if hi > 1e6 * w.a0 {
                return Err(Error::Domain(format!("pressure {p} is above the distension range")));
            }
        }
        let scale = p.abs().max(w.pr.abs()).max(1.0);
        let mut a = 0.5 * (lo + hi);
        for _ in 0..200 {
            let (g, dg) = f(a)?;
            if g == 0.0 {
                return Ok(a);
            }
            if g > 0.0 {
                hi = a;
            } else {
                lo = a;
            }
            let mut next = a - g / dg;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let converged = (next - a).abs() <= 4.0 * f64::EPSILON * a || hi - lo <= 4.0 * f64::EPSILON * a;
            a = next;
            if converged && f(a)?.0.abs() <= 1e-12 * scale {
                return Ok(a);
            }
        }
        let r = f(a)?.0;
        if r.abs() <= 1e-10 * scale {
            Ok(a)
        } else {
            Err(Error::Newton { iterations: 200, last: a, residual: r })
        }
    }
}
