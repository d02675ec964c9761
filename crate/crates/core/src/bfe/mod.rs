//! Hyperbolized one-dimensional blood-flow equations with gravity, friction
//! and axially varying wall properties.
//!
//! State layout: `[A, q, ψ, A0, h0, Ee, Ec, p_r]` in CGS units.

pub mod profile;
pub mod riemann;
pub mod tube_law;

use crate::error::{Error, Result};
use crate::model::{FluctuationPair, SystemModel};
use crate::state::StateVector;

pub use profile::{synthetic_gravity_polyline, GravityProfile, ParamProfile, Polyline, VesselProfile};
pub use riemann::{two_rarefaction_riemann, RiemannFan};
pub use tube_law::{StrainFunction, TubeLaw, TubeLawEval, WallParams};

pub type BfeState = StateVector<8>;

pub const AREA: usize = 0;
pub const FLOW: usize = 1;
pub const PSI: usize = 2;
pub const A0: usize = 3;
pub const H0: usize = 4;
pub const EE: usize = 5;
pub const EC: usize = 6;
pub const PR: usize = 7;

/// dyn/cm² per mmHg.
pub const MMHG: f64 = 1333.22;
/// dyn/cm² per Pa.
pub const PA: f64 = 10.0;

pub fn wall_params(q: &BfeState) -> WallParams {
    WallParams { a0: q[A0], h0: q[H0], ee: q[EE], ec: q[EC], pr: q[PR] }
}

/// State with the given area, flow and `ψ`, and the wall parameters `w`.
pub fn bfe_state(a: f64, q: f64, psi: f64, w: &WallParams) -> BfeState {
    StateVector([a, q, psi, w.a0, w.h0, w.ee, w.ec, w.pr])
}

#[derive(Clone, Debug, PartialEq)]
pub struct BfeModel {
    pub profile: VesselProfile,
}

impl BfeModel {
    pub fn new(profile: VesselProfile) -> Result<Self> {
        profile.validate()?;
        Ok(Self { profile })
    }

    pub fn tube_law(&self) -> &TubeLaw {
        &self.profile.tube_law
    }

    pub fn rho(&self) -> f64 {
        self.profile.rho
    }

    pub fn pressure(&self, q: &BfeState) -> Result<f64> {
        self.tube_law().pressure(q[AREA], q[PSI], &wall_params(q))
    }

    pub fn sound_speed(&self, q: &BfeState) -> Result<f64> {
        self.tube_law().sound_speed(q[AREA], &wall_params(q), self.rho())
    }

    /// State at `x` with area `a`, flow `flow`, `ψ = 0` and the profile's parameters.
    pub fn state_at(&self, x: f64, a: f64, flow: f64) -> BfeState {
        bfe_state(a, flow, 0.0, &self.profile.params_at(x))
    }

    /// Rest state at `x` with total pressure `p`.
    pub fn state_with_pressure(&self, x: f64, p: f64) -> Result<BfeState> {
        let w = self.profile.params_at(x);
        let a = self.tube_law().invert(p, 0.0, &w)?;
        Ok(bfe_state(a, 0.0, 0.0, &w))
    }

    /// Local flux `(q, q²/A + B(A), −q/ε)` with frozen wall parameters.
    fn local_flux(&self, q: &BfeState) -> [f64; 3] {
        let w = wall_params(q);
        let b = self.tube_law().pressure_integral(q[AREA], &w, self.rho());
        [q[FLOW], q[FLOW] * q[FLOW] / q[AREA] + b, -q[FLOW] / self.profile.epsilon]
    }

    /// `∫ A(Ψ) dΨ` between two states with equal parameters.
    fn frozen_jump(&self, from: &BfeState, to: &BfeState) -> BfeState {
        let (f0, f1) = (self.local_flux(from), self.local_flux(to));
        let mut d = StateVector::ZERO;
        for k in 0..3 {
            d[k] = f1[k] - f0[k];
        }
        let gamma = self.tube_law().gamma;
        if gamma != 0.0 {
            d[FLOW] += gamma * (from[AREA] + to[AREA]) / (2.0 * self.rho()) * (to[PSI] - from[PSI]);
        }
        d
    }
}

/// `dA/dx` of the stationary ODE at `x` for area `a` and constant flow `q`.
pub fn bfe_stationary_rhs(profile: &VesselProfile, x: f64, a: f64, q: f64) -> Result<f64> {
    let w = profile.params_at(x);
    let dw = profile.params_derivative_at(x);
    let e = profile.tube_law.evaluate(a, 0.0, &w)?;
    let rho = profile.rho;
    let c2 = a / rho * e.d_a;
    let u = q / a;
    let den = c2 - u * u;
    if den.abs() <= 1e-12 * c2 {
        return Err(Error::Sonic { x });
    }
    let wall = e.d_a0 * dw.a0 + e.d_h0 * dw.h0 + e.d_ee * dw.ee + e.d_ec * dw.ec + dw.pr;
    let num = profile.friction * q / a + a * profile.gravity.value(x) - a / rho * wall;
    Ok(num / den)
}

impl SystemModel<8> for BfeModel {
    fn name(&self) -> &'static str {
        "bfe"
    }

    fn component_names(&self) -> [&'static str; 8] {
        ["A", "q", "psi", "A0", "h0", "Ee", "Ec", "pr"]
    }

    fn evolved_components(&self) -> &'static [usize] {
        &[AREA, FLOW, PSI]
    }

    fn is_static_component(&self, c: usize) -> bool {
        c >= A0
    }

    fn check_admissible(&self, q: &BfeState) -> Result<()> {
        if !q.is_finite() {
            return Err(Error::Domain(format!("non-finite state {:?}", q.0)));
        }
        for (k, name) in [(AREA, "A"), (A0, "A0"), (H0, "h0"), (EE, "Ee"), (EC, "Ec")] {
            if !(q[k] > 0.0) {
                return Err(Error::Domain(format!("{name} must be positive, got {}", q[k])));
            }
        }
        Ok(())
    }

    fn matrix_action(&self, q: &BfeState, w: &BfeState) -> BfeState {
        let a = q[AREA];
        let u = q[FLOW] / a;
        let rho = self.rho();
        // admissibility is checked at phase boundaries
        let e = self.tube_law().evaluate_unchecked(a, q[PSI], &wall_params(q));
        let c2 = a / rho * e.d_a;
        let mut out = StateVector::ZERO;
        out[AREA] = w[FLOW];
        out[FLOW] = (c2 - u * u) * w[AREA]
            + 2.0 * u * w[FLOW]
            + a / rho
                * (e.d_psi * w[PSI] + e.d_a0 * w[A0] + e.d_h0 * w[H0] + e.d_ee * w[EE] + e.d_ec * w[EC] + w[PR]);
        out[PSI] = -w[FLOW] / self.profile.epsilon;
        out
    }

    fn source(&self, q: &BfeState, x: f64) -> BfeState {
        let mut s = StateVector::ZERO;
        s[FLOW] = self.profile.friction * q[FLOW] / q[AREA] + q[AREA] * self.profile.gravity.value(x);
        s[PSI] = -q[PSI] / self.profile.epsilon;
        s
    }

    fn linear_source_diag(&self) -> BfeState {
        let mut l = StateVector::ZERO;
        l[PSI] = -1.0 / self.profile.epsilon;
        l
    }

    fn eigenvalues(&self, q: &BfeState) -> Result<BfeState> {
        let c = self.sound_speed(q)?;
        let u = q[FLOW] / q[AREA];
        let mut l = StateVector::ZERO;
        l[0] = u - c;
        l[7] = u + c;
        Ok(l)
    }

    fn wave_speed(&self, q: &BfeState) -> Result<f64> {
        Ok((q[FLOW] / q[AREA]).abs() + self.sound_speed(q)?)
    }

    fn stationary_rhs(&self, x: f64, q: &BfeState) -> Result<BfeState> {
        let da = bfe_stationary_rhs(&self.profile, x, q[AREA], q[FLOW])?;
        let dw = self.profile.params_derivative_at(x);
        Ok(StateVector([da, 0.0, 0.0, dw.a0, dw.h0, dw.ee, dw.ec, dw.pr]))
    }

    fn stationary_node(&self, x: f64, q: BfeState) -> BfeState {
        bfe_state(q[AREA], q[FLOW], 0.0, &self.profile.params_at(x))
    }

    fn stationary_anchor(&self, x: f64, mean: &BfeState, value: f64) -> BfeState {
        bfe_state(value, mean[FLOW], 0.0, &self.profile.params_at(x))
    }

    fn fluctuations(&self, left: &BfeState, right: &BfeState) -> Result<FluctuationPair<8>> {
        if left == right {
            return Ok(FluctuationPair::zero(*left, *right));
        }
        let fan = two_rarefaction_riemann(self.tube_law(), self.rho(), self.profile.epsilon, left, right)?;
        Ok(FluctuationPair {
            minus: self.frozen_jump(left, &fan.star_left),
            plus: self.frozen_jump(&fan.star_right, right),
            star_left: fan.star_left,
            star_right: fan.star_right,
        })
    }

    fn reflect(&self, q: &BfeState) -> BfeState {
        let mut r = *q;
        r[FLOW] = -r[FLOW];
        r
    }

    /// Area from the target pressure; velocity from the outgoing invariant
    /// linearised at the interior state, so that the boundary Riemann problem
    /// returns the ghost itself.
    fn pressure_ghost(&self, interior: &BfeState, pressure: f64) -> Result<BfeState> {
        let w = wall_params(interior);
        let a = self.tube_law().invert(pressure, interior[PSI], &w)?;
        let (ai, ui) = (interior[AREA], interior[FLOW] / interior[AREA]);
        let c = self.sound_speed(interior)?;
        let mut g = *interior;
        g[AREA] = a;
        g[FLOW] = a * (ui + c * (1.0 - a / ai));
        Ok(g)
    }
}
