//! Scalar linear advection with linear decay, `∂t q + a ∂x q = κ q`.
//!
//! Used to verify the predictor and the time quadrature against closed-form
//! solutions.

use crate::error::{Error, Result};
use crate::model::{FluctuationPair, SystemModel};
use crate::state::StateVector;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearAdvection {
    pub speed: f64,
    pub rate: f64,
}

impl LinearAdvection {
    pub fn new(speed: f64, rate: f64) -> Self {
        Self { speed, rate }
    }
}

impl SystemModel<1> for LinearAdvection {
    fn name(&self) -> &'static str {
        "linear-advection"
    }

    fn component_names(&self) -> [&'static str; 1] {
        ["q"]
    }

    fn evolved_components(&self) -> &'static [usize] {
        &[0]
    }

    fn check_admissible(&self, q: &StateVector<1>) -> Result<()> {
        if q.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain("non-finite state".into()))
        }
    }

    fn matrix_action(&self, _q: &StateVector<1>, w: &StateVector<1>) -> StateVector<1> {
        *w * self.speed
    }

    fn source(&self, q: &StateVector<1>, _x: f64) -> StateVector<1> {
        *q * self.rate
    }

    fn linear_source_diag(&self) -> StateVector<1> {
        StateVector([self.rate])
    }

    fn eigenvalues(&self, _q: &StateVector<1>) -> Result<StateVector<1>> {
        Ok(StateVector([self.speed]))
    }

    fn stationary_rhs(&self, x: f64, q: &StateVector<1>) -> Result<StateVector<1>> {
        if self.speed == 0.0 {
            return Err(Error::Sonic { x });
        }
        Ok(*q * (self.rate / self.speed))
    }

    fn stationary_anchor(&self, _x: f64, _mean: &StateVector<1>, value: f64) -> StateVector<1> {
        StateVector([value])
    }

    fn fluctuations(&self, left: &StateVector<1>, right: &StateVector<1>) -> Result<FluctuationPair<1>> {
        let jump = *right - *left;
        let upwind = if self.speed >= 0.0 { *left } else { *right };
        Ok(FluctuationPair {
            minus: jump * self.speed.min(0.0),
            plus: jump * self.speed.max(0.0),
            star_left: upwind,
            star_right: upwind,
        })
    }

    fn reflect(&self, q: &StateVector<1>) -> StateVector<1> {
        *q
    }
}
