//! Scalar Burgers equation with the algebraic source `q²`:
//! `∂t q + q ∂x q = q²`.

use crate::error::{Error, Result};
use crate::model::{FluctuationPair, SystemModel};
use crate::state::StateVector;

pub type BurgersState = StateVector<1>;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Burgers;

/// Flux of the conservative form, `q²/2`.
#[inline]
pub fn flux(q: f64) -> f64 {
    0.5 * q * q
}

/// Exact Godunov state at `x/t = 0` of the Riemann problem `(ql, qr)`.
pub fn burgers_riemann(ql: f64, qr: f64) -> f64 {
    if ql > qr {
        // shock
        let s = 0.5 * (ql + qr);
        if s >= 0.0 {
            ql
        } else {
            qr
        }
    } else if ql >= 0.0 {
        ql
    } else if qr <= 0.0 {
        qr
    } else {
        // sonic rarefaction
        0.0
    }
}

/// `dq*/dx` of the stationary family: `q q' = q²` gives `q' = q`.
pub fn burgers_stationary_rhs(_x: f64, q: f64) -> f64 {
    q
}

impl SystemModel<1> for Burgers {
    fn name(&self) -> &'static str {
        "burgers"
    }

    fn component_names(&self) -> [&'static str; 1] {
        ["q"]
    }

    fn evolved_components(&self) -> &'static [usize] {
        &[0]
    }

    fn check_admissible(&self, q: &BurgersState) -> Result<()> {
        if q.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain(format!("non-finite Burgers state {}", q[0])))
        }
    }

    fn matrix_action(&self, q: &BurgersState, w: &BurgersState) -> BurgersState {
        StateVector([q[0] * w[0]])
    }

    fn source(&self, q: &BurgersState, _x: f64) -> BurgersState {
        StateVector([q[0] * q[0]])
    }

    fn eigenvalues(&self, q: &BurgersState) -> Result<BurgersState> {
        Ok(*q)
    }

    fn stationary_rhs(&self, x: f64, q: &BurgersState) -> Result<BurgersState> {
        Ok(StateVector([burgers_stationary_rhs(x, q[0])]))
    }

    fn stationary_anchor(&self, _x: f64, _mean: &BurgersState, value: f64) -> BurgersState {
        StateVector([value])
    }

    fn fluctuations(&self, left: &BurgersState, right: &BurgersState) -> Result<FluctuationPair<1>> {
        let (ql, qr) = (left[0], right[0]);
        if ql == qr {
            return Ok(FluctuationPair::zero(*left, *right));
        }
        let qg = burgers_riemann(ql, qr);
        Ok(FluctuationPair {
            minus: StateVector([flux(qg) - flux(ql)]),
            plus: StateVector([flux(qr) - flux(qg)]),
            star_left: StateVector([qg]),
            star_right: StateVector([qg]),
        })
    }

    fn reflect(&self, q: &BurgersState) -> BurgersState {
        -*q
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{max_wave_speed, quasilinear_residual, segment_path_integral};
    use proptest::prelude::*;

    #[test]
    fn riemann_examples() {
        assert_eq!(burgers_riemann(1.0, 0.0), 1.0);
        assert_eq!(burgers_riemann(0.0, 1.0), 0.0);
        assert_eq!(burgers_riemann(-2.0, -1.0), -1.0);
        assert_eq!(burgers_riemann(-1.0, 2.0), 0.0);
        assert_eq!(burgers_riemann(1.0, -3.0), -3.0);
    }

    #[test]
    fn residual_examples() {
        let m = Burgers;
        let r = quasilinear_residual(&m, &StateVector([2.0]), &StateVector([2.0]), 0.3).unwrap();
        assert_eq!(r[0], 0.0);
        let r = quasilinear_residual(&m, &StateVector([1.0]), &StateVector([0.0]), 0.3).unwrap();
        assert_eq!(r[0], -1.0);
        assert!(quasilinear_residual(&m, &StateVector([f64::NAN]), &StateVector([0.0]), 0.0).is_err());
    }

    #[test]
    fn stationary_rhs_examples() {
        assert_eq!(burgers_stationary_rhs(-0.7, 1.0), 1.0);
        assert_eq!(burgers_stationary_rhs(0.2, 0.0), 0.0);
    }

    #[test]
    fn wave_speed_of_collection() {
        let states = [StateVector([1.0]), StateVector([2.0]), StateVector([0.5])];
        assert_eq!(max_wave_speed(&Burgers, &states).unwrap(), 2.0);
        let empty: [BurgersState; 0] = [];
        assert!(matches!(max_wave_speed(&Burgers, &empty), Err(Error::Usage(_))));
    }

    #[test]
    fn fluctuation_examples() {
        let f = Burgers.fluctuations(&StateVector([1.0]), &StateVector([0.0])).unwrap();
        assert_eq!(f.minus[0], 0.0);
        assert_eq!(f.plus[0], -0.5);
        let f = Burgers.fluctuations(&StateVector([0.7]), &StateVector([0.7])).unwrap();
        assert_eq!((f.minus[0], f.plus[0]), (0.0, 0.0));
    }

    proptest! {
        #[test]
        fn godunov_consistency(q in -1e3f64..1e3) {
            prop_assert_eq!(burgers_riemann(q, q), q);
        }

        #[test]
        fn stationary_family_closure(c in 1e-3f64..1e3, x in -1.0f64..1.0) {
            let q = StateVector([c * x.exp()]);
            let dq = Burgers.stationary_rhs(x, &q).unwrap();
            let r = quasilinear_residual(&Burgers, &q, &dq, x).unwrap();
            prop_assert!(r[0].abs() <= 1e-12 * q[0] * q[0]);
        }

        #[test]
        fn matrix_action_is_linear(q in -10.0f64..10.0, a in -3.0f64..3.0, b in -3.0f64..3.0,
                                   w1 in -5.0f64..5.0, w2 in -5.0f64..5.0) {
            let q = StateVector([q]);
            let lhs = Burgers.matrix_action(&q, &StateVector([a * w1 + b * w2]));
            let rhs = Burgers.matrix_action(&q, &StateVector([w1])) * a
                + Burgers.matrix_action(&q, &StateVector([w2])) * b;
            prop_assert!((lhs[0] - rhs[0]).abs() <= 1e-12 * (1.0 + lhs[0].abs()));
        }

        #[test]
        fn segment_path_matches_flux_difference(ql in -5.0f64..5.0, qr in -5.0f64..5.0) {
            let p = segment_path_integral(&Burgers, &StateVector([ql]), &StateVector([qr]));
            prop_assert!((p[0] - (flux(qr) - flux(ql))).abs() <= 1e-12 * (1.0 + ql * ql + qr * qr));
        }
    }
}
