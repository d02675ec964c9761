//! Path-conservative explicit update: interface fluctuations, space-time
//! volume terms and time-step control.

use crate::error::{Error, Result};
use crate::model::{FluctuationPair, SystemModel};
use crate::predictor::{SpaceTimePolynomial, MAX_NODES};
use crate::quadrature::{Order, MAX_P};
use crate::state::StateVector;

/// Fluctuations of the Riemann problem at interface `x`.
pub fn interface_fluctuations<M: SystemModel<V> + ?Sized, const V: usize>(
    model: &M,
    left: &StateVector<V>,
    right: &StateVector<V>,
    x: f64,
) -> Result<FluctuationPair<V>> {
    model.fluctuations(left, right).map_err(|e| e.at(x))
}

/// Time-averaged fluctuations of one interface plus its `τ = 1` star states.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratedFluctuations<const V: usize> {
    /// `D̄⁻`, applied to the cell on the left.
    pub minus: StateVector<V>,
    /// `D̄⁺`, applied to the cell on the right.
    pub plus: StateVector<V>,
    pub star_left: StateVector<V>,
    pub star_right: StateVector<V>,
}

/// Right trace `Q̂(Δx, τ_b)` of a prediction at each temporal node.
pub fn right_trace<const V: usize>(poly: &SpaceTimePolynomial<V>) -> [StateVector<V>; MAX_P] {
    let p = poly.order.p();
    std::array::from_fn(|b| if b < p { poly.node(p - 1, b) } else { StateVector::ZERO })
}

/// Left trace `Q̂(0, τ_b)` of a prediction at each temporal node.
pub fn left_trace<const V: usize>(poly: &SpaceTimePolynomial<V>) -> [StateVector<V>; MAX_P] {
    let p = poly.order.p();
    std::array::from_fn(|b| if b < p { poly.node(0, b) } else { StateVector::ZERO })
}

/// Quadrature in time of the fluctuations between two trace sequences.
pub fn time_integrated_fluctuations<M: SystemModel<V> + ?Sized, const V: usize>(
    model: &M,
    order: Order,
    left: &[StateVector<V>; MAX_P],
    right: &[StateVector<V>; MAX_P],
    x: f64,
) -> Result<IntegratedFluctuations<V>> {
    let p = order.p();
    let mut out = IntegratedFluctuations {
        minus: StateVector::ZERO,
        plus: StateVector::ZERO,
        star_left: StateVector::ZERO,
        star_right: StateVector::ZERO,
    };
    for (b, &w) in order.weights().iter().enumerate() {
        let f = interface_fluctuations(model, &left[b], &right[b], x)?;
        out.minus += f.minus * w;
        out.plus += f.plus * w;
        if b == p - 1 {
            out.star_left = f.star_left;
            out.star_right = f.star_right;
        }
    }
    Ok(out)
}

/// Space-time volume integrals of one cell.
///
/// `b` is integrated (`∫∫ A ∂x Q dx dt`), `s` is averaged.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VolumeTerms<const V: usize> {
    pub b: StateVector<V>,
    pub b_star: StateVector<V>,
    pub s: StateVector<V>,
    pub s_star: StateVector<V>,
}

fn quadrature_terms<M: SystemModel<V> + ?Sized, const V: usize>(
    model: &M,
    order: Order,
    derivative: &[[f64; MAX_P]; MAX_P],
    values: &[StateVector<V>; MAX_NODES],
    time_dependent: bool,
    xs: &[f64; MAX_P],
    dt: f64,
) -> (StateVector<V>, StateVector<V>) {
    let p = order.p();
    let w = order.weights();
    let mut b_sum = StateVector::ZERO;
    let mut s_sum = StateVector::ZERO;
    for (tb, &wb) in w.iter().enumerate() {
        let base = if time_dependent { tb * p } else { 0 };
        for (a, &wa) in w.iter().enumerate() {
            let q = values[base + a];
            let mut dq = StateVector::ZERO;
            for c in 0..p {
                dq += values[base + c] * derivative[a][c];
            }
            b_sum += model.matrix_action(&q, &dq) * (wa * wb);
            s_sum += model.source(&q, xs[a]) * (wa * wb);
        }
    }
    (b_sum * dt, s_sum)
}

/// Volume terms of a prediction; the starred terms are zero when `star` is
/// `None`.
pub fn volume_terms<M: SystemModel<V> + ?Sized, const V: usize>(
    model: &M,
    poly: &SpaceTimePolynomial<V>,
    star: Option<&[StateVector<V>; MAX_P]>,
    derivative: &[[f64; MAX_P]; MAX_P],
    xs: &[f64; MAX_P],
    dt: f64,
) -> VolumeTerms<V> {
    let order = poly.order;
    let (b, s) = quadrature_terms(model, order, derivative, &poly.values, true, xs, dt);
    let (b_star, s_star) = match star {
        Some(qs) => {
            let mut values = [StateVector::ZERO; MAX_NODES];
            values[..MAX_P].copy_from_slice(qs);
            quadrature_terms(model, order, derivative, &values, false, xs, dt)
        }
        None => (StateVector::ZERO, StateVector::ZERO),
    };
    VolumeTerms { b, b_star, s, s_star }
}

/// `Qⁿ⁺¹ = Qⁿ − (B − B*)/Δx − Δt/Δx (D̄⁻_{i+½} + D̄⁺_{i−½}) + Δt (S − S*)`.
#[allow(clippy::too_many_arguments)]
pub fn update_cell<M: SystemModel<V> + ?Sized, const V: usize>(
    model: &M,
    q: &StateVector<V>,
    vol: &VolumeTerms<V>,
    minus_right: &StateVector<V>,
    plus_left: &StateVector<V>,
    dx: f64,
    dt: f64,
    cell: usize,
) -> Result<StateVector<V>> {
    let mut next = *q;
    for c in 0..V {
        if model.is_static_component(c) {
            continue;
        }
        next[c] = q[c] - (vol.b[c] - vol.b_star[c]) / dx - dt / dx * (minus_right[c] + plus_left[c])
            + dt * (vol.s[c] - vol.s_star[c]);
    }
    model
        .check_admissible(&next)
        .map_err(|e| Error::Step { cell, reason: e.to_string() })?;
    Ok(next)
}

/// `Δt = CFL Δx / ν`, clipped to `remaining`; `dt_max` when `ν = 0`.
pub fn compute_dt(nu: f64, dx: f64, cfl: f64, remaining: f64, dt_max: f64) -> f64 {
    let dt = if nu > 0.0 { cfl * dx / nu } else { dt_max };
    dt.min(remaining)
}
