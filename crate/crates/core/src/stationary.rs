//! Identification of the local stationary solution of each cell.
//!
//! The stationary ODE `dQ/dx = f̃(x, Q)` is marched across the cell nodes by
//! the explicit Runge–Kutta rule of the scheme's order, and the free anchor
//! component at the left node is adjusted by a scalar Newton iteration until
//! the quadrature average of the nodal values matches the cell average.

use crate::error::Result;
use crate::grid::Grid;
use crate::model::SystemModel;
use crate::quadrature::{Order, MAX_P};
use crate::state::StateVector;

const MAX_NEWTON: usize = 25;
const NEWTON_TOL: f64 = 1e-12;
const FD_STEP: f64 = 1e-7;

/// One explicit RK step of `dQ/dx = f̃(x, Q)` from `x0`: Heun for second order,
/// Kutta's third-order rule for third order.
pub fn rk_march<M, const V: usize>(
    model: &M,
    x0: f64,
    q0: &StateVector<V>,
    h: f64,
    order: Order,
) -> Result<StateVector<V>>
where
    M: SystemModel<V> + ?Sized,
{
    let k1 = model.stationary_rhs(x0, q0)?;
    match order {
        Order::Second => {
            let k2 = model.stationary_rhs(x0 + h, &(*q0 + k1 * h))?;
            Ok(*q0 + (k1 + k2) * (0.5 * h))
        }
        Order::Third => {
            let k2 = model.stationary_rhs(x0 + 0.5 * h, &(*q0 + k1 * (0.5 * h)))?;
            let k3 = model.stationary_rhs(x0 + h, &(*q0 + (k2 * 2.0 - k1) * h))?;
            Ok(*q0 + (k1 + k2 * 4.0 + k3) * (h / 6.0))
        }
    }
}

/// Nodal values of cell `i` marched from the anchor state at its left node.
pub fn march_cell<M, const V: usize>(
    model: &M,
    grid: &Grid,
    order: Order,
    i: usize,
    anchor: StateVector<V>,
) -> Result<[StateVector<V>; MAX_P]>
where
    M: SystemModel<V> + ?Sized,
{
    let h = grid.node_spacing(order);
    let mut nodes = [StateVector::ZERO; MAX_P];
    nodes[0] = model.stationary_node(grid.node(order, i, 0), anchor);
    for p in 1..order.p() {
        let x0 = grid.node(order, i, p - 1);
        let next = rk_march(model, x0, &nodes[p - 1], h, order)?;
        nodes[p] = model.stationary_node(grid.node(order, i, p), next);
    }
    Ok(nodes)
}

/// Local stationary solution of one cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StationaryProfile<const V: usize> {
    /// Values at the `P` spatial nodes (unused trailing entries are zero).
    pub nodes: [StateVector<V>; MAX_P],
    /// Converged value of the anchor component at the left node.
    pub anchor: f64,
    pub iterations: usize,
    /// Set when Newton failed and the profile fell back to the cell average.
    pub fallback: bool,
}

impl<const V: usize> StationaryProfile<V> {
    /// Profile identically equal to `q`.
    pub fn constant(q: StateVector<V>, anchor_component: usize) -> Self {
        Self {
            nodes: [q; MAX_P],
            anchor: q[anchor_component],
            iterations: 0,
            fallback: false,
        }
    }

    pub fn zero() -> Self {
        Self {
            nodes: [StateVector::ZERO; MAX_P],
            anchor: 0.0,
            iterations: 0,
            fallback: false,
        }
    }
}

/// Solves for the stationary profile of cell `i` whose quadrature average
/// matches `mean` in the anchor component. `warm` is the previous anchor.
pub fn match_cell_average<M, const V: usize>(
    model: &M,
    grid: &Grid,
    order: Order,
    i: usize,
    mean: &StateVector<V>,
    warm: Option<f64>,
) -> StationaryProfile<V>
where
    M: SystemModel<V> + ?Sized,
{
    let c = model.anchor_component();
    let x0 = grid.node(order, i, 0);
    let target = mean[c];
    let tol = NEWTON_TOL * target.abs();
    let eval = |v: f64| -> Result<([StateVector<V>; MAX_P], f64)> {
        let nodes = march_cell(model, grid, order, i, model.stationary_anchor(x0, mean, v))?;
        let avg = order.average(&nodes[..order.p()]);
        Ok((nodes, avg[c] - target))
    };

    let fallback = |iterations| StationaryProfile {
        nodes: [*mean; MAX_P],
        anchor: target,
        iterations,
        fallback: true,
    };

    let mut v = warm.filter(|w| w.is_finite()).unwrap_or(target);
    let (mut nodes, mut r) = match eval(v) {
        Ok(e) => e,
        Err(_) => return fallback(0),
    };
    let mut converged = r.abs() <= tol;
    let mut iterations = 0;
    while iterations < MAX_NEWTON && r != 0.0 {
        let dv = FD_STEP * v.abs().max(target.abs()).max(f64::MIN_POSITIVE);
        let slope = match eval(v + dv) {
            Ok((_, rp)) => (rp - r) / dv,
            Err(_) => break,
        };
        if !(slope.is_finite() && slope != 0.0) {
            break;
        }
        let next = v - r / slope;
        let Ok((next_nodes, next_r)) = eval(next) else { break };
        if !next_r.is_finite() {
            break;
        }
        // once within tolerance, keep polishing only while the residual drops
        if converged && next_r.abs() >= r.abs() {
            break;
        }
        iterations += 1;
        v = next;
        nodes = next_nodes;
        r = next_r;
        converged = converged || r.abs() <= tol;
        if r == 0.0 {
            break;
        }
    }
    if !converged {
        return fallback(iterations);
    }
    StationaryProfile { nodes, anchor: v, iterations, fallback: false }
}

/// Discrete stationary solution on the whole mesh, marched from `start` at
/// `x_a`: nodal values `k = i (P-1) + p`.
pub fn global_march<M, const V: usize>(
    model: &M,
    grid: &Grid,
    order: Order,
    start: StateVector<V>,
) -> Result<Vec<StateVector<V>>>
where
    M: SystemModel<V> + ?Sized,
{
    let sub = order.p() - 1;
    let h = grid.node_spacing(order);
    let mut out = Vec::with_capacity(grid.n * sub + 1);
    out.push(model.stationary_node(grid.x_a, start));
    for i in 0..grid.n {
        for p in 1..order.p() {
            let prev = out[out.len() - 1];
            let next = rk_march(model, grid.node(order, i, p - 1), &prev, h, order)?;
            out.push(model.stationary_node(grid.node(order, i, p), next));
        }
    }
    Ok(out)
}

/// Cell averages of a global nodal profile.
pub fn cell_averages<const V: usize>(order: Order, nodes: &[StateVector<V>]) -> Vec<StateVector<V>> {
    let sub = order.p() - 1;
    (0..(nodes.len() - 1) / sub)
        .map(|i| order.average(&nodes[i * sub..=i * sub + sub]))
        .collect()
}
