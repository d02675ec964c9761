//! Compact reconstruction from the cell average and the interface states of
//! the previous step's Riemann problems.

use crate::model::SystemModel;
use crate::quadrature::{Order, MAX_P};
use crate::state::StateVector;

/// Interface-adjacent states of the last solved Riemann problems.
///
/// Interface `j` sits at `x_a + j Δx`; `minus[j]` is the state on its left
/// (right trace of cell `j − 1`), `plus[j]` the state on its right (left trace
/// of cell `j`).
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryStateCache<const V: usize> {
    pub minus: Vec<StateVector<V>>,
    pub plus: Vec<StateVector<V>>,
}

impl<const V: usize> BoundaryStateCache<V> {
    pub fn new(interfaces: usize) -> Self {
        Self {
            minus: vec![StateVector::ZERO; interfaces],
            plus: vec![StateVector::ZERO; interfaces],
        }
    }

    /// Cache of one-sided limits `(ic(x⁻), ic(x⁺))` at each interface.
    pub fn bootstrap(interfaces: &[f64], mut ic: impl FnMut(f64, Side) -> StateVector<V>) -> Self {
        Self {
            minus: interfaces.iter().map(|&x| ic(x, Side::Left)).collect(),
            plus: interfaces.iter().map(|&x| ic(x, Side::Right)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.minus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.minus.is_empty()
    }

    /// Left and right boundary states of cell `i`.
    pub fn cell_traces(&self, i: usize) -> (StateVector<V>, StateVector<V>) {
        (self.plus[i], self.minus[i + 1])
    }

    /// Checks that every cached state is admissible.
    pub fn check<M: SystemModel<V> + ?Sized>(&self, model: &M) -> crate::Result<()> {
        for q in self.minus.iter().chain(&self.plus) {
            model.check_admissible(q)?;
        }
        Ok(())
    }
}

/// Side of an interface for one-sided limits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Degree-one reconstruction at `{0, Δx}`.
pub fn reconstruct_linear<const V: usize>(
    mean: &StateVector<V>,
    left: &StateVector<V>,
    right: &StateVector<V>,
) -> [StateVector<V>; 2] {
    let half = (*right - *left) * 0.5;
    [*mean - half, *mean + half]
}

/// Coefficients `(a, b, c)` of `a + b ξ + c ξ²`, `ξ ∈ [0, Δx]` measured from
/// the left interface.
pub fn quadratic_coefficients<const V: usize>(
    mean: &StateVector<V>,
    left: &StateVector<V>,
    right: &StateVector<V>,
    dx: f64,
) -> [StateVector<V>; 3] {
    let a = *left;
    let b = (*left * -2.0 - *right + *mean * 3.0) * (2.0 / dx);
    let c = (*left + *right - *mean * 2.0) * (3.0 / (dx * dx));
    [a, b, c]
}

/// Degree-two reconstruction at `{0, Δx/2, Δx}`.
///
/// The nodal values are evaluated in closed form, `(L, 3Q̄/2 − (L + R)/4, R)`,
/// which keeps the end values bitwise equal to the interface states.
pub fn reconstruct_quadratic<const V: usize>(
    mean: &StateVector<V>,
    left: &StateVector<V>,
    right: &StateVector<V>,
) -> [StateVector<V>; 3] {
    let mid = *mean * 1.5 - (*left + *right) * 0.25;
    [*left, mid, *right]
}

/// Reconstruction of the scheme's order at its spatial nodes.
pub fn reconstruct<const V: usize>(
    order: Order,
    mean: &StateVector<V>,
    left: &StateVector<V>,
    right: &StateVector<V>,
) -> [StateVector<V>; MAX_P] {
    let mut out = [StateVector::ZERO; MAX_P];
    match order {
        Order::Second => out[..2].copy_from_slice(&reconstruct_linear(mean, left, right)),
        Order::Third => out.copy_from_slice(&reconstruct_quadratic(mean, left, right)),
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bfe::tests::tapered_profile;
    use crate::bfe::{BfeModel, GravityProfile, TubeLaw, MMHG};
    use crate::burgers::Burgers;
    use crate::grid::Grid;
    use crate::stationary::{cell_averages, global_march};
    use proptest::prelude::*;

    fn s(v: f64) -> StateVector<1> {
        StateVector([v])
    }

    #[test]
    fn linear_examples() {
        assert_eq!(reconstruct_linear(&s(5.0), &s(2.0), &s(2.0)), [s(5.0), s(5.0)]);
        assert_eq!(reconstruct_linear(&s(0.5), &s(0.0), &s(1.0)), [s(0.0), s(1.0)]);
    }

    #[test]
    fn linear_on_exp_trapezoid_average() {
        let (l, r) = (0.3_f64.exp(), 0.4_f64.exp());
        let mean = 0.5 * (l + r);
        let w = reconstruct_linear(&s(mean), &s(l), &s(r));
        assert!((w[0][0] - l).abs() <= 1e-15 && (w[1][0] - r).abs() <= 1e-15);
    }

    #[test]
    fn quadratic_examples() {
        assert_eq!(reconstruct_quadratic(&s(2.0), &s(2.0), &s(2.0)), [s(2.0); 3]);
        assert_eq!(reconstruct_quadratic(&s(0.5), &s(0.0), &s(1.0)), [s(0.0), s(0.5), s(1.0)]);
        let w = reconstruct_quadratic(&s(1.0 / 3.0), &s(0.0), &s(1.0));
        assert!((w[1][0] - 0.25).abs() < 1e-15);
    }

    /// Unique quadratic with the given end values and exact mean on [0, dx].
    fn fit_oracle(l: f64, r: f64, mean: f64, dx: f64, x: f64) -> f64 {
        // p(ξ) = l + βξ + γξ²:  l + β dx + γ dx² = r,  l + β dx/2 + γ dx²/3 = mean
        let (a11, a12, b1) = (dx, dx * dx, r - l);
        let (a21, a22, b2) = (dx / 2.0, dx * dx / 3.0, mean - l);
        let det = a11 * a22 - a12 * a21;
        let beta = (b1 * a22 - a12 * b2) / det;
        let gamma = (a11 * b2 - a21 * b1) / det;
        l + beta * x + gamma * x * x
    }

    proptest! {
        #[test]
        fn coefficients_match_fit_oracle(l in -5.0f64..5.0, r in -5.0f64..5.0, m in -5.0f64..5.0, dx in 0.01f64..2.0) {
            let [a, b, c] = quadratic_coefficients(&s(m), &s(l), &s(r), dx);
            let w = reconstruct_quadratic(&s(m), &s(l), &s(r));
            for (k, x) in [0.0, 0.5 * dx, dx].into_iter().enumerate() {
                let poly = a[0] + b[0] * x + c[0] * x * x;
                let oracle = fit_oracle(l, r, m, dx, x);
                let scale = 1.0 + l.abs() + r.abs() + m.abs();
                prop_assert!((poly - oracle).abs() <= 1e-11 * scale);
                prop_assert!((w[k][0] - oracle).abs() <= 1e-11 * scale);
            }
        }

        #[test]
        fn conservation(m in proptest::array::uniform8(-1e3f64..1e3), l in proptest::array::uniform8(-1e3f64..1e3),
                        r in proptest::array::uniform8(-1e3f64..1e3)) {
            let (m, l, r) = (StateVector(m), StateVector(l), StateVector(r));
            for order in [Order::Second, Order::Third] {
                let w = reconstruct(order, &m, &l, &r);
                let avg = order.average(&w[..order.p()]);
                let scale = m.max_abs() + l.max_abs() + r.max_abs();
                prop_assert!((avg - m).max_abs() <= 1e-13 * scale.max(1.0));
            }
        }

        #[test]
        fn degree_exactness(c0 in -3.0f64..3.0, c1 in -3.0f64..3.0, c2 in -3.0f64..3.0, x0 in -2.0f64..2.0, dx in 0.01f64..1.0) {
            let lin = |x: f64| c0 + c1 * x;
            let w = reconstruct_linear(&s(0.5 * (lin(x0) + lin(x0 + dx))), &s(lin(x0)), &s(lin(x0 + dx)));
            prop_assert!((w[0][0] - lin(x0)).abs() <= 1e-13 && (w[1][0] - lin(x0 + dx)).abs() <= 1e-13);

            let quad = |x: f64| c0 + c1 * x + c2 * x * x;
            // exact mean of the quadratic over the cell
            let prim = |x: f64| c0 * x + c1 * x * x / 2.0 + c2 * x * x * x / 3.0;
            let mean = (prim(x0 + dx) - prim(x0)) / dx;
            let w = reconstruct_quadratic(&s(mean), &s(quad(x0)), &s(quad(x0 + dx)));
            prop_assert!((w[1][0] - quad(x0 + 0.5 * dx)).abs() <= 1e-11 * (1.0 + quad(x0 + 0.5 * dx).abs()) / dx.min(1.0));
        }
    }

    #[test]
    fn well_balanced_on_discrete_stationary_profiles() {
        let g = Grid::new(-1.0, 1.0, 12).unwrap();
        for order in [Order::Second, Order::Third] {
            let nodes = global_march(&Burgers, &g, order, StateVector([0.37])).unwrap();
            check_profile(order, &nodes);
        }
        let m = BfeModel::new(tapered_profile(GravityProfile::smooth(10.0), TubeLaw::recruitment())).unwrap();
        let g = Grid::new(0.0, 10.0, 8).unwrap();
        for order in [Order::Second, Order::Third] {
            let start = m.state_with_pressure(0.0, 62.0 * MMHG).unwrap();
            let nodes = global_march(&m, &g, order, start).unwrap();
            check_profile(order, &nodes);
        }
    }

    fn check_profile<const V: usize>(order: Order, nodes: &[StateVector<V>]) {
        let sub = order.p() - 1;
        let means = cell_averages(order, nodes);
        for (i, mean) in means.iter().enumerate() {
            let w = reconstruct(order, mean, &nodes[i * sub], &nodes[i * sub + sub]);
            for p in 0..order.p() {
                let want = nodes[i * sub + p];
                for k in 0..V {
                    assert!((w[p][k] - want[k]).abs() <= 1e-13 * want[k].abs().max(1e-300), "cell {i} node {p} comp {k}");
                }
            }
        }
    }

    #[test]
    fn bootstrap_examples() {
        let ic = |x: f64| x.exp() + 0.3 * (-200.0 * (x + 0.5) * (x + 0.5)).exp();
        let cache = BoundaryStateCache::bootstrap(&[-1.0, -0.5, 0.0], |x, _| StateVector([ic(x)]));
        assert!((cache.minus[1][0] - 0.906_531).abs() < 1e-6);
        assert_eq!(cache.minus[1], cache.plus[1]);
        let cache = BoundaryStateCache::bootstrap(&[0.0, 1.0], |_, _| StateVector([4.0]));
        assert!(cache.minus.iter().chain(&cache.plus).all(|q| q[0] == 4.0));
    }
}
