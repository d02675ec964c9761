//! Local space-time DG predictor acting on deviations from the cell's
//! stationary solution.
//!
//! The prediction lives in the tensor-product Lagrange space on the scheme's
//! nodes, `θ_l(ξ, τ) = φ_a(ξ) φ_b(τ)` with `l = b P + a`. Each fixed-point
//! iterate solves, component by component,
//!
//! `([θ,θ]¹ − ⟨∂τθ,θ⟩ − Δt λ ⟨θ,θ⟩) d = [θ,ψ]⁰ d₀ + ⟨θ,θ⟩ R(d)`
//!
//! where `λ` is the linear (implicit) part of the source and `R` collects the
//! lagged non-conservative and nonlinear source deviations.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::SystemModel;
use crate::quadrature::{Order, GAUSS5_NODES, GAUSS5_WEIGHTS, MAX_P};
use crate::state::StateVector;

pub const MAX_NODES: usize = MAX_P * MAX_P;

/// Lagrange basis on `nodes` evaluated at `x`.
pub fn lagrange(nodes: &[f64], x: f64) -> [f64; MAX_P] {
    let mut out = [0.0; MAX_P];
    for (a, &xa) in nodes.iter().enumerate() {
        let mut v = 1.0;
        for (j, &xj) in nodes.iter().enumerate() {
            if j != a {
                v *= (x - xj) / (xa - xj);
            }
        }
        out[a] = v;
    }
    out
}

/// Derivatives of the Lagrange basis on `nodes` at `x`.
pub fn lagrange_derivative(nodes: &[f64], x: f64) -> [f64; MAX_P] {
    let mut out = [0.0; MAX_P];
    for (a, &xa) in nodes.iter().enumerate() {
        let mut sum = 0.0;
        for (k, &xk) in nodes.iter().enumerate() {
            if k == a {
                continue;
            }
            let mut term = 1.0 / (xa - xk);
            for (j, &xj) in nodes.iter().enumerate() {
                if j != a && j != k {
                    term *= (x - xj) / (xa - xj);
                }
            }
            sum += term;
        }
        out[a] = sum;
    }
    out
}

type Square = [[f64; MAX_NODES]; MAX_NODES];

/// Reference-element matrices; independent of `Δx` and `Δt`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceElement {
    pub order: Order,
    /// 1D mass matrix `∫ φ_a φ_a'`.
    pub mass_1d: [[f64; MAX_P]; MAX_P],
    /// `∫ φ_b' φ_b''` (derivative on the first index).
    pub stiffness_1d: [[f64; MAX_P]; MAX_P],
    /// Nodal derivative `D[a][a'] = φ_a''(ξ_a)`.
    pub derivative: [[f64; MAX_P]; MAX_P],
    /// `[θ_k, θ_l]¹`.
    pub end_mass: Square,
    /// `⟨∂τθ_k, θ_l⟩`.
    pub time_stiffness: Square,
    /// `⟨θ_k, θ_l⟩`.
    pub mass: Square,
    /// `[θ_k, ψ_a']⁰`.
    pub initial: [[f64; MAX_P]; MAX_NODES],
}

impl ReferenceElement {
    pub fn new(order: Order) -> Self {
        let p = order.p();
        let nodes = order.nodes();
        let mut mass_1d = [[0.0; MAX_P]; MAX_P];
        let mut stiffness_1d = [[0.0; MAX_P]; MAX_P];
        for (&s, &w) in GAUSS5_NODES.iter().zip(&GAUSS5_WEIGHTS) {
            let phi = lagrange(nodes, s);
            let dphi = lagrange_derivative(nodes, s);
            for a in 0..p {
                for c in 0..p {
                    mass_1d[a][c] += w * phi[a] * phi[c];
                    stiffness_1d[a][c] += w * dphi[a] * phi[c];
                }
            }
        }
        let mut derivative = [[0.0; MAX_P]; MAX_P];
        for a in 0..p {
            derivative[a] = lagrange_derivative(nodes, nodes[a]);
        }

        let n = p * p;
        let mut end_mass = [[0.0; MAX_NODES]; MAX_NODES];
        let mut time_stiffness = [[0.0; MAX_NODES]; MAX_NODES];
        let mut mass = [[0.0; MAX_NODES]; MAX_NODES];
        let mut initial = [[0.0; MAX_P]; MAX_NODES];
        for k in 0..n {
            let (ak, bk) = (k % p, k / p);
            for l in 0..n {
                let (al, bl) = (l % p, l / p);
                let mx = mass_1d[ak][al];
                end_mass[k][l] = if bk == p - 1 && bl == p - 1 { mx } else { 0.0 };
                time_stiffness[k][l] = mx * stiffness_1d[bk][bl];
                mass[k][l] = mx * mass_1d[bk][bl];
            }
            if bk == 0 {
                initial[k][..p].copy_from_slice(&mass_1d[ak][..p]);
            }
        }
        Self { order, mass_1d, stiffness_1d, derivative, end_mass, time_stiffness, mass, initial }
    }

    pub fn nodes(&self) -> usize {
        self.order.p() * self.order.p()
    }
}

/// Solution operators of one component class (one value of `Δt λ`).
#[derive(Clone, Debug, PartialEq)]
struct ComponentOperator {
    /// `LHS⁻¹ ⟨θ,θ⟩`.
    g: Square,
    /// `LHS⁻¹ [θ,ψ]⁰`.
    h: [[f64; MAX_P]; MAX_NODES],
}

impl ComponentOperator {
    fn new(reference: &ReferenceElement, dt_lambda: f64) -> Result<Self> {
        let n = reference.nodes();
        let p = reference.order.p();
        let lhs = DMatrix::from_fn(n, n, |k, l| {
            reference.end_mass[k][l] - reference.time_stiffness[k][l] - dt_lambda * reference.mass[k][l]
        });
        let inv = lhs
            .try_inverse()
            .ok_or_else(|| Error::Predictor { cell: 0, iterate: 0, reason: "singular predictor matrix".into() })?;
        let mut g = [[0.0; MAX_NODES]; MAX_NODES];
        let mut h = [[0.0; MAX_P]; MAX_NODES];
        for k in 0..n {
            for l in 0..n {
                g[k][l] = (0..n).map(|j| inv[(k, j)] * reference.mass[j][l]).sum();
            }
            for a in 0..p {
                h[k][a] = (0..n).map(|j| inv[(k, j)] * reference.initial[j][a]).sum();
            }
        }
        Ok(Self { g, h })
    }
}

/// Predictor operators for one time step.
#[derive(Clone, Debug)]
pub struct PredictorOperators<const V: usize> {
    pub reference: ReferenceElement,
    pub dt: f64,
    classes: Vec<ComponentOperator>,
    /// Operator class of each component.
    class_of: [usize; V],
    static_components: [bool; V],
}

impl<const V: usize> PredictorOperators<V> {
    pub fn new<M: SystemModel<V> + ?Sized>(model: &M, reference: &ReferenceElement, dt: f64) -> Result<Self> {
        let lambda = model.linear_source_diag();
        let mut keys: Vec<f64> = Vec::new();
        let mut class_of = [0; V];
        for c in 0..V {
            let key = dt * lambda[c];
            class_of[c] = match keys.iter().position(|&k| k.to_bits() == key.to_bits()) {
                Some(idx) => idx,
                None => {
                    keys.push(key);
                    keys.len() - 1
                }
            };
        }
        let classes = keys
            .iter()
            .map(|&k| ComponentOperator::new(reference, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            reference: reference.clone(),
            dt,
            classes,
            class_of,
            static_components: std::array::from_fn(|c| model.is_static_component(c)),
        })
    }
}

/// Nodal space-time prediction of one cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpaceTimePolynomial<const V: usize> {
    pub order: Order,
    /// Predicted states `Q̂_l = Q*_a + d_l`, `l = b P + a`.
    pub values: [StateVector<V>; MAX_NODES],
    /// Stationary values `Q*_a` (zero when well-balancing is off).
    pub star: [StateVector<V>; MAX_P],
}

impl<const V: usize> SpaceTimePolynomial<V> {
    pub fn node(&self, a: usize, b: usize) -> StateVector<V> {
        self.values[b * self.order.p() + a]
    }

    pub fn deviation(&self, l: usize) -> StateVector<V> {
        self.values[l] - self.star[l % self.order.p()]
    }

    /// The `P²` predicted nodal states.
    pub fn nodes(&self) -> &[StateVector<V>] {
        &self.values[..self.order.p() * self.order.p()]
    }

    pub fn max_deviation(&self) -> f64 {
        let n = self.order.p() * self.order.p();
        (0..n).map(|l| self.deviation(l).max_abs()).fold(0.0, f64::max)
    }
}

/// Lagrange evaluation of the prediction at `(ξ, τ) ∈ [0, 1]²`.
pub fn evaluate_prediction<const V: usize>(poly: &SpaceTimePolynomial<V>, xi: f64, tau: f64) -> StateVector<V> {
    let nodes = poly.order.nodes();
    let p = poly.order.p();
    let (px, pt) = (lagrange(nodes, xi), lagrange(nodes, tau));
    let mut out = StateVector::ZERO;
    for b in 0..p {
        for a in 0..p {
            out += poly.values[b * p + a] * (px[a] * pt[b]);
        }
    }
    out
}

/// `A(Q_a) (D Q)_a` along one time level of nodal values.
fn nonconservative<M: SystemModel<V> + ?Sized, const V: usize>(
    model: &M,
    derivative: &[[f64; MAX_P]; MAX_P],
    q: &[StateVector<V>],
) -> [StateVector<V>; MAX_P] {
    let p = q.len();
    let mut out = [StateVector::ZERO; MAX_P];
    for a in 0..p {
        let mut dq = StateVector::ZERO;
        for (c, qc) in q.iter().enumerate() {
            dq += *qc * derivative[a][c];
        }
        out[a] = model.matrix_action(&q[a], &dq);
    }
    out
}

fn nonlinear_source<M: SystemModel<V> + ?Sized, const V: usize>(
    model: &M,
    lambda: &StateVector<V>,
    q: &StateVector<V>,
    x: f64,
) -> StateVector<V> {
    model.source(q, x) - q.zip_with(*lambda, |v, l| v * l)
}

/// Runs exactly `P` fixed-point iterations from the reconstruction `w`.
///
/// `star` is the stationary profile; `None` evolves the plain prediction.
#[allow(clippy::too_many_arguments)]
pub fn predictor_fixed_point<M: SystemModel<V> + ?Sized, const V: usize>(
    model: &M,
    ops: &PredictorOperators<V>,
    w: &[StateVector<V>; MAX_P],
    star: Option<&[StateVector<V>; MAX_P]>,
    xs: &[f64; MAX_P],
    dx: f64,
    cell: usize,
) -> Result<SpaceTimePolynomial<V>> {
    let reference = &ops.reference;
    let order = reference.order;
    let p = order.p();
    let n = p * p;
    let dt = ops.dt;
    let lambda = model.linear_source_diag();
    let qs = star.copied().unwrap_or([StateVector::ZERO; MAX_P]);

    let (a_star, s_star) = match star {
        Some(qs) => {
            let a = nonconservative(model, &reference.derivative, &qs[..p]);
            let s: [StateVector<V>; MAX_P] = std::array::from_fn(|k| {
                if k < p {
                    nonlinear_source(model, &lambda, &qs[k], xs[k])
                } else {
                    StateVector::ZERO
                }
            });
            (a, s)
        }
        None => ([StateVector::ZERO; MAX_P], [StateVector::ZERO; MAX_P]),
    };

    let mut d0 = [StateVector::ZERO; MAX_P];
    for a in 0..p {
        d0[a] = w[a] - qs[a];
    }
    let mut d = [StateVector::ZERO; MAX_NODES];
    for l in 0..n {
        d[l] = d0[l % p];
    }
    let mut qhat = [StateVector::ZERO; MAX_NODES];
    let mut r = [StateVector::ZERO; MAX_NODES];

    for iterate in 0..p {
        for l in 0..n {
            qhat[l] = qs[l % p] + d[l];
        }
        for b in 0..p {
            let level = &qhat[b * p..b * p + p];
            let a_hat = nonconservative(model, &reference.derivative, level);
            for a in 0..p {
                let s_hat = nonlinear_source(model, &lambda, &level[a], xs[a]);
                r[b * p + a] = (a_hat[a] - a_star[a]) * (-dt / dx) + (s_hat - s_star[a]) * dt;
            }
        }
        for c in 0..V {
            if ops.static_components[c] {
                continue;
            }
            let op = &ops.classes[ops.class_of[c]];
            for k in 0..n {
                let mut v = 0.0;
                for a in 0..p {
                    v += op.h[k][a] * d0[a][c];
                }
                for l in 0..n {
                    v += op.g[k][l] * r[l][c];
                }
                d[k][c] = v;
            }
        }
        if cfg!(debug_assertions) {
            for l in 0..n {
                model
                    .check_admissible(&(qs[l % p] + d[l]))
                    .map_err(|e| Error::Predictor { cell, iterate, reason: e.to_string() })?;
            }
        }
    }

    let mut values = [StateVector::ZERO; MAX_NODES];
    for l in 0..n {
        values[l] = qs[l % p] + d[l];
        model
            .check_admissible(&values[l])
            .map_err(|e| Error::Predictor { cell, iterate: p, reason: e.to_string() })?;
    }
    Ok(SpaceTimePolynomial { order, values, star: qs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bfe::tests::tapered_profile;
    use crate::bfe::{BfeModel, GravityProfile, TubeLaw, MMHG};
    use crate::burgers::Burgers;
    use crate::grid::Grid;
    use crate::linear::LinearAdvection;
    use crate::stationary::{cell_averages, global_march, match_cell_average};
    use proptest::prelude::*;

    fn xs(order: Order, x0: f64, dx: f64) -> [f64; MAX_P] {
        let mut out = [0.0; MAX_P];
        for (k, &s) in order.nodes().iter().enumerate() {
            out[k] = x0 + s * dx;
        }
        out
    }

    #[test]
    fn partition_of_unity_and_exact_integrals() {
        for order in [Order::Second, Order::Third] {
            let r = ReferenceElement::new(order);
            let p = order.p();
            for &s in &GAUSS5_NODES {
                let sum: f64 = lagrange(order.nodes(), s).iter().sum();
                assert!((sum - 1.0).abs() < 1e-15);
                let dsum: f64 = lagrange_derivative(order.nodes(), s).iter().sum();
                assert!(dsum.abs() < 1e-13);
            }
            let total: f64 = r.mass.iter().flatten().sum();
            assert!((total - 1.0).abs() < 1e-14);
            let m1: f64 = r.mass_1d.iter().flatten().sum();
            assert!((m1 - 1.0).abs() < 1e-15);
            // ∑_b' ∫ φ_b' φ_b'' = ∫ φ_b' = φ_b(1) − φ_b(0)
            for b in 0..p {
                let row: f64 = r.stiffness_1d[b][..p].iter().sum();
                let expect = if b == p - 1 { 1.0 } else if b == 0 { -1.0 } else { 0.0 };
                assert!((row - expect).abs() < 1e-14);
            }
        }
        let r = ReferenceElement::new(Order::Third);
        assert_eq!(r.derivative[0][..3], [-3.0, 4.0, -1.0]);
        assert_eq!(r.derivative[1][..3], [-1.0, 0.0, 1.0]);
        assert!((r.mass_1d[0][0] - 2.0 / 15.0).abs() < 1e-15);
        assert!((r.mass_1d[1][1] - 8.0 / 15.0).abs() < 1e-15);
    }

    #[test]
    fn evaluation_examples() {
        let mut values = [StateVector::ZERO; MAX_NODES];
        for (l, v) in values.iter_mut().enumerate().take(4) {
            *v = StateVector([[1.0, 2.0, 3.0, 5.0][l]]);
        }
        let poly = SpaceTimePolynomial { order: Order::Second, values, star: [StateVector::ZERO; MAX_P] };
        assert_eq!(evaluate_prediction(&poly, 0.0, 0.0)[0], 1.0);
        assert_eq!(evaluate_prediction(&poly, 1.0, 1.0)[0], 5.0);
        assert!((evaluate_prediction(&poly, 0.5, 0.5)[0] - 11.0 / 4.0).abs() < 1e-15);

        let poly = SpaceTimePolynomial { order: Order::Third, values: [StateVector([2.5]); MAX_NODES], star: [StateVector::ZERO; MAX_P] };
        assert!((evaluate_prediction(&poly, 0.3, 0.8)[0] - 2.5).abs() < 1e-14);
    }

    #[test]
    fn zero_deviation_is_a_fixed_point() {
        let g = Grid::new(-1.0, 1.0, 16).unwrap();
        for order in [Order::Second, Order::Third] {
            let r = ReferenceElement::new(order);
            let ops = PredictorOperators::new(&Burgers, &r, 0.01).unwrap();
            let nodes = global_march(&Burgers, &g, order, StateVector([0.5])).unwrap();
            let sub = order.p() - 1;
            for i in 0..g.n {
                let mut star = [StateVector::ZERO; MAX_P];
                star[..order.p()].copy_from_slice(&nodes[i * sub..=i * sub + sub]);
                let poly = predictor_fixed_point(&Burgers, &ops, &star, Some(&star), &xs(order, g.interface(i), g.dx), g.dx, i).unwrap();
                assert_eq!(poly.max_deviation(), 0.0);
            }
        }
    }

    #[test]
    fn bfe_equilibrium_fixed_point() {
        let m = BfeModel::new(tapered_profile(GravityProfile::smooth(10.0), TubeLaw::recruitment())).unwrap();
        let g = Grid::new(0.0, 10.0, 8).unwrap();
        for order in [Order::Second, Order::Third] {
            let r = ReferenceElement::new(order);
            let ops = PredictorOperators::new(&m, &r, 1e-4).unwrap();
            let nodes = global_march(&m, &g, order, m.state_with_pressure(0.0, 60.0 * MMHG).unwrap()).unwrap();
            let means = cell_averages(order, &nodes);
            let sub = order.p() - 1;
            for i in 0..g.n {
                let prof = match_cell_average(&m, &g, order, i, &means[i], None);
                let mut w = [StateVector::ZERO; MAX_P];
                w[..order.p()].copy_from_slice(&nodes[i * sub..=i * sub + sub]);
                let poly = predictor_fixed_point(&m, &ops, &w, Some(&prof.nodes), &xs(order, g.interface(i), g.dx), g.dx, i).unwrap();
                let scale = means[i].max_abs();
                assert!(poly.max_deviation() <= 1e-13 * scale, "{}", poly.max_deviation());
            }
        }
    }

    #[test]
    fn burgers_constant_data_follows_the_ode() {
        let r = ReferenceElement::new(Order::Third);
        let dt = 0.01;
        let ops = PredictorOperators::new(&Burgers, &r, dt).unwrap();
        let w = [StateVector([1.0]); MAX_P];
        let poly = predictor_fixed_point(&Burgers, &ops, &w, None, &xs(Order::Third, 0.0, 0.1), 0.1, 0).unwrap();
        let exact = 1.0 / (1.0 - dt);
        for a in 0..3 {
            assert!((poly.node(a, 2)[0] - exact).abs() <= 1e-8, "{}", poly.node(a, 2)[0] - exact);
        }
    }

    #[test]
    fn linear_advection_is_exact_for_low_degree_data() {
        let (speed, dx, dt) = (1.3, 0.2, 0.05);
        let model = LinearAdvection::new(speed, 0.0);
        for order in [Order::Second, Order::Third] {
            let r = ReferenceElement::new(order);
            let ops = PredictorOperators::new(&model, &r, dt).unwrap();
            let data = |x: f64| match order {
                Order::Second => 0.4 - 2.0 * x,
                Order::Third => 0.4 - 2.0 * x + 3.0 * x * x,
            };
            let nodes = xs(order, 0.0, dx);
            let w: [StateVector<1>; MAX_P] = std::array::from_fn(|a| StateVector([data(nodes[a])]));
            let poly = predictor_fixed_point(&model, &ops, &w, None, &nodes, dx, 0).unwrap();
            for b in 0..order.p() {
                for a in 0..order.p() {
                    let t = order.nodes()[b] * dt;
                    let exact = data(nodes[a] - speed * t);
                    assert!((poly.node(a, b)[0] - exact).abs() <= 1e-13, "order {order} node ({a},{b})");
                }
            }
        }
    }

    #[test]
    fn prediction_at_initial_time_matches_reconstruction_at_equilibrium() {
        // holds exactly for linear advection and at equilibrium
        let model = LinearAdvection::new(-0.7, 0.0);
        let r = ReferenceElement::new(Order::Third);
        let ops = PredictorOperators::new(&model, &r, 0.03).unwrap();
        let nodes = xs(Order::Third, 0.0, 0.1);
        let w: [StateVector<1>; MAX_P] = std::array::from_fn(|a| StateVector([1.0 + nodes[a] - nodes[a] * nodes[a]]));
        let poly = predictor_fixed_point(&model, &ops, &w, None, &nodes, 0.1, 0).unwrap();
        for a in 0..3 {
            assert!((evaluate_prediction(&poly, Order::Third.nodes()[a], 0.0) - w[a]).max_abs() <= 1e-13);
        }
    }

    #[test]
    fn relaxation_is_implicit() {
        // dψ/dt = −ψ/ε with Δt/ε = 50 stays bounded and decays
        let m = BfeModel::new(tapered_profile(GravityProfile::Constant(0.0), TubeLaw::recruitment())).unwrap();
        let r = ReferenceElement::new(Order::Second);
        let ops = PredictorOperators::new(&m, &r, 50.0 * m.profile.epsilon).unwrap();
        let mut q = m.state_with_pressure(1.0, 60.0 * MMHG).unwrap();
        q[crate::bfe::PSI] = 10.0;
        let w = [q; MAX_P];
        let poly = predictor_fixed_point(&m, &ops, &w, None, &xs(Order::Second, 1.0, 0.5), 0.5, 0).unwrap();
        let end = poly.node(0, 1)[crate::bfe::PSI];
        assert!(end.abs() < 1.0, "ψ(τ=1) = {end}");
    }

    proptest! {
        #[test]
        fn linear_deviation_dynamics_do_not_depend_on_the_stationary_profile(
            d0 in proptest::array::uniform3(-2.0f64..2.0), s1 in proptest::array::uniform3(-2.0f64..2.0),
            s2 in proptest::array::uniform3(-2.0f64..2.0), speed in -2.0f64..2.0, rate in -1.0f64..1.0,
        ) {
            let model = LinearAdvection::new(speed, rate);
            let r = ReferenceElement::new(Order::Third);
            let ops = PredictorOperators::new(&model, &r, 0.02).unwrap();
            let nodes = xs(Order::Third, 0.0, 0.1);
            let (s1, s2) = (s1.map(|v| StateVector([v])), s2.map(|v| StateVector([v])));
            let w1: [StateVector<1>; MAX_P] = std::array::from_fn(|a| s1[a] + StateVector([d0[a]]));
            let w2: [StateVector<1>; MAX_P] = std::array::from_fn(|a| s2[a] + StateVector([d0[a]]));
            let p1 = predictor_fixed_point(&model, &ops, &w1, Some(&s1), &nodes, 0.1, 0).unwrap();
            let p2 = predictor_fixed_point(&model, &ops, &w2, Some(&s2), &nodes, 0.1, 0).unwrap();
            let p0 = predictor_fixed_point(&model, &ops, &d0.map(|v| StateVector([v])), None, &nodes, 0.1, 0).unwrap();
            for l in 0..9 {
                prop_assert!((p1.deviation(l) - p2.deviation(l)).max_abs() <= 1e-13);
                prop_assert!((p1.deviation(l) - p0.values[l]).max_abs() <= 1e-13);
            }
        }
    }
}
