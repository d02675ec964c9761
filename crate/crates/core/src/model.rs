//! The abstract quasi-linear system `∂t Q + A(Q) ∂x Q = S(Q, x)` consumed by
//! every solver phase.

use crate::error::{Error, Result};
use crate::state::StateVector;

/// Interface jump contributions of one Riemann problem.
///
/// `minus` goes to the cell on the left of the interface, `plus` to the cell
/// on the right. The star states are the interface-adjacent states used as
/// boundary data by the next step's reconstruction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FluctuationPair<const V: usize> {
    pub minus: StateVector<V>,
    pub plus: StateVector<V>,
    pub star_left: StateVector<V>,
    pub star_right: StateVector<V>,
}

impl<const V: usize> FluctuationPair<V> {
    pub fn zero(left: StateVector<V>, right: StateVector<V>) -> Self {
        Self {
            minus: StateVector::ZERO,
            plus: StateVector::ZERO,
            star_left: left,
            star_right: right,
        }
    }
}

/// A non-conservative hyperbolic system with `V` unknowns.
///
/// Everything here is a pure function of its inputs.
pub trait SystemModel<const V: usize>: Send + Sync {
    fn name(&self) -> &'static str;

    fn component_names(&self) -> [&'static str; V];

    /// Components that the update evolves (the others are frozen parameters).
    fn evolved_components(&self) -> &'static [usize];

    /// Components with identically zero rows in `A` and `S`.
    fn is_static_component(&self, _c: usize) -> bool {
        false
    }

    fn check_admissible(&self, q: &StateVector<V>) -> Result<()>;

    /// `A(q) · w`.
    fn matrix_action(&self, q: &StateVector<V>, w: &StateVector<V>) -> StateVector<V>;

    fn source(&self, q: &StateVector<V>, x: f64) -> StateVector<V>;

    /// Diagonal `L` of the part of the source that is linear in the state,
    /// `S(Q) = L ⊙ Q + S_nl(Q, x)`. The predictor treats it implicitly.
    fn linear_source_diag(&self) -> StateVector<V> {
        StateVector::ZERO
    }

    fn eigenvalues(&self, q: &StateVector<V>) -> Result<StateVector<V>>;

    /// Largest characteristic speed magnitude at `q`.
    fn wave_speed(&self, q: &StateVector<V>) -> Result<f64> {
        Ok(self.eigenvalues(q)?.max_abs())
    }

    /// Right-hand side `f̃(x, Q)` of the stationary ODE `dQ/dx = f̃(x, Q)`.
    fn stationary_rhs(&self, x: f64, q: &StateVector<V>) -> Result<StateVector<V>>;

    /// Completes a marched stationary state at node `x` (e.g. resets
    /// prescribed parameter components to their profiles).
    fn stationary_node(&self, _x: f64, q: StateVector<V>) -> StateVector<V> {
        q
    }

    /// Stationary anchor state at the left node `x` of a cell with average
    /// `mean`, with the free component set to `value`.
    fn stationary_anchor(&self, x: f64, mean: &StateVector<V>, value: f64) -> StateVector<V>;

    /// Component matched against the cell average by the stationary solver.
    fn anchor_component(&self) -> usize {
        0
    }

    /// Fluctuations and star states of the Riemann problem `(left, right)`.
    fn fluctuations(
        &self,
        left: &StateVector<V>,
        right: &StateVector<V>,
    ) -> Result<FluctuationPair<V>>;

    /// Mirror state used by reflective (no-flow) boundaries.
    fn reflect(&self, q: &StateVector<V>) -> StateVector<V>;

    /// Ghost state imposing `pressure`, built from the interior boundary trace.
    fn pressure_ghost(&self, _interior: &StateVector<V>, _pressure: f64) -> Result<StateVector<V>> {
        Err(Error::Config(format!(
            "{} does not support pressure boundaries",
            self.name()
        )))
    }
}

/// `A(Q) · dQdx − S(Q, x)`; vanishes on stationary solutions.
pub fn quasilinear_residual<M, const V: usize>(
    model: &M,
    q: &StateVector<V>,
    dqdx: &StateVector<V>,
    x: f64,
) -> Result<StateVector<V>>
where
    M: SystemModel<V> + ?Sized,
{
    model.check_admissible(q)?;
    Ok(model.matrix_action(q, dqdx) - model.source(q, x))
}

/// Maximum characteristic speed over a collection of states.
pub fn max_wave_speed<'a, M, const V: usize>(
    model: &M,
    states: impl IntoIterator<Item = &'a StateVector<V>>,
) -> Result<f64>
where
    M: SystemModel<V> + ?Sized,
{
    let mut any = false;
    let mut nu = 0.0_f64;
    for q in states {
        any = true;
        nu = nu.max(model.wave_speed(q)?);
    }
    if !any {
        return Err(Error::Usage("max_wave_speed needs at least one state".into()));
    }
    Ok(nu)
}

/// Dense `A(Q)` assembled column by column. Debug utility.
pub fn dense_matrix<M, const V: usize>(model: &M, q: &StateVector<V>) -> [[f64; V]; V]
where
    M: SystemModel<V> + ?Sized,
{
    let mut a = [[0.0; V]; V];
    for col in 0..V {
        let mut e = StateVector::ZERO;
        e[col] = 1.0;
        let column = model.matrix_action(q, &e);
        for row in 0..V {
            a[row][col] = column[row];
        }
    }
    a
}

/// `∫₀¹ A(Ψ(s)) ∂sΨ ds` along the segment path `Ψ(s) = qL + s (qR − qL)`,
/// by five-point Gauss–Legendre quadrature. Diagnostic only.
pub fn segment_path_integral<M, const V: usize>(
    model: &M,
    left: &StateVector<V>,
    right: &StateVector<V>,
) -> StateVector<V>
where
    M: SystemModel<V> + ?Sized,
{
    use crate::quadrature::{GAUSS5_NODES, GAUSS5_WEIGHTS};
    let jump = *right - *left;
    let mut acc = StateVector::ZERO;
    for (s, w) in GAUSS5_NODES.iter().zip(GAUSS5_WEIGHTS) {
        let q = *left + jump * *s;
        acc += model.matrix_action(&q, &jump) * w;
    }
    acc
}
