//! Model-specific pieces of a scenario: construction, boundary rules,
//! initial data, exact references and derived output columns.

use crate::bfe::{
    self, synthetic_gravity_polyline, BfeModel, GravityProfile, ParamProfile, Polyline, TubeLaw, VesselProfile, AREA,
    FLOW, MMHG,
};
use crate::burgers::Burgers;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::harness::config::{BcSpec, GravitySpec, InitialCondition, ProfileKind, ScenarioConfig, TubeLawKind};
use crate::model::SystemModel;
use crate::quadrature::{Order, MAX_P};
use crate::reconstruction::BoundaryStateCache;
use crate::solver::Boundary;
use crate::state::StateVector;
use crate::stationary::{cell_averages, global_march};

pub(crate) trait Case<const V: usize>: SystemModel<V> + Sized {
    fn build(cfg: &ScenarioConfig) -> Result<Self>;

    fn boundary(&self, spec: &BcSpec) -> Result<Boundary<V>>;

    /// Pointwise initial data.
    fn initial(&self, ic: &InitialCondition, x: f64) -> Result<StateVector<V>>;

    /// Left state of the discrete stationary solution selected by the boundary data.
    fn steady_start(&self, cfg: &ScenarioConfig, grid: &Grid, order: Order) -> Result<StateVector<V>>;

    /// Exact stationary solution at `x`.
    fn exact(&self, cfg: &ScenarioConfig, x: f64) -> Result<StateVector<V>>;

    fn derived_names(&self) -> &'static [&'static str];

    fn derived(&self, q: &StateVector<V>) -> Result<Vec<f64>>;
}

impl Case<1> for Burgers {
    fn build(_cfg: &ScenarioConfig) -> Result<Self> {
        Ok(Burgers)
    }

    fn boundary(&self, spec: &BcSpec) -> Result<Boundary<1>> {
        match *spec {
            BcSpec::Dirichlet { value } => Ok(Boundary::Dirichlet(StateVector([value]))),
            BcSpec::Transparent => Ok(Boundary::Transparent),
            ref other => Err(Error::Config(format!("boundary {other:?} is not available for burgers"))),
        }
    }

    fn initial(&self, ic: &InitialCondition, x: f64) -> Result<StateVector<1>> {
        match *ic {
            InitialCondition::ExpBump { amplitude, sharpness, center } => {
                Ok(StateVector([x.exp() + amplitude * (-sharpness * (x - center) * (x - center)).exp()]))
            }
            ref other => Err(Error::Config(format!("initial data {other:?} is not pointwise for burgers"))),
        }
    }

    fn steady_start(&self, cfg: &ScenarioConfig, _grid: &Grid, _order: Order) -> Result<StateVector<1>> {
        match cfg.bc.left {
            BcSpec::Dirichlet { value } => Ok(StateVector([value])),
            _ => Err(Error::Config("steady burgers data needs a dirichlet left boundary".into())),
        }
    }

    fn exact(&self, cfg: &ScenarioConfig, x: f64) -> Result<StateVector<1>> {
        let q0 = self.steady_start(cfg, &cfg.grid()?, cfg.order()?)?;
        Ok(StateVector([q0[0] * (x - cfg.grid.x_a).exp()]))
    }

    fn derived_names(&self) -> &'static [&'static str] {
        &[]
    }

    fn derived(&self, _q: &StateVector<1>) -> Result<Vec<f64>> {
        Ok(Vec::new())
    }
}

fn outlet_pressure(cfg: &ScenarioConfig) -> Result<f64> {
    match cfg.bc.right {
        BcSpec::Pressure { mmhg } => Ok(mmhg * MMHG),
        _ => Err(Error::Config("the hydrostatic reference needs a pressure right boundary".into())),
    }
}

/// Vessel profile described by a configuration.
pub fn vessel_profile(cfg: &ScenarioConfig) -> Result<VesselProfile> {
    let v = cfg
        .vessel
        .as_ref()
        .ok_or_else(|| Error::Config("the bfe model needs a [vessel] section".into()))?;
    let length = cfg.grid.x_b - cfg.grid.x_a;
    let param = |value: f64| match v.profile {
        ProfileKind::Constant => ParamProfile::Constant(value),
        ProfileKind::Taper => ParamProfile::taper(value, length),
    };
    let gravity = match cfg.gravity.as_ref() {
        None => GravityProfile::Constant(0.0),
        Some(GravitySpec::Constant { value }) => GravityProfile::Constant(*value),
        Some(GravitySpec::Smooth { modulus }) => GravityProfile::Smooth { modulus: *modulus, length },
        Some(GravitySpec::Polyline { file }) => GravityProfile::Polyline(Polyline::from_csv(&cfg.resolve(file))?),
        Some(GravitySpec::Synthetic) => GravityProfile::Polyline(synthetic_gravity_polyline(length)),
    };
    let mut tube_law = match v.tube_law {
        TubeLawKind::Power => TubeLaw::power(),
        TubeLawKind::Recruitment => TubeLaw::recruitment(),
    };
    tube_law.gamma = v.gamma;
    let profile = VesselProfile {
        length,
        rho: v.rho,
        friction: bfe::profile::profile_friction(v.mu, v.rho, v.velocity_profile),
        epsilon: v.epsilon,
        tube_law,
        a0: param(v.a0),
        h0: param(v.h0),
        ee: param(v.ee),
        ec: param(v.ec),
        pr: param(v.pr),
        gravity,
    };
    profile.validate()?;
    Ok(profile)
}

const SHOOT_TOL: f64 = 1e-15;
const SHOOT_MAX: usize = 30;

impl Case<8> for BfeModel {
    fn build(cfg: &ScenarioConfig) -> Result<Self> {
        BfeModel::new(vessel_profile(cfg)?)
    }

    fn boundary(&self, spec: &BcSpec) -> Result<Boundary<8>> {
        match *spec {
            BcSpec::Transparent => Ok(Boundary::Transparent),
            BcSpec::Reflective => Ok(Boundary::Reflective),
            BcSpec::Pressure { mmhg } => Ok(Boundary::Pressure(mmhg * MMHG)),
            ref other => Err(Error::Config(format!("boundary {other:?} is not available for bfe"))),
        }
    }

    fn initial(&self, ic: &InitialCondition, x: f64) -> Result<StateVector<8>> {
        match *ic {
            InitialCondition::UniformPressure { mmhg } => self.state_with_pressure(x, mmhg * MMHG),
            ref other => Err(Error::Config(format!("initial data {other:?} is not pointwise for bfe"))),
        }
    }

    /// Shoots on the inlet area so that the marched outlet node carries the
    /// target pressure.
    fn steady_start(&self, cfg: &ScenarioConfig, grid: &Grid, order: Order) -> Result<StateVector<8>> {
        let target = outlet_pressure(cfg)?;
        let x0 = grid.x_a;
        let residual = |a: f64| -> Result<f64> {
            let nodes = global_march(self, grid, order, self.state_at(x0, a, 0.0))?;
            Ok(self.pressure(nodes.last().expect("non-empty march"))? / target - 1.0)
        };
        let mut a = self.profile.hydrostatic_area(x0, target)?;
        let mut r = residual(a)?;
        for _ in 0..SHOOT_MAX {
            if r.abs() <= SHOOT_TOL {
                return Ok(self.state_at(x0, a, 0.0));
            }
            let da = 1e-7 * a;
            let slope = (residual(a + da)? - r) / da;
            let next = a - r / slope;
            let rn = residual(next)?;
            if rn.abs() >= r.abs() {
                break;
            }
            (a, r) = (next, rn);
        }
        if r.abs() <= 1e3 * SHOOT_TOL {
            return Ok(self.state_at(x0, a, 0.0));
        }
        Err(Error::Newton { iterations: SHOOT_MAX, last: a, residual: r })
    }

    fn exact(&self, cfg: &ScenarioConfig, x: f64) -> Result<StateVector<8>> {
        let a = self.profile.hydrostatic_area(x, outlet_pressure(cfg)?)?;
        Ok(self.state_at(x, a, 0.0))
    }

    fn derived_names(&self) -> &'static [&'static str] {
        &["u", "c", "p"]
    }

    fn derived(&self, q: &StateVector<8>) -> Result<Vec<f64>> {
        Ok(vec![q[FLOW] / q[AREA], self.sound_speed(q)?, self.pressure(q)?])
    }
}

/// Cell averages and interface cache at `t = 0`.
pub(crate) struct InitialData<const V: usize> {
    pub means: Vec<StateVector<V>>,
    pub cache: BoundaryStateCache<V>,
    /// Marched nodal profile when the data are stationary.
    pub nodes: Option<Vec<StateVector<V>>>,
}

pub(crate) fn initial_data<M: Case<V>, const V: usize>(
    model: &M,
    cfg: &ScenarioConfig,
    grid: &Grid,
    order: Order,
) -> Result<InitialData<V>> {
    if cfg.initial == InitialCondition::Steady {
        let start = model.steady_start(cfg, grid, order)?;
        let nodes = global_march(model, grid, order, start)?;
        let means = cell_averages(order, &nodes);
        let sub = order.p() - 1;
        let faces: Vec<_> = (0..=grid.n).map(|j| nodes[j * sub]).collect();
        let cache = BoundaryStateCache { minus: faces.clone(), plus: faces };
        return Ok(InitialData { means, cache, nodes: Some(nodes) });
    }
    let means = (0..grid.n)
        .map(|i| projected(order, grid, i, |x| model.initial(&cfg.initial, x)))
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = (0..=grid.n).map(|j| grid.interface(j)).collect();
    let mut err = None;
    let cache = BoundaryStateCache::bootstrap(&xs, |x, _| {
        model.initial(&cfg.initial, x).unwrap_or_else(|e| {
            err.get_or_insert(e);
            StateVector::ZERO
        })
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(InitialData { means, cache, nodes: None })
}

/// Quadrature average of `f` over cell `i`.
pub(crate) fn projected<const V: usize>(
    order: Order,
    grid: &Grid,
    i: usize,
    mut f: impl FnMut(f64) -> Result<StateVector<V>>,
) -> Result<StateVector<V>> {
    let mut values = [StateVector::ZERO; MAX_P];
    for (p, v) in values.iter_mut().enumerate().take(order.p()) {
        *v = f(grid.node(order, i, p))?;
    }
    Ok(order.average(&values[..order.p()]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bfe::PSI;

    #[test]
    fn fixture_polyline_matches_the_synthetic_profile() {
        let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/s3_gravity.csv");
        let file = Polyline::from_csv(&path).unwrap();
        assert_eq!(file, synthetic_gravity_polyline(10.0));
        assert_eq!(file.xs().len(), 13);
        assert!(file.values().iter().all(|v| v.abs() <= 981.0));
        assert!(file.values().iter().any(|&v| v > 0.0) && file.values().iter().any(|&v| v < 0.0));
    }

    #[test]
    fn s3_preset_and_fixture_build_the_same_vessel() {
        let preset = ScenarioConfig::preset("s3").unwrap();
        let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/s3.toml");
        let fixture = ScenarioConfig::load(&path).unwrap();
        assert_eq!(vessel_profile(&preset).unwrap(), vessel_profile(&fixture).unwrap());
    }

    #[test]
    fn s1_vessel_data() {
        let p = vessel_profile(&ScenarioConfig::preset("s1").unwrap()).unwrap();
        assert_eq!(p.params_at(3.0).a0, 0.24);
        assert_eq!(p.params_at(3.0).ee, 3.6e7);
        assert_eq!(p.gravity.value(7.0), 981.0);
        let p = vessel_profile(&ScenarioConfig::preset("s2").unwrap()).unwrap();
        assert!((p.params_at(0.0).a0 - 0.264).abs() < 1e-15);
        assert!((p.params_at(10.0).h0 - 0.045).abs() < 1e-15);
        assert_eq!(p.gravity.value(10.0), 0.0);
    }

    #[test]
    fn shooting_hits_the_outlet_pressure() {
        for name in ["s1", "s3"] {
            let mut cfg = ScenarioConfig::preset(name).unwrap();
            cfg.initial = InitialCondition::Steady;
            let m = BfeModel::build(&cfg).unwrap();
            let grid = Grid::new(0.0, 10.0, 8).unwrap();
            for order in [Order::Second, Order::Third] {
                let start = m.steady_start(&cfg, &grid, order).unwrap();
                let nodes = global_march(&m, &grid, order, start).unwrap();
                let p = m.pressure(nodes.last().unwrap()).unwrap();
                assert!((p / (60.0 * MMHG) - 1.0).abs() <= 1e-14, "{name} {order}: {p}");
                assert!(nodes.iter().all(|q| q[FLOW] == 0.0 && q[PSI] == 0.0));
            }
        }
    }

    #[test]
    fn projected_initial_data_examples() {
        let cfg = ScenarioConfig::preset("burgers-steady").unwrap();
        let grid = cfg.grid().unwrap();
        let data = initial_data(&Burgers, &cfg, &grid, Order::Second).unwrap();
        let ic = |x: f64| x.exp() + 0.3 * (-200.0 * (x + 0.5) * (x + 0.5)).exp();
        let want = 0.5 * (ic(grid.interface(3)) + ic(grid.interface(4)));
        assert!((data.means[3][0] - want).abs() < 1e-15);
        assert!((data.cache.plus[0][0] - 0.367_879).abs() < 1e-6);
        assert!(data.nodes.is_none());
    }
}
