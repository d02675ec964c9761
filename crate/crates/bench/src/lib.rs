//! Short scenario runs used by the criterion benches.

use wbpc_core::harness::ScenarioConfig;

/// A built-in scenario cut down to `t_final`.
pub fn short_run(scenario: &str, order: u8, cells: usize, well_balanced: bool, t_final: f64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::preset(scenario).expect("built-in scenario");
    cfg.model.order = order;
    cfg.model.well_balanced = well_balanced;
    cfg.grid.cells = cells;
    cfg.time.t_final = t_final;
    cfg
}
