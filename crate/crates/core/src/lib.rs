#![allow(clippy::neg_cmp_op_on_partial_ord)] // negated comparisons reject NaN

pub mod bfe;
pub mod burgers;
pub mod error;
pub mod grid;
pub mod harness;
pub mod linear;
pub mod model;
pub mod predictor;
pub mod quadrature;
pub mod reconstruction;
pub mod solver;
pub mod state;
pub mod stationary;
pub mod update;

pub use error::{Error, Result};
pub use grid::Grid;
pub use model::{FluctuationPair, SystemModel};
pub use quadrature::Order;
pub use state::StateVector;
