//! Node sets and weights shared by the stationary solver, the reconstruction,
//! the predictor and the space-time quadrature of the update.
//!
//! The nodes are the cell endpoints (and midpoint for third order), so the
//! rules are trapezoid (second order) and Simpson (third order), used in both
//! space and time.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Order of accuracy of the scheme; also the number of nodes per direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Order {
    Second,
    Third,
}

/// Largest number of nodes per direction.
pub const MAX_P: usize = 3;

const NODES_2: [f64; 2] = [0.0, 1.0];
const WEIGHTS_2: [f64; 2] = [0.5, 0.5];
const NODES_3: [f64; 3] = [0.0, 0.5, 1.0];
const WEIGHTS_3: [f64; 3] = [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0];

impl Order {
    /// Number of nodes per direction (P).
    pub const fn p(self) -> usize {
        match self {
            Order::Second => 2,
            Order::Third => 3,
        }
    }

    /// Reference nodes on [0, 1].
    pub fn nodes(self) -> &'static [f64] {
        match self {
            Order::Second => &NODES_2,
            Order::Third => &NODES_3,
        }
    }

    pub fn weights(self) -> &'static [f64] {
        match self {
            Order::Second => &WEIGHTS_2,
            Order::Third => &WEIGHTS_3,
        }
    }

    /// Quadrature average of nodal values.
    pub fn average<T>(self, values: &[T]) -> T
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
    {
        let w = self.weights();
        let mut acc = values[0] * w[0];
        for (v, &wk) in values.iter().zip(w).skip(1) {
            acc = acc + *v * wk;
        }
        acc
    }
}

impl TryFrom<u8> for Order {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self, Error> {
        match v {
            2 => Ok(Order::Second),
            3 => Ok(Order::Third),
            other => Err(Error::Config(format!("order must be 2 or 3, got {other}"))),
        }
    }
}

impl From<Order> for u8 {
    fn from(o: Order) -> u8 {
        o.p() as u8
    }
}

impl FromStr for Order {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        let v: u8 = s
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("order must be 2 or 3, got {s:?}")))?;
        Order::try_from(v)
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.p())
    }
}

/// Five-point Gauss–Legendre rule on [0, 1]; exact for polynomials of degree ≤ 9.
pub(crate) const GAUSS5_NODES: [f64; 5] = [
    0.046_910_077_030_668_004,
    0.230_765_344_947_158_45,
    0.5,
    0.769_234_655_052_841_6,
    0.953_089_922_969_332,
];
pub(crate) const GAUSS5_WEIGHTS: [f64; 5] = [
    0.118_463_442_528_094_54,
    0.239_314_335_249_683_23,
    0.284_444_444_444_444_45,
    0.239_314_335_249_683_23,
    0.118_463_442_528_094_54,
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_one() {
        for order in [Order::Second, Order::Third] {
            let s: f64 = order.weights().iter().sum();
            assert!((s - 1.0).abs() < 1e-15);
        }
        let s: f64 = GAUSS5_WEIGHTS.iter().sum();
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gauss_rule_integrates_degree_nine() {
        let approx: f64 = GAUSS5_NODES
            .iter()
            .zip(GAUSS5_WEIGHTS)
            .map(|(x, w)| w * x.powi(9))
            .sum();
        assert!((approx - 0.1).abs() < 1e-15);
    }

    #[test]
    fn parses_orders() {
        assert_eq!("3".parse::<Order>().unwrap(), Order::Third);
        assert!("4".parse::<Order>().is_err());
    }
}
