use crate::error::{Error, Result};
use crate::quadrature::Order;

/// Uniform mesh of `n` cells on `[x_a, x_b]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub x_a: f64,
    pub x_b: f64,
    pub n: usize,
    pub dx: f64,
}

impl Grid {
    pub const MIN_CELLS: usize = 4;

    pub fn new(x_a: f64, x_b: f64, n: usize) -> Result<Self> {
        if !(x_b > x_a) || !x_a.is_finite() || !x_b.is_finite() {
            return Err(Error::Config(format!("invalid domain [{x_a}, {x_b}]")));
        }
        if n < Self::MIN_CELLS {
            return Err(Error::Config(format!(
                "at least {} cells are required, got {n}",
                Self::MIN_CELLS
            )));
        }
        Ok(Self {
            x_a,
            x_b,
            n,
            dx: (x_b - x_a) / n as f64,
        })
    }

    pub fn length(&self) -> f64 {
        self.x_b - self.x_a
    }

    /// Coordinate of interface `j` (`j = 0` is `x_a`, `j = n` is `x_b`).
    pub fn interface(&self, j: usize) -> f64 {
        if j == self.n {
            self.x_b
        } else {
            self.x_a + j as f64 * self.dx
        }
    }

    pub fn center(&self, i: usize) -> f64 {
        self.x_a + (i as f64 + 0.5) * self.dx
    }

    /// Quadrature node `p` of cell `i` for the given order.
    ///
    /// Nodes are indexed globally (`k = i (P-1) + p`) so that the right node
    /// of a cell and the left node of its neighbour are bitwise identical.
    pub fn node(&self, order: Order, i: usize, p: usize) -> f64 {
        let sub = order.p() - 1;
        let k = i * sub + p;
        if k == self.n * sub {
            self.x_b
        } else if k % sub == 0 {
            self.interface(k / sub)
        } else {
            self.x_a + k as f64 * (self.dx / sub as f64)
        }
    }

    /// Spacing between consecutive quadrature nodes (`h = Δx / (P-1)`).
    pub fn node_spacing(&self, order: Order) -> f64 {
        self.dx / (order.p() - 1) as f64
    }
}
