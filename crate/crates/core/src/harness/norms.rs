//! Discrete error norms and empirical convergence orders.

use std::io::Write;

use crate::error::{Error, Result};

/// `Δx`-weighted `L¹`, `L²` and the maximum norm of a vector of cell errors.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Norms {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

impl Norms {
    pub fn of(errors: &[f64], dx: f64) -> Self {
        let mut n = Norms::default();
        let mut sq = 0.0;
        for e in errors.iter().map(|e| e.abs()) {
            n.l1 += e * dx;
            sq += e * e * dx;
            n.linf = n.linf.max(e);
        }
        n.l2 = sq.sqrt();
        n
    }
}

/// `log₂(E_k / E_{k+1})` for successive entries.
pub fn empirical_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorRow {
    pub cells: usize,
    /// One entry per variable.
    pub norms: Vec<Norms>,
    pub seconds: f64,
    pub steps: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorReport {
    pub scenario: String,
    pub order: u8,
    pub well_balanced: bool,
    /// Domain length `|Ω|`.
    pub length: f64,
    pub variables: Vec<String>,
    pub rows: Vec<ErrorRow>,
}

impl ErrorReport {
    fn index(&self, variable: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|v| v == variable)
            .ok_or_else(|| Error::Usage(format!("no variable {variable:?} in the report")))
    }

    /// Norms of one variable over the refinements.
    pub fn series(&self, variable: &str) -> Result<Vec<Norms>> {
        let k = self.index(variable)?;
        Ok(self.rows.iter().map(|r| r.norms[k]).collect())
    }

    pub fn orders(&self, variable: &str, norm: fn(&Norms) -> f64) -> Result<Vec<f64>> {
        Ok(empirical_orders(&self.series(variable)?.iter().map(norm).collect::<Vec<_>>()))
    }

    /// One row per mesh; orders are empty on the coarsest row.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let io = |e: csv::Error| Error::Io(e.to_string());
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["cells".to_string()];
        for v in &self.variables {
            for n in ["l1", "l2", "linf", "order_l1", "order_l2", "order_linf"] {
                header.push(format!("{v}_{n}"));
            }
        }
        header.extend(["seconds".to_string(), "steps".to_string()]);
        w.write_record(&header).map_err(io)?;
        for (k, row) in self.rows.iter().enumerate() {
            let mut rec = vec![row.cells.to_string()];
            for (j, n) in row.norms.iter().enumerate() {
                rec.extend([n.l1, n.l2, n.linf].iter().map(|&v| super::fmt_float(v)));
                if k == 0 {
                    rec.extend(std::iter::repeat(String::new()).take(3));
                } else {
                    let prev = self.rows[k - 1].norms[j];
                    for (a, b) in [(prev.l1, n.l1), (prev.l2, n.l2), (prev.linf, n.linf)] {
                        rec.push(format!("{:.4}", (a / b).log2()));
                    }
                }
            }
            rec.extend([super::fmt_float(row.seconds), row.steps.to_string()]);
            w.write_record(&rec).map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}
