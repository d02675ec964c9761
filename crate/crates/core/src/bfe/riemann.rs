//! Two-rarefaction approximate Riemann solver for the subcritical regime.
//!
//! The rarefaction invariants are closed with the frozen sound speed of the
//! outer states, which turns the contact condition `q*L = q*R` into a quadratic
//! for `A*R` given `A*L`. Total-pressure continuity is then a scalar equation
//! in `A*L`, solved by a bracketed Newton iteration.

use crate::bfe::tube_law::TubeLaw;
use crate::bfe::{wall_params, BfeState, AREA, FLOW, PSI};
use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 100;

/// The four constant states of the wave fan and its outer wave speeds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RiemannFan {
    pub star_left: BfeState,
    pub star_right: BfeState,
    /// `λ1(QL), λ1(Q*L), λ8(Q*R), λ8(QR)`.
    pub speeds: [f64; 4],
    pub iterations: usize,
}

struct Side {
    a: f64,
    u: f64,
    c: f64,
    psi: f64,
}

struct Trial {
    u_left: f64,
    a_right: f64,
    u_right: f64,
    flow: f64,
    residual: f64,
    slope: f64,
}

struct Problem<'a> {
    law: &'a TubeLaw,
    rho: f64,
    eps: f64,
    left: Side,
    right: Side,
    wl: crate::bfe::WallParams,
    wr: crate::bfe::WallParams,
}

impl Problem<'_> {
    /// Residual of total-pressure continuity at `A*L = x`; `None` when the
    /// contact quadratic has no real root.
    fn trial(&self, x: f64) -> Result<Option<Trial>> {
        let (l, r) = (&self.left, &self.right);
        let u_left = l.u + l.c * (1.0 - x / l.a);
        let flow = x * u_left;
        let k = r.c / r.a;
        let b = r.u - r.c;
        let disc = b * b + 4.0 * k * flow;
        if !(disc >= 0.0) {
            return Ok(None);
        }
        let root = disc.sqrt();
        let a_right = (root - b) / (2.0 * k);
        if !(a_right > 0.0) {
            return Ok(None);
        }
        let u_right = r.u - r.c * (1.0 - a_right / r.a);
        let psi_left = l.psi + (l.a - x) / self.eps;
        let psi_right = r.psi + (r.a - a_right) / self.eps;
        let el = self.law.evaluate(x, psi_left, &self.wl)?;
        let er = self.law.evaluate(a_right, psi_right, &self.wr)?;
        let residual = el.pressure + 0.5 * self.rho * u_left * u_left
            - er.pressure
            - 0.5 * self.rho * u_right * u_right;

        let du_left = -l.c / l.a;
        let dflow = u_left + x * du_left;
        let da_right = dflow / root;
        let du_right = k * da_right;
        let dp_left = el.d_a - el.d_psi / self.eps;
        let dp_right = (er.d_a - er.d_psi / self.eps) * da_right;
        let slope = dp_left + self.rho * u_left * du_left - dp_right - self.rho * u_right * du_right;
        Ok(Some(Trial { u_left, a_right, u_right, flow, residual, slope }))
    }
}

/// Star states of the Riemann problem `(ql, qr)`.
pub fn two_rarefaction_riemann(law: &TubeLaw, rho: f64, eps: f64, ql: &BfeState, qr: &BfeState) -> Result<RiemannFan> {
    let (wl, wr) = (wall_params(ql), wall_params(qr));
    let side = |q: &BfeState, w: &crate::bfe::WallParams| -> Result<Side> {
        let c = law.sound_speed(q[AREA], w, rho)?;
        Ok(Side { a: q[AREA], u: q[FLOW] / q[AREA], c, psi: q[PSI] })
    };
    let (left, right) = (side(ql, &wl)?, side(qr, &wr)?);
    if !(left.u.abs() < left.c) || !(right.u.abs() < right.c) {
        return Err(Error::Regime { x: f64::NAN });
    }
    let outer = [left.u - left.c, right.u + right.c];
    if ql == qr {
        return Ok(RiemannFan {
            star_left: *ql,
            star_right: *qr,
            speeds: [outer[0], outer[0], outer[1], outer[1]],
            iterations: 0,
        });
    }

    let problem = Problem { law, rho, eps, left, right, wl, wr };
    let (l, r) = (&problem.left, &problem.right);
    let lo = 1e-3 * l.a.min(r.a);
    let hi = 10.0 * l.a.max(r.a);
    let scale = {
        let pl = law.pressure(l.a, l.psi, &wl)?;
        let pr = law.pressure(r.a, r.psi, &wr)?;
        pl.abs().max(pr.abs()).max(rho * (l.c * l.c).max(r.c * r.c) * 1e-6)
    };

    // Newton from the mean area; once iterates of both signs are known the
    // step is confined to that bracket and replaced by bisection if it leaves.
    let mut x = 0.5 * (l.a + r.a);
    let (mut positive, mut negative): (Option<f64>, Option<f64>) = (None, None);
    let mut last_valid: Option<f64> = None;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let Some(t) = problem.trial(x)? else {
            // no contact state: back off towards the last admissible iterate
            x = 0.5 * (x + last_valid.unwrap_or(lo));
            continue;
        };
        last_valid = Some(x);
        if t.residual == 0.0 {
            break;
        }
        if t.residual > 0.0 {
            positive = Some(x);
        } else {
            negative = Some(x);
        }
        let mut next = x - t.residual / t.slope;
        match (positive, negative) {
            (Some(p), Some(n)) => {
                let (a, b) = (p.min(n), p.max(n));
                if !(next > a && next < b) {
                    next = 0.5 * (a + b);
                }
            }
            // the residual increases with A*L away from the edge of the contact
            // quadratic's domain; a non-positive slope means we are at that edge
            _ if !(t.slope > 0.0) || !next.is_finite() => {
                next = if t.residual > 0.0 { 0.8 * x } else { 1.25 * x }.clamp(lo, hi);
            }
            _ => next = next.clamp(lo, hi),
        }
        let step = (next - x).abs();
        x = next;
        if step <= 4.0 * f64::EPSILON * x {
            break;
        }
    }

    let t = problem
        .trial(x)?
        .ok_or_else(|| Error::Domain("contact quadratic has no positive root".into()))?;
    if t.residual.abs() > 1e-10 * scale {
        if positive.is_none() || negative.is_none() {
            return Err(Error::Domain(format!("no star state with A*L in [{lo:e}, {hi:e}]")));
        }
        return Err(Error::Newton { iterations, last: x, residual: t.residual });
    }

    let mut star_left = *ql;
    star_left[AREA] = x;
    star_left[FLOW] = t.flow;
    star_left[PSI] = l.psi + (l.a - x) / eps;
    let mut star_right = *qr;
    star_right[AREA] = t.a_right;
    star_right[FLOW] = t.flow;
    star_right[PSI] = r.psi + (r.a - t.a_right) / eps;

    let c_left = law.sound_speed(x, &wl, rho)?;
    let c_right = law.sound_speed(t.a_right, &wr, rho)?;
    let speeds = [outer[0], t.u_left - c_left, t.u_right + c_right, outer[1]];
    if speeds[1] >= 0.0 || speeds[2] <= 0.0 {
        return Err(Error::Regime { x: f64::NAN });
    }
    Ok(RiemannFan { star_left, star_right, speeds, iterations })
}
