//! Closed-form evaluation of the compactness constants: the boxes K_{n,m},
//! the multiplier/action/energy bounds, the Novikov window, homotopy
//! admissibility, and the positive-action floor.

use crate::error::{Error, Result};
use crate::hamiltonian::corotating_momentum;
use crate::symplectic::{to_polar, PhasePoint, Vec2};

/// Coordinate-wise box in (r, p_r, corotating momentum). The angular bound
/// is one-sided: the corotating momentum is conserved and capped above by
/// r_max sqrt(2m) on low levels, while its negative range is unbounded.
#[derive(Debug, Clone, Copy)]
pub struct CompactBox {
    pub r_max: f64,
    pub pr_max: f64,
    pub ptheta_max: f64,
}

impl CompactBox {
    pub fn contains(&self, x: PhasePoint) -> Result<bool> {
        let polar = to_polar(x)?;
        Ok(polar.r <= self.r_max
            && polar.p_r.abs() <= self.pr_max
            && corotating_momentum(x) <= self.ptheta_max)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BoundConstants {
    pub c: f64,
    pub y_frak: f64,
    pub a_frak: f64,
    pub e_frak: f64,
    pub q_frak: f64,
    pub p_frak: f64,
    pub h_frak: f64,
}

/// The box confining every chord of energy below m, padded by n.
pub fn knm_box(q0: Vec2, q1: Vec2, n: u32, m: f64) -> Result<CompactBox> {
    if m <= 0.0 {
        return Err(Error::InvalidInput { detail: "m must be positive".into() });
    }
    let r_max = q0.norm().max(q1.norm()) + n as f64;
    Ok(CompactBox {
        r_max,
        pr_max: (r_max * r_max + 2.0 * m).sqrt(),
        ptheta_max: r_max * (2.0 * m).sqrt(),
    })
}

/// Multiplier bound for almost-critical points in terms of their action.
pub fn eta_bound_small_gradient(c: f64, action_abs: f64) -> Result<f64> {
    if c <= 0.0 {
        return Err(Error::InvalidInput { detail: "c must be positive".into() });
    }
    Ok(action_abs / c + 1.0 / (2.0 * c).sqrt())
}

/// Every constant of the compactness window in one pass. `q_min` is the
/// smaller endpoint norm min{|q0|,|q1|} feeding the position bound.
pub fn window_constants(
    a: f64,
    b: f64,
    c: f64,
    j_norm: f64,
    h_frak: f64,
    eps: f64,
    q_min: f64,
) -> Result<BoundConstants> {
    if a > b {
        return Err(Error::InvalidInput { detail: "window needs a <= b".into() });
    }
    if c <= 0.0 {
        return Err(Error::InvalidInput { detail: "c must be positive".into() });
    }
    let m = a.abs().max(b.abs());
    let y_frak = 1.5 * (m / c + 1.0 / (2.0 * c).sqrt() + j_norm * j_norm * (b - a));
    let a_frak = m + (c / 3.0) * y_frak;
    let e_frak = j_norm * (b - a + (c / 3.0) * y_frak);
    let q_frak = q_min + 2.0 * (3.0 * eps + a_frak / (2.0 * c).sqrt() + y_frak * h_frak);
    let p_frak = 2.0 * q_frak + (2.0 * (h_frak + c + eps)).sqrt();
    Ok(BoundConstants { c, y_frak, a_frak, e_frak, q_frak, p_frak, h_frak })
}

/// The multiplier-window constant as re-derived in the positive-action
/// variant, with 2/c on the window term and 1/sqrt(c) on the energy term.
pub fn eta_window_posgamma_variant(a: f64, b: f64, c: f64, j_norm: f64) -> Result<f64> {
    if a > b {
        return Err(Error::InvalidInput { detail: "window needs a <= b".into() });
    }
    if c <= 0.0 {
        return Err(Error::InvalidInput { detail: "c must be positive".into() });
    }
    let m = a.abs().max(b.abs());
    Ok(1.5 * (2.0 * m / c + 1.0 / c.sqrt() + j_norm * j_norm * (b - a)))
}

/// Novikov finiteness window for the perturbation range [a, b].
pub fn novikov_window_ok(a: f64, b: f64, c: f64) -> Result<bool> {
    if c <= 0.0 {
        return Err(Error::InvalidInput { detail: "c must be positive".into() });
    }
    let s = 3.0 * (c / 2.0).sqrt();
    Ok(a <= (3.0 * b).max(s) && b >= (3.0 * a).min(-s))
}

/// Smallness condition on the homotopy derivative sup_s |d/ds h_s|.
pub fn homotopy_admissible(dhs_sup: f64, c: f64, j_norm: f64) -> Result<bool> {
    if c <= 0.0 {
        return Err(Error::InvalidInput { detail: "c must be positive".into() });
    }
    Ok(dhs_sup * (1.0 / c + j_norm * j_norm) <= 1.0 / 3.0)
}

/// The sharpened variant that also keeps all actions positive along the
/// homotopy; delta_h0 is the positive-action floor of the starting datum.
pub fn homotopy_admissible_positive(
    dhs_sup: f64,
    c: f64,
    j_norm: f64,
    delta_h0: f64,
) -> Result<bool> {
    if c <= 0.0 || delta_h0 <= 0.0 {
        return Err(Error::InvalidInput {
            detail: "c and the action floor must be positive".into(),
        });
    }
    let first = 1.0 / (4.0 / c + j_norm * j_norm);
    let second = (c / 2.0) / (1.0 + c.sqrt() / (2.0 * delta_h0));
    Ok(dhs_sup <= first.min(second) / 3.0)
}

/// Lower bound delta*eps/(2C) for every positive critical action, from the
/// fiber distance eps, the field bound C, and the contact pairing floor.
pub fn positive_action_floor(delta: f64, eps_dist: f64, c_field: f64) -> Result<f64> {
    if delta <= 0.0 || eps_dist <= 0.0 || c_field <= 0.0 {
        return Err(Error::InvalidInput { detail: "all inputs must be positive".into() });
    }
    Ok(delta * eps_dist / (2.0 * c_field))
}
