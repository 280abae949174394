//! The rotating-frame Hamiltonian, its free and scaled relatives, decaying
//! perturbations H0 - V, and the membership check for the perturbation class.

use crate::error::{Error, Result};
use crate::symplectic::{rotation, Mat2, Mat4, PhasePoint, Vec2};
use rayon::prelude::*;

/// J2 q = (q2, -q1), the quarter-turn matrix R(pi/2) acting on the plane.
fn j2(v: Vec2) -> Vec2 {
    Vec2::new(v.y, -v.x)
}

/// An autonomous Hamiltonian on T*R^2.
pub trait Hamiltonian: Sync {
    fn value(&self, x: PhasePoint) -> f64;

    /// X_H = (dH/dp, -dH/dq) as a Cartesian tangent 4-vector.
    fn field(&self, x: PhasePoint) -> [f64; 4];

    /// Derivative matrix of the field, for variational equations.
    fn field_jacobian(&self, x: PhasePoint) -> Mat4 {
        let a = x.to_array();
        let mut m = [[0.0; 4]; 4];
        for j in 0..4 {
            let h = 1e-6 * (1.0 + a[j].abs());
            let mut ap = a;
            let mut am = a;
            ap[j] += h;
            am[j] -= h;
            let fp = self.field(PhasePoint::from_array(ap));
            let fm = self.field(PhasePoint::from_array(am));
            for i in 0..4 {
                m[i][j] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        Mat4(m)
    }

    /// Exact linearization of the time-tau flow, where a closed form exists.
    fn linearized_flow(&self, _x0: PhasePoint, _tau: f64) -> Option<Mat4> {
        None
    }
}

/// H0 = |p|^2/2 + p1 q2 - p2 q1: free motion seen from a frame rotating at
/// unit rate.
#[derive(Debug, Clone, Copy, Default)]
pub struct CopernicanH0;

impl Hamiltonian for CopernicanH0 {
    fn value(&self, x: PhasePoint) -> f64 {
        h0_eval(x)
    }

    fn field(&self, x: PhasePoint) -> [f64; 4] {
        h0_vector_field(x)
    }

    fn field_jacobian(&self, _x: PhasePoint) -> Mat4 {
        let j = Mat2([[0.0, 1.0], [-1.0, 0.0]]);
        Mat4::from_blocks(j, Mat2::IDENTITY, Mat2::ZERO, j)
    }

    fn linearized_flow(&self, _x0: PhasePoint, tau: f64) -> Option<Mat4> {
        Some(crate::symplectic::flow_matrix(tau))
    }
}

pub fn h0_eval(x: PhasePoint) -> f64 {
    0.5 * x.p.norm_sq() + x.p.x * x.q.y - x.p.y * x.q.x
}

pub fn h0_vector_field(x: PhasePoint) -> [f64; 4] {
    [
        x.p.x + x.q.y,
        x.p.y - x.q.x,
        x.p.y,
        -x.p.x,
    ]
}

/// dH0(p d/dp) = |p|^2 + q2 p1 - q1 p2; equals |p|^2/2 + H0.
pub fn liouville_pairing(x: PhasePoint) -> f64 {
    x.p.norm_sq() + x.q.y * x.p.x - x.q.x * x.p.y
}

/// The angular momentum coordinate l = p1 q2 - p2 q1 in which the rotation
/// term of H0 is linear: H0 = p_r^2/2 + l^2/(2 r^2) + l.  It is the negative
/// of the counterclockwise p_theta of `to_polar`.
pub fn corotating_momentum(x: PhasePoint) -> f64 {
    x.p.x * x.q.y - x.p.y * x.q.x
}

/// Free Hamiltonian |p|^2/2.
#[derive(Debug, Clone, Copy, Default)]
pub struct FreeHamiltonian;

impl Hamiltonian for FreeHamiltonian {
    fn value(&self, x: PhasePoint) -> f64 {
        0.5 * x.p.norm_sq()
    }

    fn field(&self, x: PhasePoint) -> [f64; 4] {
        [x.p.x, x.p.y, 0.0, 0.0]
    }

    fn field_jacobian(&self, _x: PhasePoint) -> Mat4 {
        Mat4::from_blocks(Mat2::ZERO, Mat2::IDENTITY, Mat2::ZERO, Mat2::ZERO)
    }

    fn linearized_flow(&self, _x0: PhasePoint, tau: f64) -> Option<Mat4> {
        Some(Mat4::from_blocks(
            Mat2::IDENTITY,
            Mat2::IDENTITY.scale(tau),
            Mat2::ZERO,
            Mat2::IDENTITY,
        ))
    }
}

/// H_delta = |p|^2/2 + delta (p1 q2 - p2 q1), the family interpolating
/// between the free Hamiltonian (delta -> 0) and H0 (delta = 1).
#[derive(Debug, Clone, Copy)]
pub struct ScaledHamiltonian {
    pub delta: f64,
}

impl ScaledHamiltonian {
    pub fn new(delta: f64) -> Self {
        ScaledHamiltonian { delta }
    }
}

impl Hamiltonian for ScaledHamiltonian {
    fn value(&self, x: PhasePoint) -> f64 {
        0.5 * x.p.norm_sq() + self.delta * corotating_momentum(x)
    }

    fn field(&self, x: PhasePoint) -> [f64; 4] {
        let qdot = x.p + j2(x.q).scale(self.delta);
        let pdot = j2(x.p).scale(self.delta);
        [qdot.x, qdot.y, pdot.x, pdot.y]
    }

    fn field_jacobian(&self, _x: PhasePoint) -> Mat4 {
        let j = Mat2([[0.0, 1.0], [-1.0, 0.0]]).scale(self.delta);
        Mat4::from_blocks(j, Mat2::IDENTITY, Mat2::ZERO, j)
    }

    fn linearized_flow(&self, _x0: PhasePoint, tau: f64) -> Option<Mat4> {
        let r = rotation(self.delta * tau);
        Some(Mat4::from_blocks(r, r.scale(tau), Mat2::ZERO, r))
    }
}

/// The symplectic dilation (q, p) -> (sqrt(delta) q, p / sqrt(delta)).
pub fn dilate(delta: f64, x: PhasePoint) -> PhasePoint {
    let s = delta.sqrt();
    PhasePoint::new(x.q.scale(s), x.p.scale(1.0 / s))
}

/// A potential on the plane given in polar form, with analytic derivatives.
/// The angle argument is the counterclockwise theta of `to_polar`.
pub trait Potential: Sync {
    fn value(&self, r: f64, theta: f64) -> f64;
    fn d_r(&self, r: f64, theta: f64) -> f64;
    fn d_theta(&self, _r: f64, _theta: f64) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroPotential;

impl Potential for ZeroPotential {
    fn value(&self, _r: f64, _theta: f64) -> f64 {
        0.0
    }
    fn d_r(&self, _r: f64, _theta: f64) -> f64 {
        0.0
    }
}

/// V = a / r^alpha, defined away from the origin.
#[derive(Debug, Clone, Copy)]
pub struct PowerLaw {
    pub a: f64,
    pub alpha: f64,
}

impl Potential for PowerLaw {
    fn value(&self, r: f64, _theta: f64) -> f64 {
        self.a * r.powf(-self.alpha)
    }
    fn d_r(&self, r: f64, _theta: f64) -> f64 {
        -self.a * self.alpha * r.powf(-self.alpha - 1.0)
    }
}

/// V = a / (r^2 + s^2)^(alpha/2): smooth on the whole plane, dominated by
/// a / r^alpha, with |dV/dr| <= a alpha / r^(alpha+1) everywhere and
/// sup V = a / s^alpha.
#[derive(Debug, Clone, Copy)]
pub struct SoftenedPower {
    pub a: f64,
    pub alpha: f64,
    pub soften: f64,
}

impl Potential for SoftenedPower {
    fn value(&self, r: f64, _theta: f64) -> f64 {
        self.a * (r * r + self.soften * self.soften).powf(-0.5 * self.alpha)
    }
    fn d_r(&self, r: f64, _theta: f64) -> f64 {
        let u = r * r + self.soften * self.soften;
        -self.a * self.alpha * r * u.powf(-0.5 * self.alpha - 1.0)
    }
}

impl SoftenedPower {
    pub fn sup(&self) -> f64 {
        self.a * self.soften.powf(-self.alpha)
    }
}

/// H = H0 - V at a target level c.
pub struct PerturbedHamiltonian<P: Potential> {
    pub potential: P,
    pub c: f64,
}

impl<P: Potential> PerturbedHamiltonian<P> {
    pub fn new(potential: P, c: f64) -> Self {
        PerturbedHamiltonian { potential, c }
    }

    fn grad_v(&self, q: Vec2) -> Vec2 {
        let r = q.norm();
        if r == 0.0 {
            return Vec2::ZERO;
        }
        let theta = q.y.atan2(q.x);
        let vr = self.potential.d_r(r, theta);
        let vt = self.potential.d_theta(r, theta);
        q.scale(vr / r) + q.perp().scale(vt / (r * r))
    }
}

impl<P: Potential> Hamiltonian for PerturbedHamiltonian<P> {
    fn value(&self, x: PhasePoint) -> f64 {
        let r = x.q.norm();
        let theta = if r == 0.0 { 0.0 } else { x.q.y.atan2(x.q.x) };
        h0_eval(x) - self.potential.value(r, theta)
    }

    fn field(&self, x: PhasePoint) -> [f64; 4] {
        let qdot = x.p + j2(x.q);
        let pdot = j2(x.p) + self.grad_v(x.q);
        [qdot.x, qdot.y, pdot.x, pdot.y]
    }
}

/// Polar components of X_(H0 - V) in the chart (r, clockwise angle, p_r, l)
/// with l = p1 q2 - p2 q1: returns (p_r, 1 + l/r^2, l^2/r^3 + dV/dr, ldot).
pub fn perturbed_vector_field<P: Potential>(
    h: &PerturbedHamiltonian<P>,
    x: PhasePoint,
) -> Result<[f64; 4]> {
    let r = x.q.norm();
    if r == 0.0 {
        return Err(Error::ZeroRadius);
    }
    let theta = x.q.y.atan2(x.q.x);
    let ell = corotating_momentum(x);
    let p_r = x.q.dot(x.p) / r;
    Ok([
        p_r,
        1.0 + ell / (r * r),
        ell * ell / (r * r * r) + h.potential.d_r(r, theta),
        -h.potential.d_theta(r, theta),
    ])
}

/// Push rates (rdot, clockwise-angle rate, p_r dot, ldot) at x forward to
/// Cartesian (qdot, pdot).
pub fn polar_pushforward(x: PhasePoint, rates: [f64; 4]) -> Result<[f64; 4]> {
    let r = x.q.norm();
    if r == 0.0 {
        return Err(Error::ZeroRadius);
    }
    let theta = x.q.y.atan2(x.q.x);
    let (s, c) = theta.sin_cos();
    let e_r = Vec2::new(c, s);
    let e_t = Vec2::new(-s, c);
    let ell = corotating_momentum(x);
    let p_r = x.q.dot(x.p) / r;
    let [rdot, u, prdot, ldot] = rates;
    let qdot = e_r.scale(rdot) - e_t.scale(r * u);
    let pdot = e_r.scale(prdot - ell / r * u) + e_t.scale(-p_r * u - ldot / r + ell * rdot / (r * r));
    Ok([qdot.x, qdot.y, pdot.x, pdot.y])
}

/// A claimed member of the perturbation class: positive, with dh vanishing
/// wherever |q| exceeds `support_radius`.
pub struct PerturbationCandidate<'a> {
    pub h: &'a (dyn Fn(PhasePoint) -> f64 + Sync),
    pub gradient: &'a (dyn Fn(PhasePoint) -> [f64; 4] + Sync),
    pub support_radius: f64,
}

/// Sampling resolution for `class_H_check`.  The grid runs over
/// (r, theta, |p|) with `momentum_angles` directions of p at each node,
/// covering the support radius dilated by 1.5.  A `p_max` of zero means
/// 1.5 times the support radius.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub n: usize,
    pub momentum_angles: usize,
    pub p_max: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { n: 64, momentum_angles: 4, p_max: 0.0 }
    }
}

#[derive(Debug, Clone)]
pub struct ClassHReport {
    pub member: bool,
    /// min over the grid of h - dh(p d/dp), minus a 1e-9 safety margin.
    pub c_estimate: f64,
    pub h_min: f64,
    /// largest |dh| seen outside the claimed support box
    pub gradient_leak: f64,
    pub violations: Vec<(PhasePoint, String)>,
}

/// Grid verification of membership in the perturbation class: h > 0,
/// h - dh(p d/dp) > 0, and dh vanishing outside the claimed support.
pub fn class_h_check(cand: &PerturbationCandidate, grid: GridSpec) -> ClassHReport {
    let n = grid.n.max(2);
    let reach = 1.5 * cand.support_radius;
    let p_max = if grid.p_max > 0.0 { grid.p_max } else { reach };
    let leak_tol = 1e-8;

    struct Acc {
        c_min: f64,
        h_min: f64,
        leak: f64,
        violations: Vec<(PhasePoint, String)>,
    }
    let identity = || Acc { c_min: f64::INFINITY, h_min: f64::INFINITY, leak: 0.0, violations: Vec::new() };

    let acc = (0..n)
        .into_par_iter()
        .map(|ir| {
            let mut a = identity();
            let r = reach * (ir + 1) as f64 / n as f64;
            for it in 0..n {
                let theta = 2.0 * std::f64::consts::PI * it as f64 / n as f64;
                let q = Vec2::new(r * theta.cos(), r * theta.sin());
                for ip in 0..n {
                    let pn = p_max * ip as f64 / (n - 1) as f64;
                    for ia in 0..grid.momentum_angles {
                        let psi = 2.0 * std::f64::consts::PI * ia as f64
                            / grid.momentum_angles as f64;
                        let x = PhasePoint::new(q, Vec2::new(pn * psi.cos(), pn * psi.sin()));
                        let hv = (cand.h)(x);
                        let g = (cand.gradient)(x);
                        let pairing = g[2] * x.p.x + g[3] * x.p.y;
                        let ch = hv - pairing;
                        a.c_min = a.c_min.min(ch);
                        a.h_min = a.h_min.min(hv);
                        if hv <= 0.0 && a.violations.len() < 16 {
                            a.violations.push((x, format!("h = {hv:.6e} is not positive")));
                        }
                        if ch <= 0.0 && a.violations.len() < 16 {
                            a.violations
                                .push((x, format!("h - dh(p d/dp) = {ch:.6e} is not positive")));
                        }
                        if r > cand.support_radius {
                            let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
                            a.leak = a.leak.max(gnorm);
                            if gnorm >= leak_tol && a.violations.len() < 16 {
                                a.violations.push((
                                    x,
                                    format!("|dh| = {gnorm:.6e} outside the claimed support"),
                                ));
                            }
                        }
                    }
                }
            }
            a
        })
        .reduce(identity, |mut l, mut r| {
            l.c_min = l.c_min.min(r.c_min);
            l.h_min = l.h_min.min(r.h_min);
            l.leak = l.leak.max(r.leak);
            l.violations.append(&mut r.violations);
            l.violations.truncate(16);
            l
        });

    let c_estimate = acc.c_min - 1e-9;
    ClassHReport {
        member: acc.violations.is_empty() && c_estimate > 0.0,
        c_estimate,
        h_min: acc.h_min,
        gradient_leak: acc.leak,
        violations: acc.violations,
    }
}
