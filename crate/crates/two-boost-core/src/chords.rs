//! The multiplier equation for rotating-frame chords, its root finder, and
//! reconstruction of certified chords from roots.

use crate::error::{Error, Result};
use crate::hamiltonian::h0_eval;
use crate::symplectic::{rotation, PhasePoint, Vec2};

/// Endpoints and energy level of a chord boundary value problem for H0.
#[derive(Debug, Clone, Copy)]
pub struct TwoBoostProblem {
    pub q0: Vec2,
    pub q1: Vec2,
    pub c: f64,
}

impl TwoBoostProblem {
    pub fn new(q0: Vec2, q1: Vec2, c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() || !q0.is_finite() || !q1.is_finite() {
            return Err(Error::InvalidInput {
                detail: format!("need finite endpoints and c > 0, got c = {c}"),
            });
        }
        Ok(TwoBoostProblem { q0, q1, c })
    }

    pub fn coincident(&self) -> bool {
        self.q0.x == self.q1.x && self.q0.y == self.q1.y
    }

    fn inner(&self, s: f64) -> f64 {
        self.q1.dot(rotation(s).mul_vec(self.q0))
    }
}

/// f(eta) = -c eta^2 + eta q1.R(eta + pi/2) q0 + (|q0|^2 + |q1|^2)/2
///          - q1.R(eta) q0.  Zeros away from 0 are the multipliers of
/// energy-c chords from q0 to q1.
pub fn multiplier_function(prob: &TwoBoostProblem, eta: f64) -> f64 {
    -prob.c * eta * eta
        + eta * prob.inner(eta + std::f64::consts::FRAC_PI_2)
        + 0.5 * (prob.q0.norm_sq() + prob.q1.norm_sq())
        - prob.inner(eta)
}

/// f'(eta) = -eta (2c + q1.R(eta) q0).
pub fn multiplier_derivative(prob: &TwoBoostProblem, eta: f64) -> f64 {
    -eta * (2.0 * prob.c + prob.inner(eta))
}

/// The same function through polar data r0, r1 and the angle theta from q0
/// to q1, with both endpoints parametrized counterclockwise.
pub fn multiplier_function_polar(c: f64, r0: f64, r1: f64, theta: f64, eta: f64) -> f64 {
    -c * eta * eta - eta * r0 * r1 * (eta + theta).sin() + 0.5 * (r0 * r0 + r1 * r1)
        - r0 * r1 * (eta + theta).cos()
}

/// Radius delta_0 of the interval that contains every zero of f.
pub fn scan_radius(prob: &TwoBoostProblem) -> f64 {
    let m = prob.q0.norm() * prob.q1.norm();
    let s = prob.q0.norm() + prob.q1.norm();
    ((m * m + 2.0 * prob.c * s * s).sqrt() + m) / (2.0 * prob.c)
}

/// Magnitude scale of f over the scan window, used to normalize the residual
/// tolerance for accepted roots.
pub fn value_scale(prob: &TwoBoostProblem) -> f64 {
    let d0 = scan_radius(prob);
    let m = prob.q0.norm() * prob.q1.norm();
    prob.c * d0 * d0 + (1.0 + d0) * m + 0.5 * (prob.q0.norm_sq() + prob.q1.norm_sq()) + 1.0
}

/// Roots with |f'| at or below this are reported as degenerate.
pub fn derivative_tol(prob: &TwoBoostProblem) -> f64 {
    1e-8 * (1.0 + 2.0 * prob.c + prob.q0.norm() * prob.q1.norm())
}

#[derive(Debug, Clone, Copy)]
pub struct RootFindOptions {
    /// sample count for the sign-change scan; 0 picks max(4096, 40 delta_0)
    pub scan_points: usize,
    /// widens the scan window beyond [-delta_0, delta_0]
    pub window_factor: f64,
}

impl Default for RootFindOptions {
    fn default() -> Self {
        RootFindOptions { scan_points: 0, window_factor: 1.0 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Root {
    pub eta: f64,
    pub f_value: f64,
    pub f_prime: f64,
}

fn classify_root(prob: &TwoBoostProblem, eta: f64) -> Result<Root> {
    let dtol = derivative_tol(prob);
    let mut e = eta;
    let mut fp = multiplier_derivative(prob, e);
    if fp.abs() > dtol {
        e -= multiplier_function(prob, e) / fp;
        fp = multiplier_derivative(prob, e);
    }
    let fv = multiplier_function(prob, e);
    if fp.abs() <= dtol {
        return Err(Error::DegenerateRoot { eta: e, f_value: fv, f_prime: fp });
    }
    Ok(Root { eta: e, f_value: fv, f_prime: fp })
}

fn bisect(prob: &TwoBoostProblem, mut a: f64, mut fa: f64, mut b: f64) -> f64 {
    for _ in 0..200 {
        if (b - a).abs() <= 1e-13 * (1.0 + a.abs() + b.abs()) {
            break;
        }
        let m = 0.5 * (a + b);
        let fm = multiplier_function(prob, m);
        if fm == 0.0 {
            return m;
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// All zeros of the multiplier function, in ascending order.  Coincident
/// endpoints are rejected (the chord set there is the constant circle, see
/// `constant_circle`); a zero where f' nearly vanishes is an error asking
/// for a nudged energy.
pub fn find_roots(prob: &TwoBoostProblem, opts: RootFindOptions) -> Result<Vec<Root>> {
    if prob.coincident() {
        return Err(Error::CoincidentEndpoints);
    }
    let d0 = scan_radius(prob);
    // pad the window so zeros exactly at the bound still get bracketed
    let w = opts.window_factor.max(1.0) * d0 * (1.0 + 1e-9) + 1e-12;
    let n = if opts.scan_points == 0 {
        4096usize.max((40.0 * d0).ceil() as usize)
    } else {
        opts.scan_points.max(16)
    };

    let mut etas: Vec<f64> = Vec::new();
    let mut prev_e = -w;
    let mut prev_f = multiplier_function(prob, prev_e);
    for i in 1..=n {
        let e = -w + 2.0 * w * i as f64 / n as f64;
        let fe = multiplier_function(prob, e);
        if prev_f == 0.0 {
            etas.push(prev_e);
        } else if prev_f * fe < 0.0 {
            etas.push(bisect(prob, prev_e, prev_f, e));
        }
        prev_e = e;
        prev_f = fe;
    }
    if prev_f == 0.0 {
        etas.push(prev_e);
    }

    let mut roots = Vec::with_capacity(etas.len());
    for e in etas {
        roots.push(classify_root(prob, e)?);
    }
    roots.sort_by(|a, b| a.eta.total_cmp(&b.eta));
    roots.dedup_by(|a, b| (a.eta - b.eta).abs() <= 1e-9 * (1.0 + b.eta.abs()));

    let vtol = 1e-9 * value_scale(prob);
    for r in &roots {
        if r.f_value.abs() > vtol {
            return Err(Error::IntegrationFailure {
                detail: format!(
                    "root polish left |f({})| = {:.3e} above tolerance {:.3e}",
                    r.eta, r.f_value, vtol
                ),
            });
        }
    }
    Ok(roots)
}

/// Number of positive multipliers for the problem.
pub fn count_positive(prob: &TwoBoostProblem) -> Result<usize> {
    Ok(find_roots(prob, RootFindOptions::default())?
        .iter()
        .filter(|r| r.eta > 0.0)
        .count())
}

/// For q0 = q1 the multiplier 0 carries the circle of constant chords
/// { p : |p - center| = radius } on the energy level.
pub fn constant_circle(q0: Vec2, c: f64) -> Result<(Vec2, f64)> {
    let rad_sq = q0.norm_sq() + 2.0 * c;
    if rad_sq <= 0.0 {
        return Err(Error::EmptyFiber { radicand: rad_sq });
    }
    Ok((Vec2::new(-q0.y, q0.x), rad_sq.sqrt()))
}

/// A reconstructed chord with its certificate residuals.  The residuals are
/// measured against the Hamiltonian that produced the chord: boundary error
/// at the endpoints, max |H - c| over the samples, and the max deviation of
/// the sample derivative from eta times the Hamiltonian field.
#[derive(Debug, Clone)]
pub struct Chord {
    pub eta: f64,
    pub c: f64,
    pub q0: Vec2,
    pub q1: Vec2,
    pub samples: Vec<PhasePoint>,
    pub residual_boundary: f64,
    pub residual_energy: f64,
    pub residual_ode: f64,
}

impl Chord {
    pub fn segments(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn initial_momentum(&self) -> Vec2 {
        self.samples[0].p
    }
}

fn rotating_chord_point(prob: &TwoBoostProblem, eta: f64, t: f64) -> PhasePoint {
    let r0 = rotation(t * eta);
    let r1 = rotation(eta * (t - 1.0));
    let q = r0.mul_vec(prob.q0).scale(1.0 - t) + r1.mul_vec(prob.q1).scale(t);
    let p = (r1.mul_vec(prob.q1) - r0.mul_vec(prob.q0)).scale(1.0 / eta);
    PhasePoint::new(q, p)
}

fn rotating_chord_velocity(prob: &TwoBoostProblem, eta: f64, t: f64) -> [f64; 4] {
    use std::f64::consts::FRAC_PI_2;
    let r0 = rotation(t * eta);
    let r1 = rotation(eta * (t - 1.0));
    let r0s = rotation(t * eta + FRAC_PI_2);
    let r1s = rotation(eta * (t - 1.0) + FRAC_PI_2);
    let qdot = r0.mul_vec(prob.q0).scale(-1.0)
        + r0s.mul_vec(prob.q0).scale((1.0 - t) * eta)
        + r1.mul_vec(prob.q1)
        + r1s.mul_vec(prob.q1).scale(t * eta);
    let pdot = r1s.mul_vec(prob.q1) - r0s.mul_vec(prob.q0);
    [qdot.x, qdot.y, pdot.x, pdot.y]
}

/// Reconstruct the chord for a multiplier eta in closed form, sampled at
/// n + 1 equally spaced parameters, with residuals certified against H0.
pub fn chord_from_eta(prob: &TwoBoostProblem, eta: f64, n: usize) -> Result<Chord> {
    if eta == 0.0 {
        return Err(Error::ZeroMultiplier);
    }
    if n < 2 {
        return Err(Error::InvalidInput { detail: format!("need at least 2 segments, got {n}") });
    }
    let mut samples = Vec::with_capacity(n + 1);
    let mut res_energy: f64 = 0.0;
    let mut res_ode: f64 = 0.0;
    for i in 0..=n {
        let t = i as f64 / n as f64;
        let x = rotating_chord_point(prob, eta, t);
        res_energy = res_energy.max((h0_eval(x) - prob.c).abs());
        let v = rotating_chord_velocity(prob, eta, t);
        let field = crate::hamiltonian::h0_vector_field(x);
        for k in 0..4 {
            res_ode = res_ode.max((v[k] - eta * field[k]).abs());
        }
        samples.push(x);
    }
    let res_boundary = (samples[0].q - prob.q0)
        .norm()
        .max((samples[n].q - prob.q1).norm());
    Ok(Chord {
        eta,
        c: prob.c,
        q0: prob.q0,
        q1: prob.q1,
        samples,
        residual_boundary: res_boundary,
        residual_energy: res_energy,
        residual_ode: res_ode,
    })
}

/// The two straight chords of the free Hamiltonian |p|^2 / 2 at energy c,
/// with multipliers +-|q1 - q0| / sqrt(2c).
pub fn free_chords(q0: Vec2, q1: Vec2, c: f64, n: usize) -> Result<(Chord, Chord)> {
    if !(c > 0.0) {
        return Err(Error::InvalidInput { detail: format!("need c > 0, got {c}") });
    }
    let dq = q1 - q0;
    let gap = dq.norm();
    if gap == 0.0 {
        return Err(Error::CoincidentEndpoints);
    }
    let build = |sign: f64| -> Chord {
        let eta = sign * gap / (2.0 * c).sqrt();
        let p = dq.scale(1.0 / eta);
        let mut samples = Vec::with_capacity(n + 1);
        let mut res_energy: f64 = 0.0;
        let mut res_ode: f64 = 0.0;
        for i in 0..=n {
            let t = i as f64 / n as f64;
            let x = PhasePoint::new(q0 + dq.scale(t), p);
            res_energy = res_energy.max((0.5 * x.p.norm_sq() - c).abs());
            // derivative of the line is dq; the field is (p, 0)
            res_ode = res_ode
                .max((dq.x - eta * p.x).abs())
                .max((dq.y - eta * p.y).abs());
            samples.push(x);
        }
        let res_boundary = (samples[0].q - q0).norm().max((samples[n].q - q1).norm());
        Chord {
            eta,
            c,
            q0,
            q1,
            samples,
            residual_boundary: res_boundary,
            residual_energy: res_energy,
            residual_ode: res_ode,
        }
    };
    Ok((build(1.0), build(-1.0)))
}

/// Parity diagnostics for the full root list of a problem.
#[derive(Debug, Clone)]
pub struct ParityReport {
    pub roots: Vec<Root>,
    pub n_pos: usize,
    pub n_neg: usize,
    pub odd_counts: bool,
    pub alternating: bool,
    pub extremal_positive_slope_negative: bool,
}

impl ParityReport {
    pub fn ok(&self) -> bool {
        self.odd_counts && self.alternating && self.extremal_positive_slope_negative
    }
}

pub fn parity_report(prob: &TwoBoostProblem) -> Result<ParityReport> {
    let roots = find_roots(prob, RootFindOptions::default())?;
    let n_pos = roots.iter().filter(|r| r.eta > 0.0).count();
    let n_neg = roots.iter().filter(|r| r.eta < 0.0).count();
    let odd_counts = n_pos % 2 == 1 && n_neg % 2 == 1;
    let mut alternating = !roots.is_empty() && roots[0].f_prime > 0.0;
    for w in roots.windows(2) {
        if w[0].f_prime * w[1].f_prime >= 0.0 {
            alternating = false;
        }
    }
    if let Some(last) = roots.last() {
        if last.f_prime >= 0.0 {
            alternating = false;
        }
    }
    let positives: Vec<&Root> = roots.iter().filter(|r| r.eta > 0.0).collect();
    let extremal_positive_slope_negative = match (positives.first(), positives.last()) {
        (Some(a), Some(b)) => a.f_prime < 0.0 && b.f_prime < 0.0,
        _ => false,
    };
    Ok(ParityReport {
        roots,
        n_pos,
        n_neg,
        odd_counts,
        alternating,
        extremal_positive_slope_negative,
    })
}

/// `asymptotic_lower_bound` fed directly from a problem's polar data.
pub fn asymptotic_lower_bound_for(prob: &TwoBoostProblem) -> usize {
    let theta = prob.q1.y.atan2(prob.q1.x) - prob.q0.y.atan2(prob.q0.x);
    asymptotic_lower_bound(prob.c, prob.q0.norm(), prob.q1.norm(), theta)
}

#[derive(Debug, Clone, Copy)]
pub struct SweepRow {
    pub c: f64,
    pub n_plus: usize,
    pub n_minus: usize,
    pub lower_bound: usize,
}

/// Root counts against the asymptotic lower bound while the energy halves.
pub fn asymptotic_sweep(
    q0: Vec2,
    q1: Vec2,
    c_start: f64,
    halvings: usize,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(halvings + 1);
    let mut c = c_start;
    for _ in 0..=halvings {
        let prob = TwoBoostProblem::new(q0, q1, c)?;
        let roots = find_roots(&prob, RootFindOptions::default())?;
        rows.push(SweepRow {
            c,
            n_plus: roots.iter().filter(|r| r.eta > 0.0).count(),
            n_minus: roots.iter().filter(|r| r.eta < 0.0).count(),
            lower_bound: asymptotic_lower_bound_for(&prob),
        });
        c *= 0.5;
    }
    Ok(rows)
}

/// Count of integers in the open interval
/// (theta/pi + |r0 - r1| / (pi sqrt(2c)), theta/pi + (r0 + r1) / (pi sqrt(2c)) - 1),
/// a lower bound for the number of positive multipliers as c shrinks.
pub fn asymptotic_lower_bound(c: f64, r0: f64, r1: f64, theta: f64) -> usize {
    let th = theta.rem_euclid(2.0 * std::f64::consts::PI);
    let base = th / std::f64::consts::PI;
    let s = std::f64::consts::PI * (2.0 * c).sqrt();
    let lo = base + (r0 - r1).abs() / s;
    let hi = base + (r0 + r1) / s - 1.0;
    let count = (hi.ceil() - lo.floor() - 1.0).max(0.0);
    count as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_perp(c: f64) -> TwoBoostProblem {
        TwoBoostProblem::new(Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0), c).unwrap()
    }

    fn scatter(count: usize) -> Vec<(Vec2, Vec2)> {
        (0..count)
            .map(|k| {
                let t = k as f64 + 1.0;
                (
                    Vec2::new(
                        (t * 0.7548776662466927).fract() * 3.0 - 1.5,
                        (t * 0.5698402909980532).fract() * 3.0 - 1.5,
                    ),
                    Vec2::new(
                        (t * 0.3380515006246586).fract() * 3.0 - 1.5,
                        (t * 0.2425922818254192).fract() * 3.0 - 1.5,
                    ),
                )
            })
            .collect()
    }

    #[test]
    fn value_at_zero_is_half_gap_squared() {
        for (q0, q1) in scatter(50) {
            let prob = TwoBoostProblem::new(q0, q1, 0.7).unwrap();
            let f0 = multiplier_function(&prob, 0.0);
            assert!((f0 - 0.5 * (q1 - q0).norm_sq()).abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_anchor_unit_perp() {
        let prob = unit_perp(0.5);
        let fp = multiplier_derivative(&prob, 1.0);
        assert!((fp + (1.0 - 1.0f64.sin())).abs() < 1e-14);
    }

    #[test]
    fn derivative_matches_finite_differences() {
        for (q0, q1) in scatter(30) {
            let prob = TwoBoostProblem::new(q0, q1, 0.4).unwrap();
            for &eta in &[-3.0, -0.7, 0.3, 1.9, 5.2] {
                let h = 1e-6;
                let fd = (multiplier_function(&prob, eta + h)
                    - multiplier_function(&prob, eta - h))
                    / (2.0 * h);
                assert!((fd - multiplier_derivative(&prob, eta)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn polar_form_agrees_with_cartesian() {
        for k in 0..40 {
            let t = k as f64 + 1.0;
            let r0 = 0.3 + (t * 0.754877).fract() * 2.0;
            let r1 = 0.3 + (t * 0.569840).fract() * 2.0;
            let alpha = (t * 0.338051).fract() * 6.0;
            let theta = (t * 0.242592).fract() * 6.0;
            let c = 0.1 + (t * 0.137187).fract();
            let q0 = Vec2::new(r0 * alpha.cos(), r0 * alpha.sin());
            let q1 = Vec2::new(r1 * (alpha + theta).cos(), r1 * (alpha + theta).sin());
            let prob = TwoBoostProblem::new(q0, q1, c).unwrap();
            for &eta in &[-2.0, 0.5, 3.3] {
                let a = multiplier_function(&prob, eta);
                let b = multiplier_function_polar(c, r0, r1, theta, eta);
                assert!((a - b).abs() < 1e-11, "eta = {eta}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn aligned_angles_collapse_to_parabola() {
        let r0 = 1.3;
        let r1 = 0.8;
        let c = 0.25;
        for n in 1..4 {
            let eta = 2.0 * std::f64::consts::PI * n as f64 - 1.1;
            let f = multiplier_function_polar(c, r0, r1, 1.1, eta);
            let expected = -c * eta * eta + 0.5 * (r0 - r1) * (r0 - r1);
            assert!((f - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn scan_radius_anchors() {
        let p5 = unit_perp(0.2);
        assert!((scan_radius(&p5) - 6.5311).abs() < 1e-3);
        assert!(scan_radius(&p5) <= 7.5);
        let p20 = unit_perp(0.05);
        assert!(scan_radius(&p20) < 22.0);
    }

    #[test]
    fn unique_positive_root_at_half() {
        let prob = unit_perp(0.5);
        let roots = find_roots(&prob, RootFindOptions::default()).unwrap();
        let pos: Vec<&Root> = roots.iter().filter(|r| r.eta > 0.0).collect();
        assert_eq!(pos.len(), 1);
        assert!((pos[0].eta - 2.829).abs() < 2e-3, "eta = {}", pos[0].eta);
    }

    #[test]
    fn figure_counts_one_three_five() {
        for (c, expected) in [(0.2, 1usize), (0.1, 3), (0.05, 5)] {
            let prob = unit_perp(c);
            assert_eq!(count_positive(&prob).unwrap(), expected, "c = {c}");
        }
    }

    #[test]
    fn high_energy_gives_exactly_one_pair() {
        for (q0, q1) in scatter(40) {
            if (q1 - q0).norm() < 1e-6 {
                continue;
            }
            let c = 0.5 * q0.norm() * q1.norm() + 0.3;
            let prob = TwoBoostProblem::new(q0, q1, c).unwrap();
            let roots = find_roots(&prob, RootFindOptions::default()).unwrap();
            let n_pos = roots.iter().filter(|r| r.eta > 0.0).count();
            let n_neg = roots.iter().filter(|r| r.eta < 0.0).count();
            assert_eq!((n_pos, n_neg), (1, 1), "q0 = {q0:?}, q1 = {q1:?}");
        }
    }

    #[test]
    fn wide_scan_finds_nothing_outside_radius() {
        for (q0, q1) in scatter(20) {
            if (q1 - q0).norm() < 1e-6 {
                continue;
            }
            let prob = TwoBoostProblem::new(q0, q1, 0.15).unwrap();
            let wide = find_roots(
                &prob,
                RootFindOptions { scan_points: 0, window_factor: 3.0 },
            )
            .unwrap();
            let d0 = scan_radius(&prob);
            for r in wide {
                assert!(r.eta.abs() <= d0 + 1e-9);
            }
        }
    }

    #[test]
    fn swapped_endpoints_mirror_the_roots() {
        for (q0, q1) in scatter(25) {
            let prob = TwoBoostProblem::new(q0, q1, 0.3).unwrap();
            let swapped = TwoBoostProblem::new(q1, q0, 0.3).unwrap();
            for &eta in &[-4.0, -1.2, 0.8, 2.5, 6.0] {
                let a = multiplier_function(&prob, eta);
                let b = multiplier_function(&swapped, -eta);
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn simultaneous_rotation_leaves_f_unchanged() {
        for (q0, q1) in scatter(25) {
            let prob = TwoBoostProblem::new(q0, q1, 0.3).unwrap();
            let s = rotation(0.83);
            let rotated =
                TwoBoostProblem::new(s.mul_vec(q0), s.mul_vec(q1), 0.3).unwrap();
            for &eta in &[-2.0, 0.5, 4.4] {
                let a = multiplier_function(&prob, eta);
                let b = multiplier_function(&rotated, eta);
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn coincident_endpoints_have_only_the_zero_root() {
        let q = Vec2::new(0.6, -0.2);
        let c = 0.5;
        assert!(q.norm_sq() <= 2.0 * c);
        let prob = TwoBoostProblem::new(q, q, c).unwrap();
        assert_eq!(multiplier_function(&prob, 0.0), 0.0);
        let d0 = scan_radius(&prob);
        let n = 20000;
        let mut prev = multiplier_function(&prob, -d0);
        for i in 1..=n {
            let eta = -d0 + 2.0 * d0 * i as f64 / n as f64;
            let f = multiplier_function(&prob, eta);
            assert!(
                prev * f > 0.0 || eta.abs() < 2.0 * d0 / n as f64 * 2.0,
                "unexpected sign change near eta = {eta}"
            );
            prev = f;
        }
        assert!(matches!(
            find_roots(&prob, RootFindOptions::default()),
            Err(Error::CoincidentEndpoints)
        ));
        let (center, radius) = constant_circle(q, c).unwrap();
        assert_eq!(center, Vec2::new(0.2, 0.6));
        assert!((radius - (q.norm_sq() + 2.0 * c).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn manufactured_tangency_reports_degenerate() {
        // c = 0.3 with theta chosen so that f(4) = f'(4) = 0 exactly
        let c = 0.3;
        let theta = (-0.8f64).atan2(-0.6) - 4.0 + 2.0 * std::f64::consts::PI;
        let q0 = Vec2::new(1.0, 0.0);
        let q1 = Vec2::new(theta.cos(), theta.sin());
        let prob = TwoBoostProblem::new(q0, q1, c).unwrap();
        assert!(multiplier_function(&prob, 4.0).abs() < 1e-12);
        assert!(multiplier_derivative(&prob, 4.0).abs() < 1e-12);
        assert!(matches!(
            classify_root(&prob, 4.0),
            Err(Error::DegenerateRoot { .. })
        ));
    }

    #[test]
    fn chords_from_roots_are_certified() {
        for c in [0.2, 0.1, 0.05] {
            let prob = unit_perp(c);
            for root in find_roots(&prob, RootFindOptions::default()).unwrap() {
                let chord = chord_from_eta(&prob, root.eta, 256).unwrap();
                assert!(chord.residual_boundary <= 1e-10);
                assert!(chord.residual_energy <= 1e-8, "energy {}", chord.residual_energy);
                assert!(chord.residual_ode <= 1e-6, "ode {}", chord.residual_ode);
                assert_eq!(chord.samples.len(), 257);
            }
        }
    }

    #[test]
    fn chord_momentum_matches_closed_form() {
        let prob = unit_perp(0.5);
        let roots = find_roots(&prob, RootFindOptions::default()).unwrap();
        let eta = roots.iter().find(|r| r.eta > 0.0).unwrap().eta;
        let chord = chord_from_eta(&prob, eta, 64).unwrap();
        let p0 = (rotation(-eta).mul_vec(prob.q1) - prob.q0).scale(1.0 / eta);
        assert!((chord.initial_momentum() - p0).norm() < 1e-14);
    }

    #[test]
    fn zero_multiplier_is_rejected() {
        let prob = unit_perp(0.5);
        assert!(matches!(chord_from_eta(&prob, 0.0, 16), Err(Error::ZeroMultiplier)));
    }

    #[test]
    fn free_chords_sit_on_the_level_exactly() {
        let q0 = Vec2::new(0.0, 0.0);
        let q1 = Vec2::new(1.0, 1.0);
        let (plus, minus) = free_chords(q0, q1, 1.0, 128).unwrap();
        assert!((plus.eta - 1.0).abs() < 1e-15);
        assert!((minus.eta + 1.0).abs() < 1e-15);
        for ch in [&plus, &minus] {
            assert!(ch.residual_boundary == 0.0);
            assert!(ch.residual_energy <= 1e-12);
            assert!(ch.residual_ode <= 1e-12);
            assert!((ch.initial_momentum().norm() - 2.0f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn parity_holds_on_figure_cases() {
        for c in [0.2, 0.1, 0.05] {
            let report = parity_report(&unit_perp(c)).unwrap();
            assert!(report.ok(), "c = {c}: {report:?}");
        }
    }

    #[test]
    fn parity_holds_on_scattered_problems() {
        let mut checked = 0;
        for (q0, q1) in scatter(40) {
            if (q1 - q0).norm() < 1e-3 || q0.norm() < 1e-3 || q1.norm() < 1e-3 {
                continue;
            }
            let prob = TwoBoostProblem::new(q0, q1, 0.21).unwrap();
            match parity_report(&prob) {
                Ok(report) => {
                    assert!(report.ok(), "q0 = {q0:?}, q1 = {q1:?}: {report:?}");
                    checked += 1;
                }
                Err(Error::DegenerateRoot { .. }) => {}
                Err(e) => panic!("unexpected error {e}"),
            }
        }
        assert!(checked > 30);
    }

    #[test]
    fn lower_bound_worked_example() {
        assert_eq!(
            asymptotic_lower_bound(0.05, 1.0, 1.0, std::f64::consts::FRAC_PI_2),
            1
        );
    }

    #[test]
    fn lower_bound_respects_open_interval() {
        // lo = 0.5, hi exactly 1 leaves nothing inside
        let c = 2.0 / (std::f64::consts::PI * std::f64::consts::PI);
        // r0 + r1 chosen so hi = theta/pi + (r0+r1)/(pi sqrt(2c)) - 1 = 1
        // with theta = pi/2: (r0 + r1) / 2 = 1.5 => r0 + r1 = 3, r0 = r1 = 1.5
        let n = asymptotic_lower_bound(c, 1.5, 1.5, std::f64::consts::FRAC_PI_2);
        assert_eq!(n, 0);
    }

    #[test]
    fn lower_bound_grows_as_energy_shrinks() {
        let mut last = 0;
        for &c in &[0.2, 0.05, 0.0125, 0.003125] {
            let n = asymptotic_lower_bound(c, 1.0, 1.0, std::f64::consts::FRAC_PI_2);
            assert!(n >= last);
            last = n;
        }
        assert!(last >= 4);
    }
}
