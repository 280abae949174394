//! Truncation of a decaying potential to a compactly supported perturbation:
//! decay hypothesis checks, the chord radius/momentum bounds, the cutoff
//! profile phi = chi0(r) chi1(H0), the truncated Hamiltonian H1 = H0 - phi V,
//! and grid verification that the radial trap set stays inside phi^{-1}(1).

use crate::error::{Error, Result};
use crate::hamiltonian::{h0_eval, Hamiltonian, Potential};
use crate::symplectic::{PhasePoint, Vec2};

/// The fixed quintic step: 1 on (-inf, 0], 0 on [1, inf), monotone in
/// between with |slope| <= 15/8 and continuous second derivative.
#[derive(Debug, Clone, Copy, Default)]
pub struct SmoothStep;

impl SmoothStep {
    pub fn value(self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else if x >= 1.0 {
            0.0
        } else {
            1.0 - x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
        }
    }

    pub fn derivative(self, x: f64) -> f64 {
        if x <= 0.0 || x >= 1.0 {
            0.0
        } else {
            -30.0 * x * x * (x - 1.0) * (x - 1.0)
        }
    }

    pub fn second_derivative(self, x: f64) -> f64 {
        if x <= 0.0 || x >= 1.0 {
            0.0
        } else {
            -60.0 * x * (2.0 * x - 1.0) * (x - 1.0)
        }
    }
}

/// A potential claiming the decay hypothesis V <= a/r^alpha for r > r0,
/// with the radial derivative decaying one order faster.
pub struct DecayPotential<P: Potential> {
    pub potential: P,
    pub a: f64,
    pub alpha: f64,
    pub r0: f64,
}

impl<P: Potential> Potential for DecayPotential<P> {
    fn value(&self, r: f64, theta: f64) -> f64 {
        self.potential.value(r, theta)
    }

    fn d_r(&self, r: f64, theta: f64) -> f64 {
        self.potential.d_r(r, theta)
    }

    fn d_theta(&self, r: f64, theta: f64) -> f64 {
        self.potential.d_theta(r, theta)
    }
}

const ANGLES: usize = 16;

impl<P: Potential> DecayPotential<P> {
    pub fn new(potential: P, a: f64, alpha: f64, r0: f64) -> Result<Self> {
        if !(a > 0.0) || !(r0 > 0.0) || !(alpha >= 2.0) {
            return Err(Error::InvalidInput {
                detail: "decay data needs a > 0, r0 > 0, alpha >= 2".into(),
            });
        }
        Ok(DecayPotential { potential, a, alpha, r0 })
    }

    /// Sampled verification of the decay hypothesis at target energy c.
    pub fn verify(&self, c: f64) -> Result<()> {
        if c <= 0.0 {
            return Err(Error::InvalidInput { detail: "c must be positive".into() });
        }
        if self.alpha == 2.0 && self.a >= c * c / 4.0 {
            return Err(Error::DecayHypothesis {
                detail: format!(
                    "alpha = 2 requires a in (0, c^2/4): a = {}, c^2/4 = {}",
                    self.a,
                    c * c / 4.0
                ),
            });
        }
        let slack = 1.0 + 1e-9;
        for j in 0..ANGLES {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / ANGLES as f64;
            for k in 0..32 {
                let r = self.r0 * (k + 1) as f64 / 32.0;
                if self.value(r, theta) < -1e-12 {
                    return Err(Error::DecayHypothesis {
                        detail: format!("V({r}, {theta}) is negative"),
                    });
                }
            }
            for k in 1..=200 {
                let r = self.r0 * 1000f64.powf(k as f64 / 200.0);
                let v = self.value(r, theta);
                if v < -1e-12 {
                    return Err(Error::DecayHypothesis {
                        detail: format!("V({r}, {theta}) is negative"),
                    });
                }
                if v > self.a / r.powf(self.alpha) * slack {
                    return Err(Error::DecayHypothesis {
                        detail: format!(
                            "V({r}, {theta}) = {v} exceeds a/r^alpha = {}",
                            self.a / r.powf(self.alpha)
                        ),
                    });
                }
                let vr = self.d_r(r, theta);
                let floor = -self.a * self.alpha / r.powf(self.alpha + 1.0) * slack;
                if vr < floor {
                    return Err(Error::DecayHypothesis {
                        detail: format!("dV/dr({r}, {theta}) = {vr} falls below {floor}"),
                    });
                }
            }
        }
        Ok(())
    }

    /// Sampled estimate of sup V over the ball r <= radius: grid maximum
    /// combined with the analytic tail bound at the ball edge.
    pub fn sup_on(&self, radius: f64) -> f64 {
        let mut sup = self.a / radius.powf(self.alpha);
        for j in 0..ANGLES {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / ANGLES as f64;
            for k in 1..=128 {
                let r = radius * k as f64 / 128.0;
                sup = sup.max(self.value(r, theta));
            }
        }
        sup
    }

    pub fn sup_v(&self) -> f64 {
        self.sup_on(self.r0)
    }
}

/// Confinement box for chords of H0 - V at energy c, two-sided in both
/// momenta.
#[derive(Debug, Clone, Copy)]
pub struct ChordBound {
    pub r_max: f64,
    pub pr_max: f64,
    pub ptheta_max: f64,
}

impl ChordBound {
    pub fn contains(&self, x: PhasePoint) -> bool {
        let r = x.q.norm();
        if r == 0.0 {
            return true;
        }
        let p_r = x.q.dot(x.p) / r;
        let ell = x.p.x * x.q.y - x.p.y * x.q.x;
        r <= self.r_max && p_r.abs() <= self.pr_max && ell.abs() <= self.ptheta_max
    }

    /// Relatively inflated copy, for testing numerically certified chords
    /// whose endpoints sit exactly on the boundary of the exact box.
    pub fn padded(&self, rel: f64) -> ChordBound {
        ChordBound {
            r_max: self.r_max * (1.0 + rel),
            pr_max: self.pr_max * (1.0 + rel),
            ptheta_max: self.ptheta_max * (1.0 + rel),
        }
    }
}

/// Radius and momentum bounds confining every chord of H0 - V at energy c.
pub fn chord_radius_bound<P: Potential>(
    v: &DecayPotential<P>,
    c: f64,
    q0: Vec2,
    q1: Vec2,
) -> Result<ChordBound> {
    v.verify(c)?;
    let r1 = if v.alpha > 2.0 {
        (v.a * v.alpha / (c * c)).powf(1.0 / (v.alpha - 2.0))
    } else {
        (v.a / (c - (2.0 * v.a).sqrt())).sqrt()
    };
    let r1 = r1.max(v.r0).max(c.sqrt() / 2.0);
    let r_max = q0.norm().max(q1.norm()).max(r1);
    let pr_max = (r_max * r_max + 2.0 * (v.sup_on(r_max) + c)).sqrt();
    Ok(ChordBound { r_max, pr_max, ptheta_max: r_max * (r_max + pr_max) })
}

/// Geometry of the cutoff: chi0 falls from 1 to 0 over [R1, R1 + 1/beta],
/// chi1 over the energy band [supV + c, supV + c + 1].
#[derive(Debug, Clone, Copy)]
pub struct CutoffSpec {
    pub r1: f64,
    pub beta: f64,
    pub sup_v: f64,
    pub c: f64,
    pub step: SmoothStep,
}

impl CutoffSpec {
    pub fn chi0(&self, r: f64) -> f64 {
        self.step.value(self.beta * (r - self.r1))
    }

    /// d(chi0)/dr
    pub fn chi0_slope(&self, r: f64) -> f64 {
        self.beta * self.step.derivative(self.beta * (r - self.r1))
    }

    pub fn chi1(&self, h0: f64) -> f64 {
        self.step.value(h0 - self.sup_v - self.c)
    }

    pub fn chi1_slope(&self, h0: f64) -> f64 {
        self.step.derivative(h0 - self.sup_v - self.c)
    }

    pub fn outer_radius(&self) -> f64 {
        self.r1 + 1.0 / self.beta
    }
}

/// The cutoff data for truncating V outside the chord bounds.
pub fn cutoff_spec<P: Potential>(
    v: &DecayPotential<P>,
    c: f64,
    q0: Vec2,
    q1: Vec2,
) -> Result<CutoffSpec> {
    v.verify(c)?;
    let (r1, beta);
    if v.alpha > 2.0 {
        r1 = (8.0 * v.a * v.alpha / (c * c))
            .powf(1.0 / (v.alpha - 2.0))
            .max(q0.norm())
            .max(q1.norm())
            .max(v.r0)
            .max(c.sqrt() / 2.0);
        beta = (v.alpha - 2.0) / (2.0 * r1);
    } else {
        let s = 2.0 * v.a.sqrt();
        r1 = ((c + s) / (2.0 * (c - s).sqrt()))
            .max(q0.norm())
            .max(q1.norm())
            .max(v.r0)
            .max(c.sqrt() / 2.0);
        beta = ((c + s) * (c + s) - 16.0 * v.a) / (8.0 * v.a * r1);
    }
    if !(beta > 0.0) {
        return Err(Error::InvalidInput {
            detail: format!("cutoff slope came out non-positive: beta = {beta}"),
        });
    }
    Ok(CutoffSpec { r1, beta, sup_v: v.sup_v(), c, step: SmoothStep })
}

/// phi(x) = chi0(|q|) chi1(H0(x)), the profile multiplying V in H1.
pub fn phi_eval(spec: &CutoffSpec, x: PhasePoint) -> f64 {
    spec.chi0(x.q.norm()) * spec.chi1(h0_eval(x))
}

fn polar_of(q: Vec2) -> (f64, f64) {
    (q.norm(), q.y.atan2(q.x))
}

/// Gradient of phi as a cotangent 4-vector (d/dq, d/dp).
pub fn phi_gradient(spec: &CutoffSpec, x: PhasePoint) -> [f64; 4] {
    let (r, _) = polar_of(x.q);
    let h0 = h0_eval(x);
    let c0 = spec.chi0(r);
    let c1 = spec.chi1(h0);
    let s1 = spec.chi1_slope(h0);
    // dH0/dq = p^perp, dH0/dp = p - q^perp
    let h0_q = x.p.perp();
    let h0_p = x.p - x.q.perp();
    let mut gq = h0_q.scale(c0 * s1);
    if r > 0.0 {
        let s0 = spec.chi0_slope(r);
        if s0 != 0.0 {
            gq = gq + x.q.scale(c1 * s0 / r);
        }
    }
    let gp = h0_p.scale(c0 * s1);
    [gq.x, gq.y, gp.x, gp.y]
}

fn grad_v_cartesian<P: Potential>(v: &P, q: Vec2) -> Vec2 {
    let (r, theta) = polar_of(q);
    if r == 0.0 {
        return Vec2::ZERO;
    }
    q.scale(v.d_r(r, theta) / r) + q.perp().scale(v.d_theta(r, theta) / (r * r))
}

fn h1_value_raw<P: Potential>(spec: &CutoffSpec, v: &DecayPotential<P>, x: PhasePoint) -> f64 {
    let (r, theta) = polar_of(x.q);
    h0_eval(x) - phi_eval(spec, x) * v.value(r, theta)
}

fn h1_field_raw<P: Potential>(
    spec: &CutoffSpec,
    v: &DecayPotential<P>,
    x: PhasePoint,
) -> [f64; 4] {
    let (r, theta) = polar_of(x.q);
    let vv = v.value(r, theta);
    let phi = phi_eval(spec, x);
    let gphi = phi_gradient(spec, x);
    let gv = grad_v_cartesian(v, x.q);
    // X = (dH1/dp, -dH1/dq) with H1 = H0 - phi V
    let qdot = Vec2::new(
        (x.p.x - x.q.perp().x) - vv * gphi[2],
        (x.p.y - x.q.perp().y) - vv * gphi[3],
    );
    let pdot = Vec2::new(
        -x.p.perp().x + vv * gphi[0] + phi * gv.x,
        -x.p.perp().y + vv * gphi[1] + phi * gv.y,
    );
    [qdot.x, qdot.y, pdot.x, pdot.y]
}

/// H1 = H0 - phi V at x.
pub fn h1_eval<P: Potential>(
    spec: &CutoffSpec,
    v: &DecayPotential<P>,
    x: PhasePoint,
) -> Result<f64> {
    if x.q.norm() == 0.0 {
        return Err(Error::ZeroRadius);
    }
    Ok(h1_value_raw(spec, v, x))
}

/// Hamiltonian vector field of H1 in Cartesian components.
pub fn h1_vector_field<P: Potential>(
    spec: &CutoffSpec,
    v: &DecayPotential<P>,
    x: PhasePoint,
) -> Result<[f64; 4]> {
    if x.q.norm() == 0.0 {
        return Err(Error::ZeroRadius);
    }
    Ok(h1_field_raw(spec, v, x))
}

/// Gradient of the compactly supported perturbation phi V, for membership
/// checks of phi V + c in the perturbation class.
pub fn perturbation_gradient<P: Potential>(
    spec: &CutoffSpec,
    v: &DecayPotential<P>,
    x: PhasePoint,
) -> [f64; 4] {
    let (r, theta) = polar_of(x.q);
    let vv = v.value(r, theta);
    let phi = phi_eval(spec, x);
    let gphi = phi_gradient(spec, x);
    let gv = grad_v_cartesian(v, x.q);
    [
        vv * gphi[0] + phi * gv.x,
        vv * gphi[1] + phi * gv.y,
        vv * gphi[2],
        vv * gphi[3],
    ]
}

/// H1 as a Hamiltonian for integration, shooting, and index computation.
pub struct CutoffHamiltonian<'a, P: Potential> {
    pub spec: &'a CutoffSpec,
    pub potential: &'a DecayPotential<P>,
}

impl<P: Potential> Hamiltonian for CutoffHamiltonian<'_, P> {
    fn value(&self, x: PhasePoint) -> f64 {
        h1_value_raw(self.spec, self.potential, x)
    }

    fn field(&self, x: PhasePoint) -> [f64; 4] {
        h1_field_raw(self.spec, self.potential, x)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TrapGrid {
    pub n_r: usize,
    pub n_theta: usize,
}

impl Default for TrapGrid {
    fn default() -> Self {
        TrapGrid { n_r: 128, n_theta: 64 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TrapViolation {
    pub r: f64,
    pub theta: f64,
    pub ell: f64,
    pub second_bracket: f64,
}

#[derive(Debug, Clone)]
pub struct TrapSetReport {
    pub ok: bool,
    pub min_margin: f64,
    pub witness: (f64, f64, f64),
    pub points_checked: usize,
    pub violations: Vec<TrapViolation>,
    /// Some(true) when every violation sits at negative corotating momentum
    pub violations_only_negative_momentum: Option<bool>,
}

/// Grid check that on the transition band R1 < r < R1 + 1/beta no point of
/// H1^{-1}(c) with p_r = 0 has a non-positive second radial bracket. There
/// chi1 = 1 exactly, so the level condition pins the corotating momentum l
/// through l^2/2r^2 + l = c + chi0 V, and
/// {H1, {H1, r}} = l^2/r^3 + chi0 dV/dr + V dchi0/dr.
pub fn trap_set_check<P: Potential>(
    spec: &CutoffSpec,
    v: &DecayPotential<P>,
    grid: TrapGrid,
) -> Result<TrapSetReport> {
    v.verify(spec.c)?;
    let width = 1.0 / spec.beta;
    let mut report = TrapSetReport {
        ok: true,
        min_margin: f64::INFINITY,
        witness: (0.0, 0.0, 0.0),
        points_checked: 0,
        violations: Vec::new(),
        violations_only_negative_momentum: None,
    };
    for i in 0..grid.n_r {
        let r = spec.r1 + width * (i as f64 + 0.5) / grid.n_r as f64;
        let c0 = spec.chi0(r);
        let s0 = spec.chi0_slope(r);
        for j in 0..grid.n_theta {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / grid.n_theta as f64;
            let vv = v.value(r, theta);
            let vr = v.d_r(r, theta);
            let u = spec.c + c0 * vv;
            debug_assert!(spec.chi1(u) == 1.0, "chi1 must saturate on the trap slice");
            let radicand = 1.0 + 2.0 * u / (r * r);
            if radicand <= 0.0 {
                continue;
            }
            for sign in [1.0, -1.0] {
                let ell = r * r * (-1.0 + sign * radicand.sqrt());
                let second = ell * ell / (r * r * r) + c0 * vr + vv * s0;
                report.points_checked += 1;
                if second < report.min_margin {
                    report.min_margin = second;
                    report.witness = (r, theta, ell);
                }
                if second <= 0.0 {
                    report.ok = false;
                    if report.violations.len() < 32 {
                        report.violations.push(TrapViolation {
                            r,
                            theta,
                            ell,
                            second_bracket: second,
                        });
                    }
                }
            }
        }
    }
    if !report.violations.is_empty() {
        report.violations_only_negative_momentum =
            Some(report.violations.iter().all(|w| w.ell < 0.0));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{
        class_h_check, perturbed_vector_field, polar_pushforward, GridSpec,
        PerturbationCandidate, PerturbedHamiltonian, SoftenedPower,
    };

    fn soft(a: f64, alpha: f64) -> DecayPotential<SoftenedPower> {
        DecayPotential::new(SoftenedPower { a, alpha, soften: 1.0 }, a, alpha, 1.0).unwrap()
    }

    fn unit_endpoints() -> (Vec2, Vec2) {
        (Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0))
    }

    #[test]
    fn step_endpoint_and_slope_invariants() {
        let s = SmoothStep;
        assert_eq!(s.value(-1.0), 1.0);
        assert_eq!(s.value(0.0), 1.0);
        assert_eq!(s.value(1.0), 0.0);
        assert_eq!(s.value(2.0), 0.0);
        assert!((s.value(0.5) - 0.5).abs() < 1e-15);
        assert_eq!(s.derivative(0.0), 0.0);
        assert_eq!(s.derivative(1.0), 0.0);
        let mut steepest = 0.0f64;
        for k in 0..=1000 {
            let x = k as f64 / 1000.0;
            let d = s.derivative(x);
            assert!(d <= 0.0 && d > -2.0);
            steepest = steepest.min(d);
        }
        assert!((steepest + 15.0 / 8.0).abs() < 1e-12);
    }

    #[test]
    fn step_is_twice_differentiable_at_the_seams() {
        let s = SmoothStep;
        for x0 in [0.0, 1.0] {
            for h in [1e-4, 1e-5] {
                let fd2 = (s.value(x0 + h) - 2.0 * s.value(x0) + s.value(x0 - h)) / (h * h);
                assert!(fd2.abs() < 1e-2, "second derivative jumps at {x0}: {fd2}");
            }
            assert_eq!(s.second_derivative(x0), 0.0);
        }
        let fd = |x: f64, h: f64| (s.derivative(x + h) - s.derivative(x - h)) / (2.0 * h);
        for x in [0.25, 0.5, 0.75] {
            assert!((fd(x, 1e-6) - s.second_derivative(x)).abs() < 1e-5);
        }
    }

    #[test]
    fn decay_gate_accepts_and_rejects() {
        assert!(soft(0.1, 3.0).verify(1.0).is_ok());
        assert!(soft(0.2, 2.0).verify(1.0).is_ok());
        // declared envelope half the true one
        let lying =
            DecayPotential::new(SoftenedPower { a: 1.0, alpha: 3.0, soften: 1.0 }, 0.5, 3.0, 1.0)
                .unwrap();
        assert!(matches!(lying.verify(1.0), Err(Error::DecayHypothesis { .. })));
    }

    #[test]
    fn alpha_two_hypothesis_gate() {
        let err = soft(0.3, 2.0).verify(1.0).unwrap_err();
        match err {
            Error::DecayHypothesis { detail } => {
                assert!(detail.contains("(0, c^2/4)"), "{detail}");
            }
            other => panic!("wrong error {other:?}"),
        }
    }

    #[test]
    fn radius_bound_anchor() {
        let (q0, q1) = unit_endpoints();
        let v = soft(1.0, 3.0);
        let b = chord_radius_bound(&v, 1.0, q0, q1).unwrap();
        assert_eq!(b.r_max, 3.0);
        let sup = v.sup_on(3.0);
        assert!((b.pr_max - (9.0 + 2.0 * (sup + 1.0)).sqrt()).abs() < 1e-12);
        assert!((b.ptheta_max - 3.0 * (3.0 + b.pr_max)).abs() < 1e-12);
    }

    #[test]
    fn radius_bound_vanishing_potential_limit() {
        let (q0, q1) = unit_endpoints();
        let v = DecayPotential::new(
            SoftenedPower { a: 1e-30, alpha: 3.0, soften: 1.0 },
            1e-30,
            3.0,
            1.0,
        )
        .unwrap();
        let b = chord_radius_bound(&v, 1.0, q0, q1).unwrap();
        assert_eq!(b.r_max, 1.0);
    }

    #[test]
    fn cutoff_spec_anchor_cubic() {
        let (q0, q1) = unit_endpoints();
        let spec = cutoff_spec(&soft(1.0, 3.0), 1.0, q0, q1).unwrap();
        assert_eq!(spec.r1, 24.0);
        assert!((spec.beta - 1.0 / 48.0).abs() < 1e-15);
        assert!((spec.outer_radius() - spec.r1 * 3.0).abs() < 1e-9);
    }

    #[test]
    fn cutoff_spec_anchor_inverse_square() {
        let (q0, q1) = unit_endpoints();
        let a: f64 = 0.2;
        let v = DecayPotential::new(
            SoftenedPower { a, alpha: 2.0, soften: 1.0 },
            a,
            2.0,
            0.5,
        )
        .unwrap();
        let spec = cutoff_spec(&v, 1.0, q0, q1).unwrap();
        let s = 2.0 * a.sqrt();
        let expected_r1 = (1.0 + s) / (2.0 * (1.0 - s).sqrt());
        assert!((spec.r1 - expected_r1).abs() < 1e-12);
        assert!((spec.r1 - 2.9145).abs() < 1e-3);
        let expected_beta = ((1.0 + s) * (1.0 + s) - 16.0 * a) / (8.0 * a * spec.r1);
        assert!((spec.beta - expected_beta).abs() < 1e-12);
        assert!((spec.beta - 0.0834).abs() < 1e-3);
        assert!(spec.beta > 0.0);
    }

    #[test]
    fn outer_radius_identity_for_powers() {
        let (q0, q1) = unit_endpoints();
        for alpha in [2.5, 3.0, 4.0, 6.0] {
            let spec = cutoff_spec(&soft(0.4, alpha), 1.0, q0, q1).unwrap();
            let identity = spec.r1 * alpha / (alpha - 2.0);
            assert!((spec.outer_radius() - identity).abs() < 1e-9 * identity);
        }
    }

    #[test]
    fn phi_saturates_and_vanishes() {
        let (q0, q1) = unit_endpoints();
        let v = soft(0.1, 3.0);
        let spec = cutoff_spec(&v, 1.0, q0, q1).unwrap();
        let inside = PhasePoint::from_coords(1.0, 0.0, 0.0, 0.0);
        assert!(h0_eval(inside) <= spec.sup_v + spec.c);
        assert_eq!(phi_eval(&spec, inside), 1.0);
        let far = PhasePoint::from_coords(spec.outer_radius() + 0.1, 0.0, 0.0, 0.3);
        assert_eq!(phi_eval(&spec, far), 0.0);
        // high energy at small radius
        let hot = PhasePoint::from_coords(1.0, 0.0, 5.0, 5.0);
        assert!(h0_eval(hot) >= spec.sup_v + spec.c + 1.0);
        assert_eq!(phi_eval(&spec, hot), 0.0);
    }

    #[test]
    fn phi_gradient_vanishes_off_the_support_box() {
        let (q0, q1) = unit_endpoints();
        let spec = cutoff_spec(&soft(0.1, 3.0), 1.0, q0, q1).unwrap();
        let shell = [
            PhasePoint::from_coords(spec.outer_radius() * 1.01, 0.0, 0.2, -0.1),
            PhasePoint::from_coords(0.0, spec.outer_radius() + 5.0, 3.0, 0.0),
            PhasePoint::from_coords(2.0, 0.0, 6.0, 6.0),
            PhasePoint::from_coords(-1.0, 1.0, -7.0, 2.0),
        ];
        for x in shell {
            let outside_r = x.q.norm() >= spec.outer_radius();
            let outside_e = h0_eval(x) >= spec.sup_v + spec.c + 1.0;
            assert!(outside_r || outside_e, "test point not outside");
            for g in phi_gradient(&spec, x) {
                assert_eq!(g, 0.0);
            }
        }
    }

    #[test]
    fn h1_matches_perturbed_dynamics_where_phi_is_one() {
        let (q0, q1) = unit_endpoints();
        let v = soft(0.1, 3.0);
        let spec = cutoff_spec(&v, 1.0, q0, q1).unwrap();
        let h = PerturbedHamiltonian::new(SoftenedPower { a: 0.1, alpha: 3.0, soften: 1.0 }, 1.0);
        for x in [
            PhasePoint::from_coords(1.0, 0.2, 0.1, -0.3),
            PhasePoint::from_coords(-0.7, 0.5, 0.4, 0.2),
            PhasePoint::from_coords(0.3, -1.1, -0.2, 0.5),
        ] {
            assert_eq!(phi_eval(&spec, x), 1.0);
            let h1 = h1_eval(&spec, &v, x).unwrap();
            assert!((h1 - h.value(x)).abs() < 1e-15);
            let rates = perturbed_vector_field(&h, x).unwrap();
            let cart = polar_pushforward(x, rates).unwrap();
            let field = h1_vector_field(&spec, &v, x).unwrap();
            for k in 0..4 {
                assert!((field[k] - cart[k]).abs() < 1e-12, "component {k}");
            }
        }
    }

    #[test]
    fn h1_is_h0_where_phi_vanishes() {
        let (q0, q1) = unit_endpoints();
        let v = soft(0.1, 3.0);
        let spec = cutoff_spec(&v, 1.0, q0, q1).unwrap();
        let x = PhasePoint::from_coords(spec.outer_radius() + 1.0, 0.0, 0.1, 0.2);
        assert_eq!(h1_eval(&spec, &v, x).unwrap(), h0_eval(x));
        let field = h1_vector_field(&spec, &v, x).unwrap();
        let free = crate::hamiltonian::h0_vector_field(x);
        for k in 0..4 {
            assert_eq!(field[k], free[k]);
        }
    }

    #[test]
    fn h1_field_matches_finite_differences() {
        let (q0, q1) = unit_endpoints();
        let v = soft(0.1, 3.0);
        let spec = cutoff_spec(&v, 1.0, q0, q1).unwrap();
        // points spanning the interior, both transition bands, and outside
        let pts = [
            PhasePoint::from_coords(1.0, 0.5, 0.2, -0.1),
            PhasePoint::from_coords(spec.r1 + 0.3, 0.0, 0.3, 0.2),
            PhasePoint::from_coords(spec.r1 + 1.5, 2.0, -0.4, 0.6),
            PhasePoint::from_coords(2.0, 0.0, 1.4, 1.45),
            PhasePoint::from_coords(spec.outer_radius() + 0.5, -1.0, 0.5, 0.1),
        ];
        let h = 1e-6;
        for x in pts {
            let field = h1_vector_field(&spec, &v, x).unwrap();
            let arr = x.to_array();
            let mut grad = [0.0; 4];
            for k in 0..4 {
                let mut up = arr;
                let mut dn = arr;
                up[k] += h;
                dn[k] -= h;
                grad[k] = (h1_value_raw(&spec, &v, PhasePoint::from_array(up))
                    - h1_value_raw(&spec, &v, PhasePoint::from_array(dn)))
                    / (2.0 * h);
            }
            let expected = [grad[2], grad[3], -grad[0], -grad[1]];
            for k in 0..4 {
                assert!(
                    (field[k] - expected[k]).abs() < 1e-6,
                    "component {k}: {} vs {}",
                    field[k],
                    expected[k]
                );
            }
        }
    }

    #[test]
    fn truncated_perturbation_is_class_member() {
        let (q0, q1) = unit_endpoints();
        let v = soft(0.1, 3.0);
        let spec = cutoff_spec(&v, 1.0, q0, q1).unwrap();
        let h = |x: PhasePoint| {
            let (r, theta) = (x.q.norm(), x.q.y.atan2(x.q.x));
            phi_eval(&spec, x) * v.value(r, theta) + spec.c
        };
        let grad = |x: PhasePoint| perturbation_gradient(&spec, &v, x);
        let cand = PerturbationCandidate {
            h: &h,
            gradient: &grad,
            support_radius: spec.outer_radius(),
        };
        let report = class_h_check(&cand, GridSpec { n: 48, ..GridSpec::default() });
        assert!(report.member, "violations: {:?}", report.violations);
        assert!((report.c_estimate - spec.c).abs() < 1e-6);
    }

    #[test]
    fn trap_set_clear_for_cubic_decay() {
        let (q0, q1) = unit_endpoints();
        let v = soft(0.1, 3.0);
        let spec = cutoff_spec(&v, 1.0, q0, q1).unwrap();
        let report = trap_set_check(&spec, &v, TrapGrid::default()).unwrap();
        assert!(report.ok, "violations: {:?}", report.violations);
        assert!(report.min_margin > 0.0);
        assert!(report.points_checked >= 2 * 128 * 64);
    }

    #[test]
    fn trap_set_clear_for_inverse_square() {
        let (q0, q1) = unit_endpoints();
        let v = DecayPotential::new(
            SoftenedPower { a: 0.2, alpha: 2.0, soften: 1.0 },
            0.2,
            2.0,
            1.0,
        )
        .unwrap();
        let spec = cutoff_spec(&v, 1.0, q0, q1).unwrap();
        let report = trap_set_check(&spec, &v, TrapGrid::default()).unwrap();
        assert!(report.ok, "violations: {:?}", report.violations);
        assert!(report.min_margin > 0.0);
    }

    #[test]
    fn trap_check_refuses_broken_hypothesis() {
        let (q0, q1) = unit_endpoints();
        let good = soft(0.2, 2.0);
        let spec = cutoff_spec(&good, 1.0, q0, q1).unwrap();
        let bad = soft(0.3, 2.0);
        let err = trap_set_check(&spec, &bad, TrapGrid::default()).unwrap_err();
        assert!(matches!(err, Error::DecayHypothesis { .. }));
    }
}
