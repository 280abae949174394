//! The Rabinowitz action on discretized paths, its gradient norm, and the
//! transverse Maslov index of chords by Robbin-Salamon crossing counts in
//! the 2-dimensional contact hyperplane.

use crate::chords::Chord;
use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::integrate::{integrate_with_variational, IntegratorConfig};
use crate::symplectic::{omega, Mat4, PhasePoint, Vec2};

/// A path v: [0,1] -> T*R^2 sampled at uniform parameters, tied to the
/// endpoint fibers over q0 and q1.
#[derive(Debug, Clone)]
pub struct DiscretizedPath {
    pub samples: Vec<PhasePoint>,
    pub q0: Vec2,
    pub q1: Vec2,
}

impl DiscretizedPath {
    pub fn new(samples: Vec<PhasePoint>, q0: Vec2, q1: Vec2) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidInput { detail: "need at least 2 samples".into() });
        }
        let d0 = (samples[0].q - q0).norm();
        let d1 = (samples[samples.len() - 1].q - q1).norm();
        if d0 > 1e-10 || d1 > 1e-10 {
            return Err(Error::InvalidInput {
                detail: format!("endpoints miss the fibers by {d0:.3e} and {d1:.3e}"),
            });
        }
        Ok(DiscretizedPath { samples, q0, q1 })
    }

    pub fn from_chord(chord: &Chord) -> Self {
        DiscretizedPath { samples: chord.samples.clone(), q0: chord.q0, q1: chord.q1 }
    }
}

/// Trapezoid evaluation of the action: int p.dq - eta int (H(v) - c) dt.
pub fn action_eval(
    path: &DiscretizedPath,
    eta: f64,
    h: &dyn Hamiltonian,
    c: f64,
) -> Result<f64> {
    let v = &path.samples;
    if v.len() < 16 {
        return Err(Error::InvalidInput { detail: "need at least 16 samples".into() });
    }
    let n = v.len() - 1;
    let dt = 1.0 / n as f64;
    let mut liouville = 0.0;
    for i in 0..n {
        let dq = v[i + 1].q - v[i].q;
        liouville += (v[i].p + v[i + 1].p).scale(0.5).dot(dq);
    }
    let mut level = 0.0;
    for (i, x) in v.iter().enumerate() {
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        level += w * (h.value(*x) - c);
    }
    Ok(liouville - eta * level * dt)
}

/// Fourth-order finite-difference time derivative at the sample nodes,
/// one-sided at the ends.
fn time_derivative(v: &[PhasePoint]) -> Vec<[f64; 4]> {
    let n = v.len() - 1;
    let h = 1.0 / n as f64;
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let stencil: [(i64, f64); 5] = if k == 0 {
            [(0, -25.0), (1, 48.0), (2, -36.0), (3, 16.0), (4, -3.0)]
        } else if k == 1 {
            [(-1, -3.0), (0, -10.0), (1, 18.0), (2, -6.0), (3, 1.0)]
        } else if k == n - 1 {
            [(1, 3.0), (0, 10.0), (-1, -18.0), (-2, 6.0), (-3, -1.0)]
        } else if k == n {
            [(0, 25.0), (-1, -48.0), (-2, 36.0), (-3, -16.0), (-4, 3.0)]
        } else {
            [(-2, 1.0), (-1, -8.0), (0, 0.0), (1, 8.0), (2, -1.0)]
        };
        let mut d = [0.0; 4];
        for (off, coef) in stencil {
            let sample = v[(k as i64 + off) as usize].to_array();
            for j in 0..4 {
                d[j] += coef * sample[j];
            }
        }
        for dj in d.iter_mut() {
            *dj /= 12.0 * h;
        }
        out.push(d);
    }
    out
}

/// L2 x R norm of the action gradient (-J(dv/dt - eta X_H), -int(H - c)).
/// The rotation J preserves lengths, so the first block is measured as the
/// flow-equation defect at the nodes.
pub fn action_gradient_norm(
    path: &DiscretizedPath,
    eta: f64,
    h: &dyn Hamiltonian,
    c: f64,
) -> Result<f64> {
    let v = &path.samples;
    if v.len() < 16 {
        return Err(Error::InvalidInput { detail: "need at least 16 samples".into() });
    }
    let n = v.len() - 1;
    let dt = 1.0 / n as f64;
    let deriv = time_derivative(v);
    let mut defect_sq = 0.0;
    for (k, x) in v.iter().enumerate() {
        let f = h.field(*x);
        let mut node = 0.0;
        for j in 0..4 {
            let d = deriv[k][j] - eta * f[j];
            node += d * d;
        }
        let w = if k == 0 || k == n { 0.5 } else { 1.0 };
        defect_sq += w * node * dt;
    }
    let mut level = 0.0;
    for (i, x) in v.iter().enumerate() {
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        level += w * (h.value(*x) - c);
    }
    level *= dt;
    Ok((defect_sq + level * level).sqrt())
}

#[derive(Debug, Clone, Copy)]
pub struct SignActionCheck {
    pub eta_sign: i8,
    pub action_sign: i8,
    pub consistent: bool,
}

fn signum_dead(x: f64, dead: f64) -> i8 {
    if x > dead {
        1
    } else if x < -dead {
        -1
    } else {
        0
    }
}

/// On level sets of contact type the action of a chord has the sign of its
/// multiplier: A = eta (|p|^2/2 + c in L2) for the rotating frame family.
pub fn sign_action_check(chord: &Chord) -> SignActionCheck {
    let n = chord.samples.len() - 1;
    let dt = 1.0 / n as f64;
    let mut kinetic = 0.0;
    for (i, x) in chord.samples.iter().enumerate() {
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        kinetic += w * 0.5 * x.p.norm_sq();
    }
    let action = chord.eta * (kinetic * dt + chord.c);
    let eta_sign = signum_dead(chord.eta, 1e-12);
    let action_sign = signum_dead(action, 1e-12);
    SignActionCheck { eta_sign, action_sign, consistent: eta_sign == action_sign }
}

/// One Robbin-Salamon crossing of the transported line with the fiber
/// direction; the contribution is stored doubled so half-integers stay exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub t: f64,
    pub contribution_times_two: i64,
}

#[derive(Debug, Clone)]
pub struct MaslovResult {
    pub mu_times_two: i64,
    pub crossings: Vec<Crossing>,
    /// total lifted angle difference divided by pi
    pub winding: f64,
}

impl MaslovResult {
    pub fn mu(&self) -> f64 {
        self.mu_times_two as f64 / 2.0
    }

    pub fn as_rational(&self) -> String {
        format!("{}/2", self.mu_times_two)
    }
}

fn lambda(x: PhasePoint, u: [f64; 4]) -> f64 {
    x.p.x * u[0] + x.p.y * u[1]
}

struct XiFrame {
    field: [f64; 4],
    z: [f64; 4],
    kappa: f64,
    e1: [f64; 4],
    e2: [f64; 4],
}

fn dh(field: [f64; 4], u: [f64; 4]) -> f64 {
    // dH(u) = omega(X_H, u)
    omega(field, u)
}

fn project_xi(frame_field: [f64; 4], z: [f64; 4], kappa: f64, x: PhasePoint, u: [f64; 4]) -> [f64; 4] {
    let alpha = lambda(x, u) / kappa;
    let mut u1 = u;
    for k in 0..4 {
        u1[k] -= alpha * frame_field[k];
    }
    let beta = dh(frame_field, u1) / kappa;
    let mut u2 = u1;
    for k in 0..4 {
        u2[k] -= beta * z[k];
    }
    u2
}

fn norm4(u: [f64; 4]) -> f64 {
    u.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn j_std(u: [f64; 4]) -> [f64; 4] {
    [-u[2], -u[3], u[0], u[1]]
}

/// The contact data and a symplectic basis of xi at one point of the chord.
fn xi_at(h: &dyn Hamiltonian, x: PhasePoint, t: f64, seed: Option<&[f64; 4]>) -> Result<XiFrame> {
    let field = h.field(x);
    let hp = Vec2::new(field[0], field[1]);
    let scale = 1.0 + x.to_array().iter().map(|v| v.abs()).fold(0.0, f64::max);
    if hp.norm() < 1e-12 * scale {
        return Err(Error::TrivializationBreakdown {
            t,
            detail: "fiber direction degenerates (dH/dp vanishes)".into(),
        });
    }
    let z = [0.0, 0.0, x.p.x, x.p.y];
    let kappa = lambda(x, field);
    if kappa.abs() < 1e-12 * scale * scale {
        return Err(Error::TrivializationBreakdown {
            t,
            detail: "contact pairing lambda(X_H) vanishes".into(),
        });
    }
    let raw_e1 = match seed {
        Some(prev) => project_xi(field, z, kappa, x, *prev),
        None => [0.0, 0.0, -hp.y, hp.x],
    };
    let len = norm4(raw_e1);
    if len < 1e-8 * seed.map_or(1.0, |p| norm4(*p)) {
        return Err(Error::TrivializationBreakdown {
            t,
            detail: "frame vector collapsed under projection".into(),
        });
    }
    let mut e1 = raw_e1.map(|v| v / len);
    if let Some(prev) = seed {
        let dot: f64 = e1.iter().zip(prev.iter()).map(|(a, b)| a * b).sum();
        if dot < 0.0 {
            e1 = e1.map(|v| -v);
        }
    }
    // with |e1| = 1, omega(e1, pi(J e1)) = 1, so pi(J e1) completes the basis
    let e2 = project_xi(field, z, kappa, x, j_std(e1));
    Ok(XiFrame { field, z, kappa, e1, e2 })
}

/// Angle of the line spanned by u inside xi, against the moving frame.
/// The orientation is fixed so the free-Hamiltonian chord with positive
/// multiplier winds positively; see the unit tests pinning +1/2.
fn line_angle(frame: &XiFrame, u: [f64; 4]) -> f64 {
    let a = omega(u, frame.e2);
    let b = -omega(u, frame.e1);
    let mut phi = (-b).atan2(a);
    // reduce modulo pi into (-pi/2, pi/2]
    if phi <= -std::f64::consts::FRAC_PI_2 {
        phi += std::f64::consts::PI;
    } else if phi > std::f64::consts::FRAC_PI_2 {
        phi -= std::f64::consts::PI;
    }
    phi
}

fn wrap_half_pi(mut inc: f64) -> f64 {
    while inc > std::f64::consts::FRAC_PI_2 {
        inc -= std::f64::consts::PI;
    }
    while inc <= -std::f64::consts::FRAC_PI_2 {
        inc += std::f64::consts::PI;
    }
    inc
}

struct IndexPass {
    crossings: Vec<Crossing>,
    winding: f64,
}

fn tables_closed_form(
    chord: &Chord,
    h: &dyn Hamiltonian,
    n: usize,
) -> (Vec<PhasePoint>, Vec<Mat4>) {
    let x0 = chord.samples[0];
    let mut xs = Vec::with_capacity(n + 1);
    let mut phis = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let tau = chord.eta * i as f64 / n as f64;
        let m = h.linearized_flow(x0, tau).expect("closed form probed before use");
        xs.push(PhasePoint::from_array(m.mul_vec(x0.to_array())));
        phis.push(m);
    }
    (xs, phis)
}

fn tables_variational(
    chord: &Chord,
    h: &dyn Hamiltonian,
    n: usize,
) -> Result<(Vec<PhasePoint>, Vec<Mat4>)> {
    let x0 = chord.samples[0];
    let (xs, phis) =
        integrate_with_variational(h, x0, chord.eta, n, IntegratorConfig::default())?;
    let endpoint_gap = (xs[n].q - chord.q1).norm();
    if endpoint_gap > 1e-6 {
        return Err(Error::IntegrationFailure {
            detail: format!("transported chord misses q1 by {endpoint_gap:.3e}"),
        });
    }
    Ok((xs, phis))
}

fn index_pass(chord: &Chord, h: &dyn Hamiltonian, n: usize, closed_form: bool) -> Result<IndexPass> {
    let (xs, phis) = if closed_form {
        tables_closed_form(chord, h, n)
    } else {
        tables_variational(chord, h, n)?
    };

    // transported fiber direction and lifted angle bookkeeping
    let f0 = h.field(xs[0]);
    let w0 = [0.0, 0.0, -f0[1], f0[0]];
    let mut seed: Option<[f64; 4]> = None;
    let mut delta = Vec::with_capacity(n + 1);
    let mut lifted_line = 0.0;
    let mut lifted_fiber = 0.0;
    let mut prev_line = 0.0;
    let mut prev_fiber = 0.0;
    for i in 0..=n {
        let t = i as f64 / n as f64;
        let frame = xi_at(h, xs[i], t, seed.as_ref())?;
        seed = Some(frame.e1);
        let transported = phis[i].mul_vec(w0);
        let d_hat = project_xi(frame.field, frame.z, frame.kappa, xs[i], transported);
        if norm4(d_hat) < 1e-10 * norm4(transported).max(1e-300) {
            return Err(Error::TrivializationBreakdown {
                t,
                detail: "transported line fell into the Reeb plane".into(),
            });
        }
        let fiber = [0.0, 0.0, -frame.field[1], frame.field[0]];
        let phi_line = line_angle(&frame, d_hat);
        let phi_fiber = line_angle(&frame, fiber);
        if i == 0 {
            lifted_line = phi_line;
            lifted_fiber = phi_fiber;
        } else {
            lifted_line += wrap_half_pi(phi_line - prev_line);
            lifted_fiber += wrap_half_pi(phi_fiber - prev_fiber);
        }
        prev_line = phi_line;
        prev_fiber = phi_fiber;
        delta.push(lifted_line - lifted_fiber);
    }
    let offset = delta[0];
    for d in delta.iter_mut() {
        *d -= offset;
    }

    let g: Vec<f64> = delta.iter().map(|d| d / std::f64::consts::PI).collect();
    let mut crossings = Vec::new();

    // t = 0 is a crossing by construction; its sign is the first movement
    let mut start_sign = 0i64;
    for gk in g.iter().skip(1) {
        if gk.abs() > 1e-12 {
            start_sign = if *gk > 0.0 { 1 } else { -1 };
            break;
        }
    }
    if start_sign == 0 {
        return Err(Error::TrivializationBreakdown {
            t: 0.0,
            detail: "line path rides the reference line".into(),
        });
    }
    crossings.push(Crossing { t: 0.0, contribution_times_two: start_sign });

    // interior crossings: g passes through an integer
    for k in 1..n {
        let (a, b) = (g[k], g[k + 1]);
        let lo = a.min(b).floor() as i64 + 1;
        let hi = a.max(b).ceil() as i64 - 1;
        for m in lo..=hi {
            let m = m as f64;
            if (a - m) * (b - m) < 0.0 {
                let frac = (m - a) / (b - a);
                let t = (k as f64 + frac) / n as f64;
                if t < 1.0 - 1e-9 {
                    let sign = if b > a { 2 } else { -2 };
                    crossings.push(Crossing { t, contribution_times_two: sign });
                }
            }
        }
    }
    // the interval (g[0], g[1]) can also pass an integer beyond the start
    {
        let (a, b) = (g[0], g[1]);
        let lo = a.min(b).floor() as i64 + 1;
        let hi = a.max(b).ceil() as i64 - 1;
        for m in lo..=hi {
            if m == 0 {
                continue;
            }
            let m = m as f64;
            if (a - m) * (b - m) < 0.0 {
                let frac = (m - a) / (b - a);
                crossings.push(Crossing {
                    t: frac / n as f64,
                    contribution_times_two: if b > a { 2 } else { -2 },
                });
            }
        }
    }

    // endpoint t = 1: crossing if the final angle difference is a multiple
    // of pi; signed by the approach slope
    let g_end = g[n];
    let m_end = g_end.round();
    if (g_end - m_end).abs() < 1e-6 {
        let mut end_sign = 0i64;
        for k in (0..n).rev() {
            let back = g_end - g[k];
            if back.abs() > 1e-12 {
                end_sign = if back > 0.0 { 1 } else { -1 };
                break;
            }
        }
        if end_sign != 0 {
            crossings.push(Crossing { t: 1.0, contribution_times_two: end_sign });
        }
    }

    crossings.sort_by(|a, b| a.t.total_cmp(&b.t));
    Ok(IndexPass { crossings, winding: g[n] })
}

fn passes_match(a: &IndexPass, b: &IndexPass) -> bool {
    a.crossings.len() == b.crossings.len()
        && a.crossings.iter().zip(b.crossings.iter()).all(|(x, y)| {
            (x.t - y.t).abs() <= 1e-3 && x.contribution_times_two == y.contribution_times_two
        })
}

/// Robbin-Salamon index of the fiber line transported along the chord by the
/// linearized flow, counted against the moving fiber line inside the contact
/// hyperplane xi = ker dH n ker lambda.
pub fn maslov_transverse(chord: &Chord, h: &dyn Hamiltonian) -> Result<MaslovResult> {
    let closed_form = h.linearized_flow(chord.samples[0], 0.0).is_some();
    let mut n = 1024usize;
    let mut pass = index_pass(chord, h, n, closed_form)?;
    let mut stable = 0;
    while stable < 2 {
        if n >= 1 << 15 {
            return Err(Error::IntegrationFailure {
                detail: format!("crossing set failed to stabilize by n = {n}"),
            });
        }
        n *= 2;
        let next = index_pass(chord, h, n, closed_form)?;
        if passes_match(&pass, &next) {
            stable += 1;
        } else {
            stable = 0;
        }
        pass = next;
    }
    let mu_times_two = pass.crossings.iter().map(|c| c.contribution_times_two).sum();
    let result =
        MaslovResult { mu_times_two, crossings: pass.crossings, winding: pass.winding };
    debug_assert!(
        (result.mu() - result.winding).abs() <= 0.5 + 1e-6,
        "index {} strays from winding {}",
        result.mu(),
        result.winding
    );
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chords::{chord_from_eta, find_roots, free_chords, RootFindOptions, TwoBoostProblem};
    use crate::hamiltonian::{CopernicanH0, FreeHamiltonian, ScaledHamiltonian};
    use crate::scaling::{scaled_chord, scaling_map};

    fn unit_perp(c: f64) -> TwoBoostProblem {
        TwoBoostProblem::new(Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0), c).unwrap()
    }

    fn positive_chord(c: f64, n: usize) -> Chord {
        let prob = unit_perp(c);
        let roots = find_roots(&prob, RootFindOptions::default()).unwrap();
        let eta = roots.iter().filter(|r| r.eta > 0.0).map(|r| r.eta).next().unwrap();
        chord_from_eta(&prob, eta, n).unwrap()
    }

    #[test]
    fn action_of_constant_level_path_vanishes() {
        let x = PhasePoint::from_coords(1.0, 0.0, 0.0, 0.0);
        let path = DiscretizedPath::new(vec![x; 33], x.q, x.q).unwrap();
        let a = action_eval(&path, 2.0, &CopernicanH0, 0.0).unwrap();
        assert_eq!(a, 0.0);
    }

    #[test]
    fn action_of_free_chord_is_gap_squared_over_eta() {
        let (plus, _) = free_chords(Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0), 1.0, 64).unwrap();
        let path = DiscretizedPath::from_chord(&plus);
        let a = action_eval(&path, plus.eta, &FreeHamiltonian, 1.0).unwrap();
        assert!((a - 2.0).abs() < 1e-12);
    }

    #[test]
    fn action_matches_level_set_formula() {
        let chord = positive_chord(0.5, 4096);
        let path = DiscretizedPath::from_chord(&chord);
        let a = action_eval(&path, chord.eta, &CopernicanH0, chord.c).unwrap();
        let n = chord.samples.len() - 1;
        let mut kinetic = 0.0;
        for (i, x) in chord.samples.iter().enumerate() {
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            kinetic += w * 0.5 * x.p.norm_sq();
        }
        kinetic /= n as f64;
        assert!((a - chord.eta * (kinetic + chord.c)).abs() < 1e-6);
    }

    #[test]
    fn gradient_vanishes_on_certified_chords() {
        let chord = positive_chord(0.2, 256);
        let path = DiscretizedPath::from_chord(&chord);
        let g = action_gradient_norm(&path, chord.eta, &CopernicanH0, chord.c).unwrap();
        assert!(g <= 1e-5, "gradient {g}");
    }

    #[test]
    fn gradient_decays_like_one_over_n() {
        // C fitted from one run of this family and frozen
        const C: f64 = 1e-3;
        for c in [0.5, 0.2] {
            let prob = unit_perp(c);
            let roots = find_roots(&prob, RootFindOptions::default()).unwrap();
            let eta = roots.iter().filter(|r| r.eta > 0.0).next().unwrap().eta;
            for n in [64usize, 128, 256, 512] {
                let chord = chord_from_eta(&prob, eta, n).unwrap();
                let path = DiscretizedPath::from_chord(&chord);
                let g = action_gradient_norm(&path, eta, &CopernicanH0, c).unwrap();
                assert!(g <= C / n as f64, "c = {c}, n = {n}, gradient {g}");
            }
        }
    }

    #[test]
    fn gradient_flags_wrong_multiplier() {
        let chord = positive_chord(0.1, 256);
        let path = DiscretizedPath::from_chord(&chord);
        let g = action_gradient_norm(&path, chord.eta + 0.5, &CopernicanH0, chord.c).unwrap();
        assert!(g >= 0.1, "gradient {g}");
    }

    #[test]
    fn gradient_sees_level_offset_alone() {
        let x = PhasePoint::from_coords(1.0, 0.0, 0.0, 0.0);
        let path = DiscretizedPath::new(vec![x; 33], x.q, x.q).unwrap();
        let c = 0.7;
        let g = action_gradient_norm(&path, 0.0, &CopernicanH0, c).unwrap();
        assert!(g >= (crate::hamiltonian::h0_eval(x) - c).abs() - 1e-12);
    }

    #[test]
    fn quadrature_error_is_second_order() {
        // against the closed-form action of the rotating chord
        let prob = unit_perp(0.5);
        let roots = find_roots(&prob, RootFindOptions::default()).unwrap();
        let eta = roots.iter().filter(|r| r.eta > 0.0).next().unwrap().eta;
        let exact = {
            let chord = chord_from_eta(&prob, eta, 1 << 14).unwrap();
            let path = DiscretizedPath::from_chord(&chord);
            action_eval(&path, eta, &CopernicanH0, 0.5).unwrap()
        };
        let err = |n: usize| -> f64 {
            let chord = chord_from_eta(&prob, eta, n).unwrap();
            let path = DiscretizedPath::from_chord(&chord);
            (action_eval(&path, eta, &CopernicanH0, 0.5).unwrap() - exact).abs()
        };
        let ratio = err(64) / err(128);
        assert!(ratio > 3.3 && ratio < 4.7, "ratio {ratio}");
    }

    #[test]
    fn sign_action_agrees_with_multiplier_sign() {
        for c in [0.2, 0.1, 0.05] {
            let prob = unit_perp(c);
            for root in find_roots(&prob, RootFindOptions::default()).unwrap() {
                let chord = chord_from_eta(&prob, root.eta, 128).unwrap();
                let check = sign_action_check(&chord);
                assert!(check.consistent, "c = {c}, eta = {}", root.eta);
            }
        }
    }

    #[test]
    fn negative_root_has_negative_action() {
        let prob = unit_perp(0.2);
        let roots = find_roots(&prob, RootFindOptions::default()).unwrap();
        let eta = roots.iter().filter(|r| r.eta < 0.0).last().unwrap().eta;
        let chord = chord_from_eta(&prob, eta, 128).unwrap();
        let path = DiscretizedPath::from_chord(&chord);
        let a = action_eval(&path, eta, &CopernicanH0, 0.2).unwrap();
        assert!(a < 0.0);
    }

    #[test]
    fn free_chord_indices_are_half_signs() {
        let (plus, minus) = free_chords(Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0), 1.0, 64).unwrap();
        let mp = maslov_transverse(&plus, &FreeHamiltonian).unwrap();
        assert_eq!(mp.mu_times_two, 1, "crossings {:?}", mp.crossings);
        let mm = maslov_transverse(&minus, &FreeHamiltonian).unwrap();
        assert_eq!(mm.mu_times_two, -1, "crossings {:?}", mm.crossings);
    }

    #[test]
    fn free_chord_index_matches_localization() {
        // the line path is graph(t eta) in one dimension: the index localizes
        // to half the endpoint signs of A(t) = t eta
        for (q0, q1, c) in [
            (Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0), 1.0),
            (Vec2::new(0.5, -0.2), Vec2::new(-0.3, 0.4), 0.7),
        ] {
            let (plus, minus) = free_chords(q0, q1, c, 64).unwrap();
            for ch in [plus, minus] {
                let m = maslov_transverse(&ch, &FreeHamiltonian).unwrap();
                let localized = 0.5 * (ch.eta).signum() - 0.5 * 0.0;
                assert!((m.mu() - localized).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn copernican_positive_chord_has_index_one_half() {
        for c in [0.5, 1.0] {
            let prob = unit_perp(c);
            let roots = find_roots(&prob, RootFindOptions::default()).unwrap();
            let pos: Vec<f64> =
                roots.iter().filter(|r| r.eta > 0.0).map(|r| r.eta).collect();
            assert_eq!(pos.len(), 1);
            let chord = chord_from_eta(&prob, pos[0], 256).unwrap();
            let m = maslov_transverse(&chord, &CopernicanH0).unwrap();
            assert_eq!(m.mu_times_two, 1, "c = {c}, crossings {:?}", m.crossings);
        }
    }

    #[test]
    fn index_is_constant_along_the_delta_continuation() {
        let q0 = Vec2::new(1.0, 0.0);
        let q1 = Vec2::new(0.0, 1.0);
        let delta_max = crate::scaling::scaling_limit(q0, q1);
        let hi = delta_max / 2.0;
        let lo = 1e-3;
        let mut seen = None;
        for k in 0..20 {
            let delta = lo + (hi - lo) * k as f64 / 19.0;
            let (chord, _) = scaled_chord(q0, q1, delta, 64).unwrap();
            let m = maslov_transverse(&chord, &ScaledHamiltonian::new(delta)).unwrap();
            match seen {
                None => seen = Some(m.mu_times_two),
                Some(v) => assert_eq!(v, m.mu_times_two, "delta = {delta}"),
            }
        }
        assert_eq!(seen, Some(1));
    }

    #[test]
    fn index_is_invariant_under_scaling() {
        let q0 = Vec2::new(1.0, 0.0);
        let q1 = Vec2::new(0.0, 1.0);
        for &delta in &[0.1, 0.5] {
            let (chord, _) = scaled_chord(q0, q1, delta, 64).unwrap();
            let before = maslov_transverse(&chord, &ScaledHamiltonian::new(delta)).unwrap();
            let image = scaling_map(&chord, delta).unwrap();
            let after = maslov_transverse(&image, &CopernicanH0).unwrap();
            assert_eq!(before.mu_times_two, after.mu_times_two);
        }
    }

    #[test]
    fn winding_stays_near_the_index() {
        for c in [0.5, 0.2, 0.1] {
            let chord = positive_chord(c, 128);
            let m = maslov_transverse(&chord, &CopernicanH0).unwrap();
            assert!((m.mu() - m.winding).abs() <= 0.5 + 1e-6);
        }
    }

    #[test]
    fn endpoint_fiber_mismatch_is_rejected() {
        let x = PhasePoint::from_coords(1.0, 0.0, 0.0, 0.0);
        let err = DiscretizedPath::new(vec![x; 33], Vec2::new(0.0, 0.0), x.q);
        assert!(err.is_err());
    }
}
