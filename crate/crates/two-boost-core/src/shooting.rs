//! Boundary-value solver for chords of H0 - V at energy c: momenta over q0
//! form a circle on the level set, and a damped Newton iteration in the
//! circle angle and the multiplier drives the flow endpoint onto q1.

use crate::chords::{find_roots, scan_radius, Chord, RootFindOptions, TwoBoostProblem};
use crate::cutoff::{trap_set_check, CutoffHamiltonian, CutoffSpec, DecayPotential, TrapGrid};
use crate::error::{Error, Result};
use crate::hamiltonian::{Hamiltonian, PerturbedHamiltonian, Potential};
use crate::integrate::{integrate_path, integrate_to, IntegratorConfig};
use crate::symplectic::{PhasePoint, Vec2};

/// Momenta over a fixed base point that realize energy c: a circle centered
/// at the rotation of q.
#[derive(Debug, Clone, Copy)]
pub struct EnergyCircle {
    pub center: Vec2,
    pub radius: f64,
}

impl EnergyCircle {
    pub fn momentum(&self, psi: f64) -> Vec2 {
        self.center + Vec2::new(psi.cos(), psi.sin()).scale(self.radius)
    }
}

/// The fiber circle of H0 - V over q at level c.
pub fn energy_circle<P: Potential>(q: Vec2, c: f64, v: &P) -> Result<EnergyCircle> {
    let r = q.norm();
    let theta = if r == 0.0 { 0.0 } else { q.y.atan2(q.x) };
    let radicand = r * r + 2.0 * (c + v.value(r, theta));
    if radicand <= 0.0 {
        return Err(Error::EmptyFiber { radicand });
    }
    Ok(EnergyCircle { center: Vec2::new(-q.y, q.x), radius: radicand.sqrt() })
}

#[derive(Debug, Clone)]
pub struct ShootOptions {
    pub psi_seeds: usize,
    /// extra multiplier seeds joined with the closed-form V = 0 roots
    pub eta_seeds: Vec<f64>,
    pub newton_tol: f64,
    pub max_iter: usize,
    pub dedup: f64,
    pub keep_per_eta: usize,
    pub samples: usize,
    pub integrator: IntegratorConfig,
}

impl Default for ShootOptions {
    fn default() -> Self {
        ShootOptions {
            psi_seeds: 64,
            eta_seeds: Vec::new(),
            newton_tol: 1e-11,
            max_iter: 40,
            dedup: 1e-6,
            keep_per_eta: 12,
            samples: 256,
            integrator: IntegratorConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ShotChord {
    pub psi: f64,
    pub chord: Chord,
}

#[derive(Debug, Clone)]
pub struct ShootOutcome {
    pub chords: Vec<ShotChord>,
    pub seeds_tried: usize,
    pub converged: usize,
    pub skipped_singular: usize,
}

/// Multiplier seeds for a problem: closed-form roots of the unperturbed
/// problem joined with a +-(k pi/2) ladder out to the root window. Rungs
/// close to a root seed are dropped and the ladder is capped so that huge
/// windows do not drown the solver; the root seeds still cover those.
pub fn default_eta_seeds(prob: &TwoBoostProblem) -> Vec<f64> {
    let mut seeds = Vec::new();
    if let Ok(roots) = find_roots(prob, RootFindOptions::default()) {
        seeds.extend(roots.iter().map(|r| r.eta));
    }
    let roots_only = seeds.clone();
    let ladder = ((2.0 * scan_radius(prob) / std::f64::consts::PI).ceil() as usize) * 2;
    for k in 1..=ladder.clamp(2, 16) {
        for sign in [1.0, -1.0] {
            let eta = sign * k as f64 * std::f64::consts::FRAC_PI_2;
            if roots_only.iter().all(|r| (r - eta).abs() > 0.25) {
                seeds.push(eta);
            }
        }
    }
    seeds
}

fn wrap_angle(psi: f64) -> f64 {
    psi.rem_euclid(2.0 * std::f64::consts::PI)
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (wrap_angle(a) - wrap_angle(b)).abs();
    d.min(2.0 * std::f64::consts::PI - d)
}

struct Engine<'a> {
    h: &'a dyn Hamiltonian,
    circle: EnergyCircle,
    q0: Vec2,
    q1: Vec2,
    cfg: IntegratorConfig,
}

impl Engine<'_> {
    fn miss(&self, psi: f64, eta: f64, cfg: IntegratorConfig) -> Result<Vec2> {
        let x0 = PhasePoint::new(self.q0, self.circle.momentum(psi));
        let end = integrate_to(self.h, x0, eta, cfg)?;
        Ok(end.q - self.q1)
    }

    fn newton(&self, mut psi: f64, mut eta: f64, opts: &ShootOptions) -> Result<Option<(f64, f64)>> {
        // iterate at a loose tolerance first and polish tight from inside
        // the quadratic basin, so the expensive integrations are few
        let loose = IntegratorConfig { abs_tol: 1e-9, rel_tol: 1e-9, max_steps: 1_000_000 };
        let mut cfg = loose;
        let mut f = self.miss(psi, eta, cfg)?;
        for _ in 0..opts.max_iter {
            if cfg.abs_tol > self.cfg.abs_tol && f.norm() <= 1e-6 {
                cfg = self.cfg;
                f = self.miss(psi, eta, cfg)?;
            }
            if cfg.abs_tol <= self.cfg.abs_tol && f.norm() <= opts.newton_tol {
                return Ok(Some((wrap_angle(psi), eta)));
            }
            let h_psi = 1e-7 * (1.0 + psi.abs());
            let h_eta = 1e-7 * (1.0 + eta.abs());
            let d_psi = (self.miss(psi + h_psi, eta, cfg)? - f).scale(1.0 / h_psi);
            let d_eta = (self.miss(psi, eta + h_eta, cfg)? - f).scale(1.0 / h_eta);
            let det = d_psi.x * d_eta.y - d_psi.y * d_eta.x;
            if det.abs() < 1e-14 * (1.0 + d_psi.norm() * d_eta.norm()) {
                return Ok(None);
            }
            let step_psi = (-f.x * d_eta.y + f.y * d_eta.x) / det;
            let step_eta = (-d_psi.x * f.y + d_psi.y * f.x) / det;
            let mut lambda = 1.0;
            let mut advanced = false;
            for _ in 0..12 {
                let trial_psi = psi + lambda * step_psi;
                let trial_eta = eta + lambda * step_eta;
                if let Ok(trial) = self.miss(trial_psi, trial_eta, cfg) {
                    if trial.norm() < f.norm() * (1.0 - 0.25 * lambda) || trial.norm() <= opts.newton_tol
                    {
                        psi = trial_psi;
                        eta = trial_eta;
                        f = trial;
                        advanced = true;
                        break;
                    }
                }
                lambda *= 0.5;
            }
            if !advanced {
                return Ok(None);
            }
        }
        Ok(None)
    }
}

fn fd_ode_residual(h: &dyn Hamiltonian, samples: &[PhasePoint], eta: f64) -> f64 {
    let n = samples.len() - 1;
    let dt = 1.0 / n as f64;
    let mut worst = 0.0f64;
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
            let s = samples[(k as i64 + off) as usize].to_array();
            for j in 0..4 {
                d[j] += coef * s[j];
            }
        }
        let f = h.field(samples[k]);
        for j in 0..4 {
            worst = worst.max((d[j] / (12.0 * dt) - eta * f[j]).abs());
        }
    }
    worst
}

fn certify(
    h: &dyn Hamiltonian,
    circle: EnergyCircle,
    q0: Vec2,
    q1: Vec2,
    c: f64,
    psi: f64,
    eta: f64,
    opts: &ShootOptions,
) -> Result<ShotChord> {
    let x0 = PhasePoint::new(q0, circle.momentum(psi));
    let samples = integrate_path(h, x0, eta, opts.samples, opts.integrator)?;
    let boundary = (samples[0].q - q0).norm().max((samples[opts.samples].q - q1).norm());
    let energy = samples
        .iter()
        .map(|x| (h.value(*x) - c).abs())
        .fold(0.0f64, f64::max);
    let ode = fd_ode_residual(h, &samples, eta);
    Ok(ShotChord {
        psi,
        chord: Chord {
            eta,
            c,
            q0,
            q1,
            samples,
            residual_boundary: boundary,
            residual_energy: energy,
            residual_ode: ode,
        },
    })
}

fn shoot_engine(
    h: &dyn Hamiltonian,
    circle: EnergyCircle,
    q0: Vec2,
    q1: Vec2,
    c: f64,
    eta_seeds: &[f64],
    opts: &ShootOptions,
) -> Result<ShootOutcome> {
    let engine = Engine { h, circle, q0, q1, cfg: opts.integrator };
    let mut outcome =
        ShootOutcome { chords: Vec::new(), seeds_tried: 0, converged: 0, skipped_singular: 0 };
    let mut found: Vec<(f64, f64)> = Vec::new();
    for &eta in eta_seeds {
        if eta == 0.0 {
            continue;
        }
        // one cheap forward shot per angle, keeping the closest approaches
        let winnow = IntegratorConfig { abs_tol: 1e-6, rel_tol: 1e-6, max_steps: 100_000 };
        let mut ranked: Vec<(f64, f64)> = Vec::new();
        for i in 0..opts.psi_seeds {
            let psi = 2.0 * std::f64::consts::PI * i as f64 / opts.psi_seeds as f64;
            if let Ok(miss) = engine.miss(psi, eta, winnow) {
                ranked.push((miss.norm(), psi));
            }
        }
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0));
        ranked.truncate(opts.keep_per_eta);
        for (_, psi) in ranked {
            outcome.seeds_tried += 1;
            match engine.newton(psi, eta, opts) {
                Ok(Some((psi_star, eta_star))) => {
                    outcome.converged += 1;
                    let duplicate = found.iter().any(|&(p, e)| {
                        angle_gap(p, psi_star) + (e - eta_star).abs() < opts.dedup
                    });
                    if !duplicate {
                        found.push((psi_star, eta_star));
                    }
                }
                Ok(None) => outcome.skipped_singular += 1,
                Err(_) => outcome.skipped_singular += 1,
            }
        }
    }
    found.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)));
    for (psi, eta) in found {
        outcome.chords.push(certify(h, circle, q0, q1, c, psi, eta, opts)?);
    }
    Ok(outcome)
}

/// Find chords of H0 - V between the fibers of prob by shooting from the
/// energy circle over q0.
pub fn shoot<P: Potential>(
    prob: &TwoBoostProblem,
    v: &P,
    eta_seeds: &[f64],
    opts: &ShootOptions,
) -> Result<ShootOutcome> {
    if eta_seeds.is_empty() {
        return Err(Error::InvalidInput { detail: "need at least one multiplier seed".into() });
    }
    let circle = energy_circle(prob.q0, prob.c, v)?;
    let h = PerturbedHamiltonian::new(
        PotentialRef(v),
        prob.c,
    );
    shoot_engine(&h, circle, prob.q0, prob.q1, prob.c, eta_seeds, opts)
}

/// Borrow adapter so a potential can be shared between Hamiltonians.
pub struct PotentialRef<'a, P: Potential>(pub &'a P);

impl<P: Potential> Potential for PotentialRef<'_, P> {
    fn value(&self, r: f64, theta: f64) -> f64 {
        self.0.value(r, theta)
    }

    fn d_r(&self, r: f64, theta: f64) -> f64 {
        self.0.d_r(r, theta)
    }

    fn d_theta(&self, r: f64, theta: f64) -> f64 {
        self.0.d_theta(r, theta)
    }
}

#[derive(Debug, Clone)]
pub struct MatchedPair {
    pub psi: f64,
    pub eta: f64,
    pub maslov_h: Option<i64>,
    pub maslov_h1: Option<i64>,
    pub index_mismatch: bool,
}

#[derive(Debug)]
pub struct CritSetComparison {
    pub matched: Vec<MatchedPair>,
    pub only_h: Vec<ShotChord>,
    pub only_h1: Vec<ShotChord>,
}

/// Shoot the same seeds against H = H0 - V and the truncation H1 = H0 - phi V
/// and pair up the solutions; the truncation theory predicts equal sets.
/// Indices are computed for both members of a pair and mismatches flagged.
pub fn compare_crit_sets<P: Potential>(
    prob: &TwoBoostProblem,
    v: &DecayPotential<P>,
    spec: &CutoffSpec,
) -> Result<CritSetComparison> {
    let trap = trap_set_check(spec, v, TrapGrid::default())?;
    if !trap.ok {
        return Err(Error::InvalidInput {
            detail: format!(
                "trap set check failed with margin {} at r = {}",
                trap.min_margin, trap.witness.0
            ),
        });
    }
    let seeds = default_eta_seeds(prob);
    let opts = ShootOptions::default();
    let circle = energy_circle(prob.q0, prob.c, v)?;
    let h = PerturbedHamiltonian::new(PotentialRef(v), prob.c);
    let h1 = CutoffHamiltonian { spec, potential: v };
    let shots_h = shoot_engine(&h, circle, prob.q0, prob.q1, prob.c, &seeds, &opts)?;
    let shots_h1 = shoot_engine(&h1, circle, prob.q0, prob.q1, prob.c, &seeds, &opts)?;

    let mut used = vec![false; shots_h1.chords.len()];
    let mut matched = Vec::new();
    let mut only_h = Vec::new();
    for a in shots_h.chords.into_iter() {
        let mut hit = None;
        for (j, b) in shots_h1.chords.iter().enumerate() {
            if used[j] {
                continue;
            }
            if angle_gap(a.psi, b.psi) + (a.chord.eta - b.chord.eta).abs() < 1e-6 {
                hit = Some(j);
                break;
            }
        }
        match hit {
            Some(j) => {
                used[j] = true;
                let mu_h = crate::action::maslov_transverse(&a.chord, &h)
                    .ok()
                    .map(|m| m.mu_times_two);
                let mu_h1 = crate::action::maslov_transverse(&shots_h1.chords[j].chord, &h1)
                    .ok()
                    .map(|m| m.mu_times_two);
                let mismatch = match (mu_h, mu_h1) {
                    (Some(x), Some(y)) => x != y,
                    _ => false,
                };
                matched.push(MatchedPair {
                    psi: a.psi,
                    eta: a.chord.eta,
                    maslov_h: mu_h,
                    maslov_h1: mu_h1,
                    index_mismatch: mismatch,
                });
            }
            None => only_h.push(a),
        }
    }
    let only_h1 = shots_h1
        .chords
        .into_iter()
        .zip(used)
        .filter_map(|(b, taken)| if taken { None } else { Some(b) })
        .collect();
    Ok(CritSetComparison { matched, only_h, only_h1 })
}
