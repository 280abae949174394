//! The dilation bijection between chords of H_delta and chords of H0, and
//! the small-delta multiplier analysis behind the free-Hamiltonian limit.

use crate::chords::{chord_from_eta, find_roots, multiplier_function, Chord, RootFindOptions, TwoBoostProblem};
use crate::error::{Error, Result};
use crate::symplectic::Vec2;

/// Largest delta for which the multiplier of the delta-problem is provably
/// unique: sqrt(2 / (|q0| |q1|)), infinite if an endpoint is the origin.
pub fn scaling_limit(q0: Vec2, q1: Vec2) -> f64 {
    let m = q0.norm() * q1.norm();
    if m == 0.0 {
        f64::INFINITY
    } else {
        (2.0 / m).sqrt()
    }
}

/// g_delta(eta) = -eta^2 + delta eta q1.R(delta eta + pi/2) q0
///                + (|q0|^2 + |q1|^2)/2 - q1.R(delta eta) q0,
/// whose positive root is the energy-1 multiplier of the delta-problem.
pub fn g_delta(q0: Vec2, q1: Vec2, delta: f64, eta: f64) -> f64 {
    let s = delta.sqrt();
    let prob = TwoBoostProblem { q0: q0.scale(s), q1: q1.scale(s), c: 1.0 / delta };
    multiplier_function(&prob, delta * eta) / delta
}

#[derive(Debug, Clone, Copy)]
pub struct GDeltaAnalysis {
    pub eta_delta: f64,
    pub lower: f64,
    pub upper: f64,
}

/// The unique positive multiplier of the energy-1 chord problem for H_delta,
/// with the closed-form bracket that pins its free-Hamiltonian limit.
pub fn g_delta_analysis(q0: Vec2, q1: Vec2, delta: f64) -> Result<GDeltaAnalysis> {
    if !(delta > 0.0) {
        return Err(Error::InvalidInput { detail: format!("need delta > 0, got {delta}") });
    }
    let limit = scaling_limit(q0, q1);
    if delta >= limit {
        return Err(Error::ScalingOutOfRange { delta, limit });
    }
    let s = delta.sqrt();
    let prob = TwoBoostProblem::new(q0.scale(s), q1.scale(s), 1.0 / delta)?;
    let roots = find_roots(&prob, RootFindOptions::default())?;
    let positives: Vec<f64> = roots.iter().filter(|r| r.eta > 0.0).map(|r| r.eta).collect();
    if positives.len() != 1 {
        return Err(Error::IntegrationFailure {
            detail: format!(
                "expected a unique positive multiplier below the scaling limit, found {}",
                positives.len()
            ),
        });
    }
    let m = q0.norm() * q1.norm();
    let gap = (q1 - q0).norm();
    Ok(GDeltaAnalysis {
        eta_delta: positives[0] / delta,
        // at a zero, eta^2 = |q1 - q0|^2 / 2 + F(delta eta) with
        // |F(s)| <= m s^2 / 2, so the bracket stays finite and valid on the
        // whole range delta^2 m < 2
        lower: gap / (2.0 + delta * delta * m).sqrt(),
        upper: gap / (2.0 - delta * delta * m).sqrt(),
    })
}

fn transform(chord: &Chord, delta: f64) -> Chord {
    let s = delta.sqrt();
    let samples = chord
        .samples
        .iter()
        .map(|x| crate::hamiltonian::dilate(delta, *x))
        .collect();
    let stretch = s.max(1.0 / s);
    Chord {
        eta: delta * chord.eta,
        c: chord.c / delta,
        q0: chord.q0.scale(s),
        q1: chord.q1.scale(s),
        samples,
        residual_boundary: chord.residual_boundary * s,
        residual_energy: chord.residual_energy / delta,
        residual_ode: chord.residual_ode * stretch,
    }
}

/// Map a chord of H_delta at energy c to the chord of H0 at energy c/delta
/// through (v, eta) -> (phi_delta . v, delta eta).
pub fn scaling_map(chord: &Chord, delta: f64) -> Result<Chord> {
    if !(delta > 0.0) {
        return Err(Error::InvalidInput { detail: format!("need delta > 0, got {delta}") });
    }
    Ok(transform(chord, delta))
}

/// Inverse of `scaling_map`: H0 chord at energy c to H_delta chord at delta c.
pub fn scaling_map_inverse(chord: &Chord, delta: f64) -> Result<Chord> {
    if !(delta > 0.0) {
        return Err(Error::InvalidInput { detail: format!("need delta > 0, got {delta}") });
    }
    Ok(transform(chord, 1.0 / delta))
}

/// The energy-1 chord of H_delta between q0 and q1, built in closed form
/// through the scaled H0 problem.
pub fn scaled_chord(q0: Vec2, q1: Vec2, delta: f64, n: usize) -> Result<(Chord, GDeltaAnalysis)> {
    let analysis = g_delta_analysis(q0, q1, delta)?;
    let s = delta.sqrt();
    let prob = TwoBoostProblem::new(q0.scale(s), q1.scale(s), 1.0 / delta)?;
    let h0_chord = chord_from_eta(&prob, delta * analysis.eta_delta, n)?;
    Ok((scaling_map_inverse(&h0_chord, delta)?, analysis))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{Hamiltonian, ScaledHamiltonian};

    fn unit_pair() -> (Vec2, Vec2) {
        (Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0))
    }

    #[test]
    fn g_matches_direct_formula() {
        let (q0, q1) = unit_pair();
        for &delta in &[0.05, 0.3, 0.9] {
            for &eta in &[0.4, 1.0, 2.2] {
                let direct = -eta * eta
                    + delta
                        * eta
                        * q1.dot(crate::symplectic::rotation(delta * eta + std::f64::consts::FRAC_PI_2).mul_vec(q0))
                    + 0.5 * (q0.norm_sq() + q1.norm_sq())
                    - q1.dot(crate::symplectic::rotation(delta * eta).mul_vec(q0));
                assert!((g_delta(q0, q1, delta, eta) - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn analysis_bracket_small_delta() {
        let (q0, q1) = unit_pair();
        let a = g_delta_analysis(q0, q1, 0.1).unwrap();
        assert!(a.lower <= a.eta_delta && a.eta_delta <= a.upper);
        assert!(a.lower > 0.995 && a.upper < 1.006, "{a:?}");
        assert!(g_delta(q0, q1, 0.1, a.eta_delta).abs() < 1e-8);
    }

    #[test]
    fn analysis_free_limit() {
        let (q0, q1) = unit_pair();
        let a = g_delta_analysis(q0, q1, 1e-3).unwrap();
        assert!((a.eta_delta - 1.0).abs() < 1e-4);
    }

    #[test]
    fn rejects_delta_beyond_limit() {
        let (q0, q1) = unit_pair();
        assert!((scaling_limit(q0, q1) - 2.0f64.sqrt()).abs() < 1e-15);
        assert!(matches!(
            g_delta_analysis(q0, q1, 2.0),
            Err(Error::ScalingOutOfRange { .. })
        ));
    }

    #[test]
    fn origin_endpoint_has_no_limit() {
        let q0 = Vec2::new(0.0, 0.0);
        let q1 = Vec2::new(1.0, 1.0);
        assert!(scaling_limit(q0, q1).is_infinite());
        let a = g_delta_analysis(q0, q1, 5.0).unwrap();
        assert!(a.eta_delta > 0.0);
    }

    #[test]
    fn map_at_delta_one_is_identity() {
        let (q0, q1) = unit_pair();
        let prob = TwoBoostProblem::new(q0, q1, 0.5).unwrap();
        let roots = find_roots(&prob, RootFindOptions::default()).unwrap();
        let chord = chord_from_eta(&prob, roots.last().unwrap().eta, 32).unwrap();
        let mapped = scaling_map(&chord, 1.0).unwrap();
        assert_eq!(mapped.eta, chord.eta);
        for (a, b) in mapped.samples.iter().zip(chord.samples.iter()) {
            assert_eq!(a.to_array(), b.to_array());
        }
    }

    #[test]
    fn round_trip_is_tight() {
        let (q0, q1) = unit_pair();
        for &delta in &[0.01, 0.1, 0.5] {
            let (chord, _) = scaled_chord(q0, q1, delta, 64).unwrap();
            let there = scaling_map(&chord, delta).unwrap();
            let back = scaling_map_inverse(&there, delta).unwrap();
            for (a, b) in back.samples.iter().zip(chord.samples.iter()) {
                for (u, v) in a.to_array().iter().zip(b.to_array().iter()) {
                    assert!((u - v).abs() < 1e-12);
                }
            }
            assert!((back.eta - chord.eta).abs() < 1e-12 * chord.eta.abs());
        }
    }

    #[test]
    fn image_lives_on_the_scaled_level() {
        let (q0, q1) = unit_pair();
        let (chord, _) = scaled_chord(q0, q1, 0.1, 128).unwrap();
        let hd = ScaledHamiltonian::new(0.1);
        for x in &chord.samples {
            assert!((hd.value(*x) - 1.0).abs() < 1e-10);
        }
        let image = scaling_map(&chord, 0.1).unwrap();
        assert!((image.c - 10.0).abs() < 1e-14);
        for x in &image.samples {
            assert!((crate::hamiltonian::h0_eval(*x) - 10.0).abs() < 1e-8);
        }
        assert!(image.residual_boundary <= 1e-10);
        assert!(image.residual_energy <= 1e-8);
        assert!(image.residual_ode <= 1e-6);
    }
}
