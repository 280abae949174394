//! Adaptive fourth-order Runge-Kutta integration of Hamiltonian flows, with
//! uniform-grid sampling and variational (linearized flow) tables.

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::symplectic::{Mat4, PhasePoint};

#[derive(Debug, Clone, Copy)]
pub struct IntegratorConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig { abs_tol: 1e-12, rel_tol: 1e-12, max_steps: 4_000_000 }
    }
}

impl IntegratorConfig {
    /// Looser tolerances for throwaway shots during seed winnowing.
    pub fn coarse() -> Self {
        IntegratorConfig { abs_tol: 1e-8, rel_tol: 1e-8, max_steps: 400_000 }
    }
}

fn rk4<const N: usize>(f: &dyn Fn(&[f64; N]) -> [f64; N], x: &[f64; N], dt: f64) -> [f64; N] {
    let k1 = f(x);
    let mut tmp = [0.0; N];
    for i in 0..N {
        tmp[i] = x[i] + 0.5 * dt * k1[i];
    }
    let k2 = f(&tmp);
    for i in 0..N {
        tmp[i] = x[i] + 0.5 * dt * k2[i];
    }
    let k3 = f(&tmp);
    for i in 0..N {
        tmp[i] = x[i] + dt * k3[i];
    }
    let k4 = f(&tmp);
    let mut out = [0.0; N];
    for i in 0..N {
        out[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

struct Stepper<'a, const N: usize> {
    f: &'a dyn Fn(&[f64; N]) -> [f64; N],
    cfg: IntegratorConfig,
    h_next: f64,
    steps: usize,
}

impl<'a, const N: usize> Stepper<'a, N> {
    fn new(f: &'a dyn Fn(&[f64; N]) -> [f64; N], span: f64, cfg: IntegratorConfig) -> Self {
        let h0 = (span.abs() / 100.0).clamp(1e-6, 0.05).copysign(span);
        Stepper { f, cfg, h_next: h0, steps: 0 }
    }

    /// Advance the state from time t to t_end, recording accepted points when
    /// a sink is given.
    fn advance(
        &mut self,
        x: &mut [f64; N],
        mut t: f64,
        t_end: f64,
        mut sink: Option<&mut Vec<[f64; N]>>,
    ) -> Result<()> {
        if t == t_end {
            return Ok(());
        }
        let dir = (t_end - t).signum();
        while (t_end - t) * dir > 0.0 {
            let mut h = self.h_next.abs().min((t_end - t).abs()).copysign(dir);
            loop {
                self.steps += 1;
                if self.steps > self.cfg.max_steps {
                    return Err(Error::IntegrationFailure {
                        detail: format!("step budget {} exhausted at t = {t}", self.cfg.max_steps),
                    });
                }
                let y1 = rk4(self.f, x, h);
                let half = rk4(self.f, x, 0.5 * h);
                let y2 = rk4(self.f, &half, 0.5 * h);
                let mut ratio: f64 = 0.0;
                let mut finite = true;
                for i in 0..N {
                    if !y2[i].is_finite() {
                        finite = false;
                        break;
                    }
                    let scale =
                        self.cfg.abs_tol + self.cfg.rel_tol * x[i].abs().max(y2[i].abs());
                    ratio = ratio.max(((y2[i] - y1[i]) / 15.0).abs() / scale);
                }
                if !finite {
                    return Err(Error::IntegrationFailure {
                        detail: format!("state became non-finite near t = {t}"),
                    });
                }
                if ratio <= 1.0 {
                    for i in 0..N {
                        x[i] = y2[i] + (y2[i] - y1[i]) / 15.0;
                    }
                    t += h;
                    let grow = if ratio > 0.0 { 0.9 * ratio.powf(-0.2) } else { 5.0 };
                    self.h_next = h * grow.clamp(0.2, 5.0);
                    if let Some(ref mut points) = sink {
                        points.push(*x);
                    }
                    break;
                }
                h *= (0.9 * ratio.powf(-0.2)).clamp(0.1, 0.9);
                if h.abs() < 1e-14 * (1.0 + t.abs()) {
                    return Err(Error::IntegrationFailure {
                        detail: format!("step size underflow at t = {t}"),
                    });
                }
            }
        }
        Ok(())
    }
}

fn field_fn<'a>(h: &'a dyn Hamiltonian) -> impl Fn(&[f64; 4]) -> [f64; 4] + 'a {
    move |x: &[f64; 4]| h.field(PhasePoint::from_array(*x))
}

/// Flow x0 for time t, returning every accepted step (first entry x0, last
/// entry exactly at time t).
pub fn integrate(
    h: &dyn Hamiltonian,
    x0: PhasePoint,
    t: f64,
    cfg: IntegratorConfig,
) -> Result<Vec<PhasePoint>> {
    let f = field_fn(h);
    let mut points = vec![x0.to_array()];
    let mut x = x0.to_array();
    let mut stepper = Stepper::new(&f, t, cfg);
    stepper.advance(&mut x, 0.0, t, Some(&mut points))?;
    Ok(points.into_iter().map(PhasePoint::from_array).collect())
}

/// Endpoint of the time-t flow.
pub fn integrate_to(
    h: &dyn Hamiltonian,
    x0: PhasePoint,
    t: f64,
    cfg: IntegratorConfig,
) -> Result<PhasePoint> {
    let f = field_fn(h);
    let mut x = x0.to_array();
    let mut stepper = Stepper::new(&f, t, cfg);
    stepper.advance(&mut x, 0.0, t, None)?;
    Ok(PhasePoint::from_array(x))
}

/// Flow sampled at n+1 uniform times over [0, t], endpoints exact.
pub fn integrate_path(
    h: &dyn Hamiltonian,
    x0: PhasePoint,
    t: f64,
    n: usize,
    cfg: IntegratorConfig,
) -> Result<Vec<PhasePoint>> {
    if n == 0 {
        return Err(Error::InvalidInput { detail: "need at least one segment".into() });
    }
    let f = field_fn(h);
    let mut out = Vec::with_capacity(n + 1);
    out.push(x0);
    let mut x = x0.to_array();
    let mut stepper = Stepper::new(&f, t, cfg);
    for i in 1..=n {
        let t_from = t * (i - 1) as f64 / n as f64;
        let t_to = t * i as f64 / n as f64;
        stepper.advance(&mut x, t_from, t_to, None)?;
        out.push(PhasePoint::from_array(x));
    }
    Ok(out)
}

/// Flow and linearized flow sampled at n+1 uniform times over [0, t]: the
/// matrices solve dPhi/dt = DX_H(x(t)) Phi with Phi(0) = I.
pub fn integrate_with_variational(
    h: &dyn Hamiltonian,
    x0: PhasePoint,
    t: f64,
    n: usize,
    cfg: IntegratorConfig,
) -> Result<(Vec<PhasePoint>, Vec<Mat4>)> {
    if n == 0 {
        return Err(Error::InvalidInput { detail: "need at least one segment".into() });
    }
    let f = move |s: &[f64; 20]| -> [f64; 20] {
        let x = PhasePoint::from_array([s[0], s[1], s[2], s[3]]);
        let v = h.field(x);
        let jac = h.field_jacobian(x);
        let mut out = [0.0; 20];
        out[..4].copy_from_slice(&v);
        for i in 0..4 {
            for j in 0..4 {
                let mut acc = 0.0;
                for k in 0..4 {
                    acc += jac.0[i][k] * s[4 + 4 * k + j];
                }
                out[4 + 4 * i + j] = acc;
            }
        }
        out
    };
    let mut s = [0.0; 20];
    s[..4].copy_from_slice(&x0.to_array());
    for i in 0..4 {
        s[4 + 5 * i] = 1.0;
    }
    let unpack = |s: &[f64; 20]| -> (PhasePoint, Mat4) {
        let x = PhasePoint::from_array([s[0], s[1], s[2], s[3]]);
        let mut m = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] = s[4 + 4 * i + j];
            }
        }
        (x, Mat4(m))
    };
    let mut xs = Vec::with_capacity(n + 1);
    let mut phis = Vec::with_capacity(n + 1);
    let (x, phi) = unpack(&s);
    xs.push(x);
    phis.push(phi);
    let mut stepper = Stepper::new(&f, t, cfg);
    for i in 1..=n {
        let t_from = t * (i - 1) as f64 / n as f64;
        let t_to = t * i as f64 / n as f64;
        stepper.advance(&mut s, t_from, t_to, None)?;
        let (x, phi) = unpack(&s);
        xs.push(x);
        phis.push(phi);
    }
    Ok((xs, phis))
}

/// Fixed-step RK4 endpoint, for order checks.
pub fn rk4_fixed(h: &dyn Hamiltonian, x0: PhasePoint, t: f64, n_steps: usize) -> PhasePoint {
    let f = field_fn(h);
    let dt = t / n_steps as f64;
    let mut x = x0.to_array();
    for _ in 0..n_steps {
        x = rk4(&f, &x, dt);
    }
    PhasePoint::from_array(x)
}
