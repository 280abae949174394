//! Rotation algebra on the plane, the linearized flow of the rotating-frame
//! Hamiltonian, the standard symplectic form on R^4, and the polar chart.

use crate::error::{Error, Result};
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Counterclockwise quarter turn (-y, x).
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn scale(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        self.scale(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);
    pub const ZERO: Mat2 = Mat2([[0.0, 0.0], [0.0, 0.0]]);

    pub fn mul_vec(self, v: Vec2) -> Vec2 {
        Vec2::new(
            self.0[0][0] * v.x + self.0[0][1] * v.y,
            self.0[1][0] * v.x + self.0[1][1] * v.y,
        )
    }

    pub fn mul(self, other: Mat2) -> Mat2 {
        let mut out = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = self.0[i][0] * other.0[0][j] + self.0[i][1] * other.0[1][j];
            }
        }
        Mat2(out)
    }

    pub fn transpose(self) -> Mat2 {
        Mat2([[self.0[0][0], self.0[1][0]], [self.0[0][1], self.0[1][1]]])
    }

    pub fn scale(self, s: f64) -> Mat2 {
        let mut out = self.0;
        for row in &mut out {
            for e in row {
                *e *= s;
            }
        }
        Mat2(out)
    }
}

/// R(t) = [[cos t, sin t], [-sin t, cos t]].  R(s)R(t) = R(s+t) and
/// R'(t) = R(t + pi/2).
pub fn rotation(t: f64) -> Mat2 {
    let (s, c) = t.sin_cos();
    Mat2([[c, s], [-s, c]])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat4(pub [[f64; 4]; 4]);

impl Mat4 {
    pub const IDENTITY: Mat4 = Mat4([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]);

    pub const ZERO: Mat4 = Mat4([[0.0; 4]; 4]);

    /// Assemble from 2x2 blocks [[a, b], [c, d]].
    pub fn from_blocks(a: Mat2, b: Mat2, c: Mat2, d: Mat2) -> Mat4 {
        let mut m = [[0.0; 4]; 4];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = a.0[i][j];
                m[i][j + 2] = b.0[i][j];
                m[i + 2][j] = c.0[i][j];
                m[i + 2][j + 2] = d.0[i][j];
            }
        }
        Mat4(m)
    }

    pub fn mul_vec(self, v: [f64; 4]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for i in 0..4 {
            out[i] = (0..4).map(|j| self.0[i][j] * v[j]).sum();
        }
        out
    }

    pub fn mul(self, other: Mat4) -> Mat4 {
        let mut out = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] = (0..4).map(|k| self.0[i][k] * other.0[k][j]).sum();
            }
        }
        Mat4(out)
    }

    pub fn transpose(self) -> Mat4 {
        let mut out = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] = self.0[j][i];
            }
        }
        Mat4(out)
    }
}

/// Linearized flow of the rotating-frame Hamiltonian after time t:
/// [[R(t), t R(t)], [0, R(t)]].
pub fn flow_matrix(t: f64) -> Mat4 {
    let r = rotation(t);
    Mat4::from_blocks(r, r.scale(t), Mat2::ZERO, r)
}

/// Standard symplectic matrix: omega(u, v) = u^T Omega v = u_q . v_p - u_p . v_q.
pub fn symplectic_form() -> Mat4 {
    Mat4::from_blocks(Mat2::ZERO, Mat2::IDENTITY, Mat2::IDENTITY.scale(-1.0), Mat2::ZERO)
}

/// omega(u, v) for tangent vectors (dq, dp) of T*R^2.
pub fn omega(u: [f64; 4], v: [f64; 4]) -> f64 {
    u[0] * v[2] + u[1] * v[3] - u[2] * v[0] - u[3] * v[1]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub q: Vec2,
    pub p: Vec2,
}

impl PhasePoint {
    pub fn new(q: Vec2, p: Vec2) -> Self {
        PhasePoint { q, p }
    }

    pub fn from_coords(q1: f64, q2: f64, p1: f64, p2: f64) -> Self {
        PhasePoint::new(Vec2::new(q1, q2), Vec2::new(p1, p2))
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.q.x, self.q.y, self.p.x, self.p.y]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        PhasePoint::from_coords(a[0], a[1], a[2], a[3])
    }

    pub fn is_finite(self) -> bool {
        self.q.is_finite() && self.p.is_finite()
    }
}

/// Polar view (r, theta, p_r, p_theta) with the counterclockwise angle
/// theta = atan2(q2, q1) and its conjugate momentum p_theta = q1 p2 - q2 p1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarPoint {
    pub r: f64,
    pub theta: f64,
    pub p_r: f64,
    pub p_theta: f64,
}

pub fn to_polar(x: PhasePoint) -> Result<PolarPoint> {
    let r = x.q.norm();
    if r == 0.0 {
        return Err(Error::ZeroRadius);
    }
    Ok(PolarPoint {
        r,
        theta: x.q.y.atan2(x.q.x),
        p_r: x.q.dot(x.p) / r,
        p_theta: x.q.x * x.p.y - x.q.y * x.p.x,
    })
}

pub fn from_polar(y: PolarPoint) -> PhasePoint {
    let (s, c) = y.theta.sin_cos();
    let e_r = Vec2::new(c, s);
    let e_theta = Vec2::new(-s, c);
    PhasePoint::new(e_r.scale(y.r), e_r.scale(y.p_r) + e_theta.scale(y.p_theta / y.r))
}
