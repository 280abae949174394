//! Error type shared by all solvers in this crate.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("polar coordinates are undefined at q = 0")]
    ZeroRadius,

    #[error("chord reconstruction needs a nonzero multiplier; constant solutions form a circle of momenta, see `constant_circle`")]
    ZeroMultiplier,

    #[error("the two endpoints coincide; the nonconstant-chord formulas need q0 != q1")]
    CoincidentEndpoints,

    #[error("degenerate root at eta = {eta}: |f| = {f_value:.3e}, |f'| = {f_prime:.3e} below tolerance; generic energies avoid this, retry with a slightly nudged c")]
    DegenerateRoot { eta: f64, f_value: f64, f_prime: f64 },

    #[error("scaling parameter delta = {delta} is outside (0, {limit}); the unique-positive-root analysis needs delta^2 |q0||q1| < 2")]
    ScalingOutOfRange { delta: f64, limit: f64 },

    #[error("the fiber over q misses the level set: |q|^2 + 2(c + V(q)) = {radicand} <= 0")]
    EmptyFiber { radicand: f64 },

    #[error("potential fails its decay hypotheses: {detail}")]
    DecayHypothesis { detail: String },

    #[error("index trivialization breaks down at t = {t}: {detail}")]
    TrivializationBreakdown { t: f64, detail: String },

    #[error("integration failed: {detail}")]
    IntegrationFailure { detail: String },

    #[error("invalid input: {detail}")]
    InvalidInput { detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;
