//! Homodyne measurement, linear loss and partial trace on Gaussian states.
//!
//! Sampling draws from the injected RNG through `rand_distr::StandardNormal`.
//! The reference stream is ChaCha8 seeded with `seed_from_u64`, with shot `i`
//! on stream `i` (see [`shot_rng`]); this pair is identified by [`RNG_ID`].

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::phase_space::{p_index, q_index, GaussianState};
use crate::scalar::Real;

/// Identifier of the reproducible sampling scheme.
pub const RNG_ID: &str = "chacha8-stream-per-shot/standard-normal";

/// Smallest marginal variance used as a divisor.
pub const VARIANCE_FLOOR: f64 = 1e-300;

/// The RNG for shot `shot` of a run seeded with `seed`.
pub fn shot_rng(seed: u64, shot: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    rng
}

/// Measurement basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quadrature {
    Q,
    P,
}

impl Quadrature {
    /// Index of this quadrature of `mode` in the interleaved layout.
    pub fn index(self, mode: usize) -> usize {
        match self {
            Quadrature::Q => q_index(mode),
            Quadrature::P => p_index(mode),
        }
    }
}

impl fmt::Display for Quadrature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quadrature::Q => "q",
            Quadrature::P => "p",
        })
    }
}

impl FromStr for Quadrature {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "q" => Ok(Quadrature::Q),
            "p" => Ok(Quadrature::P),
            other => Err(format!("unknown quadrature `{other}` (expected q or p)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcome<T: Real> {
    pub mode: usize,
    pub basis: Quadrature,
    pub value: T,
    /// Conditional state, measured mode reset to vacuum.
    pub posterior: GaussianState<T>,
}

fn check_mode<T: Real>(state: &GaussianState<T>, mode: usize) -> Result<()> {
    if mode >= state.n() {
        return Err(Error::ModeOutOfRange { index: mode, n: state.n() });
    }
    Ok(())
}

/// Marginal `(mean, variance)` of one quadrature.
pub fn marginal<T: Real>(state: &GaussianState<T>, mode: usize, basis: Quadrature) -> Result<(T, T)> {
    check_mode(state, mode)?;
    let k = basis.index(mode);
    let var = state.covariance()[(k, k)];
    if !(var > T::zero()) {
        return Err(Error::NonPositiveVariance(var.as_f64()));
    }
    Ok((state.mean()[k], var))
}

/// Conditions on `value` of the chosen quadrature in place, then resets the mode.
pub fn condition_in_place<T: Real>(state: &mut GaussianState<T>, mode: usize, basis: Quadrature, value: T) -> Result<()> {
    let (mean_k, var) = marginal(state, mode, basis)?;
    let k = basis.index(mode);
    let var = var.max(T::lit(VARIANCE_FLOOR));
    let scale = var.sqrt().recip();
    let (mu, sigma) = state.parts_mut();
    let w: DVector<T> = sigma.column(k) * scale;
    mu.axpy((value - mean_k) * scale, &w, T::one());
    // rank-1 downdate keeps Σ bitwise symmetric
    sigma.ger(-T::one(), &w, &w, T::one());
    state.reset_mode(mode)
}

fn draw<T: Real, R: Rng + ?Sized>(mean: T, var: T, rng: &mut R) -> T {
    let z: f64 = rng.sample(StandardNormal);
    mean + var.sqrt() * T::lit(z)
}

/// Samples and conditions in place, returning the outcome. O(n²), no copies.
pub fn homodyne_in_place<T: Real, R: Rng + ?Sized>(
    state: &mut GaussianState<T>,
    mode: usize,
    basis: Quadrature,
    rng: &mut R,
) -> Result<T> {
    let (mean, var) = marginal(state, mode, basis)?;
    let value = draw(mean, var, rng);
    condition_in_place(state, mode, basis, value)?;
    Ok(value)
}

pub fn homodyne_sample<T: Real, R: Rng + ?Sized>(
    state: &GaussianState<T>,
    mode: usize,
    basis: Quadrature,
    rng: &mut R,
) -> Result<MeasurementOutcome<T>> {
    let mut posterior = state.clone();
    let value = homodyne_in_place(&mut posterior, mode, basis, rng)?;
    Ok(MeasurementOutcome { mode, basis, value, posterior })
}

/// Pure-loss channel of transmissivity `eta` on one mode, in place.
pub fn loss_in_place<T: Real>(state: &mut GaussianState<T>, mode: usize, eta: T) -> Result<()> {
    check_mode(state, mode)?;
    if !(eta >= T::zero() && eta <= T::one()) {
        return Err(Error::Transmissivity(eta.as_f64()));
    }
    if eta == T::one() {
        return Ok(());
    }
    let t = eta.sqrt();
    let (mu, sigma) = state.parts_mut();
    let (q, p) = (q_index(mode), p_index(mode));
    for i in [q, p] {
        mu[i] *= t;
        sigma.column_mut(i).scale_mut(t);
        sigma.row_mut(i).scale_mut(t);
    }
    let noise = (T::one() - eta) * T::half();
    sigma[(q, q)] += noise;
    sigma[(p, p)] += noise;
    Ok(())
}

pub fn loss_channel<T: Real>(state: &GaussianState<T>, mode: usize, eta: T) -> Result<GaussianState<T>> {
    let mut out = state.clone();
    loss_in_place(&mut out, mode, eta)?;
    Ok(out)
}

/// Detector of efficiency `eta`: loss on the mode, then homodyne.
pub fn lossy_homodyne<T: Real, R: Rng + ?Sized>(
    state: &GaussianState<T>,
    mode: usize,
    basis: Quadrature,
    eta: T,
    rng: &mut R,
) -> Result<MeasurementOutcome<T>> {
    let lossy = loss_channel(state, mode, eta)?;
    homodyne_sample(&lossy, mode, basis, rng)
}

/// Removes a mode (Gaussian partial trace).
pub fn trace_out<T: Real>(state: &GaussianState<T>, mode: usize) -> Result<GaussianState<T>> {
    check_mode(state, mode)?;
    if state.n() == 1 {
        return Err(Error::LastMode);
    }
    let q = q_index(mode);
    let mu = state.mean().clone().remove_rows(q, 2);
    let sigma: DMatrix<T> = state.covariance().clone().remove_rows(q, 2).remove_columns(q, 2);
    Ok(GaussianState::from_parts_unchecked(mu, sigma))
}
