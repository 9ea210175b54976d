//! Clifford gates as affine symplectic maps, and compilation of inhomogeneous
//! quadratic Hamiltonians into such maps.
//!
//! Every generator here follows one sign convention: a Hamiltonian `H` with
//! parameter `t` denotes the unitary `U = exp(i t H)`. This makes the textbook
//! forms direct: `X(q) = exp(−i q p̂)`, `Z(p) = exp(i p q̂)`,
//! `F = exp(i π/4 (q̂² + p̂²))`, `P(η) = exp(i η q̂²/2)`, `SUM = exp(−i q̂₁ p̂₂)`.
//! For `H = ½ r̂ᵀ A r̂ + bᵀ r̂` the Heisenberg map is `S = exp(t ΩᵀA)`,
//! `d = ∫₀ᵗ exp(s ΩᵀA) ds · Ωᵀb`.
//!
//! "Conjugating `g` by `u`" always means `u ∘ g ∘ u⁻¹`.

use std::fmt;

use nalgebra::{dmatrix, dvector, DMatrix, DVector};

use crate::error::{ensure_finite, Error, Result};
use crate::phase_space::{omega_left, LocalOp, SymplecticAffine};
use crate::scalar::Real;

fn finite_param<T: Real>(name: &'static str, value: T) -> Result<()> {
    ensure_finite(name, value.as_f64())
}

/// `X(q)`: position translation by `q`.
pub fn pauli_x<T: Real>(q: T) -> Result<SymplecticAffine<T>> {
    finite_param("q", q)?;
    Ok(SymplecticAffine::from_parts_unchecked(DMatrix::identity(2, 2), dvector![q, T::zero()]))
}

/// `Z(p)`: momentum boost by `p`.
pub fn pauli_z<T: Real>(p: T) -> Result<SymplecticAffine<T>> {
    finite_param("p", p)?;
    Ok(SymplecticAffine::from_parts_unchecked(DMatrix::identity(2, 2), dvector![T::zero(), p]))
}

/// `X(q) Z(p)` up to phase.
pub fn displacement<T: Real>(q: T, p: T) -> Result<SymplecticAffine<T>> {
    finite_param("q", q)?;
    finite_param("p", p)?;
    Ok(SymplecticAffine::from_parts_unchecked(DMatrix::identity(2, 2), dvector![q, p]))
}

/// Fourier gate: quarter turn in phase space, `q̂ ↦ −p̂`, `p̂ ↦ q̂`.
pub fn fourier<T: Real>() -> SymplecticAffine<T> {
    let (o, i) = (T::zero(), T::one());
    SymplecticAffine::from_parts_unchecked(dmatrix![o, -i; i, o], DVector::zeros(2))
}

/// Phase gate `P(η)`: shear `p̂ ↦ p̂ + η q̂`.
pub fn phase_gate<T: Real>(eta: T) -> Result<SymplecticAffine<T>> {
    finite_param("eta", eta)?;
    let (o, i) = (T::zero(), T::one());
    Ok(SymplecticAffine::from_parts_unchecked(dmatrix![i, o; eta, i], DVector::zeros(2)))
}

/// Single-mode squeezer. Positive `r` shrinks the `q̂` quadrature:
/// `S = diag(e^{−r}, e^{r})`.
pub fn squeeze<T: Real>(r: T) -> Result<SymplecticAffine<T>> {
    finite_param("r", r)?;
    let o = T::zero();
    Ok(SymplecticAffine::from_parts_unchecked(dmatrix![(-r).exp(), o; o, r.exp()], DVector::zeros(2)))
}

fn check_pair(a: usize, b: usize, n: usize) -> Result<()> {
    if a == b {
        return Err(Error::RepeatedMode(a));
    }
    for index in [a, b] {
        if index >= n {
            return Err(Error::ModeOutOfRange { index, n });
        }
    }
    Ok(())
}

fn sum_matrix<T: Real>() -> DMatrix<T> {
    let (o, i) = (T::zero(), T::one());
    dmatrix![
        i, o, o, o;
        o, i, o, -i;
        i, o, i, o;
        o, o, o, i
    ]
}

fn beamsplitter_matrix<T: Real>(theta: T) -> DMatrix<T> {
    let (c, s, o) = (theta.cos(), theta.sin(), T::zero());
    dmatrix![
        c, o, s, o;
        o, c, o, s;
        -s, o, c, o;
        o, -s, o, c
    ]
}

/// `SUM = exp(−i q̂_ctrl p̂_tgt)`: `q̂_tgt ↦ q̂_tgt + q̂_ctrl`, `p̂_ctrl ↦ p̂_ctrl − p̂_tgt`.
pub fn sum_gate<T: Real>(ctrl: usize, tgt: usize, n: usize) -> Result<LocalOp<T>> {
    check_pair(ctrl, tgt, n)?;
    let op = SymplecticAffine::from_parts_unchecked(sum_matrix(), DVector::zeros(4));
    LocalOp::new(vec![ctrl, tgt], op)
}

/// Beamsplitter rotating `(r̂₁, r̂₂)` by `theta` in mode space:
/// `r̂₁ ↦ cos θ r̂₁ + sin θ r̂₂`, `r̂₂ ↦ −sin θ r̂₁ + cos θ r̂₂`.
pub fn beamsplitter<T: Real>(theta: T, m1: usize, m2: usize, n: usize) -> Result<LocalOp<T>> {
    finite_param("theta", theta)?;
    check_pair(m1, m2, n)?;
    let op = SymplecticAffine::from_parts_unchecked(beamsplitter_matrix(theta), DVector::zeros(4));
    LocalOp::new(vec![m1, m2], op)
}

/// `u ∘ g ∘ u⁻¹`.
pub fn conjugate<T: Real>(u: &SymplecticAffine<T>, g: &SymplecticAffine<T>) -> Result<SymplecticAffine<T>> {
    u.compose(g)?.compose(&u.inverse()?)
}

/// Generator `H = ½ r̂ᵀ A r̂ + bᵀ r̂` applied for time `t` as `exp(i t H)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticHamiltonian<T: Real> {
    a: DMatrix<T>,
    b: DVector<T>,
    t: T,
}

impl<T: Real> QuadraticHamiltonian<T> {
    pub fn new(a: DMatrix<T>, b: DVector<T>, t: T) -> Result<Self> {
        let dim = a.nrows();
        if dim == 0 {
            return Err(Error::ZeroModes);
        }
        if dim % 2 != 0 || a.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim + dim % 2, found: a.ncols() });
        }
        if b.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: b.len() });
        }
        finite_param("t", t)?;
        if a.iter().chain(b.iter()).any(|v| !v.finite()) {
            return Err(Error::NonFinite { name: "A or b", value: f64::NAN });
        }
        let asym = (&a - a.transpose()).iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
        if asym > T::tol(1e-12) {
            return Err(Error::NotSymmetric { asymmetry: asym.as_f64() });
        }
        let a = (&a + a.transpose()) * T::half();
        Ok(Self { a, b, t })
    }

    /// Homogeneous generator (`b = 0`).
    pub fn homogeneous(a: DMatrix<T>, t: T) -> Result<Self> {
        let dim = a.nrows();
        Self::new(a, DVector::zeros(dim), t)
    }

    pub fn n(&self) -> usize {
        self.a.nrows() / 2
    }

    pub fn a(&self) -> &DMatrix<T> {
        &self.a
    }

    pub fn b(&self) -> &DVector<T> {
        &self.b
    }

    pub fn t(&self) -> T {
        self.t
    }
}

/// Compiles a quadratic Hamiltonian into its affine symplectic action.
///
/// Exponentiates the augmented generator `t·[[ΩᵀA, Ωᵀb], [0, 0]]`, so the
/// displacement integral needs no special case when `ΩᵀA` is singular.
pub fn from_quadratic_hamiltonian<T: Real>(h: &QuadraticHamiltonian<T>) -> Result<SymplecticAffine<T>> {
    let dim = h.a.nrows();
    // Ωᵀ X = −Ω X
    let mut k = h.a.clone();
    omega_left(&mut k);
    k.neg_mut();
    let mut kb = DMatrix::from_column_slice(dim, 1, h.b.as_slice());
    omega_left(&mut kb);
    kb.neg_mut();

    let mut gen = DMatrix::<T>::zeros(dim + 1, dim + 1);
    gen.view_mut((0, 0), (dim, dim)).copy_from(&(k * h.t));
    gen.view_mut((0, dim), (dim, 1)).copy_from(&(kb * h.t));
    let e = gen.exp();
    let s = e.view((0, 0), (dim, dim)).into_owned();
    let d = DVector::from_iterator(dim, e.view((0, dim), (dim, 1)).iter().copied());
    SymplecticAffine::new(s, d)
}

/// A concrete gate from the library, with its parameters bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    Displace { q: f64, p: f64 },
    Squeeze { r: f64 },
    Fourier,
    Phase { eta: f64 },
    Sum,
    Beamsplitter { theta: f64 },
}

impl Gate {
    /// Number of modes the gate acts on.
    pub fn arity(&self) -> usize {
        match self {
            Gate::Sum | Gate::Beamsplitter { .. } => 2,
            _ => 1,
        }
    }

    /// Closed-form local action on `arity()` modes.
    pub fn affine<T: Real>(&self) -> Result<SymplecticAffine<T>> {
        Ok(match *self {
            Gate::Displace { q, p } => displacement(T::lit(q), T::lit(p))?,
            Gate::Squeeze { r } => squeeze(T::lit(r))?,
            Gate::Fourier => fourier(),
            Gate::Phase { eta } => phase_gate(T::lit(eta))?,
            Gate::Sum => SymplecticAffine::from_parts_unchecked(sum_matrix(), DVector::zeros(4)),
            Gate::Beamsplitter { theta } => {
                ensure_finite("theta", theta)?;
                SymplecticAffine::from_parts_unchecked(beamsplitter_matrix(T::lit(theta)), DVector::zeros(4))
            }
        })
    }

    /// The gate placed on `modes`.
    pub fn on<T: Real>(&self, modes: &[usize]) -> Result<LocalOp<T>> {
        if modes.len() != self.arity() {
            return Err(Error::DimensionMismatch { expected: self.arity(), found: modes.len() });
        }
        LocalOp::new(modes.to_vec(), self.affine()?)
    }

    /// The generator of the gate on its local modes, in the `exp(i t H)` convention.
    pub fn hamiltonian<T: Real>(&self) -> Result<QuadraticHamiltonian<T>> {
        let (o, i) = (T::zero(), T::one());
        match *self {
            Gate::Displace { q, p } => {
                // exp(i (p q̂ − q p̂))
                QuadraticHamiltonian::new(DMatrix::zeros(2, 2), dvector![T::lit(p), T::lit(-q)], i)
            }
            Gate::Squeeze { r } => QuadraticHamiltonian::homogeneous(dmatrix![o, i; i, o], T::lit(r)),
            Gate::Fourier => QuadraticHamiltonian::homogeneous(DMatrix::identity(2, 2) * T::FRAC_PI_2(), i),
            Gate::Phase { eta } => QuadraticHamiltonian::homogeneous(dmatrix![i, o; o, o], T::lit(eta)),
            Gate::Sum => QuadraticHamiltonian::homogeneous(
                dmatrix![
                    o, o, o, -i;
                    o, o, o, o;
                    o, o, o, o;
                    -i, o, o, o
                ],
                i,
            ),
            Gate::Beamsplitter { theta } => QuadraticHamiltonian::homogeneous(
                dmatrix![
                    o, o, o, i;
                    o, o, -i, o;
                    o, -i, o, o;
                    i, o, o, o
                ],
                T::lit(theta),
            ),
        }
    }

    pub fn mnemonic(&self) -> &'static str {
        match self {
            Gate::Displace { .. } => "disp",
            Gate::Squeeze { .. } => "sqz",
            Gate::Fourier => "fourier",
            Gate::Phase { .. } => "phase",
            Gate::Sum => "sum",
            Gate::Beamsplitter { .. } => "bs",
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::Displace { q, p } => write!(f, "disp({q}, {p})"),
            Gate::Squeeze { r } => write!(f, "sqz({r})"),
            Gate::Fourier => write!(f, "fourier"),
            Gate::Phase { eta } => write!(f, "phase({eta})"),
            Gate::Sum => write!(f, "sum"),
            Gate::Beamsplitter { theta } => write!(f, "bs({theta})"),
        }
    }
}
