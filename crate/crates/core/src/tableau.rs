//! Heisenberg-picture tracking of stabilizer generators instead of states.
//!
//! [`GeneratorTableau`] follows `n` real rows for ideal position-eigenstate inputs
//! (`2n²` numbers), [`NullifierTableau`] follows `n` complex nullifier rows for
//! squeezed-vacuum inputs (`4n²` numbers).
//!
//! A row `m` with constant `c` stands for the operator `m·r̂ + c`. Evolving by a
//! unitary with Heisenberg map `(S, d)` conjugates the operator to
//! `m S⁻¹ r̂ + c − m S⁻¹ d`.

use nalgebra::{Complex, ComplexField, DMatrix, DVector, SymmetricEigen};
use rand::Rng;

use crate::error::{ensure_finite, Error, Result};
use crate::measurement::Quadrature;
use crate::phase_space::{omega_left, omega_right, q_index, GaussianState, LocalOp, SymplecticAffine};
use crate::scalar::Real;

/// Default half-width of the uniform window standing in for the improper
/// distribution of unconstrained conjugate quadratures.
pub const DEFAULT_WINDOW: f64 = 1e3;

/// Rank tolerance on the tableau rows (ratio of extreme singular values).
pub const RANK_TOL: f64 = 1e-8;

fn check_n(n: usize, found: usize) -> Result<()> {
    if n != found {
        return Err(Error::DimensionMismatch { expected: n, found });
    }
    Ok(())
}

/// Indices, local `S⁻¹` and local `d`.
fn local_inverse<T: Real>(op: &LocalOp<T>) -> Result<(Vec<usize>, DMatrix<T>, DVector<T>)> {
    let (s_inv, _) = op.op().inverse()?.into_parts();
    Ok((op.indices(), s_inv, op.op().displacement().clone()))
}

/// Stabilizer rows `(M r̂ + c)_j = q0_j` of an evolved position eigenstate `|q0⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorTableau<T: Real> {
    m: DMatrix<T>,
    c: DVector<T>,
    q0: DVector<T>,
}

/// A measured quadrature expressed through the tracked generators:
/// `value = constant + Σ_j uniform_weights[j]·u_j` with `u_j` unconstrained.
#[derive(Debug, Clone, PartialEq)]
pub struct IdealDecomposition<T: Real> {
    pub constant: T,
    pub uniform_weights: DVector<T>,
}

impl<T: Real> IdealDecomposition<T> {
    /// True when the outcome carries no uniform component (within `tol`).
    pub fn is_deterministic(&self, tol: f64) -> bool {
        self.uniform_weights.iter().all(|w| w.abs() <= T::tol(tol))
    }
}

impl<T: Real> GeneratorTableau<T> {
    /// `|q₁, …, q_n⟩`: rows select `q̂_j`.
    pub fn init_ideal(q_values: &[T]) -> Result<Self> {
        let n = q_values.len();
        if n == 0 {
            return Err(Error::ZeroModes);
        }
        for q in q_values {
            ensure_finite("q", q.as_f64())?;
        }
        let mut m = DMatrix::zeros(n, 2 * n);
        for j in 0..n {
            m[(j, q_index(j))] = T::one();
        }
        Ok(Self { m, c: DVector::zeros(n), q0: DVector::from_column_slice(q_values) })
    }

    pub fn n(&self) -> usize {
        self.m.nrows()
    }

    pub fn rows(&self) -> &DMatrix<T> {
        &self.m
    }

    pub fn constants(&self) -> &DVector<T> {
        &self.c
    }

    pub fn eigenvalues(&self) -> &DVector<T> {
        &self.q0
    }

    /// Real numbers in the evolving core matrix.
    pub fn stored_reals(&self) -> usize {
        self.m.len()
    }

    /// `M Ω Mᵀ`; zero for a valid tableau and invariant under homogeneous evolution.
    pub fn commutation_matrix(&self) -> DMatrix<T> {
        let mut mo = self.m.clone();
        omega_right(&mut mo);
        mo * self.m.transpose()
    }

    pub fn evolve(&self, op: &SymplecticAffine<T>) -> Result<Self> {
        check_n(self.n(), op.n())?;
        let inv = op.inverse()?;
        let m = &self.m * inv.matrix();
        let c = &self.c + &m * op.displacement() * -T::one();
        let out = Self { m, c, q0: self.q0.clone() };
        out.check_rank()?;
        Ok(out)
    }

    /// Evolution by a gate on a few modes; touches only the affected columns.
    pub fn evolve_local(&self, op: &LocalOp<T>) -> Result<Self> {
        op.check_range(self.n())?;
        let (idx, s_inv, d) = local_inverse(op)?;
        let mut out = self.clone();
        let k = idx.len();
        for j in 0..self.n() {
            let old: Vec<T> = idx.iter().map(|&i| self.m[(j, i)]).collect();
            let mut shift = T::zero();
            for b in 0..k {
                let mut acc = T::zero();
                for a in 0..k {
                    acc += old[a] * s_inv[(a, b)];
                }
                out.m[(j, idx[b])] = acc;
            }
            for b in 0..k {
                shift += out.m[(j, idx[b])] * d[b];
            }
            out.c[j] -= shift;
        }
        out.check_rank()?;
        Ok(out)
    }

    /// Errors when the rows have numerically lost rank.
    pub fn check_rank(&self) -> Result<()> {
        let gram = &self.m * self.m.transpose();
        let eig = SymmetricEigen::new(gram).eigenvalues;
        let max = eig.iter().fold(T::zero(), |a, &v| a.max(v));
        let min = eig.iter().fold(T::lit(f64::INFINITY), |a, &v| a.min(v));
        let ratio = if max > T::zero() && min > T::zero() { (min / max).sqrt() } else { T::zero() };
        if !(ratio > T::tol(RANK_TOL)) {
            return Err(Error::RankDegraded(ratio.as_f64()));
        }
        Ok(())
    }

    /// Writes the quadrature `observable` of `mode` as a constant plus a combination
    /// of unconstrained conjugate generators.
    pub fn decompose(&self, mode: usize, observable: Quadrature) -> Result<IdealDecomposition<T>> {
        let n = self.n();
        if mode >= n {
            return Err(Error::ModeOutOfRange { index: mode, n });
        }
        let k = observable.index(mode);
        // Conjugate rows N = (M Mᵀ)⁻¹ M Ω complete M to a symplectic basis.
        let gram = &self.m * self.m.transpose();
        let chol = gram.cholesky().ok_or(Error::RankDegraded(0.0))?;
        let mut mo = self.m.clone();
        omega_right(&mut mo);
        let conj = chol.solve(&mo);
        // e_k = a·M + b·N with a = e_k Ω Nᵀ, b_j = (M Ω)_{jk}.
        let mut on = conj.transpose();
        omega_left(&mut on);
        let a = on.row(k).transpose();
        let b = mo.column(k).into_owned();
        let constant = a.dot(&(&self.q0 - &self.c));
        Ok(IdealDecomposition { constant, uniform_weights: b })
    }

    /// Samples a quadrature measurement with the default window.
    pub fn ideal_measurement_sample<R: Rng + ?Sized>(&self, mode: usize, observable: Quadrature, rng: &mut R) -> Result<T> {
        self.ideal_measurement_sample_with_window(mode, observable, DEFAULT_WINDOW, rng)
    }

    /// Eigenvalues for tracked generators, independent `U[−W, W]` draws for
    /// their conjugates.
    pub fn ideal_measurement_sample_with_window<R: Rng + ?Sized>(
        &self,
        mode: usize,
        observable: Quadrature,
        window: f64,
        rng: &mut R,
    ) -> Result<T> {
        ensure_finite("window", window)?;
        let dec = self.decompose(mode, observable)?;
        let mut value = dec.constant;
        for &w in dec.uniform_weights.iter() {
            let u: f64 = rng.random_range(-window..=window);
            value += w * T::lit(u);
        }
        Ok(value)
    }
}

/// Complex nullifier rows `N = X + iY` with constants `k`: `(N r̂ + k)|ψ⟩ = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct NullifierTableau<T: Real> {
    rows: DMatrix<Complex<T>>,
    k: DVector<Complex<T>>,
}

impl<T: Real> NullifierTableau<T> {
    /// `⊗_j S(r_j)|0⟩`; row `j` is `e^{r_j} q̂_j + i e^{−r_j} p̂_j`.
    pub fn init_squeezed(r_values: &[T]) -> Result<Self> {
        let n = r_values.len();
        if n == 0 {
            return Err(Error::ZeroModes);
        }
        let mut rows = DMatrix::from_element(n, 2 * n, Complex::new(T::zero(), T::zero()));
        for (j, &r) in r_values.iter().enumerate() {
            ensure_finite("r", r.as_f64())?;
            rows[(j, 2 * j)] = Complex::new(r.exp(), T::zero());
            rows[(j, 2 * j + 1)] = Complex::new(T::zero(), (-r).exp());
        }
        Ok(Self { rows, k: DVector::from_element(n, Complex::new(T::zero(), T::zero())) })
    }

    /// Builds a tableau from explicit rows, validating the nullifier invariants.
    pub fn from_rows(rows: DMatrix<Complex<T>>, k: DVector<Complex<T>>) -> Result<Self> {
        let n = rows.nrows();
        if n == 0 {
            return Err(Error::ZeroModes);
        }
        check_n(2 * n, rows.ncols())?;
        check_n(n, k.len())?;
        let t = Self { rows, k };
        t.validate()?;
        Ok(t)
    }

    pub fn n(&self) -> usize {
        self.rows.nrows()
    }

    pub fn rows(&self) -> &DMatrix<Complex<T>> {
        &self.rows
    }

    pub fn constants(&self) -> &DVector<Complex<T>> {
        &self.k
    }

    /// Real numbers in the evolving core matrix (real and imaginary parts).
    pub fn stored_reals(&self) -> usize {
        2 * self.rows.len()
    }

    fn omega_c(&self) -> DMatrix<Complex<T>> {
        let n = self.n();
        let mut o = DMatrix::from_element(2 * n, 2 * n, Complex::new(T::zero(), T::zero()));
        for m in 0..n {
            o[(2 * m, 2 * m + 1)] = Complex::new(T::one(), T::zero());
            o[(2 * m + 1, 2 * m)] = Complex::new(-T::one(), T::zero());
        }
        o
    }

    /// `N Ω Nᵀ`, zero when the rows commute.
    pub fn commutation_matrix(&self) -> DMatrix<Complex<T>> {
        &self.rows * self.omega_c() * self.rows.transpose()
    }

    /// Eigenvalues of the Hermitian matrix `i N Ω N†`.
    pub fn positivity_spectrum(&self) -> DVector<T> {
        let h = (&self.rows * self.omega_c() * self.rows.adjoint()) * Complex::new(T::zero(), T::one());
        let h = (&h + h.adjoint()) * Complex::new(T::half(), T::zero());
        SymmetricEigen::new(h).eigenvalues
    }

    pub fn validate(&self) -> Result<()> {
        let comm = self.commutation_matrix();
        let scale = self.rows.iter().fold(T::one(), |a, z| a.max(z.modulus_squared()));
        let defect = comm.iter().fold(T::zero(), |a, z| a.max(z.modulus()));
        if defect > T::tol(1e-10) * scale {
            return Err(Error::InvalidNullifiers);
        }
        let min = self.positivity_spectrum().iter().fold(T::lit(f64::INFINITY), |a, &v| a.min(v));
        if !(min >= T::tol(1e-12)) {
            return Err(Error::InvalidNullifiers);
        }
        Ok(())
    }

    pub fn evolve(&self, op: &SymplecticAffine<T>) -> Result<Self> {
        check_n(self.n(), op.n())?;
        let inv = op.inverse()?;
        let s_inv = inv.matrix().map(|v| Complex::new(v, T::zero()));
        let d = op.displacement().map(|v| Complex::new(v, T::zero()));
        let rows = &self.rows * s_inv;
        let k = &self.k - &rows * d;
        Ok(Self { rows, k })
    }

    pub fn evolve_local(&self, op: &LocalOp<T>) -> Result<Self> {
        op.check_range(self.n())?;
        let (idx, s_inv, d) = local_inverse(op)?;
        let kk = idx.len();
        let mut out = self.clone();
        for j in 0..self.n() {
            let old: Vec<Complex<T>> = idx.iter().map(|&i| self.rows[(j, i)]).collect();
            let mut shift = Complex::new(T::zero(), T::zero());
            for b in 0..kk {
                let mut acc = Complex::new(T::zero(), T::zero());
                for a in 0..kk {
                    acc += old[a] * s_inv[(a, b)];
                }
                out.rows[(j, idx[b])] = acc;
                shift += acc * d[b];
            }
            out.k[j] -= shift;
        }
        Ok(out)
    }

    /// The unique Gaussian state annihilated by the nullifiers.
    pub fn to_gaussian_state(&self) -> Result<GaussianState<T>> {
        self.validate()?;
        let n = self.n();
        let x = self.rows.map(|z| z.re);
        let y = self.rows.map(|z| z.im);
        // Σ [Xᵀ, Yᵀ] = ½ Ω [Yᵀ, −Xᵀ]
        let mut lhs = DMatrix::zeros(2 * n, 2 * n);
        lhs.view_mut((0, 0), (2 * n, n)).copy_from(&x.transpose());
        lhs.view_mut((0, n), (2 * n, n)).copy_from(&y.transpose());
        let mut rhs = DMatrix::zeros(2 * n, 2 * n);
        rhs.view_mut((0, 0), (2 * n, n)).copy_from(&y.transpose());
        rhs.view_mut((0, n), (2 * n, n)).copy_from(&(-x.transpose()));
        omega_left(&mut rhs);
        rhs *= T::half();
        // Σ = rhs · lhs⁻¹  ⇔  lhsᵀ Σᵀ = rhsᵀ
        let sigma_t = lhs.transpose().lu().solve(&rhs.transpose()).ok_or(Error::InvalidNullifiers)?;
        let sigma = sigma_t.transpose();
        let sigma = (&sigma + sigma.transpose()) * T::half();
        // [X; Y] μ = −[Re k; Im k]
        let mut a = DMatrix::zeros(2 * n, 2 * n);
        a.view_mut((0, 0), (n, 2 * n)).copy_from(&x);
        a.view_mut((n, 0), (n, 2 * n)).copy_from(&y);
        let mut b = DVector::zeros(2 * n);
        for j in 0..n {
            b[j] = -self.k[j].re;
            b[n + j] = -self.k[j].im;
        }
        let mu = a.lu().solve(&b).ok_or(Error::InvalidNullifiers)?;
        GaussianState::new(mu, sigma)
    }
}
