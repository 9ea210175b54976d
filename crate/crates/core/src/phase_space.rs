//! Phase-space conventions, affine symplectic maps and Gaussian moment states.
//!
//! Quadratures are stored interleaved as `(q₁, p₁, q₂, p₂, …)` with ħ = 1, so
//! `[q̂ⱼ, p̂ₖ] = i δⱼₖ` and the vacuum has variance ½ in every quadrature. The
//! symplectic form Ω is block diagonal with `[[0, 1], [-1, 0]]` on each mode.
//!
//! A [`SymplecticAffine`] `(S, d)` is the Heisenberg action of a Clifford unitary
//! `U`: `U† r̂ U = S r̂ + d`. On first moments it acts as `μ ↦ Sμ + d` and on the
//! covariance as `Σ ↦ S Σ Sᵀ`. Global phases are not represented.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Index of `q̂` for `mode` in the interleaved layout.
#[inline]
pub const fn q_index(mode: usize) -> usize {
    2 * mode
}

/// Index of `p̂` for `mode` in the interleaved layout.
#[inline]
pub const fn p_index(mode: usize) -> usize {
    2 * mode + 1
}

/// Tolerance for freshly constructed gates.
pub const SYMPLECTIC_TOL: f64 = 1e-10;
/// Tolerance accepted after long products without re-symplectification.
pub const SYMPLECTIC_TOL_LOOSE: f64 = 1e-8;

/// The symplectic form Ω for `n` modes.
pub fn symplectic_form<T: Real>(n: usize) -> Result<DMatrix<T>> {
    if n == 0 {
        return Err(Error::ZeroModes);
    }
    let mut omega = DMatrix::zeros(2 * n, 2 * n);
    for m in 0..n {
        omega[(q_index(m), p_index(m))] = T::one();
        omega[(p_index(m), q_index(m))] = -T::one();
    }
    Ok(omega)
}

/// Replaces `x` by `Ω x` without forming Ω.
pub(crate) fn omega_left<T: Real>(x: &mut DMatrix<T>) {
    for m in 0..x.nrows() / 2 {
        x.swap_rows(2 * m, 2 * m + 1);
        x.row_mut(2 * m + 1).neg_mut();
    }
}

/// Replaces `x` by `x Ω` without forming Ω.
pub(crate) fn omega_right<T: Real>(x: &mut DMatrix<T>) {
    for m in 0..x.ncols() / 2 {
        x.swap_columns(2 * m, 2 * m + 1);
        x.column_mut(2 * m).neg_mut();
    }
}

/// `Ω⁻¹ Sᵀ Ω`, the inverse of `s` whenever `s` is symplectic.
pub(crate) fn symplectic_adjoint<T: Real>(s: &DMatrix<T>) -> DMatrix<T> {
    let mut out = s.transpose();
    omega_right(&mut out);
    omega_left(&mut out);
    out.neg_mut();
    out
}

fn max_abs<T: Real>(m: &DMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
}

/// `‖S Ω Sᵀ − Ω‖_max`.
pub(crate) fn symplectic_defect_of<T: Real>(s: &DMatrix<T>) -> T {
    let mut st = s.transpose();
    omega_left(&mut st);
    let mut form = s * st;
    // subtract Ω
    for m in 0..s.nrows() / 2 {
        form[(2 * m, 2 * m + 1)] -= T::one();
        form[(2 * m + 1, 2 * m)] += T::one();
    }
    max_abs(&form)
}

/// An element `(S, d)` of the affine symplectic group on `n` modes.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticAffine<T: Real> {
    s: DMatrix<T>,
    d: DVector<T>,
}

impl<T: Real> SymplecticAffine<T> {
    /// Builds and validates an affine symplectic map.
    ///
    /// The symplectic condition is checked against [`SYMPLECTIC_TOL_LOOSE`], scaled
    /// by `max(1, ‖S‖²_max)` so strongly squeezing maps are not rejected for rounding.
    pub fn new(s: DMatrix<T>, d: DVector<T>) -> Result<Self> {
        let dim = s.nrows();
        if dim == 0 {
            return Err(Error::ZeroModes);
        }
        if dim % 2 != 0 || s.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim + dim % 2, found: s.ncols() });
        }
        if d.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: d.len() });
        }
        if s.iter().chain(d.iter()).any(|v| !v.finite()) {
            return Err(Error::NonFinite { name: "S or d", value: f64::NAN });
        }
        let defect = symplectic_defect_of(&s);
        let scale = T::one().max(max_abs(&s) * max_abs(&s));
        if defect > T::tol(SYMPLECTIC_TOL_LOOSE) * scale {
            return Err(Error::NotSymplectic { defect: defect.as_f64() });
        }
        Ok(Self { s, d })
    }

    pub(crate) fn from_parts_unchecked(s: DMatrix<T>, d: DVector<T>) -> Self {
        debug_assert_eq!(s.nrows(), d.len());
        Self { s, d }
    }

    pub fn identity(n: usize) -> Self {
        Self { s: DMatrix::identity(2 * n, 2 * n), d: DVector::zeros(2 * n) }
    }

    /// Pure phase-space translation by `d`.
    pub fn translation(d: DVector<T>) -> Result<Self> {
        if d.is_empty() || d.len() % 2 != 0 {
            return Err(Error::DimensionMismatch { expected: d.len() + 1, found: d.len() });
        }
        if d.iter().any(|v| !v.finite()) {
            return Err(Error::NonFinite { name: "d", value: f64::NAN });
        }
        let dim = d.len();
        Ok(Self { s: DMatrix::identity(dim, dim), d })
    }

    /// Homogeneous map with no displacement.
    pub fn linear(s: DMatrix<T>) -> Result<Self> {
        let dim = s.nrows();
        Self::new(s, DVector::zeros(dim))
    }

    /// Number of modes.
    pub fn n(&self) -> usize {
        self.s.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.s
    }

    pub fn displacement(&self) -> &DVector<T> {
        &self.d
    }

    pub fn into_parts(self) -> (DMatrix<T>, DVector<T>) {
        (self.s, self.d)
    }

    pub fn symplectic_defect(&self) -> T {
        symplectic_defect_of(&self.s)
    }

    pub fn is_symplectic(&self, tol: f64) -> bool {
        self.symplectic_defect() <= T::tol(tol)
    }

    /// `self ∘ other`: applies `other` first, then `self`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), found: other.n() });
        }
        let s = &self.s * &other.s;
        let d = &self.s * &other.d + &self.d;
        Ok(Self { s, d })
    }

    /// Group inverse using `S⁻¹ = Ω⁻¹ Sᵀ Ω`.
    pub fn inverse(&self) -> Result<Self> {
        let defect = self.symplectic_defect();
        let scale = T::one().max(max_abs(&self.s) * max_abs(&self.s));
        if defect > T::tol(SYMPLECTIC_TOL_LOOSE) * scale {
            return Err(Error::NotSymplectic { defect: defect.as_f64() });
        }
        let s_inv = symplectic_adjoint(&self.s);
        let d = -(&s_inv * &self.d);
        Ok(Self { s: s_inv, d })
    }

    /// Projects `S` back onto the symplectic group.
    ///
    /// Iterates `S ← S (3I − S♯S) / 2` with `S♯ = Ω⁻¹SᵀΩ`, which removes the
    /// non-Hamiltonian part of the error to second order per step. Only called
    /// on request; nothing in the crate re-symplectifies implicitly.
    pub fn resymplectify(&self) -> Self {
        let dim = self.s.nrows();
        let three = T::lit(3.0);
        let mut s = self.s.clone();
        for _ in 0..32 {
            if symplectic_defect_of(&s) <= T::tol(1e-15) * T::one().max(max_abs(&s)) {
                break;
            }
            let gram = symplectic_adjoint(&s) * &s;
            let correction = (DMatrix::identity(dim, dim) * three - gram) * T::half();
            s *= correction;
        }
        Self { s, d: self.d.clone() }
    }

    /// Largest entrywise difference in either `S` or `d`.
    pub fn max_deviation(&self, other: &Self) -> T {
        if self.n() != other.n() {
            return T::lit(f64::INFINITY);
        }
        let ds = max_abs(&(&self.s - &other.s));
        let dd = (&self.d - &other.d).iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
        ds.max(dd)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_deviation(other) <= T::tol(tol)
    }
}

/// `a ∘ b` (apply `b`, then `a`).
pub fn compose<T: Real>(a: &SymplecticAffine<T>, b: &SymplecticAffine<T>) -> Result<SymplecticAffine<T>> {
    a.compose(b)
}

pub fn inverse<T: Real>(op: &SymplecticAffine<T>) -> Result<SymplecticAffine<T>> {
    op.inverse()
}

/// A small affine map acting on a subset of modes, embedded lazily.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalOp<T: Real> {
    modes: Vec<usize>,
    op: SymplecticAffine<T>,
}

impl<T: Real> LocalOp<T> {
    pub fn new(modes: Vec<usize>, op: SymplecticAffine<T>) -> Result<Self> {
        if modes.len() != op.n() {
            return Err(Error::DimensionMismatch { expected: op.n(), found: modes.len() });
        }
        for (i, m) in modes.iter().enumerate() {
            if modes[..i].contains(m) {
                return Err(Error::RepeatedMode(*m));
            }
        }
        Ok(Self { modes, op })
    }

    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    pub fn op(&self) -> &SymplecticAffine<T> {
        &self.op
    }

    /// Quadrature indices touched, in the order of the local matrix.
    pub fn indices(&self) -> Vec<usize> {
        self.modes.iter().flat_map(|&m| [q_index(m), p_index(m)]).collect()
    }

    pub fn check_range(&self, n: usize) -> Result<()> {
        match self.modes.iter().find(|&&m| m >= n) {
            Some(&index) => Err(Error::ModeOutOfRange { index, n }),
            None => Ok(()),
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        Ok(Self { modes: self.modes.clone(), op: self.op.inverse()? })
    }

    /// The full `2n × 2n` map.
    pub fn embed(&self, n: usize) -> Result<SymplecticAffine<T>> {
        self.check_range(n)?;
        let idx = self.indices();
        let mut s = DMatrix::identity(2 * n, 2 * n);
        let mut d = DVector::zeros(2 * n);
        for (a, &i) in idx.iter().enumerate() {
            d[i] = self.op.d[a];
            for (b, &j) in idx.iter().enumerate() {
                s[(i, j)] = self.op.s[(a, b)];
            }
        }
        Ok(SymplecticAffine { s, d })
    }
}

/// Applies `z ↦ L z + d` on the coordinates `idx` of a symmetric second-moment
/// matrix and its mean, in O(N·k) for k = `idx.len()`.
pub(crate) fn local_congruence<T: Real>(
    mean: &mut DVector<T>,
    cov: &mut DMatrix<T>,
    idx: &[usize],
    l: &DMatrix<T>,
    d: Option<&DVector<T>>,
) {
    let k = idx.len();
    let dim = cov.nrows();

    let old_mean: Vec<T> = idx.iter().map(|&i| mean[i]).collect();
    for a in 0..k {
        let mut acc = d.map_or(T::zero(), |d| d[a]);
        for b in 0..k {
            acc += l[(a, b)] * old_mean[b];
        }
        mean[idx[a]] = acc;
    }

    // Columns: C[:, idx] <- C[:, idx] Lᵀ.
    let mut cols = DMatrix::<T>::zeros(dim, k);
    for (b, &j) in idx.iter().enumerate() {
        cols.column_mut(b).copy_from(&cov.column(j));
    }
    for (a, &j) in idx.iter().enumerate() {
        let mut col = cov.column_mut(j);
        for i in 0..dim {
            let mut acc = T::zero();
            for b in 0..k {
                acc += cols[(i, b)] * l[(a, b)];
            }
            col[i] = acc;
        }
    }
    // Block: L C_II Lᵀ, from the already right-multiplied block.
    let mut block = DMatrix::<T>::zeros(k, k);
    for a in 0..k {
        for b in 0..k {
            let mut acc = T::zero();
            for c in 0..k {
                acc += l[(a, c)] * cov[(idx[c], idx[b])];
            }
            block[(a, b)] = acc;
        }
    }
    // Mirror rows from columns.
    for &j in idx {
        for i in 0..dim {
            let v = cov[(i, j)];
            cov[(j, i)] = v;
        }
    }
    for a in 0..k {
        for b in 0..k {
            cov[(idx[a], idx[b])] = (block[(a, b)] + block[(b, a)]) * T::half();
        }
    }
}

/// First and second moments of an `n`-mode Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState<T: Real> {
    mu: DVector<T>,
    sigma: DMatrix<T>,
}

/// Tolerance on the uncertainty-relation eigenvalue check.
pub const UNCERTAINTY_TOL: f64 = 1e-10;

impl<T: Real> GaussianState<T> {
    /// Validates symmetry (1e-12, relative to the largest entry) and the
    /// uncertainty relation `Σ + (i/2)Ω ⪰ 0`.
    pub fn new(mu: DVector<T>, sigma: DMatrix<T>) -> Result<Self> {
        let dim = mu.len();
        if dim == 0 {
            return Err(Error::ZeroModes);
        }
        if dim % 2 != 0 {
            return Err(Error::DimensionMismatch { expected: dim + 1, found: dim });
        }
        if sigma.nrows() != dim || sigma.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: sigma.nrows() });
        }
        if mu.iter().chain(sigma.iter()).any(|v| !v.finite()) {
            return Err(Error::NonFinite { name: "moments", value: f64::NAN });
        }
        let asym = max_abs(&(&sigma - sigma.transpose()));
        if asym > T::tol(1e-12) * T::one().max(max_abs(&sigma)) {
            return Err(Error::NotSymmetric { asymmetry: asym.as_f64() });
        }
        let sigma = (&sigma + sigma.transpose()) * T::half();
        let state = Self { mu, sigma };
        state.check_physical()?;
        Ok(state)
    }

    pub(crate) fn from_parts_unchecked(mu: DVector<T>, sigma: DMatrix<T>) -> Self {
        Self { mu, sigma }
    }

    /// `n`-mode vacuum: zero mean, covariance `I/2`.
    pub fn vacuum(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroModes);
        }
        Ok(Self { mu: DVector::zeros(2 * n), sigma: DMatrix::identity(2 * n, 2 * n) * T::half() })
    }

    pub fn n(&self) -> usize {
        self.mu.len() / 2
    }

    pub fn mean(&self) -> &DVector<T> {
        &self.mu
    }

    pub fn covariance(&self) -> &DMatrix<T> {
        &self.sigma
    }

    pub fn into_parts(self) -> (DVector<T>, DMatrix<T>) {
        (self.mu, self.sigma)
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut DVector<T>, &mut DMatrix<T>) {
        (&mut self.mu, &mut self.sigma)
    }

    /// `(⟨q̂⟩, ⟨p̂⟩)` for one mode.
    pub fn mode_mean(&self, mode: usize) -> [T; 2] {
        [self.mu[q_index(mode)], self.mu[p_index(mode)]]
    }

    /// The 2×2 covariance block of one mode.
    pub fn mode_covariance(&self, mode: usize) -> [[T; 2]; 2] {
        let (q, p) = (q_index(mode), p_index(mode));
        [[self.sigma[(q, q)], self.sigma[(q, p)]], [self.sigma[(p, q)], self.sigma[(p, p)]]]
    }

    /// Applies a full `2n × 2n` map: `μ ↦ Sμ + d`, `Σ ↦ SΣSᵀ`.
    pub fn apply_affine(&self, op: &SymplecticAffine<T>) -> Result<Self> {
        if op.n() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), found: op.n() });
        }
        let mu = &op.s * &self.mu + &op.d;
        let sigma = &op.s * &self.sigma * op.s.transpose();
        let sigma = (&sigma + sigma.transpose()) * T::half();
        Ok(Self { mu, sigma })
    }

    /// Applies a local gate in place in O(n).
    pub fn apply_local(&mut self, op: &LocalOp<T>) -> Result<()> {
        op.check_range(self.n())?;
        let idx = op.indices();
        local_congruence(&mut self.mu, &mut self.sigma, &idx, &op.op.s, Some(&op.op.d));
        Ok(())
    }

    /// Replaces one mode by the vacuum, discarding its correlations.
    pub fn reset_mode(&mut self, mode: usize) -> Result<()> {
        if mode >= self.n() {
            return Err(Error::ModeOutOfRange { index: mode, n: self.n() });
        }
        for i in [q_index(mode), p_index(mode)] {
            self.mu[i] = T::zero();
            self.sigma.column_mut(i).fill(T::zero());
            self.sigma.row_mut(i).fill(T::zero());
            self.sigma[(i, i)] = T::half();
        }
        Ok(())
    }

    /// Real symmetric embedding `[[Σ, −Ω/2], [Ω/2, Σ]]` of `Σ + (i/2)Ω`; same
    /// spectrum, every eigenvalue doubled in multiplicity.
    fn uncertainty_embedding(&self) -> DMatrix<T> {
        let dim = self.sigma.nrows();
        let mut emb = DMatrix::<T>::zeros(2 * dim, 2 * dim);
        emb.view_mut((0, 0), (dim, dim)).copy_from(&self.sigma);
        emb.view_mut((dim, dim), (dim, dim)).copy_from(&self.sigma);
        for m in 0..dim / 2 {
            let (q, p) = (q_index(m), p_index(m));
            emb[(dim + q, p)] = T::half();
            emb[(dim + p, q)] = -T::half();
            emb[(q, dim + p)] = -T::half();
            emb[(p, dim + q)] = T::half();
        }
        emb
    }

    /// Smallest eigenvalue of the Hermitian matrix `Σ + (i/2)Ω`.
    pub fn min_uncertainty_eigenvalue(&self) -> T {
        SymmetricEigen::new(self.uncertainty_embedding())
            .eigenvalues
            .iter()
            .fold(T::lit(f64::INFINITY), |acc, &v| acc.min(v))
    }

    /// `Σ + (i/2)Ω ⪰ −tol·I`. A Cholesky factorization of the shifted embedding
    /// accepts; the eigenvalue is only computed to report a failure.
    pub fn check_physical(&self) -> Result<()> {
        let scale = T::one().max(max_abs(&self.sigma));
        let shift = T::tol(UNCERTAINTY_TOL) * scale;
        let mut emb = self.uncertainty_embedding();
        for i in 0..emb.nrows() {
            emb[(i, i)] += shift;
        }
        if Cholesky::new(emb).is_some() {
            return Ok(());
        }
        let min = self.min_uncertainty_eigenvalue();
        if min < -shift {
            return Err(Error::Unphysical { min_eigenvalue: min.as_f64() });
        }
        Ok(())
    }

    /// Checks the uncertainty relation on the reduced state of `modes` only.
    pub fn check_physical_local(&self, modes: &[usize]) -> Result<()> {
        let idx: Vec<usize> = modes.iter().flat_map(|&m| [q_index(m), p_index(m)]).collect();
        let mu = DVector::from_iterator(idx.len(), idx.iter().map(|&i| self.mu[i]));
        let sigma = DMatrix::from_fn(idx.len(), idx.len(), |a, b| self.sigma[(idx[a], idx[b])]);
        Self { mu, sigma }.check_physical()
    }

    /// `(1/2)ⁿ / √det Σ`.
    pub fn purity(&self) -> Result<T> {
        let chol = Cholesky::new(self.sigma.clone()).ok_or(Error::SingularCovariance)?;
        let l = chol.l_dirty();
        let inv_sqrt2 = T::FRAC_1_SQRT_2();
        let mut log = T::zero();
        for i in 0..self.sigma.nrows() {
            let lii = l[(i, i)];
            if lii <= T::zero() || !lii.finite() {
                return Err(Error::SingularCovariance);
            }
            log += (inv_sqrt2 / lii).ln();
        }
        Ok(log.exp())
    }

    /// Largest entrywise deviation of mean and covariance.
    pub fn max_deviation(&self, other: &Self) -> T {
        if self.n() != other.n() {
            return T::lit(f64::INFINITY);
        }
        let dm = (&self.mu - &other.mu).iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
        dm.max(max_abs(&(&self.sigma - &other.sigma)))
    }
}

pub fn vacuum_state<T: Real>(n: usize) -> Result<GaussianState<T>> {
    GaussianState::vacuum(n)
}

pub fn apply_affine<T: Real>(state: &GaussianState<T>, op: &SymplecticAffine<T>) -> Result<GaussianState<T>> {
    state.apply_affine(op)
}

pub fn purity<T: Real>(state: &GaussianState<T>) -> Result<T> {
    state.purity()
}
