use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;

use cvclifford::gates::QuadraticHamiltonian;
use cvclifford::{Gate, Quadrature};

use crate::error::{FockError, Result};
use crate::operators::{expm_hermitian, hermite_functions, FockOperators};

/// Largest state vector the oracle will allocate.
pub const AMPLITUDE_BUDGET: usize = 400_000;
/// Largest local dimension exponentiated as one dense matrix.
pub const DENSE_BUDGET: usize = 1024;
/// Largest side of a reduced density matrix.
pub const REDUCED_BUDGET: usize = 4096;
/// Allowed population in the top five levels of any axis.
pub const TRUNCATION_LIMIT: f64 = 1e-8;

const ZERO: C = C::new(0.0, 0.0);

/// Pure state on a tensor product of truncated oscillators.
///
/// Logical modes map onto tensor axes. Loss, resets and measurements move a
/// mode's content onto an axis that is never acted on again, so mixed states
/// are represented by their purification; traced-out axes stay in `psi`.
#[derive(Debug, Clone)]
pub struct FockState {
    ops: FockOperators,
    psi: DVector<C>,
    axes: usize,
    slots: Vec<Option<usize>>,
}

/// A quadrature of an allocated axis, or of an unallocated (vacuum) mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Observable {
    Axis(usize, Quadrature),
    Vacuum(usize, Quadrature),
}

fn checked_dim(d: usize, axes: usize, what: &'static str, budget: usize) -> Result<usize> {
    match u32::try_from(axes).ok().and_then(|a| d.checked_pow(a)) {
        Some(n) if n <= budget => Ok(n),
        other => Err(FockError::BudgetExceeded { what, needed: other.unwrap_or(usize::MAX), budget }),
    }
}

/// Applies a `d×d` matrix to every fiber along the axis with the given stride.
fn apply_axis_slice(psi: &mut [C], d: usize, stride: usize, u: &DMatrix<C>) {
    let u = u.as_slice();
    let block = d * stride;
    let mut tmp = vec![ZERO; d];
    let mut out = vec![ZERO; d];
    for start in (0..psi.len()).step_by(block) {
        for inner in 0..stride {
            let base = start + inner;
            for (k, t) in tmp.iter_mut().enumerate() {
                *t = psi[base + k * stride];
            }
            out.fill(ZERO);
            for (k, &t) in tmp.iter().enumerate() {
                if t == ZERO {
                    continue;
                }
                for (o, &c) in out.iter_mut().zip(&u[k * d..(k + 1) * d]) {
                    *o += c * t;
                }
            }
            for (k, &o) in out.iter().enumerate() {
                psi[base + k * stride] = o;
            }
        }
    }
}

fn is_passive(a: &DMatrix<f64>) -> bool {
    let dim = a.nrows();
    let scale = a.amax().max(1.0);
    let omega = cvclifford::phase_space::symplectic_form::<f64>(dim / 2).expect("dim ≥ 2");
    (a * &omega - &omega * a).amax() <= 1e-14 * scale
}

/// `A = [[0, C], [Cᵀ, 0]]` with `C = u vᵀ`, so `H = (u·r̂₁)(v·r̂₂)`.
fn rank_one_cross(a: &DMatrix<f64>) -> Option<([f64; 2], [f64; 2])> {
    let scale = a.amax();
    if scale == 0.0 {
        return None;
    }
    let tol = 1e-14 * scale;
    let local = a.view((0, 0), (2, 2)).amax().max(a.view((2, 2), (2, 2)).amax());
    if local > tol {
        return None;
    }
    let c = a.view((0, 2), (2, 2));
    let (r, k) = c.iamax_full();
    let pivot = c[(r, k)];
    let u = [c[(0, k)], c[(1, k)]];
    let v = [c[(r, 0)] / pivot, c[(r, 1)] / pivot];
    let residual = (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| (c[(i, j)] - u[i] * v[j]).abs()).fold(0.0, f64::max);
    (residual <= tol).then_some((u, v))
}

/// Dense `½ r̂ᵀ A r̂ + bᵀ r̂` on `k = dim/2` truncated modes, mode 0 most significant.
pub(crate) fn local_hamiltonian(ops: &FockOperators, a: &DMatrix<f64>, b: &DVector<f64>) -> DMatrix<C> {
    let k = a.nrows() / 2;
    let d = ops.cutoff();
    let embed = |factors: &[(usize, DMatrix<C>)]| {
        let mut out = DMatrix::<C>::identity(1, 1);
        for m in 0..k {
            let f = factors.iter().find(|(mm, _)| *mm == m).map(|(_, f)| f.clone()).unwrap_or_else(|| DMatrix::identity(d, d));
            out = out.kronecker(&f);
        }
        out
    };
    let mut h = DMatrix::<C>::zeros(d.pow(k as u32), d.pow(k as u32));
    for m in 0..k {
        let block = a.view((2 * m, 2 * m), (2, 2)).into_owned();
        let local = ops.quadratic(&block, &[b[2 * m], b[2 * m + 1]]);
        h += embed(&[(m, local)]);
        for m2 in m + 1..k {
            for i in 0..2 {
                for j in 0..2 {
                    let c = a[(2 * m + i, 2 * m2 + j)];
                    if c != 0.0 {
                        h += embed(&[(m, ops.x(i) * C::new(c, 0.0)), (m2, ops.x(j).clone())]);
                    }
                }
            }
        }
    }
    h
}

/// `exp(i t H)` as a dense matrix on `h.n()` modes with photon-number cutoff `cutoff`.
pub fn build_gate_unitary(h: &QuadraticHamiltonian<f64>, cutoff: usize) -> Result<DMatrix<C>> {
    let ops = FockOperators::new(cutoff)?;
    checked_dim(cutoff, h.n(), "dense gate unitary", DENSE_BUDGET)?;
    Ok(expm_hermitian(local_hamiltonian(&ops, h.a(), h.b()), h.t()))
}

impl FockState {
    pub fn vacuum(n: usize, cutoff: usize) -> Result<Self> {
        if n == 0 {
            return Err(cvclifford::Error::ZeroModes.into());
        }
        let ops = FockOperators::new(cutoff)?;
        let len = checked_dim(cutoff, n, "state vector", AMPLITUDE_BUDGET)?;
        let mut psi = DVector::zeros(len);
        psi[0] = C::new(1.0, 0.0);
        Ok(Self { ops, psi, axes: n, slots: (0..n).map(Some).collect() })
    }

    pub fn n(&self) -> usize {
        self.slots.len()
    }

    pub fn cutoff(&self) -> usize {
        self.ops.cutoff()
    }

    /// Number of tensor axes, including environment axes.
    pub fn axes(&self) -> usize {
        self.axes
    }

    pub fn amplitudes(&self) -> &DVector<C> {
        &self.psi
    }

    pub fn operators(&self) -> &FockOperators {
        &self.ops
    }

    pub fn norm(&self) -> f64 {
        self.psi.norm()
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode < self.n() {
            Ok(())
        } else {
            Err(FockError::ModeOutOfRange { index: mode, n: self.n() })
        }
    }

    /// Axis holding `mode`, or `None` while the mode is an untouched vacuum.
    pub fn axis_of(&self, mode: usize) -> Result<Option<usize>> {
        self.check_mode(mode)?;
        Ok(self.slots[mode])
    }

    fn stride(&self, axis: usize) -> usize {
        self.cutoff().pow((self.axes - 1 - axis) as u32)
    }

    fn digit(&self, index: usize, axis: usize) -> usize {
        (index / self.stride(axis)) % self.cutoff()
    }

    pub(crate) fn push_axis(&mut self) -> Result<usize> {
        let d = self.cutoff();
        let len = checked_dim(d, self.axes + 1, "state vector", AMPLITUDE_BUDGET)?;
        let mut psi = DVector::zeros(len);
        for (i, &v) in self.psi.iter().enumerate() {
            psi[i * d] = v;
        }
        self.psi = psi;
        self.axes += 1;
        Ok(self.axes - 1)
    }

    pub(crate) fn ensure_axis(&mut self, mode: usize) -> Result<usize> {
        self.check_mode(mode)?;
        match self.slots[mode] {
            Some(axis) => Ok(axis),
            None => {
                let axis = self.push_axis()?;
                self.slots[mode] = Some(axis);
                Ok(axis)
            }
        }
    }

    /// Releases the axis of `mode` to the environment; the mode restarts in vacuum.
    pub(crate) fn detach(&mut self, mode: usize) -> Result<usize> {
        let axis = self.ensure_axis(mode)?;
        self.slots[mode] = None;
        Ok(axis)
    }

    /// Replaces `mode` by vacuum, tracing out its previous content.
    pub fn reset(&mut self, mode: usize) -> Result<()> {
        self.check_mode(mode)?;
        self.slots[mode] = None;
        Ok(())
    }

    fn apply_axis(&mut self, axis: usize, u: &DMatrix<C>) {
        let (d, s) = (self.cutoff(), self.stride(axis));
        apply_axis_slice(self.psi.as_mut_slice(), d, s, u);
    }

    /// `exp(i t G₁ ⊗ G₂)` through the eigenbases of both factors.
    fn apply_product(&mut self, (a, b): (usize, usize), g1: DMatrix<C>, g2: DMatrix<C>, t: f64) {
        let e1 = g1.symmetric_eigen();
        let e2 = g2.symmetric_eigen();
        self.apply_axis(a, &e1.eigenvectors.adjoint());
        self.apply_axis(b, &e2.eigenvectors.adjoint());
        let d = self.cutoff();
        let table = DMatrix::from_fn(d, d, |i, j| C::from_polar(1.0, t * e1.eigenvalues[i] * e2.eigenvalues[j]));
        let (sa, sb) = (self.stride(a), self.stride(b));
        for (idx, v) in self.psi.iter_mut().enumerate() {
            *v *= table[((idx / sa) % d, (idx / sb) % d)];
        }
        self.apply_axis(a, &e1.eigenvectors);
        self.apply_axis(b, &e2.eigenvectors);
    }

    /// Flat bases of every fiber over `axes`, and offsets of each local basis state.
    fn fibers(&self, axes: &[usize]) -> (Vec<usize>, Vec<usize>) {
        let d = self.cutoff();
        let bases = (0..self.psi.len()).filter(|&i| axes.iter().all(|&a| self.digit(i, a) == 0)).collect();
        let mut offsets = vec![0usize];
        for &a in axes {
            let s = self.stride(a);
            offsets = offsets.iter().flat_map(|&o| (0..d).map(move |k| o + k * s)).collect();
        }
        (bases, offsets)
    }

    fn apply_dense(&mut self, axes: &[usize], u: &DMatrix<C>) {
        let (bases, offsets) = self.fibers(axes);
        let mut tmp = DVector::<C>::zeros(offsets.len());
        for base in bases {
            for (t, &o) in tmp.iter_mut().zip(&offsets) {
                *t = self.psi[base + o];
            }
            let out = u * &tmp;
            for (&v, &o) in out.iter().zip(&offsets) {
                self.psi[base + o] = v;
            }
        }
    }

    /// Number-conserving two-mode generator, exponentiated per total-photon block.
    fn apply_passive(&mut self, (a, b): (usize, usize), h: &QuadraticHamiltonian<f64>) {
        let d = self.cutoff();
        let am = h.a();
        let ma = self.ops.quadratic(&am.view((0, 0), (2, 2)).into_owned(), &[0.0, 0.0]);
        let mb = self.ops.quadratic(&am.view((2, 2), (2, 2)).into_owned(), &[0.0, 0.0]);
        let (sa, sb) = (self.stride(a), self.stride(b));
        let (bases, _) = self.fibers(&[a, b]);
        for total in 0..2 * d - 1 {
            let pairs: Vec<(usize, usize)> = (total.saturating_sub(d - 1)..=total.min(d - 1)).map(|na| (na, total - na)).collect();
            let m = pairs.len();
            let block = DMatrix::from_fn(m, m, |r, c| {
                let ((ra, rb), (ca, cb)) = (pairs[r], pairs[c]);
                let mut v = ZERO;
                if rb == cb {
                    v += ma[(ra, ca)];
                }
                if ra == ca {
                    v += mb[(rb, cb)];
                }
                for i in 0..2 {
                    for j in 0..2 {
                        let coef = am[(i, 2 + j)];
                        if coef != 0.0 {
                            v += self.ops.x(i)[(ra, ca)] * self.ops.x(j)[(rb, cb)] * coef;
                        }
                    }
                }
                v
            });
            let u = expm_hermitian(block, h.t());
            let offsets: Vec<usize> = pairs.iter().map(|&(na, nb)| na * sa + nb * sb).collect();
            let mut tmp = DVector::<C>::zeros(m);
            for &base in &bases {
                for (t, &o) in tmp.iter_mut().zip(&offsets) {
                    *t = self.psi[base + o];
                }
                let out = &u * &tmp;
                for (&v, &o) in out.iter().zip(&offsets) {
                    self.psi[base + o] = v;
                }
            }
        }
    }

    fn apply_hamiltonian_axes(&mut self, h: &QuadraticHamiltonian<f64>, axes: &[usize]) -> Result<()> {
        if axes.len() != h.n() {
            return Err(cvclifford::Error::DimensionMismatch { expected: h.n(), found: axes.len() }.into());
        }
        for (i, a) in axes.iter().enumerate() {
            if axes[..i].contains(a) {
                return Err(cvclifford::Error::RepeatedMode(*a).into());
            }
        }
        let homogeneous = h.b().iter().all(|&v| v == 0.0);
        if axes.len() == 1 {
            let u = expm_hermitian(self.ops.quadratic(h.a(), h.b().as_slice()), h.t());
            self.apply_axis(axes[0], &u);
        } else if axes.len() == 2 && homogeneous && is_passive(h.a()) {
            self.apply_passive((axes[0], axes[1]), h);
        } else if let (2, true, Some((u, v))) = (axes.len(), homogeneous, rank_one_cross(h.a())) {
            let lin = |w: [f64; 2]| self.ops.q() * C::new(w[0], 0.0) + self.ops.p() * C::new(w[1], 0.0);
            let (g1, g2) = (lin(u), lin(v));
            self.apply_product((axes[0], axes[1]), g1, g2, h.t());
        } else {
            checked_dim(self.cutoff(), axes.len(), "dense local unitary", DENSE_BUDGET)?;
            let u = expm_hermitian(local_hamiltonian(&self.ops, h.a(), h.b()), h.t());
            self.apply_dense(axes, &u);
        }
        Ok(())
    }

    /// Applies `exp(i t H)` to `modes`.
    pub fn apply_hamiltonian(&mut self, h: &QuadraticHamiltonian<f64>, modes: &[usize]) -> Result<()> {
        for &m in modes {
            self.check_mode(m)?;
        }
        let axes = modes.iter().map(|&m| self.ensure_axis(m)).collect::<Result<Vec<_>>>()?;
        self.apply_hamiltonian_axes(h, &axes)
    }

    pub fn apply_gate(&mut self, gate: &Gate, modes: &[usize]) -> Result<()> {
        self.apply_hamiltonian(&gate.hamiltonian()?, modes)
    }

    /// Pure loss by mixing with a fresh environment axis (`cos²θ = η`).
    pub fn apply_loss(&mut self, mode: usize, eta: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(cvclifford::Error::Transmissivity(eta).into());
        }
        let axis = self.ensure_axis(mode)?;
        if eta == 1.0 {
            return Ok(());
        }
        let env = self.push_axis()?;
        let h = Gate::Beamsplitter { theta: eta.sqrt().acos() }.hamiltonian()?;
        self.apply_hamiltonian_axes(&h, &[axis, env])
    }

    /// `exp(i·coupling·x̂_c ⊗ G)` with `x̂_c` a quadrature of axis `control`.
    pub(crate) fn apply_controlled(&mut self, control: usize, basis: Quadrature, target: usize, g: DMatrix<C>, coupling: f64) {
        let x = self.ops.quadrature(basis).clone();
        self.apply_product((control, target), x, g, coupling);
    }

    pub(crate) fn mode_observables(&self) -> Vec<Observable> {
        let mut obs = Vec::with_capacity(2 * self.n());
        for (m, slot) in self.slots.iter().enumerate() {
            for b in [Quadrature::Q, Quadrature::P] {
                obs.push(match slot {
                    Some(a) => Observable::Axis(*a, b),
                    None => Observable::Vacuum(m, b),
                });
            }
        }
        obs
    }

    /// Means and symmetrized covariances `½⟨{ΔX, ΔY}⟩` of `obs`.
    pub(crate) fn observable_moments(&self, obs: &[Observable]) -> (DVector<f64>, DMatrix<f64>) {
        let d = self.cutoff();
        let images: Vec<Option<DVector<C>>> = obs
            .iter()
            .map(|o| match *o {
                Observable::Axis(a, b) => {
                    let mut v = self.psi.clone();
                    apply_axis_slice(v.as_mut_slice(), d, self.stride(a), self.ops.quadrature(b));
                    Some(v)
                }
                Observable::Vacuum(..) => None,
            })
            .collect();
        let k = obs.len();
        let mean = DVector::from_fn(k, |i, _| images[i].as_ref().map_or(0.0, |v| self.psi.dotc(v).re));
        let cov = DMatrix::from_fn(k, k, |i, j| match (&images[i], &images[j]) {
            (Some(x), Some(y)) => x.dotc(y).re - mean[i] * mean[j],
            _ if obs[i] == obs[j] => 0.5,
            _ => 0.0,
        });
        (mean, cov)
    }

    /// Mean and symmetrized covariance of the logical modes' quadratures.
    pub fn moments(&self) -> (DVector<f64>, DMatrix<f64>) {
        self.observable_moments(&self.mode_observables())
    }

    pub fn mean(&self) -> DVector<f64> {
        self.moments().0
    }

    pub fn covariance(&self) -> DMatrix<f64> {
        self.moments().1
    }

    /// `⟨½ r̂ᵀ A r̂ + bᵀ r̂ + c⟩` with symmetrized products.
    pub fn expectation(&self, a: &DMatrix<f64>, b: &DVector<f64>, c: f64) -> Result<f64> {
        let dim = 2 * self.n();
        if a.nrows() != dim || a.ncols() != dim || b.len() != dim {
            return Err(cvclifford::Error::DimensionMismatch { expected: dim, found: a.nrows() }.into());
        }
        let (mean, cov) = self.moments();
        let second = cov + &mean * mean.transpose();
        Ok(0.5 * a.component_mul(&second).sum() + b.dot(&mean) + c)
    }

    /// Axes of `modes`, allocating vacuum axes on a copy when needed.
    fn with_axes(&self, modes: &[usize]) -> Result<(std::borrow::Cow<'_, Self>, Vec<usize>)> {
        for (i, &m) in modes.iter().enumerate() {
            self.check_mode(m)?;
            if modes[..i].contains(&m) {
                return Err(cvclifford::Error::RepeatedMode(m).into());
            }
        }
        if modes.iter().all(|&m| self.slots[m].is_some()) {
            let axes = modes.iter().map(|&m| self.slots[m].unwrap()).collect();
            return Ok((std::borrow::Cow::Borrowed(self), axes));
        }
        let mut copy = self.clone();
        let axes = modes.iter().map(|&m| copy.ensure_axis(m)).collect::<Result<Vec<_>>>()?;
        Ok((std::borrow::Cow::Owned(copy), axes))
    }

    /// `Ψ` with rows indexed by the kept axes and columns by everything else.
    fn split(&self, axes: &[usize]) -> DMatrix<C> {
        let (bases, offsets) = self.fibers(axes);
        DMatrix::from_fn(offsets.len(), bases.len(), |i, j| self.psi[bases[j] + offsets[i]])
    }

    /// Reduced density matrix of `modes` (first listed mode most significant).
    pub fn reduced_density_matrix(&self, modes: &[usize]) -> Result<DMatrix<C>> {
        let (state, axes) = self.with_axes(modes)?;
        checked_dim(self.cutoff(), axes.len(), "reduced density matrix", REDUCED_BUDGET)?;
        let psi = state.split(&axes);
        Ok(&psi * psi.adjoint())
    }

    /// `Tr ρ²` of the reduced state of `modes`.
    pub fn purity(&self, modes: &[usize]) -> Result<f64> {
        let (state, axes) = self.with_axes(modes)?;
        let kept = state.cutoff().saturating_pow(axes.len() as u32);
        let rest = state.psi.len() / kept;
        if kept.min(rest) > REDUCED_BUDGET {
            return Err(FockError::BudgetExceeded { what: "purity", needed: kept.min(rest), budget: REDUCED_BUDGET });
        }
        let psi = state.split(&axes);
        let gram = if kept <= rest { &psi * psi.adjoint() } else { psi.adjoint() * &psi };
        Ok(gram.iter().map(|v| v.norm_sqr()).sum())
    }

    /// Density of the homodyne outcome of `basis` on `mode` at each grid point.
    pub fn homodyne_pdf(&self, mode: usize, basis: Quadrature, grid: &[f64]) -> Result<Vec<f64>> {
        let rho = self.reduced_density_matrix(&[mode])?;
        let d = self.cutoff();
        let phase = |n: usize| match basis {
            Quadrature::Q => C::new(1.0, 0.0),
            Quadrature::P => C::new(0.0, -1.0).powu(n as u32),
        };
        Ok(grid
            .iter()
            .map(|&x| {
                let h = hermite_functions(x, d);
                let c = DVector::from_fn(d, |n, _| phase(n) * h[n]);
                let w = &rho * c.map(|v| v.conj());
                c.iter().zip(w.iter()).map(|(a, b)| a * b).sum::<C>().re
            })
            .collect())
    }

    /// Population of Fock levels `cutoff−5 ..` on `axis`.
    pub fn top_population(&self, axis: usize) -> f64 {
        let top = self.cutoff() - 5;
        self.psi.iter().enumerate().filter(|(i, _)| self.digit(*i, axis) >= top).map(|(_, v)| v.norm_sqr()).sum()
    }

    /// Rejects states whose top-five-level population exceeds [`TRUNCATION_LIMIT`] on any axis.
    pub fn check_truncation(&self) -> Result<()> {
        self.check_truncation_except(&[])
    }

    /// As [`check_truncation`](Self::check_truncation), skipping `skip`.
    ///
    /// Register axes are dephased in a quadrature eigenbasis by the controlled
    /// gates that read them; only their quadrature statistics matter.
    pub fn check_truncation_except(&self, skip: &[usize]) -> Result<()> {
        for axis in (0..self.axes).filter(|a| !skip.contains(a)) {
            let population = self.top_population(axis);
            if population > TRUNCATION_LIMIT {
                return Err(FockError::Truncation { axis, population });
            }
        }
        Ok(())
    }
}
