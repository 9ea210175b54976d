use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;

use cvclifford::Quadrature;

use crate::error::{FockError, Result};

/// Smallest supported cutoff; the commutator check needs a non-empty block below the top five levels.
pub const MIN_CUTOFF: usize = 6;

/// Ladder and quadrature matrices truncated to photon numbers `0..cutoff`.
#[derive(Debug, Clone)]
pub struct FockOperators {
    cutoff: usize,
    a: DMatrix<C>,
    q: DMatrix<C>,
    p: DMatrix<C>,
}

impl FockOperators {
    pub fn new(cutoff: usize) -> Result<Self> {
        if cutoff < MIN_CUTOFF {
            return Err(FockError::CutoffTooSmall { cutoff, min: MIN_CUTOFF });
        }
        let a = DMatrix::from_fn(cutoff, cutoff, |i, j| if j == i + 1 { C::new((j as f64).sqrt(), 0.0) } else { C::new(0.0, 0.0) });
        let ad = a.adjoint();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let q = (&a + &ad) * C::new(s, 0.0);
        let p = (&ad - &a) * C::new(0.0, s);
        Ok(Self { cutoff, a, q, p })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn annihilation(&self) -> &DMatrix<C> {
        &self.a
    }

    pub fn creation(&self) -> DMatrix<C> {
        self.a.adjoint()
    }

    pub fn number(&self) -> DMatrix<C> {
        DMatrix::from_fn(self.cutoff, self.cutoff, |i, j| if i == j { C::new(i as f64, 0.0) } else { C::new(0.0, 0.0) })
    }

    pub fn q(&self) -> &DMatrix<C> {
        &self.q
    }

    pub fn p(&self) -> &DMatrix<C> {
        &self.p
    }

    pub fn quadrature(&self, basis: Quadrature) -> &DMatrix<C> {
        match basis {
            Quadrature::Q => &self.q,
            Quadrature::P => &self.p,
        }
    }

    /// `(q, p)` by local index.
    pub(crate) fn x(&self, i: usize) -> &DMatrix<C> {
        if i % 2 == 0 {
            &self.q
        } else {
            &self.p
        }
    }

    /// Max deviation of `[q, p]` from `i·I` on the top-left `(D−5)×(D−5)` block.
    pub fn commutator_deviation(&self) -> f64 {
        let comm = &self.q * &self.p - &self.p * &self.q;
        let k = self.cutoff - 5;
        let mut dev = 0.0f64;
        for i in 0..k {
            for j in 0..k {
                let target = if i == j { C::new(0.0, 1.0) } else { C::new(0.0, 0.0) };
                dev = dev.max((comm[(i, j)] - target).norm());
            }
        }
        dev
    }

    /// Single-mode `½ r̂ᵀ A r̂ + bᵀ r̂` with products symmetrized.
    pub fn quadratic(&self, a: &DMatrix<f64>, b: &[f64]) -> DMatrix<C> {
        let mut h = DMatrix::<C>::zeros(self.cutoff, self.cutoff);
        for i in 0..2 {
            for j in 0..2 {
                if a[(i, j)] != 0.0 {
                    h += self.x(i) * self.x(j) * C::new(0.5 * a[(i, j)], 0.0);
                }
            }
            if b[i] != 0.0 {
                h += self.x(i) * C::new(b[i], 0.0);
            }
        }
        symmetrize(h)
    }
}

pub(crate) fn symmetrize(h: DMatrix<C>) -> DMatrix<C> {
    (&h + h.adjoint()) * C::new(0.5, 0.0)
}

/// `exp(i t H)` for Hermitian `H`.
pub(crate) fn expm_hermitian(h: DMatrix<C>, t: f64) -> DMatrix<C> {
    let eig = h.symmetric_eigen();
    let v = eig.eigenvectors;
    let phases = DVector::from_iterator(eig.eigenvalues.len(), eig.eigenvalues.iter().map(|&l| C::from_polar(1.0, t * l)));
    let mut vd = v.clone();
    for (mut col, ph) in vd.column_iter_mut().zip(phases.iter()) {
        col *= *ph;
    }
    vd * v.adjoint()
}

/// Harmonic-oscillator eigenfunctions `⟨x|n⟩` for `n < count`.
pub fn hermite_functions(x: f64, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    out.push(std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp());
    if count > 1 {
        out.push(std::f64::consts::SQRT_2 * x * out[0]);
    }
    for n in 1..count.saturating_sub(1) {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * x * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
        out.push(next);
    }
    out
}
