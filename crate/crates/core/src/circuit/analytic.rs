//! Exact unconditional moments for circuits whose feed-forward is affine
//! displacement.
//!
//! Registers join the quadratures in one augmented Gaussian vector
//! `(r₁ … r₂ₙ, x₁ … x_R)`. A homodyne outcome has the same joint law with the
//! rest of the system as the measured quadrature itself, so measuring copies
//! that quadrature into its register slot before the mode is reset. Conditional
//! displacements are then linear maps of the augmented vector.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use super::engine::{aggregate_final, run_shots, RunConfig, RunError};
use super::{validate, Circuit, Diagnostic, GateKind, Instruction, Param};
use crate::error::Error;
use crate::gates::Gate;
use crate::phase_space::{local_congruence, p_index, q_index, GaussianState};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NotAnalytic {
    #[error("circuit failed validation")]
    Invalid(Vec<Diagnostic>),
    #[error("instr {instruction}: feed-forward into `{kind}` makes the covariance outcome-dependent")]
    FeedForward { instruction: usize, kind: GateKind },
    #[error("instr {instruction}: {error}")]
    Numerical { instruction: usize, error: Error },
}

/// Unconditional output moments and the joint law of the registers.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticMoments<T: Real> {
    pub state: GaussianState<T>,
    pub registers: Vec<String>,
    pub register_mean: DVector<T>,
    pub register_covariance: DMatrix<T>,
    /// `Cov(r_i, x_j)` between final quadratures and registers.
    pub cross_covariance: DMatrix<T>,
}

impl<T: Real> AnalyticMoments<T> {
    pub fn register(&self, name: &str) -> Option<(T, T)> {
        let j = self.registers.iter().position(|r| r == name)?;
        Some((self.register_mean[j], self.register_covariance[(j, j)]))
    }
}

struct Augmented<T: Real> {
    mean: DVector<T>,
    cov: DMatrix<T>,
}

impl<T: Real> Augmented<T> {
    fn quad_scale(&mut self, i: usize, t: T) {
        self.mean[i] *= t;
        self.cov.column_mut(i).scale_mut(t);
        self.cov.row_mut(i).scale_mut(t);
    }

    fn loss(&mut self, mode: usize, eta: T) {
        let t = eta.sqrt();
        let noise = (T::one() - eta) * T::half();
        for i in [q_index(mode), p_index(mode)] {
            self.quad_scale(i, t);
            self.cov[(i, i)] += noise;
        }
    }

    fn reset(&mut self, mode: usize) {
        for i in [q_index(mode), p_index(mode)] {
            self.mean[i] = T::zero();
            self.cov.column_mut(i).fill(T::zero());
            self.cov.row_mut(i).fill(T::zero());
            self.cov[(i, i)] = T::half();
        }
    }

    fn copy_into(&mut self, from: usize, slot: usize) {
        self.mean[slot] = self.mean[from];
        let col = self.cov.column(from).into_owned();
        self.cov.column_mut(slot).copy_from(&col);
        self.cov.row_mut(slot).copy_from(&col.transpose());
        self.cov[(slot, slot)] = col[from];
    }

    fn gate(&mut self, gate: Gate, modes: &[usize]) -> Result<(), Error> {
        let op = gate.on::<T>(modes)?;
        local_congruence(&mut self.mean, &mut self.cov, &op.indices(), op.op().matrix(), Some(op.op().displacement()));
        Ok(())
    }

    /// `r_target += Σ c_j x_j + offset`.
    fn affine_shift(&mut self, target: usize, terms: &[(T, usize)], offset: T) {
        let mut idx = vec![target];
        let mut coef = vec![T::one()];
        for &(c, slot) in terms {
            match idx.iter().position(|&i| i == slot) {
                Some(p) => coef[p] += c,
                None => {
                    idx.push(slot);
                    coef.push(c);
                }
            }
        }
        let k = idx.len();
        let mut l = DMatrix::<T>::identity(k, k);
        for (b, &c) in coef.iter().enumerate() {
            l[(0, b)] = c;
        }
        let mut d = DVector::<T>::zeros(k);
        d[0] = offset;
        local_congruence(&mut self.mean, &mut self.cov, &idx, &l, Some(&d));
    }
}

/// Propagates exact moments; refuses feed-forward into anything but displacements.
pub fn analytic_moments<T: Real>(circuit: &Circuit) -> Result<AnalyticMoments<T>, NotAnalytic> {
    validate(circuit).map_err(NotAnalytic::Invalid)?;
    let n = circuit.n();
    let registers = circuit.registers();
    let slot: HashMap<&str, usize> = registers.iter().enumerate().map(|(j, r)| (r.as_str(), 2 * n + j)).collect();
    let dim = 2 * n + registers.len();
    let mut aug = Augmented::<T> { mean: DVector::zeros(dim), cov: DMatrix::zeros(dim, dim) };
    for i in 0..2 * n {
        aug.cov[(i, i)] = T::half();
    }

    for (k, ins) in circuit.instructions().iter().enumerate() {
        let numerical = |error| NotAnalytic::Numerical { instruction: k, error };
        match ins {
            Instruction::Gate { kind, modes, params } if params.iter().all(Param::is_const) => {
                let values: Vec<f64> = params.iter().map(|p| p.eval(&HashMap::new()).unwrap_or(0.0)).collect();
                aug.gate(kind.bind(&values), modes).map_err(numerical)?;
            }
            Instruction::Gate { kind: GateKind::Disp, modes, params } => {
                for (param, target) in params.iter().zip([q_index(modes[0]), p_index(modes[0])]) {
                    match param {
                        Param::Const(v) => aug.affine_shift(target, &[], T::lit(*v)),
                        Param::Expr(e) => {
                            let terms: Vec<(T, usize)> = e.terms.iter().map(|(c, r)| (T::lit(*c), slot[r.as_str()])).collect();
                            aug.affine_shift(target, &terms, T::lit(e.offset));
                        }
                    }
                }
            }
            Instruction::Gate { kind, .. } => return Err(NotAnalytic::FeedForward { instruction: k, kind: *kind }),
            Instruction::Measure { mode, basis, efficiency, register } => {
                aug.loss(*mode, T::lit(*efficiency));
                aug.copy_into(basis.index(*mode), slot[register.as_str()]);
                aug.reset(*mode);
            }
            Instruction::Loss { mode, eta } => aug.loss(*mode, T::lit(*eta)),
            Instruction::Init { mode, squeeze, displacement } => {
                aug.reset(*mode);
                aug.gate(Gate::Squeeze { r: *squeeze }, &[*mode]).map_err(numerical)?;
                aug.gate(Gate::Displace { q: displacement.0, p: displacement.1 }, &[*mode]).map_err(numerical)?;
            }
        }
    }

    let q = 2 * n;
    let r = registers.len();
    let state = GaussianState::from_parts_unchecked(aug.mean.rows(0, q).into_owned(), aug.cov.view((0, 0), (q, q)).into_owned());
    Ok(AnalyticMoments {
        state,
        register_mean: aug.mean.rows(q, r).into_owned(),
        register_covariance: aug.cov.view((q, q), (r, r)).into_owned(),
        cross_covariance: aug.cov.view((0, q), (q, r)).into_owned(),
        registers,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentMethod {
    Analytic,
    Sampled { shots: usize, seed: u64 },
}

/// Per-mode and per-register first and second moments.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub method: MomentMethod,
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
    pub registers: Vec<String>,
    pub register_mean: DVector<f64>,
    pub register_covariance: DMatrix<f64>,
}

/// Analytic moments when available, otherwise estimates from `shots` seeded shots.
pub fn moments(circuit: &Circuit, seed: u64, shots: usize) -> Result<MomentReport, RunError> {
    match analytic_moments::<f64>(circuit) {
        Ok(m) => {
            let (mean, covariance) = m.state.into_parts();
            Ok(MomentReport {
                method: MomentMethod::Analytic,
                mean,
                covariance,
                registers: m.registers,
                register_mean: m.register_mean,
                register_covariance: m.register_covariance,
            })
        }
        Err(NotAnalytic::Invalid(d)) => Err(RunError::Invalid(d)),
        Err(NotAnalytic::Numerical { instruction, error }) => {
            Err(RunError::Breach { instruction, error, block: String::new() })
        }
        Err(NotAnalytic::FeedForward { .. }) => {
            let results = run_shots::<f64>(circuit, seed, shots.max(2), &RunConfig::default())?;
            let agg = aggregate_final(&results).expect("at least one shot");
            let registers = circuit.registers();
            let r = registers.len();
            let count = results.len() as f64;
            let samples = DMatrix::from_fn(results.len(), r, |i, j| results[i].record.values()[j]);
            let register_mean = DVector::from_fn(r, |j, _| samples.column(j).sum() / count);
            let register_covariance = DMatrix::from_fn(r, r, |a, b| {
                let (ma, mb) = (register_mean[a], register_mean[b]);
                samples.column(a).iter().zip(samples.column(b).iter()).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>()
                    / (count - 1.0)
            });
            let (mean, covariance) = agg.into_parts();
            Ok(MomentReport {
                method: MomentMethod::Sampled { shots: results.len(), seed },
                mean,
                covariance,
                registers,
                register_mean,
                register_covariance,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{teleportation_circuit, Circuit};
    use crate::measurement::Quadrature;

    #[test]
    fn squeezed_vacuum_report() {
        let r = 0.45;
        let mut c = Circuit::new(1);
        c.push(Instruction::gate(GateKind::Sqz, &[0], &[r]));
        let m = moments(&c, 0, 0).unwrap();
        assert_eq!(m.method, MomentMethod::Analytic);
        assert!((m.covariance[(0, 0)] - 0.5 * (-2.0 * r).exp()).abs() < 1e-15);
        assert!((m.covariance[(1, 1)] - 0.5 * (2.0 * r).exp()).abs() < 1e-15);
        let id = moments(&Circuit::new(2), 0, 0).unwrap();
        assert_eq!(id.covariance, DMatrix::identity(4, 4) * 0.5);
    }

    #[test]
    fn sum_cross_covariance() {
        let r = 0.3;
        let mut c = Circuit::new(2);
        c.push(Instruction::gate(GateKind::Sqz, &[0], &[r]))
            .push(Instruction::gate(GateKind::Sqz, &[1], &[r]))
            .push(Instruction::gate(GateKind::Sum, &[0, 1], &[]));
        let m = analytic_moments::<f64>(&c).unwrap();
        assert!((m.state.covariance()[(0, 2)] - 0.5 * (-2.0 * r).exp()).abs() < 1e-15);
    }

    #[test]
    fn teleportation_output_moments() {
        for r in [0.1, 0.5, 1.2] {
            let m = analytic_moments::<f64>(&teleportation_circuit(r, (0.8, -1.1))).unwrap();
            let [q, p] = m.state.mode_mean(2);
            assert!((q - 0.8).abs() < 1e-12 && (p + 1.1).abs() < 1e-12);
            let s = m.state.mode_covariance(2);
            let expect = 0.5 + (-2.0 * r).exp();
            assert!((s[0][0] - expect).abs() < 1e-12 && (s[1][1] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn registers_capture_measured_marginal() {
        let mut c = Circuit::new(1);
        c.push(Instruction::Init { mode: 0, squeeze: 0.2, displacement: (1.5, 0.0) });
        c.push(Instruction::Measure { mode: 0, basis: Quadrature::Q, efficiency: 0.5, register: "x".into() });
        let m = analytic_moments::<f64>(&c).unwrap();
        let (mean, var) = m.register("x").unwrap();
        assert!((mean - 1.5 * 0.5f64.sqrt()).abs() < 1e-15);
        assert!((var - (0.5 * 0.5 * (-0.4f64).exp() + 0.25)).abs() < 1e-15);
        assert_eq!(m.state, GaussianState::vacuum(1).unwrap());
    }

    #[test]
    fn analytic_matches_sampled_estimate() {
        let c = teleportation_circuit(0.6, (0.4, 0.9));
        let a = analytic_moments::<f64>(&c).unwrap();
        let shots = 20_000;
        let res = run_shots::<f64>(&c, 17, shots, &RunConfig::default()).unwrap();
        let agg = aggregate_final(&res).unwrap();
        for i in 0..6 {
            let var = a.state.covariance()[(i, i)];
            assert!((agg.mean()[i] - a.state.mean()[i]).abs() < 4.5 * (var / shots as f64).sqrt());
            assert!((agg.covariance()[(i, i)] / var - 1.0).abs() < 5.0 * (2.0 / shots as f64).sqrt());
        }
    }

    #[test]
    fn non_displacement_feed_forward_falls_back_to_shots() {
        let mut c = Circuit::new(2);
        c.push(Instruction::gate(GateKind::Sqz, &[0], &[0.3]))
            .push(Instruction::measure(0, Quadrature::Q, "m"))
            .push(Instruction::Gate { kind: GateKind::Sqz, modes: vec![1], params: vec![Param::scaled(0.1, "m")] });
        assert!(matches!(analytic_moments::<f64>(&c), Err(NotAnalytic::FeedForward { instruction: 2, .. })));
        let rep = moments(&c, 3, 500).unwrap();
        assert_eq!(rep.method, MomentMethod::Sampled { shots: 500, seed: 3 });
        assert_eq!(rep.registers, vec!["m".to_string()]);
        assert!((rep.register_covariance[(0, 0)] / (0.5 * (-0.6f64).exp()) - 1.0).abs() < 0.25);
    }
}
