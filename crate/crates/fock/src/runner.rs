//! Circuits on the Fock oracle.
//!
//! Measurements are never sampled. The measured mode's axis is kept as a
//! register, and feed-forward becomes a coherent gate controlled by that axis's
//! quadrature, so moments come out unconditional and exact up to truncation.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;

use cvclifford::circuit::{validate, AffineExpr, Circuit, GateKind, Instruction, Param};
use cvclifford::{Gate, Quadrature};

use crate::error::{FockError, Result};
use crate::state::{FockState, Observable};

/// Final oracle state and, per register in write order, the axis and quadrature holding it.
#[derive(Debug, Clone)]
pub struct OracleRun {
    pub state: FockState,
    pub registers: Vec<(String, usize, Quadrature)>,
}

/// Unconditional moments of modes and registers, laid out like the engine's analytic moments.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleMoments {
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
    pub registers: Vec<String>,
    pub register_mean: DVector<f64>,
    pub register_covariance: DMatrix<f64>,
    /// Mode quadratures × registers.
    pub cross_covariance: DMatrix<f64>,
}

fn split(p: &Param) -> (f64, &[(f64, String)]) {
    match p {
        Param::Const(v) => (*v, &[]),
        Param::Expr(AffineExpr { terms, offset }) => (*offset, terms),
    }
}

fn unsupported(instruction: usize, reason: impl Into<String>) -> FockError {
    FockError::Unsupported { instruction, reason: reason.into() }
}

fn feed_forward(
    state: &mut FockState,
    registers: &[(String, usize, Quadrature)],
    k: usize,
    kind: GateKind,
    modes: &[usize],
    params: &[Param],
) -> Result<()> {
    let control = |name: &str| {
        registers.iter().find(|r| r.0 == name).map(|r| (r.1, r.2)).ok_or_else(|| unsupported(k, format!("unknown register `{name}`")))
    };
    let mode = modes[0];
    match kind {
        GateKind::Disp => {
            let (q0, q_terms) = split(&params[0]);
            let (p0, p_terms) = split(&params[1]);
            if q0 != 0.0 || p0 != 0.0 {
                state.apply_gate(&Gate::Displace { q: q0, p: p0 }, &[mode])?;
            }
            let target = state.ensure_axis(mode)?;
            // exp(i(p q̂ − q p̂)) with q, p linear in register quadratures
            for (c, reg) in q_terms {
                let (axis, basis) = control(reg)?;
                let g = state.operators().p() * C::new(-c, 0.0);
                state.apply_controlled(axis, basis, target, g, 1.0);
            }
            for (c, reg) in p_terms {
                let (axis, basis) = control(reg)?;
                let g = state.operators().q() * C::new(*c, 0.0);
                state.apply_controlled(axis, basis, target, g, 1.0);
            }
        }
        GateKind::Sqz | GateKind::Phase => {
            let (t0, terms) = split(&params[0]);
            if t0 != 0.0 {
                state.apply_gate(&kind.bind(&[t0]), &[mode])?;
            }
            let target = state.ensure_axis(mode)?;
            let unit = kind.bind(&[1.0]).hamiltonian::<f64>()?;
            let g = state.operators().quadratic(unit.a(), unit.b().as_slice());
            for (c, reg) in terms {
                let (axis, basis) = control(reg)?;
                state.apply_controlled(axis, basis, target, g.clone(), *c);
            }
        }
        other => return Err(unsupported(k, format!("feed-forward into `{other}` is not supported by the oracle"))),
    }
    Ok(())
}

/// Runs `circuit` on the truncated Fock space with the given cutoff.
pub fn run_circuit(circuit: &Circuit, cutoff: usize) -> Result<OracleRun> {
    validate(circuit).map_err(FockError::Invalid)?;
    let mut state = FockState::vacuum(circuit.n(), cutoff)?;
    let mut registers: Vec<(String, usize, Quadrature)> = Vec::new();
    for (k, ins) in circuit.instructions().iter().enumerate() {
        match ins {
            Instruction::Gate { kind, modes, params } if ins.is_feed_forward() => {
                feed_forward(&mut state, &registers, k, *kind, modes, params)?;
            }
            Instruction::Gate { kind, modes, params } => {
                let values: Vec<f64> = params.iter().map(|p| split(p).0).collect();
                state.apply_gate(&kind.bind(&values), modes)?;
            }
            Instruction::Measure { mode, basis, efficiency, register } => {
                if *efficiency < 1.0 {
                    state.apply_loss(*mode, *efficiency)?;
                }
                let axis = state.detach(*mode)?;
                registers.push((register.clone(), axis, *basis));
            }
            Instruction::Loss { mode, eta } => state.apply_loss(*mode, *eta)?,
            Instruction::Init { mode, squeeze, displacement } => {
                state.reset(*mode)?;
                state.apply_gate(&Gate::Squeeze { r: *squeeze }, &[*mode])?;
                state.apply_gate(&Gate::Displace { q: displacement.0, p: displacement.1 }, &[*mode])?;
            }
        }
        let register_axes: Vec<usize> = registers.iter().map(|r| r.1).collect();
        state.check_truncation_except(&register_axes)?;
    }
    Ok(OracleRun { state, registers })
}

/// Unconditional first and second moments of a circuit's modes and registers.
pub fn oracle_moments(circuit: &Circuit, cutoff: usize) -> Result<OracleMoments> {
    let run = run_circuit(circuit, cutoff)?;
    let mut obs = run.state.mode_observables();
    let q = obs.len();
    obs.extend(run.registers.iter().map(|(_, axis, basis)| Observable::Axis(*axis, *basis)));
    let (mean, cov) = run.state.observable_moments(&obs);
    let r = run.registers.len();
    Ok(OracleMoments {
        mean: mean.rows(0, q).into_owned(),
        covariance: cov.view((0, 0), (q, q)).into_owned(),
        registers: run.registers.into_iter().map(|r| r.0).collect(),
        register_mean: mean.rows(q, r).into_owned(),
        register_covariance: cov.view((q, q), (r, r)).into_owned(),
        cross_covariance: cov.view((0, q), (q, r)).into_owned(),
    })
}
