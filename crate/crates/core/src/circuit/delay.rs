//! Replaces measurement feed-forward by coherent couplings with measurements
//! deferred to the end of the circuit.
//!
//! Each measurement of mode `m` swaps `m` onto a fresh vacuum ancilla (leaving
//! `m` in vacuum, as the fixed-arity measurement does) and measures the ancilla
//! last. A displacement `c·x` driven by that outcome becomes
//! `exp(−i c x̂_a p̂_t)`, realised as a SUM from the ancilla sandwiched between
//! squeezers (magnitude of `c`) and Fourier gates (sign of `c`, p-basis
//! outcomes). Momentum kicks wrap the target in `F³ … F`.

use std::f64::consts::FRAC_PI_2;

use thiserror::Error;

use super::{validate, Circuit, Diagnostic, GateKind, Instruction, Param};
use crate::measurement::Quadrature;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RewriteError {
    #[error("circuit failed validation")]
    Invalid(Vec<Diagnostic>),
    #[error("{}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Unsupported(Vec<Diagnostic>),
}

impl RewriteError {
    pub fn diagnostics(&self) -> &[Diagnostic] {
        match self {
            RewriteError::Invalid(d) | RewriteError::Unsupported(d) => d,
        }
    }
}

fn fouriers(out: &mut Vec<Instruction>, mode: usize, count: usize) {
    for _ in 0..count % 4 {
        out.push(Instruction::gate(GateKind::Fourier, &[mode], &[]));
    }
}

/// `exp(−i c x̂_a p̂_t)` or, for a momentum target, `exp(i c x̂_a q̂_t)`.
fn coupling(out: &mut Vec<Instruction>, ancilla: usize, basis: Quadrature, c: f64, target: usize, kick: Quadrature) {
    let p_basis = usize::from(basis == Quadrature::P);
    let negative = usize::from(c < 0.0);
    let s = c.abs().ln();
    fouriers(out, ancilla, 3 * p_basis + 2 * negative);
    if s != 0.0 {
        out.push(Instruction::gate(GateKind::Sqz, &[ancilla], &[-s]));
    }
    if kick == Quadrature::P {
        fouriers(out, target, 3);
    }
    out.push(Instruction::gate(GateKind::Sum, &[ancilla, target], &[]));
    if kick == Quadrature::P {
        fouriers(out, target, 1);
    }
    if s != 0.0 {
        out.push(Instruction::gate(GateKind::Sqz, &[ancilla], &[s]));
    }
    fouriers(out, ancilla, 2 * negative + p_basis);
}

/// Rewrites feed-forward displacements into couplings with deferred measurement.
///
/// The result acts on `n + (number of measurements)` modes; the first `n` carry
/// the original modes and registers keep their names and order.
pub fn delay_measurements(circuit: &Circuit) -> Result<Circuit, RewriteError> {
    validate(circuit).map_err(RewriteError::Invalid)?;
    if circuit.measurement_count() == 0 {
        return Ok(circuit.clone());
    }
    let n = circuit.n();
    let mut out = Vec::new();
    let mut terminal = Vec::new();
    let mut ancilla_of: std::collections::HashMap<&str, (usize, Quadrature)> = Default::default();
    let mut refused = Vec::new();

    for (k, ins) in circuit.instructions().iter().enumerate() {
        match ins {
            Instruction::Measure { mode, basis, efficiency, register } => {
                let a = n + terminal.len();
                if *efficiency < 1.0 {
                    out.push(Instruction::Loss { mode: *mode, eta: *efficiency });
                }
                out.push(Instruction::gate(GateKind::Bs, &[*mode, a], &[-FRAC_PI_2]));
                terminal.push(Instruction::measure(a, *basis, register.clone()));
                ancilla_of.insert(register, (a, *basis));
            }
            Instruction::Gate { kind: GateKind::Disp, modes, params } if ins.is_feed_forward() => {
                let t = modes[0];
                let mut plain = [0.0, 0.0];
                let mut couplings = Vec::new();
                for (axis, (param, kick)) in params.iter().zip([Quadrature::Q, Quadrature::P]).enumerate() {
                    match param {
                        Param::Const(v) => plain[axis] += v,
                        Param::Expr(e) => {
                            plain[axis] += e.offset;
                            for (c, reg) in &e.terms {
                                if *c != 0.0 {
                                    let (a, basis) = ancilla_of[reg.as_str()];
                                    couplings.push((a, basis, *c, kick));
                                }
                            }
                        }
                    }
                }
                if plain != [0.0, 0.0] {
                    out.push(Instruction::gate(GateKind::Disp, &[t], &plain));
                }
                for (a, basis, c, kick) in couplings {
                    coupling(&mut out, a, basis, c, t, kick);
                }
            }
            Instruction::Gate { kind, .. } if ins.is_feed_forward() => refused.push(Diagnostic {
                instruction: k,
                message: format!("feed-forward into `{kind}` cannot be rewritten; only displacements are supported"),
            }),
            other => out.push(other.clone()),
        }
    }
    if !refused.is_empty() {
        return Err(RewriteError::Unsupported(refused));
    }
    let ancillas = terminal.len();
    out.extend(terminal);
    Ok(Circuit::from_instructions(n + ancillas, out))
}
