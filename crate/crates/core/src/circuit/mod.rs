//! Circuit representation with classical registers and feed-forward.

mod analytic;
mod delay;
mod engine;
mod random;
mod validate;

pub use analytic::{analytic_moments, moments, AnalyticMoments, MomentMethod, MomentReport, NotAnalytic};
pub use delay::{delay_measurements, RewriteError};
pub use engine::{
    aggregate_final, run, run_shot, run_shots, run_with_config, MeasurementRecord, RunConfig, RunError, RunResult,
    DEFAULT_CHECK_INTERVAL,
};
pub use random::random_circuit;
pub use validate::{validate, Diagnostic};

use std::collections::HashMap;
use std::fmt;

use crate::gates::Gate;
use crate::measurement::Quadrature;

/// Library gate families, unbound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    Disp,
    Sqz,
    Fourier,
    Phase,
    Sum,
    Bs,
}

impl GateKind {
    pub const ALL: [GateKind; 6] =
        [GateKind::Disp, GateKind::Sqz, GateKind::Fourier, GateKind::Phase, GateKind::Sum, GateKind::Bs];

    pub fn arity(self) -> usize {
        match self {
            GateKind::Sum | GateKind::Bs => 2,
            _ => 1,
        }
    }

    pub fn param_count(self) -> usize {
        match self {
            GateKind::Disp => 2,
            GateKind::Fourier | GateKind::Sum => 0,
            _ => 1,
        }
    }

    pub fn mnemonic(self) -> &'static str {
        match self {
            GateKind::Disp => "disp",
            GateKind::Sqz => "sqz",
            GateKind::Fourier => "fourier",
            GateKind::Phase => "phase",
            GateKind::Sum => "sum",
            GateKind::Bs => "bs",
        }
    }

    pub fn from_mnemonic(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.mnemonic() == s)
    }

    /// Binds parameter values. `params.len()` must equal [`param_count`](Self::param_count).
    pub fn bind(self, params: &[f64]) -> Gate {
        match self {
            GateKind::Disp => Gate::Displace { q: params[0], p: params[1] },
            GateKind::Sqz => Gate::Squeeze { r: params[0] },
            GateKind::Fourier => Gate::Fourier,
            GateKind::Phase => Gate::Phase { eta: params[0] },
            GateKind::Sum => Gate::Sum,
            GateKind::Bs => Gate::Beamsplitter { theta: params[0] },
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.mnemonic())
    }
}

/// `Σ coefficient·register + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineExpr {
    pub terms: Vec<(f64, String)>,
    pub offset: f64,
}

impl AffineExpr {
    pub fn eval(&self, regs: &HashMap<String, f64>) -> Option<f64> {
        let mut acc = self.offset;
        for (c, r) in &self.terms {
            acc += c * regs.get(r)?;
        }
        Some(acc)
    }
}

/// A gate parameter: constant, or affine in earlier measurement outcomes.
#[derive(Debug, Clone, PartialEq)]
pub enum Param {
    Const(f64),
    Expr(AffineExpr),
}

impl Param {
    /// Affine parameter; collapses to a constant when there are no terms.
    pub fn affine(terms: Vec<(f64, String)>, offset: f64) -> Self {
        if terms.is_empty() {
            Param::Const(offset)
        } else {
            Param::Expr(AffineExpr { terms, offset })
        }
    }

    /// `multiplier·register`.
    pub fn scaled(multiplier: f64, register: impl Into<String>) -> Self {
        Param::Expr(AffineExpr { terms: vec![(multiplier, register.into())], offset: 0.0 })
    }

    pub fn eval(&self, regs: &HashMap<String, f64>) -> Option<f64> {
        match self {
            Param::Const(v) => Some(*v),
            Param::Expr(e) => e.eval(regs),
        }
    }

    pub fn registers(&self) -> impl Iterator<Item = &str> {
        let terms: &[(f64, String)] = match self {
            Param::Const(_) => &[],
            Param::Expr(e) => &e.terms,
        };
        terms.iter().map(|(_, r)| r.as_str())
    }

    pub fn is_const(&self) -> bool {
        matches!(self, Param::Const(_))
    }

    fn numbers(&self) -> Vec<f64> {
        match self {
            Param::Const(v) => vec![*v],
            Param::Expr(e) => e.terms.iter().map(|t| t.0).chain([e.offset]).collect(),
        }
    }
}

impl From<f64> for Param {
    fn from(v: f64) -> Self {
        Param::Const(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instruction {
    Gate { kind: GateKind, modes: Vec<usize>, params: Vec<Param> },
    /// Homodyne of `basis` after loss `1 − efficiency`; the outcome is written to `register`.
    Measure { mode: usize, basis: Quadrature, efficiency: f64, register: String },
    Loss { mode: usize, eta: f64 },
    /// Resets `mode` to vacuum, squeezes by `squeeze`, then displaces.
    Init { mode: usize, squeeze: f64, displacement: (f64, f64) },
}

impl Instruction {
    pub fn gate(kind: GateKind, modes: &[usize], params: &[f64]) -> Self {
        Instruction::Gate { kind, modes: modes.to_vec(), params: params.iter().map(|&v| Param::Const(v)).collect() }
    }

    pub fn measure(mode: usize, basis: Quadrature, register: impl Into<String>) -> Self {
        Instruction::Measure { mode, basis, efficiency: 1.0, register: register.into() }
    }

    /// Displacement of one quadrature of `mode` by an affine expression.
    pub fn conditional_displacement(mode: usize, basis: Quadrature, expr: Param) -> Self {
        let params = match basis {
            Quadrature::Q => vec![expr, Param::Const(0.0)],
            Quadrature::P => vec![Param::Const(0.0), expr],
        };
        Instruction::Gate { kind: GateKind::Disp, modes: vec![mode], params }
    }

    pub fn modes(&self) -> Vec<usize> {
        match self {
            Instruction::Gate { modes, .. } => modes.clone(),
            Instruction::Measure { mode, .. } | Instruction::Loss { mode, .. } | Instruction::Init { mode, .. } => {
                vec![*mode]
            }
        }
    }

    /// Registers read by this instruction.
    pub fn reads(&self) -> Vec<&str> {
        match self {
            Instruction::Gate { params, .. } => params.iter().flat_map(|p| p.registers()).collect(),
            _ => Vec::new(),
        }
    }

    pub fn writes(&self) -> Option<&str> {
        match self {
            Instruction::Measure { register, .. } => Some(register),
            _ => None,
        }
    }

    pub fn is_feed_forward(&self) -> bool {
        !self.reads().is_empty()
    }

    pub(crate) fn numbers(&self) -> Vec<f64> {
        match self {
            Instruction::Gate { params, .. } => params.iter().flat_map(|p| p.numbers()).collect(),
            Instruction::Measure { efficiency, .. } => vec![*efficiency],
            Instruction::Loss { eta, .. } => vec![*eta],
            Instruction::Init { squeeze, displacement, .. } => vec![*squeeze, displacement.0, displacement.1],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n: usize,
    instructions: Vec<Instruction>,
}

impl Circuit {
    pub fn new(n: usize) -> Self {
        Self { n, instructions: Vec::new() }
    }

    pub fn from_instructions(n: usize, instructions: Vec<Instruction>) -> Self {
        Self { n, instructions }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn push(&mut self, instruction: Instruction) -> &mut Self {
        self.instructions.push(instruction);
        self
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    /// Register names in first-write order.
    pub fn registers(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for ins in &self.instructions {
            if let Some(r) = ins.writes() {
                if !out.iter().any(|o| o == r) {
                    out.push(r.to_string());
                }
            }
        }
        out
    }

    pub fn has_feed_forward(&self) -> bool {
        self.instructions.iter().any(Instruction::is_feed_forward)
    }

    pub fn measurement_count(&self) -> usize {
        self.instructions.iter().filter(|i| matches!(i, Instruction::Measure { .. })).count()
    }
}

/// Continuous-variable teleportation of a displaced vacuum on mode 0 to mode 2,
/// with EPR resource squeezing `r`.
pub fn teleportation_circuit(r: f64, input: (f64, f64)) -> Circuit {
    use std::f64::consts::{FRAC_PI_4, SQRT_2};
    let mut c = Circuit::new(3);
    c.push(Instruction::gate(GateKind::Disp, &[0], &[input.0, input.1]))
        .push(Instruction::gate(GateKind::Sqz, &[1], &[r]))
        .push(Instruction::gate(GateKind::Sqz, &[2], &[-r]))
        .push(Instruction::gate(GateKind::Bs, &[1, 2], &[FRAC_PI_4]))
        .push(Instruction::gate(GateKind::Bs, &[0, 1], &[FRAC_PI_4]))
        .push(Instruction::measure(1, Quadrature::Q, "mu"))
        .push(Instruction::measure(0, Quadrature::P, "mv"))
        .push(Instruction::conditional_displacement(2, Quadrature::Q, Param::scaled(-SQRT_2, "mu")))
        .push(Instruction::conditional_displacement(2, Quadrature::P, Param::scaled(SQRT_2, "mv")));
    c
}

/// Ten small circuits with displacement feed-forward, used to exercise the
/// delayed-measurement rewrite.
pub fn feed_forward_corpus() -> Vec<Circuit> {
    use GateKind::*;
    use Quadrature::{P, Q};
    let g = Instruction::gate;
    let cd = Instruction::conditional_displacement;
    let meas = |mode, basis, efficiency, reg: &str| Instruction::Measure {
        mode,
        basis,
        efficiency,
        register: reg.to_string(),
    };
    let expr = |terms: &[(f64, &str)], offset| {
        Param::affine(terms.iter().map(|&(c, r)| (c, r.to_string())).collect(), offset)
    };

    let mut lossy_teleport = teleportation_circuit(1.0, (-0.4, 0.6));
    for ins in &mut lossy_teleport.instructions {
        if let Instruction::Measure { efficiency, .. } = ins {
            *efficiency = 0.9;
        }
    }

    vec![
        teleportation_circuit(0.5, (1.0, -0.5)),
        lossy_teleport,
        Circuit::from_instructions(1, vec![
            g(Sqz, &[0], &[0.3]),
            meas(0, Q, 1.0, "a"),
            cd(0, Q, Param::scaled(2.0, "a")),
        ]),
        Circuit::from_instructions(2, vec![
            g(Sqz, &[0], &[0.5]),
            g(Sum, &[0, 1], &[]),
            meas(0, Q, 1.0, "a"),
            cd(1, P, expr(&[(-0.7, "a")], 0.2)),
        ]),
        Circuit::from_instructions(2, vec![
            g(Sqz, &[0], &[-0.4]),
            g(Bs, &[0, 1], &[0.3]),
            meas(0, P, 1.0, "b"),
            cd(1, Q, Param::scaled(1.5, "b")),
            cd(1, P, Param::scaled(-0.5, "b")),
        ]),
        Circuit::from_instructions(3, vec![
            g(Sqz, &[0], &[0.3]),
            g(Sqz, &[1], &[-0.2]),
            g(Sqz, &[2], &[0.6]),
            g(Sum, &[0, 2], &[]),
            g(Bs, &[1, 2], &[0.9]),
            meas(0, Q, 1.0, "x"),
            meas(1, P, 1.0, "y"),
            Instruction::Gate {
                kind: Disp,
                modes: vec![2],
                params: vec![expr(&[(0.5, "x"), (-1.2, "y")], 0.1), Param::scaled(2.0, "y")],
            },
        ]),
        Circuit::from_instructions(3, vec![
            g(Sqz, &[2], &[0.2]),
            g(Sqz, &[0], &[0.4]),
            g(Sum, &[0, 1], &[]),
            meas(0, Q, 1.0, "a"),
            cd(1, Q, Param::scaled(1.0, "a")),
            g(Phase, &[1], &[0.5]),
            g(Sum, &[1, 2], &[]),
            meas(1, P, 1.0, "b"),
            cd(2, P, expr(&[(-2.0, "b")], 1.0)),
        ]),
        Circuit::from_instructions(2, vec![
            Instruction::Init { mode: 0, squeeze: 0.6, displacement: (0.5, -0.5) },
            Instruction::Loss { mode: 0, eta: 0.8 },
            g(Bs, &[0, 1], &[0.7]),
            meas(1, Q, 0.7, "m"),
            cd(0, Q, Param::scaled(-1.0, "m")),
            g(Fourier, &[0], &[]),
        ]),
        Circuit::from_instructions(2, vec![
            g(Fourier, &[0], &[]),
            g(Sqz, &[0], &[0.3]),
            g(Sum, &[1, 0], &[]),
            meas(0, P, 1.0, "z"),
            cd(1, P, Param::scaled(-3.0, "z")),
            cd(1, Q, Param::scaled(0.25, "z")),
        ]),
        Circuit::from_instructions(2, vec![
            g(Sqz, &[0], &[0.2]),
            meas(0, Q, 1.0, "a"),
            g(Sqz, &[0], &[0.5]),
            g(Sum, &[0, 1], &[]),
            meas(0, Q, 1.0, "b"),
            Instruction::Gate {
                kind: Disp,
                modes: vec![1],
                params: vec![expr(&[(1.0, "a"), (1.0, "b")], 0.0), Param::scaled(-0.5, "a")],
            },
        ]),
    ]
}
