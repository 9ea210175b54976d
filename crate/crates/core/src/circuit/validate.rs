use std::collections::HashSet;
use std::fmt;

use super::{Circuit, Instruction};

/// A validation failure tied to an instruction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub instruction: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "instr {}: {}", self.instruction, self.message)
    }
}

/// Checks mode ranges, gate arities, register dataflow and parameter ranges.
pub fn validate(circuit: &Circuit) -> Result<(), Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let n = circuit.n();
    if n == 0 {
        diags.push(Diagnostic { instruction: 0, message: "circuit must have at least one mode".into() });
    }
    let mut written: HashSet<&str> = HashSet::new();
    for (k, ins) in circuit.instructions().iter().enumerate() {
        let mut err = |message: String| diags.push(Diagnostic { instruction: k, message });

        let modes = ins.modes();
        for &m in &modes {
            if m >= n {
                err(format!("mode index {m} out of range for {n} modes"));
            }
        }
        if let Instruction::Gate { kind, modes, params } = ins {
            if modes.len() != kind.arity() {
                err(format!("`{kind}` acts on {} mode(s), got {}", kind.arity(), modes.len()));
            } else if kind.arity() == 2 && modes[0] == modes[1] {
                err(format!("`{kind}` needs two distinct modes, got {} twice", modes[0]));
            }
            if params.len() != kind.param_count() {
                err(format!("`{kind}` takes {} parameter(s), got {}", kind.param_count(), params.len()));
            }
        }
        if ins.numbers().iter().any(|v| !v.is_finite()) {
            err("non-finite parameter".into());
        }
        match ins {
            Instruction::Measure { efficiency, .. } if !(0.0..=1.0).contains(efficiency) => {
                err(format!("efficiency {efficiency} outside [0,1]"));
            }
            Instruction::Loss { eta, .. } if !(0.0..=1.0).contains(eta) => {
                err(format!("transmissivity {eta} outside [0,1]"));
            }
            _ => {}
        }
        for r in ins.reads() {
            if !written.contains(r) {
                err(format!("read-before-write of register `{r}` at instr {k}"));
            }
        }
        if let Some(r) = ins.writes() {
            if !written.insert(r) {
                err(format!("register `{r}` written twice"));
            }
        }
    }
    if diags.is_empty() {
        Ok(())
    } else {
        Err(diags)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{teleportation_circuit, GateKind, Param};
    use crate::measurement::Quadrature;

    fn messages(c: &Circuit) -> Vec<String> {
        validate(c).unwrap_err().into_iter().map(|d| d.to_string()).collect()
    }

    #[test]
    fn teleportation_is_valid() {
        assert!(validate(&teleportation_circuit(0.3, (0.5, -0.5))).is_ok());
        assert!(validate(&Circuit::new(4)).is_ok());
    }

    #[test]
    fn read_before_write() {
        let mut c = Circuit::new(2);
        c.push(Instruction::conditional_displacement(1, Quadrature::Q, Param::scaled(1.0, "m")));
        c.push(Instruction::measure(0, Quadrature::Q, "m"));
        let m = messages(&c);
        assert_eq!(m.len(), 1);
        assert!(m[0].contains("read-before-write") && m[0].contains("instr 0"), "{m:?}");
    }

    #[test]
    fn mode_range_and_arity() {
        let mut c = Circuit::new(2);
        c.push(Instruction::gate(GateKind::Sqz, &[2], &[0.1]));
        c.push(Instruction::gate(GateKind::Sum, &[1, 1], &[]));
        c.push(Instruction::gate(GateKind::Bs, &[0], &[0.1]));
        c.push(Instruction::gate(GateKind::Phase, &[0], &[]));
        let d = validate(&c).unwrap_err();
        assert_eq!(d.iter().map(|d| d.instruction).collect::<Vec<_>>(), vec![0, 1, 2, 3]);
        assert!(d[0].message.contains("mode index 2"));
    }

    #[test]
    fn parameter_ranges() {
        let mut c = Circuit::new(1);
        c.push(Instruction::Measure { mode: 0, basis: Quadrature::P, efficiency: 1.3, register: "a".into() });
        c.push(Instruction::Loss { mode: 0, eta: -0.1 });
        c.push(Instruction::gate(GateKind::Sqz, &[0], &[f64::NAN]));
        c.push(Instruction::measure(0, Quadrature::Q, "a"));
        let m = messages(&c);
        assert!(m[0].contains("efficiency 1.3 outside [0,1]"));
        assert!(m[1].contains("transmissivity"));
        assert!(m[2].contains("non-finite"));
        assert!(m[3].contains("written twice"));
    }

    #[test]
    fn zero_modes() {
        assert!(validate(&Circuit::new(0)).is_err());
    }
}
