use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Circuit, GateKind, Instruction};
use crate::measurement::Quadrature;

/// Random library gates on `n` modes with `measurements` ideal homodyne
/// measurements spread evenly between them (registers `m0`, `m1`, …).
///
/// Squeezing-type parameters stay small so long circuits remain well conditioned.
pub fn random_circuit(n: usize, gates: usize, measurements: usize, seed: u64) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kinds: &[GateKind] = if n >= 2 { &GateKind::ALL } else { &GateKind::ALL[..4] };
    let every = gates.checked_div(measurements).map_or(usize::MAX, |e| e.max(1));
    let mut c = Circuit::new(n);
    let mut measured = 0;
    for g in 0..gates {
        let m = rng.random_range(0..n.max(1));
        let other = |rng: &mut ChaCha8Rng| (m + rng.random_range(1..n)) % n;
        let ins = match kinds[rng.random_range(0..kinds.len())] {
            GateKind::Disp => Instruction::gate(GateKind::Disp, &[m], &[rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]),
            GateKind::Sqz => Instruction::gate(GateKind::Sqz, &[m], &[rng.random_range(-0.2..0.2)]),
            GateKind::Fourier => Instruction::gate(GateKind::Fourier, &[m], &[]),
            GateKind::Phase => Instruction::gate(GateKind::Phase, &[m], &[rng.random_range(-0.2..0.2)]),
            GateKind::Sum => Instruction::gate(GateKind::Sum, &[m, other(&mut rng)], &[]),
            GateKind::Bs => Instruction::gate(GateKind::Bs, &[m, other(&mut rng)], &[rng.random_range(-PI..PI)]),
        };
        c.push(ins);
        if measured < measurements && (g + 1) % every == 0 {
            let basis = if rng.random_bool(0.5) { Quadrature::Q } else { Quadrature::P };
            c.push(Instruction::measure(rng.random_range(0..n.max(1)), basis, format!("m{measured}")));
            measured += 1;
        }
    }
    while measured < measurements {
        c.push(Instruction::measure(measured % n.max(1), Quadrature::Q, format!("m{measured}")));
        measured += 1;
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::validate;

    #[test]
    fn shape_and_determinism() {
        let c = random_circuit(5, 200, 7, 3);
        assert_eq!(c.len(), 207);
        assert_eq!(c.measurement_count(), 7);
        assert!(validate(&c).is_ok());
        assert_eq!(c, random_circuit(5, 200, 7, 3));
        assert_ne!(c, random_circuit(5, 200, 7, 4));
        assert!(validate(&random_circuit(1, 50, 50, 0)).is_ok());
    }
}
