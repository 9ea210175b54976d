use std::collections::HashMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use super::{validate, Circuit, Diagnostic, Instruction};
use crate::error::Error;
use crate::gates::Gate;
use crate::measurement::{homodyne_in_place, loss_in_place, shot_rng};
use crate::phase_space::GaussianState;
use crate::scalar::Real;

pub const DEFAULT_CHECK_INTERVAL: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunConfig {
    /// Full uncertainty-relation check every this many instructions; 0 disables it.
    /// Cheap per-mode checks on touched modes always run.
    pub check_interval: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { check_interval: DEFAULT_CHECK_INTERVAL }
    }
}

/// Register values in first-write order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MeasurementRecord {
    names: Vec<String>,
    values: Vec<f64>,
}

impl MeasurementRecord {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.names.iter().map(String::as_str).zip(self.values.iter().copied())
    }

    fn push(&mut self, name: &str, value: f64) {
        self.names.push(name.to_string());
        self.values.push(value);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult<T: Real> {
    pub record: MeasurementRecord,
    pub final_state: GaussianState<T>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RunError {
    #[error("circuit failed validation: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
    #[error("instr {instruction}: {error}\n{block}")]
    Breach { instruction: usize, error: Error, block: String },
}

fn dump_block<T: Real>(state: &GaussianState<T>, modes: &[usize]) -> String {
    let mut out = String::new();
    for &m in modes.iter().filter(|&&m| m < state.n()) {
        let [q, p] = state.mode_mean(m).map(Real::as_f64);
        let s = state.mode_covariance(m).map(|row| row.map(Real::as_f64));
        let _ = writeln!(out, "mode {m}: mean = [{q:e}, {p:e}]");
        let _ = writeln!(out, "  cov = [[{:e}, {:e}], [{:e}, {:e}]]", s[0][0], s[0][1], s[1][0], s[1][1]);
    }
    out
}

/// Single-mode necessary condition: positive diagonal and `det ≥ 1/4`.
fn check_modes<T: Real>(state: &GaussianState<T>, modes: &[usize]) -> Result<(), Error> {
    for &m in modes {
        let s = state.mode_covariance(m);
        let mean = state.mode_mean(m);
        if !(mean[0].finite() && mean[1].finite() && s.iter().flatten().all(|v| v.finite())) {
            return Err(Error::NonFinite { name: "moments", value: f64::NAN });
        }
        let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
        let scale = T::one().max(s[0][0].abs().max(s[1][1].abs()));
        let quarter = T::lit(0.25);
        if !(s[0][0] > T::zero() && s[1][1] > T::zero()) || det < quarter - T::tol(1e-9) * scale * scale {
            return Err(Error::Unphysical { min_eigenvalue: (det - quarter).as_f64() });
        }
    }
    Ok(())
}

fn apply<T: Real, R: Rng + ?Sized>(
    ins: &Instruction,
    state: &mut GaussianState<T>,
    regs: &mut HashMap<String, f64>,
    record: &mut MeasurementRecord,
    rng: &mut R,
) -> Result<(), Error> {
    match ins {
        Instruction::Gate { kind, modes, params } => {
            let values: Vec<f64> = params
                .iter()
                .map(|p| p.eval(regs).ok_or(Error::NonFinite { name: "register", value: f64::NAN }))
                .collect::<Result<_, _>>()?;
            state.apply_local(&kind.bind(&values).on::<T>(modes)?)
        }
        Instruction::Measure { mode, basis, efficiency, register } => {
            loss_in_place(state, *mode, T::lit(*efficiency))?;
            let value = homodyne_in_place(state, *mode, *basis, rng)?.as_f64();
            regs.insert(register.clone(), value);
            record.push(register, value);
            Ok(())
        }
        Instruction::Loss { mode, eta } => loss_in_place(state, *mode, T::lit(*eta)),
        Instruction::Init { mode, squeeze, displacement } => {
            state.reset_mode(*mode)?;
            state.apply_local(&Gate::Squeeze { r: *squeeze }.on(&[*mode])?)?;
            state.apply_local(&Gate::Displace { q: displacement.0, p: displacement.1 }.on(&[*mode])?)
        }
    }
}

fn execute<T: Real, R: Rng + ?Sized>(
    circuit: &Circuit,
    rng: &mut R,
    config: &RunConfig,
) -> Result<(MeasurementRecord, GaussianState<T>), RunError> {
    let mut state = GaussianState::<T>::vacuum(circuit.n()).map_err(|error| RunError::Breach {
        instruction: 0,
        error,
        block: String::new(),
    })?;
    let mut regs: HashMap<String, f64> = HashMap::new();
    let mut record = MeasurementRecord::default();

    for (k, ins) in circuit.instructions().iter().enumerate() {
        let modes = ins.modes();
        let outcome = apply(ins, &mut state, &mut regs, &mut record, rng)
            .and_then(|()| check_modes(&state, &modes))
            .and_then(|()| {
                if config.check_interval > 0 && (k + 1) % config.check_interval == 0 {
                    state.check_physical()
                } else {
                    Ok(())
                }
            });
        if let Err(error) = outcome {
            return Err(RunError::Breach { instruction: k, error, block: dump_block(&state, &modes) });
        }
    }
    if config.check_interval > 0 {
        if let Err(error) = state.check_physical() {
            let all: Vec<usize> = (0..circuit.n()).collect();
            return Err(RunError::Breach { instruction: circuit.len(), error, block: dump_block(&state, &all) });
        }
    }
    Ok((record, state))
}

/// Executes one shot (shot 0) with the default configuration.
pub fn run<T: Real>(circuit: &Circuit, seed: u64) -> Result<RunResult<T>, RunError> {
    run_with_config(circuit, seed, &RunConfig::default())
}

pub fn run_with_config<T: Real>(circuit: &Circuit, seed: u64, config: &RunConfig) -> Result<RunResult<T>, RunError> {
    run_shot(circuit, seed, 0, config)
}

/// Executes shot `shot` on its own RNG stream.
pub fn run_shot<T: Real>(circuit: &Circuit, seed: u64, shot: u64, config: &RunConfig) -> Result<RunResult<T>, RunError> {
    validate(circuit).map_err(RunError::Invalid)?;
    let mut rng = shot_rng(seed, shot);
    let (record, final_state) = execute(circuit, &mut rng, config)?;
    Ok(RunResult { record, final_state, seed })
}

/// Shots `0..shots` in parallel, returned in shot order.
pub fn run_shots<T: Real>(
    circuit: &Circuit,
    seed: u64,
    shots: usize,
    config: &RunConfig,
) -> Result<Vec<RunResult<T>>, RunError> {
    validate(circuit).map_err(RunError::Invalid)?;
    (0..shots as u64)
        .into_par_iter()
        .map(|shot| {
            let mut rng = shot_rng(seed, shot);
            let (record, final_state) = execute(circuit, &mut rng, config)?;
            Ok(RunResult { record, final_state, seed })
        })
        .collect()
}

/// Unconditional moments of the shot ensemble:
/// mean of means, and mean covariance plus covariance of means.
pub fn aggregate_final<T: Real>(results: &[RunResult<T>]) -> Option<GaussianState<T>> {
    let first = results.first()?;
    let dim = first.final_state.mean().len();
    let count = T::lit(results.len() as f64);
    let mut mean = DVector::<T>::zeros(dim);
    let mut cov = DMatrix::<T>::zeros(dim, dim);
    for r in results {
        mean += r.final_state.mean();
        cov += r.final_state.covariance();
    }
    mean /= count;
    cov /= count;
    for r in results {
        let dev = r.final_state.mean() - &mean;
        cov.ger(T::one() / count, &dev, &dev, T::one());
    }
    Some(GaussianState::from_parts_unchecked(mean, cov))
}
