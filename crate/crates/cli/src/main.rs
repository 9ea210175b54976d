mod report;

use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use cvclifford::circuit::{
    aggregate_final, analytic_moments, delay_measurements, moments, random_circuit, run_shots, run_with_config,
    MomentMethod, RunConfig, RunError, DEFAULT_CHECK_INTERVAL,
};
use cvclifford::dsl::{format, parse_bytes, ParseDiagnostic, Parsed};
use cvclifford_fock::{oracle_moments, FockError};

use report::{matrix, num, vector, SCHEMA};
use serde_json::json;

#[derive(Parser)]
#[command(name = "cvclifford", version, about = "Simulate continuous-variable Clifford circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Sample measurement records and report final moments.
    Run {
        /// Circuit file, or `-` for stdin.
        file: PathBuf,
        #[arg(long, env = "CVCLIFFORD_SEED")]
        seed: u64,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        shots: u64,
        #[arg(long, value_enum, default_value = "json")]
        out: OutFormat,
        /// Full physicality check every N instructions (0 disables).
        #[arg(long, default_value_t = DEFAULT_CHECK_INTERVAL)]
        check_interval: usize,
    },
    /// Report first and second moments: analytic when possible, otherwise sampled.
    Moments {
        file: PathBuf,
        #[arg(long, env = "CVCLIFFORD_SEED")]
        seed: Option<u64>,
        /// Shots for the sampled fallback.
        #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(2..))]
        shots: u64,
    },
    /// Check a circuit file and print diagnostics.
    Validate { file: PathBuf },
    /// Print the circuit with feed-forward replaced by coherent couplings and terminal measurements.
    RewriteDelay { file: PathBuf },
    /// Time a random circuit, or compare the engine with the Fock oracle.
    Bench {
        #[arg(long)]
        modes: usize,
        #[arg(long)]
        gates: usize,
        /// Defaults to gates / 100.
        #[arg(long)]
        measurements: Option<usize>,
        #[arg(long, env = "CVCLIFFORD_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_CHECK_INTERVAL)]
        check_interval: usize,
        /// Compare analytic moments with the Fock oracle instead (no measurements, ≤ 3 modes).
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 60)]
        cutoff: usize,
    },
}

const OK: u8 = 0;
const DIAGNOSTICS: u8 = 1;
const BREACH: u8 = 2;

struct Failure(u8);

type Outcome = Result<(), Failure>;

fn fail(code: u8, msg: impl std::fmt::Display) -> Failure {
    eprintln!("{msg}");
    Failure(code)
}

fn display_name(file: &Path) -> String {
    if file.as_os_str() == "-" {
        "<stdin>".into()
    } else {
        file.display().to_string()
    }
}

fn print_diagnostics(name: &str, diags: &[ParseDiagnostic]) {
    for d in diags {
        eprintln!("{name}:{d}");
    }
}

fn load(file: &Path) -> Result<Parsed, Failure> {
    let name = display_name(file);
    let mut bytes = Vec::new();
    let read = if file.as_os_str() == "-" {
        std::io::stdin().read_to_end(&mut bytes).map(|_| ())
    } else {
        std::fs::read(file).map(|b| bytes = b)
    };
    read.map_err(|e| fail(DIAGNOSTICS, format!("{name}: {e}")))?;
    match parse_bytes(&bytes) {
        Ok(parsed) => {
            print_diagnostics(&name, &parsed.warnings);
            Ok(parsed)
        }
        Err(diags) => {
            print_diagnostics(&name, &diags);
            Err(Failure(DIAGNOSTICS))
        }
    }
}

fn line_of(parsed: &Parsed, instruction: usize) -> usize {
    parsed.lines.get(instruction).copied().unwrap_or(0)
}

fn run_error(name: &str, parsed: &Parsed, err: RunError) -> Failure {
    match err {
        RunError::Invalid(diags) => {
            for d in diags {
                eprintln!("{name}:{}: error: {}", line_of(parsed, d.instruction), d.message);
            }
            Failure(DIAGNOSTICS)
        }
        RunError::Breach { instruction, error, block } => fail(
            BREACH,
            format!("{name}:{}: runtime invariant breach at instr {instruction}: {error}\n{block}", line_of(parsed, instruction)),
        ),
    }
}

fn emit(text: &str) -> Outcome {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes()).and_then(|()| out.flush()).map_err(|e| fail(DIAGNOSTICS, e))
}

fn emit_json(value: &serde_json::Value) -> Outcome {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| fail(DIAGNOSTICS, e))?;
    text.push('\n');
    emit(&text)
}

fn cmd_run(file: &Path, seed: u64, shots: u64, out: OutFormat, check_interval: usize) -> Outcome {
    let name = display_name(file);
    let parsed = load(file)?;
    let c = &parsed.circuit;
    let config = RunConfig { check_interval };
    let results = run_shots::<f64>(c, seed, shots as usize, &config).map_err(|e| run_error(&name, &parsed, e))?;
    let registers = c.registers();
    match out {
        OutFormat::Json => {
            let fin = aggregate_final(&results).expect("shots ≥ 1");
            let regs: Vec<_> = registers
                .iter()
                .enumerate()
                .map(|(j, r)| json!({ "name": r, "samples": results.iter().map(|s| num(s.record.values()[j])).collect::<Vec<_>>() }))
                .collect();
            emit_json(&json!({
                "schema": SCHEMA,
                "command": "run",
                "modes": c.n(),
                "seed": seed,
                "shots": shots,
                "registers": regs,
                "final": { "mean": vector(fin.mean()), "covariance": matrix(fin.covariance()) },
            }))
        }
        OutFormat::Csv => {
            if registers.is_empty() {
                return Ok(());
            }
            let mut w = csv::Writer::from_writer(std::io::stdout().lock());
            let mut write = || -> csv::Result<()> {
                w.write_record(&registers)?;
                for s in &results {
                    w.write_record(s.record.values().iter().map(|v| format!("{v:.16e}")))?;
                }
                w.flush()?;
                Ok(())
            };
            write().map_err(|e| fail(DIAGNOSTICS, e))
        }
    }
}

fn cmd_moments(file: &Path, seed: Option<u64>, shots: u64) -> Outcome {
    let name = display_name(file);
    let parsed = load(file)?;
    let c = &parsed.circuit;
    let analytic = analytic_moments::<f64>(c).is_ok();
    let seed = match (analytic, seed) {
        (true, s) => s.unwrap_or(0),
        (false, Some(s)) => s,
        (false, None) => {
            return Err(fail(DIAGNOSTICS, format!("{name}: circuit has non-Gaussian feed-forward and must be sampled; pass --seed or set CVCLIFFORD_SEED")))
        }
    };
    let rep = moments(c, seed, shots as usize).map_err(|e| run_error(&name, &parsed, e))?;
    let mut value = json!({
        "schema": SCHEMA,
        "command": "moments",
        "method": "analytic",
        "modes": c.n(),
        "mean": vector(&rep.mean),
        "covariance": matrix(&rep.covariance),
        "registers": rep.registers,
        "register_mean": vector(&rep.register_mean),
        "register_covariance": matrix(&rep.register_covariance),
    });
    if let MomentMethod::Sampled { shots, seed } = rep.method {
        value["method"] = json!("sampled");
        value["shots"] = json!(shots);
        value["seed"] = json!(seed);
    }
    emit_json(&value)
}

fn cmd_validate(file: &Path) -> Outcome {
    let parsed = load(file)?;
    let c = &parsed.circuit;
    emit(&format!(
        "{}: ok ({} instructions, {} modes, {} registers)\n",
        display_name(file),
        c.len(),
        c.n(),
        c.registers().len()
    ))
}

fn cmd_rewrite(file: &Path) -> Outcome {
    let name = display_name(file);
    let parsed = load(file)?;
    match delay_measurements(&parsed.circuit) {
        Ok(d) => emit(&format(&d)),
        Err(e) => {
            for d in e.diagnostics() {
                eprintln!("{name}:{}: error: {}", line_of(&parsed, d.instruction), d.message);
            }
            Err(Failure(DIAGNOSTICS))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    modes: usize,
    gates: usize,
    measurements: Option<usize>,
    seed: u64,
    check_interval: usize,
    oracle: bool,
    cutoff: usize,
) -> Outcome {
    if modes == 0 {
        return Err(fail(DIAGNOSTICS, "--modes must be at least 1"));
    }
    if oracle {
        let c = random_circuit(modes, gates, 0, seed);
        let t0 = Instant::now();
        let engine = analytic_moments::<f64>(&c).map_err(|e| fail(BREACH, e))?;
        let engine_s = t0.elapsed().as_secs_f64();
        let t1 = Instant::now();
        let o = oracle_moments(&c, cutoff).map_err(|e| match e {
            FockError::Truncation { .. } => fail(BREACH, e),
            other => fail(DIAGNOSTICS, other),
        })?;
        let oracle_s = t1.elapsed().as_secs_f64();
        return emit_json(&json!({
            "schema": SCHEMA,
            "command": "bench",
            "mode": "oracle",
            "modes": modes,
            "gates": gates,
            "seed": seed,
            "cutoff": cutoff,
            "max_mean_deviation": num((engine.state.mean() - &o.mean).amax()),
            "max_covariance_deviation": num((engine.state.covariance() - &o.covariance).amax()),
            "engine_seconds": num(engine_s),
            "oracle_seconds": num(oracle_s),
        }));
    }
    let measurements = measurements.unwrap_or(gates / 100);
    let c = random_circuit(modes, gates, measurements, seed);
    let t0 = Instant::now();
    let r = run_with_config::<f64>(&c, seed, &RunConfig { check_interval })
        .map_err(|e| fail(BREACH, format!("runtime invariant breach: {e}")))?;
    let seconds = t0.elapsed().as_secs_f64();
    let dim = 2 * modes;
    emit_json(&json!({
        "schema": SCHEMA,
        "command": "bench",
        "mode": "engine",
        "modes": modes,
        "gates": gates,
        "measurements": measurements,
        "seed": seed,
        "check_interval": check_interval,
        "seconds": num(seconds),
        "state_bytes": (dim * dim + dim) * std::mem::size_of::<f64>(),
        "records": r.record.len(),
    }))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { DIAGNOSTICS } else { OK });
        }
    };
    let outcome = match &cli.command {
        Command::Run { file, seed, shots, out, check_interval } => cmd_run(file, *seed, *shots, *out, *check_interval),
        Command::Moments { file, seed, shots } => cmd_moments(file, *seed, *shots),
        Command::Validate { file } => cmd_validate(file),
        Command::RewriteDelay { file } => cmd_rewrite(file),
        Command::Bench { modes, gates, measurements, seed, check_interval, oracle, cutoff } => {
            cmd_bench(*modes, *gates, *measurements, *seed, *check_interval, *oracle, *cutoff)
        }
    };
    match outcome {
        Ok(()) => ExitCode::from(OK),
        Err(Failure(code)) => ExitCode::from(code),
    }
}
