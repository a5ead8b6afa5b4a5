//! Seeded experiment runner.
//!
//! Exit codes: 0 success, 1 malformed input, 2 ambiguous discrimination,
//! 3 system and ancilla failed to factorize, 4 a result missed its threshold.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use qudit_ec::autocorrect::ErrorSpec;
use qudit_ec::circuit::parse_circuit;
use qudit_ec::experiments::{
    correction_report, discrimination_report, preset, qudit_verify, run_preset, tomography_report,
    CorrectionSteps, PresetReport, TomographyReport, Trials, PRESET_NAMES,
};
use qudit_ec::tomography::DEFAULT_SHOTS;
use qudit_ec::{gbs, DensityMatrix, Error, GbsLabel, Shots, StateVector};

const AFTER_HELP: &str = "\
Labels are written d:n:p:q1,...,q(n-1), e.g. 2:3:1:1,0 for (|010> - |101>)/sqrt(2).

Exit codes: 0 success, 1 malformed input, 2 ambiguous discrimination,
3 non-factorizable ancilla, 4 result below threshold.";

#[derive(Parser)]
#[command(name = "qudit-ec", version, about = "Discrimination, automated correction and tomography of generalized Bell states", after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct Sampling {
    /// Shots per measurement setting.
    #[arg(long, default_value_t = DEFAULT_SHOTS)]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use exact Born probabilities instead of sampling.
    #[arg(long)]
    exact: bool,
}

impl Sampling {
    fn shots(self) -> anyhow::Result<Shots> {
        match (self.exact, self.shots) {
            (true, _) => Ok(Shots::Exact),
            (false, 0) => bail!("--shots must be at least 1"),
            (false, n) => Ok(Shots::Sampled(n)),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Identify a generalized Bell state with ancilla phase and parity checks.
    Discriminate {
        label: String,
        #[command(flatten)]
        sampling: Sampling,
        #[arg(long)]
        json: bool,
    },
    /// Inject a coherent error and run the automated correction.
    Correct {
        /// Stored label the state is restored to.
        label: String,
        /// JSON file {"deltas":[...], "p_err":k, "q_err":[...]}.
        #[arg(long)]
        error: PathBuf,
        /// 1 = phase removal, 2 = phase-difference readout, 3 = parity correction.
        #[arg(long, default_value = "all")]
        steps: String,
        /// Include amplitudes of every intermediate state.
        #[arg(long)]
        dump_states: bool,
        #[arg(long)]
        json: bool,
    },
    /// Pauli-basis tomography of a labeled state or a circuit's output.
    Tomography {
        /// Label of the state to reconstruct.
        #[arg(required_unless_present = "circuit", conflicts_with = "circuit")]
        label: Option<String>,
        /// Circuit file run from |0...0>.
        #[arg(long)]
        circuit: Option<PathBuf>,
        /// Wires to reconstruct, e.g. 0,1,2 (default: all).
        #[arg(long, value_delimiter = ',')]
        wires: Vec<usize>,
        #[command(flatten)]
        sampling: Sampling,
        #[arg(long)]
        json: bool,
    },
    /// Randomized or exhaustive error-injection round trips for qudits.
    QuditVerify {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
        /// Number of random trials, or `all` for the exhaustive grid.
        #[arg(long, default_value = "200")]
        trials: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Run a named experiment.
    Preset {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(PRESET_NAMES))]
        name: String,
        #[command(flatten)]
        sampling: Sampling,
        /// Print the circuit in text form instead of running it.
        #[arg(long)]
        print_circuit: bool,
        #[arg(long)]
        json: bool,
    },
}

fn parse_label(text: &str) -> anyhow::Result<GbsLabel> {
    Ok(text.parse::<GbsLabel>()?)
}

fn print_json<T: Serialize>(value: &T) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn print_matrix(title: &str, m: &DensityMatrix) {
    println!("{title}");
    for r in 0..m.dim() {
        let row: Vec<String> = (0..m.dim())
            .map(|c| {
                let z = m.get(r, c);
                format!("{:+.4}{:+.4}i", z.re, z.im)
            })
            .collect();
        println!("  {}", row.join("  "));
    }
}

fn print_tomography(t: &TomographyReport) {
    println!(
        "tomography of {} on wires {:?} ({:?}, seed {})",
        t.target, t.wires, t.shots, t.seed
    );
    print_matrix("rho_E:", &t.rho_e);
    print_matrix("rho_T:", &t.rho_t);
    let m = &t.metrics;
    if let Some(f) = m.fidelity_pure {
        println!("fidelity (pure)    {f:.6}");
    }
    println!("fidelity (general) {:.6}", m.fidelity_general);
    for (name, dev) in [("modulus", m.modulus), ("real", m.real), ("imag", m.imag)] {
        println!(
            "deviation {name:<8} avg {:.4}%  max {:.4}%",
            100.0 * dev.avg,
            100.0 * dev.max
        );
    }
}

fn discriminate(label: &str, sampling: Sampling, json: bool) -> anyhow::Result<u8> {
    let label = parse_label(label)?;
    let report = discrimination_report(&label, sampling.shots()?, sampling.seed)?;
    if json {
        print_json(&report)?;
    } else {
        match &report.name {
            Some(name) => println!("state {} ({name})", report.label),
            None => println!("state {}", report.label),
        }
        let show = |title: String, r: &qudit_ec::experiments::Readout| {
            let hist = r
                .counts
                .as_ref()
                .map(|c| format!("{c:?}"))
                .unwrap_or_else(|| format!("{:?}", r.distribution));
            println!(
                "{title:<16} wires {:?}  {hist}  modal {} ({:.4})",
                r.wires, r.modal, r.modal_share
            );
        };
        show("phase check".into(), &report.phase);
        for (i, p) in report.parities.iter().enumerate() {
            show(format!("parity check {}", i + 1), p);
        }
        match (&report.inferred, &report.ambiguity) {
            (Some(l), _) => println!("inferred {l}"),
            (None, Some(why)) => println!("ambiguous: {why}"),
            (None, None) => {}
        }
        println!("post-state fidelity {:.12}", report.post_state_fidelity);
    }
    Ok(match report.inferred {
        Some(l) if l == label => 0,
        Some(_) => 4,
        None => 2,
    })
}

fn correct(
    label: &str,
    error: &PathBuf,
    steps: &str,
    dump_states: bool,
    json: bool,
) -> anyhow::Result<u8> {
    let label = parse_label(label)?;
    let steps: CorrectionSteps = steps.parse()?;
    let text = fs::read_to_string(error).with_context(|| format!("reading {}", error.display()))?;
    let err: ErrorSpec =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", error.display()))?;
    let report = correction_report(&label, &err, steps, dump_states)?;
    if json {
        print_json(&report)?;
    } else {
        println!("target {}  steps {:?}", report.target, report.steps);
        for stage in &report.stages {
            println!(
                "{:<18} fidelity to target {:.12}",
                stage.name, stage.fidelity_to_target
            );
            if let Some(s) = &stage.state {
                print_amplitudes(s);
            }
        }
        if let Some(p) = report.phase_difference {
            println!("phase difference   {p}");
        }
        if let Some(diag) = &report.parity_diagnostic {
            println!("parity diagnostic  {diag}");
        }
        println!("final fidelity     {:.12}", report.final_fidelity);
    }
    Ok(if report.restored { 0 } else { 4 })
}

fn print_amplitudes(s: &StateVector) {
    let width = s.wire_count();
    for (k, a) in s.amplitudes().iter().enumerate() {
        if a.norm() > 1e-12 {
            let ket = qudit_ec::circuit::outcome_label(k, s.dim_per_wire(), width);
            println!("    |{ket}>  {:+.6}{:+.6}i", a.re, a.im);
        }
    }
}

fn tomography(
    label: Option<&str>,
    circuit: Option<&PathBuf>,
    wires: &[usize],
    sampling: Sampling,
    json: bool,
) -> anyhow::Result<u8> {
    let (name, state) = match (label, circuit) {
        (Some(l), _) => {
            let label = parse_label(l)?;
            (label.to_string(), gbs(&label))
        }
        (None, Some(path)) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let c = parse_circuit(&text)?;
            let zero = StateVector::zero(c.dim_per_wire(), c.wire_count())?;
            (path.display().to_string(), c.apply_to(&zero)?)
        }
        (None, None) => bail!("give a label or --circuit"),
    };
    let wires: Vec<usize> = if wires.is_empty() {
        (0..state.wire_count()).collect()
    } else {
        wires.to_vec()
    };
    let report = tomography_report(name, &state, &wires, sampling.shots()?, sampling.seed)?;
    if json {
        print_json(&report)?;
    } else {
        print_tomography(&report);
    }
    Ok(0)
}

fn verify(d: usize, n: usize, trials: &str, seed: u64, json: bool) -> anyhow::Result<u8> {
    let trials: Trials = trials.parse()?;
    let report = qudit_verify(d, n, trials, seed)?;
    if json {
        print_json(&report)?;
    } else {
        println!(
            "d = {d}, n = {n}: {} passed, {} failed, min fidelity {:.12}",
            report.passed, report.failed, report.min_fidelity
        );
        for f in &report.failures {
            println!(
                "  failed {} with {:?}: fidelity {:.12}",
                f.target, f.error, f.fidelity
            );
        }
    }
    Ok(if report.all_passed() { 0 } else { 4 })
}

fn print_preset(r: &PresetReport) {
    println!("{}: {}", r.name, r.summary);
    for (readout, expected) in r.readouts.iter().zip(&r.expected_readouts) {
        println!(
            "readout wires {:?}: modal {} ({:.4}), expected {expected}",
            readout.wires, readout.modal, readout.modal_share
        );
    }
    println!(
        "target fidelity on wires {:?}: {:.12}",
        r.target_wires, r.target_fidelity
    );
    if let Some(t) = &r.tomography {
        print_tomography(t);
    }
    println!("{}", if r.passed { "PASS" } else { "FAIL" });
}

fn run_named_preset(
    name: &str,
    sampling: Sampling,
    print_circuit: bool,
    json: bool,
) -> anyhow::Result<u8> {
    let p = preset(name)?;
    if print_circuit {
        print!("{}", p.circuit.to_text()?);
        return Ok(0);
    }
    let report = run_preset(&p, sampling.shots()?, sampling.seed)?;
    if json {
        print_json(&report)?;
    } else {
        print_preset(&report);
    }
    Ok(if report.passed { 0 } else { 4 })
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Discriminate {
            label,
            sampling,
            json,
        } => discriminate(&label, sampling, json),
        Command::Correct {
            label,
            error,
            steps,
            dump_states,
            json,
        } => correct(&label, &error, &steps, dump_states, json),
        Command::Tomography {
            label,
            circuit,
            wires,
            sampling,
            json,
        } => tomography(label.as_deref(), circuit.as_ref(), &wires, sampling, json),
        Command::QuditVerify {
            d,
            n,
            trials,
            seed,
            json,
        } => verify(d, n, &trials, seed, json),
        Command::Preset {
            name,
            sampling,
            print_circuit,
            json,
        } => run_named_preset(&name, sampling, print_circuit, json),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::AmbiguousOutcome { .. }) => 2,
        Some(Error::NotFactorizable { .. }) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(if err.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
