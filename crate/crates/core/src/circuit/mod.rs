//! Gate application, Born-rule measurement, seeded shot sampling and circuit
//! execution.

mod format;

pub use format::{parse_angle, parse_circuit};

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gates::{Gate, GateMatrix};
use crate::tensor::{check_wires, digits_of, stride, StateVector, EXACT_TOL};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Shot budget for a measurement: the exact Born distribution, or a finite
/// number of samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Shots {
    Exact,
    Sampled(u64),
}

impl Shots {
    pub fn count(self) -> Option<u64> {
        match self {
            Shots::Exact => None,
            Shots::Sampled(n) => Some(n),
        }
    }
}

/// Seeded generator used for every sampling step.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent seed for the `index`-th child of `root`: the first word of
/// ChaCha stream `index` under key `root`.
pub fn child_seed(root: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(root);
    rng.set_stream(index);
    rng.next_u64()
}

/// Renders outcome `index` over `width` wires as a digit string, e.g. `"011"`.
/// Registers with `d > 10` separate digits with `.`.
pub fn outcome_label(index: usize, d: usize, width: usize) -> String {
    let digits = digits_of(index, d, width);
    if d <= 10 {
        digits.iter().map(|x| char::from(b'0' + *x as u8)).collect()
    } else {
        digits
            .iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(".")
    }
}

/// Applies `gate` to `wires` (in gate order: first wire is the gate's most
/// significant factor) and returns the new state.
pub fn apply(state: &StateVector, gate: &GateMatrix, wires: &[usize]) -> Result<StateVector> {
    let mut out = state.clone();
    apply_in_place(&mut out, gate, wires)?;
    Ok(out)
}

pub(crate) fn apply_in_place(
    state: &mut StateVector,
    gate: &GateMatrix,
    wires: &[usize],
) -> Result<()> {
    let (d, n) = (state.dim_per_wire(), state.wire_count());
    if gate.dim_per_wire() != d {
        return Err(Error::DimensionMismatch(format!(
            "d={} gate on a d={d} register",
            gate.dim_per_wire()
        )));
    }
    if gate.arity() != wires.len() {
        return Err(Error::DimensionMismatch(format!(
            "{}-wire gate given {} wires",
            gate.arity(),
            wires.len()
        )));
    }
    check_wires(wires, n)?;

    let m = gate.size();
    let strides: Vec<usize> = wires.iter().map(|&w| stride(d, n, w)).collect();
    let offsets: Vec<usize> = (0..m)
        .map(|a| {
            digits_of(a, d, wires.len())
                .iter()
                .zip(&strides)
                .map(|(x, s)| x * s)
                .sum()
        })
        .collect();

    let amps = state.amplitudes_mut();
    let mut buf = vec![ZERO; m];
    for base in 0..amps.len() {
        if strides.iter().any(|s| (base / s) % d != 0) {
            continue;
        }
        for (slot, off) in buf.iter_mut().zip(&offsets) {
            *slot = amps[base + off];
        }
        for (r, off) in offsets.iter().enumerate() {
            amps[base + off] = buf
                .iter()
                .enumerate()
                .map(|(c, v)| gate.get(r, c) * v)
                .sum();
        }
    }
    Ok(())
}

/// Histogram of sampled outcomes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShotResult {
    pub wires: Vec<usize>,
    pub counts: BTreeMap<String, u64>,
    pub shots: u64,
    pub seed: u64,
}

impl ShotResult {
    /// Most frequent outcome label and its count; ties go to the smaller label.
    pub fn modal(&self) -> Option<(&str, u64)> {
        self.counts
            .iter()
            .fold(None, |best: Option<(&str, u64)>, (k, &v)| match best {
                Some((_, bv)) if bv >= v => best,
                _ => Some((k.as_str(), v)),
            })
    }

    pub fn frequency(&self, label: &str) -> f64 {
        self.counts.get(label).copied().unwrap_or(0) as f64 / self.shots as f64
    }
}

/// Result of measuring some wires: exact distribution, optional samples and
/// the register collapsed onto the modal outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub wires: Vec<usize>,
    pub dim_per_wire: usize,
    /// Exact outcome probabilities, indexed by outcome value.
    pub distribution: Vec<f64>,
    pub sampled: Option<ShotResult>,
    pub post_state: StateVector,
}

impl CheckOutcome {
    fn exact_modal(distribution: &[f64]) -> usize {
        distribution
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bp), (i, &p)| {
                if p > bp + 1e-12 {
                    (i, p)
                } else {
                    (bi, bp)
                }
            })
            .0
    }

    /// Modal outcome: from the samples when present, else from the exact
    /// distribution.
    pub fn modal_outcome(&self) -> usize {
        match &self.sampled {
            Some(s) => {
                let label = s.modal().map(|(l, _)| l.to_string()).unwrap_or_default();
                (0..self.distribution.len())
                    .find(|&i| self.label(i) == label)
                    .unwrap_or(0)
            }
            None => Self::exact_modal(&self.distribution),
        }
    }

    /// Share of the modal outcome (sampled frequency or exact probability).
    pub fn modal_share(&self) -> f64 {
        let m = self.modal_outcome();
        match &self.sampled {
            Some(s) => s.frequency(&self.label(m)),
            None => self.distribution[m],
        }
    }

    pub fn label(&self, outcome: usize) -> String {
        outcome_label(outcome, self.dim_per_wire, self.wires.len())
    }

    /// Digits of the modal outcome, one per measured wire.
    pub fn modal_digits(&self) -> Vec<usize> {
        digits_of(self.modal_outcome(), self.dim_per_wire, self.wires.len())
    }

    /// Nonzero exact probabilities keyed by outcome label.
    pub fn distribution_map(&self) -> BTreeMap<String, f64> {
        self.distribution
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > EXACT_TOL)
            .map(|(i, &p)| (self.label(i), p))
            .collect()
    }
}

/// Born-rule distribution on `wires`; the post-state is the full register
/// collapsed onto the most probable outcome.
pub fn measure_exact(state: &StateVector, wires: &[usize]) -> Result<CheckOutcome> {
    let distribution = state.probabilities(wires)?;
    let modal = CheckOutcome::exact_modal(&distribution);
    let post_state = state.collapse(wires, modal)?;
    Ok(CheckOutcome {
        wires: wires.to_vec(),
        dim_per_wire: state.dim_per_wire(),
        distribution,
        sampled: None,
        post_state,
    })
}

/// Measurement with an optional shot budget. With samples, the post-state
/// collapses onto the sampled modal outcome.
pub fn measure(
    state: &StateVector,
    wires: &[usize],
    shots: Shots,
    seed: u64,
) -> Result<CheckOutcome> {
    let mut outcome = measure_exact(state, wires)?;
    if let Shots::Sampled(count) = shots {
        outcome.sampled = Some(sample_distribution(
            &outcome.distribution,
            state.dim_per_wire(),
            wires,
            count,
            seed,
        )?);
        outcome.post_state = state.collapse(wires, outcome.modal_outcome())?;
    }
    Ok(outcome)
}

/// Draws `shots` samples of the joint outcome on `wires`. Deterministic for
/// a fixed seed.
pub fn sample(state: &StateVector, wires: &[usize], shots: u64, seed: u64) -> Result<ShotResult> {
    let probs = state.probabilities(wires)?;
    sample_distribution(&probs, state.dim_per_wire(), wires, shots, seed)
}

/// Multinomial draw via a chain of conditional binomials.
fn sample_distribution(
    probs: &[f64],
    d: usize,
    wires: &[usize],
    shots: u64,
    seed: u64,
) -> Result<ShotResult> {
    if shots == 0 {
        return Err(Error::InvalidShots);
    }
    let mut rng = rng_from_seed(seed);
    let mut remaining_shots = shots;
    let mut remaining_mass: f64 = probs.iter().sum();
    let mut counts = BTreeMap::new();
    let last = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    for (k, &p) in probs.iter().enumerate() {
        if remaining_shots == 0 {
            break;
        }
        if p <= 0.0 {
            continue;
        }
        let drawn = if k == last {
            remaining_shots
        } else {
            let q = (p / remaining_mass).clamp(0.0, 1.0);
            Binomial::new(remaining_shots, q)
                .expect("probability clamped to [0, 1]")
                .sample(&mut rng)
        };
        remaining_shots -= drawn;
        remaining_mass -= p;
        if drawn > 0 {
            counts.insert(outcome_label(k, d, wires.len()), drawn);
        }
    }
    Ok(ShotResult {
        wires: wires.to_vec(),
        counts,
        shots,
        seed,
    })
}

/// One step of a circuit.
#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Gate {
        gate: Gate,
        wires: Vec<usize>,
        matrix: GateMatrix,
    },
    Measure {
        wires: Vec<usize>,
    },
}

/// Ordered list of gate applications and measurement markers on a fixed
/// register.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    d: usize,
    n: usize,
    steps: Vec<Step>,
}

impl Circuit {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        if n == 0 {
            return Err(Error::InvalidWires {
                wires: vec![],
                wire_count: 0,
            });
        }
        Ok(Self {
            d,
            n,
            steps: Vec::new(),
        })
    }

    pub fn dim_per_wire(&self) -> usize {
        self.d
    }

    pub fn wire_count(&self) -> usize {
        self.n
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn add(&mut self, gate: Gate, wires: &[usize]) -> Result<&mut Self> {
        let matrix = gate.matrix(self.d)?;
        if matrix.arity() != wires.len() {
            return Err(Error::DimensionMismatch(format!(
                "{gate} acts on {} wires, given {}",
                matrix.arity(),
                wires.len()
            )));
        }
        check_wires(wires, self.n)?;
        self.steps.push(Step::Gate {
            gate,
            wires: wires.to_vec(),
            matrix,
        });
        Ok(self)
    }

    pub fn measure(&mut self, wires: &[usize]) -> Result<&mut Self> {
        check_wires(wires, self.n)?;
        self.steps.push(Step::Measure {
            wires: wires.to_vec(),
        });
        Ok(self)
    }

    /// Appends every step of `other`, which must share the register shape.
    pub fn extend(&mut self, other: &Circuit) -> Result<&mut Self> {
        if other.d != self.d || other.n != self.n {
            return Err(Error::DimensionMismatch(format!(
                "appending a {}^{} circuit to a {}^{} circuit",
                other.d, other.n, self.d, self.n
            )));
        }
        self.steps.extend(other.steps.iter().cloned());
        Ok(self)
    }

    fn check_state(&self, state: &StateVector) -> Result<()> {
        if state.dim_per_wire() != self.d || state.wire_count() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "circuit is {}^{}, state is {}^{}",
                self.d,
                self.n,
                state.dim_per_wire(),
                state.wire_count()
            )));
        }
        Ok(())
    }

    /// Applies the unitary steps only.
    pub fn apply_to(&self, state: &StateVector) -> Result<StateVector> {
        self.check_state(state)?;
        let mut out = state.clone();
        for step in &self.steps {
            if let Step::Gate { wires, matrix, .. } = step {
                apply_in_place(&mut out, matrix, wires)?;
            }
        }
        Ok(out)
    }

    /// Full `d^n × d^n` unitary of the gate steps.
    pub fn unitary(&self) -> Result<GateMatrix> {
        let dim = self.d.pow(self.n as u32);
        let mut entries = vec![ZERO; dim * dim];
        for col in 0..dim {
            let out = self.apply_to(&StateVector::basis(self.d, self.n, col)?)?;
            for (row, a) in out.amplitudes().iter().enumerate() {
                entries[row * dim + col] = *a;
            }
        }
        GateMatrix::new(self.d, self.n, entries)
    }
}

/// What a measurement marker does to the simulated state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeasureMode {
    /// Sample the Born distribution and leave the state untouched.
    #[default]
    NonDestructive,
    /// Sample, then collapse onto the sampled modal outcome.
    Collapse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub final_state: StateVector,
    /// One histogram per measurement marker, in circuit order.
    pub measurements: Vec<ShotResult>,
}

/// Runs `circuit` on `initial`. Marker `k` samples with
/// `child_seed(seed, k)`.
pub fn run(circuit: &Circuit, initial: &StateVector, shots: u64, seed: u64) -> Result<RunResult> {
    run_with(circuit, initial, shots, seed, MeasureMode::NonDestructive)
}

pub fn run_with(
    circuit: &Circuit,
    initial: &StateVector,
    shots: u64,
    seed: u64,
    mode: MeasureMode,
) -> Result<RunResult> {
    circuit.check_state(initial)?;
    let mut state = initial.clone();
    let mut measurements = Vec::new();
    for step in &circuit.steps {
        match step {
            Step::Gate { wires, matrix, .. } => apply_in_place(&mut state, matrix, wires)?,
            Step::Measure { wires } => {
                let marker = measurements.len() as u64;
                let outcome = measure(
                    &state,
                    wires,
                    Shots::Sampled(shots),
                    child_seed(seed, marker),
                )?;
                if mode == MeasureMode::Collapse {
                    state = outcome.post_state;
                }
                measurements.push(outcome.sampled.expect("sampled measurement"));
            }
        }
    }
    Ok(RunResult {
        final_state: state,
        measurements,
    })
}
