//! Non-destructive phase and parity discrimination of generalized Bell
//! states.
//!
//! Both checks couple the system to a fresh ancilla in `|0⟩` and read only
//! the ancilla. For a generalized Bell state the ancilla ends in a basis
//! state and the system is left untouched.

use crate::circuit::{child_seed, measure, CheckOutcome, Circuit, Shots};
use crate::error::{Error, Result};
use crate::gates::Gate;
use crate::states::{classify, GbsLabel};
use crate::tensor::StateVector;

/// Minimum modal share for a check outcome to count as decided.
pub const DECISION_THRESHOLD: f64 = 0.9;

/// `H_d` on the ancilla, `C_{X_d}` from the ancilla onto every system wire,
/// then `H_d†`. Leaves `|p⟩` on the ancilla.
pub fn append_phase_check(c: &mut Circuit, system: &[usize], ancilla: usize) -> Result<()> {
    c.add(Gate::H, &[ancilla])?;
    for &wire in system {
        c.add(Gate::Cx, &[ancilla, wire])?;
    }
    c.add(Gate::Hdg, &[ancilla])?;
    Ok(())
}

/// `C_{X_d}` from `prev` onto the ancilla, then `C_{X_d}†` from `wire`.
/// Leaves `|q_wire − q_prev⟩` on the ancilla.
pub fn append_parity_check(
    c: &mut Circuit,
    prev: usize,
    wire: usize,
    ancilla: usize,
) -> Result<()> {
    c.add(Gate::Cx, &[prev, ancilla])?;
    c.add(Gate::Cxdg, &[wire, ancilla])?;
    Ok(())
}

/// Phase check on `n` system wires with the ancilla on wire `n`.
pub fn phase_check_circuit(d: usize, n: usize) -> Result<Circuit> {
    let mut c = Circuit::new(d, n + 1)?;
    append_phase_check(&mut c, &(0..n).collect::<Vec<_>>(), n)?;
    Ok(c)
}

/// Parity check `i` (`1 ≤ i ≤ n−1`) with the ancilla on wire `n`.
pub fn parity_check_circuit(d: usize, n: usize, i: usize) -> Result<Circuit> {
    if i == 0 || i >= n {
        return Err(Error::OutOfRange { value: i, bound: n });
    }
    let mut c = Circuit::new(d, n + 1)?;
    append_parity_check(&mut c, i - 1, i, n)?;
    Ok(c)
}

/// Runs `circuit` on `system ⊗ |0⟩` and measures the ancilla. The returned
/// post-state is the system register after the ancilla is projected onto
/// the modal outcome and discarded.
fn check_with_ancilla(
    system: &StateVector,
    circuit: &Circuit,
    shots: Shots,
    seed: u64,
) -> Result<CheckOutcome> {
    let d = system.dim_per_wire();
    let ancilla = system.wire_count();
    let joint = circuit.apply_to(&system.tensor(&StateVector::zero(d, 1)?)?)?;
    let mut outcome = measure(&joint, &[ancilla], shots, seed)?;
    outcome.post_state = outcome
        .post_state
        .measure_out(&[ancilla], outcome.modal_outcome())?;
    Ok(outcome)
}

/// Encodes the phase index of the system on an ancilla and measures it.
pub fn phase_check(system: &StateVector, shots: Shots, seed: u64) -> Result<CheckOutcome> {
    let circuit = phase_check_circuit(system.dim_per_wire(), system.wire_count())?;
    check_with_ancilla(system, &circuit, shots, seed)
}

/// Encodes the relative parity `q_i − q_{i−1}` on an ancilla and measures it.
pub fn parity_check(
    system: &StateVector,
    i: usize,
    shots: Shots,
    seed: u64,
) -> Result<CheckOutcome> {
    let circuit = parity_check_circuit(system.dim_per_wire(), system.wire_count(), i)?;
    check_with_ancilla(system, &circuit, shots, seed)
}

/// Outcomes of the phase check followed by every parity check, each run on
/// the state surviving the previous one.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRecord {
    pub phase: CheckOutcome,
    pub parities: Vec<CheckOutcome>,
    pub post_state: StateVector,
}

impl CheckRecord {
    fn checks(&self) -> impl Iterator<Item = &CheckOutcome> {
        std::iter::once(&self.phase).chain(&self.parities)
    }

    /// Classifies the modal outcomes, requiring each check to reach
    /// [`DECISION_THRESHOLD`].
    pub fn decide(&self) -> Result<GbsLabel> {
        for check in self.checks() {
            let share = check.modal_share();
            if share < DECISION_THRESHOLD {
                return Err(Error::AmbiguousOutcome {
                    wires: check.wires.clone(),
                    best_share: share,
                    threshold: DECISION_THRESHOLD,
                });
            }
        }
        let parities: Vec<usize> = self.parities.iter().map(|c| c.modal_outcome()).collect();
        classify(
            self.phase.modal_outcome(),
            &parities,
            self.post_state.dim_per_wire(),
            self.post_state.wire_count(),
        )
    }
}

/// Runs all checks without deciding. Check `k` samples with
/// `child_seed(seed, k)` (phase check first).
pub fn run_checks(system: &StateVector, shots: Shots, seed: u64) -> Result<CheckRecord> {
    let n = system.wire_count();
    if n < 2 {
        return Err(Error::InvalidLabel(
            "discrimination needs at least two wires".into(),
        ));
    }
    let phase = phase_check(system, shots, child_seed(seed, 0))?;
    let mut state = phase.post_state.clone();
    let mut parities = Vec::with_capacity(n - 1);
    for i in 1..n {
        let check = parity_check(&state, i, shots, child_seed(seed, i as u64))?;
        state = check.post_state.clone();
        parities.push(check);
    }
    Ok(CheckRecord {
        phase,
        parities,
        post_state: state,
    })
}

/// Identifies which generalized Bell state `system` holds, returning the
/// label and the surviving system state.
pub fn discriminate(
    system: &StateVector,
    shots: Shots,
    seed: u64,
) -> Result<(GbsLabel, StateVector)> {
    let record = run_checks(system, shots, seed)?;
    let label = record.decide()?;
    Ok((label, record.post_state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{gbs, ghz, Sign};
    use crate::tensor::EXACT_TOL;

    fn label(s: &str) -> GbsLabel {
        s.parse().unwrap()
    }

    #[test]
    fn phase_check_examples() {
        let psi = ghz(Sign::Minus, 1, 0).unwrap();
        let out = phase_check(&psi, Shots::Exact, 0).unwrap();
        assert!((out.distribution[1] - 1.0).abs() < EXACT_TOL);
        assert!((out.post_state.fidelity(&psi).unwrap() - 1.0).abs() < EXACT_TOL);

        for b1 in 0..2 {
            for b2 in 0..2 {
                let out = phase_check(&ghz(Sign::Plus, b1, b2).unwrap(), Shots::Exact, 0).unwrap();
                assert_eq!(out.modal_outcome(), 0);
                assert!((out.modal_share() - 1.0).abs() < EXACT_TOL);
            }
        }

        let out = phase_check(&gbs(&label("3:3:2:0,1")), Shots::Exact, 0).unwrap();
        assert_eq!(out.modal_outcome(), 2);
        assert!((out.modal_share() - 1.0).abs() < EXACT_TOL);
    }

    #[test]
    fn parity_check_examples() {
        let digits = |s: &StateVector| -> Vec<usize> {
            (1..s.wire_count())
                .map(|i| parity_check(s, i, Shots::Exact, 0).unwrap().modal_outcome())
                .collect()
        };
        assert_eq!(digits(&ghz(Sign::Minus, 1, 0).unwrap()), vec![1, 1]);
        assert_eq!(digits(&ghz(Sign::Plus, 0, 0).unwrap()), vec![0, 0]);
        assert_eq!(digits(&ghz(Sign::Minus, 0, 0).unwrap()), vec![0, 0]);
        assert_eq!(digits(&gbs(&label("3:3:0:2,2"))), vec![2, 0]);
        assert!(parity_check(&gbs(&label("2:2:0:0")), 0, Shots::Exact, 0).is_err());
        assert!(parity_check(&gbs(&label("2:2:0:0")), 2, Shots::Exact, 0).is_err());
    }

    #[test]
    fn discriminate_examples() {
        let (l, post) = discriminate(&gbs(&label("2:3:1:1,0")), Shots::Sampled(8192), 7).unwrap();
        assert_eq!(l, label("2:3:1:1,0"));
        assert!((post.fidelity(&gbs(&l)).unwrap() - 1.0).abs() < EXACT_TOL);

        for l in GbsLabel::all(2, 2).unwrap() {
            assert_eq!(discriminate(&gbs(&l), Shots::Exact, 0).unwrap().0, l);
        }

        let product = StateVector::zero(2, 2).unwrap();
        match discriminate(&product, Shots::Exact, 0) {
            Err(Error::AmbiguousOutcome { best_share, .. }) => {
                assert!((best_share - 0.5).abs() < EXACT_TOL)
            }
            other => panic!("expected ambiguity, got {other:?}"),
        }
        assert!(matches!(
            discriminate(&product, Shots::Sampled(8192), 3),
            Err(Error::AmbiguousOutcome { .. })
        ));
    }

    #[test]
    fn complete_and_non_destructive() {
        for (d, n) in [(2, 2), (2, 3), (3, 2), (3, 3)] {
            for l in GbsLabel::all(d, n).unwrap() {
                let psi = gbs(&l);
                let record = run_checks(&psi, Shots::Exact, 0).unwrap();
                for check in std::iter::once(&record.phase).chain(&record.parities) {
                    assert!((check.modal_share() - 1.0).abs() < EXACT_TOL, "{l}");
                }
                assert_eq!(record.decide().unwrap(), l);
                assert!((record.post_state.fidelity(&psi).unwrap() - 1.0).abs() < EXACT_TOL);
            }
        }
    }
}
