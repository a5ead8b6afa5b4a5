//! Coherent error injection and the three-step automated correction.
//!
//! An erroneous state has the shape
//!
//! ```text
//! d^{-1/2} Σ_j e^{2πijp′/d} e^{iδ_j} |j⟩|j+q′₁⟩…|j+q′_{n−1}⟩
//! ```
//!
//! Correction back to a stored label `(p, q)`:
//!
//! 1. Move every branch phase onto an ancilla, leaving the phase-free state.
//! 2. Imprint phase `p` with a controlled clock power from an ancilla in `|p⟩`.
//! 3. For `i = 1..n−1`, shift wire `i` so its offset becomes `q_i`, using an
//!    ancilla prepared in `|q_i − q_{i−1}⟩`; the ancilla ends in `|q_i − q′_i⟩`.
//!
//! Every step adds an ancilla on the wire after the system, runs a fixed
//! unitary chain and factors the ancilla back out.

use serde::{Deserialize, Serialize};

use crate::circuit::{measure, CheckOutcome, Circuit, Shots};
use crate::error::{Error, Result};
use crate::gates::Gate;
use crate::states::{branch_state, GbsLabel};
use crate::tensor::{StateVector, FACTOR_TOL};

/// Coherent error: per-branch phases `δ_j`, wrong phase index `p′` and wrong
/// offsets `q′`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSpec {
    pub deltas: Vec<f64>,
    pub p_err: usize,
    pub q_err: Vec<usize>,
}

impl ErrorSpec {
    /// The error-free spec for `label`.
    pub fn none(label: &GbsLabel) -> Self {
        Self {
            deltas: vec![0.0; label.dim_per_wire()],
            p_err: label.phase(),
            q_err: label.offsets().to_vec(),
        }
    }

    pub fn validate(&self, d: usize, n: usize) -> Result<()> {
        if self.deltas.len() != d {
            return Err(Error::InvalidErrorSpec(format!(
                "{} deltas for d = {d}",
                self.deltas.len()
            )));
        }
        if self.q_err.len() + 1 != n {
            return Err(Error::InvalidErrorSpec(format!(
                "{} parity offsets for n = {n}",
                self.q_err.len()
            )));
        }
        if let Some(&v) = std::iter::once(&self.p_err)
            .chain(&self.q_err)
            .find(|&&v| v >= d)
        {
            return Err(Error::OutOfRange { value: v, bound: d });
        }
        if self.deltas.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidErrorSpec("non-finite phase".into()));
        }
        Ok(())
    }
}

/// The erroneous state for `err`. The label only fixes the register shape.
pub fn inject(label: &GbsLabel, err: &ErrorSpec) -> Result<StateVector> {
    let (d, n) = (label.dim_per_wire(), label.wire_count());
    err.validate(d, n).map_err(|e| match e {
        Error::InvalidErrorSpec(msg) => Error::DimensionMismatch(msg),
        other => other,
    })?;
    Ok(branch_state(d, err.p_err, &err.q_err, Some(&err.deltas)))
}

/// Step 1: `H_d` on the ancilla, `C_{X_d}` from the ancilla onto every
/// system wire, then `C_{X_d}†` from system wire 0 onto the ancilla.
pub fn append_phase_removal(c: &mut Circuit, system: &[usize], ancilla: usize) -> Result<()> {
    c.add(Gate::H, &[ancilla])?;
    for &wire in system {
        c.add(Gate::Cx, &[ancilla, wire])?;
    }
    c.add(Gate::Cxdg, &[system[0], ancilla])?;
    Ok(())
}

/// Phase-difference readout: like step 1 but framed by `H_d†` … `H_d` on an
/// ancilla prepared in `|p⟩`.
pub fn append_phase_difference(c: &mut Circuit, system: &[usize], ancilla: usize) -> Result<()> {
    c.add(Gate::Hdg, &[ancilla])?;
    for &wire in system {
        c.add(Gate::Cx, &[ancilla, wire])?;
    }
    c.add(Gate::Cxdg, &[system[0], ancilla])?;
    c.add(Gate::H, &[ancilla])?;
    Ok(())
}

/// Step 2: `Z_d^p` on system wire 0, controlled by the ancilla `|p⟩`.
pub fn append_phase_correction(c: &mut Circuit, system: &[usize], ancilla: usize) -> Result<()> {
    c.add(Gate::Cz, &[ancilla, system[0]])?;
    Ok(())
}

/// Step 3 for one wire: `C_{X_d}†` from `prev` onto the ancilla, `C_{X_d}`
/// from `wire` onto the ancilla, then `C_{X_d}†` from the ancilla onto `wire`.
pub fn append_parity_correction(
    c: &mut Circuit,
    prev: usize,
    wire: usize,
    ancilla: usize,
) -> Result<()> {
    c.add(Gate::Cxdg, &[prev, ancilla])?;
    c.add(Gate::Cx, &[wire, ancilla])?;
    c.add(Gate::Cxdg, &[ancilla, wire])?;
    Ok(())
}

fn system_wires(n: usize) -> Vec<usize> {
    (0..n).collect()
}

/// Step 1 on `n` system wires with the ancilla on wire `n`.
pub fn phase_removal_circuit(d: usize, n: usize) -> Result<Circuit> {
    let mut c = Circuit::new(d, n + 1)?;
    append_phase_removal(&mut c, &system_wires(n), n)?;
    Ok(c)
}

pub fn phase_difference_circuit(d: usize, n: usize) -> Result<Circuit> {
    let mut c = Circuit::new(d, n + 1)?;
    append_phase_difference(&mut c, &system_wires(n), n)?;
    Ok(c)
}

pub fn phase_correction_circuit(d: usize, n: usize) -> Result<Circuit> {
    let mut c = Circuit::new(d, n + 1)?;
    append_phase_correction(&mut c, &system_wires(n), n)?;
    Ok(c)
}

/// Step 3 for wire `i` (`1 ≤ i ≤ n−1`).
pub fn parity_correction_circuit(d: usize, n: usize, i: usize) -> Result<Circuit> {
    if i == 0 || i >= n {
        return Err(Error::OutOfRange { value: i, bound: n });
    }
    let mut c = Circuit::new(d, n + 1)?;
    append_parity_correction(&mut c, i - 1, i, n)?;
    Ok(c)
}

/// Runs `circuit` on `state ⊗ |ancilla_value⟩` and returns the joint state.
fn with_ancilla(
    state: &StateVector,
    ancilla_value: usize,
    circuit: &Circuit,
) -> Result<StateVector> {
    let d = state.dim_per_wire();
    if ancilla_value >= d {
        return Err(Error::OutOfRange {
            value: ancilla_value,
            bound: d,
        });
    }
    circuit.apply_to(&state.tensor(&StateVector::basis(d, 1, ancilla_value)?)?)
}

/// Digit held by a single-wire ancilla that must be in a basis state.
fn basis_digit(ancilla: &StateVector) -> Result<usize> {
    let probs = ancilla.probabilities(&[0])?;
    let (digit, &weight) = probs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty distribution");
    if weight < 1.0 - FACTOR_TOL {
        return Err(Error::NotFactorizable {
            schmidt_weight: weight,
        });
    }
    Ok(digit)
}

/// Joint system+ancilla state after the step-1 chain, before factoring.
pub fn phase_removal_joint(state: &StateVector) -> Result<StateVector> {
    let circuit = phase_removal_circuit(state.dim_per_wire(), state.wire_count())?;
    with_ancilla(state, 0, &circuit)
}

/// Step 1. Returns the phase-free system and the ancilla that absorbed
/// `Σ_k e^{2πikp′/d} e^{iδ_k}|k⟩` (normalized).
pub fn step1_remove_phase(state: &StateVector) -> Result<(StateVector, StateVector)> {
    phase_removal_joint(state)?.split_product(1)
}

/// Phase-difference diagnostic: an ancilla prepared in `|stored_p⟩` reads
/// out `stored_p − p′ mod d`. The returned post-state is the system, which
/// leaves with phase index `stored_p`.
pub fn step2_phase_difference(state: &StateVector, stored_p: usize) -> Result<CheckOutcome> {
    let n = state.wire_count();
    let circuit = phase_difference_circuit(state.dim_per_wire(), n)?;
    let joint = with_ancilla(state, stored_p, &circuit)?;
    let mut outcome = measure(&joint, &[n], Shots::Exact, 0)?;
    let (system, _) = joint.split_product(1)?;
    outcome.post_state = system;
    Ok(outcome)
}

/// Step 2: imprints phase index `stored_p` on a phase-free state.
pub fn step2_correct_phase(state: &StateVector, stored_p: usize) -> Result<StateVector> {
    let circuit = phase_correction_circuit(state.dim_per_wire(), state.wire_count())?;
    let (system, _) = with_ancilla(state, stored_p, &circuit)?.split_product(1)?;
    Ok(system)
}

/// Step 3: corrects the offsets to `stored_q`, one wire at a time in
/// ascending order. Returns the corrected state and the final ancilla digit
/// for each wire, `q_i − q′_i mod d`.
pub fn step3_correct_parity(
    state: &StateVector,
    stored_q: &[usize],
) -> Result<(StateVector, Vec<usize>)> {
    let (d, n) = (state.dim_per_wire(), state.wire_count());
    if stored_q.len() + 1 != n {
        return Err(Error::DimensionMismatch(format!(
            "{} stored offsets for {n} wires",
            stored_q.len()
        )));
    }
    if let Some(&v) = stored_q.iter().find(|&&v| v >= d) {
        return Err(Error::OutOfRange { value: v, bound: d });
    }
    let mut current = state.clone();
    let mut diag = Vec::with_capacity(n - 1);
    let mut prev_q = 0;
    for (i, &q) in (1..n).zip(stored_q) {
        let relative = (q + d - prev_q) % d;
        let circuit = parity_correction_circuit(d, n, i)?;
        let (system, ancilla) = with_ancilla(&current, relative, &circuit)?.split_product(1)?;
        diag.push(basis_digit(&ancilla)?);
        current = system;
        prev_q = q;
    }
    Ok((current, diag))
}

/// Ancilla readouts collected during a correction.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionRecord {
    /// Ancilla left by step 1, carrying the removed phases.
    pub step1_ancilla: StateVector,
    /// `p − p′ mod d`, only when the phase-difference diagnostic ran.
    pub phase_diff: Option<usize>,
    /// Final step-3 ancilla digits `q_i − q′_i mod d`, `i = 1..n−1`.
    pub parity_diag: Vec<usize>,
}

/// System state after each correction step.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionTrace {
    pub after_step1: StateVector,
    pub after_step2: StateVector,
    pub after_step3: StateVector,
    pub record: CorrectionRecord,
}

fn check_shape(state: &StateVector, stored: &GbsLabel) -> Result<()> {
    if state.dim_per_wire() != stored.dim_per_wire() || state.wire_count() != stored.wire_count() {
        return Err(Error::DimensionMismatch(format!(
            "state is {}^{}, label {stored} is {}^{}",
            state.dim_per_wire(),
            state.wire_count(),
            stored.dim_per_wire(),
            stored.wire_count()
        )));
    }
    Ok(())
}

/// Full correction keeping the intermediate states.
pub fn autocorrect_traced(err_state: &StateVector, stored: &GbsLabel) -> Result<CorrectionTrace> {
    check_shape(err_state, stored)?;
    let (after_step1, step1_ancilla) = step1_remove_phase(err_state)?;
    let after_step2 = step2_correct_phase(&after_step1, stored.phase())?;
    let (after_step3, parity_diag) = step3_correct_parity(&after_step2, stored.offsets())?;
    Ok(CorrectionTrace {
        after_step1,
        after_step2,
        after_step3,
        record: CorrectionRecord {
            step1_ancilla,
            phase_diff: None,
            parity_diag,
        },
    })
}

/// Restores `err_state` to `gbs(stored)` (up to global phase).
pub fn autocorrect(
    err_state: &StateVector,
    stored: &GbsLabel,
) -> Result<(StateVector, CorrectionRecord)> {
    let trace = autocorrect_traced(err_state, stored)?;
    Ok((trace.after_step3, trace.record))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{bell, gbs, ghz, Sign};
    use crate::tensor::{schmidt_weights, EXACT_TOL};
    use num_complex::Complex64;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn label(s: &str) -> GbsLabel {
        s.parse().unwrap()
    }

    fn same(a: &StateVector, b: &StateVector) -> bool {
        (a.fidelity(b).unwrap() - 1.0).abs() < EXACT_TOL
    }

    fn bell_error() -> ErrorSpec {
        ErrorSpec {
            deltas: vec![0.0, PI / 8.0],
            p_err: 0,
            q_err: vec![0],
        }
    }

    #[test]
    fn inject_examples() {
        let s = inject(&label("2:2:1:1"), &bell_error()).unwrap();
        let want = StateVector::new(
            2,
            2,
            vec![
                Complex64::new(FRAC_1_SQRT_2, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::from_polar(FRAC_1_SQRT_2, PI / 8.0),
            ],
        )
        .unwrap();
        assert!(s
            .amplitudes()
            .iter()
            .zip(want.amplitudes())
            .all(|(a, b)| (a - b).norm() < EXACT_TOL));

        let l = label("3:3:2:1,2");
        assert_eq!(inject(&l, &ErrorSpec::none(&l)).unwrap(), gbs(&l));

        let bad = ErrorSpec {
            deltas: vec![0.0; 3],
            ..bell_error()
        };
        assert!(matches!(
            inject(&label("2:2:0:0"), &bad),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn step1_examples() {
        let (sys, _) =
            step1_remove_phase(&inject(&label("2:2:0:0"), &bell_error()).unwrap()).unwrap();
        assert!(same(&sys, &bell(0, 0).unwrap()));

        let ghz_err = ErrorSpec {
            deltas: vec![0.0, PI / 8.0],
            p_err: 0,
            q_err: vec![0, 0],
        };
        let (sys, _) = step1_remove_phase(&inject(&label("2:3:0:0,0"), &ghz_err).unwrap()).unwrap();
        assert!(same(&sys, &ghz(Sign::Plus, 0, 0).unwrap()));

        let clean = gbs(&label("3:2:0:1"));
        let (sys, anc) = step1_remove_phase(&clean).unwrap();
        assert!(same(&sys, &clean));
        let uniform =
            StateVector::new_renormalized(3, 1, vec![Complex64::new(1.0, 0.0); 3]).unwrap();
        assert!(same(&anc, &uniform));
    }

    #[test]
    fn step1_ancilla_carries_phases() {
        let err = ErrorSpec {
            deltas: vec![0.3, -1.1, 2.0],
            p_err: 2,
            q_err: vec![1, 0],
        };
        let (sys, anc) = step1_remove_phase(&inject(&label("3:3:0:0,0"), &err).unwrap()).unwrap();
        assert!(same(&sys, &gbs(&label("3:3:0:1,0"))));
        let want: Vec<Complex64> = (0..3)
            .map(|k| {
                crate::gates::root_of_unity(2 * k as i64, 3)
                    * Complex64::from_polar(1.0, err.deltas[k])
            })
            .collect();
        assert!(same(
            &anc,
            &StateVector::new_renormalized(3, 1, want).unwrap()
        ));
    }

    #[test]
    fn step1_rejects_non_gbs_input() {
        let s = StateVector::new_renormalized(
            2,
            2,
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(0.5, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.3, 0.0),
            ],
        )
        .unwrap();
        assert!(matches!(
            step1_remove_phase(&s),
            Err(Error::NotFactorizable { .. })
        ));
    }

    #[test]
    fn step1_schmidt_rank_one() {
        let err = ErrorSpec {
            deltas: vec![0.7, 2.9, -0.4, 1.3, 0.0],
            p_err: 3,
            q_err: vec![4, 1],
        };
        let joint = phase_removal_joint(&inject(&label("5:3:0:0,0"), &err).unwrap()).unwrap();
        let w = schmidt_weights(&joint, 1);
        assert!((w[0] - 1.0).abs() < EXACT_TOL, "{w:?}");
    }

    #[test]
    fn phase_difference_examples() {
        for (spec, stored, want) in [("2:2:1:0", 1, 0), ("2:2:0:1", 1, 1), ("3:3:1:2,0", 2, 1)] {
            let l = label(spec);
            let out = step2_phase_difference(&gbs(&l), stored).unwrap();
            assert_eq!(out.modal_outcome(), want, "{spec}");
            assert!((out.modal_share() - 1.0).abs() < EXACT_TOL);
            let moved = GbsLabel::new(l.dim_per_wire(), stored, l.offsets().to_vec()).unwrap();
            assert!(same(&out.post_state, &gbs(&moved)));
        }
    }

    #[test]
    fn phase_correction_examples() {
        let plus = ghz(Sign::Plus, 0, 0).unwrap();
        assert!(same(
            &step2_correct_phase(&plus, 1).unwrap(),
            &ghz(Sign::Minus, 0, 0).unwrap()
        ));
        assert!(same(&step2_correct_phase(&plus, 0).unwrap(), &plus));
        let q = step2_correct_phase(&gbs(&label("3:2:0:1")), 2).unwrap();
        assert!(same(&q, &gbs(&label("3:2:2:1"))));
    }

    #[test]
    fn parity_correction_examples() {
        let (s, diag) = step3_correct_parity(&ghz(Sign::Minus, 0, 0).unwrap(), &[1, 0]).unwrap();
        assert!(same(&s, &ghz(Sign::Minus, 1, 0).unwrap()));
        assert_eq!(diag, vec![1, 0]);

        let l = label("3:3:2:2,1");
        let (s, diag) = step3_correct_parity(&gbs(&l), l.offsets()).unwrap();
        assert!(same(&s, &gbs(&l)));
        assert_eq!(diag, vec![0, 0]);
    }

    #[test]
    fn bell_and_ghz_scenarios() {
        let target = label("2:2:1:1");
        let (out, record) = autocorrect(&inject(&target, &bell_error()).unwrap(), &target).unwrap();
        assert!(same(&out, &bell(1, 1).unwrap()));
        assert_eq!(record.parity_diag, vec![1]);

        let target = label("2:3:1:1,0");
        let err = ErrorSpec {
            deltas: vec![0.0, PI / 8.0],
            p_err: 0,
            q_err: vec![0, 0],
        };
        let trace = autocorrect_traced(&inject(&target, &err).unwrap(), &target).unwrap();
        assert!(same(&trace.after_step1, &ghz(Sign::Plus, 0, 0).unwrap()));
        assert!(same(&trace.after_step2, &ghz(Sign::Minus, 0, 0).unwrap()));
        assert!(same(&trace.after_step3, &ghz(Sign::Minus, 1, 0).unwrap()));
        assert_eq!(trace.record.parity_diag, vec![1, 0]);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let s = gbs(&label("2:2:0:0"));
        assert!(autocorrect(&s, &label("2:3:0:0,0")).is_err());
        assert!(step3_correct_parity(&s, &[0, 0]).is_err());
    }
}
