//! Generalized Bell states of `n` qudits and the two-/three-qubit Bell and
//! GHZ families.
//!
//! A label `(d, n, p, q₁…q_{n−1})` names
//!
//! ```text
//! |Ψ⟩ = d^{-1/2} Σ_j e^{2πijp/d} |j⟩|j+q₁⟩…|j+q_{n−1}⟩     (sums mod d)
//! ```
//!
//! For qubits the familiar names `Ψ±_{abc}` use the ket string of the `j = 0`
//! branch, which is `0 q₁ … q_{n−1}`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::gates::root_of_unity;
use crate::tensor::{index_of, register_dim, StateVector};

/// Identity of a generalized Bell state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GbsLabel {
    d: usize,
    n: usize,
    phase: usize,
    offsets: Vec<usize>,
}

impl GbsLabel {
    /// `offsets` holds `q₁ … q_{n−1}`, so `n = offsets.len() + 1`.
    pub fn new(d: usize, phase: usize, offsets: Vec<usize>) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        if offsets.is_empty() {
            return Err(Error::InvalidLabel("need at least two wires".into()));
        }
        if phase >= d {
            return Err(Error::InvalidLabel(format!(
                "phase {phase} not in [0, {d})"
            )));
        }
        if let Some(q) = offsets.iter().find(|&&q| q >= d) {
            return Err(Error::InvalidLabel(format!("offset {q} not in [0, {d})")));
        }
        Ok(Self {
            d,
            n: offsets.len() + 1,
            phase,
            offsets,
        })
    }

    pub fn dim_per_wire(&self) -> usize {
        self.d
    }

    pub fn wire_count(&self) -> usize {
        self.n
    }

    /// Phase index `p`.
    pub fn phase(&self) -> usize {
        self.phase
    }

    /// Parity offsets `q₁ … q_{n−1}` relative to wire 0.
    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    /// Relative parities `q_i − q_{i−1} mod d` for `i = 1..n−1` (`q₀ = 0`):
    /// the digits a parity check reads out.
    pub fn relative_parities(&self) -> Vec<usize> {
        let d = self.d;
        std::iter::once(0)
            .chain(self.offsets.iter().copied())
            .collect::<Vec<_>>()
            .windows(2)
            .map(|w| (w[1] + d - w[0]) % d)
            .collect()
    }

    /// Every label for a `(d, n)` register, `d^n` in total.
    pub fn all(d: usize, n: usize) -> Result<Vec<GbsLabel>> {
        if n < 2 {
            return Err(Error::InvalidLabel("need at least two wires".into()));
        }
        let count = register_dim(d, n)
            .ok_or_else(|| Error::InvalidLabel(format!("{d}^{n} labels overflow")))?;
        (0..count)
            .map(|k| {
                let digits = crate::tensor::digits_of(k, d, n);
                GbsLabel::new(d, digits[0], digits[1..].to_vec())
            })
            .collect()
    }

    /// Qubit name such as `Ψ-010`; `None` unless `d = 2`.
    pub fn qubit_name(&self) -> Option<String> {
        (self.d == 2).then(|| {
            let sign = if self.phase == 0 { '+' } else { '-' };
            let ket: String = std::iter::once(0)
                .chain(self.offsets.iter().copied())
                .map(|b| char::from(b'0' + b as u8))
                .collect();
            format!("Ψ{sign}{ket}")
        })
    }
}

impl fmt::Display for GbsLabel {
    /// `d:n:p:q1,q2,...`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let q: Vec<String> = self.offsets.iter().map(|q| q.to_string()).collect();
        write!(f, "{}:{}:{}:{}", self.d, self.n, self.phase, q.join(","))
    }
}

impl FromStr for GbsLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::InvalidLabel(format!("`{s}`: {why}"));
        let parts: Vec<&str> = s.trim().split(':').collect();
        let [d, n, p, q] = parts[..] else {
            return Err(bad("expected d:n:p:q1,q2,..."));
        };
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad("not an integer"));
        let (d, n, p) = (num(d)?, num(n)?, num(p)?);
        let offsets = q.split(',').map(num).collect::<Result<Vec<_>>>()?;
        if offsets.len() + 1 != n {
            return Err(bad(&format!(
                "{n} wires need {} offsets",
                n.saturating_sub(1)
            )));
        }
        GbsLabel::new(d, p, offsets)
    }
}

impl Serialize for GbsLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Builds `d^{-1/2} Σ_j e^{2πij·phase/d} e^{iδ_j} |j⟩|j+q₁⟩…` for the given
/// per-branch phases (`None` means all zero).
pub(crate) fn branch_state(
    d: usize,
    phase: usize,
    offsets: &[usize],
    branch_phases: Option<&[f64]>,
) -> StateVector {
    let n = offsets.len() + 1;
    let dim = d.pow(n as u32);
    let norm = 1.0 / (d as f64).sqrt();
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    let mut digits = vec![0; n];
    for j in 0..d {
        digits[0] = j;
        for (slot, q) in digits[1..].iter_mut().zip(offsets) {
            *slot = (j + q) % d;
        }
        let delta = branch_phases.map_or(0.0, |ds| ds[j]);
        amps[index_of(&digits, d)] =
            root_of_unity((j * phase) as i64, d) * Complex64::from_polar(norm, delta);
    }
    StateVector::from_parts(d, n, amps)
}

/// The generalized Bell state named by `label`.
pub fn gbs(label: &GbsLabel) -> StateVector {
    branch_state(label.d, label.phase, &label.offsets, None)
}

/// Two-qubit Bell state with phase bit (0 ↔ `+`) and parity bit.
pub fn bell(phase_bit: usize, parity_bit: usize) -> Result<StateVector> {
    Ok(gbs(&GbsLabel::new(2, phase_bit, vec![parity_bit])?))
}

/// Sign of a qubit GHZ state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// `(|0 b₁ b₂⟩ ± |1 b̄₁ b̄₂⟩)/√2`.
pub fn ghz(sign: Sign, b1: usize, b2: usize) -> Result<StateVector> {
    let phase = match sign {
        Sign::Plus => 0,
        Sign::Minus => 1,
    };
    Ok(gbs(&GbsLabel::new(2, phase, vec![b1, b2])?))
}

/// Inverts discrimination: phase outcome gives `p`, relative parity outcomes
/// integrate to offsets (`q_i = q_{i−1} + outcome_i mod d`, `q₀ = 0`).
pub fn classify(
    phase_outcome: usize,
    parity_outcomes: &[usize],
    d: usize,
    n: usize,
) -> Result<GbsLabel> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    if parity_outcomes.len() + 1 != n {
        return Err(Error::InvalidLabel(format!(
            "{n} wires need {} parity outcomes, got {}",
            n.saturating_sub(1),
            parity_outcomes.len()
        )));
    }
    if let Some(&v) = std::iter::once(&phase_outcome)
        .chain(parity_outcomes)
        .find(|&&v| v >= d)
    {
        return Err(Error::OutOfRange { value: v, bound: d });
    }
    let offsets = parity_outcomes
        .iter()
        .scan(0, |q, &r| {
            *q = (*q + r) % d;
            Some(*q)
        })
        .collect();
    GbsLabel::new(d, phase_outcome, offsets)
}
