//! Pauli-basis state tomography of qubit registers.
//!
//! The reconstruction is plain linear inversion,
//! `ρ^E = 2^{-n} Σ_σ ⟨σ⟩ σ` over all `4^n` Pauli strings, with no positivity
//! projection. Each string is estimated from its own shot budget.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::circuit::{apply, child_seed, sample, Shots};
use crate::error::{Error, Result};
use crate::gates::{GateMatrix, QubitGate};
use crate::tensor::{check_wires, DensityMatrix, StateVector};

/// Shots per Pauli setting unless told otherwise.
pub const DEFAULT_SHOTS: u64 = 8192;
/// Largest number of wires reconstructed at once.
pub const MAX_WIRES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> GateMatrix {
        match self {
            Pauli::I => GateMatrix::identity(2, 1),
            Pauli::X => QubitGate::X.matrix(),
            Pauli::Y => QubitGate::Y.matrix(),
            Pauli::Z => QubitGate::Z.matrix(),
        }
    }

    /// Rotations that map this operator's eigenbasis onto the computational
    /// basis, in application order.
    fn basis_change(self) -> &'static [QubitGate] {
        match self {
            Pauli::X => &[QubitGate::H],
            Pauli::Y => &[QubitGate::Sdg, QubitGate::H],
            Pauli::I | Pauli::Z => &[],
        }
    }

    fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Tensor product of Paulis, one per tomographed wire.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString(pub Vec<Pauli>);

impl PauliString {
    /// All `4^n` strings, first wire most significant, `I < X < Y < Z`.
    pub fn all(n: usize) -> Vec<PauliString> {
        (0..4usize.pow(n as u32))
            .map(|k| {
                PauliString(
                    (0..n)
                        .map(|i| Pauli::ALL[(k / 4usize.pow((n - 1 - i) as u32)) % 4])
                        .collect(),
                )
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&p| p == Pauli::I)
    }

    pub fn matrix(&self) -> GateMatrix {
        self.0.iter().fold(GateMatrix::identity(2, 0), |acc, p| {
            acc.kron(&p.matrix())
                .expect("both factors are qubit matrices")
        })
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|p| write!(f, "{}", p.symbol()))
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                _ => Err(Error::UnknownGate(c.to_string())),
            })
            .collect::<Result<Vec<_>>>()
            .map(PauliString)
    }
}

fn check_qubits(state: &StateVector) -> Result<()> {
    match state.dim_per_wire() {
        2 => Ok(()),
        d => Err(Error::UnsupportedDimension(d)),
    }
}

/// Expectation of `pauli` acting on `wires` of `state`. Sampled mode rotates
/// each non-identity wire into the computational basis, samples, and
/// averages `(-1)^{parity}` over those wires.
pub fn expectation(
    state: &StateVector,
    pauli: &PauliString,
    wires: &[usize],
    shots: Shots,
    seed: u64,
) -> Result<f64> {
    check_qubits(state)?;
    check_wires(wires, state.wire_count())?;
    if pauli.len() != wires.len() {
        return Err(Error::DimensionMismatch(format!(
            "Pauli string {pauli} for {} wires",
            wires.len()
        )));
    }
    if pauli.is_identity() {
        return Ok(1.0);
    }
    let active: Vec<(Pauli, usize)> = pauli
        .0
        .iter()
        .zip(wires)
        .filter(|(p, _)| **p != Pauli::I)
        .map(|(&p, &w)| (p, w))
        .collect();

    match shots {
        Shots::Exact => {
            let mut image = state.clone();
            for &(p, w) in &active {
                image = apply(&image, &p.matrix(), &[w])?;
            }
            Ok(state.inner(&image)?.re)
        }
        Shots::Sampled(count) => {
            let mut rotated = state.clone();
            for &(p, w) in &active {
                for gate in p.basis_change() {
                    rotated = apply(&rotated, &gate.matrix(), &[w])?;
                }
            }
            let measured: Vec<usize> = active.iter().map(|&(_, w)| w).collect();
            let result = sample(&rotated, &measured, count, seed)?;
            let signed: i64 = result
                .counts
                .iter()
                .map(|(label, &n)| {
                    let ones = label.bytes().filter(|&b| b == b'1').count();
                    if ones % 2 == 0 {
                        n as i64
                    } else {
                        -(n as i64)
                    }
                })
                .sum();
            Ok(signed as f64 / count as f64)
        }
    }
}

/// Linear-inversion estimate of the reduced state on `wires`. The `k`-th
/// string of [`PauliString::all`] samples with `child_seed(seed, k)`.
pub fn reconstruct(
    state: &StateVector,
    wires: &[usize],
    shots: Shots,
    seed: u64,
) -> Result<DensityMatrix> {
    check_qubits(state)?;
    check_wires(wires, state.wire_count())?;
    let n = wires.len();
    if n > MAX_WIRES {
        return Err(Error::OutOfRange {
            value: n,
            bound: MAX_WIRES + 1,
        });
    }
    let dim = 1 << n;
    let scale = 1.0 / dim as f64;
    let mut rho = DensityMatrix::zeros(dim);
    for (k, pauli) in PauliString::all(n).iter().enumerate() {
        let value = expectation(state, pauli, wires, shots, child_seed(seed, k as u64))?;
        if value == 0.0 {
            continue;
        }
        let m = pauli.matrix();
        for r in 0..dim {
            for c in 0..dim {
                *rho.get_mut(r, c) += m.get(r, c) * (value * scale);
            }
        }
    }
    Ok(rho)
}

/// Theoretical reduced density matrix of `state` on `wires`.
pub fn target_density(state: &StateVector, wires: &[usize]) -> Result<DensityMatrix> {
    state
        .density()
        .partial_trace(wires, state.dim_per_wire(), state.wire_count())
}

/// Mean and maximum of element-wise absolute differences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Deviation {
    pub avg: f64,
    pub max: f64,
}

impl Deviation {
    fn over(values: impl Iterator<Item = f64>) -> Self {
        let (sum, max, count) = values.fold((0.0, 0.0f64, 0usize), |(s, m, c), v| {
            (s + v, m.max(v), c + 1)
        });
        Self {
            avg: if count == 0 { 0.0 } else { sum / count as f64 },
            max,
        }
    }
}

/// Agreement between a theoretical and a reconstructed density matrix.
/// `modulus` compares `|x^T − x^E|`; `real` and `imag` compare the parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub fidelity_pure: Option<f64>,
    pub fidelity_general: f64,
    pub modulus: Deviation,
    pub real: Deviation,
    pub imag: Deviation,
}

/// `√⟨Ψ|ρ|Ψ⟩`, clamped at 0 inside the root.
pub fn fidelity_pure(reference: &StateVector, rho: &DensityMatrix) -> Result<f64> {
    if reference.len() != rho.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state of length {} against {}x{} matrix",
            reference.len(),
            rho.dim(),
            rho.dim()
        )));
    }
    let a = reference.amplitudes();
    let mut value = Complex64::new(0.0, 0.0);
    for (r, ar) in a.iter().enumerate() {
        for (c, ac) in a.iter().enumerate() {
            value += ar.conj() * rho.get(r, c) * ac;
        }
    }
    Ok(value.re.max(0.0).sqrt())
}

fn to_nalgebra(rho: &DensityMatrix) -> DMatrix<Complex64> {
    DMatrix::from_fn(rho.dim(), rho.dim(), |r, c| rho.get(r, c))
}

fn hermitian_part(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (m + m.adjoint()).scale(0.5)
}

/// `Tr √(√ρ_T ρ_E √ρ_T)`. Negative eigenvalues from finite sampling are
/// clamped to zero.
pub fn fidelity_general(rho_t: &DensityMatrix, rho_e: &DensityMatrix) -> Result<f64> {
    rho_t.check_same_dim(rho_e)?;
    let eig = SymmetricEigen::new(hermitian_part(&to_nalgebra(rho_t)));
    let roots = eig
        .eigenvalues
        .map(|l| Complex64::new(l.max(0.0).sqrt(), 0.0));
    let sqrt_t = &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.adjoint();
    let inner = hermitian_part(&(&sqrt_t * to_nalgebra(rho_e) * &sqrt_t));
    Ok(SymmetricEigen::new(inner)
        .eigenvalues
        .iter()
        .map(|l| l.max(0.0).sqrt())
        .sum())
}

pub fn metrics(
    rho_t: &DensityMatrix,
    rho_e: &DensityMatrix,
    pure_ref: Option<&StateVector>,
) -> Result<Metrics> {
    rho_t.check_same_dim(rho_e)?;
    let pairs = || rho_t.entries().iter().zip(rho_e.entries());
    Ok(Metrics {
        fidelity_pure: pure_ref.map(|s| fidelity_pure(s, rho_e)).transpose()?,
        fidelity_general: fidelity_general(rho_t, rho_e)?,
        modulus: Deviation::over(pairs().map(|(t, e)| (t - e).norm())),
        real: Deviation::over(pairs().map(|(t, e)| (t.re - e.re).abs())),
        imag: Deviation::over(pairs().map(|(t, e)| (t.im - e.im).abs())),
    })
}
