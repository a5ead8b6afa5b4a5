//! Explicit unitary matrices for qubit gates and their qudit generalizations.
//!
//! Two-wire gates are stored in `(control ⊗ target)` order; placing them on
//! arbitrary wires is the circuit engine's job.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `e^{2πi·k/d}`.
pub fn root_of_unity(k: i64, d: usize) -> Complex64 {
    let d = d as i64;
    let k = k.rem_euclid(d);
    Complex64::from_polar(1.0, 2.0 * PI * k as f64 / d as f64)
}

/// Unitary acting on `arity` wires of dimension `d`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GateMatrix {
    d: usize,
    arity: usize,
    entries: Vec<Complex64>,
}

impl GateMatrix {
    /// Wraps a raw matrix. The matrix must be `d^arity` square; unitarity is
    /// checked to `1e-8`.
    pub fn new(d: usize, arity: usize, entries: Vec<Complex64>) -> Result<Self> {
        check_dim(d)?;
        let dim = d.pow(arity as u32);
        if arity == 0 || entries.len() != dim * dim {
            return Err(Error::LengthMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        let gate = Self { d, arity, entries };
        if !gate.is_unitary(1e-8) {
            return Err(Error::DimensionMismatch("matrix is not unitary".into()));
        }
        Ok(gate)
    }

    fn from_fn(d: usize, arity: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let dim = d.pow(arity as u32);
        let mut entries = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            entries.extend((0..dim).map(|c| f(r, c)));
        }
        Self { d, arity, entries }
    }

    /// Matrix whose column `c` is the basis ket `map(c)`.
    fn permutation(d: usize, arity: usize, map: impl Fn(usize) -> usize) -> Self {
        Self::from_fn(d, arity, |r, c| if map(c) == r { ONE } else { ZERO })
    }

    fn diagonal(d: usize, arity: usize, phase: impl Fn(usize) -> Complex64) -> Self {
        Self::from_fn(d, arity, |r, c| if r == c { phase(r) } else { ZERO })
    }

    pub fn identity(d: usize, arity: usize) -> Self {
        Self::diagonal(d, arity, |_| ONE)
    }

    pub fn dim_per_wire(&self) -> usize {
        self.d
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Side length `d^arity`.
    pub fn size(&self) -> usize {
        self.d.pow(self.arity as u32)
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.size() + col]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.d, self.arity, |r, c| self.get(c, r).conj())
    }

    /// Matrix product `self · rhs`.
    pub fn matmul(&self, rhs: &GateMatrix) -> Result<Self> {
        if self.d != rhs.d || self.arity != rhs.arity {
            return Err(Error::DimensionMismatch(format!(
                "gate product of ({}, {}) and ({}, {})",
                self.d, self.arity, rhs.d, rhs.arity
            )));
        }
        let n = self.size();
        Ok(Self::from_fn(self.d, self.arity, |r, c| {
            (0..n).map(|k| self.get(r, k) * rhs.get(k, c)).sum()
        }))
    }

    pub fn pow(&self, exponent: u32) -> Self {
        (0..exponent).fold(Self::identity(self.d, self.arity), |acc, _| {
            acc.matmul(self).expect("same shape")
        })
    }

    /// `self ⊗ rhs` acting on `self`'s wires followed by `rhs`'s.
    pub fn kron(&self, rhs: &GateMatrix) -> Result<Self> {
        if self.d != rhs.d {
            return Err(Error::DimensionMismatch(format!(
                "kron of d={} and d={}",
                self.d, rhs.d
            )));
        }
        let m = rhs.size();
        Ok(Self::from_fn(self.d, self.arity + rhs.arity, |r, c| {
            self.get(r / m, c / m) * rhs.get(r % m, c % m)
        }))
    }

    /// Largest element-wise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &GateMatrix) -> f64 {
        if self.d != other.d || self.arity != other.arity {
            return f64::INFINITY;
        }
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Equality up to a global phase.
    pub fn approx_eq_up_to_phase(&self, other: &GateMatrix, tol: f64) -> bool {
        if self.d != other.d || self.arity != other.arity {
            return false;
        }
        let Some((a, b)) = self
            .entries
            .iter()
            .zip(&other.entries)
            .find(|(a, _)| a.norm() > 1e-6)
        else {
            return other.entries.iter().all(|b| b.norm() <= tol);
        };
        if b.norm() < 1e-9 {
            return false;
        }
        let phase = b / a;
        let phase = phase / phase.norm();
        self.entries
            .iter()
            .zip(&other.entries)
            .all(|(a, b)| (a * phase - b).norm() <= tol)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let prod = self.matmul(&self.adjoint()).expect("same shape");
        prod.max_abs_diff(&Self::identity(self.d, self.arity)) <= tol
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        Err(Error::InvalidDimension(d))
    } else {
        Ok(())
    }
}

/// Clock gate: `Z_d|j⟩ = e^{2πij/d}|j⟩`.
pub fn gen_z(d: usize) -> Result<GateMatrix> {
    check_dim(d)?;
    Ok(GateMatrix::diagonal(d, 1, |j| root_of_unity(j as i64, d)))
}

pub fn gen_z_dag(d: usize) -> Result<GateMatrix> {
    Ok(gen_z(d)?.adjoint())
}

/// Shift gate: `X_d|j⟩ = |j−1 mod d⟩`.
pub fn gen_x(d: usize) -> Result<GateMatrix> {
    check_dim(d)?;
    Ok(GateMatrix::permutation(d, 1, |j| (j + d - 1) % d))
}

/// `X_d†|j⟩ = |j+1 mod d⟩`.
pub fn gen_x_dag(d: usize) -> Result<GateMatrix> {
    check_dim(d)?;
    Ok(GateMatrix::permutation(d, 1, |j| (j + 1) % d))
}

/// Discrete Fourier transform: `H_d|j⟩ = d^{-1/2} Σ_k e^{2πijk/d}|k⟩`.
pub fn gen_h(d: usize) -> Result<GateMatrix> {
    check_dim(d)?;
    let norm = 1.0 / (d as f64).sqrt();
    Ok(GateMatrix::from_fn(d, 1, |k, j| {
        root_of_unity((j * k) as i64, d) * norm
    }))
}

pub fn gen_h_dag(d: usize) -> Result<GateMatrix> {
    Ok(gen_h(d)?.adjoint())
}

/// `C_{X_d}|i⟩|j⟩ = |i⟩|j−i mod d⟩`; the adjoint adds instead.
pub fn controlled_shift(d: usize, adjoint: bool) -> Result<GateMatrix> {
    check_dim(d)?;
    Ok(GateMatrix::permutation(d, 2, |c| {
        let (i, j) = (c / d, c % d);
        let target = if adjoint {
            (j + i) % d
        } else {
            (j + d - i) % d
        };
        i * d + target
    }))
}

/// Control value `k` applies `Z_d^k` to the target:
/// `|k⟩|j⟩ → e^{2πijk/d}|k⟩|j⟩`.
pub fn controlled_zpow(d: usize) -> Result<GateMatrix> {
    check_dim(d)?;
    Ok(GateMatrix::diagonal(d, 2, |c| {
        root_of_unity(((c / d) * (c % d)) as i64, d)
    }))
}

/// Named qubit gates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QubitGate {
    H,
    X,
    Y,
    Z,
    S,
    Sdg,
    /// `diag(1, e^{iθ})`.
    Phase(f64),
    Cnot,
    Cz,
}

impl QubitGate {
    pub fn matrix(self) -> GateMatrix {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let one_qubit = |m: [Complex64; 4]| GateMatrix {
            d: 2,
            arity: 1,
            entries: m.to_vec(),
        };
        match self {
            QubitGate::H => one_qubit([
                c(FRAC_1_SQRT_2, 0.0),
                c(FRAC_1_SQRT_2, 0.0),
                c(FRAC_1_SQRT_2, 0.0),
                c(-FRAC_1_SQRT_2, 0.0),
            ]),
            QubitGate::X => one_qubit([ZERO, ONE, ONE, ZERO]),
            QubitGate::Y => one_qubit([ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO]),
            QubitGate::Z => one_qubit([ONE, ZERO, ZERO, c(-1.0, 0.0)]),
            QubitGate::S => one_qubit([ONE, ZERO, ZERO, c(0.0, 1.0)]),
            QubitGate::Sdg => one_qubit([ONE, ZERO, ZERO, c(0.0, -1.0)]),
            QubitGate::Phase(theta) => {
                one_qubit([ONE, ZERO, ZERO, Complex64::from_polar(1.0, theta)])
            }
            QubitGate::Cnot => GateMatrix::permutation(2, 2, |c| match c {
                2 => 3,
                3 => 2,
                other => other,
            }),
            QubitGate::Cz => GateMatrix::diagonal(2, 2, |c| if c == 3 { -ONE } else { ONE }),
        }
    }
}

/// Looks up a qubit gate by name (`H`, `X`, `Y`, `Z`, `S`, `Sdg`, `P`,
/// `CNOT`, `CZ`, case-insensitive). `P` needs `theta` in radians.
pub fn qubit_gate(name: &str, theta: Option<f64>) -> Result<GateMatrix> {
    let gate = match (name.to_ascii_uppercase().as_str(), theta) {
        ("H", None) => QubitGate::H,
        ("X", None) => QubitGate::X,
        ("Y", None) => QubitGate::Y,
        ("Z", None) => QubitGate::Z,
        ("S", None) => QubitGate::S,
        ("SDG", None) => QubitGate::Sdg,
        ("P", Some(t)) => QubitGate::Phase(t),
        ("CNOT" | "CX", None) => QubitGate::Cnot,
        ("CZ", None) => QubitGate::Cz,
        _ => return Err(Error::UnknownGate(name.to_string())),
    };
    Ok(gate.matrix())
}

/// Gate as it appears in a circuit: a named constructor that is resolved
/// against the register dimension, or an explicit matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    /// Generalized Hadamard `H_d`.
    H,
    Hdg,
    /// Generalized shift `X_d`.
    X,
    Xdg,
    /// Pauli Y (qubits only).
    Y,
    /// Generalized clock `Z_d`.
    Z,
    Zdg,
    /// Qubits only.
    S,
    /// Qubits only.
    Sdg,
    /// `diag(1, e^{iθ})`, qubits only.
    Phase(f64),
    /// `C_{X_d}` with `(control, target)` wires.
    Cx,
    Cxdg,
    /// Controlled `Z_d` power with `(control, target)` wires.
    Cz,
    Unitary(GateMatrix),
}

impl Gate {
    pub fn arity(&self) -> usize {
        match self {
            Gate::Cx | Gate::Cxdg | Gate::Cz => 2,
            Gate::Unitary(m) => m.arity(),
            _ => 1,
        }
    }

    /// Resolves the gate for wires of dimension `d`.
    pub fn matrix(&self, d: usize) -> Result<GateMatrix> {
        let qubit_only = |g: QubitGate| {
            if d == 2 {
                Ok(g.matrix())
            } else {
                Err(Error::UnsupportedDimension(d))
            }
        };
        match self {
            Gate::H => gen_h(d),
            Gate::Hdg => gen_h_dag(d),
            Gate::X => gen_x(d),
            Gate::Xdg => gen_x_dag(d),
            Gate::Y => qubit_only(QubitGate::Y),
            Gate::Z => gen_z(d),
            Gate::Zdg => gen_z_dag(d),
            Gate::S => qubit_only(QubitGate::S),
            Gate::Sdg => qubit_only(QubitGate::Sdg),
            Gate::Phase(t) => qubit_only(QubitGate::Phase(*t)),
            Gate::Cx => controlled_shift(d, false),
            Gate::Cxdg => controlled_shift(d, true),
            Gate::Cz => controlled_zpow(d),
            Gate::Unitary(m) if m.dim_per_wire() == d => Ok(m.clone()),
            Gate::Unitary(m) => Err(Error::DimensionMismatch(format!(
                "d={} gate in a d={d} register",
                m.dim_per_wire()
            ))),
        }
    }

    /// Mnemonic used by the circuit text format, if the gate has one.
    pub fn mnemonic(&self) -> Option<&'static str> {
        Some(match self {
            Gate::H => "H",
            Gate::Hdg => "HDG",
            Gate::X => "X",
            Gate::Xdg => "XDG",
            Gate::Y => "Y",
            Gate::Z => "Z",
            Gate::Zdg => "ZDG",
            Gate::S => "S",
            Gate::Sdg => "SDG",
            Gate::Phase(_) => "P",
            Gate::Cx => "CX",
            Gate::Cxdg => "CXDG",
            Gate::Cz => "CZ",
            Gate::Unitary(_) => return None,
        })
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::Phase(t) => write!(f, "P({t})"),
            Gate::Unitary(m) => write!(f, "U[{}x{}]", m.size(), m.size()),
            other => f.write_str(other.mnemonic().unwrap_or("?")),
        }
    }
}

impl FromStr for Gate {
    type Err = Error;

    /// Parses a mnemonic without parameters; `P` is handled by the circuit
    /// parser since it carries an angle.
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_uppercase().as_str() {
            "H" => Gate::H,
            "HDG" => Gate::Hdg,
            "X" => Gate::X,
            "XDG" => Gate::Xdg,
            "Y" => Gate::Y,
            "Z" => Gate::Z,
            "ZDG" => Gate::Zdg,
            "S" => Gate::S,
            "SDG" => Gate::Sdg,
            "CX" | "CNOT" => Gate::Cx,
            "CXDG" => Gate::Cxdg,
            "CZ" => Gate::Cz,
            _ => return Err(Error::UnknownGate(s.to_string())),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-10;
    const DIMS: [usize; 5] = [2, 3, 4, 5, 7];

    fn ket(d: usize, j: usize) -> Vec<Complex64> {
        let mut v = vec![ZERO; d];
        v[j] = ONE;
        v
    }

    fn act(g: &GateMatrix, v: &[Complex64]) -> Vec<Complex64> {
        let n = g.size();
        (0..n)
            .map(|r| (0..n).map(|c| g.get(r, c) * v[c]).sum())
            .collect()
    }

    fn close(a: &[Complex64], b: &[Complex64]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).norm() < TOL)
    }

    #[test]
    fn qubit_reductions() {
        assert!(gen_z(2).unwrap().max_abs_diff(&QubitGate::Z.matrix()) < TOL);
        assert!(gen_x(2).unwrap().max_abs_diff(&QubitGate::X.matrix()) < TOL);
        assert!(gen_h(2).unwrap().max_abs_diff(&QubitGate::H.matrix()) < TOL);
        assert!(
            controlled_shift(2, false)
                .unwrap()
                .max_abs_diff(&QubitGate::Cnot.matrix())
                < TOL
        );
        assert!(
            controlled_zpow(2)
                .unwrap()
                .max_abs_diff(&QubitGate::Cz.matrix())
                < TOL
        );
    }

    #[test]
    fn clock_and_shift_examples() {
        let z3 = gen_z(3).unwrap();
        let want: Vec<Complex64> = vec![ZERO, Complex64::from_polar(1.0, 2.0 * PI / 3.0), ZERO];
        assert!(close(&act(&z3, &ket(3, 1)), &want));

        assert!(close(&act(&gen_x(3).unwrap(), &ket(3, 0)), &ket(3, 2)));
        assert!(close(&act(&gen_x_dag(3).unwrap(), &ket(3, 2)), &ket(3, 0)));
    }

    #[test]
    fn hadamard_examples() {
        let h = qubit_gate("H", None).unwrap();
        let plus = vec![Complex64::new(FRAC_1_SQRT_2, 0.0); 2];
        assert!(close(&act(&h, &ket(2, 0)), &plus));

        for d in DIMS {
            let h = gen_h(d).unwrap();
            let hd = gen_h_dag(d).unwrap();
            for j in 0..d {
                let col = act(&h, &ket(d, j));
                let col_dag = act(&hd, &ket(d, j));
                for (k, (a, b)) in col.iter().zip(&col_dag).enumerate() {
                    let w = root_of_unity((j * k) as i64, d) / (d as f64).sqrt();
                    assert!((a - w).norm() < TOL);
                    assert!((b - w.conj()).norm() < TOL);
                }
            }
        }
    }

    #[test]
    fn phase_gate_is_not_t() {
        let p = qubit_gate("P", Some(PI / 8.0)).unwrap();
        assert!((p.get(1, 1) - Complex64::from_polar(1.0, PI / 8.0)).norm() < TOL);
        assert!(qubit_gate("P", None).is_err());
        assert!(matches!(qubit_gate("T", None), Err(Error::UnknownGate(_))));
    }

    #[test]
    fn adjoint_pairs() {
        let s = qubit_gate("S", None).unwrap();
        let sdg = qubit_gate("Sdg", None).unwrap();
        assert!(
            sdg.matmul(&s)
                .unwrap()
                .max_abs_diff(&GateMatrix::identity(2, 1))
                < TOL
        );
        for d in [2, 3, 5] {
            let fwd = controlled_shift(d, false).unwrap();
            let adj = controlled_shift(d, true).unwrap();
            assert!(
                adj.matmul(&fwd)
                    .unwrap()
                    .max_abs_diff(&GateMatrix::identity(d, 2))
                    < TOL
            );
            assert!(adj.max_abs_diff(&fwd.adjoint()) < TOL);
        }
    }

    #[test]
    fn controlled_shift_qutrit() {
        // |1⟩|0⟩ → |1⟩|2⟩
        let g = controlled_shift(3, false).unwrap();
        assert!(close(&act(&g, &ket(9, 3)), &ket(9, 5)));
    }

    #[test]
    fn controlled_zpow_examples() {
        for d in [2, 3, 5] {
            let g = controlled_zpow(d).unwrap();
            for j in 0..d {
                assert!(close(&act(&g, &ket(d * d, j)), &ket(d * d, j)));
            }
        }
        // |2⟩|1⟩ picks up (Z_3)² on |1⟩
        let z3sq = gen_z(3).unwrap().pow(2);
        let g = controlled_zpow(3).unwrap();
        let want = z3sq.get(1, 1);
        assert!((want - Complex64::from_polar(1.0, 4.0 * PI / 3.0)).norm() < TOL);
        assert!((g.get(7, 7) - want).norm() < TOL);
    }

    #[test]
    fn algebra_identities() {
        for d in DIMS {
            let (x, z, h) = (gen_x(d).unwrap(), gen_z(d).unwrap(), gen_h(d).unwrap());
            let hzh = h.matmul(&z).unwrap().matmul(&h.adjoint()).unwrap();
            assert!(hzh.max_abs_diff(&x) < TOL, "d={d}");
            let id = GateMatrix::identity(d, 1);
            assert!(z.pow(d as u32).max_abs_diff(&id) < TOL);
            assert!(x.pow(d as u32).max_abs_diff(&id) < TOL);
            for g in [
                &x,
                &z,
                &h,
                &gen_x_dag(d).unwrap(),
                &gen_z_dag(d).unwrap(),
                &gen_h_dag(d).unwrap(),
                &controlled_shift(d, false).unwrap(),
                &controlled_shift(d, true).unwrap(),
                &controlled_zpow(d).unwrap(),
            ] {
                assert!(g.is_unitary(TOL));
            }
            let hh = h.matmul(&h).unwrap();
            assert_eq!(
                hh.max_abs_diff(&id) < TOL,
                d == 2,
                "H_d² = I only for d = 2"
            );
            assert!(h.matmul(&h.adjoint()).unwrap().max_abs_diff(&id) < TOL);
        }
    }

    #[test]
    fn rejects_small_dimension() {
        assert_eq!(gen_z(1), Err(Error::InvalidDimension(1)));
        assert_eq!(controlled_shift(0, true), Err(Error::InvalidDimension(0)));
        assert!(Gate::S.matrix(3).is_err());
    }

    #[test]
    fn up_to_phase_comparison() {
        let z = QubitGate::Z.matrix();
        let mut neg = z.clone();
        for e in &mut neg.entries {
            *e *= Complex64::new(0.0, 1.0);
        }
        assert!(z.approx_eq_up_to_phase(&neg, TOL));
        assert!(!z.approx_eq_up_to_phase(&QubitGate::X.matrix(), TOL));
    }
}
