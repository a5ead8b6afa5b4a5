//! Dense complex linear algebra over registers of `n` wires of dimension `d`.
//!
//! Basis index convention: wire 0 is the most significant base-`d` digit, so
//! the ket `|a b c⟩` sits at index `a·d² + b·d + c`.

use num_complex::Complex64;
use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::error::{Error, Result};

/// Tolerance for validating caller-supplied amplitudes.
pub const INPUT_TOL: f64 = 1e-6;
/// Tolerance for assertions about exact simulation results.
pub const EXACT_TOL: f64 = 1e-10;
/// Tolerance used when deciding whether a register factorizes.
pub const FACTOR_TOL: f64 = 1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `d^n`, or `None` on overflow.
pub fn register_dim(d: usize, n: usize) -> Option<usize> {
    d.checked_pow(u32::try_from(n).ok()?)
}

/// Place value of `wire` in an `n`-wire register.
#[inline]
pub(crate) fn stride(d: usize, n: usize, wire: usize) -> usize {
    d.pow((n - 1 - wire) as u32)
}

/// Base-`d` digits of `index`, most significant first.
pub fn digits_of(index: usize, d: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    let mut rest = index;
    for slot in out.iter_mut().rev() {
        *slot = rest % d;
        rest /= d;
    }
    out
}

/// Inverse of [`digits_of`].
pub fn index_of(digits: &[usize], d: usize) -> usize {
    digits.iter().fold(0, |acc, &x| acc * d + x)
}

pub(crate) fn check_wires(wires: &[usize], wire_count: usize) -> Result<()> {
    let invalid = || Error::InvalidWires {
        wires: wires.to_vec(),
        wire_count,
    };
    if wires.is_empty() {
        return Err(invalid());
    }
    for (k, &w) in wires.iter().enumerate() {
        if w >= wire_count || wires[..k].contains(&w) {
            return Err(invalid());
        }
    }
    Ok(())
}

fn check_dimension(d: usize) -> Result<()> {
    if d < 2 {
        Err(Error::InvalidDimension(d))
    } else {
        Ok(())
    }
}

/// Pure state of `n` wires, each of dimension `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    d: usize,
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Builds a state, rejecting amplitudes whose norm is off by more than
    /// [`INPUT_TOL`]. The accepted vector is rescaled to unit norm.
    pub fn new(d: usize, n: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        let state = Self::unnormalized(d, n, amplitudes)?;
        let norm = state.norm_sqr().sqrt();
        if (norm - 1.0).abs() > INPUT_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(state.scaled(1.0 / norm))
    }

    /// Builds a state and rescales it to unit norm whatever its initial norm.
    pub fn new_renormalized(d: usize, n: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        let state = Self::unnormalized(d, n, amplitudes)?;
        let norm = state.norm_sqr().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized { norm });
        }
        Ok(state.scaled(1.0 / norm))
    }

    /// Convenience for real amplitude lists.
    pub fn from_real(d: usize, n: usize, amplitudes: &[f64]) -> Result<Self> {
        Self::new(
            d,
            n,
            amplitudes.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    fn unnormalized(d: usize, n: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_dimension(d)?;
        if n == 0 {
            return Err(Error::InvalidWires {
                wires: vec![],
                wire_count: 0,
            });
        }
        let expected = register_dim(d, n)
            .ok_or_else(|| Error::DimensionMismatch(format!("register {d}^{n} is too large")))?;
        if amps.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                got: amps.len(),
            });
        }
        Ok(Self { d, n, amps })
    }

    /// Internal constructor for amplitudes produced by unitary evolution.
    pub(crate) fn from_parts(d: usize, n: usize, amps: Vec<Complex64>) -> Self {
        debug_assert_eq!(Some(amps.len()), register_dim(d, n));
        Self { d, n, amps }
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(d: usize, n: usize, index: usize) -> Result<Self> {
        check_dimension(d)?;
        let dim = register_dim(d, n)
            .filter(|_| n > 0)
            .ok_or_else(|| Error::DimensionMismatch(format!("bad register {d}^{n}")))?;
        if index >= dim {
            return Err(Error::OutOfRange {
                value: index,
                bound: dim,
            });
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { d, n, amps })
    }

    /// Basis state from its digit string, e.g. `&[0, 1, 0]` for `|010⟩`.
    pub fn from_digits(d: usize, digits: &[usize]) -> Result<Self> {
        if let Some(&bad) = digits.iter().find(|&&x| x >= d) {
            return Err(Error::OutOfRange {
                value: bad,
                bound: d,
            });
        }
        Self::basis(d, digits.len(), index_of(digits, d))
    }

    /// `|0…0⟩`.
    pub fn zero(d: usize, n: usize) -> Result<Self> {
        Self::basis(d, n, 0)
    }

    pub fn dim_per_wire(&self) -> usize {
        self.d
    }

    pub fn wire_count(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn scaled(mut self, factor: f64) -> Self {
        for a in &mut self.amps {
            *a *= factor;
        }
        self
    }

    /// `self ⊗ other`; `other`'s wires are appended after `self`'s.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch(format!(
                "cannot tensor d={} with d={}",
                self.d, other.d
            )));
        }
        let mut amps = Vec::with_capacity(self.len() * other.len());
        for a in &self.amps {
            amps.extend(other.amps.iter().map(|b| a * b));
        }
        Ok(Self::from_parts(self.d, self.n + other.n, amps))
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.d != other.d || self.n != other.n {
            return Err(Error::DimensionMismatch(format!(
                "inner product of {}^{} and {}^{} registers",
                self.d, self.n, other.d, other.n
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|⟨self|other⟩|`: 1 exactly when the states agree up to global phase.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm())
    }

    /// Outer product `|ψ⟩⟨ψ|`.
    pub fn density(&self) -> DensityMatrix {
        let dim = self.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for a in &self.amps {
            entries.extend(self.amps.iter().map(|b| a * b.conj()));
        }
        DensityMatrix { dim, entries }
    }

    /// Rotates the global phase so the first non-negligible amplitude is real
    /// and positive.
    pub fn canonical_phase(mut self) -> Self {
        if let Some(first) = self.amps.iter().find(|a| a.norm() > 1e-9) {
            let rot = first.conj() / first.norm();
            for a in &mut self.amps {
                *a *= rot;
            }
        }
        self
    }

    /// Born-rule distribution of the joint outcome on `wires`. Outcome
    /// indices read `wires` in the given order, first wire most significant.
    pub fn probabilities(&self, wires: &[usize]) -> Result<Vec<f64>> {
        check_wires(wires, self.n)?;
        let mut probs = vec![0.0; self.d.pow(wires.len() as u32)];
        for (index, a) in self.amps.iter().enumerate() {
            probs[self.outcome_of(index, wires)] += a.norm_sqr();
        }
        Ok(probs)
    }

    /// Outcome index of basis state `index` restricted to `wires`.
    pub(crate) fn outcome_of(&self, index: usize, wires: &[usize]) -> usize {
        wires.iter().fold(0, |acc, &w| {
            acc * self.d + (index / stride(self.d, self.n, w)) % self.d
        })
    }

    /// Projects `wires` onto `outcome` and renormalizes, keeping all wires.
    pub fn collapse(&self, wires: &[usize], outcome: usize) -> Result<StateVector> {
        check_wires(wires, self.n)?;
        let bound = self.d.pow(wires.len() as u32);
        if outcome >= bound {
            return Err(Error::OutOfRange {
                value: outcome,
                bound,
            });
        }
        let amps: Vec<Complex64> = self
            .amps
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                if self.outcome_of(i, wires) == outcome {
                    a
                } else {
                    ZERO
                }
            })
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self::from_parts(self.d, self.n, amps).scaled(1.0 / norm))
    }

    /// Projects `wires` onto `outcome` and removes them from the register.
    pub fn measure_out(&self, wires: &[usize], outcome: usize) -> Result<StateVector> {
        let collapsed = self.collapse(wires, outcome)?;
        if wires.len() == self.n {
            return Err(Error::InvalidWires {
                wires: wires.to_vec(),
                wire_count: self.n,
            });
        }
        let rest: Vec<usize> = (0..self.n).filter(|w| !wires.contains(w)).collect();
        let amps = collapsed
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| collapsed.outcome_of(*i, wires) == outcome)
            .map(|(_, &a)| a)
            .collect();
        Ok(Self::from_parts(self.d, rest.len(), amps))
    }

    /// Splits the register into `(leading, trailing)` where `trailing` holds
    /// the last `trailing_wires` wires. Fails when the two parts are
    /// entangled beyond [`FACTOR_TOL`]. The leading factor carries the
    /// canonical global phase.
    pub fn split_product(&self, trailing_wires: usize) -> Result<(StateVector, StateVector)> {
        if trailing_wires == 0 || trailing_wires >= self.n {
            return Err(Error::InvalidWires {
                wires: (self.n.saturating_sub(trailing_wires)..self.n).collect(),
                wire_count: self.n,
            });
        }
        let cols = self.d.pow(trailing_wires as u32);
        let rows = self.len() / cols;
        let at = |r: usize, c: usize| self.amps[r * cols + c];

        let best_col = (0..cols)
            .max_by(|&a, &b| {
                let na: f64 = (0..rows).map(|r| at(r, a).norm_sqr()).sum();
                let nb: f64 = (0..rows).map(|r| at(r, b).norm_sqr()).sum();
                na.total_cmp(&nb)
            })
            .unwrap_or(0);
        let lead_raw: Vec<Complex64> = (0..rows).map(|r| at(r, best_col)).collect();
        let lead = Self::from_parts(self.d, self.n - trailing_wires, lead_raw)
            .normalized_or_zero()
            .canonical_phase();
        let trail: Vec<Complex64> = (0..cols)
            .map(|c| (0..rows).map(|r| lead.amps[r].conj() * at(r, c)).sum())
            .collect();
        let weight: f64 = trail.iter().map(|a| a.norm_sqr()).sum();
        if weight < 1.0 - FACTOR_TOL {
            return Err(Error::NotFactorizable {
                schmidt_weight: schmidt_weights(self, trailing_wires)
                    .first()
                    .copied()
                    .unwrap_or(weight),
            });
        }
        let trail = Self::from_parts(self.d, trailing_wires, trail).scaled(1.0 / weight.sqrt());
        Ok((lead, trail))
    }

    fn normalized_or_zero(self) -> Self {
        let norm = self.norm_sqr().sqrt();
        if norm > 0.0 {
            self.scaled(1.0 / norm)
        } else {
            self
        }
    }
}

/// Squared Schmidt coefficients (descending) across the cut that separates
/// the last `trailing_wires` wires from the rest.
pub fn schmidt_weights(state: &StateVector, trailing_wires: usize) -> Vec<f64> {
    let cols = state.d.pow(trailing_wires.min(state.n) as u32);
    let rows = state.len() / cols;
    let m = nalgebra::DMatrix::from_fn(rows, cols, |r, c| state.amps[r * cols + c]);
    let mut weights: Vec<f64> = m.singular_values().iter().map(|s| s * s).collect();
    weights.sort_by(|a, b| b.total_cmp(a));
    weights
}

/// Square complex matrix, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::LengthMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        Ok(Self { dim, entries })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub(crate) fn get_mut(&mut self, row: usize, col: usize) -> &mut Complex64 {
        &mut self.entries[row * self.dim + col]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// `tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        let mut acc = ZERO;
        for i in 0..self.dim {
            for j in 0..self.dim {
                acc += self.get(i, j) * self.get(j, i);
            }
        }
        acc.re
    }

    pub fn adjoint(&self) -> DensityMatrix {
        let dim = self.dim;
        let mut out = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                out.entries[j * dim + i] = self.get(i, j).conj();
            }
        }
        out
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (0..self.dim)
            .all(|i| (0..self.dim).all(|j| (self.get(i, j) - self.get(j, i).conj()).norm() <= tol))
    }

    /// Largest element-wise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> Result<f64> {
        self.check_same_dim(other)?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub(crate) fn check_same_dim(&self, other: &DensityMatrix) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{} matrices",
                self.dim, self.dim, other.dim, other.dim
            )));
        }
        Ok(())
    }

    pub fn matmul(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        self.check_same_dim(other)?;
        let dim = self.dim;
        let mut out = Self::zeros(dim);
        for i in 0..dim {
            for k in 0..dim {
                let a = self.get(i, k);
                if a == ZERO {
                    continue;
                }
                for j in 0..dim {
                    out.entries[i * dim + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    /// Reduced matrix on `keep` (in the given order) of an `n`-wire,
    /// dimension-`d` register.
    pub fn partial_trace(&self, keep: &[usize], d: usize, n: usize) -> Result<DensityMatrix> {
        check_wires(keep, n)?;
        if register_dim(d, n) != Some(self.dim) {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix is not a {d}^{n} register",
                self.dim, self.dim
            )));
        }
        let traced: Vec<usize> = (0..n).filter(|w| !keep.contains(w)).collect();
        let kept_dim = d.pow(keep.len() as u32);
        let traced_dim = d.pow(traced.len() as u32);

        // Full index = kept offset + traced offset.
        let offsets = |wires: &[usize], count: usize| -> Vec<usize> {
            (0..count)
                .map(|k| {
                    digits_of(k, d, wires.len())
                        .iter()
                        .zip(wires)
                        .map(|(&digit, &w)| digit * stride(d, n, w))
                        .sum()
                })
                .collect()
        };
        let kept_off = offsets(keep, kept_dim);
        let traced_off = offsets(&traced, traced_dim);

        let mut out = Self::zeros(kept_dim);
        for (i, &ri) in kept_off.iter().enumerate() {
            for (j, &rj) in kept_off.iter().enumerate() {
                out.entries[i * kept_dim + j] =
                    traced_off.iter().map(|&t| self.get(ri + t, rj + t)).sum();
            }
        }
        Ok(out)
    }

    /// Recovers `|ψ⟩` (canonical phase) when the matrix is a pure state
    /// within [`FACTOR_TOL`].
    pub fn as_pure_state(&self, d: usize, n: usize) -> Option<StateVector> {
        if (self.purity() - 1.0).abs() > FACTOR_TOL || (self.trace().re - 1.0).abs() > FACTOR_TOL {
            return None;
        }
        let k = (0..self.dim).max_by(|&a, &b| self.get(a, a).re.total_cmp(&self.get(b, b).re))?;
        let scale = self.get(k, k).re.sqrt();
        let amps = (0..self.dim).map(|i| self.get(i, k) / scale).collect();
        StateVector::new_renormalized(d, n, amps)
            .ok()
            .map(StateVector::canonical_phase)
    }
}

/// Serializes as `{"d": d, "n": n, "re": [..], "im": [..]}`.
impl Serialize for StateVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("StateVector", 4)?;
        s.serialize_field("d", &self.d)?;
        s.serialize_field("n", &self.n)?;
        s.serialize_field("re", &self.amps.iter().map(|z| z.re).collect::<Vec<_>>())?;
        s.serialize_field("im", &self.amps.iter().map(|z| z.im).collect::<Vec<_>>())?;
        s.end()
    }
}

/// Serializes as `{"dim": N, "re": [[..]], "im": [[..]]}`, row-major.
impl Serialize for DensityMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows = |part: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            self.entries
                .chunks(self.dim)
                .map(|row| row.iter().map(part).collect())
                .collect()
        };
        let mut s = serializer.serialize_struct("DensityMatrix", 3)?;
        s.serialize_field("dim", &self.dim)?;
        s.serialize_field("re", &rows(|z| z.re))?;
        s.serialize_field("im", &rows(|z| z.im))?;
        s.end()
    }
}
