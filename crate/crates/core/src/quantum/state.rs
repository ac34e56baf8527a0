use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{QuantumError, NORM_TOLERANCE};

/// What a tensor factor stands for.
///
/// Memory registers carry a readiness flag: the ready state `|r⟩` shares its
/// basis index with the record of the first outcome, so readiness cannot be
/// read off the amplitudes alone and is tracked here instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorRole {
    System,
    Memory { ready: bool },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factor {
    label: String,
    dim: usize,
    role: FactorRole,
}

impl Factor {
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn role(&self) -> FactorRole {
        self.role
    }
}

/// A pure state over a labeled tensor product of small factors.
///
/// Amplitudes are stored row-major: the first factor is the most significant
/// digit of the basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    factors: Vec<Factor>,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Builds a single-factor system state. The amplitudes must be normalized.
    pub fn system(label: &str, amplitudes: Vec<Complex64>) -> Result<Self, QuantumError> {
        let factor = Factor {
            label: label.to_owned(),
            dim: amplitudes.len(),
            role: FactorRole::System,
        };
        Self::from_parts(vec![factor], amplitudes)
    }

    /// A possibly entangled state over several system factors.
    pub fn systems(factors: &[(&str, usize)], amplitudes: Vec<Complex64>) -> Result<Self, QuantumError> {
        let mut built: Vec<Factor> = Vec::with_capacity(factors.len());
        for &(label, dim) in factors {
            if built.iter().any(|f| f.label == label) {
                return Err(QuantumError::DuplicateFactor(label.to_owned()));
            }
            built.push(Factor {
                label: label.to_owned(),
                dim,
                role: FactorRole::System,
            });
        }
        Self::from_parts(built, amplitudes)
    }

    /// Computational basis state `|index⟩` of a system factor.
    pub fn basis(label: &str, dim: usize, index: usize) -> Result<Self, QuantumError> {
        if index >= dim {
            return Err(QuantumError::IndexOutOfRange { index, dim });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self::system(label, amplitudes)
    }

    /// A memory register of dimension `dim` in its ready state.
    pub fn ready_register(label: &str, dim: usize) -> Result<Self, QuantumError> {
        if dim < 2 {
            return Err(QuantumError::InvalidDimension(dim));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        let factor = Factor {
            label: label.to_owned(),
            dim,
            role: FactorRole::Memory { ready: true },
        };
        Self::from_parts(vec![factor], amplitudes)
    }

    fn from_parts(factors: Vec<Factor>, amplitudes: Vec<Complex64>) -> Result<Self, QuantumError> {
        if factors.iter().any(|f| f.dim == 0) {
            return Err(QuantumError::InvalidDimension(0));
        }
        let expected: usize = factors.iter().map(|f| f.dim).product();
        if expected != amplitudes.len() {
            return Err(QuantumError::DimensionMismatch {
                expected,
                found: amplitudes.len(),
            });
        }
        let state = StateVector { factors, amplitudes };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(QuantumError::NotNormalized(norm));
        }
        Ok(state)
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.dim).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn factor_position(&self, label: &str) -> Option<usize> {
        self.factors.iter().position(|f| f.label == label)
    }

    pub(crate) fn require_position(&self, label: &str) -> Result<usize, QuantumError> {
        self.factor_position(label)
            .ok_or_else(|| QuantumError::UnknownFactor(label.to_owned()))
    }

    /// Amplitude at a multi-index given in factor order.
    pub fn amplitude(&self, index: &[usize]) -> Complex64 {
        assert_eq!(index.len(), self.factors.len(), "index rank must match factor count");
        let flat = index.iter().zip(&self.factors).fold(0, |acc, (&i, f)| {
            assert!(i < f.dim, "digit out of range for factor {}", f.label);
            acc * f.dim + i
        });
        self.amplitudes[flat]
    }

    /// Amplitude addressed by factor labels. Every factor must be named.
    pub fn amplitude_by_label(&self, index: &[(&str, usize)]) -> Result<Complex64, QuantumError> {
        if index.len() != self.factors.len() {
            return Err(QuantumError::DimensionMismatch {
                expected: self.factors.len(),
                found: index.len(),
            });
        }
        let mut digits = vec![0; self.factors.len()];
        for &(label, digit) in index {
            let pos = self.require_position(label)?;
            if digit >= self.factors[pos].dim {
                return Err(QuantumError::IndexOutOfRange {
                    index: digit,
                    dim: self.factors[pos].dim,
                });
            }
            digits[pos] = digit;
        }
        Ok(self.amplitude(&digits))
    }

    /// Inner product `⟨self|other⟩`; both states must share the factor layout.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64, QuantumError> {
        if self.dims() != other.dims() {
            return Err(QuantumError::DimensionMismatch {
                expected: self.amplitudes.len(),
                found: other.amplitudes.len(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub(crate) fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.factors.len()];
        for k in (0..self.factors.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.factors[k + 1].dim;
        }
        strides
    }

    /// Applies `op` to the factors at `targets` (in that order) and returns the
    /// resulting amplitudes without renormalizing.
    pub(crate) fn apply_local(&self, targets: &[usize], op: &DMatrix<Complex64>) -> Vec<Complex64> {
        let strides = self.strides();
        let sub_dims: Vec<usize> = targets.iter().map(|&t| self.factors[t].dim).collect();
        let sub_size: usize = sub_dims.iter().product();
        debug_assert_eq!(op.nrows(), sub_size);

        // offset of each local basis index inside the full index space
        let offsets: Vec<usize> = (0..sub_size)
            .map(|mut s| {
                let mut offset = 0;
                for (k, &t) in targets.iter().enumerate().rev() {
                    offset += (s % sub_dims[k]) * strides[t];
                    s /= sub_dims[k];
                }
                offset
            })
            .collect();

        let mut out = vec![Complex64::new(0.0, 0.0); self.amplitudes.len()];
        for (i, slot) in out.iter_mut().enumerate() {
            let mut local = 0;
            let mut covered = 0;
            for &t in targets {
                let digit = (i / strides[t]) % self.factors[t].dim;
                local = local * self.factors[t].dim + digit;
                covered += digit * strides[t];
            }
            let base = i - covered;
            *slot = offsets
                .iter()
                .enumerate()
                .map(|(col, &off)| op[(local, col)] * self.amplitudes[base + off])
                .sum();
        }
        out
    }

    pub(crate) fn with_amplitudes(&self, amplitudes: Vec<Complex64>) -> StateVector {
        StateVector {
            factors: self.factors.clone(),
            amplitudes,
        }
    }

    pub(crate) fn set_role(&mut self, position: usize, role: FactorRole) {
        self.factors[position].role = role;
    }

    pub(crate) fn tensor_unchecked(&self, right: &StateVector) -> Result<StateVector, QuantumError> {
        for f in &right.factors {
            if self.factor_position(&f.label).is_some() {
                return Err(QuantumError::DuplicateFactor(f.label.clone()));
            }
        }
        let mut factors = self.factors.clone();
        factors.extend(right.factors.iter().cloned());
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|l| right.amplitudes.iter().map(move |r| l * r))
            .collect();
        Ok(StateVector { factors, amplitudes })
    }
}
