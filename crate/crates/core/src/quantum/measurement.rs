use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{QuantumError, NORM_TOLERANCE};

/// Label given to the projector that completes a measurement to the identity.
pub const REMAINDER_LABEL: &str = "perp";

/// An orthogonal projector acting on an ordered list of factors.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    factors: Vec<String>,
    dims: Vec<usize>,
    matrix: DMatrix<Complex64>,
}

impl Projector {
    pub fn new(factors: Vec<(String, usize)>, matrix: DMatrix<Complex64>) -> Result<Self, QuantumError> {
        let (labels, dims) = split_factors(factors)?;
        let size: usize = dims.iter().product();
        if matrix.nrows() != size || matrix.ncols() != size {
            return Err(QuantumError::DimensionMismatch {
                expected: size,
                found: matrix.nrows(),
            });
        }
        let projector = Projector {
            factors: labels,
            dims,
            matrix,
        };
        projector.check_projector()?;
        Ok(projector)
    }

    /// `|v⟩⟨v|` for a normalized vector `v`.
    pub fn rank_one(factors: Vec<(String, usize)>, vector: &DVector<Complex64>) -> Result<Self, QuantumError> {
        let norm = vector.norm_squared();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(QuantumError::NotNormalized(norm));
        }
        Self::new(factors, vector * vector.adjoint())
    }

    /// `|index⟩⟨index|` on a single factor.
    pub fn basis_state(label: &str, dim: usize, index: usize) -> Result<Self, QuantumError> {
        if index >= dim {
            return Err(QuantumError::IndexOutOfRange { index, dim });
        }
        let mut matrix = DMatrix::zeros(dim, dim);
        matrix[(index, index)] = Complex64::new(1.0, 0.0);
        Self::new(vec![(label.to_owned(), dim)], matrix)
    }

    pub fn identity(factors: Vec<(String, usize)>) -> Result<Self, QuantumError> {
        let size = factors.iter().map(|(_, d)| d).product();
        Self::new(factors, DMatrix::identity(size, size))
    }

    pub fn factors(&self) -> &[String] {
        &self.factors
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Trace, i.e. the rank of the projector up to rounding.
    pub fn rank(&self) -> usize {
        self.matrix.trace().re.round().max(0.0) as usize
    }

    fn check_projector(&self) -> Result<(), QuantumError> {
        let adjoint_gap = max_abs(&(&self.matrix - self.matrix.adjoint()));
        if adjoint_gap > NORM_TOLERANCE {
            return Err(QuantumError::NotAProjector(format!(
                "not Hermitian (deviation {adjoint_gap:e})"
            )));
        }
        let idempotent_gap = max_abs(&(&self.matrix * &self.matrix - &self.matrix));
        if idempotent_gap > NORM_TOLERANCE {
            return Err(QuantumError::NotAProjector(format!(
                "not idempotent (deviation {idempotent_gap:e})"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub label: String,
    pub projector: Projector,
}

/// A complete projective measurement: labeled outcomes plus the remainder
/// projector `1 - Σ Πₖ`, which is always present even when it is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveMeasurement {
    outcomes: Vec<Outcome>,
    remainder: Outcome,
}

impl ProjectiveMeasurement {
    pub fn new(
        factors: Vec<(String, usize)>,
        outcomes: Vec<(String, DMatrix<Complex64>)>,
    ) -> Result<Self, QuantumError> {
        let mut built = Vec::with_capacity(outcomes.len());
        for (label, matrix) in outcomes {
            if label == REMAINDER_LABEL || built.iter().any(|o: &Outcome| o.label == label) {
                return Err(QuantumError::DuplicateOutcome(label));
            }
            let projector = Projector::new(factors.clone(), matrix)?;
            built.push(Outcome { label, projector });
        }
        for (i, a) in built.iter().enumerate() {
            for b in &built[i + 1..] {
                let overlap = max_abs(&(a.projector.matrix() * b.projector.matrix()));
                if overlap > NORM_TOLERANCE {
                    return Err(QuantumError::NotAProjector(format!(
                        "outcomes {} and {} overlap ({overlap:e})",
                        a.label, b.label
                    )));
                }
            }
        }
        let size: usize = factors.iter().map(|(_, d)| d).product();
        let mut rest = DMatrix::<Complex64>::identity(size, size);
        for o in &built {
            rest -= o.projector.matrix();
        }
        // a remainder that fails the projector check means the outcomes overshoot the identity
        let remainder = Projector::new(factors, rest)?;
        Ok(ProjectiveMeasurement {
            outcomes: built,
            remainder: Outcome {
                label: REMAINDER_LABEL.to_owned(),
                projector: remainder,
            },
        })
    }

    /// Rank-one outcomes `|vₖ⟩⟨vₖ|` from orthonormal vectors.
    pub fn from_vectors(
        factors: Vec<(String, usize)>,
        vectors: Vec<(String, DVector<Complex64>)>,
    ) -> Result<Self, QuantumError> {
        let outcomes = vectors
            .into_iter()
            .map(|(label, v)| {
                let norm = v.norm_squared();
                if (norm - 1.0).abs() > NORM_TOLERANCE {
                    Err(QuantumError::NotNormalized(norm))
                } else {
                    Ok((label, &v * v.adjoint()))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(factors, outcomes)
    }

    /// Computational basis measurement of one factor, outcomes labeled `"0"`, `"1"`, ...
    pub fn computational(label: &str, dim: usize) -> Result<Self, QuantumError> {
        let outcomes = (0..dim)
            .map(|i| {
                let mut m = DMatrix::zeros(dim, dim);
                m[(i, i)] = Complex64::new(1.0, 0.0);
                (i.to_string(), m)
            })
            .collect();
        Self::new(vec![(label.to_owned(), dim)], outcomes)
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn remainder(&self) -> &Outcome {
        &self.remainder
    }

    /// Listed outcomes followed by the remainder.
    pub fn all_outcomes(&self) -> impl Iterator<Item = &Outcome> {
        self.outcomes.iter().chain(std::iter::once(&self.remainder))
    }

    pub fn projector(&self, label: &str) -> Option<&Projector> {
        self.all_outcomes().find(|o| o.label == label).map(|o| &o.projector)
    }

    pub fn factors(&self) -> &[String] {
        self.remainder.projector.factors()
    }

    pub fn dims(&self) -> &[usize] {
        self.remainder.projector.dims()
    }

    /// Number of memory records an observer needs to store every outcome.
    pub fn record_slots(&self) -> usize {
        self.outcomes.len() + usize::from(self.remainder.projector.rank() > 0)
    }
}

fn split_factors(factors: Vec<(String, usize)>) -> Result<(Vec<String>, Vec<usize>), QuantumError> {
    let mut labels: Vec<String> = Vec::with_capacity(factors.len());
    let mut dims = Vec::with_capacity(factors.len());
    for (label, dim) in factors {
        if dim == 0 {
            return Err(QuantumError::InvalidDimension(0));
        }
        if labels.contains(&label) {
            return Err(QuantumError::DuplicateFactor(label));
        }
        labels.push(label);
        dims.push(dim);
    }
    if labels.is_empty() {
        return Err(QuantumError::InvalidDimension(0));
    }
    Ok((labels, dims))
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
