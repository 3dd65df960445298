//! Observation sequences: counts or fixed-dimension real vectors.

use crate::error::{Error, Result};

/// An ordered sequence of observations of a single kind.
#[derive(Debug, Clone, PartialEq)]
pub enum ObservationSequence {
    Counts(Vec<u64>),
    /// Row-major `len × dim` values.
    Real { dim: usize, values: Vec<f64> },
}

impl ObservationSequence {
    pub fn counts(values: Vec<u64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::SequenceTooShort { n: 0, min: 1 });
        }
        Ok(Self::Counts(values))
    }

    pub fn real(dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        if values.is_empty() {
            return Err(Error::SequenceTooShort { n: 0, min: 1 });
        }
        if values.len() % dim != 0 {
            return Err(Error::DimensionMismatch(format!(
                "{} values do not divide into rows of dimension {dim}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite value at row {}", bad / dim)));
        }
        Ok(Self::Real { dim, values })
    }

    /// Scalar real observations (`dim = 1`).
    pub fn scalars(values: Vec<f64>) -> Result<Self> {
        Self::real(1, values)
    }

    pub fn len(&self) -> usize {
        match self {
            Self::Counts(v) => v.len(),
            Self::Real { dim, values } => values.len() / dim,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Counts(_) => 1,
            Self::Real { dim, .. } => *dim,
        }
    }

    pub fn as_counts(&self) -> Option<&[u64]> {
        match self {
            Self::Counts(v) => Some(v),
            Self::Real { .. } => None,
        }
    }

    /// Row `i` as real coordinates; counts are widened to `f64`.
    pub fn row(&self, i: usize) -> RowRef<'_> {
        match self {
            Self::Counts(v) => RowRef::Count(v[i] as f64),
            Self::Real { dim, values } => RowRef::Slice(&values[i * dim..(i + 1) * dim]),
        }
    }

    /// Values as a flat row-major real matrix (counts widened).
    pub fn to_real_rows(&self) -> (usize, Vec<f64>) {
        match self {
            Self::Counts(v) => (1, v.iter().map(|&c| c as f64).collect()),
            Self::Real { dim, values } => (*dim, values.clone()),
        }
    }

    /// Sub-sequence `[start, start + len)`.
    pub fn window(&self, start: usize, len: usize) -> Self {
        match self {
            Self::Counts(v) => Self::Counts(v[start..start + len].to_vec()),
            Self::Real { dim, values } => Self::Real {
                dim: *dim,
                values: values[start * dim..(start + len) * dim].to_vec(),
            },
        }
    }

    /// Scalar ordering key used for quantile banding (first coordinate).
    pub(crate) fn sort_key(&self, i: usize) -> f64 {
        match self {
            Self::Counts(v) => v[i] as f64,
            Self::Real { dim, values } => values[i * dim],
        }
    }
}

/// Borrowed view of a single observation.
#[derive(Debug, Clone, Copy)]
pub enum RowRef<'a> {
    Count(f64),
    Slice(&'a [f64]),
}

impl RowRef<'_> {
    pub fn coord(&self, d: usize) -> f64 {
        match self {
            RowRef::Count(c) => {
                debug_assert_eq!(d, 0);
                *c
            }
            RowRef::Slice(s) => s[d],
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            RowRef::Count(_) => 1,
            RowRef::Slice(s) => s.len(),
        }
    }
}
