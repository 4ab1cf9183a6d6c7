use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A single bosonic mode truncated to the states `|0⟩ … |dim−1⟩`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FockSpace {
    dim: usize,
    label: String,
}

impl FockSpace {
    pub fn new(dim: usize, label: impl Into<String>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidArgument(format!(
                "Fock space dimension must be at least 2, got {dim}"
            )));
        }
        Ok(Self {
            dim,
            label: label.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Display for FockSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.label, self.dim)
    }
}

/// Ordered tensor product of Fock spaces.
///
/// Basis states are ordered lexicographically with the first factor
/// varying slowest: the index of `|n₀, n₁, …⟩` is
/// `n₀·(d₁d₂…) + n₁·(d₂…) + …`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CompositeSpace {
    factors: Vec<FockSpace>,
}

impl CompositeSpace {
    pub fn new(factors: Vec<FockSpace>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidArgument(
                "a composite space needs at least one factor".into(),
            ));
        }
        for (i, a) in factors.iter().enumerate() {
            if factors[i + 1..].iter().any(|b| b.label == a.label) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate factor label '{}'",
                    a.label
                )));
            }
        }
        Ok(Self { factors })
    }

    pub fn factors(&self) -> &[FockSpace] {
        &self.factors
    }

    pub fn factor(&self, slot: usize) -> Result<&FockSpace> {
        self.factors.get(slot).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "slot {slot} out of range for {} factors",
                self.factors.len()
            ))
        })
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(FockSpace::dim).product()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(FockSpace::dim).collect()
    }

    /// Slot index of the factor with the given label.
    pub fn slot_of(&self, label: &str) -> Option<usize> {
        self.factors.iter().position(|f| f.label == label)
    }

    /// Number of basis states spanned by the factors after `slot`.
    pub fn stride(&self, slot: usize) -> usize {
        self.factors[slot + 1..].iter().map(FockSpace::dim).product()
    }

    /// Occupation tuple of a flat basis index.
    pub fn unflatten(&self, mut index: usize) -> Vec<usize> {
        let mut occ = vec![0; self.factors.len()];
        for (slot, f) in self.factors.iter().enumerate().rev() {
            occ[slot] = index % f.dim;
            index /= f.dim;
        }
        occ
    }

    pub fn flatten(&self, occupations: &[usize]) -> usize {
        occupations
            .iter()
            .zip(&self.factors)
            .fold(0, |acc, (&n, f)| acc * f.dim + n)
    }
}

impl From<FockSpace> for CompositeSpace {
    fn from(space: FockSpace) -> Self {
        Self {
            factors: vec![space],
        }
    }
}

impl fmt::Display for CompositeSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, " ⊗ ")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}
