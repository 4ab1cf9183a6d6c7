use serde::{Deserialize, Serialize};

use crate::device::DerivedParams;
use crate::fock::{CompositeSpace, FockSpace};
use crate::{Error, Result};

pub const DEFAULT_MECH_TRUNCATION: usize = 10;
pub const DEFAULT_CAVITY_TRUNCATION: usize = 2;

/// Mode structure and parameters of one master-equation model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub mech_truncation: usize,
    /// One entry per driving laser, in laser order.
    pub cavity_truncations: Vec<usize>,
    pub derived: DerivedParams,
    #[serde(default)]
    pub include_reduced_shifts: bool,
}

impl SystemConfig {
    /// Default truncations for every laser of `derived`.
    pub fn new(derived: DerivedParams, mech_truncation: usize) -> Result<Self> {
        let cavity_truncations = vec![DEFAULT_CAVITY_TRUNCATION; derived.lasers.len()];
        Self::with_cavities(derived, mech_truncation, cavity_truncations)
    }

    pub fn with_cavities(derived: DerivedParams, mech_truncation: usize, cavity_truncations: Vec<usize>) -> Result<Self> {
        let config = Self {
            mech_truncation,
            cavity_truncations,
            derived,
            include_reduced_shifts: false,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mech_truncation < 3 {
            return Err(Error::Truncation(format!(
                "mechanical truncation must be at least 3, got {}",
                self.mech_truncation
            )));
        }
        if let Some(&d) = self.cavity_truncations.iter().find(|&&d| d < 2) {
            return Err(Error::Truncation(format!("cavity truncation must be at least 2, got {d}")));
        }
        if self.cavity_truncations.len() != self.derived.lasers.len() {
            return Err(Error::DimensionMismatch {
                expected: self.derived.lasers.len(),
                found: self.cavity_truncations.len(),
            });
        }
        self.derived.validate()
    }

    pub fn mech_space(&self) -> FockSpace {
        FockSpace::new(self.mech_truncation, "mech").expect("validated truncation")
    }

    /// `mech ⊗ cav1 ⊗ cav2 ⊗ …`
    pub fn space(&self) -> CompositeSpace {
        let mut factors = vec![self.mech_space()];
        factors.extend(
            self.cavity_truncations
                .iter()
                .enumerate()
                .map(|(j, &d)| FockSpace::new(d, format!("cav{}", j + 1)).expect("validated truncation")),
        );
        CompositeSpace::new(factors).expect("labels are unique")
    }
}
