use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Detuning `Δ = ω_L − ω_c` of a laser from its cavity mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Detuning {
    /// Fixed value in rad/s.
    Absolute(f64),
    /// `sign·δ_n`, resolved once ω_m′ and λ are known.
    Sideband { sign: i8, n: usize },
}

impl Detuning {
    /// Parses `"+delta_1"`, `"-delta_3"`, `"+δ2"` and similar.
    pub fn parse_symbolic(s: &str) -> Result<Self> {
        let t = s.trim();
        let (sign, rest) = match t.chars().next() {
            Some('+') => (1, &t[1..]),
            Some('-') => (-1, &t[1..]),
            Some('−') => (-1, &t['−'.len_utf8()..]),
            _ => return Err(Error::InvalidArgument(format!("symbolic detuning '{s}' needs a leading sign"))),
        };
        let rest = rest.trim();
        let digits = rest
            .strip_prefix("delta")
            .or_else(|| rest.strip_prefix("δ"))
            .map(|r| r.trim_start_matches('_'))
            .ok_or_else(|| Error::InvalidArgument(format!("symbolic detuning '{s}' must look like '+delta_1'")))?;
        let n: usize = digits
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad level index in symbolic detuning '{s}'")))?;
        if n == 0 {
            return Err(Error::InvalidArgument("sideband level index starts at 1".into()));
        }
        Ok(Self::Sideband { sign, n })
    }

    /// Resolves against the transition frequencies `δ_n`.
    pub fn resolve(&self, delta: impl Fn(usize) -> f64) -> f64 {
        match *self {
            Self::Absolute(d) => d,
            Self::Sideband { sign, n } => f64::from(sign) * delta(n),
        }
    }
}

/// How strongly a laser drives its cavity mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveStrength {
    /// Launched power in W.
    Power(f64),
    /// Target enhanced coupling |g| in rad/s.
    Coupling(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaserSpec {
    pub detuning: Detuning,
    pub strength: DriveStrength,
}

impl LaserSpec {
    pub fn validate(&self) -> Result<()> {
        match self.strength {
            DriveStrength::Power(p) | DriveStrength::Coupling(p) if !(p >= 0.0) || !p.is_finite() => Err(
                Error::InvalidArgument(format!("drive strength must be non-negative, got {p}")),
            ),
            _ => Ok(()),
        }?;
        match self.detuning {
            Detuning::Absolute(d) if !d.is_finite() => {
                Err(Error::InvalidArgument("detuning must be finite".into()))
            }
            Detuning::Sideband { sign, .. } if sign != 1 && sign != -1 => {
                Err(Error::InvalidArgument(format!("sideband sign must be ±1, got {sign}")))
            }
            Detuning::Sideband { n: 0, .. } => Err(Error::InvalidArgument("sideband level index starts at 1".into())),
            _ => Ok(()),
        }
    }
}

/// Cooling/heating lasers and an optional weak probe.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec {
    pub lasers: Vec<LaserSpec>,
    #[serde(default)]
    pub probe: Option<LaserSpec>,
}

impl DriveSpec {
    pub fn validate(&self) -> Result<()> {
        self.lasers.iter().chain(self.probe.as_ref()).try_for_each(LaserSpec::validate)
    }
}
