//! Dimensioned config values: `"<number> <unit>"` strings converted to SI
//! (angular units for frequencies). Bare numbers are rejected.

use std::f64::consts::PI;
use std::fmt;
use std::marker::PhantomData;

use nanofock::constants::{AMU, POLARIZABILITY_PER_LENGTH_UNIT};
use serde::de::{self, Deserializer, Visitor};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    InverseLength,
    Frequency,
    Temperature,
    Power,
    Speed,
    Mass,
    LinearDensity,
    Conductance,
    Angle,
    Polarizability,
    ElectricField,
    Stiffness,
}

const TWO_PI: f64 = 2.0 * PI;

impl Dimension {
    pub fn name(self) -> &'static str {
        match self {
            Self::Length => "length",
            Self::InverseLength => "inverse length",
            Self::Frequency => "frequency",
            Self::Temperature => "temperature",
            Self::Power => "power",
            Self::Speed => "speed",
            Self::Mass => "mass",
            Self::LinearDensity => "mass per length",
            Self::Conductance => "sheet conductance",
            Self::Angle => "angle",
            Self::Polarizability => "polarizability per length",
            Self::ElectricField => "electric field",
            Self::Stiffness => "force per length",
        }
    }

    /// Accepted unit spellings and their factor to the internal unit.
    pub fn units(self) -> &'static [(&'static str, f64)] {
        match self {
            Self::Length => &[
                ("m", 1.0),
                ("cm", 1e-2),
                ("mm", 1e-3),
                ("um", 1e-6),
                ("µm", 1e-6),
                ("μm", 1e-6),
                ("nm", 1e-9),
                ("pm", 1e-12),
                ("A", 1e-10),
                ("Å", 1e-10),
            ],
            Self::InverseLength => &[("1/m", 1.0), ("1/um", 1e6), ("1/µm", 1e6), ("1/nm", 1e9)],
            Self::Frequency => &[
                ("Hz", TWO_PI),
                ("kHz", TWO_PI * 1e3),
                ("MHz", TWO_PI * 1e6),
                ("GHz", TWO_PI * 1e9),
                ("THz", TWO_PI * 1e12),
                ("rad/s", 1.0),
                ("krad/s", 1e3),
                ("Mrad/s", 1e6),
            ],
            Self::Temperature => &[("K", 1.0), ("mK", 1e-3), ("uK", 1e-6), ("µK", 1e-6), ("μK", 1e-6)],
            Self::Power => &[("W", 1.0), ("mW", 1e-3), ("uW", 1e-6), ("µW", 1e-6), ("μW", 1e-6), ("nW", 1e-9)],
            Self::Speed => &[("m/s", 1.0), ("km/s", 1e3)],
            Self::Mass => &[("kg", 1.0), ("g", 1e-3), ("amu", AMU), ("u", AMU)],
            Self::LinearDensity => &[("kg/m", 1.0), ("amu/nm", AMU * 1e9)],
            Self::Conductance => &[("S", 1.0), ("mS", 1e-3), ("uS", 1e-6), ("µS", 1e-6)],
            Self::Angle => &[("rad", 1.0), ("mrad", 1e-3), ("deg", PI / 180.0), ("°", PI / 180.0)],
            Self::Polarizability => &[
                ("F*m", 1.0),
                ("F·m", 1.0),
                ("F m", 1.0),
                ("4pi eps0 A^2", POLARIZABILITY_PER_LENGTH_UNIT),
                ("4πε₀Å²", POLARIZABILITY_PER_LENGTH_UNIT),
                ("4pi eps0 A^3/A", POLARIZABILITY_PER_LENGTH_UNIT),
            ],
            Self::ElectricField => &[("V/m", 1.0), ("kV/m", 1e3), ("MV/m", 1e6), ("V/um", 1e6), ("V/µm", 1e6), ("V/nm", 1e9)],
            Self::Stiffness => &[("N/m", 1.0), ("mN/m", 1e-3), ("uN/m", 1e-6), ("µN/m", 1e-6), ("nN/m", 1e-9), ("pN/m", 1e-12)],
        }
    }

    fn spellings(self) -> String {
        self.units().iter().map(|(u, _)| *u).collect::<Vec<_>>().join(", ")
    }
}

/// Splits `"5.23 MHz"` (or `"5.23MHz"`) into number and unit.
pub fn split_quantity(text: &str) -> Option<(f64, &str)> {
    let t = text.trim();
    if let Some((num, unit)) = t.split_once(char::is_whitespace) {
        if let Ok(v) = num.parse::<f64>() {
            return Some((v, unit.trim()));
        }
    }
    t.char_indices()
        .rev()
        .filter(|&(i, _)| i > 0)
        .find_map(|(i, _)| t[..i].parse::<f64>().ok().map(|v| (v, t[i..].trim())))
        .filter(|(_, unit)| !unit.is_empty())
}

pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64, String> {
    let (value, unit) = split_quantity(text)
        .ok_or_else(|| format!("expected a {} like \"<number> <unit>\", got \"{text}\"", dim.name()))?;
    if !value.is_finite() {
        return Err(format!("value in \"{text}\" is not finite"));
    }
    let factor = dim
        .units()
        .iter()
        .find(|(u, _)| *u == unit)
        .map(|&(_, f)| f)
        .ok_or_else(|| format!("unknown {} unit \"{unit}\" (accepted: {})", dim.name(), dim.spellings()))?;
    Ok(value * factor)
}

struct QuantityVisitor {
    dim: Dimension,
}

impl<'de> Visitor<'de> for QuantityVisitor {
    type Value = f64;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "a {} string with a unit suffix", self.dim.name())
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
        parse_quantity(v, self.dim).map_err(E::custom)
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
        Err(E::custom(format!(
            "bare number {v} is ambiguous for a {}; add a unit (accepted: {})",
            self.dim.name(),
            self.dim.spellings()
        )))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
        self.visit_f64(v as f64)
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
        self.visit_f64(v as f64)
    }
}

pub trait Unit {
    const DIMENSION: Dimension;
}

/// An SI value that was written with an explicit unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantity<U> {
    pub value: f64,
    unit: PhantomData<U>,
}

impl<U> Quantity<U> {
    pub fn new(value: f64) -> Self {
        Self {
            value,
            unit: PhantomData,
        }
    }
}

impl<'de, U: Unit> Deserialize<'de> for Quantity<U> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        d.deserialize_any(QuantityVisitor { dim: U::DIMENSION }).map(Self::new)
    }
}

macro_rules! units {
    ($($marker:ident => $alias:ident: $dim:ident),* $(,)?) => {
        $(
            #[derive(Debug, Clone, Copy, PartialEq)]
            pub struct $marker;
            impl Unit for $marker {
                const DIMENSION: Dimension = Dimension::$dim;
            }
            pub type $alias = Quantity<$marker>;
        )*
    };
}

units! {
    LengthUnit => Length: Length,
    InverseLengthUnit => InverseLength: InverseLength,
    FrequencyUnit => Frequency: Frequency,
    TemperatureUnit => Temperature: Temperature,
    PowerUnit => Power: Power,
    SpeedUnit => Speed: Speed,
    MassUnit => Mass: Mass,
    LinearDensityUnit => LinearDensity: LinearDensity,
    ConductanceUnit => Conductance: Conductance,
    AngleUnit => Angle: Angle,
    PolarizabilityUnit => Polarizability: Polarizability,
    ElectricFieldUnit => ElectricField: ElectricField,
    StiffnessUnit => Stiffness: Stiffness,
}
