//! Run configuration: one JSON file with device, simulation, output and
//! optional sweep sections.

use std::path::{Path, PathBuf};

use nanofock::device::{
    BeamSpec, CavitySpec, Detuning, DeviceSpec, DerivedParams, DriveSpec, DriveStrength, EffectiveSpec,
    ElectrodeSpec, FieldModel, GaussianLobe, LaserSpec, SofteningSpec, Thresholds,
};
use nanofock::liouvillian::SolveMethod;
use nanofock::observables::{SpectrumGrid, SpectrumOptions, WignerGrid};
use serde::de::{self, Deserializer};
use serde::Deserialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};
use crate::units::{
    parse_quantity, Angle, Conductance, Dimension, ElectricField, Frequency, InverseLength, Length,
    LinearDensity, Mass, Polarizability, Power, Speed, Stiffness, Temperature,
};

pub const SCHEMA: &str = include_str!("schema.json");
pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub device: DeviceSection,
    #[serde(default)]
    pub simulation: SimulationSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DeviceSection {
    Physical(PhysicalDevice),
    Effective(EffectiveDevice),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalDevice {
    pub beam: BeamSection,
    pub softening: SofteningSection,
    pub cavity: CavitySection,
    #[serde(default)]
    pub electrode: Option<ElectrodeSection>,
    pub optical_polarizability: Polarizability,
    pub temperature: Temperature,
    #[serde(default)]
    pub drives: Vec<DriveSection>,
    #[serde(default)]
    pub probe: Option<DriveSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffectiveDevice {
    pub omega_m: Frequency,
    pub lambda: Frequency,
    pub kappa: Frequency,
    pub quality_factor: f64,
    pub temperature: Temperature,
    #[serde(default)]
    pub drives: Vec<DriveSection>,
    #[serde(default)]
    pub probe: Option<DriveSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamSection {
    pub length: Length,
    /// Tube radius; `κ̃ = R/√2`. Exclusive with `kappa_tilde`.
    #[serde(default)]
    pub radius: Option<Length>,
    #[serde(default)]
    pub kappa_tilde: Option<Length>,
    pub sound_speed: Speed,
    pub quality_factor: f64,
    #[serde(default)]
    pub effective_mass: Option<Mass>,
    #[serde(default)]
    pub linear_mass_density: Option<LinearDensity>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SofteningSection {
    Zeta(f64),
    Curvature(Stiffness),
    Field(FieldSection),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSection {
    pub model: FieldModelSection,
    pub alpha_parallel: Polarizability,
    pub alpha_perpendicular: Polarizability,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldModelSection {
    Uniform {
        parallel: ElectricField,
        perpendicular: ElectricField,
    },
    GaussianLobes(Vec<LobeSection>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LobeSection {
    pub center: Length,
    pub width: Length,
    pub peak_parallel: ElectricField,
    pub peak_perpendicular: ElectricField,
    pub transverse_scale: Length,
    #[serde(default)]
    pub transverse_offset: Option<Length>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavitySection {
    pub bare_finesse: f64,
    pub round_trip_length: Length,
    pub refractive_index: f64,
    pub wavelength: Length,
    pub waist: Length,
    pub surface_field_ratio: f64,
    pub gap: Length,
    #[serde(default)]
    pub evanescent_decay: Option<InverseLength>,
    pub external_coupling_fraction: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElectrodeSection {
    pub diameter: Length,
    pub conductivity_2d: Conductance,
    pub misalignment: Angle,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSection {
    pub detuning: DetuningValue,
    #[serde(default)]
    pub power: Option<Power>,
    #[serde(default)]
    pub coupling: Option<Frequency>,
}

/// `"+delta_2"` style sideband references or a frequency like `"0 Hz"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetuningValue(pub Detuning);

impl<'de> Deserialize<'de> for DetuningValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let symbolic = s.contains("delta") || s.contains('δ');
        let parsed = if symbolic {
            Detuning::parse_symbolic(&s).map_err(|e| e.to_string())
        } else {
            parse_quantity(&s, Dimension::Frequency).map(Detuning::Absolute)
        };
        parsed.map(DetuningValue).map_err(de::Error::custom)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSection {
    pub mech_truncation: usize,
    pub cavity_truncation: usize,
    pub solver: SolveMethod,
    /// Phonon number entering the RWA check.
    pub rwa_phonons: usize,
    pub thresholds: Thresholds,
    pub include_reduced_shifts: bool,
    /// Largest per-level population change accepted by `--converge`.
    pub converge_tolerance: f64,
    pub max_mech_truncation: usize,
    /// Cap for the full master equation, whose size grows as `N_m²`.
    pub max_full_mech_truncation: usize,
    pub wigner: WignerSection,
    pub spectrum: SpectrumSection,
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self {
            mech_truncation: 10,
            cavity_truncation: 2,
            solver: SolveMethod::Auto,
            rwa_phonons: 6,
            thresholds: Thresholds::default(),
            include_reduced_shifts: false,
            converge_tolerance: 1e-3,
            max_mech_truncation: 65536,
            max_full_mech_truncation: 16,
            wigner: WignerSection::default(),
            spectrum: SpectrumSection::default(),
        }
    }
}

/// Square grid in the α-plane; the extent defaults to the occupied levels.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WignerSection {
    pub extent: Option<f64>,
    pub points: usize,
}

impl Default for WignerSection {
    fn default() -> Self {
        Self {
            extent: None,
            points: 201,
        }
    }
}

impl WignerSection {
    /// `populations` fix the default extent `3 + √n` with `n` the level
    /// below which all but 1e-9 of the weight lies.
    pub fn grid(&self, populations: &[f64]) -> WignerGrid {
        let extent = self.extent.unwrap_or_else(|| {
            let mut total = 0.0;
            let n = populations
                .iter()
                .position(|p| {
                    total += p;
                    total >= 1.0 - 1e-9
                })
                .unwrap_or(populations.len());
            3.0 + (n as f64).sqrt()
        });
        WignerGrid::square(extent, self.points)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumSection {
    pub points_per_linewidth: usize,
    /// Half-width of each line window in linewidths.
    pub margin: f64,
    pub background: usize,
    pub probe_in_linewidths: bool,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self {
            points_per_linewidth: 10,
            margin: 5.0,
            background: 2001,
            probe_in_linewidths: true,
        }
    }
}

impl SpectrumSection {
    pub fn options(&self) -> SpectrumOptions {
        SpectrumOptions {
            grid: SpectrumGrid::Sidebands {
                points_per_linewidth: self.points_per_linewidth,
                margin: self.margin,
                background: self.background,
            },
            probe_in_linewidths: self.probe_in_linewidths,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub wigner: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("nanofock-out"),
            wigner: true,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Dotted path into the config, e.g. `device.physical.softening.zeta`.
    pub parameter: String,
    pub values: Vec<Value>,
}

/// The device section mapped onto library inputs.
#[derive(Debug, Clone, PartialEq)]
pub enum DeviceInput {
    Physical(DeviceSpec),
    Effective(EffectiveSpec),
}

impl DeviceInput {
    pub fn derive(&self) -> Result<DerivedParams> {
        match self {
            Self::Physical(d) => d.derive(),
            Self::Effective(e) => e.derive(),
        }
        .map_err(CliError::from_derive)
    }

    pub fn has_probe(&self) -> bool {
        match self {
            Self::Physical(d) => d.drives.probe.is_some(),
            Self::Effective(e) => e.drives.probe.is_some(),
        }
    }

    pub fn prefix(&self) -> &'static str {
        match self {
            Self::Physical(_) => "device.physical",
            Self::Effective(_) => "device.effective",
        }
    }
}

/// A parsed config together with the text it came from.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub path: PathBuf,
    pub sha256: String,
    pub raw: Value,
    pub config: RunConfig,
    pub device: DeviceInput,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn load(path: &Path) -> Result<LoadedConfig> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let sha256 = sha256_hex(&bytes);
    let raw: Value = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::Config(format!("{}: invalid JSON: {e}", path.display())))?;
    let (config, device) = from_value(&raw)?;
    Ok(LoadedConfig {
        path: path.to_path_buf(),
        sha256,
        raw,
        config,
        device,
    })
}

/// Parses and resolves a config tree; errors name the offending field.
pub fn from_value(raw: &Value) -> Result<(RunConfig, DeviceInput)> {
    let config: RunConfig = serde_path_to_error::deserialize(raw).map_err(|e| {
        let path = e.path().to_string();
        CliError::Config(format!("at {path}: {}", e.into_inner()))
    })?;
    if config.version != CONFIG_VERSION {
        return Err(CliError::Config(format!(
            "at version: unsupported config version {} (expected {CONFIG_VERSION})",
            config.version
        )));
    }
    config.simulation.validate()?;
    let device = resolve_device(&config.device)?;
    Ok((config, device))
}

impl SimulationSection {
    fn validate(&self) -> Result<()> {
        let fail = |field: &str, msg: String| Err(CliError::Config(format!("at simulation.{field}: {msg}")));
        if self.mech_truncation < 2 {
            return fail("mech_truncation", format!("needs at least 2 levels, got {}", self.mech_truncation));
        }
        if self.cavity_truncation < 2 {
            return fail("cavity_truncation", format!("needs at least 2 levels, got {}", self.cavity_truncation));
        }
        if self.max_mech_truncation < self.mech_truncation {
            return fail("max_mech_truncation", "must not be below mech_truncation".into());
        }
        if !(self.converge_tolerance > 0.0) {
            return fail("converge_tolerance", format!("must be positive, got {}", self.converge_tolerance));
        }
        if !(self.thresholds.pass > 0.0 && self.thresholds.pass < self.thresholds.fail) {
            return fail("thresholds", "need 0 < pass < fail".into());
        }
        if self.wigner.points < 3 {
            return fail("wigner.points", format!("needs at least 3 points, got {}", self.wigner.points));
        }
        if let Some(e) = self.wigner.extent {
            if !(e > 0.0) || !e.is_finite() {
                return fail("wigner.extent", format!("must be positive, got {e}"));
            }
        }
        Ok(())
    }
}

fn laser(section: &DriveSection, path: &str) -> Result<LaserSpec> {
    let strength = match (section.power, section.coupling) {
        (Some(p), None) => DriveStrength::Power(p.value),
        (None, Some(g)) => DriveStrength::Coupling(g.value),
        _ => {
            return Err(CliError::Config(format!(
                "at {path}: give exactly one of \"power\" or \"coupling\""
            )))
        }
    };
    let spec = LaserSpec {
        detuning: section.detuning.0,
        strength,
    };
    spec.validate().map_err(|e| CliError::Config(format!("at {path}: {e}")))?;
    Ok(spec)
}

fn drives(lasers: &[DriveSection], probe: Option<&DriveSection>, prefix: &str) -> Result<DriveSpec> {
    Ok(DriveSpec {
        lasers: lasers
            .iter()
            .enumerate()
            .map(|(i, l)| laser(l, &format!("{prefix}.drives.{i}")))
            .collect::<Result<_>>()?,
        probe: probe.map(|p| laser(p, &format!("{prefix}.probe"))).transpose()?,
    })
}

fn check(result: nanofock::Result<()>, path: &str) -> Result<()> {
    result.map_err(|e| CliError::Config(format!("at {path}: {e}")))
}

fn resolve_device(section: &DeviceSection) -> Result<DeviceInput> {
    match section {
        DeviceSection::Physical(p) => {
            let prefix = "device.physical";
            let beam = &p.beam;
            let kappa_tilde = match (beam.radius, beam.kappa_tilde) {
                (Some(r), None) => r.value / std::f64::consts::SQRT_2,
                (None, Some(k)) => k.value,
                _ => {
                    return Err(CliError::Config(format!(
                        "at {prefix}.beam: give exactly one of \"radius\" or \"kappa_tilde\""
                    )))
                }
            };
            let beam = BeamSpec {
                length: beam.length.value,
                kappa_tilde,
                sound_speed: beam.sound_speed.value,
                quality_factor: beam.quality_factor,
                effective_mass: beam.effective_mass.map(|m| m.value),
                linear_mass_density: beam.linear_mass_density.map(|m| m.value),
            };
            check(beam.validate(), &format!("{prefix}.beam"))?;
            let softening = match &p.softening {
                SofteningSection::Zeta(z) => SofteningSpec::Zeta(*z),
                SofteningSection::Curvature(v) => SofteningSpec::Curvature(v.value),
                SofteningSection::Field(f) => SofteningSpec::Field {
                    model: match &f.model {
                        FieldModelSection::Uniform {
                            parallel,
                            perpendicular,
                        } => FieldModel::Uniform {
                            parallel: parallel.value,
                            perpendicular: perpendicular.value,
                        },
                        FieldModelSection::GaussianLobes(lobes) => FieldModel::GaussianLobes(
                            lobes
                                .iter()
                                .map(|l| GaussianLobe {
                                    center: l.center.value,
                                    width: l.width.value,
                                    peak_parallel: l.peak_parallel.value,
                                    peak_perpendicular: l.peak_perpendicular.value,
                                    transverse_scale: l.transverse_scale.value,
                                    transverse_offset: l.transverse_offset.map_or(0.0, |o| o.value),
                                })
                                .collect(),
                        ),
                    },
                    alpha_parallel: f.alpha_parallel.value,
                    alpha_perpendicular: f.alpha_perpendicular.value,
                },
            };
            check(softening.validate(), &format!("{prefix}.softening"))?;
            let c = &p.cavity;
            let cavity = CavitySpec {
                bare_finesse: c.bare_finesse,
                round_trip_length: c.round_trip_length.value,
                refractive_index: c.refractive_index,
                wavelength: c.wavelength.value,
                waist: c.waist.value,
                surface_field_ratio: c.surface_field_ratio,
                gap: c.gap.value,
                evanescent_decay: c.evanescent_decay.map(|k| k.value),
                external_coupling_fraction: c.external_coupling_fraction,
            };
            check(cavity.validate(), prefix)?;
            let electrode = p.electrode.as_ref().map(|e| ElectrodeSpec {
                diameter: e.diameter.value,
                conductivity_2d: e.conductivity_2d.value,
                misalignment: e.misalignment.value,
            });
            if let Some(e) = &electrode {
                check(e.validate(), prefix)?;
            }
            if !(p.temperature.value >= 0.0) {
                return Err(CliError::Config(format!("at {prefix}.temperature: must be non-negative")));
            }
            let spec = DeviceSpec {
                beam,
                softening,
                cavity,
                electrode,
                optical_polarizability: p.optical_polarizability.value,
                temperature: p.temperature.value,
                drives: drives(&p.drives, p.probe.as_ref(), prefix)?,
            };
            check(spec.validate(), prefix)?;
            Ok(DeviceInput::Physical(spec))
        }
        DeviceSection::Effective(e) => {
            let prefix = "device.effective";
            if !(e.temperature.value >= 0.0) {
                return Err(CliError::Config(format!("at {prefix}.temperature: must be non-negative")));
            }
            Ok(DeviceInput::Effective(EffectiveSpec {
                omega_m: e.omega_m.value,
                lambda: e.lambda.value,
                kappa: e.kappa.value,
                quality_factor: e.quality_factor,
                temperature: e.temperature.value,
                drives: drives(&e.drives, e.probe.as_ref(), prefix)?,
            }))
        }
    }
}

/// Mutable reference to the node at a dotted path (`a.b.0.c`).
pub fn lookup_mut<'a>(root: &'a mut Value, path: &str) -> Option<&'a mut Value> {
    path.split('.').try_fold(root, |node, key| match node {
        Value::Object(map) => map.get_mut(key),
        Value::Array(items) => key.parse::<usize>().ok().and_then(move |i| items.get_mut(i)),
        _ => None,
    })
}
