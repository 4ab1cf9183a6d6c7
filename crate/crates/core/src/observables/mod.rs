//! Wigner functions, probe sideband spectra and their inversion.

mod inversion;
mod spectrum;
mod wigner;

pub use inversion::{
    populations_from_spectrum, Reconstruction, DETECTION_THRESHOLD, RESOLUTION_FACTOR,
    RESONANCE_TOLERANCE,
};
pub use spectrum::{
    linewidths, power_spectrum, PeakLine, SpectrumData, SpectrumGrid, SpectrumInputs,
    SpectrumOptions, SPECTRUM_CSV_SCHEMA,
};
pub use wigner::{
    wigner_from_density_matrix, wigner_from_populations, wigner_origin, wigner_radial_profile, WignerData, WignerGrid,
    NORMALIZATION_TOLERANCE, WIGNER_CSV_SCHEMA,
};
