use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::spectrum::SpectrumData;
use super::wigner::wigner_origin;
use crate::{Error, Result};

/// Lines weaker than this fraction of the strongest are treated as absent.
pub const DETECTION_THRESHOLD: f64 = 1e-8;

/// Minimum `λ/Γ_n` for a line to be used.
pub const RESOLUTION_FACTOR: f64 = 3.0;

/// Relative `|A₊ − A₋|` above which the probe counts as off resonance.
pub const RESONANCE_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub populations: Vec<f64>,
    /// Half the spread between the two line estimates of each level.
    pub uncertainty: Vec<f64>,
    /// Largest `n` with a detected line.
    pub highest_line: usize,
    pub wigner_origin: f64,
    pub warnings: Vec<String>,
}

/// Height of the sampled spectrum at `at`, from the parabola through the
/// three grid points nearest to it.
fn interpolate(offsets: &[f64], values: &[f64], at: f64, window: f64) -> Result<f64> {
    let k = offsets.partition_point(|&o| o < at);
    let nearest = match (k.checked_sub(1), offsets.get(k)) {
        (Some(i), Some(&o)) => {
            if (at - offsets[i]).abs() <= (o - at).abs() {
                i
            } else {
                k
            }
        }
        (Some(i), None) => i,
        (None, _) => k,
    };
    if offsets.len() < 3 || (offsets[nearest] - at).abs() > window {
        return Err(Error::InvalidArgument(format!(
            "no grid point within {window:.3e} rad/s of the line at {at:.6e} rad/s"
        )));
    }
    let c = nearest.clamp(1, offsets.len() - 2);
    let (x0, x1, x2) = (offsets[c - 1], offsets[c], offsets[c + 1]);
    let (y0, y1, y2) = (values[c - 1], values[c], values[c + 1]);
    let l0 = (at - x1) * (at - x2) / ((x0 - x1) * (x0 - x2));
    let l1 = (at - x0) * (at - x2) / ((x1 - x0) * (x1 - x2));
    let l2 = (at - x0) * (at - x1) / ((x2 - x0) * (x2 - x1));
    Ok(y0 * l0 + y1 * l1 + y2 * l2)
}

/// Populations from the peak heights of a sideband spectrum.
///
/// Heights are read at the predicted line centres and corrected for the
/// tails of the other lines using the known widths. Each level then has two
/// estimates, `Pₙ ∝ w(ω̃ₙ⁺)/(nΓₙA₋ⁿ)` and `Pₙ ∝ w(ω̃ₙ₊₁⁻)/((n+1)Γₙ₊₁A₊ⁿ⁺¹)`, which
/// are pooled before normalising. Levels above the highest detected line
/// are set to zero.
pub fn populations_from_spectrum(spectrum: &SpectrumData) -> Result<Reconstruction> {
    let peaks = &spectrum.peaks;
    if peaks.is_empty() {
        return Err(Error::InvalidArgument("spectrum has no lines".into()));
    }
    if spectrum.offsets.len() != spectrum.values.len() {
        return Err(Error::DimensionMismatch {
            expected: spectrum.offsets.len(),
            found: spectrum.values.len(),
        });
    }
    let mut warnings = Vec::new();
    let off_resonance = peaks.iter().any(|p| {
        let scale = p.rate_plus.abs().max(p.rate_minus.abs());
        scale > 0.0 && (p.rate_plus - p.rate_minus).abs() > RESONANCE_TOLERANCE * scale
    });
    if off_resonance {
        warnings.push(
            "probe is not resonant (A+ != A-); peak ratios are corrected with the model rates".into(),
        );
    }

    // Unknown weights ordered [n=1 blue, n=1 red, n=2 blue, …].
    let centers: Vec<(f64, f64)> = peaks
        .iter()
        .flat_map(|p| [(p.offset_plus, p.linewidth), (p.offset_minus, p.linewidth)])
        .collect();
    let m = centers.len();
    let mut heights = DVector::zeros(m);
    for (k, &(c, w)) in centers.iter().enumerate() {
        heights[k] = interpolate(&spectrum.offsets, &spectrum.values, c, 0.5 * w)?;
    }
    let shape = DMatrix::from_fn(m, m, |a, b| {
        let (ca, (cb, wb)) = (centers[a].0, centers[b]);
        1.0 / ((ca - cb).powi(2) + 0.25 * wb * wb)
    });
    let weights = shape
        .lu()
        .solve(&heights)
        .ok_or_else(|| Error::Numerical("singular line-overlap matrix".into()))?;
    let w_max = weights.iter().fold(0.0f64, |a, w| a.max(w.abs()));
    if !(w_max > 0.0) {
        return Err(Error::InvalidArgument("spectrum carries no sideband weight".into()));
    }
    let detected = |k: usize| weights[k] > DETECTION_THRESHOLD * w_max;

    let mut highest_line = 0;
    for (i, p) in peaks.iter().enumerate() {
        if detected(2 * i) || detected(2 * i + 1) {
            highest_line = p.n;
            let required = RESOLUTION_FACTOR * p.linewidth;
            if spectrum.line_spacing < required {
                return Err(Error::Unresolved {
                    n: p.n,
                    lambda: spectrum.line_spacing,
                    required,
                });
            }
        }
    }

    // Blue line n measures P_n, red line n measures P_{n−1}.
    let levels = highest_line + 1;
    let mut num = vec![0.0; levels];
    let mut den = vec![0.0; levels];
    let mut single: Vec<Vec<f64>> = vec![Vec::new(); levels];
    for (i, p) in peaks.iter().enumerate().take(highest_line) {
        let scale = p.n as f64 * p.linewidth;
        let blue = (weights[2 * i].max(0.0), scale * p.rate_minus, p.n);
        let red = (weights[2 * i + 1].max(0.0), scale * p.rate_plus, p.n - 1);
        for (w, s, level) in [blue, red] {
            if s > 0.0 {
                num[level] += w;
                den[level] += s;
                single[level].push(w / s);
            }
        }
    }
    let raw: Vec<f64> = num
        .iter()
        .zip(&den)
        .map(|(n, d)| if *d > 0.0 { n / d } else { 0.0 })
        .collect();
    let total: f64 = raw.iter().sum();
    if !(total > 0.0) {
        return Err(Error::InvalidArgument("no level could be reconstructed".into()));
    }
    let populations: Vec<f64> = raw.iter().map(|p| p / total).collect();
    let uncertainty = single
        .iter()
        .map(|e| match e.as_slice() {
            [a, b] => 0.5 * (a - b).abs() / total,
            _ => 0.0,
        })
        .collect();
    Ok(Reconstruction {
        wigner_origin: wigner_origin(&populations),
        populations,
        uncertainty,
        highest_line,
        warnings,
    })
}
