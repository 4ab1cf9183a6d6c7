use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::device::DerivedParams;
use crate::liouvillian::RateTable;
use crate::{Error, Result};

pub const SPECTRUM_CSV_SCHEMA: &str = "# nanofock spectrum v1";

/// Frequency grid, as offsets `ω − ω_L` from the probe laser in rad/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SpectrumGrid {
    Uniform { start: f64, stop: f64, points: usize },
    Explicit(Vec<f64>),
    /// Dense windows of `±margin·Γ_n` around every line, `points_per_linewidth`
    /// samples per `Γ_n`, on top of a coarse background of `background` points.
    Sidebands {
        points_per_linewidth: usize,
        margin: f64,
        background: usize,
    },
}

impl Default for SpectrumGrid {
    fn default() -> Self {
        Self::Sidebands {
            points_per_linewidth: 10,
            margin: 5.0,
            background: 2001,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumOptions {
    pub grid: SpectrumGrid,
    /// Whether the probe's own rates broaden `Γ_n`.
    pub probe_in_linewidths: bool,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            grid: SpectrumGrid::default(),
            probe_in_linewidths: true,
        }
    }
}

/// Rates entering the sideband spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumInputs {
    /// Single-laser table of the probe.
    pub probe: RateTable,
    pub drives: RateTable,
    pub gamma_m: f64,
    pub n_bar: f64,
    pub laser_frequency: Option<f64>,
}

impl SpectrumInputs {
    /// Tables covering `n = 1..=n_max`.
    pub fn from_derived(derived: &DerivedParams, n_max: usize) -> Result<Self> {
        let probe = derived.probe.as_ref().ok_or_else(|| {
            Error::InvalidArgument("a probe laser is required for the spectrum".into())
        })?;
        Ok(Self {
            probe: RateTable::new(derived, std::slice::from_ref(probe), n_max),
            drives: RateTable::for_drives(derived, n_max),
            gamma_m: derived.gamma_m,
            n_bar: derived.n_bar,
            laser_frequency: probe.laser_frequency,
        })
    }
}

/// `ω̃_n± − ω_L = ±δ_n` with the Lorentzian weights of both lines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakLine {
    pub n: usize,
    pub offset_plus: f64,
    pub offset_minus: f64,
    pub linewidth: f64,
    /// Probe `A₋ⁿ`, which sets the `ω̃_n⁺` line.
    pub rate_minus: f64,
    /// Probe `A₊ⁿ`, which sets the `ω̃_n⁻` line.
    pub rate_plus: f64,
    /// `S(ω̃_n⁺)`, all lines included.
    pub height_plus: f64,
    pub height_minus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumData {
    pub laser_frequency: Option<f64>,
    pub offsets: Vec<f64>,
    pub values: Vec<f64>,
    pub peaks: Vec<PeakLine>,
    /// Smallest separation of neighbouring lines on one side.
    pub line_spacing: f64,
    /// `false` if some line is broader than the spacing.
    pub resolved: bool,
    pub warnings: Vec<String>,
}

impl SpectrumData {
    pub fn absolute_frequencies(&self) -> Option<Vec<f64>> {
        self.laser_frequency
            .map(|wl| self.offsets.iter().map(|o| wl + o).collect())
    }

    /// `tag` is appended to the schema comment line.
    pub fn write_csv<W: Write>(&self, mut w: W, tag: Option<&str>) -> io::Result<()> {
        match tag {
            Some(t) => writeln!(w, "{SPECTRUM_CSV_SCHEMA} {t}")?,
            None => writeln!(w, "{SPECTRUM_CSV_SCHEMA}")?,
        }
        writeln!(w, "offset_rad_s,frequency_rad_s,s")?;
        for (o, s) in self.offsets.iter().zip(&self.values) {
            match self.laser_frequency {
                Some(wl) => writeln!(w, "{o:.16e},{:.16e},{s:.16e}", wl + o)?,
                None => writeln!(w, "{o:.16e},,{s:.16e}")?,
            }
        }
        Ok(())
    }
}

/// `Γ_n = n[A₋ⁿ + A₊ⁿ + γ(2n̄+1)] + (n−1)[A₋ⁿ⁻¹ + γ(n̄+1)] + (n+1)[A₊ⁿ⁺¹ + γn̄]`
/// for `n = 1..=n_max`, with total rates over all lasers in `rates`.
pub fn linewidths(rates: &RateTable, gamma_m: f64, n_bar: f64, n_max: usize) -> Result<Vec<f64>> {
    if rates.n_max() < n_max + 1 {
        return Err(Error::InvalidArgument(format!(
            "rate table covers n ≤ {} but linewidths up to n = {n_max} need n + 1",
            rates.n_max()
        )));
    }
    Ok((1..=n_max)
        .map(|n| {
            let nf = n as f64;
            nf * (rates.minus_total(n) + rates.plus_total(n) + gamma_m * (2.0 * n_bar + 1.0))
                + (nf - 1.0) * (rates.minus_total(n - 1) + gamma_m * (n_bar + 1.0))
                + (nf + 1.0) * (rates.plus_total(n + 1) + gamma_m * n_bar)
        })
        .collect())
}

fn lorentzian(offset: f64, center: f64, width: f64) -> f64 {
    let d = offset - center;
    1.0 / (d * d + 0.25 * width * width)
}

/// Line centres, widths and weights `nΓA P` for both sides.
struct Line {
    center: f64,
    width: f64,
    weight: f64,
}

/// Sideband spectrum `Σ_n [nΓ_nA₋ⁿPₙ L(ω̃_n⁺) + nΓ_nA₊ⁿPₙ₋₁ L(ω̃_n⁻)]` with unit
/// proportionality constant, for lines `n = 1..=P.len()`.
pub fn power_spectrum(
    populations: &[f64],
    inputs: &SpectrumInputs,
    options: &SpectrumOptions,
) -> Result<SpectrumData> {
    if populations.is_empty() || populations.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::InvalidArgument(
            "populations must be finite and non-negative".into(),
        ));
    }
    if inputs.probe.num_lasers() != 1 {
        return Err(Error::InvalidArgument(format!(
            "probe table must hold exactly one laser, got {}",
            inputs.probe.num_lasers()
        )));
    }
    let n_lines = populations.len();
    if inputs.probe.n_max() < n_lines {
        return Err(Error::InvalidArgument(format!(
            "probe table covers n ≤ {} but {n_lines} lines are needed",
            inputs.probe.n_max()
        )));
    }
    let broadening = if options.probe_in_linewidths {
        inputs.drives.combined(&inputs.probe)
    } else {
        inputs.drives.clone()
    };
    let widths = linewidths(&broadening, inputs.gamma_m, inputs.n_bar, n_lines)?;
    let pop = |n: usize| populations.get(n).copied().unwrap_or(0.0);

    let mut peaks = Vec::with_capacity(n_lines);
    let mut lines = Vec::with_capacity(2 * n_lines);
    for n in 1..=n_lines {
        let (delta, width) = (inputs.probe.delta[n - 1], widths[n - 1]);
        let (a_plus, a_minus) = (inputs.probe.plus_total(n), inputs.probe.minus_total(n));
        let nf = n as f64;
        lines.push(Line {
            center: delta,
            width,
            weight: nf * width * a_minus * pop(n),
        });
        lines.push(Line {
            center: -delta,
            width,
            weight: nf * width * a_plus * pop(n - 1),
        });
        peaks.push(PeakLine {
            n,
            offset_plus: delta,
            offset_minus: -delta,
            linewidth: width,
            rate_minus: a_minus,
            rate_plus: a_plus,
            height_plus: 0.0,
            height_minus: 0.0,
        });
    }
    let evaluate = |o: f64| -> f64 {
        lines
            .iter()
            .map(|l| l.weight * lorentzian(o, l.center, l.width))
            .sum()
    };
    for p in &mut peaks {
        p.height_plus = evaluate(p.offset_plus);
        p.height_minus = evaluate(p.offset_minus);
    }

    let offsets = build_grid(&options.grid, &lines)?;
    let values: Vec<f64> = offsets.iter().map(|&o| evaluate(o)).collect();

    let line_spacing = inputs
        .probe
        .delta
        .windows(2)
        .take(n_lines.saturating_sub(1))
        .map(|w| (w[1] - w[0]).abs())
        .fold(f64::INFINITY, f64::min);
    let mut warnings = Vec::new();
    let broad: Vec<usize> = peaks
        .iter()
        .filter(|p| p.linewidth > line_spacing)
        .map(|p| p.n)
        .collect();
    if !broad.is_empty() {
        warnings.push(format!(
            "lines {broad:?} are broader than the line spacing; the spectrum is not invertible"
        ));
    }
    Ok(SpectrumData {
        laser_frequency: inputs.laser_frequency,
        offsets,
        values,
        peaks,
        line_spacing,
        resolved: broad.is_empty(),
        warnings,
    })
}

fn build_grid(grid: &SpectrumGrid, lines: &[Line]) -> Result<Vec<f64>> {
    let mut offsets = match grid {
        SpectrumGrid::Uniform { start, stop, points } => {
            if *points < 2 || !(stop > start) {
                return Err(Error::InvalidArgument(format!(
                    "invalid uniform grid [{start}, {stop}] with {points} points"
                )));
            }
            let step = (stop - start) / (*points - 1) as f64;
            (0..*points).map(|i| start + i as f64 * step).collect()
        }
        SpectrumGrid::Explicit(v) => {
            if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidArgument("explicit grid must be finite and non-empty".into()));
            }
            v.clone()
        }
        SpectrumGrid::Sidebands {
            points_per_linewidth,
            margin,
            background,
        } => {
            if *points_per_linewidth == 0 || !(*margin > 0.0) {
                return Err(Error::InvalidArgument(
                    "sideband grid needs positive resolution and margin".into(),
                ));
            }
            let half = (margin * *points_per_linewidth as f64).ceil() as i64;
            let mut v = Vec::new();
            for l in lines {
                let step = l.width / *points_per_linewidth as f64;
                v.extend((-half..=half).map(|k| l.center + k as f64 * step));
            }
            let lo = lines.iter().map(|l| l.center - margin * l.width).fold(f64::INFINITY, f64::min);
            let hi = lines.iter().map(|l| l.center + margin * l.width).fold(f64::NEG_INFINITY, f64::max);
            if *background >= 2 && hi > lo {
                let step = (hi - lo) / (*background - 1) as f64;
                v.extend((0..*background).map(|i| lo + i as f64 * step));
            }
            v
        }
    };
    offsets.sort_by(f64::total_cmp);
    offsets.dedup();
    Ok(offsets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use proptest::prelude::*;

    fn table(delta: Vec<f64>, plus: Vec<f64>, minus: Vec<f64>) -> RateTable {
        RateTable {
            delta,
            a_plus: plus.into_iter().map(|x| vec![x]).collect(),
            a_minus: minus.into_iter().map(|x| vec![x]).collect(),
        }
    }

    /// Resonant probe with equal rates on 6 lines spaced by λ = 1000.
    fn synthetic(gamma: f64) -> SpectrumInputs {
        let delta: Vec<f64> = (0..6).map(|k| 1e4 + 1000.0 * k as f64).collect();
        SpectrumInputs {
            probe: table(delta.clone(), vec![1.0; 6], vec![1.0; 6]),
            drives: table(delta, vec![0.0; 6], vec![2.0; 6]),
            gamma_m: gamma,
            n_bar: 0.5,
            laser_frequency: None,
        }
    }

    #[test]
    fn linewidths_without_drives() {
        let t = table(vec![1.0, 2.0, 3.0, 4.0], vec![0.0; 4], vec![0.0; 4]);
        let w = linewidths(&t, 0.3, 0.0, 3).unwrap();
        for (n, g) in w.iter().enumerate() {
            let n = (n + 1) as f64;
            assert!((g - 0.3 * (2.0 * n - 1.0)).abs() < 1e-15);
        }
        assert!(linewidths(&t, 0.3, 0.0, 4).is_err());
    }

    #[test]
    fn linewidth_single_cooling_rate() {
        let t = table(vec![1.0, 2.0], vec![0.0, 0.0], vec![7.0, 0.0]);
        assert_eq!(linewidths(&t, 0.0, 0.0, 1).unwrap(), vec![7.0]);
    }

    #[test]
    fn reference_lines_are_narrow() {
        let mut spec = presets::reference_effective();
        spec.drives.probe = Some(presets::resonant_probe(2.0 * std::f64::consts::PI * 1e3));
        let d = spec.derive().unwrap();
        let inputs = SpectrumInputs::from_derived(&d, 10).unwrap();
        let w = linewidths(&inputs.drives.combined(&inputs.probe), d.gamma_m, d.n_bar, 9).unwrap();
        assert!(w.iter().all(|g| *g > 0.0));
        assert!(3.0 * w[0] < d.lambda, "Γ₁ = {}, λ = {}", w[0], d.lambda);
    }

    #[test]
    fn ground_state_has_only_red_lines() {
        let s = power_spectrum(&[1.0, 0.0, 0.0], &synthetic(0.1), &SpectrumOptions::default()).unwrap();
        // Blue side carries only far tails of the red lines.
        let red = s.peaks[0].height_minus;
        assert!(red > 0.0);
        for pk in &s.peaks {
            assert!(pk.height_plus < 1e-6 * red);
        }
        assert!(s.peaks[1].height_minus < 1e-3 * red);
    }

    #[test]
    fn resonant_height_ratio() {
        let p = [0.2, 0.5, 0.3];
        // Neighbouring tails contribute at the (Γ/2λ)² level.
        let s = power_spectrum(&p, &synthetic(0.0), &SpectrumOptions::default()).unwrap();
        for pk in &s.peaks[..2] {
            let ratio = pk.height_plus / pk.height_minus;
            let expect = p[pk.n] / p[pk.n - 1];
            assert!((ratio / expect - 1.0).abs() < 1e-2, "n = {}", pk.n);
        }
        assert!(s.resolved);
        assert!(s.values.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn broad_lines_flagged() {
        let mut inputs = synthetic(0.0);
        inputs.drives = table(inputs.probe.delta.clone(), vec![0.0; 6], vec![500.0; 6]);
        let s = power_spectrum(&[0.5, 0.5], &inputs, &SpectrumOptions::default()).unwrap();
        assert!(!s.resolved);
        assert!(!s.warnings.is_empty());
    }

    #[test]
    fn probe_switch_changes_width() {
        let inputs = synthetic(0.0);
        let with = power_spectrum(&[0.5, 0.5], &inputs, &SpectrumOptions::default()).unwrap();
        let opts = SpectrumOptions {
            probe_in_linewidths: false,
            ..Default::default()
        };
        let without = power_spectrum(&[0.5, 0.5], &inputs, &opts).unwrap();
        assert!(with.peaks[0].linewidth > without.peaks[0].linewidth);
    }

    #[test]
    fn missing_probe_rejected() {
        let d = presets::reference_effective().derive().unwrap();
        assert!(SpectrumInputs::from_derived(&d, 5).is_err());
    }

    fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
        x.windows(2).zip(y.windows(2)).map(|(a, b)| 0.5 * (a[1] - a[0]) * (b[0] + b[1])).sum()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn linear_in_populations(
            a in prop::collection::vec(0.0f64..1.0, 4),
            b in prop::collection::vec(0.0f64..1.0, 4),
        ) {
            let inputs = synthetic(0.2);
            let opts = SpectrumOptions { grid: SpectrumGrid::Uniform { start: -1.1e4, stop: 1.1e4, points: 801 }, ..Default::default() };
            let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            let sa = power_spectrum(&a, &inputs, &opts).unwrap();
            let sb = power_spectrum(&b, &inputs, &opts).unwrap();
            let ss = power_spectrum(&sum, &inputs, &opts).unwrap();
            for k in 0..ss.values.len() {
                let expect = sa.values[k] + sb.values[k];
                prop_assert!((ss.values[k] - expect).abs() <= 1e-12 * expect.abs().max(1e-300));
            }
        }

        #[test]
        fn lorentzian_area(n in 1usize..4, p in 0.05f64..1.0, gamma in 0.05f64..0.5) {
            let inputs = synthetic(gamma);
            let mut pops = vec![0.0; 4];
            pops[n] = p;
            let width = linewidths(&inputs.drives.combined(&inputs.probe), gamma, 0.5, 4).unwrap()[n - 1];
            let center = inputs.probe.delta[n - 1];
            let step = width / 10.0;
            let half = 200.0 * width;
            let points = (2.0 * half / step) as usize + 1;
            let opts = SpectrumOptions {
                grid: SpectrumGrid::Uniform { start: center - half, stop: center + half, points },
                ..Default::default()
            };
            let s = power_spectrum(&pops, &inputs, &opts).unwrap();
            // Only the ω̃_n⁺ line has weight inside this window; ±200Γ
            // captures all but 1/(200π) of its area.
            let area = trapezoid(&s.offsets, &s.values);
            let expect = 2.0 * std::f64::consts::PI * n as f64 * inputs.probe.minus_total(n) * p;
            prop_assert!((area / expect - 1.0).abs() < 0.01, "area {area} expect {expect}");
        }
    }
}
