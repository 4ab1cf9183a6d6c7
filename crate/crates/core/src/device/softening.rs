//! Dielectric softening of the flexural mode by an inhomogeneous static
//! field.
//!
//! The electrostatic energy per unit length of the polarized beam is
//! `W(x, y) = −½[α_∥E_∥²(x, y) + α_⊥E_⊥²(x, y)]`. Expanding the total
//! energy for the deflection `x(y) = φ₀(y)·X` gives
//! `V_es ≈ V_es,0 + V_es,1·X + V_es,2·X²` with
//!
//! ```text
//! V_es,1 = ∫ ∂W/∂x|₀ φ₀ dy,    V_es,2 = ½ ∫ ∂²W/∂x²|₀ φ₀² dy,
//! ```
//!
//! and the softened frequency is `ω_m² = ω_m0² + 2V_es,2/m*`. Buckling
//! occurs at `V_es,2 = −m*ω_m0²/2`.

use serde::{Deserialize, Serialize};

use super::beam::{base_frequency, BeamSpec};
use super::quadrature::integrate;
use crate::{Error, Result};

/// A field component and its first two transverse derivatives on the
/// beam axis (`x = 0`).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AxialField {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl AxialField {
    fn add(self, o: Self) -> Self {
        Self {
            value: self.value + o.value,
            d1: self.d1 + o.d1,
            d2: self.d2 + o.d2,
        }
    }

    /// `(∂(E²)/∂x, ∂²(E²)/∂x²)` at the axis.
    fn square_derivatives(self) -> (f64, f64) {
        (
            2.0 * self.value * self.d1,
            2.0 * (self.d1 * self.d1 + self.value * self.d2),
        )
    }
}

/// One tip-electrode lobe: Gaussian along the beam, `cosh` transverse
/// profile whose minimum sits at `transverse_offset`.
///
/// `E_c(x, y) = E_c,peak · exp(−(y−y₀)²/2w²) · cosh((x−x_s)/ℓ)/cosh(x_s/ℓ)`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianLobe {
    pub center: f64,
    pub width: f64,
    pub peak_parallel: f64,
    pub peak_perpendicular: f64,
    pub transverse_scale: f64,
    #[serde(default)]
    pub transverse_offset: f64,
}

impl GaussianLobe {
    fn profile(&self, y: f64, peak: f64) -> AxialField {
        let g = (-(y - self.center).powi(2) / (2.0 * self.width * self.width)).exp();
        let l = self.transverse_scale;
        let v = peak * g;
        AxialField {
            value: v,
            d1: -v * (self.transverse_offset / l).tanh() / l,
            d2: v / (l * l),
        }
    }
}

/// Samples of both components along the beam; linear interpolation
/// between samples, zero outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledField {
    pub y: Vec<f64>,
    pub parallel: Vec<AxialField>,
    pub perpendicular: Vec<AxialField>,
}

impl SampledField {
    fn interpolate(&self, samples: &[AxialField], y: f64) -> AxialField {
        let n = self.y.len();
        if n == 0 || y < self.y[0] || y > self.y[n - 1] {
            return AxialField::default();
        }
        let k = self.y.partition_point(|&s| s <= y).clamp(1, n - 1);
        let (y0, y1) = (self.y[k - 1], self.y[k]);
        let t = if y1 > y0 { (y - y0) / (y1 - y0) } else { 0.0 };
        let (a, b) = (samples[k - 1], samples[k]);
        AxialField {
            value: a.value + t * (b.value - a.value),
            d1: a.d1 + t * (b.d1 - a.d1),
            d2: a.d2 + t * (b.d2 - a.d2),
        }
    }
}

/// Parametric electrostatic field acting on the beam.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldModel {
    Uniform { parallel: f64, perpendicular: f64 },
    GaussianLobes(Vec<GaussianLobe>),
    Sampled(SampledField),
}

impl FieldModel {
    /// `(E_∥, E_⊥)` with transverse derivatives at axial position `y`.
    pub fn axial(&self, y: f64) -> (AxialField, AxialField) {
        match self {
            Self::Uniform {
                parallel,
                perpendicular,
            } => (
                AxialField {
                    value: *parallel,
                    ..Default::default()
                },
                AxialField {
                    value: *perpendicular,
                    ..Default::default()
                },
            ),
            Self::GaussianLobes(lobes) => lobes.iter().fold(
                (AxialField::default(), AxialField::default()),
                |(p, q), l| {
                    (
                        p.add(l.profile(y, l.peak_parallel)),
                        q.add(l.profile(y, l.peak_perpendicular)),
                    )
                },
            ),
            Self::Sampled(s) => (
                s.interpolate(&s.parallel, y),
                s.interpolate(&s.perpendicular, y),
            ),
        }
    }

    /// Multiplies all field amplitudes by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let scale = |f: AxialField| AxialField {
            value: f.value * factor,
            d1: f.d1 * factor,
            d2: f.d2 * factor,
        };
        match self {
            Self::Uniform {
                parallel,
                perpendicular,
            } => Self::Uniform {
                parallel: parallel * factor,
                perpendicular: perpendicular * factor,
            },
            Self::GaussianLobes(lobes) => Self::GaussianLobes(
                lobes
                    .iter()
                    .map(|l| GaussianLobe {
                        peak_parallel: l.peak_parallel * factor,
                        peak_perpendicular: l.peak_perpendicular * factor,
                        ..l.clone()
                    })
                    .collect(),
            ),
            Self::Sampled(s) => Self::Sampled(SampledField {
                y: s.y.clone(),
                parallel: s.parallel.iter().copied().map(scale).collect(),
                perpendicular: s.perpendicular.iter().copied().map(scale).collect(),
            }),
        }
    }
}

/// Transverse derivatives `(∂W/∂x, ∂²W/∂x²)` of an energy line density
/// on the beam axis.
pub trait LineEnergyDensity {
    fn transverse_derivatives(&self, y: f64) -> (f64, f64);
}

/// A field model acting on a beam with screened polarizabilities per unit
/// length (F·m).
#[derive(Debug, Clone, Copy)]
pub struct PolarizedBeam<'a> {
    pub field: &'a FieldModel,
    pub alpha_parallel: f64,
    pub alpha_perpendicular: f64,
}

impl LineEnergyDensity for PolarizedBeam<'_> {
    fn transverse_derivatives(&self, y: f64) -> (f64, f64) {
        let (par, perp) = self.field.axial(y);
        let (p1, p2) = par.square_derivatives();
        let (q1, q2) = perp.square_derivatives();
        (
            -0.5 * (self.alpha_parallel * p1 + self.alpha_perpendicular * q1),
            -0.5 * (self.alpha_parallel * p2 + self.alpha_perpendicular * q2),
        )
    }
}

impl<F: Fn(f64) -> (f64, f64)> LineEnergyDensity for F {
    fn transverse_derivatives(&self, y: f64) -> (f64, f64) {
        self(y)
    }
}

/// `(V_es,1, V_es,2)` in N and N/m by quadrature against the mode shape.
pub fn electrostatic_quadratic(density: &impl LineEnergyDensity, beam: &BeamSpec) -> Result<(f64, f64)> {
    let l = beam.length;
    let v1 = integrate(|y| density.transverse_derivatives(y).0 * beam.mode_shape(y), 0.0, l)?;
    let v2 = 0.5 * integrate(|y| density.transverse_derivatives(y).1 * beam.mode_shape(y).powi(2), 0.0, l)?;
    Ok((v1, v2))
}

/// How the mode is softened.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SofteningSpec {
    /// Target softening factor `ζ = ω_m0/ω_m ≥ 1`.
    Zeta(f64),
    /// Quadratic coefficient `V_es,2` of the electrostatic energy (N/m).
    Curvature(f64),
    /// Field model with polarizabilities per unit length (F·m).
    Field {
        model: FieldModel,
        alpha_parallel: f64,
        alpha_perpendicular: f64,
    },
}

impl SofteningSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Zeta(z) if !(*z >= 1.0) || !z.is_finite() => Err(Error::InvalidArgument(format!(
                "softening factor zeta must be >= 1, got {z}"
            ))),
            Self::Curvature(v) if !v.is_finite() => Err(Error::InvalidArgument(format!(
                "softening curvature must be finite, got {v}"
            ))),
            Self::Field {
                alpha_parallel,
                alpha_perpendicular,
                ..
            } if *alpha_parallel < 0.0 || *alpha_perpendicular < 0.0 => Err(Error::InvalidArgument(
                "polarizabilities must be non-negative".into(),
            )),
            _ => Ok(()),
        }
    }
}

/// Critical curvature magnitude `m*ω_m0²/2` at which the beam buckles.
pub fn buckling_curvature(beam: &BeamSpec) -> f64 {
    0.5 * beam.effective_mass() * base_frequency(beam).powi(2)
}

/// `ω_m = √(ω_m0² + 2V_es,2/m*)` for a softening curvature `V_es,2 ≤ 0`.
pub fn softened_frequency_from_curvature(beam: &BeamSpec, v_es2: f64) -> Result<f64> {
    if v_es2 > 0.0 {
        return Err(Error::InvalidArgument(format!(
            "field configuration stiffens the beam (V_es,2 = {v_es2:.4e} N/m > 0)"
        )));
    }
    let critical = buckling_curvature(beam);
    if -v_es2 >= critical {
        return Err(Error::Buckling {
            v_es2: -v_es2,
            critical,
        });
    }
    let w0 = base_frequency(beam);
    Ok(w0 * (1.0 + v_es2 / critical).sqrt())
}

/// Softened mechanical frequency.
pub fn softened_frequency(beam: &BeamSpec, softening: &SofteningSpec) -> Result<f64> {
    softening.validate()?;
    match softening {
        SofteningSpec::Zeta(z) => Ok(base_frequency(beam) / z),
        SofteningSpec::Curvature(v2) => softened_frequency_from_curvature(beam, *v2),
        SofteningSpec::Field {
            model,
            alpha_parallel,
            alpha_perpendicular,
        } => {
            let (_, v2) = electrostatic_quadratic(
                &PolarizedBeam {
                    field: model,
                    alpha_parallel: *alpha_parallel,
                    alpha_perpendicular: *alpha_perpendicular,
                },
                beam,
            )?;
            softened_frequency_from_curvature(beam, v2)
        }
    }
}

/// Curvature needed for a softening factor ζ: `−(1 − 1/ζ²)·m*ω_m0²/2`.
pub fn curvature_for_zeta(beam: &BeamSpec, zeta: f64) -> f64 {
    -(1.0 - 1.0 / (zeta * zeta)) * buckling_curvature(beam)
}

/// Rescales the amplitude of `model` so that it softens `beam` by `zeta`.
/// `V_es,2` is quadratic in the field amplitude.
pub fn tune_field_amplitude(
    model: &FieldModel,
    alpha_parallel: f64,
    alpha_perpendicular: f64,
    beam: &BeamSpec,
    zeta: f64,
) -> Result<FieldModel> {
    if !(zeta > 1.0) {
        return Err(Error::InvalidArgument(format!("tuning needs zeta > 1, got {zeta}")));
    }
    let density = PolarizedBeam {
        field: model,
        alpha_parallel,
        alpha_perpendicular,
    };
    let (_, v2) = electrostatic_quadratic(&density, beam)?;
    if !(v2 < 0.0) {
        return Err(Error::InvalidArgument(
            "field shape does not soften the beam; cannot tune its amplitude".into(),
        ));
    }
    Ok(model.scaled((curvature_for_zeta(beam, zeta) / v2).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::beam::mode_shape_factor;
    use crate::presets;

    fn tip_lobe(beam: &BeamSpec) -> FieldModel {
        FieldModel::GaussianLobes(vec![GaussianLobe {
            center: 0.5 * beam.length,
            width: 0.15 * beam.length,
            peak_parallel: 1.2e7,
            peak_perpendicular: 2.35e6,
            transverse_scale: 20e-9,
            transverse_offset: 0.0,
        }])
    }

    #[test]
    fn uniform_field_exerts_no_force() {
        let beam = presets::reference_beam();
        let field = FieldModel::Uniform {
            parallel: 1e7,
            perpendicular: 1e6,
        };
        let d = PolarizedBeam {
            field: &field,
            alpha_parallel: 1e-28,
            alpha_perpendicular: 1e-29,
        };
        assert_eq!(electrostatic_quadratic(&d, &beam).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn curvature_spec_matches_zeta() {
        let beam = presets::reference_beam();
        let by_zeta = softened_frequency(&beam, &SofteningSpec::Zeta(4.0)).unwrap();
        let v2 = curvature_for_zeta(&beam, 4.0);
        let by_curvature = softened_frequency(&beam, &SofteningSpec::Curvature(v2)).unwrap();
        assert!((by_curvature / by_zeta - 1.0).abs() < 1e-12);
        let beyond = SofteningSpec::Curvature(-1.01 * buckling_curvature(&beam));
        assert!(matches!(softened_frequency(&beam, &beyond), Err(Error::Buckling { .. })));
    }

    #[test]
    fn quadratic_test_potential_matches_closed_form() {
        // W = −c·x²: ∂W/∂x = 0, ∂²W/∂x² = −2c, so V_es,2 = −c ∫φ₀².
        let beam = presets::reference_beam();
        let c = 3.7e-5;
        let (v1, v2) = electrostatic_quadratic(&|_y: f64| (0.0, -2.0 * c), &beam).unwrap();
        let closed = -c * mode_shape_factor() * beam.length;
        assert_eq!(v1, 0.0);
        assert!(((v2 - closed) / closed).abs() < 1e-8);
    }

    #[test]
    fn tuned_gaussian_lobe_reaches_target_zeta() {
        let beam = presets::reference_beam();
        let (ap, aq) = presets::cnt_10_0_polarizabilities();
        let tuned = tune_field_amplitude(&tip_lobe(&beam), ap, aq, &beam, 4.0).unwrap();
        let (_, v2) = electrostatic_quadratic(
            &PolarizedBeam {
                field: &tuned,
                alpha_parallel: ap,
                alpha_perpendicular: aq,
            },
            &beam,
        )
        .unwrap();
        let target = (1.0 - 1.0 / 16.0) * buckling_curvature(&beam);
        assert!(((v2.abs() - target) / target).abs() < 1e-6);
        let w = softened_frequency(
            &beam,
            &SofteningSpec::Field {
                model: tuned,
                alpha_parallel: ap,
                alpha_perpendicular: aq,
            },
        )
        .unwrap();
        assert!((w / (base_frequency(&beam) / 4.0) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn asymmetric_lobe_has_linear_term() {
        let beam = presets::reference_beam();
        let field = FieldModel::GaussianLobes(vec![GaussianLobe {
            center: 0.5 * beam.length,
            width: 0.2 * beam.length,
            peak_parallel: 1e7,
            peak_perpendicular: 0.0,
            transverse_scale: 20e-9,
            transverse_offset: 5e-9,
        }]);
        let d = PolarizedBeam {
            field: &field,
            alpha_parallel: 1e-28,
            alpha_perpendicular: 0.0,
        };
        let (v1, v2) = electrostatic_quadratic(&d, &beam).unwrap();
        // Field minimum sits at +x_s, so the beam is pulled towards −x: ∂W/∂x > 0.
        assert!(v1 > 0.0);
        assert!(v2 < 0.0);
    }

    #[test]
    fn sampled_field_matches_parametric_lobe() {
        let beam = presets::reference_beam();
        let lobe = tip_lobe(&beam);
        let n = 4001;
        let ys: Vec<f64> = (0..n).map(|i| beam.length * i as f64 / (n - 1) as f64).collect();
        let (par, perp): (Vec<_>, Vec<_>) = ys.iter().map(|&y| lobe.axial(y)).unzip();
        let sampled = FieldModel::Sampled(SampledField {
            y: ys,
            parallel: par,
            perpendicular: perp,
        });
        let (ap, aq) = presets::cnt_10_0_polarizabilities();
        let v = |f: &FieldModel| {
            electrostatic_quadratic(
                &PolarizedBeam {
                    field: f,
                    alpha_parallel: ap,
                    alpha_perpendicular: aq,
                },
                &beam,
            )
            .unwrap()
            .1
        };
        // Piecewise-linear interpolation error is O(h²).
        assert!(((v(&sampled) - v(&lobe)) / v(&lobe)).abs() < 1e-5);
    }

    #[test]
    fn softening_by_zeta_and_curvature() {
        let beam = presets::reference_beam();
        let w0 = base_frequency(&beam);
        assert!((softened_frequency(&beam, &SofteningSpec::Zeta(4.0)).unwrap() - w0 / 4.0).abs() < 1e-9 * w0);
        let m = beam.effective_mass();
        let half = softened_frequency_from_curvature(&beam, -0.375 * m * w0 * w0).unwrap();
        assert!((half / w0 - 0.5).abs() < 1e-12);
        let near = softened_frequency_from_curvature(&beam, -0.9999 * buckling_curvature(&beam)).unwrap();
        assert!((near / w0 - 1e-2).abs() < 1e-12);
        assert!(softened_frequency(&beam, &SofteningSpec::Zeta(0.5)).is_err());
    }

    #[test]
    fn supercritical_curvature_is_rejected() {
        let beam = presets::reference_beam();
        let crit = buckling_curvature(&beam);
        for f in [1.0, 1.5] {
            match softened_frequency_from_curvature(&beam, -f * crit) {
                Err(Error::Buckling { critical, .. }) => assert_eq!(critical, crit),
                other => panic!("expected buckling, got {other:?}"),
            }
        }
    }
}
