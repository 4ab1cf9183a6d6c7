use std::f64::consts::FRAC_2_PI;
use std::io::{self, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fock::DensityMatrix;
use crate::{Error, Result};

pub const WIGNER_CSV_SCHEMA: &str = "# nanofock wigner v1";

/// Allowed deviation of the grid integral from one before a warning is raised.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-3;

/// Mantissas are renormalised once they leave `[1e-100, 1e100]`.
const RESCALE: f64 = 1e100;

/// Rectangular grid over the α-plane, `α = x + i p`.
///
/// The convention is the one where the vacuum reads `W(0,0) = 2/π` and
/// `∫∫ W dx dp = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub points_x: usize,
    pub points_p: usize,
}

impl WignerGrid {
    pub fn square(extent: f64, points: usize) -> Self {
        Self {
            x_min: -extent,
            x_max: extent,
            p_min: -extent,
            p_max: extent,
            points_x: points,
            points_p: points,
        }
    }

    /// Square grid reaching `r = 4 + √n_levels` with step 0.05 or finer.
    pub fn for_levels(n_levels: usize) -> Self {
        let extent = 4.0 + (n_levels as f64).sqrt();
        let points = ((2.0 * extent / 0.05).ceil() as usize + 1).max(101) | 1;
        Self::square(extent, points)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.points_x >= 2
            && self.points_p >= 2
            && self.x_min.is_finite()
            && self.p_min.is_finite()
            && self.x_max > self.x_min
            && self.p_max > self.p_min
            && self.x_max.is_finite()
            && self.p_max.is_finite();
        if !ok {
            return Err(Error::InvalidArgument(format!("degenerate Wigner grid {self:?}")));
        }
        Ok(())
    }

    pub fn step_x(&self) -> f64 {
        (self.x_max - self.x_min) / (self.points_x - 1) as f64
    }

    pub fn step_p(&self) -> f64 {
        (self.p_max - self.p_min) / (self.points_p - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.step_x()
    }

    pub fn p(&self, j: usize) -> f64 {
        self.p_min + j as f64 * self.step_p()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerData {
    pub grid: WignerGrid,
    /// `values[j·points_x + i]` at `(x_i, p_j)`.
    pub values: Vec<f64>,
    pub origin_value: f64,
    pub min_value: f64,
    /// `(x, p)` of `min_value`.
    pub min_location: (f64, f64),
    pub max_value: f64,
    /// Trapezoidal integral over the grid.
    pub normalization: f64,
    pub warnings: Vec<String>,
}

impl WignerData {
    fn assemble(grid: WignerGrid, values: Vec<f64>, origin_value: f64) -> Self {
        let nx = grid.points_x;
        let (mut min_value, mut min_location) = (origin_value, (0.0, 0.0));
        let mut max_value = origin_value;
        for (k, &v) in values.iter().enumerate() {
            if v < min_value {
                min_value = v;
                min_location = (grid.x(k % nx), grid.p(k / nx));
            }
            max_value = max_value.max(v);
        }
        let normalization = trapezoid_2d(&grid, &values);
        let mut warnings = Vec::new();
        if (normalization - 1.0).abs() > NORMALIZATION_TOLERANCE {
            warnings.push(format!(
                "grid integral {normalization:.6} deviates from 1 by more than {NORMALIZATION_TOLERANCE}; extend or refine the grid"
            ));
        }
        Self {
            grid,
            values,
            origin_value,
            min_value,
            min_location,
            max_value,
            normalization,
            warnings,
        }
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid.points_x + i]
    }

    pub fn is_negative(&self) -> bool {
        self.min_value < 0.0
    }

    /// `tag` is appended to the schema comment line.
    pub fn write_csv<W: Write>(&self, mut w: W, tag: Option<&str>) -> io::Result<()> {
        match tag {
            Some(t) => writeln!(w, "{WIGNER_CSV_SCHEMA} {t}")?,
            None => writeln!(w, "{WIGNER_CSV_SCHEMA}")?,
        }
        writeln!(w, "x,p,w")?;
        for j in 0..self.grid.points_p {
            for i in 0..self.grid.points_x {
                writeln!(
                    w,
                    "{:.16e},{:.16e},{:.16e}",
                    self.grid.x(i),
                    self.grid.p(j),
                    self.value(i, j)
                )?;
            }
        }
        Ok(())
    }
}

fn trapezoid_2d(grid: &WignerGrid, values: &[f64]) -> f64 {
    let (nx, np) = (grid.points_x, grid.points_p);
    let weight = |k: usize, n: usize| if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
    let mut sum = 0.0;
    for j in 0..np {
        for i in 0..nx {
            sum += weight(i, nx) * weight(j, np) * values[j * nx + i];
        }
    }
    sum * grid.step_x() * grid.step_p()
}

/// `(2/π) Σ (−1)ⁿ Pₙ`.
pub fn wigner_origin(populations: &[f64]) -> f64 {
    let alternating: f64 = populations
        .iter()
        .enumerate()
        .map(|(n, p)| if n % 2 == 0 { *p } else { -*p })
        .sum();
    FRAC_2_PI * alternating
}

/// `w_m = e^{log_weight(m)} · L_m^{(k)}(x)` for `m = 0..count` by upward
/// recurrence, carrying a running exponent so neither factor overflows.
fn weighted_laguerre(count: usize, k: usize, x: f64, log_weight: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    let kf = k as f64;
    let (mut prev, mut cur, mut scale) = (0.0, 1.0, 0.0f64);
    for m in 0..count {
        if m > 0 {
            let mf = (m - 1) as f64;
            let next = ((2.0 * mf + 1.0 + kf - x) * cur - (mf + kf) * prev) / (mf + 1.0);
            prev = cur;
            cur = next;
        }
        let mag = cur.abs();
        if mag > RESCALE || (mag < 1.0 / RESCALE && mag > 0.0) {
            let s = mag.ln();
            prev /= mag;
            cur /= mag;
            scale += s;
        }
        out.push(cur * (scale + log_weight(m)).exp());
    }
    out
}

/// `W(r) = (2/π) e^{−2r²} Σ Pₙ (−1)ⁿ Lₙ(4r²)` at `|α|² = r2`.
fn radial_value(populations: &[f64], r2: f64) -> f64 {
    let x = 4.0 * r2;
    let terms = weighted_laguerre(populations.len(), 0, x, |_| -0.5 * x);
    FRAC_2_PI
        * populations
            .iter()
            .zip(terms)
            .enumerate()
            .map(|(n, (p, l))| if n % 2 == 0 { p * l } else { -p * l })
            .sum::<f64>()
}

/// `W(r)` of a phase-insensitive state along the radii `r`.
pub fn wigner_radial_profile(populations: &[f64], radii: &[f64]) -> Result<Vec<f64>> {
    check_populations(populations)?;
    Ok(radii.par_iter().map(|r| radial_value(populations, r * r)).collect())
}

/// Field of a phase-insensitive state with Fock populations `P`.
pub fn wigner_from_populations(populations: &[f64], grid: &WignerGrid) -> Result<WignerData> {
    grid.validate()?;
    check_populations(populations)?;
    let radial = |r2: f64| radial_value(populations, r2);
    let nx = grid.points_x;
    let values: Vec<f64> = (0..nx * grid.points_p)
        .into_par_iter()
        .map(|k| {
            let (x, p) = (grid.x(k % nx), grid.p(k / nx));
            radial(x * x + p * p)
        })
        .collect();
    Ok(WignerData::assemble(grid.clone(), values, wigner_origin(populations)))
}

/// Field of an arbitrary single-mode density matrix,
/// `W(α) = (2/π) Σ_{mn} ρ_{mn} (−1)^m ⟨n|D(2α)|m⟩`.
pub fn wigner_from_density_matrix(rho: &DensityMatrix, grid: &WignerGrid) -> Result<WignerData> {
    grid.validate()?;
    if rho.space().num_factors() != 1 {
        return Err(Error::InvalidArgument(format!(
            "Wigner function needs a single-mode state, got {}",
            rho.space()
        )));
    }
    let defect = rho.hermiticity_defect();
    if defect > 1e-10 {
        return Err(Error::InvalidState(format!(
            "density matrix is not Hermitian (defect {defect:.3e})"
        )));
    }
    let dim = rho.dim();
    let log_fact: Vec<f64> = std::iter::once(0.0)
        .chain((1..dim).scan(0.0, |acc, i| {
            *acc += (i as f64).ln();
            Some(*acc)
        }))
        .collect();

    let at = |x: f64, p: f64| -> f64 {
        let beta = Complex64::new(2.0 * x, 2.0 * p);
        let b2 = beta.norm_sqr();
        let (log_abs, phase) = (beta.norm().ln(), beta.arg());
        let mut sum = 0.0;
        for k in 0..dim {
            // ⟨m+k|D(β)|m⟩ = √(m!/(m+k)!) β^k e^{−|β|²/2} L_m^{(k)}(|β|²).
            let kf = k as f64;
            let terms = weighted_laguerre(dim - k, k, b2, |m| {
                if k == 0 {
                    -0.5 * b2
                } else {
                    0.5 * (log_fact[m] - log_fact[m + k]) + kf * log_abs - 0.5 * b2
                }
            });
            let rot = Complex64::from_polar(1.0, kf * phase);
            for (m, t) in terms.into_iter().enumerate() {
                let n = m + k;
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                if k == 0 {
                    sum += sign * rho.get(m, m).re * t;
                } else {
                    // ρ_{m,n}(−1)^m⟨n|D|m⟩ + ρ_{n,m}(−1)^n⟨m|D|n⟩, with
                    // ⟨m|D(β)|n⟩ = (−1)^k conj(⟨n|D(β)|m⟩) for real L.
                    let d = rot * t;
                    let sign_n = if n % 2 == 0 { 1.0 } else { -1.0 };
                    let parity_k = if k % 2 == 0 { 1.0 } else { -1.0 };
                    let z = rho.get(m, n) * d * sign + rho.get(n, m) * d.conj() * (sign_n * parity_k);
                    sum += z.re;
                }
            }
        }
        FRAC_2_PI * sum
    };

    let nx = grid.points_x;
    let values: Vec<f64> = (0..nx * grid.points_p)
        .into_par_iter()
        .map(|k| at(grid.x(k % nx), grid.p(k / nx)))
        .collect();
    let origin = at(0.0, 0.0);
    Ok(WignerData::assemble(grid.clone(), values, origin))
}

fn check_populations(populations: &[f64]) -> Result<()> {
    if populations.is_empty() {
        return Err(Error::InvalidArgument("empty population vector".into()));
    }
    if let Some(p) = populations.iter().find(|p| !p.is_finite() || **p < -1e-12) {
        return Err(Error::InvalidArgument(format!("invalid population {p}")));
    }
    let total: f64 = populations.iter().sum();
    if (total - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidArgument(format!(
            "populations sum to {total}, expected 1"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{annihilation, creation, FockSpace};
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn unit(n: usize, dim: usize) -> Vec<f64> {
        let mut p = vec![0.0; dim];
        p[n] = 1.0;
        p
    }

    #[test]
    fn vacuum_and_one_phonon() {
        let g = WignerGrid::for_levels(2);
        let vac = wigner_from_populations(&unit(0, 2), &g).unwrap();
        assert!((vac.origin_value - 2.0 / PI).abs() < 1e-15);
        assert!((vac.normalization - 1.0).abs() < 1e-3);
        assert!(vac.warnings.is_empty());
        // Gaussian profile (2/π)e^{−2r²}.
        let (i, j) = (g.points_x / 2 + 10, g.points_p / 2 - 7);
        let r2 = g.x(i).powi(2) + g.p(j).powi(2);
        assert!((vac.value(i, j) - 2.0 / PI * (-2.0 * r2).exp()).abs() < 1e-14);

        let one = wigner_from_populations(&unit(1, 2), &g).unwrap();
        assert!((one.origin_value + 2.0 / PI).abs() < 1e-15);
        assert!((one.min_value + 2.0 / PI).abs() < 1e-12);
        assert!((one.normalization - 1.0).abs() < 1e-3);
    }

    #[test]
    fn coarse_grid_warns() {
        let g = WignerGrid::square(1.0, 5);
        let w = wigner_from_populations(&unit(0, 3), &g).unwrap();
        assert_eq!(w.warnings.len(), 1);
    }

    #[test]
    fn high_fock_state_stays_finite() {
        let dim = 400;
        let g = WignerGrid {
            x_min: 0.0,
            x_max: 30.0,
            p_min: 0.0,
            p_max: 0.1,
            points_x: 301,
            points_p: 2,
        };
        let w = wigner_from_populations(&unit(dim - 1, dim), &g).unwrap();
        assert!(w.values.iter().all(|v| v.is_finite() && v.abs() <= 2.0 / PI + 1e-9));
        assert!((w.origin_value + 2.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn radial_profile_matches_grid() {
        let p = [0.1, 0.6, 0.2, 0.1];
        let g = WignerGrid::square(2.0, 21);
        let w = wigner_from_populations(&p, &g).unwrap();
        let radii: Vec<f64> = (10..21).map(|i| g.x(i)).collect();
        let profile = wigner_radial_profile(&p, &radii).unwrap();
        for (k, v) in profile.iter().enumerate() {
            assert!((v - w.value(10 + k, 10)).abs() < 1e-15);
        }
    }

    #[test]
    fn thermal_origin_value() {
        let s = FockSpace::new(60, "m").unwrap();
        let rho = DensityMatrix::thermal(&s, 1.0).unwrap();
        let g = WignerGrid::square(1.0, 3);
        let w = wigner_from_density_matrix(&rho, &g).unwrap();
        assert!((w.origin_value - 2.0 / PI / 3.0).abs() < 1e-12);
        let wp = wigner_from_populations(&rho.populations(), &g).unwrap();
        assert!((wp.origin_value - 2.0 / PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn displaced_vacuum_is_shifted_gaussian() {
        let dim = 40;
        let s = FockSpace::new(dim, "m").unwrap();
        let alpha = Complex64::new(0.8, -0.5);
        let to_na = |op: &crate::fock::FockOperator| {
            DMatrix::from_row_slice(dim, dim, &op.to_dense(dim).unwrap())
        };
        let gen = to_na(&creation(&s)) * alpha - to_na(&annihilation(&s)) * alpha.conj();
        let d = gen.exp();
        let psi: Vec<Complex64> = d.column(0).iter().copied().collect();
        let rho = DensityMatrix::pure(s, &psi).unwrap();
        let g = WignerGrid::square(3.0, 41);
        let w = wigner_from_density_matrix(&rho, &g).unwrap();
        for j in 0..g.points_p {
            for i in 0..g.points_x {
                let r2 = (g.x(i) - alpha.re).powi(2) + (g.p(j) - alpha.im).powi(2);
                let expect = 2.0 / PI * (-2.0 * r2).exp();
                assert!((w.value(i, j) - expect).abs() < 1e-9, "({i},{j})");
            }
        }
        assert!((w.max_value - 2.0 / PI).abs() < 0.05);
    }

    #[test]
    fn density_path_rejects_non_hermitian() {
        let s = FockSpace::new(2, "m").unwrap();
        let data = vec![
            Complex64::new(0.5, 0.0),
            Complex64::new(0.3, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.5, 0.0),
        ];
        let rho = DensityMatrix::from_dense_unchecked(s, data).unwrap();
        assert!(wigner_from_density_matrix(&rho, &WignerGrid::square(1.0, 3)).is_err());
    }

    #[test]
    fn population_checks() {
        let g = WignerGrid::square(1.0, 3);
        assert!(wigner_from_populations(&[], &g).is_err());
        assert!(wigner_from_populations(&[0.5, 0.4], &g).is_err());
        assert!(wigner_from_populations(&[1.2, -0.2], &g).is_err());
    }

    fn distribution(dim: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..1.0, dim).prop_filter_map("nonzero", |v| {
            let s: f64 = v.iter().sum();
            (s > 1e-3).then(|| v.iter().map(|x| x / s).collect())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn origin_matches_alternating_sum(p in distribution(12)) {
            let g = WignerGrid::square(1.0, 3);
            let w = wigner_from_populations(&p, &g).unwrap();
            let expect: f64 = p.iter().enumerate().map(|(n, x)| (-1f64).powi(n as i32) * x).sum::<f64>() * 2.0 / PI;
            prop_assert!((w.origin_value - expect).abs() < 1e-12);
            // Centre grid point evaluates the series rather than the closed sum.
            prop_assert!((w.value(1, 1) - expect).abs() < 1e-12);
        }

        #[test]
        fn normalized_and_bounded(p in distribution(8)) {
            let w = wigner_from_populations(&p, &WignerGrid::for_levels(8)).unwrap();
            prop_assert!((w.normalization - 1.0).abs() < 1e-3);
            prop_assert!(w.values.iter().all(|v| v.abs() <= 2.0 / PI + 1e-9));
        }

        #[test]
        fn diagonal_density_matches_populations(p in distribution(6)) {
            let s = FockSpace::new(6, "m").unwrap();
            let rho = DensityMatrix::diagonal(s, &p).unwrap();
            let g = WignerGrid::square(3.0, 15);
            let a = wigner_from_populations(&p, &g).unwrap();
            let b = wigner_from_density_matrix(&rho, &g).unwrap();
            for (x, y) in a.values.iter().zip(&b.values) {
                prop_assert!((x - y).abs() < 1e-10);
            }
            prop_assert!((a.origin_value - b.origin_value).abs() < 1e-10);
        }
    }
}
