use num_complex::Complex64;

use super::hamiltonian::mechanical_hamiltonian;
use super::rates::{transition_rates, RateTable};
use super::steady::SteadyState;
use super::superop::{lindblad, Liouvillian, LiouvillianKind, DEFAULT_NNZ_CAP};
use super::SystemConfig;
use crate::fock::{annihilation, fock_transition, FockOperator, SparseMatrix};
use crate::{Error, Result};

/// Up and down rates out of each level: `up[n]` is the rate `n → n+1`,
/// `down[n]` the rate `n → n−1`.
fn birth_death_rates(config: &SystemConfig, rates: &RateTable) -> (Vec<f64>, Vec<f64>) {
    let d = &config.derived;
    let n_m = config.mech_truncation;
    let up = (0..n_m)
        .map(|n| {
            if n + 1 < n_m {
                (n + 1) as f64 * (rates.plus_total(n + 1) + d.gamma_m * d.n_bar)
            } else {
                0.0
            }
        })
        .collect();
    let down = (0..n_m)
        .map(|n| n as f64 * (rates.minus_total(n) + d.gamma_m * (d.n_bar + 1.0)))
        .collect();
    (up, down)
}

/// Tridiagonal rate matrix `Ṗ = M P` on the phonon populations. Columns
/// sum to zero and off-diagonal entries are non-negative.
pub fn build_reduced_generator(config: &SystemConfig) -> Result<Liouvillian> {
    config.validate()?;
    let n_m = config.mech_truncation;
    let (up, down) = birth_death_rates(config, &transition_rates(config));
    let c = |x: f64| Complex64::new(x, 0.0);
    let mut triplets = Vec::with_capacity(3 * n_m);
    for n in 0..n_m {
        triplets.push((n, n, c(-(up[n] + down[n]))));
        if n + 1 < n_m {
            triplets.push((n + 1, n, c(up[n])));
        }
        if n > 0 {
            triplets.push((n - 1, n, c(down[n])));
        }
    }
    let matrix = SparseMatrix::from_triplets(n_m, n_m, triplets)?;
    Liouvillian::new(config.mech_space().into(), matrix, LiouvillianKind::ReducedPopulation)
}

/// Second-order light shifts of each level, `Σ_j Σ_± 2A±,j^n(Δ_j ∓ δ_n)/κ`.
///
/// An extension beyond the population dynamics: diagonal in the Fock
/// basis, so it never changes steady-state populations.
pub fn reduced_shifts(config: &SystemConfig, rates: &RateTable) -> Vec<f64> {
    let d = &config.derived;
    (1..config.mech_truncation)
        .map(|n| {
            let delta = rates.delta[n - 1];
            d.lasers
                .iter()
                .enumerate()
                .map(|(j, l)| {
                    2.0 * (rates.a_plus[n - 1][j] * (l.detuning - delta) + rates.a_minus[n - 1][j] * (l.detuning + delta))
                        / d.kappa
                })
                .sum()
        })
        .collect()
}

/// Reduced master equation for the mechanical density matrix, with
/// Fock-resolved jump operators `b_n` and optional light shifts.
pub fn build_reduced_master_equation(config: &SystemConfig) -> Result<Liouvillian> {
    config.validate()?;
    let d = &config.derived;
    let mech = config.mech_space();
    let rates = transition_rates(config);
    let mut h = mechanical_hamiltonian(&mech, d.omega_m_prime, d.lambda)?;
    if config.include_reduced_shifts {
        for (n, s) in reduced_shifts(config, &rates).into_iter().enumerate() {
            let bn = fock_transition(&mech, n + 1)?;
            h = h.add(&bn.dagger().mul(&bn)?.scale(Complex64::new(s, 0.0)))?;
        }
    }
    let mut collapse: Vec<FockOperator> = Vec::new();
    let mut push = |rate: f64, op: FockOperator| {
        if rate > 0.0 {
            collapse.push(op.scale(Complex64::new(rate.sqrt(), 0.0)));
        }
    };
    for n in 1..config.mech_truncation {
        let bn = fock_transition(&mech, n)?;
        push(rates.minus_total(n), bn.clone());
        push(rates.plus_total(n), bn.dagger());
    }
    let b = annihilation(&mech);
    push(d.gamma_m * (d.n_bar + 1.0), b.clone());
    push(d.gamma_m * d.n_bar, b.dagger());
    lindblad(&h, &collapse, DEFAULT_NNZ_CAP)
}

/// Steady populations `P_0 … P_{N_cut}` from the neighbour-ratio
/// recursion, accumulated in log space.
///
/// Fails when the tail `P_{N_cut}` is not below `1e-3·max P_n`.
pub fn reduced_steady_populations(config: &SystemConfig, n_cut: usize) -> Result<SteadyState> {
    config.validate()?;
    if n_cut == 0 || n_cut >= config.mech_truncation {
        return Err(Error::InvalidArgument(format!(
            "N_cut must lie in 1..={}, got {n_cut}",
            config.mech_truncation - 1
        )));
    }
    let d = &config.derived;
    let rates = transition_rates(config);
    let mut log_p = Vec::with_capacity(n_cut + 1);
    log_p.push(0.0);
    let mut ratios = Vec::with_capacity(n_cut);
    for n in 1..=n_cut {
        let up = rates.plus_total(n) + d.gamma_m * d.n_bar;
        let down = rates.minus_total(n) + d.gamma_m * (d.n_bar + 1.0);
        if !(down > 0.0) {
            return Err(Error::Numerical(format!("no decay channel out of level {n}")));
        }
        let r = up / down;
        ratios.push(r);
        log_p.push(log_p[n - 1] + r.ln());
    }
    let max = log_p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = log_p.iter().map(|l| (l - max).exp()).collect();
    let norm: f64 = weights.iter().sum();
    let populations: Vec<f64> = weights.iter().map(|w| w / norm).collect();
    let tail = populations[n_cut] / populations.iter().copied().fold(0.0, f64::max);
    if !(tail < 1e-3) {
        let growing = ratios.iter().rev().take_while(|&&r| r >= 1.0).count();
        return Err(Error::Truncation(format!(
            "population tail P_{n_cut}/max P = {tail:.3e} is not below 1e-3 \
             (last {growing} neighbour ratios >= 1); raise the truncation"
        )));
    }
    Ok(SteadyState::from_populations(populations, "ratio_recursion"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::DerivedParams;
    use crate::liouvillian::steady::{steady_state_solve, SolveMethod};
    use crate::presets;

    fn reference_config(n_m: usize) -> SystemConfig {
        SystemConfig::new(presets::reference_effective().derive().unwrap(), n_m).unwrap()
    }

    fn undriven(n_bar: f64, n_m: usize) -> SystemConfig {
        let mut d: DerivedParams = presets::reference_effective().derive().unwrap();
        d.lasers.clear();
        d.n_bar = n_bar;
        SystemConfig::new(d, n_m).unwrap()
    }

    #[test]
    fn columns_sum_to_zero() {
        let l = build_reduced_generator(&reference_config(10)).unwrap();
        let m = l.matrix();
        let scale = m.max_abs();
        for c in 0..10 {
            let s: Complex64 = (0..10).map(|r| m.get(r, c)).sum();
            assert!(s.norm() < 1e-12 * scale);
        }
        for (r, c, v) in m.triplets() {
            if r != c {
                assert!(v.re >= 0.0 && v.im == 0.0);
            }
        }
    }

    #[test]
    fn undriven_chain_is_thermal() {
        let s = reduced_steady_populations(&undriven(1.0, 60), 59).unwrap();
        for (n, p) in s.populations.iter().enumerate() {
            let bose = 0.5f64.powi(n as i32 + 1);
            assert!((p / bose - 1.0).abs() < 1e-12, "{n}");
        }
    }

    #[test]
    fn null_vector_matches_recursion() {
        let c = reference_config(10);
        let rec = reduced_steady_populations(&c, 9).unwrap();
        let null = steady_state_solve(&build_reduced_generator(&c).unwrap(), SolveMethod::Dense).unwrap();
        for (a, b) in rec.populations.iter().zip(&null.populations) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn ground_state_cooling_limit() {
        // Linear regime (λ ≪ κ) so every level is cooled resonantly.
        let mut d = presets::reference_effective().derive().unwrap();
        d.lambda = 1e-3 * d.kappa;
        d.omega_m_prime = d.omega_m + d.lambda;
        d.lasers.truncate(1);
        d.lasers[0].detuning = -d.transition_frequency(1);
        let c = SystemConfig::new(d, 8).unwrap();
        let s = reduced_steady_populations(&c, 7).unwrap();
        assert!(s.populations[0] > 0.99, "{:?}", s.populations);
    }

    #[test]
    fn reference_fock_one() {
        let s = reduced_steady_populations(&reference_config(10), 9).unwrap();
        assert!((s.populations[1] - 0.949).abs() < 0.002, "{:?}", s.populations);
    }

    #[test]
    fn heating_without_cooling_overflows_tail() {
        let mut d = presets::reference_effective().derive().unwrap();
        d.lasers.truncate(1);
        d.lambda = 1e-3;
        d.omega_m_prime = d.omega_m;
        d.lasers[0].detuning = d.omega_m_prime;
        let c = SystemConfig::new(d, 8).unwrap();
        assert!(matches!(reduced_steady_populations(&c, 7), Err(Error::Truncation(_))));
    }

    #[test]
    fn reduced_master_equation_has_recursion_populations() {
        for shifts in [false, true] {
            let mut c = reference_config(7);
            c.include_reduced_shifts = shifts;
            let l = build_reduced_master_equation(&c).unwrap();
            assert!(l.trace_defect() < 1e-10 * l.matrix().max_abs());
            let ss = steady_state_solve(&l, SolveMethod::Dense).unwrap();
            let rec = reduced_steady_populations(&c, 6).unwrap();
            for (a, b) in rec.populations.iter().zip(&ss.populations) {
                assert!((a - b).abs() < 1e-9, "shifts={shifts}");
            }
        }
    }
}
