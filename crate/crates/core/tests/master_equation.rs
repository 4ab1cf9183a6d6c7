use nanofock::device::DerivedParams;
use nanofock::fock::DensityMatrix;
use nanofock::liouvillian::{
    build_full_liouvillian, build_reduced_generator, evolve_density, reduced_steady_populations,
    steady_state_solve, time_evolve, EvolveOptions, SolveMethod, SteadyState, SystemConfig,
};
use nanofock::observables::{wigner_from_density_matrix, WignerGrid};
use nanofock::{presets, Complex64};

fn reference() -> DerivedParams {
    presets::reference_effective().derive().unwrap()
}

fn full_steady(config: &SystemConfig) -> SteadyState {
    steady_state_solve(&build_full_liouvillian(config).unwrap(), SolveMethod::Auto).unwrap()
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// reference drives with `|g| = ratio·κ` and a cold bath.
fn weak_coupling(ratio: f64) -> DerivedParams {
    let mut d = reference();
    for l in &mut d.lasers {
        l.coupling *= ratio * d.kappa / l.coupling.norm();
    }
    d.n_bar = 0.5;
    d
}

#[test]
fn detailed_balance_reduction_tightens_with_weaker_coupling() {
    let mut previous = f64::INFINITY;
    for (ratio, tol) in [(0.04, 0.05), (0.01, 0.01)] {
        let config = SystemConfig::new(weak_coupling(ratio), 6).unwrap();
        let full = full_steady(&config);
        let reduced = reduced_steady_populations(&config, 5).unwrap();
        let gap = max_gap(&full.populations, &reduced.populations);
        assert!(gap <= tol, "|g|/κ = {ratio}: gap {gap}");
        assert!(gap < previous);
        previous = gap;
    }
}

#[test]
fn relabelling_cavities_leaves_mechanics_invariant() {
    let d = reference();
    let mut swapped = d.clone();
    swapped.lasers.reverse();
    let a = full_steady(&SystemConfig::new(d, 4).unwrap());
    let b = full_steady(&SystemConfig::new(swapped, 4).unwrap());
    assert_eq!(a.diagnostics.method, "dense_lu");
    assert!(max_gap(&a.populations, &b.populations) < 1e-10);
}

#[test]
fn reference_full_marginal_is_wigner_negative() {
    let config = SystemConfig::new(reference(), 8).unwrap();
    let ss = full_steady(&config);
    let mech = ss.rho.as_ref().unwrap().partial_trace(0).unwrap();
    let w = wigner_from_density_matrix(&mech, &WignerGrid::for_levels(8)).unwrap();
    assert!(w.origin_value < -0.45, "W(0,0) = {}", w.origin_value);
    assert!((w.origin_value - w.min_value).abs() < 1e-3);
    assert!(w.warnings.is_empty());
}

#[test]
fn reduced_dynamics_relax_to_the_recursion() {
    let config = SystemConfig::new(reference(), 10).unwrap();
    let generator = build_reduced_generator(&config).unwrap();
    let target = reduced_steady_populations(&config, 9).unwrap().populations;
    let start: Vec<Complex64> = (0..10).map(|_| Complex64::new(0.1, 0.0)).collect();
    let options = EvolveOptions {
        samples: 20,
        ..Default::default()
    };
    // The slowest mode is thermal exchange of the upper levels, ~3e2 s⁻¹.
    let traj = time_evolve(&generator, &start, 6e-2, options).unwrap();
    let distance: Vec<f64> = traj
        .states
        .iter()
        .map(|x| x.iter().zip(&target).map(|(p, q)| (p.re - q).abs()).sum())
        .collect();
    assert!(distance.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{distance:?}");
    assert!(*distance.last().unwrap() < 1e-6, "{distance:?}");
}

/// Explicit integration of the full generator is limited to the early
/// relaxation; the long-time limit is covered by the reduced dynamics above.
#[test]
fn reference_full_dynamics_approach_the_steady_state() {
    let config = SystemConfig::new(reference(), 8).unwrap();
    let l = build_full_liouvillian(&config).unwrap();
    let ss = steady_state_solve(&l, SolveMethod::Auto).unwrap();
    let target = ss.rho.unwrap();

    let mech = DensityMatrix::thermal(&config.mech_space(), config.derived.n_bar).unwrap();
    let mut rho0 = mech;
    for space in config.space().factors()[1..].iter() {
        rho0 = rho0.tensor(&DensityMatrix::basis_state(space.clone(), 0).unwrap()).unwrap();
    }
    let options = EvolveOptions {
        samples: 4,
        tolerance: 1e-8,
        ..Default::default()
    };
    let traj = evolve_density(&l, &rho0, 1e-4, options).unwrap();
    let distance: Vec<f64> = (0..traj.states.len())
        .map(|k| traj.density(&l, k).unwrap().trace_distance(&target).unwrap())
        .collect();
    assert!(distance.windows(2).all(|w| w[1] < w[0]), "{distance:?}");
    assert!(*distance.last().unwrap() < 0.6 * distance[0], "{distance:?}");
    for k in 0..traj.states.len() {
        let tr = traj.density(&l, k).unwrap().trace().re;
        assert!((tr - 1.0).abs() < 1e-8);
    }
}
