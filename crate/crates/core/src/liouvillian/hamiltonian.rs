use num_complex::Complex64;

use super::SystemConfig;
use crate::fock::{annihilation, lift, number, FockOperator, FockSpace};
use crate::Result;

/// `H/ħ` (rad/s) in the frame rotating with each laser:
///
/// `Σ_j[−Δ_j a_j†a_j + (g_j*/2 a_j + g_j/2 a_j†)(b + b†)] + ω_m′b†b + (λ/2)b†b†bb`
pub fn build_full_hamiltonian(config: &SystemConfig) -> Result<FockOperator> {
    config.validate()?;
    let space = config.space();
    let d = &config.derived;
    let mech = config.mech_space();
    let b = lift(&annihilation(&mech), &space, 0)?;
    let x = b.add(&b.dagger())?;
    let mut h = lift(&mechanical_hamiltonian(&mech, d.omega_m_prime, d.lambda)?, &space, 0)?;
    for (j, laser) in d.lasers.iter().enumerate() {
        let cav = space.factor(j + 1)?.clone();
        let a = lift(&annihilation(&cav), &space, j + 1)?;
        let n = lift(&number(&cav), &space, j + 1)?;
        let g = laser.coupling;
        let drive = a.scale(g.conj() * 0.5).add(&a.dagger().scale(g * 0.5))?;
        h = h.add(&n.scale(Complex64::new(-laser.detuning, 0.0)))?.add(&drive.mul(&x)?)?;
    }
    Ok(h)
}

/// `ω b†b + (λ/2)b†b†bb`, diagonal with entries `ωn + (λ/2)n(n−1)`.
pub fn mechanical_hamiltonian(space: &FockSpace, omega: f64, lambda: f64) -> Result<FockOperator> {
    let n = number(space);
    let b = annihilation(space);
    let bd = b.dagger();
    let quartic = bd.mul(&bd)?.mul(&b)?.mul(&b)?;
    n.scale(Complex64::new(omega, 0.0)).add(&quartic.scale(Complex64::new(0.5 * lambda, 0.0)))
}
