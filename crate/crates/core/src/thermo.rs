//! Canonical thermodynamics of a finite spectrum.
//!
//! All sums are taken relative to the lowest level, `w_k = exp(−β(E_k − E_min))`,
//! so nothing overflows for large `β`. `U` and `C` are the first two weighted
//! moments, which equal the logarithmic derivatives of `Z` for a finite
//! spectrum.

use crate::error::{Error, Result};
use crate::model::{EffectiveHamiltonian, ThermoCurve, ThermoRow};

fn lowest(energies: &[f64]) -> f64 {
    energies.iter().copied().fold(f64::INFINITY, f64::min)
}

fn weights(energies: &[f64], beta: f64) -> (f64, Vec<f64>) {
    let e0 = lowest(energies);
    (e0, energies.iter().map(|e| (-beta * (e - e0)).exp()).collect())
}

/// `ln Z(β)`.
pub fn log_partition_of(energies: &[f64], beta: f64) -> f64 {
    let (e0, w) = weights(energies, beta);
    -beta * e0 + w.iter().sum::<f64>().ln()
}

pub fn avg_energy_of(energies: &[f64], beta: f64) -> f64 {
    let (_, w) = weights(energies, beta);
    let z: f64 = w.iter().sum();
    energies.iter().zip(&w).map(|(e, w)| e * w).sum::<f64>() / z
}

/// `C/k_B = β²(⟨E²⟩ − ⟨E⟩²)`, evaluated as a centred second moment.
pub fn specific_heat_of(energies: &[f64], beta: f64, kb: f64) -> f64 {
    let (_, w) = weights(energies, beta);
    let z: f64 = w.iter().sum();
    let mean = energies.iter().zip(&w).map(|(e, w)| e * w).sum::<f64>() / z;
    let var = energies.iter().zip(&w).map(|(e, w)| (e - mean).powi(2) * w).sum::<f64>() / z;
    kb * beta * beta * var
}

/// `Z_eff(β) = Σ_k e^{−βE_k}`. Can overflow or underflow; see [`log_partition`].
pub fn partition(heff: &EffectiveHamiltonian, beta: f64) -> f64 {
    log_partition(heff, beta).exp()
}

pub fn log_partition(heff: &EffectiveHamiltonian, beta: f64) -> f64 {
    log_partition_of(&heff.energies, beta)
}

pub fn avg_energy(heff: &EffectiveHamiltonian, beta: f64) -> f64 {
    avg_energy_of(&heff.energies, beta)
}

pub fn specific_heat(heff: &EffectiveHamiltonian, beta: f64, kb: f64) -> f64 {
    specific_heat_of(&heff.energies, beta, kb)
}

pub fn validate_beta_grid(betas: &[f64]) -> Result<()> {
    if betas.is_empty() {
        return Err(Error::invalid("betas", "beta grid is empty"));
    }
    if let Some(b) = betas.iter().find(|b| !(b.is_finite() && **b > 0.0)) {
        return Err(Error::invalid("betas", format!("all beta must be finite and > 0, got {b}")));
    }
    if betas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("betas", "beta grid must be strictly increasing"));
    }
    Ok(())
}

/// `(β, 𝒯, ln Z, U, C)` over a strictly increasing grid of `β > 0`.
pub fn thermo_curve(heff: &EffectiveHamiltonian, betas: &[f64], kb: f64) -> Result<ThermoCurve> {
    validate_beta_grid(betas)?;
    let rows = betas
        .iter()
        .map(|&beta| ThermoRow {
            beta,
            temperature: 1.0 / (kb * beta),
            ln_z: log_partition(heff, beta),
            energy: avg_energy(heff, beta),
            specific_heat: specific_heat(heff, beta, kb),
        })
        .collect();
    Ok(ThermoCurve { rows })
}
