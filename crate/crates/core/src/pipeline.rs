//! Config-driven composition of matrix construction, diagonalization and
//! analytic references.

use crate::config::{Route, RunConfig};
use crate::error::{Error, Result};
use crate::model::{EffectiveHamiltonian, Lattice, PhysicalParams, Potential, TransitionMatrix};
use crate::oracle::{self, KernelSpec};
use crate::quadrature::GaussLegendre;
use crate::sampler;
use crate::spectra;

/// A transition matrix together with the effective Hamiltonian built from it.
#[derive(Debug, Clone)]
pub struct Solution {
    pub route: Route,
    pub matrix: TransitionMatrix,
    pub heff: EffectiveHamiltonian,
}

/// Analytic kernel matching the configured potential, if there is one.
pub fn kernel_for(potential: &Potential) -> Option<KernelSpec> {
    match potential {
        Potential::Harmonic { omega } => Some(KernelSpec::Harmonic { omega: *omega }),
        p if p.is_free() => Some(KernelSpec::Free),
        _ => None,
    }
}

pub fn build_matrix(cfg: &RunConfig) -> Result<TransitionMatrix> {
    cfg.validate()?;
    let params = cfg.physics()?;
    let lattice = cfg.lattice()?;
    match cfg.sampler.route {
        Route::Mc => sampler::estimate_matrix(&params, &lattice, &cfg.potential, &cfg.sampler_config()),
        Route::Free => Ok(oracle::free_box_matrix(&params, &lattice)),
        Route::Exact => {
            let kernel = kernel_for(&cfg.potential).ok_or_else(|| {
                Error::invalid("sampler.route", format!("no analytic kernel for {}", cfg.potential))
            })?;
            Ok(oracle::exact_box_matrix(kernel, &params, &lattice, cfg.sampler.quadrature_order))
        }
    }
}

pub fn solve(cfg: &RunConfig) -> Result<Solution> {
    let matrix = build_matrix(cfg)?;
    let heff = spectra::build_heff(&matrix, &cfg.physics()?, &cfg.lattice()?, cfg.spectrum.drop_threshold)?;
    Ok(Solution { route: cfg.sampler.route, matrix, heff })
}

/// Same config, different route.
pub fn with_route(cfg: &RunConfig, route: Route) -> RunConfig {
    let mut out = cfg.clone();
    out.sampler.route = route;
    out
}

/// Exact energies of the continuum problem: the lowest `limit` oscillator
/// levels, or all `sech²` bound states. `None` for other potentials.
pub fn exact_energies(params: &PhysicalParams, potential: &Potential, limit: usize) -> Option<Vec<f64>> {
    match potential {
        Potential::Harmonic { omega } => {
            Some((0..limit).map(|n| oracle::ho_exact_energy(params.hbar(), *omega, n)).collect())
        }
        Potential::Sech2 { depth, width } => Some(oracle::sech2_exact_spectrum(params, *depth, *width)),
        _ => None,
    }
}

/// Box averages of the analytic oscillator eigenfunction `ψ_n`.
pub fn ho_box_averages(params: &PhysicalParams, omega: f64, n: usize, lattice: &Lattice) -> Vec<f64> {
    let gl = GaussLegendre::new(32);
    (0..lattice.count())
        .map(|i| {
            let (a, b) = (lattice.node(i), lattice.node(i + 1));
            gl.integrate(a, b, |x| oracle::ho_wavefunction(params, omega, n, x)) / lattice.spacing()
        })
        .collect()
}

/// Flips `values` if it overlaps negatively with `reference`.
pub fn align_sign(values: &mut [f64], reference: &[f64]) {
    let overlap: f64 = values.iter().zip(reference).map(|(a, b)| a * b).sum();
    if overlap < 0.0 {
        values.iter_mut().for_each(|v| *v = -*v);
    }
}

pub fn check_states(heff: &EffectiveHamiltonian, states: &[usize]) -> Result<()> {
    match states.iter().find(|&&k| k >= heff.kept()) {
        Some(k) => Err(Error::invalid(
            "output.states",
            format!("state {k} requested but only K = {} states were kept", heff.kept()),
        )),
        None => Ok(()),
    }
}
