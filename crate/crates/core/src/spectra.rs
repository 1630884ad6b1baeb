//! Diagonalization of the transition matrix and the effective Hamiltonian.
//!
//! The eigenvalues `D_k` of `M(T)` are `exp(−E_k T/ħ)`, so energies follow as
//! `E_k = −(ħ/T) ln D_k`, and the eigenvectors give the expansion
//! `U†_{ik} = <e_i|E_k>` of each state in the box basis.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{EffectiveHamiltonian, Lattice, MatrixSource, PhysicalParams, SquareMatrix, TransitionMatrix};

pub const DEFAULT_DROP_THRESHOLD: f64 = 1e-12;
pub const MAX_SWEEPS: usize = 100;
const OFF_DIAGONAL_TOLERANCE: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    /// Descending.
    pub values: Vec<f64>,
    /// `vectors[k]` is the unit eigenvector of `values[k]`.
    pub vectors: Vec<Vec<f64>>,
    pub sweeps: usize,
}

impl EigenDecomposition {
    /// `U† diag(D) U`.
    pub fn reconstruct(&self) -> SquareMatrix {
        let n = self.values.len();
        SquareMatrix::from_fn(n, |i, j| {
            self.values
                .iter()
                .zip(&self.vectors)
                .map(|(d, v)| d * v[i] * v[j])
                .sum()
        })
    }
}

fn off_diagonal_norm(a: &SquareMatrix) -> f64 {
    let n = a.size();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[(i, j)] * a[(i, j)];
            }
        }
    }
    sum.sqrt()
}

fn dump(a: &SquareMatrix) -> String {
    let mut out = String::new();
    for i in 0..a.size() {
        let row: Vec<String> = (0..a.size()).map(|j| format!("{:.17e}", a[(i, j)])).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

/// Cyclic Jacobi eigensolver for a real symmetric matrix.
///
/// Sweeps over all `(p, q)` pairs until the off-diagonal Frobenius norm is
/// below `1e-13·‖M‖_F`. Eigenvalues come back descending; each eigenvector is
/// signed so that its largest-magnitude component is positive (ties go to the
/// lowest index).
pub fn eigh_symmetric(m: &SquareMatrix) -> Result<EigenDecomposition> {
    if !m.is_symmetric() {
        return Err(Error::invalid("matrix", "eigh_symmetric requires an exactly symmetric matrix"));
    }
    let n = m.size();
    let mut a = m.clone();
    let mut v = SquareMatrix::identity(n);
    let target = OFF_DIAGONAL_TOLERANCE * m.frobenius();
    let mut sweeps = 0;

    loop {
        let off = off_diagonal_norm(&a);
        if off <= target || off == 0.0 {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps, off_norm: off, dump: dump(m) });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let (app, aqq) = (a[(p, p)], a[(q, q)]);
                let g = 100.0 * apq.abs();
                // negligible against both diagonal entries: zero it outright
                if sweeps > 4 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = (t * t + 1.0).sqrt().recip();
                let s = t * c;
                let tau = s / (1.0 + c);
                a[(p, p)] = app - t * apq;
                a[(q, q)] = aqq + t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for r in 0..n {
                    if r != p && r != q {
                        let (g, h) = (a[(r, p)], a[(r, q)]);
                        let rp = g - s * (h + g * tau);
                        let rq = h + s * (g - h * tau);
                        a[(r, p)] = rp;
                        a[(p, r)] = rp;
                        a[(r, q)] = rq;
                        a[(q, r)] = rq;
                    }
                    let (g, h) = (v[(r, p)], v[(r, q)]);
                    v[(r, p)] = g - s * (h + g * tau);
                    v[(r, q)] = h + s * (g - h * tau);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(y, y)].total_cmp(&a[(x, x)]));
    let values = order.iter().map(|&k| a[(k, k)]).collect();
    let vectors = order
        .iter()
        .map(|&k| {
            let mut col: Vec<f64> = (0..n).map(|r| v[(r, k)]).collect();
            fix_sign(&mut col);
            col
        })
        .collect();
    Ok(EigenDecomposition { values, vectors, sweeps })
}

fn fix_sign(vec: &mut [f64]) {
    let max = vec.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(lead) = vec.iter().find(|x| x.abs() >= max * (1.0 - 1e-9)) {
        if *lead < 0.0 {
            vec.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Converts eigenvalues to energies, dropping `D_k ≤ drop_threshold`.
pub fn extract_spectrum(
    decomp: &EigenDecomposition,
    params: &PhysicalParams,
    lattice: &Lattice,
    source: MatrixSource,
    drop_threshold: f64,
) -> Result<EffectiveHamiltonian> {
    let scale = params.hbar() / params.time();
    let mut energies = Vec::new();
    let mut states = Vec::new();
    for (d, vec) in decomp.values.iter().zip(&decomp.vectors) {
        if *d > drop_threshold {
            energies.push(-scale * d.ln());
            states.push(vec.clone());
        }
    }
    let dropped = decomp.values.len() - energies.len();
    if energies.is_empty() {
        return Err(Error::NotPositive { dropped });
    }
    Ok(EffectiveHamiltonian {
        energies,
        states,
        dropped,
        lattice: *lattice,
        time: params.time(),
        source,
    })
}

/// `ψ_k` on box `i`: `U†_{ik}/√Δx`, so that `Σ_i ψ_k(i)² Δx = 1`.
pub fn wavefunction(heff: &EffectiveHamiltonian, k: usize, i: usize) -> f64 {
    heff.states[k][i] / heff.lattice.spacing().sqrt()
}

/// All box amplitudes of state `k`.
pub fn wavefunction_values(heff: &EffectiveHamiltonian, k: usize) -> Vec<f64> {
    (0..heff.lattice.count()).map(|i| wavefunction(heff, k, i)).collect()
}

/// Diagonalize `M(T)` and assemble `H_eff`.
pub fn build_heff(
    matrix: &TransitionMatrix,
    params: &PhysicalParams,
    lattice: &Lattice,
    drop_threshold: f64,
) -> Result<EffectiveHamiltonian> {
    if matrix.size() != lattice.count() {
        return Err(Error::invalid(
            "matrix",
            format!("size {} does not match lattice of {} boxes", matrix.size(), lattice.count()),
        ));
    }
    let params = params.with_time(matrix.time)?;
    let decomp = eigh_symmetric(&matrix.elements)?;
    extract_spectrum(&decomp, &params, lattice, matrix.source, drop_threshold)
}
