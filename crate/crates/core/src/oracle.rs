//! Analytic reference results: Euclidean kernels, box matrix elements computed
//! without sampling, exact spectra and closed-form thermodynamics.

use std::f64::consts::PI;

use rayon::prelude::*;
use libm::erfc;

use crate::model::{Lattice, MatrixSource, PhysicalParams, SquareMatrix, TransitionMatrix};
use crate::quadrature::GaussLegendre;

pub const DEFAULT_QUADRATURE_ORDER: usize = 32;

/// Analytically known Euclidean propagators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    Free,
    Harmonic { omega: f64 },
}

impl KernelSpec {
    pub fn eval(&self, params: &PhysicalParams, y: f64, z: f64) -> f64 {
        match *self {
            KernelSpec::Free => free_kernel(params, y, z),
            KernelSpec::Harmonic { omega } => harmonic_kernel(params, omega, y, z),
        }
    }
}

/// `<y, T | z, 0>` for `V = 0`: `√(m/2πħT)·exp(−m(y−z)²/2ħT)`.
pub fn free_kernel(params: &PhysicalParams, y: f64, z: f64) -> f64 {
    let var = params.free_variance();
    let d = y - z;
    (-0.5 * d * d / var).exp() / (2.0 * PI * var).sqrt()
}

/// Euclidean (Mehler) kernel of the oscillator `½mω²x²`.
pub fn harmonic_kernel(params: &PhysicalParams, omega: f64, y: f64, z: f64) -> f64 {
    let wt = omega * params.time();
    let sinh = wt.sinh();
    let scale = params.mass() * omega / params.hbar();
    // (y²+z²)cosh − 2yz = (y−z)² + (y²+z²)(cosh − 1), and (cosh−1)/sinh = tanh(ωT/2)
    let d = y - z;
    let quad = d * d / sinh + (y * y + z * z) * (0.5 * wt).tanh();
    (scale / (2.0 * PI * sinh)).sqrt() * (-0.5 * scale * quad).exp()
}

/// `∫_{-∞}^{-x} Φ(t/s) dt` for `x ≥ 0`, i.e. the tail part of the second
/// antiderivative of a centred Gaussian density with standard deviation `s`.
///
/// Equal to `s·[φ(t) − t·Φc(t)]` with `t = x/s`. The bracket cancels badly for
/// large `t`; there it is evaluated as `φ(t)·c/(t + c)`, where
/// `c = 1/(t + 2/(t + 3/(t + …)))` is the tail of the Mills-ratio continued fraction.
fn gaussian_tail_antiderivative(x: f64, s: f64) -> f64 {
    let t = x / s;
    let density = (-0.5 * t * t).exp() / (2.0 * PI).sqrt();
    if t < 5.0 {
        return s * (density - t * 0.5 * erfc(t / std::f64::consts::SQRT_2));
    }
    let mut c = 0.0;
    for k in (2..=120).rev() {
        c = 1.0 / (t + k as f64 * c);
    }
    s * density * c / (t + c)
}

/// Free transition-matrix element between normalized boxes `i` and `j`, in
/// closed form.
///
/// With `H` the second antiderivative of the free kernel in `u = y − z`, the
/// box double integral is the second difference `H(d+Δ) − 2H(d) + H(d−Δ)` at the
/// box offset `d`. Writing `H(x) = max(x, 0) + H_tail(|x|)` drops the linear
/// part exactly, so far-apart boxes keep full relative precision.
pub fn free_box_element(params: &PhysicalParams, lattice: &Lattice, i: usize, j: usize) -> f64 {
    assert!(i < lattice.count() && j < lattice.count(), "box index out of range");
    let dx = lattice.spacing();
    let s = params.free_variance().sqrt();
    let h = |x: f64| gaussian_tail_antiderivative(x, s);
    let sep = i.abs_diff(j);
    let integral = if sep == 0 {
        dx + 2.0 * h(dx) - 2.0 * h(0.0)
    } else {
        let d = sep as f64 * dx;
        h(d + dx) - 2.0 * h(d) + h(d - dx)
    };
    // clamp round-off at the underflow edge
    integral.max(0.0) / dx
}

/// Closed-form free matrix on the whole lattice.
pub fn free_box_matrix(params: &PhysicalParams, lattice: &Lattice) -> TransitionMatrix {
    let n = lattice.count();
    // elements depend only on |i − j|
    let band: Vec<f64> = (0..n).map(|d| free_box_element(params, lattice, d, 0)).collect();
    let m = SquareMatrix::from_fn(n, |i, j| band[i.abs_diff(j)]);
    TransitionMatrix::exact(m, params.time(), MatrixSource::FreeAnalytic)
}

/// `M_ij = (1/Δx)·∬_{box_i × box_j} K(y, z) dy dz` by tensor-product Gauss–Legendre.
pub fn exact_box_matrix(
    kernel: KernelSpec,
    params: &PhysicalParams,
    lattice: &Lattice,
    order: usize,
) -> TransitionMatrix {
    let n = lattice.count();
    let gl = GaussLegendre::new(order);
    let dx = lattice.spacing();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let yb = (lattice.node(i), lattice.node(i + 1));
            (i..n)
                .map(|j| {
                    let zb = (lattice.node(j), lattice.node(j + 1));
                    gl.integrate_2d(yb, zb, |y, z| kernel.eval(params, y, z)) / dx
                })
                .collect()
        })
        .collect();
    let mut m = SquareMatrix::zeros(n);
    for (i, row) in upper.iter().enumerate() {
        for (off, &v) in row.iter().enumerate() {
            m[(i, i + off)] = v;
            m[(i + off, i)] = v;
        }
    }
    TransitionMatrix::exact(m, params.time(), MatrixSource::ExactQuadrature)
}

/// `ħω(n + ½)`.
pub fn ho_exact_energy(hbar: f64, omega: f64, n: usize) -> f64 {
    hbar * omega * (n as f64 + 0.5)
}

/// Normalized oscillator eigenfunction `ψ_n(x)`, with `ψ_n(x) > 0` for large positive `x`.
pub fn ho_wavefunction(params: &PhysicalParams, omega: f64, n: usize, x: f64) -> f64 {
    let alpha = (params.mass() * omega / params.hbar()).sqrt();
    let xi = alpha * x;
    // normalized Hermite functions by the stable three-term recurrence
    let mut prev = 0.0;
    let mut cur = (alpha / PI.sqrt()).sqrt() * (-0.5 * xi * xi).exp();
    for k in 0..n {
        let k = k as f64;
        let next = (2.0 / (k + 1.0)).sqrt() * xi * cur - (k / (k + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Strength parameter `Q = 2 m d² V₀ / ħ²` of the `sech²` well.
pub fn sech2_strength(params: &PhysicalParams, depth: f64, width: f64) -> f64 {
    2.0 * params.mass() * width * width * depth / (params.hbar() * params.hbar())
}

/// Bound-state energies of `−V₀ sech²(x/d)`, ascending.
pub fn sech2_exact_spectrum(params: &PhysicalParams, depth: f64, width: f64) -> Vec<f64> {
    let q = sech2_strength(params, depth, width);
    let root = (q + 0.25).sqrt();
    let unit = params.hbar() * params.hbar() / (2.0 * params.mass() * width * width);
    (0..)
        .map(|n| n as f64 + 0.5)
        .take_while(|&shifted| shifted < root)
        .map(|shifted| -unit * (shifted - root).powi(2))
        .collect()
}

/// `(U, C)` of the free particle; `Z` diverges with the volume and is not returned.
pub fn free_thermo(params: &PhysicalParams, beta: f64) -> (f64, f64) {
    (0.5 / beta, 0.5 * params.kb())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoThermo {
    pub z: f64,
    pub energy: f64,
    pub specific_heat: f64,
}

pub fn ho_thermo(params: &PhysicalParams, omega: f64, beta: f64) -> HoThermo {
    let x = 0.5 * beta * params.hbar() * omega;
    let sinh = x.sinh();
    HoThermo {
        z: 0.5 / sinh,
        energy: 0.5 * params.hbar() * omega / x.tanh(),
        specific_heat: params.kb() * (x / sinh).powi(2),
    }
}
