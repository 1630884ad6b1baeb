//! Monte Carlo estimation of box-basis transition-matrix elements.
//!
//! The action is split into its kinetic part `S₀` and potential part `S_V`.
//! Paths are drawn from the free measure `exp(−S₀/ħ)` with endpoints in the
//! two boxes, and `exp(−S_V/ħ)` is averaged over them. That average is the
//! ratio `M_ij / M⁰_ij`; multiplying by the closed-form free element gives `M_ij`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::Result;
use crate::model::{
    Lattice, MatrixSource, PhysicalParams, Potential, SamplerConfig, SamplerMethod, SquareMatrix,
    TransitionMatrix,
};
use crate::oracle::free_box_element;
use crate::potentials::action_potential;

/// Free elements below this are set to zero without sampling.
pub const NEGLIGIBLE_ELEMENT: f64 = 1e-300;

/// A discretized path `x_0 = z, …, x_{n_t} = y`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub positions: Vec<f64>,
}

impl PathSample {
    pub fn start(&self) -> f64 {
        self.positions[0]
    }

    pub fn end(&self) -> f64 {
        *self.positions.last().expect("path is never empty")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElementEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
    /// Endpoint sampling hit the proposal cap; the element is reported as zero.
    pub flagged: bool,
    /// `false` when `std_error` ignores autocorrelation (Metropolis).
    pub independent_samples: bool,
    pub acceptance_rate: Option<f64>,
    pub warning: Option<String>,
}

impl ElementEstimate {
    fn negligible(samples: usize) -> Self {
        Self {
            mean: 0.0,
            std_error: 0.0,
            samples,
            flagged: true,
            independent_samples: true,
            acceptance_rate: None,
            warning: Some("endpoint rejection cap exceeded; element treated as negligible".into()),
        }
    }
}

/// Independent generator for element `(i, j)`: one ChaCha stream per element.
pub fn element_rng(seed: u64, i: usize, j: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((i as u64) << 32) | j as u64);
    rng
}

/// Running mean and variance (Welford).
#[derive(Debug, Default, Clone, Copy)]
struct Moments {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn std_error(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt()
    }
}

/// Smallest possible `|y − z|` with `y` in box `i` and `z` in box `j`.
fn box_gap(lattice: &Lattice, i: usize, j: usize) -> f64 {
    i.abs_diff(j).saturating_sub(1) as f64 * lattice.spacing()
}

/// Draws `(y, z) ∈ box_i × box_j` with density `∝ exp(−m(y−z)²/2ħT)`.
///
/// Uniform proposals on the rectangle are accepted with probability
/// `exp(−m((y−z)² − g²)/2ħT)`, `g` being the gap between the boxes. Returns
/// `None` after `cap` rejected proposals.
pub fn sample_endpoints<R: Rng + ?Sized>(
    params: &PhysicalParams,
    lattice: &Lattice,
    i: usize,
    j: usize,
    rng: &mut R,
    cap: u64,
) -> Option<(f64, f64)> {
    let dx = lattice.spacing();
    let (y0, z0) = (lattice.node(i), lattice.node(j));
    let g = box_gap(lattice, i, j);
    let inv_two_var = 0.5 / params.free_variance();
    for _ in 0..cap {
        let y = y0 + dx * rng.random::<f64>();
        let z = z0 + dx * rng.random::<f64>();
        // half-open boxes: the upper node belongs to the next box
        if !(lattice.contains(i, y) && lattice.contains(j, z)) {
            continue;
        }
        let d = y - z;
        let log_accept = -inv_two_var * (d * d - g * g);
        if rng.random::<f64>().ln() < log_accept {
            return Some((y, z));
        }
    }
    None
}

fn fill_bridge<R: Rng + ?Sized>(path: &mut [f64], z: f64, y: f64, slice_var: f64, rng: &mut R) {
    let n_t = path.len() - 1;
    path[0] = z;
    for k in 0..n_t - 1 {
        let remaining = (n_t - k) as f64;
        let x = path[k];
        let mean = x + (y - x) / remaining;
        let sd = (slice_var * (remaining - 1.0) / remaining).sqrt();
        let xi: f64 = rng.sample(StandardNormal);
        path[k + 1] = mean + sd * xi;
    }
    path[n_t] = y;
}

/// Exact sample of the discretized free path measure pinned at `x_0 = z`,
/// `x_{n_t} = y`, built slice by slice from the conditional Gaussians.
pub fn brownian_bridge<R: Rng + ?Sized>(
    params: &PhysicalParams,
    z: f64,
    y: f64,
    time_slices: usize,
    rng: &mut R,
) -> PathSample {
    assert!(time_slices >= 2, "need at least two time slices");
    let a0 = params.time() / time_slices as f64;
    let mut positions = vec![0.0; time_slices + 1];
    fill_bridge(&mut positions, z, y, params.hbar() * a0 / params.mass(), rng);
    PathSample { positions }
}

/// Estimates `M_ij / M⁰_ij = ⟨exp(−S_V/ħ)⟩` over free bridge paths.
pub fn estimate_element<R: Rng + ?Sized>(
    params: &PhysicalParams,
    lattice: &Lattice,
    potential: &Potential,
    i: usize,
    j: usize,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> ElementEstimate {
    let a0 = cfg.slice_width(params.time());
    let slice_var = params.hbar() * a0 / params.mass();
    let mut path = vec![0.0; cfg.time_slices + 1];
    let mut moments = Moments::default();
    for _ in 0..cfg.num_configs {
        let Some((y, z)) = sample_endpoints(params, lattice, i, j, rng, cfg.rejection_cap) else {
            return ElementEstimate::negligible(cfg.num_configs);
        };
        fill_bridge(&mut path, z, y, slice_var, rng);
        let s_v = action_potential(potential, params.mass(), &path, a0);
        moments.push((-s_v / params.hbar()).exp());
    }
    ElementEstimate {
        mean: moments.mean,
        std_error: moments.std_error(),
        samples: moments.n,
        flagged: false,
        independent_samples: true,
        acceptance_rate: None,
        warning: None,
    }
}

/// Same ratio as [`estimate_element`], sampled by single-site random-walk
/// Metropolis on the `(n_t + 1)`-point path with both endpoints confined to
/// their boxes. The reported error ignores autocorrelation.
pub fn metropolis_estimate_element<R: Rng + ?Sized>(
    params: &PhysicalParams,
    lattice: &Lattice,
    potential: &Potential,
    i: usize,
    j: usize,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> ElementEstimate {
    let n_t = cfg.time_slices;
    let a0 = cfg.slice_width(params.time());
    // S₀/ħ = Σ (x_{k+1} − x_k)² · m/(2ħa₀)
    let stiffness = params.mass() / (2.0 * params.hbar() * a0);
    let (z0, y0) = (lattice.box_center(j), lattice.box_center(i));
    let mut path: Vec<f64> = (0..=n_t)
        .map(|k| z0 + (y0 - z0) * k as f64 / n_t as f64)
        .collect();

    let sweep = |path: &mut [f64], rng: &mut R| -> usize {
        let mut accepted = 0;
        for k in 0..=n_t {
            let old = path[k];
            let new = old + cfg.metropolis_step * (2.0 * rng.random::<f64>() - 1.0);
            if k == 0 && !lattice.contains(j, new) || k == n_t && !lattice.contains(i, new) {
                continue;
            }
            let mut delta = 0.0;
            if k > 0 {
                let l = path[k - 1];
                delta += (new - l).powi(2) - (old - l).powi(2);
            }
            if k < n_t {
                let r = path[k + 1];
                delta += (new - r).powi(2) - (old - r).powi(2);
            }
            let log_ratio = -stiffness * delta;
            if log_ratio >= 0.0 || rng.random::<f64>().ln() < log_ratio {
                path[k] = new;
                accepted += 1;
            }
        }
        accepted
    };

    for _ in 0..cfg.thermalization_sweeps {
        sweep(&mut path, rng);
    }
    let mut moments = Moments::default();
    let mut accepted = 0usize;
    let mut proposed = 0usize;
    while moments.n < cfg.num_configs {
        for _ in 0..cfg.decorrelation_sweeps {
            accepted += sweep(&mut path, rng);
            proposed += n_t + 1;
        }
        let s_v = action_potential(potential, params.mass(), &path, a0);
        moments.push((-s_v / params.hbar()).exp());
    }
    let rate = accepted as f64 / proposed as f64;
    let warning = (!(0.1..=0.9).contains(&rate))
        .then(|| format!("Metropolis acceptance rate {rate:.3} outside [0.1, 0.9]"));
    ElementEstimate {
        mean: moments.mean,
        std_error: moments.std_error(),
        samples: moments.n,
        flagged: false,
        independent_samples: false,
        acceptance_rate: Some(rate),
        warning,
    }
}

/// Monte Carlo transition matrix: `M_ij = M⁰_ij · ratio_ij` for `i ≤ j`, mirrored
/// and symmetrized. Each element draws from its own `(seed, i, j)` stream, so the
/// result does not depend on thread scheduling.
pub fn estimate_matrix(
    params: &PhysicalParams,
    lattice: &Lattice,
    potential: &Potential,
    cfg: &SamplerConfig,
) -> Result<TransitionMatrix> {
    cfg.validate()?;
    potential.validate()?;
    let n = lattice.count();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let results: Vec<(f64, ElementEstimate)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let free = free_box_element(params, lattice, i, j);
            if free < NEGLIGIBLE_ELEMENT {
                let skipped = ElementEstimate {
                    flagged: false,
                    warning: None,
                    ..ElementEstimate::negligible(0)
                };
                return (0.0, skipped);
            }
            let mut rng = element_rng(cfg.seed, i, j);
            let est = match cfg.method {
                SamplerMethod::Bridge => {
                    estimate_element(params, lattice, potential, i, j, cfg, &mut rng)
                }
                SamplerMethod::Metropolis => {
                    metropolis_estimate_element(params, lattice, potential, i, j, cfg, &mut rng)
                }
            };
            (free, est)
        })
        .collect();

    let mut elements = SquareMatrix::zeros(n);
    let mut errors = SquareMatrix::zeros(n);
    let mut flagged = 0;
    for (&(i, j), (free, est)) in pairs.iter().zip(&results) {
        flagged += usize::from(est.flagged);
        let (m, s) = (free * est.mean, free * est.std_error);
        elements[(i, j)] = m;
        elements[(j, i)] = m;
        errors[(i, j)] = s;
        errors[(j, i)] = s;
    }
    let mut matrix = TransitionMatrix {
        elements,
        errors,
        time: params.time(),
        source: MatrixSource::MonteCarlo,
        flagged,
    };
    matrix.symmetrize();
    Ok(matrix)
}
