//! Domain types shared by every stage of the pipeline.
//!
//! Units are whatever the caller picks; the reproduction configs all use
//! `m = ħ = k_B = 1`.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn require_positive(field: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be finite and > 0, got {value}")))
    }
}

/// Mass, Planck constant, Boltzmann constant and the Euclidean time `T`
/// at which the transition matrix is built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    mass: f64,
    hbar: f64,
    kb: f64,
    time: f64,
}

impl PhysicalParams {
    pub fn new(mass: f64, hbar: f64, kb: f64, time: f64) -> Result<Self> {
        require_positive("mass", mass)?;
        require_positive("hbar", hbar)?;
        require_positive("kb", kb)?;
        require_positive("time", time)?;
        Ok(Self { mass, hbar, kb, time })
    }

    /// `m = ħ = k_B = 1` at Euclidean time `time`.
    pub fn natural(time: f64) -> Result<Self> {
        Self::new(1.0, 1.0, 1.0, time)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn kb(&self) -> f64 {
        self.kb
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Same constants at a different Euclidean time.
    pub fn with_time(&self, time: f64) -> Result<Self> {
        Self::new(self.mass, self.hbar, self.kb, time)
    }

    /// Variance `ħT/m` of the free propagator.
    pub fn free_variance(&self) -> f64 {
        self.hbar * self.time / self.mass
    }
}

/// Regular 1-D grid. Nodes are `x_i = x_min + i·Δx` for `i = 0..=N`; box `i`
/// is the half-open interval `[x_i, x_{i+1})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    x_min: f64,
    spacing: f64,
    count: usize,
}

impl Lattice {
    pub fn new(x_min: f64, spacing: f64, count: usize) -> Result<Self> {
        if !x_min.is_finite() {
            return Err(Error::invalid("x_min", "must be finite"));
        }
        require_positive("dx", spacing)?;
        if count < 2 {
            return Err(Error::invalid("n", format!("need at least 2 boxes, got {count}")));
        }
        Ok(Self { x_min, spacing, count })
    }

    /// Lattice of `count` boxes symmetric about `x = 0`.
    pub fn centered(spacing: f64, count: usize) -> Result<Self> {
        Self::new(-0.5 * spacing * count as f64, spacing, count)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Number of boxes `N`.
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn node(&self, i: usize) -> f64 {
        assert!(i <= self.count, "node index {i} out of range 0..={}", self.count);
        self.x_min + i as f64 * self.spacing
    }

    pub fn x_max(&self) -> f64 {
        self.node(self.count)
    }

    pub fn box_center(&self, i: usize) -> f64 {
        self.check_box(i);
        self.x_min + (i as f64 + 0.5) * self.spacing
    }

    /// Index of the box containing `x`, if any.
    pub fn box_of(&self, x: f64) -> Option<usize> {
        let t = (x - self.x_min) / self.spacing;
        if t.is_nan() || t < 0.0 {
            return None;
        }
        let i = t.floor() as usize;
        // floor can land one box off near a node; settle it against the node values
        (i.saturating_sub(1)..=i + 1).find(|&k| k < self.count && self.contains(k, x))
    }

    pub fn contains(&self, i: usize, x: f64) -> bool {
        self.check_box(i);
        x >= self.node(i) && x < self.node(i + 1)
    }

    /// Normalized box function `e_i(x) = Δx^{-1/2}` on box `i`, zero elsewhere.
    ///
    /// Panics if `i` is not a valid box index.
    pub fn basis_value(&self, i: usize, x: f64) -> f64 {
        if self.contains(i, x) {
            self.spacing.sqrt().recip()
        } else {
            0.0
        }
    }

    fn check_box(&self, i: usize) {
        assert!(i < self.count, "box index {i} out of range 0..{}", self.count);
    }
}

impl fmt::Display for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x_min={} dx={} n={}", self.x_min, self.spacing, self.count)
    }
}

/// Local potential `V(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Potential {
    Free,
    /// `½ m ω² x²`
    Harmonic { omega: f64 },
    /// `−V₀ sech²(x/d)`
    Sech2 { depth: f64, width: f64 },
    /// `Σ_p c_p x^p`, coefficients in ascending order.
    Polynomial { coefficients: Vec<f64> },
}

impl Potential {
    pub fn validate(&self) -> Result<()> {
        match self {
            Potential::Free => Ok(()),
            Potential::Harmonic { omega } => require_positive("omega", *omega),
            Potential::Sech2 { depth, width } => {
                require_positive("depth", *depth)?;
                require_positive("width", *width)
            }
            Potential::Polynomial { coefficients } => {
                if coefficients.iter().all(|c| c.is_finite()) {
                    Ok(())
                } else {
                    Err(Error::invalid("coefficients", "must all be finite"))
                }
            }
        }
    }

    pub fn is_free(&self) -> bool {
        match self {
            Potential::Free => true,
            Potential::Polynomial { coefficients } => coefficients.iter().all(|&c| c == 0.0),
            _ => false,
        }
    }
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potential::Free => write!(f, "free"),
            Potential::Harmonic { omega } => write!(f, "harmonic(omega={omega})"),
            Potential::Sech2 { depth, width } => write!(f, "sech2(depth={depth}, width={width})"),
            Potential::Polynomial { coefficients } => write!(f, "polynomial({coefficients:?})"),
        }
    }
}

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    /// Builds a matrix from row-major data. Panics unless `data.len() == n²`.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n, "expected {} entries", n * n);
        Self { n, data }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    /// Replaces the matrix by `(M + Mᵀ)/2`; the result is exactly symmetric.
    pub fn symmetrize(&mut self) {
        for i in 0..self.n {
            for j in 0..i {
                let avg = 0.5 * (self[(i, j)] + self[(j, i)]);
                self[(i, j)] = avg;
                self[(j, i)] = avg;
            }
        }
    }

    pub fn scale(&mut self, c: f64) {
        self.data.iter_mut().for_each(|v| *v *= c);
    }
}

impl Index<(usize, usize)> for SquareMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for SquareMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// How a transition matrix was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixSource {
    MonteCarlo,
    ExactQuadrature,
    FreeAnalytic,
}

impl fmt::Display for MatrixSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatrixSource::MonteCarlo => "monte_carlo",
            MatrixSource::ExactQuadrature => "exact_quadrature",
            MatrixSource::FreeAnalytic => "free_analytic",
        })
    }
}

/// Estimate of `M_ij(T) = <e_i| e^{-HT/ħ} |e_j>` in the box basis, with
/// per-element standard errors (all zero for the exact routes).
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    pub elements: SquareMatrix,
    pub errors: SquareMatrix,
    pub time: f64,
    pub source: MatrixSource,
    /// Elements whose endpoint sampler hit its proposal cap and were set to zero.
    pub flagged: usize,
}

impl TransitionMatrix {
    /// Exact-route matrix with zero statistical errors.
    pub fn exact(elements: SquareMatrix, time: f64, source: MatrixSource) -> Self {
        let n = elements.size();
        Self {
            elements,
            errors: SquareMatrix::zeros(n),
            time,
            source,
            flagged: 0,
        }
    }

    pub fn size(&self) -> usize {
        self.elements.size()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.elements[(i, j)]
    }

    pub fn error(&self, i: usize, j: usize) -> f64 {
        self.errors[(i, j)]
    }

    /// `M ← (M + Mᵀ)/2`, errors combined as `√(σ_ij² + σ_ji²)/2`.
    pub fn symmetrize(&mut self) {
        self.elements.symmetrize();
        let n = self.size();
        for i in 0..n {
            for j in 0..i {
                let s = 0.5 * self.errors[(i, j)].hypot(self.errors[(j, i)]);
                self.errors[(i, j)] = s;
                self.errors[(j, i)] = s;
            }
        }
    }
}

/// Low-energy effective Hamiltonian: kept energies in ascending order and the
/// matching columns `U†_{ik} = <e_i|E_k>` of the eigenvector matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveHamiltonian {
    pub energies: Vec<f64>,
    /// `states[k][i] = U†_{ik}`.
    pub states: Vec<Vec<f64>>,
    pub dropped: usize,
    pub lattice: Lattice,
    pub time: f64,
    pub source: MatrixSource,
}

impl EffectiveHamiltonian {
    /// Number of kept states `K`.
    pub fn kept(&self) -> usize {
        self.energies.len()
    }

    pub fn ground_energy(&self) -> f64 {
        self.energies[0]
    }
}

/// One sample of the thermodynamic functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoRow {
    pub beta: f64,
    pub temperature: f64,
    pub ln_z: f64,
    pub energy: f64,
    pub specific_heat: f64,
}

impl ThermoRow {
    /// `Z`, which may overflow to infinity or underflow to zero; `ln_z` is always finite.
    pub fn z(&self) -> f64 {
        self.ln_z.exp()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermoCurve {
    pub rows: Vec<ThermoRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerMethod {
    /// Exact Brownian-bridge sampling of the free path measure.
    Bridge,
    /// Single-site random-walk Metropolis over the discretized path.
    Metropolis,
}

impl fmt::Display for SamplerMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SamplerMethod::Bridge => "bridge",
            SamplerMethod::Metropolis => "metropolis",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    /// Paths per matrix element, `N_c`.
    pub num_configs: usize,
    /// Time slices per path, `n_t`; slice width is `a₀ = T/n_t`.
    pub time_slices: usize,
    pub seed: u64,
    pub method: SamplerMethod,
    pub metropolis_step: f64,
    pub thermalization_sweeps: usize,
    pub decorrelation_sweeps: usize,
    /// Maximum endpoint proposals per element before it is flagged negligible.
    pub rejection_cap: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            num_configs: 10_000,
            time_slices: 64,
            seed: 1,
            method: SamplerMethod::Bridge,
            metropolis_step: 0.2,
            thermalization_sweeps: 200,
            decorrelation_sweeps: 20,
            rejection_cap: 1_000_000,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_configs < 1 {
            return Err(Error::invalid("num_configs", "must be >= 1"));
        }
        if self.time_slices < 2 {
            return Err(Error::invalid("time_slices", "must be >= 2"));
        }
        if self.rejection_cap < 1 {
            return Err(Error::invalid("rejection_cap", "must be >= 1"));
        }
        if self.method == SamplerMethod::Metropolis {
            require_positive("metropolis_step", self.metropolis_step)?;
            if self.decorrelation_sweeps < 1 {
                return Err(Error::invalid("decorrelation_sweeps", "must be >= 1"));
            }
        }
        Ok(())
    }

    /// Slice width `a₀ = T/n_t`.
    pub fn slice_width(&self, time: f64) -> f64 {
        time / self.time_slices as f64
    }
}
