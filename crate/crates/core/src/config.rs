//! Run configuration: sectioned `key = value` text (TOML).
//!
//! ```toml
//! [physics]
//! mass = 1.0
//! time = 1.0
//!
//! [lattice]
//! dx = 1.0
//! n = 20
//!
//! [potential]
//! kind = "harmonic"
//! omega = 0.6
//!
//! [sampler]
//! route = "mc"
//! num_configs = 10000
//! ```
//!
//! Every key has a default except `[lattice]` and `[potential]`.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Lattice, PhysicalParams, Potential, SamplerConfig, SamplerMethod};
use crate::oracle::DEFAULT_QUADRATURE_ORDER;
use crate::spectra::DEFAULT_DROP_THRESHOLD;

/// Start and end markers of the config block embedded in output headers.
pub const CONFIG_BEGIN: &str = "# [config]";
pub const CONFIG_END: &str = "# [end config]";

/// How the transition matrix is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Monte Carlo ratio estimator.
    Mc,
    /// Gauss–Legendre quadrature of an analytic kernel.
    Exact,
    /// Closed-form free-particle elements.
    Free,
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Route::Mc => "mc",
            Route::Exact => "exact",
            Route::Free => "free",
        })
    }
}

impl std::str::FromStr for Route {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "mc" => Ok(Route::Mc),
            "exact" => Ok(Route::Exact),
            "free" => Ok(Route::Free),
            other => Err(format!("unknown route {other:?} (expected mc, exact or free)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsSection {
    pub mass: f64,
    pub hbar: f64,
    pub kb: f64,
    pub time: f64,
}

impl Default for PhysicsSection {
    fn default() -> Self {
        Self { mass: 1.0, hbar: 1.0, kb: 1.0, time: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSection {
    pub dx: f64,
    pub n: usize,
    /// Left edge; the lattice is centred on `x = 0` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_min: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplerSection {
    pub route: Route,
    pub method: SamplerMethod,
    pub num_configs: usize,
    pub time_slices: usize,
    pub seed: u64,
    pub metropolis_step: f64,
    pub thermalization_sweeps: usize,
    pub decorrelation_sweeps: usize,
    pub rejection_cap: u64,
    pub quadrature_order: usize,
}

impl Default for SamplerSection {
    fn default() -> Self {
        let s = SamplerConfig::default();
        Self {
            route: Route::Mc,
            method: s.method,
            num_configs: s.num_configs,
            time_slices: s.time_slices,
            seed: s.seed,
            metropolis_step: s.metropolis_step,
            thermalization_sweeps: s.thermalization_sweeps,
            decorrelation_sweeps: s.decorrelation_sweeps,
            rejection_cap: s.rejection_cap,
            quadrature_order: DEFAULT_QUADRATURE_ORDER,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumSection {
    pub drop_threshold: f64,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self { drop_threshold: DEFAULT_DROP_THRESHOLD }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThermoSection {
    /// Explicit grid; takes precedence over the range keys.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub betas: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_count: Option<usize>,
}

impl ThermoSection {
    /// Explicit `betas`, else `beta_count` equally spaced points on `[beta_min, beta_max]`.
    pub fn grid(&self) -> Vec<f64> {
        if !self.betas.is_empty() {
            return self.betas.clone();
        }
        match (self.beta_min, self.beta_max, self.beta_count) {
            (Some(lo), Some(hi), Some(1)) if lo == hi => vec![lo],
            (Some(lo), Some(hi), Some(n)) if n >= 2 => {
                (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
            }
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    /// File name prefix.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Wave functions to emit.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub states: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub physics: PhysicsSection,
    pub lattice: LatticeSection,
    pub potential: Potential,
    #[serde(default)]
    pub sampler: SamplerSection,
    #[serde(default)]
    pub spectrum: SpectrumSection,
    #[serde(default)]
    pub thermo: ThermoSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line of `key` inside `[section]`, for anchoring validation messages.
fn find_key_line(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim().to_string();
            continue;
        }
        if current == section {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return Some(idx + 1);
                }
            }
        }
    }
    None
}

impl RunConfig {
    /// Parses config text. Also accepts an output file of this crate, reading
    /// the config block from its `#` header.
    pub fn parse(text: &str) -> Result<Self> {
        let owned;
        let text = if let Some(embedded) = extract_embedded(text) {
            owned = embedded;
            owned.as_str()
        } else {
            text
        };
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config {
            line: e.span().map(|s| line_of_offset(text, s.start)),
            message: e.message().to_string(),
        })?;
        cfg.validate_with_source(text)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
            line: None,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::parse(&text)
    }

    fn validate_with_source(&self, text: &str) -> Result<()> {
        self.validate().map_err(|e| match e {
            Error::InvalidParameter { field, reason } => {
                let (section, key) = field.split_once('.').unwrap_or(("", field.as_str()));
                Error::Config {
                    line: find_key_line(text, section, key),
                    message: format!("{field}: {reason}"),
                }
            }
            other => other,
        })
    }

    /// Checks every section; errors name the offending `section.key`.
    pub fn validate(&self) -> Result<()> {
        let qualify = |section: &str, e: Error| match e {
            Error::InvalidParameter { field, reason } => {
                Error::invalid(format!("{section}.{field}"), reason)
            }
            other => other,
        };
        self.physics().map_err(|e| qualify("physics", e))?;
        self.lattice().map_err(|e| qualify("lattice", e))?;
        self.potential.validate().map_err(|e| qualify("potential", e))?;
        self.sampler_config().validate().map_err(|e| qualify("sampler", e))?;
        if self.sampler.quadrature_order < 1 {
            return Err(Error::invalid("sampler.quadrature_order", "must be >= 1"));
        }
        let t = self.spectrum.drop_threshold;
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::invalid("spectrum.drop_threshold", "must be finite and >= 0"));
        }
        match (self.sampler.route, &self.potential) {
            (Route::Free, p) if !p.is_free() => Err(Error::invalid(
                "sampler.route",
                format!("route \"free\" needs a free potential, got {p}"),
            )),
            (Route::Exact, Potential::Sech2 { .. } | Potential::Polynomial { .. })
                if !self.potential.is_free() =>
            {
                Err(Error::invalid(
                    "sampler.route",
                    format!("no analytic kernel for {}; use route \"mc\"", self.potential),
                ))
            }
            _ => Ok(()),
        }
    }

    pub fn physics(&self) -> Result<PhysicalParams> {
        let p = &self.physics;
        PhysicalParams::new(p.mass, p.hbar, p.kb, p.time)
    }

    pub fn lattice(&self) -> Result<Lattice> {
        let l = &self.lattice;
        match l.x_min {
            Some(x_min) => Lattice::new(x_min, l.dx, l.n),
            None => Lattice::centered(l.dx, l.n),
        }
        .map_err(|e| match e {
            Error::InvalidParameter { field, reason } if field == "x_min" || field == "n" => {
                Error::InvalidParameter { field, reason }
            }
            Error::InvalidParameter { reason, .. } => Error::invalid("dx", reason),
            other => other,
        })
    }

    pub fn sampler_config(&self) -> SamplerConfig {
        let s = &self.sampler;
        SamplerConfig {
            num_configs: s.num_configs,
            time_slices: s.time_slices,
            seed: s.seed,
            method: s.method,
            metropolis_step: s.metropolis_step,
            thermalization_sweeps: s.thermalization_sweeps,
            decorrelation_sweeps: s.decorrelation_sweeps,
            rejection_cap: s.rejection_cap,
        }
    }

    /// Copy with every defaulted value written out, including the lattice origin.
    pub fn resolved(&self) -> Result<Self> {
        let mut out = self.clone();
        out.lattice.x_min = Some(self.lattice()?.x_min());
        Ok(out)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config always serializes")
    }
}

fn extract_embedded(text: &str) -> Option<String> {
    let mut lines = text.lines();
    lines.by_ref().find(|l| l.trim_end() == CONFIG_BEGIN)?;
    let mut body = String::new();
    for line in lines {
        if line.trim_end() == CONFIG_END {
            return Some(body);
        }
        let stripped = line.strip_prefix("# ").or_else(|| line.strip_prefix('#'))?;
        body.push_str(stripped);
        body.push('\n');
    }
    None
}
