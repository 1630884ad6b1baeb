//! CSV reports with a `#` provenance header.
//!
//! Every file starts with the crate version, output kind, a timestamp on its
//! own line, run provenance, and the fully resolved config between
//! [`CONFIG_BEGIN`] and [`CONFIG_END`]. Reports are built in memory; callers
//! write them only once every report of a run has been produced.

use std::fmt::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::config::{Route, RunConfig, CONFIG_BEGIN, CONFIG_END};
use crate::error::{Error, Result};
use crate::model::Potential;
use crate::oracle;
use crate::pipeline::{self, Solution};
use crate::spectra;
use crate::thermo;

/// Prefix of the only header line allowed to differ between replays.
pub const TIMESTAMP_KEY: &str = "# timestamp_unix = ";

#[derive(Debug, Clone, PartialEq)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
}

impl OutputFile {
    /// Contents with the timestamp line removed, for replay comparisons.
    pub fn without_timestamp(&self) -> String {
        strip_timestamp(&self.contents)
    }
}

pub fn strip_timestamp(contents: &str) -> String {
    contents
        .lines()
        .filter(|l| !l.starts_with(TIMESTAMP_KEY))
        .map(|l| format!("{l}\n"))
        .collect()
}

/// 17 significant digits: enough to round-trip every `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Builder for one CSV file.
pub struct Report {
    header: Vec<(String, String)>,
    config: String,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Report {
    pub fn new(kind: &str, cfg: &RunConfig) -> Result<Self> {
        let resolved = cfg.resolved()?;
        let lattice = cfg.lattice()?;
        let mut header = vec![
            ("output".to_string(), kind.to_string()),
            ("route".to_string(), cfg.sampler.route.to_string()),
            ("potential".to_string(), cfg.potential.to_string()),
            (
                "lattice".to_string(),
                format!("dx={} n={} x_min={}", lattice.spacing(), lattice.count(), lattice.x_min()),
            ),
            ("time".to_string(), cfg.physics.time.to_string()),
        ];
        if cfg.sampler.route == Route::Mc {
            let s = &cfg.sampler;
            header.push(("seed".into(), s.seed.to_string()));
            header.push(("method".into(), s.method.to_string()));
            header.push(("num_configs".into(), s.num_configs.to_string()));
            header.push(("time_slices".into(), s.time_slices.to_string()));
        }
        Ok(Report {
            header,
            config: resolved.to_toml(),
            columns: Vec::new(),
            rows: Vec::new(),
        })
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.header.push((key.to_string(), value.to_string()));
        self
    }

    pub fn solution(&mut self, sol: &Solution) -> &mut Self {
        self.meta("source", sol.matrix.source)
            .meta("kept", sol.heff.kept())
            .meta("dropped", sol.heff.dropped)
            .meta("flagged", sol.matrix.flagged)
    }

    pub fn columns(&mut self, names: &[&str]) -> &mut Self {
        self.columns = names.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn row(&mut self, cells: Vec<String>) -> &mut Self {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
        self
    }

    pub fn finish(&self, name: impl Into<String>) -> OutputFile {
        let mut s = String::new();
        let _ = writeln!(s, "# {} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"));
        let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let _ = writeln!(s, "{TIMESTAMP_KEY}{stamp}");
        for (k, v) in &self.header {
            let _ = writeln!(s, "# {k} = {v}");
        }
        let _ = writeln!(s, "{CONFIG_BEGIN}");
        for line in self.config.lines() {
            let _ = writeln!(s, "# {line}");
        }
        let _ = writeln!(s, "{CONFIG_END}");
        let _ = writeln!(s, "{}", self.columns.join(","));
        for row in &self.rows {
            let _ = writeln!(s, "{}", row.join(","));
        }
        OutputFile { name: name.into(), contents: s }
    }
}

fn prefix(cfg: &RunConfig) -> String {
    cfg.output.name.clone().unwrap_or_else(|| "run".to_string())
}

pub fn run_spectrum(cfg: &RunConfig) -> Result<Vec<OutputFile>> {
    let sol = pipeline::solve(cfg)?;
    let params = cfg.physics()?;
    let exact = pipeline::exact_energies(&params, &cfg.potential, sol.heff.kept());
    let mut report = Report::new("spectrum", cfg)?;
    report.solution(&sol).columns(&["k", "energy", "eigenvalue", "exact_energy"]);
    let scale = sol.heff.time / params.hbar();
    for (k, e) in sol.heff.energies.iter().enumerate() {
        let reference = exact.as_ref().and_then(|v| v.get(k).copied());
        report.row(vec![k.to_string(), num(*e), num((-scale * e).exp()), opt(reference)]);
    }
    Ok(vec![report.finish(format!("{}_spectrum.csv", prefix(cfg)))])
}

/// The β grid of `cfg`, or an error naming the `[thermo]` section.
pub fn beta_grid(cfg: &RunConfig) -> Result<Vec<f64>> {
    let grid = cfg.thermo.grid();
    if grid.is_empty() {
        return Err(Error::invalid(
            "thermo.betas",
            "beta grid is empty; set betas or beta_min/beta_max/beta_count",
        ));
    }
    thermo::validate_beta_grid(&grid).map_err(|e| match e {
        Error::InvalidParameter { reason, .. } => Error::invalid("thermo.betas", reason),
        other => other,
    })?;
    Ok(grid)
}

/// Analytic `(ln Z, U, C)` for the configured potential, where known.
/// The free `Z` is volume-dependent, so only `U` and `C` are given.
pub fn exact_thermo(cfg: &RunConfig, beta: f64) -> Result<Option<(Option<f64>, f64, f64)>> {
    let params = cfg.physics()?;
    Ok(match &cfg.potential {
        Potential::Harmonic { omega } => {
            let t = oracle::ho_thermo(&params, *omega, beta);
            Some((Some(t.z.ln()), t.energy, t.specific_heat))
        }
        p if p.is_free() => {
            let (u, c) = oracle::free_thermo(&params, beta);
            Some((None, u, c))
        }
        _ => None,
    })
}

pub fn run_thermo(cfg: &RunConfig) -> Result<Vec<OutputFile>> {
    let betas = beta_grid(cfg)?;
    let sol = pipeline::solve(cfg)?;
    let kb = cfg.physics.kb;
    let curve = thermo::thermo_curve(&sol.heff, &betas, kb)?;
    let mut report = Report::new("thermo", cfg)?;
    report.solution(&sol);
    if cfg.potential.is_free() {
        report.meta("note", "free-particle Z grows with the box volume; only U and C are intensive");
    }
    report.columns(&[
        "beta",
        "temperature",
        "z",
        "ln_z",
        "energy",
        "specific_heat",
        "exact_ln_z",
        "exact_energy",
        "exact_specific_heat",
    ]);
    for row in &curve.rows {
        let z = row.z();
        let z = if z.is_normal() { num(z) } else { String::new() };
        let exact = exact_thermo(cfg, row.beta)?;
        report.row(vec![
            num(row.beta),
            num(row.temperature),
            z,
            num(row.ln_z),
            num(row.energy),
            num(row.specific_heat),
            opt(exact.and_then(|e| e.0)),
            opt(exact.map(|e| e.1)),
            opt(exact.map(|e| e.2)),
        ]);
    }
    Ok(vec![report.finish(format!("{}_thermo.csv", prefix(cfg)))])
}

/// One file per state: box index, centre, `ψ_k`, and reference columns where
/// available. References are sign-aligned to `ψ_k` by overlap.
pub fn run_wavefunctions(cfg: &RunConfig, states: &[usize]) -> Result<Vec<OutputFile>> {
    let states: Vec<usize> = if states.is_empty() {
        if cfg.output.states.is_empty() { vec![0] } else { cfg.output.states.clone() }
    } else {
        states.to_vec()
    };
    let sol = pipeline::solve(cfg)?;
    pipeline::check_states(&sol.heff, &states)?;

    let reference = match (cfg.sampler.route, pipeline::kernel_for(&cfg.potential)) {
        (Route::Mc, Some(_)) => {
            let exact_cfg = pipeline::with_route(cfg, Route::Exact);
            Some(pipeline::solve(&exact_cfg)?)
        }
        _ => None,
    };
    if let Some(r) = &reference {
        pipeline::check_states(&r.heff, &states)?;
    }

    let params = cfg.physics()?;
    let lattice = &sol.heff.lattice;
    let dx = lattice.spacing();
    let mut out = Vec::with_capacity(states.len());
    for &k in &states {
        let psi = spectra::wavefunction_values(&sol.heff, k);
        let matrix_ref = reference.as_ref().map(|r| {
            let mut v = spectra::wavefunction_values(&r.heff, k);
            pipeline::align_sign(&mut v, &psi);
            v
        });
        let analytic = match cfg.potential {
            Potential::Harmonic { omega } => {
                let mut v = pipeline::ho_box_averages(&params, omega, k, lattice);
                pipeline::align_sign(&mut v, &psi);
                Some(v)
            }
            _ => None,
        };
        let norm: f64 = psi.iter().map(|p| p * p * dx).sum();

        let mut report = Report::new("wavefunction", cfg)?;
        report
            .solution(&sol)
            .meta("state", k)
            .meta("energy", num(sol.heff.energies[k]))
            .meta("norm", num(norm));
        let mut columns = vec!["box", "x", "psi"];
        if matrix_ref.is_some() {
            columns.push("psi_exact_matrix");
        }
        if analytic.is_some() {
            columns.push("psi_analytic");
        }
        report.columns(&columns);
        for (i, p) in psi.iter().enumerate() {
            let mut row = vec![i.to_string(), num(lattice.box_center(i)), num(*p)];
            if let Some(v) = &matrix_ref {
                row.push(num(v[i]));
            }
            if let Some(v) = &analytic {
                row.push(num(v[i]));
            }
            report.row(row);
        }
        out.push(report.finish(format!("{}_state{k}.csv", prefix(cfg))));
    }
    Ok(out)
}

/// Writes all files into `dir`, creating it if needed.
pub fn write_all(dir: &Path, files: &[OutputFile]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for f in files {
        std::fs::write(dir.join(&f.name), &f.contents)?;
    }
    Ok(())
}
