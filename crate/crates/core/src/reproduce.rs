//! Pinned configurations for the reference tables and figure data.
//!
//! Unstated choices are fixed here: lattices are centred on the potential
//! minimum, β grids are `{0.1, 0.2, …, 10}`, and Monte Carlo runs use the
//! sampler defaults (`N_c = 10⁴`, `n_t = 64`, bridge paths, seed 1).

use std::fmt;
use std::str::FromStr;

use crate::config::{Route, RunConfig};
use crate::error::Result;
use crate::pipeline::{self, Solution};
use crate::report::{self, num, OutputFile, Report};
use crate::thermo;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Tab1,
    Tab2a,
    Tab2b,
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

impl Target {
    pub const ALL: [Target; 8] = [
        Target::Tab1,
        Target::Tab2a,
        Target::Tab2b,
        Target::Fig1,
        Target::Fig2,
        Target::Fig3,
        Target::Fig4,
        Target::Fig5,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Target::Tab1 => "tab1",
            Target::Tab2a => "tab2a",
            Target::Tab2b => "tab2b",
            Target::Fig1 => "fig1",
            Target::Fig2 => "fig2",
            Target::Fig3 => "fig3",
            Target::Fig4 => "fig4",
            Target::Fig5 => "fig5",
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Target::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown target {s:?} (expected one of tab1, tab2a, tab2b, fig1..fig5)"))
    }
}

const HARMONIC: &str = r#"
[lattice]
dx = 1.0
n = 20

[potential]
kind = "harmonic"
omega = 0.6
"#;

const SECH2_A: &str = r#"
[lattice]
dx = 1.0
n = 10

[potential]
kind = "sech2"
depth = 1.0
width = 1.0
"#;

const SECH2_B: &str = r#"
[lattice]
dx = 1.0
n = 20

[potential]
kind = "sech2"
depth = 1.0
width = 2.0
"#;

const FREE: &str = r#"
[lattice]
dx = 0.5
n = 100

[potential]
kind = "free"

[sampler]
route = "free"
"#;

const FREE_CROSS: &str = r#"
[lattice]
dx = 0.2
n = 200

[potential]
kind = "free"

[sampler]
route = "free"

[thermo]
betas = [0.1]
"#;

fn parse(text: &str) -> RunConfig {
    RunConfig::parse(text).expect("pinned configs are valid")
}

/// `β = k/10` for `k = 1..=100`, each the nearest double to the decimal.
pub fn beta_grid() -> Vec<f64> {
    (1..=100).map(|k| k as f64 / 10.0).collect()
}

pub fn harmonic_config() -> RunConfig {
    let mut cfg = parse(HARMONIC);
    cfg.thermo.betas = beta_grid();
    cfg
}

pub fn sech2_config(target: Target) -> RunConfig {
    match target {
        Target::Tab2b => parse(SECH2_B),
        _ => parse(SECH2_A),
    }
}

pub fn free_config() -> RunConfig {
    let mut cfg = parse(FREE);
    cfg.thermo.betas = beta_grid();
    cfg
}

pub fn free_cross_config() -> RunConfig {
    parse(FREE_CROSS)
}

/// The pinned config for `target`, with its output prefix set to the target name.
pub fn pinned(target: Target) -> RunConfig {
    let mut cfg = match target {
        Target::Tab1 | Target::Fig3 | Target::Fig4 | Target::Fig5 => harmonic_config(),
        Target::Tab2a | Target::Tab2b => sech2_config(target),
        Target::Fig1 | Target::Fig2 => free_config(),
    };
    cfg.output.name = Some(target.name().to_string());
    cfg
}

/// Runs `target`. `seed` overrides the Monte Carlo seed.
pub fn reproduce(target: Target, seed: Option<u64>) -> Result<Vec<OutputFile>> {
    let mut cfg = pinned(target);
    if let Some(seed) = seed {
        cfg.sampler.seed = seed;
    }
    match target {
        Target::Tab1 => tab1(&cfg),
        Target::Tab2a | Target::Tab2b => tab2(&cfg),
        Target::Fig1 | Target::Fig2 => free_figure(&cfg, target),
        Target::Fig3 => {
            cfg.sampler.route = Route::Mc;
            report::run_wavefunctions(&cfg, &[0, 1, 2])
        }
        Target::Fig4 | Target::Fig5 => harmonic_figure(&cfg, target),
    }
}

fn both_routes(cfg: &RunConfig) -> Result<(RunConfig, Solution, Solution)> {
    let mc_cfg = pipeline::with_route(cfg, Route::Mc);
    let exact = pipeline::solve(&pipeline::with_route(cfg, Route::Exact))?;
    let mc = pipeline::solve(&mc_cfg)?;
    Ok((mc_cfg, exact, mc))
}

fn name(cfg: &RunConfig, suffix: &str) -> String {
    format!("{}_{suffix}.csv", cfg.output.name.as_deref().unwrap_or("run"))
}

fn energy_cell(sol: &Solution, k: usize) -> String {
    sol.heff.energies.get(k).map(|e| num(*e)).unwrap_or_default()
}

fn tab1(cfg: &RunConfig) -> Result<Vec<OutputFile>> {
    let (mc_cfg, exact, mc) = both_routes(cfg)?;
    let params = cfg.physics()?;
    let rows = exact.heff.kept().max(mc.heff.kept());
    let analytic = pipeline::exact_energies(&params, &cfg.potential, rows).unwrap_or_default();

    let mut report = Report::new("table", &mc_cfg)?;
    report
        .meta("exact_matrix_kept", exact.heff.kept())
        .meta("monte_carlo_kept", mc.heff.kept())
        .meta("monte_carlo_dropped", mc.heff.dropped)
        .meta("flagged", mc.matrix.flagged)
        .columns(&["n", "e_exact", "e_exact_matrix", "e_monte_carlo"]);
    for (n, e) in analytic.iter().enumerate() {
        report.row(vec![n.to_string(), num(*e), energy_cell(&exact, n), energy_cell(&mc, n)]);
    }
    Ok(vec![report.finish(name(cfg, "energies"))])
}

fn tab2(cfg: &RunConfig) -> Result<Vec<OutputFile>> {
    let cfg = pipeline::with_route(cfg, Route::Mc);
    let sol = pipeline::solve(&cfg)?;
    let params = cfg.physics()?;
    let bound = pipeline::exact_energies(&params, &cfg.potential, 0).unwrap_or_default();
    let negative = sol.heff.energies.iter().filter(|e| **e < 0.0).count();

    let mut table = Report::new("bound_states", &cfg)?;
    table
        .solution(&sol)
        .meta("exact_bound_states", bound.len())
        .meta("negative_energies", negative)
        .columns(&["n", "e_exact", "e_monte_carlo"]);
    for n in 0..bound.len().max(negative) {
        let exact = bound.get(n).map(|e| num(*e)).unwrap_or_default();
        table.row(vec![n.to_string(), exact, energy_cell(&sol, n)]);
    }

    let mut full = Report::new("spectrum", &cfg)?;
    full.solution(&sol).columns(&["k", "energy"]);
    for (k, e) in sol.heff.energies.iter().enumerate() {
        full.row(vec![k.to_string(), num(*e)]);
    }
    Ok(vec![table.finish(name(&cfg, "bound_states")), full.finish(name(&cfg, "spectrum"))])
}

/// Free-particle `U` (fig1) or `C` (fig2) on the pinned grid, plus the
/// fine-lattice point at `β = 0.1`.
fn free_figure(cfg: &RunConfig, target: Target) -> Result<Vec<OutputFile>> {
    let heat = target == Target::Fig2;
    let column = if heat { "specific_heat" } else { "energy" };
    let exact_column = if heat { "exact_specific_heat" } else { "exact_energy" };
    let mut files = Vec::new();

    let mut cross = free_cross_config();
    cross.output.name = cfg.output.name.clone();
    for (c, suffix) in [(cfg, "curve"), (&cross, "cross")] {
        let sol = pipeline::solve(c)?;
        let kb = c.physics.kb;
        let mut report = Report::new("thermo", c)?;
        report
            .solution(&sol)
            .meta("note", "free-particle Z grows with the box volume; only U and C are intensive")
            .columns(&["beta", "temperature", column, exact_column]);
        for beta in report::beta_grid(c)? {
            let (value, exact) = match report::exact_thermo(c, beta)? {
                Some((_, _, cv)) if heat => (thermo::specific_heat(&sol.heff, beta, kb), cv),
                Some((_, u, _)) => (thermo::avg_energy(&sol.heff, beta), u),
                None => unreachable!("free potential has closed-form thermodynamics"),
            };
            report.row(vec![num(beta), num(1.0 / (kb * beta)), num(value), num(exact)]);
        }
        files.push(report.finish(name(c, suffix)));
    }
    Ok(files)
}

/// Oscillator `U` (fig4) or `C` (fig5) from the analytic formula, the exact
/// matrix and Monte Carlo.
fn harmonic_figure(cfg: &RunConfig, target: Target) -> Result<Vec<OutputFile>> {
    let heat = target == Target::Fig5;
    let (mc_cfg, exact, mc) = both_routes(cfg)?;
    let kb = cfg.physics.kb;
    let observable = |sol: &Solution, beta: f64| {
        if heat {
            thermo::specific_heat(&sol.heff, beta, kb)
        } else {
            thermo::avg_energy(&sol.heff, beta)
        }
    };
    let mut report = Report::new("thermo", &mc_cfg)?;
    report
        .meta("observable", if heat { "specific_heat" } else { "energy" })
        .meta("exact_matrix_kept", exact.heff.kept())
        .meta("monte_carlo_kept", mc.heff.kept())
        .meta("flagged", mc.matrix.flagged)
        .columns(&["beta", "temperature", "exact", "exact_matrix", "monte_carlo"]);
    for beta in report::beta_grid(cfg)? {
        let (_, u, c) = report::exact_thermo(cfg, beta)?.expect("oscillator has closed forms");
        report.row(vec![
            num(beta),
            num(1.0 / (kb * beta)),
            num(if heat { c } else { u }),
            num(observable(&exact, beta)),
            num(observable(&mc, beta)),
        ]);
    }
    Ok(vec![report.finish(name(cfg, if heat { "specific_heat" } else { "energy" }))])
}
