//! One function per operation. Each writes its artifacts into `out` and
//! returns the list of files written, in order.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use halfline::bochner::{theorem4_forward_check, Theorem4Options};
use halfline::io::write_csv;
use halfline::marchenko::{kernel_bound_check, solve_kernel};
use halfline::phase_shift::{phase_shift_table, theorem5_diagnostics, theorem6_report, PhaseMethod, SpectralOptions};
use halfline::potential::Family;
use halfline::schrodinger::{jost_solution_with, regular_solution_with, wronskian_report, zero_energy_pair_full, SolverOptions};
use halfline::transforms::{
    build_f_from_g, generalized_transform, ode_residual_check, stieltjes_transform, SampledFunction, StieltjesMeasure,
};
use halfline::verify::{run_suite, with_determinism, Suite, Summary};
use serde_json::json;

use crate::config::{ExperimentConfig, Operation};

pub struct Artifacts {
    dir: PathBuf,
    pub written: Vec<PathBuf>,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new() })
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.dir.join(name);
        let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        self.written.push(path);
        Ok(BufWriter::new(f))
    }

    fn json(&mut self, name: &str, value: &serde_json::Value) -> Result<()> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let mut w = self.create(name)?;
        w.write_all(body.as_bytes())?;
        w.flush()?;
        Ok(())
    }
}

fn solver_options(cfg: &ExperimentConfig) -> SolverOptions {
    SolverOptions { tol: cfg.tolerances.ode, ..SolverOptions::default() }
}

/// Outcome of an operation: `false` only for a failed `verify`.
pub fn run(cfg: &ExperimentConfig, op: Operation, out: &mut Artifacts) -> Result<bool> {
    match op {
        Operation::Solve => solve(cfg, out).map(|_| true),
        Operation::Kernel => kernel(cfg, out).map(|_| true),
        Operation::Transform => transform(cfg, out).map(|_| true),
        Operation::Bochner => bochner(cfg, out).map(|_| true),
        Operation::Phaseshift => phaseshift(cfg, out).map(|_| true),
        Operation::Verify => verify(cfg, out),
    }
}

fn solve(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<()> {
    let v = cfg.potential()?;
    let grid = cfg.radial_grid()?;
    let kgrid = cfg.k_grid()?;
    let opts = solver_options(cfg);
    let mut regular = Vec::new();
    let mut jost = Vec::new();
    let mut worst = 0.0f64;
    for &k in kgrid.nodes() {
        let phi = regular_solution_with(&v, k, &grid, &opts)?;
        let f = jost_solution_with(&v, k, &grid, &opts)?;
        worst = worst.max(phi.error_estimate()).max(f.error_estimate());
        for i in 0..grid.len() {
            let r = grid.nodes()[i];
            regular.push(vec![k, r, phi.values()[i].re, phi.derivatives()[i].re]);
            jost.push(vec![k, r, f.values()[i].re, f.values()[i].im, f.derivatives()[i].re, f.derivatives()[i].im]);
        }
    }
    write_csv(out.create("regular.csv")?, &["k", "r", "phi", "dphi"], regular)?;
    write_csv(out.create("jost.csv")?, &["k", "r", "re_f", "im_f", "re_df", "im_df"], jost)?;
    let pair = zero_energy_pair_full(&v, &grid, &opts)?;
    let rows = (0..grid.len()).map(|i| vec![grid.nodes()[i], pair.phi0.values()[i].re, pair.chi0.values()[i].re]);
    write_csv(out.create("zero_energy.csv")?, &["r", "phi0", "chi0"], rows)?;
    out.json(
        "solve.json",
        &json!({
            "max_error_estimate": worst,
            "asymptotics": pair.asymptotics,
            "wronskian": wronskian_report(&pair),
        }),
    )
}

fn kernel(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<()> {
    let v = cfg.potential()?;
    let grid = cfg.radial_grid()?;
    let a = solve_kernel(&v, &grid, cfg.tolerances.kernel, 500)?;
    a.write_csv(out.create("kernel.csv")?)?;
    a.write_binary(out.create("kernel.bin")?)?;
    out.json(
        "kernel.json",
        &json!({
            "iterations": a.iterations(),
            "last_update": a.last_update(),
            "max_value": a.max_value(),
            "max_row_integral": a.max_row_integral(),
            "bound": kernel_bound_check(&a, &v),
        }),
    )
}

fn transform(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<()> {
    let v = cfg.potential()?;
    let grid = cfg.radial_grid()?;
    let kgrid = cfg.k_grid()?;
    let pair = zero_energy_pair_full(&v, &grid, &solver_options(cfg))?;
    let shape = cfg.transform.g;
    let g = SampledFunction::from_fn(&grid, |t| shape.eval(t))?;
    let f = build_f_from_g(&g, &pair.phi0, &pair.chi0)?;
    let rows = (0..grid.len()).map(|i| vec![grid.nodes()[i], g.values()[i], f.values()[i]]);
    write_csv(out.create("construction.csv")?, &["r", "g", "f"], rows)?;
    let ft = generalized_transform(&f, &v, &kgrid)?;
    ft.write_csv(out.create("transform.csv")?)?;
    let scale = ft.max_abs();
    let low = ft.values.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    let mut report = json!({
        "max_abs": scale,
        "min_re_over_max": low / scale,
        "residual": ode_residual_check(&f, &v, &g)?,
    });
    if let Some(path) = &cfg.transform.measure {
        let alpha = ExperimentConfig::measure(path)?;
        let st = stieltjes_transform(&alpha, &v, &kgrid)?;
        st.write_csv(out.create("stieltjes.csv")?)?;
        report["stieltjes_max_abs"] = json!(st.max_abs());
    }
    out.json("transform.json", &report)
}

fn bochner(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<()> {
    let v = cfg.potential()?;
    let alpha = match &cfg.bochner.measure {
        Some(path) => ExperimentConfig::measure(path)?,
        None => StieltjesMeasure::density_only(SampledFunction::from_fn(&cfg.radial_grid()?, |r| (-r).exp())?)?,
    };
    let opts = Theorem4Options {
        s: cfg.bochner.s,
        trials: cfg.bochner.trials,
        k_max: cfg.bochner.k_max,
        tol: cfg.tolerances.gram,
        seed: cfg.seed.expect("validated"),
        ..Theorem4Options::default()
    };
    let rep = theorem4_forward_check(&alpha, &v, &opts)?;
    out.text("gram.jsonl", &rep.gram.to_json_lines())?;
    out.json(
        "bochner.json",
        &json!({
            "seed": opts.seed,
            "pass": rep.gram.pass,
            "relative_margin": rep.gram.relative_margin,
            "min_eigenvalue": rep.gram.min_eigenvalue,
            "trace": rep.gram.trace,
            "two_path_max": rep.two_path_max,
            "bound_ratio": rep.bound_ratio,
        }),
    )
}

fn phaseshift(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<()> {
    let v = cfg.potential()?;
    let grid = cfg.radial_grid()?;
    let kgrid = cfg.k_grid()?;
    let integral = phase_shift_table(&v, &kgrid, &grid, PhaseMethod::PruferIntegral)?;
    let fit = phase_shift_table(&v, &kgrid, &grid, PhaseMethod::AsymptoticFit)?;
    let rows = (0..kgrid.len()).map(|i| vec![kgrid.nodes()[i], integral.delta[i], fit.delta[i]]);
    write_csv(out.create("phase_shift.csv")?, &["k", "delta", "delta_fit"], rows)?;
    let ps = &cfg.phaseshift;
    let t: Vec<f64> = (0..ps.t_nodes).map(|i| ps.t_step * i as f64).collect();
    let (rep, from_delta, from_omega) = theorem6_report(&v, &t, &kgrid, &SpectralOptions::default())?;
    let rows = (0..t.len()).map(|i| vec![t[i], from_delta.values[i], from_omega.values[i]]);
    write_csv(out.create("gamma.csv")?, &["t", "from_phase_shift", "from_omega"], rows)?;
    let gap = integral.delta.iter().zip(&fit.delta).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    out.json(
        "phaseshift.json",
        &json!({
            "max_delta": integral.delta.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            "fit_gap": gap,
            "regularity": theorem5_diagnostics(&integral)?,
            "gamma": rep,
        }),
    )
}

/// The suite follows the configured potential: `zero` runs the free suite,
/// anything else the full one with its own test potentials.
pub fn suite_for(cfg: &ExperimentConfig) -> Suite {
    if cfg.potential.family == Family::Zero {
        Suite::Free
    } else {
        Suite::Full
    }
}

pub fn verify_summary(cfg: &ExperimentConfig) -> Summary {
    with_determinism(run_suite(suite_for(cfg), cfg.seed.expect("validated")))
}

fn verify(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<bool> {
    let summary = verify_summary(cfg);
    for c in &summary.criteria {
        println!("{}", c.line());
    }
    out.text("verify_summary.json", &summary.to_json())?;
    Ok(summary.all_pass)
}
