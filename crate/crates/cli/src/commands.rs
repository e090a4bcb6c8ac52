use std::path::Path;

use kfs_core::analysis::{
    effective_eta, estimate_interaction, interaction_in_linewidths, PolaritonParams,
};
use kfs_core::io::{self, RunConfig};
use kfs_core::par::available_workers;
use kfs_core::sweep::{convergence_scan, run_sweep, SweepSpec};
use kfs_core::wigner::{
    negativity_report, negativity_with_refinement, GridPolicy, NegativityReport,
};
use kfs_core::{
    evolve as run_evolution, observables, solve_steady_direct, solve_steady_evolved,
    wigner_transform, DensityMatrix, Error, PhaseSpaceGrid, Result, CODE_TAG,
};
use serde::Serialize;

fn report_for(rho: &DensityMatrix, grid: &GridPolicy) -> Result<NegativityReport> {
    match grid {
        GridPolicy::Auto => negativity_report(rho, true),
        GridPolicy::Explicit(g) => negativity_with_refinement(rho, g),
    }
}

fn print_report(r: &NegativityReport) {
    out!("negativity = {:.6}", r.value);
    out!(
        "grid = [{}, {}] x [{}, {}], {}x{} points, integral {:.6}, refinement change {:.1e}",
        r.grid.x_min, r.grid.x_max, r.grid.p_min, r.grid.p_max, r.grid.nx, r.grid.np, r.integral,
        r.refinement_delta
    );
    if !r.accepted() {
        eprintln!("warning: negativity not converged in grid resolution");
    }
}

pub fn evolve(config: &Path) -> Result<()> {
    let cfg = RunConfig::load(config)?;
    let rho0 = cfg.initial()?;
    let ev = run_evolution(&rho0, &cfg.model, &cfg.evolution)?;
    io::write_timeseries(&cfg.outputs.join("timeseries.csv"), &ev.series)?;
    io::write_state(&cfg.outputs.join("final_state.json"), &ev.state)?;
    for (k, rho) in ev.series.snapshots.iter().enumerate() {
        io::write_state(&cfg.outputs.join(format!("snapshots/state_{k:05}.json")), rho)?;
    }
    let obs = observables(&ev.state);
    out!("t_end = {}", ev.t_end);
    out!("steady = {}", ev.steady);
    out!("mean_n = {:.6}", obs.mean_n);
    out!("mean_a = {:.6} {:+.6}i", obs.mean_a.re, obs.mean_a.im);
    out!("purity = {:.6}", obs.purity);
    Ok(())
}

#[derive(Serialize)]
struct SteadySummary {
    code: &'static str,
    method: kfs_core::SteadyMethod,
    converged: bool,
    mean_n: f64,
    re_a: f64,
    im_a: f64,
    purity: f64,
    tail_mass: f64,
    negativity: f64,
    refinement_delta: f64,
    residual: f64,
    min_eigenvalue: f64,
    hermitization: f64,
}

pub fn steady(config: &Path, evolved: bool) -> Result<()> {
    let cfg = RunConfig::load(config)?;
    let ss = if evolved {
        solve_steady_evolved(&cfg.initial()?, &cfg.model, &cfg.evolution)?
    } else {
        solve_steady_direct(&cfg.model)?
    };
    let obs = observables(&ss.rho);
    let report = report_for(&ss.rho, &cfg.grid)?;
    io::write_state(&cfg.outputs.join("steady_state.json"), &ss.rho)?;
    io::write_field(
        &cfg.outputs.join("steady_wigner.csv"),
        &wigner_transform(&ss.rho, &report.grid)?,
    )?;
    let summary = SteadySummary {
        code: CODE_TAG,
        method: ss.method,
        converged: ss.converged,
        mean_n: obs.mean_n,
        re_a: obs.mean_a.re,
        im_a: obs.mean_a.im,
        purity: obs.purity,
        tail_mass: obs.tail_mass,
        negativity: report.value,
        refinement_delta: report.refinement_delta,
        residual: ss.residual,
        min_eigenvalue: ss.min_eigenvalue,
        hermitization: ss.hermitization,
    };
    io::write_json(&cfg.outputs.join("observables.json"), &summary)?;

    out!("mean_n = {:.6}", obs.mean_n);
    out!("mean_a = {:.6} {:+.6}i", obs.mean_a.re, obs.mean_a.im);
    out!("purity = {:.6}", obs.purity);
    out!("residual = {:.3e}", ss.residual);
    print_report(&report);
    if !ss.converged {
        eprintln!("warning: steady-state residual above tolerance");
    }
    if !ss.is_positive() {
        eprintln!("warning: minimum eigenvalue {:.3e}", ss.min_eigenvalue);
    }
    Ok(())
}

fn range(v: &[f64]) -> (f64, f64) {
    (v[0], v[1])
}

pub fn wigner(
    state: &Path,
    x: Option<Vec<f64>>,
    p: Option<Vec<f64>>,
    points: usize,
    output: Option<&Path>,
) -> Result<()> {
    let rho = io::read_state(state)?;
    let policy = match (x, p) {
        (None, None) => GridPolicy::Auto,
        (x, p) => {
            let x = x.as_deref().or(p.as_deref()).map(range).expect("one range given");
            let p = p.as_deref().map(range).unwrap_or(x);
            GridPolicy::Explicit(PhaseSpaceGrid::new(x, p, points, points)?)
        }
    };
    let report = report_for(&rho, &policy)?;
    if let Some(out) = output {
        io::write_field(out, &wigner_transform(&rho, &report.grid)?)?;
    }
    print_report(&report);
    Ok(())
}

pub fn sweep(spec_path: &Path, workers: Option<usize>) -> Result<()> {
    let mut spec: SweepSpec = io::read_json(spec_path)?;
    if spec.output.is_relative() {
        spec.output = spec_path.parent().unwrap_or(Path::new("")).join(&spec.output);
    }
    if spec.sidecar_path() == spec_path || spec.output == spec_path {
        return Err(Error::InvalidParameter {
            name: "output",
            reason: format!("{} would overwrite the spec file", spec.output.display()),
        });
    }
    let workers = workers.unwrap_or_else(available_workers);
    if workers == 0 {
        return Err(Error::InvalidParameter {
            name: "workers",
            reason: "must be at least 1".into(),
        });
    }
    let res = run_sweep(&spec, workers)?;
    let failed = res.rows.iter().filter(|r| r.outcome.is_err()).count();
    out!(
        "{} points ({} computed, {} reused, {} failed) -> {}",
        res.rows.len(),
        res.computed,
        res.rows.len() - res.computed,
        failed,
        spec.output.display()
    );
    Ok(())
}

pub fn convergence(config: &Path, cutoffs: &[usize]) -> Result<()> {
    let cfg = RunConfig::load(config)?;
    let table = convergence_scan(&cfg.model, cutoffs)?;
    out!("n_cut,negativity,mean_n,tail_mass,error");
    for r in &table.rows {
        out!(
            "{},{:.6e},{:.6},{:.3e},{}",
            r.n_cut,
            r.negativity,
            r.mean_n,
            r.tail_mass,
            r.error.as_deref().unwrap_or("")
        );
    }
    match table.converged_at {
        Some(n) => out!("converged at n_cut = {n}"),
        None => out!("not converged"),
    }
    Ok(())
}

pub fn interaction(p: PolaritonParams, lifetime_ps: Option<f64>) -> Result<()> {
    let u = estimate_interaction(&p)?;
    out!("U = {u:.4} ueV");
    if let Some(t) = lifetime_ps {
        out!("U/(hbar gamma) = {:.4}", interaction_in_linewidths(u, t)?);
    }
    Ok(())
}

pub fn eta(eta0: f64, r: f64) -> Result<()> {
    out!("eta = {}", effective_eta(eta0, r)?);
    Ok(())
}
