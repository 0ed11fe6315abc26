use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Result;
use log::info;
use pipeflow::diagnostics::{energy_report, estimate_constants, EnergyReport};
use pipeflow::error::IterationRecord;
use pipeflow::fem::norms::{error_norms, velocity_h1_seminorm};
use pipeflow::fem::FeSpace;
use pipeflow::geometry::write_mesh;
use pipeflow::io::{write_vtk, CaseConfig, Cell, MeshStats, RunDir, RunManifest, Table};
use pipeflow::solver::{continuation_solve, solve as nse_solve, uniqueness_probe, OutletCondition, SolutionFields};
use pipeflow::Error;
use serde_json::json;

pub const EXIT_DIVERGED: u8 = 2;
pub const EXIT_CONFIG: u8 = 3;

/// Errors below this are treated as exact when computing rates.
const ERROR_FLOOR: f64 = 1e-11;

/// Exit status for an error that escaped a verb.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::Config { .. }) => EXIT_CONFIG,
        Some(Error::Diverged { .. } | Error::LineSearchFailure { .. } | Error::ContinuationStalled { .. }) => {
            EXIT_DIVERGED
        }
        _ => 1,
    }
}

fn config_error(message: String) -> Error {
    Error::Config { line: 1, column: 1, message }
}

fn load(case: &Path) -> Result<(String, CaseConfig)> {
    let text = std::fs::read_to_string(case)
        .map_err(|e| config_error(format!("cannot read {}: {e}", case.display())))?;
    let cfg = CaseConfig::parse(&text)?;
    Ok((text, cfg))
}

fn out_dir(cfg: &CaseConfig, out: Option<PathBuf>) -> PathBuf {
    out.unwrap_or_else(|| PathBuf::from(&cfg.output.directory))
}

fn secs(t: Instant) -> f64 {
    t.elapsed().as_secs_f64()
}

fn history_table(history: &[IterationRecord]) -> Table {
    let mut t = Table::new(&["iteration", "residual", "step_norm"]);
    for r in history {
        t.push(vec![r.iteration.into(), r.residual.into(), r.step_norm.into()]);
    }
    t
}

fn energy_table(e: &EnergyReport) -> Table {
    let mut t = Table::new(&[
        "lambda",
        "dissipation",
        "force_work",
        "traction_work",
        "reference_viscous",
        "reference_convection",
        "transport_convection",
        "outlet_dissipation",
        "pressure_divergence",
        "identity_residual",
        "relative_residual",
        "backflow_energy",
        "inequality_holds",
    ]);
    t.push(vec![
        e.lambda.into(),
        e.dissipation.into(),
        e.force_work.into(),
        e.traction_work.into(),
        e.reference_viscous.into(),
        e.reference_convection.into(),
        e.transport_convection.into(),
        e.outlet_dissipation.into(),
        e.pressure_divergence.into(),
        e.identity_residual.into(),
        e.relative_residual.into(),
        e.backflow_energy.into(),
        e.inequality_holds.into(),
    ]);
    t
}

fn outlet_name(o: OutletCondition) -> &'static str {
    match o {
        OutletCondition::Ddn => "ddn",
        OutletCondition::DoNothing => "do_nothing",
    }
}

/// Run directory, manifest and space shared by every verb.
struct Run {
    cfg: CaseConfig,
    dir: RunDir,
    manifest: RunManifest,
}

impl Run {
    fn start(command: &str, case: &Path, out: Option<PathBuf>) -> Result<Run> {
        let (text, cfg) = load(case)?;
        let dir = RunDir::create(out_dir(&cfg, out))?;
        info!("{command}: writing to {}", dir.root().display());
        Ok(Run { manifest: RunManifest::new(command, &text), cfg, dir })
    }

    fn space(&mut self, level: usize) -> Result<FeSpace> {
        let t = Instant::now();
        let space = self.cfg.space(level)?;
        self.manifest.timings_s.insert(format!("mesh_level_{level}"), secs(t));
        self.manifest.mesh.push(MeshStats::of(&space, self.cfg.mesh.h(level)));
        if level == 0 && self.cfg.output.mesh {
            let mut buf = Vec::new();
            write_mesh(space.mesh(), &mut buf)?;
            self.dir.write("mesh.txt", &buf)?;
        }
        Ok(space)
    }

    fn table(&mut self, name: &str, t: &Table) -> Result<()> {
        Ok(self.dir.write(name, &t.to_bytes())?)
    }

    fn fields(&mut self, name: &str, space: &FeSpace, sol: &SolutionFields) -> Result<()> {
        if self.cfg.output.vtk {
            let mut buf = Vec::new();
            write_vtk(space, &sol.velocity, &sol.pressure, &mut buf)?;
            self.dir.write(name, &buf)?;
        }
        Ok(())
    }

    /// Record a solver failure, write its trace and the manifest, and hand
    /// the error back.
    fn fail(mut self, e: Error) -> Result<u8> {
        if let Error::Diverged { trace, .. } = &e {
            let t = history_table(trace);
            self.table("trace.csv", &t)?;
        }
        self.manifest.status = format!("failed: {e}");
        self.dir.finish(self.manifest)?;
        Err(e.into())
    }

    fn finish(self) -> Result<()> {
        let path = self.dir.finish(self.manifest)?;
        info!("manifest {}", path.display());
        Ok(())
    }
}

pub fn solve(case: &Path, out: Option<PathBuf>) -> Result<u8> {
    let mut run = Run::start("solve", case, out)?;
    let space = run.space(0)?;
    let data = run.cfg.problem_data(&space)?;
    let t = Instant::now();
    let (sol, reference) = match nse_solve(&space, &data, &run.cfg.solver) {
        Ok(r) => r,
        Err(e) => return run.fail(e),
    };
    run.manifest.timings_s.insert("solve".into(), secs(t));
    println!("converged in {} iterations, residual {:.3e}", sol.iterations(), sol.final_residual());
    run.manifest.solver = json!({
        "outlet": outlet_name(run.cfg.solver.outlet),
        "iterations": sol.iterations(),
        "final_residual": sol.final_residual(),
    });

    let t = Instant::now();
    let energy = energy_report(&space, &data, &reference, &sol, &run.cfg.solver);
    let mut diag = json!({
        "energy_relative_residual": energy.relative_residual,
        "backflow_energy": energy.backflow_energy,
        "reference_flow": reference.report,
    });
    if let Some(exact) = &run.cfg.exact {
        let (u, p) = exact.fields();
        let e = error_norms(&space, &sol.velocity, &sol.pressure, &u, &p);
        println!("H1 velocity error {:.3e}", e.h1_vel);
        println!("L2 velocity error {:.3e}", e.l2_vel);
        println!("L2 pressure error {:.3e}", e.l2_pres);
        diag["errors"] = json!(e);
    }
    run.manifest.diagnostics = diag;
    run.manifest.timings_s.insert("diagnostics".into(), secs(t));

    run.fields("u_p.vtk", &space, &sol)?;
    run.table("energy.csv", &energy_table(&energy))?;
    run.table("history.csv", &history_table(&sol.history))?;
    run.finish()?;
    Ok(0)
}

fn rate(coarse: f64, fine: f64, h_coarse: f64, h_fine: f64) -> Cell {
    if coarse < ERROR_FLOOR || fine < ERROR_FLOOR {
        Cell::Na
    } else {
        Cell::Float((coarse / fine).ln() / (h_coarse / h_fine).ln())
    }
}

pub fn converge(case: &Path, out: Option<PathBuf>, levels: usize) -> Result<u8> {
    let mut run = Run::start("converge", case, out)?;
    let Some(exact) = run.cfg.exact.clone() else {
        return Err(config_error("converge needs an [exact] section".into()).into());
    };
    if levels == 0 {
        return Err(Error::argument("at least one level is needed").into());
    }
    let (u, p) = exact.fields();
    let mut t = Table::new(&[
        "level",
        "h",
        "triangles",
        "L2_vel",
        "H1_vel",
        "L2_pres",
        "rate_L2_vel",
        "rate_H1_vel",
        "rate_L2_pres",
    ]);
    let mut prev: Option<(f64, [f64; 3])> = None;
    for level in 0..levels {
        let space = run.space(level)?;
        let data = run.cfg.problem_data(&space)?;
        let clock = Instant::now();
        let sol = match nse_solve(&space, &data, &run.cfg.solver) {
            Ok((s, _)) => s,
            Err(e) => return run.fail(e),
        };
        run.manifest.timings_s.insert(format!("solve_level_{level}"), secs(clock));
        let e = error_norms(&space, &sol.velocity, &sol.pressure, &u, &p);
        let h = run.cfg.mesh.h(level);
        let errs = [e.l2_vel, e.h1_vel, e.l2_pres];
        let rates: Vec<Cell> = match prev {
            None => vec![Cell::Na; 3],
            Some((hc, ec)) => (0..3).map(|i| rate(ec[i], errs[i], hc, h)).collect(),
        };
        println!("level {level} h {h} L2_vel {:.3e} H1_vel {:.3e} L2_pres {:.3e}", errs[0], errs[1], errs[2]);
        let mut row: Vec<Cell> = vec![level.into(), h.into(), space.mesh().num_triangles().into()];
        row.extend(errs.iter().map(|&v| Cell::Float(v)));
        row.extend(rates);
        t.push(row);
        prev = Some((h, errs));
    }
    run.table("convergence.csv", &t)?;
    run.finish()?;
    Ok(0)
}

pub fn continuation(case: &Path, out: Option<PathBuf>) -> Result<u8> {
    let mut run = Run::start("continuation", case, out)?;
    let space = run.space(0)?;
    let data = run.cfg.problem_data(&space)?;
    let clock = Instant::now();
    let state = match continuation_solve(&space, &data, &run.cfg.solver) {
        Ok(s) => s,
        Err(e) => return run.fail(e),
    };
    run.manifest.timings_s.insert("continuation".into(), secs(clock));
    let mut sweep = Table::new(&["lambda", "J", "iterations", "step"]);
    let accepted = state.log.iter().filter(|r| r.accepted);
    for ((lambda, j), rec) in state.lambdas.iter().zip(&state.gradient_norms).zip(accepted) {
        sweep.push(vec![(*lambda).into(), (*j).into(), rec.iterations.into(), rec.step.into()]);
    }
    let mut log = Table::new(&["lambda", "step", "accepted", "iterations"]);
    for r in &state.log {
        log.push(vec![r.lambda.into(), r.step.into(), r.accepted.into(), r.iterations.into()]);
    }
    println!("reached lambda = 1 in {} accepted steps", state.lambdas.len() - 1);
    run.manifest.solver = json!({ "accepted": state.lambdas.len(), "attempts": state.log.len() });
    run.table("continuation.csv", &sweep)?;
    run.table("continuation_log.csv", &log)?;
    let last = state.last().clone();
    run.fields("u_p.vtk", &space, &last)?;
    run.finish()?;
    Ok(0)
}

pub fn compare_outlet(case: &Path, out: Option<PathBuf>) -> Result<u8> {
    let mut run = Run::start("compare-outlet", case, out)?;
    let space = run.space(0)?;
    let data = run.cfg.problem_data(&space)?;
    let mut t = Table::new(&[
        "outlet",
        "converged",
        "iterations",
        "final_residual",
        "backflow_energy",
        "grad_norm",
        "message",
    ]);
    let mut converged = Vec::new();
    for outlet in [OutletCondition::Ddn, OutletCondition::DoNothing] {
        let name = outlet_name(outlet);
        let cfg = pipeflow::solver::SolverConfig { outlet, ..run.cfg.solver.clone() };
        let clock = Instant::now();
        let result = nse_solve(&space, &data, &cfg);
        run.manifest.timings_s.insert(format!("solve_{name}"), secs(clock));
        match result {
            Ok((sol, reference)) => {
                let e = energy_report(&space, &data, &reference, &sol, &cfg);
                println!("{name}: converged in {} iterations, backflow energy {:.3e}", sol.iterations(), e.backflow_energy);
                t.push(vec![
                    name.into(),
                    true.into(),
                    sol.iterations().into(),
                    sol.final_residual().into(),
                    e.backflow_energy.into(),
                    velocity_h1_seminorm(&space, &sol.velocity).into(),
                    "".into(),
                ]);
                run.table(&format!("history_{name}.csv"), &history_table(&sol.history))?;
                converged.push(sol);
            }
            Err(err) => {
                println!("{name}: {err}");
                let trace = match &err {
                    Error::Diverged { trace, .. } => trace.clone(),
                    _ => Vec::new(),
                };
                let last = trace.last().map(|r| r.residual);
                t.push(vec![
                    name.into(),
                    false.into(),
                    trace.len().saturating_sub(1).into(),
                    last.into(),
                    Cell::Na,
                    Cell::Na,
                    err.to_string().as_str().into(),
                ]);
                run.table(&format!("history_{name}.csv"), &history_table(&trace))?;
            }
        }
    }
    if let [a, b] = converged.as_slice() {
        let d: Vec<f64> = a.velocity.iter().zip(&b.velocity).map(|(x, y)| x - y).collect();
        let dist = velocity_h1_seminorm(&space, &d);
        println!("H1 distance between the outlet conditions {dist:.3e}");
        run.manifest.diagnostics = json!({ "h1_distance": dist });
    }
    run.table("compare_outlet.csv", &t)?;
    run.finish()?;
    Ok(if converged.is_empty() { EXIT_DIVERGED } else { 0 })
}

pub fn constants(case: &Path, out: Option<PathBuf>, samples: usize, seed: u64) -> Result<u8> {
    let mut run = Run::start("constants", case, out)?;
    let space = run.space(0)?;
    let clock = Instant::now();
    let c = estimate_constants(&space, run.cfg.physics.eta, samples, seed)?;
    run.manifest.timings_s.insert("constants".into(), secs(clock));
    let mut t = Table::new(&["h", "eta", "s_star", "trace_constant", "infsup_constant", "m_star", "omega_star"]);
    t.push(vec![
        run.cfg.mesh.h(0).into(),
        c.eta.into(),
        c.s_star.into(),
        c.trace_constant.into(),
        c.infsup_constant.into(),
        c.m_star.into(),
        c.omega_star.into(),
    ]);
    println!("omega* = {:.6e} (S* {:.6e}, M* {:.6e})", c.omega_star, c.s_star, c.m_star);
    run.manifest.diagnostics = json!({ "constants": c, "samples": samples, "seed": seed });
    run.table("constants.csv", &t)?;
    run.finish()?;
    Ok(0)
}

pub fn uniqueness(case: &Path, out: Option<PathBuf>, starts: usize, seed: u64) -> Result<u8> {
    let mut run = Run::start("uniqueness", case, out)?;
    let space = run.space(0)?;
    let data = run.cfg.problem_data(&space)?;
    let clock = Instant::now();
    let r = uniqueness_probe(&space, &data, &run.cfg.solver, starts, seed)?;
    run.manifest.timings_s.insert("uniqueness".into(), secs(clock));
    let mut t = Table::new(&["starts", "converged", "max_distance", "data_magnitude"]);
    t.push(vec![r.starts.into(), r.converged.into(), r.max_distance.into(), r.data_magnitude.into()]);
    println!("{} of {} starts converged, max H1 distance {:.3e}", r.converged, r.starts, r.max_distance);
    run.manifest.diagnostics = json!({ "uniqueness": r, "seed": seed });
    run.table("uniqueness.csv", &t)?;
    run.finish()?;
    Ok(0)
}
