//! Single solves and convergence studies.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;

use rte_pml::angular::{build_basis, coupling_matrices, AngularBasis, SphereQuadrature};
use rte_pml::assembly::{project_source, BlockOperator, Field};
use rte_pml::mesh::{build_mesh, GeometrySpec, Hierarchy, Mesh2D};
use rte_pml::pml::{extend_coefficients, layer_absorption, Medium};
use rte_pml::solver::{solve_mixed, SolveReport};

use crate::config::{nested_level, RunConfig};
use crate::export::export_field;
use crate::CliError;

/// A solved case together with what is needed to post-process it.
pub struct Solved {
    pub basis: AngularBasis,
    pub op: BlockOperator,
    pub field: Field,
    pub report: SolveReport,
}

/// Serializes record writes to the run log.
pub struct Appender {
    path: PathBuf,
    lock: Mutex<()>,
}

impl Appender {
    pub fn new(path: PathBuf) -> Result<Self, CliError> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        Ok(Self { path, lock: Mutex::new(()) })
    }

    pub fn append(&self, record: &str) -> Result<(), CliError> {
        let _guard = self.lock.lock().unwrap_or_else(|e| e.into_inner());
        let mut f = OpenOptions::new().create(true).append(true).open(&self.path)?;
        writeln!(f, "{record}")?;
        Ok(())
    }
}

/// Assembles and solves one `(order, a)` case on `hierarchy.mesh(level)`.
///
/// The coarser levels feed the multilevel spatial preconditioner.
#[allow(clippy::too_many_arguments)]
pub fn solve_level(
    cfg: &RunConfig,
    spec: &GeometrySpec,
    medium: &Medium<'_>,
    hierarchy: &Hierarchy,
    level: usize,
    order: usize,
    a: f64,
) -> Result<Solved, CliError> {
    let mesh = hierarchy.mesh(level);
    let basis = build_basis(order).map_err(CliError::at("angular basis"))?;
    let quad = SphereQuadrature::for_order(order).map_err(CliError::at("angular quadrature"))?;
    let couplings = coupling_matrices(&basis, &quad).map_err(CliError::at("angular couplings"))?;
    let coeffs = extend_coefficients(mesh, spec, medium, a).map_err(CliError::at("coefficients"))?;
    let op = BlockOperator::assemble(mesh, &coeffs, &basis, &couplings).map_err(CliError::at("assembly"))?;
    let (q_plus, q_minus) = project_source(mesh, &basis, coeffs.source());
    let sub;
    let levels = if level > 0 {
        sub = truncated(hierarchy, level);
        Some(&sub)
    } else {
        None
    };
    let (field, report) = solve_mixed(
        &op,
        &q_plus,
        &q_minus,
        cfg.solver.preconditioner.into(),
        levels,
        cfg.solver.tol,
        cfg.solver.max_iter,
    )
    .map_err(CliError::at(format!("solve (N={order}, h={}, a={a})", mesh.h())))?;
    let report = report
        .with_param("mesh.h", mesh.h())
        .with_param("mesh.n_vertices", mesh.n_vertices())
        .with_param("mesh.n_triangles", mesh.n_triangles())
        .with_param("order", order)
        .with_param("n_plus", basis.n_plus())
        .with_param("n_minus", basis.n_minus())
        .with_param("a", a)
        .with_param("ell", coeffs.ell())
        .with_param("exp_al", coeffs.attenuation())
        .with_param("gamma", coeffs.gamma())
        .with_param("Gamma", coeffs.Gamma());
    Ok(Solved { basis, op, field, report })
}

fn truncated(hierarchy: &Hierarchy, level: usize) -> Hierarchy {
    if level + 1 == hierarchy.levels() {
        return hierarchy.clone();
    }
    Hierarchy::new(hierarchy.mesh(0).clone(), level)
}

fn record(kind: &str, cfg: &RunConfig, report: &SolveReport, extra: &[(&str, String)]) -> String {
    let mut s = format!("record={kind}\n");
    for (k, v) in cfg.echo() {
        s.push_str(&format!("config.{k}={v}\n"));
    }
    for (k, v) in extra {
        s.push_str(&format!("{k}={v}\n"));
    }
    s.push_str(&report.to_record());
    s
}

fn hierarchy_for(cfg: &RunConfig, spec: &GeometrySpec, refinements: usize) -> Result<Hierarchy, CliError> {
    let base = build_mesh(spec, cfg.discretization.h).map_err(CliError::at("mesh"))?;
    Ok(Hierarchy::new(base, refinements))
}

/// Solves the configured case for the first absorption of `[pml]`,
/// appends its record to the run log and writes the field if requested.
pub fn run_case(cfg: &RunConfig) -> Result<(Solved, Mesh2D), CliError> {
    let a = cfg.absorptions()?[0];
    let mut out = solve_all_with(cfg, &[a])?;
    Ok(out.remove(0))
}

/// Solves every absorption of `[pml]` in order.
pub fn solve_all(cfg: &RunConfig) -> Result<Vec<(Solved, Mesh2D)>, CliError> {
    let a = cfg.absorptions()?;
    solve_all_with(cfg, &a)
}

fn solve_all_with(cfg: &RunConfig, absorptions: &[f64]) -> Result<Vec<(Solved, Mesh2D)>, CliError> {
    cfg.validate()?;
    let spec = cfg.geometry()?;
    let medium = cfg.physics.medium().map_err(CliError::at("physics"))?;
    let levels = cfg.discretization.refinements;
    let hierarchy = hierarchy_for(cfg, &spec, levels)?;
    let log = Appender::new(cfg.outputs.dir.join(&cfg.outputs.report))?;
    let mut results = Vec::new();
    for (i, &a) in absorptions.iter().enumerate() {
        let solved = solve_level(cfg, &spec, &medium, &hierarchy, levels, cfg.discretization.order, a)?;
        log::info!(
            "a={a:.6} iterations={} residual={:.3e}",
            solved.report.iterations,
            solved.report.final_residual()
        );
        log.append(&record("solve", cfg, &solved.report, &[("case", i.to_string())]))?;
        if let Some(stem) = &cfg.outputs.field {
            let name = if absorptions.len() > 1 { format!("{stem}_{i}") } else { stem.clone() };
            export_field(&solved.field, hierarchy.finest(), cfg.outputs.format, &cfg.outputs.dir.join(name))?;
        }
        results.push((solved, hierarchy.finest().clone()));
    }
    Ok(results)
}

/// One row of the study table.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub order: usize,
    pub h: f64,
    pub exp_al: f64,
    pub e_h: f64,
    pub iters: usize,
    pub seconds: f64,
    pub dofs_even: usize,
    pub dofs_odd: usize,
}

pub const STUDY_HEADER: [&str; 8] = ["N", "h", "exp_al", "e_h", "iters", "seconds", "dofs_even", "dofs_odd"];

/// Sweeps `orders × h × targets` and measures each case against the
/// reference solution on the finest nested grid.
///
/// Coarse solutions are prolonged to the reference grid and embedded in the
/// reference angular basis; the error is evaluated on the original domain.
/// Cases run concurrently; rows come back in sweep order.
pub fn convergence_study(cfg: &RunConfig) -> Result<Vec<StudyRow>, CliError> {
    cfg.validate()?;
    let study = cfg.study.as_ref().ok_or_else(|| CliError::Config("missing [study] section".into()))?;
    let spec = cfg.geometry()?;
    let medium = cfg.physics.medium().map_err(CliError::at("physics"))?;
    let base_h = cfg.discretization.h;
    let level = |h: f64| nested_level(base_h, h).ok_or_else(|| CliError::Config(format!("h = {h} is not nested")));
    let ref_level = level(study.reference.h)?;
    let hierarchy = hierarchy_for(cfg, &spec, ref_level)?;
    let ell = spec.layer_thickness();
    let log = Appender::new(cfg.outputs.dir.join(&cfg.outputs.report))?;

    let r = &study.reference;
    let a_ref = layer_absorption(r.target, ell)?;
    let reference = solve_level(cfg, &spec, &medium, &hierarchy, ref_level, r.order, a_ref)?;
    log.append(&record("reference", cfg, &reference.report, &[]))?;

    let mut cases = Vec::new();
    for &order in &study.orders {
        for &h in &study.h {
            for &target in &study.targets {
                cases.push((order, level(h)?, target));
            }
        }
    }
    let rows = cases
        .par_iter()
        .map(|&(order, lvl, target)| -> Result<StudyRow, CliError> {
            let start = Instant::now();
            let a = layer_absorption(target, ell)?;
            let solved = solve_level(cfg, &spec, &medium, &hierarchy, lvl, order, a)?;
            let fine = solved
                .field
                .prolong(&hierarchy, lvl, ref_level)
                .embed(&solved.basis, &reference.basis)
                .map_err(CliError::at("embedding"))?;
            let d_even: Vec<f64> = reference.field.even.iter().zip(&fine.even).map(|(u, w)| u - w).collect();
            let d_odd: Vec<f64> = reference.field.odd.iter().zip(&fine.odd).map(|(u, w)| u - w).collect();
            let e_h = reference.op.interior_error_sq(&d_even, &d_odd).sqrt();
            let report = &solved.report;
            log.append(&record("study", cfg, report, &[("e_h", format!("{e_h:e}"))]))?;
            Ok(StudyRow {
                order,
                h: hierarchy.mesh(lvl).h(),
                exp_al: target,
                e_h,
                iters: report.iterations,
                seconds: start.elapsed().as_secs_f64(),
                dofs_even: report.dofs_even,
                dofs_odd: report.dofs_odd,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(rows)
}

pub fn write_study_table(rows: &[StudyRow], path: &Path) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(STUDY_HEADER)?;
    for r in rows {
        w.write_record([
            r.order.to_string(),
            r.h.to_string(),
            r.exp_al.to_string(),
            format!("{:e}", r.e_h),
            r.iters.to_string(),
            format!("{:.3}", r.seconds),
            r.dofs_even.to_string(),
            r.dofs_odd.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
