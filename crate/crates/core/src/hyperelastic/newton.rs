//! Damped Newton iteration with load stepping and bisection.

use super::assembly::{assemble_residual, assemble_system, min_det};
use super::{Field, Material};
use crate::error::{Error, Result};
use crate::femspace::TaylorHoodSpace;
use crate::linalg::sparse_solve;
use crate::loading::{Loading, Scaled};
use crate::mesh::Mesh;

#[derive(Clone, Debug)]
pub struct NewtonOptions {
    /// Number of equal load increments.
    pub load_steps: usize,
    /// Maximum number of times an increment may be halved.
    pub max_bisections: usize,
    pub max_iterations: usize,
    /// Converged when ‖R‖_∞ ≤ tolerance · (1 + load_scale). The default
    /// sits well below `stall_tolerance` because the equilibration relies on
    /// Galerkin orthogonality of the discrete solution.
    pub tolerance: f64,
    /// A step that fails to halve the residual is accepted once
    /// ‖R‖_∞ ≤ stall_tolerance · (1 + load_scale) (round-off floor).
    pub stall_tolerance: f64,
    /// Typically the load magnitude γ.
    pub load_scale: f64,
    /// Maximum number of step halvings to keep det F above `det_threshold`.
    pub max_damping: usize,
    pub det_threshold: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            load_steps: 4,
            max_bisections: 3,
            max_iterations: 30,
            tolerance: 1e-13,
            stall_tolerance: 1e-10,
            load_scale: 0.0,
            max_damping: 10,
            det_threshold: 1e-8,
        }
    }
}

/// Residual history of one load increment.
#[derive(Clone, Debug)]
pub struct LoadStepLog {
    pub load_factor: f64,
    pub residuals: Vec<f64>,
}

#[derive(Clone, Debug, Default)]
pub struct NewtonLog {
    pub steps: Vec<LoadStepLog>,
}

impl NewtonLog {
    pub fn total_iterations(&self) -> usize {
        self.steps.iter().map(|s| s.residuals.len().saturating_sub(1)).sum()
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, b| a.max(b.abs()))
}

fn newton_at_load(
    mesh: &Mesh,
    th: &TaylorHoodSpace,
    mat: &Material,
    loading: &dyn Loading,
    start: &Field,
    opts: &NewtonOptions,
    history: &mut Vec<f64>,
) -> Result<Field> {
    let tol = opts.tolerance * (1.0 + opts.load_scale.abs());
    let stall = opts.stall_tolerance.max(opts.tolerance) * (1.0 + opts.load_scale.abs());
    let mut x = start.to_dofs(th);
    let mut field = start.clone();
    let mut previous = f64::INFINITY;
    for _ in 0..=opts.max_iterations {
        let sys = assemble_system(mesh, th, &field, mat, loading)?;
        let r = sup(&sys.residual);
        history.push(r);
        if !r.is_finite() {
            break;
        }
        if r <= tol || (r <= stall && r > 0.5 * previous) {
            return Ok(field);
        }
        previous = r;
        let rhs: Vec<f64> = sys.residual.iter().map(|v| -v).collect();
        let dx = sparse_solve(th.num_dofs(), &sys.triplets, &rhs)?;
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_damping {
            let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + alpha * b).collect();
            let f = Field::from_dofs(th, &trial);
            if min_det(mesh, &f) > opts.det_threshold {
                accepted = Some((trial, f));
                break;
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((trial, f)) => {
                x = trial;
                field = f;
            }
            None => break,
        }
    }
    Err(Error::NewtonDiverged { load: 0.0, history: history.clone() })
}

/// Solves the discrete saddle-point problem for the full load.
pub fn solve_newton(mesh: &Mesh, mat: Material, loading: &dyn Loading, opts: &NewtonOptions) -> Result<Field> {
    Ok(solve_newton_logged(mesh, mat, loading, opts)?.0)
}

pub fn solve_newton_logged(
    mesh: &Mesh,
    mat: Material,
    loading: &dyn Loading,
    opts: &NewtonOptions,
) -> Result<(Field, NewtonLog)> {
    let th = TaylorHoodSpace::new(mesh);
    let mut field = Field::zeros(mesh);
    let mut log = NewtonLog::default();

    // Unloaded problems need no stepping.
    let r0 = sup(&assemble_residual(mesh, &th, &field, &mat, loading)?);
    if r0 <= opts.tolerance * (1.0 + opts.load_scale.abs()) {
        log.steps.push(LoadStepLog { load_factor: 1.0, residuals: vec![r0] });
        return Ok((field, log));
    }

    let mut done = 0.0;
    let mut dt = 1.0 / opts.load_steps.max(1) as f64;
    let mut bisections = 0;
    while done < 1.0 {
        let target = if done + dt > 1.0 - 1e-12 { 1.0 } else { done + dt };
        let scaled = Scaled { inner: loading, factor: target };
        let mut history = Vec::new();
        match newton_at_load(mesh, &th, &mat, &scaled, &field, opts, &mut history) {
            Ok(f) => {
                field = f;
                done = target;
                log.steps.push(LoadStepLog { load_factor: target, residuals: history });
            }
            Err(Error::NewtonDiverged { .. } | Error::NonpositiveDet { .. }) if bisections < opts.max_bisections => {
                bisections += 1;
                dt *= 0.5;
            }
            Err(Error::NewtonDiverged { .. } | Error::NonpositiveDet { .. }) => {
                return Err(Error::NewtonDiverged { load: target, history });
            }
            Err(e) => return Err(e),
        }
    }
    Ok((field, log))
}
