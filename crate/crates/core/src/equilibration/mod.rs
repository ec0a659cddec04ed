//! Weakly symmetric stress equilibration by vertex-patch corrections.
//!
//! Starting from the projected stress P̂, every patch ω_z contributes a
//! broken RT1 correction P^Δ_z of minimal L² norm subject to
//!   (div P^Δ_z, t)_T = −((f̂ + div P̂) φ_z, t)_T,
//!   ⟨[[P^Δ_z n]], s⟩_S = −⟨[[P̂ n]] φ_z, s⟩_S   (interior S),
//!   ⟨P^Δ_z n, s⟩_S = −⟨P̂ n φ_z, s⟩_S + G_z(s)   (S ⊂ Γ_N),
//!   (P^Δ_z F_hᵀ, J(γ))_{ω_z} = −(P̂ F_hᵀ φ_z, J(γ))_{ω_z},
//! and P^R = P̂ + Σ_z P^Δ_z.

mod local;
mod testspace;

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

pub use local::{predicted_adjoint_basis, EquilibrationProblem, LocalSystem, RHS_NOISE_FLOOR};
pub use testspace::{ElementTestSpace, SideTestSpace, TestSpaceVariant, ELEMENT_TESTS, SIDE_TESTS};

use crate::error::{Error, Result};
use crate::femspace::rt::{BrokenRtStress, RtSpace};
use crate::hyperelastic::{Field, Material};
use crate::linalg::{null_space, MinNormSolution};
use crate::loading::Loading;
use crate::mesh::{Mesh, PartitionOfUnity, PatchKind};
use crate::projection::{project, ProjectedLoad, ProjectedStress, ProjectionMode};

#[derive(Clone, Debug)]
pub struct EquilibrationOptions {
    pub mode: ProjectionMode,
    pub variant: TestSpaceVariant,
    pub material: Material,
    /// In naive mode, fail on incompatible patch data instead of solving in
    /// the least-squares sense.
    pub strict: bool,
    /// Relative singular-value cutoff of the local solves.
    pub rank_tol: f64,
    /// Range defect, relative to the size of the patch data, above which a
    /// right-hand side counts as incompatible.
    pub compat_tol: f64,
    /// Cross-check the numerical rank of every patch against the predicted
    /// adjoint null space (deformed test spaces only).
    pub check_rank: bool,
}

impl Default for EquilibrationOptions {
    fn default() -> Self {
        EquilibrationOptions {
            mode: ProjectionMode::Compatible,
            variant: TestSpaceVariant::Deformed,
            material: Material::incompressible(1.0),
            strict: false,
            rank_tol: 1e-10,
            compat_tol: 1e-9,
            check_rank: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PatchReport {
    pub center: usize,
    pub kind: PatchKind,
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub incompatibility: f64,
}

#[derive(Clone, Debug)]
pub struct EquilibrationResult {
    pub projected: ProjectedStress,
    pub projected_load: ProjectedLoad,
    /// P̂ written in the broken RT1 basis.
    pub projected_rt: BrokenRtStress,
    pub reconstruction: BrokenRtStress,
    pub patches: Vec<PatchReport>,
}

impl EquilibrationResult {
    pub fn max_incompatibility(&self) -> f64 {
        self.patches.iter().map(|p| p.incompatibility).fold(0.0, f64::max)
    }
}

/// Projects P(u_h, p_h) and f, then equilibrates.
pub fn equilibrate(
    mesh: &Mesh,
    patches: &PartitionOfUnity,
    field: &Field,
    loading: &dyn Loading,
    opts: &EquilibrationOptions,
) -> Result<EquilibrationResult> {
    let (stress, load) = project(mesh, patches, field, &opts.material, loading, opts.mode)?;
    let rt = Arc::new(RtSpace::new(mesh));
    let pb = EquilibrationProblem {
        mesh,
        patches,
        rt: &rt,
        field,
        stress: &stress,
        load: &load,
        loading,
        mode: opts.mode,
        variant: opts.variant,
    };
    let (projected_rt, reconstruction, reports) = equilibrate_projected(&pb, rt.clone(), opts)?;
    Ok(EquilibrationResult { projected: stress, projected_load: load, projected_rt, reconstruction, patches: reports })
}

/// Equilibrates already projected data. Returns P̂ in the RT basis, P^R and
/// one report per patch.
pub fn equilibrate_projected(
    pb: &EquilibrationProblem,
    rt: Arc<RtSpace>,
    opts: &EquilibrationOptions,
) -> Result<(BrokenRtStress, BrokenRtStress, Vec<PatchReport>)> {
    let solutions: Vec<(LocalSystem, MinNormSolution)> = (0..pb.patches.patches().len())
        .into_par_iter()
        .map(|i| {
            let sys = LocalSystem::assemble(pb, i);
            let sol = sys.solve(opts.rank_tol)?;
            check_patch(pb, &sys, &sol, opts)?;
            Ok((sys, sol))
        })
        .collect::<Result<_>>()?;

    let stress = pb.stress;
    let projected_rt = BrokenRtStress::interpolate(rt, |t, x| {
        let bary = pb.rt.element(t).geom.bary(x);
        stress.eval(t, bary)
    });
    let mut reconstruction = projected_rt.clone();
    let mut reports = Vec::with_capacity(solutions.len());
    // ascending patch order keeps the summation deterministic
    for (sys, sol) in &solutions {
        for (col, &(t, d)) in sys.columns.iter().enumerate() {
            reconstruction.coeffs[t][d] += sol.x[col];
        }
        reports.push(PatchReport {
            center: pb.patches.patch(sys.patch).center,
            kind: sys.kind,
            rows: sys.num_rows(),
            cols: sys.columns.len(),
            rank: sol.rank,
            incompatibility: sys.relative_defect(sol),
        });
    }
    Ok((projected_rt, reconstruction, reports))
}

fn check_patch(pb: &EquilibrationProblem, sys: &LocalSystem, sol: &MinNormSolution, opts: &EquilibrationOptions) -> Result<()> {
    if opts.check_rank && pb.variant == TestSpaceVariant::Deformed {
        let predicted = match sys.kind {
            PatchKind::Interior => 3,
            PatchKind::Dirichlet => 0,
        };
        let computed = sys.num_rows() - sol.rank;
        if computed != predicted {
            return Err(Error::NullSpaceMismatch { patch: pb.patches.patch(sys.patch).center, computed, predicted });
        }
    }
    let must_hold = opts.mode == ProjectionMode::Compatible || opts.strict;
    let defect = sys.relative_defect(sol);
    if must_hold && defect > opts.compat_tol && !sys.is_roundoff(sol.defect) {
        return Err(Error::IncompatibleRhs { residual: defect });
    }
    Ok(())
}

pub fn build_local_system(pb: &EquilibrationProblem, patch_index: usize) -> LocalSystem {
    LocalSystem::assemble(pb, patch_index)
}

pub fn solve_minimum_norm(sys: &LocalSystem, rank_tol: f64) -> Result<MinNormSolution> {
    sys.solve(rank_tol)
}

/// max_y |yᵀb| / (‖y‖ ‖b‖) over the predicted adjoint null-space basis;
/// zero for Dirichlet patches and for empty data.
pub fn check_compatibility(pb: &EquilibrationProblem, sys: &LocalSystem) -> f64 {
    let y = predicted_adjoint_basis(pb, sys);
    let bn = sys.rhs.norm();
    if bn == 0.0 {
        return 0.0;
    }
    y.column_iter().map(|c| (c.dot(&sys.rhs) / (c.norm() * bn)).abs()).fold(0.0, f64::max)
}

/// Discrete inf-sup value of the weak-symmetry pairing on one patch.
#[derive(Clone, Debug, PartialEq)]
pub struct InfSupReport {
    pub center: usize,
    pub kind: PatchKind,
    /// Smallest nonzero singular value.
    pub beta: f64,
    /// Multipliers annihilated by every divergence- and jump-free stress.
    pub zero_modes: usize,
}

/// β_z = smallest nonzero singular value of M_X^{-1/2} C_sym N, where the
/// columns of N are an M-orthonormal basis of the stresses satisfying the
/// homogeneous divergence and jump constraints.
pub fn infsup_check(sys: &LocalSystem, pb: &EquilibrationProblem) -> Result<InfSupReport> {
    let patch = pb.patches.patch(sys.patch);
    let chol = sys.mass.clone().cholesky().ok_or(Error::SingularMass)?;
    let l = chol.l();
    let d = sys.equilibrium_rows();
    // D L^{-T}
    let dl = l.solve_lower_triangular(&d.transpose()).ok_or(Error::SingularMass)?.transpose();
    let w = null_space(&dl, 1e-10);
    let n = l.transpose().solve_upper_triangular(&w).ok_or(Error::SingularMass)?;

    let nn = patch.nodes.len();
    let mut mx = DMatrix::zeros(nn, nn);
    for &t in &patch.elements {
        let tri = pb.mesh.triangle(t);
        let area = pb.mesh.area(t);
        let idx = tri.map(|v| patch.nodes.binary_search(&v).expect("vertex of patch"));
        for a in 0..3 {
            for b in 0..3 {
                mx[(idx[a], idx[b])] += if a == b { area / 6.0 } else { area / 12.0 };
            }
        }
    }
    let lx = mx.cholesky().ok_or(Error::SingularMass)?.l();
    let k = lx.solve_lower_triangular(&(sys.symmetry_rows() * n)).ok_or(Error::SingularMass)?;
    let sv = crate::linalg::thin_svd(&k).1;
    let mut s: Vec<f64> = sv.iter().copied().collect();
    s.resize(nn, 0.0);
    let smax = s.iter().copied().fold(0.0, f64::max);
    let zero_modes = s.iter().filter(|&&v| v <= 1e-8 * smax).count();
    let beta = s.iter().copied().filter(|&v| v > 1e-8 * smax).fold(f64::INFINITY, f64::min);
    Ok(InfSupReport { center: patch.center, kind: sys.kind, beta, zero_modes })
}
