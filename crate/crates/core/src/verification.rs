//! Brute-force checks of the adjoint null space of the patch operators and
//! of the solvability defect caused by naive projections.

use std::sync::Arc;

use rayon::prelude::*;

use crate::equilibration::{check_compatibility, predicted_adjoint_basis, EquilibrationProblem, LocalSystem, TestSpaceVariant};
use crate::error::Result;
use crate::femspace::rt::RtSpace;
use crate::hyperelastic::{Field, Material};
use crate::linalg::{left_null_space, principal_angle_sin};
use crate::loading::Loading;
use crate::mesh::{Mesh, PartitionOfUnity, PatchKind};
use crate::projection::{project, ProjectionMode};

/// Singular-value threshold relative to σ_max for null(Cᵀ).
pub const NULL_SPACE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct NullSpaceReport {
    pub center: usize,
    pub kind: PatchKind,
    pub computed: usize,
    pub predicted: usize,
    /// Largest principal angle in radians; `None` when the dimensions differ.
    pub principal_angle: Option<f64>,
    /// max over predicted vectors v of ‖vᵀC‖ / (‖C‖ ‖v‖).
    pub prediction_residual: f64,
}

pub fn adjoint_null_space(pb: &EquilibrationProblem, patch_index: usize) -> NullSpaceReport {
    let sys = LocalSystem::assemble(pb, patch_index);
    null_space_report(pb, &sys)
}

pub fn null_space_report(pb: &EquilibrationProblem, sys: &LocalSystem) -> NullSpaceReport {
    let c = &sys.constraints;
    let computed = left_null_space(c, NULL_SPACE_TOL);
    let predicted = predicted_adjoint_basis(pb, sys);
    let cn = c.norm();
    let prediction_residual = predicted
        .column_iter()
        .map(|v| (v.transpose() * c).norm() / (cn * v.norm()))
        .fold(0.0, f64::max);
    let principal_angle =
        (computed.ncols() == predicted.ncols()).then(|| principal_angle_sin(&computed, &predicted).asin());
    NullSpaceReport {
        center: pb.patches.patch(sys.patch).center,
        kind: sys.kind,
        computed: computed.ncols(),
        predicted: predicted.ncols(),
        principal_angle,
        prediction_residual,
    }
}

/// Null-space reports for every patch, in patch order.
pub fn null_space_scan(pb: &EquilibrationProblem) -> Vec<NullSpaceReport> {
    (0..pb.patches.patches().len()).into_par_iter().map(|i| adjoint_null_space(pb, i)).collect()
}

/// Compatibility defect of one patch under both projections.
#[derive(Clone, Debug, PartialEq)]
pub struct IncompatibilityRow {
    pub center: usize,
    pub kind: PatchKind,
    pub naive: f64,
    pub compatible: f64,
}

/// Evaluates the right-hand side on the predicted adjoint null space of
/// every patch, once with naive and once with compatible projections.
pub fn incompatibility_scan(
    mesh: &Mesh,
    patches: &PartitionOfUnity,
    field: &Field,
    material: &Material,
    loading: &dyn Loading,
    variant: TestSpaceVariant,
) -> Result<Vec<IncompatibilityRow>> {
    let rt = Arc::new(RtSpace::new(mesh));
    let mut per_mode = Vec::new();
    for mode in [ProjectionMode::Naive, ProjectionMode::Compatible] {
        let (stress, load) = project(mesh, patches, field, material, loading, mode)?;
        let pb = EquilibrationProblem { mesh, patches, rt: &rt, field, stress: &stress, load: &load, loading, mode, variant };
        let values: Vec<f64> = (0..patches.patches().len())
            .into_par_iter()
            .map(|i| check_compatibility(&pb, &LocalSystem::assemble(&pb, i)))
            .collect();
        per_mode.push(values);
    }
    Ok(patches
        .patches()
        .iter()
        .enumerate()
        .map(|(i, p)| IncompatibilityRow { center: p.center, kind: p.kind, naive: per_mode[0][i], compatible: per_mode[1][i] })
        .collect())
}

/// One CSV row of the `verify` report.
#[derive(Clone, Debug, PartialEq)]
pub struct VerificationRow {
    pub variant: TestSpaceVariant,
    pub null_space: NullSpaceReport,
    pub incompat_naive: f64,
    pub incompat_compatible: f64,
}

/// Null-space and incompatibility scans for one test-space variant. The
/// null space is computed on the compatible-projection systems (C does not
/// depend on the projection).
pub fn verify(
    mesh: &Mesh,
    patches: &PartitionOfUnity,
    field: &Field,
    material: &Material,
    loading: &dyn Loading,
    variant: TestSpaceVariant,
) -> Result<Vec<VerificationRow>> {
    let rt = Arc::new(RtSpace::new(mesh));
    let (stress, load) = project(mesh, patches, field, material, loading, ProjectionMode::Compatible)?;
    let pb = EquilibrationProblem {
        mesh,
        patches,
        rt: &rt,
        field,
        stress: &stress,
        load: &load,
        loading,
        mode: ProjectionMode::Compatible,
        variant,
    };
    let reports = null_space_scan(&pb);
    let scan = incompatibility_scan(mesh, patches, field, material, loading, variant)?;
    Ok(reports
        .into_iter()
        .zip(scan)
        .map(|(null_space, s)| VerificationRow { variant, null_space, incompat_naive: s.naive, incompat_compatible: s.compatible })
        .collect())
}

pub fn verification_csv(rows: &[VerificationRow]) -> String {
    let mut s = String::from("variant,patch_id,kind,dim_computed,dim_predicted,principal_angle,incompat_naive,incompat_compatible\n");
    for r in rows {
        let n = &r.null_space;
        let kind = match n.kind {
            PatchKind::Interior => "INTERIOR",
            PatchKind::Dirichlet => "DIRICHLET",
        };
        let angle = n.principal_angle.map_or_else(|| "nan".to_string(), |a| format!("{a:e}"));
        s.push_str(&format!(
            "{},{},{},{},{},{},{:e},{:e}\n",
            r.variant.as_str(),
            n.center,
            kind,
            n.computed,
            n.predicted,
            angle,
            r.incompat_naive,
            r.incompat_compatible
        ));
    }
    s
}
