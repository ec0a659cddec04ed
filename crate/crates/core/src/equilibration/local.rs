//! The constrained minimum-norm problem on one vertex patch.
//!
//! Unknowns are the broken RT1 coefficients of the correction on ω_z, with
//! the normal DOFs of the closed sides ∂ω_z \ ∂Ω removed. Rows, in order:
//! 6 divergence rows per element, 4 jump rows per side of the patch and one
//! weak-symmetry row per vertex of ω_z.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use super::testspace::{ElementTestSpace, SideTestSpace, TestSpaceVariant, ELEMENT_TESTS, SIDE_TESTS};
use crate::error::Result;
use crate::femspace::rt::{edge_moment_basis, RtSpace};
use crate::femspace::{edge_quadrature, TriGeom, NONLINEAR_ORDER};
use crate::hyperelastic::Field;
use crate::linalg::{min_norm_solve, MinNormSolution};
use crate::loading::Loading;
use crate::mesh::{BoundaryLabel, Mesh, PartitionOfUnity, PatchKind};
use crate::projection::{ProjectedLoad, ProjectedStress, ProjectionMode};
use crate::Vec2;

/// Everything the patch problems read.
pub struct EquilibrationProblem<'a> {
    pub mesh: &'a Mesh,
    pub patches: &'a PartitionOfUnity,
    pub rt: &'a RtSpace,
    /// Discrete displacement; enters through F_h and the test spaces.
    pub field: &'a Field,
    pub stress: &'a ProjectedStress,
    pub load: &'a ProjectedLoad,
    pub loading: &'a dyn Loading,
    /// Selects how the Γ_N traction is paired with φ_z.
    pub mode: ProjectionMode,
    pub variant: TestSpaceVariant,
}

impl EquilibrationProblem<'_> {
    fn test_u(&self, geom: &TriGeom, t: usize, bary: [f64; 3]) -> (Vec2, crate::Mat2) {
        let pv = self.field.at(self.mesh, geom, t, bary);
        let u = match self.variant {
            TestSpaceVariant::Deformed => pv.u,
            TestSpaceVariant::Reference => Vec2::zeros(),
        };
        (u, pv.deformation_gradient())
    }
}

#[derive(Clone, Debug)]
pub struct LocalSystem {
    pub patch: usize,
    pub kind: PatchKind,
    pub constraints: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub mass: DMatrix<f64>,
    /// (triangle, coefficient index 0..16) of every column.
    pub columns: Vec<(usize, usize)>,
    pub num_div_rows: usize,
    pub num_side_rows: usize,
    pub num_sym_rows: usize,
    /// Row-wise integrals of the magnitudes of the data entering `rhs`
    /// (|f̂|, |P̂|, |P̂ F_hᵀ|, one-sided tractions, |g|); a cancellation-free
    /// size of the right-hand side.
    pub rhs_scale: DVector<f64>,
}

/// Defects below this fraction of the data size count as round-off.
pub const RHS_NOISE_FLOOR: f64 = 1e-12;

/// Lagrange P2 basis on [0, 1] with nodes 0, ½, 1.
fn p2_line(s: f64) -> [f64; 3] {
    [2.0 * (s - 0.5) * (s - 1.0), 4.0 * s * (1.0 - s), 2.0 * s * (s - 0.5)]
}

impl LocalSystem {
    pub fn assemble(pb: &EquilibrationProblem, patch_index: usize) -> LocalSystem {
        let mesh = pb.mesh;
        let patch = pb.patches.patch(patch_index);
        let z = patch.center;
        let ne = patch.elements.len();

        let mut columns = Vec::new();
        let mut local_cols: Vec<[Option<usize>; 16]> = Vec::with_capacity(ne);
        let mut element_slot = HashMap::new();
        for (le, &t) in patch.elements.iter().enumerate() {
            element_slot.insert(t, le);
            let closed = mesh.triangle_edges(t).map(|e| patch.closed_sides.binary_search(&e).is_ok());
            let mut lc = [None; 16];
            for r in 0..2 {
                for i in 0..8 {
                    if i < 6 && closed[i / 2] {
                        continue;
                    }
                    lc[8 * r + i] = Some(columns.len());
                    columns.push((t, 8 * r + i));
                }
            }
            local_cols.push(lc);
        }

        let num_div_rows = ELEMENT_TESTS * ne;
        let num_side_rows = SIDE_TESTS * patch.sides.len();
        let num_sym_rows = patch.nodes.len();
        let side_off = num_div_rows;
        let sym_off = side_off + num_side_rows;
        let nrows = sym_off + num_sym_rows;
        let ncols = columns.len();
        let mut c = DMatrix::zeros(nrows, ncols);
        let mut b = DVector::zeros(nrows);
        let mut bs = DVector::zeros(nrows);
        let mut m = DMatrix::zeros(ncols, ncols);

        for (le, &t) in patch.elements.iter().enumerate() {
            let el = pb.rt.element(t);
            let geom = &el.geom;
            let lc = &local_cols[le];
            let mt = el.mass();
            for r in 0..2 {
                for i in 0..8 {
                    for j in 0..8 {
                        if let (Some(a), Some(bb)) = (lc[8 * r + i], lc[8 * r + j]) {
                            m[(a, bb)] = mt[(i, j)];
                        }
                    }
                }
            }

            let tests_space = ElementTestSpace::new(mesh, pb.field, t, pb.variant);
            let phi_nodal = pb.patches.hat_values(mesh, z, t);
            let div_phat = pb.stress.div(geom, t);
            let div_mag: f64 = (0..3).map(|a| pb.stress.nodal[t][a].norm() * geom.grad[a].norm()).sum();
            let sym_rows = mesh.triangle(t).map(|v| sym_off + patch.nodes.binary_search(&v).expect("vertex of patch"));
            for (bary, x, w) in geom.quadrature(NONLINEAR_ORDER) {
                let (u, f) = pb.test_u(geom, t, bary);
                let tests = tests_space.eval(x, u);
                let (val, div) = el.eval(x);
                let phi: f64 = (0..3).map(|a| phi_nodal[a] * bary[a]).sum();
                let fh = pb.load.eval(geom, t, bary);
                let residual = fh + div_phat;
                for (mi, tv) in tests.iter().enumerate() {
                    let row = ELEMENT_TESTS * le + mi;
                    b[row] -= w * phi * residual.dot(tv);
                    bs[row] += w * phi * (fh.norm() + div_mag) * tv.norm();
                    for r in 0..2 {
                        for i in 0..8 {
                            if let Some(col) = lc[8 * r + i] {
                                c[(row, col)] += w * div[i] * tv[r];
                            }
                        }
                    }
                }
                let pft = pb.stress.eval(t, bary) * f.transpose();
                let asym = pft[(0, 1)] - pft[(1, 0)];
                let (f0, f1) = (f.row(0).transpose(), f.row(1).transpose());
                for a in 0..3 {
                    let row = sym_rows[a];
                    let gamma = bary[a];
                    b[row] -= w * phi * gamma * asym;
                    bs[row] += w * phi * gamma * pft.norm();
                    for i in 0..8 {
                        if let Some(col) = lc[i] {
                            c[(row, col)] += w * gamma * val[i].dot(&f1);
                        }
                        if let Some(col) = lc[8 + i] {
                            c[(row, col)] -= w * gamma * val[i].dot(&f0);
                        }
                    }
                }
            }
        }

        for (ls, &e) in patch.sides.iter().enumerate() {
            let edge = mesh.edge(e);
            let sts = SideTestSpace::new(mesh, pb.field, e, pb.variant);
            let gm = TriGeom::new(mesh, edge.minus);
            let gp = edge.plus.map(|p| (p, TriGeom::new(mesh, p)));
            let neumann = edge.boundary.filter(|seg| seg.label == BoundaryLabel::Neumann);
            let a0 = mesh.vertex(edge.vertices[0]);
            let a1 = mesh.vertex(edge.vertices[1]);
            // s_k φ_z at the three P2 nodes of the side
            let nodal: [[Vec2; SIDE_TESTS]; 3] = std::array::from_fn(|a| {
                let x = a0 + (a1 - a0) * (0.5 * a as f64);
                let bm = gm.bary(x);
                let (u, _) = pb.test_u(&gm, edge.minus, bm);
                let phi = pb.patches.hat(mesh, z, edge.minus, bm);
                sts.eval(x, u).map(|v| v * phi)
            });
            let sides: Vec<(usize, f64, usize)> = std::iter::once((edge.minus, 1.0))
                .chain(edge.plus.map(|p| (p, -1.0)))
                .filter_map(|(t, sign)| element_slot.get(&t).map(|&le| (le, sign, mesh.local_edge(t, e).expect("side of t"))))
                .collect();
            for (s, x, w) in edge_quadrature(mesh, e, NONLINEAR_ORDER) {
                let bm = gm.bary(x);
                let (u, _) = pb.test_u(&gm, edge.minus, bm);
                let tests = sts.eval(x, u);
                let phi = pb.patches.hat(mesh, z, edge.minus, bm);
                let mut jump = pb.stress.eval(edge.minus, bm) * edge.normal;
                let mut jump_mag = jump.norm();
                if let Some((p, g)) = &gp {
                    let other = pb.stress.eval(*p, g.bary(x)) * edge.normal;
                    jump -= other;
                    jump_mag += other.norm();
                }
                let psi = edge_moment_basis(s);
                let trace = [psi[0], 3.0 * psi[1]];
                let g = neumann.map(|seg| pb.loading.traction(x, seg));
                let lag = p2_line(s);
                for (k, sv) in tests.iter().enumerate() {
                    let row = side_off + SIDE_TESTS * ls + k;
                    b[row] -= w * phi * jump.dot(sv);
                    bs[row] += w * phi * jump_mag * sv.norm();
                    if let Some(g) = g {
                        let paired = match pb.mode {
                            ProjectionMode::Naive => sv * phi,
                            ProjectionMode::Compatible => (0..3).map(|a| nodal[a][k] * lag[a]).sum(),
                        };
                        b[row] += w * g.dot(&paired);
                        bs[row] += w * g.norm() * paired.norm();
                    }
                    for &(le, sign, kk) in &sides {
                        for r in 0..2 {
                            for j in 0..2 {
                                let col = local_cols[le][8 * r + 2 * kk + j].expect("open side carries normal DOFs");
                                c[(row, col)] += sign * w * trace[j] * sv[r];
                            }
                        }
                    }
                }
            }
        }

        LocalSystem {
            patch: patch_index,
            kind: patch.kind,
            constraints: c,
            rhs: b,
            mass: m,
            columns,
            num_div_rows,
            num_side_rows,
            num_sym_rows,
            rhs_scale: bs,
        }
    }

    pub fn num_rows(&self) -> usize {
        self.constraints.nrows()
    }

    /// ‖b − Π_range b‖ / ‖b‖ (0 when there is no data).
    pub fn relative_defect(&self, sol: &MinNormSolution) -> f64 {
        let bn = self.rhs.norm();
        if bn > 0.0 {
            sol.defect / bn
        } else {
            0.0
        }
    }

    /// Whether a defect is below the round-off level of the data that
    /// entered `rhs` (the data may cancel to far below its own size).
    pub fn is_roundoff(&self, defect: f64) -> bool {
        defect <= RHS_NOISE_FLOOR * self.rhs_scale.norm()
    }

    /// Minimum-norm solution with the right-hand side projected onto the
    /// range of the constraints.
    pub fn solve(&self, rank_tol: f64) -> Result<MinNormSolution> {
        min_norm_solve(&self.constraints, &self.mass, &self.rhs, rank_tol)
    }

    /// Rows for the divergence and jump constraints only.
    pub fn equilibrium_rows(&self) -> DMatrix<f64> {
        self.constraints.rows(0, self.num_div_rows + self.num_side_rows).into_owned()
    }

    pub fn symmetry_rows(&self) -> DMatrix<f64> {
        self.constraints.rows(self.num_div_rows + self.num_side_rows, self.num_sym_rows).into_owned()
    }
}

/// Predicted basis of null(Cᵀ): for each rigid mode ρ the vector made of
/// its element coefficients, its negated side coefficients and θ on the
/// symmetry rows, where J(θ)F_h = ∇ρ. Empty for Dirichlet patches.
pub fn predicted_adjoint_basis(pb: &EquilibrationProblem, sys: &LocalSystem) -> DMatrix<f64> {
    if sys.kind == PatchKind::Dirichlet {
        return DMatrix::zeros(sys.num_rows(), 0);
    }
    let patch = pb.patches.patch(sys.patch);
    let mut y = DMatrix::zeros(sys.num_rows(), 3);
    for (le, &t) in patch.elements.iter().enumerate() {
        let coef = ElementTestSpace::new(pb.mesh, pb.field, t, pb.variant).rigid_coefficients();
        for (mode, c) in coef.iter().enumerate() {
            for (i, v) in c.iter().enumerate() {
                y[(ELEMENT_TESTS * le + i, mode)] = *v;
            }
        }
    }
    for (ls, &e) in patch.sides.iter().enumerate() {
        let coef = SideTestSpace::new(pb.mesh, pb.field, e, pb.variant).rigid_coefficients();
        for (mode, c) in coef.iter().enumerate() {
            for (k, v) in c.iter().enumerate() {
                y[(sys.num_div_rows + SIDE_TESTS * ls + k, mode)] = -*v;
            }
        }
    }
    for n in 0..sys.num_sym_rows {
        y[(sys.num_div_rows + sys.num_side_rows + n, 2)] = 1.0;
    }
    y
}
