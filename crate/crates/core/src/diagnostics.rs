//! Boundary-traction functionals, dual norms on Γ_D and audits of the
//! equilibration conditions.

use nalgebra::DVector;
use rayon::prelude::*;

use crate::equilibration::{ElementTestSpace, SideTestSpace, TestSpaceVariant, ELEMENT_TESTS, SIDE_TESTS};
use crate::error::{Error, Result};
use crate::femspace::rt::BrokenRtStress;
use crate::femspace::{edge_quadrature, eval_p2_basis, skew_j, TriGeom, NONLINEAR_ORDER, POLY_ORDER};
use crate::hyperelastic::{p2_nodes, Field, Material};
use crate::linalg::sparse_solve;
use crate::loading::Loading;
use crate::mesh::{BoundaryLabel, Mesh};
use crate::projection::{rigid_modes, stress_at, ProjectedLoad, ProjectedStress};
use crate::Vec2;

/// A stress field whose normal trace can be read on boundary edges.
pub trait BoundaryStress: Sync {
    /// P·n at parameter `s` of boundary edge `e`, with n the outward normal.
    fn traction(&self, mesh: &Mesh, e: usize, s: f64) -> Vec2;
}

impl BoundaryStress for BrokenRtStress {
    fn traction(&self, mesh: &Mesh, e: usize, s: f64) -> Vec2 {
        self.edge_trace(mesh, e, mesh.edge(e).minus, s)
    }
}

fn edge_point(mesh: &Mesh, e: usize, s: f64) -> Vec2 {
    let edge = mesh.edge(e);
    let a = mesh.vertex(edge.vertices[0]);
    a + (mesh.vertex(edge.vertices[1]) - a) * s
}

impl BoundaryStress for ProjectedStress {
    fn traction(&self, mesh: &Mesh, e: usize, s: f64) -> Vec2 {
        let edge = mesh.edge(e);
        let bary = TriGeom::new(mesh, edge.minus).bary(edge_point(mesh, e, s));
        self.eval(edge.minus, bary) * edge.normal
    }
}

/// The unprojected stress P(u_h, p_h).
pub struct RawStress<'a> {
    pub field: &'a Field,
    pub material: Material,
}

impl BoundaryStress for RawStress<'_> {
    fn traction(&self, mesh: &Mesh, e: usize, s: f64) -> Vec2 {
        let edge = mesh.edge(e);
        let geom = TriGeom::new(mesh, edge.minus);
        let bary = geom.bary(edge_point(mesh, e, s));
        match stress_at(mesh, self.field, &self.material, &geom, edge.minus, bary) {
            Ok(p) => p * edge.normal,
            Err(_) => Vec2::new(f64::NAN, f64::NAN),
        }
    }
}

/// ∫ P·n ds over the boundary edges carrying `label`.
pub fn resultant_traction(mesh: &Mesh, stress: &impl BoundaryStress, label: BoundaryLabel) -> Vec2 {
    let mut r = Vec2::zeros();
    for (e, _) in mesh.edges_with_label(label) {
        for (s, _, w) in edge_quadrature(mesh, e, NONLINEAR_ORDER) {
            r += stress.traction(mesh, e, s) * w;
        }
    }
    r
}

/// I_{D,n} = ∫_{Γ_D} n·(P·n) ds.
pub fn resultant_normal_traction(mesh: &Mesh, stress: &impl BoundaryStress) -> f64 {
    let mut r = 0.0;
    for (e, edge) in mesh.edges_with_label(BoundaryLabel::Dirichlet) {
        for (s, _, w) in edge_quadrature(mesh, e, NONLINEAR_ORDER) {
            r += w * edge.normal.dot(&stress.traction(mesh, e, s));
        }
    }
    r
}

/// n·(P·n) on one Γ_D edge, affine in arc length between the end values.
#[derive(Clone, Debug, PartialEq)]
pub struct ProfileSegment {
    pub edge: usize,
    pub arc_start: f64,
    pub arc_end: f64,
    pub value_start: f64,
    pub value_end: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TractionProfile {
    pub segments: Vec<ProfileSegment>,
}

impl TractionProfile {
    /// Trapezoidal integral, exact for piecewise affine traces.
    pub fn integral(&self) -> f64 {
        self.segments.iter().map(|g| 0.5 * (g.value_start + g.value_end) * (g.arc_end - g.arc_start)).sum()
    }

    /// `arclength,value` rows, two per segment so jumps stay visible.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("arclength,value\n");
        for g in &self.segments {
            s.push_str(&format!("{:e},{:e}\n{:e},{:e}\n", g.arc_start, g.value_start, g.arc_end, g.value_end));
        }
        s
    }
}

/// Γ_D edges in walking order, starting at the chain end with the smallest
/// (y, x), each with the parameter value at which it is entered (0 or 1).
pub fn dirichlet_chain(mesh: &Mesh) -> Vec<(usize, bool)> {
    let edges: Vec<usize> = mesh.edges_with_label(BoundaryLabel::Dirichlet).map(|(e, _)| e).collect();
    let mut degree = std::collections::HashMap::new();
    for &e in &edges {
        for v in mesh.edge(e).vertices {
            *degree.entry(v).or_insert(0) += 1;
        }
    }
    let key = |v: usize| (mesh.vertex(v).y, mesh.vertex(v).x);
    let Some(mut current) =
        degree.iter().filter(|(_, &d)| d == 1).map(|(&v, _)| v).min_by(|&a, &b| key(a).partial_cmp(&key(b)).unwrap())
    else {
        return Vec::new();
    };
    let mut used = vec![false; edges.len()];
    let mut chain = Vec::with_capacity(edges.len());
    while let Some(i) = (0..edges.len()).find(|&i| !used[i] && mesh.edge(edges[i]).vertices.contains(&current)) {
        used[i] = true;
        let v = mesh.edge(edges[i]).vertices;
        let forward = v[0] == current;
        chain.push((edges[i], forward));
        current = if forward { v[1] } else { v[0] };
    }
    chain
}

/// Normal traction profile along Γ_D.
pub fn traction_profile(mesh: &Mesh, stress: &impl BoundaryStress) -> TractionProfile {
    let mut arc = 0.0;
    let mut segments = Vec::new();
    for (e, forward) in dirichlet_chain(mesh) {
        let edge = mesh.edge(e);
        let value = |s: f64| edge.normal.dot(&stress.traction(mesh, e, s));
        let (s0, s1) = if forward { (0.0, 1.0) } else { (1.0, 0.0) };
        segments.push(ProfileSegment {
            edge: e,
            arc_start: arc,
            arc_end: arc + edge.length,
            value_start: value(s0),
            value_end: value(s1),
        });
        arc += edge.length;
    }
    TractionProfile { segments }
}

/// Riesz-lift estimate of ‖s‖_{-1/2, Γ}: solves
/// (∇w, ∇v) + (w, v) = ⟨s, v⟩_Γ over scalar P2 per component and returns
/// √(Σ_c ⟨s_c, w_c⟩). `s(e, param, x)` is evaluated on the edges of Γ
/// carrying `label`.
pub fn hminus_half_norm(mesh: &Mesh, label: BoundaryLabel, mut s: impl FnMut(usize, f64, Vec2) -> Vec2) -> Result<f64> {
    let nv = mesh.num_vertices();
    let n = nv + mesh.num_edges();
    let mut triplets = Vec::with_capacity(36 * mesh.num_triangles());
    for t in 0..mesh.num_triangles() {
        let geom = TriGeom::new(mesh, t);
        let nodes = p2_nodes(mesh, t);
        let mut k = [[0.0; 6]; 6];
        for (bary, _, w) in geom.quadrature(POLY_ORDER) {
            let (val, grad) = eval_p2_basis(&geom, bary);
            for i in 0..6 {
                for j in 0..6 {
                    k[i][j] += w * (grad[i].dot(&grad[j]) + val[i] * val[j]);
                }
            }
        }
        for i in 0..6 {
            for j in 0..6 {
                triplets.push((nodes[i], nodes[j], k[i][j]));
            }
        }
    }
    let mut load = [vec![0.0; n], vec![0.0; n]];
    let mut any = false;
    for (e, edge) in mesh.edges_with_label(label) {
        let nodes = [edge.vertices[0], nv + e, edge.vertices[1]];
        for (param, x, w) in edge_quadrature(mesh, e, NONLINEAR_ORDER) {
            let v = s(e, param, x);
            let lag = [2.0 * (param - 0.5) * (param - 1.0), 4.0 * param * (1.0 - param), 2.0 * param * (param - 0.5)];
            for a in 0..3 {
                load[0][nodes[a]] += w * v.x * lag[a];
                load[1][nodes[a]] += w * v.y * lag[a];
            }
        }
        any = true;
    }
    if !any {
        return Err(Error::InvalidInput(format!("no boundary edges labelled {}", label.as_str())));
    }
    let mut sq = 0.0;
    for l in &load {
        if l.iter().all(|v| *v == 0.0) {
            continue;
        }
        let w = sparse_solve(n, &triplets, l)?;
        sq += DVector::from_column_slice(l).dot(&DVector::from_vec(w));
    }
    Ok(sq.max(0.0).sqrt())
}

/// ‖(P_fine − P_coarse)·n‖_{-1/2, Γ_D} with the coarse trace evaluated on
/// the fine boundary mesh.
pub fn trace_difference_norm(
    fine: &Mesh,
    fine_stress: &impl BoundaryStress,
    coarse: &Mesh,
    coarse_stress: &impl BoundaryStress,
) -> Result<f64> {
    let coarse_edges: Vec<(usize, Vec2, Vec2)> = coarse
        .edges_with_label(BoundaryLabel::Dirichlet)
        .map(|(e, edge)| (e, coarse.vertex(edge.vertices[0]), coarse.vertex(edge.vertices[1])))
        .collect();
    let locate = |x: Vec2| -> Option<(usize, f64)> {
        coarse_edges.iter().find_map(|&(e, a, b)| {
            let d = b - a;
            let s = (x - a).dot(&d) / d.norm_squared();
            let off = (a + d * s - x).norm();
            (off <= 1e-12 * d.norm() && (-1e-12..=1.0 + 1e-12).contains(&s)).then_some((e, s.clamp(0.0, 1.0)))
        })
    };
    let mut missing = false;
    let norm = hminus_half_norm(fine, BoundaryLabel::Dirichlet, |e, s, x| match locate(x) {
        Some((ec, sc)) => fine_stress.traction(fine, e, s) - coarse_stress.traction(coarse, ec, sc),
        None => {
            missing = true;
            Vec2::zeros()
        }
    })?;
    if missing {
        return Err(Error::InvalidInput("fine Γ_D is not contained in the coarse Γ_D".into()));
    }
    Ok(norm)
}

/// One refinement level of a convergence study.
pub struct LevelSolution {
    pub level: usize,
    pub mesh: Mesh,
    pub field: Field,
    pub reconstruction: BrokenRtStress,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub level: usize,
    /// ‖(P_h^R − P_{2h}^R)·n‖_{-1/2, Γ_D}.
    pub equilibrated: f64,
    /// ‖(P(u_h) − P(u_{2h}))·n‖_{-1/2, Γ_D}.
    pub raw: f64,
}

/// Differences between consecutive levels (ascending input).
pub fn convergence_table(levels: &[LevelSolution], material: Material) -> Result<Vec<ConvergenceRow>> {
    levels
        .windows(2)
        .map(|w| {
            let (c, f) = (&w[0], &w[1]);
            let equilibrated = trace_difference_norm(&f.mesh, &f.reconstruction, &c.mesh, &c.reconstruction)?;
            let raw = trace_difference_norm(
                &f.mesh,
                &RawStress { field: &f.field, material },
                &c.mesh,
                &RawStress { field: &c.field, material },
            )?;
            Ok(ConvergenceRow { level: f.level, equilibrated, raw })
        })
        .collect()
}

/// Observed rates log₂(e_{k−1}/e_k) for (equilibrated, raw).
pub fn convergence_rates(rows: &[ConvergenceRow]) -> Vec<(f64, f64)> {
    rows.windows(2)
        .map(|w| ((w[0].equilibrated / w[1].equilibrated).log2(), (w[0].raw / w[1].raw).log2()))
        .collect()
}

/// Largest residuals of the global equilibration conditions.
#[derive(Clone, Debug, PartialEq)]
pub struct EquilibrationAudit {
    /// max |(div P + f̂, z)_T| over elements and element tests.
    pub divergence: f64,
    /// max |⟨[[P n]], s⟩_S| over interior sides and side tests.
    pub jump: f64,
    /// max |⟨P n − g, s⟩_S| over Γ_N sides and side tests.
    pub neumann: f64,
    /// max |(P F_hᵀ, J(γ_v))| over the global P1 basis.
    pub symmetry: f64,
    /// ‖P‖_{L²(Ω)}, for relative comparisons.
    pub scale: f64,
}

impl EquilibrationAudit {
    pub fn max_residual(&self) -> f64 {
        self.divergence.max(self.jump).max(self.neumann).max(self.symmetry)
    }
}

pub fn momentum_and_symmetry_audit(
    mesh: &Mesh,
    field: &Field,
    stress: &BrokenRtStress,
    load: &ProjectedLoad,
    loading: &dyn Loading,
    variant: TestSpaceVariant,
) -> EquilibrationAudit {
    let per_element: Vec<(f64, f64, [f64; 3])> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            let geom = TriGeom::new(mesh, t);
            let tests = ElementTestSpace::new(mesh, field, t, variant);
            let mut moments = [0.0; ELEMENT_TESTS];
            let mut sym = [0.0; 3];
            let mut norm2 = 0.0;
            for (bary, x, w) in geom.quadrature(NONLINEAR_ORDER) {
                let pv = field.at(mesh, &geom, t, bary);
                let u = if variant == TestSpaceVariant::Deformed { pv.u } else { Vec2::zeros() };
                let r = stress.div(t, x) + load.eval(&geom, t, bary);
                for (m, z) in tests.eval(x, u).iter().enumerate() {
                    moments[m] += w * r.dot(z);
                }
                let p = stress.eval(t, x);
                norm2 += w * p.norm_squared();
                let pft = p * pv.deformation_gradient().transpose();
                for a in 0..3 {
                    sym[a] += w * pft.dot(&skew_j(bary[a]));
                }
            }
            (moments.iter().fold(0.0f64, |m, v| m.max(v.abs())), norm2, sym)
        })
        .collect();
    let divergence = per_element.iter().map(|e| e.0).fold(0.0, f64::max);
    let scale = per_element.iter().map(|e| e.1).sum::<f64>().sqrt();
    let mut sym = vec![0.0; mesh.num_vertices()];
    for (t, e) in per_element.iter().enumerate() {
        for (a, v) in mesh.triangle(t).into_iter().enumerate() {
            sym[v] += e.2[a];
        }
    }
    let symmetry = sym.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let per_edge: Vec<(bool, f64)> = (0..mesh.num_edges())
        .into_par_iter()
        .filter_map(|e| {
            let edge = mesh.edge(e);
            let neumann = edge.boundary.filter(|b| b.label == BoundaryLabel::Neumann);
            if edge.plus.is_none() && neumann.is_none() {
                return None;
            }
            let tests = SideTestSpace::new(mesh, field, e, variant);
            let gm = TriGeom::new(mesh, edge.minus);
            let mut moments = [0.0; SIDE_TESTS];
            for (s, x, w) in edge_quadrature(mesh, e, NONLINEAR_ORDER) {
                let u = if variant == TestSpaceVariant::Deformed { field.at(mesh, &gm, edge.minus, gm.bary(x)).u } else { Vec2::zeros() };
                let mut r = stress.edge_trace(mesh, e, edge.minus, s);
                match edge.plus {
                    Some(p) => r -= stress.edge_trace(mesh, e, p, s),
                    None => r -= loading.traction(x, neumann.expect("Neumann side")),
                }
                for (k, v) in tests.eval(x, u).iter().enumerate() {
                    moments[k] += w * r.dot(v);
                }
            }
            Some((edge.plus.is_some(), moments.iter().fold(0.0f64, |m, v| m.max(v.abs()))))
        })
        .collect();
    let jump = per_edge.iter().filter(|e| e.0).map(|e| e.1).fold(0.0, f64::max);
    let neumann = per_edge.iter().filter(|e| !e.0).map(|e| e.1).fold(0.0, f64::max);
    EquilibrationAudit { divergence, jump, neumann, symmetry, scale }
}

/// For each rigid mode ρ ∈ RM(u_h), the difference between ⟨P·n, ρ⟩_{Γ_D}
/// and the variationally consistent reaction
/// (P(u_h, p_h), ∇ρ) − (f, ρ) − ⟨g, ρ⟩_{Γ_N} of the discrete solution.
pub fn rigid_mode_reaction_defect(
    mesh: &Mesh,
    field: &Field,
    material: &Material,
    loading: &dyn Loading,
    stress: &impl BoundaryStress,
) -> Result<[f64; 3]> {
    let mut reaction = [0.0; 3];
    for t in 0..mesh.num_triangles() {
        let geom = TriGeom::new(mesh, t);
        for (bary, x, w) in geom.quadrature(NONLINEAR_ORDER) {
            let pv = field.at(mesh, &geom, t, bary);
            let f = pv.deformation_gradient();
            let p = stress_at(mesh, field, material, &geom, t, bary)?;
            let modes = rigid_modes(x, pv.u);
            let fb = loading.body_force(x);
            // ∇ρ₃ = J(1) F
            reaction[2] += w * p.dot(&(skew_j(1.0) * f));
            for (m, rho) in modes.iter().enumerate() {
                reaction[m] -= w * fb.dot(rho);
            }
        }
    }
    let mut boundary = [0.0; 3];
    for (e, edge) in mesh.boundary_edges() {
        let geom = TriGeom::new(mesh, edge.minus);
        for (s, x, w) in edge_quadrature(mesh, e, NONLINEAR_ORDER) {
            let u = field.at(mesh, &geom, edge.minus, geom.bary(x)).u;
            let modes = rigid_modes(x, u);
            let seg = edge.boundary.expect("boundary edge");
            let v = match seg.label {
                BoundaryLabel::Neumann => -loading.traction(x, seg),
                BoundaryLabel::Dirichlet => -stress.traction(mesh, e, s),
            };
            for (m, rho) in modes.iter().enumerate() {
                boundary[m] += w * v.dot(rho);
            }
        }
    }
    Ok(std::array::from_fn(|m| reaction[m] + boundary[m]))
}

/// Point samples of a broken RT stress (centroids, or vertices and
/// centroids) for plotting.
pub fn sample_stress(mesh: &Mesh, stress: &BrokenRtStress, points_per_element: usize) -> Vec<(usize, Vec2, crate::Mat2)> {
    let pts: Vec<[f64; 3]> = match points_per_element {
        0 | 1 => vec![[1.0 / 3.0; 3]],
        _ => vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0 / 3.0; 3]],
    };
    let mut out = Vec::new();
    for t in 0..mesh.num_triangles() {
        let geom = TriGeom::new(mesh, t);
        for b in &pts {
            let x = geom.point(*b);
            out.push((t, x, stress.eval(t, x)));
        }
    }
    out
}
