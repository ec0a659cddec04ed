//! Element-wise projections of the stress P(u_h, p_h) onto P1 tensors and of
//! the body force onto P2 vectors, either plain L² or constrained so that
//! the patch problems of the equilibration stay solvable.
//!
//! The constrained variant pairs every rigid mode ρ ∈ RM(u_h) and patch
//! function φ_z with the P2 interpolant I_h(ρ φ_z):
//!   (P̂, ρ ⊗ ∇φ_z)_T = (P, ∇I_h(ρ φ_z))_T,   (f̂, ρ φ_z)_T = (f, I_h(ρ φ_z))_T.
//! Summed over a patch these reproduce the Galerkin residual of I_h(ρ φ_z),
//! which vanishes for the discrete solution.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::femspace::{eval_p2_basis, TriGeom, NONLINEAR_ORDER};
use crate::hyperelastic::material::piola_stress_pressure;
use crate::hyperelastic::{p2_nodes, Field, Material};
use crate::linalg::min_norm_solve;
use crate::loading::Loading;
use crate::mesh::{Mesh, PartitionOfUnity};
use crate::{Mat2, Vec2};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProjectionMode {
    /// Component-wise L² projection; Γ_N load paired as ⟨g φ_z, s⟩.
    Naive,
    /// Constrained projection; Γ_N load paired as ⟨g, I_h(s φ_z)⟩.
    Compatible,
}

impl ProjectionMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ProjectionMode::Naive => "naive",
            ProjectionMode::Compatible => "compatible",
        }
    }
}

impl std::str::FromStr for ProjectionMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(ProjectionMode::Naive),
            "compatible" => Ok(ProjectionMode::Compatible),
            other => Err(Error::InvalidInput(format!("unknown projection mode {other:?}"))),
        }
    }
}

const REL_TOL: f64 = 1e-10;
/// Inconsistency, relative to the size of both sides of the constraints,
/// above which they are reported as contradictory.
const CONSISTENCY_TOL: f64 = 1e-8;

/// Piecewise P1 tensor field stored by its vertex values per element.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectedStress {
    pub nodal: Vec<[Mat2; 3]>,
}

impl ProjectedStress {
    pub fn zeros(num_elements: usize) -> ProjectedStress {
        ProjectedStress { nodal: vec![[Mat2::zeros(); 3]; num_elements] }
    }

    pub fn eval(&self, t: usize, bary: [f64; 3]) -> Mat2 {
        let n = &self.nodal[t];
        n[0] * bary[0] + n[1] * bary[1] + n[2] * bary[2]
    }

    /// Row-wise divergence (constant per element).
    pub fn div(&self, geom: &TriGeom, t: usize) -> Vec2 {
        let mut d = Vec2::zeros();
        for i in 0..3 {
            d += self.nodal[t][i] * geom.grad[i];
        }
        d
    }
}

/// Piecewise P2 vector field stored by its local P2 nodal values.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectedLoad {
    pub nodal: Vec<[Vec2; 6]>,
}

impl ProjectedLoad {
    pub fn zeros(num_elements: usize) -> ProjectedLoad {
        ProjectedLoad { nodal: vec![[Vec2::zeros(); 6]; num_elements] }
    }

    pub fn eval(&self, geom: &TriGeom, t: usize, bary: [f64; 3]) -> Vec2 {
        let (val, _) = eval_p2_basis(geom, bary);
        self.nodal[t].iter().zip(val).map(|(f, v)| f * v).sum()
    }
}

/// P(u_h, p_h) at a point of element `t`.
pub fn stress_at(mesh: &Mesh, field: &Field, mat: &Material, geom: &TriGeom, t: usize, bary: [f64; 3]) -> Result<Mat2> {
    let pv = field.at(mesh, geom, t, bary);
    piola_stress_pressure(&pv.deformation_gradient(), pv.p, mat).map_err(|e| match e {
        Error::NonpositiveDet { det, .. } => Error::NonpositiveDet { element: Some(t), det },
        other => other,
    })
}

/// Rigid modes of the deformed configuration: e₁, e₂ and
/// (x₂ + u₂, −(x₁ + u₁)).
pub fn rigid_modes(x: Vec2, u: Vec2) -> [Vec2; 3] {
    [Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0), Vec2::new(x.y + u.y, -(x.x + u.x))]
}

/// Local P1 mass matrix on a triangle.
fn p1_mass(area: f64) -> [[f64; 3]; 3] {
    let mut m = [[area / 12.0; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = area / 6.0;
    }
    m
}

/// Component-wise L² projection of P(u_h, p_h) onto P1(T)^{2×2}.
pub fn naive_project_stress(mesh: &Mesh, field: &Field, mat: &Material, t: usize) -> Result<[Mat2; 3]> {
    let geom = TriGeom::new(mesh, t);
    let (gram, rhs) = stress_normal_equations(mesh, field, mat, &geom, t)?;
    let x = gram.clone().cholesky().ok_or(Error::SingularMass)?.solve(&rhs);
    Ok(unpack_stress(&x))
}

fn stress_index(i: usize, a: usize, b: usize) -> usize {
    4 * i + 2 * a + b
}

fn unpack_stress(x: &DVector<f64>) -> [Mat2; 3] {
    std::array::from_fn(|i| Mat2::new(x[4 * i], x[4 * i + 1], x[4 * i + 2], x[4 * i + 3]))
}

fn stress_normal_equations(
    mesh: &Mesh,
    field: &Field,
    mat: &Material,
    geom: &TriGeom,
    t: usize,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let m = p1_mass(geom.area);
    let mut gram = DMatrix::zeros(12, 12);
    for i in 0..3 {
        for j in 0..3 {
            for c in 0..4 {
                gram[(4 * i + c, 4 * j + c)] = m[i][j];
            }
        }
    }
    let mut rhs = DVector::zeros(12);
    for (bary, _, w) in geom.quadrature(NONLINEAR_ORDER) {
        let p = stress_at(mesh, field, mat, geom, t, bary)?;
        for i in 0..3 {
            for a in 0..2 {
                for b in 0..2 {
                    rhs[stress_index(i, a, b)] += w * bary[i] * p[(a, b)];
                }
            }
        }
    }
    Ok((gram, rhs))
}

/// Values of I_h(ρ φ_z) at the six local P2 nodes of `t`, for the three
/// rigid modes. `phi` holds φ_z at the vertices.
fn interpolated_mode_nodes(mesh: &Mesh, field: &Field, t: usize, phi: [f64; 3]) -> [[Vec2; 6]; 3] {
    let nodes = p2_nodes(mesh, t);
    let geom = TriGeom::new(mesh, t);
    const BARY: [[f64; 3]; 6] =
        [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5], [0.5, 0.5, 0.0]];
    let mut out = [[Vec2::zeros(); 6]; 3];
    for k in 0..6 {
        let x = geom.point(BARY[k]);
        let phi_k = phi[0] * BARY[k][0] + phi[1] * BARY[k][1] + phi[2] * BARY[k][2];
        let modes = rigid_modes(x, field.u[nodes[k]]);
        for (m, rho) in modes.iter().enumerate() {
            out[m][k] = rho * phi_k;
        }
    }
    out
}

/// Constrained least-squares projection of P(u_h, p_h) onto P1(T)^{2×2}.
pub fn compatible_project_stress(
    mesh: &Mesh,
    pu: &PartitionOfUnity,
    field: &Field,
    mat: &Material,
    t: usize,
) -> Result<[Mat2; 3]> {
    let geom = TriGeom::new(mesh, t);
    let (gram, rhs) = stress_normal_equations(mesh, field, mat, &geom, t)?;
    let chol = gram.clone().cholesky().ok_or(Error::SingularMass)?;
    let x0 = chol.solve(&rhs);

    // a single centre means φ_z ≡ 1 on T and the constraints are void
    let centers = pu.centers_on(mesh, t);
    if centers.len() < 2 {
        return Ok(unpack_stress(&x0));
    }
    let nrows = 3 * centers.len();
    let mut a = DMatrix::zeros(nrows, 12);
    let mut r = DVector::zeros(nrows);
    let quad: Vec<([f64; 3], f64, Mat2, Vec2)> = geom
        .quadrature(NONLINEAR_ORDER)
        .map(|(bary, _, w)| {
            let pv = field.at(mesh, &geom, t, bary);
            let p = piola_stress_pressure(&pv.deformation_gradient(), pv.p, mat)?;
            Ok((bary, w, p, pv.u))
        })
        .collect::<Result<_>>()?;

    for (ci, &z) in centers.iter().enumerate() {
        let phi = pu.hat_values(mesh, z, t);
        let grad_phi: Vec2 = (0..3).map(|i| geom.grad[i] * phi[i]).sum();
        let interp = interpolated_mode_nodes(mesh, field, t, phi);
        for (bary, w, p, u) in &quad {
            let x = geom.point(*bary);
            let modes = rigid_modes(x, *u);
            let (_, grad_n) = eval_p2_basis(&geom, *bary);
            for m in 0..3 {
                let row = 3 * ci + m;
                let rho = modes[m];
                for i in 0..3 {
                    for aa in 0..2 {
                        for bb in 0..2 {
                            a[(row, stress_index(i, aa, bb))] += w * bary[i] * rho[aa] * grad_phi[bb];
                        }
                    }
                }
                let mut grad_v = Mat2::zeros();
                for k in 0..6 {
                    grad_v += interp[m][k] * grad_n[k].transpose();
                }
                r[row] += w * p.dot(&grad_v);
            }
        }
    }

    let ax0 = &a * &x0;
    let scale = r.norm() + ax0.norm();
    let sol = min_norm_solve(&a, &gram, &(&r - ax0), REL_TOL)?;
    if sol.defect > CONSISTENCY_TOL * scale {
        return Err(Error::RankDeficientConstraints { element: t, residual: sol.defect / scale });
    }
    Ok(unpack_stress(&(x0 + sol.x)))
}

/// Constrained least-squares projection of f onto P2(T)².
pub fn compatible_project_load(
    mesh: &Mesh,
    pu: &PartitionOfUnity,
    field: &Field,
    loading: &dyn Loading,
    t: usize,
) -> Result<[Vec2; 6]> {
    if loading.body_force_is_zero() {
        return Ok([Vec2::zeros(); 6]);
    }
    let geom = TriGeom::new(mesh, t);
    let (gram, rhs) = load_normal_equations(loading, &geom);
    let x0 = gram.clone().cholesky().ok_or(Error::SingularMass)?.solve(&rhs);

    let centers = pu.centers_on(mesh, t);
    if centers.len() < 2 {
        return Ok(unpack_load(&x0));
    }
    let nrows = 3 * centers.len();
    let mut a = DMatrix::zeros(nrows, 12);
    let mut r = DVector::zeros(nrows);
    for (ci, &z) in centers.iter().enumerate() {
        let phi = pu.hat_values(mesh, z, t);
        let interp = interpolated_mode_nodes(mesh, field, t, phi);
        for (bary, x, w) in geom.quadrature(NONLINEAR_ORDER) {
            let (val, _) = eval_p2_basis(&geom, bary);
            let u = field.at(mesh, &geom, t, bary).u;
            let modes = rigid_modes(x, u);
            let phi_q = phi[0] * bary[0] + phi[1] * bary[1] + phi[2] * bary[2];
            let f = loading.body_force(x);
            for m in 0..3 {
                let row = 3 * ci + m;
                for k in 0..6 {
                    for c in 0..2 {
                        a[(row, 2 * k + c)] += w * val[k] * modes[m][c] * phi_q;
                    }
                }
                let v: Vec2 = (0..6).map(|k| interp[m][k] * val[k]).sum();
                r[row] += w * f.dot(&v);
            }
        }
    }
    let ax0 = &a * &x0;
    let scale = r.norm() + ax0.norm();
    let sol = min_norm_solve(&a, &gram, &(&r - ax0), REL_TOL)?;
    if sol.defect > CONSISTENCY_TOL * scale {
        return Err(Error::RankDeficientConstraints { element: t, residual: sol.defect / scale });
    }
    Ok(unpack_load(&(x0 + sol.x)))
}

/// Component-wise L² projection of f onto P2(T)².
pub fn naive_project_load(mesh: &Mesh, loading: &dyn Loading, t: usize) -> Result<[Vec2; 6]> {
    if loading.body_force_is_zero() {
        return Ok([Vec2::zeros(); 6]);
    }
    let geom = TriGeom::new(mesh, t);
    let (gram, rhs) = load_normal_equations(loading, &geom);
    Ok(unpack_load(&gram.cholesky().ok_or(Error::SingularMass)?.solve(&rhs)))
}

fn load_normal_equations(loading: &dyn Loading, geom: &TriGeom) -> (DMatrix<f64>, DVector<f64>) {
    let mut gram = DMatrix::zeros(12, 12);
    let mut rhs = DVector::zeros(12);
    for (bary, x, w) in geom.quadrature(NONLINEAR_ORDER) {
        let (val, _) = eval_p2_basis(geom, bary);
        let f = loading.body_force(x);
        for i in 0..6 {
            for c in 0..2 {
                rhs[2 * i + c] += w * val[i] * f[c];
                for j in 0..6 {
                    gram[(2 * i + c, 2 * j + c)] += w * val[i] * val[j];
                }
            }
        }
    }
    (gram, rhs)
}

fn unpack_load(x: &DVector<f64>) -> [Vec2; 6] {
    std::array::from_fn(|k| Vec2::new(x[2 * k], x[2 * k + 1]))
}

/// Projects stress and load on every element.
pub fn project(
    mesh: &Mesh,
    pu: &PartitionOfUnity,
    field: &Field,
    mat: &Material,
    loading: &dyn Loading,
    mode: ProjectionMode,
) -> Result<(ProjectedStress, ProjectedLoad)> {
    let per_element: Vec<([Mat2; 3], [Vec2; 6])> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| match mode {
            ProjectionMode::Naive => Ok((naive_project_stress(mesh, field, mat, t)?, naive_project_load(mesh, loading, t)?)),
            ProjectionMode::Compatible => Ok((
                compatible_project_stress(mesh, pu, field, mat, t)?,
                compatible_project_load(mesh, pu, field, loading, t)?,
            )),
        })
        .collect::<Result<_>>()?;
    let (stress, load): (Vec<_>, Vec<_>) = per_element.into_iter().unzip();
    Ok((ProjectedStress { nodal: stress }, ProjectedLoad { nodal: load }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperelastic::{solve_newton, NewtonOptions};
    use crate::loading::CookLoading;
    use crate::mesh::{build_cook_mesh, build_patches};

    fn solved(level: usize, gamma: f64) -> (Mesh, PartitionOfUnity, Field) {
        let mesh = build_cook_mesh(level);
        let pu = build_patches(&mesh).unwrap();
        let opts = NewtonOptions { load_scale: gamma, ..Default::default() };
        let field = solve_newton(&mesh, Material::incompressible(1.0), &CookLoading::new(gamma), &opts).unwrap();
        (mesh, pu, field)
    }

    #[test]
    fn zero_state_projects_to_zero() {
        let mesh = build_cook_mesh(2);
        let pu = build_patches(&mesh).unwrap();
        let field = Field::zeros(&mesh);
        let mat = Material::incompressible(1.0);
        for t in 0..mesh.num_triangles() {
            assert_eq!(compatible_project_stress(&mesh, &pu, &field, &mat, t).unwrap(), [Mat2::zeros(); 3]);
        }
    }

    #[test]
    fn naive_projection_reproduces_constant_stress() {
        // constant pressure, zero displacement: P = p I
        let mesh = build_cook_mesh(1);
        let mut field = Field::zeros(&mesh);
        field.p.iter_mut().for_each(|p| *p = 0.7);
        let p = naive_project_stress(&mesh, &field, &Material::incompressible(1.0), 3).unwrap();
        for m in p {
            assert!((m - Mat2::identity() * 0.7).norm() < 1e-14);
        }
    }

    #[test]
    fn naive_projection_is_orthogonal() {
        let (mesh, _, field) = solved(2, 0.2);
        let mat = Material::incompressible(1.0);
        let t = 11;
        let geom = TriGeom::new(&mesh, t);
        let ph = naive_project_stress(&mesh, &field, &mat, t).unwrap();
        let mut scale: f64 = 0.0;
        let mut defect = [[0.0; 4]; 3];
        for (bary, _, w) in geom.quadrature(NONLINEAR_ORDER) {
            let p = stress_at(&mesh, &field, &mat, &geom, t, bary).unwrap();
            let diff = p - (ph[0] * bary[0] + ph[1] * bary[1] + ph[2] * bary[2]);
            scale += w * p.norm_squared();
            for i in 0..3 {
                for c in 0..4 {
                    defect[i][c] += w * bary[i] * diff[(c / 2, c % 2)];
                }
            }
        }
        let bound = 1e-12 * scale.sqrt();
        assert!(defect.iter().flatten().all(|d| d.abs() <= bound));
    }

    #[test]
    fn linear_deformation_stress_is_reproduced() {
        // homogeneous isochoric stretch with zero pressure: P constant
        let mesh = build_cook_mesh(1);
        let pu = build_patches(&mesh).unwrap();
        let th = crate::femspace::TaylorHoodSpace::new(&mesh);
        let g = Mat2::new(0.25, 0.1, 0.0, -0.2);
        let mut field = Field::zeros(&mesh);
        for (n, u) in field.u.iter_mut().enumerate() {
            *u = g * th.node_coords(&mesh, n);
        }
        let mat = Material::incompressible(1.0);
        let f = Mat2::identity() + g;
        let exact = piola_stress_pressure(&f, 0.0, &mat).unwrap();
        for t in 0..mesh.num_triangles() {
            for m in compatible_project_stress(&mesh, &pu, &field, &mat, t).unwrap() {
                assert!((m - exact).norm() < 1e-12, "{t} {}", (m - exact).norm());
            }
        }
    }

    fn constraint_defects(mesh: &Mesh, pu: &PartitionOfUnity, field: &Field, mat: &Material, t: usize, ph: &[Mat2; 3]) -> (f64, f64) {
        let geom = TriGeom::new(mesh, t);
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for z in pu.centers_on(mesh, t) {
            let phi = pu.hat_values(mesh, z, t);
            let grad_phi: Vec2 = (0..3).map(|i| geom.grad[i] * phi[i]).sum();
            let interp = interpolated_mode_nodes(mesh, field, t, phi);
            for m in 0..3 {
                let (mut lhs, mut rhs) = (0.0, 0.0);
                for (bary, x, w) in geom.quadrature(NONLINEAR_ORDER) {
                    let pv = field.at(mesh, &geom, t, bary);
                    let rho = rigid_modes(x, pv.u)[m];
                    let p = piola_stress_pressure(&pv.deformation_gradient(), pv.p, mat).unwrap();
                    let phat = ph[0] * bary[0] + ph[1] * bary[1] + ph[2] * bary[2];
                    lhs += w * phat.dot(&(rho * grad_phi.transpose()));
                    let (_, gn) = eval_p2_basis(&geom, bary);
                    let gv: Mat2 = (0..6).map(|k| interp[m][k] * gn[k].transpose()).sum();
                    rhs += w * p.dot(&gv);
                    scale = scale.max(w * p.norm() * gv.norm());
                }
                worst = worst.max((lhs - rhs).abs());
            }
        }
        (worst, scale)
    }

    #[test]
    fn compatible_projection_satisfies_constraints() {
        let (mesh, pu, field) = solved(2, 0.2);
        let mat = Material::incompressible(1.0);
        let mut naive_violation: f64 = 0.0;
        for t in 0..mesh.num_triangles() {
            let ph = compatible_project_stress(&mesh, &pu, &field, &mat, t).unwrap();
            let (d, s) = constraint_defects(&mesh, &pu, &field, &mat, t, &ph);
            assert!(d <= 1e-11 * s.max(1e-300) * 10.0 + 1e-16, "t={t}: {d} vs {s}");
            let pn = naive_project_stress(&mesh, &field, &mat, t).unwrap();
            naive_violation = naive_violation.max(constraint_defects(&mesh, &pu, &field, &mat, t, &pn).0);
        }
        assert!(naive_violation > 1e-8);
    }

    #[test]
    fn compatible_projection_is_best_feasible_approximation() {
        // first-order optimality: the correction from the L² projection is
        // Gram-orthogonal to the null space of the constraints
        let (mesh, pu, field) = solved(2, 0.2);
        let mat = Material::incompressible(1.0);
        let t = 20;
        let geom = TriGeom::new(&mesh, t);
        let pc = compatible_project_stress(&mesh, &pu, &field, &mat, t).unwrap();
        let (gram, rhs) = stress_normal_equations(&mesh, &field, &mat, &geom, t).unwrap();
        let x: DVector<f64> = DVector::from_iterator(12, pc.iter().flat_map(|m| [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]]));
        let grad = &gram * &x - &rhs;
        // constraint rows
        let centers = pu.centers_on(&mesh, t);
        let mut a = DMatrix::zeros(3 * centers.len(), 12);
        for (ci, &z) in centers.iter().enumerate() {
            let phi = pu.hat_values(&mesh, z, t);
            let gp: Vec2 = (0..3).map(|i| geom.grad[i] * phi[i]).sum();
            for (bary, xq, w) in geom.quadrature(NONLINEAR_ORDER) {
                let u = field.at(&mesh, &geom, t, bary).u;
                let modes = rigid_modes(xq, u);
                for m in 0..3 {
                    for i in 0..3 {
                        for aa in 0..2 {
                            for bb in 0..2 {
                                a[(3 * ci + m, stress_index(i, aa, bb))] += w * bary[i] * modes[m][aa] * gp[bb];
                            }
                        }
                    }
                }
            }
        }
        let null = crate::linalg::null_space(&a, 1e-10);
        let proj = null.transpose() * grad;
        assert!(proj.amax() <= 1e-10 * rhs.amax().max(1.0));
    }

    #[test]
    fn constant_load_is_reproduced_at_reference() {
        struct Constant;
        impl Loading for Constant {
            fn body_force(&self, _x: Vec2) -> Vec2 {
                Vec2::new(0.3, -1.1)
            }
            fn traction(&self, _x: Vec2, _s: crate::mesh::BoundarySegment) -> Vec2 {
                Vec2::zeros()
            }
        }
        let mesh = build_cook_mesh(1);
        let pu = build_patches(&mesh).unwrap();
        let field = Field::zeros(&mesh);
        for t in 0..mesh.num_triangles() {
            let f = compatible_project_load(&mesh, &pu, &field, &Constant, t).unwrap();
            for v in f {
                assert!((v - Vec2::new(0.3, -1.1)).norm() < 1e-12);
            }
        }
        let f = compatible_project_load(&mesh, &pu, &field, &CookLoading::new(1.0), 0).unwrap();
        assert_eq!(f, [Vec2::zeros(); 6]);
    }

    #[test]
    fn three_center_triangle_has_rank_six() {
        let (mesh, pu, field) = solved(2, 0.2);
        let t = (0..mesh.num_triangles()).find(|&t| pu.centers_on(&mesh, t).len() == 3).unwrap();
        let geom = TriGeom::new(&mesh, t);
        let mut a = DMatrix::zeros(9, 12);
        for (ci, z) in pu.centers_on(&mesh, t).into_iter().enumerate() {
            let phi = pu.hat_values(&mesh, z, t);
            let gp: Vec2 = (0..3).map(|i| geom.grad[i] * phi[i]).sum();
            for (bary, xq, w) in geom.quadrature(NONLINEAR_ORDER) {
                let u = field.at(&mesh, &geom, t, bary).u;
                let modes = rigid_modes(xq, u);
                for m in 0..3 {
                    for i in 0..3 {
                        for aa in 0..2 {
                            for bb in 0..2 {
                                a[(3 * ci + m, stress_index(i, aa, bb))] += w * bary[i] * modes[m][aa] * gp[bb];
                            }
                        }
                    }
                }
            }
        }
        assert_eq!(crate::linalg::left_svd(&a.transpose(), 1e-10).rank, 6);
    }
}
