//! Residual and Jacobian of
//!   (P(u, p), ∇v) − (f, v) − ⟨g, v⟩_{Γ_N} = 0,
//!   (det F − 1, q) − (1/λ)(p, q) = 0.

use rayon::prelude::*;

use super::material::{stress_unchecked, tangent_unchecked};
use super::{p2_nodes, Field, Material};
use crate::error::{Error, Result};
use crate::femspace::{edge_quadrature, eval_p2_basis, TaylorHoodSpace, TriGeom, NONLINEAR_ORDER};
use crate::loading::Loading;
use crate::mesh::{BoundaryLabel, Mesh};
use crate::{Mat2, Vec2};

const NLOC: usize = 15;

fn local_dofs(mesh: &Mesh, th: &TaylorHoodSpace, t: usize) -> [usize; NLOC] {
    let nodes = p2_nodes(mesh, t);
    let verts = mesh.triangle(t);
    let mut d = [0; NLOC];
    for i in 0..6 {
        d[2 * i] = 2 * nodes[i];
        d[2 * i + 1] = 2 * nodes[i] + 1;
    }
    for k in 0..3 {
        d[12 + k] = th.pressure_dof(verts[k]);
    }
    d
}

struct ElementContribution {
    dofs: [usize; NLOC],
    residual: [f64; NLOC],
    matrix: Option<Box<[[f64; NLOC]; NLOC]>>,
}

fn element_contribution(
    mesh: &Mesh,
    th: &TaylorHoodSpace,
    field: &Field,
    mat: &Material,
    loading: &dyn Loading,
    t: usize,
    with_matrix: bool,
) -> Result<ElementContribution> {
    let geom = TriGeom::new(mesh, t);
    let (u, p) = field.local(mesh, t);
    let il = mat.inv_lambda();
    let mut res = [0.0; NLOC];
    let mut k = if with_matrix { Some(Box::new([[0.0; NLOC]; NLOC])) } else { None };
    let skip_f = loading.body_force_is_zero();

    for (bary, x, w) in geom.quadrature(NONLINEAR_ORDER) {
        let (val, grad) = eval_p2_basis(&geom, bary);
        let mut f = Mat2::identity();
        for i in 0..6 {
            f += u[i] * grad[i].transpose();
        }
        let det = f.determinant();
        if det <= 0.0 {
            return Err(Error::NonpositiveDet { element: Some(t), det });
        }
        let fit = Mat2::new(f[(1, 1)], -f[(1, 0)], -f[(0, 1)], f[(0, 0)]) / det;
        let ph = p[0] * bary[0] + p[1] * bary[1] + p[2] * bary[2];
        let stress = stress_unchecked(&f, det, ph, mat);
        let body = if skip_f { Vec2::zeros() } else { loading.body_force(x) };

        for i in 0..6 {
            let sg = stress * grad[i];
            res[2 * i] += w * (sg.x - body.x * val[i]);
            res[2 * i + 1] += w * (sg.y - body.y * val[i]);
        }
        for kk in 0..3 {
            res[12 + kk] += w * ((det - 1.0) - il * ph) * bary[kk];
        }

        if let Some(k) = k.as_deref_mut() {
            for j in 0..6 {
                for c in 0..2 {
                    let mut dh = Mat2::zeros();
                    dh[(c, 0)] = grad[j].x;
                    dh[(c, 1)] = grad[j].y;
                    let dp = tangent_unchecked(&fit, ph, &dh, 0.0, mat);
                    let col = 2 * j + c;
                    for i in 0..6 {
                        let v = dp * grad[i];
                        k[2 * i][col] += w * v.x;
                        k[2 * i + 1][col] += w * v.y;
                    }
                    let ddet = det * fit.row(c).transpose().dot(&grad[j]);
                    for kk in 0..3 {
                        k[12 + kk][col] += w * ddet * bary[kk];
                    }
                }
            }
            for m in 0..3 {
                let dp = fit * ((1.0 + ph * il) * bary[m]);
                for i in 0..6 {
                    let v = dp * grad[i];
                    k[2 * i][12 + m] += w * v.x;
                    k[2 * i + 1][12 + m] += w * v.y;
                }
                for kk in 0..3 {
                    k[12 + kk][12 + m] -= w * il * bary[kk] * bary[m];
                }
            }
        }
    }
    Ok(ElementContribution { dofs: local_dofs(mesh, th, t), residual: res, matrix: k })
}

/// Residual vector with Dirichlet entries zeroed, plus the Jacobian as
/// triplets with Dirichlet rows and columns replaced by the identity.
#[derive(Clone, Debug)]
pub struct AssembledSystem {
    pub residual: Vec<f64>,
    pub triplets: Vec<(usize, usize, f64)>,
}

fn assemble(
    mesh: &Mesh,
    th: &TaylorHoodSpace,
    field: &Field,
    mat: &Material,
    loading: &dyn Loading,
    with_matrix: bool,
) -> Result<AssembledSystem> {
    let contributions: Vec<ElementContribution> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| element_contribution(mesh, th, field, mat, loading, t, with_matrix))
        .collect::<Result<_>>()?;

    let n = th.num_dofs();
    let mut residual = vec![0.0; n];
    let mut triplets = Vec::with_capacity(if with_matrix { contributions.len() * NLOC * NLOC } else { 0 });
    for c in &contributions {
        for (a, &ra) in c.dofs.iter().enumerate() {
            residual[ra] += c.residual[a];
        }
        if let Some(k) = &c.matrix {
            for (a, &ra) in c.dofs.iter().enumerate() {
                if th.is_dirichlet_dof(ra) {
                    continue;
                }
                for (b, &cb) in c.dofs.iter().enumerate() {
                    if !th.is_dirichlet_dof(cb) && k[a][b] != 0.0 {
                        triplets.push((ra, cb, k[a][b]));
                    }
                }
            }
        }
    }

    for (e, edge) in mesh.edges_with_label(BoundaryLabel::Neumann) {
        let seg = edge.boundary.expect("boundary edge carries a segment");
        let t = edge.minus;
        let geom = TriGeom::new(mesh, t);
        let nodes = p2_nodes(mesh, t);
        for (_, x, w) in edge_quadrature(mesh, e, NONLINEAR_ORDER) {
            let g = loading.traction(x, seg);
            if g == Vec2::zeros() {
                continue;
            }
            let (val, _) = eval_p2_basis(&geom, geom.bary(x));
            for i in 0..6 {
                residual[2 * nodes[i]] -= w * g.x * val[i];
                residual[2 * nodes[i] + 1] -= w * g.y * val[i];
            }
        }
    }

    for (d, r) in residual.iter_mut().enumerate() {
        if th.is_dirichlet_dof(d) {
            *r = 0.0;
            if with_matrix {
                triplets.push((d, d, 1.0));
            }
        }
    }
    Ok(AssembledSystem { residual, triplets })
}

pub fn assemble_system(
    mesh: &Mesh,
    th: &TaylorHoodSpace,
    field: &Field,
    mat: &Material,
    loading: &dyn Loading,
) -> Result<AssembledSystem> {
    assemble(mesh, th, field, mat, loading, true)
}

pub fn assemble_residual(
    mesh: &Mesh,
    th: &TaylorHoodSpace,
    field: &Field,
    mat: &Material,
    loading: &dyn Loading,
) -> Result<Vec<f64>> {
    Ok(assemble(mesh, th, field, mat, loading, false)?.residual)
}

/// Smallest det F over all quadrature points.
pub fn min_det(mesh: &Mesh, field: &Field) -> f64 {
    (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            let geom = TriGeom::new(mesh, t);
            geom.quadrature(NONLINEAR_ORDER)
                .map(|(b, _, _)| field.at(mesh, &geom, t, b).deformation_gradient().determinant())
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loading::CookLoading;
    use crate::mesh::build_cook_mesh;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense(n: usize, trip: &[(usize, usize, f64)]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(n, n);
        for &(r, c, v) in trip {
            m[(r, c)] += v;
        }
        m
    }

    /// Smooth admissible state: u = amp · x₁ · (random trigonometric field),
    /// random pressure.
    fn random_state(mesh: &Mesh, th: &TaylorHoodSpace, seed: u64, amp: f64) -> Field {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut f = Field::zeros(mesh);
        for (n, u) in f.u.iter_mut().enumerate() {
            let x = th.node_coords(mesh, n);
            let s = (3.0 * x.y + c[4]).sin();
            *u = Vec2::new(c[0] + c[1] * s, c[2] + c[3] * (2.0 * x.x + c[5]).cos()) * (amp * x.x);
        }
        for p in f.p.iter_mut() {
            *p = rng.random_range(-0.5..0.5);
        }
        f
    }

    #[test]
    fn reference_state_is_unloaded_solution() {
        let mesh = build_cook_mesh(1);
        let th = TaylorHoodSpace::new(&mesh);
        let r = assemble_residual(&mesh, &th, &Field::zeros(&mesh), &Material::incompressible(1.0), &CookLoading::new(0.0))
            .unwrap();
        assert!(r.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn tangent_matches_finite_differences() {
        let mesh = build_cook_mesh(1);
        let th = TaylorHoodSpace::new(&mesh);
        let load = CookLoading::new(0.3);
        for mat in [Material::incompressible(1.0), Material::compressible(1.0, 10.0)] {
            let state = random_state(&mesh, &th, 7, 0.02);
            let sys = assemble_system(&mesh, &th, &state, &mat, &load).unwrap();
            let k = dense(th.num_dofs(), &sys.triplets);
            let x0 = state.to_dofs(&th);
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            for _ in 0..20 {
                let mut dir: Vec<f64> = (0..th.num_dofs()).map(|_| rng.random_range(-1.0..1.0)).collect();
                for (d, v) in dir.iter_mut().enumerate() {
                    if th.is_dirichlet_dof(d) {
                        *v = 0.0;
                    }
                }
                let h = 1e-6;
                let shifted = |s: f64| {
                    let x: Vec<f64> = x0.iter().zip(&dir).map(|(a, b)| a + s * b).collect();
                    assemble_residual(&mesh, &th, &Field::from_dofs(&th, &x), &mat, &load).unwrap()
                };
                let rp = shifted(h);
                let rm = shifted(-h);
                let kd = &k * nalgebra::DVector::from_vec(dir.clone());
                let mut err: f64 = 0.0;
                let mut scale: f64 = 0.0;
                for d in 0..th.num_dofs() {
                    if th.is_dirichlet_dof(d) {
                        continue;
                    }
                    let fd = (rp[d] - rm[d]) / (2.0 * h);
                    err = err.max((fd - kd[d]).abs());
                    scale = scale.max(kd[d].abs());
                }
                assert!(err <= 1e-6 * scale, "err {err} scale {scale}");
            }
        }
    }

    #[test]
    fn displacement_block_is_symmetric() {
        let mesh = build_cook_mesh(1);
        let th = TaylorHoodSpace::new(&mesh);
        let state = random_state(&mesh, &th, 3, 0.05);
        let sys = assemble_system(&mesh, &th, &state, &Material::incompressible(1.0), &CookLoading::new(0.1)).unwrap();
        let k = dense(th.num_dofs(), &sys.triplets);
        let nu = th.num_displacement_dofs();
        let kuu = k.view((0, 0), (nu, nu));
        let asym = (kuu - kuu.transpose()).amax();
        assert!(asym <= 1e-10 * kuu.amax(), "{asym}");
    }

    #[test]
    fn reference_tangent_is_stokes_operator() {
        // independent small-strain assembly: 2μ(ε(u), ε(v)) + (p, div v) + (div u, q) − (1/λ)(p, q)
        let mesh = build_cook_mesh(1);
        let th = TaylorHoodSpace::new(&mesh);
        let mat = Material::compressible(1.5, 8.0);
        let sys = assemble_system(&mesh, &th, &Field::zeros(&mesh), &mat, &CookLoading::new(0.0)).unwrap();
        let k = dense(th.num_dofs(), &sys.triplets);
        let n = th.num_dofs();
        let mut s = DMatrix::zeros(n, n);
        for t in 0..mesh.num_triangles() {
            let geom = TriGeom::new(&mesh, t);
            let dofs = local_dofs(&mesh, &th, t);
            for (b, _, w) in geom.quadrature(4) {
                let (_, grad) = eval_p2_basis(&geom, b);
                let grads: Vec<Mat2> = (0..12)
                    .map(|a| {
                        let mut g = Mat2::zeros();
                        g[(a % 2, 0)] = grad[a / 2].x;
                        g[(a % 2, 1)] = grad[a / 2].y;
                        g
                    })
                    .collect();
                for a in 0..12 {
                    let ea = (grads[a] + grads[a].transpose()) * 0.5;
                    for c in 0..12 {
                        let ec = (grads[c] + grads[c].transpose()) * 0.5;
                        s[(dofs[a], dofs[c])] += w * 2.0 * mat.mu * ea.dot(&ec);
                    }
                    for m in 0..3 {
                        s[(dofs[a], dofs[12 + m])] += w * b[m] * grads[a].trace();
                        s[(dofs[12 + m], dofs[a])] += w * b[m] * grads[a].trace();
                    }
                }
                for m in 0..3 {
                    for l in 0..3 {
                        s[(dofs[12 + m], dofs[12 + l])] -= w * b[m] * b[l] / 8.0;
                    }
                }
            }
        }
        for d in 0..n {
            for e in 0..n {
                if th.is_dirichlet_dof(d) || th.is_dirichlet_dof(e) {
                    s[(d, e)] = if d == e { 1.0 } else { 0.0 };
                }
            }
        }
        assert!((k - s).amax() < 1e-12);
    }
}
