//! Neo-Hookean material law, Taylor–Hood residual and tangent assembly, and
//! the Newton solver for the displacement–pressure problem.

pub mod assembly;
pub mod checkpoint;
pub mod material;
pub mod newton;

use crate::femspace::{eval_p2_basis, TaylorHoodSpace, TriGeom};
use crate::mesh::Mesh;
use crate::{Mat2, Vec2};

pub use assembly::{assemble_residual, assemble_system, AssembledSystem};
pub use checkpoint::Checkpoint;
pub use material::{energy_nh, piola_stress, piola_stress_pressure, stress_tangent, Material};
pub use newton::{solve_newton, solve_newton_logged, NewtonLog, NewtonOptions};

/// P2 displacement (one vector per scalar P2 node) and P1 pressure (one
/// value per vertex).
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    pub u: Vec<Vec2>,
    pub p: Vec<f64>,
}

/// Displacement, its gradient and the pressure at one point of an element.
#[derive(Clone, Copy, Debug)]
pub struct PointValues {
    pub x: Vec2,
    pub u: Vec2,
    pub grad_u: Mat2,
    pub p: f64,
}

impl PointValues {
    pub fn deformation_gradient(&self) -> Mat2 {
        Mat2::identity() + self.grad_u
    }
}

impl Field {
    pub fn zeros(mesh: &Mesh) -> Field {
        Field { u: vec![Vec2::zeros(); mesh.num_vertices() + mesh.num_edges()], p: vec![0.0; mesh.num_vertices()] }
    }

    pub fn to_dofs(&self, th: &TaylorHoodSpace) -> Vec<f64> {
        let mut x = vec![0.0; th.num_dofs()];
        for (i, u) in self.u.iter().enumerate() {
            x[2 * i] = u.x;
            x[2 * i + 1] = u.y;
        }
        for (v, p) in self.p.iter().enumerate() {
            x[th.pressure_dof(v)] = *p;
        }
        x
    }

    pub fn from_dofs(th: &TaylorHoodSpace, x: &[f64]) -> Field {
        let u = (0..th.num_p2_nodes()).map(|i| Vec2::new(x[2 * i], x[2 * i + 1])).collect();
        let p = (0..th.num_p1_nodes()).map(|v| x[th.pressure_dof(v)]).collect();
        Field { u, p }
    }

    /// Field with the displacement multiplied by `t` (pressure unchanged).
    pub fn scaled_displacement(&self, t: f64) -> Field {
        Field { u: self.u.iter().map(|u| u * t).collect(), p: self.p.clone() }
    }

    pub fn local(&self, mesh: &Mesh, t: usize) -> ([Vec2; 6], [f64; 3]) {
        let nodes = p2_nodes(mesh, t);
        (nodes.map(|n| self.u[n]), mesh.triangle(t).map(|v| self.p[v]))
    }

    pub fn at(&self, mesh: &Mesh, geom: &TriGeom, t: usize, bary: [f64; 3]) -> PointValues {
        let (u, p) = self.local(mesh, t);
        let (val, grad) = eval_p2_basis(geom, bary);
        let mut disp = Vec2::zeros();
        let mut grad_u = Mat2::zeros();
        for i in 0..6 {
            disp += u[i] * val[i];
            grad_u += u[i] * grad[i].transpose();
        }
        PointValues { x: geom.point(bary), u: disp, grad_u, p: p[0] * bary[0] + p[1] * bary[1] + p[2] * bary[2] }
    }

    /// Sup-norm of all coefficients.
    pub fn sup_norm(&self) -> f64 {
        let u = self.u.iter().map(|v| v.amax()).fold(0.0, f64::max);
        self.p.iter().map(|v| v.abs()).fold(u, f64::max)
    }
}

/// Scalar P2 nodes of triangle `t` (vertices first, then edge midpoints).
pub fn p2_nodes(mesh: &Mesh, t: usize) -> [usize; 6] {
    let v = mesh.triangle(t);
    let e = mesh.triangle_edges(t);
    let nv = mesh.num_vertices();
    [v[0], v[1], v[2], nv + e[0], nv + e[1], nv + e[2]]
}
