//! Continuous P1 and P2 Lagrange elements and the Taylor–Hood DOF layout.

use crate::femspace::TriGeom;
use crate::mesh::{BoundaryLabel, Mesh};
use crate::Vec2;

/// P1 values and gradients (the barycentric coordinates).
pub fn eval_p1_basis(geom: &TriGeom, bary: [f64; 3]) -> ([f64; 3], [Vec2; 3]) {
    (bary, geom.grad)
}

/// P2 values and gradients. Local order: vertices 0–2, then the midpoints of
/// edges (1,2), (2,0), (0,1), i.e. node `3 + k` sits on the edge opposite
/// vertex `k`.
pub fn eval_p2_basis(geom: &TriGeom, bary: [f64; 3]) -> ([f64; 6], [Vec2; 6]) {
    let l = bary;
    let g = geom.grad;
    let mut val = [0.0; 6];
    let mut grad = [Vec2::zeros(); 6];
    for i in 0..3 {
        val[i] = l[i] * (2.0 * l[i] - 1.0);
        grad[i] = g[i] * (4.0 * l[i] - 1.0);
        let (a, b) = ((i + 1) % 3, (i + 2) % 3);
        val[3 + i] = 4.0 * l[a] * l[b];
        grad[3 + i] = (g[a] * l[b] + g[b] * l[a]) * 4.0;
    }
    (val, grad)
}

/// Vector P2 displacement and scalar P1 pressure on a mesh.
///
/// Scalar P2 node numbering: vertices first, then one node per edge in edge
/// order. Displacement DOF of node `i`, component `c` is `2 i + c`; pressure
/// DOF of vertex `v` is `2 n_p2 + v`.
#[derive(Clone, Debug)]
pub struct TaylorHoodSpace {
    num_vertices: usize,
    num_p2: usize,
    dirichlet: Vec<bool>,
}

impl TaylorHoodSpace {
    pub fn new(mesh: &Mesh) -> TaylorHoodSpace {
        let nv = mesh.num_vertices();
        let num_p2 = nv + mesh.num_edges();
        let mut dirichlet = vec![false; num_p2];
        for (e, edge) in mesh.edges_with_label(BoundaryLabel::Dirichlet) {
            dirichlet[edge.vertices[0]] = true;
            dirichlet[edge.vertices[1]] = true;
            dirichlet[nv + e] = true;
        }
        TaylorHoodSpace { num_vertices: nv, num_p2, dirichlet }
    }

    pub fn num_p2_nodes(&self) -> usize {
        self.num_p2
    }

    pub fn num_p1_nodes(&self) -> usize {
        self.num_vertices
    }

    pub fn num_displacement_dofs(&self) -> usize {
        2 * self.num_p2
    }

    pub fn num_dofs(&self) -> usize {
        2 * self.num_p2 + self.num_vertices
    }

    pub fn pressure_dof(&self, v: usize) -> usize {
        2 * self.num_p2 + v
    }

    /// Scalar P2 node lies on Γ_D.
    pub fn is_dirichlet_node(&self, node: usize) -> bool {
        self.dirichlet[node]
    }

    pub fn is_dirichlet_dof(&self, dof: usize) -> bool {
        dof < 2 * self.num_p2 && self.dirichlet[dof / 2]
    }

    /// Scalar P2 nodes of triangle `t` in local order.
    pub fn p2_nodes(&self, mesh: &Mesh, t: usize) -> [usize; 6] {
        let v = mesh.triangle(t);
        let e = mesh.triangle_edges(t);
        [v[0], v[1], v[2], self.num_vertices + e[0], self.num_vertices + e[1], self.num_vertices + e[2]]
    }

    /// Coordinates of scalar P2 node `node`.
    pub fn node_coords(&self, mesh: &Mesh, node: usize) -> Vec2 {
        if node < self.num_vertices {
            mesh.vertex(node)
        } else {
            let edge = mesh.edge(node - self.num_vertices);
            (mesh.vertex(edge.vertices[0]) + mesh.vertex(edge.vertices[1])) * 0.5
        }
    }

    /// Scalar P2 node of the midpoint of edge `e`.
    pub fn edge_node(&self, e: usize) -> usize {
        self.num_vertices + e
    }
}
