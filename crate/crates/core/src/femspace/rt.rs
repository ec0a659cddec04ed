//! Raviart–Thomas elements of degree 1 per stress row, without
//! inter-element continuity.
//!
//! Each element uses a Ciarlet construction in scaled physical coordinates
//! ξ = (x − c)/h with primal basis
//! (1,0), (0,1), (ξ₁,0), (ξ₂,0), (0,ξ₁), (0,ξ₂), ξ₁ξ, ξ₂ξ.
//! Degrees of freedom, local index `2k + j` for local edge `k`:
//! (1/|S|) ∫_S q·n_S ψ_j(s) ds with ψ₀ = 1, ψ₁ = 2s − 1, where n_S is the
//! global edge normal and s runs from the lower to the higher vertex index.
//! DOFs 6 and 7 are the cell means of q₁ and q₂.

use std::sync::Arc;

use nalgebra::SMatrix;
use rayon::prelude::*;

use crate::femspace::{line_rule, TriGeom, NONLINEAR_ORDER, POLY_ORDER};
use crate::mesh::Mesh;
use crate::{Mat2, Vec2};

pub type Mat8 = SMatrix<f64, 8, 8>;

/// Edge moment basis on [0, 1].
pub fn edge_moment_basis(s: f64) -> [f64; 2] {
    [1.0, 2.0 * s - 1.0]
}

/// Normal trace at parameter `s` from the two edge moments.
pub fn trace_from_moments(m: [f64; 2], s: f64) -> f64 {
    m[0] + 3.0 * m[1] * (2.0 * s - 1.0)
}

#[derive(Clone, Debug)]
pub struct RtEdge {
    pub start: Vec2,
    pub end: Vec2,
    pub normal: Vec2,
    /// +1 if `normal` is the outward normal of this element, −1 otherwise.
    pub orientation: f64,
    pub global: usize,
}

#[derive(Clone, Debug)]
pub struct RtElement {
    pub geom: TriGeom,
    pub edges: [RtEdge; 3],
    center: Vec2,
    h: f64,
    /// Column j holds the primal coefficients of basis function j.
    coeffs: Mat8,
}

fn primal(xi: Vec2) -> [Vec2; 8] {
    let (a, b) = (xi.x, xi.y);
    [
        Vec2::new(1.0, 0.0),
        Vec2::new(0.0, 1.0),
        Vec2::new(a, 0.0),
        Vec2::new(b, 0.0),
        Vec2::new(0.0, a),
        Vec2::new(0.0, b),
        Vec2::new(a * a, a * b),
        Vec2::new(a * b, b * b),
    ]
}

fn primal_div(xi: Vec2, h: f64) -> [f64; 8] {
    [0.0, 0.0, 1.0 / h, 0.0, 0.0, 1.0 / h, 3.0 * xi.x / h, 3.0 * xi.y / h]
}

impl RtElement {
    pub fn new(mesh: &Mesh, t: usize) -> RtElement {
        let geom = TriGeom::new(mesh, t);
        let edges = mesh.triangle_edges(t).map(|e| {
            let edge = mesh.edge(e);
            RtEdge {
                start: mesh.vertex(edge.vertices[0]),
                end: mesh.vertex(edge.vertices[1]),
                normal: edge.normal,
                orientation: if edge.minus == t { 1.0 } else { -1.0 },
                global: e,
            }
        });
        let center = geom.centroid();
        let h = geom.diameter();
        let mut el = RtElement { geom, edges, center, h, coeffs: Mat8::identity() };
        let mut v = Mat8::zeros();
        for m in 0..8 {
            let dofs = el.dofs(|x| primal((x - center) / h)[m]);
            for d in 0..8 {
                v[(d, m)] = dofs[d];
            }
        }
        el.coeffs = v.try_inverse().expect("RT degree-of-freedom matrix is invertible");
        el
    }

    /// Applies the 8 degree-of-freedom functionals to a vector field.
    pub fn dofs(&self, f: impl Fn(Vec2) -> Vec2) -> [f64; 8] {
        let mut d = [0.0; 8];
        for (k, edge) in self.edges.iter().enumerate() {
            for (s, w) in line_rule(NONLINEAR_ORDER).iter() {
                let x = edge.start + (edge.end - edge.start) * s;
                let qn = f(x).dot(&edge.normal);
                let psi = edge_moment_basis(s);
                d[2 * k] += w * qn;
                d[2 * k + 1] += w * qn * psi[1];
            }
        }
        for (_, x, w) in self.geom.quadrature(NONLINEAR_ORDER) {
            let q = f(x);
            d[6] += w * q.x;
            d[7] += w * q.y;
        }
        d[6] /= self.geom.area;
        d[7] /= self.geom.area;
        d
    }

    /// Values and divergences of the 8 basis functions at `x`.
    pub fn eval(&self, x: Vec2) -> ([Vec2; 8], [f64; 8]) {
        let xi = (x - self.center) / self.h;
        let p = primal(xi);
        let dp = primal_div(xi, self.h);
        let mut val = [Vec2::zeros(); 8];
        let mut div = [0.0; 8];
        for j in 0..8 {
            for m in 0..8 {
                let c = self.coeffs[(m, j)];
                val[j] += p[m] * c;
                div[j] += dp[m] * c;
            }
        }
        (val, div)
    }

    /// L² mass matrix of the 8 basis functions.
    pub fn mass(&self) -> Mat8 {
        let mut m = Mat8::zeros();
        for (_, x, w) in self.geom.quadrature(POLY_ORDER) {
            let (val, _) = self.eval(x);
            for i in 0..8 {
                for j in i..8 {
                    m[(i, j)] += w * val[i].dot(&val[j]);
                }
            }
        }
        for i in 0..8 {
            for j in 0..i {
                m[(i, j)] = m[(j, i)];
            }
        }
        m
    }
}

/// Element tables for the broken RT space on a mesh.
#[derive(Clone, Debug)]
pub struct RtSpace {
    elements: Vec<RtElement>,
}

impl RtSpace {
    pub fn new(mesh: &Mesh) -> RtSpace {
        let elements = (0..mesh.num_triangles()).into_par_iter().map(|t| RtElement::new(mesh, t)).collect();
        RtSpace { elements }
    }

    pub fn element(&self, t: usize) -> &RtElement {
        &self.elements[t]
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }
}

/// Tensor field whose rows are element-wise RT1; 16 coefficients per
/// triangle with row `r`, local DOF `i` at index `8 r + i`.
#[derive(Clone, Debug)]
pub struct BrokenRtStress {
    space: Arc<RtSpace>,
    pub coeffs: Vec<[f64; 16]>,
}

impl BrokenRtStress {
    pub fn zeros(space: Arc<RtSpace>) -> BrokenRtStress {
        let n = space.num_elements();
        BrokenRtStress { space, coeffs: vec![[0.0; 16]; n] }
    }

    /// Interpolates `f(t, x)` element by element through the DOFs.
    pub fn interpolate(space: Arc<RtSpace>, f: impl Fn(usize, Vec2) -> Mat2 + Sync) -> BrokenRtStress {
        let coeffs = (0..space.num_elements())
            .into_par_iter()
            .map(|t| {
                let el = space.element(t);
                let mut c = [0.0; 16];
                for r in 0..2 {
                    let d = el.dofs(|x| f(t, x).row(r).transpose());
                    c[8 * r..8 * r + 8].copy_from_slice(&d);
                }
                c
            })
            .collect();
        BrokenRtStress { space, coeffs }
    }

    pub fn space(&self) -> &Arc<RtSpace> {
        &self.space
    }

    pub fn eval(&self, t: usize, x: Vec2) -> Mat2 {
        let (val, _) = self.space.element(t).eval(x);
        let c = &self.coeffs[t];
        let mut p = Mat2::zeros();
        for r in 0..2 {
            for i in 0..8 {
                p[(r, 0)] += c[8 * r + i] * val[i].x;
                p[(r, 1)] += c[8 * r + i] * val[i].y;
            }
        }
        p
    }

    /// Row-wise divergence.
    pub fn div(&self, t: usize, x: Vec2) -> Vec2 {
        let (_, div) = self.space.element(t).eval(x);
        let c = &self.coeffs[t];
        Vec2::new((0..8).map(|i| c[i] * div[i]).sum(), (0..8).map(|i| c[8 + i] * div[i]).sum())
    }

    /// Edge moments of P·n_S (global normal) on local edge `k` of `t`:
    /// `[row][j]`.
    pub fn local_edge_moments(&self, t: usize, k: usize) -> [[f64; 2]; 2] {
        let c = &self.coeffs[t];
        [[c[2 * k], c[2 * k + 1]], [c[8 + 2 * k], c[8 + 2 * k + 1]]]
    }

    /// Moments of P|_t · n_e on edge `e`, w.r.t. the global normal.
    pub fn edge_moments(&self, mesh: &Mesh, e: usize, t: usize) -> [[f64; 2]; 2] {
        let k = mesh.local_edge(t, e).expect("edge belongs to triangle");
        self.local_edge_moments(t, k)
    }

    /// P|_t · n_e at parameter `s` of edge `e`.
    pub fn edge_trace(&self, mesh: &Mesh, e: usize, t: usize, s: f64) -> Vec2 {
        let m = self.edge_moments(mesh, e, t);
        Vec2::new(trace_from_moments(m[0], s), trace_from_moments(m[1], s))
    }

    /// Moments of the jump P|_{T−}·n − P|_{T+}·n on an interior edge; on a
    /// boundary edge the one-sided trace.
    pub fn jump_moments(&self, mesh: &Mesh, e: usize) -> [[f64; 2]; 2] {
        let edge = mesh.edge(e);
        let mut m = self.edge_moments(mesh, e, edge.minus);
        if let Some(p) = edge.plus {
            let q = self.edge_moments(mesh, e, p);
            for r in 0..2 {
                for j in 0..2 {
                    m[r][j] -= q[r][j];
                }
            }
        }
        m
    }

    pub fn add_assign(&mut self, other: &BrokenRtStress) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    /// Plain-text coefficient table: one line per triangle with its index
    /// followed by the 16 coefficients (row 0 DOFs 0–7, then row 1).
    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut s = String::from("# hyperequil broken RT1 stress v1\n");
        let _ = writeln!(s, "elements {}", self.coeffs.len());
        for (t, c) in self.coeffs.iter().enumerate() {
            let _ = write!(s, "{t}");
            for v in c {
                let _ = write!(s, " {v:e}");
            }
            s.push('\n');
        }
        s
    }
}
