//! Quadrature, Taylor–Hood Lagrange bases and the broken Raviart–Thomas
//! tensor space.

pub mod lagrange;
pub mod quadrature;
pub mod rt;

use crate::mesh::Mesh;
use crate::{Mat2, Vec2};

pub use lagrange::{eval_p1_basis, eval_p2_basis, TaylorHoodSpace};
pub use quadrature::{line_rule, triangle_rule, LineRule, TriangleRule, NONLINEAR_ORDER, POLY_ORDER};
pub use rt::{BrokenRtStress, RtElement, RtSpace};

/// Affine geometry of one triangle.
#[derive(Clone, Copy, Debug)]
pub struct TriGeom {
    pub x: [Vec2; 3],
    pub area: f64,
    /// Constant gradients of the barycentric coordinates.
    pub grad: [Vec2; 3],
}

impl TriGeom {
    pub fn from_coords(x: [Vec2; 3]) -> TriGeom {
        let area = crate::mesh::signed_area(x[0], x[1], x[2]);
        let grad = std::array::from_fn(|i| {
            let (a, b) = (x[(i + 1) % 3], x[(i + 2) % 3]);
            Vec2::new(a.y - b.y, b.x - a.x) / (2.0 * area)
        });
        TriGeom { x, area, grad }
    }

    pub fn new(mesh: &Mesh, t: usize) -> TriGeom {
        TriGeom::from_coords(mesh.triangle_coords(t))
    }

    pub fn point(&self, bary: [f64; 3]) -> Vec2 {
        self.x[0] * bary[0] + self.x[1] * bary[1] + self.x[2] * bary[2]
    }

    pub fn bary(&self, p: Vec2) -> [f64; 3] {
        let l: [f64; 3] = std::array::from_fn(|i| self.grad[i].dot(&(p - self.x[(i + 1) % 3])));
        l
    }

    pub fn centroid(&self) -> Vec2 {
        (self.x[0] + self.x[1] + self.x[2]) / 3.0
    }

    /// Diameter (longest edge).
    pub fn diameter(&self) -> f64 {
        (0..3).map(|i| (self.x[(i + 1) % 3] - self.x[i]).norm()).fold(0.0, f64::max)
    }

    /// Physical quadrature points and weights for a shared rule.
    pub fn quadrature(&self, order: usize) -> impl Iterator<Item = ([f64; 3], Vec2, f64)> + '_ {
        let rule = triangle_rule(order);
        rule.points.iter().zip(&rule.weights).map(move |(b, w)| (*b, self.point(*b), 2.0 * self.area * w))
    }
}

/// Points, arc-length parameters and weights (summing to |S|) on edge `e`,
/// parametrised from `vertices[0]` to `vertices[1]`.
pub fn edge_quadrature(mesh: &Mesh, e: usize, order: usize) -> impl Iterator<Item = (f64, Vec2, f64)> + '_ {
    let edge = mesh.edge(e);
    let a = mesh.vertex(edge.vertices[0]);
    let b = mesh.vertex(edge.vertices[1]);
    let len = edge.length;
    line_rule(order).iter().map(move |(s, w)| (s, a + (b - a) * s, w * len))
}

/// Skew operator J(θ) = [[0, θ], [−θ, 0]].
pub fn skew_j(theta: f64) -> Mat2 {
    Mat2::new(0.0, theta, -theta, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn barycentric_round_trip() {
        let g = TriGeom::from_coords([Vec2::new(0.1, 0.2), Vec2::new(1.3, 0.4), Vec2::new(0.2, 0.9)]);
        let b = [0.2, 0.5, 0.3];
        let back = g.bary(g.point(b));
        for i in 0..3 {
            assert!((back[i] - b[i]).abs() < 1e-14);
        }
        let s: Vec2 = g.grad.iter().sum();
        assert!(s.norm() < 1e-13);
    }

    #[test]
    fn j_is_skew_and_linear() {
        let a = skew_j(1.7);
        assert_eq!(a.transpose(), -a);
        assert_eq!(skew_j(2.0 * 1.7 + 0.5), a * 2.0 + skew_j(0.5));
    }
}
