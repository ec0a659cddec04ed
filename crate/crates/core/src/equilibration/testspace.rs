//! Local test spaces for the divergence, jump and symmetry constraints.
//!
//! On a triangle T with centroid c and diameter h the element space is
//! spanned by
//!   e₁, e₂, (ρ₃ − ρ₃(c))/h, ((x₁ − c₁)/h, 0), (0, (x₂ − c₂)/h),
//!   ((x₂ − c₂)/h, (x₁ − c₁)/h),
//! and on a side S with midpoint m and length h_S by
//!   e₁, e₂, (ρ₃ − ρ₃(m))/h_S, (π − π(m))/h_S,
//! where π = x + u_h and ρ₃ = (π₂, −π₁). With the reference variant u_h is
//! replaced by zero, which gives plain P1 on T and P1(S)² on S.

use crate::femspace::TriGeom;
use crate::hyperelastic::Field;
use crate::mesh::Mesh;
use crate::Vec2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TestSpaceVariant {
    /// Rigid modes of the deformed configuration.
    Deformed,
    /// Rigid modes of the reference configuration (u_h ignored).
    Reference,
}

impl TestSpaceVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            TestSpaceVariant::Deformed => "deformed",
            TestSpaceVariant::Reference => "reference",
        }
    }
}

pub const ELEMENT_TESTS: usize = 6;
pub const SIDE_TESTS: usize = 4;

fn rotation(x: Vec2, u: Vec2) -> Vec2 {
    Vec2::new(x.y + u.y, -(x.x + u.x))
}

/// Displacement seen by the test functions.
pub(crate) fn test_displacement(field: &Field, mesh: &Mesh, geom: &TriGeom, t: usize, bary: [f64; 3], variant: TestSpaceVariant) -> Vec2 {
    match variant {
        TestSpaceVariant::Deformed => field.at(mesh, geom, t, bary).u,
        TestSpaceVariant::Reference => Vec2::zeros(),
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ElementTestSpace {
    pub center: Vec2,
    pub h: f64,
    /// ρ₃ at the centroid.
    pub rho_center: Vec2,
}

impl ElementTestSpace {
    pub fn new(mesh: &Mesh, field: &Field, t: usize, variant: TestSpaceVariant) -> ElementTestSpace {
        let geom = TriGeom::new(mesh, t);
        let third = [1.0 / 3.0; 3];
        let center = geom.centroid();
        let u = test_displacement(field, mesh, &geom, t, third, variant);
        ElementTestSpace { center, h: geom.diameter(), rho_center: rotation(center, u) }
    }

    /// Test functions at `x`, with `u` the displacement there (zero for the
    /// reference variant).
    pub fn eval(&self, x: Vec2, u: Vec2) -> [Vec2; ELEMENT_TESTS] {
        let d = (x - self.center) / self.h;
        [
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
            (rotation(x, u) - self.rho_center) / self.h,
            Vec2::new(d.x, 0.0),
            Vec2::new(0.0, d.y),
            Vec2::new(d.y, d.x),
        ]
    }

    /// Coefficients of the rigid modes e₁, e₂, ρ₃ in this basis.
    pub fn rigid_coefficients(&self) -> [[f64; ELEMENT_TESTS]; 3] {
        [
            [1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
            [self.rho_center.x, self.rho_center.y, self.h, 0.0, 0.0, 0.0],
        ]
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SideTestSpace {
    pub mid: Vec2,
    pub h: f64,
    /// π at the midpoint.
    pub pi_mid: Vec2,
}

impl SideTestSpace {
    pub fn new(mesh: &Mesh, field: &Field, e: usize, variant: TestSpaceVariant) -> SideTestSpace {
        let edge = mesh.edge(e);
        let mid = (mesh.vertex(edge.vertices[0]) + mesh.vertex(edge.vertices[1])) * 0.5;
        let t = edge.minus;
        let geom = TriGeom::new(mesh, t);
        let u = test_displacement(field, mesh, &geom, t, geom.bary(mid), variant);
        SideTestSpace { mid, h: edge.length, pi_mid: mid + u }
    }

    pub fn eval(&self, x: Vec2, u: Vec2) -> [Vec2; SIDE_TESTS] {
        let dpi = (x + u - self.pi_mid) / self.h;
        [Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0), Vec2::new(dpi.y, -dpi.x), dpi]
    }

    pub fn rigid_coefficients(&self) -> [[f64; SIDE_TESTS]; 3] {
        let r = rotation(self.pi_mid, Vec2::zeros());
        [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [r.x, r.y, self.h, 0.0]]
    }
}
