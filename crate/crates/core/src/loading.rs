//! Body forces and boundary tractions.

use crate::mesh::{cook, BoundaryLabel, BoundarySegment};
use crate::Vec2;

/// Load data f on Ω and g on Γ_N.
pub trait Loading: Sync {
    fn body_force(&self, x: Vec2) -> Vec2;

    /// Traction on a Neumann segment.
    fn traction(&self, x: Vec2, segment: BoundarySegment) -> Vec2;

    /// Whether f vanishes identically (lets projections skip quadrature).
    fn body_force_is_zero(&self) -> bool {
        false
    }
}

/// Cook's membrane: f = 0, g = (0, γ) on the right segment, traction free
/// on the rest of Γ_N.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CookLoading {
    pub gamma: f64,
}

impl CookLoading {
    pub fn new(gamma: f64) -> CookLoading {
        CookLoading { gamma }
    }
}

impl Loading for CookLoading {
    fn body_force(&self, _x: Vec2) -> Vec2 {
        Vec2::zeros()
    }

    fn traction(&self, _x: Vec2, segment: BoundarySegment) -> Vec2 {
        if segment.label == BoundaryLabel::Neumann && segment.tag == cook::RIGHT {
            Vec2::new(0.0, self.gamma)
        } else {
            Vec2::zeros()
        }
    }

    fn body_force_is_zero(&self) -> bool {
        true
    }
}

/// A loading multiplied by a scalar factor (used for load stepping).
pub struct Scaled<'a, L: Loading + ?Sized> {
    pub inner: &'a L,
    pub factor: f64,
}

impl<L: Loading + ?Sized> Loading for Scaled<'_, L> {
    fn body_force(&self, x: Vec2) -> Vec2 {
        self.inner.body_force(x) * self.factor
    }

    fn traction(&self, x: Vec2, segment: BoundarySegment) -> Vec2 {
        self.inner.traction(x, segment) * self.factor
    }

    fn body_force_is_zero(&self) -> bool {
        self.inner.body_force_is_zero()
    }
}
