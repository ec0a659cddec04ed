//! Taylor–Hood solver for incompressible Neo-Hookean hyperelasticity and a
//! weakly symmetric, H(div)-conforming stress equilibration built from
//! vertex-patch corrections in the broken Raviart–Thomas space.
//!
//! The typical pipeline:
//!
//! ```no_run
//! use hyperequil::{build_cook_mesh, build_patches, CookLoading, Material, NewtonOptions};
//! use hyperequil::equilibration::{equilibrate, EquilibrationOptions};
//!
//! let mesh = build_cook_mesh(3);
//! let loading = CookLoading::new(0.2);
//! let field = hyperequil::solve_newton(&mesh, Material::incompressible(1.0), &loading, &NewtonOptions::default()).unwrap();
//! let patches = build_patches(&mesh).unwrap();
//! let result = equilibrate(&mesh, &patches, &field, &loading, &EquilibrationOptions::default()).unwrap();
//! println!("{:?}", hyperequil::diagnostics::resultant_normal_traction(&mesh, &result.reconstruction));
//! ```

#![allow(clippy::needless_range_loop)]

pub mod diagnostics;
pub mod equilibration;
pub mod error;
pub mod femspace;
pub mod hyperelastic;
pub mod linalg;
pub mod loading;
pub mod mesh;
pub mod projection;
pub mod verification;

pub type Vec2 = nalgebra::Vector2<f64>;
pub type Mat2 = nalgebra::Matrix2<f64>;

pub use error::{Error, Result};
pub use femspace::rt::BrokenRtStress;
pub use hyperelastic::{solve_newton, Field, Material, NewtonOptions};
pub use loading::{CookLoading, Loading};
pub use mesh::{build_cook_mesh, build_patches, refine_uniform, BoundaryLabel, Mesh, PartitionOfUnity, PatchKind, VertexPatch};
pub use projection::ProjectionMode;
