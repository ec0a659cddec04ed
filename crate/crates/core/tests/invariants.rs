use std::sync::Arc;

use hyperequil::diagnostics::{resultant_traction, traction_profile, resultant_normal_traction};
use hyperequil::equilibration::{equilibrate, EquilibrationOptions};
use hyperequil::hyperelastic::Checkpoint;
use hyperequil::linalg::min_norm_solve;
use hyperequil::{build_cook_mesh, build_patches, BoundaryLabel, CookLoading, Field, Material, NewtonOptions, Vec2};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_problem(seed: u64, rows: usize, cols: usize, rank: usize) -> (DMatrix<f64>, DMatrix<f64>, DVector<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = |r, c| DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0));
    let c = g(rows, rank) * g(rank, cols);
    let a = g(cols, cols);
    let m = &a * a.transpose() + DMatrix::identity(cols, cols) * 0.5;
    let b = &c * g(cols, 1).column(0);
    (c, m, b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // Wide, rank-deficient systems of the size met on boundary patches.
    #[test]
    fn min_norm_solution_is_feasible_and_m_orthogonal_to_the_kernel(
        seed in any::<u64>(),
        rows in 20usize..80,
        extra in 1usize..20,
        deficit in 0usize..4,
    ) {
        let cols = rows + extra;
        let rank = rows - deficit;
        let (c, m, b) = random_problem(seed, rows, cols, rank);
        let sol = min_norm_solve(&c, &m, &b, 1e-10).unwrap();
        prop_assert_eq!(sol.rank, rank);
        prop_assert!((&c * &sol.x - &b).norm() <= 1e-10 * b.norm().max(1.0));
        // x ⟂_M ker C
        let kernel = hyperequil::linalg::null_space(&c, 1e-10);
        let mx = &m * &sol.x;
        prop_assert!((kernel.transpose() * mx.clone()).norm() <= 1e-9 * mx.norm());
    }

    #[test]
    fn checkpoints_round_trip_bit_exactly(seed in any::<u64>(), gamma in 0.0f64..1.0, lambda in prop::option::of(1.0f64..1e6)) {
        let mesh = build_cook_mesh(1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut field = Field::zeros(&mesh);
        for u in &mut field.u {
            *u = Vec2::new(rng.random_range(-1.0..1.0), rng.random::<f64>() * 1e-7);
        }
        for p in &mut field.p {
            *p = rng.random_range(-1e3..1e3);
        }
        let ck = Checkpoint::new(&mesh, Material::new(1.0, lambda).unwrap(), gamma, 1, field);
        let back = Checkpoint::from_text(&ck.to_text()).unwrap();
        prop_assert_eq!(&back, &ck);
        back.verify_mesh(&mesh).unwrap();
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    // Global equilibrium of the reconstruction: the Γ_D reaction balances the
    // shear load γ over the 0.16-long right edge, and the normal resultant
    // vanishes, for any load.
    #[test]
    fn reconstruction_balances_the_load(gamma in 0.0f64..0.4) {
        let mesh = build_cook_mesh(1);
        let patches = build_patches(&mesh).unwrap();
        let loading = CookLoading::new(gamma);
        let field = hyperequil::solve_newton(
            &mesh,
            Material::incompressible(1.0),
            &loading,
            &NewtonOptions { load_scale: gamma, ..Default::default() },
        ).unwrap();
        let r = equilibrate(&mesh, &patches, &field, &loading, &EquilibrationOptions::default()).unwrap();
        let d = resultant_traction(&mesh, &r.reconstruction, BoundaryLabel::Dirichlet);
        prop_assert!((d - Vec2::new(0.0, -0.16 * gamma)).amax() <= 1e-10 * (1.0 + gamma));
        let normal = resultant_normal_traction(&mesh, &r.reconstruction);
        prop_assert!(normal.abs() <= 1e-10 * (1.0 + gamma));
        let profile = traction_profile(&mesh, &r.reconstruction);
        prop_assert!((profile.integral() - normal).abs() <= 1e-12 * (1.0 + gamma));
    }
}

#[test]
fn refinement_preserves_area_and_patch_count() {
    let mut area = None;
    for level in 0..4 {
        let mesh = build_cook_mesh(level);
        let a: f64 = (0..mesh.num_triangles()).map(|t| mesh.area(t)).sum();
        let a0 = *area.get_or_insert(a);
        assert!((a - a0).abs() <= 1e-14);
        let pu = build_patches(&mesh).unwrap();
        let off_neumann = (0..mesh.num_vertices()).filter(|&v| !mesh.on_neumann(v)).count();
        assert_eq!(pu.patches().len(), off_neumann);
        let rt = Arc::new(hyperequil::femspace::RtSpace::new(&mesh));
        assert_eq!(rt.num_elements(), mesh.num_triangles());
    }
}
