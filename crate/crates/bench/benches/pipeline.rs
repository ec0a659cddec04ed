use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};
use hyperequil::equilibration::{equilibrate, EquilibrationOptions, EquilibrationProblem, LocalSystem, TestSpaceVariant};
use hyperequil::femspace::RtSpace;
use hyperequil::projection::project;
use hyperequil::{build_cook_mesh, build_patches, solve_newton, CookLoading, Material, NewtonOptions, ProjectionMode};

const GAMMA: f64 = 0.2;

fn pipeline(c: &mut Criterion) {
    let mat = Material::incompressible(1.0);
    let loading = CookLoading::new(GAMMA);
    let opts = NewtonOptions { load_scale: GAMMA, ..Default::default() };

    let coarse = build_cook_mesh(2);
    let mut group = c.benchmark_group("cook");
    group.sample_size(10);
    group.bench_function("newton_T2", |b| b.iter(|| solve_newton(black_box(&coarse), mat, &loading, &opts).unwrap()));

    let mesh = build_cook_mesh(3);
    let patches = build_patches(&mesh).unwrap();
    let field = solve_newton(&mesh, mat, &loading, &opts).unwrap();
    for mode in [ProjectionMode::Naive, ProjectionMode::Compatible] {
        group.bench_function(format!("project_{}_T3", mode.as_str()), |b| {
            b.iter(|| project(&mesh, &patches, black_box(&field), &mat, &loading, mode).unwrap())
        });
    }
    group.bench_function("equilibrate_T3", |b| {
        b.iter(|| equilibrate(&mesh, &patches, black_box(&field), &loading, &EquilibrationOptions::default()).unwrap())
    });

    let (stress, load) = project(&mesh, &patches, &field, &mat, &loading, ProjectionMode::Compatible).unwrap();
    let rt = Arc::new(RtSpace::new(&mesh));
    let pb = EquilibrationProblem {
        mesh: &mesh,
        patches: &patches,
        rt: &rt,
        field: &field,
        stress: &stress,
        load: &load,
        loading: &loading,
        mode: ProjectionMode::Compatible,
        variant: TestSpaceVariant::Deformed,
    };
    let interior = (0..patches.patches().len()).find(|&i| patches.patch(i).kind == hyperequil::PatchKind::Interior).unwrap();
    group.bench_function("patch_assemble_solve_T3", |b| {
        b.iter(|| LocalSystem::assemble(&pb, black_box(interior)).solve(1e-10).unwrap())
    });
    group.finish();
}

criterion_group!(benches, pipeline);
criterion_main!(benches);
