use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use hyperequil::diagnostics::{
    convergence_rates, convergence_table, momentum_and_symmetry_audit, resultant_normal_traction, resultant_traction,
    sample_stress, traction_profile, LevelSolution,
};
use hyperequil::equilibration::{equilibrate, EquilibrationOptions, EquilibrationResult, TestSpaceVariant};
use hyperequil::hyperelastic::{solve_newton_logged, Checkpoint};
use hyperequil::mesh::PatchKind;
use hyperequil::projection::{project, ProjectedStress};
use hyperequil::verification::{verification_csv, verify};
use hyperequil::{build_cook_mesh, build_patches, BoundaryLabel, CookLoading, Mesh, NewtonOptions, ProjectionMode, Vec2};

use crate::config::{run_tag, RunConfig};
use crate::CliError;

/// Audit residuals are compared against this fraction of ‖P^R‖_{L²}.
const AUDIT_TOL: f64 = 1e-9;
const NULL_ANGLE_TOL: f64 = 1e-8;
const COMPAT_TOL: f64 = 1e-10;

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn prepare_out(cfg: &RunConfig) -> Result<(), CliError> {
    fs::create_dir_all(&cfg.out).map_err(|e| CliError::Io(format!("{}: {e}", cfg.out.display())))
}

pub fn checkpoint_path(cfg: &RunConfig, level: usize, gamma: f64) -> PathBuf {
    cfg.out.join(format!("checkpoint_{}.txt", run_tag(level, gamma)))
}

/// Reads a checkpoint and rebuilds the mesh it was computed on.
fn load(path: &Path) -> Result<(Mesh, Checkpoint), CliError> {
    if !path.exists() {
        return Err(CliError::Missing(path.display().to_string()));
    }
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let ck = Checkpoint::from_text(&text)?;
    let mesh = build_cook_mesh(ck.level);
    ck.verify_mesh(&mesh)?;
    Ok((mesh, ck))
}

fn requested_checkpoints(cfg: &RunConfig) -> Vec<PathBuf> {
    cfg.levels.iter().flat_map(|&l| cfg.gamma.iter().map(move |&g| (l, g))).map(|(l, g)| checkpoint_path(cfg, l, g)).collect()
}

pub fn solve(cfg: &RunConfig) -> Result<(), CliError> {
    prepare_out(cfg)?;
    let material = cfg.material()?;
    for &level in &cfg.levels {
        let mesh = build_cook_mesh(level);
        write(&cfg.out.join(format!("mesh_T{level}.txt")), &mesh.to_text())?;
        for &gamma in &cfg.gamma {
            let tag = run_tag(level, gamma);
            let loading = CookLoading::new(gamma);
            let opts = NewtonOptions { load_scale: gamma, load_steps: cfg.load_steps, ..Default::default() };
            let (field, log) = solve_newton_logged(&mesh, material, &loading, &opts)?;

            let mut csv = String::from("load_factor,iteration,residual\n");
            for step in &log.steps {
                for (i, r) in step.residuals.iter().enumerate() {
                    let _ = writeln!(csv, "{:e},{i},{r:e}", step.load_factor);
                }
            }
            write(&cfg.out.join(format!("newton_{tag}.csv")), &csv)?;
            write(&checkpoint_path(cfg, level, gamma), &Checkpoint::new(&mesh, material, gamma, level, field.clone()).to_text())?;

            let nv = mesh.num_vertices();
            let mut vtk = Vec::new();
            mesh.write_vtk(&mut vtk, Some(&field.u[..nv]), &[("pressure", &field.p)])
                .map_err(|e| CliError::Io(e.to_string()))?;
            write(&cfg.out.join(format!("deformed_{tag}.vtk")), &String::from_utf8_lossy(&vtk))?;
            println!("solve {tag}: {} Newton iterations, max |u| = {:.4e}", log.total_iterations(), field.sup_norm());
        }
    }
    Ok(())
}

struct AuditRow {
    check: &'static str,
    value: f64,
    tolerance: f64,
}

impl AuditRow {
    fn pass(&self) -> bool {
        self.value <= self.tolerance
    }
}

fn audit_csv(rows: &[AuditRow]) -> String {
    let mut s = String::from("check,value,tolerance,pass\n");
    for r in rows {
        let _ = writeln!(s, "{},{:e},{:e},{}", r.check, r.value, r.tolerance, r.pass());
    }
    s
}

fn kind_str(k: PatchKind) -> &'static str {
    match k {
        PatchKind::Interior => "INTERIOR",
        PatchKind::Dirichlet => "DIRICHLET",
    }
}

/// Equilibrates every requested checkpoint (or the explicit `checkpoints`).
pub fn equilibrate_cmd(cfg: &RunConfig, checkpoints: &[PathBuf]) -> Result<(), CliError> {
    prepare_out(cfg)?;
    let paths = if checkpoints.is_empty() { requested_checkpoints(cfg) } else { checkpoints.to_vec() };
    let mut failures = Vec::new();
    for path in paths {
        let (mesh, ck) = load(&path)?;
        let tag = format!("{}_{}", run_tag(ck.level, ck.gamma), cfg.mode.as_str());
        let patches = build_patches(&mesh)?;
        let loading = CookLoading::new(ck.gamma);
        let opts = EquilibrationOptions {
            mode: cfg.mode,
            variant: cfg.variant,
            material: ck.material,
            strict: cfg.strict,
            ..Default::default()
        };
        let result = equilibrate(&mesh, &patches, &ck.field, &loading, &opts)?;
        let audit = momentum_and_symmetry_audit(&mesh, &ck.field, &result.reconstruction, &result.projected_load, &loading, cfg.variant);
        let scale = AUDIT_TOL * audit.scale;
        let g1 = 1.0 + ck.gamma;
        let dirichlet = resultant_traction(&mesh, &result.reconstruction, BoundaryLabel::Dirichlet);
        let rows = [
            AuditRow { check: "divergence", value: audit.divergence, tolerance: scale },
            AuditRow { check: "jump", value: audit.jump, tolerance: scale },
            AuditRow { check: "neumann", value: audit.neumann, tolerance: scale },
            AuditRow { check: "symmetry", value: audit.symmetry, tolerance: scale },
            AuditRow { check: "patch_incompatibility", value: result.max_incompatibility(), tolerance: opts.compat_tol },
            AuditRow {
                check: "resultant_normal",
                value: resultant_normal_traction(&mesh, &result.reconstruction).abs(),
                tolerance: 1e-7 * g1,
            },
            AuditRow {
                check: "dirichlet_resultant_deviation",
                value: (dirichlet - Vec2::new(0.0, -0.16 * ck.gamma)).amax(),
                tolerance: 1e-8 * g1,
            },
        ];
        write(&cfg.out.join(format!("audit_{tag}.csv")), &audit_csv(&rows))?;
        write(&cfg.out.join(format!("stress_{tag}.txt")), &result.reconstruction.to_text())?;
        write(&cfg.out.join(format!("patches_{tag}.csv")), &patches_csv(&result))?;

        let mut samples = String::from("element,x,y,P11,P12,P21,P22\n");
        for (t, x, p) in sample_stress(&mesh, &result.reconstruction, 4) {
            let _ = writeln!(samples, "{t},{:e},{:e},{:e},{:e},{:e},{:e}", x.x, x.y, p[(0, 0)], p[(0, 1)], p[(1, 0)], p[(1, 1)]);
        }
        write(&cfg.out.join(format!("stress_samples_{tag}.csv")), &samples)?;

        let failed: Vec<String> =
            rows.iter().filter(|r| !r.pass()).map(|r| format!("{tag}: {} = {:e} > {:e}", r.check, r.value, r.tolerance)).collect();
        println!(
            "equilibrate {tag}: max residual {:.3e} (scale {:.3e}), {}",
            audit.max_residual(),
            audit.scale,
            if failed.is_empty() { "audit passed" } else { "audit FAILED" }
        );
        failures.extend(failed);
    }
    if cfg.strict && !failures.is_empty() {
        return Err(CliError::Audit(failures));
    }
    Ok(())
}

fn patches_csv(result: &EquilibrationResult) -> String {
    let mut s = String::from("patch_id,kind,rows,cols,rank,incompatibility\n");
    for p in &result.patches {
        let _ = writeln!(s, "{},{},{},{},{},{:e}", p.center, kind_str(p.kind), p.rows, p.cols, p.rank, p.incompatibility);
    }
    s
}

pub fn verify_cmd(cfg: &RunConfig) -> Result<(), CliError> {
    prepare_out(cfg)?;
    let mut failures = Vec::new();
    for path in requested_checkpoints(cfg) {
        let (mesh, ck) = load(&path)?;
        let tag = run_tag(ck.level, ck.gamma);
        let patches = build_patches(&mesh)?;
        let loading = CookLoading::new(ck.gamma);
        let mut csv = String::new();
        for variant in [TestSpaceVariant::Deformed, TestSpaceVariant::Reference] {
            let rows = verify(&mesh, &patches, &ck.field, &ck.material, &loading, variant)?;
            let part = verification_csv(&rows);
            csv.push_str(if csv.is_empty() { &part } else { part.split_once('\n').map_or("", |p| p.1) });
            if variant != TestSpaceVariant::Deformed {
                continue;
            }
            for r in &rows {
                let n = &r.null_space;
                if n.computed != n.predicted {
                    failures.push(format!("{tag}: patch {} null space {} != {}", n.center, n.computed, n.predicted));
                } else if n.principal_angle.is_some_and(|a| a > NULL_ANGLE_TOL) {
                    failures.push(format!("{tag}: patch {} principal angle {:e}", n.center, n.principal_angle.unwrap_or(0.0)));
                }
                if r.incompat_compatible > COMPAT_TOL {
                    failures.push(format!("{tag}: patch {} compatible incompatibility {:e}", n.center, r.incompat_compatible));
                }
            }
        }
        write(&cfg.out.join(format!("verify_{tag}.csv")), &csv)?;
        println!("verify {tag}: {} patches", patches.patches().len());
    }
    if !failures.is_empty() {
        for f in &failures {
            eprintln!("{f}");
        }
        if cfg.strict {
            return Err(CliError::Audit(failures));
        }
    }
    Ok(())
}

struct ReportRun {
    level: usize,
    gamma: f64,
    naive: f64,
    equilibrated: f64,
    solution: LevelSolution,
    naive_stress: ProjectedStress,
}

pub fn report(cfg: &RunConfig) -> Result<(), CliError> {
    prepare_out(cfg)?;
    let material = cfg.material()?;
    let mut runs = Vec::new();
    for &gamma in &cfg.gamma {
        for &level in &cfg.levels {
            let (mesh, ck) = load(&checkpoint_path(cfg, level, gamma))?;
            let patches = build_patches(&mesh)?;
            let loading = CookLoading::new(gamma);
            let (naive, _) = project(&mesh, &patches, &ck.field, &ck.material, &loading, ProjectionMode::Naive)?;
            let opts = EquilibrationOptions { variant: cfg.variant, material: ck.material, ..Default::default() };
            let result = equilibrate(&mesh, &patches, &ck.field, &loading, &opts)?;
            runs.push(ReportRun {
                naive: resultant_normal_traction(&mesh, &naive),
                level,
                gamma,
                equilibrated: resultant_normal_traction(&mesh, &result.reconstruction),
                naive_stress: naive,
                solution: LevelSolution { level, mesh, field: ck.field, reconstruction: result.reconstruction },
            });
        }
    }
    let lambda = cfg.lambda.map_or_else(|| "inf".to_string(), |l| format!("{l:e}"));
    let meta = format!("{:e},{lambda}", cfg.mu);
    let find = |l: usize, g: f64| runs.iter().find(|r| r.level == l && r.gamma == g).expect("run computed");

    for (name, pick) in [("table1.csv", 0), ("table2.csv", 1)] {
        let mut s = String::from("level,mu,lambda");
        for g in &cfg.gamma {
            let _ = write!(s, ",gamma={g}");
        }
        s.push('\n');
        for &l in &cfg.levels {
            let _ = write!(s, "T{l},{meta}");
            for &g in &cfg.gamma {
                let r = find(l, g);
                let _ = write!(s, ",{:e}", if pick == 0 { r.naive } else { r.equilibrated });
            }
            s.push('\n');
        }
        write(&cfg.out.join(name), &s)?;
    }

    let mut t3 = String::from("gamma,mu,lambda,quantity");
    for l in cfg.levels.iter().skip(1) {
        let _ = write!(t3, ",T{l}");
    }
    t3.push('\n');
    for &g in &cfg.gamma {
        let levels: Vec<LevelSolution> = cfg
            .levels
            .iter()
            .map(|&l| {
                let r = find(l, g);
                LevelSolution {
                    level: l,
                    mesh: r.solution.mesh.clone(),
                    field: r.solution.field.clone(),
                    reconstruction: r.solution.reconstruction.clone(),
                }
            })
            .collect();
        let rows = convergence_table(&levels, material)?;
        let rates = convergence_rates(&rows);
        let rate_cell = |k: usize, eq: bool| match k.checked_sub(1).and_then(|i| rates.get(i)) {
            Some(&(e, r)) => format!("{:.4}", if eq { e } else { r }),
            None => String::new(),
        };
        for label in ["equilibrated", "rate_equilibrated", "raw", "rate_raw"] {
            let _ = write!(t3, "{g},{meta},{label}");
            for (k, row) in rows.iter().enumerate() {
                let cell = match label {
                    "equilibrated" => format!("{:e}", row.equilibrated),
                    "raw" => format!("{:e}", row.raw),
                    _ => rate_cell(k, label == "rate_equilibrated"),
                };
                let _ = write!(t3, ",{cell}");
            }
            t3.push('\n');
        }
    }
    write(&cfg.out.join("table3.csv"), &t3)?;

    let finest = *cfg.levels.last().expect("validated nonempty");
    let mut profile = String::from("gamma,level,arclength,naive,equilibrated\n");
    for &g in &cfg.gamma {
        let r = find(finest, g);
        let mesh = &r.solution.mesh;
        let naive = traction_profile(mesh, &r.naive_stress);
        let eq = traction_profile(mesh, &r.solution.reconstruction);
        for (a, b) in naive.segments.iter().zip(&eq.segments) {
            let _ = writeln!(profile, "{g},{finest},{:e},{:e},{:e}", a.arc_start, a.value_start, b.value_start);
            let _ = writeln!(profile, "{g},{finest},{:e},{:e},{:e}", a.arc_end, a.value_end, b.value_end);
        }
    }
    write(&cfg.out.join("profile.csv"), &profile)?;
    println!("report: wrote table1.csv, table2.csv, table3.csv, profile.csv to {}", cfg.out.display());
    Ok(())
}
