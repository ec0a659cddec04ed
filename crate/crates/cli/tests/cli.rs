use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyperequil"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn solve_is_deterministic_and_zero_load_gives_zero_field() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let o = run(&["solve", "--levels", "1", "--gamma", "0,0.2"], dir.path());
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    for name in ["checkpoint_T1_g0.txt", "checkpoint_T1_g0.2.txt", "newton_T1_g0.2.csv", "deformed_T1_g0.2.vtk", "mesh_T1.txt"] {
        let x = fs::read(a.path().join(name)).unwrap();
        let y = fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name} differs between runs");
    }
    let zero = fs::read_to_string(a.path().join("checkpoint_T1_g0.txt")).unwrap();
    let values: Vec<f64> = zero
        .lines()
        .skip_while(|l| !l.starts_with("displacement"))
        .skip(1)
        .filter(|l| !l.starts_with("pressure"))
        .flat_map(|l| l.split_whitespace().map(|v| v.parse::<f64>().unwrap()).collect::<Vec<_>>())
        .collect();
    assert!(!values.is_empty() && values.iter().all(|v| *v == 0.0));
}

#[test]
fn pipeline_writes_artifacts_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let common = ["--levels", "1,2", "--gamma", "0.2"];
    for verb in ["solve", "equilibrate", "verify", "report"] {
        let mut args = vec![verb];
        args.extend(common);
        args.push("--strict");
        let o = run(&args, out);
        assert_eq!(code(&o), 0, "{verb}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let audit = fs::read_to_string(out.join("audit_T2_g0.2_compatible.csv")).unwrap();
    assert!(audit.lines().skip(1).all(|l| l.ends_with(",true")), "{audit}");

    let t2 = fs::read_to_string(out.join("table2.csv")).unwrap();
    let rows: Vec<&str> = t2.lines().collect();
    assert_eq!(rows[0], "level,mu,lambda,gamma=0.2");
    for r in &rows[1..] {
        let v: f64 = r.rsplit(',').next().unwrap().parse().unwrap();
        assert!(v.abs() < 1e-10, "{r}");
    }
    let t1 = fs::read_to_string(out.join("table1.csv")).unwrap();
    let naive: f64 = t1.lines().nth(2).unwrap().rsplit(',').next().unwrap().parse().unwrap();
    assert!(naive.abs() > 1e-4);

    let t3 = fs::read_to_string(out.join("table3.csv")).unwrap();
    assert_eq!(t3.lines().count(), 5);
    let profile = fs::read_to_string(out.join("profile.csv")).unwrap();
    assert!(profile.starts_with("gamma,level,arclength,naive,equilibrated\n"));

    let verify = fs::read_to_string(out.join("verify_T2_g0.2.csv")).unwrap();
    assert_eq!(verify.lines().filter(|l| l.starts_with("variant")).count(), 1);
    assert!(verify.lines().any(|l| l.starts_with("reference,")));
}

#[test]
fn config_file_is_read_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# test run\nlevels = 1\ngamma = 0.5\n").unwrap();
    let o = run(&["solve", "--config", cfg.to_str().unwrap(), "--gamma", "0.1"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("checkpoint_T1_g0.1.txt").exists());
    assert!(!dir.path().join("checkpoint_T1_g0.5.txt").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    assert_eq!(code(&run(&["report", "--levels", ""], out)), 2);
    assert_eq!(code(&run(&["solve", "--levels", "2,1"], out)), 2);
    assert_eq!(code(&run(&["solve", "--mode", "sloppy"], out)), 2);
    assert_eq!(code(&run(&["report", "--levels", "1"], out)), 1, "missing checkpoint");

    assert_eq!(code(&run(&["solve", "--levels", "2", "--gamma", "0.2"], out)), 0);
    let o = run(&["equilibrate", "--levels", "2", "--gamma", "0.2", "--mode", "naive", "--strict"], out);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&["equilibrate", "--levels", "2", "--gamma", "0.2", "--mode", "naive"], out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}
