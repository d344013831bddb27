use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_dce-kerr");

fn dce(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_owned()
}

/// Rows as (t, method, K, n_mean) plus the raw columns.
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn strip_wall_time(meta: &str) -> String {
    meta.lines()
        .filter(|l| !l.starts_with("wall_time"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn run_writes_csv_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "a.csv");
    let o = dce(&[
        "run", "--kerr", "0.2,0.5", "--tmax", "2", "--stride", "500", "--methods",
        "analytic,full,rwa", "--output", &out,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t,method,K,epsilon,omega0,dim,dt,n_mean,norm");
    let rows = rows(&csv);
    assert_eq!(rows.len(), 2 * 5 * 3);
    for r in &rows {
        assert_eq!(r.len(), 9);
        let n: f64 = r[7].parse().unwrap();
        assert!(n >= 0.0);
        if r[1] == "analytic" {
            assert!(r[8].is_empty());
        } else {
            assert!((r[8].parse::<f64>().unwrap() - 1.0).abs() < 1e-10);
        }
    }
    let meta = fs::read_to_string(dir.path().join("a.meta")).unwrap();
    for key in ["omega0 = 1", "epsilon = 0.1", "dt = 0.001", "tmax = 2", "wall_time_s = "] {
        assert!(meta.contains(key), "missing {key} in\n{meta}");
    }
    for line in meta.lines().filter(|l| !l.is_empty() && !l.starts_with('#')) {
        assert!(line.contains(" = "), "not key = value: {line}");
    }
}

#[test]
fn fifteen_significant_digits() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "g.csv");
    let o = dce(&["run", "--kerr", "0.3", "--tmax", "7", "--stride", "7000", "--methods", "analytic", "--output", &out]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = rows(&fs::read_to_string(&out).unwrap());
    let n = &rows.last().unwrap()[7];
    let digits = n.trim_start_matches("0.").trim_start_matches('0').replace(['.', '-'], "");
    let digits = digits.split('e').next().unwrap();
    assert!(digits.len() <= 15, "{n}");
    let exact = {
        let p = dce_kerr::ModelParams::new(1.0, 0.1, 0.3, 2).unwrap();
        dce_kerr::analytic::vacuum_photon_number(&p, 7.0)
    };
    assert!((n.parse::<f64>().unwrap() / exact - 1.0).abs() < 1e-14);
}

#[test]
fn runs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = path(dir.path(), name);
        let o = dce(&["run", "--kerr", "0,0.25", "--tmax", "3", "--methods", "full,rwa,su11-stepped", "--output", &out, "--workers", "2"]);
        assert!(o.status.success(), "{}", stderr(&o));
        (
            fs::read(&out).unwrap(),
            strip_wall_time(&fs::read_to_string(Path::new(&out).with_extension("meta")).unwrap()),
        )
    };
    assert_eq!(run("a.csv"), run("b.csv"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = path(dir.path(), "c.csv");
    fs::write(
        &cfg,
        format!("# small run\nkerr = 0.4\nepsilon = 0.05  # weak\ntmax = 1\nmethods = analytic\noutput = {out}\n"),
    )
    .unwrap();
    let o = dce(&["run", "--config", cfg.to_str().unwrap(), "--epsilon", "0.2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = rows(&fs::read_to_string(&out).unwrap());
    assert!(rows.iter().all(|r| r[2] == "0.4" && r[3] == "0.2" && r[1] == "analytic"));
}

#[test]
fn config_errors_exit_1_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "x.csv");
    for (args, field) in [
        (vec!["--kerr", "abc"], "kerr"),
        (vec!["--epsilon", "1.5"], "epsilon"),
        (vec!["--dt", "0"], "dt"),
        (vec!["--dim", "1"], "dim"),
        (vec!["--methods", "magic"], "methods"),
        (vec!["--preset", "figure3"], "preset"),
        (vec!["--preset", "figure1", "--kerr", "0.1"], "kerr"),
    ] {
        let mut full = vec!["run", "--output", &out];
        full.extend(args);
        let o = dce(&full);
        assert_eq!(o.status.code(), Some(1), "{full:?}: {}", stderr(&o));
        assert!(stderr(&o).contains(field), "{full:?}: {}", stderr(&o));
    }
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "colour = blue\n").unwrap();
    let o = dce(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("colour"));
}

#[test]
fn io_errors_exit_2() {
    let o = dce(&["run", "--kerr", "0.5", "--tmax", "1", "--methods", "analytic", "--output", "/nonexistent/dir/x.csv"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let o = dce(&["run", "--config", "/nonexistent/run.cfg"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn divergence_exits_3_naming_method_and_time() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "d.csv");
    let o = dce(&[
        "run", "--kerr", "0", "--epsilon", "0.9", "--dim", "4096", "--dt", "0.5", "--tmax", "100",
        "--stride", "1", "--methods", "rwa", "--output", &out,
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let e = stderr(&o);
    assert!(e.contains("rwa") && e.contains("t = "), "{e}");
}

#[test]
fn kerr_sweep_index() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "sweep");
    let o = dce(&[
        "sweep", "--param", "kerr", "--values", "0,0.1,0.15,0.3", "--tmax", "60", "--methods",
        "analytic", "--output", &out, "--workers", "2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let index = fs::read_to_string(Path::new(&out).join("index.csv")).unwrap();
    assert_eq!(index.lines().next().unwrap(), "parameter,value,K,method,regime,peak_n_mean,first_zero_t,file");
    let rows = rows(&index);
    assert_eq!(rows.len(), 4);
    let regimes: Vec<&str> = rows.iter().map(|r| r[4].as_str()).collect();
    assert_eq!(regimes, ["hyperbolic", "critical", "trigonometric", "trigonometric"]);
    for r in &rows {
        assert!(Path::new(&out).join(&r[7]).exists());
        let k: f64 = r[2].parse().unwrap();
        if r[4] == "trigonometric" {
            let eta = (0.25 * k * k - 0.0025f64).sqrt();
            let zero: f64 = r[6].parse().unwrap();
            assert!((zero - std::f64::consts::PI / eta).abs() <= 0.1, "{r:?}");
            assert!((r[5].parse::<f64>().unwrap() * eta * eta / 0.0025 - 1.0).abs() < 1e-4);
        } else {
            assert!(r[6].is_empty());
        }
    }
}

#[test]
fn dim_sweep_is_converged_at_large_kerr() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "dims");
    let o = dce(&[
        "sweep", "--param", "dim", "--values", "64,128,256", "--kerr", "0.5", "--tmax", "60",
        "--methods", "full", "--output", &out,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let series: Vec<Vec<f64>> = ["64", "128", "256"]
        .iter()
        .map(|d| {
            rows(&fs::read_to_string(Path::new(&out).join(format!("dim_{d}.csv"))).unwrap())
                .iter()
                .map(|r| r[7].parse().unwrap())
                .collect()
        })
        .collect();
    for s in &series[1..] {
        let gap = s.iter().zip(&series[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(gap < 1e-8, "{gap}");
    }
}

#[test]
fn sweep_rejects_presets() {
    let dir = tempfile::tempdir().unwrap();
    let o = dce(&["sweep", "--preset", "figure1", "--param", "kerr", "--values", "0.1", "--output", &path(dir.path(), "s")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("preset"));
}

#[test]
fn quick_validate_passes_and_lists_checks() {
    let o = dce(&["validate", "--quick"]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{stdout}\n{}", stderr(&o));
    assert!(stdout.lines().all(|l| l.starts_with("PASS ") || l.starts_with("FAIL ")));
    for name in [
        "coefficient identities (20 random points)",
        "criterion 1 empty-cavity law (rwa, K=0, dim 1024",
        "criterion 8",
    ] {
        assert!(stdout.contains(name), "no check named {name}:\n{stdout}");
    }
}
