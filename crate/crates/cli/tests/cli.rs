use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn nnh(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nnh"))
        .args(args)
        .env("NNH_OUT_DIR", out)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn phi_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let o = nnh(dir.path(), &["phi", "--n", "2", "--lambda", "1.5", "--t", "0:0.05:3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("phi.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,re,im"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 61);
    assert_eq!(rows[0], vec![0.0, 1.0, 0.0]);
    // phi decays and stays bounded by 1 on the real spectrum
    assert!(rows.iter().all(|r| r[1].hypot(r[2]) <= 1.0 + 1e-12));

    let meta = read_json(&dir.path().join("phi.json"));
    assert_eq!(meta["command"], "phi");
    assert_eq!(meta["config"]["t"], "0:0.05:3");
    assert_eq!(meta["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn identical_jobs_give_identical_files() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["cfun", "--n", "3", "--lambda", "0.01:0.37:20"];
    assert!(nnh(a.path(), &args).status.success());
    assert!(nnh(b.path(), &args).status.success());
    for f in ["cfun.csv", "cfun.json"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
    let header = fs::read_to_string(a.path().join("cfun.csv")).unwrap();
    assert!(header.starts_with("lambda,c_re,c_im,cinv_minus_re,cinv_minus_im,density\n"));
}

#[test]
fn out_flag_overrides_environment() {
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();
    let o = nnh(
        env_dir.path(),
        &[
            "hc",
            "--n",
            "1",
            "--lambda",
            "0.5",
            "--t",
            "1,2",
            "--out",
            flag_dir.path().to_str().unwrap(),
        ],
    );
    assert!(o.status.success());
    assert!(flag_dir.path().join("hc.csv").exists());
    assert!(!env_dir.path().join("hc.csv").exists());
    let csv = fs::read_to_string(flag_dir.path().join("hc.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let rel: f64 = line.split(',').next_back().unwrap().parse().unwrap();
        assert!(rel < 1e-9, "{line}");
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(
        nnh(d, &["phi", "--n", "0", "--lambda", "1", "--t", "0", "--bogus"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(nnh(d, &["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        nnh(d, &["phi", "--n", "0", "--lambda", "1", "--t", "3:0.1:1"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(nnh(d, &["--help"]).status.code(), Some(0));
    // pole of c(-lambda)^-1 at lambda = i for n = 2
    assert_eq!(
        nnh(d, &["cfun", "--n", "2", "--lambda", "0", "--im", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        nnh(
            d,
            &[
                "psido-apply",
                "--symbol",
                "rational",
                "--n",
                "2",
                "--p",
                "0.5",
                "--x",
                "0"
            ]
        )
        .status
        .code(),
        Some(2)
    );
    let o = nnh(
        d,
        &[
            "phi",
            "--n",
            "0",
            "--lambda",
            "1.5",
            "--t",
            "12",
            "--route",
            "hypergeometric",
        ],
    );
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("precision loss"));
}

#[test]
fn roundtrip_reports_small_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = nnh(dir.path(), &["roundtrip", "--n", "2", "--Lambda", "40"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let line = text.lines().find(|l| l.starts_with("relative L2 error:")).unwrap();
    let err: f64 = line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!(err < 1e-3, "{err}");
    let meta = read_json(&dir.path().join("roundtrip.json"));
    assert!(meta["results"]["rel_l2_error_without_discrete"].as_f64().unwrap() > err);
}

#[test]
fn transform_then_invert_recovers_the_bump() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(nnh(d, &["transform", "--n", "1", "--points", "1601"]).status.success());
    let sidecar = d.join("transform.json");
    let o = nnh(d, &["invert", "--spectral", sidecar.to_str().unwrap(), "--t", "0,1,2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(d.join("invert.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        let u = v[0] / 3.0;
        let want = (1.0 - 1.0 / (1.0 - u * u)).exp();
        assert!((v[1] - want).abs() < 1e-3 && v[2].abs() < 1e-3, "{line}");
    }
}

#[test]
fn profile_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let input = d.join("f.csv");
    let mut text = String::from("t,value\n");
    for i in 0..=200 {
        let t = i as f64 * 0.01;
        text.push_str(&format!(
            "{t},{}\n",
            (-4.0 * t * t).exp() * (1.0 - t / 2.0).max(0.0).powi(3)
        ));
    }
    fs::write(&input, text).unwrap();
    let o = nnh(d, &["abel", "--input", input.to_str().unwrap(), "--r", "-1,0,1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(d.join("abel.csv")).unwrap();
    let v: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(v[1] > v[2] && v[2] > 0.0);
    assert!((v[0] - v[2]).abs() < 1e-10 * v[2]);
}

#[test]
fn lorentz_reports_boundary() {
    let dir = tempfile::tempdir().unwrap();
    let o = nnh(dir.path(), &["lorentz", "--k", "1"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("finite from p = 1.0000"), "{}", stdout(&o));
    let csv = fs::read_to_string(dir.path().join("lorentz.csv")).unwrap();
    assert!(csv.starts_with("p,weak,pq\n"));
    assert!(csv.contains("inf"));
}

#[test]
fn kernels_and_symbols() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = nnh(
        d,
        &[
            "kernel",
            "--symbol",
            "global_test_family",
            "--n",
            "0",
            "--p",
            "1.5",
            "--kind",
            "global",
            "--r",
            "1,2",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(d.join("kernel.csv")).unwrap();
    assert!(csv.starts_with("r,eta,direct_re,direct_im,contour_re,contour_im,height,bound_ratio\n"));
    assert_eq!(
        read_json(&d.join("kernel.json"))["results"]["bound_exponent"],
        2.0 / 1.5
    );

    let o = nnh(
        d,
        &[
            "kernel",
            "--symbol",
            "{\"name\":\"constant\",\"re\":1,\"im\":0}",
            "--n",
            "0",
            "--r",
            "0",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let sym = d.join("sym.json");
    fs::write(&sym, r#"{"name":"pole","b":1.25}"#).unwrap();
    let arg = format!("@{}", sym.display());
    let o = nnh(
        d,
        &[
            "psido-apply",
            "--symbol",
            &arg,
            "--n",
            "0",
            "--x",
            "0,1",
            "--points",
            "801",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(d.join("psido_apply.csv").exists());
}

#[test]
fn verify_prints_a_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = nnh(dir.path(), &["verify", "--suite", "geometry"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().next().unwrap().starts_with("suite"));
    assert_eq!(text.lines().filter(|l| l.contains("PASS")).count(), 2);
}
