use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use funtf_core::frames::Frame;
use funtf_core::motions::canonical_simplex;
use funtf_core::random::random_funtf;
use funtf_core::{EigenstepsTable, Field};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

fn funtf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_funtf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn save(dir: &TempDir, name: &str, contents: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn mercedes_benz() -> Frame {
    let h = 3f64.sqrt() / 2.0;
    Frame::from_real_columns(&[&[1.0, 0.0], &[-0.5, h], &[-0.5, -h]]).unwrap()
}

#[test]
fn verify_two_bases() {
    let dir = TempDir::new().unwrap();
    let f =
        Frame::from_real_columns(&[&[1.0, 0.0], &[0.0, 1.0], &[0.6, 0.8], &[-0.8, 0.6]]).unwrap();
    let p = save(&dir, "f.json", &f.to_json());
    let out = funtf(&["verify", s(&p)]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["funtf"], true);
    let bad = Frame::from_real_columns(&[&[1.0, 0.0], &[1.0, 0.0]]).unwrap();
    let p = save(&dir, "bad.json", &bad.to_json());
    assert_eq!(code(&funtf(&["verify", s(&p)])), 1);
}

#[test]
fn eigensteps_of_mercedes_benz() {
    let dir = TempDir::new().unwrap();
    let p = save(&dir, "mb.json", &mercedes_benz().to_json());
    let out = funtf(&["eigensteps", s(&p)]);
    assert_eq!(code(&out), 0);
    let t = EigenstepsTable::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    let want = [[0.0, 0.0], [1.0, 0.0], [1.5, 0.5], [1.5, 1.5]];
    for (row, w) in t.rows().iter().zip(want) {
        assert!((row[0] - w[0]).abs() < 1e-12 && (row[1] - w[1]).abs() < 1e-12);
    }
    let csv = dir.path().join("mb.csv");
    assert_eq!(code(&funtf(&["eigensteps", s(&p), "--output", s(&csv)])), 0);
    assert!(std::fs::read_to_string(&csv)
        .unwrap()
        .starts_with("n,lambda_1"));
}

#[test]
fn malformed_inputs_exit_2() {
    let dir = TempDir::new().unwrap();
    for (name, body) in [
        ("empty.json", ""),
        ("garbage.json", "{not json"),
        (
            "shape.json",
            r#"{"field":"real","d":2,"N":2,"columns":[[[1,0]]]}"#,
        ),
        (
            "field.json",
            r#"{"field":"quaternion","d":1,"N":1,"columns":[[[1,0]]]}"#,
        ),
        ("zero.json", r#"{"field":"real","d":0,"N":0,"columns":[]}"#),
    ] {
        let p = save(&dir, name, body);
        for cmd in ["verify", "eigensteps", "naimark", "spark", "od"] {
            let out = funtf(&[cmd, s(&p)]);
            assert_eq!(
                code(&out),
                2,
                "{cmd} {name}: {}",
                String::from_utf8_lossy(&out.stderr)
            );
        }
    }
    let table = save(&dir, "t.json", r#"{"N":3,"d":2,"rows":[[0,0],[1,0]]}"#);
    assert_eq!(code(&funtf(&["synthesize", s(&table)])), 2);
    assert_eq!(code(&funtf(&["verify", "/nonexistent/frame.json"])), 2);
    assert_eq!(code(&funtf(&["--steps", "1", "morph", "3"])), 2);
    assert_eq!(code(&funtf(&["sample", "2", "3"])), 2);
}

#[test]
fn sample_synthesize_round_trip() {
    let dir = TempDir::new().unwrap();
    let t = dir.path().join("t.json");
    assert_eq!(
        code(&funtf(&[
            "sample",
            "6",
            "3",
            "--eigensteps",
            "--seed",
            "4",
            "--output",
            s(&t)
        ])),
        0
    );
    let f = dir.path().join("f.json");
    let out = funtf(&["synthesize", s(&t), "--random-base", "--output", s(&f)]);
    assert_eq!(code(&out), 0);
    assert!(stdout_json(&out)["eigensteps_deviation"].as_f64().unwrap() < 1e-7);
    assert_eq!(code(&funtf(&["verify", s(&f)])), 0);
    let a = funtf(&["sample", "5", "2", "--seed", "9"]);
    let b = funtf(&["sample", "5", "2", "--seed", "9"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn connect_writes_path_csv() {
    let dir = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let f = random_funtf(5, 2, Field::Complex, &mut rng).unwrap();
    let g = random_funtf(5, 2, Field::Complex, &mut rng).unwrap();
    let (pf, pg) = (
        save(&dir, "f.json", &f.to_json()),
        save(&dir, "g.json", &g.to_json()),
    );
    let csv = dir.path().join("path.csv");
    let out = funtf(&[
        "connect",
        s(&pf),
        s(&pg),
        "--steps",
        "16",
        "--output",
        s(&csv),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let body = std::fs::read_to_string(&csv).unwrap();
    assert!(body.starts_with("t,funtf_residual,od_margin,f0_0_re,f0_0_im"));
    assert_eq!(stdout_json(&out)["pass"], true);

    let real = random_funtf(5, 2, Field::Real, &mut rng).unwrap();
    let pr = save(&dir, "r.json", &real.to_json());
    let out = funtf(&["connect", s(&pr), s(&pr)]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("motion"));

    let small = random_funtf(4, 3, Field::Complex, &mut rng).unwrap();
    let ps = save(&dir, "s.json", &small.to_json());
    let out = funtf(&["connect", s(&ps), s(&ps)]);
    assert_eq!(code(&out), 2);
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("N = 4"),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn connect_nod_keeps_disk_order() {
    let dir = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let f = random_funtf(6, 2, Field::Complex, &mut rng).unwrap();
    // doubled simplex, ordered so the second row of eigensteps is degenerate
    let (h, _) = canonical_simplex(3).unwrap();
    let mut cols = h.columns();
    cols.extend(h.columns());
    let g = Frame::from_columns(
        Field::Complex,
        2,
        &[0, 3, 1, 4, 2, 5].map(|j| cols[j].clone()),
    )
    .unwrap();
    let (pf, pg) = (
        save(&dir, "f.json", &f.to_json()),
        save(&dir, "g.json", &g.to_json()),
    );
    let out = funtf(&["connect-nod", s(&pf), s(&pg), "--steps", "16"]);
    let json = stdout_json(&out);
    assert_eq!(code(&out), 0, "{json}");
    assert!(json["min_od_margin"].as_f64().unwrap() > 0.0);
    assert!(json["end_deviation"].as_f64().unwrap() < 1e-7);
    assert_ne!(json["permutation"], serde_json::json!([0, 1, 2, 3, 4, 5]));

    let e = Frame::new(
        Field::Complex,
        funtf_core::CMat::from_fn(2, 6, |i, j| {
            funtf_core::C64::new(f64::from(u8::from(i == j % 2)), 0.0)
        }),
    )
    .unwrap();
    let pe = save(&dir, "e.json", &e.to_json());
    let out = funtf(&["connect-nod", s(&pe), s(&pf)]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("orthodecomposable"));
}

#[test]
fn motion_demos() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("morph.csv");
    let out = funtf(&["morph", "3", "--output", s(&csv)]);
    assert_eq!(code(&out), 0);
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 66);
    let out = funtf(&["swap", "3", "--steps", "16"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["xi"], serde_json::json!([-1.0]));
    assert_eq!(code(&funtf(&["swap", "5", "--steps", "16"])), 0);
}

#[test]
fn spark_and_od_reports() {
    let dir = TempDir::new().unwrap();
    let p = save(&dir, "mb.json", &mercedes_benz().to_json());
    let out = stdout_json(&funtf(&["spark", s(&p)]));
    assert_eq!(out["spark"], 3);
    assert_eq!(out["full_spark"], true);
    let out = stdout_json(&funtf(&["od", s(&p)]));
    assert_eq!(out["is_od"], false);
    assert!((out["od_margin"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    let out = stdout_json(&funtf(&["naimark", s(&p)]));
    assert_eq!(out["d"], 1);
}

#[test]
fn fullspark_experiment_small() {
    for field in ["real", "complex"] {
        let out = funtf(&[
            "experiment-fullspark",
            "5",
            "2",
            "--trials",
            "200",
            "--seed",
            "1",
            "--field",
            field,
        ]);
        assert_eq!(code(&out), 0);
        assert_eq!(stdout_json(&out)["ratio"], 1.0);
    }
}
