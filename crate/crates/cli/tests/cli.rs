use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn abelquad(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_abelquad"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stderr));
    })
}

fn generate(dir: &Path, shape: &str, size: usize) -> PathBuf {
    let p = dir.join(format!("{shape}{size}.obj"));
    let out = abelquad(&[
        "generate",
        shape,
        "--size",
        &size.to_string(),
        "--out",
        p.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    p
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn report_corpus() {
    let dir = TempDir::new().unwrap();
    for (shape, size, genus, degree) in
        [("cube", 1, 0, -8), ("torus", 8, 1, 0), ("origami", 3, 2, 8)]
    {
        let p = generate(dir.path(), shape, size);
        let out = abelquad(&["report", s(&p)]);
        assert_eq!(code(&out), 0);
        let r = json(&out);
        assert_eq!(r["genus"], genus);
        assert_eq!(r["divisor_degree"], degree);
        assert_eq!(r["gauss_bonnet"]["ok"], true);
    }
    let cube = generate(dir.path(), "cube", 1);
    assert_eq!(json(&abelquad(&["report", s(&cube)]))["chi"], 2);
}

#[test]
fn verify_exit_codes() {
    let dir = TempDir::new().unwrap();
    let torus = generate(dir.path(), "torus", 16);
    let out = abelquad(&["verify", s(&torus)]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["verdict"], true);

    // vertex (3, 5) of the 16 x 16 grid
    let pq = write(
        dir.path(),
        "pq.json",
        r#"{"entries":[{"vertex":0,"order":1},{"vertex":83,"order":-1}]}"#,
    );
    let out = abelquad(&["verify", s(&torus), "--divisor", s(&pq)]);
    assert_eq!(code(&out), 1);
    let r = json(&out);
    assert_eq!(r["verdict"], false);
    assert!(r["max_residual"].as_f64().unwrap() >= 3.0 / 16.0 - 1e-6);

    let g2 = generate(dir.path(), "origami", 24);
    let out = abelquad(&["verify", s(&g2)]);
    assert_eq!(code(&out), 0);
    assert!(json(&out)["max_residual"].as_f64().unwrap() < 1e-3);
}

#[test]
fn verify_rejects_bad_input() {
    let dir = TempDir::new().unwrap();
    let torus = generate(dir.path(), "torus", 8);
    let garbage = write(dir.path(), "bad.obj", "v 0 0 0\nf 1 2 3\n");
    let bad_divisor = write(dir.path(), "d.json", "{\"entries\": 3}");
    let disk = generate(dir.path(), "disk", 4);
    for args in [
        vec!["verify", s(&garbage)],
        vec!["verify", s(&torus), "--tolerance", "0.5"],
        vec!["verify", s(&torus), "--omega-index", "1"],
        vec!["verify", s(&torus), "--divisor", s(&bad_divisor)],
        vec!["verify", s(&torus), "--solver", "magic"],
        vec!["verify", s(&disk)],
        vec!["verify"],
    ] {
        let out = abelquad(&args);
        assert_eq!(code(&out), 2, "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let g2 = generate(dir.path(), "origami", 6);
    let a = abelquad(&["verify", s(&g2)]);
    let b = abelquad(&["verify", s(&g2)]);
    assert_eq!(a.stdout, b.stdout);
    let out = dir.path().join("r.json");
    abelquad(&["verify", s(&g2), "--out", s(&out)]);
    assert_eq!(std::fs::read(&out).unwrap(), a.stdout);
}

#[test]
fn batch_is_ordered_by_name() {
    let dir = TempDir::new().unwrap();
    let batch = dir.path().join("batch");
    std::fs::create_dir(&batch).unwrap();
    generate(&batch, "torus", 8);
    generate(&batch, "origami", 24);
    generate(&batch, "cube", 1);
    let out = abelquad(&["verify", "--batch", s(&batch)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out);
    let names: Vec<&str> = r
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["file"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["cube1.obj", "origami24.obj", "torus8.obj"]);
    // genus zero passes the degree precheck only
    assert_eq!(r[0]["report"]["verdict"], true);

    write(&batch, "broken.obj", "f 1 2 3\n");
    let out = abelquad(&["verify", "--batch", s(&batch)]);
    assert_eq!(code(&out), 2);
    assert!(json(&out)[0]["error"].is_string());
}

#[test]
fn quartic_single_pole() {
    let dir = TempDir::new().unwrap();
    let disk = generate(dir.path(), "disk", 30);
    let pole = write(
        dir.path(),
        "pole.json",
        r#"{"poles":[{"re":0.0,"im":0.0}]}"#,
    );
    let obj = dir.path().join("uv.obj");
    let out = abelquad(&[
        "quartic",
        s(&disk),
        "--singular",
        s(&pole),
        "--out",
        s(&obj),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out);
    assert_eq!(r["branch_tears"], 0);
    let measured = r["cones"][0]["measured"].as_f64().unwrap();
    assert!((measured - 1.5 * PI).abs() < 0.02 * 1.5 * PI);
    assert!(std::fs::read_to_string(&obj).unwrap().contains("\nvt "));
}

#[test]
fn quartic_identity_on_rectangle() {
    let dir = TempDir::new().unwrap();
    let rect = generate(dir.path(), "rectangle", 5);
    let obj = dir.path().join("uv.obj");
    let summary = dir.path().join("s.json");
    let out = abelquad(&[
        "quartic",
        s(&rect),
        "--out",
        s(&obj),
        "--summary",
        s(&summary),
        "--checker-scale",
        "1",
    ]);
    assert_eq!(code(&out), 0);
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(r["cut_edges"], 0);
    let text = std::fs::read_to_string(&obj).unwrap();
    let vt = text.lines().filter(|l| l.starts_with("vt ")).count();
    assert_eq!(vt, 4 * 25);
}

#[test]
fn quartic_face_configuration() {
    let dir = TempDir::new().unwrap();
    let disk = generate(dir.path(), "disk", 40);
    let config = write(
        dir.path(),
        "t2.json",
        r#"{"zeros":[{"re":0.250598,"im":0.471244,"mult":1},{"re":0.747474,"im":0.28336,"mult":1}],
            "poles":[{"re":0.451559,"im":0.21962},{"re":0.45696,"im":0.617636},
                     {"re":0.706853,"im":0.52086},{"re":0.533522,"im":0.407822}]}"#,
    );
    let obj = dir.path().join("uv.obj");
    let out = abelquad(&[
        "quartic",
        s(&disk),
        "--singular",
        s(&config),
        "--out",
        s(&obj),
    ]);
    assert_eq!(code(&out), 0);
    let r = json(&out);
    assert_eq!(r["cones"].as_array().unwrap().len(), 6);
    assert!(r["max_transition_error_deg"].as_f64().unwrap() < 1.0);
}

#[test]
fn quartic_rejects_bad_configurations() {
    let dir = TempDir::new().unwrap();
    let sphere = generate(dir.path(), "icosphere", 3);
    let disk = generate(dir.path(), "disk", 10);
    let obj = dir.path().join("uv.obj");
    // a single pole leaves infinity singular on the sphere
    let pole = write(
        dir.path(),
        "pole.json",
        r#"{"poles":[{"re":0.1,"im":0.2}]}"#,
    );
    let clash = write(
        dir.path(),
        "clash.json",
        r#"{"zeros":[{"re":0.1,"im":0.2}],"poles":[{"re":0.1,"im":0.2}]}"#,
    );
    let torus = generate(dir.path(), "torus", 6);
    for args in [
        vec![
            "quartic",
            s(&sphere),
            "--singular",
            s(&pole),
            "--out",
            s(&obj),
        ],
        vec![
            "quartic",
            s(&disk),
            "--singular",
            s(&clash),
            "--out",
            s(&obj),
        ],
        vec!["quartic", s(&torus), "--out", s(&obj)],
        vec![
            "quartic",
            s(&disk),
            "--out",
            s(&obj),
            "--quadrature",
            "simpson",
        ],
    ] {
        assert_eq!(code(&abelquad(&args)), 2, "{args:?}");
    }
}
