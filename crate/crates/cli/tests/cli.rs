use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sketchlayout_core::BinaryImage;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sketchlayout"))
}

/// Axis-aligned rectangle outline with an 8 px stroke.
fn rectangle_png(dir: &Path) -> PathBuf {
    let mut img = BinaryImage::new(256, 256).unwrap();
    for y in 0..256u32 {
        for x in 0..256u32 {
            let near_h = (y.abs_diff(64) <= 4 || y.abs_diff(192) <= 4) && (44..=212).contains(&x);
            let near_v = (x.abs_diff(48) <= 4 || x.abs_diff(208) <= 4) && (60..=196).contains(&y);
            if near_h || near_v {
                img.set(x, y, true);
            }
        }
    }
    let path = dir.join("rect.png");
    fs::write(&path, img.to_png().unwrap()).unwrap();
    path
}

fn blank_png(dir: &Path) -> PathBuf {
    let path = dir.join("blank.png");
    fs::write(&path, BinaryImage::new(32, 32).unwrap().to_png().unwrap()).unwrap();
    path
}

fn cycle_graph(dir: &Path, n: usize) -> PathBuf {
    let nodes: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
    let edges: Vec<[String; 2]> = (0..n).map(|i| [nodes[i].clone(), nodes[(i + 1) % n].clone()]).collect();
    let path = dir.join("graph.json");
    fs::write(&path, serde_json::json!({"nodes": nodes, "edges": edges}).to_string()).unwrap();
    path
}

fn run(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("binary runs");
    if !out.status.success() {
        eprintln!("{}", String::from_utf8_lossy(&out.stderr));
    }
    out
}

#[test]
fn full_layout_writes_every_artifact() {
    let dir = TempDir::new().unwrap();
    let (graph, sketch) = (cycle_graph(dir.path(), 16), rectangle_png(dir.path()));
    let out = run(bin()
        .arg("--graph").arg(&graph)
        .arg("--sketch").arg(&sketch)
        .arg("--out").arg(dir.path().join("layout.json"))
        .arg("--svg").arg(dir.path().join("layout.svg"))
        .arg("--dump-chain").arg(dir.path().join("chain.json"))
        .arg("--dump-constraints").arg(dir.path().join("constraints.json"))
        .args(["--iterations", "200"]));
    assert!(out.status.success());

    let layout: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("layout.json")).unwrap()).unwrap();
    let positions = layout["positions"].as_object().unwrap();
    assert_eq!(positions.len(), 16);
    assert!(positions.values().all(|p| p[0].as_f64().unwrap().is_finite()));

    let chain: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("chain.json")).unwrap()).unwrap();
    assert_eq!(chain["closed"], true);

    let cs: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("constraints.json")).unwrap()).unwrap();
    assert!(!cs["relativePlacement"].as_array().unwrap().is_empty());

    let svg = fs::read_to_string(dir.path().join("layout.svg")).unwrap();
    assert_eq!(svg.matches("<circle").count(), 16);
}

#[test]
fn layout_goes_to_stdout_by_default() {
    let dir = TempDir::new().unwrap();
    let out = run(bin()
        .arg("--graph").arg(cycle_graph(dir.path(), 6))
        .arg("--sketch").arg(rectangle_png(dir.path()))
        .args(["--iterations", "50"]));
    assert!(out.status.success());
    let layout: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(layout["positions"].as_object().unwrap().len(), 6);
}

#[test]
fn blank_sketch_warns_but_succeeds() {
    let dir = TempDir::new().unwrap();
    let out = run(bin()
        .arg("--graph").arg(cycle_graph(dir.path(), 5))
        .arg("--sketch").arg(blank_png(dir.path()))
        .args(["--iterations", "20"]));
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn same_seed_same_bytes() {
    let dir = TempDir::new().unwrap();
    let (graph, sketch) = (cycle_graph(dir.path(), 12), rectangle_png(dir.path()));
    let once = || {
        run(bin().arg("--graph").arg(&graph).arg("--sketch").arg(&sketch).args(["--seed", "7", "--iterations", "100"]))
            .stdout
    };
    assert_eq!(once(), once());
}

#[test]
fn incremental_mode_keeps_unselected_nodes() {
    let dir = TempDir::new().unwrap();
    let (graph, sketch) = (cycle_graph(dir.path(), 12), rectangle_png(dir.path()));
    let prior_path = dir.path().join("prior.json");
    assert!(run(bin().arg("--graph").arg(&graph).arg("--sketch").arg(&sketch).arg("--out").arg(&prior_path))
        .status
        .success());

    let out = run(bin()
        .arg("--graph").arg(&graph)
        .arg("--sketch").arg(&sketch)
        .args(["--select", "n0,n1,n2,n3,n4"])
        .arg("--prior").arg(&prior_path));
    assert!(out.status.success());
    let prior: Value = serde_json::from_str(&fs::read_to_string(&prior_path).unwrap()).unwrap();
    let next: Value = serde_json::from_slice(&out.stdout).unwrap();
    for i in 5..12 {
        let id = format!("n{i}");
        assert_eq!(prior["positions"][&id], next["positions"][&id]);
    }
}

#[test]
fn select_requires_prior() {
    let dir = TempDir::new().unwrap();
    let out = bin()
        .arg("--graph").arg(cycle_graph(dir.path(), 4))
        .arg("--sketch").arg(blank_png(dir.path()))
        .args(["--select", "n0"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn unknown_selected_node_fails() {
    let dir = TempDir::new().unwrap();
    let graph = cycle_graph(dir.path(), 4);
    let sketch = blank_png(dir.path());
    let prior = dir.path().join("prior.json");
    fs::write(&prior, r#"{"positions": {"n0": [0, 0], "n1": [1, 0], "n2": [1, 1], "n3": [0, 1]}}"#).unwrap();
    let out = bin()
        .arg("--graph").arg(&graph)
        .arg("--sketch").arg(&sketch)
        .args(["--select", "zz"])
        .arg("--prior").arg(&prior)
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("zz"));
}

#[test]
fn missing_or_bad_inputs_fail() {
    let dir = TempDir::new().unwrap();
    let missing = bin().arg("--graph").arg(dir.path().join("nope.json")).arg("--sketch").arg(blank_png(dir.path())).output().unwrap();
    assert!(!missing.status.success());

    let bad_graph = dir.path().join("bad.json");
    fs::write(&bad_graph, r#"{"nodes": ["a"], "edges": [["a", "b"]]}"#).unwrap();
    let out = bin().arg("--graph").arg(&bad_graph).arg("--sketch").arg(blank_png(dir.path())).output().unwrap();
    assert!(!out.status.success());

    let not_png = dir.path().join("sketch.png");
    fs::write(&not_png, b"definitely not an image").unwrap();
    let out = bin().arg("--graph").arg(cycle_graph(dir.path(), 3)).arg("--sketch").arg(&not_png).output().unwrap();
    assert!(!out.status.success());

    let out = bin()
        .arg("--graph").arg(cycle_graph(dir.path(), 3))
        .arg("--sketch").arg(blank_png(dir.path()))
        .args(["--epsilon", "0"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn edge_list_input_is_accepted() {
    let dir = TempDir::new().unwrap();
    let graph = dir.path().join("g.txt");
    fs::write(&graph, "# ring\na b\nb c\nc d\nd a\n").unwrap();
    let out = run(bin().arg("--graph").arg(&graph).arg("--sketch").arg(rectangle_png(dir.path())).args(["--iterations", "50"]));
    assert!(out.status.success());
    let layout: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(layout["positions"].as_object().unwrap().keys().collect::<Vec<_>>(), ["a", "b", "c", "d"]);
}
