use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn carpetlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_carpetlab"))
        .args(args)
        // keep the checked-in baselines out of these runs
        .env("CARPETLAB_BASELINES", "/nonexistent")
        .output()
        .expect("binary runs")
}

fn json_of(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.push("--json");
    let out = carpetlab(&all);
    let doc = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), doc)
}

#[test]
fn gen_examples() {
    let (code, doc) = json_of(&["gen", "--p", "3", "--generation", "2"]);
    assert_eq!(code, 0);
    assert_eq!(doc["circle_count"], 10);
    assert_eq!(doc["circles"].as_array().unwrap().len(), 10);

    let (code, doc) = json_of(&["gen", "--p", "5", "--generation", "1"]);
    assert_eq!(code, 0);
    let m = doc["circles"].as_array().unwrap().iter().find(|c| c["tag"] == "M").unwrap();
    assert_eq!(m["corner"], serde_json::json!([[2, 5], [2, 5]]));
    assert_eq!(m["side"], serde_json::json!([1, 5]));

    assert_eq!(carpetlab(&["gen", "--p", "4"]).status.code(), Some(4));
}

#[test]
fn parameter_errors_exit_four() {
    assert_eq!(carpetlab(&["modulus", "--pair", "M", "Q"]).status.code(), Some(4));
    assert_eq!(carpetlab(&["lemma51", "--gen", "1", "--m", "1"]).status.code(), Some(4));
    assert_eq!(carpetlab(&["modulus", "--family", "rect", "--tol-feas", "2"]).status.code(), Some(4));
    assert_eq!(carpetlab(&["dimensions", "--p", "6"]).status.code(), Some(4));
}

#[test]
fn non_convergence_exits_three() {
    let (code, doc) = json_of(&["modulus", "--m", "3", "--max-iterations", "1"]);
    assert_eq!(code, 3);
    assert_eq!(doc["status"], "iteration_limit");
}

#[test]
fn false_verdict_exits_two() {
    let (code, doc) = json_of(&["lemma74", "--rows", "9", "--min-length", "2"]);
    assert_eq!(code, 2);
    assert_eq!(doc["holds"], false);
}

#[test]
fn empty_oracle_suite() {
    let (code, doc) = json_of(&["oracle-suite", "--count", "0"]);
    assert_eq!(code, 0);
    assert_eq!(doc["count"], 0);
    assert_eq!(doc["agreed"], 0);
    assert_eq!(doc["passed"], true);
    assert_eq!(doc["fixture"]["flagged"], true);
}

#[test]
fn output_is_byte_identical_and_written_once() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let a = carpetlab(&["oracle-suite", "--count", "10", "--seed", "3", "--json"]);
    let b = carpetlab(&["oracle-suite", "--count", "10", "--seed", "3", "--json", "--out", out]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let file = std::fs::read(dir.path().join("oracle_suite_s3_n10.json")).unwrap();
    assert_eq!(file, a.stdout);
    let c = carpetlab(&["modulus", "--m", "2", "--gen", "2", "--json"]);
    let d = carpetlab(&["modulus", "--m", "2", "--gen", "2", "--json"]);
    assert_eq!(c.stdout, d.stdout);
    // every float carries 17 significant digits and round-trips
    let text = String::from_utf8(c.stdout).unwrap();
    let floats: Vec<&str> = text
        .split(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '.' || ch == '-'))
        .filter(|t| t.contains('.') && t.contains('e') && t.parse::<f64>().is_ok())
        .collect();
    assert!(floats.len() > 10);
    for t in floats {
        let mantissa = t.trim_start_matches('-').split('e').next().unwrap();
        assert_eq!(mantissa.len(), 18, "{t}");
        assert_eq!(format!("{:.16e}", t.parse::<f64>().unwrap()), t);
    }
}

#[test]
fn baseline_drift_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let pinned = dir.path().join("b.json");
    let args = ["modulus", "--family", "rect", "--resolution", "16"];
    let mut pin = args.to_vec();
    pin.extend(["--pin", pinned.to_str().unwrap()]);
    assert_eq!(carpetlab(&pin).status.code(), Some(0));

    let mut check = args.to_vec();
    check.extend(["--baseline", pinned.to_str().unwrap()]);
    assert_eq!(carpetlab(&check).status.code(), Some(0));

    let mut b: Value = serde_json::from_str(&std::fs::read_to_string(&pinned).unwrap()).unwrap();
    let v = b["checks"][0]["expected"].as_f64().unwrap();
    b["checks"][0]["expected"] = serde_json::json!(v * 1.01);
    let moved = dir.path().join("moved.json");
    std::fs::write(&moved, b.to_string()).unwrap();
    let mut check = args.to_vec();
    check.extend(["--baseline", moved.to_str().unwrap(), "--json"]);
    let out = carpetlab(&check);
    assert_eq!(out.status.code(), Some(2));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["baseline"]["drift"].as_array().unwrap().len(), 1);

    let mut other = vec!["gen", "--baseline", pinned.to_str().unwrap()];
    other.push("--json");
    assert_eq!(carpetlab(&other).status.code(), Some(4));
}

#[test]
fn checked_in_baselines_are_picked_up() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("baselines");
    let out = Command::new(env!("CARGO_BIN_EXE_carpetlab"))
        .args(["orbits", "--json"])
        .env("CARPETLAB_BASELINES", &dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["baseline"]["drift"], serde_json::json!([]));
    // other parameters: the baseline does not apply
    let (_, doc) = json_of(&["orbits", "--gen", "3"]);
    assert!(doc.get("baseline").is_none());
}

/// `(id, x, y, width, height)` of every `<rect id="circle-N" …/>`.
fn circle_rects(svg: &str) -> Vec<(usize, f64, f64, f64, f64)> {
    let attr = |tag: &str, name: &str| -> String {
        let start = tag.find(&format!(" {name}=\"")).unwrap() + name.len() + 3;
        tag[start..].split('"').next().unwrap().to_string()
    };
    svg.lines()
        .filter(|l| l.starts_with("<rect") && l.contains("id=\"circle-"))
        .map(|l| {
            let id = attr(l, "id").trim_start_matches("circle-").parse().unwrap();
            let f = |n| attr(l, n).parse::<f64>().unwrap();
            (id, f("x"), f("y"), f("width"), f("height"))
        })
        .collect()
}

fn assert_well_formed(svg: &str) {
    assert!(svg.starts_with("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg "));
    assert!(svg.contains("version=\"1.1\""));
    assert!(svg.trim_end().ends_with("</svg>"));
    for line in svg.lines().skip(2) {
        if line != "</svg>" {
            assert!(line.starts_with('<') && line.ends_with("/>"), "{line}");
            assert_eq!(line.matches('"').count() % 2, 0);
        }
    }
}

#[test]
fn svg_squares_sit_on_the_exact_geometry() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let code = carpetlab(&["render", "--what", "carpet", "--p", "3", "--gen", "3", "--canvas", "729", "--out", out]);
    assert_eq!(code.status.code(), Some(0));
    let svg = std::fs::read_to_string(dir.path().join("carpet_p3_g3_unit.svg")).unwrap();
    assert_well_formed(&svg);
    let (_, doc) = json_of(&["gen", "--p", "3", "--gen", "3"]);
    let circles = doc["circles"].as_array().unwrap();
    let rects = circle_rects(&svg);
    // everything but the outer square is drawn as a filled rectangle
    assert_eq!(rects.len(), circles.len() - 1);
    for (id, x, y, w, h) in rects {
        let c = &circles[id];
        // 729 = 3^6 makes every corner an integer pixel
        let px = |v: &Value| 729 * v[0].as_i64().unwrap() / v[1].as_i64().unwrap();
        let (cx, cy, s) = (px(&c["corner"][0]), px(&c["corner"][1]), px(&c["side"]));
        assert_eq!(x, (10 + cx) as f64);
        assert_eq!(y, (10 + 729 - cy - s) as f64);
        assert_eq!((w, h), (s as f64, s as f64));
    }
}

#[test]
fn modulus_render_writes_all_views() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let run = carpetlab(&["modulus", "--gen", "2", "--m", "2", "--render", "--out", out]);
    assert_eq!(run.status.code(), Some(0));
    let mut names: Vec<String> =
        std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(
        names,
        [
            "modulus_connect_1_0_p3_r2.json",
            "modulus_connect_1_0_p3_r2_heat.svg",
            "modulus_connect_1_0_p3_r2_sides.svg",
            "modulus_connect_1_0_p3_r2_witness.svg",
        ]
    );
    for n in names.iter().filter(|n| n.ends_with(".svg")) {
        assert_well_formed(&std::fs::read_to_string(dir.path().join(n)).unwrap());
    }
}
