use std::path::Path;
use std::process::{Command, Output};

use ringmark::io::write_image;
use ringmark::synth;

const PAYLOAD: &str = "101100111000101011010011";

fn ringmark(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ringmark")).args(args).output().expect("binary runs")
}

fn report(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn write_cover(dir: &Path, name: &str, seed: u64) -> String {
    let p = dir.join(name);
    write_image(&p, &synth::photo(320, 240, seed)).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn embed_then_detect_with_original_is_present() {
    let dir = tempfile::tempdir().unwrap();
    let cover = write_cover(dir.path(), "cover.png", 3);
    let marked = dir.path().join("marked.png");
    let out = ringmark(&["embed", "--cover", &cover, "--payload", PAYLOAD, "--out", marked.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let rep = dir.path().join("report.json");
    let out = ringmark(&[
        "detect",
        "--photo",
        marked.to_str().unwrap(),
        "--original",
        &cover,
        "--payload",
        PAYLOAD,
        "--out",
        rep.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&rep);
    assert_eq!(r["mode"], "nonblind");
    assert_eq!(r["present"], true);
    assert!(r["similarity"].as_f64().unwrap() > r["threshold"].as_f64().unwrap());

    // blind path recovers the bits from the marked file alone
    let out = ringmark(&["detect", "--photo", marked.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["present"], true);
    assert_eq!(r["decoded_bits"], PAYLOAD);
}

#[test]
fn unwatermarked_photo_is_absent_with_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let photo = write_cover(dir.path(), "plain.png", 11);
    let rep = dir.path().join("report.json");
    let out = ringmark(&["detect", "--photo", &photo, "--out", rep.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(report(&rep)["present"], false);

    let other = write_cover(dir.path(), "other.png", 12);
    let out = ringmark(&["detect", "--photo", &photo, "--original", &other, "--payload", PAYLOAD, "--out", rep.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&rep)["present"], false);
}

#[test]
fn bench_with_missing_corpus_is_usage_error_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out_csv = dir.path().join("table.csv");
    let missing = dir.path().join("nope");
    let out = ringmark(&[
        "bench",
        "--corpus",
        missing.to_str().unwrap(),
        "--payload",
        PAYLOAD,
        "--chain",
        "rotate:5",
        "--out",
        out_csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out_csv.exists());
    assert!(!out_csv.with_extension("json").exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn usage_and_processing_errors_have_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(ringmark(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(ringmark(&["embed", "--cover", "missing.png", "--payload", PAYLOAD, "--out", "x.png"]).status.code(), Some(1));
    let photo = write_cover(dir.path(), "p.png", 5);
    let bad = ringmark(&["attack", "--photo", &photo, "--chain", "rotate:90", "--out", "y.png"]);
    assert_eq!(bad.status.code(), Some(1));

    // a gray cover reaches the embedder and fails there
    let gray = dir.path().join("g.pgm");
    write_image(&gray, &synth::photo(64, 48, 1).luminance().to_image()).unwrap();
    let out_path = dir.path().join("o.png");
    let out = ringmark(&["embed", "--cover", gray.to_str().unwrap(), "--payload", PAYLOAD, "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("ShapeError"));
    assert!(!out_path.exists());
}

#[test]
fn commands_are_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cover = write_cover(dir.path(), "c.png", 8);
    let run = |name: &str| {
        let p = dir.path().join(name);
        let out = ringmark(&["--seed", "4", "attack", "--photo", &cover, "--chain", "scratch:0.1,2;printscan:1,0.01,1.1", "--out", p.to_str().unwrap()]);
        assert!(out.status.success());
        std::fs::read(p).unwrap()
    };
    assert_eq!(run("a.png"), run("b.png"));

    let table = |name: &str| {
        let p = dir.path().join(name);
        let out = ringmark(&["--seed", "2", "bench", "--corpus", "synthetic:2", "--payload", PAYLOAD, "--chain", "rotate:5", "--out", p.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        (std::fs::read(&p).unwrap(), std::fs::read(p.with_extension("json")).unwrap())
    };
    let (csv, json) = table("t1.csv");
    assert_eq!((csv.clone(), json), table("t2.csv"));
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("image,chain,present,ber,similarity,snr_db"));
    assert_eq!(text.lines().count(), 1 + 2 * 2);
}

#[test]
fn pattern_capture_mask_and_clear_background() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n).to_string_lossy().into_owned();
    write_image(Path::new(&p("scene.png")), &synth::disk_scene(320, 240, 70.0, 2)).unwrap();
    let steps: [&[&str]; 4] = [
        &["gen-pattern", "--payload", PAYLOAD, "--width", "320", "--height", "240", "--out", &p("pattern.png")],
        &["capture", "--scene", &p("scene.png"), "--pattern", &p("pattern.png"), "--out", &p("photo.png")],
        &["mask", "--photo", &p("photo.png"), "--out", &p("mask.png")],
        &["clear-bg", "--photo", &p("photo.png"), "--mask", &p("mask.png"), "--out", &p("clean.png")],
    ];
    for args in steps {
        let out = ringmark(args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    assert!(Path::new(&p("clean.png")).exists());

    let cal = p("cal.json");
    let out = ringmark(&["calibrate", "--far", "0.01", "--trials", "200", "--out", &cal]);
    assert!(out.status.success());
    let c = report(Path::new(&cal));
    assert!(c["threshold"].as_f64().unwrap() > 0.0);
    assert_eq!(ringmark(&["calibrate", "--far", "0.001", "--trials", "10", "--out", &cal]).status.code(), Some(2));
}
