mod common;

use std::path::Path;

use common::{fixture, run, validate};
use requant::dump;
use requant::io::{read_gray_png, write_gray_png};
use requant_core::codec::{compress_pixels, decompress_plane};
use requant_core::corpus::{synthesize, Texture};
use requant_core::{quality_to_qmatrix, Grid};
use rand::SeedableRng;
use serde_json::Value;

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap_or_else(|e| panic!("{e}: {text}"))
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn inspect_reports_quality_and_sampling() {
    let (code, out, _) = run(&["inspect", arg(&fixture("gray_q80.jpg"))]);
    assert_eq!(code, 0);
    let v = json(&out);
    validate("inspect.schema.json", &v);
    assert_eq!(v["estimated_qf"], 80);
    assert_eq!(v["sampling"], "gray");
    assert_eq!((v["width"].as_u64(), v["height"].as_u64()), (Some(40), Some(24)));

    let (code, out, _) = run(&["inspect", arg(&fixture("sweep_q053_420_40x32.jpg"))]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)["sampling"], "4:2:0");
}

#[test]
fn non_jpeg_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("junk.jpg");
    std::fs::write(&p, b"definitely not a jpeg").unwrap();
    let (code, out, err) = run(&["inspect", arg(&p)]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.contains("error:"), "{err}");
}

#[test]
fn missing_input_exits_3_and_bad_flags_exit_1() {
    assert_eq!(run(&["inspect", "/nonexistent/x.jpg"]).0, 3);
    let g = fixture("gray_q80.jpg");
    assert_eq!(run(&["analyze", "--k", "0", arg(&g)]).0, 1);
    assert_eq!(run(&["analyze", "--k", "17", arg(&g)]).0, 1);
    assert_eq!(run(&["histogram", "--pos", "8,0", arg(&g)]).0, 1);
    assert_eq!(run(&["bogus"]).0, 1);
}

#[test]
fn analyze_flat_gray_gives_zero_score() {
    let dir = tempfile::tempdir().unwrap();
    let src = fixture("gray_mid_8x8_q75.jpg");
    let (code, out, _) = run(&["analyze", "--out-dir", arg(dir.path()), arg(&src)]);
    assert_eq!(code, 0);
    let v = json(&out);
    validate("analysis_report.schema.json", &v);
    assert_eq!(v["image_score"], 0.0);
    assert_eq!(v["per_step_change_counts"].as_array().unwrap().len(), 7);

    let heat = read_gray_png(&dir.path().join("gray_mid_8x8_q75.heatmap.png")).unwrap();
    assert!(heat.iter().all(|&p| p == 0));
    let mask = read_gray_png(&dir.path().join("gray_mid_8x8_q75.mask.png")).unwrap();
    assert!(mask.iter().all(|&p| p == 0));
    let on_disk = json(&std::fs::read_to_string(dir.path().join("gray_mid_8x8_q75.report.json")).unwrap());
    assert_eq!(on_disk["image_score"], 0.0);
}

#[test]
fn analyze_k1_reports_one_step() {
    let (code, out, _) = run(&["analyze", "--k", "1", "--no-timing", arg(&fixture("photo_16x16_q75.jpg"))]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["per_step_change_counts"].as_array().unwrap().len(), 1);
    assert_eq!(v["timing_ms"], 0);
    assert_eq!(v["k"], 1);
}

#[test]
fn analyze_several_inputs_prints_array_in_order() {
    let a = fixture("gray_q80.jpg");
    let b = fixture("low_q10.jpg");
    let (code, out, _) = run(&["--jobs", "2", "analyze", arg(&a), arg(&b)]);
    assert_eq!(code, 0);
    let v = json(&out);
    let items = v.as_array().unwrap();
    assert_eq!(items.len(), 2);
    assert!(items[0]["source"].as_str().unwrap().ends_with("gray_q80.jpg"));
    assert!(items[1]["source"].as_str().unwrap().ends_with("low_q10.jpg"));
    for item in items {
        validate("analysis_report.schema.json", item);
    }
}

#[test]
fn analyzed_splice_overlaps_ground_truth() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    let (code, _, _) = run(&[
        "simulate", "--n", "3", "--qf-min", "70", "--qf-max", "85", "--seed", "11",
        "--max-splice", "0.05", "--out-dir", arg(&corpus),
    ]);
    assert_eq!(code, 0);
    let out_dir = dir.path().join("pred");
    for i in 0..3 {
        let coef = corpus.join(format!("tampered_{i:04}.coef"));
        let (code, _, err) = run(&["analyze", "--out-dir", arg(&out_dir), arg(&coef)]);
        assert_eq!(code, 0, "{err}");
        let mask = read_gray_png(&out_dir.join(format!("tampered_{i:04}.mask.png"))).unwrap();
        let gt = read_gray_png(&corpus.join(format!("tampered_{i:04}.mask.png"))).unwrap();
        let overlap = mask.iter().zip(gt.iter()).filter(|(&m, &g)| m == 255 && g == 255).count();
        assert!(overlap > 0, "image {i}: predicted mask misses the splice");
    }
}

#[test]
fn histogram_rows_and_zero_plane() {
    let (code, out, _) = run(&["histogram", "--pos", "0,1", "--t", "20", arg(&fixture("gray_q80.jpg"))]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "value,count");
    assert_eq!(lines.len(), 42);
    assert!(lines[1].starts_with("-20,"));
    assert!(lines[41].starts_with("20,"));

    let dir = tempfile::tempdir().unwrap();
    let zero = dir.path().join("zero.coef");
    let plane = requant_core::CoefficientPlane::zeros(3, 2, quality_to_qmatrix(75).unwrap());
    std::fs::write(&zero, dump::write(&plane, 24, 16)).unwrap();
    let out_csv = dir.path().join("h.csv");
    let (code, out, _) = run(&["histogram", "--out", arg(&out_csv), arg(&zero)]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let text = std::fs::read_to_string(&out_csv).unwrap();
    let nonzero: Vec<&str> = text.lines().skip(1).filter(|l| !l.ends_with(",0")).collect();
    assert_eq!(nonzero, ["0,6"]);
}

fn interior_gaps(csv: &str) -> usize {
    let counts: Vec<u64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    let first = counts.iter().position(|&c| c > 0).unwrap();
    let last = counts.iter().rposition(|&c| c > 0).unwrap();
    counts[first..=last].iter().filter(|&&c| c == 0).count()
}

#[test]
fn histogram_shows_gaps_after_requantization() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let pixels = synthesize(&mut rng, 256, 256, Texture::Smooth);
    let q60 = quality_to_qmatrix(60).unwrap();
    let q90 = quality_to_qmatrix(90).unwrap();
    let single = compress_pixels(&pixels, &q90).unwrap();
    let double = compress_pixels(&decompress_plane(&compress_pixels(&pixels, &q60).unwrap()), &q90).unwrap();

    let mut gaps = Vec::new();
    for (name, plane) in [("single", &single), ("double", &double)] {
        let p = dir.path().join(format!("{name}.coef"));
        std::fs::write(&p, dump::write(plane, 256, 256)).unwrap();
        let (code, out, _) = run(&["histogram", "--pos", "0,1", arg(&p)]);
        assert_eq!(code, 0);
        gaps.push(interior_gaps(&out));
    }
    assert!(gaps[1] > gaps[0], "single {} vs double {}", gaps[0], gaps[1]);
}

fn read_manifest_text(dir: &Path) -> String {
    std::fs::read_to_string(dir.join("manifest.csv")).unwrap()
}

#[test]
fn simulate_is_seeded_and_bounded() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let (code, out, err) = run(&[
            "simulate", "--n", "20", "--qf-min", "60", "--qf-max", "70", "--seed", "5",
            "--width", "64", "--height", "64", "--max-splice", "0.05", "--out-dir", arg(d),
        ]);
        assert_eq!(code, 0, "{err}");
        assert_eq!(out.trim_end(), d.join("manifest.csv").display().to_string());
        assert!(err.contains("wrote 40 entries"));
    }
    let text = read_manifest_text(&a);
    assert_eq!(text, read_manifest_text(&b));

    let rows = requant::corpus::read_manifest(&a.join("manifest.csv")).unwrap();
    assert_eq!(rows.iter().filter(|r| r.label == "tampered").count(), 20);
    assert_eq!(rows.iter().filter(|r| r.label == "authentic").count(), 20);
    for r in &rows {
        assert!((60..=70).contains(&r.qf), "{} qf {}", r.id, r.qf);
        let v = serde_json::to_value(r).unwrap();
        validate("manifest.schema.json", &v);
        for rel in [&r.coeff_path, &r.mask_path] {
            assert_eq!(std::fs::read(a.join(rel)).unwrap(), std::fs::read(b.join(rel)).unwrap());
        }
    }
}

#[test]
fn simulate_rejects_bad_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = run(&["simulate", "--qf-min", "90", "--qf-max", "80", "--out-dir", arg(dir.path())]);
    assert_eq!(code, 1);
    let (code, _, _) = run(&["simulate", "--qf-min", "20", "--out-dir", arg(dir.path())]);
    assert_eq!(code, 1);
}

fn small_corpus(dir: &Path) -> std::path::PathBuf {
    let corpus = dir.join("corpus");
    let (code, _, err) = run(&[
        "simulate", "--n", "4", "--seed", "9", "--qf-min", "60", "--qf-max", "90",
        "--width", "64", "--height", "64", "--max-splice", "0.05", "--out-dir", arg(&corpus),
    ]);
    assert_eq!(code, 0, "{err}");
    corpus.join("manifest.csv")
}

#[test]
fn evaluate_perfect_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = small_corpus(dir.path());
    let pred = dir.path().join("pred");
    std::fs::create_dir_all(&pred).unwrap();
    for r in requant::corpus::read_manifest(&manifest).unwrap() {
        let gt = read_gray_png(&manifest.parent().unwrap().join(&r.mask_path)).unwrap();
        // authentic rows get a single hot pixel so the image score separates classes
        let heat = if r.is_tampered() {
            gt
        } else {
            let mut g = Grid::filled(gt.width(), gt.height(), 0u8);
            g.as_mut_slice()[0] = 100;
            g
        };
        write_gray_png(&pred.join(format!("{}.heatmap.png", r.id)), &heat).unwrap();
    }
    let report_path = dir.path().join("report.json");
    let (code, out, err) = run(&[
        "evaluate", "--manifest", arg(&manifest), "--pred-dir", arg(&pred), "--out", arg(&report_path),
    ]);
    assert_eq!(code, 0, "{err}");
    let v = json(&out);
    validate("eval_report.schema.json", &v);
    assert_eq!(v["f1_fixed"], 1.0);
    assert_eq!(v["f1_best"], 1.0);
    assert_eq!(v["auc"], 1.0);
    assert_eq!(v["accuracy"], 1.0);
    assert_eq!(v["n_images"], 8);
    assert_eq!(v["n_tampered"], 4);
    assert_eq!(std::fs::read_to_string(&report_path).unwrap(), out);
}

#[test]
fn evaluate_zero_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = small_corpus(dir.path());
    let pred = dir.path().join("pred");
    std::fs::create_dir_all(&pred).unwrap();
    for r in requant::corpus::read_manifest(&manifest).unwrap() {
        write_gray_png(&pred.join(format!("{}.heatmap.png", r.id)), &Grid::filled(64, 64, 0u8)).unwrap();
    }
    let (code, out, _) = run(&["evaluate", "--manifest", arg(&manifest), "--pred-dir", arg(&pred)]);
    assert_eq!(code, 0);
    let v = json(&out);
    validate("eval_report.schema.json", &v);
    assert_eq!(v["f1_fixed"], 0.0);
    assert_eq!(v["auc"], 0.5);
    // threshold 0 marks every pixel, so the best sweep lands on the
    // all-positive baseline 2p/(p+1)
    for item in v["per_image"].as_array().unwrap() {
        if item["label"] == 1 {
            let id = item["id"].as_str().unwrap();
            let gt = read_gray_png(&manifest.parent().unwrap().join(format!("{id}.mask.png"))).unwrap();
            let p = gt.iter().filter(|&&g| g == 255).count() as f64 / gt.len() as f64;
            let baseline = 2.0 * p / (p + 1.0);
            assert!((item["f1_best"].as_f64().unwrap() - baseline).abs() < 1e-12);
            assert_eq!(item["best_threshold"], 0.0);
        }
    }
}

#[test]
fn evaluate_skips_missing_and_fails_when_nothing_is_left() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = small_corpus(dir.path());
    let pred = dir.path().join("pred");
    std::fs::create_dir_all(&pred).unwrap();
    let rows = requant::corpus::read_manifest(&manifest).unwrap();
    for r in rows.iter().take(3) {
        write_gray_png(&pred.join(format!("{}.heatmap.png", r.id)), &Grid::filled(64, 64, 0u8)).unwrap();
    }
    let (code, out, err) = run(&["evaluate", "--manifest", arg(&manifest), "--pred-dir", arg(&pred)]);
    assert_eq!(code, 0, "{err}");
    let v = json(&out);
    validate("eval_report.schema.json", &v);
    assert_eq!(v["n_images"], 3);
    assert_eq!(v["skipped"].as_array().unwrap().len(), 5);
    assert!(err.contains("skipped 5 of 8 entries"), "{err}");

    let empty = dir.path().join("empty");
    std::fs::create_dir_all(&empty).unwrap();
    let (code, _, err) = run(&["evaluate", "--manifest", arg(&manifest), "--pred-dir", arg(&empty)]);
    assert_eq!(code, 2);
    assert!(err.contains("no manifest entry"), "{err}");

    assert_eq!(run(&["evaluate", "--manifest", arg(&manifest)]).0, 1);
}

#[test]
fn evaluate_self_run_validates() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = small_corpus(dir.path());
    let (code, out, err) = run(&["evaluate", "--manifest", arg(&manifest), "--self-run"]);
    assert_eq!(code, 0, "{err}");
    validate("eval_report.schema.json", &json(&out));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_requant");
    let status = |args: &[&str]| {
        std::process::Command::new(bin)
            .args(args)
            .output()
            .unwrap()
            .status
            .code()
    };
    assert_eq!(status(&["inspect", arg(&fixture("gray_q80.jpg"))]), Some(0));
    assert_eq!(status(&["inspect", arg(&fixture("progressive_q80.jpg"))]), Some(2));
    assert_eq!(status(&["inspect", "/nonexistent/x.jpg"]), Some(3));
    assert_eq!(status(&["--help"]), Some(0));
    assert_eq!(status(&[]), Some(1));

    let out = std::process::Command::new(bin)
        .env(requant::cli::JOBS_ENV, "zero")
        .args(["inspect", arg(&fixture("gray_q80.jpg"))])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
