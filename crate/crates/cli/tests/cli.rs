use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use saliex::imgcore::io::{decode_image, decode_mask, encode_mask_png, encode_rgb_png};
use saliex::imgcore::{BinaryMask, RasterImage};

fn saliex(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_saliex"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn disc(x0: f64, y0: f64) -> impl Fn(usize, usize) -> bool {
    move |x, y| (x as f64 - x0).powi(2) + (y as f64 - y0).powi(2) <= 144.0
}

/// Writes a 48x40 image with a contrasting disc and returns its path.
fn write_scene(dir: &Path, name: &str, cx: f64, cy: f64) -> PathBuf {
    let inside = disc(cx, cy);
    let img = RasterImage::from_fn(48, 40, |x, y| {
        if inside(x, y) {
            [230, 200, 40]
        } else {
            [30, 50, (100 + x) as u8]
        }
    })
    .unwrap();
    let path = dir.join(name);
    std::fs::write(&path, encode_rgb_png(&img).unwrap()).unwrap();
    path
}

fn listing(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

#[test]
fn help_exits_zero_without_side_effects() {
    let tmp = tempfile::tempdir().unwrap();
    for sub in [
        "saliency",
        "segment",
        "desaturate",
        "gif",
        "evaluate",
        "ingest",
    ] {
        let out = saliex(tmp.path(), &[sub, "--help"]);
        assert_eq!(code(&out), 0, "{sub}");
        assert!(String::from_utf8_lossy(&out.stdout).contains("Usage"));
    }
    assert_eq!(code(&saliex(tmp.path(), &["--help"])), 0);
    assert!(listing(tmp.path()).is_empty());
}

#[test]
fn usage_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    for args in [
        &["frobnicate"][..],
        &["segment", "--in", "a.png", "--bogus"],
        &["segment"],
        &[],
    ] {
        let out = saliex(tmp.path(), args);
        assert_eq!(code(&out), 1, "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn processing_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = saliex(tmp.path(), &["segment", "--in", "missing.png"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.png"));

    std::fs::write(tmp.path().join("bad.toml"), "gama = 3").unwrap();
    write_scene(tmp.path(), "a.png", 24.0, 20.0);
    let out = saliex(
        tmp.path(),
        &["segment", "--in", "a.png", "--config", "bad.toml"],
    );
    assert_eq!(code(&out), 2);
    let out = saliex(tmp.path(), &["segment", "--in", "a.png", "--maps", "itti"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn saliency_writes_every_map_and_a_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    write_scene(tmp.path(), "a.png", 24.0, 20.0);
    let out = saliex(
        tmp.path(),
        &["saliency", "--in", "a.png", "--out-dir", "maps"],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let files = listing(&tmp.path().join("maps"));
    assert_eq!(files.len(), 8);
    assert!(files.contains(&"center_surround.png".to_string()));
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(tmp.path().join("maps/manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["maps"].as_array().unwrap().len(), 7);
    assert_eq!(manifest["width"], 48);

    let out = saliex(
        tmp.path(),
        &[
            "saliency",
            "--in",
            "a.png",
            "--out-dir",
            "two",
            "--maps",
            "spatial,contrast",
        ],
    );
    assert_eq!(code(&out), 0);
    assert_eq!(
        listing(&tmp.path().join("two")),
        ["contrast.png", "manifest.json", "spatial.png"]
    );
}

#[test]
fn segment_desaturate_and_gif() {
    let tmp = tempfile::tempdir().unwrap();
    write_scene(tmp.path(), "a.png", 24.0, 20.0);
    let out = saliex(
        tmp.path(),
        &[
            "segment", "--in", "a.png", "--out", "mask.png", "--report", "icm.json",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let mask = decode_mask(&std::fs::read(tmp.path().join("mask.png")).unwrap()).unwrap();
    assert_eq!(mask.dims(), (48, 40));
    assert!(mask.get(24, 20));
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(tmp.path().join("icm.json")).unwrap()).unwrap();
    for key in ["initial_energy", "final_energy", "passes", "flips"] {
        assert!(report.get(key).is_some(), "{key}");
    }

    let out = saliex(
        tmp.path(),
        &[
            "desaturate",
            "--in",
            "a.png",
            "--mask",
            "mask.png",
            "--out",
            "d.png",
        ],
    );
    assert_eq!(code(&out), 0);
    let d = decode_image(&std::fs::read(tmp.path().join("d.png")).unwrap()).unwrap();
    assert_eq!(d.pixel(24, 20), [230, 200, 40]);
    let corner = d.pixel(0, 0);
    assert!(corner[0] == corner[1] && corner[1] == corner[2]);

    let out = saliex(
        tmp.path(),
        &[
            "gif", "--in", "a.png", "--mask", "mask.png", "--out", "w.gif", "--frames", "3",
            "--shift", "2",
        ],
    );
    assert_eq!(code(&out), 0);
    let bytes = std::fs::read(tmp.path().join("w.gif")).unwrap();
    let mut decoder = gif::DecodeOptions::new().read_info(&bytes[..]).unwrap();
    let mut frames = 0;
    while decoder.read_next_frame().unwrap().is_some() {
        frames += 1;
    }
    assert_eq!(frames, 3);

    // A mask of the wrong size is a processing error.
    let small = BinaryMask::empty(4, 4).unwrap();
    std::fs::write(
        tmp.path().join("small.png"),
        encode_mask_png(&small).unwrap(),
    )
    .unwrap();
    let out = saliex(tmp.path(), &["gif", "--in", "a.png", "--mask", "small.png"]);
    assert_eq!(code(&out), 2);
    let out = saliex(
        tmp.path(),
        &[
            "gif", "--in", "a.png", "--mask", "mask.png", "--shift", "48",
        ],
    );
    assert_eq!(code(&out), 2);
}

#[test]
fn default_outputs_go_to_the_configured_directory() {
    let tmp = tempfile::tempdir().unwrap();
    write_scene(tmp.path(), "a.png", 24.0, 20.0);
    std::fs::write(
        tmp.path().join("run.toml"),
        "output_dir = \"results\"\nfeather = 1\n",
    )
    .unwrap();
    let out = saliex(
        tmp.path(),
        &["desaturate", "--in", "a.png", "--config", "run.toml"],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(listing(&tmp.path().join("results")), ["a_desaturated.png"]);
}

#[test]
fn evaluate_two_images_deterministically() {
    let tmp = tempfile::tempdir().unwrap();
    write_scene(tmp.path(), "a.png", 24.0, 20.0);
    write_scene(tmp.path(), "b.png", 16.0, 18.0);
    std::fs::write(
        tmp.path().join("gt.csv"),
        "image_path,x_min,y_min,x_max,y_max\na.png,12,8,36,32\nb.png,4,6,28,30\n",
    )
    .unwrap();
    std::fs::write(tmp.path().join("run.toml"), "seed = 7\n").unwrap();
    let mut reports = Vec::new();
    for name in ["r1.json", "r2.json"] {
        let out = saliex(
            tmp.path(),
            &[
                "evaluate", "--gt", "gt.csv", "--config", "run.toml", "--report", name, "--jobs",
                "2",
            ],
        );
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        assert!(String::from_utf8_lossy(&out.stdout).contains("mean jaccard"));
        reports.push(std::fs::read(tmp.path().join(name)).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
    let report: serde_json::Value = serde_json::from_slice(&reports[0]).unwrap();
    assert_eq!(report["images"].as_array().unwrap().len(), 2);
    assert!(report["mean_jaccard"].as_f64().unwrap() > 0.5);
    assert_eq!(report["config"]["seed"], 7);
    let csv = std::fs::read_to_string(tmp.path().join("r1.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn ingest_converts_voc_annotations() {
    let tmp = tempfile::tempdir().unwrap();
    let ann = tmp.path().join("Annotations");
    std::fs::create_dir(&ann).unwrap();
    let xml = |file: &str, objects: usize| {
        let object = "<object><name>bird</name><bndbox><xmin>11</xmin><ymin>21</ymin>\
                      <xmax>111</xmax><ymax>91</ymax></bndbox></object>";
        format!(
            "<annotation><filename>{file}</filename>{}</annotation>",
            object.repeat(objects)
        )
    };
    std::fs::write(ann.join("1.xml"), xml("1.jpg", 1)).unwrap();
    std::fs::write(ann.join("2.xml"), xml("2.jpg", 2)).unwrap();
    let out = saliex(
        tmp.path(),
        &["ingest", "--in", "Annotations", "--out", "gt.csv"],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(tmp.path().join("gt.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(
        lines[1].ends_with("JPEGImages/1.jpg,10,20,110,90"),
        "{}",
        lines[1]
    );
}
