use std::path::Path;

use saliex::evaluation::{ingest_ground_truth, parse_ground_truth_csv, write_ground_truth_csv};
use saliex::imgcore::io::load_image;

fn csv_path() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/photos.csv")
}

#[test]
fn every_photo_loads_and_its_box_fits() {
    let records = ingest_ground_truth(&csv_path()).unwrap();
    assert_eq!(records.len(), 20);
    for r in &records {
        let img = load_image(&r.image_path).unwrap();
        let (w, h) = img.dims();
        assert!(w.max(h) <= 240, "{}", r.image_path.display());
        assert!(
            r.bbox.fits_within(w, h),
            "{} {}",
            r.image_path.display(),
            r.bbox
        );
        // A single object, neither a speck nor the whole frame.
        let share = r.bbox.area() as f64 / (w * h) as f64;
        assert!(
            (0.02..1.0).contains(&share),
            "{} covers {share:.2}",
            r.image_path.display()
        );
    }
}

#[test]
fn fixture_csv_round_trips() {
    let text = std::fs::read_to_string(csv_path()).unwrap();
    let records = parse_ground_truth_csv(&text, "photos.csv", None).unwrap();
    let back =
        parse_ground_truth_csv(&write_ground_truth_csv(&records).unwrap(), "out", None).unwrap();
    assert_eq!(back, records);
}
