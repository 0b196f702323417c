#![no_main]

use libfuzzer_sys::fuzz_target;
use saliex::evaluation::{parse_ground_truth_csv, write_ground_truth_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(records) = parse_ground_truth_csv(text, "fuzz", None) {
        for r in &records {
            assert!(r.bbox.x_min <= r.bbox.x_max && r.bbox.y_min <= r.bbox.y_max);
        }
        // Whatever parsed must survive a write/parse round trip.
        let written = write_ground_truth_csv(&records).expect("records serialize");
        let again = parse_ground_truth_csv(&written, "fuzz", None).expect("own output parses");
        assert_eq!(records.len(), again.len());
        for (a, b) in records.iter().zip(&again) {
            assert_eq!(a.bbox, b.bbox);
        }
    }
});
