#![no_main]

use libfuzzer_sys::fuzz_target;
use saliex::evaluation::parse_voc_annotation;

fuzz_target!(|data: &[u8]| {
    if let Ok(xml) = std::str::from_utf8(data) {
        if let Ok(Some(obj)) = parse_voc_annotation(xml, "fuzz") {
            assert!(!obj.filename.is_empty());
            assert!(obj.bbox.x_min <= obj.bbox.x_max && obj.bbox.y_min <= obj.bbox.y_max);
        }
    }
});
