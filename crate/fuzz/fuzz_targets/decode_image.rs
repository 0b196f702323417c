#![no_main]

use libfuzzer_sys::fuzz_target;
use saliex::imgcore::io::{decode_image, decode_mask};

fuzz_target!(|data: &[u8]| {
    // Arbitrary bytes must be rejected with an error, never a panic.
    if let Ok(img) = decode_image(data) {
        assert_eq!(img.pixels().len(), img.width() * img.height());
    }
    if let Ok(mask) = decode_mask(data) {
        assert_eq!(mask.bits().len(), mask.width() * mask.height());
    }
});
