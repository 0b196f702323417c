#![no_main]

use libfuzzer_sys::fuzz_target;
use saliex::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = RunConfig::from_toml_str(text) {
        let _ = cfg.stack_config();
        let again = RunConfig::from_toml_str(&cfg.to_toml_string()).expect("own output parses");
        assert_eq!(again.seed, cfg.seed);
        assert_eq!(again.maps, cfg.maps);
    }
});
