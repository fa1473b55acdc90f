#![no_main]

use gapnet::clustering::parse_plan;
use gapnet::synth::feature_names;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let names = feature_names(8);
    if let Ok(clusters) = parse_plan(text, &names) {
        for c in &clusters {
            assert!(!c.features.is_empty());
            assert!(c.features.iter().all(|&i| i < names.len()));
        }
    }
});
