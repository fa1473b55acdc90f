#![no_main]

use gapnet_cli::cmd::benchmark::BenchmarkConfig;
use gapnet_cli::manifest::RunManifest;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(m) = serde_json::from_slice::<RunManifest>(data) {
        let _ = m.config_for::<BenchmarkConfig>("benchmark");
    }
});
