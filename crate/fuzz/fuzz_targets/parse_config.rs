#![no_main]
use std::path::Path;

use libfuzzer_sys::fuzz_target;
use scma_core::sim::{cells, SimConfig};

fuzz_target!(|data: &str| {
    if let Ok(cfg) = SimConfig::from_toml_str(data, Path::new("/nonexistent")) {
        // a config that validates must enumerate its cells
        let _ = cells(&cfg).expect("validated config");
    }
});
