#![no_main]

use evlink::harness::ConfigFile;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(config) = ConfigFile::parse(text) {
        let _ = config.experiments(None, None);
    }
});
