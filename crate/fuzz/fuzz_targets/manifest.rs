#![no_main]

use libfuzzer_sys::fuzz_target;

const FILES: [&str; 5] = ["manifest.json", "articles.jsonl", "webpages.jsonl", "links.csv", "split.csv"];

// Input is the five manifest files separated by 0x00 bytes.
fuzz_target!(|data: &[u8]| {
    let dir = tempfile::tempdir().unwrap();
    let mut parts = data.split(|b| *b == 0);
    for name in FILES {
        std::fs::write(dir.path().join(name), parts.next().unwrap_or_default()).unwrap();
    }
    if let Ok(manifest) = evlink::corpus::CorpusManifest::read_dir(dir.path()) {
        manifest.validate().unwrap();
    }
});
