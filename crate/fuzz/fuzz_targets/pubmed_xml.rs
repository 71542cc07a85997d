#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(import) = evlink::corpus::parse_pubmed_xml(data) {
        for doc in &import.documents {
            assert!(!doc.id().is_empty());
        }
    }
});
