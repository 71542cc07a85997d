#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(docs) = evlink::corpus::parse_documents_jsonl(data) {
        let mut out = Vec::new();
        evlink::corpus::write_documents_jsonl(&mut out, &docs).unwrap();
        let again = evlink::corpus::parse_documents_jsonl(out.as_slice()).unwrap();
        assert_eq!(docs, again);
    }
});
