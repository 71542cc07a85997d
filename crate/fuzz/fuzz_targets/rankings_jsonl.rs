#![no_main]

use evlink::ranker::{parse_rankings_jsonl, write_rankings_jsonl};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(results) = parse_rankings_jsonl(data) {
        let mut out = Vec::new();
        write_rankings_jsonl(&mut out, &results).unwrap();
        assert_eq!(parse_rankings_jsonl(out.as_slice()).unwrap().len(), results.len());
    }
});
