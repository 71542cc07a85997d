#![no_main]

use evlink::decompose::{decode_tsvd, encode_tsvd};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(model) = decode_tsvd(data) {
        let again = decode_tsvd(&encode_tsvd(&model)).unwrap();
        assert_eq!(again.singular_values(), model.singular_values());
    }
});
