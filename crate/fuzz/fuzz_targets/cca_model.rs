#![no_main]

use evlink::align::{decode_cca, encode_cca};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(model) = decode_cca(data) {
        let again = decode_cca(&encode_cca(&model)).unwrap();
        assert_eq!(again.correlations(), model.correlations());
    }
});
