#![no_main]

use evlink::vectorspace::{decode_sparse_vectors, encode_sparse_vectors};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok((dim, rows)) = decode_sparse_vectors(data) {
        let bytes = encode_sparse_vectors(&rows, dim).unwrap();
        assert_eq!(decode_sparse_vectors(&bytes).unwrap(), (dim, rows));
    }
});
