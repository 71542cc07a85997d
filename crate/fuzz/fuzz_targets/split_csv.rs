#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(split) = evlink::corpus::parse_split_csv(data) {
        let mut out = Vec::new();
        evlink::corpus::write_split_csv(&mut out, &split).unwrap();
        assert_eq!(evlink::corpus::parse_split_csv(out.as_slice()).unwrap(), split);
    }
});
