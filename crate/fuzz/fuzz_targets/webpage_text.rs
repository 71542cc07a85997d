#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|html: &str| {
    let text = evlink::corpus::extract_webpage_text(html);
    assert!(!text.contains('<') || html.contains('<'));
});
