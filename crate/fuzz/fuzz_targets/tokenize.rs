#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    let tokens = evlink::corpus::tokenize(text);
    assert!(tokens.iter().all(|t| !t.is_empty() && !t.contains(char::is_whitespace)));
    let _ = evlink::corpus::function_word_ratio(&tokens);
    let _ = evlink::corpus::lcs_length(text, &tokens.join(" "));
});
