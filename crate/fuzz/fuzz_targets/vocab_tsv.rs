#![no_main]

use evlink::vectorspace::{parse_vocab_tsv, IdfVariant, VocabularyMeta};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let meta = VocabularyMeta {
        n_docs: 1000,
        max_df: 0.85,
        idf_variant: IdfVariant::Smooth,
    };
    if let Ok(vocab) = parse_vocab_tsv(data, &meta) {
        assert!(vocab.terms().windows(2).all(|w| w[0] < w[1]));
    }
});
