#![no_main]
use libfuzzer_sys::fuzz_target;
use scma_core::ldpc::ParityCheckMatrix;

fuzz_target!(|data: &str| {
    if let Ok(h) = ParityCheckMatrix::from_alist(data) {
        let again = ParityCheckMatrix::from_alist(&h.to_alist()).expect("round trip");
        assert_eq!(h, again);
    }
});
