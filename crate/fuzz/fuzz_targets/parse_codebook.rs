#![no_main]
use libfuzzer_sys::fuzz_target;
use scma_core::codebook::Codebook;

fuzz_target!(|data: &str| {
    if let Ok(cb) = Codebook::from_toml_str(data) {
        // accepted books must be internally consistent
        let fg = cb.factor_graph();
        assert_eq!(fg.users(), cb.users());
        for j in 0..cb.users() {
            for m in 0..cb.size() {
                let bits = cb.label_bits(j, m);
                assert_eq!(cb.index_of_bits(j, &bits).unwrap(), m);
            }
        }
    }
});
