#![no_main]
use libfuzzer_sys::fuzz_target;
use scma_core::ldpc::SystematicEncoder;

fuzz_target!(|data: &[u8]| {
    if let Ok(enc) = SystematicEncoder::from_bytes(data) {
        assert_eq!(enc.to_bytes(), data);
        let zeros = vec![0u8; enc.n_info()];
        if enc.n_info() <= 1 << 12 {
            let c = enc.encode(&zeros).unwrap();
            assert!(c.iter().all(|&b| b == 0));
        }
    }
});
