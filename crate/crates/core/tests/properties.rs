use proptest::prelude::*;

use scma_core::bridge::{bits_to_symbol_llr, Interleaver};
use scma_core::codebook::Codebook;
use scma_core::ldpc::{self, decode_bp, ParityCheckMatrix, SystematicEncoder};

fn random_matrix() -> impl Strategy<Value = ParityCheckMatrix> {
    (2usize..40, 1usize..12).prop_flat_map(|(n, m)| {
        prop::collection::vec(prop::collection::btree_set(0..n, 1..=n.min(6)), m).prop_map(move |rows| {
            let mut checks: Vec<Vec<usize>> = rows.into_iter().map(|s| s.into_iter().collect()).collect();
            // every bit needs at least one check for a well-formed alist
            for i in 0..n {
                if !checks.iter().any(|r| r.contains(&i)) {
                    let r = i % m;
                    checks[r].push(i);
                }
            }
            ParityCheckMatrix::from_checks(n, checks).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn interleaver_round_trips(users in 1usize..8, len in 1usize..300, seed: u64, fill: u64) {
        let pi = Interleaver::new(users, len, seed);
        let data: Vec<u64> = (0..len as u64).map(|x| x.wrapping_mul(fill | 1)).collect();
        for j in 0..users {
            let there = pi.interleave(j, &data).unwrap();
            prop_assert_eq!(pi.deinterleave(j, &there).unwrap(), data.clone());
        }
    }

    #[test]
    fn alist_round_trips(h in random_matrix()) {
        let back = ParityCheckMatrix::from_alist(&h.to_alist()).unwrap();
        prop_assert_eq!(back, h);
    }

    #[test]
    fn bundled_encoder_emits_codewords(info in prop::collection::vec(0u8..2, 512)) {
        let code = ldpc::peg_1024();
        let word = ldpc::peg_1024_encoder().encode(&info).unwrap();
        prop_assert!(code.is_codeword(&word));
        prop_assert_eq!(&word[..512], &info[..]);
    }

    #[test]
    fn symbol_llr_sums_prior_of_one_bits(prior in prop::collection::vec(-30.0f64..30.0, 2), j in 0usize..6) {
        let cb = Codebook::default_scma();
        let l = bits_to_symbol_llr(&prior, &cb, j);
        for (m, &v) in l.iter().enumerate() {
            let expect: f64 = cb.label_bits(j, m).iter().zip(&prior).filter(|(b, _)| **b == 1).map(|(_, p)| -p).sum();
            prop_assert!((v - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn decoder_commutes_with_codeword_flips(
        prior in prop::collection::vec(-8.0f64..8.0, 7),
        info in prop::collection::vec(0u8..2, 4),
    ) {
        let h = ldpc::hamming_7_4();
        let c = SystematicEncoder::from_pcm(&h).unwrap().encode(&info).unwrap();
        let flipped: Vec<f64> = prior.iter().zip(&c).map(|(l, &b)| if b == 1 { -l } else { *l }).collect();
        let a = decode_bp(&h, &prior, 10).unwrap();
        let b = decode_bp(&h, &flipped, 10).unwrap();
        for i in 0..7 {
            let s = if c[i] == 1 { -1.0 } else { 1.0 };
            prop_assert!((a.llr.total[i] * s - b.llr.total[i]).abs() < 1e-9);
        }
    }
}
