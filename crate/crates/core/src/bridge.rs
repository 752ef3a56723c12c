//! Connection between detector and decoder: symbol/bit LLR conversion,
//! intrinsic extraction and per-user interleaving.

use rand::seq::SliceRandom;

use crate::codebook::Codebook;
use crate::detector::SymbolLlr;
use crate::error::{Error, Result};
use crate::ldpc::BitLlr;
use crate::logsum::{clip_llr, logsumexp_counted, LogSumMode};
use crate::ops::OpCounters;
use crate::rng::frame_stream;

/// Symbol prior LLRs of user `j` from the bit priors of one symbol.
///
/// Summing the bit LLRs over the "0" positions of each label and subtracting
/// the same sum for the all-zero reference leaves
/// `L(x) = -sum_{i : b_i(x) = 1} L(b_i)`, so the reference entry is exactly 0.
pub fn bits_to_symbol_llr(bit_prior: &[f64], cb: &Codebook, j: usize) -> Vec<f64> {
    let mut out = vec![0.0; cb.size()];
    bits_to_symbol_llr_into(bit_prior, cb, j, &mut out);
    out
}

pub(crate) fn bits_to_symbol_llr_into(bit_prior: &[f64], cb: &Codebook, j: usize, out: &mut [f64]) {
    debug_assert_eq!(bit_prior.len(), cb.bits_per_symbol());
    for (m, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (i, &l) in bit_prior.iter().enumerate() {
            if cb.label_bit(j, m, i) == 1 {
                acc -= clip_llr(l);
            }
        }
        *o = acc;
    }
}

/// Bit LLRs of user `j` from the detector output of one symbol.
///
/// The bit prior is recovered from the symbol prior part of `det` (the entry
/// of the label with a single `1` at bit `i` is `-L(b_i)`).
pub fn symbol_to_bit_llr(det: &SymbolLlr, cb: &Codebook, j: usize) -> BitLlr {
    let bits = cb.bits_per_symbol();
    let prior: Vec<f64> = (0..bits)
        .map(|i| {
            let label = vec_with_one(bits, i);
            let m = cb.index_of_bits(j, &label).expect("labels are a bijection");
            -det.prior(j)[m]
        })
        .collect();
    let mut ops = OpCounters::default();
    let mut raw = vec![0.0; bits];
    bit_totals(det.total(j), cb, j, LogSumMode::Jacobian, &mut raw, &mut ops);
    let intrinsic = raw.iter().zip(&prior).map(|(t, p)| clip_llr(t - p)).collect();
    BitLlr::from_parts(intrinsic, prior)
}

fn vec_with_one(len: usize, at: usize) -> Vec<u8> {
    let mut v = vec![0u8; len];
    v[at] = 1;
    v
}

/// `L(b_i) = lse_{x : b_i = 0} LV(x) - lse_{x : b_i = 1} LV(x)`, unclipped.
pub(crate) fn bit_totals(
    symbol_total: &[f64],
    cb: &Codebook,
    j: usize,
    mode: LogSumMode,
    out: &mut [f64],
    ops: &mut OpCounters,
) {
    let half = cb.size() / 2;
    let mut zeros = Vec::with_capacity(half);
    let mut ones = Vec::with_capacity(half);
    for (i, o) in out.iter_mut().enumerate() {
        zeros.clear();
        ones.clear();
        for (m, &v) in symbol_total.iter().enumerate() {
            if cb.label_bit(j, m, i) == 0 {
                zeros.push(v);
            } else {
                ones.push(v);
            }
        }
        assert!(!zeros.is_empty() && !ones.is_empty(), "labels are a bijection");
        *o = logsumexp_counted(&zeros, mode, ops) - logsumexp_counted(&ones, mode, ops);
    }
}

/// Intrinsic bit LLRs of one symbol: the converted total minus the bit prior
/// that went into the detector.
///
/// The subtraction happens before clipping. Clipping the total first would
/// erase the channel evidence whenever the prior is itself at the clip level.
pub(crate) fn extract_intrinsic(
    symbol_total: &[f64],
    bit_prior: &[f64],
    cb: &Codebook,
    j: usize,
    mode: LogSumMode,
    out: &mut [f64],
    ops: &mut OpCounters,
) {
    bit_totals(symbol_total, cb, j, mode, out, ops);
    for (o, &p) in out.iter_mut().zip(bit_prior) {
        *o = clip_llr(*o - clip_llr(p));
    }
}

/// Per-user random permutations of the coded block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interleaver {
    len: usize,
    seed: u64,
    /// `out[p] = in[perm[p]]`
    perms: Vec<Vec<usize>>,
    inverse: Vec<Vec<usize>>,
}

impl Interleaver {
    /// Uniform random permutation per user; user `j` draws from stream `j`
    /// of `seed`.
    pub fn new(users: usize, len: usize, seed: u64) -> Self {
        let perms = (0..users)
            .map(|j| {
                let mut rng = frame_stream(seed, 0, j as u64);
                let mut p: Vec<usize> = (0..len).collect();
                p.shuffle(&mut rng);
                p
            })
            .collect();
        Self::from_perms(len, seed, perms)
    }

    pub fn identity(users: usize, len: usize) -> Self {
        Self::from_perms(len, 0, vec![(0..len).collect(); users])
    }

    fn from_perms(len: usize, seed: u64, perms: Vec<Vec<usize>>) -> Self {
        let inverse = perms
            .iter()
            .map(|p| {
                let mut inv = vec![0; len];
                for (dst, &src) in p.iter().enumerate() {
                    inv[src] = dst;
                }
                inv
            })
            .collect();
        Interleaver {
            len,
            seed,
            perms,
            inverse,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn users(&self) -> usize {
        self.perms.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn permutation(&self, j: usize) -> &[usize] {
        &self.perms[j]
    }

    pub fn interleave<T: Copy>(&self, j: usize, input: &[T]) -> Result<Vec<T>> {
        self.check(input.len())?;
        Ok(self.perms[j].iter().map(|&src| input[src]).collect())
    }

    pub fn deinterleave<T: Copy>(&self, j: usize, input: &[T]) -> Result<Vec<T>> {
        self.check(input.len())?;
        Ok(self.inverse[j].iter().map(|&p| input[p]).collect())
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.len {
            return Err(Error::Dimension(format!(
                "sequence of length {len}, interleaver length {}",
                self.len
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::softmax;
    use crate::rng::seeded;
    use rand::Rng;

    #[test]
    fn zero_bits_give_zero_symbols() {
        let cb = Codebook::default_scma();
        assert_eq!(bits_to_symbol_llr(&[0.0, 0.0], &cb, 0), vec![0.0; 4]);
    }

    #[test]
    fn symbol_prior_matches_product_pmf() {
        let cb = Codebook::default_scma();
        let (a, b) = (0.8, -1.7);
        let s = bits_to_symbol_llr(&[a, b], &cb, 3);
        let p0 = |l: f64| 1.0 / (1.0 + (-l).exp());
        for m in 0..4 {
            let bits = cb.label_bits(3, m);
            let pa = if bits[0] == 0 { p0(a) } else { 1.0 - p0(a) };
            let pb = if bits[1] == 0 { p0(b) } else { 1.0 - p0(b) };
            let pr = if cb.label_bits(3, cb.reference(3)) == vec![0, 0] {
                p0(a) * p0(b)
            } else {
                unreachable!()
            };
            assert!((s[m] - (pa * pb / pr).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn certain_bit_propagates() {
        let cb = Codebook::default_scma();
        let s = bits_to_symbol_llr(&[f64::INFINITY, 0.0], &cb, 0);
        for m in 0..4 {
            if cb.label_bit(0, m, 0) == 1 {
                assert_eq!(s[m], -crate::logsum::LLR_CLIP);
            } else {
                assert_eq!(s[m], 0.0);
            }
        }
    }

    #[test]
    fn uniform_detector_output_gives_zero_bits() {
        let cb = Codebook::default_scma();
        let det = SymbolLlr::from_prior(6, 4, vec![0.0; 24]);
        let b = symbol_to_bit_llr(&det, &cb, 2);
        assert_eq!(b.total, vec![0.0, 0.0]);
    }

    #[test]
    fn point_mass_saturates() {
        let cb = Codebook::default_scma();
        let mut intr = vec![0.0; 24];
        for m in 0..4 {
            intr[4 + m] = if m == 2 { 0.0 } else { -500.0 };
        }
        // make entry at the reference 0 as required: shift so the reference is 0
        let r = cb.reference(1);
        let shift = intr[4 + r];
        for m in 0..4 {
            intr[4 + m] -= shift;
        }
        let det = SymbolLlr::from_parts(6, 4, intr, vec![0.0; 24]);
        let b = symbol_to_bit_llr(&det, &cb, 1);
        let label = cb.label_bits(1, 2);
        for i in 0..2 {
            let want = if label[i] == 0 { 38.0 } else { -38.0 };
            assert_eq!(b.total[i], want);
        }
    }

    #[test]
    fn bit_llr_matches_probability_domain() {
        let cb = Codebook::default_scma();
        let mut rng = seeded(3);
        for _ in 0..200 {
            let j = rng.random_range(0..6);
            let bit_prior = [rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0)];
            let sp = bits_to_symbol_llr(&bit_prior, &cb, j);
            let mut intr = vec![0.0; 24];
            let mut prior = vec![0.0; 24];
            for m in 0..4 {
                if m != cb.reference(j) {
                    intr[j * 4 + m] = rng.random_range(-6.0..6.0);
                }
                prior[j * 4 + m] = sp[m];
            }
            let det = SymbolLlr::from_parts(6, 4, intr.clone(), prior);
            let b = symbol_to_bit_llr(&det, &cb, j);
            let pmf = softmax(det.total(j));
            for i in 0..2 {
                let p0: f64 = (0..4).filter(|&m| cb.label_bit(j, m, i) == 0).map(|m| pmf[m]).sum();
                assert!((b.total[i] - (p0 / (1.0 - p0)).ln()).abs() < 1e-9);
                assert!((b.prior[i] - bit_prior[i]).abs() < 1e-12);
            }
            // intrinsic equals the conversion with the own bit's prior removed
            let zero = SymbolLlr::from_parts(6, 4, intr.clone(), {
                let mut p = vec![0.0; 24];
                for m in 0..4 {
                    p[j * 4 + m] = bits_to_symbol_llr(&[0.0, bit_prior[1]], &cb, j)[m];
                }
                p
            });
            let z = symbol_to_bit_llr(&zero, &cb, j);
            assert!((b.intrinsic[0] - z.total[0]).abs() < 1e-9);
        }
    }

    #[test]
    fn pass_through_round_trip() {
        let cb = Codebook::default_scma();
        let mut rng = seeded(17);
        for _ in 0..100 {
            let j = rng.random_range(0..6);
            let bits = [rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)];
            let mut prior = vec![0.0; 24];
            prior[j * 4..j * 4 + 4].copy_from_slice(&bits_to_symbol_llr(&bits, &cb, j));
            let det = SymbolLlr::from_prior(6, 4, prior);
            let b = symbol_to_bit_llr(&det, &cb, j);
            for i in 0..2 {
                assert!((b.total[i] - bits[i]).abs() < 1e-9);
                assert!(b.intrinsic[i].abs() < 1e-9);
            }
        }
    }

    #[test]
    fn interleaver_round_trip_and_identity() {
        let il = Interleaver::new(6, 1024, 99);
        let data: Vec<u32> = (0..1024).collect();
        for j in 0..6 {
            let x = il.interleave(j, &data).unwrap();
            assert_ne!(x, data);
            assert_eq!(il.deinterleave(j, &x).unwrap(), data);
        }
        let id = Interleaver::identity(2, 8);
        let d: Vec<u8> = (0..8).collect();
        assert_eq!(id.interleave(1, &d).unwrap(), d);
        assert!(il.interleave(0, &d).is_err());
    }

    #[test]
    fn users_get_distinct_permutations() {
        let il = Interleaver::new(6, 1024, 7);
        for a in 0..6 {
            for b in a + 1..6 {
                assert_ne!(il.permutation(a), il.permutation(b));
            }
        }
        assert_eq!(il, Interleaver::new(6, 1024, 7));
    }
}
