//! Flooding belief propagation with LLRs `L = ln(p(0) / p(1))`.

use serde::{Deserialize, Serialize};

use super::ParityCheckMatrix;
use crate::error::{Error, Result};
use crate::logsum::clip_llr;
use crate::ops::OpCounters;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckRule {
    /// Exact `2 atanh(prod tanh(L / 2))`.
    #[default]
    TanhProduct,
    /// Sign-min approximation.
    MinSum,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecoderConfig {
    pub iterations: usize,
    pub rule: CheckRule,
    /// Stop as soon as the hard decisions satisfy every check.
    pub early_exit: bool,
}

impl DecoderConfig {
    pub fn new(iterations: usize) -> Self {
        DecoderConfig {
            iterations,
            rule: CheckRule::TanhProduct,
            early_exit: false,
        }
    }
}

/// Bit LLRs with their decomposition `total = intrinsic + prior`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BitLlr {
    pub total: Vec<f64>,
    pub intrinsic: Vec<f64>,
    pub prior: Vec<f64>,
}

impl BitLlr {
    pub fn from_parts(intrinsic: Vec<f64>, prior: Vec<f64>) -> Self {
        let total = intrinsic.iter().zip(&prior).map(|(a, b)| a + b).collect();
        BitLlr {
            total,
            intrinsic,
            prior,
        }
    }

    pub fn len(&self) -> usize {
        self.total.len()
    }

    pub fn is_empty(&self) -> bool {
        self.total.is_empty()
    }

    /// `0` iff the total LLR is non-negative.
    pub fn hard_decisions(&self) -> Vec<u8> {
        self.total.iter().map(|&l| u8::from(l < 0.0)).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecodeOutput {
    pub llr: BitLlr,
    pub hard: Vec<u8>,
    pub syndrome_ok: bool,
    pub iterations: usize,
}

/// Check-node update for one check: `out[e]` is the message towards the
/// variable of input `e`, computed from every other input.
pub fn check_update(inputs: &[f64], out: &mut [f64], rule: CheckRule) {
    let mut ops = OpCounters::default();
    let mut scratch = Vec::new();
    check_update_counted(inputs, out, rule, &mut scratch, &mut ops);
}

fn check_update_counted(
    inputs: &[f64],
    out: &mut [f64],
    rule: CheckRule,
    scratch: &mut Vec<f64>,
    ops: &mut OpCounters,
) {
    let d = inputs.len();
    debug_assert_eq!(out.len(), d);
    match rule {
        CheckRule::TanhProduct => {
            // t = tanh(L/2) = (1 - e^-L) / (1 + e^-L)
            scratch.clear();
            scratch.extend(inputs.iter().map(|&l| (0.5 * l).tanh()));
            ops.mul += d as u64;
            ops.exp += d as u64;
            ops.div += d as u64;
            // prefix products in `out`, suffix product carried along
            let mut acc = 1.0;
            for (o, &t) in out.iter_mut().zip(scratch.iter()) {
                *o = acc;
                acc *= t;
            }
            let mut suffix = 1.0;
            for (o, &t) in out.iter_mut().zip(scratch.iter()).rev() {
                let p = *o * suffix;
                suffix *= t;
                // 2 atanh(p) = ln((1 + p) / (1 - p))
                *o = clip_llr(2.0 * p.atanh());
            }
            ops.mul += 3 * d as u64;
            ops.div += d as u64;
            ops.log += d as u64;
        }
        CheckRule::MinSum => {
            let mut sign = 1.0;
            let (mut min1, mut min2, mut at) = (f64::INFINITY, f64::INFINITY, 0);
            for (e, &l) in inputs.iter().enumerate() {
                if l < 0.0 {
                    sign = -sign;
                }
                let a = l.abs();
                if a < min1 {
                    min2 = min1;
                    min1 = a;
                    at = e;
                } else if a < min2 {
                    min2 = a;
                }
            }
            for (e, (o, &l)) in out.iter_mut().zip(inputs).enumerate() {
                let s = if l < 0.0 { -sign } else { sign };
                let mag = if e == at { min2 } else { min1 };
                *o = clip_llr(s * mag);
            }
        }
    }
}

/// Decoder with reusable edge buffers.
pub struct BpDecoder<'a> {
    pcm: &'a ParityCheckMatrix,
    /// edges in check-major order: bit index of each edge
    edge_bit: Vec<usize>,
    check_start: Vec<usize>,
    /// per bit, the check-major edge ids
    bit_edges: Vec<Vec<usize>>,
    v2c: Vec<f64>,
    c2v: Vec<f64>,
    inbuf: Vec<f64>,
    outbuf: Vec<f64>,
    scratch: Vec<f64>,
    ops: OpCounters,
}

impl<'a> BpDecoder<'a> {
    pub fn new(pcm: &'a ParityCheckMatrix) -> Self {
        let mut edge_bit = Vec::with_capacity(pcm.num_edges());
        let mut check_start = Vec::with_capacity(pcm.n_checks() + 1);
        let mut bit_edges = vec![Vec::new(); pcm.n_bits()];
        for c in 0..pcm.n_checks() {
            check_start.push(edge_bit.len());
            for &i in pcm.check_neighbors(c) {
                bit_edges[i].push(edge_bit.len());
                edge_bit.push(i);
            }
        }
        check_start.push(edge_bit.len());
        let n_edges = edge_bit.len();
        BpDecoder {
            pcm,
            edge_bit,
            check_start,
            bit_edges,
            v2c: vec![0.0; n_edges],
            c2v: vec![0.0; n_edges],
            inbuf: Vec::new(),
            outbuf: Vec::new(),
            scratch: Vec::new(),
            ops: OpCounters::default(),
        }
    }

    pub fn ops(&self) -> OpCounters {
        self.ops
    }

    pub fn take_ops(&mut self) -> OpCounters {
        std::mem::take(&mut self.ops)
    }

    /// Decodes from prior bit LLRs. Check-to-variable messages start at zero
    /// on every call. Priors are clipped to `±LLR_CLIP`.
    pub fn decode(&mut self, prior: &[f64], config: &DecoderConfig) -> Result<DecodeOutput> {
        let n = self.pcm.n_bits();
        if prior.len() != n {
            return Err(Error::Dimension(format!(
                "{} prior LLRs for a length-{n} code",
                prior.len()
            )));
        }
        if config.iterations < 1 {
            return Err(Error::Invalid("at least one decoder iteration is required".into()));
        }
        let prior: Vec<f64> = prior.iter().map(|&l| clip_llr(l)).collect();
        self.c2v.fill(0.0);
        let mut intrinsic = vec![0.0; n];
        let mut done = 0;
        for _ in 0..config.iterations {
            // variable nodes: everything except the target edge
            for (i, edges) in self.bit_edges.iter().enumerate() {
                let sum: f64 = prior[i] + edges.iter().map(|&e| self.c2v[e]).sum::<f64>();
                for &e in edges {
                    self.v2c[e] = clip_llr(sum - self.c2v[e]);
                }
            }
            for c in 0..self.pcm.n_checks() {
                let (a, b) = (self.check_start[c], self.check_start[c + 1]);
                self.inbuf.clear();
                self.inbuf.extend_from_slice(&self.v2c[a..b]);
                self.outbuf.resize(b - a, 0.0);
                check_update_counted(
                    &self.inbuf,
                    &mut self.outbuf,
                    config.rule,
                    &mut self.scratch,
                    &mut self.ops,
                );
                self.c2v[a..b].copy_from_slice(&self.outbuf);
            }
            done += 1;
            if config.early_exit {
                self.collect_intrinsic(&mut intrinsic);
                let hard: Vec<u8> = intrinsic
                    .iter()
                    .zip(&prior)
                    .map(|(a, p)| u8::from(a + p < 0.0))
                    .collect();
                if self.pcm.is_codeword(&hard) {
                    break;
                }
            }
        }
        self.collect_intrinsic(&mut intrinsic);
        let llr = BitLlr::from_parts(intrinsic, prior);
        let hard = llr.hard_decisions();
        let syndrome_ok = self.pcm.is_codeword(&hard);
        Ok(DecodeOutput {
            llr,
            hard,
            syndrome_ok,
            iterations: done,
        })
    }

    fn collect_intrinsic(&self, out: &mut [f64]) {
        for (o, edges) in out.iter_mut().zip(&self.bit_edges) {
            *o = edges.iter().map(|&e| self.c2v[e]).sum();
        }
    }

    /// Check-to-variable messages of the last iteration, check-major.
    pub fn check_messages(&self) -> &[f64] {
        &self.c2v
    }

    /// Bit index of every check-major edge.
    pub fn edge_bits(&self) -> &[usize] {
        &self.edge_bit
    }
}

/// Runs `iterations` flooding BP iterations without early termination.
pub fn decode_bp(pcm: &ParityCheckMatrix, prior: &[f64], iterations: usize) -> Result<DecodeOutput> {
    BpDecoder::new(pcm).decode(prior, &DecoderConfig::new(iterations))
}

#[cfg(test)]
mod tests {
    use super::super::{hamming_7_4, SystematicEncoder};
    use super::*;

    #[test]
    fn confident_all_zero() {
        let h = hamming_7_4();
        let out = decode_bp(&h, &[20.0; 7], 1).unwrap();
        assert_eq!(out.hard, vec![0; 7]);
        assert!(out.syndrome_ok);
        assert_eq!(out.iterations, 1);
    }

    #[test]
    fn corrects_single_errors_on_multiply_checked_bits() {
        let h = hamming_7_4();
        let enc = SystematicEncoder::from_pcm(&h).unwrap();
        // BSC-like channel LLR magnitude for crossover 0.05
        let a = ((1.0 - 0.05) / 0.05f64).ln();
        for v in 0..16u8 {
            let d: Vec<u8> = (0..4).map(|i| (v >> i) & 1).collect();
            let c = enc.encode(&d).unwrap();
            // bits 4..7 sit in a single check, where BP cannot outvote the channel
            for flip in 0..4 {
                let prior: Vec<f64> = c
                    .iter()
                    .enumerate()
                    .map(|(i, &b)| {
                        let b = if i == flip { b ^ 1 } else { b };
                        if b == 0 {
                            a
                        } else {
                            -a
                        }
                    })
                    .collect();
                let out = decode_bp(&h, &prior, 10).unwrap();
                assert_eq!(out.hard, c, "info {d:?} flip {flip}");
            }
        }
    }

    #[test]
    fn total_is_prior_plus_check_messages() {
        let h = hamming_7_4();
        let prior = [1.5, -0.3, 0.8, 2.0, -1.1, 0.4, 0.9];
        let mut dec = BpDecoder::new(&h);
        let out = dec.decode(&prior, &DecoderConfig::new(3)).unwrap();
        let mut sums = [0.0; 7];
        for (&b, &m) in dec.edge_bits().iter().zip(dec.check_messages()) {
            sums[b] += m;
        }
        for i in 0..7 {
            assert!((out.llr.total[i] - out.llr.prior[i] - sums[i]).abs() < 1e-12);
            assert!((out.llr.intrinsic[i] - sums[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn check_update_sign_symmetry() {
        let x = [0.7, -1.3, 2.2, 0.4, -0.9, 3.1];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        for rule in [CheckRule::TanhProduct, CheckRule::MinSum] {
            let mut a = [0.0; 6];
            let mut b = [0.0; 6];
            check_update(&x, &mut a, rule);
            check_update(&neg, &mut b, rule);
            for e in 0..6 {
                // five other inputs flip sign -> output flips
                assert!((a[e] + b[e]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn tanh_rule_matches_two_input_closed_form() {
        // boxplus(a, b) = ln((1 + e^(a+b)) / (e^a + e^b))
        let (a, b) = (1.2f64, -0.7f64);
        let mut two = [0.0; 2];
        check_update(&[a, b], &mut two, CheckRule::TanhProduct);
        let closed = ((1.0 + (a + b).exp()) / (a.exp() + b.exp())).ln();
        assert!((two[0] - b).abs() < 1e-12);
        let mut three = [0.0; 3];
        check_update(&[a, b, 60.0], &mut three, CheckRule::TanhProduct);
        assert!((three[2] - closed).abs() < 1e-9);
    }

    #[test]
    fn saturated_inputs_stay_finite() {
        let mut out = [0.0; 6];
        check_update(&[38.0; 6], &mut out, CheckRule::TanhProduct);
        assert!(out
            .iter()
            .all(|v| v.is_finite() && *v > 0.0 && *v <= crate::logsum::LLR_CLIP));
    }

    #[test]
    fn length_mismatch() {
        assert!(decode_bp(&hamming_7_4(), &[0.0; 6], 1).is_err());
        assert!(decode_bp(&hamming_7_4(), &[0.0; 7], 0).is_err());
    }
}
