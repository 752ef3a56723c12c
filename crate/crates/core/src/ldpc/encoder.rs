//! Systematic encoding through a dense generator obtained by Gaussian
//! elimination over GF(2).
//!
//! The parity-check matrix must have full row rank and its last `n_checks`
//! columns must be invertible; codewords are then `[info | parity]`.
//!
//! # Generator cache format
//!
//! Little-endian binary:
//!
//! ```text
//! 8 bytes   magic "SCMAGEN1"
//! u64       n_bits
//! u64       n_info
//! u64       fingerprint of the parity-check matrix
//! rows      (n_bits - n_info) rows of ceil(n_info / 64) u64 words;
//!           parity bit r is the GF(2) dot product of row r with the info bits
//! ```

use super::ParityCheckMatrix;
use crate::error::{Error, Result};

pub const GENERATOR_MAGIC: &[u8; 8] = b"SCMAGEN1";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystematicEncoder {
    n_bits: usize,
    n_info: usize,
    words: usize,
    fingerprint: u64,
    /// parity row r: bits over the info positions
    rows: Vec<u64>,
}

fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

impl SystematicEncoder {
    /// Reduces `H = [A | B]` to `[B^-1 A | I]`.
    pub fn from_pcm(pcm: &ParityCheckMatrix) -> Result<Self> {
        let n = pcm.n_bits();
        let m = pcm.n_checks();
        if m >= n {
            return Err(Error::RankDeficient { rank: n, checks: m });
        }
        let k = n - m;
        let w = words_for(n);
        let mut h = vec![0u64; m * w];
        for c in 0..m {
            for &i in pcm.check_neighbors(c) {
                h[c * w + i / 64] |= 1 << (i % 64);
            }
        }
        for r in 0..m {
            let col = k + r;
            let (word, bit) = (col / 64, 1u64 << (col % 64));
            let Some(pivot) = (r..m).find(|&p| h[p * w + word] & bit != 0) else {
                return Err(Error::RankDeficient { rank: r, checks: m });
            };
            if pivot != r {
                for x in 0..w {
                    h.swap(r * w + x, pivot * w + x);
                }
            }
            let (head, tail) = h.split_at_mut(r * w);
            let (row, tail) = tail.split_at_mut(w);
            for other in head.chunks_exact_mut(w).chain(tail.chunks_exact_mut(w)) {
                if other[word] & bit != 0 {
                    for (o, &s) in other.iter_mut().zip(row.iter()) {
                        *o ^= s;
                    }
                }
            }
        }
        let words = words_for(k);
        let mut rows = vec![0u64; m * words];
        for r in 0..m {
            for i in 0..k {
                if h[r * w + i / 64] >> (i % 64) & 1 == 1 {
                    rows[r * words + i / 64] |= 1 << (i % 64);
                }
            }
        }
        Ok(SystematicEncoder {
            n_bits: n,
            n_info: k,
            words,
            fingerprint: pcm.fingerprint(),
            rows,
        })
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn n_info(&self) -> usize {
        self.n_info
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        if info.len() != self.n_info {
            return Err(Error::Dimension(format!(
                "{} info bits, code carries {}",
                info.len(),
                self.n_info
            )));
        }
        let mut packed = vec![0u64; self.words];
        for (i, &b) in info.iter().enumerate() {
            packed[i / 64] |= ((b & 1) as u64) << (i % 64);
        }
        let mut out = Vec::with_capacity(self.n_bits);
        out.extend(info.iter().map(|b| b & 1));
        for row in self.rows.chunks_exact(self.words) {
            let ones: u32 = row.iter().zip(&packed).map(|(a, b)| (a & b).count_ones()).sum();
            out.push((ones & 1) as u8);
        }
        Ok(out)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(32 + self.rows.len() * 8);
        out.extend_from_slice(GENERATOR_MAGIC);
        out.extend_from_slice(&(self.n_bits as u64).to_le_bytes());
        out.extend_from_slice(&(self.n_info as u64).to_le_bytes());
        out.extend_from_slice(&self.fingerprint.to_le_bytes());
        for w in &self.rows {
            out.extend_from_slice(&w.to_le_bytes());
        }
        out
    }

    /// Parses a generator cache. The matrix itself is not checked here; see
    /// [`Self::load_for`].
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |msg: &str| Err(Error::Generator(msg.to_string()));
        if bytes.len() < 32 || &bytes[..8] != GENERATOR_MAGIC {
            return bad("missing SCMAGEN1 header");
        }
        let field = |i: usize| u64::from_le_bytes(bytes[8 + 8 * i..16 + 8 * i].try_into().unwrap());
        let (n_bits, n_info, fingerprint) = (field(0), field(1), field(2));
        if n_info == 0 || n_info >= n_bits || n_bits > 1 << 24 {
            return bad("implausible code dimensions");
        }
        let (n_bits, n_info) = (n_bits as usize, n_info as usize);
        let words = words_for(n_info);
        let expected = (n_bits - n_info) * words;
        let body = &bytes[32..];
        if body.len() != expected * 8 {
            return bad(&format!("body holds {} bytes, expected {}", body.len(), expected * 8));
        }
        let rows: Vec<u64> = body
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        if n_info % 64 != 0 {
            let spill = !0u64 << (n_info % 64);
            if rows.chunks_exact(words).any(|r| r[words - 1] & spill != 0) {
                return bad("bits set beyond the information length");
            }
        }
        Ok(SystematicEncoder {
            n_bits,
            n_info,
            words,
            fingerprint,
            rows,
        })
    }

    /// Loads a cache and verifies it belongs to `pcm`.
    pub fn load_for(pcm: &ParityCheckMatrix, bytes: &[u8]) -> Result<Self> {
        let enc = Self::from_bytes(bytes)?;
        if enc.n_bits != pcm.n_bits()
            || enc.n_bits - enc.n_info != pcm.n_checks()
            || enc.fingerprint != pcm.fingerprint()
        {
            return Err(Error::Generator(
                "cache was produced for a different parity-check matrix".into(),
            ));
        }
        Ok(enc)
    }
}

#[cfg(test)]
mod tests {
    use super::super::hamming_7_4;
    use super::*;

    #[test]
    fn hamming_matches_hand_generator() {
        // from H = [A | I]: p0 = d0+d1+d2, p1 = d0+d1+d3, p2 = d0+d2+d3
        let enc = SystematicEncoder::from_pcm(&hamming_7_4()).unwrap();
        for v in 0..16u8 {
            let d: Vec<u8> = (0..4).map(|i| (v >> i) & 1).collect();
            let expected = vec![
                d[0],
                d[1],
                d[2],
                d[3],
                d[0] ^ d[1] ^ d[2],
                d[0] ^ d[1] ^ d[3],
                d[0] ^ d[2] ^ d[3],
            ];
            assert_eq!(enc.encode(&d).unwrap(), expected);
        }
    }

    #[test]
    fn zero_info_gives_zero_codeword() {
        let enc = SystematicEncoder::from_pcm(&hamming_7_4()).unwrap();
        assert_eq!(enc.encode(&[0; 4]).unwrap(), vec![0; 7]);
        assert!(enc.encode(&[0; 3]).is_err());
    }

    #[test]
    fn rank_deficient_parity_part() {
        // last two columns equal -> parity part singular
        let h = ParityCheckMatrix::from_checks(4, vec![vec![0, 2, 3], vec![1, 2, 3]]).unwrap();
        assert!(matches!(
            SystematicEncoder::from_pcm(&h),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn cache_round_trip_and_binding() {
        let h = hamming_7_4();
        let enc = SystematicEncoder::from_pcm(&h).unwrap();
        let bytes = enc.to_bytes();
        assert_eq!(SystematicEncoder::load_for(&h, &bytes).unwrap(), enc);
        let other = h.permute_columns(&[1, 0, 2, 3, 4, 5, 6]);
        assert!(SystematicEncoder::load_for(&other, &bytes).is_err());
        assert!(SystematicEncoder::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        assert!(SystematicEncoder::from_bytes(b"SCMAGEN0").is_err());
    }
}
