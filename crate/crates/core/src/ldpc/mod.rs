//! Binary LDPC codes: parity-check matrices, systematic encoding and
//! flooding belief propagation in the LLR domain.

mod alist;
mod decoder;
mod encoder;
pub mod peg;

pub use decoder::{check_update, decode_bp, BitLlr, BpDecoder, CheckRule, DecodeOutput, DecoderConfig};
pub use encoder::{SystematicEncoder, GENERATOR_MAGIC};

use crate::error::{Error, Result};

/// Sparse binary parity-check matrix with both adjacency directions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityCheckMatrix {
    n_bits: usize,
    n_checks: usize,
    var_neighbors: Vec<Vec<usize>>,
    check_neighbors: Vec<Vec<usize>>,
}

impl ParityCheckMatrix {
    /// Builds the matrix from the bit indices of every check (0-based).
    pub fn from_checks(n_bits: usize, checks: Vec<Vec<usize>>) -> Result<Self> {
        let n_checks = checks.len();
        let mut var_neighbors = vec![Vec::new(); n_bits];
        let mut check_neighbors = checks;
        for (c, row) in check_neighbors.iter_mut().enumerate() {
            row.sort_unstable();
            if row.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Alist(format!("check {} lists a bit twice", c + 1)));
            }
            for &i in row.iter() {
                if i >= n_bits {
                    return Err(Error::Alist(format!(
                        "check {} refers to bit {} of {n_bits}",
                        c + 1,
                        i + 1
                    )));
                }
                var_neighbors[i].push(c);
            }
        }
        Ok(ParityCheckMatrix {
            n_bits,
            n_checks,
            var_neighbors,
            check_neighbors,
        })
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn n_checks(&self) -> usize {
        self.n_checks
    }

    /// Checks involving bit `i`, ascending.
    pub fn var_neighbors(&self, i: usize) -> &[usize] {
        &self.var_neighbors[i]
    }

    /// Bits of check `c`, ascending.
    pub fn check_neighbors(&self, c: usize) -> &[usize] {
        &self.check_neighbors[c]
    }

    pub fn num_edges(&self) -> usize {
        self.check_neighbors.iter().map(Vec::len).sum()
    }

    pub fn max_column_weight(&self) -> usize {
        self.var_neighbors.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn max_row_weight(&self) -> usize {
        self.check_neighbors.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Variable degree P when every column has the same weight.
    pub fn regular_column_weight(&self) -> Option<usize> {
        let w = self.var_neighbors.first()?.len();
        self.var_neighbors.iter().all(|v| v.len() == w).then_some(w)
    }

    pub fn regular_row_weight(&self) -> Option<usize> {
        let w = self.check_neighbors.first()?.len();
        self.check_neighbors.iter().all(|v| v.len() == w).then_some(w)
    }

    /// `1 - checks / bits`; the true rate when H has full row rank.
    pub fn design_rate(&self) -> f64 {
        1.0 - self.n_checks as f64 / self.n_bits as f64
    }

    pub fn syndrome(&self, word: &[u8]) -> Vec<u8> {
        self.check_neighbors
            .iter()
            .map(|row| row.iter().fold(0u8, |acc, &i| acc ^ (word[i] & 1)))
            .collect()
    }

    pub fn is_codeword(&self, word: &[u8]) -> bool {
        word.len() == self.n_bits && self.syndrome(word).iter().all(|&s| s == 0)
    }

    /// Reorders columns: new column `i` is old column `order[i]`.
    pub fn permute_columns(&self, order: &[usize]) -> Self {
        let mut inverse = vec![0; order.len()];
        for (new, &old) in order.iter().enumerate() {
            inverse[old] = new;
        }
        let checks = self
            .check_neighbors
            .iter()
            .map(|row| row.iter().map(|&i| inverse[i]).collect())
            .collect();
        Self::from_checks(self.n_bits, checks).expect("permutation keeps the matrix valid")
    }

    /// Parses the standard alist text format.
    pub fn from_alist(content: &str) -> Result<Self> {
        alist::parse(content)
    }

    pub fn load_alist(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_alist(&std::fs::read_to_string(path)?)
    }

    pub fn to_alist(&self) -> String {
        alist::write(self)
    }

    /// Order-sensitive fingerprint of the edge set (FNV-1a).
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |x: u64| {
            for b in x.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        eat(self.n_bits as u64);
        eat(self.n_checks as u64);
        for row in &self.check_neighbors {
            eat(u64::MAX);
            for &i in row {
                eat(i as u64);
            }
        }
        h
    }
}

/// Hand-checkable (7,4) Hamming code, systematic in its first four bits.
pub fn hamming_7_4() -> ParityCheckMatrix {
    ParityCheckMatrix::from_checks(7, vec![vec![0, 1, 2, 4], vec![0, 1, 3, 5], vec![0, 2, 3, 6]]).expect("valid matrix")
}

/// Bundled (3,6)-regular PEG code of length 1024, rate 1/2, girth 8, with
/// the information bits first.
pub fn peg_1024() -> ParityCheckMatrix {
    ParityCheckMatrix::from_alist(include_str!("../../data/peg_1024_3_6.alist")).expect("bundled alist")
}

/// Cached generator of [`peg_1024`].
pub fn peg_1024_encoder() -> SystematicEncoder {
    SystematicEncoder::load_for(&peg_1024(), include_bytes!("../../data/peg_1024_3_6.gen")).expect("bundled generator")
}

/// Location of the bundled data files in the source tree, including the
/// length-9216 code that is too large to embed.
pub fn data_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}
