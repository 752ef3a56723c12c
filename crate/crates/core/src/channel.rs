//! Superposition of user codewords over per-edge gains plus complex AWGN.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::codebook::{Codebook, FactorGraph};
use crate::error::Error;

/// Per-user symbol energy; Es/N0 labels are relative to this.
pub const SYMBOL_ENERGY: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelModel {
    Awgn,
    /// Independent CN(0, 1) gain per edge, redrawn every SCMA symbol.
    #[serde(alias = "rayleigh-iid")]
    Rayleigh,
}

impl fmt::Display for ChannelModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChannelModel::Awgn => "awgn",
            ChannelModel::Rayleigh => "rayleigh",
        })
    }
}

impl FromStr for ChannelModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "awgn" => Ok(ChannelModel::Awgn),
            "rayleigh" | "rayleigh-iid" => Ok(ChannelModel::Rayleigh),
            other => Err(Error::Invalid(format!("unsupported channel model '{other}'"))),
        }
    }
}

/// Gains for one SCMA symbol, indexed by factor-graph edge, and the noise
/// density the receiver assumes (perfect CSI).
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization {
    pub model: ChannelModel,
    pub n0: f64,
    pub gains: Vec<Complex64>,
}

impl ChannelRealization {
    pub fn awgn(fg: &FactorGraph, n0: f64) -> Self {
        ChannelRealization {
            model: ChannelModel::Awgn,
            n0,
            gains: vec![Complex64::new(1.0, 0.0); fg.num_edges()],
        }
    }

    #[inline]
    pub fn gain(&self, edge: usize) -> Complex64 {
        self.gains[edge]
    }
}

/// Circularly symmetric complex Gaussian sample with total variance `var`.
#[inline]
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// Draws the gains of one SCMA symbol. Only edges of the factor graph carry
/// a gain.
pub fn draw_channel<R: Rng + ?Sized>(
    model: ChannelModel,
    fg: &FactorGraph,
    n0: f64,
    rng: &mut R,
) -> ChannelRealization {
    match model {
        ChannelModel::Awgn => ChannelRealization::awgn(fg, n0),
        ChannelModel::Rayleigh => ChannelRealization {
            model,
            n0,
            gains: (0..fg.num_edges()).map(|_| complex_gaussian(rng, 1.0)).collect(),
        },
    }
}

/// Noise-free received vector `y_k = sum_{j in dk} h_kj x_kj`.
pub fn superpose(cb: &Codebook, fg: &FactorGraph, symbols: &[usize], ch: &ChannelRealization) -> Vec<Complex64> {
    debug_assert_eq!(symbols.len(), cb.users());
    (0..fg.resources())
        .map(|k| {
            fg.resource_edges(k)
                .iter()
                .map(|&e| {
                    let j = fg.edges()[e].1;
                    ch.gain(e) * cb.entry(j, symbols[j], k)
                })
                .sum()
        })
        .collect()
}

/// Received vector for one SCMA symbol: the faded superposition plus CN(0, N0)
/// noise on every resource.
pub fn transmit<R: Rng + ?Sized>(
    cb: &Codebook,
    fg: &FactorGraph,
    symbols: &[usize],
    ch: &ChannelRealization,
    rng: &mut R,
) -> Vec<Complex64> {
    let mut y = superpose(cb, fg, symbols, ch);
    if ch.n0 > 0.0 {
        for yk in &mut y {
            *yk += complex_gaussian(rng, ch.n0);
        }
    }
    y
}

/// `N0 = Es * 10^(-EsN0/10)` with unit per-user symbol energy.
pub fn es_n0_db_to_n0(es_n0_db: f64) -> f64 {
    SYMBOL_ENERGY * 10f64.powf(-es_n0_db / 10.0)
}

pub fn n0_to_es_n0_db(n0: f64) -> f64 {
    10.0 * (SYMBOL_ENERGY / n0).log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn awgn_gains_are_unity() {
        let fg = Codebook::default_scma().factor_graph();
        let ch = draw_channel(ChannelModel::Awgn, &fg, 0.1, &mut seeded(0));
        assert!(ch.gains.iter().all(|&h| h == Complex64::new(1.0, 0.0)));
        assert_eq!(ch.gains.len(), 12);
    }

    #[test]
    fn noiseless_awgn_is_plain_sum() {
        let cb = Codebook::default_scma();
        let fg = cb.factor_graph();
        let ch = ChannelRealization::awgn(&fg, 0.0);
        let symbols = [0, 1, 2, 3, 0, 1];
        let y = transmit(&cb, &fg, &symbols, &ch, &mut seeded(1));
        for k in 0..4 {
            let direct: Complex64 = (0..6).map(|j| cb.entry(j, symbols[j], k)).sum();
            assert!((y[k] - direct).norm() < 1e-15);
        }
    }

    #[test]
    fn single_user_noiseless_faded_codeword() {
        let cb = Codebook::default_scma();
        let fg = FactorGraph::from_supports(4, &[cb.support(2).to_vec()]);
        let only = Codebook::new(
            4,
            vec![(0..4).map(|m| cb.codeword(2, m).to_vec()).collect()],
            vec![(0..4).map(|m| cb.label_bits(2, m)).collect()],
        )
        .unwrap();
        let mut rng = seeded(3);
        let ch = draw_channel(ChannelModel::Rayleigh, &fg, 0.0, &mut rng);
        let y = transmit(&only, &fg, &[1], &ch, &mut rng);
        let mut expected = vec![Complex64::new(0.0, 0.0); 4];
        for (&k, &e) in fg.user_neighbors(0).iter().zip(fg.user_edges(0)) {
            expected[k] = ch.gain(e) * only.entry(0, 1, k);
        }
        assert_eq!(y, expected);
    }

    #[test]
    fn noise_variance_matches_n0() {
        let mut rng = seeded(11);
        let n = 100_000;
        let n0 = 0.5;
        let samples: Vec<Complex64> = (0..n).map(|_| complex_gaussian(&mut rng, n0)).collect();
        let var = samples.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
        // |n|^2 is exponential with mean N0, so the estimator's std is N0/sqrt(n)
        let sigma = n0 / (n as f64).sqrt();
        assert!((var - n0).abs() < 3.0 * sigma, "var = {var}");
    }

    #[test]
    fn rayleigh_unit_power() {
        let fg = Codebook::default_scma().factor_graph();
        let mut rng = seeded(5);
        let draws = 1_000_000 / fg.num_edges();
        let mut acc = 0.0;
        for _ in 0..draws {
            acc += draw_channel(ChannelModel::Rayleigh, &fg, 1.0, &mut rng)
                .gains
                .iter()
                .map(|h| h.norm_sqr())
                .sum::<f64>();
        }
        let mean = acc / (draws * fg.num_edges()) as f64;
        assert!((mean - 1.0).abs() < 0.01, "{mean}");
    }

    #[test]
    fn rayleigh_is_reproducible() {
        let fg = Codebook::default_scma().factor_graph();
        let a = draw_channel(ChannelModel::Rayleigh, &fg, 1.0, &mut seeded(9));
        let b = draw_channel(ChannelModel::Rayleigh, &fg, 1.0, &mut seeded(9));
        assert_eq!(a, b);
    }

    #[test]
    fn es_n0_round_trip() {
        for db in [-10.0, 0.0, 3.7, 4.5, 60.0] {
            assert!((n0_to_es_n0_db(es_n0_db_to_n0(db)) - db).abs() < 1e-12);
        }
        assert!((es_n0_db_to_n0(10.0) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn parse_model() {
        assert_eq!("awgn".parse::<ChannelModel>().unwrap(), ChannelModel::Awgn);
        assert_eq!("rayleigh-iid".parse::<ChannelModel>().unwrap(), ChannelModel::Rayleigh);
        assert!("rician".parse::<ChannelModel>().is_err());
    }
}
