//! Stable log-sum-exp in the Jacobian form, `ln(e^a + e^b) = max(a, b) + ln(1 + e^-|a-b|)`.
//!
//! The n-ary version shifts every term by the running maximum, which is the
//! same identity applied to all terms at once: each term costs one
//! exponential and the whole sum one logarithm.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ops::OpCounters;

/// Magnitude bound applied to bit LLRs throughout the chain.
pub const LLR_CLIP: f64 = 38.0;

/// How log-domain sums are reduced.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LogSumMode {
    /// Exact log-sum-exp (max plus correction term).
    #[default]
    Jacobian,
    /// Keep only the maximum. An approximation, used for complexity studies.
    MaxLog,
}

#[inline]
pub fn clip_llr(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x.clamp(-LLR_CLIP, LLR_CLIP)
    }
}

/// `ln(e^a + e^b)` via the Jacobian logarithm.
#[inline]
pub fn jacobian_log_add(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + (-(a - b).abs()).exp().ln_1p()
}

/// Numerically stable `ln(sum_i e^{v_i})`.
pub fn jacobian_logsumexp(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Invalid("log-sum-exp of an empty list".into()));
    }
    let mut ops = OpCounters::default();
    Ok(logsumexp_counted(values, LogSumMode::Jacobian, &mut ops))
}

/// Log-sum-exp of a non-empty slice, charging `values.len()` exponentials and
/// one logarithm in [`LogSumMode::Jacobian`], nothing in max-log.
#[inline]
pub fn logsumexp_counted(values: &[f64], mode: LogSumMode, ops: &mut OpCounters) -> f64 {
    debug_assert!(!values.is_empty());
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    match mode {
        LogSumMode::MaxLog => m,
        LogSumMode::Jacobian => {
            if m == f64::NEG_INFINITY {
                return m;
            }
            let s: f64 = values.iter().map(|&v| (v - m).exp()).sum();
            ops.exp += values.len() as u64;
            ops.log += 1;
            m + s.ln()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_zeros_give_ln2() {
        let v = jacobian_logsumexp(&[0.0, 0.0]).unwrap();
        assert!((v - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((jacobian_log_add(0.0, 0.0) - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn large_arguments_do_not_overflow() {
        let v = jacobian_logsumexp(&[1000.0, 1000.0]).unwrap();
        assert!((v - (1000.0 + std::f64::consts::LN_2)).abs() < 1e-12);
        let w = jacobian_log_add(1000.0, 1000.0);
        assert!((w - v).abs() < 1e-12);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(jacobian_logsumexp(&[]).is_err());
    }

    #[test]
    fn matches_high_precision_reference() {
        // Reference evaluated with 50-digit arithmetic.
        let v = [
            -2.990928, 22.826429, -19.624864, 38.729827, -8.991141, 21.661439, -23.477886, -25.483335, 31.258163,
            -0.169862, -8.41279, 22.775913, 46.324965, -19.047079, 20.405978, 1.935072,
        ];
        let got = jacobian_logsumexp(&v).unwrap();
        assert!((got - 46.325_468_050_283_600_65).abs() < 1e-10, "{got}");
        let pairwise = v.iter().copied().fold(f64::NEG_INFINITY, jacobian_log_add);
        assert!((pairwise - 46.325_468_050_283_600_65).abs() < 1e-10);
    }

    #[test]
    fn counts_one_exp_per_term() {
        let mut ops = OpCounters::default();
        logsumexp_counted(&[1.0, 2.0, 3.0], LogSumMode::Jacobian, &mut ops);
        assert_eq!((ops.exp, ops.log), (3, 1));
        logsumexp_counted(&[1.0, 2.0, 3.0], LogSumMode::MaxLog, &mut ops);
        assert_eq!((ops.exp, ops.log), (3, 1));
    }

    #[test]
    fn negative_infinity_terms() {
        assert_eq!(jacobian_logsumexp(&[f64::NEG_INFINITY; 3]).unwrap(), f64::NEG_INFINITY);
        assert_eq!(jacobian_logsumexp(&[f64::NEG_INFINITY, 0.5]).unwrap(), 0.5);
    }
}
