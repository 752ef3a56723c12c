//! Joint iterative detection and decoding.
//!
//! One outer iteration runs `i_t` MPA iterations on every SCMA slot, turns
//! the symbol LLRs into intrinsic bit LLRs, deinterleaves them, runs `i_l`
//! BP iterations per user and sends the decoder's intrinsic LLRs back through
//! the interleaver as the next detector prior.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bridge::{bits_to_symbol_llr_into, extract_intrinsic, Interleaver};
use crate::channel::ChannelRealization;
use crate::codebook::{Codebook, FactorGraph};
use crate::detector::LogMpa;
use crate::error::{Error, Result};
use crate::ldpc::{BitLlr, BpDecoder, CheckRule, DecoderConfig, ParityCheckMatrix};
use crate::logsum::LogSumMode;
use crate::ops::StageOps;

/// Iteration counts of one receiver configuration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IterationSchedule {
    pub name: String,
    /// MPA iterations per outer iteration
    pub i_t: usize,
    /// BP iterations per outer iteration
    pub i_l: usize,
    /// outer iterations
    pub i_o: usize,
}

impl IterationSchedule {
    pub fn new(name: impl Into<String>, i_t: usize, i_l: usize, i_o: usize) -> Result<Self> {
        let s = IterationSchedule {
            name: name.into(),
            i_t,
            i_l,
            i_o,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.i_t < 1 || self.i_l < 1 || self.i_o < 1 {
            return Err(Error::Config(format!(
                "schedule '{}': i_t, i_l and i_o must all be at least 1 (got {}, {}, {})",
                self.name, self.i_t, self.i_l, self.i_o
            )));
        }
        Ok(())
    }

    /// A single pass of detection followed by decoding.
    pub fn is_traditional(&self) -> bool {
        self.i_o == 1
    }

    /// `i_t = 1, i_l = 1, i_o = 32`.
    pub fn mode1() -> Self {
        Self::preset("mode1", 1, 1, 32)
    }

    /// `i_t = 2, i_l = 8, i_o = 4`.
    pub fn mode2() -> Self {
        Self::preset("mode2", 2, 8, 4)
    }

    /// `i_t = 4, i_l = 16, i_o = 2`. The counts are a midpoint between modes 2
    /// and 4 with the same budget, not values taken from a published table.
    pub fn mode3() -> Self {
        Self::preset("mode3", 4, 16, 2)
    }

    /// Traditional receiver: `i_t = 8, i_l = 32, i_o = 1`.
    pub fn mode4() -> Self {
        Self::preset("mode4", 8, 32, 1)
    }

    pub fn presets() -> Vec<Self> {
        vec![Self::mode1(), Self::mode2(), Self::mode3(), Self::mode4()]
    }

    pub fn preset_named(name: &str) -> Option<Self> {
        Self::presets().into_iter().find(|s| s.name == name)
    }

    fn preset(name: &str, i_t: usize, i_l: usize, i_o: usize) -> Self {
        IterationSchedule {
            name: name.into(),
            i_t,
            i_l,
            i_o,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReceiverOptions {
    pub log_sum: LogSumMode,
    pub check_rule: CheckRule,
    /// Keep MPA messages across outer iterations instead of restarting from
    /// neutral ones. Decoder messages always restart.
    pub persist_messages: bool,
    /// Stop BP early once the syndrome is satisfied.
    pub early_exit: bool,
}

impl Default for ReceiverOptions {
    fn default() -> Self {
        ReceiverOptions {
            log_sum: LogSumMode::Jacobian,
            check_rule: CheckRule::TanhProduct,
            persist_messages: false,
            early_exit: false,
        }
    }
}

/// Everything the receiver needs besides the received signal.
#[derive(Clone, Copy, Debug)]
pub struct Components<'a> {
    pub codebook: &'a Codebook,
    pub graph: &'a FactorGraph,
    pub code: &'a ParityCheckMatrix,
    pub interleaver: &'a Interleaver,
    pub options: ReceiverOptions,
}

impl Components<'_> {
    pub fn validate(&self) -> Result<()> {
        let bits = self.codebook.bits_per_symbol();
        let n = self.code.n_bits();
        if !n.is_multiple_of(bits) {
            return Err(Error::Dimension(format!(
                "code length {n} is not a multiple of {bits} bits per symbol"
            )));
        }
        if self.interleaver.len() != n || self.interleaver.users() != self.codebook.users() {
            return Err(Error::Dimension(format!(
                "interleaver covers {} users x {} bits, expected {} x {n}",
                self.interleaver.users(),
                self.interleaver.len(),
                self.codebook.users()
            )));
        }
        if self.graph.users() != self.codebook.users() || self.graph.resources() != self.codebook.resources() {
            return Err(Error::Dimension("factor graph does not match the codebook".into()));
        }
        if self.code.n_checks() >= n {
            return Err(Error::Dimension("code has no information bits".into()));
        }
        Ok(())
    }

    /// SCMA slots per frame.
    pub fn slots(&self) -> usize {
        self.code.n_bits() / self.codebook.bits_per_symbol()
    }

    pub fn info_bits(&self) -> usize {
        self.code.n_bits() - self.code.n_checks()
    }
}

/// Received samples and channel state of one frame, one entry per slot.
#[derive(Clone, Debug, PartialEq)]
pub struct ReceivedFrame {
    pub y: Vec<Vec<Complex64>>,
    pub channels: Vec<ChannelRealization>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OuterDiagnostics {
    /// Per user: the decoder's hard decisions satisfy every check.
    pub syndrome_ok: Vec<bool>,
    /// Mean `|L|` of the intrinsic bit LLRs handed to the decoders.
    pub detector_mean_abs: f64,
    /// Mean `|L|` of the decoder totals.
    pub decoder_mean_abs: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReceiverOutput {
    /// Decoded codeword bits per user, code order.
    pub coded_bits: Vec<Vec<u8>>,
    /// Leading information bits of each decoded codeword.
    pub info_bits: Vec<Vec<u8>>,
    /// Final decoder LLRs per user, code order.
    pub decoder_llr: Vec<BitLlr>,
    pub outer: Vec<OuterDiagnostics>,
    pub ops: StageOps,
}

/// Information bits from decoder LLRs: `b = 0` iff `L >= 0`.
pub fn hard_decide(llr: &[f64], n_info: usize) -> Vec<u8> {
    llr[..n_info].iter().map(|&l| u8::from(l < 0.0)).collect()
}

pub fn run_receiver(frame: &ReceivedFrame, schedule: &IterationSchedule, comp: &Components) -> Result<ReceiverOutput> {
    schedule.validate()?;
    comp.validate()?;
    let cb = comp.codebook;
    let users = cb.users();
    let m = cb.size();
    let bits = cb.bits_per_symbol();
    let n = comp.code.n_bits();
    let slots = comp.slots();
    if frame.y.len() != slots || frame.channels.len() != slots {
        return Err(Error::Dimension(format!(
            "frame has {} samples and {} channel states, expected {slots} slots",
            frame.y.len(),
            frame.channels.len()
        )));
    }

    let mut mpa = LogMpa::new(cb, comp.graph, comp.options.log_sum);
    let mut decoder = BpDecoder::new(comp.code);
    let dec_config = DecoderConfig {
        iterations: schedule.i_l,
        rule: comp.options.check_rule,
        early_exit: comp.options.early_exit,
    };
    let mut ops = StageOps::default();
    let mut stores = if comp.options.persist_messages {
        (0..slots).map(|_| mpa.new_store()).collect()
    } else {
        vec![mpa.new_store()]
    };

    // interleaved order, as seen by the detector
    let mut det_prior = vec![vec![0.0; n]; users];
    let mut det_intrinsic = vec![vec![0.0; n]; users];
    let mut sym_prior = vec![0.0; users * m];
    let mut decoded = Vec::with_capacity(users);
    let mut outer = Vec::with_capacity(schedule.i_o);

    for _ in 0..schedule.i_o {
        for s in 0..slots {
            let span = s * bits..(s + 1) * bits;
            for j in 0..users {
                bits_to_symbol_llr_into(&det_prior[j][span.clone()], cb, j, &mut sym_prior[j * m..(j + 1) * m]);
            }
            let store = if comp.options.persist_messages {
                &mut stores[s]
            } else {
                stores[0].reset();
                &mut stores[0]
            };
            let out = mpa.run(&frame.y[s], &frame.channels[s], &sym_prior, schedule.i_t, store)?;
            for j in 0..users {
                extract_intrinsic(
                    out.total(j),
                    &det_prior[j][span.clone()],
                    cb,
                    j,
                    comp.options.log_sum,
                    &mut det_intrinsic[j][span.clone()],
                    &mut ops.bridge,
                );
            }
        }
        ops.detector += mpa.take_ops();

        decoded.clear();
        let mut syndrome_ok = Vec::with_capacity(users);
        let mut det_abs = 0.0;
        let mut dec_abs = 0.0;
        for j in 0..users {
            det_abs += det_intrinsic[j].iter().map(|l| l.abs()).sum::<f64>();
            let prior = comp.interleaver.deinterleave(j, &det_intrinsic[j])?;
            let out = decoder.decode(&prior, &dec_config)?;
            dec_abs += out.llr.total.iter().map(|l| l.abs()).sum::<f64>();
            syndrome_ok.push(out.syndrome_ok);
            det_prior[j] = comp.interleaver.interleave(j, &out.llr.intrinsic)?;
            decoded.push(out);
        }
        ops.decoder += decoder.take_ops();
        let count = (users * n) as f64;
        outer.push(OuterDiagnostics {
            syndrome_ok,
            detector_mean_abs: det_abs / count,
            decoder_mean_abs: dec_abs / count,
        });
    }

    let n_info = comp.info_bits();
    let info_bits = decoded.iter().map(|d| hard_decide(&d.llr.total, n_info)).collect();
    let coded_bits = decoded.iter().map(|d| d.hard.clone()).collect();
    Ok(ReceiverOutput {
        coded_bits,
        info_bits,
        decoder_llr: decoded.into_iter().map(|d| d.llr).collect(),
        outer,
        ops,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bridge::symbol_to_bit_llr;
    use crate::channel::{draw_channel, es_n0_db_to_n0, transmit, ChannelModel};
    use crate::detector::detect_log;
    use crate::ldpc::{decode_bp, peg, SystematicEncoder};
    use crate::rng::seeded;
    use rand::Rng;

    struct Setup {
        cb: Codebook,
        fg: FactorGraph,
        code: ParityCheckMatrix,
        enc: SystematicEncoder,
        il: Interleaver,
    }

    fn setup() -> Setup {
        let cb = Codebook::default_scma();
        let fg = cb.factor_graph();
        let raw = peg::construct(96, 3, 6, &mut seeded(2)).unwrap();
        let code = raw.permute_columns(&peg::systematic_order(&raw).unwrap());
        let enc = SystematicEncoder::from_pcm(&code).unwrap();
        let il = Interleaver::new(6, 96, 5);
        Setup { cb, fg, code, enc, il }
    }

    fn frame(s: &Setup, model: ChannelModel, db: f64, seed: u64) -> (Vec<Vec<u8>>, ReceivedFrame) {
        let mut rng = seeded(seed);
        let n0 = es_n0_db_to_n0(db);
        let mut info = Vec::new();
        let mut tx = Vec::new();
        for j in 0..6 {
            let d: Vec<u8> = (0..s.enc.n_info()).map(|_| rng.random_range(0..2)).collect();
            let c = s.enc.encode(&d).unwrap();
            tx.push(s.il.interleave(j, &c).unwrap());
            info.push(d);
        }
        let mut y = Vec::new();
        let mut channels = Vec::new();
        for slot in 0..48 {
            let symbols: Vec<usize> = (0..6)
                .map(|j| s.cb.index_of_bits(j, &tx[j][2 * slot..2 * slot + 2]).unwrap())
                .collect();
            let ch = draw_channel(model, &s.fg, n0, &mut rng);
            y.push(transmit(&s.cb, &s.fg, &symbols, &ch, &mut rng));
            channels.push(ch);
        }
        (info, ReceivedFrame { y, channels })
    }

    fn comp(s: &Setup) -> Components<'_> {
        Components {
            codebook: &s.cb,
            graph: &s.fg,
            code: &s.code,
            interleaver: &s.il,
            options: ReceiverOptions::default(),
        }
    }

    #[test]
    fn schedule_validation() {
        assert!(IterationSchedule::new("x", 0, 1, 1).is_err());
        assert!(IterationSchedule::new("x", 1, 0, 1).is_err());
        assert!(IterationSchedule::new("x", 1, 1, 0).is_err());
        assert!(IterationSchedule::mode4().is_traditional());
        assert_eq!(IterationSchedule::preset_named("mode2").unwrap().i_l, 8);
        for p in IterationSchedule::presets().into_iter().skip(1) {
            assert_eq!(p.i_t * p.i_o, 8, "{}", p.name);
            assert_eq!(p.i_l * p.i_o, 32, "{}", p.name);
        }
    }

    #[test]
    fn noiseless_frame_decodes() {
        let s = setup();
        let (info, fr) = frame(&s, ChannelModel::Awgn, 40.0, 1);
        for sched in IterationSchedule::presets() {
            let out = run_receiver(&fr, &sched, &comp(&s)).unwrap();
            assert_eq!(out.info_bits, info, "{}", sched.name);
            assert_eq!(out.outer.len(), sched.i_o);
            assert!(out.outer.last().unwrap().syndrome_ok.iter().all(|&b| b));
        }
    }

    #[test]
    fn traditional_mode_is_detect_then_decode() {
        let s = setup();
        let (_, fr) = frame(&s, ChannelModel::Rayleigh, 6.0, 8);
        let out = run_receiver(&fr, &IterationSchedule::mode4(), &comp(&s)).unwrap();
        let mut llr = vec![vec![0.0; 96]; 6];
        for slot in 0..48 {
            let det = detect_log(&s.cb, &s.fg, &fr.y[slot], &fr.channels[slot], None, 8).unwrap();
            for j in 0..6 {
                let b = symbol_to_bit_llr(&det, &s.cb, j);
                llr[j][2 * slot..2 * slot + 2].copy_from_slice(&b.intrinsic);
            }
        }
        for j in 0..6 {
            let prior = s.il.deinterleave(j, &llr[j]).unwrap();
            let dec = decode_bp(&s.code, &prior, 32).unwrap();
            for (a, b) in dec.llr.total.iter().zip(&out.decoder_llr[j].total) {
                assert!((a - b).abs() < 1e-9);
            }
            assert_eq!(dec.hard, out.coded_bits[j]);
        }
    }

    #[test]
    fn persistence_changes_only_multi_outer_runs() {
        let s = setup();
        let (_, fr) = frame(&s, ChannelModel::Awgn, 3.0, 4);
        let mut c = comp(&s);
        let base = run_receiver(&fr, &IterationSchedule::mode4(), &c).unwrap();
        c.options.persist_messages = true;
        let kept = run_receiver(&fr, &IterationSchedule::mode4(), &c).unwrap();
        assert_eq!(base, kept);
        let two = run_receiver(&fr, &IterationSchedule::mode2(), &c).unwrap();
        assert_eq!(two.outer.len(), 4);
    }

    #[test]
    fn ops_scale_with_schedule() {
        let s = setup();
        let (_, fr) = frame(&s, ChannelModel::Awgn, 3.0, 6);
        let a = run_receiver(&fr, &IterationSchedule::mode4(), &comp(&s)).unwrap().ops;
        let b = run_receiver(&fr, &IterationSchedule::mode2(), &comp(&s)).unwrap().ops;
        // same detector and decoder iteration totals
        assert_eq!(a.detector, b.detector);
        assert_eq!(a.decoder, b.decoder);
        assert_eq!(a.detector.exp, 8 * 48 * 768);
        // one bit extraction per outer iteration
        assert_eq!(b.bridge.exp, 4 * a.bridge.exp);
        assert_eq!(a.bridge.exp, 48 * 6 * 8);
        assert_eq!(a.bridge.log, 48 * 6 * 4);
    }

    #[test]
    fn dimension_errors() {
        let s = setup();
        let (_, mut fr) = frame(&s, ChannelModel::Awgn, 3.0, 6);
        fr.y.pop();
        assert!(run_receiver(&fr, &IterationSchedule::mode2(), &comp(&s)).is_err());
        let short = Interleaver::new(6, 94, 1);
        let mut c = comp(&s);
        c.interleaver = &short;
        assert!(c.validate().is_err());
    }

    #[test]
    fn hard_decision_threshold() {
        assert_eq!(hard_decide(&[0.0, -0.0, -1e-300, 3.0, -2.0], 4), vec![0, 0, 1, 0]);
    }
}
