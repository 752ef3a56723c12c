//! Monte Carlo BER sweeps, operation accounting and result files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bridge::Interleaver;
use crate::channel::{draw_channel, es_n0_db_to_n0, transmit, ChannelModel};
use crate::codebook::{Codebook, FactorGraph};
use crate::detector::{detect_log, exact_map_oracle};
use crate::error::{Error, Result};
use crate::ldpc::{ParityCheckMatrix, SystematicEncoder};
use crate::ops::{OpRates, StageOps};
use crate::receiver::{run_receiver, Components, IterationSchedule, ReceivedFrame, ReceiverOptions};
use crate::rng::{frame_stream, seeded};

/// When to stop simulating one sweep cell.
///
/// Frames run in batches of `batch_frames`; after each batch the cell stops
/// once it has both `min_frames` frames and `min_bit_errors` bit errors, or
/// `max_frames` frames in total.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StoppingRule {
    pub min_frames: u64,
    pub min_bit_errors: u64,
    pub max_frames: u64,
    pub batch_frames: u64,
}

impl Default for StoppingRule {
    fn default() -> Self {
        StoppingRule {
            min_frames: 20,
            min_bit_errors: 100,
            max_frames: 20_000,
            batch_frames: 8,
        }
    }
}

impl StoppingRule {
    pub fn validate(&self) -> Result<()> {
        if self.min_frames < 1 || self.max_frames < 1 || self.batch_frames < 1 {
            return Err(Error::Config(
                "stopping: min_frames, max_frames and batch_frames must be at least 1".into(),
            ));
        }
        if self.max_frames < self.min_frames {
            return Err(Error::Config(format!(
                "stopping: max_frames ({}) is below min_frames ({})",
                self.max_frames, self.min_frames
            )));
        }
        Ok(())
    }

    pub fn done(&self, frames: u64, bit_errors: u64) -> bool {
        (frames >= self.min_frames && bit_errors >= self.min_bit_errors) || frames >= self.max_frames
    }
}

/// Es/N0 points, either listed or as an inclusive range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl Grid {
    pub fn points(&self) -> Result<Vec<f64>> {
        let pts = match self {
            Grid::List(v) => v.clone(),
            Grid::Range { start, stop, step } => {
                if !(*step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
                    return Err(Error::Config(format!(
                        "invalid Es/N0 range {start}..={stop} step {step}"
                    )));
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
                (0..n).map(|i| start + i as f64 * step).collect()
            }
        };
        if pts.is_empty() {
            return Err(Error::Config("the Es/N0 grid is empty".into()));
        }
        if let Some(bad) = pts.iter().find(|p| !p.is_finite()) {
            return Err(Error::Config(format!("Es/N0 point {bad} is not finite")));
        }
        Ok(pts)
    }
}

/// A schedule given by preset name or spelled out.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModeSpec {
    Preset(String),
    Custom(IterationSchedule),
}

impl ModeSpec {
    pub fn resolve(&self) -> Result<IterationSchedule> {
        match self {
            ModeSpec::Preset(name) => IterationSchedule::preset_named(name)
                .ok_or_else(|| Error::Config(format!("unknown mode '{name}' (expected mode1..mode4 or a table)"))),
            ModeSpec::Custom(s) => {
                s.validate()?;
                Ok(s.clone())
            }
        }
    }
}

fn default_master_seed() -> u64 {
    1
}

fn default_interleaver_seed() -> u64 {
    0x5eed
}

/// Full description of a sweep, as read from TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    /// Codebook TOML; the built-in J=6, K=4, M=4 book when absent.
    #[serde(default)]
    pub codebook: Option<PathBuf>,
    pub alist: PathBuf,
    /// Generator cache; derived from the alist when absent.
    #[serde(default)]
    pub generator: Option<PathBuf>,
    pub channels: Vec<ChannelModel>,
    pub es_n0_db: Grid,
    pub modes: Vec<ModeSpec>,
    #[serde(default)]
    pub stopping: StoppingRule,
    #[serde(default)]
    pub receiver: ReceiverOptions,
    #[serde(default = "default_master_seed")]
    pub master_seed: u64,
    #[serde(default = "default_interleaver_seed")]
    pub interleaver_seed: u64,
    /// CSV destination.
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Worker threads; 0 uses every available core, 1 runs serially.
    #[serde(default)]
    pub workers: usize,
}

impl SimConfig {
    /// Parses and validates a config. Relative paths are resolved against
    /// `base_dir`.
    pub fn from_toml_str(source: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: SimConfig = toml::from_str(source)?;
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base_dir.join(&*p);
            }
        };
        fix(&mut cfg.alist);
        cfg.codebook.as_mut().map(fix);
        cfg.generator.as_mut().map(fix);
        cfg.output.as_mut().map(fix);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml_str(&text, base)
    }

    pub fn validate(&self) -> Result<()> {
        self.es_n0_db.points()?;
        if self.channels.is_empty() {
            return Err(Error::Config("no channel model selected".into()));
        }
        if self.modes.is_empty() {
            return Err(Error::Config("no receiver mode selected".into()));
        }
        for m in &self.modes {
            m.resolve()?;
        }
        self.stopping.validate()
    }

    pub fn schedules(&self) -> Result<Vec<IterationSchedule>> {
        self.modes.iter().map(ModeSpec::resolve).collect()
    }
}

/// Transmitter and receiver components shared by every frame.
#[derive(Clone, Debug)]
pub struct Link {
    pub codebook: Codebook,
    pub graph: FactorGraph,
    pub code: ParityCheckMatrix,
    pub encoder: SystematicEncoder,
    pub interleaver: Interleaver,
}

impl Link {
    pub fn new(
        codebook: Codebook,
        code: ParityCheckMatrix,
        encoder: SystematicEncoder,
        interleaver_seed: u64,
    ) -> Result<Self> {
        if encoder.fingerprint() != code.fingerprint() {
            return Err(Error::Generator(
                "generator does not belong to this parity-check matrix".into(),
            ));
        }
        let graph = codebook.factor_graph();
        let interleaver = Interleaver::new(codebook.users(), code.n_bits(), interleaver_seed);
        let link = Link {
            codebook,
            graph,
            code,
            encoder,
            interleaver,
        };
        link.components(ReceiverOptions::default()).validate()?;
        Ok(link)
    }

    /// Link with the encoder derived from the matrix.
    pub fn with_code(codebook: Codebook, code: ParityCheckMatrix, interleaver_seed: u64) -> Result<Self> {
        let encoder = SystematicEncoder::from_pcm(&code)?;
        Self::new(codebook, code, encoder, interleaver_seed)
    }

    pub fn from_config(cfg: &SimConfig) -> Result<Self> {
        let codebook = match &cfg.codebook {
            Some(p) => Codebook::load(p)?,
            None => Codebook::default_scma(),
        };
        let code = ParityCheckMatrix::load_alist(&cfg.alist)?;
        let encoder = match &cfg.generator {
            Some(p) => SystematicEncoder::load_for(&code, &std::fs::read(p)?)?,
            None => SystematicEncoder::from_pcm(&code)?,
        };
        Self::new(codebook, code, encoder, cfg.interleaver_seed)
    }

    pub fn components(&self, options: ReceiverOptions) -> Components<'_> {
        Components {
            codebook: &self.codebook,
            graph: &self.graph,
            code: &self.code,
            interleaver: &self.interleaver,
            options,
        }
    }

    pub fn slots(&self) -> usize {
        self.code.n_bits() / self.codebook.bits_per_symbol()
    }

    /// Draws information bits for every user, encodes, interleaves, maps and
    /// sends them through the channel.
    pub fn transmit_frame<R: Rng + ?Sized>(
        &self,
        model: ChannelModel,
        n0: f64,
        rng: &mut R,
    ) -> Result<(Vec<Vec<u8>>, ReceivedFrame)> {
        let users = self.codebook.users();
        let bits = self.codebook.bits_per_symbol();
        let mut info = Vec::with_capacity(users);
        let mut sent = Vec::with_capacity(users);
        for j in 0..users {
            let d: Vec<u8> = (0..self.encoder.n_info())
                .map(|_| u8::from(rng.random::<bool>()))
                .collect();
            let c = self.encoder.encode(&d)?;
            sent.push(self.interleaver.interleave(j, &c)?);
            info.push(d);
        }
        let slots = self.slots();
        let mut y = Vec::with_capacity(slots);
        let mut channels = Vec::with_capacity(slots);
        let mut symbols = vec![0; users];
        for s in 0..slots {
            for j in 0..users {
                symbols[j] = self.codebook.index_of_bits(j, &sent[j][s * bits..(s + 1) * bits])?;
            }
            let ch = draw_channel(model, &self.graph, n0, rng);
            y.push(transmit(&self.codebook, &self.graph, &symbols, &ch, rng));
            channels.push(ch);
        }
        Ok((info, ReceivedFrame { y, channels }))
    }
}

/// Error and operation counts of one frame.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FrameOutcome {
    pub bits: u64,
    pub bit_errors: u64,
    pub frame_error: bool,
    pub ops: StageOps,
}

pub fn simulate_frame<R: Rng + ?Sized>(
    link: &Link,
    schedule: &IterationSchedule,
    options: ReceiverOptions,
    model: ChannelModel,
    n0: f64,
    rng: &mut R,
) -> Result<FrameOutcome> {
    let (info, frame) = link.transmit_frame(model, n0, rng)?;
    let out = run_receiver(&frame, schedule, &link.components(options))?;
    let mut errors = 0u64;
    let mut bits = 0u64;
    for (sent, got) in info.iter().zip(&out.info_bits) {
        bits += sent.len() as u64;
        errors += sent.iter().zip(got).filter(|(a, b)| a != b).count() as u64;
    }
    Ok(FrameOutcome {
        bits,
        bit_errors: errors,
        frame_error: errors > 0,
        ops: out.ops,
    })
}

/// One (channel, mode, Es/N0) point.
#[derive(Clone, Debug, PartialEq)]
pub struct CellResult {
    pub channel: ChannelModel,
    pub mode: String,
    pub es_n0_db: f64,
    pub frames: u64,
    pub bits: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    /// User symbols processed (frames x slots x users).
    pub symbols: u64,
    pub ops: StageOps,
    pub seconds: f64,
}

impl CellResult {
    pub fn ber(&self) -> f64 {
        ratio(self.bit_errors, self.bits)
    }

    pub fn fer(&self) -> f64 {
        ratio(self.frame_errors, self.frames)
    }

    /// Mean operations per user symbol, all stages.
    pub fn ops_per_symbol(&self) -> OpRates {
        OpRates::from_counts(self.ops.total(), self.symbols.max(1) as f64)
    }

    /// Identical counts, ignoring wall time.
    pub fn same_counts(&self, other: &CellResult) -> bool {
        CellResult {
            seconds: 0.0,
            ..self.clone()
        } == CellResult {
            seconds: 0.0,
            ..other.clone()
        }
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Where one cell sits in the sweep; `cell` selects the random streams.
#[derive(Clone, Debug, PartialEq)]
pub struct CellSpec {
    pub channel: ChannelModel,
    pub schedule: IterationSchedule,
    pub es_n0_db: f64,
    pub cell: u64,
}

/// Simulates one cell. With a pool, frames of each batch run in parallel;
/// counts are summed in frame order either way.
pub fn run_cell(
    link: &Link,
    spec: &CellSpec,
    options: ReceiverOptions,
    stopping: &StoppingRule,
    master_seed: u64,
    pool: Option<&rayon::ThreadPool>,
) -> Result<CellResult> {
    stopping.validate()?;
    let start = Instant::now();
    let n0 = es_n0_db_to_n0(spec.es_n0_db);
    let one = |f: u64| {
        let mut rng = frame_stream(master_seed, spec.cell, f);
        simulate_frame(link, &spec.schedule, options, spec.channel, n0, &mut rng)
    };
    let mut res = CellResult {
        channel: spec.channel,
        mode: spec.schedule.name.clone(),
        es_n0_db: spec.es_n0_db,
        frames: 0,
        bits: 0,
        bit_errors: 0,
        frame_errors: 0,
        symbols: 0,
        ops: StageOps::default(),
        seconds: 0.0,
    };
    while !stopping.done(res.frames, res.bit_errors) {
        let end = (res.frames + stopping.batch_frames).min(stopping.max_frames);
        let batch: Vec<FrameOutcome> = match pool {
            Some(pool) => pool.install(|| (res.frames..end).into_par_iter().map(one).collect::<Result<_>>())?,
            None => (res.frames..end).map(one).collect::<Result<_>>()?,
        };
        for o in batch {
            res.frames += 1;
            res.bits += o.bits;
            res.bit_errors += o.bit_errors;
            res.frame_errors += u64::from(o.frame_error);
            res.ops += o.ops;
        }
    }
    res.symbols = res.frames * (link.slots() * link.codebook.users()) as u64;
    res.seconds = start.elapsed().as_secs_f64();
    Ok(res)
}

/// Enumerates the cells of a config: channel-major, then mode, then Es/N0.
/// All modes at the same (channel, Es/N0) share random streams, so they see
/// the same frames.
pub fn cells(cfg: &SimConfig) -> Result<Vec<CellSpec>> {
    let points = cfg.es_n0_db.points()?;
    let schedules = cfg.schedules()?;
    let mut out = Vec::new();
    for (ci, &channel) in cfg.channels.iter().enumerate() {
        for sched in &schedules {
            for (pi, &db) in points.iter().enumerate() {
                out.push(CellSpec {
                    channel,
                    schedule: sched.clone(),
                    es_n0_db: db,
                    cell: (ci * points.len() + pi) as u64,
                });
            }
        }
    }
    Ok(out)
}

/// Runs every cell of `cfg`, calling `progress` after each one.
pub fn run_sweep_with(cfg: &SimConfig, link: &Link, mut progress: impl FnMut(&CellResult)) -> Result<Vec<CellResult>> {
    cfg.validate()?;
    let pool = if cfg.workers == 1 {
        None
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::Invalid(format!("cannot start worker pool: {e}")))?;
        Some(pool)
    };
    let mut results = Vec::new();
    for spec in cells(cfg)? {
        let r = run_cell(link, &spec, cfg.receiver, &cfg.stopping, cfg.master_seed, pool.as_ref())?;
        progress(&r);
        results.push(r);
    }
    Ok(results)
}

pub fn run_sweep(cfg: &SimConfig) -> Result<Vec<CellResult>> {
    let link = Link::from_config(cfg)?;
    run_sweep_with(cfg, &link, |_| {})
}

/// Es/N0 at which the BER curve of one (channel, mode) first drops to
/// `target`, interpolating linearly in `log10(BER)` between grid points.
pub fn ber_crossing(results: &[CellResult], channel: ChannelModel, mode: &str, target: f64) -> Option<f64> {
    let mut pts: Vec<(f64, f64)> = results
        .iter()
        .filter(|r| r.channel == channel && r.mode == mode)
        .map(|r| (r.es_n0_db, r.ber()))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let first = pts.first()?;
    if first.1 <= target {
        return Some(first.0);
    }
    for w in pts.windows(2) {
        let ((x0, b0), (x1, b1)) = (w[0], w[1]);
        if b1 <= target {
            if b1 <= 0.0 {
                return Some(x1);
            }
            let (l0, l1, lt) = (b0.log10(), b1.log10(), target.log10());
            return Some(x0 + (x1 - x0) * (l0 - lt) / (l0 - l1));
        }
    }
    None
}

/// Points where a curve's BER rises with Es/N0 by more than the combined
/// 95% binomial half-widths.
pub fn monotonicity_flags(results: &[CellResult]) -> Vec<(ChannelModel, String, f64)> {
    let mut flags = Vec::new();
    let half = |r: &CellResult| {
        let p = r.ber();
        1.96 * (p * (1.0 - p) / r.bits.max(1) as f64).sqrt()
    };
    let mut keys: Vec<(ChannelModel, String)> = results.iter().map(|r| (r.channel, r.mode.clone())).collect();
    keys.dedup();
    for (ch, mode) in keys {
        let mut curve: Vec<&CellResult> = results.iter().filter(|r| r.channel == ch && r.mode == mode).collect();
        curve.sort_by(|a, b| a.es_n0_db.total_cmp(&b.es_n0_db));
        for w in curve.windows(2) {
            if w[1].ber() - w[0].ber() > half(w[0]) + half(w[1]) {
                flags.push((ch, mode.clone(), w[1].es_n0_db));
            }
        }
    }
    flags
}

#[derive(Serialize)]
struct CsvRow<'a> {
    channel: String,
    mode: &'a str,
    es_n0_db: f64,
    frames: u64,
    bits: u64,
    bit_errors: u64,
    ber: f64,
    fer: f64,
    ops_mul: f64,
    ops_div: f64,
    ops_exp: f64,
    ops_log: f64,
    seconds: f64,
}

/// Writes the CSV to `path` and a matplotlib script next to it
/// (`<stem>_plot.py`). Returns the script path.
pub fn emit_results(results: &[CellResult], path: &Path) -> Result<PathBuf> {
    if results.is_empty() {
        return Err(Error::Invalid("no results to write".into()));
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    for r in results {
        let ops = r.ops_per_symbol();
        w.serialize(CsvRow {
            channel: r.channel.to_string(),
            mode: &r.mode,
            es_n0_db: r.es_n0_db,
            frames: r.frames,
            bits: r.bits,
            bit_errors: r.bit_errors,
            ber: r.ber(),
            fer: r.fer(),
            ops_mul: ops.mul,
            ops_div: ops.div,
            ops_exp: ops.exp,
            ops_log: ops.log,
            seconds: (r.seconds * 1000.0).round() / 1000.0,
        })?;
    }
    w.flush()?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("results");
    let script = path.with_file_name(format!("{stem}_plot.py"));
    let csv_name = path.file_name().and_then(|s| s.to_str()).unwrap_or("results.csv");
    std::fs::write(&script, plot_script(csv_name))?;
    Ok(script)
}

fn plot_script(csv_name: &str) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        r#"#!/usr/bin/env python3
"""BER against Es/N0 for every (channel, mode) in {csv_name}."""
import csv
import os
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
src = sys.argv[1] if len(sys.argv) > 1 else os.path.join(here, "{csv_name}")
curves = defaultdict(list)
with open(src, newline="") as f:
    for row in csv.DictReader(f):
        curves[(row["channel"], row["mode"])].append((float(row["es_n0_db"]), float(row["ber"])))

channels = sorted({{c for c, _ in curves}})
fig, axes = plt.subplots(1, len(channels), figsize=(6 * len(channels), 4.5), squeeze=False)
for ax, channel in zip(axes[0], channels):
    for (c, mode), pts in sorted(curves.items()):
        if c != channel:
            continue
        pts.sort()
        xs = [x for x, b in pts if b > 0]
        ys = [b for x, b in pts if b > 0]
        ax.semilogy(xs, ys, marker="o", label=mode)
    ax.set_title(channel)
    ax.set_xlabel("Es/N0 (dB)")
    ax.set_ylabel("BER")
    ax.grid(True, which="both", alpha=0.4)
    ax.legend()
fig.tight_layout()
out = os.path.splitext(src)[0] + ".png"
fig.savefig(out, dpi=150)
print(out)
"#
    );
    s
}

/// Symbol error counts of MPA against exact marginal MAP on the same
/// uncoded realizations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UncodedReport {
    /// User symbols (slots x users).
    pub symbols: u64,
    pub mpa_errors: u64,
    pub map_errors: u64,
}

impl UncodedReport {
    pub fn mpa_ser(&self) -> f64 {
        ratio(self.mpa_errors, self.symbols)
    }

    pub fn map_ser(&self) -> f64 {
        ratio(self.map_errors, self.symbols)
    }

    /// 95% normal-approximation half-width of the MAP symbol error rate.
    pub fn map_half_width(&self) -> f64 {
        let p = self.map_ser();
        1.96 * (p * (1.0 - p) / self.symbols.max(1) as f64).sqrt()
    }
}

/// Sends `slots` uncoded SCMA symbols with uniform random data and compares
/// MPA decisions after `iterations` rounds with marginal MAP decisions.
pub fn uncoded_ser(
    cb: &Codebook,
    model: ChannelModel,
    es_n0_db: f64,
    slots: u64,
    iterations: usize,
    seed: u64,
) -> Result<UncodedReport> {
    let fg = cb.factor_graph();
    let n0 = es_n0_db_to_n0(es_n0_db);
    let mut rng = seeded(seed);
    let mut rep = UncodedReport {
        symbols: 0,
        mpa_errors: 0,
        map_errors: 0,
    };
    for _ in 0..slots {
        let sent: Vec<usize> = (0..cb.users()).map(|_| rng.random_range(0..cb.size())).collect();
        let ch = draw_channel(model, &fg, n0, &mut rng);
        let y = transmit(cb, &fg, &sent, &ch, &mut rng);
        let mpa = detect_log(cb, &fg, &y, &ch, None, iterations)?.decisions();
        let map = exact_map_oracle(cb, &fg, &y, &ch, None)?.marginal_map;
        rep.symbols += sent.len() as u64;
        rep.mpa_errors += sent.iter().zip(&mpa).filter(|(a, b)| a != b).count() as u64;
        rep.map_errors += sent.iter().zip(&map).filter(|(a, b)| a != b).count() as u64;
    }
    Ok(rep)
}

/// Closed-form operation counts per user symbol.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PredictedOps {
    pub detector: OpRates,
    pub decoder: OpRates,
    pub bridge: OpRates,
}

impl PredictedOps {
    pub fn total(&self) -> OpRates {
        self.detector + self.decoder + self.bridge
    }

    /// Leading-order multiplications `2 I_O I_T d_k K M^{d_k} / J`.
    pub fn leading_mul(schedule: &IterationSchedule, cb: &Codebook, fg: &FactorGraph) -> Result<f64> {
        let (_, dk) = fg.regular_degrees().ok_or_else(irregular)?;
        let per = (dk * cb.resources() * cb.size().pow(dk as u32)) as f64 / cb.users() as f64;
        Ok(2.0 * (schedule.i_o * schedule.i_t) as f64 * per)
    }
}

fn irregular() -> Error {
    Error::Invalid("operation prediction needs a regular factor graph and code".into())
}

/// Per-symbol counts from the complexity analysis of the receiver:
///
/// * detector, per inner iteration: `(2 d_k K M^{d_k} + 4 d_k^2 K M) / J`
///   multiplications, `d_k K M^{d_k} / J` divisions and exponentials,
///   `K M d_k / J` logarithms;
/// * decoder, per iteration: `(11P - 9) log2 M` multiplications and
///   `(P + 1) log2 M` divisions with `P` the bit degree;
/// * bridge, per outer iteration: `M log2 M` exponentials and `2 log2 M`
///   logarithms.
pub fn predicted_ops(
    schedule: &IterationSchedule,
    cb: &Codebook,
    fg: &FactorGraph,
    code: &ParityCheckMatrix,
) -> Result<PredictedOps> {
    let (_, dk) = fg.regular_degrees().ok_or_else(irregular)?;
    let p = code.regular_column_weight().ok_or_else(irregular)? as f64;
    let (j, k, m) = (cb.users() as f64, cb.resources() as f64, cb.size() as f64);
    let d = dk as f64;
    let big = d * k * m.powi(dk as i32) / j;
    let bits = cb.bits_per_symbol() as f64;
    let det = OpRates {
        mul: 2.0 * big + 4.0 * d * d * k * m / j,
        div: big,
        exp: big,
        log: k * m * d / j,
    };
    let dec = OpRates {
        mul: (11.0 * p - 9.0) * bits,
        div: (p + 1.0) * bits,
        exp: 0.0,
        log: 0.0,
    };
    let bridge = OpRates {
        mul: 0.0,
        div: 0.0,
        exp: m * bits,
        log: 2.0 * bits,
    };
    let (i_t, i_l, i_o) = (schedule.i_t as f64, schedule.i_l as f64, schedule.i_o as f64);
    Ok(PredictedOps {
        detector: det.scale(i_o * i_t),
        decoder: dec.scale(i_o * i_l),
        bridge: bridge.scale(i_o),
    })
}

/// Measured counts of one frame, per user symbol.
pub fn measured_ops(
    link: &Link,
    schedule: &IterationSchedule,
    options: ReceiverOptions,
    es_n0_db: f64,
    seed: u64,
) -> Result<(StageOps, f64)> {
    let mut rng = seeded(seed);
    let out = simulate_frame(
        link,
        schedule,
        options,
        ChannelModel::Awgn,
        es_n0_db_to_n0(es_n0_db),
        &mut rng,
    )?;
    Ok((out.ops, (link.slots() * link.codebook.users()) as f64))
}
