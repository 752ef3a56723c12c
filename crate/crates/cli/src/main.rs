use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use scma_core::channel::ChannelModel;
use scma_core::checks;
use scma_core::codebook::Codebook;
use scma_core::ldpc::{peg, ParityCheckMatrix, SystematicEncoder};
use scma_core::receiver::{IterationSchedule, ReceiverOptions};
use scma_core::rng::seeded;
use scma_core::sim::{self, Link, SimConfig};

#[derive(Parser)]
#[command(name = "scma-sim", version, about = "LDPC-coded SCMA link simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a BER sweep described by a TOML config and write CSV plus plot script.
    Sweep {
        config: PathBuf,
        /// Override the worker count from the config (1 = serial).
        #[arg(long)]
        workers: Option<usize>,
        /// Override the CSV destination.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Compare the detector and the LLR bridge with brute-force references.
    OracleCheck {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Es/N0 of the uncoded symbol error comparison.
        #[arg(long, default_value_t = 6.0)]
        es_n0_db: f64,
        /// SCMA symbols in the uncoded comparison.
        #[arg(long, default_value_t = 10_000)]
        slots: u64,
    },
    /// Print predicted and measured operation counts per user symbol.
    OpsReport {
        /// Parity-check matrix; the code of `--config` when omitted.
        #[arg(long, conflicts_with = "config")]
        alist: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 4.0)]
        es_n0_db: f64,
    },
    /// Build a column-regular PEG code in systematic column order.
    MakeCode {
        #[arg(long)]
        bits: usize,
        #[arg(long, default_value_t = 3)]
        col_weight: usize,
        #[arg(long, default_value_t = 6)]
        row_weight: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also write the generator cache here.
        #[arg(long)]
        generator: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Sweep {
            config,
            workers,
            output,
        } => sweep(config, workers, output),
        Command::OracleCheck { seed, es_n0_db, slots } => oracle_check(seed, es_n0_db, slots),
        Command::OpsReport {
            alist,
            config,
            es_n0_db,
        } => ops_report(alist, config, es_n0_db),
        Command::MakeCode {
            bits,
            col_weight,
            row_weight,
            seed,
            out,
            generator,
        } => make_code(bits, col_weight, row_weight, seed, out, generator),
    }
}

fn sweep(config: PathBuf, workers: Option<usize>, output: Option<PathBuf>) -> Result<bool> {
    let mut cfg = SimConfig::load(&config).with_context(|| format!("loading {}", config.display()))?;
    if let Some(w) = workers {
        cfg.workers = w;
    }
    let output = output
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| config.with_extension("csv"));
    let link = Link::from_config(&cfg)?;
    println!(
        "code: {} bits, {} checks; {} slots per frame",
        link.code.n_bits(),
        link.code.n_checks(),
        link.slots()
    );
    let results = sim::run_sweep_with(&cfg, &link, |r| {
        println!(
            "{:<8} {:<8} {:>6.2} dB  frames {:>6}  bit errors {:>8}  BER {:.3e}  FER {:.3e}  {:.1}s",
            r.channel,
            r.mode,
            r.es_n0_db,
            r.frames,
            r.bit_errors,
            r.ber(),
            r.fer(),
            r.seconds
        );
    })?;
    let script = sim::emit_results(&results, &output)?;
    println!("wrote {} and {}", output.display(), script.display());
    for (ch, mode, db) in sim::monotonicity_flags(&results) {
        println!("note: {ch}/{mode} BER rises at {db} dB beyond Monte Carlo spread");
    }
    Ok(true)
}

fn oracle_check(seed: u64, es_n0_db: f64, slots: u64) -> Result<bool> {
    let mut ok = true;
    for r in [
        checks::tree_exactness(200, seed)?,
        checks::domain_equivalence(100, seed)?,
        checks::factor_enumeration(1000, seed)?,
        checks::bridge_identities(10_000, seed)?,
    ] {
        ok &= r.passed();
        println!(
            "{} {:<42} cases {:>6}  worst {:.3e}  tol {:.0e}",
            verdict(r.passed()),
            r.name,
            r.cases,
            r.worst,
            r.tolerance
        );
    }
    let cb = Codebook::default_scma();
    let rep = sim::uncoded_ser(&cb, ChannelModel::Awgn, es_n0_db, slots, 6, seed)?;
    let within = (rep.mpa_ser() - rep.map_ser()).abs() <= rep.map_half_width();
    let pass = within && rep.mpa_errors >= rep.map_errors;
    ok &= pass;
    println!(
        "{} uncoded SER at {es_n0_db} dB over {} symbols: MPA {:.4e}, MAP {:.4e} +- {:.1e}",
        verdict(pass),
        rep.symbols,
        rep.mpa_ser(),
        rep.map_ser(),
        rep.map_half_width()
    );
    Ok(ok)
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn ops_report(alist: Option<PathBuf>, config: Option<PathBuf>, es_n0_db: f64) -> Result<bool> {
    let link = match (alist, config) {
        (Some(a), None) => Link::with_code(Codebook::default_scma(), ParityCheckMatrix::load_alist(&a)?, 1)?,
        (None, Some(c)) => Link::from_config(&SimConfig::load(&c)?)?,
        _ => bail!("pass either --alist or --config"),
    };
    println!("per user symbol; measured over one frame at {es_n0_db} dB AWGN");
    println!(
        "{:<7} {:<9} {:>11} {:>11} {:>11} {:>11}",
        "mode", "stage", "mul", "div", "exp", "log"
    );
    for sched in IterationSchedule::presets() {
        let pred = sim::predicted_ops(&sched, &link.codebook, &link.graph, &link.code)?;
        let (ops, per) = sim::measured_ops(&link, &sched, ReceiverOptions::default(), es_n0_db, 1)?;
        let rows = [
            ("detector", pred.detector, ops.detector),
            ("decoder", pred.decoder, ops.decoder),
            ("bridge", pred.bridge, ops.bridge),
            ("total", pred.total(), ops.total()),
        ];
        for (stage, p, m) in rows {
            println!(
                "{:<7} {:<9} {:>11.1} {:>11.1} {:>11.1} {:>11.1}   predicted",
                sched.name, stage, p.mul, p.div, p.exp, p.log
            );
            println!(
                "{:<7} {:<9} {:>11.1} {:>11.1} {:>11.1} {:>11.1}   measured",
                "",
                "",
                m.mul as f64 / per,
                m.div as f64 / per,
                m.exp as f64 / per,
                m.log as f64 / per
            );
        }
        let lead = sim::PredictedOps::leading_mul(&sched, &link.codebook, &link.graph)?;
        println!(
            "{:<7} measured mul / (2 I_O I_T d_k K M^d_k / J) = {:.3}",
            sched.name,
            ops.total().mul as f64 / per / lead
        );
    }
    Ok(true)
}

fn make_code(
    bits: usize,
    col_weight: usize,
    row_weight: usize,
    seed: u64,
    out: PathBuf,
    generator: Option<PathBuf>,
) -> Result<bool> {
    let raw = peg::construct(bits, col_weight, row_weight, &mut seeded(seed))?;
    let code = raw.permute_columns(&peg::systematic_order(&raw)?);
    let enc = SystematicEncoder::from_pcm(&code)?;
    std::fs::write(&out, code.to_alist()).with_context(|| format!("writing {}", out.display()))?;
    println!(
        "{}: {} bits, {} checks, girth {}",
        out.display(),
        code.n_bits(),
        code.n_checks(),
        peg::girth(&code).map_or("inf".to_string(), |g| g.to_string())
    );
    if let Some(g) = generator {
        std::fs::write(&g, enc.to_bytes()).with_context(|| format!("writing {}", g.display()))?;
        println!("{}: generator for fingerprint {:016x}", g.display(), enc.fingerprint());
    }
    Ok(true)
}
