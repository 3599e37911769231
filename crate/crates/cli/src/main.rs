use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use sdude::dude::DenoiseOptions;
use sdude::eval::{
    concentration_csv, concentration_json, concentration_sweep, run_switching_hmm_experiment, run_two_block_experiment,
    EvalReport,
};
use sdude::io::{format_pbm, format_raw, format_text, parse_pbm, parse_raw, parse_text, write_atomic};
use sdude::sources::PiecewiseSourceSpec;
use sdude::{dude_denoise_with, sdude_denoise_with, ChannelModel, Execution, LossMatrix, SymbolSequence};

#[derive(Parser)]
#[command(name = "sdude", version, about = "Shifting discrete universal denoiser")]
struct Cli {
    /// Run everything on one thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Denoise a sequence or binary image.
    Denoise(DenoiseArgs),
    /// Run one of the built-in experiments and write JSON + CSV reports.
    #[command(subcommand)]
    Experiment(Experiment),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Raw,
    Text,
    Pbm,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algorithm {
    Sdude,
    Dude,
}

#[derive(Args)]
struct DenoiseArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, value_enum, default_value = "raw")]
    format: Format,
    /// `bsc:<delta>`, `identity[:<size>]` or a matrix file.
    #[arg(long)]
    channel: String,
    /// `hamming[:<size>]` or a matrix file.
    #[arg(long, default_value = "hamming")]
    loss: String,
    #[arg(long, default_value_t = 0)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    m: usize,
    /// Write the S-DUDE switching schedule as JSON.
    #[arg(long)]
    emit_schedule: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "sdude")]
    algorithm: Algorithm,
}

#[derive(Subcommand)]
enum Experiment {
    /// Half zeros, half ones through a BSC.
    TwoBlock {
        #[arg(long, default_value_t = 160_000)]
        n: usize,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        m: usize,
        /// Comma-separated seeds.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        seeds: Vec<u64>,
        /// Output path; `.json` and `.csv` files are written next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Switching binary hidden Markov process through a BSC.
    SwitchingHmm {
        #[arg(long, default_value_t = 1_000_000)]
        n: usize,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 0.01)]
        p1: f64,
        #[arg(long, default_value_t = 0.2)]
        p2: f64,
        /// Defaults to n / 2.
        #[arg(long)]
        switch_at: Option<usize>,
        #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4,5,6,7,8")]
        k_list: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "0,1")]
        m_list: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Gap between S-DUDE and the genie target across sequence lengths.
    Concentration {
        /// Clean source spec (JSON); defaults to the two-block sequence.
        #[arg(long)]
        source: Option<PathBuf>,
        #[arg(long, default_value = "bsc:0.1")]
        channel: String,
        #[arg(long, default_value = "hamming")]
        loss: String,
        #[arg(long, default_value_t = 0)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, value_delimiter = ',', default_value = "1000,10000,100000")]
        n_list: Vec<usize>,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    let result = match cli.command {
        Command::Denoise(args) => denoise(args, exec),
        Command::Experiment(e) => experiment(e, exec),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn denoise(args: DenoiseArgs, exec: Execution) -> Result<()> {
    let channel = ChannelModel::from_descriptor(&args.channel).context("loading channel")?;
    let loss = LossMatrix::from_descriptor(&args.loss).context("loading loss")?;
    let bytes = std::fs::read(&args.input).with_context(|| format!("reading {}", args.input.display()))?;

    let (symbols, bitmap) = match args.format {
        Format::Raw => (parse_raw(&bytes), None),
        Format::Text => (parse_text(std::str::from_utf8(&bytes).context("input is not UTF-8")?)?, None),
        Format::Pbm => {
            let bm = parse_pbm(&bytes)?;
            (bm.pixels.clone(), Some(bm))
        }
    };
    let z = SymbolSequence::new(symbols, channel.noisy_size())?;
    let opts = DenoiseOptions { exec, ..Default::default() };

    let (out, schedule) = match args.algorithm {
        Algorithm::Sdude => {
            let r = sdude_denoise_with(&z, args.k, args.m, &channel, &loss, &opts)?;
            (r.output, Some(r.schedule))
        }
        Algorithm::Dude => (dude_denoise_with(&z, args.k, &channel, &loss, &opts)?, None),
    };

    let encoded = match (args.format, bitmap) {
        (Format::Raw, _) => format_raw(out.symbols())?,
        (Format::Text, _) => format_text(out.symbols()).into_bytes(),
        (Format::Pbm, Some(bm)) => format_pbm(&bm.with_pixels(out.into_symbols())?),
        (Format::Pbm, None) => unreachable!("bitmap parsed above"),
    };
    let schedule_json = match (&args.emit_schedule, schedule) {
        (Some(_), Some(s)) => Some(s.to_json()?),
        (Some(_), None) => bail!("--emit-schedule requires --algorithm sdude"),
        _ => None,
    };
    write_atomic(&args.output, &encoded)?;
    if let (Some(path), Some(json)) = (&args.emit_schedule, schedule_json) {
        write_atomic(path, json.as_bytes())?;
    }
    Ok(())
}

fn report_paths(out: &Path) -> (PathBuf, PathBuf) {
    (out.with_extension("json"), out.with_extension("csv"))
}

fn write_report(report: &EvalReport, out: &Path) -> Result<()> {
    let (json, csv) = report_paths(out);
    let text = report.to_json()?;
    let table = report.to_csv();
    write_atomic(&json, text.as_bytes())?;
    write_atomic(&csv, table.as_bytes())?;
    print!("{table}");
    Ok(())
}

fn experiment(e: Experiment, exec: Execution) -> Result<()> {
    match e {
        Experiment::TwoBlock { n, delta, k, m, seeds, out } => {
            let report = run_two_block_experiment(n, delta, k, m, &seeds, exec)?;
            write_report(&report, &out)
        }
        Experiment::SwitchingHmm { n, delta, p1, p2, switch_at, k_list, m_list, seed, out } => {
            let switch_at = switch_at.unwrap_or(n / 2);
            let report = run_switching_hmm_experiment(n, delta, p1, p2, switch_at, &k_list, &m_list, seed, exec)?;
            write_report(&report, &out)
        }
        Experiment::Concentration { source, channel, loss, k, m, n_list, trials, seed, out } => {
            let spec = match source {
                Some(path) => PiecewiseSourceSpec::from_json(&std::fs::read_to_string(&path)?)?,
                None => PiecewiseSourceSpec::two_block(),
            };
            let channel = ChannelModel::from_descriptor(&channel)?;
            let loss = LossMatrix::from_descriptor(&loss)?;
            let rows = concentration_sweep(&spec, &channel, &loss, k, m, &n_list, trials, seed, exec)?;
            let (json, csv) = report_paths(&out);
            let table = concentration_csv(&rows);
            write_atomic(&json, concentration_json(&rows)?.as_bytes())?;
            write_atomic(&csv, table.as_bytes())?;
            print!("{table}");
            Ok(())
        }
    }
}
