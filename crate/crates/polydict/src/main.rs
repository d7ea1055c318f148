//! Command-line front end: signal generation, packing into polynomial
//! matrices, dictionary training, coding, denoising, scoring, and the
//! full experiment driver.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use polydict::dictlearn::{ksvd_stacked_train, pmod_train, TrainConfig};
use polydict::pipeline::{
    self, run_experiment, ExperimentConfig, NoiseSpec, RoomSpec, SegmentationSpec,
};
use polydict::sparsecode::{code_matrix, CodeConfig, Coder};
use polydict::{Error, PolyMatrix, Result};

#[derive(Parser)]
#[command(
    name = "polydict",
    version,
    about = "Polynomial dictionary learning toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SignalKind {
    Synthetic,
    Image,
}

#[derive(Clone, Copy, ValueEnum)]
enum CoderArg {
    Omp,
    Pomp,
}

impl From<CoderArg> for Coder {
    fn from(c: CoderArg) -> Coder {
        match c {
            CoderArg::Omp => Coder::OmpStacked,
            CoderArg::Pomp => Coder::Pomp,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Pmod,
    Ksvd,
}

#[derive(Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Subcommand)]
enum Command {
    /// Generate impulse-response signal files (one float per line).
    Gen {
        #[arg(long, value_enum)]
        kind: SignalKind,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        length: usize,
        #[arg(long, default_value_t = 8000.0)]
        fs: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Decay to -60 dB in seconds (synthetic kind).
        #[arg(long, default_value_t = 0.05)]
        decay_s: f64,
        /// Room dimensions in meters (image kind).
        #[arg(long, num_args = 3, default_values_t = [5.0, 4.0, 3.0])]
        room: Vec<f64>,
        /// Uniform wall reflection coefficient (image kind).
        #[arg(long, default_value_t = 0.8)]
        reflection: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Segment signal files into a polynomial matrix (PLYM1).
    Pack {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        seglen: usize,
        #[arg(long)]
        out: PathBuf,
        /// Whitespace-separated float text files, one signal per file.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Learn a dictionary from a training matrix.
    Train {
        #[arg(long, value_enum)]
        method: MethodArg,
        #[arg(long)]
        atoms: usize,
        #[arg(long)]
        sparsity: usize,
        #[arg(long)]
        iters: usize,
        /// Unit-norm atoms after each update; defaults to the coder's
        /// convention (on for pomp, off for omp).
        #[arg(long, value_enum)]
        normalize: Option<OnOff>,
        /// Coder for the sparse-coding stage.
        #[arg(long, value_enum, default_value = "omp")]
        coder: CoderArg,
        #[arg(long, default_value_t = CodeConfig::DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Sparse-code a matrix against a dictionary; emits CSV triplets.
    Code {
        #[arg(long, value_enum)]
        coder: CoderArg,
        #[arg(long)]
        sparsity: usize,
        #[arg(long, default_value_t = CodeConfig::DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long)]
        dict: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Add white Gaussian noise at an exact SNR.
    Noise {
        #[arg(long)]
        snr: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reconstruct a noisy matrix through sparse coding.
    Denoise {
        #[arg(long, value_enum)]
        coder: CoderArg,
        #[arg(long)]
        sparsity: usize,
        #[arg(long, default_value_t = CodeConfig::DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long)]
        dict: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the relative squared reconstruction error.
    Eval {
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long)]
        est: PathBuf,
    },
    /// Run the full denoising experiment from a TOML config.
    Experiment {
        #[arg(long, required_unless_present = "print_template")]
        config: Option<PathBuf>,
        #[arg(long, required_unless_present = "print_template")]
        out: Option<PathBuf>,
        /// Print a desk-scale config template and exit.
        #[arg(long)]
        print_template: bool,
    },
}

fn read_signal(path: &PathBuf) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for tok in text.split_whitespace() {
        out.push(
            tok.parse::<f64>()
                .map_err(|_| Error::Parse(format!("{}: bad float {tok:?}", path.display())))?,
        );
    }
    if out.is_empty() {
        return Err(Error::Parse(format!("{}: empty signal", path.display())));
    }
    Ok(out)
}

fn write_signal(path: &PathBuf, signal: &[f64]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for v in signal {
        writeln!(w, "{v:?}")?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen {
            kind,
            count,
            length,
            fs,
            seed,
            decay_s,
            room,
            reflection,
            out,
        } => {
            fs::create_dir_all(&out)?;
            for i in 0..count {
                let sig_seed = pipeline::derive_stream_seed(seed, "gen", i as u64, 0);
                let signal = match kind {
                    SignalKind::Synthetic => {
                        pipeline::gen_synthetic_rir(length, decay_s, fs, sig_seed)?
                    }
                    SignalKind::Image => {
                        use rand::{Rng, SeedableRng};
                        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(sig_seed);
                        let dims = [room[0], room[1], room[2]];
                        let mut place = |axis: usize| {
                            let margin = 0.2 * dims[axis];
                            rng.random_range(margin..dims[axis] - margin)
                        };
                        let spec = RoomSpec {
                            room: dims,
                            source: [place(0), place(1), place(2)],
                            mic: [place(0), place(1), place(2)],
                            beta: [reflection; 6],
                            sound_speed: 343.0,
                            max_order: None,
                        };
                        pipeline::gen_image_rir(&spec, length, fs)?
                    }
                };
                let path = out.join(format!("signal_{i:04}.txt"));
                write_signal(&path, &signal)?;
            }
            eprintln!("wrote {count} signals to {}", out.display());
        }
        Command::Pack {
            rows,
            seglen,
            out,
            inputs,
        } => {
            let signals: Vec<Vec<f64>> = inputs.iter().map(read_signal).collect::<Result<_>>()?;
            let spec = SegmentationSpec::new(rows, seglen);
            let m = pipeline::build_training_matrix(&signals, &spec)?;
            m.save_plym(&out)?;
            eprintln!(
                "packed {} signals into {}x{} ({} lags) at {}",
                inputs.len(),
                m.rows(),
                m.cols(),
                m.lags(),
                out.display()
            );
        }
        Command::Train {
            method,
            atoms,
            sparsity,
            iters,
            normalize,
            coder,
            epsilon,
            seed,
            input,
            out,
            trace,
        } => {
            let y = PolyMatrix::load_plym(&input)?;
            let coder: Coder = coder.into();
            let mut cfg = TrainConfig::new(atoms, iters, CodeConfig::new(sparsity, epsilon), coder);
            if let Some(n) = normalize {
                cfg.normalize_atoms = matches!(n, OnOff::On);
            }
            cfg.seed = seed;
            let result = match method {
                MethodArg::Pmod => pmod_train(&y, &cfg)?,
                MethodArg::Ksvd => ksvd_stacked_train(&y, &cfg)?,
            };
            result.dictionary.save_plym(&out)?;
            if let Some(trace_path) = trace {
                let mut w = BufWriter::new(fs::File::create(trace_path)?);
                result.trace.write_csv(&mut w)?;
            }
            eprintln!(
                "trained {} atoms in {} iterations; final training error {:.6}",
                atoms,
                iters,
                result.trace.final_error().unwrap_or(f64::NAN)
            );
        }
        Command::Code {
            coder,
            sparsity,
            epsilon,
            dict,
            input,
            out,
        } => {
            let d = PolyMatrix::load_plym(&dict)?;
            let y = PolyMatrix::load_plym(&input)?;
            let codes = code_matrix(&y, &d, &CodeConfig::new(sparsity, epsilon), coder.into())?;
            let mut w = BufWriter::new(fs::File::create(&out)?);
            codes.write_csv(&mut w)?;
            eprintln!("coded {} columns to {}", y.cols(), out.display());
        }
        Command::Noise {
            snr,
            seed,
            input,
            out,
        } => {
            let m = PolyMatrix::load_plym(&input)?;
            let noisy = pipeline::add_noise(&m, &NoiseSpec { snr_db: snr, seed })?;
            noisy.save_plym(&out)?;
            eprintln!("added {snr} dB noise (seed {seed})");
        }
        Command::Denoise {
            coder,
            sparsity,
            epsilon,
            dict,
            input,
            out,
        } => {
            let d = PolyMatrix::load_plym(&dict)?;
            let noisy = PolyMatrix::load_plym(&input)?;
            let recon = pipeline::denoise(
                &noisy,
                &d,
                &CodeConfig::new(sparsity, epsilon),
                coder.into(),
            )?;
            recon.save_plym(&out)?;
            eprintln!("denoised {} columns", noisy.cols());
        }
        Command::Eval { reference, est } => {
            let y = PolyMatrix::load_plym(&reference)?;
            let y_hat = PolyMatrix::load_plym(&est)?;
            let err = pipeline::reconstruction_error(&y, &y_hat)?;
            println!("{err:?}");
        }
        Command::Experiment {
            config,
            out,
            print_template,
        } => {
            if print_template {
                print!("{}", ExperimentConfig::desk(1).to_toml());
                return Ok(());
            }
            let (config, out) = (
                config.expect("required by clap"),
                out.expect("required by clap"),
            );
            let text = fs::read_to_string(&config)?;
            let cfg = ExperimentConfig::from_toml(&text)?;
            let report = run_experiment(&cfg)?;
            let mut w = BufWriter::new(fs::File::create(&out)?);
            report.write_csv(&mut w)?;
            drop(w);
            eprintln!(
                "experiment finished in {:.1} s; {} cells written to {}",
                report.wall_secs,
                report.cells.len(),
                out.display()
            );
            for cell in &report.cells {
                eprintln!(
                    "  {:10} {:>7.1} dB  mean error {:.6}",
                    cell.method, cell.snr_db, cell.mean_error
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                eprintln!("  caused by: {s}");
                src = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
