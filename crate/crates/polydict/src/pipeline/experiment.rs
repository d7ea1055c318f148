//! Seeded end-to-end denoising experiment.
//!
//! For every configured method a dictionary is trained once on clean
//! training data; for every (method, SNR) cell the test matrix is
//! corrupted over `realizations` independent seeded noise draws, denoised
//! with the method's coder, and scored with the relative reconstruction
//! error against the clean test matrix. Every random stream is derived
//! from `(seed, role, cell, realization)`, so cells can run in any order
//! without perturbing draws.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dictlearn::{ksvd_stacked_train, pmod_train, TrainConfig, TrainResult};
use crate::error::{Error, Result};
use crate::polymat::PolyMatrix;
use crate::sparsecode::{CodeConfig, Coder};

use super::{
    add_noise, build_training_matrix, denoise, gen_image_rir, gen_synthetic_rir,
    reconstruction_error, NoiseSpec, RoomSpec, SegmentationSpec,
};

/// One comparison row of the experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Stacked K-SVD dictionary, stacked OMP reconstruction (the
    /// prior-method baseline).
    KsvdOmp,
    /// PMOD dictionary, stacked OMP reconstruction.
    PmodOmp,
    /// PMOD dictionary trained with unit-norm atoms, POMP reconstruction.
    PmodPomp,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::KsvdOmp => "ksvd+omp",
            Method::PmodOmp => "pmod+omp",
            Method::PmodPomp => "pmod+pomp",
        }
    }

    /// Coder used at reconstruction time.
    pub fn test_coder(&self) -> Coder {
        match self {
            Method::PmodPomp => Coder::Pomp,
            _ => Coder::OmpStacked,
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ksvd+omp" | "ksvd" => Ok(Method::KsvdOmp),
            "pmod+omp" => Ok(Method::PmodOmp),
            "pmod+pomp" => Ok(Method::PmodPomp),
            other => Err(Error::Parse(format!("unknown method {other:?}"))),
        }
    }
}

/// Signal source for training and test data.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DataConfig {
    /// "synthetic" (decaying seeded noise) or "image" (image-source room
    /// responses with seeded source/mic placement).
    pub kind: String,
    pub train_signals: usize,
    pub test_signals: usize,
    pub signal_len: usize,
    pub fs: f64,
    /// T60-style decay for the synthetic generator.
    #[serde(default = "default_decay")]
    pub decay_s: f64,
    /// Room geometry for the image generator.
    #[serde(default)]
    pub room: Option<[f64; 3]>,
    #[serde(default)]
    pub reflection: Option<f64>,
}

fn default_decay() -> f64 {
    0.05
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SegmentationConfig {
    pub rows: usize,
    pub segment_len: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub atoms: usize,
    pub sparsity: usize,
    pub iterations: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

fn default_epsilon() -> f64 {
    CodeConfig::DEFAULT_EPSILON
}

/// Full experiment description; serializable as TOML.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub methods: Vec<String>,
    pub snr_db: Vec<f64>,
    pub realizations: usize,
    pub data: DataConfig,
    pub segmentation: SegmentationConfig,
    pub training: TrainingConfig,
}

impl ExperimentConfig {
    /// Desk-scale preset: 100 synthetic training signals of length 1200,
    /// 40 atoms, 5 realizations. Completes in seconds.
    pub fn desk(seed: u64) -> Self {
        Self {
            seed,
            methods: vec!["ksvd+omp".into(), "pmod+omp".into(), "pmod+pomp".into()],
            snr_db: vec![-10.0, 0.0, 10.0, 20.0, 30.0],
            realizations: 5,
            data: DataConfig {
                kind: "synthetic".into(),
                train_signals: 100,
                test_signals: 20,
                signal_len: 1200,
                fs: 8000.0,
                decay_s: 0.05,
                room: None,
                reflection: None,
            },
            segmentation: SegmentationConfig {
                rows: 10,
                segment_len: 20,
            },
            training: TrainingConfig {
                atoms: 40,
                sparsity: 3,
                iterations: 20,
                epsilon: CodeConfig::DEFAULT_EPSILON,
            },
        }
    }

    /// Full-scale parameters: 1000 signals of length 14400, 400 atoms,
    /// 80 iterations, 20 realizations. Expect a long run.
    pub fn full_scale(seed: u64) -> Self {
        let mut cfg = Self::desk(seed);
        cfg.data.train_signals = 1000;
        cfg.data.test_signals = 1;
        cfg.data.signal_len = 14400;
        cfg.training.atoms = 400;
        cfg.training.iterations = 80;
        cfg.realizations = 20;
        cfg
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(format!("experiment config: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    fn parsed_methods(&self) -> Result<Vec<Method>> {
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig("no methods configured".into()));
        }
        self.methods.iter().map(|m| m.parse()).collect()
    }

    fn validate(&self) -> Result<()> {
        if self.realizations == 0 {
            return Err(Error::InvalidConfig(
                "realizations must be at least 1".into(),
            ));
        }
        if self.snr_db.is_empty() {
            return Err(Error::InvalidConfig("empty SNR grid".into()));
        }
        if self.data.train_signals == 0 || self.data.test_signals == 0 {
            return Err(Error::InvalidConfig(
                "need training and test signals".into(),
            ));
        }
        Ok(())
    }
}

/// One (method, SNR) cell of the report.
#[derive(Clone, Debug)]
pub struct ReportCell {
    pub method: String,
    pub snr_db: f64,
    pub mean_error: f64,
    pub realizations: usize,
}

/// Experiment results plus run metadata. Only the deterministic cells go
/// into the CSV; wall time stays in memory.
#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub cells: Vec<ReportCell>,
    pub config: ExperimentConfig,
    pub wall_secs: f64,
}

impl ExperimentReport {
    /// CSV with one row per (method, SNR) cell, in configuration order.
    /// Byte-identical across runs of the same config.
    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "method,snr_db,mean_error,realizations")?;
        for c in &self.cells {
            writeln!(
                w,
                "{},{:?},{:?},{}",
                c.method, c.snr_db, c.mean_error, c.realizations
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("write to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

/// Derives an independent stream seed from the base seed, a role tag, and
/// two numeric components (FNV-1a over the parts, then a splitmix64
/// avalanche). Stable across platforms.
pub fn derive_stream_seed(base: u64, tag: &str, a: u64, b: u64) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    let mut eat = |bytes: &[u8]| {
        for &byte in bytes {
            h = (h ^ byte as u64).wrapping_mul(0x100000001b3);
        }
    };
    eat(&base.to_le_bytes());
    eat(tag.as_bytes());
    eat(&a.to_le_bytes());
    eat(&b.to_le_bytes());
    let mut z = h;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn gen_signals(cfg: &ExperimentConfig, role: &str, count: usize) -> Result<Vec<Vec<f64>>> {
    let d = &cfg.data;
    match d.kind.as_str() {
        "synthetic" => (0..count)
            .map(|i| {
                let seed = derive_stream_seed(cfg.seed, role, i as u64, 0);
                gen_synthetic_rir(d.signal_len, d.decay_s, d.fs, seed)
            })
            .collect(),
        "image" => {
            use rand::{Rng, SeedableRng};
            let room = d.room.unwrap_or([5.0, 4.0, 3.0]);
            let beta = d.reflection.unwrap_or(0.8);
            (0..count)
                .map(|i| {
                    let seed = derive_stream_seed(cfg.seed, role, i as u64, 1);
                    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                    let mut place = |axis: usize| {
                        let margin = 0.2 * room[axis];
                        rng.random_range(margin..room[axis] - margin)
                    };
                    let source = [place(0), place(1), place(2)];
                    let mic = [place(0), place(1), place(2)];
                    let spec = RoomSpec {
                        room,
                        source,
                        mic,
                        beta: [beta; 6],
                        sound_speed: 343.0,
                        max_order: None,
                    };
                    gen_image_rir(&spec, d.signal_len, d.fs)
                })
                .collect()
        }
        other => Err(Error::InvalidConfig(format!("unknown data kind {other:?}"))),
    }
}

fn train_method(method: Method, train: &PolyMatrix, cfg: &ExperimentConfig) -> Result<TrainResult> {
    let code_cfg = CodeConfig::new(cfg.training.sparsity, cfg.training.epsilon);
    // Training always codes with stacked OMP; the POMP row differs in
    // using unit-norm atoms, which its distance-based selection needs.
    let mut tc = TrainConfig::new(
        cfg.training.atoms,
        cfg.training.iterations,
        code_cfg,
        Coder::OmpStacked,
    );
    tc.seed = cfg.seed;
    tc.normalize_atoms = matches!(method, Method::PmodPomp);
    match method {
        Method::KsvdOmp => ksvd_stacked_train(train, &tc),
        Method::PmodOmp | Method::PmodPomp => pmod_train(train, &tc),
    }
}

/// Runs the full experiment described by `cfg`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let methods = cfg.parsed_methods()?;
    let t0 = Instant::now();
    let seg = SegmentationSpec::new(cfg.segmentation.rows, cfg.segmentation.segment_len);

    let train_signals = gen_signals(cfg, "train-signal", cfg.data.train_signals)
        .map_err(|e| e.context(format!("generating training signals (seed {})", cfg.seed)))?;
    let test_signals = gen_signals(cfg, "test-signal", cfg.data.test_signals)
        .map_err(|e| e.context(format!("generating test signals (seed {})", cfg.seed)))?;
    let train = build_training_matrix(&train_signals, &seg)
        .map_err(|e| e.context("segmenting training signals"))?;
    let test = build_training_matrix(&test_signals, &seg)
        .map_err(|e| e.context("segmenting test signals"))?;

    let code_cfg = CodeConfig::new(cfg.training.sparsity, cfg.training.epsilon);
    let mut cells = Vec::new();
    for method in methods {
        let trained = train_method(method, &train, cfg)
            .map_err(|e| e.context(format!("training {} (seed {})", method.name(), cfg.seed)))?;
        for &snr in &cfg.snr_db {
            let mut total = 0.0;
            for r in 0..cfg.realizations {
                let noise_seed =
                    derive_stream_seed(cfg.seed, method.name(), snr.to_bits(), r as u64);
                let noisy = add_noise(
                    &test,
                    &NoiseSpec {
                        snr_db: snr,
                        seed: noise_seed,
                    },
                )
                .map_err(|e| {
                    e.context(format!(
                        "noise at {snr} dB, realization {r} (stream seed {noise_seed})"
                    ))
                })?;
                let recon = denoise(&noisy, &trained.dictionary, &code_cfg, method.test_coder())
                    .map_err(|e| {
                        e.context(format!(
                            "denoising {} at {snr} dB, realization {r}",
                            method.name()
                        ))
                    })?;
                total += reconstruction_error(&test, &recon)
                    .map_err(|e| e.context("scoring reconstruction"))?;
            }
            cells.push(ReportCell {
                method: method.name().to_string(),
                snr_db: snr,
                mean_error: total / cfg.realizations as f64,
                realizations: cfg.realizations,
            });
        }
    }

    Ok(ExperimentReport {
        cells,
        config: cfg.clone(),
        wall_secs: t0.elapsed().as_secs_f64(),
    })
}
