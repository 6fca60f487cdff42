//! AWGN channel and Monte-Carlo bit-error-rate measurement.
//!
//! The SNR axis is `E_b/N₀` with per-user bit energy `E_b = A²·L`.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codebook::{build_code_set, CodeSet, SeedVariant};
use crate::decode::{DecodeResult, FdaConfig, FdaDecoder, MlDecoder, NdaDecoder, ML_MAX_K};
use crate::error::{Error, Result};

/// Trials per independently seeded chunk.
pub const CHUNK_TRIALS: u64 = 2048;
/// Chunks evaluated between stopping checks. Fixed so that results do not
/// depend on how many workers run a batch.
const CHUNKS_PER_BATCH: u64 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoderKind {
    Nda,
    Fda,
    Ml,
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecoderKind::Nda => "nda",
            DecoderKind::Fda => "fda",
            DecoderKind::Ml => "ml",
        })
    }
}

impl FromStr for DecoderKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nda" => Ok(DecoderKind::Nda),
            "fda" => Ok(DecoderKind::Fda),
            "ml" => Ok(DecoderKind::Ml),
            _ => Err(Error::Parse(format!("unknown decoder `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    #[serde(rename = "L")]
    pub l: usize,
    pub variant: SeedVariant,
    pub decoder: DecoderKind,
    pub amplitude: f64,
    pub ebn0_grid_db: Vec<f64>,
    pub min_bits: u64,
    /// Stop a point early once this many errors are seen; `None` disables it.
    pub max_errors: Option<u64>,
    pub seed: u64,
    pub fda: FdaConfig,
    /// Force the noise to zero at every grid point.
    #[serde(default)]
    pub noiseless: bool,
}

impl SimConfig {
    pub fn new(l: usize, variant: SeedVariant, decoder: DecoderKind, ebn0_grid_db: Vec<f64>) -> Self {
        SimConfig {
            l,
            variant,
            decoder,
            amplitude: 1.0,
            ebn0_grid_db,
            min_bits: 2_000_000,
            max_errors: Some(400),
            seed: 0,
            fda: FdaConfig::default(),
            noiseless: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BerRecord {
    pub decoder: DecoderKind,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub ebn0_db: f64,
    pub bits: u64,
    pub errors: u64,
    pub ber: f64,
    pub wall_seconds: f64,
}

/// Per-chip noise standard deviation `√(N₀/2)` with `N₀ = A²·L / 10^(E_b/N₀ / 10)`.
pub fn noise_std(ebn0_db: f64, amplitude: f64, l: usize, _k: usize) -> f64 {
    let eb = amplitude * amplitude * l as f64;
    (eb / 10f64.powf(ebn0_db / 10.0) / 2.0).sqrt()
}

/// `y = A·C·x + n` with i.i.d. Gaussian `n` of the given per-entry deviation.
pub fn transmit<R: Rng + ?Sized>(x: &[i8], c: &CodeSet, amplitude: f64, std: f64, rng: &mut R) -> Vec<f64> {
    let xs: Vec<i32> = x.iter().map(|&v| v as i32).collect();
    c.mul(&xs)
        .into_iter()
        .map(|v| {
            let clean = amplitude * v as f64;
            if std > 0.0 {
                clean + std * rng.sample::<f64, _>(StandardNormal)
            } else {
                clean
            }
        })
        .collect()
}

enum Detector {
    Nda(NdaDecoder),
    Fda(FdaDecoder),
    Ml(MlDecoder),
}

impl Detector {
    fn decode(&self, y: &[f64], c: &CodeSet, amplitude: f64) -> Result<DecodeResult> {
        match self {
            Detector::Nda(d) => {
                let yi: Vec<i32> = y.iter().map(|v| (v / amplitude).round() as i32).collect();
                d.decode(&crate::decode::affine_receive(&yi, c)?)
            }
            Detector::Fda(d) => d.decode(y, amplitude),
            Detector::Ml(d) => d.decode(y),
        }
    }
}

fn validate(cfg: &SimConfig, c: &CodeSet) -> Result<Detector> {
    if cfg.ebn0_grid_db.is_empty() {
        return Err(Error::InvalidArgument("E_b/N₀ grid is empty".into()));
    }
    if cfg.ebn0_grid_db.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("E_b/N₀ grid values must be finite".into()));
    }
    if !(cfg.amplitude > 0.0 && cfg.amplitude.is_finite()) {
        return Err(Error::InvalidArgument("amplitude must be positive".into()));
    }
    if cfg.min_bits < c.k() as u64 {
        return Err(Error::InvalidArgument(format!("min_bits must be at least K = {}", c.k())));
    }
    Ok(match cfg.decoder {
        DecoderKind::Nda => {
            if !cfg.noiseless {
                return Err(Error::InvalidArgument("the recursive decoder only accepts noiseless runs".into()));
            }
            Detector::Nda(NdaDecoder::new(c)?)
        }
        DecoderKind::Fda => Detector::Fda(FdaDecoder::new(c, cfg.fda)?),
        DecoderKind::Ml => {
            if c.k() > ML_MAX_K {
                return Err(Error::BudgetExceeded(format!("ML needs K ≤ {ML_MAX_K}, got {}", c.k())));
            }
            Detector::Ml(MlDecoder::new(c, cfg.amplitude)?)
        }
    })
}

fn chunk_rng(seed: u64, point: usize, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((point as u64) << 40) | chunk);
    rng
}

fn run_chunk(det: &Detector, c: &CodeSet, amplitude: f64, std: f64, mut rng: ChaCha8Rng) -> Result<u64> {
    let mut errors = 0u64;
    let mut x = vec![0i8; c.k()];
    for _ in 0..CHUNK_TRIALS {
        for v in x.iter_mut() {
            *v = if rng.random::<bool>() { 1 } else { -1 };
        }
        let y = transmit(&x, c, amplitude, std, &mut rng);
        let out = det.decode(&y, c, amplitude)?;
        errors += out.bits.iter().zip(&x).filter(|(a, b)| a != b).count() as u64;
    }
    Ok(errors)
}

/// One record per grid point, in grid order.
pub fn run_ber(cfg: &SimConfig) -> Result<Vec<BerRecord>> {
    let c = build_code_set(cfg.l, cfg.variant)?;
    let det = validate(cfg, &c)?;
    let k = c.k() as u64;
    let mut out = Vec::with_capacity(cfg.ebn0_grid_db.len());
    for (point, &ebn0) in cfg.ebn0_grid_db.iter().enumerate() {
        let start = Instant::now();
        let std = if cfg.noiseless { 0.0 } else { noise_std(ebn0, cfg.amplitude, c.l(), c.k()) };
        let (mut bits, mut errors, mut next) = (0u64, 0u64, 0u64);
        while bits < cfg.min_bits && cfg.max_errors.is_none_or(|m| errors < m) {
            let tallies: Vec<Result<u64>> = (next..next + CHUNKS_PER_BATCH)
                .into_par_iter()
                .map(|ch| run_chunk(&det, &c, cfg.amplitude, std, chunk_rng(cfg.seed, point, ch)))
                .collect();
            for t in tallies {
                errors += t?;
                bits += CHUNK_TRIALS * k;
            }
            next += CHUNKS_PER_BATCH;
        }
        out.push(BerRecord {
            decoder: cfg.decoder,
            l: c.l(),
            k: c.k(),
            ebn0_db: ebn0,
            bits,
            errors,
            ber: errors as f64 / bits as f64,
            wall_seconds: start.elapsed().as_secs_f64(),
        });
    }
    Ok(out)
}

/// Linear interpolation (in log BER) of the `E_b/N₀` where a curve first
/// reaches `target`. `None` if it never does; records must be in ascending SNR.
pub fn crossing_db(records: &[BerRecord], target: f64) -> Option<f64> {
    let idx = records.iter().position(|r| r.ber <= target)?;
    if idx == 0 {
        return Some(records[0].ebn0_db);
    }
    let (a, b) = (&records[idx - 1], &records[idx]);
    if b.errors == 0 {
        return Some(b.ebn0_db);
    }
    let (la, lb, lt) = (a.ber.log10(), b.ber.log10(), target.log10());
    Some(a.ebn0_db + (b.ebn0_db - a.ebn0_db) * (la - lt) / (la - lb))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strip_time(mut r: Vec<BerRecord>) -> Vec<BerRecord> {
        r.iter_mut().for_each(|x| x.wall_seconds = 0.0);
        r
    }

    #[test]
    fn std_examples() {
        assert!((noise_std(0.0, 1.0, 8, 13) - 2.0).abs() < 1e-12);
        assert!((noise_std(10.0, 1.0, 4, 5) - 0.2f64.sqrt()).abs() < 1e-12);
        assert!(noise_std(300.0, 1.0, 4, 5) < 1e-12);
    }

    #[test]
    fn noiseless_transmit() {
        let c = build_code_set(4, SeedVariant::Eq14).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let x = [1, -1, 1, 1, -1];
        let y = transmit(&x, &c, 2.0, 0.0, &mut rng);
        let clean: Vec<f64> = c.mul(&[1, -1, 1, 1, -1]).iter().map(|&v| 2.0 * v as f64).collect();
        assert_eq!(y, clean);
    }

    #[test]
    fn noise_moments() {
        let c = build_code_set(4, SeedVariant::Eq14).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = [1i8; 5];
        let clean: Vec<f64> = c.mul(&[1; 5]).iter().map(|&v| v as f64).collect();
        let n = 100_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let y = transmit(&x, &c, 1.0, 0.5, &mut rng);
            let e = y[1] - clean[1];
            s += e;
            s2 += e * e;
        }
        let mean = s / n as f64;
        assert!(mean.abs() < 4.0 * 0.5 / (n as f64).sqrt());
        assert!((s2 / n as f64 / 0.25 - 1.0).abs() < 0.05);
    }

    #[test]
    fn noiseless_runs_have_no_errors() {
        for dec in [DecoderKind::Nda, DecoderKind::Fda, DecoderKind::Ml] {
            let mut cfg = SimConfig::new(8, SeedVariant::Eq14, dec, vec![0.0]);
            cfg.noiseless = true;
            cfg.min_bits = 50_000;
            let r = run_ber(&cfg).unwrap();
            assert_eq!(r[0].errors, 0, "{dec}");
            assert!(r[0].bits >= 50_000);
        }
    }

    #[test]
    fn deterministic() {
        let mut cfg = SimConfig::new(4, SeedVariant::Eq14, DecoderKind::Fda, vec![2.0, 4.0]);
        cfg.min_bits = 30_000;
        cfg.seed = 77;
        let a = strip_time(run_ber(&cfg).unwrap());
        let b = strip_time(run_ber(&cfg).unwrap());
        assert_eq!(a, b);
        for r in &a {
            assert_eq!(r.ber, r.errors as f64 / r.bits as f64);
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let cfg = SimConfig::new(8, SeedVariant::Eq14, DecoderKind::Nda, vec![3.0]);
        assert!(run_ber(&cfg).is_err());
        let cfg = SimConfig::new(16, SeedVariant::Eq14, DecoderKind::Ml, vec![3.0]);
        assert!(matches!(run_ber(&cfg), Err(Error::BudgetExceeded(_))));
        let cfg = SimConfig::new(8, SeedVariant::Eq14, DecoderKind::Fda, vec![]);
        assert!(run_ber(&cfg).is_err());
    }

    #[test]
    fn crossing_interpolates() {
        let rec = |e: f64, ber: f64| BerRecord {
            decoder: DecoderKind::Ml,
            l: 4,
            k: 5,
            ebn0_db: e,
            bits: 1_000_000,
            errors: (ber * 1e6) as u64,
            ber,
            wall_seconds: 0.0,
        };
        let r = [rec(0.0, 1e-2), rec(2.0, 1e-4)];
        assert!((crossing_db(&r, 1e-3).unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(crossing_db(&r, 1e-6), None);
    }
}
