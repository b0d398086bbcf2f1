//! Dechirped (beat) signal synthesis for a linear FMCW sweep.
//!
//! A reflector at range `R` mixes down to a tone at `f_b = 2·B·R / (c·T)`.
//! The receiver is modelled as a single real mixer, so each reflector adds a
//! cosine at its beat frequency; receiver noise is white Gaussian.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::scene::Scene;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

const MIN_SAMPLES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChirpConfig {
    pub center_freq_hz: f64,
    pub bandwidth_hz: f64,
    pub sweep_time_s: f64,
    pub sample_rate_hz: f64,
    /// Additive range error of an uncalibrated sensor; every reflector
    /// appears this much further away than it is.
    #[serde(default)]
    pub range_bias_m: f64,
}

impl Default for ChirpConfig {
    /// K-band, 2 GHz sweep over 1 ms sampled at 1 MHz: 1000 samples and
    /// 7.5 cm range bins.
    fn default() -> Self {
        Self {
            center_freq_hz: 24.0e9,
            bandwidth_hz: 2.0e9,
            sweep_time_s: 1.0e-3,
            sample_rate_hz: 1.0e6,
            range_bias_m: 0.0,
        }
    }
}

impl ChirpConfig {
    pub fn n_samples(&self) -> usize {
        (self.sweep_time_s * self.sample_rate_hz).round() as usize
    }

    /// Sweep slope in Hz/s.
    pub fn slope(&self) -> f64 {
        self.bandwidth_hz / self.sweep_time_s
    }

    pub fn range_resolution(&self) -> f64 {
        range_resolution(self)
    }

    /// Largest range whose beat tone stays below Nyquist.
    pub fn max_unambiguous_range(&self) -> f64 {
        SPEED_OF_LIGHT * self.sample_rate_hz * self.sweep_time_s / (4.0 * self.bandwidth_hz)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidChirp(format!("chirp.{name} must be finite and > 0, got {v}")))
            }
        };
        positive("bandwidth_hz", self.bandwidth_hz)?;
        positive("sweep_time_s", self.sweep_time_s)?;
        positive("sample_rate_hz", self.sample_rate_hz)?;
        if !self.center_freq_hz.is_finite() || !self.range_bias_m.is_finite() {
            return Err(Error::InvalidChirp("chirp values must be finite".into()));
        }
        let n = self.n_samples();
        if n < MIN_SAMPLES {
            return Err(Error::InvalidChirp(format!(
                "chirp yields {n} samples per sweep, need ≥ {MIN_SAMPLES}"
            )));
        }
        Ok(())
    }
}

/// One sweep of dechirped samples.
#[derive(Debug, Clone, PartialEq)]
pub struct BeatSignal {
    pub samples: Vec<f64>,
    pub chirp: ChirpConfig,
}

impl BeatSignal {
    pub fn new(samples: Vec<f64>, chirp: ChirpConfig) -> Self {
        Self { samples, chirp }
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|s| s.is_finite())
    }
}

pub fn beat_frequency(range_m: f64, chirp: &ChirpConfig) -> Result<f64> {
    if range_m.is_nan() || range_m < 0.0 {
        return Err(Error::NegativeRange(range_m));
    }
    Ok(2.0 * chirp.bandwidth_hz * range_m / (SPEED_OF_LIGHT * chirp.sweep_time_s))
}

pub fn range_resolution(chirp: &ChirpConfig) -> f64 {
    SPEED_OF_LIGHT / (2.0 * chirp.bandwidth_hz)
}

/// Per-sample noise amplitude giving `snr_db` for a tone of `amplitude`
/// (tone power `A²/2` over noise variance).
pub fn noise_for_snr(amplitude: f64, snr_db: f64) -> f64 {
    amplitude / std::f64::consts::SQRT_2 * 10f64.powf(-snr_db / 20.0)
}

/// Deterministic phase in `[0, 2π)` for a reflector.
pub fn reflector_phase(seed: u64, id: &str) -> f64 {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(id.as_bytes());
    let digest = hasher.finalize();
    let mut word = [0u8; 8];
    word.copy_from_slice(&digest[..8]);
    let bits = u64::from_le_bytes(word) >> 11;
    bits as f64 / (1u64 << 53) as f64 * std::f64::consts::TAU
}

pub fn synthesize_beat(scene: &Scene, chirp: &ChirpConfig) -> Result<BeatSignal> {
    chirp.validate()?;
    scene.validate().into_result()?;
    let unambiguous_m = chirp.max_unambiguous_range();
    if scene.max_range_m + chirp.range_bias_m.max(0.0) > unambiguous_m {
        return Err(Error::UnambiguousRange {
            max_range_m: scene.max_range_m,
            unambiguous_m,
        });
    }

    let n = chirp.n_samples();
    let mut samples = vec![0.0; n];

    for reflector in scene.reflectors() {
        if reflector.amplitude == 0.0 {
            continue;
        }
        let f_b = beat_frequency(reflector.range_m + chirp.range_bias_m, chirp)?;
        let phase = reflector_phase(scene.rng_seed, reflector.id);
        let step = std::f64::consts::TAU * f_b / chirp.sample_rate_hz;
        for (i, s) in samples.iter_mut().enumerate() {
            *s += reflector.amplitude * (step * i as f64 + phase).cos();
        }
    }

    if scene.noise_amplitude > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(scene.effective_noise_seed());
        for s in samples.iter_mut() {
            let g: f64 = StandardNormal.sample(&mut rng);
            *s += scene.noise_amplitude * g;
        }
    }

    Ok(BeatSignal::new(samples, *chirp))
}
