//! Return-signal-amplitude (RSA) versus range, and peak extraction.

use std::io::{Read, Write};

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::REFERENCE_RANGE_M;
use crate::synth::{BeatSignal, ChirpConfig, SPEED_OF_LIGHT};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    Rect,
    #[default]
    Hann,
}

impl Window {
    /// Periodic (DFT-even) coefficients.
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rect => vec![1.0; n],
            Window::Hann => (0..n)
                .map(|i| 0.5 - 0.5 * (std::f64::consts::TAU * i as f64 / n as f64).cos())
                .collect(),
        }
    }
}

impl std::str::FromStr for Window {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rect" => Ok(Window::Rect),
            "hann" => Ok(Window::Hann),
            other => Err(Error::config("window", format!("expected rect or hann, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeBin {
    pub range_m: f64,
    pub rsa: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RangeProfile {
    pub bins: Vec<RangeBin>,
    pub chirp: ChirpConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub bin: usize,
    pub range_m: f64,
    pub rsa: f64,
    pub prominence: f64,
}

/// Meters per FFT bin for a sweep of `n` samples.
fn bin_spacing(chirp: &ChirpConfig, n: usize) -> f64 {
    let df = chirp.sample_rate_hz / n as f64;
    df * SPEED_OF_LIGHT * chirp.sweep_time_s / (2.0 * chirp.bandwidth_hz)
}

impl RangeProfile {
    /// Builds a profile on the standard bin grid of `chirp` from raw RSA values.
    pub fn from_rsa(rsa: Vec<f64>, chirp: ChirpConfig) -> Self {
        let spacing = bin_spacing(&chirp, chirp.n_samples());
        let bins = rsa
            .into_iter()
            .enumerate()
            .map(|(k, rsa)| RangeBin {
                range_m: k as f64 * spacing,
                rsa,
            })
            .collect();
        Self { bins, chirp }
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn rsa(&self) -> Vec<f64> {
        self.bins.iter().map(|b| b.rsa).collect()
    }

    pub fn max_rsa(&self) -> f64 {
        self.bins.iter().map(|b| b.rsa).fold(0.0, f64::max)
    }

    pub fn bin_spacing(&self) -> f64 {
        match self.bins.as_slice() {
            [a, b, ..] => b.range_m - a.range_m,
            _ => bin_spacing(&self.chirp, self.chirp.n_samples()),
        }
    }

    /// Index of the bin whose range is closest to `range_m`.
    pub fn nearest_bin(&self, range_m: f64) -> Option<usize> {
        if self.bins.is_empty() {
            return None;
        }
        let spacing = self.bin_spacing();
        let start = self.bins[0].range_m;
        let k = ((range_m - start) / spacing).round();
        Some(k.clamp(0.0, (self.bins.len() - 1) as f64) as usize)
    }

    /// Bin with the largest RSA; ties resolve to the lowest range.
    pub fn global_peak(&self) -> Option<RangeBin> {
        self.bins
            .iter()
            .copied()
            .reduce(|best, b| if b.rsa > best.rsa { b } else { best })
    }

    /// Drops bins beyond `max_range_m`.
    pub fn truncated(&self, max_range_m: f64) -> Self {
        Self {
            bins: self.bins.iter().copied().take_while(|b| b.range_m <= max_range_m).collect(),
            chirp: self.chirp,
        }
    }

    /// Undoes the two-way spreading loss: every bin is scaled by
    /// `(range / r0)²`, so a reflector's compensated RSA tracks its
    /// reflectivity instead of its distance.
    pub fn range_compensated(&self) -> Self {
        let bins = self
            .bins
            .iter()
            .map(|b| RangeBin {
                range_m: b.range_m,
                rsa: b.rsa * (b.range_m / REFERENCE_RANGE_M).powi(2),
            })
            .collect();
        Self { bins, chirp: self.chirp }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let bins = self
            .bins
            .iter()
            .map(|b| RangeBin {
                range_m: b.range_m,
                rsa: b.rsa * factor,
            })
            .collect();
        Self { bins, chirp: self.chirp }
    }

    /// Median RSA, a robust estimate of the noise floor.
    pub fn noise_floor(&self) -> f64 {
        if self.bins.is_empty() {
            return 0.0;
        }
        let mut v = self.rsa();
        v.sort_by(f64::total_cmp);
        let mid = v.len() / 2;
        if v.len().is_multiple_of(2) {
            0.5 * (v[mid - 1] + v[mid])
        } else {
            v[mid]
        }
    }

    /// Bin-wise mean of profiles sharing one chirp and bin grid.
    pub fn mean(profiles: &[RangeProfile]) -> Result<Self> {
        let first = profiles.first().ok_or(Error::NoProfiles)?;
        if profiles
            .iter()
            .any(|p| p.chirp != first.chirp || p.bins.len() != first.bins.len())
        {
            return Err(Error::ChirpMismatch);
        }
        if profiles.len() == 1 {
            return Ok(first.clone());
        }
        let k = profiles.len() as f64;
        let bins = (0..first.bins.len())
            .map(|i| RangeBin {
                range_m: first.bins[i].range_m,
                rsa: profiles.iter().map(|p| p.bins[i].rsa).sum::<f64>() / k,
            })
            .collect();
        Ok(Self { bins, chirp: first.chirp })
    }

    /// `range_m,rsa` with 9 significant digits per value.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["range_m", "rsa"])?;
        for b in &self.bins {
            w.write_record([sig9(b.range_m), sig9(b.rsa)])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    /// Reads a `range_m,rsa` CSV; `chirp` is attached as metadata.
    pub fn read_csv<R: Read>(reader: R, chirp: ChirpConfig) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let mut bins = Vec::new();
        for row in r.deserialize() {
            let bin: RangeBin = row?;
            bins.push(bin);
        }
        Ok(Self { bins, chirp })
    }
}

/// Formats with 9 significant digits in scientific notation.
pub fn sig9(x: f64) -> String {
    format!("{x:.8e}")
}

pub fn range_profile(beat: &BeatSignal, window: Window) -> RangeProfile {
    let n = beat.samples.len();
    let w = window.coefficients(n);
    let gain: f64 = w.iter().sum();
    let mut buf: Vec<Complex<f64>> = beat
        .samples
        .iter()
        .zip(&w)
        .map(|(&s, &wi)| Complex::new(s * wi, 0.0))
        .collect();
    if n > 0 {
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    }
    let rsa = buf[..n / 2].iter().map(|c| 2.0 * c.norm() / gain).collect();
    profile_on_grid(rsa, beat.chirp, n)
}

/// Direct `O(n²)` discrete Fourier sum with a rectangular window; the
/// reference against which [`range_profile`] is checked.
pub fn naive_spectrum(beat: &BeatSignal) -> RangeProfile {
    let n = beat.samples.len();
    let rsa = (0..n / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (i, &s) in beat.samples.iter().enumerate() {
                // exact integer phase index keeps the angle small
                let idx = (k * i) % n;
                let angle = std::f64::consts::TAU * idx as f64 / n as f64;
                re += s * angle.cos();
                im -= s * angle.sin();
            }
            2.0 * re.hypot(im) / n as f64
        })
        .collect();
    profile_on_grid(rsa, beat.chirp, n)
}

fn profile_on_grid(rsa: Vec<f64>, chirp: ChirpConfig, n: usize) -> RangeProfile {
    let spacing = bin_spacing(&chirp, n);
    let bins = rsa
        .into_iter()
        .enumerate()
        .map(|(k, rsa)| RangeBin {
            range_m: k as f64 * spacing,
            rsa,
        })
        .collect();
    RangeProfile { bins, chirp }
}

/// Local maxima of `values` with their prominences, in index order.
///
/// A peak is strictly greater than both neighbours; a flat top resolves to
/// its lowest index. Prominence is the height above the higher of the two
/// flanking minima, each taken up to the next strictly higher sample or the
/// sequence edge.
pub fn find_peaks(values: &[f64]) -> Vec<(usize, f64)> {
    let n = values.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if values[i] > values[i - 1] {
            let mut j = i;
            while j + 1 < n && values[j + 1] == values[i] {
                j += 1;
            }
            if j + 1 < n && values[j + 1] < values[i] {
                out.push((i, prominence(values, i)));
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

fn prominence(values: &[f64], peak: usize) -> f64 {
    let h = values[peak];
    let mut left_min = h;
    for &v in values[..peak].iter().rev() {
        if v > h {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = h;
    for &v in &values[peak + 1..] {
        if v > h {
            break;
        }
        right_min = right_min.min(v);
    }
    h - left_min.max(right_min)
}

pub fn detect_peaks(profile: &RangeProfile, min_prominence: f64, min_rsa: f64) -> Vec<Peak> {
    let rsa = profile.rsa();
    find_peaks(&rsa)
        .into_iter()
        .filter(|&(i, p)| rsa[i] > 0.0 && rsa[i] >= min_rsa && p >= min_prominence)
        .map(|(i, prominence)| Peak {
            bin: i,
            range_m: profile.bins[i].range_m,
            rsa: rsa[i],
            prominence,
        })
        .collect()
}

/// Thresholds for [`detect_peaks`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakThresholds {
    pub min_prominence: f64,
    pub min_rsa: f64,
}

impl PeakThresholds {
    pub const fn new(min_prominence: f64, min_rsa: f64) -> Self {
        Self {
            min_prominence,
            min_rsa,
        }
    }

    /// Both thresholds at `factor` times the profile's median RSA.
    pub fn from_noise_floor(profile: &RangeProfile, factor: f64) -> Self {
        let t = factor * profile.noise_floor();
        Self::new(t, t)
    }

    pub fn detect(&self, profile: &RangeProfile) -> Vec<Peak> {
        detect_peaks(profile, self.min_prominence, self.min_rsa)
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    use super::*;
    use crate::scene::{Material, Scatterer, ScattererKind, Scene, Wall};
    use crate::synth::synthesize_beat;

    fn profile_of(values: &[f64]) -> RangeProfile {
        RangeProfile::from_rsa(values.to_vec(), ChirpConfig::default())
    }

    fn tone(n: usize, bin: f64, amp: f64, phase: f64) -> BeatSignal {
        let chirp = ChirpConfig {
            sample_rate_hz: n as f64 * 1000.0,
            ..ChirpConfig::default()
        };
        let samples = (0..n)
            .map(|i| amp * (std::f64::consts::TAU * bin * i as f64 / n as f64 + phase).cos())
            .collect();
        BeatSignal::new(samples, chirp)
    }

    #[test]
    fn zero_beat_gives_zero_profile() {
        let beat = BeatSignal::new(vec![0.0; 1000], ChirpConfig::default());
        for w in [Window::Rect, Window::Hann] {
            let p = range_profile(&beat, w);
            assert_eq!(p.len(), 500);
            assert!(p.bins.iter().all(|b| b.rsa == 0.0));
        }
        assert!(naive_spectrum(&beat).bins.iter().all(|b| b.rsa == 0.0));
    }

    #[test]
    fn bins_are_uniform_at_range_resolution() {
        let p = range_profile(&BeatSignal::new(vec![0.0; 1000], ChirpConfig::default()), Window::Hann);
        let res = ChirpConfig::default().range_resolution();
        for pair in p.bins.windows(2) {
            assert_relative_eq!(pair[1].range_m - pair[0].range_m, res, max_relative = 1e-9);
        }
    }

    #[test]
    fn on_bin_tone_has_unit_gain() {
        for w in [Window::Rect, Window::Hann] {
            let p = range_profile(&tone(256, 20.0, 0.7, 0.3), w);
            assert_relative_eq!(p.bins[20].rsa, 0.7, max_relative = 1e-12);
        }
    }

    #[test]
    fn single_tone_gives_single_dominant_bin_in_naive_sum() {
        let p = naive_spectrum(&tone(128, 9.0, 1.0, 1.1));
        assert_eq!(p.global_peak().unwrap().range_m, p.bins[9].range_m);
        for (k, b) in p.bins.iter().enumerate() {
            if k != 9 {
                assert!(b.rsa < 1e-12, "bin {k} = {}", b.rsa);
            }
        }
    }

    #[test]
    fn scatterer_at_three_meters_localizes() {
        let scene = Scene::new(8.0)
            .with_seed(7)
            .with_scatterer(Scatterer::new("t", 3.0, Material::human(), ScattererKind::Human));
        let beat = synthesize_beat(&scene, &ChirpConfig::default()).unwrap();
        let peak = range_profile(&beat, Window::Hann).global_peak().unwrap();
        assert!((peak.range_m - 3.0).abs() <= 0.075, "{}", peak.range_m);
        let oracle = naive_spectrum(&beat).global_peak().unwrap();
        assert_eq!(peak.range_m, oracle.range_m);
    }

    #[test]
    fn scaling_the_beat_scales_the_profile() {
        let beat = tone(300, 17.3, 0.4, 0.2);
        let doubled = BeatSignal::new(beat.samples.iter().map(|s| 2.0 * s).collect(), beat.chirp);
        let a = range_profile(&beat, Window::Hann);
        let b = range_profile(&doubled, Window::Hann);
        for (x, y) in a.bins.iter().zip(&b.bins) {
            assert_relative_eq!(2.0 * x.rsa, y.rsa, max_relative = 1e-12, epsilon = 1e-15);
        }
    }

    #[test]
    fn range_bias_shifts_the_apparent_wall() {
        let chirp = ChirpConfig {
            range_bias_m: 0.5,
            ..ChirpConfig::default()
        };
        let scene = Scene::new(8.0).with_wall(Wall::new("back", 6.0, Material::lab_wall()));
        let beat = synthesize_beat(&scene, &chirp).unwrap();
        let peak = range_profile(&beat, Window::Hann).global_peak().unwrap();
        assert!((peak.range_m - 6.5).abs() <= chirp.range_resolution());
    }

    #[test]
    fn monotone_profile_has_no_peaks() {
        let p = profile_of(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        assert!(detect_peaks(&p, 0.0, 0.0).is_empty());
        let p = profile_of(&[5.0, 4.0, 4.0, 1.0]);
        assert!(detect_peaks(&p, 0.0, 0.0).is_empty());
    }

    #[test]
    fn plateau_resolves_to_lowest_bin() {
        let p = profile_of(&[0.0, 1.0, 3.0, 3.0, 3.0, 1.0, 0.0]);
        let peaks = detect_peaks(&p, 0.0, 0.0);
        assert_eq!(peaks.len(), 1);
        assert_eq!(peaks[0].bin, 2);
        assert_eq!(peaks[0].prominence, 3.0);
    }

    #[test]
    fn prominence_uses_higher_flanking_minimum() {
        // peak 4 at idx 3: left min 1 (idx 2, then 5 is higher), right min 0
        let p = profile_of(&[0.0, 5.0, 1.0, 4.0, 2.0, 0.0, 0.0]);
        let peaks = detect_peaks(&p, 0.0, 0.0);
        assert_eq!(peaks.len(), 2);
        assert_eq!((peaks[0].bin, peaks[0].prominence), (1, 5.0));
        assert_eq!((peaks[1].bin, peaks[1].prominence), (3, 3.0));
        let filtered = detect_peaks(&p, 3.5, 0.0);
        assert_eq!(filtered.len(), 1);
        assert_eq!(filtered[0].bin, 1);
        assert!(detect_peaks(&p, 0.0, 4.5).iter().all(|pk| pk.rsa >= 4.5));
    }

    #[test]
    fn scatterer_and_wall_give_two_peaks() {
        let scene = Scene::new(8.0)
            .with_seed(1)
            .with_wall(Wall::new("wall", 6.0, Material::lab_wall()))
            .with_scatterer(Scatterer::new("h", 2.0, Material::human(), ScattererKind::Human));
        let beat = synthesize_beat(&scene, &ChirpConfig::default()).unwrap();
        let profile = range_profile(&beat, Window::Hann);
        let peaks = detect_peaks(&profile, 1e-4, 1e-4);
        assert_eq!(peaks.len(), 2, "{peaks:?}");
        let res = profile.bin_spacing();
        assert!((peaks[0].range_m - 2.0).abs() <= 1.5 * res);
        assert!((peaks[1].range_m - 6.0).abs() <= 1.5 * res);
    }

    #[test]
    fn csv_has_header_and_nine_digits() {
        let p = profile_of(&[0.0, 0.123456789123]);
        let mut out = Vec::new();
        p.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("range_m,rsa"));
        assert_eq!(lines.next(), Some("0.00000000e0,0.00000000e0"));
        assert_eq!(lines.next(), Some("7.49481145e-2,1.23456789e-1"));
        let back = RangeProfile::read_csv(text.as_bytes(), p.chirp).unwrap();
        assert_eq!(back.len(), 2);
        assert_relative_eq!(back.bins[1].rsa, 0.123456789, max_relative = 1e-9);
    }

    #[test]
    fn mean_of_identical_profiles_is_identity() {
        let p = profile_of(&[0.1, 0.4, 0.2, 0.9]);
        let m = RangeProfile::mean(&[p.clone(), p.clone(), p.clone()]).unwrap();
        for (a, b) in m.bins.iter().zip(&p.bins) {
            assert_relative_eq!(a.rsa, b.rsa, max_relative = 1e-15);
        }
        assert!(matches!(RangeProfile::mean(&[]), Err(Error::NoProfiles)));
    }

    #[test]
    fn window_parses() {
        assert_eq!("Hann".parse::<Window>().unwrap(), Window::Hann);
        assert_eq!("rect".parse::<Window>().unwrap(), Window::Rect);
        assert!("kaiser".parse::<Window>().is_err());
    }

    proptest! {
        #[test]
        fn every_peak_meets_its_thresholds(
            values in prop::collection::vec(0.0f64..10.0, 3..200),
            min_prom in 0.0f64..5.0,
            min_rsa in 0.0f64..5.0,
        ) {
            let p = profile_of(&values);
            let all = detect_peaks(&p, 0.0, 0.0);
            let some = detect_peaks(&p, min_prom, min_rsa);
            for pk in &some {
                prop_assert!(pk.rsa >= min_rsa && pk.prominence >= min_prom && pk.rsa > 0.0);
                prop_assert!(all.contains(pk));
            }
            for pair in all.windows(2) {
                prop_assert!(pair[0].range_m < pair[1].range_m);
            }
        }

        #[test]
        fn fft_matches_naive_sum(samples in prop::collection::vec(-1.0f64..1.0, 16..300)) {
            let chirp = ChirpConfig { sample_rate_hz: samples.len() as f64 * 1000.0, ..ChirpConfig::default() };
            let beat = BeatSignal::new(samples, chirp);
            let fast = range_profile(&beat, Window::Rect);
            let slow = naive_spectrum(&beat);
            let scale = slow.max_rsa().max(f64::MIN_POSITIVE);
            for (a, b) in fast.bins.iter().zip(&slow.bins) {
                prop_assert!((a.rsa - b.rsa).abs() <= 1e-9 * scale);
            }
        }
    }
}
