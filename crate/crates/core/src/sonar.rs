//! Sonar signal synthesis and the estimators that turn raw samples into
//! observations: a sliding-correlator time-delay estimator and a spatial
//! periodogram azimuth estimator, composed into target localization.
//!
//! All functions are pure over value types; randomness enters only through an
//! explicitly passed seeded generator, so synthesis is reproducible.

use crate::rng::SimRng;
use rand_distr::{Distribution, Normal};
use std::f64::consts::{FRAC_PI_2, TAU};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SonarError {
    #[error("delay {delay} out of range 0..={max}")]
    DelayOutOfRange { delay: usize, max: usize },
    #[error("template length {template} exceeds signal length {signal}")]
    TemplateTooLong { template: usize, signal: usize },
    #[error("template must be nonempty")]
    EmptyTemplate,
    #[error("noise variance must be finite and nonnegative, got {0}")]
    InvalidVariance(f64),
    #[error("azimuth {0} outside the open interval (0, pi/2)")]
    AzimuthOutOfRange(f64),
    #[error("invalid array parameters: {0}")]
    InvalidArrayParams(&'static str),
    #[error("periodogram grid needs at least 2 points, got {0}")]
    InvalidGrid(usize),
    #[error("empty sample vector")]
    EmptySamples,
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
}

/// A synthesized echo: a template placed at an integer sample delay inside a
/// longer record, plus white Gaussian noise.
#[derive(Debug, Clone)]
pub struct EchoSignal {
    pub samples: Vec<f64>,
    pub template: Vec<f64>,
    /// Ground-truth placement; carried for test diagnostics only.
    pub true_delay: usize,
    pub noise_variance: f64,
}

/// Places `template` at `delay` samples inside a zero record of `n_total`
/// samples and adds i.i.d. zero-mean Gaussian noise of variance `sigma2`
/// at every index.
pub fn synthesize_echo(
    template: &[f64],
    delay: usize,
    n_total: usize,
    sigma2: f64,
    rng: &mut SimRng,
) -> Result<EchoSignal, SonarError> {
    if template.is_empty() {
        return Err(SonarError::EmptyTemplate);
    }
    if template.len() > n_total {
        return Err(SonarError::TemplateTooLong {
            template: template.len(),
            signal: n_total,
        });
    }
    let max_delay = n_total - template.len();
    if delay > max_delay {
        return Err(SonarError::DelayOutOfRange {
            delay,
            max: max_delay,
        });
    }
    if !sigma2.is_finite() || sigma2 < 0.0 {
        return Err(SonarError::InvalidVariance(sigma2));
    }
    let mut samples = vec![0.0; n_total];
    samples[delay..delay + template.len()].copy_from_slice(template);
    if sigma2 > 0.0 {
        let noise = Normal::new(0.0, sigma2.sqrt()).expect("finite std");
        for s in &mut samples {
            *s += noise.sample(rng);
        }
    }
    Ok(EchoSignal {
        samples,
        template: template.to_vec(),
        true_delay: delay,
        noise_variance: sigma2,
    })
}

/// Result of the sliding-correlator search: the maximizing shift and the full
/// score trace for diagnostics.
#[derive(Debug, Clone)]
pub struct DelayEstimate {
    pub delay: usize,
    pub scores: Vec<f64>,
}

/// Sliding inner product of `signal` with `template`:
/// `J[Y] = Σ_{n=Y..Y+M-1} signal[n]·template[n-Y]` for `0 <= Y <= N-M`,
/// maximized over integer shifts. Ties break toward the smallest shift.
pub fn correlator_delay_estimate(
    signal: &[f64],
    template: &[f64],
) -> Result<DelayEstimate, SonarError> {
    if template.is_empty() {
        return Err(SonarError::EmptyTemplate);
    }
    if template.len() > signal.len() {
        return Err(SonarError::TemplateTooLong {
            template: template.len(),
            signal: signal.len(),
        });
    }
    let m = template.len();
    let shifts = signal.len() - m + 1;
    let mut scores = Vec::with_capacity(shifts);
    let mut best = 0usize;
    for shift in 0..shifts {
        let score: f64 = signal[shift..shift + m]
            .iter()
            .zip(template)
            .map(|(x, s)| x * s)
            .sum();
        if score > scores.get(best).copied().unwrap_or(f64::NEG_INFINITY) {
            best = shift;
        }
        scores.push(score);
    }
    Ok(DelayEstimate {
        delay: best,
        scores,
    })
}

/// Uniform linear array geometry and signal parameters.
///
/// `carrier_hz * spacing_m / sound_speed_mps` is the normalized sensor
/// spacing in wavelengths; it must stay at or below 0.5 or the mapping from
/// azimuth to spatial frequency stops being injective.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayParams {
    pub num_sensors: usize,
    pub amplitude: f64,
    pub phase_rad: f64,
    pub carrier_hz: f64,
    pub spacing_m: f64,
    pub sound_speed_mps: f64,
    pub noise_variance: f64,
}

impl ArrayParams {
    pub fn new(
        num_sensors: usize,
        amplitude: f64,
        phase_rad: f64,
        carrier_hz: f64,
        spacing_m: f64,
        sound_speed_mps: f64,
        noise_variance: f64,
    ) -> Result<Self, SonarError> {
        if num_sensors < 2 {
            return Err(SonarError::InvalidArrayParams("need at least 2 sensors"));
        }
        if !amplitude.is_finite() || !phase_rad.is_finite() {
            return Err(SonarError::InvalidArrayParams(
                "amplitude and phase must be finite",
            ));
        }
        if !(carrier_hz > 0.0) || !(spacing_m > 0.0) || !(sound_speed_mps > 0.0) {
            return Err(SonarError::InvalidArrayParams(
                "carrier, spacing, and sound speed must be positive",
            ));
        }
        if !noise_variance.is_finite() || noise_variance < 0.0 {
            return Err(SonarError::InvalidVariance(noise_variance));
        }
        let p = Self {
            num_sensors,
            amplitude,
            phase_rad,
            carrier_hz,
            spacing_m,
            sound_speed_mps,
            noise_variance,
        };
        if p.normalized_spacing() > 0.5 {
            return Err(SonarError::InvalidArrayParams(
                "carrier*spacing/sound_speed exceeds 0.5 (spatial aliasing)",
            ));
        }
        Ok(p)
    }

    /// `F0·d/c`, the spacing in wavelengths.
    pub fn normalized_spacing(&self) -> f64 {
        self.carrier_hz * self.spacing_m / self.sound_speed_mps
    }
}

/// One snapshot across the array: sample `n` comes from sensor `n`.
#[derive(Debug, Clone)]
pub struct ArraySnapshot {
    pub params: ArrayParams,
    pub samples: Vec<f64>,
}

/// Synthesizes the array response to a plane wave from azimuth `beta_rad`:
/// `x[n] = A·cos(2π(F0·d/c·cos β)n + φ) + W[n]`, `n = 0..M-1`.
pub fn synthesize_array_snapshot(
    params: &ArrayParams,
    beta_rad: f64,
    rng: &mut SimRng,
) -> Result<ArraySnapshot, SonarError> {
    if !(beta_rad > 0.0 && beta_rad < FRAC_PI_2) {
        return Err(SonarError::AzimuthOutOfRange(beta_rad));
    }
    let nu = params.normalized_spacing() * beta_rad.cos();
    let mut samples: Vec<f64> = (0..params.num_sensors)
        .map(|n| params.amplitude * (TAU * nu * n as f64 + params.phase_rad).cos())
        .collect();
    if params.noise_variance > 0.0 {
        let noise = Normal::new(0.0, params.noise_variance.sqrt()).expect("finite std");
        for s in &mut samples {
            *s += noise.sample(rng);
        }
    }
    Ok(ArraySnapshot {
        params: params.clone(),
        samples,
    })
}

/// Uniform azimuth search grid: `grid_points` interior points of
/// `(0, pi/2)`, ascending.
pub fn azimuth_grid(grid_points: usize) -> Vec<f64> {
    (1..=grid_points)
        .map(|k| FRAC_PI_2 * k as f64 / (grid_points + 1) as f64)
        .collect()
}

/// Result of the spatial-periodogram search.
#[derive(Debug, Clone)]
pub struct AzimuthEstimate {
    pub azimuth_rad: f64,
    pub grid_index: usize,
    pub scores: Vec<f64>,
}

/// Precomputed periodogram exponentials for one array geometry and grid.
///
/// Evaluating the periodogram means one DFT-like sum per grid angle; the
/// exponentials depend only on the normalized spacing and the grid, so a
/// simulation that estimates azimuths every step builds the kernel once.
#[derive(Debug, Clone)]
pub struct PeriodogramKernel {
    grid: Vec<f64>,
    num_sensors: usize,
    cos_tab: Vec<f64>,
    sin_tab: Vec<f64>,
}

impl PeriodogramKernel {
    pub fn new(
        normalized_spacing: f64,
        num_sensors: usize,
        grid_points: usize,
    ) -> Result<Self, SonarError> {
        if grid_points < 2 {
            return Err(SonarError::InvalidGrid(grid_points));
        }
        if num_sensors == 0 {
            return Err(SonarError::EmptySamples);
        }
        let grid = azimuth_grid(grid_points);
        let mut cos_tab = Vec::with_capacity(grid_points * num_sensors);
        let mut sin_tab = Vec::with_capacity(grid_points * num_sensors);
        for beta in &grid {
            let nu = normalized_spacing * beta.cos();
            for n in 0..num_sensors {
                let angle = TAU * nu * n as f64;
                cos_tab.push(angle.cos());
                sin_tab.push(angle.sin());
            }
        }
        Ok(Self {
            grid,
            num_sensors,
            cos_tab,
            sin_tab,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// Runs the periodogram search over the precomputed grid. Ties break
    /// toward the smaller angle.
    pub fn estimate(&self, samples: &[f64]) -> Result<AzimuthEstimate, SonarError> {
        if samples.is_empty() {
            return Err(SonarError::EmptySamples);
        }
        if samples.len() != self.num_sensors {
            return Err(SonarError::InvalidArrayParams(
                "sample count does not match the kernel's sensor count",
            ));
        }
        let m = samples.len() as f64;
        let mut scores = Vec::with_capacity(self.grid.len());
        let mut best = 0usize;
        for k in 0..self.grid.len() {
            let base = k * self.num_sensors;
            let mut re = 0.0;
            let mut im = 0.0;
            for (n, &x) in samples.iter().enumerate() {
                re += x * self.cos_tab[base + n];
                im -= x * self.sin_tab[base + n];
            }
            let score = (re * re + im * im) / m;
            if score > scores.get(best).copied().unwrap_or(f64::NEG_INFINITY) {
                best = k;
            }
            scores.push(score);
        }
        Ok(AzimuthEstimate {
            azimuth_rad: self.grid[best],
            grid_index: best,
            scores,
        })
    }
}

/// Evaluates `I_s(β) = (1/M)|Σ_n x[n]·exp(-j2π(F0·d/c·cos β)n)|²` on the
/// uniform interior grid and returns the maximizing azimuth. Ties break
/// toward the smaller angle.
pub fn periodogram_azimuth_estimate(
    snapshot: &ArraySnapshot,
    grid_points: usize,
) -> Result<AzimuthEstimate, SonarError> {
    if snapshot.samples.is_empty() {
        return Err(SonarError::EmptySamples);
    }
    let kernel = PeriodogramKernel::new(
        snapshot.params.normalized_spacing(),
        snapshot.samples.len(),
        grid_points,
    )?;
    kernel.estimate(&snapshot.samples)
}

/// A localized target relative to the sensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Localization {
    pub range_m: f64,
    pub azimuth_rad: f64,
    pub position_m: [f64; 2],
}

/// Converts an estimated echo delay and azimuth into a position.
///
/// `range = c·(delay/fs)`, halved when the delay covers the out-and-back
/// path (`round_trip`). Position is `range·(cos β, sin β)`.
pub fn localize_target(
    delay_samples: usize,
    sample_rate_hz: f64,
    sound_speed_mps: f64,
    azimuth_rad: f64,
    round_trip: bool,
) -> Result<Localization, SonarError> {
    if !(sample_rate_hz > 0.0) {
        return Err(SonarError::NonPositive {
            name: "sample_rate",
            value: sample_rate_hz,
        });
    }
    if !(sound_speed_mps > 0.0) {
        return Err(SonarError::NonPositive {
            name: "sound_speed",
            value: sound_speed_mps,
        });
    }
    if !(azimuth_rad > 0.0 && azimuth_rad < FRAC_PI_2) {
        return Err(SonarError::AzimuthOutOfRange(azimuth_rad));
    }
    let one_way = if round_trip { 0.5 } else { 1.0 };
    let range_m = sound_speed_mps * (delay_samples as f64 / sample_rate_hz) * one_way;
    Ok(Localization {
        range_m,
        azimuth_rad,
        position_m: [range_m * azimuth_rad.cos(), range_m * azimuth_rad.sin()],
    })
}

/// Noise variance giving the requested per-sample SNR for a template:
/// `SNR_dB = 10·log10(Σ template² / (M·σ²))`.
pub fn sigma2_for_snr_db(template: &[f64], snr_db: f64) -> f64 {
    let energy: f64 = template.iter().map(|s| s * s).sum();
    energy / (template.len() as f64 * 10f64.powf(snr_db / 10.0))
}

/// Pseudo-random ±1 template of the given length.
pub fn pm1_template(len: usize, rng: &mut SimRng) -> Vec<f64> {
    use rand::Rng;
    (0..len)
        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seed_rng;

    fn array_params(noise_variance: f64) -> ArrayParams {
        // F0*d/c = 0.25
        ArrayParams::new(64, 1.0, 0.0, 375.0, 1.0, 1500.0, noise_variance).unwrap()
    }

    #[test]
    fn echo_places_template_exactly() {
        let mut rng = seed_rng(1);
        let echo = synthesize_echo(&[1.0, 1.0, 1.0, 1.0], 3, 16, 0.0, &mut rng).unwrap();
        for (i, &s) in echo.samples.iter().enumerate() {
            let expected = if (3..7).contains(&i) { 1.0 } else { 0.0 };
            assert_eq!(s, expected, "index {i}");
        }
    }

    #[test]
    fn echo_identity_placement() {
        let mut rng = seed_rng(1);
        let t = [0.5, -1.0, 2.0];
        let echo = synthesize_echo(&t, 0, 8, 0.0, &mut rng).unwrap();
        assert_eq!(&echo.samples[..3], &t);
    }

    #[test]
    fn echo_rejects_out_of_range_delay() {
        let mut rng = seed_rng(1);
        let err = synthesize_echo(&[1.0; 4], 13, 16, 0.0, &mut rng).unwrap_err();
        assert_eq!(err, SonarError::DelayOutOfRange { delay: 13, max: 12 });
    }

    #[test]
    fn echo_noise_statistics() {
        let n = 100_000;
        let mut rng = seed_rng(7);
        let echo = synthesize_echo(&[0.0], 0, n, 1.0, &mut rng).unwrap();
        let mean: f64 = echo.samples.iter().sum::<f64>() / n as f64;
        let var: f64 = echo.samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n as f64;
        assert!(mean.abs() <= 0.02, "mean {mean}");
        assert!((var - 1.0).abs() <= 0.05, "var {var}");
    }

    #[test]
    fn correlator_finds_noiseless_peak() {
        let mut rng = seed_rng(1);
        let template = [1.0, 1.0, 1.0, 1.0];
        let echo = synthesize_echo(&template, 3, 16, 0.0, &mut rng).unwrap();
        let est = correlator_delay_estimate(&echo.samples, &template).unwrap();
        assert_eq!(est.delay, 3);
        assert_eq!(est.scores.len(), 13);
    }

    #[test]
    fn correlator_zero_template_ties_break_low() {
        let est = correlator_delay_estimate(&[1.0; 16], &[0.0; 4]).unwrap();
        assert_eq!(est.delay, 0);
        assert!(est.scores.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn correlator_rejects_long_template() {
        let err = correlator_delay_estimate(&[1.0; 3], &[1.0; 4]).unwrap_err();
        assert!(matches!(err, SonarError::TemplateTooLong { .. }));
    }

    #[test]
    fn snapshot_is_direct_substitution() {
        let mut rng = seed_rng(1);
        let params = array_params(0.0);
        let beta = std::f64::consts::PI / 3.0;
        let snap = synthesize_array_snapshot(&params, beta, &mut rng).unwrap();
        for (n, &s) in snap.samples.iter().enumerate() {
            let expected = (TAU * 0.125 * n as f64).cos();
            assert!((s - expected).abs() < 1e-12, "sensor {n}: {s} vs {expected}");
        }
    }

    #[test]
    fn snapshot_zero_amplitude_noiseless_is_silent() {
        let mut rng = seed_rng(1);
        let params = ArrayParams::new(16, 0.0, 0.3, 375.0, 1.0, 1500.0, 0.0).unwrap();
        let snap = synthesize_array_snapshot(&params, 0.7, &mut rng).unwrap();
        assert!(snap.samples.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn snapshot_near_broadside_is_nearly_constant() {
        let mut rng = seed_rng(1);
        let params = ArrayParams::new(64, 2.0, 0.4, 375.0, 1.0, 1500.0, 0.0).unwrap();
        let snap =
            synthesize_array_snapshot(&params, FRAC_PI_2 - 1e-9, &mut rng).unwrap();
        let expected = 2.0 * 0.4f64.cos();
        for &s in &snap.samples {
            assert!((s - expected).abs() < 1e-6, "{s} vs {expected}");
        }
    }

    #[test]
    fn snapshot_rejects_boundary_azimuths() {
        let mut rng = seed_rng(1);
        let params = array_params(0.0);
        assert!(synthesize_array_snapshot(&params, 0.0, &mut rng).is_err());
        assert!(synthesize_array_snapshot(&params, FRAC_PI_2, &mut rng).is_err());
    }

    #[test]
    fn array_params_aliasing_guard() {
        let err = ArrayParams::new(8, 1.0, 0.0, 1000.0, 1.0, 1500.0, 0.0).unwrap_err();
        assert!(matches!(err, SonarError::InvalidArrayParams(_)));
    }

    #[test]
    fn periodogram_all_zero_returns_smallest_grid_angle() {
        let mut rng = seed_rng(1);
        let params = ArrayParams::new(16, 0.0, 0.0, 375.0, 1.0, 1500.0, 0.0).unwrap();
        let snap = synthesize_array_snapshot(&params, 0.7, &mut rng).unwrap();
        let est = periodogram_azimuth_estimate(&snap, 64).unwrap();
        assert_eq!(est.grid_index, 0);
        assert_eq!(est.azimuth_rad, azimuth_grid(64)[0]);
    }

    #[test]
    fn periodogram_rejects_degenerate_grid() {
        let mut rng = seed_rng(1);
        let snap = synthesize_array_snapshot(&array_params(0.0), 0.7, &mut rng).unwrap();
        assert_eq!(
            periodogram_azimuth_estimate(&snap, 1).unwrap_err(),
            SonarError::InvalidGrid(1)
        );
    }

    #[test]
    fn localize_round_trip_halves_path() {
        let loc = localize_target(100, 1000.0, 1500.0, 0.9, true).unwrap();
        assert_eq!(loc.range_m, 75.0);
    }

    #[test]
    fn localize_zero_delay_is_origin() {
        let loc = localize_target(0, 1000.0, 1500.0, 0.9, true).unwrap();
        assert_eq!(loc.range_m, 0.0);
        assert_eq!(loc.position_m, [0.0, 0.0]);
    }

    #[test]
    fn localize_position_trigonometry() {
        let loc = localize_target(100, 1000.0, 100.0, std::f64::consts::FRAC_PI_4, false).unwrap();
        assert!((loc.range_m - 10.0).abs() < 1e-12);
        assert!((loc.position_m[0] - 7.0710678118654755).abs() < 1e-9);
        assert!((loc.position_m[1] - 7.0710678118654755).abs() < 1e-9);
    }

    #[test]
    fn localize_rejects_bad_inputs() {
        assert!(localize_target(1, 0.0, 1500.0, 0.9, true).is_err());
        assert!(localize_target(1, 1000.0, -1.0, 0.9, true).is_err());
        assert!(localize_target(1, 1000.0, 1500.0, 0.0, true).is_err());
    }

    #[test]
    fn snr_definition_round_trips() {
        let template = vec![1.0; 64];
        let sigma2 = sigma2_for_snr_db(&template, 10.0);
        // energy 64, M 64: sigma2 = 1/10^(1) = 0.1
        assert!((sigma2 - 0.1).abs() < 1e-12);
    }
}
