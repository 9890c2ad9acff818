//! Pluggable observation-delay sources.
//!
//! Parametric kinds (constant, exponential, Poisson, geometric, two-point)
//! draw from classic distributions; the `Ssp` kind derives the delay from the
//! current simulated sonar geometry instead, quantized to the receiver's
//! sample grid. All parameter validation happens at construction; sampling
//! never fails.

use crate::rng::SimRng;
use rand::Rng;
use rand_distr::{Distribution, Exp, Geometric, Poisson};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DelayError {
    #[error("delay model {kind}: {name}={value} violates {constraint}")]
    InvalidParameter {
        kind: &'static str,
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },
    #[error("analytic moments are not defined for the ssp delay model")]
    MomentsUnsupported,
}

/// Geometry inputs read by the SSP-driven model; parametric kinds ignore it.
/// `path_length_m` is the acoustic path covered by the observation signal
/// (for round-trip sonar sensing, twice the range to the sensed object).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GeometryContext {
    pub path_length_m: f64,
}

/// A named stochastic source of observation delays, in seconds.
#[derive(Debug, Clone, PartialEq)]
pub enum DelayModel {
    /// Always `value`.
    Constant { value: f64 },
    /// `Exp(rate)`, mean `1/rate`.
    Exponential { rate: f64 },
    /// `time_unit · Poisson(mean)`.
    Poisson { mean: f64, time_unit: f64 },
    /// `time_unit · Geometric(p)` with support starting at 1.
    Geometric { p: f64, time_unit: f64 },
    /// `y_lo` with probability `1-q`, else `y_hi`. The canonical
    /// high-variance case under which zero-wait sampling is suboptimal.
    TwoPoint { y_lo: f64, y_hi: f64, q: f64 },
    /// Propagation time `path_length/sound_speed`, rounded to the sonar
    /// sample grid. Deterministic given the geometry.
    Ssp {
        sound_speed_mps: f64,
        sample_rate_hz: f64,
    },
}

fn check(
    ok: bool,
    kind: &'static str,
    name: &'static str,
    value: f64,
    constraint: &'static str,
) -> Result<(), DelayError> {
    if ok {
        Ok(())
    } else {
        Err(DelayError::InvalidParameter {
            kind,
            name,
            value,
            constraint,
        })
    }
}

impl DelayModel {
    pub fn constant(value: f64) -> Result<Self, DelayError> {
        check(
            value.is_finite() && value >= 0.0,
            "constant",
            "value",
            value,
            "value >= 0",
        )?;
        Ok(Self::Constant { value })
    }

    pub fn exponential(rate: f64) -> Result<Self, DelayError> {
        check(
            rate.is_finite() && rate > 0.0,
            "exponential",
            "rate",
            rate,
            "rate > 0",
        )?;
        Ok(Self::Exponential { rate })
    }

    pub fn poisson(mean: f64, time_unit: f64) -> Result<Self, DelayError> {
        check(
            mean.is_finite() && mean > 0.0,
            "poisson",
            "mean",
            mean,
            "mean > 0",
        )?;
        check(
            time_unit.is_finite() && time_unit > 0.0,
            "poisson",
            "time_unit",
            time_unit,
            "time_unit > 0",
        )?;
        Ok(Self::Poisson { mean, time_unit })
    }

    pub fn geometric(p: f64, time_unit: f64) -> Result<Self, DelayError> {
        check(
            p.is_finite() && p > 0.0 && p <= 1.0,
            "geometric",
            "p",
            p,
            "0 < p <= 1",
        )?;
        check(
            time_unit.is_finite() && time_unit > 0.0,
            "geometric",
            "time_unit",
            time_unit,
            "time_unit > 0",
        )?;
        Ok(Self::Geometric { p, time_unit })
    }

    pub fn two_point(y_lo: f64, y_hi: f64, q: f64) -> Result<Self, DelayError> {
        check(
            y_lo.is_finite() && y_lo >= 0.0,
            "two_point",
            "y_lo",
            y_lo,
            "y_lo >= 0",
        )?;
        check(
            y_hi.is_finite() && y_hi >= y_lo,
            "two_point",
            "y_hi",
            y_hi,
            "y_hi >= y_lo",
        )?;
        check(
            q.is_finite() && (0.0..=1.0).contains(&q),
            "two_point",
            "q",
            q,
            "0 <= q <= 1",
        )?;
        Ok(Self::TwoPoint { y_lo, y_hi, q })
    }

    pub fn ssp(sound_speed_mps: f64, sample_rate_hz: f64) -> Result<Self, DelayError> {
        check(
            sound_speed_mps.is_finite() && sound_speed_mps > 0.0,
            "ssp",
            "sound_speed",
            sound_speed_mps,
            "sound_speed > 0",
        )?;
        check(
            sample_rate_hz.is_finite() && sample_rate_hz > 0.0,
            "ssp",
            "sample_rate",
            sample_rate_hz,
            "sample_rate > 0",
        )?;
        Ok(Self::Ssp {
            sound_speed_mps,
            sample_rate_hz,
        })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Constant { .. } => "constant",
            Self::Exponential { .. } => "exponential",
            Self::Poisson { .. } => "poisson",
            Self::Geometric { .. } => "geometric",
            Self::TwoPoint { .. } => "two_point",
            Self::Ssp { .. } => "ssp",
        }
    }

    /// Draws one observation delay in seconds. Never fails; the geometry
    /// context is consulted only by the `Ssp` kind.
    pub fn sample_delay(&self, geometry: &GeometryContext, rng: &mut SimRng) -> f64 {
        match *self {
            Self::Constant { value } => value,
            Self::Exponential { rate } => Exp::new(rate).expect("validated").sample(rng),
            Self::Poisson { mean, time_unit } => {
                time_unit * Poisson::new(mean).expect("validated").sample(rng)
            }
            Self::Geometric { p, time_unit } => {
                // rand_distr counts failures before success; shift to support {1, 2, ...}
                time_unit * (Geometric::new(p).expect("validated").sample(rng) + 1) as f64
            }
            Self::TwoPoint { y_lo, y_hi, q } => {
                if rng.random::<f64>() < q {
                    y_hi
                } else {
                    y_lo
                }
            }
            Self::Ssp {
                sound_speed_mps,
                sample_rate_hz,
            } => {
                let path = geometry.path_length_m.max(0.0);
                let samples = (path / sound_speed_mps * sample_rate_hz).round();
                samples / sample_rate_hz
            }
        }
    }

    /// Analytic mean and variance of the delay distribution.
    /// The `Ssp` kind has no distribution of its own and is unsupported.
    pub fn moments(&self) -> Result<(f64, f64), DelayError> {
        Ok(match *self {
            Self::Constant { value } => (value, 0.0),
            Self::Exponential { rate } => (1.0 / rate, 1.0 / (rate * rate)),
            Self::Poisson { mean, time_unit } => (time_unit * mean, time_unit * time_unit * mean),
            Self::Geometric { p, time_unit } => (
                time_unit / p,
                time_unit * time_unit * (1.0 - p) / (p * p),
            ),
            Self::TwoPoint { y_lo, y_hi, q } => {
                let mean = (1.0 - q) * y_lo + q * y_hi;
                let var = q * (1.0 - q) * (y_hi - y_lo) * (y_hi - y_lo);
                (mean, var)
            }
            Self::Ssp { .. } => return Err(DelayError::MomentsUnsupported),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seed_rng;

    const NO_GEOMETRY: GeometryContext = GeometryContext { path_length_m: 0.0 };

    #[test]
    fn constant_always_returns_value() {
        let m = DelayModel::constant(2.0).unwrap();
        let mut rng = seed_rng(0);
        for _ in 0..100 {
            assert_eq!(m.sample_delay(&NO_GEOMETRY, &mut rng), 2.0);
        }
    }

    #[test]
    fn exponential_mean_matches_analytic() {
        let m = DelayModel::exponential(0.5).unwrap();
        let mut rng = seed_rng(11);
        let n = 100_000;
        let mean: f64 =
            (0..n).map(|_| m.sample_delay(&NO_GEOMETRY, &mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 2.0).abs() <= 0.05, "mean {mean}");
    }

    #[test]
    fn geometric_mean_and_support() {
        let m = DelayModel::geometric(0.5, 1.0).unwrap();
        let mut rng = seed_rng(13);
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let d = m.sample_delay(&NO_GEOMETRY, &mut rng);
            assert!(d >= 1.0 && d.fract() == 0.0, "draw {d}");
            sum += d;
        }
        let mean = sum / n as f64;
        assert!((mean - 2.0).abs() <= 0.05, "mean {mean}");
    }

    #[test]
    fn moments_match_hand_arithmetic() {
        assert_eq!(
            DelayModel::exponential(2.0).unwrap().moments().unwrap(),
            (0.5, 0.25)
        );
        assert_eq!(
            DelayModel::constant(3.0).unwrap().moments().unwrap(),
            (3.0, 0.0)
        );
        // Bernoulli mixture of 0.1 and 10 with q = 0.1:
        // mean 0.9*0.1 + 0.1*10 = 1.09, variance q(1-q)(hi-lo)^2 = 0.09*9.9^2
        let (mean, var) = DelayModel::two_point(0.1, 10.0, 0.1)
            .unwrap()
            .moments()
            .unwrap();
        assert!((mean - 1.09).abs() < 1e-12);
        assert!((var - 8.8209).abs() < 1e-12);
    }

    #[test]
    fn ssp_moments_unsupported() {
        let m = DelayModel::ssp(1500.0, 1000.0).unwrap();
        assert_eq!(m.moments(), Err(DelayError::MomentsUnsupported));
    }

    #[test]
    fn ssp_quantizes_to_sample_grid() {
        let m = DelayModel::ssp(1500.0, 1000.0).unwrap();
        let mut rng = seed_rng(0);
        let g = GeometryContext {
            path_length_m: 300.0,
        };
        assert_eq!(m.sample_delay(&g, &mut rng), 0.2);
        // 0.1501 s of travel rounds to sample 150
        let g = GeometryContext {
            path_length_m: 225.15,
        };
        assert_eq!(m.sample_delay(&g, &mut rng), 0.15);
    }

    #[test]
    fn identical_seeds_give_identical_sequences() {
        let models = [
            DelayModel::constant(1.0).unwrap(),
            DelayModel::exponential(2.0).unwrap(),
            DelayModel::poisson(3.0, 0.1).unwrap(),
            DelayModel::geometric(0.3, 0.2).unwrap(),
            DelayModel::two_point(0.1, 10.0, 0.1).unwrap(),
        ];
        for m in &models {
            let mut r1 = seed_rng(99);
            let mut r2 = seed_rng(99);
            for _ in 0..50 {
                assert_eq!(
                    m.sample_delay(&NO_GEOMETRY, &mut r1),
                    m.sample_delay(&NO_GEOMETRY, &mut r2),
                    "kind {}",
                    m.kind()
                );
            }
        }
    }

    #[test]
    fn construction_rejects_bad_parameters() {
        assert!(DelayModel::constant(-1.0).is_err());
        assert!(DelayModel::exponential(0.0).is_err());
        assert!(DelayModel::poisson(0.0, 1.0).is_err());
        assert!(DelayModel::poisson(1.0, 0.0).is_err());
        assert!(DelayModel::geometric(0.0, 1.0).is_err());
        assert!(DelayModel::geometric(1.1, 1.0).is_err());
        assert!(DelayModel::two_point(1.0, 0.5, 0.1).is_err());
        assert!(DelayModel::two_point(0.1, 10.0, 1.5).is_err());
        assert!(DelayModel::ssp(0.0, 1000.0).is_err());
    }
}
