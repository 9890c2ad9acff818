//! Age-of-information sawtooth process and its time averages.
//!
//! An update generated at time `T` and received at time `D >= T` resets the
//! receiver's age to `D - T`; between receptions the age grows with slope 1.
//! Two equivalent views of the same trajectory are provided:
//!
//! - [`AoiProcess`] — explicit (generation, reception) instants, the form the
//!   simulation environment produces online;
//! - [`DelayWaitTrace`] — delay/wait increments `Y_0..Y_N`, `Z_0..Z_{N-1}`
//!   with `T_0 = 0`, the form closed-form averages are stated in.
//!
//! Three average-age evaluators are deliberately kept side by side: the
//! trapezoid integration of the sawtooth ([`time_avg_aoi_geometric`], the
//! canonical one used in rewards), a literal transcription of the published
//! closed form ([`time_avg_aoi_paper`], retained for traceability — it halves
//! the initial-segment contribution), and a left-Riemann integrator
//! ([`numeric_integrate_aoi`]) used as an independent numerical check.

use thiserror::Error;

/// Errors from age-process construction and evaluation.
#[derive(Debug, Error, PartialEq)]
pub enum AoiError {
    #[error("time must be finite and nonnegative, got {0}")]
    InvalidTime(f64),
    #[error("invalid update (gen={gen}, recv={recv}): {reason}")]
    InvalidUpdate {
        gen: f64,
        recv: f64,
        reason: &'static str,
    },
    #[error("malformed trace: {0}")]
    MalformedTrace(&'static str),
    #[error("zero total time")]
    ZeroTotalTime,
    #[error("integration step must be positive, got {0}")]
    InvalidStep(f64),
    #[error("horizon {horizon} precedes last reception {last_recv}")]
    HorizonBeforeLastReception { horizon: f64, last_recv: f64 },
}

/// One information update: generated at `gen_time`, received at `recv_time`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Update {
    pub gen_time: f64,
    pub recv_time: f64,
}

impl Update {
    /// Observation delay of this update (`recv_time - gen_time`).
    pub fn delay(&self) -> f64 {
        self.recv_time - self.gen_time
    }
}

/// Ordered record of update instants defining the age sawtooth.
///
/// Invariants, enforced on every push:
/// - `recv_time >= gen_time` for each update,
/// - reception times strictly increase,
/// - generation times never decrease.
#[derive(Debug, Clone, PartialEq)]
pub struct AoiProcess {
    initial_age: f64,
    updates: Vec<Update>,
}

impl AoiProcess {
    /// Empty process with age `initial_age` at the time origin.
    pub fn new(initial_age: f64) -> Result<Self, AoiError> {
        if !initial_age.is_finite() || initial_age < 0.0 {
            return Err(AoiError::InvalidTime(initial_age));
        }
        Ok(Self {
            initial_age,
            updates: Vec::new(),
        })
    }

    /// Builds a process from `(gen_time, recv_time)` pairs.
    pub fn from_updates(
        initial_age: f64,
        pairs: impl IntoIterator<Item = (f64, f64)>,
    ) -> Result<Self, AoiError> {
        let mut p = Self::new(initial_age)?;
        for (gen, recv) in pairs {
            p.push(gen, recv)?;
        }
        Ok(p)
    }

    /// Appends one update, validating the ordering invariants.
    pub fn push(&mut self, gen_time: f64, recv_time: f64) -> Result<(), AoiError> {
        if !gen_time.is_finite() || !recv_time.is_finite() {
            return Err(AoiError::InvalidUpdate {
                gen: gen_time,
                recv: recv_time,
                reason: "non-finite instant",
            });
        }
        if recv_time < gen_time {
            return Err(AoiError::InvalidUpdate {
                gen: gen_time,
                recv: recv_time,
                reason: "received before generated",
            });
        }
        if let Some(last) = self.updates.last() {
            if recv_time <= last.recv_time {
                return Err(AoiError::InvalidUpdate {
                    gen: gen_time,
                    recv: recv_time,
                    reason: "reception times must strictly increase",
                });
            }
            if gen_time < last.gen_time {
                return Err(AoiError::InvalidUpdate {
                    gen: gen_time,
                    recv: recv_time,
                    reason: "generation times must not decrease",
                });
            }
        }
        self.updates.push(Update {
            gen_time,
            recv_time,
        });
        Ok(())
    }

    pub fn initial_age(&self) -> f64 {
        self.initial_age
    }

    pub fn updates(&self) -> &[Update] {
        &self.updates
    }

    pub fn is_empty(&self) -> bool {
        self.updates.is_empty()
    }

    pub fn last_recv_time(&self) -> Option<f64> {
        self.updates.last().map(|u| u.recv_time)
    }

    /// Index of the newest update received by time `t`, if any.
    fn latest_received(&self, t: f64) -> Option<usize> {
        let n = self.updates.partition_point(|u| u.recv_time <= t);
        n.checked_sub(1)
    }

    /// Instantaneous age `Δ(t)`.
    ///
    /// Returns `t - gen_time` of the newest update received by `t`; before any
    /// reception the initial ramp `initial_age + t` applies.
    pub fn instantaneous_aoi(&self, t: f64) -> Result<f64, AoiError> {
        if !t.is_finite() || t < 0.0 {
            return Err(AoiError::InvalidTime(t));
        }
        Ok(match self.latest_received(t) {
            Some(i) => t - self.updates[i].gen_time,
            None => self.initial_age + t,
        })
    }

    /// Exact area under the sawtooth over `[0, t]` (piecewise trapezoids).
    pub fn age_area_up_to(&self, t: f64) -> Result<f64, AoiError> {
        if !t.is_finite() || t < 0.0 {
            return Err(AoiError::InvalidTime(t));
        }
        let mut area = 0.0;
        let mut seg_start = 0.0;
        let mut age_at_start = self.initial_age;
        for u in &self.updates {
            if u.recv_time > t {
                break;
            }
            let width = u.recv_time - seg_start;
            area += 0.5 * (age_at_start + (age_at_start + width)) * width;
            seg_start = u.recv_time;
            age_at_start = u.recv_time - u.gen_time;
        }
        let width = t - seg_start;
        area += 0.5 * (age_at_start + (age_at_start + width)) * width;
        Ok(area)
    }

    /// Running time-averaged age over `[0, t]`; at `t = 0` the limit is the
    /// initial age. Before the first reception this reduces to the ramp
    /// average `initial_age + t/2`.
    pub fn average_age_up_to(&self, t: f64) -> Result<f64, AoiError> {
        if !t.is_finite() || t < 0.0 {
            return Err(AoiError::InvalidTime(t));
        }
        if t == 0.0 {
            return Ok(self.initial_age);
        }
        Ok(self.age_area_up_to(t)? / t)
    }

    /// Rewrites the process as delay/wait increments. Requires the first
    /// generation at the time origin, the convention [`DelayWaitTrace`] uses.
    pub fn to_trace(&self) -> Result<DelayWaitTrace, AoiError> {
        let first = self
            .updates
            .first()
            .ok_or(AoiError::MalformedTrace("process has no updates"))?;
        if first.gen_time != 0.0 {
            return Err(AoiError::MalformedTrace(
                "first generation must be at the time origin",
            ));
        }
        let delays: Vec<f64> = self.updates.iter().map(Update::delay).collect();
        let waits: Vec<f64> = self
            .updates
            .windows(2)
            .map(|w| w[1].gen_time - w[0].recv_time)
            .collect();
        DelayWaitTrace::new(delays, waits, self.initial_age)
    }
}

/// Delay/wait form of a sawtooth trajectory: delays `Y_0..Y_N`, waits
/// `Z_0..Z_{N-1}`, and the age at the origin.
///
/// Times unfold as `T_0 = 0`, `D_i = T_i + Y_i`, `T_{i+1} = D_i + Z_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayWaitTrace {
    delays: Vec<f64>,
    waits: Vec<f64>,
    initial_age: f64,
}

impl DelayWaitTrace {
    pub fn new(delays: Vec<f64>, waits: Vec<f64>, initial_age: f64) -> Result<Self, AoiError> {
        if delays.is_empty() {
            return Err(AoiError::MalformedTrace("at least one delay required"));
        }
        if delays.len() != waits.len() + 1 {
            return Err(AoiError::MalformedTrace(
                "delays must have exactly one more entry than waits",
            ));
        }
        if delays.iter().chain(&waits).any(|v| !v.is_finite() || *v < 0.0) {
            return Err(AoiError::MalformedTrace(
                "delays and waits must be finite and nonnegative",
            ));
        }
        if !initial_age.is_finite() || initial_age < 0.0 {
            return Err(AoiError::InvalidTime(initial_age));
        }
        Ok(Self {
            delays,
            waits,
            initial_age,
        })
    }

    pub fn delays(&self) -> &[f64] {
        &self.delays
    }

    pub fn waits(&self) -> &[f64] {
        &self.waits
    }

    pub fn initial_age(&self) -> f64 {
        self.initial_age
    }

    /// Unfolds the trace into explicit update instants.
    pub fn to_process(&self) -> AoiProcess {
        let mut updates = Vec::with_capacity(self.delays.len());
        let mut gen = 0.0;
        for (i, &y) in self.delays.iter().enumerate() {
            let recv = gen + y;
            updates.push((gen, recv));
            if let Some(&z) = self.waits.get(i) {
                gen = recv + z;
            }
        }
        AoiProcess::from_updates(self.initial_age, updates)
            .expect("trace invariants guarantee a valid process")
    }
}

/// Literal evaluation of the published closed-form time average.
///
/// Numerator `Σ_{i=1..N}((2Y_{i-1}+Y_i+Z_{i-1})(Y_i+Z_{i-1})) + S_0` with
/// `S_0 = 0.5(2Δ_0+Y_0)Y_0`, denominator `2(ΣZ + Σ_{i>=1}Y_i + Y_0)`. The
/// initial-segment term `S_0` enters the halved sum even though it already
/// carries its trapezoid factor, so this form undercounts the initial segment
/// relative to direct integration whenever `Y_0 > 0`; the two agree exactly
/// when `Y_0 = 0`.
pub fn time_avg_aoi_paper(trace: &DelayWaitTrace) -> Result<f64, AoiError> {
    let y = trace.delays();
    let z = trace.waits();
    let s0 = 0.5 * (2.0 * trace.initial_age() + y[0]) * y[0];
    let mut num = s0;
    for i in 1..y.len() {
        num += (2.0 * y[i - 1] + y[i] + z[i - 1]) * (y[i] + z[i - 1]);
    }
    let den = 2.0 * (z.iter().sum::<f64>() + y[1..].iter().sum::<f64>() + y[0]);
    if den <= 0.0 {
        return Err(AoiError::ZeroTotalTime);
    }
    Ok(num / den)
}

/// Time-averaged age over `[0, D_N]` by exact trapezoid integration of the
/// sawtooth. This is the canonical average used in reward computation.
///
/// The initial segment `[0, D_0]` rises from `Δ_0` to `Δ_0 + Y_0`; segment
/// `[D_{i-1}, D_i]` rises from `Y_{i-1}` to `Y_{i-1} + Z_{i-1} + Y_i`.
pub fn time_avg_aoi_geometric(trace: &DelayWaitTrace) -> Result<f64, AoiError> {
    let y = trace.delays();
    let z = trace.waits();
    let mut area = (trace.initial_age() + 0.5 * y[0]) * y[0];
    let mut total = y[0];
    for i in 1..y.len() {
        let seg = z[i - 1] + y[i];
        area += 0.5 * (2.0 * y[i - 1] + seg) * seg;
        total += seg;
    }
    if total <= 0.0 {
        return Err(AoiError::ZeroTotalTime);
    }
    Ok(area / total)
}

/// Left-Riemann average of the instantaneous age over `[0, horizon]`.
///
/// Samples sit at `t_k = k·dt` for `t_k < horizon`. The sum is accumulated
/// segment by segment (the age is linear between receptions, so each
/// segment's samples form an arithmetic series); the value equals the naive
/// per-sample loop up to summation order. Converges to
/// [`time_avg_aoi_geometric`] as `dt → 0` when `horizon = D_N`.
pub fn numeric_integrate_aoi(
    process: &AoiProcess,
    horizon: f64,
    dt: f64,
) -> Result<f64, AoiError> {
    if !dt.is_finite() || dt <= 0.0 {
        return Err(AoiError::InvalidStep(dt));
    }
    if !horizon.is_finite() || horizon <= 0.0 {
        return Err(AoiError::ZeroTotalTime);
    }
    if let Some(last) = process.last_recv_time() {
        if horizon < last {
            return Err(AoiError::HorizonBeforeLastReception {
                horizon,
                last_recv: last,
            });
        }
    }

    // First sample index with k*dt >= bound, robust to rounding in the division.
    let first_index_at_or_after = |bound: f64| -> u64 {
        let mut k = (bound / dt).ceil().max(0.0) as u64;
        while k > 0 && (k - 1) as f64 * dt >= bound {
            k -= 1;
        }
        while (k as f64) * dt < bound {
            k += 1;
        }
        k
    };

    // Sum of ages at samples k in [k0, k1) where age(t) = t - gen.
    let series_sum = |k0: u64, k1: u64, gen: f64| -> f64 {
        if k1 <= k0 {
            return 0.0;
        }
        let n = (k1 - k0) as f64;
        let first = k0 as f64 * dt - gen;
        let last = (k1 - 1) as f64 * dt - gen;
        0.5 * n * (first + last)
    };

    let k_end = first_index_at_or_after(horizon);
    let mut sum = 0.0;
    let mut k_cursor = 0u64;
    let mut gen_base = -process.initial_age(); // initial ramp: age = t + initial_age
    for u in process.updates() {
        let k_recv = first_index_at_or_after(u.recv_time).min(k_end);
        sum += series_sum(k_cursor, k_recv, gen_base);
        k_cursor = k_recv.max(k_cursor);
        gen_base = u.gen_time;
    }
    sum += series_sum(k_cursor, k_end, gen_base);
    Ok(sum * dt / horizon)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(delays: &[f64], waits: &[f64], initial_age: f64) -> DelayWaitTrace {
        DelayWaitTrace::new(delays.to_vec(), waits.to_vec(), initial_age).unwrap()
    }

    #[test]
    fn age_of_just_received_update_equals_its_delay() {
        let p = AoiProcess::from_updates(0.0, [(5.0, 6.0)]).unwrap();
        assert_eq!(p.instantaneous_aoi(6.0).unwrap(), 1.0);
    }

    #[test]
    fn age_grows_from_generation_instant() {
        let p = AoiProcess::from_updates(0.0, [(5.0, 6.0)]).unwrap();
        assert_eq!(p.instantaneous_aoi(7.5).unwrap(), 2.5);
    }

    #[test]
    fn empty_process_returns_initial_ramp() {
        let p = AoiProcess::new(2.0).unwrap();
        assert_eq!(p.instantaneous_aoi(3.0).unwrap(), 5.0);
    }

    #[test]
    fn negative_time_is_rejected() {
        let p = AoiProcess::new(0.0).unwrap();
        assert!(matches!(
            p.instantaneous_aoi(-0.5),
            Err(AoiError::InvalidTime(_))
        ));
    }

    #[test]
    fn push_rejects_unordered_updates() {
        let mut p = AoiProcess::new(0.0).unwrap();
        p.push(0.0, 2.0).unwrap();
        assert!(p.push(1.0, 2.0).is_err()); // recv not strictly increasing
        assert!(p.push(1.0, 1.5).is_err()); // recv behind last recv
        assert!(p.push(3.0, 2.5).is_err()); // recv before gen
        let mut q = AoiProcess::from_updates(0.0, [(2.0, 3.0)]).unwrap();
        assert!(q.push(1.0, 4.0).is_err()); // gen decreases
    }

    #[test]
    fn paper_form_matches_hand_evaluation() {
        // numerator (2+1+0)(1) + S0 = 3 + 0.5, denominator 2(0+1+1) = 4
        let t = trace(&[1.0, 1.0], &[0.0], 0.0);
        assert_eq!(time_avg_aoi_paper(&t).unwrap(), 0.875);
    }

    #[test]
    fn paper_form_with_zero_first_delay() {
        // S0 = 0; i=1 term (0+1+1)(1+1) = 4 over 2(1+1+0) = 4
        let t = trace(&[0.0, 1.0], &[1.0], 0.0);
        assert_eq!(time_avg_aoi_paper(&t).unwrap(), 1.0);
    }

    #[test]
    fn paper_form_zero_total_time_is_domain_error() {
        let t = trace(&[0.0], &[], 3.0);
        assert_eq!(time_avg_aoi_paper(&t), Err(AoiError::ZeroTotalTime));
    }

    #[test]
    fn geometric_matches_trapezoid_areas() {
        // areas 0.5 + 1.5 over total time 2
        let t = trace(&[1.0, 1.0], &[0.0], 0.0);
        assert_eq!(time_avg_aoi_geometric(&t).unwrap(), 1.0);
    }

    #[test]
    fn geometric_agrees_with_paper_when_first_delay_zero() {
        // single segment ramping 0 -> 2 over 2 s
        let t = trace(&[0.0, 1.0], &[1.0], 0.0);
        assert_eq!(time_avg_aoi_geometric(&t).unwrap(), 1.0);
    }

    #[test]
    fn geometric_unit_ramps() {
        // each unit segment ramps 0 -> 1: area 0.5 per unit time
        let t = trace(&[0.0, 0.0, 0.0], &[1.0, 1.0], 0.0);
        assert_eq!(time_avg_aoi_geometric(&t).unwrap(), 0.5);
    }

    #[test]
    fn riemann_average_approaches_geometric() {
        let t = trace(&[1.0, 1.0], &[0.0], 0.0);
        let p = t.to_process();
        let got = numeric_integrate_aoi(&p, 2.0, 1e-4).unwrap();
        assert!((got - 1.0).abs() <= 1e-3, "got {got}");
    }

    #[test]
    fn riemann_matches_closed_form_on_single_ramp() {
        let p = AoiProcess::from_updates(0.0, [(0.0, 1.0)]).unwrap();
        // ramp 0..1 then reset to 1, ramp to 1.25: areas 0.5 and (1+1.25)/2*0.25
        let dt = 1e-5;
        let expected = (0.5 + 0.5 * (1.0 + 1.25) * 0.25) / 1.25;
        let got = numeric_integrate_aoi(&p, 1.25, dt).unwrap();
        assert!((got - expected).abs() <= 2.0 * dt, "got {got}");
    }

    #[test]
    fn riemann_rejects_bad_step_and_horizon() {
        let p = AoiProcess::from_updates(0.0, [(0.0, 1.0)]).unwrap();
        assert!(matches!(
            numeric_integrate_aoi(&p, 2.0, 0.0),
            Err(AoiError::InvalidStep(_))
        ));
        assert!(matches!(
            numeric_integrate_aoi(&p, 0.5, 1e-3),
            Err(AoiError::HorizonBeforeLastReception { .. })
        ));
    }

    #[test]
    fn riemann_equals_naive_loop() {
        let t = trace(&[0.7, 0.3, 1.9], &[0.4, 0.0], 0.25);
        let p = t.to_process();
        let horizon = p.last_recv_time().unwrap() + 0.37;
        let dt = 1e-3;
        let mut naive = 0.0;
        let mut k = 0u64;
        loop {
            let tk = k as f64 * dt;
            if tk >= horizon {
                break;
            }
            naive += p.instantaneous_aoi(tk).unwrap();
            k += 1;
        }
        naive = naive * dt / horizon;
        let fast = numeric_integrate_aoi(&p, horizon, dt).unwrap();
        assert!((fast - naive).abs() < 1e-9, "fast {fast} naive {naive}");
    }

    #[test]
    fn running_average_before_first_reception_is_ramp() {
        let p = AoiProcess::from_updates(2.0, [(0.0, 10.0)]).unwrap();
        assert_eq!(p.average_age_up_to(0.0).unwrap(), 2.0);
        assert_eq!(p.average_age_up_to(4.0).unwrap(), 4.0); // 2 + 4/2
    }

    #[test]
    fn running_average_at_last_reception_matches_geometric() {
        let t = trace(&[1.0, 1.0], &[0.0], 0.0);
        let p = t.to_process();
        let avg = p.average_age_up_to(2.0).unwrap();
        assert_eq!(avg, time_avg_aoi_geometric(&t).unwrap());
    }

    #[test]
    fn trace_validation() {
        assert!(DelayWaitTrace::new(vec![], vec![], 0.0).is_err());
        assert!(DelayWaitTrace::new(vec![1.0], vec![1.0], 0.0).is_err());
        assert!(DelayWaitTrace::new(vec![1.0, -1.0], vec![0.0], 0.0).is_err());
        assert!(DelayWaitTrace::new(vec![1.0], vec![], -0.1).is_err());
    }

    #[test]
    fn trace_to_process_unfolds_times() {
        let t = trace(&[1.0, 2.0], &[3.0], 0.5);
        let p = t.to_process();
        assert_eq!(
            p.updates()[0],
            Update {
                gen_time: 0.0,
                recv_time: 1.0
            }
        );
        assert_eq!(
            p.updates()[1],
            Update {
                gen_time: 4.0,
                recv_time: 6.0
            }
        );
        assert_eq!(p.to_trace().unwrap(), t);
    }
}
