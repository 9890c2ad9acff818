//! Delay-aware multi-AUV data-collection environment.
//!
//! The decision process here differs from a standard environment in three
//! places: the state carries the observation delay of the information the
//! agent acts on, the action carries a wait time spent idle before the next
//! sampling cycle, and the reward vector ends with the negative running
//! time-averaged age of the agent's information.
//!
//! # Step timeline
//!
//! A step taken at world clock `t` with per-agent waits `Z_j` advances the
//! clock to `t + max_j(Z_j) + step_s` (for one agent, exactly `Z + step_s`).
//! Agent `j` idles for `Z_j`, then moves along its heading for `step_s`
//! seconds. At the end of its own activity window (`t + Z_j + step_s`) a new
//! observation of the world is generated and scheduled for delivery after a
//! freshly sampled observation delay; deliveries are FIFO per agent — an
//! observation never arrives before its predecessor (a later arrival is
//! pushed just past the earlier one), so reception instants strictly
//! increase. The state an agent acts on is always the content of its most
//! recently *delivered* observation together with that observation's delay.
//!
//! # Observation layout
//!
//! For agent `j` with `A` vehicles and `M` nodes, in order:
//! own x, own y, own energy, then for every other vehicle (ascending index)
//! its sonar-estimated x and y, then for every node x, y, buffer bits.
//! Arity `3 + 2(A-1) + 3M`. Other-vehicle positions go through the actual
//! estimation chain: a round-trip echo is synthesized and correlated for
//! range, an array snapshot is synthesized and searched for azimuth, and the
//! two compose into a position (quadrant signs are carried as side
//! information). Node positions and buffers are chart data and exact.
//!
//! # Random draw order
//!
//! Reset: node positions (x then y, ascending node), vehicle positions
//! likewise, then per agent (ascending): one delay draw, then sensing noise
//! draws if the sensing noise variance is positive. Each step: per agent
//! (ascending): one delay draw, then sensing noise draws. Keeping the order
//! fixed is what makes same-seed runs bit-identical.

use crate::aoi::AoiProcess;
use crate::delay::{DelayModel, GeometryContext};
use crate::rng::{seed_rng, SimRng};
use crate::sonar::{
    correlator_delay_estimate, localize_target, pm1_template, synthesize_echo, ArrayParams,
    PeriodogramKernel,
};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EnvError {
    #[error("invalid world config: {0}")]
    Config(String),
    #[error("step called after the episode finished")]
    EpisodeDone,
    #[error("expected {expected} actions, got {got}")]
    ActionArity { expected: usize, got: usize },
    #[error("reward has {rewards} components but weights have {weights}")]
    ArityMismatch { rewards: usize, weights: usize },
    #[error("invalid reward vector: {0}")]
    InvalidReward(&'static str),
    #[error("invalid weight vector: {0}")]
    InvalidWeights(&'static str),
}

// ---------------------------------------------------------------------------
// Reward and weight vectors
// ---------------------------------------------------------------------------

/// Indices of the reward components this environment emits.
pub mod reward_index {
    pub const DATA_RATE: usize = 0;
    pub const ENERGY: usize = 1;
    pub const COLLISION: usize = 2;
    pub const BOUNDARY: usize = 3;
    pub const AOI: usize = 4;
    pub const ARITY: usize = 5;
}

/// Ordered reward components; the last entry is the negative running
/// time-averaged age and is never positive.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardVector {
    components: Vec<f64>,
}

impl RewardVector {
    pub fn new(components: Vec<f64>) -> Result<Self, EnvError> {
        if components.is_empty() {
            return Err(EnvError::InvalidReward("no components"));
        }
        if components.iter().any(|c| !c.is_finite()) {
            return Err(EnvError::InvalidReward("non-finite component"));
        }
        if *components.last().unwrap() > 0.0 {
            return Err(EnvError::InvalidReward(
                "age component must be nonpositive",
            ));
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn aoi_component(&self) -> f64 {
        *self.components.last().unwrap()
    }
}

/// Nonnegative weights pairing with a reward vector, at least one positive.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    weights: Vec<f64>,
}

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self, EnvError> {
        if weights.is_empty() {
            return Err(EnvError::InvalidWeights("no weights"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(EnvError::InvalidWeights(
                "weights must be finite and nonnegative",
            ));
        }
        if !weights.iter().any(|w| *w > 0.0) {
            return Err(EnvError::InvalidWeights("at least one weight must be positive"));
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Weighted sum `Σ_k w_k · r_k` collapsing a reward vector to a scalar.
pub fn total_reward(reward: &RewardVector, weights: &WeightVector) -> Result<f64, EnvError> {
    if reward.components().len() != weights.len() {
        return Err(EnvError::ArityMismatch {
            rewards: reward.components().len(),
            weights: weights.len(),
        });
    }
    Ok(reward
        .components()
        .iter()
        .zip(weights.weights())
        .map(|(r, w)| r * w)
        .sum())
}

// ---------------------------------------------------------------------------
// States and actions
// ---------------------------------------------------------------------------

/// Task observation paired with the delay it experienced in transit.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedState {
    pub observation: Vec<f64>,
    pub delay_s: f64,
}

/// Motion command: heading in radians, speed in m/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskAction {
    pub heading_rad: f64,
    pub speed_mps: f64,
}

/// Task action paired with a wait time in `[0, z_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentedAction {
    pub task: TaskAction,
    pub wait_s: f64,
}

// ---------------------------------------------------------------------------
// World configuration
// ---------------------------------------------------------------------------

/// Sonar sensing parameters shared by the estimation chain and the
/// geometry-driven delay model.
#[derive(Debug, Clone, PartialEq)]
pub struct SonarSensingConfig {
    pub sample_rate_hz: f64,
    pub sound_speed_mps: f64,
    pub noise_variance: f64,
}

impl Default for SonarSensingConfig {
    fn default() -> Self {
        Self {
            sample_rate_hz: 1000.0,
            sound_speed_mps: 1500.0,
            noise_variance: 0.0,
        }
    }
}

/// Full environment parameterization.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldConfig {
    pub arena_width_m: f64,
    pub arena_height_m: f64,
    pub num_auvs: usize,
    pub num_nodes: usize,
    pub step_s: f64,
    pub horizon_steps: usize,
    pub z_max_s: f64,
    pub max_speed_mps: f64,
    pub collision_radius_m: f64,
    pub initial_energy_j: f64,
    pub initial_buffer_bits: f64,
    pub bandwidth_hz: f64,
    pub snr0: f64,
    pub comm_range_m: f64,
    pub move_cost: f64,
    pub hotel_cost: f64,
    pub tx_cost: f64,
    pub reward_weights: WeightVector,
    pub delay: DelayModel,
    pub sonar: SonarSensingConfig,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            arena_width_m: 1000.0,
            arena_height_m: 1000.0,
            num_auvs: 2,
            num_nodes: 5,
            step_s: 1.0,
            horizon_steps: 64,
            z_max_s: 5.0,
            max_speed_mps: 10.0,
            collision_radius_m: 5.0,
            initial_energy_j: 2000.0,
            initial_buffer_bits: 1e5,
            bandwidth_hz: 1e4,
            snr0: 1e4,
            comm_range_m: 300.0,
            move_cost: 0.2,
            hotel_cost: 0.5,
            tx_cost: 1.0,
            reward_weights: WeightVector::new(vec![1e-4, 0.02, 1.0, 1.0, 1.0]).unwrap(),
            delay: DelayModel::constant(0.5).unwrap(),
            sonar: SonarSensingConfig::default(),
        }
    }
}

impl WorldConfig {
    /// Validates every field, returning a single error naming all offenders.
    pub fn validate(&self) -> Result<(), EnvError> {
        let mut bad = Vec::new();
        let mut check = |ok: bool, what: &str| {
            if !ok {
                bad.push(what.to_string());
            }
        };
        check(
            self.arena_width_m.is_finite() && self.arena_width_m > 0.0,
            "arena_width_m must be positive",
        );
        check(
            self.arena_height_m.is_finite() && self.arena_height_m > 0.0,
            "arena_height_m must be positive",
        );
        check(self.num_auvs >= 1, "num_auvs must be at least 1");
        check(self.num_nodes >= 1, "num_nodes must be at least 1");
        check(
            self.step_s.is_finite() && self.step_s > 0.0,
            "step_s must be positive",
        );
        check(self.horizon_steps >= 1, "horizon_steps must be at least 1");
        check(
            self.z_max_s.is_finite() && self.z_max_s >= 0.0,
            "z_max_s must be nonnegative",
        );
        check(
            self.max_speed_mps.is_finite() && self.max_speed_mps > 0.0,
            "max_speed_mps must be positive",
        );
        check(
            self.collision_radius_m.is_finite() && self.collision_radius_m >= 0.0,
            "collision_radius_m must be nonnegative",
        );
        check(
            self.initial_energy_j.is_finite() && self.initial_energy_j > 0.0,
            "initial_energy_j must be positive",
        );
        check(
            self.initial_buffer_bits.is_finite() && self.initial_buffer_bits >= 0.0,
            "initial_buffer_bits must be nonnegative",
        );
        check(
            self.bandwidth_hz.is_finite() && self.bandwidth_hz >= 0.0,
            "bandwidth_hz must be nonnegative",
        );
        check(self.snr0.is_finite() && self.snr0 >= 0.0, "snr0 must be nonnegative");
        check(
            self.comm_range_m.is_finite() && self.comm_range_m >= 0.0,
            "comm_range_m must be nonnegative",
        );
        check(
            self.move_cost.is_finite() && self.move_cost >= 0.0,
            "move_cost must be nonnegative",
        );
        check(
            self.hotel_cost.is_finite() && self.hotel_cost >= 0.0,
            "hotel_cost must be nonnegative",
        );
        check(
            self.tx_cost.is_finite() && self.tx_cost >= 0.0,
            "tx_cost must be nonnegative",
        );
        check(
            self.reward_weights.len() == reward_index::ARITY,
            "reward_weights must have 5 entries",
        );
        check(
            self.sonar.sample_rate_hz.is_finite() && self.sonar.sample_rate_hz > 0.0,
            "sonar.sample_rate_hz must be positive",
        );
        check(
            self.sonar.sound_speed_mps.is_finite() && self.sonar.sound_speed_mps > 0.0,
            "sonar.sound_speed_mps must be positive",
        );
        check(
            self.sonar.noise_variance.is_finite() && self.sonar.noise_variance >= 0.0,
            "sonar.noise_variance must be nonnegative",
        );
        if bad.is_empty() {
            Ok(())
        } else {
            Err(EnvError::Config(bad.join("; ")))
        }
    }

    /// Observation vector length per agent.
    pub fn observation_arity(&self) -> usize {
        3 + 2 * (self.num_auvs - 1) + 3 * self.num_nodes
    }
}

// ---------------------------------------------------------------------------
// World state
// ---------------------------------------------------------------------------

/// Additive floor in the rate model's distance term, in square meters.
pub const SNR_DISTANCE_FLOOR_M2: f64 = 1.0;

// Sensing-chain internals. The echo record covers round-trip paths up to
// (ECHO_RECORD_LEN - ECHO_TEMPLATE_LEN) samples; longer paths clamp to the
// maximum unambiguous delay.
const ECHO_RECORD_LEN: usize = 2080;
const ECHO_TEMPLATE_LEN: usize = 32;
const ARRAY_SENSOR_COUNT: usize = 32;
const AZIMUTH_GRID_POINTS: usize = 256;
const NORMALIZED_SPACING: f64 = 0.25;
const ARRAY_SPACING_M: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct AuvState {
    pub position_m: [f64; 2],
    pub energy_j: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeState {
    pub position_m: [f64; 2],
    pub buffer_bits: f64,
}

#[derive(Debug, Clone)]
struct PendingObs {
    content: Vec<f64>,
    recv_time: f64,
    delay_s: f64,
}

#[derive(Debug, Clone)]
struct AgentChannel {
    aoi: AoiProcess,
    in_flight: VecDeque<PendingObs>,
    latest: PendingObs,
}

/// Per-agent diagnostics for one step, used for logging and metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub wait_s: f64,
    pub sampled_delay_s: f64,
    pub inst_aoi_s: f64,
    pub run_avg_aoi_s: f64,
    pub data_rate_bps: f64,
    pub bits_collected: f64,
    pub energy_used_j: f64,
    pub energy_j: f64,
}

/// Everything `step` returns.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub states: Vec<AugmentedState>,
    pub rewards: Vec<RewardVector>,
    pub done: bool,
    /// Per-agent flag: the submitted action was out of bounds and clamped.
    pub clamped: Vec<bool>,
    pub infos: Vec<StepInfo>,
}

/// The simulation world. Single-writer: `step` requires exclusive access;
/// distinct instances are independent.
#[derive(Debug, Clone)]
pub struct DataCollectionWorld {
    cfg: WorldConfig,
    auvs: Vec<AuvState>,
    nodes: Vec<NodeState>,
    channels: Vec<AgentChannel>,
    clock_s: f64,
    steps_taken: usize,
    done: bool,
    rng: SimRng,
    echo_template: Vec<f64>,
    kernel: PeriodogramKernel,
    array_params: ArrayParams,
}

impl DataCollectionWorld {
    /// Places nodes and vehicles uniformly at random, clears the per-agent
    /// age processes (initial age 0), and returns the initial states with a
    /// freshly drawn observation delay per agent.
    pub fn reset(cfg: &WorldConfig, seed: u64) -> Result<(Self, Vec<AugmentedState>), EnvError> {
        cfg.validate()?;
        let mut rng = seed_rng(seed);
        let nodes: Vec<NodeState> = (0..cfg.num_nodes)
            .map(|_| NodeState {
                position_m: [
                    rng.random_range(0.0..cfg.arena_width_m),
                    rng.random_range(0.0..cfg.arena_height_m),
                ],
                buffer_bits: cfg.initial_buffer_bits,
            })
            .collect();
        let auvs: Vec<AuvState> = (0..cfg.num_auvs)
            .map(|_| AuvState {
                position_m: [
                    rng.random_range(0.0..cfg.arena_width_m),
                    rng.random_range(0.0..cfg.arena_height_m),
                ],
                energy_j: cfg.initial_energy_j,
            })
            .collect();
        Self::assemble(cfg.clone(), rng, auvs, nodes)
    }

    /// Fixture constructor: identical to [`Self::reset`] but with explicit
    /// vehicle and node positions (buffers and energies at their configured
    /// initial values).
    pub fn with_layout(
        cfg: &WorldConfig,
        seed: u64,
        auv_positions: &[[f64; 2]],
        node_positions: &[[f64; 2]],
    ) -> Result<(Self, Vec<AugmentedState>), EnvError> {
        cfg.validate()?;
        if auv_positions.len() != cfg.num_auvs || node_positions.len() != cfg.num_nodes {
            return Err(EnvError::Config(
                "layout position counts must match num_auvs/num_nodes".into(),
            ));
        }
        let inside = |p: &[f64; 2]| {
            (0.0..=cfg.arena_width_m).contains(&p[0]) && (0.0..=cfg.arena_height_m).contains(&p[1])
        };
        if !auv_positions.iter().chain(node_positions).all(inside) {
            return Err(EnvError::Config("layout positions outside arena".into()));
        }
        let rng = seed_rng(seed);
        let nodes = node_positions
            .iter()
            .map(|&position_m| NodeState {
                position_m,
                buffer_bits: cfg.initial_buffer_bits,
            })
            .collect();
        let auvs = auv_positions
            .iter()
            .map(|&position_m| AuvState {
                position_m,
                energy_j: cfg.initial_energy_j,
            })
            .collect();
        Self::assemble(cfg.clone(), rng, auvs, nodes)
    }

    fn assemble(
        cfg: WorldConfig,
        mut rng: SimRng,
        auvs: Vec<AuvState>,
        nodes: Vec<NodeState>,
    ) -> Result<(Self, Vec<AugmentedState>), EnvError> {
        let echo_template = pm1_template(ECHO_TEMPLATE_LEN, &mut rng);
        let kernel = PeriodogramKernel::new(
            NORMALIZED_SPACING,
            ARRAY_SENSOR_COUNT,
            AZIMUTH_GRID_POINTS,
        )
        .expect("static kernel dimensions are valid");
        let carrier_hz = NORMALIZED_SPACING * cfg.sonar.sound_speed_mps / ARRAY_SPACING_M;
        let array_params = ArrayParams::new(
            ARRAY_SENSOR_COUNT,
            1.0,
            0.0,
            carrier_hz,
            ARRAY_SPACING_M,
            cfg.sonar.sound_speed_mps,
            cfg.sonar.noise_variance,
        )
        .expect("static array geometry is valid");

        let mut world = Self {
            cfg,
            auvs,
            nodes,
            channels: Vec::new(),
            clock_s: 0.0,
            steps_taken: 0,
            done: false,
            rng,
            echo_template,
            kernel,
            array_params,
        };

        let mut states = Vec::with_capacity(world.cfg.num_auvs);
        for agent in 0..world.cfg.num_auvs {
            let delay = world.sample_delay_for(agent);
            let content = world.observe(agent);
            let mut aoi = AoiProcess::new(0.0).expect("zero initial age");
            aoi.push(0.0, delay).expect("first update is ordered");
            // The deployment chart doubles as the initial observation; its
            // formal delivery at `delay` drives the age sawtooth.
            let latest = PendingObs {
                content: content.clone(),
                recv_time: delay,
                delay_s: delay,
            };
            world.channels.push(AgentChannel {
                aoi,
                in_flight: VecDeque::new(),
                latest,
            });
            states.push(AugmentedState {
                observation: content,
                delay_s: delay,
            });
        }
        Ok((world, states))
    }

    pub fn config(&self) -> &WorldConfig {
        &self.cfg
    }

    pub fn clock_s(&self) -> f64 {
        self.clock_s
    }

    pub fn steps_taken(&self) -> usize {
        self.steps_taken
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn auvs(&self) -> &[AuvState] {
        &self.auvs
    }

    pub fn nodes(&self) -> &[NodeState] {
        &self.nodes
    }

    /// Running time-averaged age of an agent's information over `[0, now]`.
    pub fn running_time_avg_aoi(&self, agent: usize) -> f64 {
        self.channels[agent]
            .aoi
            .average_age_up_to(self.clock_s)
            .expect("world clock is valid")
    }

    /// The agent's age process so far (scheduled deliveries included).
    pub fn aoi_process(&self, agent: usize) -> &AoiProcess {
        &self.channels[agent].aoi
    }

    fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
        let dx = a[0] - b[0];
        let dy = a[1] - b[1];
        (dx * dx + dy * dy).sqrt()
    }

    fn nearest_node_distance(&self, agent: usize) -> f64 {
        let p = self.auvs[agent].position_m;
        self.nodes
            .iter()
            .map(|n| Self::distance(p, n.position_m))
            .fold(f64::INFINITY, f64::min)
    }

    /// One observation-delay draw for an agent. The geometry context is the
    /// round-trip acoustic path to the nearest node, which only the
    /// SSP-driven model reads.
    fn sample_delay_for(&mut self, agent: usize) -> f64 {
        let geometry = GeometryContext {
            path_length_m: 2.0 * self.nearest_node_distance(agent),
        };
        self.cfg.delay.sample_delay(&geometry, &mut self.rng)
    }

    /// Sonar-estimated position of vehicle `target` as seen from `observer`.
    fn estimate_position(&mut self, observer: usize, target: usize) -> [f64; 2] {
        let from = self.auvs[observer].position_m;
        let to = self.auvs[target].position_m;
        let dx = to[0] - from[0];
        let dy = to[1] - from[1];
        let range = (dx * dx + dy * dy).sqrt();
        if range == 0.0 {
            return from;
        }
        let fs = self.cfg.sonar.sample_rate_hz;
        let c = self.cfg.sonar.sound_speed_mps;
        let sigma2 = self.cfg.sonar.noise_variance;

        // Round-trip echo -> range estimate.
        let max_delay = ECHO_RECORD_LEN - ECHO_TEMPLATE_LEN;
        let true_delay =
            ((2.0 * range / c * fs).round() as usize).min(max_delay);
        let echo = synthesize_echo(
            &self.echo_template,
            true_delay,
            ECHO_RECORD_LEN,
            sigma2,
            &mut self.rng,
        )
        .expect("echo geometry is valid");
        let delay_est = correlator_delay_estimate(&echo.samples, &self.echo_template)
            .expect("template fits the record");

        // Array snapshot -> azimuth estimate. The true bearing folds into
        // the first quadrant; quadrant signs are side information.
        let grid = self.kernel.grid();
        let beta_true = dy.abs().atan2(dx.abs()).clamp(grid[0], grid[grid.len() - 1]);
        let samples: Vec<f64> = {
            let nu = NORMALIZED_SPACING * beta_true.cos();
            let mut s: Vec<f64> = (0..ARRAY_SENSOR_COUNT)
                .map(|n| {
                    self.array_params.amplitude
                        * (std::f64::consts::TAU * nu * n as f64 + self.array_params.phase_rad)
                            .cos()
                })
                .collect();
            if sigma2 > 0.0 {
                let noise = Normal::new(0.0, sigma2.sqrt()).expect("finite std");
                for x in &mut s {
                    *x += noise.sample(&mut self.rng);
                }
            }
            s
        };
        let beta_est = self
            .kernel
            .estimate(&samples)
            .expect("kernel matches sensor count");
        let loc = localize_target(delay_est.delay, fs, c, beta_est.azimuth_rad, true)
            .expect("estimates are in range");
        [
            from[0] + dx.signum() * loc.range_m * loc.azimuth_rad.cos(),
            from[1] + dy.signum() * loc.range_m * loc.azimuth_rad.sin(),
        ]
    }

    /// Builds agent `agent`'s observation of the current world.
    fn observe(&mut self, agent: usize) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.cfg.observation_arity());
        let me = &self.auvs[agent];
        v.push(me.position_m[0]);
        v.push(me.position_m[1]);
        v.push(me.energy_j);
        for other in 0..self.cfg.num_auvs {
            if other == agent {
                continue;
            }
            let est = self.estimate_position(agent, other);
            v.push(est[0]);
            v.push(est[1]);
        }
        for node in &self.nodes {
            v.push(node.position_m[0]);
            v.push(node.position_m[1]);
            v.push(node.buffer_bits);
        }
        v
    }

    fn clamp_action(&self, action: &AugmentedAction) -> (AugmentedAction, bool) {
        let sanitize = |v: f64, lo: f64, hi: f64| -> (f64, bool) {
            if !v.is_finite() {
                (lo, true)
            } else if v < lo {
                (lo, true)
            } else if v > hi {
                (hi, true)
            } else {
                (v, false)
            }
        };
        let (heading, c1) = sanitize(
            action.task.heading_rad,
            -std::f64::consts::PI,
            std::f64::consts::PI,
        );
        let (speed, c2) = sanitize(action.task.speed_mps, 0.0, self.cfg.max_speed_mps);
        let (wait, c3) = sanitize(action.wait_s, 0.0, self.cfg.z_max_s);
        (
            AugmentedAction {
                task: TaskAction {
                    heading_rad: heading,
                    speed_mps: speed,
                },
                wait_s: wait,
            },
            c1 || c2 || c3,
        )
    }

    /// Advances the world by one decision step.
    pub fn step(&mut self, actions: &[AugmentedAction]) -> Result<StepOutput, EnvError> {
        if self.done {
            return Err(EnvError::EpisodeDone);
        }
        if actions.len() != self.cfg.num_auvs {
            return Err(EnvError::ActionArity {
                expected: self.cfg.num_auvs,
                got: actions.len(),
            });
        }
        let n = self.cfg.num_auvs;
        let step_s = self.cfg.step_s;
        let mut clamped = Vec::with_capacity(n);
        let mut acts = Vec::with_capacity(n);
        for a in actions {
            let (act, flag) = self.clamp_action(a);
            acts.push(act);
            clamped.push(flag);
        }
        let start_clock = self.clock_s;
        let max_wait = acts.iter().map(|a| a.wait_s).fold(0.0, f64::max);
        let end_clock = start_clock + max_wait + step_s;

        // Movement, with boundary clamping.
        let mut boundary = vec![0.0f64; n];
        for (j, act) in acts.iter().enumerate() {
            let p = &mut self.auvs[j].position_m;
            let nx = p[0] + act.task.speed_mps * step_s * act.task.heading_rad.cos();
            let ny = p[1] + act.task.speed_mps * step_s * act.task.heading_rad.sin();
            let cx = nx.clamp(0.0, self.cfg.arena_width_m);
            let cy = ny.clamp(0.0, self.cfg.arena_height_m);
            if cx != nx || cy != ny {
                boundary[j] = -1.0;
            }
            *p = [cx, cy];
        }

        // Pairwise collisions at end-of-step positions.
        let mut collisions = vec![0.0f64; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = Self::distance(self.auvs[i].position_m, self.auvs[j].position_m);
                if d < 2.0 * self.cfg.collision_radius_m {
                    collisions[i] -= 1.0;
                    collisions[j] -= 1.0;
                }
            }
        }

        // Data collection, agents in index order, nodes drained exactly.
        let mut bits = vec![0.0f64; n];
        for (j, auv) in self.auvs.iter().enumerate() {
            for node in &mut self.nodes {
                if node.buffer_bits <= 0.0 {
                    continue;
                }
                let d = Self::distance(auv.position_m, node.position_m);
                if d > self.cfg.comm_range_m {
                    continue;
                }
                let rate = self.cfg.bandwidth_hz
                    * (1.0 + self.cfg.snr0 / (d * d + SNR_DISTANCE_FLOOR_M2)).log2();
                let want = rate * step_s;
                let (taken, left) = if want >= node.buffer_bits {
                    (node.buffer_bits, 0.0)
                } else {
                    let left = node.buffer_bits - want;
                    (node.buffer_bits - left, left)
                };
                node.buffer_bits = left;
                bits[j] += taken;
            }
        }

        // Energy accounting: propulsion over the move window, hotel load over
        // the agent's whole activity window, transmit power while collecting.
        let mut energy_used = vec![0.0f64; n];
        for (j, act) in acts.iter().enumerate() {
            let move_j = self.cfg.move_cost * act.task.speed_mps * act.task.speed_mps * step_s;
            let hotel_j = self.cfg.hotel_cost * (act.wait_s + step_s);
            let tx_j = if bits[j] > 0.0 {
                self.cfg.tx_cost * step_s
            } else {
                0.0
            };
            let want = move_j + hotel_j + tx_j;
            let before = self.auvs[j].energy_j;
            let after = (before - want).max(0.0);
            self.auvs[j].energy_j = after;
            energy_used[j] = before - after;
        }

        // Observation cycle: one fresh delay per agent, FIFO delivery.
        let mut sampled_delays = vec![0.0f64; n];
        for j in 0..n {
            let gen_time = start_clock + acts[j].wait_s + step_s;
            let y = self.sample_delay_for(j);
            let content = self.observe(j);
            let prev_recv = self
                .channels[j]
                .aoi
                .last_recv_time()
                .expect("reset seeds the process");
            let recv = (gen_time + y).max(prev_recv.next_up());
            let eff_delay = recv - gen_time;
            sampled_delays[j] = eff_delay;
            self.channels[j]
                .aoi
                .push(gen_time, recv)
                .expect("FIFO ordering holds");
            self.channels[j].in_flight.push_back(PendingObs {
                content,
                recv_time: recv,
                delay_s: eff_delay,
            });
        }

        // Deliveries up to the new clock.
        for ch in &mut self.channels {
            while let Some(front) = ch.in_flight.front() {
                if front.recv_time <= end_clock {
                    ch.latest = ch.in_flight.pop_front().unwrap();
                } else {
                    break;
                }
            }
        }

        self.clock_s = end_clock;
        self.steps_taken += 1;

        let horizon_hit = self.steps_taken >= self.cfg.horizon_steps;
        let drained = self.nodes.iter().all(|nd| nd.buffer_bits <= 0.0);
        let exhausted = self.auvs.iter().any(|a| a.energy_j <= 0.0);
        self.done = horizon_hit || drained || exhausted;

        let mut states = Vec::with_capacity(n);
        let mut rewards = Vec::with_capacity(n);
        let mut infos = Vec::with_capacity(n);
        for j in 0..n {
            let ch = &self.channels[j];
            let run_avg = ch
                .aoi
                .average_age_up_to(end_clock)
                .expect("clock is valid");
            let inst = ch
                .aoi
                .instantaneous_aoi(end_clock)
                .expect("clock is valid");
            let data_rate = bits[j] / step_s;
            rewards.push(
                RewardVector::new(vec![
                    data_rate,
                    -energy_used[j],
                    collisions[j],
                    boundary[j],
                    -run_avg,
                ])
                .expect("components are finite"),
            );
            states.push(AugmentedState {
                observation: ch.latest.content.clone(),
                delay_s: ch.latest.delay_s,
            });
            infos.push(StepInfo {
                wait_s: acts[j].wait_s,
                sampled_delay_s: sampled_delays[j],
                inst_aoi_s: inst,
                run_avg_aoi_s: run_avg,
                data_rate_bps: data_rate,
                bits_collected: bits[j],
                energy_used_j: energy_used[j],
                energy_j: self.auvs[j].energy_j,
            });
        }
        Ok(StepOutput {
            states,
            rewards,
            done: self.done,
            clamped,
            infos,
        })
    }
}
