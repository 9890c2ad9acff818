//! Dense tabular action-value function with the one-step TD update.

use super::LearnerError;

/// `Q(s, a)` over discrete states and actions, updated by
/// `Q ← Q + α(r + γ·max_a' Q(s', a') − Q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    n_states: usize,
    n_actions: usize,
    q: Vec<f64>,
    pub alpha: f64,
    pub gamma: f64,
}

impl QTable {
    pub fn new(
        n_states: usize,
        n_actions: usize,
        alpha: f64,
        gamma: f64,
    ) -> Result<Self, LearnerError> {
        if n_states == 0 || n_actions == 0 {
            return Err(LearnerError::InvalidConfig(
                "q-table needs at least one state and one action".into(),
            ));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(LearnerError::InvalidConfig(format!(
                "alpha must be in (0, 1], got {alpha}"
            )));
        }
        if !(0.0..=1.0).contains(&gamma) {
            return Err(LearnerError::InvalidConfig(format!(
                "gamma must be in [0, 1], got {gamma}"
            )));
        }
        Ok(Self {
            n_states,
            n_actions,
            q: vec![0.0; n_states * n_actions],
            alpha,
            gamma,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn value(&self, state: usize, action: usize) -> f64 {
        self.q[state * self.n_actions + action]
    }

    pub fn max_value(&self, state: usize) -> f64 {
        let base = state * self.n_actions;
        self.q[base..base + self.n_actions]
            .iter()
            .fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    /// Greedy action for `state`; ties break toward the smallest index.
    pub fn greedy_action(&self, state: usize) -> usize {
        let base = state * self.n_actions;
        let mut best = 0;
        for a in 1..self.n_actions {
            if self.q[base + a] > self.q[base + best] {
                best = a;
            }
        }
        best
    }

    /// One-step TD backup for the observed transition.
    pub fn td_update(
        &mut self,
        state: usize,
        action: usize,
        reward: f64,
        next_state: usize,
    ) -> Result<(), LearnerError> {
        let target = reward + self.gamma * self.max_value(next_state);
        let cell = &mut self.q[state * self.n_actions + action];
        let updated = *cell + self.alpha * (target - *cell);
        if !updated.is_finite() {
            return Err(LearnerError::NonFinite("q-table update"));
        }
        *cell = updated;
        Ok(())
    }

    /// Nonzero entries as `(state, action, value)`, for snapshots.
    pub fn nonzero_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.q.iter().enumerate().filter_map(|(i, &v)| {
            (v != 0.0).then_some((i / self.n_actions, i % self.n_actions, v))
        })
    }

    pub fn set_value(&mut self, state: usize, action: usize, value: f64) {
        self.q[state * self.n_actions + action] = value;
    }
}
