//! Bounded FIFO replay storage with uniform sampling.

use super::LearnerError;
use crate::env::{AugmentedAction, AugmentedState};
use crate::rng::SimRng;
use rand::Rng;
use std::collections::VecDeque;

/// One experienced step: the acted-on state, the action, the weighted scalar
/// reward, and the resulting state.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: AugmentedState,
    pub action: AugmentedAction,
    pub reward: f64,
    pub next_state: AugmentedState,
}

/// Bounded FIFO of transitions; pushing past capacity evicts the oldest.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    storage: VecDeque<Transition>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Result<Self, LearnerError> {
        if capacity == 0 {
            return Err(LearnerError::InvalidConfig(
                "replay capacity must be at least 1".into(),
            ));
        }
        Ok(Self {
            capacity,
            storage: VecDeque::with_capacity(capacity),
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.storage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.storage.is_empty()
    }

    pub fn push(&mut self, t: Transition) {
        if self.storage.len() == self.capacity {
            self.storage.pop_front();
        }
        self.storage.push_back(t);
    }

    /// `n` uniform draws with replacement.
    pub fn sample(&self, n: usize, rng: &mut SimRng) -> Result<Vec<Transition>, LearnerError> {
        if self.storage.is_empty() {
            return Err(LearnerError::EmptyBuffer);
        }
        Ok((0..n)
            .map(|_| self.storage[rng.random_range(0..self.storage.len())].clone())
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::TaskAction;
    use crate::rng::seed_rng;

    fn t(tag: f64) -> Transition {
        Transition {
            state: AugmentedState {
                observation: vec![tag],
                delay_s: 0.0,
            },
            action: AugmentedAction {
                task: TaskAction {
                    heading_rad: 0.0,
                    speed_mps: 0.0,
                },
                wait_s: 0.0,
            },
            reward: tag,
            next_state: AugmentedState {
                observation: vec![tag],
                delay_s: 0.0,
            },
        }
    }

    #[test]
    fn capacity_one_keeps_newest() {
        let mut b = ReplayBuffer::new(1).unwrap();
        b.push(t(1.0));
        b.push(t(2.0));
        assert_eq!(b.len(), 1);
        let got = b.sample(1, &mut seed_rng(0)).unwrap();
        assert_eq!(got[0].reward, 2.0);
    }

    #[test]
    fn eviction_is_oldest_first() {
        let mut b = ReplayBuffer::new(4).unwrap();
        for i in 0..7 {
            b.push(t(i as f64));
        }
        assert_eq!(b.len(), 4);
        let rewards: Vec<f64> = b.storage.iter().map(|x| x.reward).collect();
        assert_eq!(rewards, vec![3.0, 4.0, 5.0, 6.0]);
    }

    #[test]
    fn single_item_sampled_repeatedly() {
        let mut b = ReplayBuffer::new(8).unwrap();
        b.push(t(7.0));
        let got = b.sample(5, &mut seed_rng(0)).unwrap();
        assert_eq!(got.len(), 5);
        assert!(got.iter().all(|x| x.reward == 7.0));
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let mut b = ReplayBuffer::new(16).unwrap();
        for i in 0..10 {
            b.push(t(i as f64));
        }
        let a = b.sample(32, &mut seed_rng(5)).unwrap();
        let c = b.sample(32, &mut seed_rng(5)).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn empty_buffer_is_a_state_error() {
        let b = ReplayBuffer::new(4).unwrap();
        assert!(matches!(
            b.sample(1, &mut seed_rng(0)),
            Err(LearnerError::EmptyBuffer)
        ));
    }

    #[test]
    fn sampling_is_uniform() {
        let mut b = ReplayBuffer::new(10).unwrap();
        for i in 0..10 {
            b.push(t(i as f64));
        }
        let mut rng = seed_rng(42);
        let mut counts = [0usize; 10];
        let draws = 100_000;
        for x in b.sample(draws, &mut rng).unwrap() {
            counts[x.reward as usize] += 1;
        }
        for (i, &c) in counts.iter().enumerate() {
            let freq = c as f64 / draws as f64;
            assert!((freq - 0.1).abs() <= 0.01, "index {i} frequency {freq}");
        }
    }
}
