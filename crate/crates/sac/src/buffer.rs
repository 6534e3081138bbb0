//! Fixed-capacity ring of transitions with uniform minibatch sampling.

use cogrisk_neural::GraphInput;
use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub state: GraphInput,
    /// Action in the policy's unit box.
    pub action: [f64; 2],
    pub reward: f64,
    pub next_state: GraphInput,
    /// True only for terminal outcomes (success, collision); time limits are not terminal.
    pub done: bool,
    /// Row-major u(i, j) at the time the action was taken.
    pub uncertainties: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    items: Vec<Transition>,
    /// Slot the next insert overwrites once the buffer is full.
    next: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay buffer capacity must be positive");
        Self { capacity, items: Vec::new(), next: 0 }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn push(&mut self, t: Transition) {
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.next] = t;
        }
        self.next = (self.next + 1) % self.capacity;
    }

    /// Transitions from oldest to newest.
    pub fn iter_oldest_first(&self) -> impl Iterator<Item = &Transition> {
        let split = if self.items.len() < self.capacity { 0 } else { self.next };
        self.items[split..].iter().chain(&self.items[..split])
    }

    /// Uniform sample without replacement; `None` while fewer than `batch` are stored.
    pub fn sample_minibatch<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R) -> Option<Vec<&Transition>> {
        if batch == 0 || self.items.len() < batch {
            return None;
        }
        Some(sample(rng, self.items.len(), batch).into_iter().map(|i| &self.items[i]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use cogrisk_neural::Tensor2;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn transition(tag: f64) -> Transition {
        let g = GraphInput::new(Tensor2::zeros(1, 9), Tensor2::identity(1), vec![0.0, 0.0]).unwrap();
        Transition { state: g.clone(), action: [0.0, 0.0], reward: tag, next_state: g, done: false, uncertainties: vec![0.0] }
    }

    #[test]
    fn ring_drops_oldest() {
        let mut buf = ReplayBuffer::new(5);
        for i in 0..8 {
            buf.push(transition(i as f64));
        }
        assert_eq!(buf.len(), 5);
        let rewards: Vec<f64> = buf.iter_oldest_first().map(|t| t.reward).collect();
        assert_eq!(rewards, vec![3.0, 4.0, 5.0, 6.0, 7.0]);
    }

    #[test]
    fn full_batch_is_a_permutation() {
        let mut buf = ReplayBuffer::new(10);
        for i in 0..6 {
            buf.push(transition(i as f64));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut got: Vec<f64> = buf.sample_minibatch(6, &mut rng).unwrap().iter().map(|t| t.reward).collect();
        got.sort_by(f64::total_cmp);
        assert_eq!(got, vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        assert!(buf.sample_minibatch(7, &mut rng).is_none());
    }

    #[test]
    fn seeded_sampling_reproducible() {
        let mut buf = ReplayBuffer::new(100);
        for i in 0..100 {
            buf.push(transition(i as f64));
        }
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            buf.sample_minibatch(10, &mut rng).unwrap().iter().map(|t| t.reward).collect::<Vec<_>>()
        };
        assert_eq!(draw(3), draw(3));
        assert_ne!(draw(3), draw(4));
    }
}
