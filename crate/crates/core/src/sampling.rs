//! Seeded uniform sampling of chart points in a box.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;

/// Default cap on rejected candidates per accepted point.
pub const ATTEMPTS_PER_POINT: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct Sampler {
    pub count: usize,
    pub seed: u64,
    /// `[lo, hi]` per chart coordinate.
    pub domain: Vec<(f64, f64)>,
    pub max_attempts: usize,
}

impl Sampler {
    pub fn new(count: usize, seed: u64, domain: Vec<(f64, f64)>) -> Self {
        Sampler { count, seed, domain, max_attempts: count.max(1) * ATTEMPTS_PER_POINT }
    }

    pub fn cube(count: usize, seed: u64, dim: usize, lo: f64, hi: f64) -> Self {
        Self::new(count, seed, alloc::vec![(lo, hi); dim])
    }

    /// The deterministic candidate stream, at most `max_attempts` long.
    pub fn candidates(&self) -> Candidates {
        Candidates { rng: ChaCha8Rng::seed_from_u64(self.seed), domain: self.domain.clone(), left: self.max_attempts }
    }

    /// First `count` candidates accepted by `accept`, in stream order.
    pub fn sample(&self, mut accept: impl FnMut(&[f64]) -> bool) -> Result<Vec<Vec<f64>>, Error> {
        let mut out = Vec::with_capacity(self.count);
        for x in self.candidates() {
            if out.len() == self.count {
                break;
            }
            if accept(&x) {
                out.push(x);
            }
        }
        if out.is_empty() && self.count > 0 {
            return Err(Error::NoAdmissiblePoints { attempts: self.max_attempts });
        }
        Ok(out)
    }
}

#[derive(Debug, Clone)]
pub struct Candidates {
    rng: ChaCha8Rng,
    domain: Vec<(f64, f64)>,
    left: usize,
}

impl Iterator for Candidates {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        if self.left == 0 {
            return None;
        }
        self.left -= 1;
        Some(self.domain.iter().map(|&(lo, hi)| if hi > lo { self.rng.gen_range(lo..hi) } else { lo }).collect())
    }
}

/// Uniform random vector in `[-1, 1]ⁿ`, for sampling 2-planes.
pub fn random_direction(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_in_box() {
        let s = Sampler::cube(20, 7, 3, 0.5, 5.0);
        let a = s.sample(|_| true).unwrap();
        let b = s.sample(|_| true).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 20);
        assert!(a.iter().flatten().all(|&v| (0.5..5.0).contains(&v)));
        let c = Sampler::cube(20, 8, 3, 0.5, 5.0).sample(|_| true).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejection_keeps_stream_order() {
        let s = Sampler::cube(5, 1, 1, 0.0, 1.0);
        let all: Vec<_> = s.candidates().take(40).collect();
        let kept = s.sample(|x| x[0] > 0.5).unwrap();
        let expect: Vec<_> = all.into_iter().filter(|x| x[0] > 0.5).take(5).collect();
        assert_eq!(kept, expect);
        assert!(matches!(s.sample(|_| false), Err(Error::NoAdmissiblePoints { .. })));
    }
}
