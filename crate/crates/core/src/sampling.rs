//! Point sets on the unit cube: Halton sequences with optional random digit
//! scrambling, and uniform pseudo-random points.

use crate::error::{Error, Result};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Largest dimension supported by the Halton generator.
pub const MAX_HALTON_DIM: usize = PRIMES.len();

/// How training or integration points are placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingMode {
    Random,
    LowDiscrepancy,
}

/// Halton sequence over `[0, 1)^d`, optionally with a random permutation of
/// the digits at every (dimension, digit position).
#[derive(Debug, Clone)]
pub struct Halton {
    d: usize,
    /// `perms[j][pos]` permutes the digits of base `PRIMES[j]` at position `pos`.
    perms: Option<Vec<Vec<Vec<u32>>>>,
}

impl Halton {
    pub fn new(d: usize) -> Result<Self> {
        check_dim(d)?;
        Ok(Self { d, perms: None })
    }

    pub fn scrambled(d: usize, seed: u64) -> Result<Self> {
        check_dim(d)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let perms = PRIMES[..d]
            .iter()
            .map(|&b| {
                (0..digits_for(b))
                    .map(|_| {
                        let mut p: Vec<u32> = (0..b).collect();
                        p.shuffle(&mut rng);
                        p
                    })
                    .collect()
            })
            .collect();
        Ok(Self { d, perms: Some(perms) })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Point number `index` (the unscrambled sequence starts at `(1/2, 1/3, ...)` for index 1).
    pub fn point(&self, index: u64) -> Vec<f64> {
        (0..self.d).map(|j| self.coordinate(j, index)).collect()
    }

    fn coordinate(&self, j: usize, mut index: u64) -> f64 {
        let b = PRIMES[j] as u64;
        let inv = 1.0 / b as f64;
        let mut scale = inv;
        let mut acc = 0.0;
        match &self.perms {
            None => {
                while index > 0 {
                    acc += (index % b) as f64 * scale;
                    index /= b;
                    scale *= inv;
                }
            }
            Some(perms) => {
                for p in &perms[j] {
                    let digit = (index % b) as usize;
                    acc += p[digit] as f64 * scale;
                    index /= b;
                    scale *= inv;
                }
            }
        }
        acc.min(1.0 - f64::EPSILON / 2.0)
    }

    /// Points `1..=n` as an `n x d` row-major matrix.
    pub fn points(&self, n: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(n * self.d);
        for i in 0..n {
            out.extend(self.point(i as u64 + 1));
        }
        out
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 || d > MAX_HALTON_DIM {
        return Err(Error::InvalidArgument(format!(
            "Halton dimension must be in 1..={MAX_HALTON_DIM}, got {d}"
        )));
    }
    Ok(())
}

/// Digits needed so that `b^-m` is below double precision resolution.
fn digits_for(b: u32) -> usize {
    (53.0 * std::f64::consts::LN_2 / (b as f64).ln()).ceil() as usize
}

/// `n` uniform points in `[0, 1)^d`, row-major.
pub fn uniform_points(n: usize, d: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n * d).map(|_| rng.random::<f64>()).collect()
}

/// `n` points of the requested kind in `[0, 1)^d`, row-major.
pub fn unit_points(mode: SamplingMode, n: usize, d: usize, seed: u64) -> Result<Vec<f64>> {
    match mode {
        SamplingMode::Random => Ok(uniform_points(n, d, seed)),
        SamplingMode::LowDiscrepancy => Ok(Halton::scrambled(d, seed)?.points(n)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radical_inverse_prefix() {
        let h = Halton::new(2).unwrap();
        let expect = [[0.5, 1.0 / 3.0], [0.25, 2.0 / 3.0], [0.75, 1.0 / 9.0], [0.125, 4.0 / 9.0]];
        for (i, e) in expect.iter().enumerate() {
            let p = h.point(i as u64 + 1);
            assert!((p[0] - e[0]).abs() < 1e-15 && (p[1] - e[1]).abs() < 1e-15, "{p:?}");
        }
    }

    #[test]
    fn scrambled_is_stratified_and_seeded() {
        let a = Halton::scrambled(3, 7).unwrap().points(1000);
        let b = Halton::scrambled(3, 7).unwrap().points(1000);
        let c = Halton::scrambled(3, 8).unwrap().points(1000);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.iter().all(|v| (0.0..1.0).contains(v)));
        // base-2 coordinate: the first 2^m points hit every dyadic interval once
        let mut hits = [0usize; 16];
        for p in a.chunks(3).take(16) {
            hits[(p[0] * 16.0) as usize] += 1;
        }
        assert!(hits.iter().all(|&h| h == 1), "{hits:?}");
    }

    #[test]
    fn dimension_limits() {
        assert!(Halton::new(0).is_err());
        assert!(Halton::new(17).is_err());
        assert!(Halton::scrambled(16, 1).is_ok());
    }
}
