//! Shared economies for integration tests.
#![allow(dead_code)]

use gmtcomp::labor::LaborEconomy;
use gmtcomp::model::alpha2_floor;
use gmtcomp::Economy;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SAMPLE_SEED: u64 = 20_240_601;

pub fn canonical() -> Economy {
    Economy::new(2.0, 1.8, 0.5, 0.5, 1.0).unwrap()
}

/// Canonical productivities with a large concealment cost; both countries
/// undercut for minimum rates near the top of the band.
pub fn costly_shifting() -> Economy {
    Economy::new(2.0, 1.8, 0.5, 0.5, 1000.0).unwrap()
}

/// Small country too unproductive to attract capital at a small carve-out.
pub fn haven() -> Economy {
    Economy::new(2.0, 0.75, 0.5, 0.5, 10.0).unwrap()
}

pub fn haven_near_floor() -> Economy {
    Economy::new(2.0, 0.69, 0.5, 0.5, 1.0).unwrap()
}

/// Valid economies drawn from a fixed seed.
pub fn sample_economies(seed: u64, n: usize) -> Vec<Economy> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let r = rng.gen_range(0.1..0.8);
        let alpha1 = r * rng.gen_range(2.0..6.0);
        let mu = rng.gen_range(0.0..0.9);
        let floor = alpha2_floor(alpha1, r, mu).max(1.05 * r);
        if floor >= alpha1 {
            continue;
        }
        let margin = 0.02 * (alpha1 - floor);
        let alpha2 = rng.gen_range(floor + margin..alpha1 - margin);
        let delta = 10f64.powf(rng.gen_range(-0.7..1.3));
        if let Ok(e) = Economy::new(alpha1, alpha2, r, mu, delta) {
            out.push(e);
        }
    }
    out
}

/// Valid labor economies drawn from a fixed seed.
pub fn sample_labor_economies(seed: u64, n: usize) -> Vec<LaborEconomy> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let lambda: f64 = rng.gen_range(0.2..0.5);
        let beta = rng.gen_range(0.1..(0.9 - lambda).min(0.5));
        let lbar1 = rng.gen_range(1.5..3.0);
        let lbar2 = lbar1 * rng.gen_range(0.3..0.8);
        let r = rng.gen_range(0.03..0.15);
        let mu = rng.gen_range(0.0..0.6);
        let delta = rng.gen_range(0.3..3.0);
        if let Ok(e) = LaborEconomy::new(lambda, beta, lbar1, lbar2, r, mu, delta) {
            out.push(e);
        }
    }
    out
}

/// `n` interior points of `(lo, hi)`.
pub fn interior(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|j| lo + (hi - lo) * j as f64 / (n + 1) as f64).collect()
}
