//! Gaussian along-rail positioning error and the probability that the
//! selected beam still covers the base station.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{invalid, require_finite, Result};
use crate::rail_geometry::BeamWindow;

/// Samples per independently seeded Monte Carlo chunk. Fixed so the estimate
/// does not depend on how many threads run the chunks.
const MC_CHUNK: u64 = 1 << 16;

/// Zero-mean Gaussian error on the along-rail position estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositioningErrorModel {
    sigma: f64,
}

impl PositioningErrorModel {
    pub fn new(sigma: f64) -> Result<Self> {
        require_finite("sigma", sigma)?;
        if sigma < 0.0 {
            return Err(invalid("sigma", format!("must be >= 0, got {sigma}")));
        }
        Ok(PositioningErrorModel { sigma })
    }

    pub fn perfect() -> Self {
        PositioningErrorModel { sigma: 0.0 }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// One draw of the position error.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        self.sigma * z
    }

    /// `Q(distance / σ)` with the `σ = 0` limit: 0 for a positive distance,
    /// 1/2 at zero distance.
    fn tail(&self, distance: f64) -> f64 {
        if self.sigma == 0.0 {
            if distance > 0.0 {
                0.0
            } else {
                0.5
            }
        } else {
            q_function(distance / self.sigma)
        }
    }
}

/// Gaussian tail probability `Q(x) = P(Z > x)` for a standard normal `Z`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

fn check_window(window: &BeamWindow) -> Result<()> {
    for (name, v) in [
        ("left_edge_distance", window.left_edge_distance),
        ("right_edge_distance", window.right_edge_distance),
    ] {
        if v.is_nan() || v < 0.0 {
            return Err(invalid(name, format!("must be >= 0, got {v}")));
        }
    }
    Ok(())
}

/// Effective beamforming probability `1 - (Q(γ_l/σ) + Q(γ_r/σ)) / 2`.
///
/// This halved form is what the beam-count search optimizes; it lies in
/// `[0.5, 1]` for nonnegative edges. See [`interval_probability`] for the
/// probability of the covering event itself.
pub fn effective_probability(window: &BeamWindow, err: &PositioningErrorModel) -> Result<f64> {
    check_window(window)?;
    let tails = err.tail(window.left_edge_distance) + err.tail(window.right_edge_distance);
    Ok(1.0 - tails / 2.0)
}

/// Probability that the error stays inside the beam, `1 - Q(γ_l/σ) - Q(γ_r/σ)`.
pub fn interval_probability(window: &BeamWindow, err: &PositioningErrorModel) -> Result<f64> {
    check_window(window)?;
    Ok(1.0 - err.tail(window.left_edge_distance) - err.tail(window.right_edge_distance))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub standard_error: f64,
    pub samples: u64,
    pub seed: u64,
}

/// Monte Carlo estimate of `P(-γ_l < Δx < γ_r)`.
///
/// Samples are split into fixed-size chunks; chunk `j` draws from ChaCha8
/// stream `j` of `seed`, so the result is identical for any thread count.
pub fn mc_effective_probability(
    window: &BeamWindow,
    err: &PositioningErrorModel,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    check_window(window)?;
    if samples == 0 {
        return Err(invalid("samples", "must be >= 1"));
    }
    let chunks = samples.div_ceil(MC_CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let n = MC_CHUNK.min(samples - chunk * MC_CHUNK);
            (0..n)
                .filter(|_| {
                    let dx = err.sample(&mut rng);
                    -window.left_edge_distance < dx && dx < window.right_edge_distance
                })
                .count() as u64
        })
        .sum();
    let p = hits as f64 / samples as f64;
    Ok(McEstimate {
        estimate: p,
        standard_error: (p * (1.0 - p) / samples as f64).sqrt(),
        samples,
        seed,
    })
}
