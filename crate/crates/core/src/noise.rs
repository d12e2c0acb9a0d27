//! Seeded normal variates.
//!
//! Uniforms come from a ChaCha8 keystream (counter based, identical output on
//! every platform) and are turned into normal pairs with the Box-Muller
//! transform. Both outputs of each pair are used.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Standard-normal stream fully determined by a 64-bit seed.
#[derive(Debug, Clone)]
pub struct NormalStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl NormalStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Uniform in (0, 1].
    fn open_uniform(&mut self) -> f64 {
        1.0 - self.rng.random::<f64>()
    }

    pub fn next_standard(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.open_uniform();
        let u2 = self.rng.random::<f64>();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = std::f64::consts::TAU * u2;
        self.spare = Some(radius * angle.sin());
        radius * angle.cos()
    }

    pub fn next_scaled(&mut self, std_dev: f64) -> f64 {
        std_dev * self.next_standard()
    }
}

/// Uniform stream used for drawing trial parameters. Runs on a separate
/// ChaCha stream id so it never overlaps the noise of the same seed.
#[derive(Debug, Clone)]
pub struct UniformStream {
    rng: ChaCha8Rng,
}

impl UniformStream {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        Self { rng }
    }

    /// Uniform draw in [lo, hi].
    pub fn between(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.rng.random::<f64>()
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-trial seed derived from the master seed and the (sweep, trial) indices.
pub fn trial_seed(master: u64, sweep_index: u64, trial_index: u64) -> u64 {
    let h = splitmix64(master);
    let h = splitmix64(h ^ sweep_index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    splitmix64(h ^ trial_index.wrapping_mul(0x8CB9_2BA7_2F3D_8DD7))
}
