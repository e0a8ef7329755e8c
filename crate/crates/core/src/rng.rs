//! Seeding. Every stochastic routine takes an explicit [`RngSeed`]; child
//! streams are derived by hashing so results do not depend on execution order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Derives an independent child seed from this seed and a path of labels.
    pub fn derive(self, labels: &[u64]) -> RngSeed {
        let mut h = splitmix64(self.0 ^ 0x5851_f42d_4c95_7f2d);
        for &label in labels {
            h = splitmix64(h ^ splitmix64(label.wrapping_add(0x9e37_79b9_7f4a_7c15)));
        }
        RngSeed(h)
    }
}

impl From<u64> for RngSeed {
    fn from(v: u64) -> Self {
        RngSeed(v)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
