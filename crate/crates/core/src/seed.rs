//! Seeds and the deterministic random streams derived from them.
//!
//! Every random decision in an environment draws from a ChaCha8 stream keyed
//! by `(seed, stream id)`, so adding a new consumer never perturbs another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// 64-bit match seed. Serialized as a decimal string so JSON readers that
/// parse numbers as doubles never lose precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Seed(pub u64);

impl Seed {
    pub fn rng(self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(stream);
        rng
    }

    /// Child seed for sub-draws (e.g. the k-th match of a tournament).
    pub fn derive(self, salt: u64) -> Seed {
        Seed(splitmix64(self.0 ^ splitmix64(salt.wrapping_add(0x9E37_79B9_7F4A_7C15))))
    }
}

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}

impl std::fmt::Display for Seed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for Seed {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for Seed {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Str(String),
            Num(u64),
        }
        match Repr::deserialize(d)? {
            Repr::Str(s) => s.parse().map(Seed).map_err(serde::de::Error::custom),
            Repr::Num(n) => Ok(Seed(n)),
        }
    }
}

/// Stream ids used by the environments.
pub(crate) mod streams {
    pub const DEAL: u64 = 1;
    pub const ROLES: u64 = 2;
    pub const INSTANCE: u64 = 3;
    pub const TIE_BREAK: u64 = 4;
    pub const FALLBACK: u64 = 5;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
