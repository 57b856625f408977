use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Uuid every Form carries.
pub const FORM_UUID: &str = "0";

const MAX_UUID: u32 = i32::MAX as u32;

/// Source of component Uuids: decimal integers in `[1, 2^31 - 1]`, never
/// repeated within one generator.
///
/// One generator is created per project build and passed down explicitly.
#[derive(Debug, Clone)]
pub struct UuidGenerator {
    rng: ChaCha8Rng,
    issued: HashSet<u32>,
}

impl UuidGenerator {
    pub fn seeded(seed: u64) -> Self {
        UuidGenerator {
            rng: ChaCha8Rng::seed_from_u64(seed),
            issued: HashSet::new(),
        }
    }

    pub fn from_entropy() -> Self {
        UuidGenerator {
            rng: ChaCha8Rng::from_os_rng(),
            issued: HashSet::new(),
        }
    }

    pub fn next_uuid(&mut self) -> String {
        loop {
            let v = self.rng.random_range(1..=MAX_UUID);
            if self.issued.insert(v) {
                return v.to_string();
            }
        }
    }
}
