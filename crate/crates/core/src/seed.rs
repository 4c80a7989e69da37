//! Counter-based seed derivation.
//!
//! Replica `i` of a run with master seed `s` draws from streams keyed by
//! `splitmix64(s ^ splitmix64(i))`, so replicas are reproducible and
//! order-independent. Within a replica, every particle owns streams keyed
//! by its genealogical id, which makes a particle's trajectory a function
//! of `(replica_seed, id)` alone — independent of scheduling and of
//! whether boundary killing is enabled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One application of the SplitMix64 output mix.
#[inline]
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for replica `index` of a run with master seed `master`.
#[inline]
pub fn replica_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

/// Salt separating a particle's motion stream from its kill-check stream.
#[derive(Clone, Copy, Debug)]
pub enum StreamKind {
    Motion,
    Kill,
}

impl StreamKind {
    #[inline]
    fn salt(self) -> u64 {
        match self {
            StreamKind::Motion => 0x6d6f_7469_6f6e_0001,
            StreamKind::Kill => 0x6b69_6c6c_0000_0002,
        }
    }
}

/// RNG stream owned by particle `id` within a replica.
#[inline]
pub fn particle_rng(replica_seed: u64, id: u64, kind: StreamKind) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(replica_seed ^ splitmix64(id ^ kind.salt())))
}
