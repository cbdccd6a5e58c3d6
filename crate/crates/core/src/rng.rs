//! Deterministic random sub-streams.
//!
//! One ChaCha8 generator is keyed per replication seed; each consumer gets its
//! own stream id so that, for example, freezing the carrier does not shift the
//! shipper's samples or the arrival sequence.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Arrivals = 0,
    ShipperPolicy = 1,
    CarrierPolicy = 2,
    ShipperInit = 3,
    CarrierInit = 4,
}

pub fn stream(seed: u64, which: Stream) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}
