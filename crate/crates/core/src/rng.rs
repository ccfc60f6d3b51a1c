//! Splittable deterministic random streams.
//!
//! Every independent unit of work (a scan point, a protocol round) draws from
//! its own ChaCha stream keyed by `(master seed, stream id)`, so results do
//! not depend on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub type StreamRng = ChaCha12Rng;

/// Stream id reserved for calibration runs; scan points use their grid index.
pub const CALIBRATION_STREAM: u64 = u64::MAX;

pub fn stream(seed: u64, stream_id: u64) -> StreamRng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// Derives a child seed, used when one stream must fan out into a nested
/// family of streams (for example scans inside a Bell sweep).
pub fn derive_seed(seed: u64, stream_id: u64) -> u64 {
    use rand::RngCore;
    stream(seed, stream_id).next_u64()
}
