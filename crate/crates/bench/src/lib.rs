//! Shared fixtures for the criterion benches: deterministic keys and
//! segment generators so timings are comparable run to run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use privpath_core::{keygen_with_rng, Path, Point, PrivateKey, PublicKey};

/// Key pair from a fixed seed; generation cost stays out of the measured
/// sections.
pub fn bench_key(bits: u64) -> (PublicKey, PrivateKey) {
    let mut rng = ChaCha20Rng::seed_from_u64(0x5eed);
    keygen_with_rng(bits, &mut rng).expect("bench keygen")
}

/// Random single-segment path in the experiment's coordinate range.
pub fn random_segment(rng: &mut ChaCha20Rng) -> Path {
    let c = |rng: &mut ChaCha20Rng| rng.gen_range(-99i64..=99);
    Path::new(vec![
        Point::new(c(rng), c(rng)).unwrap(),
        Point::new(c(rng), c(rng)).unwrap(),
    ])
    .unwrap()
}

pub fn segment_rng() -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(42)
}
