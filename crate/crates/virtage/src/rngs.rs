//! Deterministic random-number plumbing.
//!
//! All randomness in the crate flows through ChaCha8 generators keyed by
//! a user seed plus an explicit stream index. Parallel estimators give
//! each work chunk its own stream, so results depend only on the seed and
//! the chunking, never on thread scheduling.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Generator for stream `stream` of master seed `seed`.
///
/// Distinct streams of the same seed are independent by construction and
/// reproducible across runs and thread counts.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

const INV_2_53: f64 = 1.0 / 9_007_199_254_740_992.0; // 2^-53

/// Uniform draw in the half-open interval [0, 1).
pub fn unit_f64(rng: &mut dyn RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * INV_2_53
}

/// Uniform draw in the half-open interval (0, 1].
///
/// Strictly positive, so it can scale a survival value without ever
/// producing an impossible zero target for inversion.
pub fn unit_open_closed(rng: &mut dyn RngCore) -> f64 {
    ((rng.next_u64() >> 11) + 1) as f64 * INV_2_53
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| stream_rng(7, 3).next_u64()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        assert_ne!(stream_rng(7, 3).next_u64(), stream_rng(7, 4).next_u64());
        assert_ne!(stream_rng(7, 3).next_u64(), stream_rng(8, 3).next_u64());
    }

    #[test]
    fn unit_draws_stay_in_range() {
        let mut rng = stream_rng(1, 0);
        for _ in 0..10_000 {
            let u = unit_f64(&mut rng);
            assert!((0.0..1.0).contains(&u));
            let v = unit_open_closed(&mut rng);
            assert!(v > 0.0 && v <= 1.0);
        }
    }
}
