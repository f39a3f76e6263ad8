//! Seeded, splittable random streams.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Independent stream `stream` derived from `seed`. Streams with different ids
/// never overlap, so parallel work stays reproducible.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Uniform draw on the open interval (0, 1).
pub fn open_unit<R: RngCore + ?Sized>(r: &mut R) -> f64 {
    ((r.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal draw by inversion.
pub fn std_normal<R: RngCore + ?Sized>(r: &mut R) -> f64 {
    crate::special::norm_ppf(open_unit(r))
}
