//! Seeded sampling helpers shared by the checkers and the random operator family.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::scalar::Real;
use crate::vector::Vector;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` of the generator seeded with `seed`.
pub fn seeded_stream(seed: u64, stream: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform sample from the cube `[−radius, radius]ᵈ`.
pub fn uniform_vector<S: Real>(rng: &mut impl Rng, dim: usize, radius: f64) -> Vector<S> {
    let coords = (0..dim).map(|_| S::lit(rng.gen_range(-radius..=radius))).collect();
    Vector::from_raw(coords)
}

pub fn uniform_in<S: Real>(rng: &mut impl Rng, lo: f64, hi: f64) -> S {
    S::lit(rng.gen_range(lo..=hi))
}
