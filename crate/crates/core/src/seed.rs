use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn fnv1a(text: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in text.bytes() {
        hash ^= byte as u64;
        hash = hash.wrapping_mul(0x0100_0000_01b3);
    }
    hash
}

/// Per-image RNG stream: the run seed mixed with a hash of the image id, so
/// results do not depend on the order images are processed in.
pub(crate) fn image_rng(seed: u64, image_id: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ fnv1a(image_id).rotate_left(17))
}
