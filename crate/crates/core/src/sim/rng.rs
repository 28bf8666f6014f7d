use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 step: advances `state` and returns the next output.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// ChaCha8 keyed by four SplitMix64 outputs of `master` (little-endian),
/// positioned on stream `stream`.
///
/// Sweeps use `stream = (snr_idx << 32) | trial_idx`, so every trial owns an
/// independent generator regardless of how trials are scheduled.
pub fn stream_rng(master: u64, stream: u64) -> ChaCha8Rng {
    let mut state = master;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}
