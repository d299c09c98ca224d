use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent random streams drawn from one user seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Stream {
    CameraNoise,
    FocalNoise,
    Jitter,
    Payloads,
}

impl Stream {
    fn salt(self) -> u64 {
        match self {
            Stream::CameraNoise => 0x43_41_4d_32,
            Stream::FocalNoise => 0x46_4f_43_31,
            Stream::Jitter => 0x4a_49_54_54,
            Stream::Payloads => 0x50_41_59_4c,
        }
    }
}

/// Generator for `(seed, purpose, index)`; independent of evaluation order.
pub(crate) fn stream_rng(seed: u64, stream: Stream, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ stream.salt().rotate_left(32));
    rng.set_stream(index);
    rng
}
