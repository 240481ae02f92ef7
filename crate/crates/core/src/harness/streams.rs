use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Named generator streams derived from one master seed.
///
/// Every stream is the same ChaCha key with a distinct stream id, so the
/// sequences are independent and adding draws to one never shifts another.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Env = 1,
    Explore = 2,
    Update = 3,
    Init = 4,
    Eval = 5,
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// All training streams for one run.
#[derive(Debug, Clone)]
pub struct RunStreams {
    pub env: ChaCha8Rng,
    pub explore: ChaCha8Rng,
    pub update: ChaCha8Rng,
    pub init: ChaCha8Rng,
}

impl RunStreams {
    pub fn new(seed: u64) -> Self {
        Self {
            env: stream_rng(seed, Stream::Env),
            explore: stream_rng(seed, Stream::Explore),
            update: stream_rng(seed, Stream::Update),
            init: stream_rng(seed, Stream::Init),
        }
    }
}
