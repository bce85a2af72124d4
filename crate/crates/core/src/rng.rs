//! Hierarchical, reproducible random streams.
//!
//! Every random decision in the crate is drawn from a stream addressed by a
//! root seed and a path of indices, e.g. `[replication, method, replicate]`.
//! The path is folded into a 256-bit ChaCha8 key with SplitMix64 finalizers,
//! so a stream depends only on its address and never on scheduling order.
//! ChaCha8 is a counter-based generator with a stable, documented output
//! sequence, which keeps runs bit-identical across platforms for a pinned
//! `rand_chacha` version (see `Cargo.lock`).

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Concrete generator behind every stream.
pub type StreamRng = ChaCha8Rng;

const GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the stream addressed by `(root_seed, path)`.
///
/// Identical addresses give identical streams; `[]` and `[0]` are distinct.
pub fn seed_tree(root_seed: u64, path: &[u64]) -> StreamRng {
    let mut state = mix64(root_seed ^ GAMMA);
    for (depth, &index) in path.iter().enumerate() {
        let salt = mix64(index.wrapping_add((depth as u64 + 1).wrapping_mul(GAMMA)));
        state = mix64(state.rotate_left(17) ^ salt);
    }
    state = mix64(state ^ (path.len() as u64).wrapping_mul(GAMMA));

    let mut key = [0u8; 32];
    let mut s = state;
    for chunk in key.chunks_exact_mut(8) {
        s = s.wrapping_add(GAMMA);
        chunk.copy_from_slice(&mix64(s).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// An address in the seed tree. Cheap to clone and extend.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SeedPath {
    root: u64,
    path: Vec<u64>,
}

impl SeedPath {
    pub fn new(root: u64) -> Self {
        SeedPath {
            root,
            path: Vec::new(),
        }
    }

    pub fn child(&self, index: u64) -> Self {
        let mut path = self.path.clone();
        path.push(index);
        SeedPath {
            root: self.root,
            path,
        }
    }

    pub fn root(&self) -> u64 {
        self.root
    }

    pub fn path(&self) -> &[u64] {
        &self.path
    }

    pub fn rng(&self) -> StreamRng {
        seed_tree(self.root, &self.path)
    }

    /// A root seed for components that build their own seed tree.
    pub fn derive_seed(&self) -> u64 {
        self.rng().next_u64()
    }
}
