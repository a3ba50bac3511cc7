//! Nested uniform (Owen) scrambling for base 2.
//!
//! The permutation applied to digit `k` of coordinate `j` depends on the
//! digits `a_1 .. a_{k-1}` above it. Instead of materializing the tree, the
//! swap bit for a node is a keyed hash of `(master_seed, replicate_index, j,
//! prefix)`, so every node is drawn once, reproducibly, in O(1) memory.
//!
//! Digits below the input precision are zero, so under a nested scramble
//! they become independent uniform digits. They are generated directly as a
//! tail word and redrawn if they come out all zeros or all ones, which keeps
//! every scrambled coordinate strictly inside (0, 1).

use serde::{Deserialize, Serialize};

use crate::digital_nets::{f64_to_word, PointSet};
use crate::error::{contract, Result};

/// Number of scrambled digits per coordinate.
pub const SCRAMBLE_DEPTH: u32 = 64;

const TAG_DIGIT: u64 = 0x243f_6a88_85a3_08d3;
const TAG_TAIL: u64 = 0x1319_8a2e_0370_7344;
const TAG_UNIFORM: u64 = 0xa409_3822_299f_31d0;

/// Randomness source of one scramble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScrambleSeed {
    pub master_seed: u64,
    pub replicate_index: u64,
}

impl ScrambleSeed {
    pub fn new(master_seed: u64, replicate_index: u64) -> Self {
        Self {
            master_seed,
            replicate_index,
        }
    }

    /// Key for coordinate `dimension` (0-based).
    fn dimension_key(&self, dimension: usize) -> u64 {
        let k = mix64(self.master_seed ^ 0x9e37_79b9_7f4a_7c15);
        let k = mix64(k ^ self.replicate_index.wrapping_mul(0xd1b5_4a32_d192_ed03));
        mix64(k ^ (dimension as u64).wrapping_mul(0xaef1_7502_108e_f2d9))
    }
}

/// SplitMix64 finalizer.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline]
fn keyed_hash(key: u64, tag: u64, input: u64) -> u64 {
    mix64(mix64(input ^ tag) ^ key)
}

/// Prefix `a_1 .. a_len` (top `len` bits of `word`) with a sentinel bit, so
/// prefixes of different lengths never collide. `len <= 63`.
#[inline]
fn encode_prefix(word: u64, len: u32) -> u64 {
    debug_assert!(len < 64);
    if len == 0 {
        1
    } else {
        (1u64 << len) | (word >> (64 - len))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Owen,
    #[cfg(any(test, feature = "test-hooks"))]
    Identity,
}

/// Lazily realized tree of digit permutations for one [`ScrambleSeed`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PermutationTree {
    seed: ScrambleSeed,
    mode: Mode,
}

impl PermutationTree {
    pub fn new(seed: ScrambleSeed) -> Self {
        Self {
            seed,
            mode: Mode::Owen,
        }
    }

    /// Every node permutation is the identity; tail digits stay random.
    #[cfg(any(test, feature = "test-hooks"))]
    pub fn identity(seed: ScrambleSeed) -> Self {
        Self {
            seed,
            mode: Mode::Identity,
        }
    }

    pub fn seed(&self) -> ScrambleSeed {
        self.seed
    }

    /// Permutation of `{0, 1}` at the node reached by `prefix` in coordinate
    /// `dimension` (0-based).
    pub fn permutation_for(&self, dimension: usize, prefix: &[u8]) -> [u8; 2] {
        assert!(prefix.len() < 64, "prefix longer than the scramble depth");
        let word = prefix.iter().enumerate().fold(0u64, |w, (k, &a)| {
            debug_assert!(a < 2);
            w | ((a as u64 & 1) << (63 - k))
        });
        let key = self.seed.dimension_key(dimension);
        if self.swaps(key, word, prefix.len() as u32) {
            [1, 0]
        } else {
            [0, 1]
        }
    }

    #[inline]
    fn swaps(&self, key: u64, word: u64, len: u32) -> bool {
        match self.mode {
            Mode::Owen => keyed_hash(key, TAG_DIGIT, encode_prefix(word, len)) >> 63 == 1,
            #[cfg(any(test, feature = "test-hooks"))]
            Mode::Identity => false,
        }
    }

    /// Scramble one coordinate's digit word: nested permutations on the
    /// first `precision` digits, uniform digits from `precision + 1` to
    /// `depth`.
    pub(crate) fn scramble_word(
        &self,
        dimension: usize,
        word: u64,
        precision: u32,
        depth: u32,
    ) -> u64 {
        let key = self.seed.dimension_key(dimension);
        let mut out = 0u64;
        for k in 0..precision {
            let digit = (word >> (63 - k)) & 1;
            let flip = self.swaps(key, word, k) as u64;
            out |= (digit ^ flip) << (63 - k);
        }
        let tail_len = depth - precision;
        if tail_len > 0 {
            out |= tail_digits(key, encode_prefix(word, precision), tail_len) << (64 - depth);
        }
        out
    }
}

/// `len` uniform digits, never all zeros or all ones when `len >= 2`.
fn tail_digits(key: u64, node: u64, len: u32) -> u64 {
    let mask = if len == 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    };
    let mut attempt = 0u64;
    loop {
        let h = keyed_hash(
            key ^ attempt.wrapping_mul(0x9e37_79b9_7f4a_7c15),
            TAG_TAIL,
            node,
        );
        let tail = h >> (64 - len);
        if len < 2 || (tail != 0 && tail != mask) {
            return tail;
        }
        attempt += 1;
    }
}

/// Convert a digit word to `f64` by truncating to 53 significant bits, so a
/// nonzero word maps into (0, 1) and never rounds up to 1.
#[inline]
pub fn word_to_unit(word: u64) -> f64 {
    let lz = word.leading_zeros();
    let significant = 64 - lz;
    let truncated = if significant > 53 {
        word & !((1u64 << (significant - 53)) - 1)
    } else {
        word
    };
    truncated as f64 * (1.0 / 18_446_744_073_709_551_616.0)
}

/// Owen-scramble `points` to `depth` digits.
pub fn scramble(points: &PointSet, seed: ScrambleSeed, depth: u32) -> Result<PointSet> {
    scramble_with(points, &PermutationTree::new(seed), depth)
}

pub fn scramble_with(points: &PointSet, tree: &PermutationTree, depth: u32) -> Result<PointSet> {
    let precision = points.precision_depth();
    if depth < precision {
        return contract(format!(
            "scramble depth {depth} is below the input precision {precision}"
        ));
    }
    if depth > SCRAMBLE_DEPTH {
        return contract(format!("scramble depth {depth} exceeds {SCRAMBLE_DEPTH}"));
    }
    let d = points.dim();
    let mut coords = Vec::with_capacity(points.coords().len());
    for p in points.iter() {
        for (j, &u) in p.iter().enumerate() {
            let word = f64_to_word(u);
            coords.push(word_to_unit(tree.scramble_word(j, word, precision, depth)));
        }
    }
    PointSet::new(d, coords, depth)
}

/// Scramble one point with `precision` significant input digits into `out`.
pub(crate) fn scramble_point_into(
    point: &[f64],
    tree: &PermutationTree,
    precision: u32,
    out: &mut [f64],
) {
    for (j, (o, &u)) in out.iter_mut().zip(point).enumerate() {
        *o = word_to_unit(tree.scramble_word(j, f64_to_word(u), precision, SCRAMBLE_DEPTH));
    }
}

/// Plain Monte Carlo points from the same keyed hash: point `i`, coordinate
/// `j` is a hash of `(seed, j, i)`. Coordinates lie in (0, 1).
pub fn uniform_points(n: usize, d: usize, seed: ScrambleSeed) -> Result<PointSet> {
    if d == 0 {
        return contract("dimension must be >= 1");
    }
    let keys = uniform_keys(d, seed);
    let mut coords = vec![0.0; n * d];
    for (i, row) in coords.chunks_exact_mut(d).enumerate() {
        uniform_point_into(&keys, i as u64, row);
    }
    PointSet::new(d, coords, SCRAMBLE_DEPTH)
}

/// Per-coordinate keys for [`uniform_point_into`].
pub(crate) fn uniform_keys(d: usize, seed: ScrambleSeed) -> Vec<u64> {
    (0..d).map(|j| seed.dimension_key(j)).collect()
}

/// Point `i` of the plain Monte Carlo stream.
pub(crate) fn uniform_point_into(keys: &[u64], i: u64, out: &mut [f64]) {
    for (o, &key) in out.iter_mut().zip(keys) {
        let mut word = keyed_hash(key, TAG_UNIFORM, i);
        let mut attempt = 1u64;
        while word == 0 {
            word = keyed_hash(key ^ attempt, TAG_UNIFORM, i);
            attempt += 1;
        }
        *o = word_to_unit(word);
    }
}
