//! Search-space primitives: bit strings, seedable randomness and standard bit
//! mutation.

use std::fmt;
use std::str::FromStr;

use rand::distr::{Bernoulli, Distribution};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Binomial;

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

fn words_for(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

/// A fixed-length binary string, packed into 64-bit words.
///
/// Bit `i` (0-based) is stored in word `i / 64` at position `i % 64`. Unused
/// bits of the last word are always zero, so word-level popcounts and
/// comparisons are exact.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut x = Self {
            len,
            words: vec![u64::MAX; words_for(len)],
        };
        x.clear_tail();
        x
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut x = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            x.set(i, b);
        }
        x
    }

    /// The string whose first `ones` positions are set.
    pub fn with_prefix_ones(len: usize, ones: usize) -> Self {
        let mut x = Self::zeros(len);
        for i in 0..ones.min(len) {
            x.set(i, true);
        }
        x
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        self.words[i / WORD_BITS] ^= 1u64 << (i % WORD_BITS);
    }

    /// Number of one-bits.
    #[inline]
    pub fn onemax(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Length of the longest all-ones prefix.
    pub fn leading_ones(&self) -> usize {
        let mut count = 0;
        for &w in &self.words {
            let run = w.trailing_ones() as usize;
            count += run;
            if run < WORD_BITS {
                break;
            }
        }
        count.min(self.len)
    }

    pub fn hamming(&self, other: &BitString) -> usize {
        assert_eq!(self.len, other.len, "hamming distance of strings of different length");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    pub fn complement(&self) -> BitString {
        let mut x = BitString {
            len: self.len,
            words: self.words.iter().map(|w| !w).collect(),
        };
        x.clear_tail();
        x
    }

    /// Overwrites `self` with `other` without reallocating when lengths agree.
    #[inline]
    pub fn copy_from(&mut self, other: &BitString) {
        self.len = other.len;
        self.words.clone_from(&other.words);
    }

    /// Integer value with bit `i` as the coefficient of `2^i`; only for `len <= 64`.
    pub fn to_u64(&self) -> u64 {
        assert!(self.len <= WORD_BITS);
        self.words.first().copied().unwrap_or(0)
    }

    pub fn from_u64(len: usize, value: u64) -> Self {
        assert!(len <= WORD_BITS);
        let mut x = Self::zeros(len);
        if len > 0 {
            x.words[0] = value;
            x.clear_tail();
        }
        x
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD_BITS;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

/// Parses a string of `0`/`1` characters, first character = bit 0.
impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Domain(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_bits(&bits))
    }
}

/// SplitMix64 finalizer.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from a master seed and a path of stream indices.
///
/// The result is a pure function of its inputs, so trial `i` of grid point
/// `g` gets the same stream no matter which thread runs it.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(master), |acc, &i| {
        splitmix64(acc ^ splitmix64(i.wrapping_add(0xA5A5_A5A5)))
    })
}

/// Seedable random source owned by exactly one logical run.
///
/// Backed by ChaCha8, a counter-based generator: the output stream is a pure
/// function of the 64-bit seed.
#[derive(Clone, Debug)]
pub struct RandomSource {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent source for stream `index` under `master`.
    pub fn derive(master: u64, index: u64) -> Self {
        Self::new(derive_seed(master, &[index]))
    }

    pub fn child(&self, index: u64) -> Self {
        Self::derive(self.seed, index)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl RngCore for RandomSource {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Uniformly random string of length `n`.
pub fn random_bitstring<R: Rng + ?Sized>(n: usize, rng: &mut R) -> BitString {
    let mut x = BitString::zeros(n);
    fill_random(&mut x, rng);
    x
}

/// Overwrites `x` with uniformly random bits, keeping its length.
pub fn fill_random<R: Rng + ?Sized>(x: &mut BitString, rng: &mut R) {
    for w in x.words.iter_mut() {
        *w = rng.next_u64();
    }
    x.clear_tail();
}

/// Reference standard bit mutation: every bit flips independently with
/// probability `rate`.
///
/// Panics if `rate` is not in `[0, 1]`.
pub fn mutate<R: Rng + ?Sized>(x: &BitString, rate: f64, rng: &mut R) -> BitString {
    let coin = Bernoulli::new(rate).expect("mutation rate must lie in [0, 1]");
    let mut y = x.clone();
    for i in 0..x.len() {
        if coin.sample(rng) {
            y.flip(i);
        }
    }
    y
}

/// Binomial-count standard bit mutation: draws `K ~ Bin(n, rate)` and flips
/// `K` distinct uniformly chosen positions. Same offspring law as [`mutate`].
pub fn mutate_fast<R: Rng + ?Sized>(x: &BitString, rate: f64, rng: &mut R) -> BitString {
    let mutator = Mutator::new(x.len(), rate).expect("mutation rate must lie in [0, 1]");
    let mut y = x.clone();
    mutator.mutate_into(x, &mut y, rng);
    y
}

/// Largest flip count handled by rejection sampling on a stack buffer.
const SMALL_FLIPS: usize = 16;

/// Precomputed binomial-count mutation operator for a fixed `(n, rate)`.
#[derive(Clone, Debug)]
pub struct Mutator {
    n: usize,
    rate: f64,
    flips: Binomial,
}

impl Mutator {
    pub fn new(n: usize, rate: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rate) || rate.is_nan() {
            return Err(Error::Domain(format!("mutation rate {rate} outside [0, 1]")));
        }
        let flips = Binomial::new(n as u64, rate).map_err(|e| Error::Domain(format!("binomial flip count: {e}")))?;
        Ok(Self { n, rate, flips })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// Writes a mutated copy of `parent` into `child` (no allocation when
    /// `child` already has the right length). Returns the number of flipped bits.
    #[inline]
    pub fn mutate_into<R: Rng + ?Sized>(&self, parent: &BitString, child: &mut BitString, rng: &mut R) -> usize {
        debug_assert_eq!(parent.len(), self.n);
        child.copy_from(parent);
        let k = self.flips.sample(rng) as usize;
        match k {
            0 => {}
            1 => child.flip(rng.random_range(0..self.n)),
            _ if k <= SMALL_FLIPS && 2 * k <= self.n => {
                let mut chosen = [0usize; SMALL_FLIPS];
                let mut filled = 0;
                while filled < k {
                    let pos = rng.random_range(0..self.n);
                    if !chosen[..filled].contains(&pos) {
                        chosen[filled] = pos;
                        filled += 1;
                    }
                }
                for &pos in &chosen[..k] {
                    child.flip(pos);
                }
            }
            _ => {
                for pos in rand::seq::index::sample(rng, self.n, k) {
                    child.flip(pos);
                }
            }
        }
        k
    }
}
