//! Segmented sieve of Eratosthenes over a packed bit array.
//!
//! Integer `n` lives at bit `n - 1` (so `n = 0` is unrepresented and a prefix
//! popcount over bits `[0, x)` is exactly `pi(x)`). Storage is one bit per
//! integer; odd-only compression is deliberately not used so that the word
//! layout doubles as the on-disk payload and as the operand for the
//! word-level shift-AND counting in [`crate::correlation`].

use rayon::prelude::*;

use crate::error::{Error, Result};

const WORD_BITS: u64 = 64;
/// Bits per cumulative-count block: one running count per 2^12 bits keeps the
/// index overhead under 0.1% while ranged queries scan at most 64 words.
const BLOCK_BITS: u64 = 1 << 12;
const BLOCK_WORDS: usize = (BLOCK_BITS / WORD_BITS) as usize;

/// Knobs for [`build_sieve`].
#[derive(Debug, Clone)]
pub struct SieveConfig {
    /// Bits per segment. Must be a multiple of 64 and at least 64.
    pub segment_size: u64,
    /// Maximum number of segments sieved concurrently; 1 forces a serial
    /// build. Results are bit-identical either way.
    pub parallelism: usize,
    /// Upper bound on bitmap memory; building past it fails with
    /// [`Error::ResourceExhausted`] instead of thrashing.
    pub memory_budget_bytes: u64,
}

impl Default for SieveConfig {
    fn default() -> Self {
        SieveConfig {
            segment_size: 1 << 20,
            parallelism: rayon::current_num_threads(),
            memory_budget_bytes: 1 << 30,
        }
    }
}

/// Immutable prime indicator over `[1, limit]`.
///
/// Bit `n - 1` is set iff `n` is prime. Read-only after construction and safe
/// to share across threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeBitmap {
    limit: u64,
    words: Vec<u64>,
    /// `block_counts[b]` = number of set bits below bit index `b * BLOCK_BITS`.
    block_counts: Vec<u64>,
}

/// Build the prime bitmap for `[1, limit]`.
///
/// Base primes up to `sqrt(limit)` come from a plain odd sieve; the main
/// array is then processed in `config.segment_size`-bit segments, optionally
/// in parallel. The output is deterministic regardless of segmentation or
/// thread count.
pub fn build_sieve(limit: u64, config: &SieveConfig) -> Result<PrimeBitmap> {
    if limit < 1 {
        return Err(Error::pre("build_sieve requires limit >= 1"));
    }
    if config.segment_size < WORD_BITS || !config.segment_size.is_multiple_of(WORD_BITS) {
        return Err(Error::pre(format!(
            "segment_size = {} must be a positive multiple of {WORD_BITS}",
            config.segment_size
        )));
    }
    let needed = limit.div_ceil(8);
    if needed > config.memory_budget_bytes {
        return Err(Error::ResourceExhausted {
            limit,
            needed,
            budget: config.memory_budget_bytes,
        });
    }

    let num_words = (limit.div_ceil(WORD_BITS)) as usize;
    // Bit pattern with every odd integer marked candidate: odd n sits at the
    // even bit index n - 1.
    let mut words = vec![0x5555_5555_5555_5555u64; num_words];
    // n = 1 is not prime; n = 2 is the only even prime.
    words[0] &= !1;
    if limit >= 2 {
        words[0] |= 2;
    }
    mask_tail(&mut words, limit);

    let base = base_primes(isqrt(limit));
    let seg_words = (config.segment_size / WORD_BITS) as usize;

    let sieve_segment = |(seg_idx, chunk): (usize, &mut [u64])| {
        let first_bit = (seg_idx * seg_words) as u64 * WORD_BITS;
        let lo_int = first_bit + 1;
        let hi_int = (first_bit + chunk.len() as u64 * WORD_BITS).min(limit);
        for &p in &base {
            let p2 = p * p;
            if p2 > hi_int {
                break;
            }
            // First odd multiple of p in [max(p^2, lo_int), hi_int].
            let mut m = lo_int.div_ceil(p) * p;
            if m < p2 {
                m = p2;
            }
            if m % 2 == 0 {
                m += p;
            }
            while m <= hi_int {
                let bit = m - 1 - first_bit;
                chunk[(bit / WORD_BITS) as usize] &= !(1u64 << (bit % WORD_BITS));
                m += 2 * p;
            }
        }
    };

    if config.parallelism <= 1 {
        words.chunks_mut(seg_words).enumerate().for_each(sieve_segment);
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.parallelism)
            .build()
            .map_err(|e| Error::pre(format!("thread pool: {e}")))?;
        pool.install(|| {
            words
                .par_chunks_mut(seg_words)
                .enumerate()
                .for_each(sieve_segment);
        });
    }

    Ok(PrimeBitmap::from_words(limit, words))
}

impl PrimeBitmap {
    /// Assemble a bitmap from the packed word representation, rebuilding the
    /// block index. `words` must already satisfy the bit-layout invariants.
    pub(crate) fn from_words(limit: u64, mut words: Vec<u64>) -> Self {
        mask_tail(&mut words, limit);
        let num_blocks = words.len().div_ceil(BLOCK_WORDS);
        let mut block_counts = Vec::with_capacity(num_blocks + 1);
        let mut running = 0u64;
        block_counts.push(0);
        for block in words.chunks(BLOCK_WORDS) {
            running += block.iter().map(|w| w.count_ones() as u64).sum::<u64>();
            block_counts.push(running);
        }
        PrimeBitmap {
            limit,
            words,
            block_counts,
        }
    }

    /// Inclusive upper bound of the covered range.
    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// The packed words; bit `n - 1` of the sequence corresponds to integer `n`.
    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    /// Unchecked bit probe for hot loops. `n` must be in `[1, limit]`.
    #[inline]
    pub(crate) fn bit(&self, n: u64) -> bool {
        debug_assert!(n >= 1 && n <= self.limit);
        let i = n - 1;
        self.words[(i / WORD_BITS) as usize] >> (i % WORD_BITS) & 1 == 1
    }

    /// Is `n` prime? Errors when `n = 0` or `n > limit`.
    pub fn is_prime(&self, n: u64) -> Result<bool> {
        if n < 1 || n > self.limit {
            return Err(Error::OutOfRange {
                what: "n",
                value: n,
                limit: self.limit,
            });
        }
        Ok(self.bit(n))
    }

    /// Number of set bits at bit indices `[0, x)`, i.e. `pi(x)`.
    fn rank(&self, x: u64) -> u64 {
        debug_assert!(x <= self.words.len() as u64 * WORD_BITS);
        let block = (x / BLOCK_BITS) as usize;
        let mut count = self.block_counts[block];
        let first_word = block * BLOCK_WORDS;
        let last_word = (x / WORD_BITS) as usize;
        for w in &self.words[first_word..last_word] {
            count += w.count_ones() as u64;
        }
        let rem = x % WORD_BITS;
        if rem > 0 {
            count += (self.words[last_word] & ((1u64 << rem) - 1)).count_ones() as u64;
        }
        count
    }

    /// `pi(hi) - pi(lo)`: the number of primes `p` with `lo < p <= hi`.
    pub fn prime_count_range(&self, lo: u64, hi: u64) -> Result<u64> {
        if lo > hi {
            return Err(Error::pre(format!("lo = {lo} exceeds hi = {hi}")));
        }
        if hi > self.limit {
            return Err(Error::OutOfRange {
                what: "hi",
                value: hi,
                limit: self.limit,
            });
        }
        Ok(self.rank(hi) - self.rank(lo))
    }

    /// All primes `<= limit` in ascending order.
    pub fn iter_primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &word)| {
            let base = wi as u64 * WORD_BITS;
            SetBits { word, base }
        })
    }
}

struct SetBits {
    word: u64,
    base: u64,
}

impl Iterator for SetBits {
    type Item = u64;

    #[inline]
    fn next(&mut self) -> Option<u64> {
        if self.word == 0 {
            return None;
        }
        let tz = self.word.trailing_zeros() as u64;
        self.word &= self.word - 1;
        Some(self.base + tz + 1)
    }
}

/// Clear bits at indices `>= limit` in the final word.
fn mask_tail(words: &mut [u64], limit: u64) {
    let rem = limit % WORD_BITS;
    if rem > 0 {
        if let Some(last) = words.last_mut() {
            *last &= (1u64 << rem) - 1;
        }
    }
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r > 0 && r * r > n {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}

/// Odd primes up to `n` by a plain boolean sieve. Used for base primes only,
/// so `n <= sqrt(limit)` stays small.
fn base_primes(n: u64) -> Vec<u64> {
    if n < 3 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    let mut p = 3usize;
    while p <= n {
        if !composite[p] {
            primes.push(p as u64);
            let mut m = p * p;
            while m <= n {
                composite[m] = true;
                m += 2 * p;
            }
        }
        p += 2;
    }
    primes
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_division_is_prime(n: u64) -> bool {
        if n < 2 {
            return false;
        }
        let mut d = 2;
        while d * d <= n {
            if n.is_multiple_of(d) {
                return false;
            }
            d += 1;
        }
        true
    }

    #[test]
    fn small_limits() {
        let pb = build_sieve(10, &SieveConfig::default()).unwrap();
        let primes: Vec<u64> = pb.iter_primes().collect();
        assert_eq!(primes, vec![2, 3, 5, 7]);

        let pb = build_sieve(1, &SieveConfig::default()).unwrap();
        assert_eq!(pb.iter_primes().count(), 0);

        let pb = build_sieve(2, &SieveConfig::default()).unwrap();
        assert_eq!(pb.iter_primes().collect::<Vec<_>>(), vec![2]);
    }

    #[test]
    fn pi_100_is_25() {
        let pb = build_sieve(100, &SieveConfig::default()).unwrap();
        assert_eq!(pb.prime_count_range(0, 100).unwrap(), 25);
    }

    #[test]
    fn is_prime_examples() {
        let pb = build_sieve(30, &SieveConfig::default()).unwrap();
        assert!(pb.is_prime(29).unwrap());
        assert!(!pb.is_prime(1).unwrap());
        assert!(!pb.is_prime(27).unwrap());
        assert!(matches!(pb.is_prime(0), Err(Error::OutOfRange { .. })));
        assert!(matches!(pb.is_prime(31), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn count_range_examples() {
        let pb = build_sieve(120, &SieveConfig::default()).unwrap();
        assert_eq!(pb.prime_count_range(0, 100).unwrap(), 25);
        assert_eq!(pb.prime_count_range(10, 30).unwrap(), 6);
        assert_eq!(pb.prime_count_range(17, 17).unwrap(), 0);
        assert!(matches!(
            pb.prime_count_range(0, 121),
            Err(Error::OutOfRange { .. })
        ));
        assert!(matches!(
            pb.prime_count_range(5, 4),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn matches_trial_division_to_1e5() {
        let limit = 100_000u64;
        let pb = build_sieve(limit, &SieveConfig::default()).unwrap();
        let mut oracle = 0u64;
        let mut prev = 0u64;
        for n in 1..=limit {
            if trial_division_is_prime(n) {
                oracle += 1;
                assert!(pb.bit(n), "sieve misses prime {n}");
            } else {
                assert!(!pb.bit(n), "sieve falsely marks {n}");
            }
            let pi = pb.prime_count_range(0, n).unwrap();
            assert_eq!(pi, oracle, "pi({n}) mismatch");
            assert!(pi >= prev, "pi must be nondecreasing at {n}");
            prev = pi;
        }
    }

    #[test]
    fn segment_size_independent() {
        let limit = 10_000u64;
        let reference = build_sieve(limit, &SieveConfig::default()).unwrap();
        for seg in [64u64, 128, 4096, 1 << 16] {
            let cfg = SieveConfig {
                segment_size: seg,
                ..SieveConfig::default()
            };
            let pb = build_sieve(limit, &cfg).unwrap();
            assert_eq!(pb.words(), reference.words(), "segment_size = {seg}");
        }
    }

    #[test]
    fn parallel_build_is_deterministic() {
        let limit = 500_000u64;
        let serial = build_sieve(
            limit,
            &SieveConfig {
                segment_size: 1 << 14,
                parallelism: 1,
                ..SieveConfig::default()
            },
        )
        .unwrap();
        let parallel = build_sieve(
            limit,
            &SieveConfig {
                segment_size: 1 << 14,
                parallelism: 4,
                ..SieveConfig::default()
            },
        )
        .unwrap();
        assert_eq!(serial.words(), parallel.words());
    }

    #[test]
    fn rejects_bad_config() {
        assert!(matches!(
            build_sieve(
                100,
                &SieveConfig {
                    segment_size: 63,
                    ..SieveConfig::default()
                }
            ),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            build_sieve(
                100,
                &SieveConfig {
                    segment_size: 96,
                    ..SieveConfig::default()
                }
            ),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            build_sieve(0, &SieveConfig::default()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn memory_budget_enforced() {
        let cfg = SieveConfig {
            memory_budget_bytes: 1024,
            ..SieveConfig::default()
        };
        assert!(matches!(
            build_sieve(10_000, &cfg),
            Err(Error::ResourceExhausted { .. })
        ));
        assert!(build_sieve(8 * 1024, &cfg).is_ok());
    }

    #[test]
    fn word_boundary_limits() {
        for limit in [63u64, 64, 65, 127, 128, 129] {
            let pb = build_sieve(limit, &SieveConfig::default()).unwrap();
            let expected: Vec<u64> = (1..=limit).filter(|&n| trial_division_is_prime(n)).collect();
            assert_eq!(pb.iter_primes().collect::<Vec<_>>(), expected, "limit {limit}");
        }
    }
}
