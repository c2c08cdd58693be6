//! Shifted-coincidence counting against a prime bitmap.
//!
//! The workhorse is a word-level pass that ANDs the bitmap with itself
//! shifted by `s` bits and population-counts the window, giving
//! `|{n in (lo, hi] : n and n + s both prime}|` exactly. The public pair
//! counting functions expose even shifts only (an odd shift admits at most
//! one prime pair); [`correlation_sums`] is the general route and permits
//! arbitrary shifts and arbitrary arithmetic functions.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sieve::PrimeBitmap;

/// Pair counts `pi_{2k}` over a window `(lo, hi]` for all shifts `2k <= max_shift`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairCountTable {
    lo: u64,
    hi: u64,
    max_shift: u64,
    /// `counts[k - 1]` = number of primes `p` in `(lo, hi]` with `p + 2k` prime.
    counts: Vec<u64>,
}

impl PairCountTable {
    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }

    pub fn max_shift(&self) -> u64 {
        self.max_shift
    }

    /// Count for shift `2k`; `k` runs from 1 to `max_shift / 2`.
    pub fn count(&self, k: u64) -> Option<u64> {
        if k == 0 {
            return None;
        }
        self.counts.get(k as usize - 1).copied()
    }

    /// Counts indexed by `k - 1`.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// `(2k, count)` pairs in ascending shift order.
    pub fn entries(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .map(|(i, &c)| (2 * (i as u64 + 1), c))
    }
}

/// A strictly increasing sequence of positive even shifts `2h_1 < ... < 2h_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TupleSpec {
    shifts: Vec<u64>,
}

impl TupleSpec {
    pub fn new(shifts: Vec<u64>) -> Result<Self> {
        if shifts.is_empty() {
            return Err(Error::InvalidTupleSpec("no shifts given".into()));
        }
        for &s in &shifts {
            if s == 0 || s % 2 != 0 {
                return Err(Error::InvalidTupleSpec(format!(
                    "shift {s} is not a positive even number"
                )));
            }
        }
        for pair in shifts.windows(2) {
            if pair[0] >= pair[1] {
                return Err(Error::InvalidTupleSpec(format!(
                    "shifts must be strictly increasing, got {} then {}",
                    pair[0], pair[1]
                )));
            }
        }
        Ok(TupleSpec { shifts })
    }

    /// Build from an arbitrary list by sorting and removing duplicates.
    pub fn deduplicated(mut shifts: Vec<u64>) -> Result<Self> {
        shifts.sort_unstable();
        shifts.dedup();
        TupleSpec::new(shifts)
    }

    pub fn shifts(&self) -> &[u64] {
        &self.shifts
    }

    pub fn len(&self) -> usize {
        self.shifts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shifts.is_empty()
    }

    pub fn max_shift(&self) -> u64 {
        *self.shifts.last().expect("TupleSpec is never empty")
    }
}

impl fmt::Display for TupleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.shifts.iter().map(|s| s.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Count primes `p` in `(lo, hi]` such that `p + shift` is also prime, for an
/// arbitrary positive `shift`. Callers must guarantee `hi + shift <= limit`.
pub(crate) fn count_shifted_pairs(pb: &PrimeBitmap, lo: u64, hi: u64, shift: u64) -> u64 {
    debug_assert!(lo <= hi);
    debug_assert!(hi + shift <= pb.limit());
    let words = pb.words();
    let q = (shift / 64) as usize;
    let r = (shift % 64) as u32;
    // Primes p in (lo, hi] occupy bit indices [lo, hi).
    let start_word = (lo / 64) as usize;
    let end_word = (hi.div_ceil(64)) as usize;
    let mut total = 0u64;
    for w in start_word..end_word {
        let mut base = words[w];
        if w == start_word {
            let off = (lo % 64) as u32;
            if off > 0 {
                base &= !0u64 << off;
            }
        }
        if w + 1 == end_word {
            let rem = (hi % 64) as u32;
            if rem > 0 {
                base &= (1u64 << rem) - 1;
            }
        }
        if base == 0 {
            continue;
        }
        let shifted = fetch_shifted(words, w, q, r);
        total += (base & shifted).count_ones() as u64;
    }
    total
}

/// Word `w` of the bitmap viewed as if the whole bit sequence were shifted
/// down by `q * 64 + r` bits.
#[inline]
fn fetch_shifted(words: &[u64], w: usize, q: usize, r: u32) -> u64 {
    let lo_part = words.get(w + q).copied().unwrap_or(0) >> r;
    if r == 0 {
        lo_part
    } else {
        lo_part | words.get(w + q + 1).copied().unwrap_or(0) << (64 - r)
    }
}

/// Pair counts over the window `(lo, hi]` for every even shift up to
/// `max_shift`, by the word-level shift-AND fast path.
///
/// The bitmap must extend to `hi + max_shift`; counting never truncates at
/// the window edge, so the result is exact with no boundary correction.
pub fn pair_counts(pb: &PrimeBitmap, lo: u64, hi: u64, max_shift: u64) -> Result<PairCountTable> {
    validate_pair_window(pb, lo, hi, max_shift)?;
    let half = max_shift / 2;
    let counts: Vec<u64> = (1..=half)
        .into_par_iter()
        .map(|k| count_shifted_pairs(pb, lo, hi, 2 * k))
        .collect();
    Ok(PairCountTable {
        lo,
        hi,
        max_shift,
        counts,
    })
}

/// Reference implementation of [`pair_counts`]: a per-integer double loop.
/// Slow; kept as the independent oracle for the fast path.
pub fn pair_counts_naive(
    pb: &PrimeBitmap,
    lo: u64,
    hi: u64,
    max_shift: u64,
) -> Result<PairCountTable> {
    validate_pair_window(pb, lo, hi, max_shift)?;
    let half = max_shift / 2;
    let mut counts = vec![0u64; half as usize];
    for p in (lo + 1)..=hi {
        if !pb.bit(p) {
            continue;
        }
        for k in 1..=half {
            if pb.bit(p + 2 * k) {
                counts[k as usize - 1] += 1;
            }
        }
    }
    Ok(PairCountTable {
        lo,
        hi,
        max_shift,
        counts,
    })
}

fn validate_pair_window(pb: &PrimeBitmap, lo: u64, hi: u64, max_shift: u64) -> Result<()> {
    if lo >= hi {
        return Err(Error::pre(format!("window requires lo < hi, got lo = {lo}, hi = {hi}")));
    }
    if !max_shift.is_multiple_of(2) {
        return Err(Error::pre(format!("max_shift = {max_shift} must be even")));
    }
    if hi.saturating_add(max_shift) > pb.limit() {
        return Err(Error::pre(format!(
            "hi = {hi} plus max_shift = {max_shift} exceeds bitmap limit {}",
            pb.limit()
        )));
    }
    Ok(())
}

/// `pi_{2mk}(x)` for `k = 1..=k_max`: pair counts along the arithmetic
/// progression of shifts `2m, 4m, 6m, ...`.
pub fn stride_pair_counts(pb: &PrimeBitmap, x: u64, m: u64, k_max: u64) -> Result<Vec<u64>> {
    if m == 0 {
        return Err(Error::pre("stride m must be positive"));
    }
    if x == 0 {
        return Err(Error::pre("x must be positive"));
    }
    let span = 2u64.saturating_mul(m).saturating_mul(k_max);
    if x.saturating_add(span) > pb.limit() {
        return Err(Error::pre(format!(
            "x = {x} plus 2*m*k_max = {span} exceeds bitmap limit {}",
            pb.limit()
        )));
    }
    Ok((1..=k_max)
        .into_par_iter()
        .map(|k| count_shifted_pairs(pb, 0, x, 2 * m * k))
        .collect())
}

/// Number of primes `p <= x` with `p + s` prime for every tuple shift `s`.
pub fn tuple_count(pb: &PrimeBitmap, x: u64, spec: &TupleSpec) -> Result<u64> {
    if x == 0 {
        return Err(Error::pre("x must be positive"));
    }
    if x.saturating_add(spec.max_shift()) > pb.limit() {
        return Err(Error::pre(format!(
            "x = {x} plus max(shifts) = {} exceeds bitmap limit {}",
            spec.max_shift(),
            pb.limit()
        )));
    }
    let words = pb.words();
    let end_word = (x.div_ceil(64)) as usize;
    let mut total = 0u64;
    for w in 0..end_word {
        let mut acc = words[w];
        if w + 1 == end_word {
            let rem = (x % 64) as u32;
            if rem > 0 {
                acc &= (1u64 << rem) - 1;
            }
        }
        for &s in spec.shifts() {
            if acc == 0 {
                break;
            }
            acc &= fetch_shifted(words, w, (s / 64) as usize, (s % 64) as u32);
        }
        total += acc.count_ones() as u64;
    }
    Ok(total)
}

/// An integer-to-complex function together with the range it is defined on.
pub struct ArithmeticFunction {
    eval: Box<dyn Fn(u64) -> Complex64 + Send + Sync>,
    domain_limit: u64,
}

impl ArithmeticFunction {
    /// Wrap a pure function defined on `[1, domain_limit]`.
    pub fn new<F>(domain_limit: u64, eval: F) -> Self
    where
        F: Fn(u64) -> Complex64 + Send + Sync + 'static,
    {
        ArithmeticFunction {
            eval: Box::new(eval),
            domain_limit,
        }
    }

    /// The prime characteristic function backed by a bitmap.
    pub fn prime_indicator(pb: PrimeBitmap) -> Self {
        let domain_limit = pb.limit();
        ArithmeticFunction::new(domain_limit, move |n| {
            if pb.bit(n) {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn domain_limit(&self) -> u64 {
        self.domain_limit
    }

    pub fn eval(&self, n: u64) -> Result<Complex64> {
        if n < 1 || n > self.domain_limit {
            return Err(Error::DomainLimit {
                needed: n,
                domain_limit: self.domain_limit,
            });
        }
        Ok((self.eval)(n))
    }

    #[inline]
    fn eval_unchecked(&self, n: u64) -> Complex64 {
        (self.eval)(n)
    }
}

impl fmt::Debug for ArithmeticFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ArithmeticFunction")
            .field("domain_limit", &self.domain_limit)
            .finish_non_exhaustive()
    }
}

/// The exact correlation sums of an arithmetic function up to `x`:
/// `alpha = sum A(n)`, `alpha_zero = sum |A(n)|^2`, and per requested shift
/// `k` the sum `alpha_k = sum A(n) * conj(A(n + k))`.
#[derive(Debug, Clone)]
pub struct CorrelationSums {
    pub x: u64,
    pub alpha: Complex64,
    pub alpha_shifts: BTreeMap<u64, Complex64>,
    pub alpha_zero: f64,
}

/// Evaluate the correlation sums of `a` up to `x` for the given shifts
/// (odd shifts permitted). Requires `x + max(shifts) <= a.domain_limit()`.
pub fn correlation_sums(a: &ArithmeticFunction, x: u64, shifts: &[u64]) -> Result<CorrelationSums> {
    let max_shift = shifts.iter().copied().max().unwrap_or(0);
    let needed = x.saturating_add(max_shift);
    if needed > a.domain_limit() {
        return Err(Error::DomainLimit {
            needed,
            domain_limit: a.domain_limit(),
        });
    }
    let mut keys: Vec<u64> = shifts.to_vec();
    keys.sort_unstable();
    keys.dedup();

    let mut alpha = Complex64::new(0.0, 0.0);
    let mut alpha_zero = 0.0f64;
    let mut sums = vec![Complex64::new(0.0, 0.0); keys.len()];
    for n in 1..=x {
        let an = a.eval_unchecked(n);
        alpha += an;
        alpha_zero += an.norm_sqr();
        for (i, &k) in keys.iter().enumerate() {
            sums[i] += an * a.eval_unchecked(n + k).conj();
        }
    }
    let alpha_shifts = keys.into_iter().zip(sums).collect();
    Ok(CorrelationSums {
        x,
        alpha,
        alpha_shifts,
        alpha_zero,
    })
}
