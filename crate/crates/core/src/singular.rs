//! Hardy-Littlewood singular series constants by truncated Euler products.
//!
//! The pair constant is
//!
//! ```text
//! C_{2k} = 2 * prod_{p > 2} p(p-2)/(p-1)^2 * prod_{2 < p | k} (p-1)/(p-2)
//! ```
//!
//! and the tuple generalization for even shifts `2h_1 < ... < 2h_k` is
//!
//! ```text
//! C = prod_p (1 - nu(p)/p) * (1 - 1/p)^(-k-1)
//! ```
//!
//! with `nu(p)` the number of residue classes mod `p` met by
//! `{0, 2h_1, ..., 2h_k}`. Products are truncated at a prime bound `P`; each
//! returned [`SingularValue`] carries a rigorous bound on everything omitted
//! past `P`, derived from `|log factor| <= c/p^2` for the generic factors and
//! `sum_{n > P} 1/n^2 <= 1/P`.
//!
//! All averages sum in fixed ascending order with compensated (Kahan)
//! summation, so results are identical across runs and thread counts.

use crate::correlation::TupleSpec;
use crate::error::{Error, Result};
use crate::sieve::{build_sieve, SieveConfig};

/// A truncated Euler-product value with an explicit truncation error bound:
/// the untruncated constant differs from `value` by at most `tail_bound`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularValue {
    pub value: f64,
    pub tail_bound: f64,
    /// Primes `<= prime_bound` enter the truncated product.
    pub prime_bound: u64,
    /// Set when a fully covered residue class forces the constant to zero
    /// (inadmissible tuple); then `value = 0` and `tail_bound = 0`.
    pub exactly_zero: bool,
}

/// Compensated floating-point accumulator.
#[derive(Debug, Default, Clone, Copy)]
struct KahanSum {
    sum: f64,
    c: f64,
}

impl KahanSum {
    fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum
    }
}

/// Half of the twin prime constant: `prod_{2 < p <= prime_bound} p(p-2)/(p-1)^2`.
///
/// Each factor equals `1 - 1/(p-1)^2`, so the omitted factors past `P`
/// satisfy `|log f_p| <= 2/(p-1)^2`, giving a tail log bound of `2/(P-1)`.
pub fn twin_half_constant(prime_bound: u64) -> Result<SingularValue> {
    if prime_bound < 3 {
        return Err(Error::pre(format!(
            "twin_half_constant requires prime_bound >= 3, got {prime_bound}"
        )));
    }
    let pb = build_sieve(prime_bound, &SieveConfig::default())?;
    let mut value = 1.0f64;
    for p in pb.iter_primes().skip(1) {
        let pm1 = p as f64 - 1.0;
        value *= 1.0 - 1.0 / (pm1 * pm1);
    }
    let tail_log = 2.0 / (prime_bound as f64 - 1.0);
    let tail_bound = value * tail_log.exp_m1();
    Ok(SingularValue {
        value,
        tail_bound,
        prime_bound,
        exactly_zero: false,
    })
}

/// Distinct odd prime divisors of `k`, ascending. Trial division; fine for
/// the desk-scale `k <= 10^9`.
fn odd_prime_factors(mut k: u64) -> Vec<u64> {
    let mut out = Vec::new();
    while k.is_multiple_of(2) {
        k /= 2;
    }
    let mut d = 3u64;
    while d * d <= k {
        if k.is_multiple_of(d) {
            out.push(d);
            while k.is_multiple_of(d) {
                k /= d;
            }
        }
        d += 2;
    }
    if k > 1 {
        out.push(k);
    }
    out
}

/// Multiply the base pair constant `2 * twin_half` by the odd-part correction
/// `prod_{2 < p | k} (p-1)/(p-2)`, factor by factor in ascending order. Both
/// [`pair_constant`] and the Gallagher averages go through this single path,
/// so the multiplicativity relation holds exactly as computed.
fn pair_value_from_base(base: f64, k: u64) -> f64 {
    let mut value = base;
    for p in odd_prime_factors(k) {
        let pf = p as f64;
        value *= (pf - 1.0) / (pf - 2.0);
    }
    value
}

/// The pair constant `C_{2k}`, truncated at `prime_bound`.
pub fn pair_constant(k: u64, prime_bound: u64) -> Result<SingularValue> {
    if k < 1 {
        return Err(Error::pre("pair_constant requires k >= 1"));
    }
    let odd = odd_prime_factors(k);
    let needed = odd.last().copied().unwrap_or(0).max(3);
    if prime_bound < needed {
        return Err(Error::pre(format!(
            "prime_bound = {prime_bound} below required {needed} (largest odd prime factor of k = {k})"
        )));
    }
    let half = twin_half_constant(prime_bound)?;
    let value = pair_value_from_base(2.0 * half.value, k);
    let correction: f64 = odd
        .iter()
        .map(|&p| (p as f64 - 1.0) / (p as f64 - 2.0))
        .product();
    Ok(SingularValue {
        value,
        tail_bound: 2.0 * correction * half.tail_bound,
        prime_bound,
        exactly_zero: false,
    })
}

/// `C_{2k}` for every `k = 1..=k_max`, sharing a single truncated
/// half-product. Entry `k - 1` equals `pair_constant(k, prime_bound)`
/// bit for bit.
pub fn pair_constant_series(k_max: u64, prime_bound: u64) -> Result<Vec<SingularValue>> {
    if k_max < 1 {
        return Err(Error::pre("pair_constant_series requires k_max >= 1"));
    }
    let mut needed = 3u64;
    let mut p = k_max;
    while p >= 3 {
        if p % 2 == 1 && is_prime_u64(p) {
            needed = needed.max(p);
            break;
        }
        p -= 1;
    }
    if prime_bound < needed {
        return Err(Error::pre(format!(
            "prime_bound = {prime_bound} below required {needed} (odd prime factors up to k_max = {k_max})"
        )));
    }
    let half = twin_half_constant(prime_bound)?;
    let base = 2.0 * half.value;
    Ok((1..=k_max)
        .map(|k| {
            let correction: f64 = odd_prime_factors(k)
                .iter()
                .map(|&p| (p as f64 - 1.0) / (p as f64 - 2.0))
                .product();
            SingularValue {
                value: pair_value_from_base(base, k),
                tail_bound: 2.0 * correction * half.tail_bound,
                prime_bound,
                exactly_zero: false,
            }
        })
        .collect())
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

fn largest_prime_factor(mut n: u64) -> u64 {
    let mut largest = 0;
    let mut d = 2u64;
    while d * d <= n {
        while n.is_multiple_of(d) {
            largest = d;
            n /= d;
        }
        d += 1;
    }
    if n > 1 {
        largest = n;
    }
    largest
}

/// Number of residue classes mod `p` met by `{0} ∪ shifts`.
pub fn nu(shifts: &TupleSpec, p: u64) -> Result<u64> {
    if !is_prime_u64(p) {
        return Err(Error::NotPrime(p));
    }
    Ok(nu_unchecked(shifts.shifts(), p))
}

fn nu_unchecked(shifts: &[u64], p: u64) -> u64 {
    let mut residues: Vec<u64> = Vec::with_capacity(shifts.len() + 1);
    residues.push(0);
    residues.extend(shifts.iter().map(|&s| s % p));
    residues.sort_unstable();
    residues.dedup();
    residues.len() as u64
}

/// Shared evaluator for tuple constants with tuple-length parameter `k`
/// (Euler factor exponent `-(k+1)`), truncated at `prime_bound`.
///
/// Separating `k` from the shift set lets degenerate tuples in the k-tuple
/// Gallagher average keep the literal exponent while `nu` is taken on the
/// deduplicated set. Precomputing suffix products of the generic factor
/// makes each evaluation O(pi(max_shift)) instead of O(pi(prime_bound)).
struct TupleProductEngine {
    primes: Vec<u64>,
    /// `suffixes[len - 1][i]` = product over `primes[i..]` of the generic
    /// factor `(1 - (len+1)/p) * (1 - 1/p)^{-(k+1)}` for a deduplicated set
    /// of `len` shifts. Degenerate tuples (len < k) keep the exponent of the
    /// full tuple but meet only `len + 1` residue classes at large p.
    suffixes: Vec<Vec<f64>>,
    k: u64,
    prime_bound: u64,
}

impl TupleProductEngine {
    fn new(k: u64, prime_bound: u64) -> Result<Self> {
        let pb = build_sieve(prime_bound, &SieveConfig::default())?;
        let primes: Vec<u64> = pb.iter_primes().collect();
        let exponent = -((k + 1) as i32);
        let mut suffixes = Vec::with_capacity(k as usize);
        for len in 1..=k {
            let nu_gen = (len + 1) as f64;
            let mut suffix = vec![1.0f64; primes.len() + 1];
            for i in (0..primes.len()).rev() {
                let pf = primes[i] as f64;
                suffix[i] = (1.0 - nu_gen / pf) * (1.0 - 1.0 / pf).powi(exponent) * suffix[i + 1];
            }
            suffixes.push(suffix);
        }
        Ok(TupleProductEngine {
            primes,
            suffixes,
            k,
            prime_bound,
        })
    }

    /// Truncated product for a deduplicated, sorted shift set whose prime
    /// content is covered by `prime_bound`. Returns exactly 0.0 for
    /// inadmissible sets (a covered prime contributes the factor 0).
    fn value(&self, shifts: &[u64]) -> f64 {
        let max_shift = *shifts.last().expect("shift set is never empty");
        let exponent = -((self.k + 1) as i32);
        let split = self.primes.partition_point(|&p| p <= max_shift);
        let mut value = 1.0f64;
        for &p in &self.primes[..split] {
            let pf = p as f64;
            let nu = nu_unchecked(shifts, p) as f64;
            value *= (1.0 - nu / pf) * (1.0 - 1.0 / pf).powi(exponent);
        }
        // For p > max_shift no shift or difference is divisible by p, so
        // {0, shifts...} meets exactly len + 1 residue classes and the
        // factor is generic. Such p always exceed the distinct evens bound
        // 2*len >= len + 1, so the consulted suffix entries are past the
        // small primes where the generic factor degenerates.
        value * self.suffixes[shifts.len() - 1][split]
    }

    /// Bound on `exp(sum_{p > prime_bound} |log f_p|) - 1`, scaled by `value`.
    fn tail_bound(&self, value: f64) -> f64 {
        let kk = (self.k + 1) as f64;
        let boundary = self.prime_bound.max(2 * (self.k + 1));
        let mut tail_log = kk * kk / boundary as f64;
        // Between prime_bound and 2(k+1) the |log f| <= (k+1)^2/p^2 estimate
        // is not valid; add those finitely many factors explicitly.
        for p in (self.prime_bound + 1)..=(2 * (self.k + 1)) {
            if is_prime_u64(p) {
                let pf = p as f64;
                tail_log += ((1.0 - kk / pf).ln() - kk * (1.0 - 1.0 / pf).ln()).abs();
            }
        }
        value.abs() * tail_log.exp_m1()
    }
}

fn check_tuple_preconditions(shifts: &[u64], k: u64, prime_bound: u64) -> Result<()> {
    if prime_bound < k + 1 {
        return Err(Error::pre(format!(
            "prime_bound = {prime_bound} must be at least k + 1 = {}",
            k + 1
        )));
    }
    let mut required = 0u64;
    for (i, &a) in shifts.iter().enumerate() {
        required = required.max(largest_prime_factor(a));
        for &b in &shifts[..i] {
            required = required.max(largest_prime_factor(a - b));
        }
    }
    if prime_bound < required {
        return Err(Error::pre(format!(
            "prime_bound = {prime_bound} below prime {required} dividing a shift or shift difference"
        )));
    }
    Ok(())
}

/// The k-tuple constant for the given shifts, truncated at `prime_bound`.
///
/// When some prime `p <= k + 1` has `nu(p) = p` the tuple is inadmissible and
/// the result is exactly zero.
pub fn tuple_constant(shifts: &TupleSpec, prime_bound: u64) -> Result<SingularValue> {
    let k = shifts.len() as u64;
    check_tuple_preconditions(shifts.shifts(), k, prime_bound)?;

    // Coverage is impossible for p > k + 1 since nu <= k + 1 < p.
    let covered = (2..=k + 1)
        .filter(|&p| is_prime_u64(p))
        .any(|p| nu_unchecked(shifts.shifts(), p) == p);
    if covered {
        return Ok(SingularValue {
            value: 0.0,
            tail_bound: 0.0,
            prime_bound,
            exactly_zero: true,
        });
    }

    let engine = TupleProductEngine::new(k, prime_bound)?;
    let value = engine.value(shifts.shifts());
    let tail_bound = engine.tail_bound(value);
    Ok(SingularValue {
        value,
        tail_bound,
        prime_bound,
        exactly_zero: false,
    })
}

/// `(2/y) * sum_{2k <= y} C_{2k}`, which tends to 2 as `y` grows.
pub fn gallagher_average(y: u64, prime_bound: u64) -> Result<f64> {
    if y < 2 || !y.is_multiple_of(2) {
        return Err(Error::pre(format!("y = {y} must be an even number >= 2")));
    }
    let half = twin_half_constant(prime_bound)?;
    let base = 2.0 * half.value;
    let mut sum = KahanSum::default();
    for k in 1..=y / 2 {
        sum.add(pair_value_from_base(base, k));
    }
    Ok(2.0 / y as f64 * sum.value())
}

/// The triangular-weighted singular average
/// `(1/floor(E)^2) * sum_{1 <= k <= E} (floor(E) - k) C_{2k}`, tending to 1.
pub fn weighted_singular_average(e: f64, prime_bound: u64) -> Result<f64> {
    if !e.is_finite() || e < 1.0 {
        return Err(Error::pre(format!("E = {e} must be a finite real >= 1")));
    }
    let floor_e = e.floor();
    let half = twin_half_constant(prime_bound)?;
    let base = 2.0 * half.value;
    let mut sum = KahanSum::default();
    for k in 1..=floor_e as u64 {
        sum.add((floor_e - k as f64) * pair_value_from_base(base, k));
    }
    Ok(sum.value() / (floor_e * floor_e))
}

/// `(2^k / y^k) * sum over ordered tuples (2h_1, ..., 2h_k), 2h_i <= y` of
/// the tuple constant, which tends to `2^k`. Desk scale: `k` in `{1, 2}`.
///
/// A degenerate tuple (repeated shifts) is evaluated on its deduplicated set
/// while the Euler factor keeps the exponent `-(k+1)` of the full tuple.
pub fn ktuple_gallagher_average(y: u64, k: u64, prime_bound: u64) -> Result<f64> {
    if k == 0 || k > 2 {
        return Err(Error::UnsupportedK(k, "tuple averages support k in {1, 2}"));
    }
    if y < 2 || !y.is_multiple_of(2) {
        return Err(Error::pre(format!("y = {y} must be an even number >= 2")));
    }
    if prime_bound < (k + 1).max(y / 2) {
        return Err(Error::pre(format!(
            "prime_bound = {prime_bound} must cover max(k + 1, y/2) = {}",
            (k + 1).max(y / 2)
        )));
    }
    let engine = TupleProductEngine::new(k, prime_bound)?;
    let h_max = y / 2;
    let mut sum = KahanSum::default();
    match k {
        1 => {
            for h in 1..=h_max {
                sum.add(engine.value(&[2 * h]));
            }
            Ok(2.0 / y as f64 * sum.value())
        }
        2 => {
            // Values depend only on the deduplicated sorted set; cache them
            // while still reducing in fixed (h1, h2) order.
            let mut single = vec![f64::NAN; h_max as usize + 1];
            let mut pair = std::collections::HashMap::new();
            for h1 in 1..=h_max {
                for h2 in 1..=h_max {
                    let v = if h1 == h2 {
                        let slot = &mut single[h1 as usize];
                        if slot.is_nan() {
                            *slot = engine.value(&[2 * h1]);
                        }
                        *slot
                    } else {
                        let key = (h1.min(h2), h1.max(h2));
                        *pair
                            .entry(key)
                            .or_insert_with(|| engine.value(&[2 * key.0, 2 * key.1]))
                    };
                    sum.add(v);
                }
            }
            let yf = y as f64;
            Ok(4.0 / (yf * yf) * sum.value())
        }
        _ => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent direct-product oracle: literal formula, ascending primes
    /// by trial division, no shared code with the engine.
    fn oracle_tuple_product(shifts: &[u64], k: u64, prime_bound: u64) -> f64 {
        let mut value = 1.0f64;
        for p in 2..=prime_bound {
            if !is_prime_u64(p) {
                continue;
            }
            let mut residues: Vec<u64> = std::iter::once(0)
                .chain(shifts.iter().map(|&s| s % p))
                .collect();
            residues.sort_unstable();
            residues.dedup();
            let nu = residues.len() as f64;
            let pf = p as f64;
            value *= (1.0 - nu / pf) / (1.0 - 1.0 / pf).powi((k + 1) as i32);
        }
        value
    }

    const TWIN_HALF: f64 = 0.660_161_815_846_869_6;

    #[test]
    fn twin_half_single_factor() {
        let v = twin_half_constant(3).unwrap();
        assert_eq!(v.value, 0.75);
        assert!(v.tail_bound > 0.0);
        assert!(matches!(twin_half_constant(2), Err(Error::Precondition(_))));
    }

    #[test]
    fn twin_half_near_limit() {
        let v = twin_half_constant(100_000).unwrap();
        assert!(
            (v.value - TWIN_HALF).abs() < v.tail_bound,
            "value {} vs known constant, tail {}",
            v.value,
            v.tail_bound
        );
        assert!(v.tail_bound < 2e-5);
    }

    #[test]
    fn pair_constant_multiplicativity() {
        let p = 10_000;
        let c2 = pair_constant(1, p).unwrap();
        let c4 = pair_constant(2, p).unwrap();
        let c6 = pair_constant(3, p).unwrap();
        assert_eq!(c4.value, c2.value, "odd part of k = 2 is 1");
        assert_eq!(c6.value, 2.0 * c2.value, "factor (3-1)/(3-2) = 2");
        assert_eq!(c6.value / c2.value, 2.0);

        // k = 15: factors 3 and 5 applied in ascending order.
        let c30 = pair_constant(15, p).unwrap();
        assert_eq!(c30.value, c2.value * (2.0 / 1.0) * (4.0 / 3.0));
    }

    #[test]
    fn pair_constant_value() {
        let c2 = pair_constant(1, 100_000).unwrap();
        assert!((c2.value - 2.0 * TWIN_HALF).abs() < 1e-4);
    }

    #[test]
    fn series_matches_individual_constants() {
        let p = 10_000;
        let series = pair_constant_series(20, p).unwrap();
        assert_eq!(series.len(), 20);
        for (i, entry) in series.iter().enumerate() {
            let one = pair_constant(i as u64 + 1, p).unwrap();
            assert_eq!(entry.value, one.value, "k = {}", i + 1);
            assert_eq!(entry.tail_bound, one.tail_bound, "k = {}", i + 1);
        }
        assert!(matches!(
            pair_constant_series(19, 17),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn pair_constant_preconditions() {
        assert!(matches!(pair_constant(0, 100), Err(Error::Precondition(_))));
        assert!(matches!(pair_constant(5, 3), Err(Error::Precondition(_))));
        assert!(pair_constant(5, 5).is_ok());
        assert!(pair_constant(6, 3).is_ok());
    }

    #[test]
    fn nu_examples() {
        let s24 = TupleSpec::new(vec![2, 4]).unwrap();
        let s26 = TupleSpec::new(vec![2, 6]).unwrap();
        let s2 = TupleSpec::new(vec![2]).unwrap();
        assert_eq!(nu(&s24, 3).unwrap(), 3);
        assert_eq!(nu(&s26, 3).unwrap(), 2);
        assert_eq!(nu(&s2, 2).unwrap(), 1);
        assert!(matches!(nu(&s2, 4), Err(Error::NotPrime(4))));
    }

    #[test]
    fn tuple_constant_inadmissible() {
        let spec = TupleSpec::new(vec![2, 4]).unwrap();
        let v = tuple_constant(&spec, 1_000).unwrap();
        assert!(v.exactly_zero);
        assert_eq!(v.value, 0.0);
        assert_eq!(v.tail_bound, 0.0);
    }

    #[test]
    fn tuple_constant_k1_consistency() {
        let spec = TupleSpec::new(vec![2]).unwrap();
        let t = tuple_constant(&spec, 10_000).unwrap();
        let c2 = pair_constant(1, 10_000).unwrap();
        assert!(
            (t.value - c2.value).abs() <= t.tail_bound + c2.tail_bound,
            "{} vs {}",
            t.value,
            c2.value
        );
        assert!((t.value - c2.value).abs() < 1e-9, "same truncation, tiny rounding gap");
    }

    #[test]
    fn tuple_constant_2_6() {
        let spec = TupleSpec::new(vec![2, 6]).unwrap();
        let v = tuple_constant(&spec, 100_000).unwrap();
        assert!((v.value - 2.858_248_6).abs() < 5e-4, "value {}", v.value);
        assert!(!v.exactly_zero);
        let oracle = oracle_tuple_product(&[2, 6], 2, 10_000);
        let engine_val = tuple_constant(&spec, 10_000).unwrap().value;
        assert!((engine_val - oracle).abs() < 1e-9 * oracle.abs());
    }

    #[test]
    fn tuple_constant_preconditions() {
        let spec = TupleSpec::new(vec![2, 14]).unwrap();
        // 7 divides shift 14; bound 5 is too small.
        assert!(matches!(tuple_constant(&spec, 5), Err(Error::Precondition(_))));
        assert!(tuple_constant(&spec, 7).is_ok());
        let spec = TupleSpec::new(vec![2, 6]).unwrap();
        assert!(matches!(tuple_constant(&spec, 2), Err(Error::Precondition(_))));
    }

    #[test]
    fn tail_honesty() {
        for shifts in [vec![2], vec![2, 6], vec![4, 10]] {
            let spec = TupleSpec::new(shifts).unwrap();
            let coarse = tuple_constant(&spec, 10_000).unwrap();
            let fine = tuple_constant(&spec, 100_000).unwrap();
            assert!(
                (coarse.value - fine.value).abs() <= coarse.tail_bound,
                "shifts {}: coarse {} fine {} tail {}",
                spec,
                coarse.value,
                fine.value,
                coarse.tail_bound
            );
        }
    }

    #[test]
    fn gallagher_small_values() {
        let p = 10_000;
        let g2 = gallagher_average(2, p).unwrap();
        let c2 = pair_constant(1, p).unwrap();
        assert_eq!(g2, c2.value);

        let g6 = gallagher_average(6, p).unwrap();
        assert!((g6 - 2.0 / 6.0 * (4.0 * c2.value)).abs() < 1e-12);
        assert!((g6 - 1.7604).abs() < 1e-3);

        assert!(matches!(gallagher_average(5, p), Err(Error::Precondition(_))));
        assert!(matches!(gallagher_average(0, p), Err(Error::Precondition(_))));
    }

    #[test]
    fn weighted_small_values() {
        let p = 10_000;
        let c2 = pair_constant(1, p).unwrap();
        let w3 = weighted_singular_average(3.0, p).unwrap();
        assert!((w3 - c2.value / 3.0).abs() < 1e-12, "w3 = {w3}");

        assert_eq!(weighted_singular_average(1.0, p).unwrap(), 0.0);
        assert_eq!(weighted_singular_average(1.9, p).unwrap(), 0.0);
        assert!(matches!(
            weighted_singular_average(0.5, p),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn ktuple_reduces_to_pairs_at_k1() {
        let p = 10_000;
        let a = ktuple_gallagher_average(2, 1, p).unwrap();
        let b = gallagher_average(2, p).unwrap();
        assert!((a - b).abs() < 1e-10 * b.abs(), "{a} vs {b}");

        let a = ktuple_gallagher_average(20, 1, p).unwrap();
        let b = gallagher_average(20, p).unwrap();
        assert!((a - b).abs() < 1e-10 * b.abs(), "{a} vs {b}");
    }

    #[test]
    fn ktuple_single_term() {
        // y = 2, k = 2: only the tuple (2, 2); nu on {2}, exponent stays 3.
        let p = 1_000;
        let avg = ktuple_gallagher_average(2, 2, p).unwrap();
        let expected = oracle_tuple_product(&[2], 2, p);
        assert!((avg - expected).abs() < 1e-9 * expected.abs(), "{avg} vs {expected}");
    }

    #[test]
    fn ktuple_dedup_interpretation() {
        // y = 6, k = 2: ordered tuples over h in {1,2,3}; diagonal entries
        // use the deduplicated set with the k = 2 exponent.
        let p = 1_000;
        let avg = ktuple_gallagher_average(6, 2, p).unwrap();
        let mut sum = 0.0;
        for h1 in 1u64..=3 {
            for h2 in 1u64..=3 {
                let mut set = vec![2 * h1, 2 * h2];
                set.sort_unstable();
                set.dedup();
                sum += oracle_tuple_product(&set, 2, p);
            }
        }
        let expected = 4.0 / 36.0 * sum;
        assert!((avg - expected).abs() < 1e-9 * expected.abs(), "{avg} vs {expected}");
    }

    #[test]
    fn ktuple_pair_average_trends_to_four() {
        let p = 10_000;
        let near = ktuple_gallagher_average(200, 2, p).unwrap();
        let far = ktuple_gallagher_average(400, 2, p).unwrap();
        assert!(
            (far - 4.0).abs() < (near - 4.0).abs(),
            "y = 400 gives {far}, y = 200 gives {near}"
        );
        assert!(near > 3.0 && near < 5.0, "value {near}");
    }

    #[test]
    fn ktuple_rejects_unsupported_k() {
        assert!(matches!(
            ktuple_gallagher_average(4, 3, 1_000),
            Err(Error::UnsupportedK(3, _))
        ));
        assert!(matches!(
            ktuple_gallagher_average(3, 2, 1_000),
            Err(Error::Precondition(_))
        ));
    }
}
