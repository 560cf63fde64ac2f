//! Exact arithmetic on positive integers held as sparse prime-exponent vectors.
//!
//! Products of walk steps grow exponentially, so nothing here ever rebuilds a
//! large integer: multiplication, LCM and GCD act coordinatewise on exponents
//! and sizes are measured through `log_value`.

use std::fmt;
use std::sync::OnceLock;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Upper bound of the cached trial-division table. Every `n < 2^32` is fully
/// factored by these primes alone.
const SMALL_PRIME_LIMIT: u64 = 1 << 16;

/// Cofactors at least this large get a primality check before trial division
/// continues.
const PRIMALITY_SHORTCUT: u64 = 1 << 24;

struct SmallPrimes {
    primes: Vec<u64>,
}

fn small_primes() -> &'static [u64] {
    static TABLE: OnceLock<SmallPrimes> = OnceLock::new();
    &TABLE
        .get_or_init(|| SmallPrimes {
            primes: sieve_primes(SMALL_PRIME_LIMIT),
        })
        .primes
}

/// All primes in `[2, limit]`, ascending (sieve of Eratosthenes over odd numbers).
pub fn sieve_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let limit = usize::try_from(limit).expect("sieve limit exceeds address space");
    // index i stands for 2i + 1
    let half = limit / 2 + 1;
    let mut composite = vec![false; half];
    let mut i = 1;
    while (2 * i + 1) * (2 * i + 1) <= limit {
        if !composite[i] {
            let p = 2 * i + 1;
            let mut j = p * p / 2;
            while j < half {
                composite[j] = true;
                j += p;
            }
        }
        i += 1;
    }
    let mut primes = Vec::with_capacity(if limit > 10 { limit / 8 } else { 4 });
    primes.push(2);
    primes.extend(
        (1..half)
            .filter(|&i| !composite[i] && 2 * i < limit)
            .map(|i| (2 * i + 1) as u64),
    );
    primes
}

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for the full `u64` range.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &[2u64, 325, 9375, 28178, 450775, 9780504, 1795265022] {
        let a = a % n;
        if a == 0 {
            continue;
        }
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Brent's variant of Pollard rho; `n` must be odd and composite.
fn pollard_brent(n: u64) -> u64 {
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut g, mut q) = (2u64, 2u64, 1u64, 1u64);
        let mut ys = y;
        let mut r = 1u64;
        const BATCH: u64 = 64;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..BATCH.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd_u64(q, n);
                k += BATCH;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd_u64(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
        c += 1;
    }
}

fn split_large(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let d = pollard_brent(n);
    split_large(d, out);
    split_large(n / d, out);
}

/// Factor `n` into `out` as ascending `(prime, exponent)` pairs, reusing the
/// buffer. This is the allocation-free path used by the walk engine.
pub fn factorize_into(n: u64, out: &mut Vec<(u64, u64)>) -> Result<()> {
    out.clear();
    if n == 0 {
        return Err(Error::ZeroHasNoFactorization);
    }
    let mut rest = n;
    let tz = rest.trailing_zeros();
    if tz > 0 {
        out.push((2, tz as u64));
        rest >>= tz;
    }
    let table = small_primes();
    for (idx, &p) in table.iter().enumerate().skip(1) {
        if p * p > rest {
            if rest > 1 {
                out.push((rest, 1));
            }
            return Ok(());
        }
        if rest % p == 0 {
            let mut e = 0;
            while rest % p == 0 {
                rest /= p;
                e += 1;
            }
            out.push((p, e));
        }
        if idx == 25 && rest >= PRIMALITY_SHORTCUT && is_prime(rest) {
            out.push((rest, 1));
            return Ok(());
        }
    }
    if rest > 1 {
        // every remaining prime factor exceeds the table
        let mut big = Vec::new();
        split_large(rest, &mut big);
        big.sort_unstable();
        for p in big {
            match out.last_mut() {
                Some((q, e)) if *q == p => *e += 1,
                _ => out.push((p, 1)),
            }
        }
    }
    Ok(())
}

/// A positive integer `∏ p^e` stored as its ascending list of prime powers.
///
/// The empty vector is the integer 1. Keys are always prime and exponents are
/// always at least 1.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PrimeExponentVector {
    entries: Vec<(u64, u64)>,
}

impl PrimeExponentVector {
    /// The integer 1.
    pub fn one() -> Self {
        Self::default()
    }

    /// Builds a vector from arbitrary `(prime, exponent)` pairs. Repeated
    /// primes are summed and zero exponents dropped.
    pub fn from_pairs<I: IntoIterator<Item = (u64, u64)>>(pairs: I) -> Result<Self> {
        let mut entries: Vec<(u64, u64)> = Vec::new();
        for (p, e) in pairs {
            if !is_prime(p) {
                return Err(Error::NotPrime(p));
            }
            if e > 0 {
                entries.push((p, e));
            }
        }
        entries.sort_unstable_by_key(|&(p, _)| p);
        let mut merged: Vec<(u64, u64)> = Vec::with_capacity(entries.len());
        for (p, e) in entries {
            match merged.last_mut() {
                Some((q, f)) if *q == p => {
                    *f = f.checked_add(e).ok_or(Error::ExponentOverflow { prime: p })?;
                }
                _ => merged.push((p, e)),
            }
        }
        Ok(Self { entries: merged })
    }

    /// Caller guarantees ascending primes with nonzero exponents.
    pub(crate) fn from_sorted_unchecked(entries: Vec<(u64, u64)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(entries.iter().all(|&(_, e)| e > 0));
        Self { entries }
    }

    pub fn factorize(n: u64) -> Result<Self> {
        let mut entries = Vec::new();
        factorize_into(n, &mut entries)?;
        Ok(Self { entries })
    }

    /// The exponent of `p`, zero when absent. Rejects non-prime `p`.
    pub fn multiplicity(&self, p: u64) -> Result<u64> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(self.exponent(p))
    }

    /// Exponent lookup without the primality check.
    pub fn exponent(&self, p: u64) -> u64 {
        self.entries
            .binary_search_by_key(&p, |&(q, _)| q)
            .map(|i| self.entries[i].1)
            .unwrap_or(0)
    }

    pub fn entries(&self) -> &[(u64, u64)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn is_one(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Exponent-wise sum, i.e. the integer product.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        merge_with(&self.entries, &other.entries, |a, b| match (a, b) {
            (Some((p, e)), Some((_, f))) => e
                .checked_add(f)
                .map(|s| out.push((p, s)))
                .ok_or(Error::ExponentOverflow { prime: p }),
            (Some(x), None) | (None, Some(x)) => {
                out.push(x);
                Ok(())
            }
            (None, None) => Ok(()),
        })?;
        Ok(Self { entries: out })
    }

    /// Natural logarithm of the represented integer.
    pub fn log_value(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(p, e)| e as f64 * (p as f64).ln())
            .sum()
    }

    /// The integer itself, when it fits in 64 bits.
    pub fn to_u64(&self) -> Option<u64> {
        let mut acc: u64 = 1;
        for &(p, e) in &self.entries {
            let e = u32::try_from(e).ok()?;
            acc = acc.checked_mul(p.checked_pow(e)?)?;
        }
        Some(acc)
    }

    /// Whether `self` divides `n`.
    pub fn divides(&self, n: u64) -> bool {
        match self.to_u64() {
            Some(d) => n % d == 0,
            None => false,
        }
    }

    fn combine(vs: &[Self], pick: fn(u64, u64) -> u64, keep_missing: bool) -> Self {
        let mut acc = vs[0].entries.clone();
        for v in &vs[1..] {
            let mut out = Vec::with_capacity(acc.len().max(v.entries.len()));
            let _ = merge_with(&acc, &v.entries, |a, b| {
                match (a, b) {
                    (Some((p, e)), Some((_, f))) => out.push((p, pick(e, f))),
                    (Some(x), None) | (None, Some(x)) if keep_missing => out.push(x),
                    _ => {}
                }
                Ok(())
            });
            acc = out;
        }
        Self { entries: acc }
    }
}

/// Walks two ascending entry lists in lockstep, pairing equal primes.
fn merge_with<F>(a: &[(u64, u64)], b: &[(u64, u64)], mut f: F) -> Result<()>
where
    F: FnMut(Option<(u64, u64)>, Option<(u64, u64)>) -> Result<()>,
{
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) if x.0 == y.0 => {
                f(Some(x), Some(y))?;
                i += 1;
                j += 1;
            }
            (Some(&x), Some(&y)) if x.0 < y.0 => {
                f(Some(x), None)?;
                i += 1;
            }
            (Some(_), Some(&y)) => {
                f(None, Some(y))?;
                j += 1;
            }
            (Some(&x), None) => {
                f(Some(x), None)?;
                i += 1;
            }
            (None, Some(&y)) => {
                f(None, Some(y))?;
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    Ok(())
}

/// Least common multiple: exponent-wise maximum.
pub fn lcm_of(vs: &[PrimeExponentVector]) -> Result<PrimeExponentVector> {
    if vs.is_empty() {
        return Err(Error::EmptyInput("lcm"));
    }
    Ok(PrimeExponentVector::combine(vs, u64::max, true))
}

/// Greatest common divisor: exponent-wise minimum, absent primes count as 0.
pub fn gcd_of(vs: &[PrimeExponentVector]) -> Result<PrimeExponentVector> {
    if vs.is_empty() {
        return Err(Error::EmptyInput("gcd"));
    }
    Ok(PrimeExponentVector::combine(vs, u64::min, false))
}

impl fmt::Display for PrimeExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return f.write_str("1");
        }
        for (i, &(p, e)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            if e == 1 {
                write!(f, "{p}")?;
            } else {
                write!(f, "{p}^{e}")?;
            }
        }
        Ok(())
    }
}

impl Serialize for PrimeExponentVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.entries.len()))?;
        for (p, e) in &self.entries {
            map.serialize_entry(&p.to_string(), e)?;
        }
        map.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pev(pairs: &[(u64, u64)]) -> PrimeExponentVector {
        PrimeExponentVector::from_pairs(pairs.iter().copied()).unwrap()
    }

    #[test]
    fn sieve_small_limits() {
        assert!(sieve_primes(0).is_empty());
        assert!(sieve_primes(1).is_empty());
        assert_eq!(sieve_primes(2), vec![2]);
        assert_eq!(sieve_primes(10), vec![2, 3, 5, 7]);
        assert_eq!(sieve_primes(30), vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert_eq!(sieve_primes(1_000_000).len(), 78_498);
    }

    #[test]
    fn factorize_examples() {
        assert!(PrimeExponentVector::factorize(1).unwrap().is_one());
        assert_eq!(
            PrimeExponentVector::factorize(360).unwrap(),
            pev(&[(2, 3), (3, 2), (5, 1)])
        );
        assert_eq!(PrimeExponentVector::factorize(97).unwrap(), pev(&[(97, 1)]));
        assert_eq!(
            PrimeExponentVector::factorize(0),
            Err(Error::ZeroHasNoFactorization)
        );
    }

    #[test]
    fn factorize_large_values() {
        let m61 = (1u64 << 61) - 1;
        assert_eq!(PrimeExponentVector::factorize(m61).unwrap(), pev(&[(m61, 1)]));
        // two primes just above the small table
        let (p, q) = (4_294_967_291u64, 65_537u64);
        assert_eq!(
            PrimeExponentVector::factorize(p * q).unwrap(),
            pev(&[(q, 1), (p, 1)])
        );
        let (a, b) = (3_037_000_493u64, 3_037_000_453u64);
        assert_eq!(
            PrimeExponentVector::factorize(a * b).unwrap(),
            pev(&[(b, 1), (a, 1)])
        );
        let v = PrimeExponentVector::factorize(u64::MAX).unwrap();
        assert_eq!(v.to_u64(), Some(u64::MAX));
    }

    #[test]
    fn multiplicity_lookup() {
        let v = pev(&[(2, 3), (5, 1)]);
        assert_eq!(v.multiplicity(2), Ok(3));
        assert_eq!(v.multiplicity(3), Ok(0));
        assert_eq!(v.multiplicity(4), Err(Error::NotPrime(4)));
        assert_eq!(PrimeExponentVector::factorize(12).unwrap().multiplicity(2), Ok(2));
    }

    #[test]
    fn from_pairs_rejects_composites() {
        assert_eq!(PrimeExponentVector::from_pairs([(6, 1)]), Err(Error::NotPrime(6)));
        assert_eq!(pev(&[(3, 1), (2, 0), (3, 2)]), pev(&[(3, 3)]));
    }

    #[test]
    fn multiply_examples() {
        let f = |n| PrimeExponentVector::factorize(n).unwrap();
        assert_eq!(pev(&[(2, 1)]).multiply(&pev(&[(2, 1), (3, 1)])).unwrap(), f(12));
        let v = f(360);
        assert_eq!(PrimeExponentVector::one().multiply(&v).unwrap(), v);
        assert_eq!(f(4).multiply(&f(9)).unwrap(), f(36));
        let big = pev(&[(2, u64::MAX)]);
        assert_eq!(big.multiply(&f(2)), Err(Error::ExponentOverflow { prime: 2 }));
    }

    #[test]
    fn lcm_and_gcd_examples() {
        let f = |n| PrimeExponentVector::factorize(n).unwrap();
        assert_eq!(lcm_of(&[f(4), f(6), f(9)]).unwrap(), f(36));
        assert_eq!(lcm_of(&[f(360)]).unwrap(), f(360));
        assert_eq!(lcm_of(&[]), Err(Error::EmptyInput("lcm")));
        assert_eq!(gcd_of(&[f(4), f(6)]).unwrap(), f(2));
        assert!(gcd_of(&[f(9), f(8)]).unwrap().is_one());
        assert_eq!(gcd_of(&[f(360), f(360)]).unwrap(), f(360));
        assert_eq!(gcd_of(&[]), Err(Error::EmptyInput("gcd")));
    }

    #[test]
    fn lcm_matches_brute_force_multiple_search() {
        // smallest common multiple found by stepping through multiples of 12
        let brute = (1..).map(|k| 12 * k).find(|m| m % 8 == 0).unwrap();
        assert_eq!(brute, 24);
        let f = |n| PrimeExponentVector::factorize(n).unwrap();
        assert_eq!(lcm_of(&[f(8), f(12)]).unwrap().to_u64(), Some(brute));
    }

    #[test]
    fn log_value_examples() {
        assert_eq!(PrimeExponentVector::one().log_value(), 0.0);
        let l8 = PrimeExponentVector::factorize(8).unwrap().log_value();
        assert!((l8 - 8f64.ln()).abs() < 1e-12 * 8f64.ln());
        assert!((l8 - 2.0794415).abs() < 1e-7);
        let l360 = PrimeExponentVector::factorize(360).unwrap().log_value();
        assert!((l360 - 360f64.ln()).abs() < 1e-12 * 360f64.ln());
        assert!((l360 - 5.8861040).abs() < 1e-7);
    }

    #[test]
    fn round_trip_first_million() {
        let mut buf = Vec::new();
        for n in 1..=1_000_000u64 {
            factorize_into(n, &mut buf).unwrap();
            let v = PrimeExponentVector::from_sorted_unchecked(buf.clone());
            assert_eq!(v.to_u64(), Some(n));
        }
    }

    #[test]
    fn is_prime_agrees_with_sieve() {
        let primes = sieve_primes(100_000);
        let mut it = primes.iter().peekable();
        for n in 0..=100_000u64 {
            let expected = it.peek().is_some_and(|&&p| p == n);
            if expected {
                it.next();
            }
            assert_eq!(is_prime(n), expected, "n = {n}");
        }
    }

    #[test]
    fn display_form() {
        assert_eq!(PrimeExponentVector::one().to_string(), "1");
        assert_eq!(
            PrimeExponentVector::factorize(360).unwrap().to_string(),
            "2^3*3^2*5"
        );
    }
}
