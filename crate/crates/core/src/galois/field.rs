//! Prime-field arithmetic over `Z_q` for primes `q < 2^31`.

use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::FieldError;

/// Largest admissible modulus (exclusive). Products of two residues fit in a `u64`.
pub const MODULUS_LIMIT: u64 = 1 << 31;

/// A prime modulus `q` together with its bit length `⌈log₂ q⌉`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Modulus {
    q: u64,
    bits: u32,
}

/// A residue in `[0, q)`.
///
/// The element does not carry its modulus; every arithmetic operation goes
/// through a [`Modulus`], which keeps matrices compact.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FieldElement(pub(super) u64);

/// Counts field multiplications routed through it.
///
/// A counter belongs to one session. It only ever grows.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MulCounter {
    count: u64,
}

impl MulCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    fn tick(&mut self) {
        self.count += 1;
    }
}

/// Deterministic primality test; trial division is exact and fast below 2^31.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n % 2 == 0 || n % 3 == 0 {
        return false;
    }
    let mut d = 5;
    while d * d <= n {
        if n % d == 0 || n % (d + 2) == 0 {
            return false;
        }
        d += 6;
    }
    true
}

/// Distinct prime factors of `n`, ascending.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

impl Modulus {
    pub fn new(q: u64) -> Result<Self, FieldError> {
        if q >= MODULUS_LIMIT {
            return Err(FieldError::ModulusTooLarge(q));
        }
        if !is_prime(q) {
            return Err(FieldError::NotPrime(q));
        }
        let bits = 64 - (q - 1).leading_zeros();
        Ok(Self { q, bits: bits.max(1) })
    }

    pub fn value(&self) -> u64 {
        self.q
    }

    /// `⌈log₂ q⌉`, the number of bits needed for one residue.
    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Bytes per element on the wire: `⌈bits / 8⌉`.
    pub fn byte_width(&self) -> usize {
        self.bits.div_ceil(8) as usize
    }

    /// Reduces an arbitrary integer into the field.
    pub fn elem(&self, v: u64) -> FieldElement {
        FieldElement(v % self.q)
    }

    /// Accepts `v` only if it is already a reduced residue.
    pub fn checked_elem(&self, v: u64) -> Result<FieldElement, FieldError> {
        if v < self.q {
            Ok(FieldElement(v))
        } else {
            Err(FieldError::OutOfRange { value: v, q: self.q })
        }
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement(0)
    }

    pub fn one(&self) -> FieldElement {
        FieldElement(1)
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let s = a.0 + b.0;
        FieldElement(if s >= self.q { s - self.q } else { s })
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(if a.0 >= b.0 { a.0 - b.0 } else { a.0 + self.q - b.0 })
    }

    pub fn neg(&self, a: FieldElement) -> FieldElement {
        self.sub(FieldElement(0), a)
    }

    /// Uncounted multiplication, for authority-side and oracle computations.
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(a.0 * b.0 % self.q)
    }

    /// Multiplication that is charged to `counter`.
    pub fn mul_counted(&self, a: FieldElement, b: FieldElement, counter: &mut MulCounter) -> FieldElement {
        counter.tick();
        self.mul(a, b)
    }

    /// Square-and-multiply exponentiation; `a^0 = 1`.
    pub fn pow(&self, a: FieldElement, mut e: u64) -> FieldElement {
        let mut base = a;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse by the extended Euclidean algorithm.
    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        if a.0 == 0 {
            return Err(FieldError::ZeroInverse);
        }
        let (mut r0, mut r1) = (self.q as i64, a.0 as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let quot = r0 / r1;
            (r0, r1) = (r1, r0 - quot * r1);
            (t0, t1) = (t1, t0 - quot * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(FieldElement(t0.rem_euclid(self.q as i64) as u64))
    }

    /// Multiplicative order of a nonzero element.
    pub fn order(&self, a: FieldElement) -> Result<u64, FieldError> {
        if a.0 == 0 {
            return Err(FieldError::ZeroInverse);
        }
        let mut ord = self.q - 1;
        for p in prime_factors(self.q - 1) {
            while ord % p == 0 && self.pow(a, ord / p) == self.one() {
                ord /= p;
            }
        }
        Ok(ord)
    }

    /// Smallest generator of the multiplicative group.
    pub fn smallest_primitive_root(&self) -> FieldElement {
        if self.q == 2 {
            return self.one();
        }
        let factors = prime_factors(self.q - 1);
        (2..self.q)
            .map(FieldElement)
            .find(|&g| factors.iter().all(|&p| self.pow(g, (self.q - 1) / p) != self.one()))
            .expect("every prime field has a primitive root")
    }

    /// Uniform sample over `[0, q)`, or `[1, q)` when `exclude_zero` is set.
    ///
    /// Draws 64-bit words and rejects those above the largest multiple of the
    /// range, so the result carries no modulo bias.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R, exclude_zero: bool) -> FieldElement {
        let (range, offset) = if exclude_zero { (self.q - 1, 1) } else { (self.q, 0) };
        let zone = u64::MAX - (u64::MAX % range + 1) % range;
        loop {
            let x = rng.next_u64();
            if x <= zone {
                return FieldElement(x % range + offset);
            }
        }
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.q)
    }
}

impl FieldElement {
    pub fn value(self) -> u64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for FieldElement {
    type Err = std::num::ParseIntError;

    /// Parses a decimal string. Reduction against a modulus is the caller's job.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse::<u64>().map(FieldElement)
    }
}

// Field elements travel as decimal strings in every JSON document.
impl Serialize for FieldElement {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for FieldElement {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;

    fn m(q: u64) -> Modulus {
        Modulus::new(q).unwrap()
    }

    #[test]
    fn modulus_rejects_composites_and_large_values() {
        assert_eq!(Modulus::new(15), Err(FieldError::NotPrime(15)));
        assert_eq!(Modulus::new(1), Err(FieldError::NotPrime(1)));
        assert_eq!(Modulus::new(1 << 31), Err(FieldError::ModulusTooLarge(1 << 31)));
        assert!(Modulus::new(2_147_483_647).is_ok());
    }

    #[test]
    fn bit_lengths() {
        assert_eq!(m(2).bits(), 1);
        assert_eq!(m(13).bits(), 4);
        assert_eq!(m(251).bits(), 8);
        assert_eq!(m(257).bits(), 9);
        assert_eq!(m(65537).bits(), 17);
        assert_eq!(m(65537).byte_width(), 3);
        assert_eq!(m(251).byte_width(), 1);
    }

    #[test]
    fn counted_multiplication() {
        let mut c = MulCounter::new();
        let f = m(7);
        assert_eq!(f.mul_counted(f.elem(3), f.elem(5), &mut c), f.elem(1));
        assert_eq!(c.count(), 1);
        let f = m(13);
        assert_eq!(f.mul_counted(f.elem(6), f.elem(11), &mut c), f.elem(1));
        assert_eq!(f.mul_counted(f.zero(), f.elem(9), &mut c), f.zero());
        assert_eq!(c.count(), 3);
    }

    #[test]
    fn inverses() {
        assert_eq!(m(7).inv(FieldElement(3)), Ok(FieldElement(5)));
        assert_eq!(m(13).inv(FieldElement(2)), Ok(FieldElement(7)));
        assert_eq!(m(65537).inv(FieldElement(1)), Ok(FieldElement(1)));
        assert_eq!(m(13).inv(FieldElement(0)), Err(FieldError::ZeroInverse));
    }

    #[test]
    fn powers() {
        assert_eq!(m(1009).pow(FieldElement(2), 10), FieldElement(15));
        assert_eq!(m(13).pow(FieldElement(2), 12), FieldElement(1));
        assert_eq!(m(13).pow(FieldElement(9), 0), FieldElement(1));
        assert_eq!(m(13).pow(FieldElement(0), 0), FieldElement(1));
    }

    #[test]
    fn inverse_and_fermat_exhaustive_small_primes() {
        for q in (2..=101).filter(|&q| is_prime(q)) {
            let f = m(q);
            for a in 1..q {
                let a = FieldElement(a);
                assert_eq!(f.mul(a, f.inv(a).unwrap()), f.one(), "q={q} a={a}");
                assert_eq!(f.pow(a, q - 1), f.one(), "q={q} a={a}");
            }
        }
    }

    #[test]
    fn orders_and_primitive_roots() {
        let f = m(13);
        assert_eq!(f.smallest_primitive_root(), FieldElement(2));
        assert_eq!(f.order(FieldElement(2)), Ok(12));
        assert_eq!(f.order(FieldElement(1)), Ok(1));
        assert_eq!(f.order(FieldElement(3)), Ok(3));
        assert_eq!(m(65537).smallest_primitive_root(), FieldElement(3));
        assert_eq!(m(251).smallest_primitive_root(), FieldElement(6));
        assert_eq!(prime_factors(65536), vec![2]);
        assert_eq!(prime_factors(250), vec![2, 5]);
    }

    #[test]
    fn sampling_q2_without_zero_is_constant() {
        let f = m(2);
        let mut rng = seeded_rng(9);
        assert!((0..100).all(|_| f.sample(&mut rng, true) == FieldElement(1)));
    }

    #[test]
    fn sampling_is_deterministic() {
        let f = m(65537);
        let mut a = seeded_rng(42);
        let mut b = seeded_rng(42);
        let xs: Vec<_> = (0..64).map(|_| f.sample(&mut a, false)).collect();
        let ys: Vec<_> = (0..64).map(|_| f.sample(&mut b, false)).collect();
        assert_eq!(xs, ys);
        assert!(xs.iter().all(|x| x.value() < 65537));
    }

    #[test]
    fn sampling_is_uniform_chi_square() {
        // 10^6 draws into 65537 bins. Under uniformity the chi-square statistic
        // has mean df = q-1 and standard deviation sqrt(2 df).
        let q = 65537u64;
        let f = m(q);
        let draws = 1_000_000u64;
        let mut hist = vec![0u32; q as usize];
        let mut rng = seeded_rng(7);
        for _ in 0..draws {
            hist[f.sample(&mut rng, false).value() as usize] += 1;
        }
        let expected = draws as f64 / q as f64;
        let chi2: f64 = hist
            .iter()
            .map(|&o| {
                let d = o as f64 - expected;
                d * d / expected
            })
            .sum();
        let df = (q - 1) as f64;
        let sigma = (2.0 * df).sqrt();
        assert!((chi2 - df).abs() < 5.0 * sigma, "chi2={chi2} df={df}");
    }

    #[test]
    fn serde_uses_decimal_strings() {
        let json = serde_json::to_string(&vec![FieldElement(0), FieldElement(65536)]).unwrap();
        assert_eq!(json, r#"["0","65536"]"#);
        let back: Vec<FieldElement> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, vec![FieldElement(0), FieldElement(65536)]);
        assert!(serde_json::from_str::<FieldElement>("\"x1\"").is_err());
    }
}
