//! Arithmetic in GF(p) for a prime `p < 2^31` chosen at runtime, and the
//! seeded generator every randomized structure draws from.
//!
//! Elements are plain residues; all operations go through a [`PrimeField`]
//! handle which carries the modulus and a precomputed Barrett constant.
//!
//! The generator is ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded from a 64-bit
//! seed. Field elements are drawn by rejection sampling on 32-bit outputs, so
//! a seed yields the same element sequence on every platform. Child
//! generators are derived with a SplitMix64 mix of `(parent seed, index)`.

use std::fmt;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// `2^31 - 1`.
pub const DEFAULT_PRIME: u32 = 2_147_483_647;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GfError {
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("modulus {0} is not a prime in [5, 2^31)")]
    BadModulus(u64),
}

/// A residue in `[0, p)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement(u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    #[inline]
    pub fn value(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The field GF(p).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
    // floor(2^64 / p)
    barrett: u64,
}

impl Default for PrimeField {
    fn default() -> Self {
        PrimeField::new(DEFAULT_PRIME as u64).expect("default modulus is prime")
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self, GfError> {
        if !(5..(1u64 << 31)).contains(&p) || !is_prime(p) {
            return Err(GfError::BadModulus(p));
        }
        let barrett = (u128::from(u64::MAX) + 1) / u128::from(p);
        Ok(PrimeField {
            p,
            barrett: barrett as u64,
        })
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.p
    }

    /// Reduces any `x < 2^64`.
    #[inline]
    pub fn reduce(&self, x: u64) -> FieldElement {
        let q = ((u128::from(x) * u128::from(self.barrett)) >> 64) as u64;
        let mut r = x - q * self.p;
        if r >= self.p {
            r -= self.p;
        }
        FieldElement(r as u32)
    }

    /// Element from an arbitrary signed integer.
    pub fn from_i64(&self, v: i64) -> FieldElement {
        let m = v.rem_euclid(self.p as i64);
        FieldElement(m as u32)
    }

    #[inline]
    pub fn elem(&self, v: u64) -> FieldElement {
        self.reduce(v)
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let s = u64::from(a.0) + u64::from(b.0);
        FieldElement(if s >= self.p { s - self.p } else { s } as u32)
    }

    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let (a, b) = (u64::from(a.0), u64::from(b.0));
        FieldElement(if a >= b { a - b } else { a + self.p - b } as u32)
    }

    #[inline]
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        if a.0 == 0 {
            a
        } else {
            FieldElement((self.p - u64::from(a.0)) as u32)
        }
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.reduce(u64::from(a.0) * u64::from(b.0))
    }

    /// `acc + a * b` with a single reduction.
    #[inline]
    pub fn mul_add(&self, acc: FieldElement, a: FieldElement, b: FieldElement) -> FieldElement {
        self.reduce(u64::from(acc.0) + u64::from(a.0) * u64::from(b.0))
    }

    /// `acc - a * b`.
    #[inline]
    pub fn mul_sub(&self, acc: FieldElement, a: FieldElement, b: FieldElement) -> FieldElement {
        self.mul_add(acc, self.neg(a), b)
    }

    pub fn pow(&self, mut base: FieldElement, mut exp: u64) -> FieldElement {
        let mut acc = FieldElement::ONE;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Inverse via the extended Euclidean algorithm.
    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, GfError> {
        if a.0 == 0 {
            return Err(GfError::ZeroInverse);
        }
        let (mut r0, mut r1) = (self.p as i64, i64::from(a.0));
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(self.from_i64(t0))
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, GfError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Uniform over `[0, p)`.
    pub fn sample(&self, rng: &mut FieldRng) -> FieldElement {
        rng.below(self.p)
    }

    /// Uniform over `[1, p)`.
    pub fn sample_nonzero(&self, rng: &mut FieldRng) -> FieldElement {
        FieldElement(rng.below(self.p - 1).0 + 1)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seeded ChaCha8 generator.
#[derive(Clone, Debug)]
pub struct FieldRng {
    seed: u64,
    inner: ChaCha8Rng,
    children: u64,
}

impl FieldRng {
    pub fn new(seed: u64) -> Self {
        FieldRng {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
            children: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent generator for `index`; does not advance `self`.
    pub fn child(&self, index: u64) -> FieldRng {
        FieldRng::new(splitmix64(self.seed ^ splitmix64(index.wrapping_add(1))))
    }

    /// Next unused child generator.
    pub fn fork(&mut self) -> FieldRng {
        let c = self.child(self.children);
        self.children += 1;
        c
    }

    pub fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, bound)` for `bound <= 2^32`.
    fn below(&mut self, bound: u64) -> FieldElement {
        debug_assert!(bound > 0 && bound <= 1 << 32);
        let zone = (1u64 << 32) - (1u64 << 32) % bound;
        loop {
            let x = u64::from(self.inner.next_u32());
            if x < zone {
                return FieldElement((x % bound) as u32);
            }
        }
    }

    /// Uniform index in `[0, bound)`.
    pub fn index(&mut self, bound: usize) -> usize {
        assert!(bound > 0);
        self.below(bound as u64).0 as usize
    }

    /// True with probability `num / den`.
    pub fn chance(&mut self, num: u32, den: u32) -> bool {
        (self.below(u64::from(den)).0) < num
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f7() -> PrimeField {
        PrimeField::new(7).unwrap()
    }

    fn e(v: u32) -> FieldElement {
        FieldElement(v)
    }

    #[test]
    fn small_field_examples() {
        let f = f7();
        assert_eq!(f.add(e(3), e(5)), e(1));
        assert_eq!(f.mul(e(3), e(5)), e(1));
        assert_eq!(f.inv(e(3)).unwrap(), e(5));
        assert_eq!(f.inv(e(6)).unwrap(), e(6));
        assert_eq!(f.inv(e(1)).unwrap(), e(1));
        assert_eq!(f.inv(e(0)), Err(GfError::ZeroInverse));
        assert_eq!(f.add(e(4), f.neg(e(4))), e(0));
        assert_eq!(f.sub(e(2), e(5)), e(4));
    }

    #[test]
    fn rejects_non_primes() {
        assert!(PrimeField::new(9).is_err());
        assert!(PrimeField::new(3).is_err());
        assert!(PrimeField::new(1 << 31).is_err());
        assert!(PrimeField::new(101).is_ok());
    }

    #[test]
    fn inverse_exhaustive_small_primes() {
        for p in [5u64, 7, 11, 13, 31, 97, 101] {
            let f = PrimeField::new(p).unwrap();
            for a in 1..p {
                let a = f.elem(a);
                assert_eq!(f.mul(a, f.inv(a).unwrap()), FieldElement::ONE);
            }
        }
    }

    #[test]
    fn barrett_matches_naive_on_large_prime() {
        let f = PrimeField::default();
        let mut rng = FieldRng::new(11);
        for _ in 0..10_000 {
            let a = f.sample(&mut rng);
            let b = f.sample(&mut rng);
            let naive = (u64::from(a.value()) * u64::from(b.value())) % f.modulus();
            assert_eq!(u64::from(f.mul(a, b).value()), naive);
            let inv = f.inv(f.sample_nonzero(&mut rng)).unwrap();
            assert!(u64::from(inv.value()) < f.modulus());
        }
        assert_eq!(f.reduce(u64::MAX).value() as u64, u64::MAX % f.modulus());
    }

    #[test]
    fn same_seed_same_draws() {
        let f = PrimeField::default();
        let mut a = FieldRng::new(0xfeed);
        let mut b = FieldRng::new(0xfeed);
        for _ in 0..1000 {
            assert_eq!(f.sample(&mut a), f.sample(&mut b));
        }
        assert_ne!(
            FieldRng::new(1).child(0).next_u64(),
            FieldRng::new(1).child(1).next_u64()
        );
    }

    #[test]
    fn sample_mean_and_nonzero() {
        let f = PrimeField::default();
        let mut rng = FieldRng::new(42);
        let draws = 100_000;
        let mut sum = 0f64;
        for _ in 0..draws {
            sum += f64::from(f.sample(&mut rng).value());
            assert!(!f.sample_nonzero(&mut rng).is_zero());
        }
        let mean = sum / draws as f64;
        let expected = (f.modulus() - 1) as f64 / 2.0;
        assert!(((mean - expected) / expected).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn field_axioms_randomized() {
        let f = PrimeField::default();
        let mut rng = FieldRng::new(3);
        for _ in 0..2000 {
            let (a, b, c) = (f.sample(&mut rng), f.sample(&mut rng), f.sample(&mut rng));
            assert_eq!(f.add(a, b), f.add(b, a));
            assert_eq!(f.mul(a, b), f.mul(b, a));
            assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
            assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
            assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
            assert_eq!(f.mul_add(c, a, b), f.add(c, f.mul(a, b)));
            assert_eq!(f.mul_sub(c, a, b), f.sub(c, f.mul(a, b)));
            assert_eq!(f.mul(a, FieldElement::ONE), a);
            assert_eq!(f.mul(a, FieldElement::ZERO), FieldElement::ZERO);
        }
    }
}
