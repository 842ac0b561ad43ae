//! Exact arithmetic in quadratic fields `Q(√q)`.
//!
//! Metric values such as MCC or the geometric mean are square roots of
//! rationals, and contour points of quadratic level sets are roots of
//! quadratics with rational coefficients. Both are represented as
//! `r + s·√q` with rational `r`, `s` and a non-negative rational radicand `q`,
//! which keeps equality and ordering decidable without floating point.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn uint(v: u64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn to_f64(q: &Rational) -> f64 {
    if let Some(v) = q.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Huge numerators and denominators: scale both down before dividing.
    let num = q.numer();
    let den = q.denom();
    let shift = num.bits().max(den.bits()).saturating_sub(1000) as usize;
    let n = (num >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (den >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

fn sign_of(q: &Rational) -> Ordering {
    if q.is_zero() {
        Ordering::Equal
    } else if q.is_positive() {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}

/// Exact square root of a non-negative rational, if it is a perfect square.
pub fn rational_sqrt(q: &Rational) -> Option<Rational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().sqrt();
    if &(&n * &n) != q.numer() {
        return None;
    }
    let d = q.denom().sqrt();
    if &(&d * &d) != q.denom() {
        return None;
    }
    Some(Rational::new(n, d))
}

/// Parses `"3"`, `"-0.25"`, `"1/3"` or `"2.5e-1"` into an exact rational.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let s = text.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: BigInt = format!("{whole}{frac}").parse().unwrap_or_else(|_| BigInt::zero());
    let scale = exponent - frac.len() as i32;
    let ten = BigInt::from(10u32);
    let mut value = if scale >= 0 {
        Rational::from_integer(all * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(all, num_traits::pow(ten, (-scale) as usize))
    };
    if negative {
        value = -value;
    }
    Some(value)
}

/// Sign of `a + b·√x` for `x ≥ 0`.
pub fn sign2(a: &Rational, b: &Rational, x: &Rational) -> Ordering {
    if b.is_zero() || x.is_zero() {
        return sign_of(a);
    }
    let sa = sign_of(a);
    let sb = sign_of(b);
    if sa == Ordering::Equal || sa == sb {
        return sb;
    }
    match (a * a).cmp(&(b * b * x)) {
        Ordering::Greater => sa,
        Ordering::Less => sb,
        Ordering::Equal => Ordering::Equal,
    }
}

/// Sign of `a + b·√x + c·√y` for `x, y ≥ 0`.
pub fn sign3(a: &Rational, b: &Rational, x: &Rational, c: &Rational, y: &Rational) -> Ordering {
    let left = sign2(a, b, x);
    let right = if y.is_zero() { Ordering::Equal } else { sign_of(c) };
    if right == Ordering::Equal {
        return left;
    }
    if left == Ordering::Equal || left == right {
        return if left == Ordering::Equal { right } else { left };
    }
    // Opposite signs: compare (a + b√x)² with c²y.
    let rational = a * a + b * b * x - c * c * y;
    let irrational = a * b * int(2);
    match sign2(&rational, &irrational, x) {
        Ordering::Greater => left,
        Ordering::Less => right,
        Ordering::Equal => Ordering::Equal,
    }
}

/// An element `rational + coeff·√radicand` of a real quadratic field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Surd {
    pub rational: Rational,
    pub coeff: Rational,
    pub radicand: Rational,
}

impl Surd {
    pub fn new(rational: Rational, coeff: Rational, radicand: Rational) -> Self {
        assert!(!radicand.is_negative(), "negative radicand");
        Surd { rational, coeff, radicand }.normalized()
    }

    pub fn from_rational(r: Rational) -> Self {
        Surd { rational: r, coeff: Rational::zero(), radicand: Rational::zero() }
    }

    pub fn zero() -> Self {
        Self::from_rational(Rational::zero())
    }

    pub fn sqrt(q: Rational) -> Self {
        Self::new(Rational::zero(), Rational::one(), q)
    }

    fn normalized(mut self) -> Self {
        if self.coeff.is_zero() || self.radicand.is_zero() {
            self.coeff = Rational::zero();
            self.radicand = Rational::zero();
        } else if let Some(root) = rational_sqrt(&self.radicand) {
            self.rational += &self.coeff * root;
            self.coeff = Rational::zero();
            self.radicand = Rational::zero();
        }
        self
    }

    pub fn is_rational(&self) -> bool {
        self.coeff.is_zero()
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        self.is_rational().then_some(&self.rational)
    }

    pub fn signum(&self) -> Ordering {
        sign2(&self.rational, &self.coeff, &self.radicand)
    }

    pub fn is_zero(&self) -> bool {
        self.signum() == Ordering::Equal
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_rational() {
            return to_f64(&self.rational);
        }
        to_f64(&self.rational) + to_f64(&self.coeff) * to_f64(&self.radicand).sqrt()
    }

    pub fn cmp_exact(&self, other: &Surd) -> Ordering {
        let diff = &self.rational - &other.rational;
        sign3(&diff, &self.coeff, &self.radicand, &(-&other.coeff), &other.radicand)
    }

    pub fn cmp_rational(&self, q: &Rational) -> Ordering {
        sign2(&(&self.rational - q), &self.coeff, &self.radicand)
    }

    fn shared_radicand(&self, other: &Surd) -> Option<Rational> {
        if other.coeff.is_zero() {
            Some(self.radicand.clone())
        } else if self.coeff.is_zero() || self.radicand == other.radicand {
            Some(other.radicand.clone())
        } else {
            None
        }
    }

    pub fn add(&self, other: &Surd) -> Option<Surd> {
        let q = self.shared_radicand(other)?;
        Some(Surd::new(&self.rational + &other.rational, &self.coeff + &other.coeff, q))
    }

    pub fn sub(&self, other: &Surd) -> Option<Surd> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Surd {
        Surd { rational: -&self.rational, coeff: -&self.coeff, radicand: self.radicand.clone() }
    }

    pub fn mul(&self, other: &Surd) -> Option<Surd> {
        let q = self.shared_radicand(other)?;
        let r = &self.rational * &other.rational + &self.coeff * &other.coeff * &q;
        let s = &self.rational * &other.coeff + &self.coeff * &other.rational;
        Some(Surd::new(r, s, q))
    }

    pub fn scale(&self, k: &Rational) -> Surd {
        Surd::new(&self.rational * k, &self.coeff * k, self.radicand.clone())
    }

    /// `None` on division by zero or incompatible radicands.
    pub fn div(&self, other: &Surd) -> Option<Surd> {
        let q = self.shared_radicand(other)?;
        let norm = &other.rational * &other.rational - &other.coeff * &other.coeff * &q;
        if norm.is_zero() {
            return None;
        }
        let conj = Surd { rational: other.rational.clone(), coeff: -&other.coeff, radicand: q };
        Some(self.mul(&conj)?.scale(&norm.recip()))
    }
}

impl From<Rational> for Surd {
    fn from(r: Rational) -> Self {
        Surd::from_rational(r)
    }
}

/// Splits `n = outer² · inner` with `inner` square-free.
pub fn squarefree_split(n: &BigUint) -> (BigUint, BigUint) {
    if let Some(small) = n.to_u128() {
        let (o, i) = squarefree_split_u128(small);
        return (BigUint::from(o), BigUint::from(i));
    }
    let mut rem = n.clone();
    let mut outer = BigUint::one();
    let mut inner = BigUint::one();
    let mut d = BigUint::from(2u32);
    while &d * &d * &d <= rem {
        let mut e = 0u32;
        while (&rem % &d).is_zero() {
            rem /= &d;
            e += 1;
        }
        for _ in 0..e / 2 {
            outer *= &d;
        }
        if e % 2 == 1 {
            inner *= &d;
        }
        d += 1u32;
    }
    // `rem` now has at most two prime factors, all larger than `d`.
    let root = rem.sqrt();
    if &root * &root == rem {
        outer *= root;
    } else {
        inner *= rem;
    }
    (outer, inner)
}

/// Square-free split of a product of small integers, factoring each term
/// separately so the cost depends on the terms rather than on the product.
pub fn squarefree_split_product(factors: &[u64]) -> (BigUint, BigUint) {
    if factors.contains(&0) {
        return (BigUint::zero(), BigUint::one());
    }
    let mut exponents: Vec<(u64, u32)> = Vec::new();
    for &f in factors {
        let mut rem = f;
        let mut d = 2u64;
        while d.saturating_mul(d) <= rem {
            let mut e = 0u32;
            while rem % d == 0 {
                rem /= d;
                e += 1;
            }
            if e > 0 {
                bump(&mut exponents, d, e);
            }
            d += if d == 2 { 1 } else { 2 };
        }
        if rem > 1 {
            bump(&mut exponents, rem, 1);
        }
    }
    let mut outer = BigUint::one();
    let mut inner = BigUint::one();
    for (prime, e) in exponents {
        outer *= num_traits::pow(BigUint::from(prime), (e / 2) as usize);
        if e % 2 == 1 {
            inner *= prime;
        }
    }
    (outer, inner)
}

/// Writes an integer `x ≥ 2` as `base^exp` with the largest possible `exp`.
pub fn perfect_power(x: &BigUint) -> (BigUint, u32) {
    let mut base = x.clone();
    let mut exp = 1u32;
    let mut q = 2u32;
    while u64::from(q) < base.bits() {
        match exact_root(&base, q) {
            Some(root) => {
                base = root;
                exp *= q;
            }
            None => q += 1,
        }
    }
    (base, exp)
}

fn exact_root(x: &BigUint, q: u32) -> Option<BigUint> {
    if let Some(small) = x.to_u64() {
        // Float estimate, corrected by exact integer powers.
        let guess = (small as f64).powf(1.0 / f64::from(q)).round() as u64;
        return (guess.saturating_sub(1)..=guess + 1)
            .find(|r| r.checked_pow(q) == Some(small))
            .map(BigUint::from);
    }
    let root = x.nth_root(q);
    (num_traits::pow(root.clone(), q as usize) == *x).then_some(root)
}

/// Writes a positive rational `q ≠ 1` as `base^exp` with the largest possible `exp`.
pub fn rational_power(q: &Rational) -> (Rational, u32) {
    let split = |v: &BigInt| -> (BigUint, u32) {
        let v = v.magnitude();
        if v.is_one() {
            (BigUint::one(), 0)
        } else {
            perfect_power(v)
        }
    };
    let (num_base, num_exp) = split(q.numer());
    let (den_base, den_exp) = split(q.denom());
    let exp = num_integer::gcd(num_exp, den_exp).max(1);
    let part = |b: BigUint, e: u32| BigInt::from(num_traits::pow(b, (e / exp) as usize));
    (Rational::new(part(num_base, num_exp), part(den_base, den_exp)), exp)
}

fn bump(exponents: &mut Vec<(u64, u32)>, prime: u64, e: u32) {
    match exponents.iter_mut().find(|(p, _)| *p == prime) {
        Some(entry) => entry.1 += e,
        None => exponents.push((prime, e)),
    }
}

fn squarefree_split_u128(mut rem: u128) -> (u128, u128) {
    if rem == 0 {
        return (0, 1);
    }
    let mut outer = 1u128;
    let mut inner = 1u128;
    let mut d = 2u128;
    while d.saturating_mul(d).saturating_mul(d) <= rem {
        let mut e = 0u32;
        while rem.is_multiple_of(d) {
            rem /= d;
            e += 1;
        }
        outer *= d.pow(e / 2);
        if e % 2 == 1 {
            inner *= d;
        }
        d += if d == 2 { 1 } else { 2 };
    }
    let root = rem.sqrt();
    if root * root == rem {
        outer *= root;
    } else {
        inner *= rem;
    }
    (outer, inner)
}
