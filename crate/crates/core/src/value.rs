//! Exact canonical metric values.
//!
//! Every metric value has exactly one representation, so structural equality
//! (and hashing) coincides with equality of the underlying real numbers. That
//! is what lets lattice masses be grouped by metric value without tolerances.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::surd::{rational_power, rational_sqrt, squarefree_split, to_f64, Rational, Surd};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum MetricValue {
    Rational(Rational),
    /// `±√square` where `square` is positive and not a perfect rational square.
    SignedSqrt { negative: bool, square: Rational },
    /// `rational + coeff·√radicand` with a square-free integer radicand > 1 and
    /// both `rational` and `coeff` non-zero.
    Surd { rational: Rational, coeff: Rational, radicand: BigInt },
    /// `ln(ratio) / ln(bound)` with `ratio > 0` and `bound > 1`.
    ScaledLog { ratio: Rational, bound: Rational },
    PosInfinity,
    NegInfinity,
    Undefined,
}

impl MetricValue {
    pub fn rational(q: Rational) -> Self {
        MetricValue::Rational(q)
    }

    pub fn zero() -> Self {
        MetricValue::Rational(Rational::zero())
    }

    /// `num / den`, or `Undefined` when `den` is zero.
    pub fn ratio(num: Rational, den: Rational) -> Self {
        if den.is_zero() {
            MetricValue::Undefined
        } else {
            MetricValue::Rational(num / den)
        }
    }

    /// A non-negative ratio that may diverge: `x/0` is `+∞` for `x > 0`, `0/0`
    /// is undefined.
    pub fn unbounded_ratio(num: Rational, den: Rational) -> Self {
        match (num.is_zero(), den.is_zero()) {
            (true, true) => MetricValue::Undefined,
            (false, true) => MetricValue::PosInfinity,
            _ => MetricValue::Rational(num / den),
        }
    }

    /// `±√square`, collapsed to a rational when `square` is a perfect square.
    pub fn signed_sqrt(negative: bool, square: Rational) -> Self {
        assert!(!square.is_negative(), "square must be non-negative");
        if square.is_zero() {
            return MetricValue::zero();
        }
        match rational_sqrt(&square) {
            Some(root) => MetricValue::Rational(if negative { -root } else { root }),
            None => MetricValue::SignedSqrt { negative, square },
        }
    }

    /// `rational + coeff·√radicand` in canonical form.
    pub fn surd(rational: Rational, coeff: Rational, radicand: &BigUint) -> Self {
        if radicand.is_zero() {
            return MetricValue::Rational(rational);
        }
        let (outer, inner) = squarefree_split(radicand);
        Self::surd_split(rational, coeff, outer, inner)
    }

    /// `rational + coeff·outer·√inner` where `inner` is already square-free.
    pub fn surd_split(rational: Rational, coeff: Rational, outer: BigUint, inner: BigUint) -> Self {
        if coeff.is_zero() || outer.is_zero() {
            return MetricValue::Rational(rational);
        }
        let coeff = coeff * Rational::from_integer(BigInt::from(outer));
        if inner.is_one() {
            return MetricValue::Rational(rational + coeff);
        }
        let inner = BigInt::from(inner);
        if rational.is_zero() {
            let square = &coeff * &coeff * Rational::from_integer(inner);
            return MetricValue::SignedSqrt { negative: coeff.is_negative(), square };
        }
        MetricValue::Surd { rational, coeff, radicand: inner }
    }

    /// `ln(ratio)/ln(bound)` for a ratio in `[0, ∞]` (`None` meaning `∞`).
    ///
    /// Common perfect powers are divided out of the pair, and values that
    /// are rational (ratio a power of the bound) collapse to `Rational`, so
    /// equal logarithm quotients share one representation.
    pub fn scaled_log(ratio: Option<Rational>, bound: Rational) -> Self {
        if !bound.is_positive() || bound.is_one() {
            return MetricValue::Undefined;
        }
        let r = match ratio {
            None => return MetricValue::PosInfinity,
            Some(r) if r.is_zero() => return MetricValue::NegInfinity,
            Some(r) if r.is_negative() => return MetricValue::Undefined,
            Some(r) if r.is_one() => return MetricValue::zero(),
            Some(r) => r,
        };
        let (h, f) = rational_power(&r);
        let (g, e) = rational_power(&bound);
        if h == g {
            return MetricValue::Rational(Rational::new(f.into(), e.into()));
        }
        if h == g.recip() {
            return MetricValue::Rational(Rational::new(-BigInt::from(f), e.into()));
        }
        let k = f.gcd(&e);
        MetricValue::ScaledLog {
            ratio: num_traits::pow(h, (f / k) as usize),
            bound: num_traits::pow(g, (e / k) as usize),
        }
    }

    pub fn is_defined(&self) -> bool {
        !matches!(self, MetricValue::Undefined)
    }

    pub fn is_finite(&self) -> bool {
        !matches!(
            self,
            MetricValue::Undefined | MetricValue::PosInfinity | MetricValue::NegInfinity
        )
    }

    pub fn kind(&self) -> &'static str {
        match self {
            MetricValue::Rational(_) => "rational",
            MetricValue::SignedSqrt { .. } => "sqrt",
            MetricValue::Surd { .. } => "surd",
            MetricValue::ScaledLog { .. } => "scaled_log",
            MetricValue::PosInfinity => "pos_inf",
            MetricValue::NegInfinity => "neg_inf",
            MetricValue::Undefined => "undefined",
        }
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            MetricValue::Rational(q) => Some(q),
            _ => None,
        }
    }

    /// The value as an element of a quadratic field, for algebraic kinds.
    pub fn as_surd(&self) -> Option<Surd> {
        match self {
            MetricValue::Rational(q) => Some(Surd::from_rational(q.clone())),
            MetricValue::SignedSqrt { negative, square } => {
                let s = Surd::sqrt(square.clone());
                Some(if *negative { s.neg() } else { s })
            }
            MetricValue::Surd { rational, coeff, radicand } => Some(Surd::new(
                rational.clone(),
                coeff.clone(),
                Rational::from_integer(radicand.clone()),
            )),
            _ => None,
        }
    }

    /// The square of an algebraic value, when it is rational.
    pub fn square(&self) -> Option<Rational> {
        match self {
            MetricValue::Rational(q) => Some(q * q),
            MetricValue::SignedSqrt { square, .. } => Some(square.clone()),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            MetricValue::Rational(q) => to_f64(q),
            MetricValue::SignedSqrt { negative, square } => {
                let v = to_f64(square).sqrt();
                if *negative {
                    -v
                } else {
                    v
                }
            }
            MetricValue::Surd { .. } => self.as_surd().map(|s| s.to_f64()).unwrap_or(f64::NAN),
            MetricValue::ScaledLog { ratio, bound } => ln_rational(ratio) / ln_rational(bound),
            MetricValue::PosInfinity => f64::INFINITY,
            MetricValue::NegInfinity => f64::NEG_INFINITY,
            MetricValue::Undefined => f64::NAN,
        }
    }

    /// Numerical comparison; `None` when either side is undefined.
    pub fn value_cmp(&self, other: &MetricValue) -> Option<Ordering> {
        use MetricValue::*;
        match (self, other) {
            (Undefined, _) | (_, Undefined) => None,
            (NegInfinity, NegInfinity) | (PosInfinity, PosInfinity) => Some(Ordering::Equal),
            (NegInfinity, _) | (_, PosInfinity) => Some(Ordering::Less),
            (PosInfinity, _) | (_, NegInfinity) => Some(Ordering::Greater),
            (ScaledLog { ratio: r1, bound: b1 }, ScaledLog { ratio: r2, bound: b2 }) => {
                Some(cmp_scaled_logs(r1, b1, r2, b2).unwrap_or_else(|| float_cmp(self, other)))
            }
            (ScaledLog { ratio, bound }, Rational(q)) => {
                Some(cmp_scaled_log_rational(ratio, bound, q).unwrap_or_else(|| float_cmp(self, other)))
            }
            (Rational(q), ScaledLog { ratio, bound }) => Some(
                cmp_scaled_log_rational(ratio, bound, q)
                    .map(Ordering::reverse)
                    .unwrap_or_else(|| float_cmp(self, other)),
            ),
            _ => match (self.as_surd(), other.as_surd()) {
                (Some(x), Some(y)) => Some(x.cmp_exact(&y)),
                _ => self.to_f64().partial_cmp(&other.to_f64()),
            },
        }
    }

    /// Total order used for sorting pmf supports: numerical order with
    /// `Undefined` last.
    pub fn total_cmp(&self, other: &MetricValue) -> Ordering {
        match (self.is_defined(), other.is_defined()) {
            (false, false) => Ordering::Equal,
            (false, true) => Ordering::Greater,
            (true, false) => Ordering::Less,
            _ => self
                .value_cmp(other)
                .unwrap_or_else(|| self.to_f64().total_cmp(&other.to_f64())),
        }
    }

    /// Comparison against a rational threshold, exact for algebraic values.
    pub fn cmp_rational(&self, q: &Rational) -> Option<Ordering> {
        match self {
            MetricValue::Undefined => None,
            MetricValue::PosInfinity => Some(Ordering::Greater),
            MetricValue::NegInfinity => Some(Ordering::Less),
            _ => match self.as_surd() {
                Some(s) => Some(s.cmp_rational(q)),
                None => self.to_f64().partial_cmp(&to_f64(q)),
            },
        }
    }
}

fn float_cmp(x: &MetricValue, y: &MetricValue) -> Ordering {
    x.to_f64().total_cmp(&y.to_f64())
}

/// Largest exponent used for exact power comparisons.
const MAX_EXACT_EXP: u32 = 256;

/// `q^e` for a possibly negative integer exponent.
fn powi(q: &Rational, e: i64) -> Rational {
    let p = num_traits::pow(q.clone(), e.unsigned_abs() as usize);
    if e < 0 {
        p.recip()
    } else {
        p
    }
}

/// Exact order of `ln r1/ln b1` and `ln r2/ln b2` when both bounds are powers
/// of one base: with `b_i = g^{e_i}` it is the order of `r1^{e2}` and `r2^{e1}`.
fn cmp_scaled_logs(r1: &Rational, b1: &Rational, r2: &Rational, b2: &Rational) -> Option<Ordering> {
    let (g1, e1) = rational_power(b1);
    let (g2, e2) = rational_power(b2);
    if g1 != g2 || e1.max(e2) > MAX_EXACT_EXP {
        return None;
    }
    // ln g is positive or negative with g; flip when the bounds are below 1.
    let ord = powi(r1, e2.into()).cmp(&powi(r2, e1.into()));
    Some(if g1 > Rational::one() { ord } else { ord.reverse() })
}

/// Exact order of `ln r/ln b` against `q = s/t`: with `b = g^e` it is the
/// order of `r^t` against `g^{s·e}`.
fn cmp_scaled_log_rational(r: &Rational, b: &Rational, q: &Rational) -> Option<Ordering> {
    let (g, e) = rational_power(b);
    let t = q.denom().to_u32().filter(|t| *t <= MAX_EXACT_EXP)?;
    let s = q.numer().to_i64().filter(|s| s.unsigned_abs() * u64::from(e) <= u64::from(MAX_EXACT_EXP))?;
    let ord = powi(r, t.into()).cmp(&powi(&g, s * i64::from(e)));
    Some(if g > Rational::one() { ord } else { ord.reverse() })
}

pub(crate) fn ln_rational(q: &Rational) -> f64 {
    // ln(n/d) = ln n − ln d, computed on scaled integers so huge values stay finite.
    fn ln_int(v: &BigInt) -> f64 {
        let bits = v.bits();
        if bits < 1000 {
            return to_f64(&Rational::from_integer(v.clone())).ln();
        }
        let shift = bits - 900;
        let top: BigInt = v >> shift;
        to_f64(&Rational::from_integer(top)).ln() + shift as f64 * std::f64::consts::LN_2
    }
    ln_int(q.numer()) - ln_int(q.denom())
}

impl fmt::Display for MetricValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricValue::Rational(q) => write!(f, "{q}"),
            MetricValue::SignedSqrt { negative, square } => {
                write!(f, "{}√({square})", if *negative { "-" } else { "" })
            }
            MetricValue::Surd { rational, coeff, radicand } => {
                write!(f, "{rational} + ({coeff})√{radicand}")
            }
            MetricValue::ScaledLog { ratio, bound } => write!(f, "ln({ratio})/ln({bound})"),
            MetricValue::PosInfinity => write!(f, "+inf"),
            MetricValue::NegInfinity => write!(f, "-inf"),
            MetricValue::Undefined => write!(f, "undefined"),
        }
    }
}
