use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::surd::{uint, Rational};

/// A binary confusion matrix laid out as
///
/// ```text
///              actual +   actual −
/// predicted +     a          b
/// predicted −     c          d
/// ```
///
/// so `a` = TP, `b` = FP, `c` = FN and `d` = TN.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl ConfusionMatrix {
    pub const fn new(a: u64, b: u64, c: u64, d: u64) -> Self {
        ConfusionMatrix { a, b, c, d }
    }

    /// The matrix at lattice point `(a, d)` of the slice with `p` positives
    /// and `n` negatives.
    pub fn from_slice_point(p: u64, n: u64, a: u64, d: u64) -> Self {
        debug_assert!(a <= p && d <= n);
        ConfusionMatrix { a, b: n - d, c: p - a, d }
    }

    pub fn tp(&self) -> u64 {
        self.a
    }
    pub fn fp(&self) -> u64 {
        self.b
    }
    pub fn fn_(&self) -> u64 {
        self.c
    }
    pub fn tn(&self) -> u64 {
        self.d
    }

    /// Number of actual positives.
    pub fn p(&self) -> u64 {
        self.a + self.c
    }

    /// Number of actual negatives.
    pub fn n(&self) -> u64 {
        self.b + self.d
    }

    pub fn total(&self) -> u64 {
        self.p() + self.n()
    }

    /// Relabel classes: positives become negatives and vice versa.
    pub fn swap_classes(&self) -> Self {
        ConfusionMatrix { a: self.d, b: self.c, c: self.b, d: self.a }
    }

    pub fn rates(&self) -> Rates {
        rates(self)
    }
}

impl fmt::Display for ConfusionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} {}; {} {}]", self.a, self.b, self.c, self.d)
    }
}

/// Builds a matrix from signed inputs, rejecting negative counts.
pub fn make_matrix(a: i64, b: i64, c: i64, d: i64) -> Result<ConfusionMatrix> {
    let check = |field, value: i64| {
        u64::try_from(value).map_err(|_| Error::NegativeCount { field, value })
    };
    Ok(ConfusionMatrix::new(check("a", a)?, check("b", b)?, check("c", c)?, check("d", d)?))
}

/// Empirical rates of a matrix. `None` marks a zero denominator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rates {
    pub tpr: Option<Rational>,
    pub tnr: Option<Rational>,
    pub fpr: Option<Rational>,
    pub fnr: Option<Rational>,
    pub prevalence: Option<Rational>,
}

pub(crate) fn fraction(num: u64, den: u64) -> Option<Rational> {
    (den != 0).then(|| uint(num) / uint(den))
}

pub fn rates(m: &ConfusionMatrix) -> Rates {
    let (p, n) = (m.p(), m.n());
    Rates {
        tpr: fraction(m.a, p),
        tnr: fraction(m.d, n),
        fpr: fraction(m.b, n),
        fnr: fraction(m.c, p),
        prevalence: fraction(p, m.total()),
    }
}
