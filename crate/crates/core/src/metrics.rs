//! The metric registry: identifiers, catalogue metadata and exact evaluators.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ConfusionMatrix;
use crate::surd::{int, squarefree_split, squarefree_split_product, uint, Rational};
use crate::value::MetricValue;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MetricId {
    Tpr,
    Tnr,
    Fpr,
    Fnr,
    Prev,
    Ppv,
    Npv,
    LrPos,
    LrNeg,
    Dor,
    SlogLrPos,
    SlogLrNeg,
    SlogDor,
    Acc,
    Ba,
    Bm,
    Mk,
    Mcc,
    F1,
    Ts,
    Ck,
    Fm,
    Gm,
    Pt,
    Db,
    BMcc,
    BMk,
    BF1,
    BFm,
    BTs,
    BPpv,
    BNpv,
}

/// Static description of a metric, as served by the catalogue endpoint.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricInfo {
    pub id: MetricId,
    pub key: &'static str,
    pub label: &'static str,
    pub name: &'static str,
    /// Closed range of contour levels; infinite bounds mark unbounded metrics.
    pub range: (f64, f64),
    pub signed: bool,
    pub prevalence_dependent: bool,
    pub balanced: bool,
    pub has_contour: bool,
}

impl MetricId {
    pub const ALL: [MetricId; 32] = [
        MetricId::Tpr,
        MetricId::Tnr,
        MetricId::Fpr,
        MetricId::Fnr,
        MetricId::Prev,
        MetricId::Ppv,
        MetricId::Npv,
        MetricId::LrPos,
        MetricId::LrNeg,
        MetricId::Dor,
        MetricId::SlogLrPos,
        MetricId::SlogLrNeg,
        MetricId::SlogDor,
        MetricId::Acc,
        MetricId::Ba,
        MetricId::Bm,
        MetricId::Mk,
        MetricId::Mcc,
        MetricId::F1,
        MetricId::Ts,
        MetricId::Ck,
        MetricId::Fm,
        MetricId::Gm,
        MetricId::Pt,
        MetricId::Db,
        MetricId::BMcc,
        MetricId::BMk,
        MetricId::BF1,
        MetricId::BFm,
        MetricId::BTs,
        MetricId::BPpv,
        MetricId::BNpv,
    ];

    pub fn key(self) -> &'static str {
        self.info().key
    }

    pub fn label(self) -> &'static str {
        self.info().label
    }

    pub fn info(self) -> MetricInfo {
        use MetricId::*;
        const UNIT: (f64, f64) = (0.0, 1.0);
        const SIGNED: (f64, f64) = (-1.0, 1.0);
        const RATIO: (f64, f64) = (0.0, f64::INFINITY);
        let (key, label, name, range, prevalence_dependent) = match self {
            Tpr => ("tpr", "TPR", "true positive rate", UNIT, false),
            Tnr => ("tnr", "TNR", "true negative rate", UNIT, false),
            Fpr => ("fpr", "FPR", "false positive rate", UNIT, false),
            Fnr => ("fnr", "FNR", "false negative rate", UNIT, false),
            Prev => ("prev", "Prev", "prevalence", UNIT, true),
            Ppv => ("ppv", "PPV", "positive predictive value", UNIT, true),
            Npv => ("npv", "NPV", "negative predictive value", UNIT, true),
            LrPos => ("lrpos", "LR+", "positive likelihood ratio", RATIO, false),
            LrNeg => ("lrneg", "LR-", "negative likelihood ratio", RATIO, false),
            Dor => ("dor", "DOR", "diagnostic odds ratio", RATIO, false),
            SlogLrPos => ("sloglrpos", "slogLR+", "scaled log positive likelihood ratio", SIGNED, false),
            SlogLrNeg => ("sloglrneg", "slogLR-", "scaled log negative likelihood ratio", SIGNED, false),
            SlogDor => ("slogdor", "slogDOR", "scaled log diagnostic odds ratio", SIGNED, false),
            Acc => ("acc", "Acc", "accuracy", UNIT, true),
            Ba => ("ba", "BA", "balanced accuracy", UNIT, false),
            Bm => ("bm", "BM", "bookmaker informedness", SIGNED, false),
            Mk => ("mk", "MK", "markedness", SIGNED, true),
            Mcc => ("mcc", "MCC", "Matthews correlation coefficient", SIGNED, true),
            F1 => ("f1", "F1", "F1 score", UNIT, true),
            Ts => ("ts", "TS", "threat score", UNIT, true),
            Ck => ("ck", "CK", "Cohen's kappa", SIGNED, true),
            Fm => ("fm", "FM", "Fowlkes-Mallows index", UNIT, true),
            Gm => ("gm", "GM", "geometric mean of TPR and TNR", UNIT, false),
            Pt => ("pt", "PT", "prevalence threshold", UNIT, false),
            Db => ("db", "DB", "normalised decision benefit", UNIT, true),
            BMcc => ("bmcc", "bMCC", "balanced Matthews correlation coefficient", SIGNED, false),
            BMk => ("bmk", "bMK", "balanced markedness", SIGNED, false),
            BF1 => ("bf1", "bF1", "balanced F1 score", UNIT, false),
            BFm => ("bfm", "bFM", "balanced Fowlkes-Mallows index", UNIT, false),
            BTs => ("bts", "bTS", "balanced threat score", UNIT, false),
            BPpv => ("bppv", "bPPV", "balanced positive predictive value", UNIT, false),
            BNpv => ("bnpv", "bNPV", "balanced negative predictive value", UNIT, false),
        };
        MetricInfo {
            id: self,
            key,
            label,
            name,
            range,
            signed: range.0 < 0.0,
            prevalence_dependent,
            balanced: !matches!(self, Prev | Db | SlogLrPos | SlogLrNeg | SlogDor),
            has_contour: self != Prev,
        }
    }

    pub fn is_slog(self) -> bool {
        matches!(self, MetricId::SlogLrPos | MetricId::SlogLrNeg | MetricId::SlogDor)
    }

    /// The unscaled ratio metric behind a scaled-log metric.
    pub fn slog_base(self) -> Option<MetricId> {
        match self {
            MetricId::SlogLrPos => Some(MetricId::LrPos),
            MetricId::SlogLrNeg => Some(MetricId::LrNeg),
            MetricId::SlogDor => Some(MetricId::Dor),
            _ => None,
        }
    }

    /// For balanced variants, the metric they balance.
    pub fn balanced_of(self) -> Option<MetricId> {
        use MetricId::*;
        match self {
            BMcc => Some(Mcc),
            BMk => Some(Mk),
            BF1 => Some(F1),
            BFm => Some(Fm),
            BTs => Some(Ts),
            BPpv => Some(Ppv),
            BNpv => Some(Npv),
            _ => None,
        }
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for MetricId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        // Separators are dropped, except a trailing '-' as in "LR-".
        let trimmed = s.trim().to_lowercase();
        let (body, minus) = match trimmed.strip_suffix('-') {
            Some(body) => (body, "-"),
            None => (trimmed.as_str(), ""),
        };
        let norm: String = body.chars().filter(|c| !matches!(c, '_' | '-' | ' ')).chain(minus.chars()).collect();
        let alias = match norm.as_str() {
            "lr+" | "plr" => "lrpos",
            "lr-" | "nlr" => "lrneg",
            "sloglr+" => "sloglrpos",
            "sloglr-" => "sloglrneg",
            "kappa" | "cohenkappa" | "κ" => "ck",
            "recall" | "sensitivity" => "tpr",
            "specificity" => "tnr",
            "precision" => "ppv",
            "prevalence" => "prev",
            "accuracy" => "acc",
            "informedness" => "bm",
            "markedness" => "mk",
            "threatscore" | "csi" => "ts",
            other => other,
        };
        MetricId::ALL
            .into_iter()
            .find(|id| id.key() == alias)
            .ok_or_else(|| Error::UnknownMetric(s.to_string()))
    }
}

/// Weights for the four outcomes of a decision: TP, FP, FN, TN.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BenefitMatrix {
    pub beta_a: Rational,
    pub beta_b: Rational,
    pub beta_c: Rational,
    pub beta_d: Rational,
}

impl Default for BenefitMatrix {
    fn default() -> Self {
        BenefitMatrix::new(int(1), int(0), int(0), int(1))
    }
}

impl BenefitMatrix {
    pub fn new(beta_a: Rational, beta_b: Rational, beta_c: Rational, beta_d: Rational) -> Self {
        BenefitMatrix { beta_a, beta_b, beta_c, beta_d }
    }

    fn elements(&self) -> [&Rational; 4] {
        [&self.beta_a, &self.beta_b, &self.beta_c, &self.beta_d]
    }

    /// Shifted and scaled weights with minimum 0 and maximum `1/total`.
    pub fn normalized(&self, total: u64) -> Result<BenefitMatrix> {
        let min = self.elements().into_iter().min().cloned().unwrap_or_else(Rational::zero);
        let max = self.elements().into_iter().max().cloned().unwrap_or_else(Rational::zero);
        let spread = max - &min;
        if spread.is_zero() {
            return Err(Error::ConstantBenefits);
        }
        if total == 0 {
            return Err(Error::EmptyMatrix);
        }
        let scale = spread * uint(total);
        let f = |x: &Rational| (x - &min) / &scale;
        Ok(BenefitMatrix::new(f(&self.beta_a), f(&self.beta_b), f(&self.beta_c), f(&self.beta_d)))
    }

    /// Whether the weights satisfy `β_a > β_c ≥ 0` and `β_d > β_b ≥ 0`.
    pub fn is_plottable(&self) -> bool {
        self.beta_a > self.beta_c
            && !self.beta_c.is_negative()
            && self.beta_d > self.beta_b
            && !self.beta_b.is_negative()
    }
}

/// Total benefit `a·β_a + b·β_b + c·β_c + d·β_d`, optionally with normalised weights.
pub fn decision_benefit(m: &ConfusionMatrix, beta: &BenefitMatrix, normalized: bool) -> Result<MetricValue> {
    let owned;
    let beta = if normalized {
        owned = beta.normalized(m.total())?;
        &owned
    } else {
        beta
    };
    let total = uint(m.a) * &beta.beta_a
        + uint(m.b) * &beta.beta_b
        + uint(m.c) * &beta.beta_c
        + uint(m.d) * &beta.beta_d;
    Ok(MetricValue::Rational(total))
}

fn big(v: u64) -> BigInt {
    BigInt::from(v)
}

fn frac(num: u64, den: u64) -> MetricValue {
    MetricValue::ratio(uint(num), uint(den))
}

/// `(num/den)` where `num` and `den` are signed big integers.
fn big_ratio(num: BigInt, den: BigInt) -> MetricValue {
    MetricValue::ratio(Rational::from_integer(num), Rational::from_integer(den))
}

/// `√(num/den)` for non-negative integers.
fn sqrt_ratio(num: BigInt, den: BigInt) -> MetricValue {
    if den.is_zero() {
        return MetricValue::Undefined;
    }
    MetricValue::signed_sqrt(false, Rational::new(num, den))
}

/// Correlation-style ratio `num / √(den)`; `None` when the denominator is zero.
fn signed_root_ratio(num: BigInt, den_square: BigInt) -> Option<MetricValue> {
    if den_square.is_zero() {
        return None;
    }
    let negative = num.is_negative();
    let square = Rational::new(&num * &num, den_square);
    Some(MetricValue::signed_sqrt(negative, square))
}

/// Scale bound `B` of a scaled-log metric, so that its value is `ln(ratio)/ln(B)`.
/// `None` when `p` or `n` is below 2 or the bound is not above 1.
pub fn slog_bound(id: MetricId, p: u64, n: u64) -> Option<Rational> {
    if p < 2 || n < 2 {
        return None;
    }
    let bound = match id {
        MetricId::SlogLrPos => uint(n * (p - 1)) / uint(p),
        MetricId::SlogLrNeg => uint(p * n) / uint(n - 1),
        MetricId::SlogDor => uint((p - 1) * (n - 1)),
        _ => return None,
    };
    (bound > Rational::one()).then_some(bound)
}

/// Exact value of a metric on a confusion matrix. Decision benefit uses the
/// normalised identity weights, which makes it coincide with accuracy.
pub fn eval_metric(id: MetricId, m: &ConfusionMatrix) -> MetricValue {
    use MetricId::*;
    let ConfusionMatrix { a, b, c, d } = *m;
    let (p, n) = (m.p(), m.n());
    match id {
        Tpr => frac(a, p),
        Tnr => frac(d, n),
        Fpr => frac(b, n),
        Fnr => frac(c, p),
        Prev => frac(p, m.total()),
        Ppv => frac(a, a + b),
        Npv => frac(d, c + d),
        Acc => frac(a + d, m.total()),
        Ba | Bm if p == 0 || n == 0 => MetricValue::Undefined,
        Ba => MetricValue::Rational((uint(a) / uint(p) + uint(d) / uint(n)) / int(2)),
        Bm => MetricValue::Rational(uint(a) / uint(p) + uint(d) / uint(n) - int(1)),
        Mk | Mcc if p == 0 || n == 0 => MetricValue::Undefined,
        // An empty predicted class with both actual classes present is a
        // constant classifier: no association, so both coefficients are 0.
        Mk | Mcc if a + b == 0 || c + d == 0 => MetricValue::zero(),
        Mk => big_ratio(big(a) * big(d) - big(b) * big(c), big(a + b) * big(c + d)),
        Mcc => signed_root_ratio(
            big(a) * big(d) - big(b) * big(c),
            big(a + b) * big(p) * big(n) * big(c + d),
        )
        .unwrap_or(MetricValue::Undefined),
        F1 => frac(2 * a, 2 * a + b + c),
        Ts => frac(a, a + b + c),
        Ck => big_ratio(
            big(2) * (big(a) * big(d) - big(b) * big(c)),
            big(a + b) * big(n) + big(p) * big(c + d),
        ),
        Fm => sqrt_ratio(big(a) * big(a), big(a + b) * big(p)),
        Gm => sqrt_ratio(big(a) * big(d), big(p) * big(n)),
        Pt if p == 0 || n == 0 => MetricValue::Undefined,
        Pt => prevalence_threshold_counts(a, p, b, n),
        LrPos | LrNeg | Dor | SlogLrPos | SlogLrNeg | SlogDor => ratio_metric(id, m),
        Db => match decision_benefit(m, &BenefitMatrix::default(), true) {
            Ok(v) => v,
            Err(_) => MetricValue::Undefined,
        },
        BMcc | BMk | BF1 | BFm | BTs | BPpv | BNpv => {
            if p == 0 || n == 0 {
                return MetricValue::Undefined;
            }
            eval_balanced(id, &(uint(a) / uint(p)), &(uint(d) / uint(n)))
                .unwrap_or(MetricValue::Undefined)
        }
    }
}

fn ratio_metric(id: MetricId, m: &ConfusionMatrix) -> MetricValue {
    let ConfusionMatrix { a, b, c, d } = *m;
    let (p, n) = (m.p(), m.n());
    let base = id.slog_base().unwrap_or(id);
    let value = match base {
        MetricId::Dor => MetricValue::unbounded_ratio(uint(a) * uint(d), uint(b) * uint(c)),
        _ if p == 0 || n == 0 => MetricValue::Undefined,
        MetricId::LrPos => MetricValue::unbounded_ratio(uint(a) * uint(n), uint(b) * uint(p)),
        MetricId::LrNeg => MetricValue::unbounded_ratio(uint(c) * uint(n), uint(d) * uint(p)),
        _ => unreachable!("not a ratio metric"),
    };
    if !id.is_slog() {
        return value;
    }
    match slog_bound(id, p, n) {
        None => MetricValue::Undefined,
        Some(bound) => scale_ratio(value, bound),
    }
}

fn scale_ratio(value: MetricValue, bound: Rational) -> MetricValue {
    match value {
        MetricValue::Rational(r) => MetricValue::scaled_log(Some(r), bound),
        MetricValue::PosInfinity => MetricValue::PosInfinity,
        _ => MetricValue::Undefined,
    }
}

/// Prevalence threshold `√f / (√t + √f)` from counts, with `t = a/p`, `f = b/n`.
fn prevalence_threshold_counts(a: u64, p: u64, b: u64, n: u64) -> MetricValue {
    let t = uint(a) / uint(p);
    let f = uint(b) / uint(n);
    // √(t·f) = √(a·b·p·n) / (p·n)
    let (outer, inner) = squarefree_split_product(&[a, b, p, n]);
    prevalence_threshold(&t, &f, outer, inner, uint(p) * uint(n))
}

/// `PT = (√(tf) − f)/(t − f)` with `√(tf) = outer·√inner / den`.
fn prevalence_threshold(t: &Rational, f: &Rational, outer: BigUint, inner: BigUint, den: Rational) -> MetricValue {
    match (t.is_zero(), f.is_zero()) {
        (true, true) => return MetricValue::Undefined,
        (_, true) => return MetricValue::zero(),
        (true, false) => return MetricValue::Rational(int(1)),
        _ => {}
    }
    if t == f {
        return MetricValue::Rational(Rational::new(1.into(), 2.into()));
    }
    let diff = t - f;
    let rational = -f / &diff;
    let coeff = Rational::one() / (den * diff);
    MetricValue::surd_split(rational, coeff, outer, inner)
}

fn rational_pt(t: &Rational, f: &Rational) -> MetricValue {
    // √(t·f) = √(tn·td·fn·fd) / (td·fd)
    let parts = [t.numer(), t.denom(), f.numer(), f.denom()];
    let small: Option<Vec<u64>> = parts.iter().map(|x| x.to_u64().filter(|v| *v < 1 << 40)).collect();
    let (outer, inner) = match small {
        Some(v) => squarefree_split_product(&v),
        None => {
            let product: BigInt = parts.iter().copied().product();
            squarefree_split(&product.magnitude().clone())
        }
    };
    let den = Rational::from_integer(t.denom() * f.denom());
    prevalence_threshold(t, f, outer, inner, den)
}

fn check_rate(name: &'static str, r: &Rational) -> Result<()> {
    if r.is_negative() || *r > Rational::one() {
        return Err(Error::RateOutOfRange { name, value: r.to_string() });
    }
    Ok(())
}

/// Prevalence-free form of a metric in terms of TPR `t` and TNR `s`, obtained
/// by setting `p = n`. Balanced variants and their base metrics share a form.
pub fn eval_balanced(id: MetricId, t: &Rational, s: &Rational) -> Result<MetricValue> {
    use MetricId::*;
    check_rate("tpr", t)?;
    check_rate("tnr", s)?;
    let one = Rational::one();
    let two = int(2);
    // Balanced matrix with unit class totals: a = t, b = 1 − s, c = 1 − t, d = s.
    let fp = &one - s;
    let fneg = &one - t;
    let ratio = |num: Rational, den: Rational| MetricValue::ratio(num, den);
    let v = match id {
        Prev | Db | SlogLrPos | SlogLrNeg | SlogDor => return Err(Error::NoBalancedForm(id)),
        Tpr => MetricValue::Rational(t.clone()),
        Tnr => MetricValue::Rational(s.clone()),
        Fpr => MetricValue::Rational(fp),
        Fnr => MetricValue::Rational(fneg),
        Ppv | BPpv => ratio(t.clone(), t + &fp),
        Npv | BNpv => ratio(s.clone(), s + &fneg),
        Acc | Ba => MetricValue::Rational((t + s) / &two),
        Bm | Ck => MetricValue::Rational(t + s - &one),
        Mk | BMk | Mcc | BMcc if (t + &fp).is_zero() || (s + &fneg).is_zero() => MetricValue::zero(),
        Mk | BMk => MetricValue::Rational(t / (t + &fp) + s / (s + &fneg) - &one),
        Mcc | BMcc => {
            let num = t + s - &one;
            let den = (t + &fp) * (s + &fneg);
            MetricValue::signed_sqrt(num.is_negative(), &num * &num / den)
        }
        F1 | BF1 => ratio(t * &two, &two + t - s),
        Ts | BTs => ratio(t.clone(), &two - s),
        Fm | BFm => {
            let den = t + &fp;
            if den.is_zero() {
                MetricValue::Undefined
            } else {
                MetricValue::signed_sqrt(false, t * t / den)
            }
        }
        Gm => MetricValue::signed_sqrt(false, t * s),
        Pt => rational_pt(t, &fp),
        LrPos => MetricValue::unbounded_ratio(t.clone(), fp),
        LrNeg => MetricValue::unbounded_ratio(fneg, s.clone()),
        Dor => MetricValue::unbounded_ratio(t * s, fp * fneg),
    };
    Ok(v)
}
