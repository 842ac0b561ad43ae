//! Level sets of metrics in ROC space.
//!
//! With `α = a/p` (TPR) and `δ = d/n` (TNR), every supported metric taking
//! the value `k` reduces to a polynomial `A·α² + B·α + C = 0` whose
//! coefficients depend on `k`, `δ`, `p` and `n`. Solving it at a fixed `δ`
//! gives the contour's TPR; sweeping `δ` traces the contour, including the
//! parts that lie outside the unit square.

use std::cmp::Ordering;

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::metrics::{slog_bound, BenefitMatrix, MetricId};
use crate::surd::{int, rational_power, to_f64, uint, Rational, Surd};
use crate::value::{ln_rational, MetricValue};

/// TPR on a contour at a given TNR.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Alpha {
    Value(Surd),
    /// Every TPR satisfies the level at this TNR: the contour is a vertical
    /// line in ROC space.
    Vertical,
    Undefined,
}

impl Alpha {
    pub fn value(&self) -> Option<&Surd> {
        match self {
            Alpha::Value(s) => Some(s),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> Option<f64> {
        self.value().map(Surd::to_f64)
    }

    /// Whether the contour passes through TPR `q` at this TNR.
    pub fn contains(&self, q: &Rational) -> bool {
        match self {
            Alpha::Value(s) => s.cmp_rational(q) == Ordering::Equal,
            Alpha::Vertical => true,
            Alpha::Undefined => false,
        }
    }
}

/// A common point `(α, δ)` of all contours of a metric.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Intersection {
    pub alpha: Rational,
    pub delta: Rational,
}

impl Intersection {
    fn new(alpha: Rational, delta: Rational) -> Self {
        Intersection { alpha, delta }
    }
}

/// Contour evaluator for one metric.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContourSpec {
    pub metric: MetricId,
    /// Raw benefit weights for decision benefit contours; normalised per slice.
    pub benefits: BenefitMatrix,
}

pub fn contour_spec(id: MetricId) -> Result<ContourSpec> {
    if !id.info().has_contour {
        return Err(Error::NoContourForm(id));
    }
    Ok(ContourSpec { metric: id, benefits: BenefitMatrix::default() })
}

/// Coefficients `[A, B, C]` of the contour polynomial in α.
type Coefficients = [Rational; 3];

impl ContourSpec {
    pub fn with_benefits(benefits: BenefitMatrix) -> Result<Self> {
        if !benefits.is_plottable() {
            return Err(Error::InvalidArgument(
                "contour benefits need beta_a > beta_c >= 0 and beta_d > beta_b >= 0".into(),
            ));
        }
        Ok(ContourSpec { metric: MetricId::Db, benefits })
    }

    pub fn level_range(&self) -> (f64, f64) {
        self.metric.info().range
    }

    pub fn prevalence_dependent(&self) -> bool {
        self.metric.info().prevalence_dependent
    }

    /// Number of solution branches returned by [`ContourSpec::alpha`].
    pub fn branches(&self) -> usize {
        use MetricId::*;
        match self.metric {
            Mcc | Mk | BMcc | BMk | Fm | BFm => 2,
            _ => 1,
        }
    }

    /// TPR values on the level-`k` contour at TNR `delta`, one per branch.
    pub fn alpha(&self, level: &MetricValue, p: u64, n: u64, delta: &Rational) -> Result<Vec<Alpha>> {
        use MetricId::*;
        let k = Level::parse(self.metric, level, p, n)?;
        let id = self.metric;
        let (p, n) = match id {
            BMcc | BMk | BF1 | BFm | BTs | BPpv | BNpv => (1, 1),
            _ => (p, n),
        };
        if id.info().prevalence_dependent && (p == 0 || n == 0) {
            return Err(Error::NoContourForm(id));
        }
        let solutions = match k {
            Level::Field(k) => vec![pt_alpha(&k, delta)],
            Level::Rational(k) => {
                let sign = k.cmp(&Rational::zero());
                self.roots(&k, sign, p, n, delta)?
            }
            Level::Squared { square, sign } => self.roots(&square, sign, p, n, delta)?,
        };
        Ok(solutions)
    }

    /// Coefficients `[A, B, C]` of the contour polynomial `Aα² + Bα + C` at
    /// TNR `delta`, before spurious roots are filtered. Root-valued metrics
    /// use the squared level. The prevalence threshold has no polynomial form.
    pub fn polynomial(&self, level: &MetricValue, p: u64, n: u64, delta: &Rational) -> Result<[Rational; 3]> {
        use MetricId::*;
        let (p, n) = match self.metric {
            BMcc | BMk | BF1 | BFm | BTs | BPpv | BNpv => (1, 1),
            _ => (p, n),
        };
        match Level::parse(self.metric, level, p, n)? {
            Level::Rational(k) | Level::Squared { square: k, .. } => self.coefficients(&k, p, n, delta),
            Level::Field(_) => Err(Error::NoContourForm(self.metric)),
        }
    }

    fn roots(&self, k: &Rational, sign: Ordering, p: u64, n: u64, delta: &Rational) -> Result<Vec<Alpha>> {
        let coeffs = self.coefficients(k, p, n, delta)?;
        let mut roots = solve(&coeffs, self.branches());
        self.filter(&mut roots, sign, p, n, delta);
        Ok(roots)
    }

    fn coefficients(&self, k: &Rational, p: u64, n: u64, delta: &Rational) -> Result<Coefficients> {
        use MetricId::*;
        let zero = Rational::zero;
        let one = Rational::one();
        let (pq, nq) = (uint(p), uint(n));
        let fpr = &one - delta;
        let coeffs = match self.metric {
            Tpr => [zero(), one, -k],
            Fnr => [zero(), one, k - int(1)],
            Tnr => [zero(), zero(), delta - k],
            Fpr => [zero(), zero(), &fpr - k],
            Ppv | BPpv => [zero(), &pq * (&one - k), -(k * &nq * &fpr)],
            Npv | BNpv => [zero(), k * &pq, &nq * delta * (&one - k) - k * &pq],
            LrPos | SlogLrPos => [zero(), one, -(k * &fpr)],
            LrNeg | SlogLrNeg => [zero(), one, k * delta - int(1)],
            Dor | SlogDor => [zero(), delta + k * &fpr, -(k * &fpr)],
            Acc => [zero(), pq.clone(), &nq * delta - k * (&pq + &nq)],
            Ba => [zero(), one, delta - k * int(2)],
            Bm => [zero(), one, delta - int(1) - k],
            Mk | BMk => {
                // k·(a + b)(c + d) = ad − bc, divided through by p·n where possible.
                let spread = &pq - &nq + int(2) * &nq * delta;
                let outer = &nq * &fpr * (&pq + &nq * delta);
                [
                    -(k * &pq * &pq),
                    k * &pq * &spread - &pq * &nq,
                    k * &outer + &pq * &nq * &fpr,
                ]
            }
            Mcc | BMcc => {
                // k²·(a + b)(a + c)(b + d)(c + d) = (ad − bc)²; here `k` is k².
                let spread = &pq - &nq + int(2) * &nq * delta;
                let outer = &nq * &fpr * (&pq + &nq * delta);
                let pn = &pq * &nq;
                [
                    &pn + k * &pq * &pq,
                    int(-2) * &pn * &fpr - k * &pq * &spread,
                    &pn * &fpr * &fpr - k * &outer,
                ]
            }
            F1 | BF1 => [zero(), &pq * (int(2) - k), -(k * (&pq + &nq * &fpr))],
            Ts | BTs => [zero(), pq.clone(), -(k * (&pq + &nq * &fpr))],
            Ck => {
                let pn = &pq * &nq;
                let den = &nq * &nq * &fpr + &pq * &pq + &pn * delta;
                [
                    zero(),
                    int(2) * &pn - k * &pq * (&nq - &pq),
                    int(-2) * &pn * &fpr - k * den,
                ]
            }
            // `k` is k² for the root-valued metrics below.
            Fm | BFm => [pq.clone(), -(k * &pq), -(k * &nq * &fpr)],
            Gm => [zero(), delta.clone(), -k.clone()],
            Db => {
                let beta = self.benefits.normalized(p + n)?;
                [
                    zero(),
                    &pq * (&beta.beta_a - &beta.beta_c),
                    &nq * delta * (&beta.beta_d - &beta.beta_b) + &pq * &beta.beta_c + &nq * &beta.beta_b - k,
                ]
            }
            Prev | Pt => return Err(Error::NoContourForm(self.metric)),
        };
        Ok(coeffs)
    }

    /// Drops roots introduced by squaring or by clearing denominators.
    fn filter(&self, roots: &mut [Alpha], sign: Ordering, p: u64, n: u64, delta: &Rational) {
        use MetricId::*;
        let predicted_positive = |alpha: &Surd| {
            // a + b = pα + n(1 − δ)
            alpha.scale(&uint(p)).add(&Surd::from_rational(uint(n) * (Rational::one() - delta)))
        };
        for root in roots.iter_mut() {
            let Alpha::Value(alpha) = &*root else { continue };
            let keep = match self.metric {
                Mcc | BMcc => {
                    // MCC has the sign of α + δ − 1.
                    let bm = alpha.add(&Surd::from_rational(delta - int(1)));
                    bm.map(|bm| bm.signum() == sign).unwrap_or(false)
                }
                Fm | BFm => predicted_positive(alpha).map(|s| !s.is_zero()).unwrap_or(false),
                Mk | BMk if sign != Ordering::Equal => {
                    let ab = predicted_positive(alpha);
                    // c + d = p(1 − α) + nδ
                    let cd = alpha
                        .scale(&-uint(p))
                        .add(&Surd::from_rational(uint(p) + uint(n) * delta));
                    matches!((ab, cd), (Some(x), Some(y)) if !x.is_zero() && !y.is_zero())
                }
                _ => true,
            };
            if !keep {
                *root = Alpha::Undefined;
            }
        }
    }

    /// Points shared by every contour of the metric, where they exist.
    pub fn intersections(&self, p: u64, n: u64) -> Vec<Intersection> {
        use MetricId::*;
        let (zero, one) = (Rational::zero(), Rational::one());
        match self.metric {
            F1 | Ts if n > 0 => vec![Intersection::new(zero, uint(p + n) / uint(n))],
            BF1 | BTs => vec![Intersection::new(zero, int(2))],
            Ppv | BPpv | LrPos | SlogLrPos | Pt | Fm | BFm => vec![Intersection::new(zero, one)],
            Npv | BNpv | LrNeg | SlogLrNeg => vec![Intersection::new(one, zero)],
            Mcc | Mk | BMcc | BMk | Dor | SlogDor => {
                vec![Intersection::new(zero.clone(), one.clone()), Intersection::new(one, zero)]
            }
            // Numerator and denominator of kappa both vanish here.
            Ck if p != n => {
                let x = uint(p) / (uint(p) - uint(n));
                vec![Intersection::new(x.clone(), one - x)]
            }
            _ => vec![],
        }
    }

    /// TNR of the vertical line that forms (part of) the level-`k` contour.
    pub fn vertical(&self, level: &MetricValue) -> Option<Rational> {
        use MetricId::*;
        let k = level.as_rational();
        let is = |v: i64| k == Some(&int(v));
        match self.metric {
            Tnr => k.cloned(),
            Fpr => k.map(|k| Rational::one() - k),
            Ppv | BPpv if is(1) => Some(int(1)),
            Npv | BNpv | Gm | Dor if is(0) => Some(int(0)),
            Pt if is(0) => Some(int(1)),
            _ => None,
        }
    }
}

/// A level converted to the field its polynomial lives in.
enum Level {
    Rational(Rational),
    /// Root-valued metrics enter their polynomial through k².
    Squared { square: Rational, sign: Ordering },
    /// Prevalence threshold levels, which may be irrational.
    Field(Surd),
}

impl Level {
    fn parse(id: MetricId, level: &MetricValue, p: u64, n: u64) -> Result<Level> {
        use MetricId::*;
        let invalid = || Error::InvalidLevel(format!("{level} for {id}"));
        if !level.is_finite() {
            return Err(invalid());
        }
        match id {
            SlogLrPos | SlogLrNeg | SlogDor => {
                let bound = slog_bound(id, p, n).ok_or(Error::DegenerateScale { metric: id, p, n })?;
                slog_ratio(level, &bound).map(Level::Rational).ok_or_else(invalid)
            }
            _ if matches!(level, MetricValue::ScaledLog { .. }) => Err(invalid()),
            Mcc | BMcc | Fm | BFm | Gm => {
                let sign = level.cmp_rational(&Rational::zero()).ok_or_else(invalid)?;
                if sign == Ordering::Less && id != Mcc && id != BMcc {
                    return Err(invalid());
                }
                let square = level.square().ok_or_else(invalid)?;
                Ok(Level::Squared { square, sign })
            }
            Pt => level.as_surd().map(Level::Field).ok_or_else(invalid),
            _ => level.as_rational().cloned().map(Level::Rational).ok_or_else(invalid),
        }
    }
}

/// The ratio `R` with `ln R / ln bound` equal to a scaled-log level. Exact when
/// the level's own bound is a root of `bound` or the level is a rational
/// multiple that keeps `R` rational; otherwise rounded through floats.
fn slog_ratio(level: &MetricValue, bound: &Rational) -> Option<Rational> {
    let (g, e) = rational_power(bound);
    let exact = match level {
        MetricValue::ScaledLog { ratio, bound: b } => {
            let (g2, e2) = rational_power(b);
            (g2 == g && e % e2 == 0).then(|| num_traits::pow(ratio.clone(), (e / e2) as usize))
        }
        MetricValue::Rational(v) => {
            let scaled = v * Rational::from_integer(e.into());
            scaled
                .is_integer()
                .then(|| scaled.to_integer().to_i32())
                .flatten()
                .filter(|k| k.unsigned_abs() <= 4096)
                .map(|k| num_traits::pow(g.clone(), k.unsigned_abs() as usize))
                .map(|r| if v.is_negative() { r.recip() } else { r })
        }
        _ => None,
    };
    exact.or_else(|| rational_from_f64((level.to_f64() * ln_rational(bound)).exp()))
}

/// Exact rational value of a finite float.
pub fn rational_from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

/// `α = (1 − δ)(1 − k)² / k²` for the prevalence threshold.
fn pt_alpha(k: &Surd, delta: &Rational) -> Alpha {
    let one = Surd::from_rational(Rational::one());
    let fpr = Rational::one() - delta;
    let Some(gap) = one.sub(k) else { return Alpha::Undefined };
    let (Some(num), Some(den)) = (gap.mul(&gap), k.mul(k)) else {
        return Alpha::Undefined;
    };
    if den.is_zero() {
        // k = 0 holds only on the vertical line δ = 1.
        return if fpr.is_zero() { Alpha::Vertical } else { Alpha::Undefined };
    }
    match num.scale(&fpr).div(&den) {
        Some(alpha) => Alpha::Value(alpha),
        None => Alpha::Undefined,
    }
}

fn solve(coeffs: &Coefficients, branches: usize) -> Vec<Alpha> {
    let [a, b, c] = coeffs;
    let mut roots = if a.is_zero() {
        let root = if b.is_zero() {
            if c.is_zero() {
                Alpha::Vertical
            } else {
                Alpha::Undefined
            }
        } else {
            Alpha::Value(Surd::from_rational(-c / b))
        };
        vec![root]
    } else {
        let disc = b * b - int(4) * a * c;
        if disc.is_negative() {
            vec![Alpha::Undefined, Alpha::Undefined]
        } else {
            let two_a = a * int(2);
            let centre = -b / &two_a;
            let half = two_a.recip();
            vec![
                Alpha::Value(Surd::new(centre.clone(), half.clone(), disc.clone())),
                Alpha::Value(Surd::new(centre, -half, disc)),
            ]
        }
    };
    roots.resize(branches.max(roots.len()), Alpha::Undefined);
    roots
}

/// Natural log of the scale bound of a scaled-log metric.
pub fn scale_factor(id: MetricId, p: u64, n: u64) -> Result<f64> {
    if !id.is_slog() {
        return Err(Error::InvalidArgument(format!("{id} has no log scale")));
    }
    slog_bound(id, p, n)
        .map(|b| ln_rational(&b))
        .ok_or(Error::DegenerateScale { metric: id, p, n })
}

/// Axis-aligned rectangle in (FPR, TPR) coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Window {
    pub fpr_min: Rational,
    pub fpr_max: Rational,
    pub tpr_min: Rational,
    pub tpr_max: Rational,
}

impl Window {
    pub fn new(fpr_min: Rational, fpr_max: Rational, tpr_min: Rational, tpr_max: Rational) -> Result<Self> {
        if fpr_min >= fpr_max || tpr_min >= tpr_max {
            return Err(Error::InvalidArgument("window bounds must be increasing".into()));
        }
        Ok(Window { fpr_min, fpr_max, tpr_min, tpr_max })
    }

    pub fn unit() -> Self {
        Window { fpr_min: int(0), fpr_max: int(1), tpr_min: int(0), tpr_max: int(1) }
    }

    /// `[lo, hi]²`.
    pub fn square(lo: Rational, hi: Rational) -> Result<Self> {
        Window::new(lo.clone(), hi.clone(), lo, hi)
    }

    fn contains_tpr(&self, alpha: &Surd) -> bool {
        alpha.cmp_rational(&self.tpr_min) != Ordering::Less
            && alpha.cmp_rational(&self.tpr_max) != Ordering::Greater
    }
}

/// A sampled piece of one contour branch.
#[derive(Clone, Debug, PartialEq)]
pub struct Polyline {
    pub level: MetricValue,
    pub branch: usize,
    /// `(fpr, tpr)` pairs in increasing FPR.
    pub points: Vec<(f64, f64)>,
}

/// Samples the level-`k` contour at `steps` evenly spaced FPR values across
/// the window. Undefined samples split a branch into separate polylines.
/// Where a branch leaves or enters the window between two samples, the
/// polyline is cut at the window edge by linear interpolation. Vertical
/// parts are emitted as two-point lines.
pub fn sample_contour(
    spec: &ContourSpec,
    level: &MetricValue,
    p: u64,
    n: u64,
    window: &Window,
    steps: usize,
) -> Result<Vec<Polyline>> {
    if steps < 2 {
        return Err(Error::InvalidArgument("steps must be at least 2".into()));
    }
    let (lo, hi) = (to_f64(&window.tpr_min), to_f64(&window.tpr_max));
    let mut tracers: Vec<Tracer> = (0..spec.branches()).map(|_| Tracer::default()).collect();
    let width = &window.fpr_max - &window.fpr_min;
    let last = uint(steps as u64 - 1);
    let fpr_at = |i: usize| &window.fpr_min + &width * uint(i as u64) / &last;
    for i in 0..steps {
        let fpr = fpr_at(i);
        let alphas = spec.alpha(level, p, n, &(Rational::one() - &fpr))?;
        let x = to_f64(&fpr);
        for (branch, alpha) in alphas.iter().enumerate() {
            let tracer = &mut tracers[branch];
            let Alpha::Value(a) = alpha else {
                tracer.cut();
                continue;
            };
            let y = a.to_f64();
            let inside = window.contains_tpr(a);
            if let Some((px, py, was_inside)) = tracer.last {
                if inside != was_inside {
                    // Only clip across a continuous stretch: the midpoint must
                    // lie between its neighbours.
                    let mid_fpr = (fpr_at(i - 1) + &fpr) / int(2);
                    let mid = spec.alpha(level, p, n, &(Rational::one() - mid_fpr))?;
                    let continuous = mid[branch]
                        .to_f64()
                        .is_some_and(|m| (m - py) * (y - m) >= 0.0);
                    if continuous {
                        let edge = if y.max(py) > hi { hi } else { lo };
                        let t = (edge - py) / (y - py);
                        tracer.push((px + t * (x - px), edge));
                    }
                    if !inside {
                        tracer.cut();
                    }
                }
            }
            if inside {
                tracer.push((x, y));
            }
            tracer.last = Some((x, y, inside));
        }
    }
    let mut out = Vec::new();
    for (branch, tracer) in tracers.into_iter().enumerate() {
        for points in tracer.finish() {
            out.push(Polyline { level: level.clone(), branch, points });
        }
    }
    if let Some(delta) = spec.vertical(level) {
        let fpr = Rational::one() - delta;
        if fpr >= window.fpr_min && fpr <= window.fpr_max {
            let x = to_f64(&fpr);
            out.push(Polyline { level: level.clone(), branch: 0, points: vec![(x, lo), (x, hi)] });
        }
    }
    out.sort_by_key(|line| line.branch);
    Ok(out)
}

#[derive(Default)]
struct Tracer {
    points: Vec<(f64, f64)>,
    done: Vec<Vec<(f64, f64)>>,
    /// Last defined sample and whether it was inside the window.
    last: Option<(f64, f64, bool)>,
}

impl Tracer {
    /// Appends a point unless it repeats the previous one, as a clip point
    /// landing on a sample does.
    fn push(&mut self, point: (f64, f64)) {
        if self.points.last() != Some(&point) {
            self.points.push(point);
        }
    }

    fn cut(&mut self) {
        let points = std::mem::take(&mut self.points);
        if points.len() >= 2 {
            self.done.push(points);
        }
        self.last = None;
    }

    fn finish(mut self) -> Vec<Vec<(f64, f64)>> {
        self.cut();
        self.done
    }
}

/// Default contour levels: tenths for bounded metrics, powers of two around
/// 1 for ratio metrics.
pub fn default_levels(id: MetricId) -> Vec<MetricValue> {
    let info = id.info();
    let tenths = |from: i64, to: i64| (from..=to).map(|i| MetricValue::Rational(Rational::new(i.into(), 10.into())));
    if info.range.1.is_infinite() {
        [(1, 4), (1, 2), (1, 1), (2, 1), (4, 1)]
            .into_iter()
            .map(|(a, b)| MetricValue::Rational(Rational::new(a.into(), b.into())))
            .collect()
    } else if info.signed {
        tenths(-9, 9).collect()
    } else {
        tenths(1, 9).collect()
    }
}
