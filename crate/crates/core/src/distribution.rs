//! Exact pmfs of metrics: lattice masses summed along each contour.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::geometry::enumerate_slice;
use crate::matrix::ConfusionMatrix;
use crate::metrics::{eval_metric, MetricId};
use crate::surd::{to_f64, uint, Rational};
use crate::uncertainty::JointPmf;
use crate::value::MetricValue;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PmfEntry {
    pub value: MetricValue,
    pub mass: Rational,
    /// Number of lattice points attaining the value.
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricPmf {
    pub metric: MetricId,
    pub p: u64,
    pub n: u64,
    /// Defined values in increasing order.
    pub entries: Vec<PmfEntry>,
    pub undefined_mass: Rational,
    pub undefined_count: u64,
}

impl MetricPmf {
    pub fn total_mass(&self) -> Rational {
        self.entries.iter().map(|e| &e.mass).sum::<Rational>() + &self.undefined_mass
    }

    pub fn entry(&self, value: &MetricValue) -> Option<&PmfEntry> {
        self.entries.iter().find(|e| &e.value == value)
    }

    /// The pmf conditioned on finite values, renormalised.
    pub fn conditional_on_finite(&self) -> Result<MetricPmf> {
        let finite: Vec<PmfEntry> = self.entries.iter().filter(|e| e.value.is_finite()).cloned().collect();
        let total: Rational = finite.iter().map(|e| &e.mass).sum();
        if total.is_zero() {
            return Err(Error::AllUndefined);
        }
        Ok(MetricPmf {
            metric: self.metric,
            p: self.p,
            n: self.n,
            entries: finite.into_iter().map(|e| PmfEntry { mass: e.mass / &total, ..e }).collect(),
            undefined_mass: Rational::zero(),
            undefined_count: 0,
        })
    }
}

/// Groups the joint pmf's lattice masses by exact metric value.
pub fn metric_pmf(id: MetricId, j: &JointPmf) -> MetricPmf {
    metric_pmf_with(id, j, |m| eval_metric(id, m))
}

/// As [`metric_pmf`], with a caller-supplied evaluator (for example decision
/// benefit with custom weights).
pub fn metric_pmf_with(id: MetricId, j: &JointPmf, eval: impl Fn(&ConfusionMatrix) -> MetricValue) -> MetricPmf {
    let mut groups: HashMap<MetricValue, (BigInt, u64)> = HashMap::new();
    let mut undefined = (BigInt::zero(), 0u64);
    for (a, d) in enumerate_slice(j.p, j.n).points() {
        let m = ConfusionMatrix::from_slice_point(j.p, j.n, a, d);
        let value = eval(&m);
        let weight = j.numerator(a, d);
        let slot = if value.is_defined() { groups.entry(value).or_default() } else { &mut undefined };
        slot.0 += weight;
        slot.1 += 1;
    }
    let den = j.denominator();
    let mut entries: Vec<PmfEntry> = groups
        .into_iter()
        .map(|(value, (num, count))| PmfEntry { value, mass: Rational::new(num, den.clone()), count })
        .collect();
    entries.sort_by(|x, y| x.value.total_cmp(&y.value));
    MetricPmf {
        metric: id,
        p: j.p,
        n: j.n,
        entries,
        undefined_mass: Rational::new(undefined.0, den),
        undefined_count: undefined.1,
    }
}

/// Lattice multiplicities of each metric value on the `(p, n)` slice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Multiplicity {
    pub entries: Vec<(MetricValue, u64)>,
    pub undefined: u64,
}

impl Multiplicity {
    pub fn count(&self, value: &MetricValue) -> u64 {
        self.entries.iter().find(|(v, _)| v == value).map_or(0, |(_, c)| *c)
    }

    pub fn distinct(&self) -> usize {
        self.entries.len()
    }
}

pub fn multiplicity(id: MetricId, p: u64, n: u64) -> Multiplicity {
    let mut groups: HashMap<MetricValue, u64> = HashMap::new();
    let mut undefined = 0;
    for m in enumerate_slice(p, n).matrices() {
        let value = eval_metric(id, &m);
        if value.is_defined() {
            *groups.entry(value).or_default() += 1;
        } else {
            undefined += 1;
        }
    }
    let mut entries: Vec<(MetricValue, u64)> = groups.into_iter().collect();
    entries.sort_by(|x, y| x.0.total_cmp(&y.0));
    Multiplicity { entries, undefined }
}

/// Value of maximal mass; ties go to the smaller value.
pub fn map_value(pmf: &MetricPmf) -> Result<MetricValue> {
    let mut best: Option<&PmfEntry> = None;
    for e in &pmf.entries {
        if best.is_none_or(|b| e.mass > b.mass) {
            best = Some(e);
        }
    }
    best.map(|e| e.value.clone()).ok_or(Error::AllUndefined)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub sd: f64,
    /// Narrowest contiguous run of support values holding at least the requested mass.
    pub interval: (MetricValue, MetricValue),
    pub interval_mass: Rational,
}

/// Mean, standard deviation and narrowest discrete credible interval.
pub fn summarize(pmf: &MetricPmf, interval_mass: &Rational) -> Result<Summary> {
    if !interval_mass.is_positive() || *interval_mass >= Rational::one() {
        return Err(Error::InvalidArgument(format!("interval mass {interval_mass} is not in (0, 1)")));
    }
    let positive = pmf.undefined_mass.is_positive()
        || pmf.entries.iter().any(|e| !e.value.is_finite() && e.mass.is_positive());
    if positive {
        return Err(Error::NonFiniteSupport);
    }
    let support: Vec<(f64, &PmfEntry)> = pmf
        .entries
        .iter()
        .filter(|e| e.mass.is_positive())
        .map(|e| (e.value.to_f64(), e))
        .collect();
    if support.is_empty() {
        return Err(Error::AllUndefined);
    }
    let mean: f64 = support.iter().map(|(v, e)| v * to_f64(&e.mass)).sum();
    let var: f64 = support.iter().map(|(v, e)| (v - mean) * (v - mean) * to_f64(&e.mass)).sum();

    // Two pointers over the ordered support; exact masses decide coverage.
    let mut best: Option<(f64, Rational, usize, usize)> = None;
    let mut acc = Rational::zero();
    let mut lo = 0;
    for hi in 0..support.len() {
        acc += &support[hi].1.mass;
        while lo < hi && &acc - &support[lo].1.mass >= *interval_mass {
            acc -= &support[lo].1.mass;
            lo += 1;
        }
        if acc >= *interval_mass {
            let width = support[hi].0 - support[lo].0;
            let better = match &best {
                None => true,
                Some((w, m, _, _)) => match width.partial_cmp(w) {
                    Some(Ordering::Less) => true,
                    Some(Ordering::Equal) => acc > *m,
                    _ => false,
                },
            };
            if better {
                best = Some((width, acc.clone(), lo, hi));
            }
        }
    }
    let (_, covered, lo, hi) = best.ok_or(Error::AllUndefined)?;
    Ok(Summary {
        mean,
        sd: var.max(0.0).sqrt(),
        interval: (support[lo].1.value.clone(), support[hi].1.value.clone()),
        interval_mass: covered,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Histogram {
    /// `bins + 1` edges.
    pub edges: Vec<Rational>,
    pub masses: Vec<Rational>,
    /// Mass of undefined, infinite or out-of-range values.
    pub excluded_mass: Rational,
}

/// Equal-width bins over the metric's level range, or over the finite
/// support for unbounded metrics. A value on an inner edge belongs to the
/// upper bin; the last bin is closed.
pub fn histogram(pmf: &MetricPmf, bins: usize) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::InvalidArgument("bins must be at least 1".into()));
    }
    let (lo, hi) = histogram_range(pmf)?;
    let width = (&hi - &lo) / uint(bins as u64);
    let edges: Vec<Rational> = (0..=bins).map(|i| &lo + &width * uint(i as u64)).collect();
    let mut masses = vec![Rational::zero(); bins];
    let mut excluded = pmf.undefined_mass.clone();
    for e in &pmf.entries {
        match bin_of(&e.value, &edges) {
            Some(i) => masses[i] += &e.mass,
            None => excluded += &e.mass,
        }
    }
    Ok(Histogram { edges, masses, excluded_mass: excluded })
}

fn histogram_range(pmf: &MetricPmf) -> Result<(Rational, Rational)> {
    let (lo, hi) = pmf.metric.info().range;
    if lo.is_finite() && hi.is_finite() {
        let exact = |x: f64| Rational::from_float(x).ok_or(Error::NonFiniteSupport);
        return Ok((exact(lo)?, exact(hi)?));
    }
    let finite: Vec<&MetricValue> = pmf.entries.iter().map(|e| &e.value).filter(|v| v.is_finite()).collect();
    let (Some(first), Some(last)) = (finite.first(), finite.last()) else {
        return Err(Error::NonFiniteSupport);
    };
    let approx = |v: &MetricValue| v.as_rational().cloned().or_else(|| Rational::from_float(v.to_f64()));
    let lo = approx(first).ok_or(Error::NonFiniteSupport)?;
    let mut hi = approx(last).ok_or(Error::NonFiniteSupport)?;
    if hi <= lo {
        hi = &lo + Rational::one();
    }
    Ok((lo, hi))
}

fn bin_of(value: &MetricValue, edges: &[Rational]) -> Option<usize> {
    let bins = edges.len() - 1;
    let below = |edge: &Rational| value.cmp_rational(edge) == Some(Ordering::Less);
    if below(&edges[0]) || value.cmp_rational(&edges[bins]) != Some(Ordering::Less) {
        // At or beyond the top edge: only the top edge itself is in range.
        return (value.cmp_rational(&edges[bins]) == Some(Ordering::Equal)).then_some(bins - 1);
    }
    // First edge strictly above the value.
    let upper = edges.partition_point(|edge| !below(edge));
    Some(upper - 1)
}
