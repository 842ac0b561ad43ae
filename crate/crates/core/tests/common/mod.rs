//! Independent floating-point oracles shared by the integration tests.
#![allow(dead_code)]

use confusion_core::contours::ContourSpec;
use confusion_core::geometry::{enumerate_slice, enumerate_total};
use confusion_core::surd::uint;
use confusion_core::{ConfusionMatrix, MetricId, MetricValue};

/// A metric value evaluated in plain f64 straight from the definitions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FVal {
    Finite(f64),
    PosInf,
    NegInf,
    Undef,
}

fn div(num: f64, den: f64) -> FVal {
    if den == 0.0 {
        FVal::Undef
    } else {
        FVal::Finite(num / den)
    }
}

/// x/0 → +∞ for x > 0, 0/0 → undefined.
fn unbounded(num: f64, den: f64) -> FVal {
    match (num == 0.0, den == 0.0) {
        (true, true) => FVal::Undef,
        (false, true) => FVal::PosInf,
        _ => FVal::Finite(num / den),
    }
}

fn slog(ratio: FVal, bound: Option<f64>) -> FVal {
    let Some(bound) = bound else { return FVal::Undef };
    match ratio {
        FVal::Finite(0.0) => FVal::NegInf,
        FVal::Finite(r) => FVal::Finite(r.ln() / bound.ln()),
        other => other,
    }
}

fn balanced(id: MetricId, t: f64, s: f64) -> FVal {
    use MetricId::*;
    let pos = t + 1.0 - s; // predicted positives at unit class sizes
    let neg = s + 1.0 - t;
    match id {
        BPpv => div(t, pos),
        BNpv => div(s, neg),
        BF1 => div(2.0 * t, 2.0 + t - s),
        BTs => div(t, 2.0 - s),
        BFm => div(t, pos.sqrt()),
        BMk | BMcc if pos == 0.0 || neg == 0.0 => FVal::Finite(0.0),
        BMk => FVal::Finite(t / pos + s / neg - 1.0),
        BMcc => FVal::Finite((t + s - 1.0) / (pos * neg).sqrt()),
        _ => unreachable!(),
    }
}

pub fn float_metric(id: MetricId, m: &ConfusionMatrix) -> FVal {
    use MetricId::*;
    let (a, b, c, d) = (m.a as f64, m.b as f64, m.c as f64, m.d as f64);
    let (p, n) = (a + c, b + d);
    let total = p + n;
    let both = p > 0.0 && n > 0.0;
    let pred_empty = a + b == 0.0 || c + d == 0.0;
    match id {
        Tpr => div(a, p),
        Tnr => div(d, n),
        Fpr => div(b, n),
        Fnr => div(c, p),
        Prev => div(p, total),
        Ppv => div(a, a + b),
        Npv => div(d, c + d),
        Acc | Db => div(a + d, total),
        Ba if both => FVal::Finite((a / p + d / n) / 2.0),
        Bm if both => FVal::Finite(a / p + d / n - 1.0),
        Mk | Mcc if both && pred_empty => FVal::Finite(0.0),
        Mk if both => FVal::Finite(a / (a + b) + d / (c + d) - 1.0),
        Mcc if both => FVal::Finite((a * d - b * c) / ((a + b) * (c + d) * p * n).sqrt()),
        F1 => div(2.0 * a, 2.0 * a + b + c),
        Ts => div(a, a + b + c),
        Ck => div(2.0 * (a * d - b * c), (a + b) * n + p * (c + d)),
        Fm => div(a, ((a + b) * p).sqrt()),
        Gm => div((a * d).sqrt(), (p * n).sqrt()),
        Pt if both => {
            let (t, f) = (a / p, b / n);
            if a == 0.0 && b == 0.0 {
                FVal::Undef
            } else if a * n == b * p {
                FVal::Finite(0.5)
            } else {
                FVal::Finite(((t * f).sqrt() - f) / (t - f))
            }
        }
        LrPos if both => unbounded(a * n, b * p),
        LrNeg if both => unbounded(c * n, d * p),
        Dor => unbounded(a * d, b * c),
        SlogLrPos | SlogLrNeg | SlogDor => {
            let base = float_metric(id.slog_base().unwrap(), m);
            let bound = (p >= 2.0 && n >= 2.0)
                .then(|| match id {
                    SlogLrPos => n * (p - 1.0) / p,
                    SlogLrNeg => p * n / (n - 1.0),
                    _ => (p - 1.0) * (n - 1.0),
                })
                .filter(|b| *b > 1.0);
            slog(base, bound)
        }
        BMcc | BMk | BF1 | BFm | BTs | BPpv | BNpv if both => balanced(id, a / p, d / n),
        _ => FVal::Undef,
    }
}

/// Whether an exact value and a float oracle agree within `tol` (relative above 1).
pub fn agrees(exact: &MetricValue, oracle: FVal, tol: f64) -> bool {
    match (exact, oracle) {
        (MetricValue::Undefined, FVal::Undef) => true,
        (MetricValue::PosInfinity, FVal::PosInf) => true,
        (MetricValue::NegInfinity, FVal::NegInf) => true,
        (v, FVal::Finite(x)) if v.is_finite() => (v.to_f64() - x).abs() <= tol * x.abs().max(1.0),
        _ => false,
    }
}

/// Every matrix with total at most `max_total`.
pub fn matrices_up_to(max_total: u64) -> impl Iterator<Item = ConfusionMatrix> {
    (0..=max_total).flat_map(enumerate_total)
}

/// Uniformly chosen cell counts with total at most `max_total`.
pub fn matrix_strategy(max_total: u64) -> impl proptest::strategy::Strategy<Value = ConfusionMatrix> {
    use proptest::prelude::*;
    (0..=max_total).prop_flat_map(|total| {
        (0..=total).prop_flat_map(move |a| {
            (0..=total - a).prop_flat_map(move |b| {
                (0..=total - a - b).prop_map(move |c| ConfusionMatrix::new(a, b, c, total - a - b - c))
            })
        })
    })
}

/// Whether the contour of `spec` at `level` passes through lattice point `(a, d)`.
pub fn on_contour(spec: &ContourSpec, level: &MetricValue, p: u64, n: u64, a: u64, d: u64) -> bool {
    let delta = uint(d) / uint(n);
    let alpha = uint(a) / uint(p);
    if spec.vertical(level).as_ref() == Some(&delta) {
        return true;
    }
    match spec.alpha(level, p, n, &delta) {
        Ok(roots) => roots.iter().any(|r| r.contains(&alpha)),
        Err(_) => false,
    }
}

/// Metrics that have a contour form.
pub fn contour_metrics() -> impl Iterator<Item = MetricId> {
    MetricId::ALL.into_iter().filter(|id| id.info().has_contour)
}

/// Groups a slice by float value (ties within `tol`) and returns the sorted
/// group sizes together with the number of undefined points.
pub fn float_groups(id: MetricId, p: u64, n: u64, tol: f64) -> (Vec<u64>, u64) {
    let mut values = Vec::new();
    let mut undefined = 0;
    let mut infinite = [0u64; 2];
    for m in enumerate_slice(p, n).matrices() {
        match float_metric(id, &m) {
            FVal::Finite(x) => values.push(x),
            FVal::NegInf => infinite[0] += 1,
            FVal::PosInf => infinite[1] += 1,
            FVal::Undef => undefined += 1,
        }
    }
    values.sort_by(f64::total_cmp);
    let mut groups = Vec::new();
    if infinite[0] > 0 {
        groups.push(infinite[0]);
    }
    let mut i = 0;
    while i < values.len() {
        let mut j = i + 1;
        while j < values.len() && values[j] - values[j - 1] <= tol {
            j += 1;
        }
        groups.push((j - i) as u64);
        i = j;
    }
    if infinite[1] > 0 {
        groups.push(infinite[1]);
    }
    (groups, undefined)
}
