//! JSON encodings shared by the CLI, the service and the wasm demo.
//!
//! Exact quantities carry decimal-string numerators and denominators next to
//! a float rendering rounded to 12 significant digits. Object keys are
//! sorted, so output is byte-stable.

use serde_json::{json, Map, Value};

use crate::contours::{Intersection, Polyline};
use crate::distribution::{Histogram, MetricPmf, PmfEntry, Summary};
use crate::geometry::Point3;
use crate::metrics::MetricInfo;
use crate::surd::{to_f64, Rational};
use crate::value::MetricValue;

/// A float rounded to 12 significant digits; non-finite values become null.
pub fn float(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    // Avoid "-0.0" in output.
    let rounded = if rounded == 0.0 { 0.0 } else { rounded };
    json!(rounded)
}

pub fn rational(q: &Rational) -> Value {
    json!({
        "num": q.numer().to_string(),
        "den": q.denom().to_string(),
        "float": float(to_f64(q)),
    })
}

pub fn metric_value(v: &MetricValue) -> Value {
    let mut obj = Map::new();
    obj.insert("kind".into(), json!(v.kind()));
    match v {
        MetricValue::Rational(q) => {
            obj.insert("num".into(), json!(q.numer().to_string()));
            obj.insert("den".into(), json!(q.denom().to_string()));
        }
        MetricValue::SignedSqrt { negative, square } => {
            // The value is sign·√(num/den).
            obj.insert("sign".into(), json!(if *negative { -1 } else { 1 }));
            obj.insert("num".into(), json!(square.numer().to_string()));
            obj.insert("den".into(), json!(square.denom().to_string()));
        }
        MetricValue::Surd { rational: r, coeff, radicand } => {
            obj.insert("rational".into(), exact(r));
            obj.insert("coeff".into(), exact(coeff));
            obj.insert("radicand".into(), json!(radicand.to_string()));
        }
        MetricValue::ScaledLog { ratio, bound } => {
            // The value is ln(num/den) / ln(bound).
            obj.insert("num".into(), json!(ratio.numer().to_string()));
            obj.insert("den".into(), json!(ratio.denom().to_string()));
            obj.insert("bound".into(), exact(bound));
        }
        MetricValue::PosInfinity | MetricValue::NegInfinity | MetricValue::Undefined => {}
    }
    obj.insert("float".into(), float(v.to_f64()));
    Value::Object(obj)
}

fn exact(q: &Rational) -> Value {
    json!({ "num": q.numer().to_string(), "den": q.denom().to_string() })
}

pub fn polyline(line: &Polyline) -> Value {
    json!({
        "level": float(line.level.to_f64()),
        "branch": line.branch,
        "points": line.points.iter().map(|&(x, y)| json!([float(x), float(y)])).collect::<Vec<_>>(),
    })
}

pub fn intersection(pt: &Intersection) -> Value {
    json!({ "alpha": rational(&pt.alpha), "delta": rational(&pt.delta) })
}

pub fn point3(pt: &Point3) -> Value {
    json!([rational(&pt.x), rational(&pt.y), rational(&pt.z)])
}

pub fn pmf_entry(e: &PmfEntry) -> Value {
    json!({ "value": metric_value(&e.value), "mass": rational(&e.mass), "count": e.count })
}

pub fn metric_pmf(pmf: &MetricPmf) -> Value {
    json!({
        "metric": pmf.metric.key(),
        "p": pmf.p,
        "n": pmf.n,
        "entries": pmf.entries.iter().map(pmf_entry).collect::<Vec<_>>(),
        "undefined": { "mass": rational(&pmf.undefined_mass), "count": pmf.undefined_count },
    })
}

pub fn summary(s: &Summary) -> Value {
    json!({
        "mean": float(s.mean),
        "sd": float(s.sd),
        "interval": [metric_value(&s.interval.0), metric_value(&s.interval.1)],
        "interval_mass": rational(&s.interval_mass),
    })
}

pub fn histogram(h: &Histogram) -> Value {
    json!({
        "edges": h.edges.iter().map(|e| float(to_f64(e))).collect::<Vec<_>>(),
        "masses": h.masses.iter().map(rational).collect::<Vec<_>>(),
        "excluded_mass": rational(&h.excluded_mass),
    })
}

pub fn metric_info(info: &MetricInfo) -> Value {
    json!({
        "key": info.key,
        "label": info.label,
        "name": info.name,
        "range": [float(info.range.0), float(info.range.1)],
        "signed": info.signed,
        "prevalence_dependent": info.prevalence_dependent,
        "balanced": info.balanced,
        "contour": info.has_contour,
    })
}
