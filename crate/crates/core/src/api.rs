//! Request handling shared by the CLI and the HTTP service.
//!
//! Both front ends turn their inputs into a flat string map and call
//! [`handle`], so identical parameters give byte-identical JSON.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::contours::{contour_spec, default_levels, sample_contour, ContourSpec, Window};
use crate::distribution::{histogram, map_value, metric_pmf_with, summarize};
use crate::error::Error;
use crate::geometry::{count_matrices, enumerate_slice, enumerate_total, roc_to_pr, Projection};
use crate::json::{self, float, rational};
use crate::matrix::ConfusionMatrix;
use crate::metrics::{decision_benefit, eval_metric, BenefitMatrix, MetricId};
use crate::surd::{parse_rational, to_f64, uint, Rational};
use crate::uncertainty::{
    joint_predictive, marginals, posterior_params, BetaPrior, JointPmf, Model, Observation, Priors, RatePmf,
};
use crate::value::MetricValue;

pub type Params = BTreeMap<String, String>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Endpoint {
    Lattice,
    Project,
    Contours,
    JointPmf,
    MetricPmf,
    PrMap,
    Metrics,
    Oracle,
}

impl Endpoint {
    pub const ALL: [Endpoint; 8] = [
        Endpoint::Lattice,
        Endpoint::Project,
        Endpoint::Contours,
        Endpoint::JointPmf,
        Endpoint::MetricPmf,
        Endpoint::PrMap,
        Endpoint::Metrics,
        Endpoint::Oracle,
    ];

    pub fn path(self) -> &'static str {
        match self {
            Endpoint::Lattice => "/api/lattice",
            Endpoint::Project => "/api/project",
            Endpoint::Contours => "/api/contours",
            Endpoint::JointPmf => "/api/pmf/joint",
            Endpoint::MetricPmf => "/api/pmf/metric",
            Endpoint::PrMap => "/api/pr-map",
            Endpoint::Metrics => "/api/metrics",
            Endpoint::Oracle => "/api/oracle",
        }
    }

    fn allowed(self) -> &'static [&'static str] {
        const OBS: [&str; 9] = ["model", "tp", "fp", "fn", "tn", "pos", "neg", "prior", "prior_tp"];
        match self {
            Endpoint::Lattice => &["total", "pos", "neg", "count_only"],
            Endpoint::Project => &["kind", "total", "pos", "neg", "tp", "fp", "fn", "tn"],
            Endpoint::Contours => &["metric", "levels", "pos", "neg", "window", "steps", "benefits"],
            Endpoint::JointPmf => &[OBS[0], OBS[1], OBS[2], OBS[3], OBS[4], OBS[5], OBS[6], OBS[7], OBS[8], "prior_tn"],
            Endpoint::MetricPmf => &[
                OBS[0], OBS[1], OBS[2], OBS[3], OBS[4], OBS[5], OBS[6], OBS[7], OBS[8], "prior_tn", "metric",
                "interval", "bins", "benefits",
            ],
            Endpoint::PrMap => &["pos", "neg", "fpr", "tpr"],
            Endpoint::Metrics => &[],
            Endpoint::Oracle => &[
                OBS[0], OBS[1], OBS[2], OBS[3], OBS[4], OBS[5], OBS[6], OBS[7], OBS[8], "prior_tn", "draws", "seed",
            ],
        }
    }
}

impl FromStr for Endpoint {
    type Err = ApiError;

    fn from_str(s: &str) -> Result<Self, ApiError> {
        Endpoint::ALL
            .into_iter()
            .find(|e| e.path() == s)
            .ok_or_else(|| ApiError::usage("unknown_endpoint", format!("no endpoint at {s}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed or missing parameters.
    Usage,
    /// Valid request refused by a size limit.
    Guard,
    /// Valid request whose computation is undefined.
    Compute,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{message}")]
pub struct ApiError {
    pub kind: ErrorKind,
    pub code: String,
    pub message: String,
}

impl ApiError {
    pub fn usage(code: &str, message: impl Into<String>) -> Self {
        ApiError { kind: ErrorKind::Usage, code: code.into(), message: message.into() }
    }

    fn guard(message: impl Into<String>) -> Self {
        ApiError { kind: ErrorKind::Guard, code: "limit_exceeded".into(), message: message.into() }
    }

    pub fn status(&self) -> u16 {
        match self.kind {
            ErrorKind::Guard => 422,
            ErrorKind::Usage | ErrorKind::Compute => 400,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Usage => 2,
            ErrorKind::Guard | ErrorKind::Compute => 1,
        }
    }

    pub fn body(&self) -> String {
        pretty(&json!({ "error": { "code": self.code, "message": self.message } }))
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let (kind, code) = match &e {
            Error::NegativeCount { .. } => (ErrorKind::Usage, "negative_count"),
            Error::UnknownMetric(_) => (ErrorKind::Usage, "unknown_metric"),
            Error::InvalidLevel(_) => (ErrorKind::Usage, "invalid_level"),
            Error::InvalidArgument(_) => (ErrorKind::Usage, "invalid_argument"),
            Error::RateOutOfRange { .. } => (ErrorKind::Usage, "rate_out_of_range"),
            Error::NonPositiveShape { .. } => (ErrorKind::Usage, "non_positive_shape"),
            Error::CountExceedsTrials { .. } => (ErrorKind::Usage, "count_exceeds_trials"),
            Error::GridTooLarge { .. } | Error::TooManyTrials { .. } => (ErrorKind::Guard, "limit_exceeded"),
            Error::NoBalancedForm(_) => (ErrorKind::Compute, "no_balanced_form"),
            Error::NoContourForm(_) => (ErrorKind::Compute, "no_contour_form"),
            Error::EmpiricalRateUndefined { .. } => (ErrorKind::Compute, "empirical_rate_undefined"),
            Error::ConstantBenefits => (ErrorKind::Compute, "constant_benefits"),
            Error::DegenerateScale { .. } => (ErrorKind::Compute, "degenerate_scale"),
            Error::EmptyMatrix => (ErrorKind::Compute, "empty_matrix"),
            Error::NoPositives => (ErrorKind::Compute, "no_positives"),
            Error::AllUndefined => (ErrorKind::Compute, "all_undefined"),
            Error::NonFiniteSupport => (ErrorKind::Compute, "non_finite_support"),
        };
        ApiError { kind, code: code.into(), message: e.to_string() }
    }
}

/// Size limits applied to every request.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Largest `p·n` for pmf grids.
    pub max_grid: u128,
    /// Largest `N = p + n` for lattice slices.
    pub max_total: u64,
    /// Largest number of points in any lattice or projection dump.
    pub max_points: u128,
    pub max_steps: usize,
    pub max_draws: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_grid: 1_000_000, max_total: 10_000, max_points: 1_000_000, max_steps: 10_001, max_draws: 10_000_000 }
    }
}

/// A flat table for CSV output.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(headers: &[&str]) -> Self {
        Table { headers: headers.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

/// Drawable content for the fixed-style SVG renderer.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// `[x_min, x_max, y_min, y_max]`.
    pub window: [f64; 4],
    pub lines: Vec<Vec<(f64, f64)>>,
    /// `(x, y, weight)` with weight in `[0, 1]` scaling the marker area.
    pub dots: Vec<(f64, f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Response {
    pub json: Value,
    pub table: Table,
    pub plot: Option<Plot>,
}

impl Response {
    /// Pretty-printed JSON with a trailing newline.
    pub fn to_json_string(&self) -> String {
        pretty(&self.json)
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).unwrap_or_else(|_| "null".into());
    s.push('\n');
    s
}

/// Canonical cache key for a request.
pub fn canonical_key(endpoint: Endpoint, params: &Params) -> String {
    let query: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("{}?{}", endpoint.path(), query.join("&"))
}

pub fn handle(endpoint: Endpoint, params: &Params, limits: &Limits) -> Result<Response, ApiError> {
    let q = Query::new(endpoint, params)?;
    match endpoint {
        Endpoint::Lattice => lattice(&q, limits),
        Endpoint::Project => project(&q, limits),
        Endpoint::Contours => contours(&q, limits),
        Endpoint::JointPmf => joint(&q, limits),
        Endpoint::MetricPmf => metric(&q, limits),
        Endpoint::PrMap => pr_map(&q, limits),
        Endpoint::Metrics => Ok(catalogue()),
        Endpoint::Oracle => oracle(&q, limits),
    }
}

struct Query<'a> {
    params: &'a Params,
}

impl<'a> Query<'a> {
    fn new(endpoint: Endpoint, params: &'a Params) -> Result<Self, ApiError> {
        if let Some(key) = params.keys().find(|k| !endpoint.allowed().contains(&k.as_str())) {
            return Err(ApiError::usage("unknown_parameter", format!("unknown parameter `{key}`")));
        }
        Ok(Query { params })
    }

    fn raw(&self, key: &str) -> Option<&'a str> {
        self.params.get(key).map(|s| s.trim())
    }

    fn u64(&self, key: &str) -> Result<Option<u64>, ApiError> {
        self.raw(key)
            .map(|s| {
                s.parse::<u64>()
                    .map_err(|_| ApiError::usage("invalid_argument", format!("`{key}` must be a non-negative integer, got `{s}`")))
            })
            .transpose()
    }

    fn required_u64(&self, key: &str) -> Result<u64, ApiError> {
        self.u64(key)?.ok_or_else(|| ApiError::usage("missing_parameter", format!("`{key}` is required")))
    }

    fn rational(&self, key: &str) -> Result<Option<Rational>, ApiError> {
        self.raw(key).map(|s| parse_number(key, s)).transpose()
    }

    fn list(&self, key: &str) -> Result<Option<Vec<Rational>>, ApiError> {
        self.raw(key)
            .map(|s| s.split(',').map(|part| parse_number(key, part)).collect::<Result<Vec<_>, _>>())
            .transpose()
    }

    fn flag(&self, key: &str) -> Result<bool, ApiError> {
        match self.raw(key) {
            None | Some("false") | Some("0") => Ok(false),
            Some("") | Some("true") | Some("1") => Ok(true),
            Some(other) => Err(ApiError::usage("invalid_argument", format!("`{key}` must be true or false, got `{other}`"))),
        }
    }

    fn metric(&self) -> Result<MetricId, ApiError> {
        let s = self.raw("metric").ok_or_else(|| ApiError::usage("missing_parameter", "`metric` is required"))?;
        Ok(s.parse::<MetricId>()?)
    }

    fn prior(&self, key: &str) -> Result<Option<BetaPrior>, ApiError> {
        match self.list(key)? {
            None => Ok(None),
            Some(v) if v.len() == 2 => Ok(Some(BetaPrior::new(v[0].clone(), v[1].clone())?)),
            Some(_) => Err(ApiError::usage("invalid_argument", format!("`{key}` must be two numbers `u,v`"))),
        }
    }

    fn priors(&self) -> Result<Priors, ApiError> {
        let both = self.prior("prior")?.unwrap_or_default();
        Ok(Priors {
            tp: self.prior("prior_tp")?.unwrap_or_else(|| both.clone()),
            tn: self.prior("prior_tn")?.unwrap_or(both),
        })
    }

    fn observation(&self) -> Result<Observation, ApiError> {
        let get = |k| self.u64(k).map(|v| v.unwrap_or(0));
        Ok(Observation::new(get("tp")?, get("fp")?, get("fn")?, get("tn")?))
    }

    fn model(&self) -> Result<Model, ApiError> {
        Ok(self.raw("model").map(str::parse).transpose()?.unwrap_or(Model::BetaBinomial))
    }

    fn benefits(&self) -> Result<Option<BenefitMatrix>, ApiError> {
        match self.list("benefits")? {
            None => Ok(None),
            Some(v) if v.len() == 4 => {
                let [a, b, c, d] = <[Rational; 4]>::try_from(v).expect("length checked");
                Ok(Some(BenefitMatrix::new(a, b, c, d)))
            }
            Some(_) => Err(ApiError::usage("invalid_argument", "`benefits` must be four numbers `a,b,c,d`")),
        }
    }
}

fn parse_number(key: &str, s: &str) -> Result<Rational, ApiError> {
    parse_rational(s).ok_or_else(|| ApiError::usage("invalid_argument", format!("`{key}` has an invalid number `{s}`")))
}

fn matrix_json(m: &ConfusionMatrix) -> Value {
    json!([m.a, m.b, m.c, m.d])
}

fn big_count(c: &BigUint) -> Value {
    match c.to_u64() {
        Some(v) => json!(v),
        None => json!(c.to_string()),
    }
}

fn check_points(points: u128, limits: &Limits) -> Result<(), ApiError> {
    if points > limits.max_points {
        return Err(ApiError::guard(format!("{points} points exceed the limit of {}", limits.max_points)));
    }
    Ok(())
}

fn check_slice(p: u64, n: u64, limits: &Limits) -> Result<(), ApiError> {
    if p.saturating_add(n) > limits.max_total {
        return Err(ApiError::guard(format!("N = {} exceeds the limit of {}", p.saturating_add(n), limits.max_total)));
    }
    check_points((p as u128 + 1) * (n as u128 + 1), limits)
}

fn rate_f64(k: u64, total: u64) -> f64 {
    if total == 0 {
        f64::NAN
    } else {
        k as f64 / total as f64
    }
}

fn lattice(q: &Query, limits: &Limits) -> Result<Response, ApiError> {
    let count_only = q.flag("count_only")?;
    if let Some(total) = q.u64("total")? {
        let count = count_matrices(total);
        if count_only {
            return Ok(Response {
                json: big_count(&count),
                table: Table { headers: vec!["total".into(), "count".into()], rows: vec![vec![total.to_string(), count.to_string()]] },
                plot: None,
            });
        }
        check_points(count.to_u128().unwrap_or(u128::MAX), limits)?;
        let mut table = Table::new(&["a", "b", "c", "d"]);
        let matrices: Vec<Value> = enumerate_total(total)
            .map(|m| {
                table.push(vec![m.a.to_string(), m.b.to_string(), m.c.to_string(), m.d.to_string()]);
                matrix_json(&m)
            })
            .collect();
        let json = json!({ "total": total, "count": big_count(&count), "matrices": matrices });
        return Ok(Response { json, table, plot: None });
    }
    let (p, n) = (q.required_u64("pos")?, q.required_u64("neg")?);
    let slice = enumerate_slice(p, n);
    if count_only {
        return Ok(Response {
            json: json!(slice.len() as u64),
            table: Table { headers: vec!["p".into(), "n".into(), "count".into()], rows: vec![vec![p.to_string(), n.to_string(), slice.len().to_string()]] },
            plot: None,
        });
    }
    check_slice(p, n, limits)?;
    let mut table = Table::new(&["a", "b", "c", "d", "fpr", "tpr"]);
    let mut plot = unit_plot(format!("ROC lattice p={p} n={n}"), "FPR", "TPR");
    let points: Vec<Value> = slice
        .matrices()
        .map(|m| {
            let (x, y) = (rate_f64(m.b, n), rate_f64(m.a, p));
            table.push(vec![m.a.to_string(), m.b.to_string(), m.c.to_string(), m.d.to_string(), fmt_f64(x), fmt_f64(y)]);
            plot.dots.push((x, y, 0.0));
            json!({ "a": m.a, "d": m.d, "matrix": matrix_json(&m), "fpr": float(x), "tpr": float(y) })
        })
        .collect();
    let json = json!({ "p": p, "n": n, "count": slice.len() as u64, "points": points });
    Ok(Response { json, table, plot: Some(plot) })
}

fn project(q: &Query, limits: &Limits) -> Result<Response, ApiError> {
    let kind: Projection = q.raw("kind").map(str::parse).transpose()?.unwrap_or(Projection::Simplex);
    let single = ["tp", "fp", "fn", "tn"].iter().any(|k| q.raw(k).is_some());
    let matrices: Vec<ConfusionMatrix> = if single {
        let o = q.observation()?;
        vec![o.matrix()]
    } else if let Some(total) = q.u64("total")? {
        check_points(count_matrices(total).to_u128().unwrap_or(u128::MAX), limits)?;
        enumerate_total(total).collect()
    } else {
        let (p, n) = (q.required_u64("pos")?, q.required_u64("neg")?);
        check_slice(p, n, limits)?;
        enumerate_slice(p, n).matrices().collect()
    };
    let mut table = Table::new(&["a", "b", "c", "d", "x", "y", "z"]);
    let mut points = Vec::with_capacity(matrices.len());
    for m in &matrices {
        let pt = kind.apply(m)?;
        table.push(vec![
            m.a.to_string(),
            m.b.to_string(),
            m.c.to_string(),
            m.d.to_string(),
            fmt_f64(to_f64(&pt.x)),
            fmt_f64(to_f64(&pt.y)),
            fmt_f64(to_f64(&pt.z)),
        ]);
        points.push(json!({ "matrix": matrix_json(m), "coords": json::point3(&pt) }));
    }
    let json = json!({ "kind": kind.key(), "count": points.len(), "points": points });
    Ok(Response { json, table, plot: None })
}

/// Parses a contour level: a number, or `sqrt(q)` / `-sqrt(q)` for exact roots.
fn parse_level(s: &str) -> Result<MetricValue, ApiError> {
    let s = s.trim();
    let (negative, rest) = match s.strip_prefix('-') {
        Some(rest) if rest.starts_with("sqrt(") => (true, rest),
        _ => (false, s),
    };
    if let Some(inner) = rest.strip_prefix("sqrt(").and_then(|r| r.strip_suffix(')')) {
        let square = parse_number("levels", inner)?;
        if square < Rational::zero() {
            return Err(ApiError::usage("invalid_level", format!("negative square in `{s}`")));
        }
        return Ok(MetricValue::signed_sqrt(negative, square));
    }
    Ok(MetricValue::Rational(parse_number("levels", s)?))
}

fn window(q: &Query) -> Result<Window, ApiError> {
    let Some(v) = q.list("window")? else { return Ok(Window::unit()) };
    let w = match v.len() {
        2 => Window::square(v[0].clone(), v[1].clone()),
        4 => Window::new(v[0].clone(), v[1].clone(), v[2].clone(), v[3].clone()),
        _ => return Err(ApiError::usage("invalid_argument", "`window` must be `lo,hi` or `fpr_min,fpr_max,tpr_min,tpr_max`")),
    };
    Ok(w?)
}

fn contours(q: &Query, limits: &Limits) -> Result<Response, ApiError> {
    let id = q.metric()?;
    let spec = match q.benefits()? {
        Some(b) if id == MetricId::Db => ContourSpec::with_benefits(b)?,
        Some(_) => return Err(ApiError::usage("invalid_argument", "`benefits` applies to the db metric only")),
        None => contour_spec(id)?,
    };
    let needs_counts = id.info().prevalence_dependent || id.is_slog();
    let (p, n) = (q.u64("pos")?, q.u64("neg")?);
    let (p, n) = match (p, n) {
        (Some(p), Some(n)) => (p, n),
        (None, None) if !needs_counts => (1, 1),
        _ => return Err(ApiError::usage("missing_parameter", format!("`pos` and `neg` are required for {id}"))),
    };
    let levels = match q.raw("levels") {
        Some(s) => s.split(',').map(parse_level).collect::<Result<Vec<_>, _>>()?,
        None => default_levels(id),
    };
    let steps = q.u64("steps")?.unwrap_or(101) as usize;
    if steps > limits.max_steps {
        return Err(ApiError::guard(format!("{steps} steps exceed the limit of {}", limits.max_steps)));
    }
    let win = window(q)?;
    let mut lines = Vec::new();
    for level in &levels {
        lines.extend(sample_contour(&spec, level, p, n, &win, steps)?);
    }
    let mut table = Table::new(&["level", "branch", "segment", "fpr", "tpr"]);
    let mut plot = Plot {
        title: format!("{id} contours"),
        x_label: "FPR".into(),
        y_label: "TPR".into(),
        window: [to_f64(&win.fpr_min), to_f64(&win.fpr_max), to_f64(&win.tpr_min), to_f64(&win.tpr_max)],
        ..Plot::default()
    };
    for (i, line) in lines.iter().enumerate() {
        for &(x, y) in &line.points {
            table.push(vec![fmt_f64(line.level.to_f64()), line.branch.to_string(), i.to_string(), fmt_f64(x), fmt_f64(y)]);
        }
        plot.lines.push(line.points.clone());
    }
    let counts = if needs_counts { json!({ "p": p, "n": n }) } else { json!({ "p": Value::Null, "n": Value::Null }) };
    let json = json!({
        "metric": id.key(),
        "p": counts["p"],
        "n": counts["n"],
        "window": plot.window.iter().map(|&x| float(x)).collect::<Vec<_>>(),
        "steps": steps,
        "levels": levels.iter().map(json::metric_value).collect::<Vec<_>>(),
        "intersections": spec.intersections(p, n).iter().map(json::intersection).collect::<Vec<_>>(),
        "polylines": lines.iter().map(json::polyline).collect::<Vec<_>>(),
    });
    Ok(Response { json, table, plot: Some(plot) })
}

struct PmfRequest {
    model: Model,
    obs: Observation,
    priors: Priors,
    joint: JointPmf,
}

fn pmf_request(q: &Query, limits: &Limits) -> Result<PmfRequest, ApiError> {
    let model = q.model()?;
    let obs = q.observation()?;
    let priors = q.priors()?;
    let p = q.u64("pos")?.unwrap_or(obs.p1());
    let n = q.u64("neg")?.unwrap_or(obs.n1());
    if p as u128 * n as u128 > limits.max_grid {
        return Err(ApiError::guard(format!("p·n = {} exceeds the limit of {}", p as u128 * n as u128, limits.max_grid)));
    }
    let joint = joint_predictive(model, &obs, &priors, p, n)?;
    Ok(PmfRequest { model, obs, priors, joint })
}

fn rate_pmf_json(pmf: &RatePmf) -> Value {
    Value::Array(pmf.entries.iter().map(|(r, m)| json!({ "rate": rational(r), "mass": rational(m) })).collect())
}

fn model_json(req: &PmfRequest) -> Value {
    let o = &req.obs;
    let mut v = json!({
        "model": req.model.key(),
        "p": req.joint.p,
        "n": req.joint.n,
        "observation": { "tp": o.a1, "fp": o.b1, "fn": o.c1, "tn": o.d1 },
    });
    match req.model {
        Model::BetaBinomial => {
            let (tp, tn) = posterior_params(&req.priors, o);
            v["posterior"] = json!({
                "tp": { "u": rational(&tp.u), "v": rational(&tp.v) },
                "tn": { "u": rational(&tn.u), "v": rational(&tn.v) },
            });
        }
        Model::Binomial => {
            v["theta"] = json!({
                "tpr": rational(&(uint(o.a1) / uint(o.p1()))),
                "tnr": rational(&(uint(o.d1) / uint(o.n1()))),
            });
        }
    }
    v
}

fn joint(q: &Query, limits: &Limits) -> Result<Response, ApiError> {
    let req = pmf_request(q, limits)?;
    let j = &req.joint;
    let (tpr, fpr) = marginals(j);
    let mut json = model_json(&req);
    json["tpr_marginal"] = rate_pmf_json(&tpr);
    json["fpr_marginal"] = rate_pmf_json(&fpr);
    json["tpr_sd"] = float(tpr.sd());
    json["fpr_sd"] = float(fpr.sd());

    let tp = j.tp.to_f64();
    let tn = j.tn.to_f64();
    let peak = tp.iter().cloned().fold(0.0, f64::max) * tn.iter().cloned().fold(0.0, f64::max);
    let mut table = Table::new(&["a", "d", "fpr", "tpr", "mass"]);
    let mut plot = unit_plot(format!("{} joint pmf p={} n={}", req.model, j.p, j.n), "FPR", "TPR");
    for a in 0..=j.p {
        for d in 0..=j.n {
            let mass = tp[a as usize] * tn[d as usize];
            let (x, y) = (rate_f64(j.n - d, j.n), rate_f64(a, j.p));
            table.push(vec![a.to_string(), d.to_string(), fmt_f64(x), fmt_f64(y), fmt_f64(mass)]);
            if mass > 0.0 && peak > 0.0 {
                plot.dots.push((x, y, mass / peak));
            }
        }
    }
    Ok(Response { json, table, plot: Some(plot) })
}

fn metric(q: &Query, limits: &Limits) -> Result<Response, ApiError> {
    let id = q.metric()?;
    let interval = q.rational("interval")?.unwrap_or_else(|| Rational::new(95.into(), 100.into()));
    let bins = q.u64("bins")?.unwrap_or(10) as usize;
    if bins == 0 || bins > 10_000 {
        return Err(ApiError::usage("invalid_argument", "`bins` must be between 1 and 10000"));
    }
    let benefits = q.benefits()?;
    if benefits.is_some() && id != MetricId::Db {
        return Err(ApiError::usage("invalid_argument", "`benefits` applies to the db metric only"));
    }
    let req = pmf_request(q, limits)?;
    let pmf = match benefits {
        Some(beta) => {
            beta.normalized(req.joint.p + req.joint.n)?;
            metric_pmf_with(id, &req.joint, |m| decision_benefit(m, &beta, true).unwrap_or(MetricValue::Undefined))
        }
        None => metric_pmf_with(id, &req.joint, |m| eval_metric(id, m)),
    };
    let mut json = model_json(&req);
    let body = json::metric_pmf(&pmf);
    for key in ["metric", "entries", "undefined"] {
        json[key] = body[key].clone();
    }
    json["map"] = map_value(&pmf).map(|v| json::metric_value(&v)).unwrap_or(Value::Null);
    match summarize(&pmf, &interval) {
        Ok(s) => {
            json["summary"] = json::summary(&s);
            json["summary_error"] = Value::Null;
        }
        Err(e) => {
            json["summary"] = Value::Null;
            json["summary_error"] = json!(e.to_string());
        }
    }
    json["histogram"] = histogram(&pmf, bins).map(|h| json::histogram(&h)).unwrap_or(Value::Null);

    let mut table = Table::new(&["value", "kind", "mass", "count"]);
    let peak = pmf.entries.iter().map(|e| to_f64(&e.mass)).fold(0.0, f64::max);
    let finite: Vec<f64> = pmf.entries.iter().map(|e| e.value.to_f64()).filter(|x| x.is_finite()).collect();
    let (lo, hi) = match pmf.metric.info().range {
        (lo, hi) if hi.is_finite() => (lo, hi),
        _ => (
            finite.first().copied().unwrap_or(0.0),
            finite.last().copied().filter(|h| *h > finite[0]).unwrap_or(finite.first().copied().unwrap_or(0.0) + 1.0),
        ),
    };
    let mut plot = Plot {
        title: format!("{id} pmf"),
        x_label: id.label().into(),
        y_label: "mass".into(),
        window: [lo, hi, 0.0, if peak > 0.0 { peak } else { 1.0 }],
        ..Plot::default()
    };
    for e in &pmf.entries {
        let (x, m) = (e.value.to_f64(), to_f64(&e.mass));
        table.push(vec![fmt_f64(x), e.value.kind().into(), fmt_f64(m), e.count.to_string()]);
        if x.is_finite() && m > 0.0 {
            plot.lines.push(vec![(x, 0.0), (x, m)]);
        }
    }
    if pmf.undefined_count > 0 {
        table.push(vec!["".into(), "undefined".into(), fmt_f64(to_f64(&pmf.undefined_mass)), pmf.undefined_count.to_string()]);
    }
    Ok(Response { json, table, plot: Some(plot) })
}

fn pr_point_json(fpr: &Rational, tpr: &Rational, p: u64, n: u64) -> Result<(Value, Vec<String>), ApiError> {
    let pt = roc_to_pr(fpr, tpr, p, n)?;
    let precision = pt.precision.as_ref();
    let row = vec![
        fmt_f64(to_f64(fpr)),
        fmt_f64(to_f64(tpr)),
        fmt_f64(to_f64(&pt.recall)),
        precision.map(|x| fmt_f64(to_f64(x))).unwrap_or_default(),
    ];
    let json = json!({
        "fpr": rational(fpr),
        "tpr": rational(tpr),
        "recall": rational(&pt.recall),
        "precision": precision.map(rational).unwrap_or(Value::Null),
    });
    Ok((json, row))
}

fn pr_map(q: &Query, limits: &Limits) -> Result<Response, ApiError> {
    let (p, n) = (q.required_u64("pos")?, q.required_u64("neg")?);
    let mut table = Table::new(&["fpr", "tpr", "recall", "precision"]);
    let mut plot = unit_plot(format!("precision-recall p={p} n={n}"), "recall", "precision");
    let single = (q.rational("fpr")?, q.rational("tpr")?);
    let points: Vec<(Rational, Rational)> = match single {
        (Some(f), Some(t)) => vec![(f, t)],
        (None, None) => {
            check_slice(p, n, limits)?;
            if n == 0 {
                return Err(Error::InvalidArgument("the lattice mapping needs n > 0".into()).into());
            }
            enumerate_slice(p, n).matrices().map(|m| (uint(m.b) / uint(n), uint(m.a) / uint(p.max(1)))).collect()
        }
        _ => return Err(ApiError::usage("missing_parameter", "`fpr` and `tpr` go together")),
    };
    let mut out = Vec::with_capacity(points.len());
    for (f, t) in &points {
        let (json, row) = pr_point_json(f, t, p, n)?;
        if let Some(prec) = json["precision"]["float"].as_f64() {
            plot.dots.push((to_f64(t), prec, 0.0));
        }
        table.push(row);
        out.push(json);
    }
    let json = json!({ "p": p, "n": n, "points": out });
    Ok(Response { json, table, plot: Some(plot) })
}

fn catalogue() -> Response {
    let mut table = Table::new(&["key", "label", "name", "min", "max", "signed", "prevalence_dependent", "balanced", "contour"]);
    let entries: Vec<Value> = MetricId::ALL
        .iter()
        .map(|id| {
            let info = id.info();
            table.push(vec![
                info.key.into(),
                info.label.into(),
                info.name.into(),
                fmt_f64(info.range.0),
                fmt_f64(info.range.1),
                info.signed.to_string(),
                info.prevalence_dependent.to_string(),
                info.balanced.to_string(),
                info.has_contour.to_string(),
            ]);
            json::metric_info(&info)
        })
        .collect();
    Response { json: json!({ "count": entries.len(), "metrics": entries }), table, plot: None }
}

#[cfg(feature = "oracle")]
fn oracle(q: &Query, limits: &Limits) -> Result<Response, ApiError> {
    use crate::uncertainty::mc_oracle;
    let draws = q.u64("draws")?.unwrap_or(100_000);
    if draws > limits.max_draws {
        return Err(ApiError::guard(format!("{draws} draws exceed the limit of {}", limits.max_draws)));
    }
    let seed = q.u64("seed")?.unwrap_or(0);
    let req = pmf_request(q, limits)?;
    let j = &req.joint;
    let freq = mc_oracle(req.model, &req.obs, &req.priors, j.p, j.n, draws, seed)?;
    let mut table = Table::new(&["a", "d", "count", "frequency", "exact"]);
    let mut counts = Vec::new();
    for a in 0..=j.p {
        for d in 0..=j.n {
            let c = freq.count(a, d);
            let exact = to_f64(&j.mass(a, d));
            if c > 0 {
                counts.push(json!([a, d, c]));
            }
            table.push(vec![a.to_string(), d.to_string(), c.to_string(), fmt_f64(c as f64 / draws as f64), fmt_f64(exact)]);
        }
    }
    let mut json = model_json(&req);
    json["draws"] = json!(draws);
    json["seed"] = json!(seed);
    json["tv_distance"] = float(freq.tv_distance(j));
    json["counts"] = Value::Array(counts);
    Ok(Response { json, table, plot: None })
}

#[cfg(not(feature = "oracle"))]
fn oracle(_: &Query, _: &Limits) -> Result<Response, ApiError> {
    Err(ApiError::usage("unsupported", "built without the Monte Carlo oracle"))
}

fn unit_plot(title: String, x: &str, y: &str) -> Plot {
    Plot { title, x_label: x.into(), y_label: y.into(), window: [0.0, 1.0, 0.0, 1.0], ..Plot::default() }
}

/// Float text for CSV cells, matching the JSON rounding.
fn fmt_f64(x: f64) -> String {
    match float(x) {
        Value::Null => String::new(),
        v => v.to_string(),
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.path())
    }
}
