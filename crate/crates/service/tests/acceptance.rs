//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.
//!
//! Runs without the libtest harness so the lines always reach the test log.

#[path = "../../core/tests/common/mod.rs"]
mod oracle;
mod common;

use std::collections::HashSet;
use std::time::{Duration, Instant};

use confusion_core::contours::contour_spec;
use confusion_core::distribution::{metric_pmf, multiplicity};
use confusion_core::geometry::{count_matrices, enumerate_total, project_simplex, Point3};
use confusion_core::surd::{int, ratio, uint, Rational};
use confusion_core::uncertainty::{
    beta_binomial_pmfs, binomial_pmfs, joint_predictive, marginals, mc_oracle, Model, Observation, Priors,
};
use confusion_core::{eval_balanced, eval_metric, ConfusionMatrix, MetricId, MetricValue};
use num_bigint::BigUint;
use num_traits::One;

struct Report {
    failed: Vec<&'static str>,
}

impl Report {
    fn check(&mut self, name: &'static str, f: impl FnOnce() -> Result<String, String>) {
        let (ok, detail) = match f() {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failed.push(name);
        }
    }
}

fn ensure(cond: bool, detail: String) -> Result<String, String> {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Median wall time of `runs` calls.
fn timed<T>(runs: usize, mut f: impl FnMut() -> T) -> (T, Duration) {
    let mut times = Vec::with_capacity(runs);
    let mut out = None;
    for _ in 0..runs {
        let start = Instant::now();
        out = Some(f());
        times.push(start.elapsed());
    }
    times.sort();
    (out.expect("at least one run"), times[runs / 2])
}

fn q(n: i64, d: i64) -> MetricValue {
    MetricValue::Rational(ratio(n, d))
}

fn lattice_count() -> Result<String, String> {
    let (count, t) = timed(5, || count_matrices(100));
    ensure(
        count == BigUint::from(176_851u32) && t < Duration::from_millis(1),
        format!("count_matrices(100) = {count} in {t:?} (limit 1ms)"),
    )
}

fn confluence() -> Result<String, String> {
    let ((mcc, ba, f1), t) = timed(1, || {
        (multiplicity(MetricId::Mcc, 20, 40), multiplicity(MetricId::Ba, 20, 40), multiplicity(MetricId::F1, 20, 40))
    });
    let mcc0 = mcc.count(&MetricValue::zero());
    let f10 = f1.count(&MetricValue::zero());
    // Diagonal lattice points a/20 = 1 − d/40, i.e. d = 40 − 2a.
    let diagonal_half = (0..=20u64)
        .filter(|&a| eval_metric(MetricId::Ba, &ConfusionMatrix::from_slice_point(20, 40, a, 40 - 2 * a)) == q(1, 2))
        .count();
    let ba_half = ba.count(&q(1, 2));
    ensure(
        mcc0 == 21 && diagonal_half == 21 && ba_half >= 21 && f10 == 41 && t < Duration::from_secs(1),
        format!("MCC=0: {mcc0}, BA=1/2: {ba_half} incl. {diagonal_half} diagonal, F1=0: {f10}, in {t:?} (limit 1s)"),
    )
}

fn f1_multiplicity() -> Result<String, String> {
    let f1 = multiplicity(MetricId::F1, 20, 40);
    let (a, b) = (f1.count(&q(2, 5)), f1.count(&q(2, 3)));
    ensure(a == 11 && b == 11, format!("F1=2/5: {a}, F1=2/3: {b}"))
}

fn drug_purity() -> Result<String, String> {
    let binomial = binomial_pmfs(26, &int(1)).map_err(|e| e.to_string())?;
    let bb = beta_binomial_pmfs(26, &int(27), &int(1)).map_err(|e| e.to_string())?;
    let top = bb.mass(26);
    // TPR ≥ 0.8 means a ≥ 20.8.
    let tail: Rational = (21..=26).map(|a| bb.mass(a)).sum();
    ensure(
        binomial.mass(26).is_one() && top == ratio(27, 53) && tail > ratio(95, 100),
        format!("binomial P(TPR=1) = {}, beta-binomial P(a=26) = {top}, P(TPR ≥ 0.8) = {:.6}", binomial.mass(26), to_f(&tail)),
    )
}

fn to_f(r: &Rational) -> f64 {
    confusion_core::surd::to_f64(r)
}

fn sqrt_scaling() -> Result<String, String> {
    let (sds, t) = timed(1, || {
        [60u64, 240, 960]
            .iter()
            .map(|&total| {
                let half = total / 2;
                let (a1, b1) = (half * 4 / 5, half / 5);
                let obs = Observation::new(a1, b1, half - a1, half - b1);
                let j = joint_predictive(Model::BetaBinomial, &obs, &Priors::default(), half, half).unwrap();
                marginals(&j).0.sd()
            })
            .collect::<Vec<_>>()
    });
    let ratios: Vec<f64> = sds.windows(2).map(|w| w[1] / w[0]).collect();
    ensure(
        ratios.iter().all(|r| (r / 0.5 - 1.0).abs() <= 0.15) && t < Duration::from_secs(10),
        format!("TPR sd {sds:.5?}, step ratios {ratios:.4?} (target 0.5 ± 15%), in {t:?} (limit 10s)"),
    )
}

fn contour_round_trip() -> Result<String, String> {
    let mut checked = 0usize;
    for (p, n) in [(5, 5), (10, 40), (20, 40), (20, 41), (40, 10)] {
        for id in oracle::contour_metrics() {
            let spec = contour_spec(id).map_err(|e| e.to_string())?;
            for m in confusion_core::geometry::enumerate_slice(p, n).matrices() {
                let k = eval_metric(id, &m);
                if !k.is_finite() {
                    continue;
                }
                if !oracle::on_contour(&spec, &k, p, n, m.a, m.d) {
                    return Err(format!("{id} = {k} at {m:?} is off its contour"));
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (metric, point) pairs on their own contours, exact"))
}

fn balanced_kappa() -> Result<String, String> {
    for i in 0..=100 {
        for j in 0..=100 {
            let (t, s) = (ratio(i, 100), ratio(j, 100));
            let v = eval_balanced(MetricId::Ck, &t, &s).map_err(|e| e.to_string())?;
            if v != MetricValue::Rational(&t + &s - int(1)) {
                return Err(format!("κ_bal({t}, {s}) = {v}"));
            }
        }
    }
    Ok("κ_bal(t, s) = t + s − 1 exactly on 101×101 grid".into())
}

fn oracle_equivalence() -> Result<String, String> {
    let mut slices = 0;
    for p in 0..=12 {
        for n in 0..=12 {
            let j = joint_predictive(Model::BetaBinomial, &Observation::new(0, 0, 0, 0), &Priors::default(), p, n)
                .map_err(|e| e.to_string())?;
            for id in MetricId::ALL {
                let pmf = metric_pmf(id, &j);
                let counts: Vec<u64> = pmf.entries.iter().map(|e| e.count).collect();
                if (counts, pmf.undefined_count) != oracle::float_groups(id, p, n, 1e-10) {
                    return Err(format!("{id} grouping differs at p={p} n={n}"));
                }
            }
            slices += 1;
        }
    }
    let scenarios = [
        ("beta-binomial (5,2,0,6) p=4 n=5", Model::BetaBinomial, Observation::new(5, 2, 0, 6), 4, 5),
        ("binomial (8,2,2,8) p=3 n=3", Model::Binomial, Observation::new(8, 2, 2, 8), 3, 3),
        ("beta-binomial (16,8,4,32) p=5 n=5", Model::BetaBinomial, Observation::new(16, 8, 4, 32), 5, 5),
    ];
    let mut tvs = Vec::new();
    for (name, model, obs, p, n) in scenarios {
        let priors = Priors::default();
        let j = joint_predictive(model, &obs, &priors, p, n).map_err(|e| e.to_string())?;
        let freq = mc_oracle(model, &obs, &priors, p, n, 100_000, 0).map_err(|e| e.to_string())?;
        let tv = freq.tv_distance(&j);
        tvs.push(format!("{name}: TV {tv:.4}"));
        if tv >= 0.01 {
            return Err(tvs.join("; "));
        }
    }
    Ok(format!("{slices} slices × 32 metrics match float grouping; 10^5 draws: {}", tvs.join("; ")))
}

fn isometry() -> Result<String, String> {
    for total in 1..=30u64 {
        let corners = [(total, 0, 0, 0), (0, total, 0, 0), (0, 0, total, 0), (0, 0, 0, total)]
            .map(|(a, b, c, d)| project_simplex(&ConfusionMatrix::new(a, b, c, d)));
        for (i, x) in corners.iter().enumerate() {
            for y in &corners[i + 1..] {
                if x.dist2(y) != uint(2 * total * total) {
                    return Err(format!("vertex distance at N={total}"));
                }
            }
        }
        let mut seen: HashSet<Point3> = HashSet::new();
        if !enumerate_total(total).all(|m| seen.insert(project_simplex(&m))) {
            return Err(format!("collision at N={total}"));
        }
    }
    for total in 0..=10u64 {
        for m in enumerate_total(total) {
            let here = project_simplex(&m);
            let cells = [m.a, m.b, m.c, m.d];
            for from in (0..4).filter(|&i| cells[i] > 0) {
                for to in (0..4).filter(|&j| j != from) {
                    let mut next = cells;
                    next[from] -= 1;
                    next[to] += 1;
                    let other = project_simplex(&ConfusionMatrix::new(next[0], next[1], next[2], next[3]));
                    if here.dist2(&other) != int(2) {
                        return Err(format!("unit transfer from {m:?} is not at distance √2"));
                    }
                }
            }
        }
    }
    Ok("vertex distance² = 2N² and injective for N ≤ 30; unit transfers at √2 for N ≤ 10".into())
}

/// Distinct defined values on the p=20, n=41 slice, frozen after an
/// independent float count (`float_groups`) agreed.
const GOLDEN_DISTINCT_BA: usize = 881;
const GOLDEN_DISTINCT_MCC: usize = 881;

fn uniqueness_probe() -> Result<String, String> {
    let mut parts = Vec::new();
    let mut ok = true;
    for (id, golden) in [(MetricId::Ba, GOLDEN_DISTINCT_BA), (MetricId::Mcc, GOLDEN_DISTINCT_MCC)] {
        let counts = multiplicity(id, 20, 41);
        let (float, undefined) = oracle::float_groups(id, 20, 41, 1e-10);
        let shared: Vec<String> =
            counts.entries.iter().filter(|(_, c)| *c > 1).map(|(v, c)| format!("{v} ×{c}")).collect();
        ok &= counts.distinct() == golden && float.len() == golden && undefined == counts.undefined;
        parts.push(format!(
            "{id}: {} distinct of 882 points, {} undefined, repeated: [{}]",
            counts.distinct(),
            counts.undefined,
            shared.join(", ")
        ));
    }
    ensure(ok, format!("{} (not all unique)", parts.join("; ")))
}

fn parity() -> Result<String, String> {
    let runtime = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    let app = confusion_service::router(&confusion_service::Config::default());
    let matches = runtime.block_on(common::parity_matches(&app));
    ensure(
        matches == common::PARITY.len(),
        format!("{matches}/{} parameter sets byte-identical between CLI and service", common::PARITY.len()),
    )
}

fn main() {
    let mut report = Report { failed: Vec::new() };
    report.check("lattice count", lattice_count);
    report.check("contour confluence", confluence);
    report.check("F1 multiplicity", f1_multiplicity);
    report.check("drug-purity posterior", drug_purity);
    report.check("1/sqrt(N) scaling", sqrt_scaling);
    report.check("contour round-trip", contour_round_trip);
    report.check("balanced kappa identity", balanced_kappa);
    report.check("oracle equivalence", oracle_equivalence);
    report.check("isometry/injectivity", isometry);
    report.check("uniqueness probe", uniqueness_probe);
    report.check("CLI/service parity", parity);
    if report.failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: {} failed: {}", report.failed.len(), report.failed.join(", "));
        std::process::exit(1);
    }
}
