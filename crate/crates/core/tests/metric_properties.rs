mod common;

use std::collections::HashMap;

use common::{agrees, float_metric, matrices_up_to, matrix_strategy, FVal};
use confusion_core::surd::{int, ratio, uint, Rational};
use confusion_core::{decision_benefit, eval_balanced, eval_metric, BenefitMatrix, ConfusionMatrix, MetricId, MetricValue};
use proptest::prelude::*;

#[test]
fn exact_values_match_float_oracle_exhaustively() {
    for m in matrices_up_to(24) {
        for id in MetricId::ALL {
            let exact = eval_metric(id, &m);
            let oracle = float_metric(id, &m);
            assert!(agrees(&exact, oracle, 1e-12), "{id} at {m:?}: {exact:?} vs {oracle:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn exact_values_match_float_oracle_up_to_200(m in matrix_strategy(200)) {
        for id in MetricId::ALL {
            let exact = eval_metric(id, &m);
            let oracle = float_metric(id, &m);
            prop_assert!(agrees(&exact, oracle, 1e-12), "{} at {:?}: {:?} vs {:?}", id, m, exact, oracle);
        }
    }

    #[test]
    fn ba_is_affine_in_bm(a in 0u64..60, b in 0u64..60, c in 0u64..60, d in 0u64..60) {
        let m = ConfusionMatrix::new(a, b, c, d);
        let (ba, bm) = (eval_metric(MetricId::Ba, &m), eval_metric(MetricId::Bm, &m));
        if let (Some(ba), Some(bm)) = (ba.as_rational(), bm.as_rational()) {
            prop_assert_eq!(ba.clone(), (bm + int(1)) / int(2));
        } else {
            prop_assert!(!ba.is_defined() && !bm.is_defined());
        }
    }
}

fn sort_key(v: FVal) -> (u8, f64) {
    match v {
        FVal::NegInf => (0, 0.0),
        FVal::Finite(x) => (1, x),
        FVal::PosInf => (2, 0.0),
        FVal::Undef => (3, 0.0),
    }
}

/// Exact grouping must merge values exactly when their float renderings agree.
#[test]
fn grouping_matches_float_equality() {
    const TOL: f64 = 1e-12;
    let all: Vec<ConfusionMatrix> = matrices_up_to(30).collect();
    for id in MetricId::ALL {
        let mut rows: Vec<(FVal, MetricValue)> = all.iter().map(|m| (float_metric(id, m), eval_metric(id, m))).collect();
        rows.sort_by(|x, y| sort_key(x.0).partial_cmp(&sort_key(y.0)).unwrap());
        // Float spread inside each exact group.
        let mut spread: HashMap<&MetricValue, (f64, f64)> = HashMap::new();
        for (f, v) in &rows {
            if let FVal::Finite(x) = f {
                let e = spread.entry(v).or_insert((*x, *x));
                e.0 = e.0.min(*x);
                e.1 = e.1.max(*x);
            }
        }
        for (v, (lo, hi)) in &spread {
            assert!(hi - lo <= TOL, "{id}: false merge at {v:?} spanning [{lo}, {hi}]");
        }
        // Neighbouring floats that agree must share an exact value.
        for pair in rows.windows(2) {
            let (FVal::Finite(x), FVal::Finite(y)) = (pair[0].0, pair[1].0) else { continue };
            if (x - y).abs() <= TOL {
                assert_eq!(pair[0].1, pair[1].1, "{id}: false split near {x}");
            }
        }
    }
}

#[test]
fn class_relabeling_symmetry() {
    let symmetric = [MetricId::Mcc, MetricId::Ck, MetricId::Bm, MetricId::Ba, MetricId::Dor];
    let asymmetric = [MetricId::F1, MetricId::Ts, MetricId::Ppv];
    let mut broken = [0usize; 3];
    for m in matrices_up_to(20) {
        let s = m.swap_classes();
        for id in symmetric {
            assert_eq!(eval_metric(id, &m), eval_metric(id, &s), "{id} at {m:?}");
        }
        for (i, id) in asymmetric.into_iter().enumerate() {
            if eval_metric(id, &m) != eval_metric(id, &s) {
                broken[i] += 1;
            }
        }
    }
    assert!(broken.iter().all(|&k| k > 0), "{broken:?}");
    // A concrete witness for each direction.
    let m = ConfusionMatrix::new(16, 8, 4, 32);
    for id in asymmetric {
        assert_ne!(eval_metric(id, &m), eval_metric(id, &m.swap_classes()), "{id}");
    }
}

#[test]
fn balanced_kappa_is_bookmaker_informedness() {
    for i in 0..=100 {
        for j in 0..=100 {
            let (t, s) = (ratio(i, 100), ratio(j, 100));
            let ck = eval_balanced(MetricId::Ck, &t, &s).unwrap();
            assert_eq!(ck, MetricValue::Rational(&t + &s - int(1)));
        }
    }
}

#[test]
fn balanced_forms_agree_with_balanced_slices() {
    // On a slice with p = n the base metric equals its balanced form.
    for m in matrices_up_to(16).filter(|m| m.p() == m.n() && m.p() > 0) {
        let (t, s) = (uint(m.a) / uint(m.p()), uint(m.d) / uint(m.n()));
        for id in MetricId::ALL {
            if let Ok(v) = eval_balanced(id, &t, &s) {
                if id == MetricId::Acc || id.balanced_of().is_some() || !id.info().prevalence_dependent {
                    assert_eq!(v, eval_metric(id, &m), "{id} at {m:?}");
                }
            }
        }
    }
}

#[test]
fn decision_benefit_examples() {
    let m = ConfusionMatrix::new(16, 8, 4, 32);
    let raw = decision_benefit(&m, &BenefitMatrix::default(), false).unwrap();
    assert_eq!(raw, MetricValue::Rational(int(48)));
    let zero = ConfusionMatrix::new(0, 0, 0, 0);
    let beta = BenefitMatrix::new(int(3), int(-1), int(-2), int(5));
    assert_eq!(decision_benefit(&zero, &beta, false).unwrap(), MetricValue::zero());
}

#[test]
fn reference_matrix_values() {
    let m = ConfusionMatrix::new(16, 8, 4, 32);
    let expect = |id: MetricId, v: MetricValue| assert_eq!(eval_metric(id, &m), v, "{id}");
    let q = |n: i64, d: i64| MetricValue::Rational(ratio(n, d));
    expect(MetricId::Tpr, q(4, 5));
    expect(MetricId::Tnr, q(4, 5));
    expect(MetricId::Acc, q(4, 5));
    expect(MetricId::Bm, q(3, 5));
    expect(MetricId::F1, q(8, 11));
    expect(MetricId::Dor, q(16, 1));
    expect(MetricId::Mcc, MetricValue::signed_sqrt(false, ratio(1, 3)));
    expect(MetricId::Pt, q(1, 3));
    // Gm = √(tpr·tnr) = 4/5 collapses to a rational.
    expect(MetricId::Gm, q(4, 5));
    let r: Rational = ratio(16, 1);
    assert_eq!(eval_metric(MetricId::SlogDor, &m), MetricValue::scaled_log(Some(r), int(19 * 39)));
}
