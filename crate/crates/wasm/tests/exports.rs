use confusion_wasm::{contours, joint_pmf, metric_pmf};
use serde_json::Value;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn chance_contour() {
    let json = parse(&contours("bm", "0", 5, 5, 3).unwrap());
    // The demo window is [-1/2, 3/2]², so the line spans its diagonal.
    let line = &json["polylines"][0]["points"];
    assert_eq!(line[0], serde_json::json!([-0.5, -0.5]));
    assert_eq!(line[1], serde_json::json!([0.5, 0.5]));
    assert_eq!(line[2], serde_json::json!([1.5, 1.5]));
}

#[test]
fn default_view_matches_the_reference_counts() {
    let json = parse(&metric_pmf("beta-binomial", [16, 8, 4, 32], 20, 40, "f1", 10).unwrap());
    let elevens = json["entries"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|e| e["count"] == 11 && e["value"]["den"] != "1")
        .count();
    assert!(elevens >= 2);
    assert_eq!(json["histogram"]["masses"].as_array().unwrap().len(), 10);
}

#[test]
fn joint_masses_sum_to_one() {
    let json = parse(&joint_pmf("binomial", [8, 2, 2, 8], 3, 3).unwrap());
    let total: f64 = json["tpr_marginal"].as_array().unwrap().iter().map(|e| e["mass"]["float"].as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);
}

#[test]
fn errors_carry_the_service_body() {
    let err = joint_pmf("binomial", [1, 0, 0, 0], 3, 3).unwrap_err();
    assert_eq!(parse(&err)["error"]["code"], "empirical_rate_undefined");
    let err = joint_pmf("beta-binomial", [1, 1, 1, 1], 300, 300).unwrap_err();
    assert_eq!(parse(&err)["error"]["code"], "limit_exceeded");
}
