#![allow(dead_code)]

use axum::body::{to_bytes, Body};
use axum::http::{Request, StatusCode};
use axum::Router;
use tower::ServiceExt;

/// CLI invocations and the service request each one should match byte for byte.
pub const PARITY: &[(&str, &str)] = &[
    ("lattice --total 100 --count-only", "/api/lattice?total=100&count_only=true"),
    ("lattice --pos 4 --neg 3", "/api/lattice?pos=4&neg=3"),
    ("project --kind tetra --total 3", "/api/project?kind=tetra&total=3"),
    ("contours --metric mcc --pos 20 --neg 40 --steps 21", "/api/contours?metric=mcc&pos=20&neg=40&steps=21"),
    (
        "contours --metric f1 --levels 2/5,2/3 --pos 20 --neg 40 --window -1/2,3/2",
        "/api/contours?metric=f1&levels=2/5,2/3&pos=20&neg=40&window=-1/2,3/2",
    ),
    ("pmf --tp 16 --fp 8 --fn 4 --tn 32", "/api/pmf/joint?tp=16&fp=8&fn=4&tn=32"),
    (
        "pmf --model beta-binomial --tp 16 --fp 8 --fn 4 --tn 32 --metric mcc",
        "/api/pmf/metric?model=beta-binomial&tp=16&fp=8&fn=4&tn=32&metric=mcc",
    ),
    (
        "pmf --model binomial --tp 26 --fp 1 --fn 0 --tn 7 --prior 2,1 --metric ba --bins 4",
        "/api/pmf/metric?model=binomial&tp=26&fp=1&fn=0&tn=7&prior=2,1&metric=ba&bins=4",
    ),
    ("pr-map --pos 10 --neg 40 --fpr 1/5 --tpr 4/5", "/api/pr-map?pos=10&neg=40&fpr=1/5&tpr=4/5"),
    ("metrics", "/api/metrics"),
];

pub async fn get(app: &Router, uri: &str) -> (StatusCode, String) {
    let request = Request::builder().uri(uri).body(Body::empty()).unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = to_bytes(response.into_body(), usize::MAX).await.unwrap();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

pub fn cli(line: &str) -> confusion_cli::Outcome {
    confusion_cli::run(std::iter::once("confusion").chain(line.split_whitespace()))
}

/// Number of parity cases whose CLI stdout equals the service body.
pub async fn parity_matches(app: &Router) -> usize {
    let mut matches = 0;
    for (line, uri) in PARITY {
        let out = cli(line);
        let (status, body) = get(app, uri).await;
        if out.code == 0 && status == StatusCode::OK && out.stdout == body.as_bytes() {
            matches += 1;
        } else {
            eprintln!("parity mismatch: `{line}` vs {uri} ({status})");
        }
    }
    matches
}
