mod common;

use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use common::{get, parity_matches, PARITY};
use confusion_service::{router, Cache, Config};
use serde_json::Value;
use tower::ServiceExt;

fn config() -> Config {
    Config::default()
}

#[tokio::test]
async fn cli_and_service_bodies_are_identical() {
    let app = router(&config());
    assert_eq!(parity_matches(&app).await, PARITY.len());
}

#[tokio::test]
async fn catalogue_lists_every_metric() {
    let (status, body) = get(&router(&config()), "/api/metrics").await;
    assert_eq!(status, StatusCode::OK);
    let json: Value = serde_json::from_str(&body).unwrap();
    assert_eq!(json["count"], 32);
    assert_eq!(json["metrics"].as_array().unwrap().len(), 32);
}

#[tokio::test]
async fn status_codes() {
    let app = router(&config());
    let code = |body: &str| serde_json::from_str::<Value>(body).unwrap()["error"]["code"].as_str().unwrap().to_string();

    let (status, body) = get(&app, "/api/pmf/joint?model=binomial&tp=1&fp=0&fn=0&tn=0").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(code(&body), "empirical_rate_undefined");

    let (status, body) = get(&app, "/api/pmf/joint?tp=1&tn=1&pos=2000&neg=2000").await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(code(&body), "limit_exceeded");

    let (status, body) = get(&app, "/api/lattice?total=20000").await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY, "{body}");

    let (status, body) = get(&app, "/api/contours?metric=nope&pos=2&neg=2").await;
    assert_eq!((status, code(&body)), (StatusCode::BAD_REQUEST, "unknown_metric".to_string()));

    let (status, body) = get(&app, "/api/lattice?pos=2&neg=2&colour=red").await;
    assert_eq!((status, code(&body)), (StatusCode::BAD_REQUEST, "unknown_parameter".to_string()));

    let (status, _) = get(&app, "/api/lattice?pos=x").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let (status, body) = get(&app, "/api/nothing").await;
    assert_eq!((status, code(&body)), (StatusCode::NOT_FOUND, "unknown_endpoint".to_string()));
}

#[tokio::test]
async fn cache_never_changes_bodies() {
    let cached = router(&config());
    let uncached = router(&Config { cache_size: 0, ..config() });
    for (_, uri) in PARITY {
        let first = get(&cached, uri).await;
        let second = get(&cached, uri).await;
        let fresh = get(&uncached, uri).await;
        assert_eq!(first, second, "{uri}");
        assert_eq!(first, fresh, "{uri}");
    }
}

#[test]
fn cache_is_bounded() {
    let cache = Cache::new(2);
    for key in ["a", "b", "c"] {
        cache.insert(key.into(), key.into());
    }
    assert_eq!(cache.len(), 2);
    assert!(cache.get("a").is_none());
    assert_eq!(cache.get("c").as_deref(), Some("c"));
}

#[tokio::test]
async fn concurrent_identical_requests_agree() {
    let app = router(&config());
    let uri = "/api/pmf/metric?tp=7&fp=3&fn=2&tn=8&metric=mcc";
    let tasks: Vec<_> = (0..8)
        .map(|_| {
            let app = app.clone();
            tokio::spawn(async move { get(&app, uri).await })
        })
        .collect();
    let mut bodies = Vec::new();
    for t in tasks {
        bodies.push(t.await.unwrap());
    }
    assert!(bodies.iter().all(|b| b == &bodies[0] && b.0 == StatusCode::OK));
}

#[tokio::test]
async fn cors_follows_the_allow_list() {
    let app = router(&Config { cors_origins: vec!["http://ui.example".into()], ..config() });
    let origin = |o: &'static str| {
        let app = app.clone();
        async move {
            let request = Request::builder().uri("/api/metrics").header(header::ORIGIN, o).body(Body::empty()).unwrap();
            let response = app.oneshot(request).await.unwrap();
            response.headers().get(header::ACCESS_CONTROL_ALLOW_ORIGIN).cloned()
        }
    };
    assert_eq!(origin("http://ui.example").await.unwrap(), "http://ui.example");
    assert!(origin("http://elsewhere.example").await.is_none());
}

#[tokio::test]
async fn oracle_route_can_be_disabled() {
    let uri = "/api/oracle?tp=3&fp=1&fn=1&tn=3&pos=2&neg=2&draws=1000";
    let (status, _) = get(&router(&config()), uri).await;
    assert_eq!(status, StatusCode::OK);
    let (status, _) = get(&router(&Config { no_oracle: true, ..config() }), uri).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn static_directory_is_served() {
    let dir = std::env::temp_dir().join(format!("confusion-static-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("index.html"), "<p>ok</p>").unwrap();
    let app = router(&Config { static_dir: Some(dir.clone()), ..config() });
    let (status, body) = get(&app, "/index.html").await;
    std::fs::remove_dir_all(&dir).unwrap();
    assert_eq!((status, body.as_str()), (StatusCode::OK, "<p>ok</p>"));
}
