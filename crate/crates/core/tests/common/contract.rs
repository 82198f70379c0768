//! Endpoint contract checks against a live instance, shared by the service
//! tests and the acceptance run.

use super::live::{self, TOKEN};
use reqwest::StatusCode;
use serde_json::{json, Value};

const FIG3: &str = include_str!("../fixtures/fig3.query");

async fn json_of(r: reqwest::Response) -> Value {
    r.json().await.unwrap()
}

fn subject_ids(v: &Value) -> Vec<String> {
    v["results"]["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["subject"]["person"].as_str().or(e["subject"]["seed"].as_str()).unwrap().to_string())
        .collect()
}

pub async fn unauthenticated_requests_get_a_uniform_401() {
    let s = live::start(10).await;
    let routes = [
        ("POST", "/graph/ingest"),
        ("GET", "/graph/neighborhood/p1"),
        ("POST", "/documents/classify"),
        ("POST", "/classifier/train"),
        ("POST", "/queries"),
        ("GET", "/queries/q1"),
        ("POST", "/synth/train"),
        ("POST", "/synth/generate"),
        ("POST", "/feedback"),
        ("GET", "/no/such/route"),
    ];
    for (method, path) in routes {
        for auth in [None, Some("Bearer wrong"), Some(TOKEN), Some("Basic dGVzdA==")] {
            let mut req = s.client.request(method.parse().unwrap(), s.url(path));
            if let Some(a) = auth {
                req = req.header("authorization", a);
            }
            let r = req.send().await.unwrap();
            assert_eq!(r.status(), StatusCode::UNAUTHORIZED, "{method} {path} {auth:?}");
            assert_eq!(r.bytes().await.unwrap().len(), 0);
        }
    }
    s.stop().await;
}

pub async fn ingest_counts_lines_and_persists() {
    let s = live::start(10).await;
    let before = s.client.post(s.url("/queries")).bearer_auth(TOKEN).body(FIG3).send().await.unwrap();
    let before = json_of(before).await["results"]["graph_version"].as_u64().unwrap();

    let body = "{\"t\":\"node\",\"id\":\"p9\",\"kind\":\"Person\",\"attrs\":{\"name\":\"New\"}}\n\
                {\"t\":\"node\",\"id\":\"p10\",\"kind\":\"Person\",\"attrs\":{\"name\":\"Newer\"}}\n\
                {\"t\":\"edge\",\"src\":\"p9\",\"dst\":\"ind1\",\"kind\":\"HAS_INDICATOR\",\"ts\":\"2016-01-01\"}\n";
    let r = json_of(s.post("/graph/ingest", body).await).await;
    assert_eq!((r["nodes_added"].as_u64(), r["edges_added"].as_u64()), (Some(2), Some(1)));
    assert_eq!(r["errors"], json!([]));
    assert_eq!(r["graph_version"].as_u64(), Some(before + 1));

    let body = "{\"t\":\"node\",\"id\":\"p11\",\"kind\":\"Person\",\"attrs\":{\"name\":\"X\"}}\nnot json\n\
                {\"t\":\"edge\",\"src\":\"p11\",\"dst\":\"p9\",\"kind\":\"KNOWS\",\"ts\":null}\n";
    let r = json_of(s.post("/graph/ingest", body).await).await;
    assert_eq!(r["errors"].as_array().unwrap().len(), 1);
    assert_eq!(r["errors"][0]["line"].as_u64(), Some(2));
    assert_eq!((r["nodes_added"].as_u64(), r["edges_added"].as_u64()), (Some(1), Some(1)));

    let r = json_of(s.post("/graph/ingest", "").await).await;
    assert_eq!(r, json!({"nodes_added": 0, "edges_added": 0, "errors": [], "graph_version": before + 2}));

    let r = s.post("/graph/ingest", "garbage\n{\"t\":\"nope\"}\n").await;
    assert_eq!(r.status(), StatusCode::BAD_REQUEST);
    assert_eq!(json_of(r).await["errors"].as_array().unwrap().len(), 2);

    // integrity errors on well-formed records are partial success, not 400
    let r = s
        .post("/graph/ingest", "{\"t\":\"edge\",\"src\":\"ghost\",\"dst\":\"p9\",\"kind\":\"KNOWS\",\"ts\":null}\n")
        .await;
    assert_eq!(r.status(), StatusCode::OK);

    let saved = std::fs::read_to_string(&s.config.graph).unwrap();
    let g = inspect_core::graph::load(saved.as_bytes(), inspect_core::IndicatorTaxonomy::default()).unwrap();
    assert!(g.contains("p9") && g.contains("p11"));
    s.stop().await;
}

pub async fn queries_store_full_lists_and_refilter_prefixes() {
    let s = live::start(10).await;
    let r = s.post("/queries", FIG3).await;
    assert_eq!(r.status(), StatusCode::OK);
    let first = json_of(r).await;
    let id = first["id"].as_str().unwrap().to_string();
    assert_eq!(subject_ids(&first), ["p1", "p2"]);
    let scores: Vec<f64> =
        first["results"]["entries"].as_array().unwrap().iter().map(|e| e["score"].as_f64().unwrap()).collect();
    assert_eq!(scores, [1.0, 0.75]);
    assert!(first["results"]["graph_version"].is_u64());

    let high = json_of(s.get(&format!("/queries/{id}?threshold=0.9")).await).await;
    assert_eq!(subject_ids(&high), ["p1"]);
    let low = json_of(s.get(&format!("/queries/{id}?threshold=0")).await).await;
    let all = subject_ids(&low);
    assert_eq!(&all[..3], ["p1", "p2", "p3"]);
    for t in ["0.9", "0.7", "0.5", "0.25"] {
        let v = json_of(s.get(&format!("/queries/{id}?threshold={t}")).await).await;
        let ids = subject_ids(&v);
        assert_eq!(ids[..], all[..ids.len()], "threshold {t}");
    }
    let same = json_of(s.get(&format!("/queries/{id}")).await).await;
    assert_eq!(same["results"], first["results"]);

    let again = s.post("/queries", FIG3).await.bytes().await.unwrap();
    let again: Value = serde_json::from_slice(&again).unwrap();
    assert_eq!(serde_json::to_string(&again["results"]).unwrap(), serde_json::to_string(&first["results"]).unwrap());

    assert_eq!(s.get("/queries/q999").await.status(), StatusCode::NOT_FOUND);
    assert_eq!(s.get(&format!("/queries/{id}?threshold=1.5")).await.status(), StatusCode::BAD_REQUEST);
    s.stop().await;
}

pub async fn bad_queries_return_parse_errors() {
    let s = live::start(10).await;
    let r = s.post("/queries", "query \"q\" {\n  indicator \"C1\"\n  threshold 2\n}").await;
    assert_eq!(r.status(), StatusCode::BAD_REQUEST);
    let e = json_of(r).await;
    assert!(e["message"].as_str().unwrap().contains("ThresholdOutOfRange"));
    assert_eq!((e["line"].as_u64(), e["column"].as_u64()), (Some(3), Some(13)));
    assert!(e["expected"].is_array());

    let r = s.post("/queries", "query \"q\" { indicator }").await;
    let e = json_of(r).await;
    assert_eq!(e["kind"], "UnexpectedToken");
    assert!(!e["expected"].as_array().unwrap().is_empty());

    let r = s.post("/queries", vec![b'q', 0xff, 0xfe]).await;
    assert_eq!(r.status(), StatusCode::BAD_REQUEST);
    assert_eq!(json_of(r).await["kind"], "InvalidUtf8");

    let r = json_of(s.post("/queries", "query \"q\" { indicator \"Nope\" }").await).await;
    assert_eq!(r["warnings"].as_array().unwrap().len(), 1);
    s.stop().await;
}

pub async fn classify_needs_a_model_then_scores_every_category() {
    let s = live::start(100).await;
    let r = s.post_json("/documents/classify", &json!({"text": "Hello there."})).await;
    assert_eq!(r.status(), StatusCode::CONFLICT);
    assert_eq!(json_of(r).await["error"], "NoModelLoaded");

    let r = s.post("/classifier/train", "").await;
    assert_eq!(r.status(), StatusCode::OK);
    assert_eq!(json_of(r).await["corpus_size"].as_u64(), Some(100));
    assert!(s.config.model_dir.join("classifier.json").exists());

    let text = "Alex Doe met the Organization A on 3 March 2015. They talked zqaavk zqabvk online!";
    let r = json_of(s.post_json("/documents/classify", &json!({ "text": text })).await).await;
    let sentences = r["sentences"].as_array().unwrap();
    assert_eq!(sentences.len(), 2);
    for sent in sentences {
        let labels = sent["labels"].as_array().unwrap();
        assert_eq!(labels.len(), 15);
        assert!(labels.iter().all(|l| (0.0..=1.0).contains(&l["probability"].as_f64().unwrap())));
    }
    let ents = &sentences[0]["entities"];
    assert_eq!(ents["dates"][0]["date"], "2015-03-03");
    assert_eq!(ents["persons"][0]["name"], "Alex Doe");
    assert_eq!(ents["organizations"][0]["name"], "Org A");
    let c1 = sentences[1]["labels"].as_array().unwrap().iter().find(|l| l["category"] == "C1").unwrap();
    assert!(c1["probability"].as_f64().unwrap() > 0.5);

    let r = json_of(s.post_json("/documents/classify", &json!({"text": ""})).await).await;
    assert_eq!(r["sentences"], json!([]));
    s.stop().await;
}

pub async fn feedback_appends_valid_records_only() {
    let s = live::start(100).await;
    let ok = json!({"text": "a snippet", "predicted": ["C1"], "corrected": ["C1", "C2"], "note": "fixed"});
    let r = s.post_json("/feedback", &ok).await;
    assert_eq!(r.status(), StatusCode::OK);
    assert_eq!(json_of(r).await["appended_corpus_size"].as_u64(), Some(101));

    for bad in [
        json!({"text": "x", "corrected": ["C1", "C2", "C3", "C4"]}),
        json!({"text": "x", "corrected": ["C99"]}),
        json!({"text": "x", "corrected": []}),
    ] {
        assert_eq!(s.post_json("/feedback", &bad).await.status(), StatusCode::UNPROCESSABLE_ENTITY, "{bad}");
    }
    let last = std::fs::read_to_string(&s.config.corpus).unwrap();
    let last: Value = serde_json::from_str(last.lines().last().unwrap()).unwrap();
    assert_eq!(last["labels"], json!(["C1", "C2"]));
    assert_eq!(last["feedback"]["note"], "fixed");
    assert_eq!(last["feedback"]["predicted"], json!(["C1"]));

    // the appended record is part of the next training run
    let r = json_of(s.post("/classifier/train", "").await).await;
    assert_eq!(r["corpus_size"].as_u64(), Some(101));
    s.stop().await;
}

pub async fn synth_train_and_generate() {
    let s = live::start(10).await;
    let r = s.post_json("/synth/train", &json!({"latent_dim": 0})).await;
    assert_eq!(r.status(), StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(json_of(r).await["error"], "ConfigInvalid");

    let cfg = json!({"epochs": 5, "batch_size": 50, "encoder_hidden": [8], "decoder_hidden": [8], "discriminator_hidden": [8]});
    let r = s.post_json("/synth/train", &cfg).await;
    assert_eq!(r.status(), StatusCode::OK);
    let r = json_of(r).await;
    assert_eq!(r["batches"].as_u64(), Some(20));
    let id = r["model_id"].as_str().unwrap().to_string();
    assert!(s.config.model_dir.join(format!("{id}.json")).exists());

    let gen = |seed: u64| json!({"model_id": id, "n": 5, "seed": seed});
    let r = s.post_json("/synth/generate", &gen(1)).await;
    assert_eq!(r.headers()["content-type"], "application/x-ndjson");
    let a = r.bytes().await.unwrap();
    let lines: Vec<&str> = std::str::from_utf8(&a).unwrap().lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines.iter().all(|l| serde_json::from_str::<inspect_core::synth::Trajectory>(l).is_ok()));
    let b = s.post_json("/synth/generate", &gen(1)).await.bytes().await.unwrap();
    assert_eq!(a, b);

    let r = s.post_json("/synth/generate", &json!({"model_id": "aae-999", "n": 5, "seed": 1})).await;
    assert_eq!(r.status(), StatusCode::NOT_FOUND);
    let r = s.post_json("/synth/generate", &json!({"model_id": "../etc", "n": 5, "seed": 1})).await;
    assert_eq!(r.status(), StatusCode::NOT_FOUND);
    s.stop().await;
}

pub async fn saved_models_survive_restart() {
    let s = live::start(30).await;
    let cfg = json!({"epochs": 2, "encoder_hidden": [4], "decoder_hidden": [4], "discriminator_hidden": [4]});
    let id = json_of(s.post_json("/synth/train", &cfg).await).await["model_id"].as_str().unwrap().to_string();
    let before =
        s.post_json("/synth/generate", &json!({"model_id": id, "n": 3, "seed": 7})).await.bytes().await.unwrap();
    s.post("/classifier/train", "").await;

    let state = inspect_core::service::AppState::open(s.config.clone()).unwrap();
    assert!(state.classifier.read().is_some());
    let reloaded = state.synth_model(&id).unwrap().unwrap();
    let mut buf = Vec::new();
    inspect_core::synth::write_trajectories(&mut buf, &inspect_core::synth::sample(&reloaded, 3, 7)).unwrap();
    assert_eq!(buf, before.to_vec());
    s.stop().await;
}

pub async fn neighborhood_view() {
    let s = live::start(10).await;
    let r = json_of(s.get("/graph/neighborhood/p2?radius=1").await).await;
    assert_eq!(r["members"], json!(["p1", "p2", "p3"]));
    let ids: Vec<&str> = r["nodes"].as_array().unwrap().iter().map(|n| n["id"].as_str().unwrap()).collect();
    assert!(ids.contains(&"ind5") && ids.contains(&"country-a") && !ids.contains(&"p4"));
    assert!(r["edges"].as_array().unwrap().iter().all(|e| e["t"] == "edge"));
    assert_eq!(s.get("/graph/neighborhood/nobody").await.status(), StatusCode::NOT_FOUND);
    s.stop().await;
}
