use stitchnet::checkpoint::Checkpoint;
use stitchnet::config::Config;
use stitchnet::external::{ingest_external, is_external};
use stitchnet::format::{parse_pattern, parse_unchecked, serialize_pattern};
use stitchnet::report::{report_from_json, report_to_json};
use stitchnet::Error;
use stitchnet_core::assignment::SinkhornConfig;
use stitchnet_core::encoding::{FeatureMask, LAYOUT_TAG};
use stitchnet_core::geometry::{CurvatureSpec, CurveKind, Vertex2};
use stitchnet_core::learning::{evaluate_sets, TrainConfig, Trainer, TrainingExample};
use stitchnet_core::model::{init_params, Aggregator, ModelConfig};
use stitchnet_core::pattern::{EdgeRef, Panel, Pattern, StitchPair, Violation};
use stitchnet_core::pipeline::Predictor;
use stitchnet_core::synth::{generate, Family};

const RECT: &str = r#"{
  "name": "rect",
  "panels": [
    { "id": "a", "vertices": [[0, 0], [4, 0], [4, 3], [0, 3]],
      "edges": [
        { "start": 0, "end": 1, "curvature": { "kind": "straight", "params": [0,0,0,0,0,0,0,0,0,0] } },
        { "start": 1, "end": 2, "curvature": { "kind": "straight", "params": [0,0,0,0,0,0,0,0,0,0] } },
        { "start": 2, "end": 3, "curvature": { "kind": "straight", "params": [0,0,0,0,0,0,0,0,0,0] } },
        { "start": 3, "end": 0, "curvature": { "kind": "straight", "params": [0,0,0,0,0,0,0,0,0,0] } }
      ] }
  ],
  "stitches": []
}"#;

fn tube() -> Pattern {
    generate(1, Family::Tube, 0.0)
}

#[test]
fn single_rectangle_document() {
    let p = parse_pattern(RECT.as_bytes()).unwrap();
    assert_eq!(p.panels.len(), 1);
    assert_eq!(p.edge_count(), 4);
    assert!(p.stitches.is_empty());
}

#[test]
fn tube_document_has_two_stitches() {
    let p = parse_pattern(serialize_pattern(&tube()).as_bytes()).unwrap();
    assert_eq!(p.edge_count(), 8);
    assert_eq!(p.stitches.len(), 2);
}

#[test]
fn out_of_range_edge_is_a_validation_error() {
    let doc = RECT.replace(r#""stitches": []"#, r#""stitches": [[{"panel": 0, "edge": 9}, {"panel": 0, "edge": 1}]]"#);
    match parse_pattern(doc.as_bytes()) {
        Err(Error::Validation(v)) => assert!(v.iter().any(|x| matches!(x, Violation::DanglingStitch { .. }))),
        other => panic!("expected a validation error, got {other:?}"),
    }
}

#[test]
fn syntax_and_schema_errors_are_distinguished() {
    assert!(matches!(parse_pattern(b"{ not json"), Err(Error::Syntax(_))));
    assert!(matches!(parse_pattern(br#"{"name": "x", "panels": []}"#), Err(Error::Schema(_))));
    let bad_kind = RECT.replacen("\"straight\"", "\"spiral\"", 1);
    assert!(matches!(parse_pattern(bad_kind.as_bytes()), Err(Error::Schema(_))));
}

#[test]
fn stitches_are_stored_smaller_ref_first_and_duplicates_rejected() {
    let mut doc = serialize_pattern(&tube());
    doc = doc.replacen(
        "\"stitches\": [",
        "\"stitches\": [\n    [{\"panel\": 1, \"edge\": 3}, {\"panel\": 0, \"edge\": 3}],",
        1,
    );
    let raw = parse_unchecked(doc.as_bytes()).unwrap();
    assert_eq!(raw.stitches[0], StitchPair::new(EdgeRef::new(0, 3), EdgeRef::new(1, 3)));
    assert_eq!(raw.stitches[0].a(), EdgeRef::new(0, 3));
    match parse_pattern(doc.as_bytes()) {
        Err(Error::Validation(v)) => assert!(v.iter().any(|x| matches!(x, Violation::DuplicateStitch { .. }))),
        other => panic!("expected duplicate rejection, got {other:?}"),
    }
}

#[test]
fn serialization_is_deterministic_and_round_trips() {
    for fam in Family::ALL {
        for seed in 0..5 {
            let p = generate(seed, fam, 0.3);
            let s = serialize_pattern(&p);
            let q = parse_pattern(s.as_bytes()).unwrap();
            assert_eq!(p, q);
            assert_eq!(serialize_pattern(&q), s);
        }
    }
}

#[test]
fn bspline_edges_emit_all_ten_params() {
    let p = generate(1, Family::BodiceWithSleeve, 0.0);
    let s = serialize_pattern(&p);
    let v: serde_json::Value = serde_json::from_str(&s).unwrap();
    let cap = &v["panels"][2]["edges"][2]["curvature"];
    assert_eq!(cap["kind"], "bspline");
    let params = cap["params"].as_array().unwrap();
    assert_eq!(params.len(), 10);
    assert!(params.iter().all(|x| x.as_f64().unwrap() != 0.0));
}

#[test]
fn empty_pattern_document() {
    let p = Pattern { name: "empty".into(), panels: vec![], stitches: vec![] };
    let s = serialize_pattern(&p);
    let v: serde_json::Value = serde_json::from_str(&s).unwrap();
    assert_eq!(v["panels"], serde_json::json!([]));
    assert_eq!(parse_pattern(s.as_bytes()).unwrap(), p);
}

const EXTERNAL: &str = r#"{
  "pattern": {
    "panels": {
      "front": {
        "translation": [0, 0, 10], "rotation": [0, 0, 0],
        "vertices": [[0, 0], [40, 0], [40, 60], [0, 60]],
        "edges": [
          { "endpoints": [0, 1] },
          { "endpoints": [1, 2], "curvature": { "type": "quadratic", "params": [[0.5, 0.1]] } },
          { "endpoints": [2, 3], "curvature": [0.5, -0.05] },
          { "endpoints": [3, 0] }
        ]
      },
      "back": {
        "vertices": [[0, 0], [40, 0], [40, 60], [0, 60]],
        "edges": [
          { "endpoints": [0, 1], "curvature": { "type": "circle", "params": [25, 0, 1] } },
          { "endpoints": [1, 2], "curvature": { "type": "cubic", "params": [[0.3, 0.1], [0.7, -0.1]] } },
          { "endpoints": [2, 3] },
          { "endpoints": [3, 0] }
        ]
      }
    },
    "stitches": [
      [{ "panel": "front", "edge": 3 }, { "panel": "back", "edge": 1 }]
    ]
  },
  "parameters": {}
}"#;

#[test]
fn external_spec_is_normalized() {
    assert!(is_external(EXTERNAL.as_bytes()));
    assert!(!is_external(RECT.as_bytes()));
    let p = ingest_external(EXTERNAL.as_bytes()).unwrap();
    // panels in name order
    assert_eq!(p.panels.iter().map(|x| x.id.as_str()).collect::<Vec<_>>(), ["back", "front"]);
    let front = &p.panels[1];
    assert_eq!(front.edges[0].curvature, CurvatureSpec::straight());
    assert_eq!(front.edges[1].curvature.kind, CurveKind::QuadBezier);
    assert_eq!(front.edges[1].curvature.control_points(), vec![Vertex2::new(0.5, 0.1)]);
    assert_eq!(front.edges[2].curvature, CurvatureSpec::quad(Vertex2::new(0.5, -0.05)));
    let back = &p.panels[0];
    assert_eq!(back.edges[0].curvature.kind, CurveKind::CircularArc);
    let [r, d, theta] = [back.edges[0].curvature.params[0], back.edges[0].curvature.params[1], back.edges[0].curvature.params[2]];
    assert_eq!((r, d), (25.0, -1.0));
    assert!((theta - 2.0 * (40.0f64 / 50.0).asin()).abs() < 1e-12);
    assert_eq!(back.edges[1].curvature.kind, CurveKind::CubicBezier);
    assert_eq!(p.stitches, vec![StitchPair::new(EdgeRef::new(0, 1), EdgeRef::new(1, 3))]);
}

#[test]
fn minimal_external_spec() {
    let doc = r#"{"pattern": {"panels": {"p": {"vertices": [[0,0],[1,0],[0,1]], "edges": [{"endpoints":[0,1]},{"endpoints":[1,2]},{"endpoints":[2,0]}]}}, "stitches": []}}"#;
    let p = ingest_external(doc.as_bytes()).unwrap();
    assert_eq!(p.panels.len(), 1);
    assert_eq!(p.edge_count(), 3);
}

#[test]
fn external_panel_order_is_respected() {
    let doc = EXTERNAL.replacen("\"stitches\"", "\"panel_order\": [\"front\", \"back\"],\n    \"stitches\"", 1);
    let p = ingest_external(doc.as_bytes()).unwrap();
    assert_eq!(p.panels[0].id, "front");
    assert_eq!(p.stitches, vec![StitchPair::new(EdgeRef::new(0, 3), EdgeRef::new(1, 1))]);
}

#[test]
fn unsupported_external_constructs_are_named() {
    let doc = EXTERNAL.replace("\"cubic\"", "\"nurbs\"");
    match ingest_external(doc.as_bytes()) {
        Err(Error::Unsupported(what)) => assert!(what.contains("nurbs")),
        other => panic!("expected unsupported construct, got {other:?}"),
    }
    let doc = EXTERNAL.replace("\"endpoints\": [0, 1] }", "\"ends\": [0, 1] }");
    assert!(matches!(ingest_external(doc.as_bytes()), Err(Error::Schema(_))));
    let doc = EXTERNAL.replace("\"panel\": \"back\"", "\"panel\": \"sleeve\"");
    assert!(matches!(ingest_external(doc.as_bytes()), Err(Error::Schema(_))));
}

fn small_predictor() -> Predictor {
    let model = ModelConfig { layers: 2, hidden: 6, embed_dim: 3, aggregator: Aggregator::Max };
    Predictor {
        params: init_params(&model, 9),
        model,
        mask: FeatureMask { panel_id: false, topology: true },
        sinkhorn: SinkhornConfig { iterations: 20, tau_multi: 0.3 },
    }
}

#[test]
fn checkpoint_round_trips_exactly() {
    let ck = Checkpoint { predictor: small_predictor(), trainer: None };
    let s = ck.to_json();
    assert!(s.contains(LAYOUT_TAG));
    let back = Checkpoint::from_json(s.as_bytes()).unwrap();
    assert_eq!(back, ck);
    assert_eq!(back.to_json(), s);
}

#[test]
fn checkpoint_with_trainer_state_round_trips() {
    let model = ModelConfig { layers: 2, hidden: 6, embed_dim: 3, aggregator: Aggregator::Mean };
    let train = TrainConfig { epochs: 3, ..TrainConfig::default() };
    let mut t = Trainer::new(model, SinkhornConfig { iterations: 20, tau_multi: 0.4 }, train).unwrap();
    let ex = vec![TrainingExample::from_pattern(&tube(), FeatureMask::default()).unwrap()];
    t.run_epoch(&ex, &[]).unwrap();
    let ck = Checkpoint::from_trainer(&t, FeatureMask::default());
    let back = Checkpoint::from_json(ck.to_json().as_bytes()).unwrap();
    assert_eq!(back, ck);
    assert_eq!(back.trainer.unwrap(), t);
}

#[test]
fn checkpoint_rejects_foreign_layouts_and_shapes() {
    let s = Checkpoint { predictor: small_predictor(), trainer: None }.to_json();
    let wrong_layout = s.replace(LAYOUT_TAG, "edge18-v0");
    assert!(matches!(Checkpoint::from_json(wrong_layout.as_bytes()), Err(Error::Checkpoint(_))));
    let wrong_shape = s.replace("\"embed_dim\":3", "\"embed_dim\":4");
    assert!(matches!(Checkpoint::from_json(wrong_shape.as_bytes()), Err(Error::Checkpoint(_))));
    assert!(matches!(Checkpoint::from_json(RECT.as_bytes()), Err(Error::Checkpoint(_))));
}

#[test]
fn config_sections_override_defaults() {
    let c = Config::parse(
        "[model]\nlayers = 7\naggregator = \"max\"\npanel_id = false\n[train]\nepochs = 2\n[sinkhorn]\niterations = 500\ntau_multi = 0.05\n[merge]\ntorso = [\"front\"]\n",
    )
    .unwrap();
    assert_eq!(c.model.layers, 7);
    assert_eq!(c.model.aggregator, Aggregator::Max);
    assert_eq!(c.model.hidden, ModelConfig::default().hidden);
    assert!(!c.mask.panel_id && c.mask.topology);
    assert_eq!(c.train.epochs, 2);
    assert_eq!((c.sinkhorn.iterations, c.sinkhorn.tau_multi), (500, 0.05));
    assert_eq!(c.merge.torso_id_patterns, vec!["front".to_string()]);
    assert_eq!(Config::parse("").unwrap(), Config::default());
}

#[test]
fn config_errors() {
    for bad in ["[model]\nlayer = 3", "[model]\naggregator = \"sum\"", "[sinkhorn]\niterations = 0", "[extra]\nx = 1", "[model"] {
        assert!(matches!(Config::parse(bad), Err(Error::Config(_))), "{bad}");
    }
}

#[test]
fn eval_report_json_round_trips() {
    let s = |v: &[(usize, usize)]| v.iter().map(|&(a, b)| StitchPair::new(EdgeRef::new(0, a), EdgeRef::new(1, b))).collect();
    let r = evaluate_sets(&[("x".into(), s(&[(0, 0), (1, 1)]), s(&[(0, 0)])), ("y".into(), s(&[]), s(&[(2, 2)]))]);
    let text = report_to_json(&r);
    assert_eq!(report_from_json(text.as_bytes()).unwrap(), r);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    for k in ["tp", "tr", "tf1", "mep", "mer", "mef1", "gsp"] {
        assert!(v[k].is_number(), "{k}");
    }
}

#[test]
fn panel_polygon_helper_is_valid() {
    let p = Pattern { name: "sq".into(), panels: vec![Panel::polygon("sq", vec![Vertex2::new(0.0, 0.0), Vertex2::new(1.0, 0.0), Vertex2::new(1.0, 1.0)])], stitches: vec![] };
    assert!(parse_pattern(serialize_pattern(&p).as_bytes()).is_ok());
}
