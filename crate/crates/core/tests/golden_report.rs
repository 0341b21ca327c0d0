//! Report schema stability: the tiny three-bus run must keep producing a
//! summary with the same structure and (within tolerance) the same values
//! as the committed golden file.

use drcc_core::experiment::{run_experiment, ExperimentConfig};
use serde_json::Value;
use std::path::PathBuf;

fn compare(path: &str, golden: &Value, got: &Value) {
    match (golden, got) {
        (Value::Object(a), Value::Object(b)) => {
            let mut ka: Vec<_> = a.keys().collect();
            let mut kb: Vec<_> = b.keys().collect();
            ka.sort();
            kb.sort();
            assert_eq!(ka, kb, "key set changed at {path}");
            for (k, v) in a {
                compare(&format!("{path}.{k}"), v, &b[k]);
            }
        }
        (Value::Array(a), Value::Array(b)) => {
            assert_eq!(a.len(), b.len(), "array length changed at {path}");
            for (i, (va, vb)) in a.iter().zip(b.iter()).enumerate() {
                compare(&format!("{path}[{i}]"), va, vb);
            }
        }
        (Value::Number(a), Value::Number(b)) => {
            let (a, b) = (a.as_f64().unwrap(), b.as_f64().unwrap());
            let tol = 1e-4 * a.abs().max(1.0);
            assert!(
                (a - b).abs() <= tol,
                "value changed at {path}: golden {a} vs {b}"
            );
        }
        (a, b) => assert_eq!(a, b, "value changed at {path}"),
    }
}

#[test]
fn tiny3_report_matches_golden() {
    let base = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let (config, cfg_dir) =
        ExperimentConfig::load(base.join("../../configs/tiny3.toml")).unwrap();
    let (mut report, _) = run_experiment(&config, &cfg_dir).unwrap();
    for v in &mut report.variants {
        v.wall_seconds = 0.0; // timing is not part of the schema contract
    }
    let got: Value = serde_json::to_value(&report).unwrap();
    let golden: Value = serde_json::from_str(
        &std::fs::read_to_string(base.join("tests/golden/tiny3_summary.json")).unwrap(),
    )
    .unwrap();
    compare("summary", &golden, &got);
}
