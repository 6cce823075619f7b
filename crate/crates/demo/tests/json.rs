use qms_demo::{kernel_curve_json, thermal_gap_json, w2_path_json};
use serde_json::Value;

#[test]
fn kernel_curve_at_zero_frequency_is_logarithmic_mean() {
    let v: Value = serde_json::from_str(&kernel_curve_json(0.0, 1.0, 0.1, 10.0, 5).unwrap()).unwrap();
    let x = v["x"].as_array().unwrap();
    let y = v["y"].as_array().unwrap();
    assert_eq!(x.len(), 5);
    let a = x[0].as_f64().unwrap();
    assert!((a - 0.1).abs() < 1e-12);
    assert!((y[0].as_f64().unwrap() - (a - 1.0) / a.ln()).abs() < 1e-12);
    assert!((y[2].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(kernel_curve_json(0.0, 1.0, 1.0, 0.5, 5).is_err());
}

#[test]
fn thermal_gap_is_even_in_beta() {
    let v: Value = serde_json::from_str(&thermal_gap_json(-2.0, 2.0, 5).unwrap()).unwrap();
    let y: Vec<f64> = v["y"].as_array().unwrap().iter().map(|t| t.as_f64().unwrap()).collect();
    assert!((y[0] - y[4]).abs() < 1e-10);
    assert!((y[2] - 2.0).abs() < 1e-10);
}

#[test]
fn w2_path_runs_between_endpoints() {
    let v: Value = serde_json::from_str(&w2_path_json(1.0, [0.3, 0.0, 0.5], [0.0, 0.2, -0.4], 9).unwrap()).unwrap();
    let bloch = v["bloch"].as_array().unwrap();
    assert_eq!(bloch.len(), 9);
    assert!((bloch[0][0].as_f64().unwrap() - 0.3).abs() < 1e-10);
    assert!((bloch[8][2].as_f64().unwrap() + 0.4).abs() < 1e-10);
    assert!(v["distance"].as_f64().unwrap() > 0.0);
    assert!(w2_path_json(1.0, [1.0, 0.0, 0.5], [0.0, 0.0, 0.0], 9).is_err());
}
