use lindsim_wasm::api::{cost_curves, decay_curves, gadget_probabilities};

#[test]
fn decay_curves_start_excited_and_track_exact() {
    let d = decay_curves(1.0, 0.0, 2.0, 5, 0.1, 200, 3).unwrap();
    let exact: Vec<f64> = serde_json::from_value(d["exact"].clone()).unwrap();
    let channel: Vec<f64> = serde_json::from_value(d["channel"].clone()).unwrap();
    let mc: Vec<f64> = serde_json::from_value(d["montecarlo"].clone()).unwrap();
    assert_eq!(exact.len(), 5);
    assert!((exact[0] - 1.0).abs() < 1e-12 && (mc[0] - 1.0).abs() < 1e-12);
    // pure decay at rate γ: population e^{−γt}
    for (k, e) in exact.iter().enumerate() {
        assert!((e - (-0.5 * k as f64).exp()).abs() < 1e-9, "{k}: {e}");
    }
    assert!(exact.iter().zip(&channel).all(|(a, b)| (a - b).abs() <= 0.1));
}

#[test]
fn decay_curves_are_seed_deterministic() {
    let a = decay_curves(1.0, 0.5, 1.0, 3, 0.2, 100, 9).unwrap();
    let b = decay_curves(1.0, 0.5, 1.0, 3, 0.2, 100, 9).unwrap();
    assert_eq!(a.to_string(), b.to_string());
}

#[test]
fn gadget_probabilities_respect_floor() {
    for r in [4, 8, 16] {
        let g = gadget_probabilities(1.0, 0.5, r).unwrap();
        assert!(g["p_segment"].as_f64().unwrap() > 0.25);
        assert!(g["p_trivial"].as_f64().unwrap() >= g["p_trivial_floor"].as_f64().unwrap());
        let w: f64 = g["channels"].as_array().unwrap().iter().map(|c| c["weight"].as_f64().unwrap()).sum();
        assert!((w - 1.0).abs() < 1e-12);
    }
}

#[test]
fn cost_curves_cover_requested_range() {
    let c = cost_curves(6, 1.0, 0.1).unwrap();
    assert_eq!(c["n"].as_array().unwrap().len(), 5);
    assert!(cost_curves(1, 1.0, 0.1).is_err());
}

#[test]
fn bad_inputs_are_errors() {
    assert!(decay_curves(1.0, 0.0, 1.0, 1, 0.1, 10, 0).is_err());
    assert!(gadget_probabilities(1.0, 0.0, 1).is_err());
}
