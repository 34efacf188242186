//! Frozen reports for a few checks at seed 42. Keys, verdicts and
//! parameters must match exactly; measurements to 1e-12 relative.

use fraclap::verify::{run_check, Report, VerifyConfig};

fn compare(id: &str) {
    let path = format!("{}/tests/golden/{id}.json", env!("CARGO_MANIFEST_DIR"));
    let golden = Report::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let fresh = run_check(id, &VerifyConfig::default()).unwrap();
    assert_eq!(fresh.check_id, golden.check_id);
    assert_eq!(fresh.params, golden.params);
    assert_eq!(fresh.samples, golden.samples);
    assert_eq!(fresh.pass, golden.pass);
    assert_eq!(fresh.tolerance, golden.tolerance);
    assert_eq!(fresh.conditions, golden.conditions);
    assert_eq!(fresh.measured.keys().collect::<Vec<_>>(), golden.measured.keys().collect::<Vec<_>>());
    for (key, want) in &golden.measured {
        let got = fresh.measured[key];
        assert!((got - want).abs() <= 1e-12 * want.abs().max(1e-300), "{id}.{key}: {got} vs {want}");
    }
    assert!(fresh.wall_time.is_none());
}

#[test]
fn lambda0_matches_golden() {
    compare("lambda0");
}

#[test]
fn dimension_reduction_matches_golden() {
    compare("dimension-reduction");
}

#[test]
fn decay_regimes_matches_golden() {
    compare("decay-regimes");
}

#[test]
fn green_limit_matches_golden() {
    compare("green-limit");
}
