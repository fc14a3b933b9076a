use recoflow_core::verify::{run_suite, SUITES};

#[test]
fn every_suite_passes_for_several_seeds() {
    for seed in [0, 1, 20261015] {
        for suite in SUITES {
            let r = run_suite(suite, seed, 1.0).unwrap();
            let failed: Vec<_> = r.failures().collect();
            assert!(r.passed, "{suite} seed {seed}: {failed:?}");
        }
    }
}

#[test]
fn all_runs_every_suite_deterministically() {
    let all = run_suite("all", 5, 1.0).unwrap();
    let parts: usize = SUITES.iter().map(|s| run_suite(s, 5, 1.0).unwrap().checks.len()).sum();
    assert_eq!(all.checks.len(), parts);
    let again = run_suite("all", 5, 1.0).unwrap();
    assert_eq!(
        serde_json::to_string(&all).unwrap(),
        serde_json::to_string(&again).unwrap()
    );
}

#[test]
fn shrinking_tolerances_exposes_residuals() {
    let r = run_suite("algebra", 5, 0.0).unwrap();
    assert!(!r.passed);
    assert!(r.failures().any(|c| c.name == "recombinator.composition_law"));
}
