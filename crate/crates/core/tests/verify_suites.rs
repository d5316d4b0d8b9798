use egg_metrics::verify::{run_suite, Suite, DEFAULT_SEED};

#[test]
fn domain_and_kobayashi_suites_pass() {
    for suite in [Suite::Domain, Suite::Kobayashi] {
        let report = run_suite(suite, DEFAULT_SEED);
        let failed: Vec<_> = report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name)
            .collect();
        assert!(report.passed, "{suite}: {failed:?}");
    }
}

#[test]
fn curvature_suite_passes() {
    let report = run_suite(Suite::Curvature, DEFAULT_SEED);
    let failed: Vec<_> = report.checks.iter().filter(|c| !c.passed).collect();
    assert!(failed.is_empty(), "{failed:#?}");
}

#[test]
fn wu_suite_passes_apart_from_continuity() {
    // The continuity threshold is tracked by the acceptance suite.
    let report = run_suite(Suite::Wu, DEFAULT_SEED);
    for check in report.checks.iter().filter(|c| !c.passed) {
        assert!(check.name.starts_with("continuity_distance"), "{check:#?}");
        assert!(check.error.is_none());
    }
}

#[test]
fn reports_are_deterministic() {
    let a = run_suite(Suite::Domain, 7);
    let b = run_suite(Suite::Domain, 7);
    assert_eq!(a, b);
    assert!(a.checks.iter().all(|c| c.measured.is_finite()));
}
