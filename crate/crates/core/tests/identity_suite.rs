use std::collections::BTreeSet;

use proptest::prelude::*;
use weylcheck::identities::*;
use weylcheck::models::Parameters;
use weylcheck::runner::{run, ModelSpec, RunConfig};
use weylcheck::{build_bundle, MetricModel};

fn model(name: &str, n: usize) -> MetricModel {
    MetricModel::builtin(name, Some(n), &Parameters::new()).unwrap()
}

#[test]
fn every_identity_is_exercised_by_the_default_models() {
    let report = run(&RunConfig { points: 3, ..RunConfig::default() }).unwrap();
    let measured: BTreeSet<IdentityId> = report
        .reports
        .iter()
        .filter(|r| r.points_tested > 0)
        .map(|r| r.identity_id)
        .collect();
    let all: BTreeSet<IdentityId> = IdentityId::all().collect();
    assert_eq!(measured, all);
    assert!(report.unexpected().is_empty(), "{}", report.to_text());
}

#[test]
fn grouped_entry_points_return_their_identities() {
    let m = model("twisted_n4", 4);
    let b = build_bundle(&m, &m.sample_points(1, 1).unwrap()[0]).unwrap();
    let ids = |rs: Vec<IdentityReport>| rs.into_iter().map(|r| r.identity_id).collect::<Vec<_>>();
    assert_eq!(torse_forming_residual(&m, &b).unwrap().verdict, Verdict::Pass);
    assert_eq!(weyl_compatibility_residual(&m, &b).unwrap().verdict, Verdict::Pass);
    assert_eq!(adati_identity_residual(&m, &b).unwrap().verdict, Verdict::Pass);
    assert_eq!(
        ids(contraction_identity_residual(&m, &b).unwrap()),
        [IdentityId::ContractionIdentity, IdentityId::ContractionIff]
    );
    assert_eq!(n4_identities(&m, &b).unwrap().len(), 6);
    assert_eq!(gamma_tensor_suite(&m, &b).unwrap().len(), 7);
    assert_eq!(divergence_formula_residual(&m, &b).unwrap().len(), 2);
    assert_eq!(appendix_identity_residual(&m, &b).unwrap().len(), 2);
    for r in n4_identities(&m, &b)
        .unwrap()
        .into_iter()
        .chain(gamma_tensor_suite(&m, &b).unwrap())
        .chain(ricci_decomposition_residual(&m, &b).unwrap())
    {
        assert!(r.as_expected(), "{r:?}");
    }
}

#[test]
fn conditional_results_hold_on_product_of_spheres() {
    let m = model("grw_product_spheres", 5);
    let bundles: Vec<_> = m
        .sample_points(10, 42)
        .unwrap()
        .iter()
        .map(|p| build_bundle(&m, p).unwrap())
        .collect();
    let reports = theorem1_suite(&m, &bundles).unwrap();
    assert_eq!(reports.len(), 4);
    for r in reports {
        assert_eq!(r.points_tested, 10, "{r:?}");
        assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
    }
}

#[test]
fn conditional_results_are_skipped_where_hypothesis_fails() {
    let m = model("twisted_generic", 5);
    let bundles: Vec<_> = m
        .sample_points(4, 42)
        .unwrap()
        .iter()
        .map(|p| build_bundle(&m, p).unwrap())
        .collect();
    for r in theorem1_suite(&m, &bundles).unwrap() {
        assert_eq!(r.verdict, Verdict::NotApplicable);
        assert_eq!(r.points_inapplicable, 4);
        assert!(r.hypothesis_measure.unwrap() > 1e-6);
        assert!(r.as_expected());
    }
}

#[test]
fn negative_control_breaks_only_twisted_identities() {
    let m = model("non_twisted_perturbed", 4);
    let b = build_bundle(&m, &m.sample_points(1, 5).unwrap()[0]).unwrap();
    let all = check_all(&m, &b, &Tolerances::new()).unwrap();
    for r in &all {
        assert!(r.as_expected(), "{r:?}");
        let expected_fail = r.expected == Expectation::Fail;
        assert_eq!(r.verdict == Verdict::Fail, expected_fail, "{:?}", r.identity_id);
    }
    let adati = all.iter().find(|r| r.identity_id == IdentityId::Adati).unwrap();
    assert_eq!(adati.verdict, Verdict::Pass);
}

#[test]
fn gamma_is_nontrivial_above_four_dimensions() {
    let m = model("twisted_generic", 5);
    let max_gamma = m
        .sample_points(10, 42)
        .unwrap()
        .iter()
        .map(|p| build_bundle(&m, p).unwrap().gamma_tensor.max_abs())
        .fold(0.0, f64::max);
    assert!(max_gamma > 1e-3);
}

#[test]
fn tolerance_override_can_force_failure() {
    let mut config = RunConfig {
        points: 2,
        models: vec![ModelSpec::builtin("twisted_generic", 5)],
        ..RunConfig::default()
    };
    config.tolerances.insert("adati".into(), 1e-30);
    let report = run(&config).unwrap();
    let adati = report.find("twisted_generic", 5, IdentityId::Adati).unwrap();
    assert_eq!(adati.tolerance, 1e-30);
    assert_eq!(adati.verdict, Verdict::Fail);
    assert_eq!(report.exit_code(), 1);
}

#[test]
fn custom_diagonal_model_runs_through_the_suite() {
    let config = RunConfig::from_toml(
        r#"
        points = 3
        [[models]]
        name = "de_sitter_like"
        components = ["-1", "exp(0.8*t)", "exp(0.8*t)", "exp(0.8*t)", "exp(0.8*t)"]
        expected_class = "rw"
        "#,
    )
    .unwrap();
    let report = run(&config).unwrap();
    assert_eq!(report.exit_code(), 0, "{}", report.to_text());
    let phi = report.find("de_sitter_like", 5, IdentityId::TorseForming).unwrap();
    assert_eq!(phi.points_tested, 3);
}

fn measured(residual: f64, scale: f64) -> IdentityReport {
    let m = model("minkowski", 4);
    IdentityReport::from_point(
        IdentityId::GammaSquare,
        &m,
        &PointOutcome::Measured { residual, scale },
        1e-9,
        Expectation::Pass,
    )
}

proptest! {
    #[test]
    fn merging_is_associative(
        r in proptest::collection::vec((0.0f64..1e-6, 0.0f64..10.0), 3),
    ) {
        let [a, b, c] = [measured(r[0].0, r[0].1), measured(r[1].0, r[1].1), measured(r[2].0, r[2].1)];
        let left = a.clone().merge(b.clone()).merge(c.clone());
        let right = a.merge(b.merge(c));
        prop_assert_eq!(left, right);
    }

    #[test]
    fn verdict_follows_relative_rule(residual in 0.0f64..1e-6, scale in 0.0f64..1e3) {
        let r = measured(residual, scale);
        let pass = residual <= 1e-9 * scale.max(1.0);
        prop_assert_eq!(r.verdict == Verdict::Pass, pass);
    }
}
