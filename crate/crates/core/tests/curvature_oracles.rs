use weylcheck::curvature::{christoffel, covariant_derivative, riemann_ricci_scalar, TensorField};
use weylcheck::identities::max_trace;
use weylcheck::models::Parameters;
use weylcheck::tensor::generalized_curvature_check;
use weylcheck::{build_bundle, ChartPoint, CurvatureBundle, MetricModel, ModelClass, TensorValue, Variance};

use Variance::{Down, Up};

fn model(name: &str, n: Option<usize>) -> MetricModel {
    MetricModel::builtin(name, n, &Parameters::new()).unwrap()
}

fn twisted5() -> MetricModel {
    model("twisted_generic", Some(5))
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Central difference of a bundle quantity along every coordinate, stacked
/// with the derivative slot first.
fn differenced(
    m: &MetricModel,
    p: &ChartPoint,
    h: f64,
    f: impl Fn(&CurvatureBundle) -> TensorValue,
) -> TensorValue {
    let n = m.n();
    let base = f(&build_bundle(m, p).unwrap());
    let mut comps = Vec::with_capacity(n * base.components().len());
    for e in 0..n {
        let mut plus = p.clone();
        let mut minus = p.clone();
        plus.coords[e] += h;
        minus.coords[e] -= h;
        let fp = f(&build_bundle(m, &plus).unwrap());
        let fm = f(&build_bundle(m, &minus).unwrap());
        comps.extend(
            fp.components()
                .iter()
                .zip(fm.components())
                .map(|(a, b)| (a - b) / (2.0 * h)),
        );
    }
    let mut var = vec![Down];
    var.extend_from_slice(base.variance());
    TensorValue::new(n, var, comps).unwrap()
}

fn assert_tensors_close(exact: &TensorValue, approx: &TensorValue, tol: f64, what: &str) {
    let scale = exact.max_abs().max(1.0);
    let diff = exact.max_abs_diff(approx).unwrap();
    assert!(diff <= tol * scale, "{what}: max diff {diff:e} (scale {scale:e})");
}

#[test]
fn minkowski_curvature_vanishes_in_every_dimension() {
    for n in 4..=7 {
        let m = model("minkowski", Some(n));
        let b = build_bundle(&m, &m.sample_points(1, 3).unwrap()[0]).unwrap();
        for t in [&b.christoffel, &b.riemann, &b.ricci, &b.weyl, &b.nabla_weyl, &b.gamma_tensor] {
            assert_eq!(t.max_abs(), 0.0);
        }
        assert_eq!(b.scalar_r, 0.0);
        assert_eq!(b.phi, 0.0);
    }
}

#[test]
fn exponential_rw_matches_closed_form() {
    let h = 0.3;
    for n in 4..=6 {
        let m = model("rw_flat", Some(n));
        let mut coords = vec![0.0; n];
        coords[0] = 1.1;
        coords[1] = 0.4;
        let b = build_bundle(&m, &ChartPoint::new(coords)).unwrap();
        let a2 = (2.0 * h * 1.1f64).exp();
        for i in 1..n {
            assert!(rel_close(b.christoffel.at([0, i, i]), a2 * h, 1e-14));
            assert!(rel_close(b.christoffel.at([i, 0, i]), h, 1e-14));
            assert!(rel_close(b.christoffel.at([i, i, 0]), h, 1e-14));
        }
        let nf = n as f64;
        assert!(rel_close(b.scalar_r, nf * (nf - 1.0) * h * h, 1e-13));
        assert!(rel_close(b.phi, h, 1e-14));
        assert!(rel_close(b.xi, (nf - 1.0) * h * h, 1e-13));
        assert!(b.weyl.max_abs() < 1e-13);
        assert!(b.v.max_abs() < 1e-15);
    }
}

#[test]
fn product_of_spheres_christoffel_symbols() {
    let m = model("grw_product_spheres", None);
    let (t, th1, th2) = (0.8, 1.1, 0.6);
    let b = build_bundle(&m, &ChartPoint::new(vec![t, th1, 0.3, th2, 2.0])).unwrap();
    assert!(rel_close(b.christoffel.at([1, 2, 2]), -th1.sin() * th1.cos(), 1e-14));
    assert!(rel_close(b.christoffel.at([2, 1, 2]), th1.cos() / th1.sin(), 1e-14));
    assert!(rel_close(b.christoffel.at([3, 4, 4]), -th2.sin() * th2.cos(), 1e-14));
    assert!(rel_close(b.christoffel.at([1, 0, 1]), 0.3, 1e-14));
}

#[test]
fn sphere_fiber_is_einstein() {
    let m = model("grw_product_spheres", None);
    let theta = 0.9;
    let g = m.fiber_metric_jet(&[theta, 0.2, 1.7, 0.4]).unwrap();
    let conn = christoffel(&g).unwrap();
    let curv = riemann_ricci_scalar(&g, &conn).unwrap();
    let r = |a: usize, b: usize, c: usize, d: usize| curv.riemann[((a * 4 + b) * 4 + c) * 4 + d].value();
    assert!(rel_close(r(0, 1, 0, 1), theta.sin().powi(2), 1e-14));
    assert!(r(0, 1, 2, 3).abs() < 1e-15);
    for a in 0..4 {
        for b in 0..4 {
            let ric = curv.ricci[a * 4 + b].value();
            assert!(rel_close(ric, g.get(a, b).value(), 1e-14), "Ric[{a}{b}] = {ric}");
        }
    }
    assert!(rel_close(curv.scalar.value(), 4.0, 1e-14));
}

#[test]
fn christoffel_derivatives_match_finite_differences() {
    let m = twisted5();
    let p = ChartPoint::new(vec![0.9, 0.4, -1.1, 2.0, 0.3]);
    let b = build_bundle(&m, &p).unwrap();
    let d1 = differenced(&m, &p, 1e-4, |b| b.christoffel.clone());
    assert_tensors_close(&b.christoffel_d1, &d1, 1e-8, "∂Γ");
    let d2 = differenced(&m, &p, 1e-4, |b| b.christoffel_d1.clone());
    assert_tensors_close(&b.christoffel_d2, &d2, 1e-8, "∂∂Γ");
    let dr = differenced(&m, &p, 1e-4, |b| b.riemann.clone());
    assert_tensors_close(&b.riemann_d1, &dr, 1e-8, "∂R");
}

#[test]
fn gamma_derivative_matches_differenced_gamma() {
    let m = twisted5();
    let p = ChartPoint::new(vec![1.3, -0.7, 0.5, 2.6, -2.2]);
    let b = build_bundle(&m, &p).unwrap();
    let grad = differenced(&m, &p, 1e-4, |b| b.gamma_tensor.clone());
    let field = TensorField::new(b.gamma_tensor.clone(), grad).unwrap();
    let nabla = covariant_derivative(&field, &b.christoffel).unwrap();
    assert!(b.gamma_tensor.max_abs() > 1e-3);
    assert_tensors_close(&b.nabla_gamma, &nabla, 1e-8, "∇Γ");
}

#[test]
fn velocity_derivative_matches_differenced_velocity() {
    let m = twisted5();
    for p in m.sample_points(3, 11).unwrap() {
        let b = build_bundle(&m, &p).unwrap();
        let grad = differenced(&m, &p, 1e-4, |b| b.u_down.clone());
        let nabla = covariant_derivative(&TensorField::new(b.u_down.clone(), grad).unwrap(), &b.christoffel).unwrap();
        assert_tensors_close(&b.nabla_u, &nabla, 1e-8, "∇u");
        let h = TensorValue::from_fn(5, &[Down, Down], |i| {
            b.phi * (b.g.at([i[0], i[1]]) + b.u_down.at([i[0]]) * b.u_down.at([i[1]]))
        });
        assert_tensors_close(&nabla, &h, 1e-8, "∇u against φh");
    }
}

#[test]
fn metric_is_covariantly_constant() {
    let m = twisted5();
    for p in m.sample_points(5, 5).unwrap() {
        let b = build_bundle(&m, &p).unwrap();
        let grad = differenced(&m, &p, 1e-5, |b| b.g.clone());
        let nabla_g = covariant_derivative(&TensorField::new(b.g.clone(), grad).unwrap(), &b.christoffel).unwrap();
        assert!(nabla_g.max_abs() < 1e-8);
    }
}

#[test]
fn exact_metric_derivatives_give_zero_nabla_g() {
    let m = twisted5();
    let p = m.sample_points(1, 9).unwrap().remove(0);
    let g = m.metric_jet(&p).unwrap();
    let field = TensorField::from_jets(5, &[Down, Down], g.components()).unwrap();
    let b = build_bundle(&m, &p).unwrap();
    let nabla_g = covariant_derivative(&field, &b.christoffel).unwrap();
    assert!(nabla_g.max_abs() < 1e-11);
}

#[test]
fn riemann_satisfies_second_bianchi() {
    let m = twisted5();
    for p in m.sample_points(5, 21).unwrap() {
        let b = build_bundle(&m, &p).unwrap();
        let field = TensorField::new(b.riemann.clone(), b.riemann_d1.clone()).unwrap();
        let nr = covariant_derivative(&field, &b.christoffel).unwrap();
        let n = 5;
        let mut worst: f64 = 0.0;
        for e in 0..n {
            for a in 0..n {
                for bb in 0..n {
                    for c in 0..n {
                        for d in 0..n {
                            let s = nr.at([e, a, bb, c, d]) + nr.at([c, a, bb, d, e]) + nr.at([d, a, bb, e, c]);
                            worst = worst.max(s.abs());
                        }
                    }
                }
            }
        }
        assert!(worst < 1e-9 * nr.max_abs().max(1.0), "{worst:e}");
    }
}

#[test]
fn weyl_is_traceless_with_curvature_symmetries() {
    for (name, n) in [("twisted_generic", 5), ("twisted_generic", 7), ("non_twisted_perturbed", 4)] {
        let m = model(name, Some(n));
        for p in m.sample_points(4, 2).unwrap() {
            let b = build_bundle(&m, &p).unwrap();
            let scale = b.weyl.max_abs().max(1.0);
            assert!(max_trace(&b.weyl, &b.g_inv) < 1e-13 * scale);
            assert!(generalized_curvature_check(&b.weyl).unwrap().max() < 1e-14 * scale);
            assert!(generalized_curvature_check(&b.riemann).unwrap().max() < 1e-14 * b.riemann.max_abs().max(1.0));
        }
    }
}

#[test]
fn electric_part_is_symmetric_spatial_and_traceless() {
    let m = twisted5();
    for p in m.sample_points(4, 8).unwrap() {
        let b = build_bundle(&m, &p).unwrap();
        let e = &b.electric;
        let mut trace = 0.0;
        for i in 0..5 {
            let spatial: f64 = (0..5).map(|k| e.at([i, k]) * b.u_up.at([k])).sum();
            assert!(spatial.abs() < 1e-15);
            for j in 0..5 {
                assert_eq!(e.at([i, j]), e.at([j, i]));
                trace += b.g_inv.at([i, j]) * e.at([i, j]);
            }
        }
        assert!(trace.abs() < 1e-15);
    }
}

#[test]
fn weyl_divergence_agrees_with_explicit_contraction() {
    let m = twisted5();
    let p = m.sample_points(1, 4).unwrap().remove(0);
    let b = build_bundle(&m, &p).unwrap();
    let n = 5;
    for i in 0..n {
        for k in 0..n {
            for l in 0..n {
                let mut s = 0.0;
                for a in 0..n {
                    for q in 0..n {
                        s += b.g_inv.at([a, q]) * b.nabla_weyl.at([a, i, k, l, q]);
                    }
                }
                assert!((s - b.div_weyl.at([i, k, l])).abs() < 1e-15);
            }
        }
    }
}

/// `C^a_bcd` is invariant under `g → e^{2σ} g`.
#[test]
fn mixed_weyl_is_conformally_invariant() {
    let m = twisted5();
    let rescaled = m.conformally_rescaled("exp(0.1*x1 + 0.2*t)", ModelClass::NonTwisted).unwrap();
    for p in m.sample_points(5, 17).unwrap() {
        let a = build_bundle(&m, &p).unwrap();
        let b = build_bundle(&rescaled, &p).unwrap();
        let ca = a.weyl.raise_lower(0, &a.g_inv, weylcheck::tensor::Direction::Up).unwrap();
        let cb = b.weyl.raise_lower(0, &b.g_inv, weylcheck::tensor::Direction::Up).unwrap();
        assert_eq!(ca.variance(), &[Up, Down, Down, Down][..]);
        assert!(a.g.max_abs_diff(&b.g).unwrap() > 1e-2);
        assert_tensors_close(&ca, &cb, 1e-12, "C^a_bcd");
    }
}

#[test]
fn product_of_spheres_has_weyl_but_no_electric_part() {
    let m = model("grw_product_spheres", None);
    let mut max_c: f64 = 0.0;
    for p in m.sample_points(50, 42).unwrap() {
        let b = build_bundle(&m, &p).unwrap();
        assert!(b.electric.max_abs() < 1e-10);
        assert!(b.v.max_abs() < 1e-14);
        max_c = max_c.max(b.weyl.max_abs());
    }
    assert!(max_c > 1e-3);
}

#[test]
fn twisted_model_is_not_grw() {
    let m = twisted5();
    let max_v = m
        .sample_points(20, 42)
        .unwrap()
        .iter()
        .map(|p| build_bundle(&m, p).unwrap().v.max_abs())
        .fold(0.0, f64::max);
    assert!(max_v > 1e-4);
}

#[test]
fn bundles_are_bitwise_deterministic() {
    let m = model("twisted_generic", Some(6));
    let p = m.sample_points(1, 99).unwrap().remove(0);
    let a = serde_json::to_string(&build_bundle(&m, &p).unwrap()).unwrap();
    let b = serde_json::to_string(&build_bundle(&m, &p).unwrap()).unwrap();
    assert_eq!(a, b);
}
