use proptest::prelude::*;
use weylcheck::expr::Expr;
use weylcheck::jet::{jet_arithmetic, jet_elementary, Elementary, JetOp};
use weylcheck::Jet3;

const STEP: f64 = 1e-3;

/// One-dimensional central stencils for derivatives of order 1, 2 and 3, as
/// (offset in units of `H`, weight) pairs.
fn stencil(order: usize) -> &'static [(f64, f64)] {
    match order {
        1 => &[(1.0, 0.5), (-1.0, -0.5)],
        2 => &[(1.0, 1.0), (0.0, -2.0), (-1.0, 1.0)],
        3 => &[(2.0, 0.5), (1.0, -1.0), (-1.0, 1.0), (-2.0, -0.5)],
        _ => unreachable!(),
    }
}

/// Central-difference estimate of the mixed partial `∂_idx f`: the tensor
/// product of one-dimensional stencils over the distinct axes.
fn central_h(f: &dyn Fn(&[f64]) -> f64, x: &[f64], idx: &[usize], h: f64) -> f64 {
    let mut axes: Vec<(usize, usize)> = Vec::new();
    for &i in idx {
        match axes.iter_mut().find(|(a, _)| *a == i) {
            Some((_, m)) => *m += 1,
            None => axes.push((i, 1)),
        }
    }
    let mut terms: Vec<(Vec<f64>, f64)> = vec![(x.to_vec(), 1.0)];
    for (axis, order) in axes {
        let mut next = Vec::new();
        for (p, w) in &terms {
            for &(off, sw) in stencil(order) {
                let mut q = p.clone();
                q[axis] += off * h;
                next.push((q, w * sw));
            }
        }
        terms = next;
    }
    let sum: f64 = terms.iter().map(|(p, w)| w * f(p)).sum();
    sum / h.powi(idx.len() as i32)
}

fn central(f: &dyn Fn(&[f64]) -> f64, x: &[f64], idx: &[usize]) -> f64 {
    central_h(f, x, idx, STEP)
}

/// Richardson extrapolation of two central estimates; error `O(h⁴)`.
fn richardson(f: &dyn Fn(&[f64]) -> f64, x: &[f64], idx: &[usize]) -> f64 {
    let h = 2e-2;
    (4.0 * central_h(f, x, idx, h / 2.0) - central_h(f, x, idx, h)) / 3.0
}

fn assert_matches_fd(jet: &Jet3, f: &dyn Fn(&[f64]) -> f64, x: &[f64], rel: f64) {
    let n = x.len();
    let close = |exact: f64, fd: f64, what: &str| {
        assert!(
            (exact - fd).abs() <= rel * exact.abs().max(1.0),
            "{what}: jet {exact} vs fd {fd} at {x:?}"
        );
    };
    assert!((jet.value() - f(x)).abs() <= 1e-13 * f(x).abs().max(1.0));
    for i in 0..n {
        close(jet.d1(i), central(f, x, &[i]), "d1");
        for j in 0..n {
            close(jet.d2(i, j), central(f, x, &[i, j]), "d2");
            for k in 0..n {
                close(jet.d3(i, j, k), central(f, x, &[i, j, k]), "d3");
            }
        }
    }
}

fn vars(x: &[f64]) -> Vec<Jet3> {
    (0..x.len()).map(|i| Jet3::variable(x.len(), i, x[i])).collect()
}

#[test]
fn product_of_sin_and_exp_matches_finite_differences() {
    let x = [0.4, -0.3];
    let v = vars(&x);
    let f = jet_arithmetic(
        &jet_elementary(&v[0], Elementary::Sin).unwrap(),
        &jet_elementary(&v[1], Elementary::Exp).unwrap(),
        JetOp::Mul,
    )
    .unwrap();
    assert_matches_fd(&f, &|p| p[0].sin() * p[1].exp(), &x, 1e-6);
}

#[test]
fn quotient_and_log_match_finite_differences() {
    let x = [0.7, 1.3];
    let v = vars(&x);
    let num = jet_elementary(&(&v[0] * &v[1]), Elementary::Log).unwrap();
    let den = jet_elementary(&v[0], Elementary::Cos).unwrap();
    let f = jet_arithmetic(&num, &den, JetOp::Div).unwrap();
    assert_matches_fd(&f, &|p| (p[0] * p[1]).ln() / p[0].cos(), &x, 1e-5);
}

#[test]
fn non_integer_power_matches_finite_differences() {
    let x = [0.9, 0.2];
    let v = vars(&x);
    let base = &v[0] + &(&v[1] * &v[1]);
    let f = jet_elementary(&base, Elementary::Pow(2.5)).unwrap();
    assert_matches_fd(&f, &|p| (p[0] + p[1] * p[1]).powf(2.5), &x, 1e-5);
}

#[test]
fn steep_composite_matches_extrapolated_differences() {
    let x = [0.5883118775275842, -0.11302362484188251, 0.5963422432312119];
    let f = |p: &[f64]| (1.5 + (p[0] * p[2]).sin()).powf(2.5) - p[1].powi(3);
    let jet = Expr::parse("pow(1.5 + sin(x0*x2), 2.5) - x1^3").unwrap().eval(&vars(&x)).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let exact = jet.d3(i, j, k);
                let fd = richardson(&f, &x, &[i, j, k]);
                assert!((exact - fd).abs() < 1e-7 * exact.abs().max(1.0), "{exact} vs {fd}");
            }
        }
    }
}

type Plain = fn(&[f64]) -> f64;

fn composites() -> Vec<(&'static str, Plain)> {
    vec![
        ("exp(x0*x1)*sin(x2)", |p| (p[0] * p[1]).exp() * p[2].sin()),
        ("log(1 + x0^2 + x1^2) / (2 + cos(x2))", |p| {
            (1.0 + p[0] * p[0] + p[1] * p[1]).ln() / (2.0 + p[2].cos())
        }),
        ("pow(1.5 + 0.5*sin(x0*x2), 2.5) - x1^3", |p| {
            (1.5 + 0.5 * (p[0] * p[2]).sin()).powf(2.5) - p[1].powi(3)
        }),
        ("sqrt(2 + x0*x1*x2) * exp(-x1)", |p| (2.0 + p[0] * p[1] * p[2]).sqrt() * (-p[1]).exp()),
        ("(x0 - x1)/(3 + x2*x2)", |p| (p[0] - p[1]) / (3.0 + p[2] * p[2])),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn parsed_composites_match_finite_differences(
        x0 in -1.0f64..1.0, x1 in -1.0f64..1.0, x2 in -1.0f64..1.0,
    ) {
        let x = [x0, x1, x2];
        for (src, plain) in composites() {
            let jet = Expr::parse(src).unwrap().eval(&vars(&x)).unwrap();
            assert_matches_fd(&jet, &plain, &x, 1e-5);
        }
    }

    #[test]
    fn derivative_arrays_are_symmetric(x0 in -1.0f64..1.0, x1 in -1.0f64..1.0, x2 in -1.0f64..1.0) {
        let x = [x0, x1, x2];
        for (src, _) in composites() {
            let jet = Expr::parse(src).unwrap().eval(&vars(&x)).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    prop_assert_eq!(jet.d2(i, j), jet.d2(j, i));
                    for k in 0..3 {
                        let d = jet.d3(i, j, k);
                        prop_assert_eq!(d, jet.d3(j, i, k));
                        prop_assert_eq!(d, jet.d3(k, j, i));
                        prop_assert_eq!(d, jet.d3(i, k, j));
                    }
                }
            }
        }
    }

    #[test]
    fn partial_commutes(x0 in -1.0f64..1.0, x1 in -1.0f64..1.0, x2 in -1.0f64..1.0) {
        let jet = Expr::parse("exp(x0*x1)*sin(x2)").unwrap().eval(&vars(&[x0, x1, x2])).unwrap();
        let a = jet.partial(0).unwrap().partial(2).unwrap();
        let b = jet.partial(2).unwrap().partial(0).unwrap();
        prop_assert_eq!(a.order(), 1);
        prop_assert!((a.value() - b.value()).abs() < 1e-14);
        for i in 0..3 {
            prop_assert!((a.d1(i) - jet.d3(0, 2, i)).abs() < 1e-14);
        }
    }
}
