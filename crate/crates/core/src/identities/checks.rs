//! Per-point residuals. Every check returns the largest absolute residual
//! together with the magnitude of the terms it was formed from.

use crate::curvature::CurvatureBundle;
use crate::tensor::{generalized_curvature_check, kulkarni_nomizu_unchecked, norm_squared, TensorValue, Variance};
use crate::Result;

use super::registry::IdentityId;

use Variance::Down;

/// Outcome of one identity at one point.
#[derive(Clone, Debug, PartialEq)]
pub enum PointOutcome {
    Measured { residual: f64, scale: f64 },
    /// The identity's hypothesis does not hold here; `measure` is the
    /// hypothesis quantity that exceeded its threshold.
    Inapplicable { reason: &'static str, measure: f64 },
}

/// Threshold on `max|E|` (relative to `max(1, max|C|)`) below which the
/// electric part counts as zero.
pub const ELECTRIC_ZERO: f64 = 1e-10;
/// Threshold on `max|∇·C|` (relative to `max(1, max|∇C|)`) below which the
/// Weyl tensor counts as divergence free.
pub const DIVERGENCE_ZERO: f64 = 1e-8;

#[derive(Default, Clone, Copy)]
struct Acc {
    residual: f64,
    scale: f64,
}

impl Acc {
    fn push(&mut self, residual: f64, terms: &[f64]) {
        let r = residual.abs();
        if r.is_nan() || r > self.residual {
            self.residual = r;
        }
        for t in terms {
            self.scale = self.scale.max(t.abs());
        }
    }

    fn outcome(self) -> PointOutcome {
        PointOutcome::Measured { residual: self.residual, scale: self.scale }
    }
}

fn indices(n: usize, rank: usize, mut f: impl FnMut(&[usize])) {
    let mut idx = vec![0usize; rank];
    let total = n.pow(rank as u32);
    for _ in 0..total {
        f(&idx);
        for s in (0..rank).rev() {
            idx[s] += 1;
            if idx[s] < n {
                break;
            }
            idx[s] = 0;
        }
    }
}

/// Quantities shared by several checks, computed once per point.
pub struct Derived<'a> {
    pub b: &'a CurvatureBundle,
    pub n: usize,
    /// `C_jklm u^m`
    pub cu: TensorValue,
    /// `u^p ∇_p C_iklm`
    pub u_dc: TensorValue,
    /// `u^p ∇_p E_km`
    pub u_de: TensorValue,
    /// `u^p ∇_p u_i`
    pub accel: TensorValue,
    /// `u^p ∇_p u^i`
    pub accel_up: TensorValue,
    /// `∇_p E^p_k`
    pub div_e: TensorValue,
    pub c2: f64,
    pub e2: f64,
    pub gamma2: f64,
    pub max_c: f64,
    pub max_e: f64,
    pub max_div_c: f64,
    pub max_nabla_c: f64,
}

fn along_u(b: &CurvatureBundle, t: &TensorValue) -> TensorValue {
    let n = b.n();
    let rank = t.rank() - 1;
    let stride = n.pow(rank as u32);
    let mut out = vec![0.0; stride];
    for p in 0..n {
        let up = b.u_up.at([p]);
        let src = &t.components()[p * stride..(p + 1) * stride];
        for (o, s) in out.iter_mut().zip(src) {
            *o += up * s;
        }
    }
    TensorValue::new(n, t.variance()[1..].to_vec(), out).expect("shape is consistent")
}

impl<'a> Derived<'a> {
    pub fn new(b: &'a CurvatureBundle) -> Result<Self> {
        let n = b.n();
        let cu = TensorValue::from_fn(n, &[Down; 3], |i| {
            (0..n).map(|m| b.weyl.at([i[0], i[1], i[2], m]) * b.u_up.at([m])).sum()
        });
        let u_dc = along_u(b, &b.nabla_weyl);
        let u_de = along_u(b, &b.nabla_electric);
        let accel = along_u(b, &b.nabla_u);
        let accel_up = along_u(b, &b.nabla_u_up);
        let div_e = TensorValue::from_fn(n, &[Down], |i| {
            let mut s = 0.0;
            for p in 0..n {
                for q in 0..n {
                    s += b.g_inv.at([p, q]) * b.nabla_electric.at([p, q, i[0]]);
                }
            }
            s
        });
        let c2 = norm_squared(&b.weyl, &b.g)?;
        let e2 = norm_squared(&b.electric, &b.g)?;
        let gamma2 = norm_squared(&b.gamma_tensor, &b.g)?;
        Ok(Derived {
            b,
            n,
            cu,
            u_dc,
            u_de,
            accel,
            accel_up,
            div_e,
            c2,
            e2,
            gamma2,
            max_c: b.weyl.max_abs(),
            max_e: b.electric.max_abs(),
            max_div_c: b.div_weyl.max_abs(),
            max_nabla_c: b.nabla_weyl.max_abs(),
        })
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    fn u(&self, i: usize) -> f64 {
        self.b.u_down.at([i])
    }

    fn g(&self, i: usize, j: usize) -> f64 {
        self.b.g.at([i, j])
    }

    fn e(&self, i: usize, j: usize) -> f64 {
        self.b.electric.at([i, j])
    }

    fn c(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.b.weyl.at([i, j, k, l])
    }

    fn electric_vanishes(&self) -> bool {
        self.max_e <= ELECTRIC_ZERO * self.max_c.max(1.0)
    }

    fn divergence_vanishes(&self) -> bool {
        self.max_div_c <= DIVERGENCE_ZERO * self.max_nabla_c.max(1.0)
    }
}

/// Evaluates `id` at one point.
pub fn evaluate(id: IdentityId, d: &Derived<'_>, tolerance: f64) -> Result<PointOutcome> {
    use IdentityId::*;
    Ok(match id {
        TorseForming => torse_forming(d),
        WeylCompatibility => weyl_compatibility(d),
        ContractionIdentity => contraction_identity(d),
        ContractionIff => contraction_iff(d, tolerance),
        RicciDecomposition => ricci_decomposition(d),
        PhiGradientSpatial => phi_gradient_spatial(d),
        GrwVelocityCriterion => grw_velocity(d),
        N4Lovelock => lovelock(d),
        N4QuarterDelta => quarter_delta(d),
        N4Reconstruction => reconstruction(d),
        N4ElectricRepresentation => electric_representation(d),
        N4WeylSquare => weyl_square_n4(d),
        N4VanishingIff => vanishing_iff_n4(d, tolerance),
        GammaGeneralizedCurvature => {
            let sym = generalized_curvature_check(&d.b.gamma_tensor)?;
            PointOutcome::Measured { residual: sym.max(), scale: d.b.gamma_tensor.max_abs() }
        }
        GammaTraceless => gamma_traceless(d),
        GammaUAnnihilation => gamma_u_annihilation(d),
        GammaRecurrence => gamma_recurrence(d),
        GammaVanishesN4 => PointOutcome::Measured {
            residual: d.b.gamma_tensor.max_abs(),
            scale: d.max_c,
        },
        GammaSquare => gamma_square(d),
        WeylScalarPositivity => weyl_scalar_positivity(d),
        Adati => adati(d),
        DivergenceFormula => divergence_formula(d),
        DivergenceContractions => divergence_contractions(d),
        MasterRecurrence => {
            let (r, _) = master_recurrence(d);
            r.outcome()
        }
        MasterGammaConsistency => master_consistency(d),
        PurelyElectricDivergenceFree => {
            if !d.electric_vanishes() {
                PointOutcome::Inapplicable { reason: "electric part does not vanish", measure: d.max_e }
            } else {
                PointOutcome::Measured { residual: d.max_div_c, scale: d.max_nabla_c }
            }
        }
        DivergenceFreeContractionRecurrence => {
            if !d.divergence_vanishes() {
                PointOutcome::Inapplicable { reason: "Weyl divergence does not vanish", measure: d.max_div_c }
            } else {
                contraction_recurrence(d)
            }
        }
        DivergenceFreeElectric => {
            if !d.divergence_vanishes() {
                PointOutcome::Inapplicable { reason: "Weyl divergence does not vanish", measure: d.max_div_c }
            } else {
                electric_recurrence(d)
            }
        }
        DivergenceFreeElectricCurl => {
            if !d.divergence_vanishes() {
                PointOutcome::Inapplicable { reason: "Weyl divergence does not vanish", measure: d.max_div_c }
            } else {
                electric_curl(d)
            }
        }
    })
}

fn torse_forming(d: &Derived<'_>) -> PointOutcome {
    let b = d.b;
    let mut acc = Acc::default();
    indices(d.n, 2, |i| {
        let (a, c) = (i[0], i[1]);
        let rhs = b.phi * (d.g(a, c) + d.u(a) * d.u(c));
        let lhs = b.nabla_u.at([a, c]);
        acc.push(lhs - rhs, &[lhs, rhs]);
    });
    let norm: f64 = (0..d.n).map(|k| b.u_up.at([k]) * d.u(k)).sum();
    acc.push(norm + 1.0, &[]);
    acc.outcome()
}

fn weyl_compatibility(d: &Derived<'_>) -> PointOutcome {
    let mut acc = Acc::default();
    indices(d.n, 3, |x| {
        let (i, j, k) = (x[0], x[1], x[2]);
        for l in 0..d.n {
            let a = d.u(i) * d.cu.at([j, k, l]);
            let b = d.u(j) * d.cu.at([k, i, l]);
            let c = d.u(k) * d.cu.at([i, j, l]);
            acc.push(a + b + c, &[a, b, c]);
        }
    });
    acc.outcome()
}

fn contraction_identity(d: &Derived<'_>) -> PointOutcome {
    let mut acc = Acc::default();
    indices(d.n, 3, |x| {
        let (j, k, l) = (x[0], x[1], x[2]);
        let lhs = d.cu.at([j, k, l]);
        let a = d.u(k) * d.e(j, l);
        let b = d.u(j) * d.e(k, l);
        acc.push(lhs - (a - b), &[lhs, a, b]);
    });
    acc.outcome()
}

/// Residual is zero when both sides agree on vanishing, and otherwise the
/// larger of the two magnitudes.
fn contraction_iff(d: &Derived<'_>, tolerance: f64) -> PointOutcome {
    let threshold = tolerance * d.max_c.max(1.0);
    let max_cu = d.cu.max_abs();
    let cu_zero = max_cu <= threshold;
    let e_zero = d.max_e <= threshold;
    let residual = if cu_zero == e_zero { 0.0 } else { max_cu.max(d.max_e) };
    PointOutcome::Measured { residual, scale: 0.0 }
}

fn ricci_decomposition(d: &Derived<'_>) -> PointOutcome {
    let b = d.b;
    let nf = d.nf();
    let v_down = TensorValue::from_fn(d.n, &[Down], |i| {
        (0..d.n).map(|j| d.g(i[0], j) * b.v.at([j])).sum()
    });
    let a = (b.scalar_r - nf * b.xi) / (nf - 1.0);
    let c = (b.scalar_r - b.xi) / (nf - 1.0);
    let mut acc = Acc::default();
    indices(d.n, 2, |x| {
        let (j, k) = (x[0], x[1]);
        let t1 = a * d.u(j) * d.u(k);
        let t2 = c * d.g(j, k);
        let t3 = (nf - 2.0) * (d.u(j) * v_down.at([k]) + d.u(k) * v_down.at([j]) - d.e(j, k));
        let lhs = b.ricci.at([j, k]);
        acc.push(lhs - (t1 + t2 + t3), &[lhs, t1, t2, t3]);
    });
    acc.outcome()
}

fn phi_gradient_spatial(d: &Derived<'_>) -> PointOutcome {
    let b = d.b;
    let mut acc = Acc::default();
    let s: f64 = (0..d.n).map(|k| b.v.at([k]) * d.u(k)).sum();
    acc.push(s, &[b.v.max_abs() * b.u_down.max_abs()]);
    acc.outcome()
}

fn grw_velocity(d: &Derived<'_>) -> PointOutcome {
    PointOutcome::Measured { residual: d.b.v.max_abs(), scale: d.b.dphi.max_abs() }
}

fn lovelock(d: &Derived<'_>) -> PointOutcome {
    let mut acc = Acc::default();
    let (g, c) = (|i, j| d.g(i, j), |i, j, k, l| d.c(i, j, k, l));
    indices(d.n, 6, |x| {
        let (a, b_, cc, r, s, t) = (x[0], x[1], x[2], x[3], x[4], x[5]);
        let terms = [
            g(a, r) * c(b_, cc, s, t),
            g(b_, r) * c(cc, a, s, t),
            g(cc, r) * c(a, b_, s, t),
            g(a, t) * c(b_, cc, r, s),
            g(b_, t) * c(cc, a, r, s),
            g(cc, t) * c(a, b_, r, s),
            g(a, s) * c(b_, cc, t, r),
            g(b_, s) * c(cc, a, t, r),
            g(cc, s) * c(a, b_, t, r),
        ];
        acc.push(terms.iter().sum(), &terms);
    });
    acc.outcome()
}

fn quarter_delta(d: &Derived<'_>) -> PointOutcome {
    let b = d.b;
    // C^{abcs} with all slots raised.
    let c_up = b.weyl.raise_all(&b.g_inv).expect("metric matches");
    let mut acc = Acc::default();
    indices(d.n, 2, |x| {
        let (r, s) = (x[0], x[1]);
        let mut lhs = 0.0;
        indices(d.n, 3, |y| {
            lhs += d.c(y[0], y[1], y[2], r) * c_up.at([y[0], y[1], y[2], s]);
        });
        let rhs = if r == s { 0.25 * d.c2 } else { 0.0 };
        acc.push(lhs - rhs, &[lhs, rhs]);
    });
    acc.outcome()
}

fn reconstruction(d: &Derived<'_>) -> PointOutcome {
    let mut acc = Acc::default();
    indices(d.n, 4, |x| {
        let (a, b_, c, e) = (x[0], x[1], x[2], x[3]);
        let mut contr = 0.0;
        for m in 0..d.n {
            let um = d.b.u_up.at([m]);
            contr += um
                * (d.u(a) * d.c(m, b_, c, e)
                    + d.u(b_) * d.c(a, m, c, e)
                    + d.u(c) * d.c(a, b_, m, e)
                    + d.u(e) * d.c(a, b_, c, m));
        }
        let ge = d.g(a, e) * d.e(b_, c) - d.g(b_, e) * d.e(a, c) - d.g(a, c) * d.e(b_, e)
            + d.g(b_, c) * d.e(a, e);
        let lhs = d.c(a, b_, c, e);
        acc.push(lhs - (-contr + ge), &[lhs, contr, ge]);
    });
    acc.outcome()
}

fn electric_representation(d: &Derived<'_>) -> PointOutcome {
    let mut acc = Acc::default();
    indices(d.n, 4, |x| {
        let (a, b_, c, e) = (x[0], x[1], x[2], x[3]);
        let uu = 2.0
            * (d.u(a) * d.u(e) * d.e(b_, c) - d.u(a) * d.u(c) * d.e(b_, e)
                + d.u(b_) * d.u(c) * d.e(a, e)
                - d.u(b_) * d.u(e) * d.e(a, c));
        let ge = d.g(a, e) * d.e(b_, c) - d.g(a, c) * d.e(b_, e) + d.g(b_, c) * d.e(a, e)
            - d.g(b_, e) * d.e(a, c);
        let lhs = d.c(a, b_, c, e);
        acc.push(lhs - (uu + ge), &[lhs, uu, ge]);
    });
    acc.outcome()
}

fn weyl_square_n4(d: &Derived<'_>) -> PointOutcome {
    let mut acc = Acc::default();
    acc.push(d.c2 - 8.0 * d.e2, &[d.c2, 8.0 * d.e2]);
    acc.outcome()
}

fn vanishing_iff_n4(d: &Derived<'_>, tolerance: f64) -> PointOutcome {
    let c_zero = d.max_c <= tolerance;
    let e_zero = d.max_e <= tolerance;
    let residual = if c_zero == e_zero { 0.0 } else { d.max_c.max(d.max_e) };
    PointOutcome::Measured { residual, scale: 0.0 }
}

/// Largest single trace of a rank-4 covariant tensor over any slot pair.
pub fn max_trace(t: &TensorValue, g_inv: &TensorValue) -> f64 {
    let n = t.n();
    let mut worst: f64 = 0.0;
    for a in 0..4 {
        for b in a + 1..4 {
            let free: Vec<usize> = (0..4).filter(|s| *s != a && *s != b).collect();
            indices(n, 2, |x| {
                let mut idx = [0usize; 4];
                idx[free[0]] = x[0];
                idx[free[1]] = x[1];
                let mut s = 0.0;
                for p in 0..n {
                    for q in 0..n {
                        idx[a] = p;
                        idx[b] = q;
                        s += g_inv.at([p, q]) * t.get(&idx);
                    }
                }
                worst = worst.max(s.abs());
            });
        }
    }
    worst
}

fn gamma_traceless(d: &Derived<'_>) -> PointOutcome {
    PointOutcome::Measured {
        residual: max_trace(&d.b.gamma_tensor, &d.b.g_inv),
        scale: d.b.gamma_tensor.max_abs(),
    }
}

fn gamma_u_annihilation(d: &Derived<'_>) -> PointOutcome {
    let gt = &d.b.gamma_tensor;
    let mut worst: f64 = 0.0;
    for slot in 0..4 {
        indices(d.n, 3, |x| {
            let mut idx = [0usize; 4];
            let mut f = x.iter();
            for (s, v) in idx.iter_mut().enumerate() {
                if s != slot {
                    *v = *f.next().unwrap();
                }
            }
            let mut s = 0.0;
            for m in 0..d.n {
                idx[slot] = m;
                s += d.b.u_up.at([m]) * gt.get(&idx);
            }
            worst = worst.max(s.abs());
        });
    }
    PointOutcome::Measured { residual: worst, scale: gt.max_abs() }
}

fn gamma_recurrence(d: &Derived<'_>) -> PointOutcome {
    let u_dg = along_u(d.b, &d.b.nabla_gamma);
    let mut acc = Acc::default();
    for (a, g) in u_dg.components().iter().zip(d.b.gamma_tensor.components()) {
        let b = 2.0 * d.b.phi * g;
        acc.push(a + b, &[*a, b]);
    }
    acc.outcome()
}

fn gamma_square(d: &Derived<'_>) -> PointOutcome {
    let nf = d.nf();
    let k = 4.0 * (nf - 2.0) / (nf - 3.0);
    let mut acc = Acc::default();
    acc.push(d.gamma2 - (d.c2 - k * d.e2), &[d.gamma2, d.c2, k * d.e2]);
    acc.outcome()
}

fn weyl_scalar_positivity(d: &Derived<'_>) -> PointOutcome {
    let violation = [-d.c2, -d.e2, -d.gamma2].into_iter().fold(0.0_f64, f64::max);
    PointOutcome::Measured { residual: violation, scale: 0.0 }
}

fn adati(d: &Derived<'_>) -> PointOutcome {
    let b = d.b;
    let nc = &b.nabla_weyl;
    let dv = &b.div_weyl;
    let k3 = 1.0 / (d.nf() - 3.0);
    let mut acc = Acc::default();
    indices(d.n, 5, |x| {
        let (i, j, k, l, m) = (x[0], x[1], x[2], x[3], x[4]);
        let lhs = [nc.at([i, j, k, l, m]), nc.at([j, k, i, l, m]), nc.at([k, i, j, l, m])];
        let rhs = [
            d.g(j, m) * dv.at([k, i, l]),
            d.g(k, m) * dv.at([i, j, l]),
            d.g(i, m) * dv.at([j, k, l]),
            d.g(k, l) * dv.at([j, i, m]),
            d.g(i, l) * dv.at([k, j, m]),
            d.g(j, l) * dv.at([i, k, m]),
        ];
        let l_sum: f64 = lhs.iter().sum();
        let r_sum: f64 = k3 * rhs.iter().sum::<f64>();
        let mut terms = lhs.to_vec();
        terms.extend(rhs.iter().map(|r| r * k3));
        acc.push(l_sum - r_sum, &terms);
    });
    acc.outcome()
}

fn divergence_formula(d: &Derived<'_>) -> PointOutcome {
    let b = d.b;
    let nf = d.nf();
    let ne = &b.nabla_electric;
    let mut acc = Acc::default();
    indices(d.n, 3, |x| {
        let (i, k, m) = (x[0], x[1], x[2]);
        let lhs = b.div_weyl.at([i, k, m]);
        let curl = (nf - 3.0) * (ne.at([i, k, m]) - ne.at([k, i, m]));
        let y = d.u(i) * d.e(k, m) - d.u(k) * d.e(i, m);
        let u_dy = d.accel.at([i]) * d.e(k, m) + d.u(i) * d.u_de.at([k, m])
            - d.accel.at([k]) * d.e(i, m)
            - d.u(k) * d.u_de.at([i, m]);
        let transport = (nf - 2.0) * (u_dy + 2.0 * b.phi * y);
        let t_k = (2.0 * d.u(k) * d.u(m) + d.g(k, m)) * d.div_e.at([i]);
        let t_i = (2.0 * d.u(i) * d.u(m) + d.g(i, m)) * d.div_e.at([k]);
        let rhs = curl + transport + t_k - t_i;
        acc.push(lhs - rhs, &[lhs, curl, transport, t_k, t_i]);
    });
    acc.outcome()
}

fn divergence_contractions(d: &Derived<'_>) -> PointOutcome {
    let b = d.b;
    let nf = d.nf();
    let dv = &b.div_weyl;
    let up = |i: usize| b.u_up.at([i]);
    let mut acc = Acc::default();
    for j in 0..d.n {
        let mut lhs = 0.0;
        indices(d.n, 2, |x| lhs += up(x[0]) * up(x[1]) * dv.at([j, x[0], x[1]]));
        let rhs = d.div_e.at([j]);
        acc.push(lhs - rhs, &[lhs, rhs]);
    }
    indices(d.n, 2, |x| {
        let (k, m) = (x[0], x[1]);
        let lhs: f64 = (0..d.n).map(|j| up(j) * dv.at([j, k, m])).sum();
        let a = d.u(m) * d.div_e.at([k]);
        let c = b.phi * (nf - 1.0) * d.e(k, m);
        let e = d.u_de.at([k, m]);
        acc.push(lhs - (a - c - e), &[lhs, a, c, e]);
    });
    acc.outcome()
}

/// Returns the master-identity accumulator and the residual tensor
/// `LHS − RHS`.
fn master_recurrence(d: &Derived<'_>) -> (Acc, TensorValue) {
    let b = d.b;
    let nf = d.nf();
    let n = d.n;
    let uu = b.u_down.outer(&b.u_down).expect("same dimension");
    let u_duu = TensorValue::from_fn(n, &[Down, Down], |i| {
        d.accel.at([i[0]]) * d.u(i[1]) + d.u(i[0]) * d.accel.at([i[1]])
    });
    let a = kulkarni_nomizu_unchecked(&uu, &b.electric);
    let bb = kulkarni_nomizu_unchecked(&b.g, &b.electric);
    let u_da = kulkarni_nomizu_unchecked(&u_duu, &b.electric)
        .add(&kulkarni_nomizu_unchecked(&uu, &d.u_de))
        .expect("same shape");
    let u_db = kulkarni_nomizu_unchecked(&b.g, &d.u_de);
    let mut acc = Acc::default();
    let mut resid = Vec::with_capacity(n.pow(4));
    for o in 0..n.pow(4) {
        let c = b.weyl.components()[o];
        let lhs = (nf - 3.0) * (d.u_dc.components()[o] + 2.0 * b.phi * c);
        let ra = (nf - 2.0) * (u_da.components()[o] + 2.0 * b.phi * a.components()[o]);
        let rb = u_db.components()[o] + 2.0 * b.phi * bb.components()[o];
        let r = lhs - (ra + rb);
        acc.push(r, &[lhs, ra, rb]);
        resid.push(r);
    }
    (acc, TensorValue::new(n, vec![Down; 4], resid).expect("shape is consistent"))
}

fn master_consistency(d: &Derived<'_>) -> PointOutcome {
    let (_, resid) = master_recurrence(d);
    let u_dg = along_u(d.b, &d.b.nabla_gamma);
    let k = d.nf() - 3.0;
    let mut acc = Acc::default();
    for ((r, ug), g) in resid
        .components()
        .iter()
        .zip(u_dg.components())
        .zip(d.b.gamma_tensor.components())
    {
        let rg = k * (ug + 2.0 * d.b.phi * g);
        acc.push(r - rg, &[*r, rg]);
    }
    acc.outcome()
}

fn contraction_recurrence(d: &Derived<'_>) -> PointOutcome {
    let b = d.b;
    let nf = d.nf();
    let mut acc = Acc::default();
    indices(d.n, 3, |x| {
        let (j, k, l) = (x[0], x[1], x[2]);
        let mut transport = 0.0;
        for m in 0..d.n {
            transport += d.u_dc.at([j, k, l, m]) * b.u_up.at([m]) + d.c(j, k, l, m) * d.accel_up.at([m]);
        }
        let rhs = -b.phi * (nf - 1.0) * d.cu.at([j, k, l]);
        acc.push(transport - rhs, &[transport, rhs]);
    });
    acc.outcome()
}

fn electric_recurrence(d: &Derived<'_>) -> PointOutcome {
    let b = d.b;
    let nf = d.nf();
    let mut acc = Acc::default();
    for k in 0..d.n {
        // ∇_p E^{pk} vanishes iff ∇_p E^p_k does.
        let v = d.div_e.at([k]);
        acc.push(v, &[v]);
    }
    indices(d.n, 2, |x| {
        let lhs = d.u_de.at([x[0], x[1]]);
        let rhs = -b.phi * (nf - 1.0) * d.e(x[0], x[1]);
        acc.push(lhs - rhs, &[lhs, rhs]);
    });
    acc.outcome()
}

fn electric_curl(d: &Derived<'_>) -> PointOutcome {
    let b = d.b;
    let nf = d.nf();
    let ne = &b.nabla_electric;
    let mut acc = Acc::default();
    indices(d.n, 3, |x| {
        let (i, k, m) = (x[0], x[1], x[2]);
        let lhs = ne.at([i, k, m]) - ne.at([k, i, m]);
        let rhs = (nf - 2.0) * b.phi * (d.u(i) * d.e(k, m) - d.u(k) * d.e(i, m));
        acc.push(lhs - rhs, &[ne.at([i, k, m]), ne.at([k, i, m]), rhs]);
    });
    acc.outcome()
}
