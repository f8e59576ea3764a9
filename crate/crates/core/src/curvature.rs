//! Metric jets to curvature.
//!
//! The pipeline never differences numerically. Starting from third-order
//! metric jets it forms the inverse metric (order 3), the Christoffel symbols
//! (order 2), the Riemann, Ricci and Weyl tensors (order 1) and finally the
//! covariant derivatives, each step exact up to rounding.
//!
//! Conventions: signature (−,+,…,+),
//! `R^a_{bcd} = ∂_c Γ^a_{db} − ∂_d Γ^a_{cb} + Γ^a_{ce} Γ^e_{db} − Γ^a_{de} Γ^e_{cb}`,
//! `R_{bd} = R^a_{bad}`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::jet::Jet3;
use crate::models::{ChartPoint, MetricJet, MetricModel};
use crate::tensor::{kulkarni_nomizu_unchecked, Direction, TensorValue, Variance};

use Variance::{Down, Up};

/// Inverse metric and Levi-Civita connection as jets.
#[derive(Clone, Debug)]
pub struct Connection {
    n: usize,
    inverse: Vec<Jet3>,
    christoffel: Vec<Jet3>,
}

impl Connection {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `g^{ab}` through third order.
    pub fn inverse(&self, a: usize, b: usize) -> &Jet3 {
        &self.inverse[a * self.n + b]
    }

    /// `Γ^a_{bc}` through second order.
    pub fn gamma(&self, a: usize, b: usize, c: usize) -> &Jet3 {
        &self.christoffel[(a * self.n + b) * self.n + c]
    }

    pub fn gamma_value(&self) -> TensorValue {
        TensorValue::from_fn(self.n, &[Up, Down, Down], |i| self.gamma(i[0], i[1], i[2]).value())
    }

    /// `∂_e Γ^a_{bc}` stored as `[e, a, b, c]`.
    pub fn gamma_d1(&self) -> TensorValue {
        TensorValue::from_fn(self.n, &[Down, Up, Down, Down], |i| {
            self.gamma(i[1], i[2], i[3]).d1(i[0])
        })
    }

    /// `∂_e ∂_f Γ^a_{bc}` stored as `[e, f, a, b, c]`.
    pub fn gamma_d2(&self) -> TensorValue {
        TensorValue::from_fn(self.n, &[Down, Down, Up, Down, Down], |i| {
            self.gamma(i[2], i[3], i[4]).d2(i[0], i[1])
        })
    }
}

/// Gauss–Jordan inversion carried out in jet arithmetic.
fn invert_jet_matrix(n: usize, m: &[Jet3]) -> Result<Vec<Jet3>> {
    let scale = m.iter().fold(0.0f64, |s, j| s.max(j.value().abs()));
    let mut a: Vec<Jet3> = m.to_vec();
    let mut inv: Vec<Jet3> = (0..n * n)
        .map(|k| Jet3::constant(n, if k / n == k % n { 1.0 } else { 0.0 }))
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| {
                a[r * n + col]
                    .value()
                    .abs()
                    .total_cmp(&a[s * n + col].value().abs())
            })
            .unwrap_or(col);
        if a[pivot * n + col].value().abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::SingularMetric);
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
                inv.swap(pivot * n + k, col * n + k);
            }
        }
        let r = a[col * n + col].recip()?;
        for k in 0..n {
            a[col * n + k] = &a[col * n + k] * &r;
            inv[col * n + k] = &inv[col * n + k] * &r;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = a[row * n + col].clone();
            if factor.max_abs() == 0.0 {
                continue;
            }
            for k in 0..n {
                a[row * n + k] = &a[row * n + k] - &(&factor * &a[col * n + k]);
                inv[row * n + k] = &inv[row * n + k] - &(&factor * &inv[col * n + k]);
            }
        }
    }
    // Enforce exact symmetry of g^{ab}.
    for i in 0..n {
        for j in 0..i {
            let s = (&inv[i * n + j] + &inv[j * n + i]).scale(0.5);
            inv[i * n + j] = s.clone();
            inv[j * n + i] = s;
        }
    }
    Ok(inv)
}

/// `Γ^a_{bc} = ½ g^{ad}(∂_b g_{dc} + ∂_c g_{db} − ∂_d g_{bc})` with its first
/// and second coordinate derivatives.
pub fn christoffel(metric: &MetricJet) -> Result<Connection> {
    let n = metric.n();
    let inverse = invert_jet_matrix(n, metric.components())?;
    // dg[(c*n + a)*n + b] = ∂_c g_ab, order 2
    let mut dg = Vec::with_capacity(n * n * n);
    for c in 0..n {
        for a in 0..n {
            for b in 0..n {
                dg.push(metric.get(a, b).partial(c)?);
            }
        }
    }
    let d = |c: usize, a: usize, b: usize| &dg[(c * n + a) * n + b];
    let mut first_kind = Vec::with_capacity(n * n * n);
    for dd in 0..n {
        for b in 0..n {
            for c in 0..n {
                let s = &(d(b, dd, c) + d(c, dd, b)) - d(dd, b, c);
                first_kind.push(s.scale(0.5));
            }
        }
    }
    let inv2: Vec<Jet3> = inverse.iter().map(|j| j.truncate(2)).collect();
    let mut gamma = vec![Jet3::constant(n, 0.0).truncate(2); n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in b..n {
                let mut s = Jet3::constant(n, 0.0).truncate(2);
                for dd in 0..n {
                    let gi = &inv2[a * n + dd];
                    if gi.max_abs() == 0.0 {
                        continue;
                    }
                    s = &s + &(gi * &first_kind[(dd * n + b) * n + c]);
                }
                gamma[(a * n + c) * n + b] = s.clone();
                gamma[(a * n + b) * n + c] = s;
            }
        }
    }
    Ok(Connection {
        n,
        inverse,
        christoffel: gamma,
    })
}

/// Riemann, Ricci and scalar curvature as first-order jets.
#[derive(Clone, Debug)]
pub struct CurvatureJets {
    n: usize,
    /// `R^a_{bcd}`
    pub riemann_mixed: Vec<Jet3>,
    /// `R_{abcd}`
    pub riemann: Vec<Jet3>,
    pub ricci: Vec<Jet3>,
    pub scalar: Jet3,
}

impl CurvatureJets {
    pub fn n(&self) -> usize {
        self.n
    }
}

pub fn riemann_ricci_scalar(metric: &MetricJet, conn: &Connection) -> Result<CurvatureJets> {
    let n = metric.n();
    let zero1 = Jet3::constant(n, 0.0).truncate(1);
    let g1: Vec<Jet3> = metric.components().iter().map(|j| j.truncate(1)).collect();
    let gam1: Vec<Jet3> = conn.christoffel.iter().map(|j| j.truncate(1)).collect();
    let gam = |a: usize, b: usize, c: usize| &gam1[(a * n + b) * n + c];
    // dgam[c][a][d][b] = ∂_c Γ^a_{db}
    let mut dgam = Vec::with_capacity(n * n * n * n);
    for c in 0..n {
        for j in &conn.christoffel {
            dgam.push(j.partial(c)?);
        }
    }
    let dg = |c: usize, a: usize, d: usize, b: usize| &dgam[((c * n + a) * n + d) * n + b];
    let idx4 = |a: usize, b: usize, c: usize, d: usize| ((a * n + b) * n + c) * n + d;

    let mut mixed = vec![zero1.clone(); n * n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in (c + 1)..n {
                    let mut r = dg(c, a, d, b) - dg(d, a, c, b);
                    for e in 0..n {
                        let p = gam(a, c, e) * gam(e, d, b);
                        let q = gam(a, d, e) * gam(e, c, b);
                        r = &r + &(&p - &q);
                    }
                    mixed[idx4(a, b, d, c)] = r.scale(-1.0);
                    mixed[idx4(a, b, c, d)] = r;
                }
            }
        }
    }

    let mut riemann = vec![zero1.clone(); n * n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut s = zero1.clone();
                    for e in 0..n {
                        let ge = &g1[a * n + e];
                        if ge.max_abs() == 0.0 {
                            continue;
                        }
                        s = &s + &(ge * &mixed[idx4(e, b, c, d)]);
                    }
                    riemann[idx4(a, b, c, d)] = s;
                }
            }
        }
    }

    let mut ricci = vec![zero1.clone(); n * n];
    for b in 0..n {
        for d in 0..n {
            let mut s = zero1.clone();
            for a in 0..n {
                s = &s + &mixed[idx4(a, b, a, d)];
            }
            ricci[b * n + d] = s;
        }
    }
    // exact symmetry of R_{bd}
    for b in 0..n {
        for d in 0..b {
            let s = (&ricci[b * n + d] + &ricci[d * n + b]).scale(0.5);
            ricci[b * n + d] = s.clone();
            ricci[d * n + b] = s;
        }
    }

    let mut scalar = zero1;
    for b in 0..n {
        for d in 0..n {
            scalar = &scalar + &(&conn.inverse(b, d).truncate(1) * &ricci[b * n + d]);
        }
    }
    Ok(CurvatureJets {
        n,
        riemann_mixed: mixed,
        riemann,
        ricci,
        scalar,
    })
}

/// `C_{jklm}` as first-order jets.
pub fn weyl(metric: &MetricJet, curv: &CurvatureJets) -> Result<Vec<Jet3>> {
    let n = metric.n();
    if n < 4 {
        return Err(Error::WeylUndefined(n));
    }
    let g = |a: usize, b: usize| metric.get(a, b).truncate(1);
    let ric = |a: usize, b: usize| &curv.ricci[a * n + b];
    let nf = n as f64;
    let c1 = 1.0 / (nf - 2.0);
    let c2 = 1.0 / ((nf - 1.0) * (nf - 2.0));
    let mut out = Vec::with_capacity(n * n * n * n);
    for j in 0..n {
        for k in 0..n {
            for l in 0..n {
                for m in 0..n {
                    let (gjl, gjm, gkm, gkl) = (g(j, l), g(j, m), g(k, m), g(k, l));
                    let ricci_part = &(&(&(&gjl * ric(k, m)) - &(&gjm * ric(k, l))) + &(&gkm * ric(j, l)))
                        - &(&gkl * ric(j, m));
                    let scalar_part = &(&(&gjl * &gkm) - &(&gjm * &gkl)) * &curv.scalar;
                    let r = &curv.riemann[((j * n + k) * n + l) * n + m];
                    let c = &(r - &ricci_part.scale(c1)) + &scalar_part.scale(c2);
                    out.push(c);
                }
            }
        }
    }
    Ok(out)
}

/// A tensor value together with its first coordinate derivatives.
///
/// The gradient has one extra leading slot: `gradient[p, …] = ∂_p value[…]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorField {
    pub value: TensorValue,
    pub gradient: TensorValue,
}

impl TensorField {
    pub fn new(value: TensorValue, gradient: TensorValue) -> Result<Self> {
        if gradient.rank() != value.rank() + 1
            || gradient.n() != value.n()
            || gradient.variance()[1..] != *value.variance()
        {
            return Err(Error::ShapeMismatch("gradient must add one leading slot".into()));
        }
        Ok(Self { value, gradient })
    }

    /// Reads values and gradients from jets listed in storage order.
    pub fn from_jets(n: usize, variance: &[Variance], jets: &[Jet3]) -> Result<Self> {
        if jets.iter().any(|j| j.order() < 1) {
            return Err(Error::MissingDerivative("tensor field jets need order >= 1"));
        }
        let value = TensorValue::new(n, variance.to_vec(), jets.iter().map(Jet3::value).collect())?;
        let len = jets.len();
        let mut gvar = vec![Down];
        gvar.extend_from_slice(variance);
        let mut comps = Vec::with_capacity(n * len);
        for p in 0..n {
            comps.extend(jets.iter().map(|j| j.d1(p)));
        }
        let gradient = TensorValue::new(n, gvar, comps)?;
        Ok(Self { value, gradient })
    }
}

/// `∇_p T`, derivative slot first, one Christoffel correction per slot.
pub fn covariant_derivative(field: &TensorField, christoffel: &TensorValue) -> Result<TensorValue> {
    let t = &field.value;
    let n = t.n();
    if christoffel.n() != n || christoffel.variance() != [Up, Down, Down] {
        return Err(Error::ShapeMismatch("christoffel symbols must be (1,2) with matching n".into()));
    }
    if field.gradient.rank() != t.rank() + 1 {
        return Err(Error::MissingDerivative("gradient rank"));
    }
    let rank = t.rank();
    let mut var = vec![Down];
    var.extend_from_slice(t.variance());
    let mut scratch = vec![0usize; rank];
    let out = TensorValue::from_fn(n, &var, |ix| {
        let p = ix[0];
        let idx = &ix[1..];
        let mut v = field.gradient.get(ix);
        scratch.copy_from_slice(idx);
        for s in 0..rank {
            let a = idx[s];
            let mut corr = 0.0;
            for q in 0..n {
                scratch[s] = q;
                let tv = t.get(&scratch);
                if tv == 0.0 {
                    continue;
                }
                corr += match t.variance()[s] {
                    Down => -christoffel.at([q, p, a]) * tv,
                    Up => christoffel.at([a, p, q]) * tv,
                };
            }
            scratch[s] = a;
            v += corr;
        }
        v
    });
    Ok(out)
}

/// Jets collected while building a bundle.
#[derive(Clone, Debug)]
pub struct PointJets {
    pub metric: MetricJet,
    pub connection: Connection,
    pub curvature: CurvatureJets,
    pub weyl: Vec<Jet3>,
    pub u_up: Vec<Jet3>,
    pub u_down: Vec<Jet3>,
    /// `φ = ∇_k u^k / (n−1)`, order 2.
    pub phi: Jet3,
    /// `E_{kl} = u^j u^m C_{jklm}`, order 1.
    pub electric: Vec<Jet3>,
}

pub fn build_jets(model: &MetricModel, point: &ChartPoint) -> Result<PointJets> {
    let metric = model.metric_jet(point)?;
    let n = metric.n();
    let connection = christoffel(&metric)?;
    let curvature = riemann_ricci_scalar(&metric, &connection)?;
    let weyl_jets = weyl(&metric, &curvature)?;

    let u_up = model.velocity_up(&metric)?;
    let mut u_down = Vec::with_capacity(n);
    for a in 0..n {
        let mut s = Jet3::constant(n, 0.0);
        for b in 0..n {
            s = &s + &(metric.get(a, b) * &u_up[b]);
        }
        u_down.push(s);
    }

    let mut div_u = Jet3::constant(n, 0.0).truncate(2);
    for k in 0..n {
        div_u = &div_u + &u_up[k].partial(k)?;
        for j in 0..n {
            div_u = &div_u + &(connection.gamma(k, k, j) * &u_up[j]);
        }
    }
    let phi = div_u.scale(1.0 / (n as f64 - 1.0));

    let u1: Vec<Jet3> = u_up.iter().map(|j| j.truncate(1)).collect();
    let mut electric = Vec::with_capacity(n * n);
    for k in 0..n {
        for l in 0..n {
            let mut s = Jet3::constant(n, 0.0).truncate(1);
            for j in 0..n {
                if u1[j].max_abs() == 0.0 {
                    continue;
                }
                for m in 0..n {
                    if u1[m].max_abs() == 0.0 {
                        continue;
                    }
                    let c = &weyl_jets[((j * n + k) * n + l) * n + m];
                    s = &s + &(&(&u1[j] * &u1[m]) * c);
                }
            }
            electric.push(s);
        }
    }
    for k in 0..n {
        for l in 0..k {
            let s = (&electric[k * n + l] + &electric[l * n + k]).scale(0.5);
            electric[k * n + l] = s.clone();
            electric[l * n + k] = s;
        }
    }

    Ok(PointJets {
        metric,
        connection,
        curvature,
        weyl: weyl_jets,
        u_up,
        u_down,
        phi,
        electric,
    })
}

/// Every curvature quantity at one chart point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvatureBundle {
    pub point: ChartPoint,
    pub g: TensorValue,
    pub g_inv: TensorValue,
    /// `Γ^a_{bc}`
    pub christoffel: TensorValue,
    /// `∂_e Γ^a_{bc}` as `[e, a, b, c]`
    pub christoffel_d1: TensorValue,
    /// `∂_e ∂_f Γ^a_{bc}` as `[e, f, a, b, c]`
    pub christoffel_d2: TensorValue,
    /// `R_{abcd}`
    pub riemann: TensorValue,
    /// `∂_e R_{abcd}` as `[e, a, b, c, d]`
    pub riemann_d1: TensorValue,
    pub ricci: TensorValue,
    pub scalar_r: f64,
    pub weyl: TensorValue,
    /// `∇_i C_{jklm}`
    pub nabla_weyl: TensorValue,
    /// `∇_p C_{ikm}{}^p`
    pub div_weyl: TensorValue,
    pub u_down: TensorValue,
    pub u_up: TensorValue,
    /// `∇_i u_j`
    pub nabla_u: TensorValue,
    /// `∇_i u^j`
    pub nabla_u_up: TensorValue,
    pub phi: f64,
    /// `∂_a φ`
    pub dphi: TensorValue,
    pub xi: f64,
    /// `v^k = (g^{km} + u^k u^m) ∂_m φ`
    pub v: TensorValue,
    /// `E_{kl}`
    pub electric: TensorValue,
    /// `∇_p E_{kl}`
    pub nabla_electric: TensorValue,
    pub gamma_tensor: TensorValue,
    /// `∇_p Γ_{iklm}`
    pub nabla_gamma: TensorValue,
}

impl CurvatureBundle {
    pub fn n(&self) -> usize {
        self.g.n()
    }

    /// Names accepted by [`field`](Self::field), in declaration order.
    pub const FIELDS: &'static [&'static str] = &[
        "g",
        "g_inv",
        "christoffel",
        "christoffel_d1",
        "christoffel_d2",
        "riemann",
        "riemann_d1",
        "ricci",
        "scalar_r",
        "weyl",
        "nabla_weyl",
        "div_weyl",
        "u_down",
        "u_up",
        "nabla_u",
        "nabla_u_up",
        "phi",
        "dphi",
        "xi",
        "v",
        "electric",
        "nabla_electric",
        "gamma_tensor",
        "nabla_gamma",
    ];

    /// Looks a field up by name; scalars come back as rank-0 tensors.
    pub fn field(&self, name: &str) -> Option<TensorValue> {
        let n = self.n();
        Some(match name {
            "g" => self.g.clone(),
            "g_inv" => self.g_inv.clone(),
            "christoffel" => self.christoffel.clone(),
            "christoffel_d1" => self.christoffel_d1.clone(),
            "christoffel_d2" => self.christoffel_d2.clone(),
            "riemann" => self.riemann.clone(),
            "riemann_d1" => self.riemann_d1.clone(),
            "ricci" => self.ricci.clone(),
            "scalar_r" => TensorValue::scalar(n, self.scalar_r),
            "weyl" => self.weyl.clone(),
            "nabla_weyl" => self.nabla_weyl.clone(),
            "div_weyl" => self.div_weyl.clone(),
            "u_down" => self.u_down.clone(),
            "u_up" => self.u_up.clone(),
            "nabla_u" => self.nabla_u.clone(),
            "nabla_u_up" => self.nabla_u_up.clone(),
            "phi" => TensorValue::scalar(n, self.phi),
            "dphi" => self.dphi.clone(),
            "xi" => TensorValue::scalar(n, self.xi),
            "v" => self.v.clone(),
            "electric" => self.electric.clone(),
            "nabla_electric" => self.nabla_electric.clone(),
            "gamma_tensor" => self.gamma_tensor.clone(),
            "nabla_gamma" => self.nabla_gamma.clone(),
            _ => return None,
        })
    }

    pub fn from_jets(point: &ChartPoint, jets: &PointJets) -> Result<Self> {
        let n = jets.metric.n();
        let conn = &jets.connection;
        let g = jets.metric.values();
        let g_inv = TensorValue::from_fn(n, &[Up, Up], |i| conn.inverse(i[0], i[1]).value());
        let christoffel = conn.gamma_value();

        let riemann_field = TensorField::from_jets(n, &[Down; 4], &jets.curvature.riemann)?;
        let ricci = TensorValue::new(
            n,
            vec![Down, Down],
            jets.curvature.ricci.iter().map(Jet3::value).collect(),
        )?;
        let weyl_field = TensorField::from_jets(n, &[Down; 4], &jets.weyl)?;
        let nabla_weyl = covariant_derivative(&weyl_field, &christoffel)?;
        let div_weyl = nabla_weyl
            .raise_lower(4, &g_inv, Direction::Up)?
            .contract(0, 4)?;

        let u_up_field = TensorField::from_jets(n, &[Up], &jets.u_up)?;
        let u_down_field = TensorField::from_jets(n, &[Down], &jets.u_down)?;
        let nabla_u = covariant_derivative(&u_down_field, &christoffel)?;
        let nabla_u_up = covariant_derivative(&u_up_field, &christoffel)?;
        let u_up = u_up_field.value;
        let u_down = u_down_field.value;

        let phi = jets.phi.value();
        let dphi = TensorValue::new(n, vec![Down], jets.phi.gradient().to_vec())?;
        let u_dphi: f64 = (0..n).map(|p| u_up.at([p]) * dphi.at([p])).sum();
        let xi = (n as f64 - 1.0) * (u_dphi + phi * phi);
        let v = TensorValue::from_fn(n, &[Up], |i| {
            let k = i[0];
            (0..n)
                .map(|m| (g_inv.at([k, m]) + u_up.at([k]) * u_up.at([m])) * dphi.at([m]))
                .sum()
        });

        let electric_field = TensorField::from_jets(n, &[Down, Down], &jets.electric)?;
        let nabla_electric = covariant_derivative(&electric_field, &christoffel)?;
        let electric = electric_field.value;
        let weyl = weyl_field.value;

        let (gamma_tensor, nabla_gamma) =
            gamma_tensor_with_derivative(&g, &u_down, &nabla_u, &weyl, &nabla_weyl, &electric, &nabla_electric)?;

        let bundle = CurvatureBundle {
            point: point.clone(),
            g,
            g_inv,
            christoffel,
            christoffel_d1: conn.gamma_d1(),
            christoffel_d2: conn.gamma_d2(),
            riemann: riemann_field.value,
            riemann_d1: riemann_field.gradient,
            ricci,
            scalar_r: jets.curvature.scalar.value(),
            weyl,
            nabla_weyl,
            div_weyl,
            u_down,
            u_up,
            nabla_u,
            nabla_u_up,
            phi,
            dphi,
            xi,
            v,
            electric,
            nabla_electric,
            gamma_tensor,
            nabla_gamma,
        };
        if !bundle.is_finite() {
            return Err(Error::NonFinite("curvature bundle"));
        }
        Ok(bundle)
    }

    fn is_finite(&self) -> bool {
        self.scalar_r.is_finite()
            && self.phi.is_finite()
            && self.xi.is_finite()
            && [
                &self.g_inv,
                &self.christoffel_d2,
                &self.riemann_d1,
                &self.nabla_weyl,
                &self.nabla_gamma,
                &self.v,
            ]
            .iter()
            .all(|t| t.is_finite())
    }
}

/// `Γ = C − (n−2)/(n−3) (u⊗u)∧E − 1/(n−3) g∧E` and its covariant
/// derivative from the product rule (`∇g = 0`).
pub fn gamma_tensor_with_derivative(
    g: &TensorValue,
    u_down: &TensorValue,
    nabla_u: &TensorValue,
    weyl: &TensorValue,
    nabla_weyl: &TensorValue,
    electric: &TensorValue,
    nabla_electric: &TensorValue,
) -> Result<(TensorValue, TensorValue)> {
    let n = g.n();
    if n < 4 {
        return Err(Error::WeylUndefined(n));
    }
    let nf = n as f64;
    let a = (nf - 2.0) / (nf - 3.0);
    let b = 1.0 / (nf - 3.0);
    let uu = u_down.outer(u_down)?;
    let gamma = weyl
        .sub(&kulkarni_nomizu_unchecked(&uu, electric).scale(a))?
        .sub(&kulkarni_nomizu_unchecked(g, electric).scale(b))?;

    let mut comps = Vec::with_capacity(n.pow(5));
    for p in 0..n {
        let d_uu = TensorValue::from_fn(n, &[Down, Down], |i| {
            nabla_u.at([p, i[0]]) * u_down.at([i[1]]) + u_down.at([i[0]]) * nabla_u.at([p, i[1]])
        });
        let d_e = nabla_electric.slice_first(p)?;
        let d_kn_uu = kulkarni_nomizu_unchecked(&d_uu, electric).add(&kulkarni_nomizu_unchecked(&uu, &d_e))?;
        let d_kn_g = kulkarni_nomizu_unchecked(g, &d_e);
        let slice = nabla_weyl
            .slice_first(p)?
            .sub(&d_kn_uu.scale(a))?
            .sub(&d_kn_g.scale(b))?;
        comps.extend_from_slice(slice.components());
    }
    let nabla_gamma = TensorValue::new(n, vec![Down; 5], comps)?;
    Ok((gamma, nabla_gamma))
}

/// Builds the full bundle for `model` at `point`.
pub fn build_bundle(model: &MetricModel, point: &ChartPoint) -> Result<CurvatureBundle> {
    let jets = build_jets(model, point)?;
    CurvatureBundle::from_jets(point, &jets)
}
