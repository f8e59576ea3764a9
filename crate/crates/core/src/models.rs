//! Chart-level metric catalog.
//!
//! Every built-in model is written in a comoving chart `(t, x¹, …, x^{n-1})`
//! and declares the velocity `u = ∂_t / sqrt(-g_00)`, which is `(1, 0, …, 0)`
//! for all built-ins. Whether `u` is actually torse-forming is measured by
//! the identity suite, never assumed here.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::jet::Jet3;
use crate::tensor::{TensorValue, Variance};

pub const MIN_DIM: usize = 4;
pub const MAX_DIM: usize = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelClass {
    Minkowski,
    Rw,
    Grw,
    Twisted,
    NonTwisted,
}

impl ModelClass {
    /// Minkowski, RW, GRW and twisted metrics all carry a torse-forming
    /// unit timelike velocity.
    pub fn is_twisted_family(self) -> bool {
        !matches!(self, ModelClass::NonTwisted)
    }

    /// Scale factor independent of space (`v = 0`).
    pub fn is_grw_family(self) -> bool {
        matches!(self, ModelClass::Minkowski | ModelClass::Rw | ModelClass::Grw)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelClass::Minkowski => "minkowski",
            ModelClass::Rw => "rw",
            ModelClass::Grw => "grw",
            ModelClass::Twisted => "twisted",
            ModelClass::NonTwisted => "non_twisted",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "minkowski" => ModelClass::Minkowski,
            "rw" => ModelClass::Rw,
            "grw" => ModelClass::Grw,
            "twisted" => ModelClass::Twisted,
            "non_twisted" => ModelClass::NonTwisted,
            _ => return Err(Error::InvalidParameter(format!("unknown model class '{s}'"))),
        })
    }
}

impl fmt::Display for ModelClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A model parameter: numeric, or a keyword such as the RW scale profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Number(f64),
    Text(String),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Number(v) => write!(f, "{v}"),
            ParamValue::Text(s) => f.write_str(s),
        }
    }
}

impl ParamValue {
    /// Numbers parse as numbers, anything else is kept as text.
    pub fn parse(s: &str) -> ParamValue {
        match s.trim().parse::<f64>() {
            Ok(v) => ParamValue::Number(v),
            Err(_) => ParamValue::Text(s.trim().to_string()),
        }
    }
}

pub type Parameters = BTreeMap<String, ParamValue>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub coords: Vec<f64>,
}

impl ChartPoint {
    pub fn new(coords: Vec<f64>) -> Self {
        Self { coords }
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn t(&self) -> f64 {
        self.coords[0]
    }
}

/// Symmetric n×n matrix of metric-component jets.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricJet {
    n: usize,
    comps: Vec<Jet3>,
}

impl MetricJet {
    pub fn from_components(n: usize, comps: Vec<Jet3>) -> Result<Self> {
        if comps.len() != n * n {
            return Err(Error::ShapeMismatch(format!("{} metric jets for n = {n}", comps.len())));
        }
        for a in 0..n {
            for b in 0..a {
                if comps[a * n + b] != comps[b * n + a] {
                    return Err(Error::ShapeMismatch(format!("metric jet not symmetric at ({a},{b})")));
                }
            }
        }
        Ok(Self { n, comps })
    }

    /// Diagonal metric from its diagonal entries.
    pub fn diagonal(diag: Vec<Jet3>) -> Self {
        let n = diag.len();
        let zero = Jet3::constant(n, 0.0);
        let mut comps = vec![zero; n * n];
        for (a, d) in diag.into_iter().enumerate() {
            comps[a * n + a] = d;
        }
        Self { n, comps }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, a: usize, b: usize) -> &Jet3 {
        &self.comps[a * self.n + b]
    }

    pub fn components(&self) -> &[Jet3] {
        &self.comps
    }

    pub fn values(&self) -> TensorValue {
        TensorValue::from_fn(self.n, &[Variance::Down, Variance::Down], |i| {
            self.get(i[0], i[1]).value()
        })
    }
}

/// Scale factor of the flat RW family.
#[derive(Clone, Debug, PartialEq)]
pub enum ScaleProfile {
    /// `exp(H t)`
    Exp { h: f64 },
    /// `t^k`
    Power { k: f64 },
    /// `1 + t²`
    Quadratic,
}

impl ScaleProfile {
    fn eval(&self, t: &Jet3) -> Result<Jet3> {
        let n = t.n();
        Ok(match self {
            ScaleProfile::Exp { h } => t.scale(*h).exp(),
            ScaleProfile::Power { k } => t.powf(*k)?,
            ScaleProfile::Quadratic => &Jet3::constant(n, 1.0) + &(t * t),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Kind {
    Minkowski,
    RwFlat(ScaleProfile),
    GrwProductSpheres { r1: f64, r2: f64, h: f64 },
    Twisted { alpha: f64, beta: f64, epsilon: f64, delta: f64 },
    Diagonal { components: Vec<Expr>, domain: Vec<(f64, f64)> },
    Conformal { base: Box<MetricModel>, factor: Expr },
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricModel {
    name: String,
    n: usize,
    parameters: Parameters,
    class: ModelClass,
    kind: Kind,
}

/// One catalog row, as printed by `models-list`.
#[derive(Clone, Debug, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub class: ModelClass,
    pub dims: &'static str,
    pub parameters: &'static str,
    pub description: &'static str,
}

pub fn catalog() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            name: "minkowski",
            class: ModelClass::Minkowski,
            dims: "4..7 (default 4)",
            parameters: "",
            description: "flat space-time, g = diag(-1, 1, ..., 1)",
        },
        CatalogEntry {
            name: "rw_flat",
            class: ModelClass::Rw,
            dims: "4..7 (default 4)",
            parameters: "profile=exp|power|quadratic (exp), H=0.3, k=0.6667",
            description: "-dt^2 + f(t)^2 dx.dx with f = exp(H t), t^k or 1 + t^2",
        },
        CatalogEntry {
            name: "grw_product_spheres",
            class: ModelClass::Grw,
            dims: "5",
            parameters: "r1=1, r2=1, H=0.3",
            description: "-dt^2 + exp(2 H t) [S^2(r1) x S^2(r2)] in angle charts",
        },
        CatalogEntry {
            name: "twisted_generic",
            class: ModelClass::Twisted,
            dims: "4..7 (default 5)",
            parameters: "alpha=0.2, beta=0.1, epsilon=0.05",
            description: "-dt^2 + f^2 g* with f = exp(alpha t + beta t sin x1), g* diagonal 1 + epsilon cos(x^(mu+1))",
        },
        CatalogEntry {
            name: "twisted_n4",
            class: ModelClass::Twisted,
            dims: "4",
            parameters: "alpha=0.2, beta=0.1, epsilon=0.05",
            description: "the n = 4 member of twisted_generic",
        },
        CatalogEntry {
            name: "non_twisted_perturbed",
            class: ModelClass::NonTwisted,
            dims: "4..7 (default 4)",
            parameters: "delta=0.1, alpha=0.2, beta=0.1, epsilon=0.05",
            description: "twisted_generic plus g_01 = delta sin x2 (negative control)",
        },
        CatalogEntry {
            name: "diagonal",
            class: ModelClass::Twisted,
            dims: "number of components",
            parameters: "components = [expr, ...], class",
            description: "user-defined diagonal metric from the expression grammar",
        },
    ]
}

struct ParamReader<'a> {
    model: &'a str,
    given: &'a Parameters,
    resolved: Parameters,
}

impl<'a> ParamReader<'a> {
    fn new(model: &'a str, given: &'a Parameters) -> Self {
        Self {
            model,
            given,
            resolved: Parameters::new(),
        }
    }

    fn number(&mut self, key: &str, default: f64) -> Result<f64> {
        let v = match self.given.get(key) {
            None => default,
            Some(ParamValue::Number(v)) if v.is_finite() => *v,
            Some(other) => {
                return Err(Error::InvalidParameter(format!(
                    "{}: parameter '{key}' must be a finite number, got '{other}'",
                    self.model
                )))
            }
        };
        self.resolved.insert(key.to_string(), ParamValue::Number(v));
        Ok(v)
    }

    fn positive(&mut self, key: &str, default: f64) -> Result<f64> {
        let v = self.number(key, default)?;
        if v <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "{}: parameter '{key}' must be positive, got {v}",
                self.model
            )));
        }
        Ok(v)
    }

    fn text(&mut self, key: &str, default: &str) -> Result<String> {
        let v = match self.given.get(key) {
            None => default.to_string(),
            Some(ParamValue::Text(s)) => s.clone(),
            Some(other) => {
                return Err(Error::InvalidParameter(format!(
                    "{}: parameter '{key}' must be a keyword, got '{other}'",
                    self.model
                )))
            }
        };
        self.resolved.insert(key.to_string(), ParamValue::Text(v.clone()));
        Ok(v)
    }

    fn finish(self) -> Result<Parameters> {
        if let Some(extra) = self.given.keys().find(|k| !self.resolved.contains_key(*k)) {
            return Err(Error::InvalidParameter(format!(
                "{}: unknown parameter '{extra}'",
                self.model
            )));
        }
        Ok(self.resolved)
    }
}

fn check_dim(model: &str, n: usize, allowed: std::ops::RangeInclusive<usize>) -> Result<usize> {
    if !allowed.contains(&n) {
        return Err(Error::InvalidParameter(format!(
            "{model}: dimension {n} outside {}..={}",
            allowed.start(),
            allowed.end()
        )));
    }
    Ok(n)
}

impl MetricModel {
    /// Builds a catalog model. `n = None` picks the model's default dimension.
    pub fn builtin(name: &str, n: Option<usize>, params: &Parameters) -> Result<MetricModel> {
        let mut p = ParamReader::new(name, params);
        let (n, class, kind) = match name {
            "minkowski" => (
                check_dim(name, n.unwrap_or(4), MIN_DIM..=MAX_DIM)?,
                ModelClass::Minkowski,
                Kind::Minkowski,
            ),
            "rw_flat" => {
                let n = check_dim(name, n.unwrap_or(4), MIN_DIM..=MAX_DIM)?;
                let profile = match p.text("profile", "exp")?.as_str() {
                    "exp" => ScaleProfile::Exp {
                        h: p.number("H", 0.3)?,
                    },
                    "power" => ScaleProfile::Power {
                        k: p.number("k", 2.0 / 3.0)?,
                    },
                    "quadratic" => ScaleProfile::Quadratic,
                    other => {
                        return Err(Error::InvalidParameter(format!(
                            "rw_flat: unknown profile '{other}' (exp, power, quadratic)"
                        )))
                    }
                };
                (n, ModelClass::Rw, Kind::RwFlat(profile))
            }
            "grw_product_spheres" => {
                let n = check_dim(name, n.unwrap_or(5), 5..=5)?;
                let kind = Kind::GrwProductSpheres {
                    r1: p.positive("r1", 1.0)?,
                    r2: p.positive("r2", 1.0)?,
                    h: p.number("H", 0.3)?,
                };
                (n, ModelClass::Grw, kind)
            }
            "twisted_generic" | "twisted_n4" => {
                let n = if name == "twisted_n4" {
                    check_dim(name, n.unwrap_or(4), 4..=4)?
                } else {
                    check_dim(name, n.unwrap_or(5), MIN_DIM..=MAX_DIM)?
                };
                let kind = Kind::Twisted {
                    alpha: p.number("alpha", 0.2)?,
                    beta: p.number("beta", 0.1)?,
                    epsilon: p.number("epsilon", 0.05)?,
                    delta: 0.0,
                };
                (n, ModelClass::Twisted, kind)
            }
            "non_twisted_perturbed" => {
                let n = check_dim(name, n.unwrap_or(4), MIN_DIM..=MAX_DIM)?;
                let kind = Kind::Twisted {
                    alpha: p.number("alpha", 0.2)?,
                    beta: p.number("beta", 0.1)?,
                    epsilon: p.number("epsilon", 0.05)?,
                    delta: p.number("delta", 0.1)?,
                };
                (n, ModelClass::NonTwisted, kind)
            }
            "diagonal" => {
                return Err(Error::InvalidParameter(
                    "diagonal models need component expressions; use MetricModel::diagonal".into(),
                ))
            }
            _ => return Err(Error::UnknownModel(name.to_string())),
        };
        if let Kind::Twisted { epsilon, .. } = kind {
            if epsilon.abs() >= 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name}: |epsilon| must be below 1 for a positive fiber metric"
                )));
            }
        }
        Ok(MetricModel {
            name: name.to_string(),
            n,
            parameters: p.finish()?,
            class,
            kind,
        })
    }

    /// A diagonal metric `g_aa = components[a]`, written in the expression
    /// grammar of [`crate::expr`]. The default sampling domain is
    /// `t ∈ [0.1, 2]`, `x^μ ∈ [-1, 1]`.
    pub fn diagonal(name: &str, components: &[String], class: ModelClass) -> Result<MetricModel> {
        let n = check_dim(name, components.len(), MIN_DIM..=MAX_DIM)?;
        let exprs = components
            .iter()
            .map(|c| Expr::parse(c))
            .collect::<Result<Vec<_>>>()?;
        if let Some(v) = exprs.iter().filter_map(Expr::max_variable).max() {
            if v >= n {
                return Err(Error::InvalidParameter(format!(
                    "{name}: expression uses x{v} but n = {n}"
                )));
            }
        }
        let mut domain = vec![(0.1, 2.0)];
        domain.extend(std::iter::repeat_n((-1.0, 1.0), n - 1));
        let parameters = components
            .iter()
            .enumerate()
            .map(|(a, c)| (format!("g{a}{a}"), ParamValue::Text(c.clone())))
            .collect();
        Ok(MetricModel {
            name: name.to_string(),
            n,
            parameters,
            class,
            kind: Kind::Diagonal {
                components: exprs,
                domain,
            },
        })
    }

    /// The metric `Ω² g`, with `Ω²` given as an expression in the chart
    /// coordinates. The declared class is kept by the caller's choice.
    pub fn conformally_rescaled(&self, factor: &str, class: ModelClass) -> Result<MetricModel> {
        let factor = Expr::parse(factor)?;
        if factor.max_variable().is_some_and(|v| v >= self.n) {
            return Err(Error::InvalidParameter("conformal factor uses an absent coordinate".into()));
        }
        let mut parameters = self.parameters.clone();
        parameters.insert("conformal_factor".into(), ParamValue::Text(factor.to_string()));
        Ok(MetricModel {
            name: format!("{}_conformal", self.name),
            n: self.n,
            parameters,
            class,
            kind: Kind::Conformal {
                base: Box::new(self.clone()),
                factor,
            },
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn parameters(&self) -> &Parameters {
        &self.parameters
    }

    pub fn expected_class(&self) -> ModelClass {
        self.class
    }

    /// Short label including dimension and parameters.
    pub fn label(&self) -> String {
        let params: Vec<String> = self
            .parameters
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        if params.is_empty() {
            format!("{}(n={})", self.name, self.n)
        } else {
            format!("{}(n={}, {})", self.name, self.n, params.join(", "))
        }
    }

    fn check_point_dim(&self, point: &ChartPoint) -> Result<()> {
        if point.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: point.n(),
            });
        }
        if point.coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("non-finite chart point".into()));
        }
        Ok(())
    }

    /// Jets of every metric component `g_ab` at `point`, through third order.
    pub fn metric_jet(&self, point: &ChartPoint) -> Result<MetricJet> {
        self.check_point_dim(point)?;
        let n = self.n;
        let x: Vec<Jet3> = point
            .coords
            .iter()
            .enumerate()
            .map(|(i, &v)| Jet3::variable(n, i, v))
            .collect();
        let one = Jet3::constant(n, 1.0);
        let minus_one = Jet3::constant(n, -1.0);
        match &self.kind {
            Kind::Minkowski => {
                let mut diag = vec![one; n];
                diag[0] = minus_one;
                Ok(MetricJet::diagonal(diag))
            }
            Kind::RwFlat(profile) => {
                let f = profile.eval(&x[0])?;
                let f2 = &f * &f;
                let mut diag = vec![f2; n];
                diag[0] = minus_one;
                Ok(MetricJet::diagonal(diag))
            }
            Kind::GrwProductSpheres { r1, r2, h } => {
                let f2 = x[0].scale(2.0 * h).exp();
                let s1 = x[1].sin();
                let s2 = x[3].sin();
                let diag = vec![
                    minus_one,
                    f2.scale(r1 * r1),
                    (&f2 * &(&s1 * &s1)).scale(r1 * r1),
                    f2.scale(r2 * r2),
                    (&f2 * &(&s2 * &s2)).scale(r2 * r2),
                ];
                Ok(MetricJet::diagonal(diag))
            }
            Kind::Twisted {
                alpha,
                beta,
                epsilon,
                delta,
            } => {
                // f² = exp(2αt + 2βt sin x¹)
                let exponent = &x[0].scale(2.0 * alpha) + &(&x[0] * &x[1].sin()).scale(2.0 * beta);
                let f2 = exponent.exp();
                let mut diag = vec![minus_one];
                for mu in 1..n {
                    let neighbour = if mu + 1 < n { mu + 1 } else { 1 };
                    let fiber = &one + &x[neighbour].cos().scale(*epsilon);
                    diag.push(&f2 * &fiber);
                }
                let mut g = MetricJet::diagonal(diag);
                // g_01 = δ sin x²; with sin x¹ the covector u_a would stay
                // exact and the violation would be second order in δ.
                if *delta != 0.0 {
                    let off = x[2].sin().scale(*delta);
                    g.comps[1] = off.clone();
                    g.comps[n] = off;
                }
                Ok(g)
            }
            Kind::Diagonal { components, .. } => {
                let diag = components
                    .iter()
                    .map(|e| e.eval(&x))
                    .collect::<Result<Vec<_>>>()?;
                Ok(MetricJet::diagonal(diag))
            }
            Kind::Conformal { base, factor } => {
                let g = base.metric_jet(point)?;
                let w = factor.eval(&x)?;
                let comps = g.comps.iter().map(|c| &w * c).collect();
                MetricJet::from_components(n, comps)
            }
        }
    }

    /// The metric of the spatial fiber (without the scale factor), in the
    /// coordinates `x¹ … x^{n-1}`. Only the product-of-spheres and twisted
    /// families have one.
    pub fn fiber_metric_jet(&self, fiber_coords: &[f64]) -> Result<MetricJet> {
        let m = self.n - 1;
        if fiber_coords.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: fiber_coords.len(),
            });
        }
        let y: Vec<Jet3> = fiber_coords
            .iter()
            .enumerate()
            .map(|(i, &v)| Jet3::variable(m, i, v))
            .collect();
        let one = Jet3::constant(m, 1.0);
        match &self.kind {
            Kind::GrwProductSpheres { r1, r2, .. } => {
                let s1 = y[0].sin();
                let s2 = y[2].sin();
                Ok(MetricJet::diagonal(vec![
                    one.scale(r1 * r1),
                    (&s1 * &s1).scale(r1 * r1),
                    one.scale(r2 * r2),
                    (&s2 * &s2).scale(r2 * r2),
                ]))
            }
            Kind::Twisted { epsilon, .. } => Ok(MetricJet::diagonal(
                (0..m)
                    .map(|i| &one + &y[(i + 1) % m].cos().scale(*epsilon))
                    .collect(),
            )),
            _ => Err(Error::InvalidParameter(format!("{} has no fiber metric", self.name))),
        }
    }

    /// Contravariant components of the declared velocity, `u = ∂_t / sqrt(-g_00)`.
    pub fn velocity_up(&self, metric: &MetricJet) -> Result<Vec<Jet3>> {
        let n = metric.n();
        let minus_g00 = metric.get(0, 0).scale(-1.0);
        if minus_g00.value() <= 0.0 {
            return Err(Error::InvalidParameter("∂_t is not timelike at this point".into()));
        }
        let mut u = vec![Jet3::constant(n, 0.0); n];
        u[0] = minus_g00.powf(-0.5)?;
        Ok(u)
    }

    /// Coordinate box the sampler draws from.
    pub fn domain(&self) -> Vec<(f64, f64)> {
        let n = self.n;
        let time = (0.1, 2.0);
        match &self.kind {
            Kind::GrwProductSpheres { .. } => vec![
                time,
                (0.3, PI - 0.3),
                (0.0, 2.0 * PI),
                (0.3, PI - 0.3),
                (0.0, 2.0 * PI),
            ],
            Kind::Diagonal { domain, .. } => domain.clone(),
            Kind::Conformal { base, .. } => base.domain(),
            _ => {
                let mut d = vec![time];
                d.extend(std::iter::repeat_n((-PI, PI), n - 1));
                d
            }
        }
    }

    /// Deterministic pseudo-random points inside [`domain`](Self::domain).
    pub fn sample_points(&self, count: usize, seed: u64) -> Result<Vec<ChartPoint>> {
        if count == 0 {
            return Err(Error::EmptySample);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let domain = self.domain();
        Ok((0..count)
            .map(|_| {
                ChartPoint::new(domain.iter().map(|&(lo, hi)| rng.gen_range(lo..hi)).collect())
            })
            .collect())
    }

    /// Catalog invariants at one point.
    pub fn check_point(&self, point: &ChartPoint) -> Result<PointCheck> {
        let g = self.metric_jet(point)?;
        let n = self.n;
        let values = g.values();
        let m = DMatrix::from_row_slice(n, n, values.components());
        let eig = SymmetricEigen::new(m);
        let negative = eig.eigenvalues.iter().filter(|&&e| e < 0.0).count();
        let positive = eig.eigenvalues.iter().filter(|&&e| e > 0.0).count();
        let u = self.velocity_up(&g)?;
        let mut norm = 0.0;
        for a in 0..n {
            for b in 0..n {
                norm += values.at([a, b]) * u[a].value() * u[b].value();
            }
        }
        let block_form = if self.class.is_twisted_family() {
            let mut r = (values.at([0, 0]) + 1.0).abs();
            for mu in 1..n {
                r = r.max(values.at([0, mu]).abs());
            }
            Some(r)
        } else {
            None
        };
        Ok(PointCheck {
            lorentzian: negative == 1 && positive == n - 1,
            velocity_norm_residual: (norm + 1.0).abs(),
            block_form_residual: block_form,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointCheck {
    /// Signature (−,+,…,+).
    pub lorentzian: bool,
    /// `|u_a u^a + 1|`.
    pub velocity_norm_residual: f64,
    /// `max(|g_00 + 1|, |g_0μ|)` for twisted-family models.
    pub block_form_residual: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(pairs: &[(&str, ParamValue)]) -> Parameters {
        pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    #[test]
    fn minkowski_jets_are_constant() {
        let m = MetricModel::builtin("minkowski", Some(4), &Parameters::new()).unwrap();
        let g = m.metric_jet(&ChartPoint::new(vec![0.3, 1.0, -2.0, 0.5])).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let j = g.get(a, b);
                let want = if a != b { 0.0 } else if a == 0 { -1.0 } else { 1.0 };
                assert_eq!(j.value(), want);
                assert!(j.gradient().iter().chain(j.hessian()).chain(j.third()).all(|v| *v == 0.0));
            }
        }
    }

    #[test]
    fn rw_exp_profile_matches_closed_form() {
        let m = MetricModel::builtin("rw_flat", Some(4), &params(&[("H", ParamValue::Number(0.3))])).unwrap();
        for t in [0.2, 1.0, 1.7] {
            let g = m.metric_jet(&ChartPoint::new(vec![t, 0.1, 0.2, 0.3])).unwrap();
            let e = (0.6 * t).exp();
            for mu in 1..4 {
                let j = g.get(mu, mu);
                assert!((j.value() - e).abs() < 1e-14 * e);
                assert!((j.d1(0) - 0.6 * e).abs() < 1e-14 * e);
                assert!((j.d2(0, 0) - 0.36 * e).abs() < 1e-14 * e);
                assert!((j.d3(0, 0, 0) - 0.216 * e).abs() < 1e-14 * e);
            }
        }
    }

    #[test]
    fn unknown_and_invalid() {
        assert_eq!(
            MetricModel::builtin("kerr", None, &Parameters::new()),
            Err(Error::UnknownModel("kerr".into()))
        );
        assert!(MetricModel::builtin("grw_product_spheres", Some(6), &Parameters::new()).is_err());
        assert!(MetricModel::builtin("grw_product_spheres", None, &params(&[("r1", ParamValue::Number(-1.0))])).is_err());
        assert!(MetricModel::builtin("twisted_generic", Some(8), &Parameters::new()).is_err());
        assert!(MetricModel::builtin("twisted_generic", None, &params(&[("gamma", ParamValue::Number(1.0))])).is_err());
        assert!(MetricModel::builtin("rw_flat", None, &params(&[("profile", ParamValue::Text("cosh".into()))])).is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_nonempty() {
        let m = MetricModel::builtin("grw_product_spheres", None, &Parameters::new()).unwrap();
        let a = m.sample_points(20, 42).unwrap();
        let b = m.sample_points(20, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, m.sample_points(20, 43).unwrap());
        for p in &a {
            assert!((0.1..2.0).contains(&p.t()));
            assert!(p.coords[1] >= 0.3 && p.coords[1] <= PI - 0.3);
            assert!(p.coords[3] >= 0.3 && p.coords[3] <= PI - 0.3);
        }
        assert_eq!(m.sample_points(0, 1), Err(Error::EmptySample));
        assert_eq!(Error::EmptySample.to_string(), "empty sample");
    }

    #[test]
    fn sampled_points_satisfy_catalog_invariants() {
        let cases = [
            ("minkowski", Some(6)),
            ("rw_flat", None),
            ("grw_product_spheres", None),
            ("twisted_generic", Some(7)),
            ("twisted_n4", None),
            ("non_twisted_perturbed", Some(5)),
        ];
        for (name, n) in cases {
            let m = MetricModel::builtin(name, n, &Parameters::new()).unwrap();
            for p in m.sample_points(30, 7).unwrap() {
                let c = m.check_point(&p).unwrap();
                assert!(c.lorentzian, "{name} at {p:?}");
                assert!(c.velocity_norm_residual < 1e-12);
                if let Some(r) = c.block_form_residual {
                    assert_eq!(r, 0.0);
                }
            }
        }
    }

    #[test]
    fn diagonal_model_from_expressions() {
        let comps: Vec<String> = ["-1", "exp(0.6*t)", "exp(0.6*t)", "exp(0.6*t)"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let m = MetricModel::diagonal("custom_rw", &comps, ModelClass::Rw).unwrap();
        let rw = MetricModel::builtin("rw_flat", None, &Parameters::new()).unwrap();
        let p = ChartPoint::new(vec![0.7, 0.1, 0.2, 0.3]);
        let (a, b) = (m.metric_jet(&p).unwrap(), rw.metric_jet(&p).unwrap());
        for (x, y) in a.components().iter().zip(b.components()) {
            assert_eq!(x.order(), y.order());
            assert!(x.try_sub(y).unwrap().max_abs() < 1e-14);
        }
        let bad: Vec<String> = ["-1", "x5", "1", "1"].iter().map(|s| s.to_string()).collect();
        assert!(MetricModel::diagonal("bad", &bad, ModelClass::Rw).is_err());
    }

    #[test]
    fn negative_control_has_off_block_term() {
        let m = MetricModel::builtin("non_twisted_perturbed", Some(4), &Parameters::new()).unwrap();
        let p = ChartPoint::new(vec![1.0, 0.8, 0.1, 0.2]);
        let g = m.metric_jet(&p).unwrap();
        assert!((g.get(0, 1).value() - 0.1 * 0.1f64.sin()).abs() < 1e-15);
        assert_eq!(g.get(1, 0), g.get(0, 1));
    }
}
