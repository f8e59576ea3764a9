//! Dense component tensors with explicit per-slot variance.
//!
//! Components are stored row-major: the last slot varies fastest. Every
//! metric contraction is explicit; [`TensorValue::contract`] only pairs an
//! upper slot with a lower one.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_RANK: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variance {
    Up,
    Down,
}

impl Variance {
    pub fn flipped(self) -> Variance {
        match self {
            Variance::Up => Variance::Down,
            Variance::Down => Variance::Up,
        }
    }
}

/// Target variance for [`TensorValue::raise_lower`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Up,
    Down,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTensor")]
pub struct TensorValue {
    n: usize,
    variance: Vec<Variance>,
    components: Vec<f64>,
}

#[derive(Deserialize)]
struct RawTensor {
    n: usize,
    variance: Vec<Variance>,
    components: Vec<f64>,
}

impl TryFrom<RawTensor> for TensorValue {
    type Error = Error;
    fn try_from(raw: RawTensor) -> Result<Self> {
        TensorValue::new(raw.n, raw.variance, raw.components)
    }
}

/// Max-abs residuals of the algebraic symmetries of a curvature tensor.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSymmetry {
    /// `T_iklm + T_kilm`
    pub first_pair: f64,
    /// `T_iklm + T_ikml`
    pub second_pair: f64,
    /// `T_iklm - T_lmik`
    pub pair_exchange: f64,
    /// `T_iklm + T_klim + T_likm`
    pub bianchi: f64,
}

impl CurvatureSymmetry {
    pub fn max(&self) -> f64 {
        self.first_pair
            .max(self.second_pair)
            .max(self.pair_exchange)
            .max(self.bianchi)
    }
}

fn pow(n: usize, r: usize) -> usize {
    n.pow(r as u32)
}

impl TensorValue {
    pub fn new(n: usize, variance: Vec<Variance>, components: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::ShapeMismatch("dimension must be positive".into()));
        }
        if variance.len() > MAX_RANK {
            return Err(Error::RankTooLarge(variance.len()));
        }
        let expected = pow(n, variance.len());
        if components.len() != expected {
            return Err(Error::ShapeMismatch(format!(
                "{} components for n = {n}, rank {} (expected {expected})",
                components.len(),
                variance.len()
            )));
        }
        Ok(Self {
            n,
            variance,
            components,
        })
    }

    pub fn zeros(n: usize, variance: &[Variance]) -> Self {
        assert!(variance.len() <= MAX_RANK);
        Self {
            n,
            variance: variance.to_vec(),
            components: vec![0.0; pow(n, variance.len())],
        }
    }

    pub fn scalar(n: usize, value: f64) -> Self {
        Self {
            n,
            variance: Vec::new(),
            components: vec![value],
        }
    }

    /// Builds a tensor by evaluating `f` on every multi-index, in storage order.
    pub fn from_fn(n: usize, variance: &[Variance], mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let mut t = Self::zeros(n, variance);
        let rank = variance.len();
        let mut idx = vec![0usize; rank];
        for slot in t.components.iter_mut() {
            *slot = f(&idx);
            for s in (0..rank).rev() {
                idx[s] += 1;
                if idx[s] < n {
                    break;
                }
                idx[s] = 0;
            }
        }
        t
    }

    /// Kronecker delta δ^a_b.
    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, &[Variance::Up, Variance::Down], |i| {
            if i[0] == i[1] {
                1.0
            } else {
                0.0
            }
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn variance(&self) -> &[Variance] {
        &self.variance
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn components_mut(&mut self) -> &mut [f64] {
        &mut self.components
    }

    pub fn into_components(self) -> Vec<f64> {
        self.components
    }

    fn strides(&self) -> Vec<usize> {
        let r = self.rank();
        (0..r).map(|s| pow(self.n, r - 1 - s)).collect()
    }

    #[inline]
    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank());
        idx.iter().fold(0, |acc, &i| {
            debug_assert!(i < self.n);
            acc * self.n + i
        })
    }

    #[inline]
    pub fn get(&self, idx: &[usize]) -> f64 {
        self.components[self.offset(idx)]
    }

    #[inline]
    pub fn at<const R: usize>(&self, idx: [usize; R]) -> f64 {
        self.components[self.offset(&idx)]
    }

    #[inline]
    pub fn set(&mut self, idx: &[usize], value: f64) {
        let o = self.offset(idx);
        self.components[o] = value;
    }

    /// The scalar held by a rank-0 tensor.
    pub fn as_scalar(&self) -> Option<f64> {
        (self.rank() == 0).then(|| self.components[0])
    }

    fn check_slot(&self, slot: usize) -> Result<()> {
        if slot >= self.rank() {
            return Err(Error::SlotOutOfRange {
                slot,
                rank: self.rank(),
            });
        }
        Ok(())
    }

    fn check_same_shape(&self, other: &TensorValue) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        if self.variance != other.variance {
            return Err(Error::ShapeMismatch("variance patterns differ".into()));
        }
        Ok(())
    }

    /// Traces an upper slot against a lower slot.
    pub fn contract(&self, slot_a: usize, slot_b: usize) -> Result<TensorValue> {
        self.check_slot(slot_a)?;
        self.check_slot(slot_b)?;
        if slot_a == slot_b {
            return Err(Error::ShapeMismatch(format!(
                "cannot contract slot {slot_a} with itself"
            )));
        }
        if self.variance[slot_a] == self.variance[slot_b] {
            return Err(Error::VarianceMismatch(slot_a, slot_b));
        }
        let n = self.n;
        let strides = self.strides();
        let kept: Vec<usize> = (0..self.rank())
            .filter(|&s| s != slot_a && s != slot_b)
            .collect();
        let out_var: Vec<Variance> = kept.iter().map(|&s| self.variance[s]).collect();
        let diag = strides[slot_a] + strides[slot_b];
        let out = TensorValue::from_fn(n, &out_var, |idx| {
            let base: usize = idx.iter().zip(&kept).map(|(&i, &s)| i * strides[s]).sum();
            (0..n).map(|k| self.components[base + k * diag]).sum()
        });
        Ok(out)
    }

    /// Raises or lowers one slot with the metric.
    ///
    /// Lowering takes `g_ab`; raising takes `g^ab`. If the opposite form is
    /// supplied it is inverted first.
    pub fn raise_lower(&self, slot: usize, metric: &TensorValue, direction: Direction) -> Result<TensorValue> {
        self.check_slot(slot)?;
        if metric.rank() != 2 || metric.n != self.n {
            return Err(Error::ShapeMismatch("metric must be an n×n rank-2 tensor".into()));
        }
        let wanted = match direction {
            Direction::Up => Variance::Up,
            Direction::Down => Variance::Down,
        };
        if self.variance[slot] == wanted {
            return Err(Error::ShapeMismatch(format!(
                "slot {slot} already has variance {wanted:?}"
            )));
        }
        let inverted;
        let m = if metric.variance == [wanted, wanted] {
            metric
        } else if metric.variance == [wanted.flipped(), wanted.flipped()] {
            inverted = invert_metric(metric)?;
            &inverted
        } else {
            return Err(Error::ShapeMismatch("metric must have uniform variance".into()));
        };
        let n = self.n;
        let strides = self.strides();
        let st = strides[slot];
        let mut variance = self.variance.clone();
        variance[slot] = wanted;
        let out = TensorValue::from_fn(n, &variance, |idx| {
            let a = idx[slot];
            let base = self.offset(idx) - a * st;
            (0..n)
                .map(|b| m.components[a * n + b] * self.components[base + b * st])
                .sum()
        });
        Ok(out)
    }

    /// Raises every lower slot (`g_inv` is `g^ab`).
    pub fn raise_all(&self, g_inv: &TensorValue) -> Result<TensorValue> {
        let mut t = self.clone();
        for s in 0..self.rank() {
            if t.variance[s] == Variance::Down {
                t = t.raise_lower(s, g_inv, Direction::Up)?;
            }
        }
        Ok(t)
    }

    /// Reorders slots: slot `s` of the result is slot `perm[s]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> Result<TensorValue> {
        let r = self.rank();
        let mut seen = vec![false; r];
        if perm.len() != r || perm.iter().any(|&p| p >= r || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::ShapeMismatch(format!("invalid permutation {perm:?}")));
        }
        let variance: Vec<Variance> = perm.iter().map(|&p| self.variance[p]).collect();
        let strides = self.strides();
        Ok(TensorValue::from_fn(self.n, &variance, |idx| {
            let o: usize = idx.iter().zip(perm).map(|(&i, &p)| i * strides[p]).sum();
            self.components[o]
        }))
    }

    /// Tensor product; slots of `self` come first.
    pub fn outer(&self, other: &TensorValue) -> Result<TensorValue> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        let rank = self.rank() + other.rank();
        if rank > MAX_RANK {
            return Err(Error::RankTooLarge(rank));
        }
        let mut variance = self.variance.clone();
        variance.extend_from_slice(&other.variance);
        let components = self
            .components
            .iter()
            .flat_map(|a| other.components.iter().map(move |b| a * b))
            .collect();
        TensorValue::new(self.n, variance, components)
    }

    /// The sub-tensor with the first slot fixed to `index`.
    pub fn slice_first(&self, index: usize) -> Result<TensorValue> {
        self.check_slot(0)?;
        let len = pow(self.n, self.rank() - 1);
        TensorValue::new(
            self.n,
            self.variance[1..].to_vec(),
            self.components[index * len..(index + 1) * len].to_vec(),
        )
    }

    pub fn add(&self, other: &TensorValue) -> Result<TensorValue> {
        self.check_same_shape(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &TensorValue) -> Result<TensorValue> {
        self.check_same_shape(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    fn zip_with(&self, other: &TensorValue, f: impl Fn(f64, f64) -> f64) -> TensorValue {
        TensorValue {
            n: self.n,
            variance: self.variance.clone(),
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, s: f64) -> TensorValue {
        TensorValue {
            n: self.n,
            variance: self.variance.clone(),
            components: self.components.iter().map(|v| v * s).collect(),
        }
    }

    /// `½(T + T with slots a,b swapped)`.
    pub fn symmetrize(&self, a: usize, b: usize) -> Result<TensorValue> {
        self.swap_combine(a, b, 1.0)
    }

    /// `½(T − T with slots a,b swapped)`.
    pub fn antisymmetrize(&self, a: usize, b: usize) -> Result<TensorValue> {
        self.swap_combine(a, b, -1.0)
    }

    fn swap_combine(&self, a: usize, b: usize, sign: f64) -> Result<TensorValue> {
        self.check_slot(a)?;
        self.check_slot(b)?;
        if self.variance[a] != self.variance[b] {
            return Err(Error::VarianceMismatch(a, b));
        }
        let mut perm: Vec<usize> = (0..self.rank()).collect();
        perm.swap(a, b);
        let swapped = self.permute(&perm)?;
        Ok(self.zip_with(&swapped, |x, y| 0.5 * (x + sign * y)))
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &TensorValue) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .components
            .iter()
            .zip(&other.components)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(|v| v.is_finite())
    }

    fn require_covariant(&self, rank: usize, what: &str) -> Result<()> {
        if self.rank() != rank || self.variance.iter().any(|&v| v != Variance::Down) {
            return Err(Error::ShapeMismatch(format!(
                "{what} needs a covariant rank-{rank} tensor"
            )));
        }
        Ok(())
    }
}

/// `g^ab` from `g_ab` (or the reverse).
pub fn invert_metric(g: &TensorValue) -> Result<TensorValue> {
    if g.rank() != 2 || g.variance[0] != g.variance[1] {
        return Err(Error::ShapeMismatch("metric must be rank 2 with uniform variance".into()));
    }
    let n = g.n;
    let m = DMatrix::from_row_slice(n, n, &g.components);
    let scale = g.max_abs().max(f64::MIN_POSITIVE);
    let det = m.determinant();
    if !det.is_finite() || det.abs() <= 1e-13 * scale.powi(n as i32) {
        return Err(Error::SingularMetric);
    }
    let inv = m.try_inverse().ok_or(Error::SingularMetric)?;
    let mut components = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            components.push(inv[(a, b)]);
        }
    }
    let v = g.variance[0].flipped();
    TensorValue::new(n, vec![v, v], components)
}

/// `(A ∧ B)_iklm = A_im B_kl − A_km B_il − A_il B_km + A_kl B_im`.
pub fn kulkarni_nomizu(a: &TensorValue, b: &TensorValue) -> Result<TensorValue> {
    a.require_covariant(2, "Kulkarni–Nomizu product")?;
    b.require_covariant(2, "Kulkarni–Nomizu product")?;
    if a.n != b.n {
        return Err(Error::DimensionMismatch {
            expected: a.n,
            found: b.n,
        });
    }
    for f in [a, b] {
        let mut perm = f.clone();
        perm = perm.permute(&[1, 0])?;
        let asym = f.max_abs_diff(&perm)?;
        if asym > 1e-10 * f.max_abs().max(1.0) {
            return Err(Error::AsymmetricFactor(asym));
        }
    }
    Ok(kulkarni_nomizu_unchecked(a, b))
}

/// Kulkarni–Nomizu product without shape or symmetry validation.
pub(crate) fn kulkarni_nomizu_unchecked(a: &TensorValue, b: &TensorValue) -> TensorValue {
    TensorValue::from_fn(a.n, &[Variance::Down; 4], |ix| {
        let (i, k, l, m) = (ix[0], ix[1], ix[2], ix[3]);
        a.at([i, m]) * b.at([k, l]) - a.at([k, m]) * b.at([i, l]) - a.at([i, l]) * b.at([k, m])
            + a.at([k, l]) * b.at([i, m])
    })
}

/// Residuals of the algebraic symmetries of a rank-4 covariant tensor.
pub fn generalized_curvature_check(t: &TensorValue) -> Result<CurvatureSymmetry> {
    t.require_covariant(4, "generalized curvature check")?;
    let n = t.n;
    let mut r = CurvatureSymmetry::default();
    for i in 0..n {
        for k in 0..n {
            for l in 0..n {
                for m in 0..n {
                    let v = t.at([i, k, l, m]);
                    r.first_pair = r.first_pair.max((v + t.at([k, i, l, m])).abs());
                    r.second_pair = r.second_pair.max((v + t.at([i, k, m, l])).abs());
                    r.pair_exchange = r.pair_exchange.max((v - t.at([l, m, i, k])).abs());
                    r.bianchi = r
                        .bianchi
                        .max((v + t.at([k, l, i, m]) + t.at([l, i, k, m])).abs());
                }
            }
        }
    }
    Ok(r)
}

/// Full self-contraction `T_{a…}T^{a…}`, every slot moved with the metric.
///
/// `g` may be given in either variance; both forms are formed internally.
pub fn norm_squared(t: &TensorValue, g: &TensorValue) -> Result<f64> {
    if g.rank() != 2 || g.n != t.n {
        return Err(Error::ShapeMismatch("metric must be an n×n rank-2 tensor".into()));
    }
    let other = invert_metric(g)?;
    let (g_down, g_up) = match g.variance[0] {
        Variance::Down => (g, &other),
        Variance::Up => (&other, g),
    };
    let mut moved = t.clone();
    for s in 0..t.rank() {
        moved = match moved.variance[s] {
            Variance::Down => moved.raise_lower(s, g_up, Direction::Up)?,
            Variance::Up => moved.raise_lower(s, g_down, Direction::Down)?,
        };
    }
    Ok(t.components
        .iter()
        .zip(&moved.components)
        .map(|(a, b)| a * b)
        .sum())
}
