//! Third-order forward-mode jets.
//!
//! A [`Jet3`] carries the truncated Taylor data of a scalar function of `n`
//! chart variables at one point: the value, the gradient, the Hessian and the
//! totally symmetric third-derivative array. Arithmetic propagates all of it
//! exactly (up to floating-point rounding) through the Leibniz and Faà di Bruno
//! rules.
//!
//! Jets also carry a truncation order (0..=3). Taking a partial derivative of
//! an order-`k` jet yields an order-`k-1` jet, and binary operations produce the
//! minimum order of their operands. This is what lets the curvature pipeline
//! differentiate the metric three times without any numerical differencing.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

pub const MAX_ORDER: usize = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct Jet3 {
    n: usize,
    order: usize,
    data: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JetOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Elementary {
    Exp,
    Log,
    Sin,
    Cos,
    /// Real power with a constant exponent.
    Pow(f64),
}

fn storage_len(n: usize, order: usize) -> usize {
    let mut len = 1;
    if order >= 1 {
        len += n;
    }
    if order >= 2 {
        len += n * n;
    }
    if order >= 3 {
        len += n * n * n;
    }
    len
}

impl Jet3 {
    fn zeros(n: usize, order: usize) -> Self {
        Self {
            n,
            order,
            data: vec![0.0; storage_len(n, order)],
        }
    }

    /// A constant function of `n` variables, carried at full order.
    pub fn constant(n: usize, value: f64) -> Self {
        let mut j = Self::zeros(n, MAX_ORDER);
        j.data[0] = value;
        j
    }

    /// The coordinate function `x^index` evaluated at `value`.
    pub fn variable(n: usize, index: usize, value: f64) -> Self {
        assert!(index < n, "variable index {index} out of range for n = {n}");
        let mut j = Self::constant(n, value);
        j.data[1 + index] = 1.0;
        j
    }

    /// Builds a full-order jet from explicit derivative arrays.
    ///
    /// `d2` (length n²) and `d3` (length n³) are symmetrized on write.
    pub fn from_parts(n: usize, value: f64, d1: &[f64], d2: &[f64], d3: &[f64]) -> Result<Self> {
        if d1.len() != n || d2.len() != n * n || d3.len() != n * n * n {
            return Err(Error::ShapeMismatch(format!(
                "jet parts for n = {n}: got {}, {}, {}",
                d1.len(),
                d2.len(),
                d3.len()
            )));
        }
        let mut j = Self::constant(n, value);
        j.data[1..1 + n].copy_from_slice(d1);
        for a in 0..n {
            for b in a..n {
                let v = 0.5 * (d2[a * n + b] + d2[b * n + a]);
                j.set2(a, b, v);
            }
        }
        for a in 0..n {
            for b in a..n {
                for c in b..n {
                    let perms = [
                        (a, b, c),
                        (a, c, b),
                        (b, a, c),
                        (b, c, a),
                        (c, a, b),
                        (c, b, a),
                    ];
                    let v = perms
                        .iter()
                        .map(|&(x, y, z)| d3[(x * n + y) * n + z])
                        .sum::<f64>()
                        / 6.0;
                    j.set3(a, b, c, v);
                }
            }
        }
        Ok(j)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Highest derivative order carried by this jet.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.data[0]
    }

    #[inline]
    fn o2(&self) -> usize {
        1 + self.n
    }

    #[inline]
    fn o3(&self) -> usize {
        1 + self.n + self.n * self.n
    }

    #[inline]
    pub fn d1(&self, i: usize) -> f64 {
        assert!(self.order >= 1, "first derivatives not carried at order {}", self.order);
        self.data[1 + i]
    }

    #[inline]
    pub fn d2(&self, i: usize, j: usize) -> f64 {
        assert!(self.order >= 2, "second derivatives not carried at order {}", self.order);
        self.data[self.o2() + i * self.n + j]
    }

    #[inline]
    pub fn d3(&self, i: usize, j: usize, k: usize) -> f64 {
        assert!(self.order >= 3, "third derivatives not carried at order {}", self.order);
        self.data[self.o3() + (i * self.n + j) * self.n + k]
    }

    pub fn gradient(&self) -> &[f64] {
        assert!(self.order >= 1);
        &self.data[1..1 + self.n]
    }

    /// Row-major n×n Hessian.
    pub fn hessian(&self) -> &[f64] {
        assert!(self.order >= 2);
        &self.data[self.o2()..self.o3()]
    }

    /// Row-major n×n×n third-derivative array.
    pub fn third(&self) -> &[f64] {
        assert!(self.order >= 3);
        &self.data[self.o3()..]
    }

    #[inline]
    fn set2(&mut self, i: usize, j: usize, v: f64) {
        let (n, o) = (self.n, self.o2());
        self.data[o + i * n + j] = v;
        self.data[o + j * n + i] = v;
    }

    #[inline]
    fn set3(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let (n, o) = (self.n, self.o3());
        for (a, b, c) in [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)] {
            self.data[o + (a * n + b) * n + c] = v;
        }
    }

    /// Drops derivative data above `order`.
    pub fn truncate(&self, order: usize) -> Jet3 {
        let order = order.min(self.order);
        Jet3 {
            n: self.n,
            order,
            data: self.data[..storage_len(self.n, order)].to_vec(),
        }
    }

    /// The partial derivative `∂_i` as a jet of one lower order.
    pub fn partial(&self, i: usize) -> Result<Jet3> {
        if self.order == 0 {
            return Err(Error::MissingDerivative("partial of an order-0 jet"));
        }
        let n = self.n;
        let mut out = Jet3::zeros(n, self.order - 1);
        out.data[0] = self.d1(i);
        if out.order >= 1 {
            for j in 0..n {
                out.data[1 + j] = self.d2(i, j);
            }
        }
        if out.order >= 2 {
            let o = out.o2();
            for j in 0..n {
                for k in 0..n {
                    out.data[o + j * n + k] = self.d3(i, j, k);
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, s: f64) -> Jet3 {
        Jet3 {
            n: self.n,
            order: self.order,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    fn check_n(&self, other: &Jet3) -> Result<()> {
        if self.n != other.n {
            return Err(Error::JetDimensionMismatch(self.n, other.n));
        }
        Ok(())
    }

    fn zip_linear(&self, other: &Jet3, sign: f64) -> Jet3 {
        let order = self.order.min(other.order);
        let len = storage_len(self.n, order);
        Jet3 {
            n: self.n,
            order,
            data: self.data[..len]
                .iter()
                .zip(&other.data[..len])
                .map(|(a, b)| a + sign * b)
                .collect(),
        }
    }

    pub fn try_add(&self, other: &Jet3) -> Result<Jet3> {
        self.check_n(other)?;
        Ok(self.zip_linear(other, 1.0))
    }

    pub fn try_sub(&self, other: &Jet3) -> Result<Jet3> {
        self.check_n(other)?;
        Ok(self.zip_linear(other, -1.0))
    }

    pub fn try_mul(&self, other: &Jet3) -> Result<Jet3> {
        self.check_n(other)?;
        let n = self.n;
        let order = self.order.min(other.order);
        let (a, b) = (self, other);
        let mut out = Jet3::zeros(n, order);
        let (a0, b0) = (a.value(), b.value());
        out.data[0] = a0 * b0;
        if order >= 1 {
            for i in 0..n {
                out.data[1 + i] = a.d1(i) * b0 + a0 * b.d1(i);
            }
        }
        if order >= 2 {
            for i in 0..n {
                for j in i..n {
                    let v = a.d2(i, j) * b0
                        + a.d1(i) * b.d1(j)
                        + a.d1(j) * b.d1(i)
                        + a0 * b.d2(i, j);
                    out.set2(i, j, v);
                }
            }
        }
        if order >= 3 {
            for i in 0..n {
                for j in i..n {
                    for k in j..n {
                        let v = a.d3(i, j, k) * b0
                            + a.d2(i, j) * b.d1(k)
                            + a.d2(i, k) * b.d1(j)
                            + a.d2(j, k) * b.d1(i)
                            + a.d1(i) * b.d2(j, k)
                            + a.d1(j) * b.d2(i, k)
                            + a.d1(k) * b.d2(i, j)
                            + a0 * b.d3(i, j, k);
                        out.set3(i, j, k, v);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn try_div(&self, other: &Jet3) -> Result<Jet3> {
        self.check_n(other)?;
        self.try_mul(&other.recip()?)
    }

    /// Applies a univariate function given its value and first three
    /// derivatives at `self.value()`.
    fn compose(&self, f: [f64; 4]) -> Jet3 {
        let n = self.n;
        let mut out = Jet3::zeros(n, self.order);
        out.data[0] = f[0];
        if self.order >= 1 {
            for i in 0..n {
                out.data[1 + i] = f[1] * self.d1(i);
            }
        }
        if self.order >= 2 {
            for i in 0..n {
                for j in i..n {
                    let v = f[2] * self.d1(i) * self.d1(j) + f[1] * self.d2(i, j);
                    out.set2(i, j, v);
                }
            }
        }
        if self.order >= 3 {
            for i in 0..n {
                for j in i..n {
                    for k in j..n {
                        let v = f[3] * self.d1(i) * self.d1(j) * self.d1(k)
                            + f[2]
                                * (self.d2(i, j) * self.d1(k)
                                    + self.d2(i, k) * self.d1(j)
                                    + self.d2(j, k) * self.d1(i))
                            + f[1] * self.d3(i, j, k);
                        out.set3(i, j, k, v);
                    }
                }
            }
        }
        out
    }

    pub fn recip(&self) -> Result<Jet3> {
        let x = self.value();
        if x == 0.0 || !x.is_finite() {
            return Err(Error::JetDivisionSingularity);
        }
        let r = 1.0 / x;
        Ok(self.compose([r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r]))
    }

    pub fn exp(&self) -> Jet3 {
        let e = self.value().exp();
        self.compose([e, e, e, e])
    }

    pub fn ln(&self) -> Result<Jet3> {
        let x = self.value();
        if x <= 0.0 || !x.is_finite() {
            return Err(Error::Domain { func: "log", arg: x });
        }
        let r = 1.0 / x;
        Ok(self.compose([x.ln(), r, -r * r, 2.0 * r * r * r]))
    }

    pub fn sin(&self) -> Jet3 {
        let (s, c) = self.value().sin_cos();
        self.compose([s, c, -s, -c])
    }

    pub fn cos(&self) -> Jet3 {
        let (s, c) = self.value().sin_cos();
        self.compose([c, -s, -c, s])
    }

    /// `self^p` for a constant real exponent.
    ///
    /// Non-integer exponents need a positive base; integer exponents accept any
    /// nonzero base, and non-negative integer exponents also accept zero.
    pub fn powf(&self, p: f64) -> Result<Jet3> {
        let x = self.value();
        let integer = p.fract() == 0.0;
        let ok = if integer {
            x != 0.0 || p >= 0.0
        } else {
            x > 0.0
        };
        if !ok || !x.is_finite() {
            return Err(Error::Domain { func: "pow", arg: x });
        }
        let d = |k: i32| -> f64 {
            let e = p - k as f64;
            if integer && e < 0.0 && p >= 0.0 {
                // falling factorial already vanished
                0.0
            } else {
                x.powf(e)
            }
        };
        let f0 = x.powf(p);
        let f1 = p * d(1);
        let f2 = p * (p - 1.0) * d(2);
        let f3 = p * (p - 1.0) * (p - 2.0) * d(3);
        Ok(self.compose([f0, f1, f2, f3]))
    }

    pub fn sqrt(&self) -> Result<Jet3> {
        if self.value() <= 0.0 {
            return Err(Error::Domain { func: "sqrt", arg: self.value() });
        }
        self.powf(0.5)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Largest absolute entry over value and all carried derivatives.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Binary jet arithmetic.
pub fn jet_arithmetic(a: &Jet3, b: &Jet3, op: JetOp) -> Result<Jet3> {
    match op {
        JetOp::Add => a.try_add(b),
        JetOp::Sub => a.try_sub(b),
        JetOp::Mul => a.try_mul(b),
        JetOp::Div => a.try_div(b),
    }
}

/// Elementary functions lifted to jets.
pub fn jet_elementary(a: &Jet3, f: Elementary) -> Result<Jet3> {
    match f {
        Elementary::Exp => Ok(a.exp()),
        Elementary::Log => a.ln(),
        Elementary::Sin => Ok(a.sin()),
        Elementary::Cos => Ok(a.cos()),
        Elementary::Pow(p) => a.powf(p),
    }
}

// Operator forms panic on mismatched variable counts; the `try_*` methods
// report it instead.

impl Add for &Jet3 {
    type Output = Jet3;
    fn add(self, rhs: &Jet3) -> Jet3 {
        self.try_add(rhs).expect("jet add")
    }
}

impl Sub for &Jet3 {
    type Output = Jet3;
    fn sub(self, rhs: &Jet3) -> Jet3 {
        self.try_sub(rhs).expect("jet sub")
    }
}

impl Mul for &Jet3 {
    type Output = Jet3;
    fn mul(self, rhs: &Jet3) -> Jet3 {
        self.try_mul(rhs).expect("jet mul")
    }
}

impl Mul<f64> for &Jet3 {
    type Output = Jet3;
    fn mul(self, rhs: f64) -> Jet3 {
        self.scale(rhs)
    }
}

impl Neg for &Jet3 {
    type Output = Jet3;
    fn neg(self) -> Jet3 {
        self.scale(-1.0)
    }
}

impl Add for Jet3 {
    type Output = Jet3;
    fn add(self, rhs: Jet3) -> Jet3 {
        &self + &rhs
    }
}

impl Sub for Jet3 {
    type Output = Jet3;
    fn sub(self, rhs: Jet3) -> Jet3 {
        &self - &rhs
    }
}

impl Mul for Jet3 {
    type Output = Jet3;
    fn mul(self, rhs: Jet3) -> Jet3 {
        &self * &rhs
    }
}
