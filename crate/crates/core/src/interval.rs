//! Closed real intervals and axis-aligned boxes.
//!
//! Arithmetic follows the textbook endpoint rules in round-to-nearest double
//! precision; no outward rounding is performed. Operations on valid intervals
//! never produce NaN endpoints, but they may overflow to infinity, so callers
//! that chain many operations check [`Interval::is_finite`] on the results.

use std::fmt;
use std::ops::Index;
use std::str::FromStr;

use serde::ser::{Serialize, SerializeTuple, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

/// Binary operations of the interval alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Mul,
}

/// Unary operations of the interval alphabet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UnaryOp {
    Recip,
    Pow(u32),
    Sqrt,
    Exp,
    Ln,
    AddConst(f64),
    Scale(f64),
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_finite() && hi.is_finite() && lo <= hi {
            Ok(Interval { lo, hi })
        } else {
            Err(Error::InvalidInterval { lo, hi })
        }
    }

    /// Degenerate interval `[x, x]`.
    ///
    /// # Panics
    /// If `x` is not finite.
    pub fn point(x: f64) -> Self {
        assert!(x.is_finite(), "point interval from non-finite value {x}");
        Interval { lo: x, hi: x }
    }

    /// Builds an interval without validation. Used for results of arithmetic
    /// on valid operands, which are ordered by construction.
    #[inline]
    pub(crate) fn raw(lo: f64, hi: f64) -> Self {
        debug_assert!(!(lo > hi), "raw interval with lo > hi: [{lo}, {hi}]");
        Interval { lo, hi }
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    /// `self ⊆ other`.
    pub fn subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn rad(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// `max{|lo|, |hi|}`.
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// `max{lo², hi²}`.
    pub fn mag_sq(&self) -> f64 {
        (self.lo * self.lo).max(self.hi * self.hi)
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval::raw(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    /// Widens by `abs + rel·|endpoint|` on each side.
    pub fn inflate(&self, abs: f64, rel: f64) -> Interval {
        Interval::raw(
            self.lo - abs - rel * self.lo.abs(),
            self.hi + abs + rel * self.hi.abs(),
        )
    }

    pub fn add(&self, other: &Interval) -> Interval {
        Interval::raw(self.lo + other.lo, self.hi + other.hi)
    }

    pub fn neg(&self) -> Interval {
        Interval::raw(-self.hi, -self.lo)
    }

    pub fn sub(&self, other: &Interval) -> Interval {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Interval) -> Interval {
        let p = [
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        ];
        let (mut lo, mut hi) = (p[0], p[0]);
        for &v in &p[1..] {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        Interval::raw(lo, hi)
    }

    pub fn add_const(&self, c: f64) -> Interval {
        Interval::raw(self.lo + c, self.hi + c)
    }

    pub fn scale(&self, c: f64) -> Interval {
        if c >= 0.0 {
            Interval::raw(c * self.lo, c * self.hi)
        } else {
            Interval::raw(c * self.hi, c * self.lo)
        }
    }

    pub fn recip(&self) -> Result<Interval> {
        if self.contains_zero() {
            return Err(self.domain("recip"));
        }
        Ok(Interval::raw(1.0 / self.hi, 1.0 / self.lo))
    }

    /// Natural power. `m = 0` yields `[1, 1]` even when the interval holds zero.
    pub fn powi(&self, m: u32) -> Interval {
        match m {
            0 => Interval::ONE,
            1 => *self,
            _ => {
                let e = m as i32;
                let (a, b) = (self.lo.powi(e), self.hi.powi(e));
                if self.lo > 0.0 || m % 2 == 1 {
                    Interval::raw(a, b)
                } else if self.hi < 0.0 {
                    Interval::raw(b, a)
                } else {
                    Interval::raw(0.0, a.max(b))
                }
            }
        }
    }

    pub fn sqr(&self) -> Interval {
        self.powi(2)
    }

    pub fn sqrt(&self) -> Result<Interval> {
        if self.lo < 0.0 {
            return Err(self.domain("sqrt"));
        }
        Ok(Interval::raw(self.lo.sqrt(), self.hi.sqrt()))
    }

    pub fn exp(&self) -> Interval {
        Interval::raw(self.lo.exp(), self.hi.exp())
    }

    pub fn ln(&self) -> Result<Interval> {
        if self.lo <= 0.0 {
            return Err(self.domain("ln"));
        }
        Ok(Interval::raw(self.lo.ln(), self.hi.ln()))
    }

    pub fn binary(op: BinaryOp, a: &Interval, b: &Interval) -> Interval {
        match op {
            BinaryOp::Add => a.add(b),
            BinaryOp::Mul => a.mul(b),
        }
    }

    pub fn unary(&self, op: UnaryOp) -> Result<Interval> {
        Ok(match op {
            UnaryOp::Recip => self.recip()?,
            UnaryOp::Pow(m) => self.powi(m),
            UnaryOp::Sqrt => self.sqrt()?,
            UnaryOp::Exp => self.exp(),
            UnaryOp::Ln => self.ln()?,
            UnaryOp::AddConst(c) => self.add_const(c),
            UnaryOp::Scale(c) => self.scale(c),
        })
    }

    fn domain(&self, op: &'static str) -> Error {
        Error::DomainViolation {
            op,
            interval: *self,
            line: None,
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut t = s.serialize_tuple(2)?;
        t.serialize_element(&self.lo)?;
        t.serialize_element(&self.hi)?;
        t.end()
    }
}

/// Axis-aligned hyperrectangle `[x_1] × … × [x_n]`, `n ≥ 1`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(transparent)]
pub struct IntervalBox {
    dims: Vec<Interval>,
}

impl IntervalBox {
    pub fn new(dims: Vec<Interval>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::BadBox("a box needs at least one dimension".into()));
        }
        Ok(IntervalBox { dims })
    }

    /// Box from `(lo, hi)` pairs.
    pub fn from_bounds(bounds: &[(f64, f64)]) -> Result<Self> {
        let dims = bounds
            .iter()
            .map(|&(lo, hi)| Interval::new(lo, hi))
            .collect::<Result<Vec<_>>>()?;
        IntervalBox::new(dims)
    }

    /// Degenerate box at a point.
    pub fn point(x: &[f64]) -> Result<Self> {
        let dims = x
            .iter()
            .map(|&v| Interval::new(v, v))
            .collect::<Result<Vec<_>>>()?;
        IntervalBox::new(dims)
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn dims(&self) -> &[Interval] {
        &self.dims
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Interval> {
        self.dims.iter()
    }

    pub fn into_vec(self) -> Vec<Interval> {
        self.dims
    }

    pub fn contains_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: x.len(),
            });
        }
        match self.dims.iter().zip(x).position(|(d, &v)| !d.contains(v)) {
            Some(i) => Err(Error::PointOutsideBox(i)),
            None => Ok(()),
        }
    }

    pub fn subset_of(&self, other: &IntervalBox) -> bool {
        self.len() == other.len() && self.dims.iter().zip(&other.dims).all(|(a, b)| a.subset_of(b))
    }

    /// All `2^n` vertices; vertex `v` takes the upper endpoint in dimension `i`
    /// iff bit `i` of `v` is set.
    pub fn vertices(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        let n = self.len();
        (0u64..(1u64 << n)).map(move |mask| {
            self.dims
                .iter()
                .enumerate()
                .map(|(i, d)| if mask >> i & 1 == 1 { d.hi() } else { d.lo() })
                .collect()
        })
    }
}

impl Index<usize> for IntervalBox {
    type Output = Interval;
    fn index(&self, i: usize) -> &Interval {
        &self.dims[i]
    }
}

impl fmt::Display for IntervalBox {
    /// `l1,u1;l2,u2;…` with shortest round-trip decimals.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.dims.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{},{}", d.lo(), d.hi())?;
        }
        Ok(())
    }
}

impl FromStr for IntervalBox {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: String| Error::BadBox(msg);
        let mut dims = Vec::new();
        for (i, part) in s.trim().split(';').enumerate() {
            let mut it = part.split(',');
            let (Some(lo), Some(hi), None) = (it.next(), it.next(), it.next()) else {
                return Err(bad(format!("component {} must be `lo,hi`, got `{part}`", i + 1)));
            };
            let parse = |t: &str| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| bad(format!("component {}: `{}` is not a number", i + 1, t.trim())))
            };
            let (lo, hi) = (parse(lo)?, parse(hi)?);
            dims.push(Interval::new(lo, hi).map_err(|_| {
                bad(format!("component {}: [{lo}, {hi}] is not a valid interval", i + 1))
            })?);
        }
        IntervalBox::new(dims)
    }
}

/// Parses a comma-separated point `x1,…,xn`.
pub fn parse_point(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::BadBox(format!("`{}` is not a finite number", t.trim())))
        })
        .collect()
}
