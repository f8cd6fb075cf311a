//! Interval operators that enclose spectra of the rank-one and rank-two terms
//! produced by the chain and product rules, plus the 2×2 interval-matrix
//! enclosure and the hull / zero-widening helpers used by the sparse rules.

use crate::error::{Error, Result};
use crate::interval::Interval;

/// Encloses the spectrum of `a aᵀ` for every `a` in the box `a`.
///
/// A single component gives `[a]²`; otherwise `[0, Σ max{a̲ᵢ², āᵢ²}]`.
pub fn lambda_s(a: &[Interval]) -> Result<Interval> {
    match a {
        [] => Err(Error::EmptySlice),
        [x] => Ok(x.sqr()),
        _ => Ok(Interval::raw(0.0, a.iter().map(Interval::mag_sq).sum())),
    }
}

/// Encloses the spectrum of `a bᵀ + b aᵀ` for `a`, `b` ranging over two boxes
/// of equal length.
pub fn lambda_t(a: &[Interval], b: &[Interval]) -> Result<Interval> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    match a.len() {
        0 => Err(Error::EmptySlice),
        1 => Ok(a[0].mul(&b[0]).scale(2.0)),
        _ => {
            let sa: f64 = a.iter().map(Interval::mag_sq).sum();
            let sb: f64 = b.iter().map(Interval::mag_sq).sum();
            let beta = (sa * sb).sqrt();
            let dot = a
                .iter()
                .zip(b)
                .fold(Interval::ZERO, |acc, (x, y)| acc.add(&x.mul(y)));
            Ok(Interval::raw(-beta, beta).add(&dot))
        }
    }
}

/// Interval hull of two intervals.
pub fn lambda_r(a: &Interval, b: &Interval) -> Interval {
    a.hull(b)
}

/// Exact spectral bounds of the symmetric 2×2 family `[[a, c], [c, b]]` with
/// `a ∈ [a]`, `b ∈ [b]`, `c ∈ [c]`.
pub fn lambda_star(a: &Interval, b: &Interval, c: &Interval) -> Interval {
    let d = 4.0 * c.mag_sq();
    let lo = 0.5 * (a.lo() + b.lo() - ((a.lo() - b.lo()).powi(2) + d).sqrt());
    let hi = 0.5 * (a.hi() + b.hi() + ((a.hi() - b.hi()).powi(2) + d).sqrt());
    Interval::raw(lo, hi)
}

/// `[min{a̲, 0}, max{ā, 0}]`.
pub fn zero_widen(a: &Interval) -> Interval {
    Interval::raw(a.lo().min(0.0), a.hi().max(0.0))
}

// Scalar interval operation counts of the operators above, used by the
// evaluation instrumentation.

pub(crate) fn lambda_s_cost(m: usize) -> u64 {
    if m == 1 {
        1
    } else {
        2 * m as u64
    }
}

pub(crate) fn lambda_t_cost(m: usize) -> u64 {
    if m == 1 {
        2
    } else {
        4 * m as u64 + 2
    }
}

pub(crate) const LAMBDA_STAR_COST: u64 = 8;
pub(crate) const LAMBDA_R_COST: u64 = 1;
pub(crate) const ZERO_WIDEN_COST: u64 = 1;
