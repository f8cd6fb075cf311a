//! Two-step reference pipeline: an interval Hessian from second-order forward
//! propagation, then Gershgorin or Hertz–Rohn spectral bounds. Also home of
//! the Jacobi eigensolver used for vertex matrices and test oracles.

use rayon::prelude::*;

use crate::codelist::{Codelist, Op};
use crate::engine::{EvalResult, Method, Tally};
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalBox};

/// Default bound on the dimension accepted by [`hertz_rohn_bounds`].
pub const HERTZ_ROHN_LIMIT: usize = 20;

/// Symmetric interval matrix stored row-major as endpoint matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct SymIntervalMatrix {
    n: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl SymIntervalMatrix {
    /// Builds a matrix from row-major lower and upper endpoint matrices.
    pub fn new(n: usize, lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != n * n || hi.len() != n * n {
            return Err(Error::LengthMismatch {
                left: lo.len().max(hi.len()),
                right: n * n,
            });
        }
        for r in 0..n {
            for c in 0..n {
                Interval::new(lo[r * n + c], hi[r * n + c])?;
                for m in [&lo, &hi] {
                    let diff = (m[r * n + c] - m[c * n + r]).abs();
                    if diff > 0.0 {
                        return Err(Error::NotSymmetric { row: r, col: c, diff });
                    }
                }
            }
        }
        Ok(SymIntervalMatrix { n, lo, hi })
    }

    /// Builds a matrix from row-major interval entries.
    pub fn from_entries(n: usize, entries: &[Interval]) -> Result<Self> {
        SymIntervalMatrix::new(
            n,
            entries.iter().map(Interval::lo).collect(),
            entries.iter().map(Interval::hi).collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> Interval {
        Interval::raw(self.lo[r * self.n + c], self.hi[r * self.n + c])
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    /// Whether the real symmetric matrix `m` (row-major) lies in the set.
    pub fn contains(&self, m: &[f64]) -> bool {
        m.len() == self.n * self.n
            && m.iter()
                .enumerate()
                .all(|(k, &v)| self.lo[k] <= v && v <= self.hi[k])
    }
}

struct HessState {
    y: Interval,
    grad: Vec<Interval>,
    hess: Vec<Interval>,
}

/// Value, gradient and interval Hessian of the output line, plus the number
/// of interval operations spent.
pub(crate) fn hessian_pass(
    cl: &Codelist,
    b: &IntervalBox,
) -> Result<(Interval, Vec<Interval>, SymIntervalMatrix, u64)> {
    if b.len() != cl.n() {
        return Err(Error::DimensionMismatch {
            expected: cl.n(),
            got: b.len(),
        });
    }
    let n = cl.n();
    let mut t = Tally::default();
    let mut states: Vec<HessState> = Vec::with_capacity(cl.output() + 1);
    for (k, op) in cl.lines()[..=cl.output()].iter().enumerate() {
        let dom = |name: &'static str, iv: Interval| Error::DomainViolation {
            op: name,
            interval: iv,
            line: Some(k),
        };
        let st = match *op {
            Op::Var => {
                let mut grad = vec![Interval::ZERO; n];
                grad[k] = Interval::ONE;
                HessState {
                    y: b[k],
                    grad,
                    hess: vec![Interval::ZERO; n * n],
                }
            }
            Op::Add(i, j) => {
                let (si, sj) = (&states[i], &states[j]);
                HessState {
                    y: t.add(&si.y, &sj.y),
                    grad: (0..n).map(|l| t.add(&si.grad[l], &sj.grad[l])).collect(),
                    hess: (0..n * n).map(|l| t.add(&si.hess[l], &sj.hess[l])).collect(),
                }
            }
            Op::Mul(i, j) => {
                let (si, sj) = (&states[i], &states[j]);
                let grad = (0..n)
                    .map(|l| {
                        let u = t.mul(&sj.y, &si.grad[l]);
                        let v = t.mul(&si.y, &sj.grad[l]);
                        t.add(&u, &v)
                    })
                    .collect();
                let mut hess = vec![Interval::ZERO; n * n];
                for r in 0..n {
                    for c in r..n {
                        let u = t.mul(&sj.y, &si.hess[r * n + c]);
                        let v = t.mul(&si.y, &sj.hess[r * n + c]);
                        let w = t.mul(&si.grad[r], &sj.grad[c]);
                        let x = t.mul(&sj.grad[r], &si.grad[c]);
                        let uv = t.add(&u, &v);
                        let wx = t.add(&w, &x);
                        let h = t.add(&uv, &wx);
                        hess[r * n + c] = h;
                        hess[c * n + r] = h;
                    }
                }
                HessState {
                    y: t.mul(&si.y, &sj.y),
                    grad,
                    hess,
                }
            }
            _ => {
                let i = op.operands()[0];
                let yi = states[i].y;
                // value, first and second derivative of the elementary function
                let (y, d1, d2) = match *op {
                    Op::PowNat(_, m) => {
                        let y = t.powi(&yi, m);
                        let p1 = t.powi(&yi, m - 1);
                        let p2 = t.powi(&yi, m - 2);
                        (y, t.scale(&p1, m as f64), t.scale(&p2, (m * (m - 1)) as f64))
                    }
                    Op::Recip(_) => {
                        let y = t.recip(&yi).map_err(|_| dom("oneOver", yi))?;
                        let y2 = t.powi(&y, 2);
                        let y3 = t.powi(&y, 3);
                        (y, t.scale(&y2, -1.0), t.scale(&y3, 2.0))
                    }
                    Op::Sqrt(_) => {
                        if yi.lo() <= 0.0 {
                            return Err(dom("sqrt", yi));
                        }
                        let y = t.sqrt(&yi)?;
                        let a = t.scale(&y, 2.0);
                        let d1 = t.recip(&a)?;
                        let y3 = t.powi(&y, 3);
                        let c = t.scale(&y3, -4.0);
                        (y, d1, t.recip(&c)?)
                    }
                    Op::Exp(_) => {
                        let y = t.exp(&yi);
                        (y, y, y)
                    }
                    Op::Ln(_) => {
                        if yi.lo() <= 0.0 {
                            return Err(dom("ln", yi));
                        }
                        let y = t.ln(&yi)?;
                        let d1 = t.recip(&yi)?;
                        let sq = t.powi(&yi, 2);
                        let inv = t.recip(&sq)?;
                        (y, d1, t.scale(&inv, -1.0))
                    }
                    Op::AddConst(_, c) => (t.add_const(&yi, c), Interval::ONE, Interval::ZERO),
                    Op::MulByConst(_, c) => (t.scale(&yi, c), Interval::point(c), Interval::ZERO),
                    Op::Var | Op::Add(..) | Op::Mul(..) => unreachable!(),
                };
                let si = &states[i];
                let grad = si.grad.iter().map(|g| t.mul(&d1, g)).collect();
                let mut hess = vec![Interval::ZERO; n * n];
                let affine = matches!(op, Op::AddConst(..) | Op::MulByConst(..));
                for r in 0..n {
                    for c in r..n {
                        let first = t.mul(&d1, &si.hess[r * n + c]);
                        let h = if affine {
                            first
                        } else {
                            let outer = if r == c {
                                t.powi(&si.grad[r], 2)
                            } else {
                                t.mul(&si.grad[r], &si.grad[c])
                            };
                            let second = t.mul(&d2, &outer);
                            t.add(&second, &first)
                        };
                        hess[r * n + c] = h;
                        hess[c * n + r] = h;
                    }
                }
                HessState { y, grad, hess }
            }
        };
        let finite = st.y.is_finite()
            && st.grad.iter().all(Interval::is_finite)
            && st.hess.iter().all(Interval::is_finite);
        if !finite {
            return Err(dom(op.name(), st.y));
        }
        states.push(st);
    }
    let last = states.pop().expect("codelist has at least one line");
    let h = SymIntervalMatrix::from_entries(n, &last.hess)?;
    Ok((last.y, last.grad, h, t.ops))
}

/// Interval Hessian of the codelist output over `b`.
pub fn interval_hessian(cl: &Codelist, b: &IntervalBox) -> Result<SymIntervalMatrix> {
    hessian_pass(cl, b).map(|(_, _, h, _)| h)
}

/// Hessian at a point, row-major, from the same propagation rules.
pub fn point_hessian(cl: &Codelist, x: &[f64]) -> Result<Vec<f64>> {
    let h = interval_hessian(cl, &IntervalBox::point(x)?)?;
    Ok(h.lo.iter().zip(&h.hi).map(|(a, b)| 0.5 * (a + b)).collect())
}

/// Gershgorin discs of an interval matrix, maximized over the set.
pub fn gershgorin_bounds(h: &SymIntervalMatrix) -> Interval {
    let n = h.n;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for r in 0..n {
        let radius: f64 = (0..n).filter(|&c| c != r).map(|c| h.get(r, c).mag()).sum();
        let d = h.get(r, r);
        lo = lo.min(d.lo() - radius);
        hi = hi.max(d.hi() + radius);
    }
    Interval::raw(lo, hi)
}

/// Tight spectral bounds of an interval matrix from `2^(n-1)` vertex
/// matrices, using the default dimension limit.
pub fn hertz_rohn_bounds(h: &SymIntervalMatrix) -> Result<Interval> {
    hertz_rohn_bounds_with_limit(h, HERTZ_ROHN_LIMIT)
}

/// Vertex matrix `mid + sign · Z rad Z` for the sign vector encoded by `mask`
/// (bit `i - 1` set means `z_i = -1`, `z_1 = +1`).
pub fn hertz_rohn_vertex(h: &SymIntervalMatrix, mask: u64, sign: f64) -> Vec<f64> {
    let n = h.n;
    let z = |i: usize| -> f64 {
        if i > 0 && mask >> (i - 1) & 1 == 1 {
            -1.0
        } else {
            1.0
        }
    };
    let mut m = vec![0.0; n * n];
    for r in 0..n {
        for c in 0..n {
            // mid ± rad, taken from the endpoints to avoid rounding
            let k = r * n + c;
            m[k] = if sign * z(r) * z(c) > 0.0 { h.hi[k] } else { h.lo[k] };
        }
    }
    m
}

pub fn hertz_rohn_bounds_with_limit(h: &SymIntervalMatrix, limit: usize) -> Result<Interval> {
    let n = h.n;
    if n > limit || n > 63 {
        return Err(Error::DimensionTooLarge { n, limit });
    }
    let count = 1u64 << (n - 1);
    let (lo, hi) = (0..count)
        .into_par_iter()
        .map(|mask| -> Result<(f64, f64)> {
            let (lmin, _) = sym_eigen_range(n, &hertz_rohn_vertex(h, mask, -1.0))?;
            let (_, lmax) = sym_eigen_range(n, &hertz_rohn_vertex(h, mask, 1.0))?;
            Ok((lmin, lmax))
        })
        .try_reduce(
            || (f64::INFINITY, f64::NEG_INFINITY),
            |a, b| Ok((a.0.min(b.0), a.1.max(b.1))),
        )?;
    Ok(Interval::raw(lo, hi))
}

/// All eigenvalues of a real symmetric row-major matrix, ascending, by cyclic
/// Jacobi rotations.
pub fn sym_eigenvalues(n: usize, m: &[f64]) -> Result<Vec<f64>> {
    if m.len() != n * n {
        return Err(Error::LengthMismatch {
            left: m.len(),
            right: n * n,
        });
    }
    let norm = m.iter().map(|v| v * v).sum::<f64>().sqrt();
    for r in 0..n {
        for c in r + 1..n {
            let diff = (m[r * n + c] - m[c * n + r]).abs();
            if diff > 1e-12 * norm.max(1.0) {
                return Err(Error::NotSymmetric { row: r, col: c, diff });
            }
        }
    }
    let mut a = m.to_vec();
    for r in 0..n {
        for c in r + 1..n {
            let v = 0.5 * (a[r * n + c] + a[c * n + r]);
            a[r * n + c] = v;
            a[c * n + r] = v;
        }
    }
    let off = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for r in 0..n {
            for c in 0..n {
                if r != c {
                    s += a[r * n + c] * a[r * n + c];
                }
            }
        }
        s.sqrt()
    };
    for _sweep in 0..100 {
        if off(&a) <= 1e-12 * norm {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k * n + p], a[k * n + q]);
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p * n + k], a[q * n + k]);
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Smallest and largest eigenvalue of a real symmetric row-major matrix.
pub fn sym_eigen_range(n: usize, m: &[f64]) -> Result<(f64, f64)> {
    let ev = sym_eigenvalues(n, m)?;
    match (ev.first(), ev.last()) {
        (Some(&lo), Some(&hi)) => Ok((lo, hi)),
        _ => Err(Error::EmptySlice),
    }
}

fn eval_reference(cl: &Codelist, b: &IntervalBox, method: Method) -> Result<EvalResult> {
    let (value, grad, h, mut ops) = hessian_pass(cl, b)?;
    let n = h.n as u64;
    let eigen = match method {
        Method::Gershgorin => {
            ops += n * n;
            gershgorin_bounds(&h)
        }
        _ => {
            let r = hertz_rohn_bounds(&h)?;
            ops += (1u64 << (n - 1)) * 2 * n * n;
            r
        }
    };
    Ok(EvalResult {
        method,
        value,
        gradient: IntervalBox::new(grad)?,
        eigen,
        op_count: ops,
    })
}

/// Interval Hessian followed by Gershgorin bounds.
pub fn eval_gershgorin(cl: &Codelist, b: &IntervalBox) -> Result<EvalResult> {
    eval_reference(cl, b, Method::Gershgorin)
}

/// Interval Hessian followed by Hertz–Rohn bounds.
pub fn eval_hertz_rohn(cl: &Codelist, b: &IntervalBox) -> Result<EvalResult> {
    eval_reference(cl, b, Method::HertzRohn)
}

/// Evaluates with any of the four methods.
pub fn evaluate(cl: &Codelist, b: &IntervalBox, method: Method) -> Result<EvalResult> {
    match method {
        Method::Original => crate::engine::eval_original(cl, b),
        Method::Improved => crate::engine::eval_improved(cl, b),
        Method::Gershgorin => eval_gershgorin(cl, b),
        Method::HertzRohn => eval_hertz_rohn(cl, b),
    }
}
