//! Forward propagation of value, gradient and Hessian eigenvalue bounds along a
//! codelist.
//!
//! Two methods are provided. [`eval_original`] applies the dense chain and
//! product rules for eigenvalue bounds to every line. [`eval_improved`] uses
//! the per-line independence / at-most-linear sets to work on reduced
//! gradients and Hessians only, which is never less accurate and costs
//! `O(n)` operations per line for sparse functions.
//!
//! Both methods count every scalar interval operation they perform; the count
//! is reported as `op_count`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::codelist::{Codelist, Op};
use crate::error::{Error, Result};
use crate::index_set::IndexSet;
use crate::interval::{Interval, IntervalBox};
use crate::spectral::{self, lambda_r, lambda_star, zero_widen};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Original,
    Improved,
    Gershgorin,
    HertzRohn,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Original,
        Method::Improved,
        Method::Gershgorin,
        Method::HertzRohn,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Original => "original",
            Method::Improved => "improved",
            Method::Gershgorin => "gershgorin",
            Method::HertzRohn => "hertzrohn",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown method `{s}`"))
    }
}

/// Bounds on `φ`, `∇φ` and the spectrum of `∇²φ` over a box.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalResult {
    pub method: Method,
    pub value: Interval,
    pub gradient: IntervalBox,
    pub eigen: Interval,
    #[serde(rename = "opCount")]
    pub op_count: u64,
}

/// Per-line quantities of an evaluation. For the sparse method `lam` holds the
/// bound for the reduced Hessian and `row` the rule that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct LineState {
    pub y: Interval,
    pub grad: Vec<Interval>,
    pub lam: Interval,
    pub row: Option<usize>,
}

/// Counts scalar interval operations.
#[derive(Debug, Default)]
pub(crate) struct Tally {
    pub ops: u64,
}

impl Tally {
    pub fn add(&mut self, a: &Interval, b: &Interval) -> Interval {
        self.ops += 1;
        a.add(b)
    }

    pub fn sub(&mut self, a: &Interval, b: &Interval) -> Interval {
        self.ops += 1;
        a.sub(b)
    }

    pub fn mul(&mut self, a: &Interval, b: &Interval) -> Interval {
        self.ops += 1;
        a.mul(b)
    }

    pub fn scale(&mut self, a: &Interval, c: f64) -> Interval {
        self.ops += 1;
        a.scale(c)
    }

    pub fn add_const(&mut self, a: &Interval, c: f64) -> Interval {
        self.ops += 1;
        a.add_const(c)
    }

    pub fn powi(&mut self, a: &Interval, m: u32) -> Interval {
        self.ops += 1;
        a.powi(m)
    }

    pub fn recip(&mut self, a: &Interval) -> Result<Interval> {
        self.ops += 1;
        a.recip()
    }

    pub fn sqrt(&mut self, a: &Interval) -> Result<Interval> {
        self.ops += 1;
        a.sqrt()
    }

    pub fn exp(&mut self, a: &Interval) -> Interval {
        self.ops += 1;
        a.exp()
    }

    pub fn ln(&mut self, a: &Interval) -> Result<Interval> {
        self.ops += 1;
        a.ln()
    }

    pub fn lambda_s(&mut self, a: &[Interval]) -> Result<Interval> {
        self.ops += spectral::lambda_s_cost(a.len());
        spectral::lambda_s(a)
    }

    pub fn lambda_t(&mut self, a: &[Interval], b: &[Interval]) -> Result<Interval> {
        self.ops += spectral::lambda_t_cost(a.len());
        spectral::lambda_t(a, b)
    }

    pub fn lambda_r(&mut self, a: &Interval, b: &Interval) -> Interval {
        self.ops += spectral::LAMBDA_R_COST;
        lambda_r(a, b)
    }

    pub fn lambda_star(&mut self, a: &Interval, b: &Interval, c: &Interval) -> Interval {
        self.ops += spectral::LAMBDA_STAR_COST;
        lambda_star(a, b, c)
    }

    pub fn zero_widen(&mut self, a: &Interval) -> Interval {
        self.ops += spectral::ZERO_WIDEN_COST;
        zero_widen(a)
    }
}

/// Components of `g` at the members of `j`, in ascending index order.
pub fn grad_slice(g: &[Interval], j: &IndexSet) -> Result<Vec<Interval>> {
    if j.is_empty() {
        return Err(Error::EmptySlice);
    }
    if j.universe() != g.len() {
        return Err(Error::LengthMismatch {
            left: g.len(),
            right: j.universe(),
        });
    }
    Ok(j.iter().map(|i| g[i]).collect())
}

/// Spectral bound of the full Hessian from a bound on its reduced block over
/// the complement of `linear`.
pub fn lift_reduced(lam_dagger: &Interval, linear: &IndexSet) -> Interval {
    if linear.is_empty() {
        *lam_dagger
    } else if linear.is_full() {
        Interval::ZERO
    } else {
        zero_widen(lam_dagger)
    }
}

fn check_box(cl: &Codelist, b: &IntervalBox) -> Result<()> {
    if b.len() != cl.n() {
        return Err(Error::DimensionMismatch {
            expected: cl.n(),
            got: b.len(),
        });
    }
    Ok(())
}

fn at_line(e: Error, k: usize) -> Error {
    match e {
        Error::DomainViolation { op, interval, .. } => Error::DomainViolation {
            op,
            interval,
            line: Some(k),
        },
        e => e,
    }
}

fn domain(op: &'static str, interval: Interval, k: usize) -> Error {
    Error::DomainViolation {
        op,
        interval,
        line: Some(k),
    }
}

/// Value of line `k` and the derivative factors shared by both methods.
struct Unary {
    y: Interval,
    /// First derivative of the elementary function, for the gradient.
    d1: Interval,
}

fn unary_value(t: &mut Tally, op: &Op, yi: &Interval, k: usize) -> Result<Unary> {
    let r = match *op {
        Op::PowNat(_, m) => {
            let y = t.powi(yi, m);
            let p = t.powi(yi, m - 1);
            let d1 = t.scale(&p, m as f64);
            Unary { y, d1 }
        }
        Op::Recip(_) => {
            if yi.contains_zero() {
                return Err(domain("oneOver", *yi, k));
            }
            let y = t.recip(yi)?;
            let y2 = t.powi(&y, 2);
            let d1 = t.scale(&y2, -1.0);
            Unary { y, d1 }
        }
        Op::Sqrt(_) => {
            if yi.lo() <= 0.0 {
                return Err(domain("sqrt", *yi, k));
            }
            let y = t.sqrt(yi)?;
            let y2 = t.scale(&y, 2.0);
            let d1 = t.recip(&y2)?;
            Unary { y, d1 }
        }
        Op::Exp(_) => {
            let y = t.exp(yi);
            Unary { y, d1: y }
        }
        Op::Ln(_) => {
            if yi.lo() <= 0.0 {
                return Err(domain("ln", *yi, k));
            }
            let y = t.ln(yi)?;
            let d1 = t.recip(yi)?;
            Unary { y, d1 }
        }
        Op::AddConst(_, c) => Unary {
            y: t.add_const(yi, c),
            d1: Interval::ONE,
        },
        Op::MulByConst(_, c) => Unary {
            y: t.scale(yi, c),
            d1: Interval::point(c),
        },
        _ => unreachable!("not a unary operation"),
    };
    Ok(r)
}

/// Eigenvalue bound of a nonlinear unary line given `s = Λ_s(gradient slice)`
/// and the operand bound `lam` (`None` when the operand is affine).
fn unary_lambda(
    t: &mut Tally,
    op: &Op,
    yi: &Interval,
    yk: &Interval,
    s: &Interval,
    lam: Option<&Interval>,
) -> Result<Interval> {
    let r = match (*op, lam) {
        (Op::PowNat(_, m), None) => {
            let p = t.powi(yi, m - 2);
            let p = t.scale(&p, (m * (m - 1)) as f64);
            t.mul(&p, s)
        }
        (Op::PowNat(_, m), Some(l)) => {
            let p = t.powi(yi, m - 2);
            let p = t.scale(&p, m as f64);
            let a = t.scale(s, (m - 1) as f64);
            let b = t.mul(yi, l);
            let inner = t.add(&a, &b);
            t.mul(&p, &inner)
        }
        (Op::Recip(_), None) => {
            let c = t.powi(yk, 3);
            let c = t.scale(&c, 2.0);
            t.mul(&c, s)
        }
        (Op::Recip(_), Some(l)) => {
            let y2 = t.powi(yk, 2);
            let a = t.scale(yk, 2.0);
            let a = t.mul(&a, s);
            let inner = t.sub(&a, l);
            t.mul(&y2, &inner)
        }
        (Op::Sqrt(_), None) => {
            let c = t.powi(yk, 3);
            let c = t.scale(&c, -4.0);
            let c = t.recip(&c)?;
            t.mul(&c, s)
        }
        (Op::Sqrt(_), Some(l)) => {
            let outer = t.scale(yk, 2.0);
            let outer = t.recip(&outer)?;
            let c = t.scale(yi, -2.0);
            let c = t.recip(&c)?;
            let a = t.mul(&c, s);
            let inner = t.add(&a, l);
            t.mul(&outer, &inner)
        }
        (Op::Exp(_), None) => t.mul(yk, s),
        (Op::Exp(_), Some(l)) => {
            let inner = t.add(s, l);
            t.mul(yk, &inner)
        }
        (Op::Ln(_), None) => {
            let c = t.powi(yi, 2);
            let c = t.recip(&c)?;
            let c = t.scale(&c, -1.0);
            t.mul(&c, s)
        }
        (Op::Ln(_), Some(l)) => {
            let r = t.recip(yi)?;
            let a = t.mul(&r, s);
            let inner = t.sub(l, &a);
            t.mul(&r, &inner)
        }
        _ => unreachable!("not a nonlinear unary operation"),
    };
    Ok(r)
}

fn finite_or(k: usize, op: &Op, y: &Interval, st: &LineState) -> Result<()> {
    let ok = st.y.is_finite() && st.lam.is_finite() && st.grad.iter().all(Interval::is_finite);
    if ok {
        Ok(())
    } else {
        Err(domain(op.name(), *y, k))
    }
}

fn seed(n: usize, k: usize, xk: Interval) -> LineState {
    let mut grad = vec![Interval::ZERO; n];
    grad[k] = Interval::ONE;
    LineState {
        y: xk,
        grad,
        lam: Interval::ZERO,
        row: None,
    }
}

/// Dense method: chain and product rules on full-length gradients.
pub fn eval_original(cl: &Codelist, b: &IntervalBox) -> Result<EvalResult> {
    eval_original_trace(cl, b).map(|(r, _)| r)
}

/// [`eval_original`] together with the per-line states.
pub fn eval_original_trace(cl: &Codelist, b: &IntervalBox) -> Result<(EvalResult, Vec<LineState>)> {
    check_box(cl, b)?;
    let n = cl.n();
    let mut t = Tally::default();
    let mut states: Vec<LineState> = Vec::with_capacity(cl.output() + 1);
    for (k, op) in cl.lines()[..=cl.output()].iter().enumerate() {
        let st = match *op {
            Op::Var => seed(n, k, b[k]),
            Op::Add(i, j) => {
                let (si, sj) = (&states[i], &states[j]);
                LineState {
                    y: t.add(&si.y, &sj.y),
                    grad: (0..n).map(|l| t.add(&si.grad[l], &sj.grad[l])).collect(),
                    lam: t.add(&si.lam, &sj.lam),
                    row: None,
                }
            }
            Op::Mul(i, j) => {
                let (si, sj) = (&states[i], &states[j]);
                let grad = (0..n)
                    .map(|l| {
                        let a = t.mul(&sj.y, &si.grad[l]);
                        let c = t.mul(&si.y, &sj.grad[l]);
                        t.add(&a, &c)
                    })
                    .collect();
                let a = t.mul(&sj.y, &si.lam);
                let c = t.mul(&si.y, &sj.lam);
                let cross = t.lambda_t(&si.grad, &sj.grad)?;
                let ac = t.add(&a, &c);
                let lam = t.add(&ac, &cross);
                LineState {
                    y: t.mul(&si.y, &sj.y),
                    grad,
                    lam,
                    row: None,
                }
            }
            Op::AddConst(i, c) => {
                let si = &states[i];
                LineState {
                    y: t.add_const(&si.y, c),
                    grad: si.grad.clone(),
                    lam: si.lam,
                    row: None,
                }
            }
            Op::MulByConst(i, c) => {
                let si = &states[i];
                LineState {
                    y: t.scale(&si.y, c),
                    grad: si.grad.iter().map(|g| t.scale(g, c)).collect(),
                    lam: t.scale(&si.lam, c),
                    row: None,
                }
            }
            Op::PowNat(i, _) | Op::Recip(i) | Op::Sqrt(i) | Op::Exp(i) | Op::Ln(i) => {
                let si = &states[i];
                let u = unary_value(&mut t, op, &si.y, k)?;
                let grad = si.grad.iter().map(|g| t.mul(&u.d1, g)).collect();
                let s = t.lambda_s(&si.grad)?;
                let lam = unary_lambda(&mut t, op, &si.y, &u.y, &s, Some(&si.lam))
                    .map_err(|e| at_line(e, k))?;
                LineState {
                    y: u.y,
                    grad,
                    lam,
                    row: None,
                }
            }
        };
        finite_or(k, op, &st.y, &st)?;
        states.push(st);
    }
    let last = states.last().expect("codelist has at least one line");
    let result = EvalResult {
        method: Method::Original,
        value: last.y,
        gradient: IntervalBox::new(last.grad.clone())?,
        eigen: last.lam,
        op_count: t.ops,
    };
    Ok((result, states))
}

/// Which of the eight sum rules apply, in table order.
pub fn add_rows(li: &IndexSet, lj: &IndexSet) -> [bool; 8] {
    let (fi, fj) = (li.is_full(), lj.is_full());
    let union_full = li.union(lj).is_full();
    let sub_ij = li.is_proper_subset(lj);
    let sub_ji = lj.is_proper_subset(li);
    let incomparable = !li.is_subset(lj) && !lj.is_subset(li);
    [
        fi && fj,
        !fi && fj,
        fi && !fj,
        !fi && !fj && union_full,
        !union_full && li == lj,
        !union_full && sub_ij,
        !union_full && sub_ji,
        !union_full && incomparable,
    ]
}

/// Which of the seventeen product rules apply, in table order.
pub fn mul_rows(
    ii: &IndexSet,
    ij: &IndexSet,
    li: &IndexSet,
    lj: &IndexSet,
    lk: &IndexSet,
) -> [bool; 17] {
    let n = li.universe();
    let (fi, fj) = (li.is_full(), lj.is_full());
    let union_full = li.union(lj).is_full();
    let cap = li.intersection(lj);
    let c_star = ii.union(ij).is_full() && ii.len() + 1 == n && ij.len() + 1 == n;
    let incomparable = !li.is_subset(lj) && !lj.is_subset(li);
    [
        fi && fj,
        !fi && fj && lk == li,
        !fi && fj && lk.is_proper_subset(li) && !c_star,
        !fi && fj && c_star,
        fi && !fj && lk == lj,
        fi && !fj && lk.is_proper_subset(lj) && !c_star,
        fi && !fj && c_star,
        !fi && !fj && union_full && lk.is_proper_subset(&cap),
        !fi && !fj && union_full && *lk == cap && !c_star,
        !fi && !fj && c_star,
        !union_full && lk == li && li == lj,
        !union_full && lk == li && li.is_proper_subset(lj),
        !union_full && lk == lj && lj.is_proper_subset(li),
        !union_full && lk.is_proper_subset(li) && li == lj,
        !union_full && lk.is_proper_subset(li) && li.is_proper_subset(lj),
        !union_full && lk.is_proper_subset(lj) && lj.is_proper_subset(li),
        !union_full && incomparable,
    ]
}

/// Which of the three rules for a nonlinear unary operation applies.
pub fn unary_rows(li: &IndexSet, lk: &IndexSet) -> [bool; 3] {
    let fi = li.is_full();
    [fi, !fi && lk == li, !fi && lk.is_proper_subset(li)]
}

/// One-based number of the first applicable row.
pub fn first_row(rows: &[bool]) -> Option<usize> {
    rows.iter().position(|&r| r).map(|p| p + 1)
}

/// Gradient of line `k` restricted to its support `I_k^c`; entries in `I_k`
/// are exact zeros and are copied rather than computed.
fn sparse_grad(
    t: &mut Tally,
    cl: &Codelist,
    k: usize,
    states: &[LineState],
    op: &Op,
    d1: Option<&Interval>,
) -> Vec<Interval> {
    let n = cl.n();
    let mut grad = vec![Interval::ZERO; n];
    let support = cl.indep(k).complement();
    match *op {
        Op::Add(i, j) => {
            for l in support.iter() {
                let (a, c) = (!cl.indep(i).contains(l), !cl.indep(j).contains(l));
                grad[l] = match (a, c) {
                    (true, true) => t.add(&states[i].grad[l], &states[j].grad[l]),
                    (true, false) => states[i].grad[l],
                    _ => states[j].grad[l],
                };
            }
        }
        Op::Mul(i, j) => {
            let (si, sj) = (&states[i], &states[j]);
            for l in support.iter() {
                let (a, c) = (!cl.indep(i).contains(l), !cl.indep(j).contains(l));
                grad[l] = match (a, c) {
                    (true, true) => {
                        let u = t.mul(&sj.y, &si.grad[l]);
                        let v = t.mul(&si.y, &sj.grad[l]);
                        t.add(&u, &v)
                    }
                    (true, false) => t.mul(&sj.y, &si.grad[l]),
                    _ => t.mul(&si.y, &sj.grad[l]),
                };
            }
        }
        Op::AddConst(i, _) => {
            for l in support.iter() {
                grad[l] = states[i].grad[l];
            }
        }
        Op::MulByConst(i, c) => {
            for l in support.iter() {
                grad[l] = t.scale(&states[i].grad[l], c);
            }
        }
        Op::PowNat(i, _) | Op::Recip(i) | Op::Sqrt(i) | Op::Exp(i) | Op::Ln(i) => {
            let d1 = d1.expect("unary derivative");
            for l in support.iter() {
                grad[l] = t.mul(d1, &states[i].grad[l]);
            }
        }
        Op::Var => unreachable!("variable lines are seeded"),
    }
    grad
}

/// Sparsity-aware method: bounds on reduced Hessians over the complements of
/// the at-most-linear sets, lifted once at the output line.
pub fn eval_improved(cl: &Codelist, b: &IntervalBox) -> Result<EvalResult> {
    eval_improved_trace(cl, b).map(|(r, _)| r)
}

/// [`eval_improved`] together with the per-line states (`lam` holds the
/// reduced bound).
pub fn eval_improved_trace(cl: &Codelist, b: &IntervalBox) -> Result<(EvalResult, Vec<LineState>)> {
    check_box(cl, b)?;
    let n = cl.n();
    let mut t = Tally::default();
    let mut states: Vec<LineState> = Vec::with_capacity(cl.output() + 1);
    for (k, op) in cl.lines()[..=cl.output()].iter().enumerate() {
        let lk = cl.linear(k);
        let st = match *op {
            Op::Var => seed(n, k, b[k]),
            Op::Add(i, j) => {
                let y = t.add(&states[i].y, &states[j].y);
                let grad = sparse_grad(&mut t, cl, k, &states, op, None);
                let (li, lj) = (cl.linear(i), cl.linear(j));
                let (ai, aj) = (states[i].lam, states[j].lam);
                let row = first_row(&add_rows(li, lj)).ok_or(Error::RuleDispatchGap(k))?;
                let lam = match row {
                    1 => Interval::ZERO,
                    2 => ai,
                    3 => aj,
                    4 => t.lambda_r(&ai, &aj),
                    5 => t.add(&ai, &aj),
                    6 => {
                        let w = t.zero_widen(&aj);
                        t.add(&ai, &w)
                    }
                    7 => {
                        let w = t.zero_widen(&ai);
                        t.add(&w, &aj)
                    }
                    _ => {
                        let (wi, wj) = (t.zero_widen(&ai), t.zero_widen(&aj));
                        t.add(&wi, &wj)
                    }
                };
                LineState {
                    y,
                    grad,
                    lam,
                    row: Some(row),
                }
            }
            Op::Mul(i, j) => {
                let y = t.mul(&states[i].y, &states[j].y);
                let grad = sparse_grad(&mut t, cl, k, &states, op, None);
                let (si, sj) = (&states[i], &states[j]);
                let (ii, ij) = (cl.indep(i), cl.indep(j));
                let (li, lj) = (cl.linear(i), cl.linear(j));
                let row = first_row(&mul_rows(ii, ij, li, lj, lk)).ok_or(Error::RuleDispatchGap(k))?;
                let lam = mul_lambda(&mut t, row, si, sj, ii, ij, lk)?;
                LineState {
                    y,
                    grad,
                    lam,
                    row: Some(row),
                }
            }
            Op::AddConst(i, c) => {
                let si = &states[i];
                let y = t.add_const(&si.y, c);
                let grad = sparse_grad(&mut t, cl, k, &states, op, None);
                let (lam, row) = if cl.linear(i).is_full() {
                    (Interval::ZERO, 1)
                } else {
                    (si.lam, 2)
                };
                LineState {
                    y,
                    grad,
                    lam,
                    row: Some(row),
                }
            }
            Op::MulByConst(i, c) => {
                let si = &states[i];
                let y = t.scale(&si.y, c);
                let grad = sparse_grad(&mut t, cl, k, &states, op, None);
                let (lam, row) = if cl.linear(i).is_full() {
                    (Interval::ZERO, 1)
                } else {
                    (t.scale(&si.lam, c), 2)
                };
                LineState {
                    y,
                    grad,
                    lam,
                    row: Some(row),
                }
            }
            Op::PowNat(i, _) | Op::Recip(i) | Op::Sqrt(i) | Op::Exp(i) | Op::Ln(i) => {
                let yi = states[i].y;
                let u = unary_value(&mut t, op, &yi, k)?;
                let grad = sparse_grad(&mut t, cl, k, &states, op, Some(&u.d1));
                let li = cl.linear(i);
                let row = first_row(&unary_rows(li, lk)).ok_or(Error::RuleDispatchGap(k))?;
                let slice = grad_slice(&states[i].grad, &lk.complement())?;
                let s = t.lambda_s(&slice)?;
                let lam_i = states[i].lam;
                let operand = match row {
                    1 => None,
                    2 => Some(lam_i),
                    _ => Some(t.zero_widen(&lam_i)),
                };
                let lam = unary_lambda(&mut t, op, &yi, &u.y, &s, operand.as_ref())
                    .map_err(|e| at_line(e, k))?;
                LineState {
                    y: u.y,
                    grad,
                    lam,
                    row: Some(row),
                }
            }
        };
        finite_or(k, op, &st.y, &st)?;
        states.push(st);
    }
    let out = cl.output();
    let last = &states[out];
    let result = EvalResult {
        method: Method::Improved,
        value: last.y,
        gradient: IntervalBox::new(last.grad.clone())?,
        eigen: lift_reduced(&last.lam, cl.linear(out)),
        op_count: t.ops,
    };
    Ok((result, states))
}

fn mul_lambda(
    t: &mut Tally,
    row: usize,
    si: &LineState,
    sj: &LineState,
    ii: &IndexSet,
    ij: &IndexSet,
    lk: &IndexSet,
) -> Result<Interval> {
    let (yi, yj) = (&si.y, &sj.y);
    let (ai, aj) = (&si.lam, &sj.lam);
    if matches!(row, 4 | 7 | 10) {
        let p = ii.complement().iter().next().expect("C* leaves one variable");
        let q = ij.complement().iter().next().expect("C* leaves one variable");
        let c = t.mul(&si.grad[p], &sj.grad[q]);
        let (a, b) = match row {
            4 => (t.mul(yj, ai), Interval::ZERO),
            7 => (Interval::ZERO, t.mul(yi, aj)),
            _ => (t.mul(yj, ai), t.mul(yi, aj)),
        };
        return Ok(t.lambda_star(&a, &b, &c));
    }
    let comp = lk.complement();
    let lt = t.lambda_t(&grad_slice(&si.grad, &comp)?, &grad_slice(&sj.grad, &comp)?)?;
    let extra = match row {
        1 => return Ok(lt),
        2 => t.mul(yj, ai),
        3 => {
            let w = t.zero_widen(ai);
            t.mul(yj, &w)
        }
        5 => t.mul(yi, aj),
        6 => {
            let w = t.zero_widen(aj);
            t.mul(yi, &w)
        }
        8 => {
            let (u, v) = (t.mul(yj, ai), t.mul(yi, aj));
            let h = t.lambda_r(&u, &v);
            t.lambda_r(&h, &Interval::ZERO)
        }
        9 => {
            let (u, v) = (t.mul(yj, ai), t.mul(yi, aj));
            t.lambda_r(&u, &v)
        }
        11..=17 => {
            let wi = if matches!(row, 13 | 16 | 17) {
                t.zero_widen(ai)
            } else {
                *ai
            };
            let wj = if matches!(row, 12 | 15 | 17) {
                t.zero_widen(aj)
            } else {
                *aj
            };
            let (u, v) = (t.mul(yj, &wi), t.mul(yi, &wj));
            let s = t.add(&u, &v);
            if matches!(row, 14..=16) {
                t.lambda_r(&s, &Interval::ZERO)
            } else {
                s
            }
        }
        _ => unreachable!("row {row} is not a product rule"),
    };
    Ok(t.add(&lt, &extra))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::compile;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    fn unit_box(n: usize) -> IntervalBox {
        IntervalBox::from_bounds(&vec![(0.0, 1.0); n]).unwrap()
    }

    #[test]
    fn slices() {
        let g = vec![iv(1., 1.), iv(0., 0.)];
        assert_eq!(grad_slice(&g, &IndexSet::singleton(2, 0)).unwrap(), vec![iv(1., 1.)]);
        assert_eq!(grad_slice(&g, &IndexSet::full(2)).unwrap(), g);
        assert_eq!(grad_slice(&g, &IndexSet::empty(2)), Err(Error::EmptySlice));
    }

    #[test]
    fn lifting() {
        assert_eq!(lift_reduced(&iv(2., 3.), &IndexSet::empty(2)), iv(2., 3.));
        assert_eq!(lift_reduced(&iv(7., 9.), &IndexSet::full(2)), Interval::ZERO);
        assert_eq!(lift_reduced(&iv(2., 3.), &IndexSet::singleton(2, 0)), iv(0., 3.));
    }

    #[test]
    fn sum_of_squares_bounds() {
        let cl = compile("x1^2 + x2^2", 2).unwrap();
        assert_eq!(eval_original(&cl, &unit_box(2)).unwrap().eigen, iv(0., 4.));
        assert_eq!(eval_improved(&cl, &unit_box(2)).unwrap().eigen, iv(2., 2.));
    }

    #[test]
    fn single_square() {
        let cl = compile("x1^2", 1).unwrap();
        assert_eq!(eval_original(&cl, &unit_box(1)).unwrap().eigen, iv(2., 2.));
        assert_eq!(eval_improved(&cl, &unit_box(1)).unwrap().eigen, iv(2., 2.));
    }

    #[test]
    fn bilinear() {
        let cl = compile("x1*x2", 2).unwrap();
        let (r, tr) = eval_improved_trace(&cl, &unit_box(2)).unwrap();
        assert_eq!(r.eigen, iv(-1., 1.));
        assert_eq!(tr[2].row, Some(1));
        assert_eq!(eval_original(&cl, &unit_box(2)).unwrap().eigen, iv(-1., 1.));
    }

    #[test]
    fn identity_function() {
        let cl = compile("x1", 2).unwrap();
        let r = eval_improved(&cl, &unit_box(2)).unwrap();
        assert_eq!(r.eigen, Interval::ZERO);
        assert_eq!(r.gradient.dims(), &[iv(1., 1.), iv(0., 0.)]);
        assert_eq!(eval_original(&cl, &unit_box(2)).unwrap().eigen, Interval::ZERO);
    }

    #[test]
    fn domain_violations_carry_line() {
        let cl = compile("ln(x1) + x2", 2).unwrap();
        let b = IntervalBox::from_bounds(&[(-1.0, 1.0), (0.0, 1.0)]).unwrap();
        for r in [eval_original(&cl, &b), eval_improved(&cl, &b)] {
            assert!(matches!(r, Err(Error::DomainViolation { op: "ln", line: Some(2), .. })));
        }
        let cl = compile("sqrt(x1)", 1).unwrap();
        assert!(eval_improved(&cl, &unit_box(1)).is_err());
        let cl = compile("1/x1", 1).unwrap();
        assert!(eval_original(&cl, &unit_box(1)).is_err());
        let cl = compile("exp(exp(x1))", 1).unwrap();
        let big = IntervalBox::from_bounds(&[(0.0, 10.0)]).unwrap();
        assert!(matches!(eval_original(&cl, &big), Err(Error::DomainViolation { .. })));
    }

    #[test]
    fn dimension_checked() {
        let cl = compile("x1*x2", 2).unwrap();
        assert!(matches!(
            eval_improved(&cl, &unit_box(3)),
            Err(Error::DimensionMismatch { expected: 2, got: 3 })
        ));
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("foo".parse::<Method>().is_err());
    }

    #[test]
    fn json_shape() {
        let cl = compile("x1*x2", 2).unwrap();
        let r = eval_improved(&cl, &unit_box(2)).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(v["method"], "improved");
        assert_eq!(v["eigen"], serde_json::json!([-1.0, 1.0]));
        assert_eq!(v["gradient"].as_array().unwrap().len(), 2);
        assert!(v["opCount"].as_u64().unwrap() > 0);
    }
}
