//! Straight-line programs over the elementary operation alphabet, with the
//! static sparsity sets used by the sparse bound rules.
//!
//! Line `k` (0-based) for `k < n` is the variable `x_{k+1}`. Every later line
//! applies one operation to strictly earlier lines. For each line two index
//! sets over the variables are kept:
//!
//! * `I_k`: variables the line does not depend on at all;
//! * `L_k ⊇ I_k`: variables the line depends on at most linearly.

use std::fmt;

use crate::error::{Error, Result};
use crate::index_set::IndexSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Op {
    Var,
    Add(usize, usize),
    Mul(usize, usize),
    PowNat(usize, u32),
    Recip(usize),
    Sqrt(usize),
    Exp(usize),
    Ln(usize),
    AddConst(usize, f64),
    MulByConst(usize, f64),
}

impl Op {
    /// Line references, in operand order.
    pub fn operands(&self) -> Vec<usize> {
        match *self {
            Op::Var => vec![],
            Op::Add(i, j) | Op::Mul(i, j) => vec![i, j],
            Op::PowNat(i, _)
            | Op::Recip(i)
            | Op::Sqrt(i)
            | Op::Exp(i)
            | Op::Ln(i)
            | Op::AddConst(i, _)
            | Op::MulByConst(i, _) => vec![i],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Op::Var => "var",
            Op::Add(..) => "add",
            Op::Mul(..) => "mul",
            Op::PowNat(..) => "powNat",
            Op::Recip(_) => "oneOver",
            Op::Sqrt(_) => "sqrt",
            Op::Exp(_) => "exp",
            Op::Ln(_) => "ln",
            Op::AddConst(..) => "addC",
            Op::MulByConst(..) => "mulByC",
        }
    }
}

/// Independence and at-most-linear sets of one line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineSets {
    pub indep: IndexSet,
    pub linear: IndexSet,
}

#[derive(Debug, Clone)]
pub struct Codelist {
    n: usize,
    lines: Vec<Op>,
    output: usize,
    sets: Vec<LineSets>,
}

impl Codelist {
    /// Builds a codelist whose output is the last line.
    pub fn new(n: usize, lines: Vec<Op>) -> Result<Self> {
        let output = lines.len().saturating_sub(1);
        Codelist::with_output(n, lines, output)
    }

    /// Builds a codelist whose value is line `output`.
    pub fn with_output(n: usize, lines: Vec<Op>, output: usize) -> Result<Self> {
        validate(n, &lines)?;
        if output >= lines.len() {
            return Err(Error::MalformedCodelist {
                line: output,
                reason: "output line does not exist".into(),
            });
        }
        let sets = analyze_index_sets(n, &lines);
        let cl = Codelist {
            n,
            lines,
            output,
            sets,
        };
        cl.check_sets()?;
        Ok(cl)
    }

    /// Number of variables.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lines(&self) -> &[Op] {
        &self.lines
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    /// Number of operation lines, `t`.
    pub fn op_lines(&self) -> usize {
        self.lines.len() - self.n
    }

    pub fn output(&self) -> usize {
        self.output
    }

    pub fn sets(&self, k: usize) -> &LineSets {
        &self.sets[k]
    }

    pub fn indep(&self, k: usize) -> &IndexSet {
        &self.sets[k].indep
    }

    pub fn linear(&self, k: usize) -> &IndexSet {
        &self.sets[k].linear
    }

    /// Whether any line reachable from the output is a product.
    pub fn has_mul(&self) -> bool {
        self.live_lines().iter().any(|&k| matches!(self.lines[k], Op::Mul(..)))
    }

    /// Lines the output depends on, in ascending order.
    pub fn live_lines(&self) -> Vec<usize> {
        let mut live = vec![false; self.lines.len()];
        live[self.output] = true;
        for k in (0..=self.output).rev() {
            if live[k] {
                for i in self.lines[k].operands() {
                    live[i] = true;
                }
            }
        }
        (0..self.lines.len()).filter(|&k| live[k]).collect()
    }

    /// Plain real evaluation of every line at `x`; returns the output value.
    pub fn eval_point(&self, x: &[f64]) -> Result<f64> {
        Ok(self.eval_lines(x)?[self.output])
    }

    /// Plain real evaluation of every line at `x`.
    pub fn eval_lines(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        let mut y: Vec<f64> = Vec::with_capacity(self.lines.len());
        for (k, op) in self.lines.iter().enumerate() {
            let v = match *op {
                Op::Var => x[k],
                Op::Add(i, j) => y[i] + y[j],
                Op::Mul(i, j) => y[i] * y[j],
                Op::PowNat(i, m) => y[i].powi(m as i32),
                Op::Recip(i) => 1.0 / y[i],
                Op::Sqrt(i) => y[i].sqrt(),
                Op::Exp(i) => y[i].exp(),
                Op::Ln(i) => y[i].ln(),
                Op::AddConst(i, c) => y[i] + c,
                Op::MulByConst(i, c) => c * y[i],
            };
            y.push(v);
        }
        Ok(y)
    }

    /// One line per entry: `k: op(args) I={…} L={…}` with 1-based numbering.
    pub fn dump(&self) -> String {
        self.to_string()
    }

    fn check_sets(&self) -> Result<()> {
        for (k, s) in self.sets.iter().enumerate() {
            if !s.indep.is_subset(&s.linear) {
                return Err(Error::MalformedCodelist {
                    line: k,
                    reason: "independence set is not contained in the linear set".into(),
                });
            }
            if s.indep.is_full() {
                return Err(Error::MalformedCodelist {
                    line: k,
                    reason: "line does not depend on any variable".into(),
                });
            }
        }
        Ok(())
    }
}

impl fmt::Display for Codelist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, op) in self.lines.iter().enumerate() {
            let args = match *op {
                Op::Var => format!("{}", k + 1),
                Op::Add(i, j) | Op::Mul(i, j) => format!("{},{}", i + 1, j + 1),
                Op::PowNat(i, m) => format!("{},{m}", i + 1),
                Op::AddConst(i, c) | Op::MulByConst(i, c) => format!("{},{c}", i + 1),
                Op::Recip(i) | Op::Sqrt(i) | Op::Exp(i) | Op::Ln(i) => format!("{}", i + 1),
            };
            let s = &self.sets[k];
            writeln!(f, "{}: {}({args}) I={} L={}", k + 1, op.name(), s.indep, s.linear)?;
        }
        Ok(())
    }
}

/// Structural checks: variable prefix, operand ordering, exponents and
/// constants.
pub fn validate(n: usize, lines: &[Op]) -> Result<()> {
    let bad = |line: usize, reason: &str| Error::MalformedCodelist {
        line,
        reason: reason.into(),
    };
    if n == 0 {
        return Err(bad(0, "a codelist needs at least one variable"));
    }
    if lines.len() < n {
        return Err(bad(lines.len(), "fewer lines than variables"));
    }
    for (k, op) in lines.iter().enumerate() {
        match op {
            Op::Var if k >= n => return Err(bad(k, "variable line after the variable prefix")),
            Op::Var => continue,
            _ if k < n => return Err(bad(k, "operation inside the variable prefix")),
            _ => {}
        }
        if op.operands().iter().any(|&i| i >= k) {
            return Err(bad(k, "operand does not refer to an earlier line"));
        }
        match *op {
            Op::PowNat(_, m) if m < 2 => return Err(bad(k, "powNat exponent must be at least 2")),
            Op::AddConst(_, c) | Op::MulByConst(_, c) if !c.is_finite() => {
                return Err(bad(k, "constant is not finite"))
            }
            _ => {}
        }
    }
    Ok(())
}

/// Computes `(I_k, L_k)` for every line of a structurally valid codelist.
pub fn analyze_index_sets(n: usize, lines: &[Op]) -> Vec<LineSets> {
    let mut sets: Vec<LineSets> = Vec::with_capacity(lines.len());
    for (k, op) in lines.iter().enumerate() {
        let s = match *op {
            Op::Var => LineSets {
                indep: IndexSet::singleton(n, k).complement(),
                linear: IndexSet::full(n),
            },
            Op::Add(i, j) => LineSets {
                indep: sets[i].indep.intersection(&sets[j].indep),
                linear: sets[i].linear.intersection(&sets[j].linear),
            },
            Op::Mul(i, j) => {
                let s = sets[i].indep.intersection(&sets[j].indep);
                LineSets {
                    indep: s.clone(),
                    linear: s,
                }
            }
            Op::PowNat(i, _) | Op::Recip(i) | Op::Sqrt(i) | Op::Exp(i) | Op::Ln(i) => LineSets {
                indep: sets[i].indep.clone(),
                linear: sets[i].indep.clone(),
            },
            Op::AddConst(i, _) | Op::MulByConst(i, _) => sets[i].clone(),
        };
        sets.push(s);
    }
    sets
}
