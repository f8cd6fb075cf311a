//! Function files and the seeded generator for synthetic test functions.
//!
//! A function file holds one expression per line. Blank lines and text after
//! `#` are ignored. Two header lines set state for the expressions that follow:
//!
//! ```text
//! vars: 3
//! domain: -1,1;-1,1;0.5,2
//! ```
//!
//! Without `vars:` the variable count is the largest index used by the
//! expression; without `domain:` the domain is `[-1, 1]^n`.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expr::{self, Expr};
use crate::interval::IntervalBox;

/// One function of a corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionSpec {
    pub id: String,
    pub source: String,
    pub n: usize,
    pub domain: IntervalBox,
}

fn default_domain(n: usize) -> IntervalBox {
    IntervalBox::from_bounds(&vec![(-1.0, 1.0); n]).expect("n >= 1")
}

/// Parses the text of a function file; ids are `{stem}:{line}`.
pub fn parse_function_file(stem: &str, text: &str) -> Result<Vec<FunctionSpec>> {
    let mut vars: Option<usize> = None;
    let mut domain: Option<IntervalBox> = None;
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |reason: String| Error::MalformedCodelist { line: idx, reason };
        if let Some(v) = line.strip_prefix("vars:") {
            let n: usize = v
                .trim()
                .parse()
                .map_err(|_| bad(format!("`{}` is not a variable count", v.trim())))?;
            if n == 0 {
                return Err(bad("variable count must be positive".into()));
            }
            vars = Some(n);
            continue;
        }
        if let Some(d) = line.strip_prefix("domain:") {
            domain = Some(d.trim().parse()?);
            continue;
        }
        let n = match vars {
            Some(n) => n,
            None => expr::parse(line, usize::MAX)?.max_var().max(1),
        };
        let dom = match &domain {
            Some(d) if d.len() != n => {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: d.len(),
                })
            }
            Some(d) => d.clone(),
            None => default_domain(n),
        };
        expr::compile(line, n)?;
        out.push(FunctionSpec {
            id: format!("{stem}:{}", idx + 1),
            source: line.to_string(),
            n,
            domain: dom,
        });
    }
    Ok(out)
}

/// Loads a single function file.
pub fn load_function_file(path: &Path) -> Result<Vec<FunctionSpec>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_function_file(&stem, &text)
}

/// Loads every `*.txt` file of a directory, in file name order.
pub fn load_corpus_dir(dir: &Path) -> Result<Vec<FunctionSpec>> {
    let mut paths: Vec<_> = fs::read_dir(dir)
        .map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "txt"))
        .collect();
    paths.sort();
    let mut out = Vec::new();
    for p in paths {
        out.extend(load_function_file(&p)?);
    }
    Ok(out)
}

/// Shape of randomly generated functions.
#[derive(Debug, Clone)]
pub struct GenOptions {
    /// Maximal nesting depth of the grammar walk.
    pub depth: u32,
    /// Guarantee at least one product of two non-constant factors.
    pub require_mul: bool,
}

impl Default for GenOptions {
    fn default() -> Self {
        GenOptions {
            depth: 4,
            require_mul: false,
        }
    }
}

fn small_const(rng: &mut ChaCha8Rng) -> f64 {
    let v: f64 = [-2.0, -1.5, -1.0, -0.5, 0.5, 1.0, 1.5, 2.0, 3.0][rng.gen_range(0..9)];
    v
}

fn positive_shift(rng: &mut ChaCha8Rng) -> f64 {
    [0.25, 0.5, 1.0, 2.0][rng.gen_range(0..4)]
}

fn walk(rng: &mut ChaCha8Rng, n: usize, depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.25) {
        return Expr::Var(rng.gen_range(1..=n));
    }
    let sub = |rng: &mut ChaCha8Rng| Box::new(walk(rng, n, depth - 1));
    // x ↦ x² + c with c > 0, keeps singular functions away from their poles
    let padded = |rng: &mut ChaCha8Rng| {
        let a = Box::new(Expr::PowNat(sub(rng), 2));
        Box::new(Expr::AddConst(a, positive_shift(rng)))
    };
    match rng.gen_range(0..10) {
        0 | 1 => Expr::Add(sub(rng), sub(rng)),
        2 | 3 => Expr::Mul(sub(rng), sub(rng)),
        4 => Expr::PowNat(sub(rng), rng.gen_range(2..=4)),
        5 => {
            let c = small_const(rng);
            Expr::MulByConst(sub(rng), c)
        }
        6 => {
            let c = small_const(rng);
            Expr::AddConst(sub(rng), c)
        }
        7 => Expr::Exp(Box::new(Expr::MulByConst(sub(rng), 0.5))),
        8 => match rng.gen_range(0..3) {
            0 => Expr::Recip(padded(rng)),
            1 => Expr::Sqrt(padded(rng)),
            _ => Expr::Ln(padded(rng)),
        },
        _ => Expr::Mul(
            Box::new(Expr::Var(rng.gen_range(1..=n))),
            Box::new(Expr::Var(rng.gen_range(1..=n))),
        ),
    }
}

fn vars_used(e: &Expr, seen: &mut [bool]) {
    match e {
        Expr::Var(k) => seen[k - 1] = true,
        Expr::Const(_) => {}
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
            vars_used(a, seen);
            vars_used(b, seen);
        }
        Expr::Neg(a)
        | Expr::PowNat(a, _)
        | Expr::Recip(a)
        | Expr::Sqrt(a)
        | Expr::Exp(a)
        | Expr::Ln(a)
        | Expr::AddConst(a, _)
        | Expr::MulByConst(a, _) => vars_used(a, seen),
    }
}

/// Whether the normalized expression contains a product of two non-constant
/// factors.
pub fn has_product(e: &Expr) -> bool {
    match e {
        Expr::Mul(..) => true,
        Expr::Var(_) | Expr::Const(_) => false,
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Div(a, b) => has_product(a) || has_product(b),
        Expr::Neg(a)
        | Expr::PowNat(a, _)
        | Expr::Recip(a)
        | Expr::Sqrt(a)
        | Expr::Exp(a)
        | Expr::Ln(a)
        | Expr::AddConst(a, _)
        | Expr::MulByConst(a, _) => has_product(a),
    }
}

/// Random expression over `x1 … xn` in which every variable occurs.
pub fn random_function(rng: &mut ChaCha8Rng, n: usize, opts: &GenOptions) -> Expr {
    let mut e = walk(rng, n, opts.depth);
    let mut seen = vec![false; n];
    vars_used(&e, &mut seen);
    let mut missing: Vec<usize> = (1..=n).filter(|&k| !seen[k - 1]).collect();
    missing.shuffle(rng);
    for k in missing {
        let term = if rng.gen_bool(0.5) {
            Expr::PowNat(Box::new(Expr::Var(k)), 2)
        } else {
            Expr::MulByConst(Box::new(walk_with(rng, n, k, opts.depth / 2)), small_const(rng))
        };
        e = Expr::Add(Box::new(e), Box::new(term));
    }
    if opts.require_mul && !has_product(&expr::normalize(&e).unwrap_or(Expr::Const(0.0))) {
        let i = rng.gen_range(1..=n);
        let j = if n > 1 {
            (i % n) + 1
        } else {
            i
        };
        let prod = Expr::Mul(Box::new(Expr::Var(i)), Box::new(Expr::Var(j)));
        e = Expr::Add(Box::new(e), Box::new(prod));
    }
    e
}

/// Random subtree guaranteed to contain `x_k`.
fn walk_with(rng: &mut ChaCha8Rng, n: usize, k: usize, depth: u32) -> Expr {
    let other = walk(rng, n, depth);
    let v = Box::new(Expr::Var(k));
    match rng.gen_range(0..3) {
        0 => Expr::Mul(v, Box::new(other)),
        1 => Expr::Exp(Box::new(Expr::MulByConst(
            Box::new(Expr::Add(v, Box::new(other))),
            0.5,
        ))),
        _ => Expr::Add(Box::new(Expr::PowNat(v, 3)), Box::new(other)),
    }
}

/// Text of a function file with `count` random functions of dimension `n`.
pub fn generate_file(n: usize, count: usize, seed: u64, opts: &GenOptions) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut text = format!("# synthetic functions, n = {n}, seed = {seed}\nvars: {n}\n");
    let bounds = vec!["-1,1"; n].join(";");
    text.push_str(&format!("domain: {bounds}\n"));
    let mut made = 0;
    while made < count {
        let e = random_function(&mut rng, n, opts);
        match expr::normalize(&e) {
            Ok(ne) if ne.size() <= 60 => {
                text.push_str(&format!("{e}\n"));
                made += 1;
            }
            _ => {}
        }
    }
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_headers() {
        let text = "\
# demo
x1^2 + x2^2   # inferred n = 2
vars: 3
domain: 0,1;0,1;1,2
x1*x2 + ln(x3)

x3
";
        let fs = parse_function_file("demo", text).unwrap();
        assert_eq!(fs.len(), 3);
        assert_eq!(fs[0].id, "demo:2");
        assert_eq!(fs[0].n, 2);
        assert_eq!(fs[0].domain.to_string(), "-1,1;-1,1");
        assert_eq!(fs[1].n, 3);
        assert_eq!(fs[1].domain.to_string(), "0,1;0,1;1,2");
        assert_eq!(fs[2].id, "demo:7");
    }

    #[test]
    fn file_errors() {
        assert!(parse_function_file("f", "vars: 2\ndomain: 0,1\nx1").is_err());
        assert!(parse_function_file("f", "vars: x\n").is_err());
        assert!(parse_function_file("f", "vars: 1\nx2\n").is_err());
        assert!(parse_function_file("f", "x1 +\n").is_err());
    }

    #[test]
    fn generator_is_deterministic_and_valid() {
        let opts = GenOptions::default();
        let a = generate_file(4, 12, 7, &opts);
        assert_eq!(a, generate_file(4, 12, 7, &opts));
        assert_ne!(a, generate_file(4, 12, 8, &opts));
        let fs = parse_function_file("g", &a).unwrap();
        assert_eq!(fs.len(), 12);
        for f in &fs {
            let e = expr::parse(&f.source, 4).unwrap();
            let mut seen = vec![false; 4];
            vars_used(&e, &mut seen);
            assert!(seen.iter().all(|&s| s), "{}", f.source);
        }
    }

    #[test]
    fn required_products_are_present() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let opts = GenOptions {
            depth: 3,
            require_mul: true,
        };
        for n in 2..6 {
            for _ in 0..20 {
                let e = random_function(&mut rng, n, &opts);
                let cl = expr::lower(&expr::normalize(&e).unwrap(), n).unwrap();
                assert!(cl.has_mul(), "{e}");
            }
        }
    }
}
