//! Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

mod common;

use std::collections::HashMap;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{grid, hessian_eigs, random_case, sample_point};
use hessbound::bench::{
    aggregate, alpha_bb_eval, classify, emit_report, run_compare, Counting, HarnessConfig, Outcome,
    ReportFormat,
};
use hessbound::corpus::load_corpus_dir;
use hessbound::engine::{eval_improved, eval_improved_trace, eval_original, eval_original_trace, Method};
use hessbound::expr::compile;
use hessbound::interval::{Interval, IntervalBox};
use hessbound::reference::{
    evaluate, gershgorin_bounds, hertz_rohn_bounds, hertz_rohn_vertex, sym_eigen_range,
    SymIntervalMatrix,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = std::result::Result<String, String>;
type Criterion = (&'static str, &'static str, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn iv(lo: f64, hi: f64) -> Interval {
    Interval::new(lo, hi).unwrap()
}

fn unit_box(n: usize) -> IntervalBox {
    IntervalBox::from_bounds(&vec![(0.0, 1.0); n]).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

fn ac1_sum_of_squares() -> Check {
    let cl = compile("x1^2 + x2^2", 2).map_err(|e| e.to_string())?;
    let b = unit_box(2);
    let o = eval_original(&cl, &b).unwrap().eigen;
    let a = eval_improved(&cl, &b).unwrap().eigen;
    ensure!(close(o.lo(), 0.0, 1e-12) && close(o.hi(), 4.0, 1e-12), "original {o}");
    ensure!(close(a.lo(), 2.0, 1e-12) && close(a.hi(), 2.0, 1e-12), "improved {a}");
    let reps = 1000;
    let start = Instant::now();
    for _ in 0..reps {
        std::hint::black_box(eval_original(&cl, &b).unwrap());
        std::hint::black_box(eval_improved(&cl, &b).unwrap());
    }
    let per = start.elapsed() / reps;
    ensure!(per < Duration::from_millis(1), "runtime {per:?}");
    Ok(format!("original {o}, improved {a}, {per:?} per evaluation pair"))
}

fn ac2_square_plus_x_exp_x() -> Check {
    let e = 1f64.exp();
    let cl = compile("x1^2 + x2*exp(x2)", 2).unwrap();
    let o = eval_original(&cl, &unit_box(2)).unwrap().eigen;
    let a = eval_improved(&cl, &unit_box(2)).unwrap().eigen;
    ensure!(rel_close(o.lo(), 1.0 - e, 1e-9) && rel_close(o.hi(), 3.0 * e + 2.0, 1e-9), "original {o}");
    ensure!(rel_close(a.lo(), 2.0, 1e-9) && rel_close(a.hi(), 3.0 * e, 1e-9), "improved {a}");
    ensure!(!a.contains_zero(), "improved contains 0");
    ensure!(o.contains_zero(), "original excludes 0");
    Ok(format!("original {o}, improved {a}"))
}

fn ac3_line_by_line() -> Check {
    let cl = compile("x1^2 + x2^2", 2).unwrap();
    let (_, tr) = eval_original_trace(&cl, &unit_box(2)).unwrap();
    let z = Interval::ZERO;
    let expected = [
        (iv(0., 1.), [iv(1., 1.), z], z),
        (iv(0., 1.), [z, iv(1., 1.)], z),
        (iv(0., 1.), [iv(0., 2.), z], iv(0., 2.)),
        (iv(0., 1.), [z, iv(0., 2.)], iv(0., 2.)),
        (iv(0., 2.), [iv(0., 2.), iv(0., 2.)], iv(0., 4.)),
    ];
    ensure!(tr.len() == expected.len(), "{} lines", tr.len());
    for (k, (st, (y, g, l))) in tr.iter().zip(expected).enumerate() {
        ensure!(st.y == y && st.grad == g && st.lam == l, "line {}: {:?}", k + 1, st);
    }
    let (_, tr) = eval_improved_trace(&cl, &unit_box(2)).unwrap();
    for (k, st) in tr.iter().enumerate().skip(2) {
        ensure!(st.lam == iv(2., 2.), "improved line {}: {}", k + 1, st.lam);
    }
    Ok("5 lines of value, gradient and eigenvalue bounds exact".into())
}

fn ac4_improved_inside_original() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA4);
    let pairs = 1200;
    for i in 0..pairs {
        let n = 2 + i % 5;
        let c = random_case(&mut rng, n, 4, i % 2 == 0);
        let o = eval_original(&c.cl, &c.bbox).map_err(|e| e.to_string())?.eigen;
        let a = eval_improved(&c.cl, &c.bbox).map_err(|e| e.to_string())?.eigen;
        ensure!(
            a.lo() >= o.lo() - 1e-12 && a.hi() <= o.hi() + 1e-12,
            "{} on {}: improved {a}, original {o}",
            c.source,
            c.bbox
        );
    }
    Ok(format!("{pairs} pairs, 0 failures"))
}

fn ac5_soundness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA5);
    let pairs = 200;
    let start = Instant::now();
    let mut samples = 0usize;
    for i in 0..pairs {
        let n = 1 + i % 4;
        let c = random_case(&mut rng, n, 3, i % 3 == 0);
        let mut bounds = Vec::new();
        for m in Method::ALL {
            let r = evaluate(&c.cl, &c.bbox, m).map_err(|e| format!("{m}: {e}"))?;
            bounds.push((m, r.eigen.inflate(1e-7, 1e-7)));
        }
        for x in grid(&c.bbox, 5) {
            for ev in hessian_eigs(&c.cl, &x) {
                samples += 1;
                for (m, b) in &bounds {
                    ensure!(b.contains(ev), "{m} {b} misses {ev} at {x:?} for {}", c.source);
                }
            }
        }
    }
    let t = start.elapsed();
    ensure!(t < Duration::from_secs(60), "took {t:?}");
    Ok(format!("{pairs} pairs, {samples} eigenvalues, 4 methods, {t:.2?}"))
}

fn ac6_original_contains_zero() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA6);
    let mut hits = 0;
    for i in 0..100 {
        let c = random_case(&mut rng, 2 + i % 5, 3, true);
        ensure!(c.cl.has_mul(), "{} has no product line", c.source);
        let o = eval_original(&c.cl, &c.bbox).map_err(|e| e.to_string())?.eigen;
        if o.contains_zero() {
            hits += 1;
        }
    }
    ensure!(hits == 100, "{hits}/100");
    Ok(format!("{hits}/100"))
}

fn random_interval_matrix(rng: &mut ChaCha8Rng, n: usize) -> SymIntervalMatrix {
    let mut lo = vec![0.0; n * n];
    let mut hi = vec![0.0; n * n];
    for r in 0..n {
        for c in r..n {
            let mid: f64 = rng.gen_range(-5.0..5.0);
            let rad: f64 = if rng.gen_bool(0.1) { 0.0 } else { rng.gen_range(0.0..2.0) };
            for k in [r * n + c, c * n + r] {
                lo[k] = mid - rad;
                hi[k] = mid + rad;
            }
        }
    }
    SymIntervalMatrix::new(n, lo, hi).unwrap()
}

fn ac7_hertz_rohn() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA7);
    let mut samples = 0;
    for t in 0..100 {
        let n = 1 + t % 5;
        let h = random_interval_matrix(&mut rng, n);
        let hr = hertz_rohn_bounds(&h).map_err(|e| e.to_string())?;
        let g = gershgorin_bounds(&h);
        ensure!(hr.lo() >= g.lo() && hr.hi() <= g.hi(), "matrix {t}: HR {hr} not in G {g}");
        for _ in 0..10_000 {
            let mut m = vec![0.0; n * n];
            for r in 0..n {
                for c in r..n {
                    let v = rng.gen_range(h.get(r, c).lo()..=h.get(r, c).hi());
                    m[r * n + c] = v;
                    m[c * n + r] = v;
                }
            }
            let (a, b) = sym_eigen_range(n, &m).unwrap();
            samples += 1;
            ensure!(a >= hr.lo() - 1e-9 && b <= hr.hi() + 1e-9, "matrix {t}: sample [{a}, {b}] outside {hr}");
        }
        // endpoints are eigenvalues of member vertex matrices
        let mut best = (f64::INFINITY, f64::NEG_INFINITY);
        for mask in 0..1u64 << (n - 1) {
            for sign in [-1.0, 1.0] {
                let v = hertz_rohn_vertex(&h, mask, sign);
                let member = v
                    .iter()
                    .zip(h.lo().iter().zip(h.hi()))
                    .all(|(&x, (&l, &u))| close(x, l, 1e-12) || close(x, u, 1e-12));
                ensure!(member, "matrix {t}: vertex {mask} has interior entries");
                let (a, b) = sym_eigen_range(n, &v).unwrap();
                best = (best.0.min(a), best.1.max(b));
            }
        }
        ensure!(
            close(best.0, hr.lo(), 1e-9) && close(best.1, hr.hi(), 1e-9),
            "matrix {t}: vertex range {best:?} vs {hr}"
        );
    }
    Ok(format!("100 matrices, {samples} samples, endpoints attained, HR inside G"))
}

fn ac8_op_count_scaling() -> Check {
    let count = |n: usize| -> u64 {
        let src: Vec<String> = (1..=n).map(|i| format!("x{i}^2")).collect();
        let cl = compile(&src.join(" + "), n).unwrap();
        let b = IntervalBox::from_bounds(&vec![(-1.0, 1.0); n]).unwrap();
        eval_improved(&cl, &b).unwrap().op_count
    };
    let mut parts = Vec::new();
    for n in [8, 16, 32] {
        let (a, b) = (count(n), count(2 * n));
        let r = b as f64 / a as f64;
        ensure!(r <= 2.2, "n = {n}: {a} -> {b}, ratio {r:.3}");
        parts.push(format!("{n}:{r:.3}"));
    }
    Ok(format!("ratios {}", parts.join(" ")))
}

fn ac9_harness() -> Check {
    let eps = 1e-6;
    // (test, G, H, expected lower, expected upper)
    let fixtures = [
        (iv(-3., 5.), iv(-2., 4.), iv(-1., 3.), 1, 1),
        (iv(-2., 4.), iv(-2., 4.), iv(-1., 3.), 2, 2),
        (iv(-1.5, 3.5), iv(-2., 4.), iv(-1., 3.), 3, 3),
        (iv(-1., 3.), iv(-2., 4.), iv(-1., 3.), 4, 4),
        (iv(-0.5, 2.5), iv(-2., 4.), iv(-1., 3.), 5, 5),
        (iv(-3., 2.5), iv(-2., 4.), iv(-1., 3.), 1, 5),
        (iv(-0.5, 4.), iv(-2., 4.), iv(-1., 3.), 5, 2),
        (iv(-2., 3.5), iv(-2., 4.), iv(-1., 3.), 2, 3),
        (iv(-1.5, 3.), iv(-2., 4.), iv(-1., 3.), 3, 4),
        (iv(-1. + 1e-8, 3. - 1e-8), iv(-2., 4.), iv(-1., 3.), 4, 4),
        (iv(2., 2.), iv(2., 2.), iv(2., 2.), 4, 4),
        (iv(0., 4.), iv(2., 2.), iv(2., 2.), 1, 1),
        (iv(2., 2.), iv(0., 4.), iv(1., 3.), 5, 5),
    ];
    for (k, (t, g, h, el, eu)) in fixtures.iter().enumerate() {
        let (l, u) = classify(t, g, h, eps).map_err(|e| e.to_string())?;
        ensure!((l.get(), u.get()) == (*el, *eu), "fixture {k}: got ({}, {})", l.get(), u.get());
    }
    ensure!(classify(&iv(0., 1.), &iv(0., 1.), &iv(-1., 1.), eps).is_err(), "inconsistent references accepted");

    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus/synthetic");
    let corpus: Vec<_> = load_corpus_dir(&dir)
        .map_err(|e| e.to_string())?
        .into_iter()
        .filter(|f| f.n <= 6)
        .collect();
    ensure!(!corpus.is_empty(), "bundled corpus missing");
    let cfg = HarnessConfig {
        seed: 0x5EED,
        boxes_per_function: 10,
        epsilon: eps,
        ..HarnessConfig::default()
    };
    let recs = run_compare(&corpus, &cfg).map_err(|e| e.to_string())?;
    let again = run_compare(&corpus, &cfg).map_err(|e| e.to_string())?;
    for counting in [Counting::Independent, Counting::Joint] {
        let csv = emit_report(&recs, counting, ReportFormat::Csv);
        ensure!(csv == emit_report(&again, counting, ReportFormat::Csv), "CSV differs between runs");
        for row in aggregate(&recs, counting).rows {
            let s: f64 = row.percent.iter().sum();
            ensure!(row.samples > 0 && (s - 100.0).abs() <= 0.01, "{counting} row {row:?} sums to {s}");
        }
    }

    // accuracy, soundness and the zero property as invariants over the records
    let sources: HashMap<_, _> = corpus.iter().map(|f| (f.id.as_str(), f)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0xA9);
    let mut skipped = 0;
    for r in &recs {
        let c = match &r.outcome {
            Outcome::Classified(c) => c,
            Outcome::Skipped(_) => {
                skipped += 1;
                continue;
            }
        };
        let o = c.bound(Method::Original).unwrap();
        let a = c.bound(Method::Improved).unwrap();
        ensure!(a.lo() >= o.lo() - 1e-12 && a.hi() <= o.hi() + 1e-12, "{}: {a} vs {o}", r.function_id);
        ensure!(!r.has_mul || o.contains_zero(), "{}: original {o} excludes 0", r.function_id);
        let f = sources[r.function_id.as_str()];
        let cl = compile(&f.source, f.n).unwrap();
        for _ in 0..8 {
            let x = sample_point(&mut rng, &r.bbox);
            for ev in hessian_eigs(&cl, &x) {
                for m in Method::ALL {
                    let b = c.bound(m).unwrap().inflate(1e-7, 1e-7);
                    ensure!(b.contains(ev), "{} {m}: {b} misses {ev}", r.function_id);
                }
            }
        }
    }
    Ok(format!(
        "{} fixtures, {} records ({skipped} skipped), CSV byte-identical",
        fixtures.len(),
        recs.len()
    ))
}

fn ac10_alpha_bb() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA10);
    let mut triples = 0;
    let mut tries = 0;
    while triples < 50 {
        tries += 1;
        ensure!(tries < 10_000, "could not find 50 nonconvex cases");
        let c = random_case(&mut rng, 1 + tries % 4, 3, tries % 2 == 0);
        let lam = eval_improved(&c.cl, &c.bbox).map_err(|e| e.to_string())?.eigen.lo();
        if lam >= 0.0 {
            continue;
        }
        triples += 1;
        for _ in 0..1000 {
            let x = sample_point(&mut rng, &c.bbox);
            let l = alpha_bb_eval(&c.cl, &c.bbox, lam, &x).map_err(|e| e.to_string())?;
            let f = c.cl.eval_point(&x).unwrap();
            ensure!(l <= f + 1e-10, "{}: {l} > {f} at {x:?}", c.source);
        }
        for v in c.bbox.vertices() {
            let l = alpha_bb_eval(&c.cl, &c.bbox, lam, &v).unwrap();
            let f = c.cl.eval_point(&v).unwrap();
            ensure!(close(l, f, 1e-10), "{}: vertex {v:?} gives {l} vs {f}", c.source);
        }
    }
    Ok(format!("{triples} triples, 1000 points each, all vertices exact"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("AC1", "sum of squares goldens and runtime", ac1_sum_of_squares),
        ("AC2", "square plus x exp x goldens", ac2_square_plus_x_exp_x),
        ("AC3", "line-by-line extended codelist values", ac3_line_by_line),
        ("AC4", "improved bounds inside original bounds", ac4_improved_inside_original),
        ("AC5", "grid-sampled soundness of all methods", ac5_soundness),
        ("AC6", "original bound contains zero with products", ac6_original_contains_zero),
        ("AC7", "Hertz-Rohn tightness and Gershgorin containment", ac7_hertz_rohn),
        ("AC8", "operation count scaling of the improved method", ac8_op_count_scaling),
        ("AC9", "classification, report and corpus invariants", ac9_harness),
        ("AC10", "alphaBB underestimator", ac10_alpha_bb),
    ];
    let mut failed = 0;
    for (id, name, check) in criteria {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("[PASS] {id} {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {id} {name}: {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
