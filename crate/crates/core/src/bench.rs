//! Comparison harness: classification of bounds against the reference
//! pipelines, seeded random boxes, aggregate reports and the αBB
//! underestimator.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::codelist::Codelist;
use crate::corpus::FunctionSpec;
use crate::engine::Method;
use crate::error::{Error, Result};
use crate::expr;
use crate::interval::{Interval, IntervalBox};
use crate::reference::evaluate;

/// Weighted difference `(a - b) / (1 + |a + b| / 2)`.
pub fn dev(a: f64, b: f64) -> f64 {
    (a - b) / (1.0 + 0.5 * (a + b).abs())
}

/// `a > b` up to `eps`.
pub fn definitely_greater(a: f64, b: f64, eps: f64) -> bool {
    dev(a, b) > eps
}

/// `a ≈ b` up to `eps`.
pub fn approx_equal(a: f64, b: f64, eps: f64) -> bool {
    dev(a, b).abs() <= eps
}

/// Outcome class of one bound against Gershgorin (G) and Hertz–Rohn (H):
///
/// 1. worse than G; 2. equal to G, worse than H; 3. between G and H;
/// 4. equal to H; 5. better than H.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct ClassLabel(u8);

impl ClassLabel {
    pub fn new(v: u8) -> Option<Self> {
        (1..=5).contains(&v).then_some(ClassLabel(v))
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

/// Class of a lower bound `a` given the lower bounds `g ≤ h` of the
/// references.
fn classify_lower(a: f64, g: f64, h: f64, eps: f64) -> Result<ClassLabel> {
    if definitely_greater(g, h, eps) {
        return Err(Error::InconsistentInputs(format!(
            "Hertz-Rohn lower bound {h} below Gershgorin lower bound {g}"
        )));
    }
    let c = if definitely_greater(a, h, eps) {
        5
    } else if approx_equal(a, h, eps) {
        4
    } else if definitely_greater(a, g, eps) {
        3
    } else if approx_equal(a, g, eps) {
        2
    } else {
        1
    };
    Ok(ClassLabel(c))
}

/// Classes of the lower and upper endpoint of `test`.
pub fn classify(
    test: &Interval,
    g: &Interval,
    h: &Interval,
    eps: f64,
) -> Result<(ClassLabel, ClassLabel)> {
    let lower = classify_lower(test.lo(), g.lo(), h.lo(), eps)?;
    // an upper bound is better when smaller: mirror through negation
    let upper = classify_lower(-test.hi(), -g.hi(), -h.hi(), eps).map_err(|_| {
        Error::InconsistentInputs(format!(
            "Hertz-Rohn upper bound {} above Gershgorin upper bound {}",
            h.hi(),
            g.hi()
        ))
    })?;
    Ok((lower, upper))
}

/// Value at `x` of the αBB underestimator of the codelist on `b` built from
/// the lower eigenvalue bound `lambda_low`.
pub fn alpha_bb_eval(cl: &Codelist, b: &IntervalBox, lambda_low: f64, x: &[f64]) -> Result<f64> {
    b.contains_point(x)?;
    let phi = cl.eval_point(x)?;
    if lambda_low >= 0.0 {
        return Ok(phi);
    }
    let s: f64 = b
        .iter()
        .zip(x)
        .map(|(d, &xi)| (d.lo() - xi) * (d.hi() - xi))
        .sum();
    Ok(phi - 0.5 * lambda_low * s)
}

/// `count` sub-boxes of `domain`, deterministic in `seed`. Each side is the
/// sorted pair of two uniform draws; near-degenerate sides are redrawn.
pub fn random_boxes(domain: &IntervalBox, count: usize, seed: u64) -> Vec<IntervalBox> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let dims = domain
                .iter()
                .map(|d| {
                    let w = d.width();
                    loop {
                        let a = rng.gen_range(d.lo()..=d.hi());
                        let c = rng.gen_range(d.lo()..=d.hi());
                        let (lo, hi) = if a <= c { (a, c) } else { (c, a) };
                        if hi - lo >= 1e-9 * w {
                            break Interval::new(lo, hi).expect("ordered finite draw");
                        }
                    }
                })
                .collect();
            IntervalBox::new(dims).expect("domain has at least one dimension")
        })
        .collect()
}

/// How a record's two labels enter the aggregate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Counting {
    /// Lower and upper bound are separate samples.
    Independent,
    /// One sample per record, labelled with the worse of the two classes.
    Joint,
}

impl std::str::FromStr for Counting {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "independent" => Ok(Counting::Independent),
            "joint" => Ok(Counting::Joint),
            _ => Err(format!("unknown counting mode `{s}`")),
        }
    }
}

impl std::fmt::Display for Counting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Counting::Independent => "independent",
            Counting::Joint => "joint",
        })
    }
}

#[derive(Debug, Clone)]
pub struct HarnessConfig {
    pub seed: u64,
    pub boxes_per_function: usize,
    pub epsilon: f64,
    pub methods: Vec<Method>,
    pub counting: Counting,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            seed: 0,
            boxes_per_function: 100,
            epsilon: 1e-6,
            methods: Method::ALL.to_vec(),
            counting: Counting::Independent,
        }
    }
}

impl HarnessConfig {
    fn validate(&self) -> Result<()> {
        if self.boxes_per_function == 0 {
            return Err(Error::BadBox("at least one box per function is required".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InconsistentInputs(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Bounds of every configured method on one sample and the classes of the
/// two direct methods.
#[derive(Debug, Clone, PartialEq)]
pub struct Classified {
    /// Indexed like [`Method::ALL`]; `None` for methods not run.
    pub bounds: [Option<Interval>; 4],
    pub original: Option<(ClassLabel, ClassLabel)>,
    pub improved: Option<(ClassLabel, ClassLabel)>,
}

impl Classified {
    pub fn bound(&self, m: Method) -> Option<Interval> {
        self.bounds[method_index(m)]
    }

    pub fn labels(&self, m: Method) -> Option<(ClassLabel, ClassLabel)> {
        match m {
            Method::Original => self.original,
            Method::Improved => self.improved,
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Classified(Classified),
    /// The sample could not be evaluated (e.g. the function is undefined on
    /// part of the box).
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRecord {
    pub function_id: String,
    pub box_id: usize,
    pub n: usize,
    /// Whether the function's codelist contains a product line.
    pub has_mul: bool,
    pub bbox: IntervalBox,
    pub epsilon: f64,
    pub outcome: Outcome,
}

fn method_index(m: Method) -> usize {
    Method::ALL.iter().position(|&x| x == m).expect("listed method")
}

fn function_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn compare_one(cl: &Codelist, b: &IntervalBox, cfg: &HarnessConfig) -> Outcome {
    let mut bounds = [None; 4];
    for &m in &cfg.methods {
        match evaluate(cl, b, m) {
            Ok(r) => bounds[method_index(m)] = Some(r.eigen),
            Err(e) => return Outcome::Skipped(format!("{m}: {e}")),
        }
    }
    let refs = (
        bounds[method_index(Method::Gershgorin)],
        bounds[method_index(Method::HertzRohn)],
    );
    let mut labels = [None, None];
    if let (Some(g), Some(h)) = refs {
        for (slot, m) in labels.iter_mut().zip([Method::Original, Method::Improved]) {
            if let Some(t) = bounds[method_index(m)] {
                match classify(&t, &g, &h, cfg.epsilon) {
                    Ok(c) => *slot = Some(c),
                    Err(e) => return Outcome::Skipped(format!("{m}: {e}")),
                }
            }
        }
    }
    Outcome::Classified(Classified {
        bounds,
        original: labels[0],
        improved: labels[1],
    })
}

/// Evaluates every function on `boxes_per_function` seeded boxes of its
/// domain. Records come back in corpus order.
pub fn run_compare(corpus: &[FunctionSpec], cfg: &HarnessConfig) -> Result<Vec<ComparisonRecord>> {
    cfg.validate()?;
    let mut jobs = Vec::new();
    for (fi, f) in corpus.iter().enumerate() {
        let cl = expr::compile(&f.source, f.n)?;
        let boxes = random_boxes(&f.domain, cfg.boxes_per_function, function_seed(cfg.seed, fi));
        for (bi, b) in boxes.into_iter().enumerate() {
            jobs.push((fi, cl.clone(), bi, b));
        }
    }
    let records = jobs
        .into_par_iter()
        .map(|(fi, cl, bi, b)| {
            let f = &corpus[fi];
            ComparisonRecord {
                function_id: f.id.clone(),
                box_id: bi,
                n: f.n,
                has_mul: cl.has_mul(),
                epsilon: cfg.epsilon,
                outcome: compare_one(&cl, &b, cfg),
                bbox: b,
            }
        })
        .collect();
    Ok(records)
}

/// Output format of [`emit_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
    Table,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "table" => Ok(ReportFormat::Table),
            _ => Err(format!("unknown report format `{s}`")),
        }
    }
}

/// One aggregate line: class percentages of one method for one dimension.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    /// Dimension, or `all`.
    pub n: String,
    pub method: Method,
    pub samples: u64,
    pub skipped: u64,
    /// Percent of samples in classes 1 to 5, rounded to four decimals.
    pub percent: [f64; 5],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub counting: Counting,
    pub epsilon: Option<f64>,
    pub rows: Vec<ReportRow>,
}

#[derive(Default, Clone, Copy)]
struct Tally {
    counts: [u64; 5],
    skipped: u64,
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

/// Aggregates records into per-dimension class percentages for the original
/// and the improved method, plus an `all` row per method.
pub fn aggregate(records: &[ComparisonRecord], counting: Counting) -> Report {
    let methods = [Method::Original, Method::Improved];
    let mut per_n: BTreeMap<usize, [Tally; 2]> = BTreeMap::new();
    let mut all = [Tally::default(); 2];
    for r in records {
        let slot = per_n.entry(r.n).or_default();
        for (mi, &m) in methods.iter().enumerate() {
            let tallies = [&mut slot[mi], &mut all[mi]];
            match &r.outcome {
                Outcome::Skipped(_) => {
                    for t in tallies {
                        t.skipped += 1;
                    }
                }
                Outcome::Classified(c) => {
                    let Some((lo, up)) = c.labels(m) else { continue };
                    let labels: Vec<ClassLabel> = match counting {
                        Counting::Independent => vec![lo, up],
                        Counting::Joint => vec![lo.min(up)],
                    };
                    for t in tallies {
                        for l in &labels {
                            t.counts[l.get() as usize - 1] += 1;
                        }
                    }
                }
            }
        }
    }
    let row = |n: String, m: Method, t: &Tally| {
        let total: u64 = t.counts.iter().sum();
        let mut percent = [0.0; 5];
        if total > 0 {
            for (p, &c) in percent.iter_mut().zip(&t.counts) {
                *p = round4(100.0 * c as f64 / total as f64);
            }
        }
        ReportRow {
            n,
            method: m,
            samples: total,
            skipped: t.skipped,
            percent,
        }
    };
    let mut rows = Vec::new();
    for (n, ts) in &per_n {
        for (mi, &m) in methods.iter().enumerate() {
            rows.push(row(n.to_string(), m, &ts[mi]));
        }
    }
    for (mi, &m) in methods.iter().enumerate() {
        rows.push(row("all".into(), m, &all[mi]));
    }
    let epsilon = records.first().map(|r| r.epsilon);
    Report {
        counting,
        epsilon,
        rows,
    }
}

/// Renders the aggregate of `records` as CSV, JSON or an aligned text table.
pub fn emit_report(records: &[ComparisonRecord], counting: Counting, format: ReportFormat) -> String {
    let report = aggregate(records, counting);
    let eps = report
        .epsilon
        .map(|e| format!("{e:e}"))
        .unwrap_or_else(|| "none".into());
    match format {
        ReportFormat::Csv => {
            let mut s = format!("# counting={} epsilon={eps}\n", report.counting);
            s.push_str("n,method,samples,skipped,class1,class2,class3,class4,class5\n");
            for r in &report.rows {
                let _ = write!(s, "{},{},{},{}", r.n, r.method, r.samples, r.skipped);
                for p in r.percent {
                    let _ = write!(s, ",{p:.4}");
                }
                s.push('\n');
            }
            s
        }
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
            s.push('\n');
            s
        }
        ReportFormat::Table => {
            let mut s = format!(
                "counting: {}, epsilon: {eps}\n{:>4}  {:<9} {:>8} {:>8} {:>9} {:>9} {:>9} {:>9} {:>9}\n",
                report.counting, "n", "method", "samples", "skipped", "1", "2", "3", "4", "5"
            );
            for r in &report.rows {
                let _ = write!(
                    s,
                    "{:>4}  {:<9} {:>8} {:>8}",
                    r.n,
                    r.method.name(),
                    r.samples,
                    r.skipped
                );
                for p in r.percent {
                    let _ = write!(s, " {p:>8.2}%");
                }
                s.push('\n');
            }
            s
        }
    }
}

/// One CSV line per record with all bounds and labels.
pub fn records_csv(records: &[ComparisonRecord]) -> String {
    let mut s = String::from(
        "function,box_id,n,box,original_lo,original_hi,improved_lo,improved_hi,\
         gershgorin_lo,gershgorin_hi,hertzrohn_lo,hertzrohn_hi,\
         lower_original,upper_original,lower_improved,upper_improved,skipped\n",
    );
    for r in records {
        let _ = write!(s, "{},{},{},\"{}\"", r.function_id, r.box_id, r.n, r.bbox);
        match &r.outcome {
            Outcome::Classified(c) => {
                for b in c.bounds {
                    match b {
                        Some(b) => {
                            let _ = write!(s, ",{:?},{:?}", b.lo(), b.hi());
                        }
                        None => s.push_str(",,"),
                    }
                }
                for l in [c.original, c.improved] {
                    match l {
                        Some((lo, up)) => {
                            let _ = write!(s, ",{},{}", lo.get(), up.get());
                        }
                        None => s.push_str(",,"),
                    }
                }
                s.push_str(",\n");
            }
            Outcome::Skipped(why) => {
                s.push_str(&",".repeat(12));
                let _ = writeln!(s, ",\"{}\"", why.replace('"', "'"));
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::compile;
    use proptest::prelude::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    fn label(v: u8) -> ClassLabel {
        ClassLabel::new(v).unwrap()
    }

    #[test]
    fn dev_examples() {
        assert_eq!(dev(3.5, 3.5), 0.0);
        assert_eq!(dev(2.0, 0.0), 1.0);
        assert_eq!(dev(-1.0, 1.0), -2.0);
    }

    #[test]
    fn classify_examples() {
        let eps = 1e-6;
        let p = iv(2., 2.);
        assert_eq!(classify(&p, &p, &p, eps).unwrap(), (label(4), label(4)));
        assert_eq!(classify(&iv(0., 4.), &p, &p, eps).unwrap(), (label(1), label(1)));
        assert_eq!(
            classify(&p, &iv(0., 4.), &iv(1., 3.), eps).unwrap(),
            (label(5), label(5))
        );
        assert_eq!(
            classify(&iv(0., 4.), &iv(0., 4.), &iv(1., 3.), eps).unwrap(),
            (label(2), label(2))
        );
        assert_eq!(
            classify(&iv(0.5, 3.5), &iv(0., 4.), &iv(1., 3.), eps).unwrap(),
            (label(3), label(3))
        );
        assert!(matches!(
            classify(&p, &iv(1., 3.), &iv(0., 4.), eps),
            Err(Error::InconsistentInputs(_))
        ));
    }

    #[test]
    fn alpha_bb_examples() {
        let cl = compile("x1*x2", 2).unwrap();
        let b = IntervalBox::from_bounds(&[(0., 1.), (0., 1.)]).unwrap();
        assert_eq!(alpha_bb_eval(&cl, &b, -1.0, &[0.5, 0.5]).unwrap(), 0.0);
        assert_eq!(alpha_bb_eval(&cl, &b, -1.0, &[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(alpha_bb_eval(&cl, &b, 2.0, &[0.5, 0.5]).unwrap(), 0.25);
        assert_eq!(
            alpha_bb_eval(&cl, &b, -1.0, &[0.5, 1.5]),
            Err(Error::PointOutsideBox(1))
        );
    }

    #[test]
    fn boxes_are_seeded_subboxes() {
        let d = IntervalBox::from_bounds(&[(-1., 1.), (0., 5.)]).unwrap();
        assert!(random_boxes(&d, 0, 1).is_empty());
        let a = random_boxes(&d, 50, 42);
        assert_eq!(a, random_boxes(&d, 50, 42));
        assert_ne!(a, random_boxes(&d, 50, 43));
        for b in &a {
            assert!(b.subset_of(&d));
            assert!(b.iter().all(|x| x.width() > 0.0));
        }
    }

    fn record(n: usize, orig: (u8, u8), impr: (u8, u8)) -> ComparisonRecord {
        ComparisonRecord {
            function_id: "f".into(),
            box_id: 0,
            n,
            has_mul: false,
            bbox: IntervalBox::from_bounds(&vec![(0., 1.); n]).unwrap(),
            epsilon: 1e-6,
            outcome: Outcome::Classified(Classified {
                bounds: [None; 4],
                original: Some((label(orig.0), label(orig.1))),
                improved: Some((label(impr.0), label(impr.1))),
            }),
        }
    }

    #[test]
    fn report_percentages() {
        let rs = vec![record(2, (4, 4), (4, 4))];
        let rep = aggregate(&rs, Counting::Independent);
        assert_eq!(rep.rows[0].percent, [0., 0., 0., 100., 0.]);
        let rs = vec![record(3, (1, 1), (1, 5)), record(3, (5, 5), (5, 5))];
        let rep = aggregate(&rs, Counting::Independent);
        assert_eq!(rep.rows[0].percent, [50., 0., 0., 0., 50.]);
        assert_eq!(rep.rows[1].percent, [25., 0., 0., 0., 75.]);
        let rep = aggregate(&rs, Counting::Joint);
        assert_eq!(rep.rows[1].percent, [50., 0., 0., 0., 50.]);
        assert_eq!(rep.rows[1].samples, 2);
    }

    #[test]
    fn skipped_are_counted_separately() {
        let mut rs = vec![record(2, (4, 4), (4, 4))];
        let mut s = record(2, (1, 1), (1, 1));
        s.outcome = Outcome::Skipped("ln: undefined".into());
        rs.push(s);
        let rep = aggregate(&rs, Counting::Independent);
        assert_eq!(rep.rows[0].skipped, 1);
        assert_eq!(rep.rows[0].samples, 2);
        assert_eq!(rep.rows[0].percent[3], 100.0);
        assert!(records_csv(&rs).contains("\"ln: undefined\""));
    }

    #[test]
    fn csv_and_json_agree() {
        let rs = vec![
            record(2, (1, 2), (3, 4)),
            record(2, (5, 5), (4, 4)),
            record(4, (2, 3), (4, 5)),
        ];
        let csv = emit_report(&rs, Counting::Independent, ReportFormat::Csv);
        let json: serde_json::Value =
            serde_json::from_str(&emit_report(&rs, Counting::Independent, ReportFormat::Json)).unwrap();
        let rows = json["rows"].as_array().unwrap();
        let lines: Vec<&str> = csv.lines().skip(2).collect();
        assert_eq!(lines.len(), rows.len());
        for (line, row) in lines.iter().zip(rows) {
            let cells: Vec<&str> = line.split(',').collect();
            assert_eq!(cells[0], row["n"].as_str().unwrap());
            for k in 0..5 {
                let c: f64 = cells[4 + k].parse().unwrap();
                assert_eq!(c, row["percent"][k].as_f64().unwrap());
            }
        }
        assert!(emit_report(&rs, Counting::Independent, ReportFormat::Table).contains("all"));
    }

    #[test]
    fn compare_on_examples() {
        let corpus = vec![
            FunctionSpec {
                id: "sq".into(),
                source: "x1^2 + x2^2".into(),
                n: 2,
                domain: IntervalBox::from_bounds(&[(0., 1.), (0., 1.)]).unwrap(),
            },
            FunctionSpec {
                id: "ln".into(),
                source: "ln(x1) + x2".into(),
                n: 2,
                domain: IntervalBox::from_bounds(&[(-1., 1.), (0., 1.)]).unwrap(),
            },
        ];
        let cfg = HarnessConfig {
            boxes_per_function: 3,
            ..HarnessConfig::default()
        };
        let rs = run_compare(&corpus, &cfg).unwrap();
        assert_eq!(rs.len(), 6);
        for r in &rs[..3] {
            let Outcome::Classified(c) = &r.outcome else { panic!("{r:?}") };
            assert_eq!(c.improved, Some((label(4), label(4))));
            assert_eq!(c.bound(Method::Improved), Some(iv(2., 2.)));
        }
        assert!(rs[3..].iter().any(|r| matches!(r.outcome, Outcome::Skipped(_))));
        assert!(run_compare(&[], &cfg).unwrap().is_empty());
        let again = run_compare(&corpus, &cfg).unwrap();
        assert_eq!(records_csv(&rs), records_csv(&again));
    }

    fn ordered_triple() -> impl Strategy<Value = (Interval, Interval, Interval)> {
        // H ⊆ G, test arbitrary; values snapped to a coarse grid so that ties occur
        let v = || (-8i32..8).prop_map(|k| k as f64 * 0.5);
        (v(), v(), v(), v(), v(), v()).prop_map(|(a, b, c, d, e, f)| {
            let mut g = [a, b, c, d];
            g.sort_by(f64::total_cmp);
            let (lo, hi) = if e <= f { (e, f) } else { (f, e) };
            (
                Interval::new(lo, hi).unwrap(),
                Interval::new(g[0], g[3]).unwrap(),
                Interval::new(g[1], g[2]).unwrap(),
            )
        })
    }

    /// Direct reading of the class table with ≈ as equality on the grid.
    fn table_lower(a: f64, g: f64, h: f64) -> Vec<u8> {
        let mut out = vec![];
        if a < g && g <= h {
            out.push(1);
        }
        if g == a && a < h {
            out.push(2);
        }
        if g < a && a < h {
            out.push(3);
        }
        if g <= h && h == a {
            out.push(4);
        }
        if g <= h && h < a {
            out.push(5);
        }
        out
    }

    proptest! {
        #[test]
        fn classification_is_unique_and_matches_table((t, g, h) in ordered_triple()) {
            let (lo, up) = classify(&t, &g, &h, 1e-6).unwrap();
            prop_assert_eq!(table_lower(t.lo(), g.lo(), h.lo()), vec![lo.get()]);
            prop_assert_eq!(table_lower(-t.hi(), -g.hi(), -h.hi()), vec![up.get()]);
        }

        #[test]
        fn comparisons_are_consistent(a in -1e3f64..1e3, b in -1e3f64..1e3, eps in 1e-8f64..1e-2) {
            prop_assert_eq!(approx_equal(a, b, eps), approx_equal(b, a, eps));
            if (dev(a, b).abs() - eps).abs() > 1e-12 {
                prop_assert!(!(definitely_greater(a, b, eps) && definitely_greater(b, a, eps)));
                let n = [definitely_greater(a, b, eps), definitely_greater(b, a, eps), approx_equal(a, b, eps)]
                    .iter().filter(|&&x| x).count();
                prop_assert_eq!(n, 1);
            }
        }
    }
}
