use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hessbound::bench::{self, Counting, HarnessConfig, ReportFormat};
use hessbound::codelist::Codelist;
use hessbound::corpus::{self, GenOptions};
use hessbound::engine::{EvalResult, Method};
use hessbound::error::{Error, Result};
use hessbound::expr;
use hessbound::interval::{parse_point, IntervalBox};
use hessbound::reference::evaluate;

#[derive(Parser)]
#[command(name = "hessbound", version, about = "Guaranteed Hessian eigenvalue bounds on boxes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bound the Hessian spectrum of a function on a box.
    Eval {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value = "improved")]
        method: Method,
        /// Print the result as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Compare all methods on a corpus of functions and random boxes.
    Compare {
        /// Directory of function files (`*.txt`).
        #[arg(long)]
        corpus: PathBuf,
        /// Random boxes per function.
        #[arg(long, default_value_t = 100)]
        boxes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Tolerance of the weighted comparison.
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        /// Report file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "csv")]
        format: ReportFormat,
        #[arg(long, default_value = "independent")]
        counting: Counting,
        /// Also write one CSV line per (function, box) sample.
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// Evaluate the αBB underestimator at a point.
    Underestimate {
        #[command(flatten)]
        target: Target,
        /// Point inside the box, `x1,…,xn`.
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        /// Method supplying the lower eigenvalue bound.
        #[arg(long, default_value = "improved")]
        method: Method,
    },
    /// Exit with 0 and print `convex` when the improved lower bound is nonnegative.
    Convexity {
        #[command(flatten)]
        target: Target,
    },
    /// Print the codelist of a function with its index sets.
    Codelist {
        #[command(flatten)]
        source: Source,
    },
    /// Write a seeded synthetic corpus, one file per dimension.
    GenCorpus {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10)]
        per_dim: usize,
        #[arg(long, default_value_t = 2)]
        min_n: usize,
        #[arg(long, default_value_t = 10)]
        max_n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct Source {
    /// Function file; the first expression is used.
    #[arg(long, conflicts_with = "inline", required_unless_present = "inline")]
    expr: Option<PathBuf>,
    /// Expression text.
    #[arg(long, allow_hyphen_values = true)]
    inline: Option<String>,
    /// Number of variables; inferred from the expression when omitted.
    #[arg(long)]
    vars: Option<usize>,
}

#[derive(Args)]
struct Target {
    #[command(flatten)]
    source: Source,
    /// Box `l1,u1;…;ln,un`; defaults to the domain of the function file.
    #[arg(long = "box", allow_hyphen_values = true)]
    bbox: Option<String>,
}

/// Source text, dimension and default domain of the selected function.
fn load_source(s: &Source) -> Result<(String, usize, Option<IntervalBox>)> {
    match (&s.expr, &s.inline) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            let text = match s.vars {
                Some(n) => format!("vars: {n}\n{text}"),
                None => text,
            };
            let f = corpus::parse_function_file("expr", &text)?
                .into_iter()
                .next()
                .ok_or_else(|| Error::Io(format!("{}: no expression", path.display())))?;
            Ok((f.source, f.n, Some(f.domain)))
        }
        (None, Some(src)) => {
            let n = match s.vars {
                Some(n) => n,
                None => expr::parse(src, usize::MAX)?.max_var().max(1),
            };
            Ok((src.clone(), n, None))
        }
        (None, None) => Err(Error::Io("one of --expr or --inline is required".into())),
    }
}

fn load_target(t: &Target) -> Result<(Codelist, IntervalBox)> {
    let (src, n, domain) = load_source(&t.source)?;
    let cl = expr::compile(&src, n)?;
    let b = match (&t.bbox, domain) {
        (Some(s), _) => s.parse()?,
        (None, Some(d)) => d,
        (None, None) => return Err(Error::BadBox("--box is required with --inline".into())),
    };
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    Ok((cl, b))
}

fn print_result(r: &EvalResult, json: bool) {
    if json {
        println!("{}", serde_json::to_string(r).expect("result serializes"));
        return;
    }
    println!("method:   {}", r.method);
    println!("value:    {}", r.value);
    let grad: Vec<String> = r.gradient.iter().map(|g| g.to_string()).collect();
    println!("gradient: {}", grad.join(" "));
    println!("eigen:    {}", r.eigen);
    println!("opCount:  {}", r.op_count);
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Eval {
            target,
            method,
            json,
        } => {
            let (cl, b) = load_target(&target)?;
            print_result(&evaluate(&cl, &b, method)?, json);
        }
        Command::Compare {
            corpus,
            boxes,
            seed,
            eps,
            out,
            format,
            counting,
            records,
        } => {
            let fns = corpus::load_corpus_dir(&corpus)?;
            let cfg = HarnessConfig {
                seed,
                boxes_per_function: boxes,
                epsilon: eps,
                methods: Method::ALL.to_vec(),
                counting,
            };
            let recs = bench::run_compare(&fns, &cfg)?;
            write_out(out.as_deref(), &bench::emit_report(&recs, counting, format))?;
            if let Some(p) = records {
                write_out(Some(&p), &bench::records_csv(&recs))?;
            }
        }
        Command::Underestimate { target, at, method } => {
            let (cl, b) = load_target(&target)?;
            let x = parse_point(&at)?;
            if x.len() != b.len() {
                return Err(Error::DimensionMismatch {
                    expected: b.len(),
                    got: x.len(),
                });
            }
            let lam = evaluate(&cl, &b, method)?.eigen.lo();
            println!("{}", bench::alpha_bb_eval(&cl, &b, lam, &x)?);
        }
        Command::Convexity { target } => {
            let (cl, b) = load_target(&target)?;
            let r = evaluate(&cl, &b, Method::Improved)?;
            if r.eigen.lo() >= 0.0 {
                println!("convex");
            } else {
                println!("not certified: lower eigenvalue bound {}", r.eigen.lo());
                return Ok(ExitCode::from(1));
            }
        }
        Command::Codelist { source } => {
            let (src, n, _) = load_source(&source)?;
            print!("{}", expr::compile(&src, n)?.dump());
        }
        Command::GenCorpus {
            out,
            per_dim,
            min_n,
            max_n,
            seed,
        } => {
            if min_n == 0 || min_n > max_n {
                return Err(Error::Io(format!("bad dimension range {min_n}..={max_n}")));
            }
            fs::create_dir_all(&out).map_err(|e| Error::Io(format!("{}: {e}", out.display())))?;
            for n in min_n..=max_n {
                let text = corpus::generate_file(n, per_dim, seed.wrapping_add(n as u64), &GenOptions::default());
                write_out(Some(&out.join(format!("n{n:02}.txt"))), &text)?;
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
