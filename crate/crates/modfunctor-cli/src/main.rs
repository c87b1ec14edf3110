//! Batch interface to the modfunctor verification engine.
//!
//! Exit codes: 0 all checks passed, 1 a check failed, 2 input or usage
//! error.

use std::process::ExitCode;

use modfunctor::blocks::{BlockEvaluator, BlockQuery};
use modfunctor::checks::{run_check_suite, CheckOptions};
use modfunctor::correlators::{check_cardy_invariant, dim_cardy, DoubledQuery};
use modfunctor::graph::parse_genus_graph;
use modfunctor::modular::{parse_modular_datum, verlinde_coefficients, Label, Rational};
use modfunctor::sewing::{parse_graded_modules, verify_qdq_identity, SplitParameters};
use modfunctor::verlinde::FusionRing;
use modfunctor::{Error, ModularDatum, Tolerances};

const USAGE: &str = "\
modfunctor - verification engine for modular fusion data

usage: modfunctor <command> [args] [flags]

commands:
  check <datum>                      run the full check suite (human-readable)
  report <datum>                     run the full check suite (JSON on stdout)
  dim <datum> --genus <g> [name...]  dimension for genus g and labeled points
  graph-dim <datum> <graph>          dimension attached to a stable-graph file
  verlinde <datum>                   recompute fusion from S and diagonalize
  cardy <datum> --genus <g> --insertions <n>
                                     doubled correlator-space dimension
  sewing <modules>                   verify the sewing identity per module

flags:
  --tol <float>       axiom tolerance (default 1e-9, env MODFUNCTOR_TOL)
  --int-tol <float>   integer-recognition tolerance (default 1e-6)
  --max-genus <g>     check battery genus bound (default 3)
  --max-legs <n>      check battery leg bound (default 4)
  --jobs <k>          worker threads for labeling enumeration (default 1)
  --truncation <n>    sewing truncation degree (default 6)
  --splits <k>        number of sewing split samples (default 10)
";

struct Args {
    command: String,
    positional: Vec<String>,
    tol: Tolerances,
    max_genus: u32,
    max_legs: usize,
    jobs: usize,
    genus: Option<u32>,
    insertions: Option<usize>,
    truncation: usize,
    splits: usize,
}

fn parse_args(argv: &[String]) -> Result<Args, String> {
    let mut args = Args {
        command: String::new(),
        positional: Vec::new(),
        tol: Tolerances::default(),
        max_genus: 3,
        max_legs: 4,
        jobs: 1,
        genus: None,
        insertions: None,
        truncation: 6,
        splits: 10,
    };
    if let Ok(t) = std::env::var("MODFUNCTOR_TOL") {
        args.tol.axiom = t
            .parse()
            .map_err(|_| format!("bad MODFUNCTOR_TOL value `{}`", t))?;
    }
    let mut it = argv.iter();
    args.command = it.next().cloned().ok_or_else(|| USAGE.to_string())?;
    while let Some(arg) = it.next() {
        let mut value = |name: &str| -> Result<&String, String> {
            it.next().ok_or_else(|| format!("{} needs a value", name))
        };
        match arg.as_str() {
            "--tol" => args.tol.axiom = parse_flag(value("--tol")?, "--tol")?,
            "--int-tol" => args.tol.integer = parse_flag(value("--int-tol")?, "--int-tol")?,
            "--max-genus" => args.max_genus = parse_flag(value("--max-genus")?, "--max-genus")?,
            "--max-legs" => args.max_legs = parse_flag(value("--max-legs")?, "--max-legs")?,
            "--jobs" => args.jobs = parse_flag(value("--jobs")?, "--jobs")?,
            "--genus" => args.genus = Some(parse_flag(value("--genus")?, "--genus")?),
            "--insertions" => {
                args.insertions = Some(parse_flag(value("--insertions")?, "--insertions")?)
            }
            "--truncation" => args.truncation = parse_flag(value("--truncation")?, "--truncation")?,
            "--splits" => args.splits = parse_flag(value("--splits")?, "--splits")?,
            flag if flag.starts_with("--") => return Err(format!("unknown flag `{}`", flag)),
            other => args.positional.push(other.to_string()),
        }
    }
    Ok(args)
}

fn parse_flag<T: std::str::FromStr>(text: &str, name: &str) -> Result<T, String> {
    text.parse()
        .map_err(|_| format!("bad value `{}` for {}", text, name))
}

fn read_file(path: &str) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {}", path, e))
}

fn load_datum(path: &str, tol: &Tolerances) -> Result<ModularDatum, String> {
    let text = read_file(path)?;
    parse_modular_datum(&text, tol).map_err(|e| format!("{}: {}", path, e))
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let args = match parse_args(&argv) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("{}", msg);
            return ExitCode::from(2);
        }
    };
    match run(&args) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {}", msg);
            ExitCode::from(2)
        }
    }
}

fn run(args: &Args) -> Result<ExitCode, String> {
    match args.command.as_str() {
        "check" | "report" => {
            let path = one_positional(args, "datum file")?;
            let opts = CheckOptions {
                tol: args.tol,
                max_genus: args.max_genus,
                max_legs: args.max_legs,
                jobs: args.jobs,
            };
            let report = run_check_suite(&read_file(path)?, &opts)
                .map_err(|e| format!("{}: {}", path, e))?;
            if args.command == "report" {
                print!("{}", report.to_json());
            } else {
                print!("{}", report.render_text());
            }
            Ok(if report.all_pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        "dim" => {
            let (path, names) = args
                .positional
                .split_first()
                .ok_or("dim needs a datum file")?;
            let genus = args.genus.ok_or("dim needs --genus")?;
            let datum = load_datum(path, &args.tol)?;
            let labels = resolve_labels(&datum, names)?;
            let ev = BlockEvaluator::with_jobs(&datum, args.tol, args.jobs);
            let value = ev.dim_smooth(genus, &labels).map_err(|e| e.to_string())?;
            println!("{}", value);
            Ok(ExitCode::SUCCESS)
        }
        "graph-dim" => {
            if args.positional.len() != 2 {
                return Err("graph-dim needs a datum file and a graph file".into());
            }
            let datum = load_datum(&args.positional[0], &args.tol)?;
            let graph_text = read_file(&args.positional[1])?;
            let shape = parse_genus_graph(&graph_text)
                .map_err(|e| format!("{}: {}", args.positional[1], e))?;
            let leg_names: Vec<String> = shape
                .graph
                .legs()
                .iter()
                .map(|&h| shape.graph.leg_name(h).unwrap_or("").to_string())
                .collect();
            let leg_labels = resolve_labels(&datum, &leg_names)?;
            let ev = BlockEvaluator::with_jobs(&datum, args.tol, args.jobs);
            let r = ev
                .dim_graph(&BlockQuery { shape, leg_labels })
                .map_err(|e| e.to_string())?;
            println!("{}", r.value);
            Ok(ExitCode::SUCCESS)
        }
        "verlinde" => {
            let path = one_positional(args, "datum file")?;
            let datum = load_datum(path, &args.tol)?;
            match verlinde_coefficients(&datum, &args.tol) {
                Ok(tensor) => {
                    let n = datum.rank();
                    for i in 0..n {
                        for j in 0..n {
                            for k in 0..n {
                                let m = tensor[(i * n + j) * n + k];
                                if m > 0 {
                                    println!("N {} {} {} {}", i, j, k, m);
                                }
                            }
                        }
                    }
                    let ring = FusionRing::new(&datum).map_err(|e| e.to_string())?;
                    let diag = ring.diagonalize(&args.tol).map_err(|e| e.to_string())?;
                    println!(
                        "diagonalization residual {:.3e}",
                        diag.max_offdiag.max(diag.max_eigen_gap)
                    );
                    Ok(ExitCode::SUCCESS)
                }
                Err(e @ (Error::FusionMismatch { .. } | Error::NonIntegralCoefficient { .. })) => {
                    eprintln!("{}", e);
                    Ok(ExitCode::from(1))
                }
                Err(e) => Err(e.to_string()),
            }
        }
        "cardy" => {
            let path = one_positional(args, "datum file")?;
            let datum = load_datum(path, &args.tol)?;
            let q = DoubledQuery {
                genus: args.genus.ok_or("cardy needs --genus")?,
                insertions: args.insertions.ok_or("cardy needs --insertions")?,
            };
            let ev = BlockEvaluator::with_jobs(&datum, args.tol, args.jobs);
            let value = dim_cardy(&ev, &q).map_err(|e| e.to_string())?;
            let entry = check_cardy_invariant(&datum, &args.tol);
            println!("{}", value);
            println!("{}", entry.detail);
            Ok(if entry.pass && value >= 1 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        "sewing" => {
            let path = one_positional(args, "graded-module file")?;
            let modules =
                parse_graded_modules(&read_file(path)?).map_err(|e| format!("{}: {}", path, e))?;
            if modules.is_empty() {
                return Err(format!("{}: no modules declared", path));
            }
            let mut rng = modfunctor::rng::Rng::new(0x7365_7769);
            for m in &modules {
                let truncation = args.truncation.min(m.max_degree());
                let mut splits = vec![SplitParameters::halves()];
                while splits.len() < args.splits.max(1) {
                    let p = rng.below(21) as i64 - 10;
                    let q = 1 + rng.below(9) as i64;
                    let ap = Rational::new(p, q);
                    splits.push(SplitParameters::new(ap, Rational::from_integer(1) - ap).unwrap());
                }
                for split in &splits {
                    if let Err(e) = verify_qdq_identity(m, truncation, split) {
                        eprintln!("module {}: {}", m.label.0, e);
                        return Ok(ExitCode::from(1));
                    }
                }
                println!(
                    "module {}: identity holds exactly (truncation {}, {} splits)",
                    m.label.0,
                    truncation,
                    splits.len()
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        other => Err(format!("unknown command `{}`\n\n{}", other, USAGE)),
    }
}

fn one_positional<'a>(args: &'a Args, what: &str) -> Result<&'a String, String> {
    if args.positional.len() != 1 {
        return Err(format!("{} expects exactly one {}", args.command, what));
    }
    Ok(&args.positional[0])
}

fn resolve_labels(datum: &ModularDatum, names: &[String]) -> Result<Vec<Label>, String> {
    names
        .iter()
        .map(|name| {
            datum
                .label_by_name(name)
                .map_err(|e| format!("{} (datum labels: {:?})", e, label_names(datum)))
        })
        .collect()
}

fn label_names(d: &ModularDatum) -> Vec<String> {
    d.labels().map(|l| d.name(l).to_string()).collect()
}
