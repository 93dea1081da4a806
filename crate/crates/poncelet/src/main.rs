//! Command-line front end for the closure censuses.
//!
//! Exit codes: 0 on success, 1 when a verification or census run fails its
//! own assertions, 2 on usage errors (including argument parsing).

use clap::{Parser, Subcommand, ValueEnum};
use poncelet::census::{
    char3_experiment, exhaustive_pair_census, monte_carlo_census, pencil_census,
    pencil_rows_to_csv, run_pool, tau_table, tau_to_csv, to_json, verify_worked_example,
    write_text, RunConfig,
};
use poncelet::chain::{format_trace, tangents_from, trace_chain};
use poncelet::geom::PPoint;
use poncelet::gf::{field_new, FieldCtx};
use poncelet::pencil::{enumerate_valid, sample_valid, ClassTag, DicksonClass, Pencil, PencilParam};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "poncelet",
    version,
    about = "Poncelet closure censuses for conic pairs over finite fields"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Replay the published 43-element worked example, check by check.
    VerifyExample,
    /// Exact closure census over the member pairs of parametrized pencils.
    PencilCensus {
        /// Pencil class: 3, 14, 16, 18 or 19.
        #[arg(long)]
        class: ClassTag,
        /// Field characteristic.
        #[arg(long)]
        p: u32,
        /// Extension degree (q = p^r).
        #[arg(long, default_value_t = 1)]
        r: u32,
        /// Polygon side count, 3 ..= 9.
        #[arg(long, default_value_t = 3)]
        n: u32,
        /// Comma-separated class parameters for a single pencil.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        params: Option<Vec<i64>>,
        /// Census every valid parameter tuple of the class.
        #[arg(long, conflicts_with = "params")]
        sweep: bool,
        /// Census a deterministic sample of this many valid tuples.
        #[arg(long, conflicts_with_all = ["params", "sweep"])]
        sample: Option<usize>,
        /// Seed for --sample.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Closure census over all (or sampled) ordered pairs of nonsingular
    /// conics in the plane.
    PairCensus {
        #[arg(long)]
        p: u32,
        #[arg(long, default_value_t = 1)]
        r: u32,
        #[arg(long, default_value_t = 3)]
        n: u32,
        /// Enumerate every pair (only feasible for q ≤ 9).
        #[arg(long)]
        exhaustive: bool,
        /// Monte-Carlo sample of this many ordered pairs.
        #[arg(long, conflicts_with = "exhaustive")]
        mc: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads (0 = default).
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo table of τ_n = q · (closure ratio) over several primes.
    TauTable {
        /// Comma-separated list of primes.
        #[arg(long = "p-list", value_delimiter = ',', required = true)]
        p_list: Vec<u32>,
        #[arg(long, default_value_t = 3)]
        n_min: u32,
        #[arg(long, default_value_t = 9)]
        n_max: u32,
        /// Monte-Carlo sample size per field.
        #[arg(long)]
        mc: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Trace the tangent chain between two members of the four-point pencil.
    Trace {
        #[arg(long)]
        p: u32,
        /// Only class 3 (the four-point pencil) supports tracing.
        #[arg(long, default_value_t = 3)]
        class: u32,
        /// Parameter of the outer member carrying the vertices.
        #[arg(long = "A", allow_hyphen_values = true)]
        a: i64,
        /// Parameter of the inner member touched by the edges.
        #[arg(long = "B", allow_hyphen_values = true)]
        b: i64,
        /// Starting point as x,y,z.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        start: Vec<i64>,
        /// Starting tangent branch, 1 or 2.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(usize))]
        branch: usize,
        #[arg(long, default_value_t = 30)]
        max_steps: usize,
    },
    /// Characteristic-3 closure experiment on the four-point pencil.
    Char3 {
        /// Field size, 27 or 81.
        #[arg(long)]
        q: u32,
    },
}

enum AppError {
    /// Invalid input; exits with code 2 like an argument-parse error.
    Usage(String),
    /// A verification or write failed; exits with code 1.
    Failure(String),
}

fn usage(msg: impl std::fmt::Display) -> AppError {
    AppError::Usage(msg.to_string())
}

fn failure(msg: impl std::fmt::Display) -> AppError {
    AppError::Failure(msg.to_string())
}

fn field(p: u32, r: u32) -> Result<FieldCtx, AppError> {
    field_new(p, r).map_err(usage)
}

fn check_n(n: u32) -> Result<(), AppError> {
    if (3..=9).contains(&n) {
        Ok(())
    } else {
        Err(usage(format!("n must be between 3 and 9, got {n}")))
    }
}

/// Print the report and also write it to `out` when requested.
fn emit(text: &str, out: Option<&Path>) -> Result<(), AppError> {
    if let Some(path) = out {
        write_text(path, text)
            .map_err(|e| failure(format!("cannot write {}: {e}", path.display())))?;
    }
    print!("{text}");
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(AppError::Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(AppError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.cmd {
        Command::VerifyExample => {
            let report = verify_worked_example();
            for check in &report.checks {
                println!("{} {}", if check.pass { "PASS" } else { "FAIL" }, check.name);
            }
            print!("{}", report.trace);
            if report.all_pass() {
                Ok(())
            } else {
                Err(failure("worked-example checks failed"))
            }
        }

        Command::PencilCensus {
            class,
            p,
            r,
            n,
            params,
            sweep,
            sample,
            seed,
            out,
            format,
        } => {
            let ctx = field(p, r)?;
            check_n(n)?;
            let tuples: Vec<DicksonClass> = if let Some(vals) = params {
                let fq: Vec<_> = vals.iter().map(|&v| ctx.elem(v)).collect();
                let cls = DicksonClass::from_params(class, &fq).map_err(usage)?;
                cls.validate(&ctx).map_err(usage)?;
                vec![cls]
            } else if sweep {
                enumerate_valid(&ctx, class)
            } else if let Some(cap) = sample {
                sample_valid(&ctx, class, cap, seed)
            } else if class == ClassTag::C3 {
                vec![DicksonClass::C3]
            } else {
                return Err(usage(
                    "parametrized classes need --params, --sweep or --sample",
                ));
            };
            if tuples.is_empty() {
                return Err(usage(format!(
                    "class {class} has no valid parameter tuples over F_{}",
                    ctx.q()
                )));
            }
            let rows = tuples
                .iter()
                .map(|cls| pencil_census(&ctx, cls, n))
                .collect::<Result<Vec<_>, _>>()
                .map_err(failure)?;
            let text = match format {
                Format::Csv => pencil_rows_to_csv(&rows),
                Format::Json => to_json(&rows),
            };
            emit(&text, out.as_deref())
        }

        Command::PairCensus {
            p,
            r,
            n,
            exhaustive,
            mc,
            seed,
            workers,
            out,
        } => {
            let ctx = field(p, r)?;
            check_n(n)?;
            let cfg = RunConfig {
                p,
                r,
                n_min: n,
                n_max: n,
                samples: mc.unwrap_or(0),
                seed,
                workers,
            };
            let census = if exhaustive {
                run_pool(cfg.workers, || exhaustive_pair_census(&ctx, n)).map_err(usage)?
            } else if cfg.samples > 0 {
                run_pool(cfg.workers, || {
                    monte_carlo_census(&ctx, n, cfg.samples, cfg.seed)
                })
            } else {
                return Err(usage("choose --exhaustive or --mc SAMPLES"));
            };
            emit(&to_json(&census), out.as_deref())
        }

        Command::TauTable {
            p_list,
            n_min,
            n_max,
            mc,
            seed,
            workers,
            out,
            format,
        } => {
            check_n(n_min)?;
            check_n(n_max)?;
            if n_min > n_max {
                return Err(usage("n-min must not exceed n-max"));
            }
            if mc == 0 {
                return Err(usage("--mc must be positive"));
            }
            let ctxs = p_list
                .iter()
                .map(|&p| field(p, 1))
                .collect::<Result<Vec<_>, _>>()?;
            let table = run_pool(workers, || tau_table(&ctxs, n_min, n_max, mc, seed));
            let text = match format {
                Format::Csv => tau_to_csv(&table),
                Format::Json => to_json(&table),
            };
            emit(&text, out.as_deref())
        }

        Command::Trace {
            p,
            class,
            a,
            b,
            start,
            branch,
            max_steps,
        } => {
            if class != 3 {
                return Err(usage(
                    "tracing is implemented for the four-point pencil only (--class 3)",
                ));
            }
            let ctx = field(p, 1)?;
            let ra = ctx.elem(a);
            let rb = ctx.elem(b);
            for t in [ra, rb] {
                if t.is_zero() || t == ctx.one() {
                    return Err(usage(
                        "parameters 0 and 1 give singular members; pick others",
                    ));
                }
            }
            if ra == rb {
                return Err(usage("the two members must be distinct"));
            }
            if start.len() != 3 {
                return Err(usage("--start needs exactly three coordinates x,y,z"));
            }
            let coords = [ctx.elem(start[0]), ctx.elem(start[1]), ctx.elem(start[2])];
            if coords.iter().all(|c| c.is_zero()) {
                return Err(usage("the start point must be nonzero"));
            }
            let pt = PPoint::new(&ctx, coords[0], coords[1], coords[2]);
            let pencil = Pencil::four_point(&ctx);
            let ca = pencil.member(&ctx, PencilParam::Finite(ra));
            let cb = pencil.member(&ctx, PencilParam::Finite(rb));
            if !ca.contains(&ctx, &pt) {
                return Err(usage(format!("{pt} does not lie on member {a}")));
            }
            if !(1..=2).contains(&branch) {
                return Err(usage("--branch must be 1 or 2"));
            }
            let tangents = tangents_from(&ctx, &pt, &cb);
            if !tangents.is_empty() && branch > tangents.len() {
                return Err(usage(format!(
                    "only {} starting tangent(s) exist from {pt}",
                    tangents.len()
                )));
            }
            let outcome = trace_chain(&ctx, &ca, &cb, &pt, branch - 1, max_steps);
            print!("{}", format_trace(&outcome));
            Ok(())
        }

        Command::Char3 { q } => {
            let r = match q {
                27 => 3,
                81 => 4,
                _ => return Err(usage("--q must be 27 or 81")),
            };
            let ctx = field(3, r)?;
            let report = char3_experiment(&ctx).map_err(failure)?;
            print!("{}", to_json(&report));
            Ok(())
        }
    }
}
