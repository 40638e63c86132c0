//! Command-line frontend; every command prints one JSON report on stdout.

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::cheeger::{self, CertifyOptions};
use crate::error::{Error, Result};
use crate::io::{self, Format, InstanceFile};
use crate::polytope::{cover_base_polytope, wolfe_min_norm, PolytopeHandle, WolfeOptions};
use crate::sdp::{self, ApproxOptions, PointSource, SdpMode};
use crate::set;
use crate::spectral::{self, DiffusionOptions, LaplacianOperator};

#[derive(Parser, Debug)]
#[command(name = "sublap", version, about = "Spectral tools for submodular transformations")]
pub struct Cli {
    /// Input format; inferred from the file extension when omitted.
    #[arg(long, global = true, value_parser = parse_format)]
    pub format: Option<Format>,

    /// Cap on worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Include wall-clock timings in the report (makes output non-reproducible).
    #[arg(long, global = true)]
    pub timings: bool,

    #[command(subcommand)]
    pub command: Command,
}

fn parse_format(s: &str) -> std::result::Result<Format, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectralMode {
    Diffusion,
    SdpSym,
    SdpGen,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Estimate the smallest non-trivial eigenvalue.
    Spectral {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = SpectralMode::Diffusion)]
        mode: SpectralMode,
        /// Cover radius for the relaxations; extreme points are used when omitted.
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, env = "SUBLAP_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        restarts: usize,
        #[arg(long)]
        emit_vector: bool,
        /// Write the relaxation instance to this file.
        #[arg(long)]
        dump_instance: Option<PathBuf>,
        /// Write the solved relaxation to this file.
        #[arg(long)]
        dump_solution: Option<PathBuf>,
    },
    /// Conductance of a given set, or the exact minimum by enumeration.
    Conductance {
        input: PathBuf,
        /// Comma-separated 1-based vertices.
        #[arg(long, conflicts_with = "brute", required_unless_present = "brute")]
        set: Option<String>,
        #[arg(long)]
        brute: bool,
    },
    /// Check both sides of the Cheeger inequality; exit code 0 iff it holds.
    Certify {
        input: PathBuf,
        #[arg(long, env = "SUBLAP_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        restarts: usize,
    },
    /// Cover the base polytope of one function.
    Cover {
        input: PathBuf,
        /// 1-based function index.
        #[arg(long, default_value_t = 1)]
        function_index: usize,
        #[arg(long)]
        eps: f64,
        /// Cover file to write; points are embedded in the report when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Minimum-norm point of one function's base polytope.
    Minnorm {
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        function_index: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
}

/// A finished command: the JSON report and the process exit code.
pub struct Outcome {
    pub report: Value,
    pub exit_code: i32,
}

fn instance_summary(file: &InstanceFile) -> Value {
    let t = &file.transformation;
    json!({
        "format": file.format.name(),
        "n": t.n(),
        "m": t.m(),
        "degrees": t.degrees(),
    })
}

fn function_at(file: &InstanceFile, index: usize) -> Result<&crate::oracle::SubmodularOracle> {
    let m = file.transformation.m();
    if index == 0 || index > m {
        return Err(Error::input(format!("function index {index} outside 1..={m}")));
    }
    Ok(file.transformation.function(index - 1))
}

fn parse_set(text: &str, n: usize) -> Result<set::Mask> {
    let mut mask = 0;
    for tok in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let v: usize = tok
            .parse()
            .map_err(|_| Error::input(format!("'{tok}' is not a vertex number")))?;
        if v == 0 || v > n {
            return Err(Error::input(format!("vertex {v} outside 1..={n}")));
        }
        mask |= 1 << (v - 1);
    }
    Ok(mask)
}

fn one_based(support: &[usize]) -> Vec<usize> {
    support.iter().map(|v| v + 1).collect()
}

fn write_file(path: &PathBuf, write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<()> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}

fn run_spectral(
    file: &InstanceFile,
    mode: SpectralMode,
    eps: Option<f64>,
    seed: u64,
    restarts: usize,
    emit_vector: bool,
    dumps: (&Option<PathBuf>, &Option<PathBuf>),
) -> Result<Value> {
    let t = &file.transformation;
    if let Some(e) = eps {
        if !(e > 0.0 && e.is_finite()) {
            return Err(Error::input("--eps must be positive"));
        }
    }
    if mode == SpectralMode::Diffusion {
        if t.m() == 0 {
            return Ok(json!({ "lambda": 0.0, "converged": true, "residual": 0.0 }));
        }
        let op = LaplacianOperator::normalized(t)?;
        let r = spectral::reference_lambda(&op, restarts, seed, DiffusionOptions::default())?;
        let mut out = json!({
            "lambda": r.lambda,
            "residual": r.best.residual,
            "converged": r.best.converged,
            "iterations": r.best.iterations,
            "step": r.best.step,
            "per_start": r.per_start,
        });
        if emit_vector {
            out["vector"] = json!(r.best.vector);
        }
        return Ok(out);
    }
    let sdp_mode = if mode == SpectralMode::SdpSym {
        SdpMode::Symmetric
    } else {
        SdpMode::General
    };
    if sdp_mode == SdpMode::Symmetric && !t.all_functions_symmetric() {
        return Err(Error::input(
            "--mode sdp-sym needs every function to be symmetric; use --mode sdp-gen",
        ));
    }
    let source = match eps {
        Some(eps) => PointSource::Cover { eps },
        None => PointSource::Vertices,
    };
    let mut opts = ApproxOptions::new(seed, source);
    if let Some(e) = eps {
        opts.rounding.eps = e;
    }
    let r = sdp::approx_eigenvalue(t, sdp_mode, &opts)?;
    if let Some(path) = dumps.0 {
        write_file(path, |b| sdp::write_instance(&r.instance, b))?;
    }
    if let Some(path) = dumps.1 {
        write_file(path, |b| sdp::write_solution(&r.instance, &r.solution, b))?;
    }
    let mut out = json!({
        "lambda_hat": r.lambda_hat,
        "sdp_value": r.sdp_value,
        "sdp_value_unscaled": r.sdp_value_unscaled,
        "scale_factor": r.scale_factor,
        "b_squared": r.b_squared,
        "b_squared_exact": r.b_squared_exact,
        "points": r.instance.num_constraints(),
        "source": r.instance.source,
        "solver": {
            "converged": r.solution.converged,
            "iterations": r.solution.iterations,
            "outer_iterations": r.solution.outer_iterations,
            "residuals": r.solution.residuals,
        },
        "rounding_draw": r.draw,
    });
    if sdp_mode == SdpMode::General {
        let splits = r.solution.split_sets(&r.instance);
        out["split_bound_holds"] = json!(splits.iter().all(|s| s.bound_holds(1e-9)));
    }
    if emit_vector {
        out["vector"] = json!(r.vector);
    }
    Ok(out)
}

fn run_command(cli: &Cli) -> Result<(Value, Value, i32)> {
    let load = |p: &PathBuf| io::load(p, cli.format);
    match &cli.command {
        Command::Spectral {
            input,
            mode,
            eps,
            seed,
            restarts,
            emit_vector,
            dump_instance,
            dump_solution,
        } => {
            let file = load(input)?;
            let results = run_spectral(
                &file,
                *mode,
                *eps,
                *seed,
                *restarts,
                *emit_vector,
                (dump_instance, dump_solution),
            )?;
            let echo = json!({
                "name": "spectral", "input": input, "mode": mode, "eps": eps,
                "seed": seed, "restarts": restarts,
            });
            Ok((echo, json!({ "instance": instance_summary(&file), "results": results }), 0))
        }
        Command::Conductance { input, set, brute } => {
            let file = load(input)?;
            let t = &file.transformation;
            let report = if *brute {
                cheeger::brute_force_phi(t)?
            } else {
                let mask = parse_set(set.as_deref().unwrap_or(""), t.n())?;
                cheeger::conductance_of_set(t, mask)?
            };
            let echo = json!({ "name": "conductance", "input": input, "set": set, "brute": brute });
            Ok((echo, json!({ "instance": instance_summary(&file), "results": report }), 0))
        }
        Command::Certify {
            input,
            seed,
            restarts,
        } => {
            let file = load(input)?;
            let opts = CertifyOptions {
                seed: *seed,
                restarts: *restarts,
                ..CertifyOptions::default()
            };
            let cert = cheeger::certify(&file.transformation, &opts)?;
            let code = if cert.holds { 0 } else { 1 };
            let echo = json!({ "name": "certify", "input": input, "seed": seed, "restarts": restarts });
            Ok((echo, json!({ "instance": instance_summary(&file), "results": cert }), code))
        }
        Command::Cover {
            input,
            function_index,
            eps,
            output,
        } => {
            let file = load(input)?;
            let f = function_at(&file, *function_index)?;
            let cover = cover_base_polytope(f, *eps)?;
            let mut results = json!({
                "function_index": function_index,
                "support": one_based(f.support()),
                "size": cover.len(),
                "eps_abs": cover.eps_abs,
                "provenance": cover.provenance,
            });
            match output {
                Some(path) => {
                    write_file(path, |b| cover.write_to(b))?;
                    results["output"] = json!(path);
                }
                None => results["points"] = json!(cover.points),
            }
            let echo = json!({
                "name": "cover", "input": input, "function_index": function_index, "eps": eps,
            });
            Ok((echo, json!({ "instance": instance_summary(&file), "results": results }), 0))
        }
        Command::Minnorm {
            input,
            function_index,
            tol,
        } => {
            let file = load(input)?;
            let f = function_at(&file, *function_index)?;
            if !(*tol > 0.0) {
                return Err(Error::input("--tol must be positive"));
            }
            let r = wolfe_min_norm(
                &PolytopeHandle::new(f),
                WolfeOptions {
                    eps: *tol,
                    ..WolfeOptions::default()
                },
            )?;
            let results = json!({
                "function_index": function_index,
                "support": one_based(f.support()),
                "point": r.point,
                "norm": r.norm_sq.sqrt(),
                "norm_sq": r.norm_sq,
                "gap": r.gap,
                "iterations": r.iterations,
                "corral": r.corral,
            });
            let echo = json!({
                "name": "minnorm", "input": input, "function_index": function_index, "tol": tol,
            });
            Ok((echo, json!({ "instance": instance_summary(&file), "results": results }), 0))
        }
    }
}

/// Run a parsed command line.
pub fn execute(cli: &Cli) -> Outcome {
    if let Some(k) = cli.threads {
        // Fails only if the global pool already exists, in which case it is kept.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build_global();
    }
    let start = Instant::now();
    let seed = match &cli.command {
        Command::Spectral { seed, .. } | Command::Certify { seed, .. } => Some(*seed),
        _ => None,
    };
    let (mut report, code) = match run_command(cli) {
        Ok((echo, body, code)) => {
            let mut r = body;
            r["command"] = echo;
            (r, code)
        }
        Err(e) => (
            json!({ "error": { "message": e.to_string(), "exit_code": e.exit_code() } }),
            e.exit_code(),
        ),
    };
    report["seed"] = json!(seed);
    report["version"] = json!(env!("CARGO_PKG_VERSION"));
    if cli.timings {
        report["timings"] = json!({ "total_ms": start.elapsed().as_secs_f64() * 1e3 });
    }
    Outcome {
        report,
        exit_code: code,
    }
}

/// Parse arguments, run, and return the text to print with the exit code.
pub fn run<I, T>(args: I) -> (String, i32)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => {
            let out = execute(&cli);
            let text = serde_json::to_string_pretty(&out.report).expect("report serializes");
            (text, out.exit_code)
        }
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            (e.render().to_string(), code)
        }
    }
}
