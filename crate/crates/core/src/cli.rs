//! Command-line front end.
//!
//! Exit codes: 0 when everything passes, 2 when a check flags a violation
//! (a JSON witness goes to stderr), 1 for usage or input errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::covering::{
    audit_selection, greedy_half_selection, scattered_selection, scattered_violations,
    verify_covering_claim, SelectionAudit,
};
use crate::error::{config, Result};
use crate::grid::{GridFunction, Rect, RectBasis};
use crate::maximal::{brute_force_maximal, evaluate, iterated_weight, MaximalRequest, Operator};
use crate::profiles::Profile;
use crate::verify::{suite_sweep, RunConfig, Theorem};
use crate::weights::{
    a1_constant, ap_constant, condition_a_estimate_with, multilinear_ap_constant, weight_catalog,
    ConditionASampler,
};
use crate::young::YoungFunction;

/// Environment variable read when `--jobs` is absent.
pub const JOBS_ENV: &str = "STRONGMAX_JOBS";

#[derive(Parser, Debug)]
#[command(name = "strongmax", version, about = "Strong maximal functions on finite grids")]
struct Cli {
    /// Worker threads; falls back to STRONGMAX_JOBS, then to all cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Apply one maximal operator to grid files.
    Compute(ComputeArgs),
    /// Run verification suites.
    Verify(VerifyArgs),
    /// Weight constants and generators.
    #[command(subcommand)]
    Weights(WeightsCommand),
    /// Greedy rectangle selection.
    Covering(CoveringArgs),
    /// Time the fast engine against the brute-force oracle.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct ComputeArgs {
    /// hl | strong | complexity:c | multi | multi-orlicz | iterated-weight
    #[arg(long)]
    op: String,
    /// Input grids (.json or 2D .csv); repeat for multilinear operators.
    #[arg(long = "in", required = true)]
    inputs: Vec<PathBuf>,
    /// all | dyadic | complexity:c | cubes
    #[arg(long)]
    basis: Option<RectBasis>,
    /// Young functions for multi-orlicz, one per input.
    #[arg(long, value_delimiter = ',')]
    young: Vec<YoungFunction>,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    theorem: Option<Theorem>,
    /// `default` or a config file.
    #[arg(long, default_value = "default")]
    suite: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum WeightsCommand {
    /// A_p constant over a basis.
    Ap {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value = "all")]
        basis: RectBasis,
    },
    /// A_1 constant over a basis.
    A1 {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "all")]
        basis: RectBasis,
    },
    /// Multilinear A_p constant; repeat --in and --p.
    MultiAp {
        #[arg(long = "in", required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long = "p", required = true)]
        ps: Vec<f64>,
        #[arg(long, default_value = "all")]
        basis: RectBasis,
    },
    /// Sampled lower bound for the Condition (A) constant.
    CondA {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 200)]
        sets: usize,
        #[arg(long, default_value_t = 5)]
        max_union: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write a catalog weight as grid JSON.
    Gen {
        #[arg(long)]
        dims: String,
        #[arg(long)]
        kind: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct CoveringArgs {
    /// JSON array of rectangles, each a list of [lo, hi) pairs.
    #[arg(long = "in")]
    input: PathBuf,
    /// Lattice shape such as 16x16; defaults to the bounding box from the origin.
    #[arg(long)]
    dims: Option<String>,
    /// Complexity for the covering check; defaults to n - 1 (1 on a line).
    #[arg(long)]
    c: Option<usize>,
    /// Also run the scattered selection at this λ.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Comma-separated ladder such as 8x8,16x16,32x32.
    #[arg(long, default_value = "16x16,32x32")]
    dims: String,
    #[arg(long, default_value = "strong")]
    op: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Relative agreement required between the two engines.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
}

/// Parses `16x16` into `[16, 16]`.
pub fn parse_dims(s: &str) -> Result<Vec<usize>> {
    s.split('x')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| config(format!("bad lattice shape {s:?}")))
        })
        .collect()
}

fn jobs_from_env() -> Option<usize> {
    std::env::var(JOBS_ENV).ok().and_then(|v| v.trim().parse().ok()).filter(|&n| n > 0)
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let jobs = cli.jobs.or_else(jobs_from_env).filter(|&n| n > 0);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    match pool.install(|| dispatch(cli.command)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Compute(a) => compute(a),
        Command::Verify(a) => verify(a),
        Command::Weights(w) => weights(w),
        Command::Covering(a) => covering(a),
        Command::Bench(a) => bench(a),
    }
}

fn emit(value: &impl Serialize, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn witness(value: &impl Serialize) -> Result<()> {
    eprintln!("{}", serde_json::to_string(value)?);
    Ok(())
}

fn read_grids(paths: &[PathBuf]) -> Result<Vec<GridFunction>> {
    paths
        .iter()
        .map(|p| {
            GridFunction::read_path(p).map_err(|e| config(format!("{}: {e}", p.display())))
        })
        .collect()
}

fn compute(a: ComputeArgs) -> Result<i32> {
    let op: Operator = a.op.parse()?;
    let inputs = read_grids(&a.inputs)?;
    let single = || -> Result<&GridFunction> {
        match inputs.as_slice() {
            [g] => Ok(g),
            _ => Err(config(format!("{} takes exactly one input", a.op))),
        }
    };
    let basis = a.basis.unwrap_or(RectBasis::AllRects);
    let out = match op {
        Operator::Hl => evaluate(&MaximalRequest::new(vec![single()?.clone()], RectBasis::Cubes))?,
        Operator::Strong => evaluate(&MaximalRequest::new(vec![single()?.clone()], basis))?,
        Operator::Complexity(c) => {
            evaluate(&MaximalRequest::new(vec![single()?.clone()], RectBasis::ComplexityC(c)))?
        }
        Operator::Multi => evaluate(&MaximalRequest::new(inputs.clone(), basis))?,
        Operator::MultiOrlicz => {
            if a.young.len() != inputs.len() {
                return Err(config(format!(
                    "multi-orlicz needs one --young per input ({} for {})",
                    a.young.len(),
                    inputs.len()
                )));
            }
            evaluate(&MaximalRequest::orlicz(inputs.clone(), a.young.clone(), basis, a.tol))?
        }
        Operator::IteratedWeight => iterated_weight(single()?)?,
    };
    emit(&out, a.out.as_deref())?;
    Ok(0)
}

fn verify(a: VerifyArgs) -> Result<i32> {
    let mut cfg = if a.suite == "default" {
        RunConfig::default_suite()
    } else {
        let text = std::fs::read_to_string(&a.suite)?;
        RunConfig::from_json(&text).map_err(|e| config(format!("{}: {e}", a.suite)))?
    };
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(t) = a.theorem {
        cfg = cfg.only(t);
    }
    let dir = a
        .out
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("strongmax-out"));
    let outcome = suite_sweep(&cfg)?;
    outcome.write(&dir)?;
    for s in &outcome.summary {
        println!("{:<14} cases={:<4} max_ratio={:.6e} flagged={}", s.theorem.name(), s.cases, s.max_ratio, s.flagged);
    }
    let mut code = 0;
    for r in outcome.flagged() {
        witness(&r.witness)?;
        code = 2;
    }
    Ok(code)
}

fn weights(cmd: WeightsCommand) -> Result<i32> {
    match cmd {
        WeightsCommand::Ap { input, p, basis } => {
            let w = &read_grids(&[input])?[0];
            emit(&ap_constant(w, p, basis)?, None)?;
        }
        WeightsCommand::A1 { input, basis } => {
            let w = &read_grids(&[input])?[0];
            emit(&a1_constant(w, basis)?, None)?;
        }
        WeightsCommand::MultiAp { inputs, ps, basis } => {
            let ws = read_grids(&inputs)?;
            emit(&multilinear_ap_constant(&ws, &ps, basis)?, None)?;
        }
        WeightsCommand::CondA { input, lambda, sets, max_union, seed } => {
            let w = &read_grids(&[input])?[0];
            let sampler = ConditionASampler { max_union, ..ConditionASampler::new(sets, seed) };
            emit(&condition_a_estimate_with(w, lambda, &sampler)?, None)?;
        }
        WeightsCommand::Gen { dims, kind, seed, out } => {
            let g = weight_catalog(&parse_dims(&dims)?, &kind, seed)?;
            emit(&g, out.as_deref())?;
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct CoveringOutput {
    dims: Vec<usize>,
    order: Vec<usize>,
    selected: Vec<usize>,
    overlap_ratios: Vec<f64>,
    union: crate::grid::Mask,
    exhaustion_sizes: Vec<usize>,
    audit: SelectionAudit,
    #[serde(skip_serializing_if = "Option::is_none")]
    claim: Option<crate::covering::CoveringReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scattered: Option<ScatteredOutput>,
}

#[derive(Serialize)]
struct ScatteredOutput {
    lambda: f64,
    kept: Vec<usize>,
    violations: usize,
}

fn covering(a: CoveringArgs) -> Result<i32> {
    let text = std::fs::read_to_string(&a.input)?;
    let rects: Vec<Rect> = serde_json::from_str(&text).map_err(|e| {
        config(format!("{}: line {}, column {}: {e}", a.input.display(), e.line(), e.column()))
    })?;
    if rects.is_empty() {
        return Err(config("the rectangle list is empty"));
    }
    let dims = match &a.dims {
        Some(d) => parse_dims(d)?,
        None => (0..rects[0].rank())
            .map(|l| rects.iter().map(|r| if l < r.rank() { r.hi(l) } else { 0 }).max().unwrap_or(1))
            .collect(),
    };
    let sel = greedy_half_selection(&rects, &dims)?;
    let audit = audit_selection(&sel);
    let c = a.c.unwrap_or(dims.len().saturating_sub(1).max(1));
    let claim = verify_covering_claim(&sel, &rects, c)?;
    let scattered = match a.lambda {
        Some(l) => {
            let kept = scattered_selection(&rects, l, &dims)?;
            let violations = scattered_violations(&rects, &kept, l, &dims);
            Some(ScatteredOutput { lambda: l, kept, violations })
        }
        None => None,
    };
    let mut code = 0;
    if !audit.is_clean() {
        witness(&audit)?;
        code = 2;
    }
    if let Some(w) = &claim.witness {
        witness(w)?;
        code = 2;
    }
    if scattered.as_ref().is_some_and(|s| s.violations > 0) {
        code = 2;
    }
    let output = CoveringOutput {
        dims,
        order: sel.order.clone(),
        selected: sel.selected_input_indices(),
        overlap_ratios: sel.overlap_ratios(),
        union: sel.union.clone(),
        exhaustion_sizes: sel.exhaustion.iter().map(|e| e.count()).collect(),
        audit,
        claim: Some(claim),
        scattered,
    };
    emit(&output, a.out.as_deref())?;
    Ok(code)
}

#[derive(Serialize)]
struct BenchRow {
    dims: Vec<usize>,
    op: String,
    fast_ms: f64,
    oracle_ms: f64,
    speedup: f64,
    max_rel_diff: f64,
    agree: bool,
}

fn bench(a: BenchArgs) -> Result<i32> {
    let op: Operator = a.op.parse()?;
    let mut code = 0;
    for shape in a.dims.split(',') {
        let dims = parse_dims(shape)?;
        let (m, basis, young) = match op {
            Operator::Hl => (1, RectBasis::Cubes, None),
            Operator::Strong => (1, RectBasis::AllRects, None),
            Operator::Complexity(c) => (1, RectBasis::ComplexityC(c), None),
            Operator::Multi => (2, RectBasis::AllRects, None),
            Operator::MultiOrlicz => {
                (2, RectBasis::AllRects, Some(vec![YoungFunction::Power(2.0), YoungFunction::LLogK(1.0)]))
            }
            Operator::IteratedWeight => {
                return Err(config("bench supports hl, strong, complexity:c, multi, multi-orlicz"))
            }
        };
        let inputs: Vec<GridFunction> = (0..m)
            .map(|j| Profile::Uniform(1.0).generate(&dims, a.seed.wrapping_add(j as u64)))
            .collect::<Result<_>>()?;
        let req = MaximalRequest { inputs, basis, young, tol: 1e-9 };
        let t0 = Instant::now();
        let fast = evaluate(&req)?;
        let fast_ms = t0.elapsed().as_secs_f64() * 1e3;
        let t1 = Instant::now();
        let oracle = brute_force_maximal(&req)?;
        let oracle_ms = t1.elapsed().as_secs_f64() * 1e3;
        let max_rel_diff = fast
            .values()
            .iter()
            .zip(oracle.values())
            .map(|(x, y)| (x - y).abs() / y.abs().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);
        let agree = max_rel_diff <= a.tol;
        let row = BenchRow {
            dims,
            op: a.op.clone(),
            fast_ms,
            oracle_ms,
            speedup: oracle_ms / fast_ms.max(1e-9),
            max_rel_diff,
            agree,
        };
        println!("{}", serde_json::to_string(&row)?);
        if !agree {
            witness(&row)?;
            code = 2;
        }
    }
    Ok(code)
}
