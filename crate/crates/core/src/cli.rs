//! Command-line front end. Every subcommand parses flags, calls one library
//! operation, and prints its result with six significant digits (or JSON
//! with `--json`).
//!
//! Exit codes: 0 success, 1 domain error, 2 usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::ast::{ast_bound_eps, ast_bound_s, example1_bound, example2_bound};
use crate::bounds::{
    cor_fixed_s, cor_gr_form, cor_load_factor, gr_bound, main_bound, params_from_load,
};
use crate::error::Error;
use crate::estimator::empirical_collision_probability;
use crate::experiments::{
    coverage_ceiling, perturbation_lemma_trials, run_experiment, BoundSpec, DistSpec,
    ExperimentConfig, ExperimentKind, HashSpec,
};
use crate::format::sig6;
use crate::hashing::{count_slots, slot_probabilities, HashModel, MAX_TABLE_SIZE};
use crate::probability::ProbabilityVector;

#[derive(Debug, Parser)]
#[command(name = "chaining-bounds", version, about = "Collision-probability estimates and search-time bounds for hashing with chaining")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample keys and estimate the collision probability from slot counts.
    Estimate(EstimateArgs),
    /// Evaluate a relative-error deviation bound.
    Bound(BoundArgs),
    /// Evaluate an average-search-time bound.
    AstBound(AstBoundArgs),
    /// Run a Monte Carlo coverage experiment.
    Experiment(ExperimentArgs),
    /// Check the slot-count perturbation inequality on random sequence pairs.
    LemmaCheck(LemmaArgs),
    /// Search-time bound for a user touching a fraction of the slots.
    Example1(ExampleArgs),
    /// Search-time bound for a query made of two such users.
    Example2(ExampleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistName {
    Uniform,
    Zipf,
    Restricted,
    Pointmass,
}

#[derive(Debug, Clone, Args)]
pub struct DistArgs {
    /// Key distribution.
    #[arg(long, value_enum)]
    pub dist: Option<DistName>,
    /// Zipf exponent.
    #[arg(long = "zipf-exp")]
    pub zipf_exp: Option<f64>,
    /// Fraction of entries used by the restricted-uniform distribution.
    #[arg(long)]
    pub alpha: Option<f64>,
}

impl DistArgs {
    fn spec(&self) -> Option<DistSpec> {
        self.dist.map(|d| match d {
            DistName::Uniform => DistSpec::Uniform,
            DistName::Zipf => DistSpec::Zipf {
                exponent: self.zipf_exp.unwrap_or(1.0),
            },
            DistName::Restricted => DistSpec::Restricted {
                alpha: self.alpha.unwrap_or(1.0),
            },
            DistName::Pointmass => DistSpec::PointMass { index: 0 },
        })
    }
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub dist: DistArgs,
    /// Number of slots (identity hash, so also the universe size).
    #[arg(long)]
    pub n: usize,
    /// Number of keys.
    #[arg(long, conflicts_with = "load")]
    pub m: Option<u64>,
    /// Load factor; m = round(load * n).
    #[arg(long)]
    pub load: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundKind {
    Gr,
    Main,
    FixedS,
    LoadFactor,
    GrForm,
    /// Parameters realized from (n, load, eps).
    Params,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[arg(long, value_enum)]
    pub kind: BoundKind,
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub load: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AstKind {
    /// Bound parametrized by the deviation parameter s.
    S,
    /// Bound parametrized by eps.
    Eps,
}

#[derive(Debug, Args)]
pub struct AstBoundArgs {
    #[arg(long, value_enum)]
    pub kind: AstKind,
    #[arg(long)]
    pub n: u64,
    #[arg(long)]
    pub load: f64,
    /// Norm of the access pattern; defaults to the restricted pattern given by
    /// --alpha, or uniform access.
    #[arg(long = "v-norm")]
    pub v_norm: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Norm of the slot distribution; defaults to c / sqrt(n) with --c, or 1 / sqrt(n).
    #[arg(long = "p-norm")]
    pub p_norm: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Collision,
    Ast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundSpecArg {
    Main,
    FixedS,
    LoadFactor,
    Gr,
    GrForm,
    AstS,
    AstEps,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AccessArg {
    Uniform,
    Restricted,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// TOML config; flags below override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    #[arg(long, value_enum)]
    pub bound: Option<BoundSpecArg>,
    #[command(flatten)]
    pub dist: DistArgs,
    #[arg(long, value_enum)]
    pub access: Option<AccessArg>,
    #[arg(long = "access-alpha")]
    pub access_alpha: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<u64>,
    #[arg(long)]
    pub load: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Base seed of the run.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the full JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write per-trial CSV here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct LemmaArgs {
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    #[arg(long, default_value_t = 200)]
    pub m: usize,
    /// Key universe size; defaults to 4n. Keys are hashed by a random table.
    #[arg(long)]
    pub universe: Option<usize>,
    /// Number of random pairs.
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ExampleArgs {
    #[arg(long, default_value_t = 5.0)]
    pub c: f64,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    /// Second subquery's fraction (example2 only).
    #[arg(long, default_value_t = 0.5)]
    pub alpha2: f64,
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    /// Load factors to tabulate; defaults to 1000 and 10000.
    #[arg(long, value_delimiter = ',')]
    pub load: Vec<f64>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Domain(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Domain(e)
    }
}

type CliResult<T = ()> = std::result::Result<T, CliError>;

fn required<T>(value: Option<T>, flag: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::Usage(format!("missing required flag --{flag}")))
}

/// Parses `args` (program name first), runs the subcommand, and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let target: &mut dyn Write = if code == 0 { out } else { err };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let result = match cli.command {
        Command::Estimate(a) => cmd_estimate(&a, out),
        Command::Bound(a) => cmd_bound(&a, out),
        Command::AstBound(a) => cmd_ast_bound(&a, out),
        Command::Experiment(a) => cmd_experiment(&a, out),
        Command::LemmaCheck(a) => cmd_lemma_check(&a, out),
        Command::Example1(a) => cmd_example1(&a, out),
        Command::Example2(a) => cmd_example2(&a, out),
    };
    match result {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}\n\nFor more information, try '--help'.");
            2
        }
        Err(CliError::Domain(e)) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

/// Prints `fields` as aligned `name: value` lines, or as one JSON object.
fn emit(out: &mut dyn Write, json: bool, fields: Value) -> CliResult {
    let text = if json {
        serde_json::to_string_pretty(&fields).map_err(Error::from)? + "\n"
    } else {
        let mut s = String::new();
        flatten_text(&mut s, "", &fields);
        s
    };
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Domain(Error::io("<stdout>", e)))
}

fn flatten_text(buf: &mut String, prefix: &str, value: &Value) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten_text(buf, &key, v);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten_text(buf, &format!("{prefix}[{i}]"), v);
            }
        }
        Value::Number(n) => {
            let text = match (n.as_u64(), n.as_i64(), n.as_f64()) {
                (Some(u), _, _) => u.to_string(),
                (None, Some(i), _) => i.to_string(),
                (_, _, Some(f)) => sig6(f),
                _ => n.to_string(),
            };
            buf.push_str(&format!("{prefix}: {text}\n"));
        }
        Value::Null => {}
        other => buf.push_str(&format!("{prefix}: {}\n", other.as_str().map_or_else(|| other.to_string(), str::to_string))),
    }
}

fn to_value<T: Serialize>(v: &T) -> CliResult<Value> {
    Ok(serde_json::to_value(v).map_err(Error::from)?)
}

fn check_size(n: usize) -> CliResult {
    if n == 0 || n > MAX_TABLE_SIZE {
        return Err(Error::InvalidArgument(format!("n must be in 1..={MAX_TABLE_SIZE} (got {n})")).into());
    }
    Ok(())
}

fn cmd_estimate(a: &EstimateArgs, out: &mut dyn Write) -> CliResult {
    check_size(a.n)?;
    let m = match (a.m, a.load) {
        (Some(m), _) => m,
        (None, Some(l)) if l >= 0.0 && l.is_finite() => (l * a.n as f64).round() as u64,
        (None, Some(l)) => return Err(Error::InvalidArgument(format!("load must be >= 0 (got {l})")).into()),
        (None, None) => return Err(CliError::Usage("one of --m or --load is required".into())),
    };
    let spec = a.dist.spec().unwrap_or(DistSpec::Uniform);
    let q = spec.build(a.n)?;
    let h = HashModel::identity(a.n)?;
    let p = slot_probabilities(&q, &h)?;
    if m < 2 {
        return Err(Error::UndefinedEstimate { m }.into());
    }
    let x = q.sample(a.seed, m as usize);
    let est = empirical_collision_probability(&count_slots(&x, &h)?)?;
    let p_norm_sq = p.norm_sq();
    emit(
        out,
        a.json,
        json!({
            "n": a.n,
            "m": est.m,
            "collision_pairs": est.collision_pairs,
            "empirical_cp": est.empirical_cp,
            "p_norm_sq": p_norm_sq,
            "rel_error": est.relative_error(p_norm_sq)?,
            "signed_deviation": est.signed_deviation(p_norm_sq)?,
        }),
    )
}

fn cmd_bound(a: &BoundArgs, out: &mut dyn Write) -> CliResult {
    let value = match a.kind {
        BoundKind::Gr => to_value(&gr_bound(
            required(a.n, "n")?,
            required(a.beta, "beta")?,
            required(a.lambda, "lambda")?,
        )?)?,
        BoundKind::Main => to_value(&main_bound(
            required(a.n, "n")?,
            required(a.eps, "eps")?,
            required(a.delta, "delta")?,
            required(a.s, "s")?,
        )?)?,
        BoundKind::FixedS => to_value(&cor_fixed_s(
            required(a.n, "n")?,
            required(a.eps, "eps")?,
            required(a.delta, "delta")?,
        )?)?,
        BoundKind::LoadFactor => to_value(&cor_load_factor(
            required(a.eps, "eps")?,
            required(a.load, "load")?,
        )?)?,
        BoundKind::GrForm => to_value(&cor_gr_form(
            required(a.n, "n")?,
            required(a.beta, "beta")?,
            required(a.lambda, "lambda")?,
        )?)?,
        BoundKind::Params => {
            let p = params_from_load(
                required(a.n, "n")?,
                required(a.load, "load")?,
                required(a.eps, "eps")?,
            )?;
            json!({ "params": to_value(&p)?, "main_bound": to_value(&p.main_bound()?)? })
        }
    };
    emit(out, a.json, value)
}

fn cmd_ast_bound(a: &AstBoundArgs, out: &mut dyn Write) -> CliResult {
    let n = a.n;
    if n == 0 || n as usize > MAX_TABLE_SIZE {
        return Err(Error::InvalidArgument(format!("n must be in 1..={MAX_TABLE_SIZE}")).into());
    }
    let v_norm = match (a.v_norm, a.alpha) {
        (Some(v), _) => v,
        (None, Some(alpha)) => ProbabilityVector::restricted_uniform(n as usize, alpha)?.norm(),
        (None, None) => 1.0 / (n as f64).sqrt(),
    };
    let p_norm = match (a.p_norm, a.c) {
        (Some(p), _) => p,
        (None, Some(c)) => c / (n as f64).sqrt(),
        (None, None) => 1.0 / (n as f64).sqrt(),
    };
    let bound = match a.kind {
        AstKind::S => ast_bound_s(a.load, n, v_norm, p_norm, required(a.s, "s")?)?,
        AstKind::Eps => ast_bound_eps(a.load, n, v_norm, p_norm, required(a.eps, "eps")?)?,
    };
    let mut value = to_value(&bound)?;
    value["v_norm"] = json!(v_norm);
    value["p_norm"] = json!(p_norm);
    emit(out, a.json, value)
}

fn base_config(a: &ExperimentArgs) -> CliResult<ExperimentConfig> {
    if let Some(path) = &a.config {
        return Ok(ExperimentConfig::from_file(path)?);
    }
    let bound = required(a.bound, "bound (or --config)")?;
    let kind = match bound {
        BoundSpecArg::AstS | BoundSpecArg::AstEps => ExperimentKind::Ast,
        _ => ExperimentKind::Collision,
    };
    Ok(ExperimentConfig {
        kind,
        n: required(a.n, "n")?,
        m: None,
        load: None,
        trials: required(a.trials, "trials")?,
        base_seed: 0,
        distribution: DistSpec::Uniform,
        hash: HashSpec::Identity,
        access: (kind == ExperimentKind::Ast).then_some(DistSpec::Uniform),
        // Replaced below from the bound flags.
        bound: BoundSpec::LoadFactor { epsilon: 0.0 },
        output: None,
        csv: None,
    })
}

fn bound_from_flags(kind: BoundSpecArg, a: &ExperimentArgs) -> CliResult<BoundSpec> {
    Ok(match kind {
        BoundSpecArg::Main => BoundSpec::Main {
            epsilon: required(a.eps, "eps")?,
            delta: required(a.delta, "delta")?,
            s: required(a.s, "s")?,
        },
        BoundSpecArg::FixedS => BoundSpec::FixedS {
            epsilon: required(a.eps, "eps")?,
            delta: required(a.delta, "delta")?,
        },
        BoundSpecArg::LoadFactor => BoundSpec::LoadFactor {
            epsilon: required(a.eps, "eps")?,
        },
        BoundSpecArg::Gr => BoundSpec::Gr {
            beta: required(a.beta, "beta")?,
            lambda: required(a.lambda, "lambda")?,
        },
        BoundSpecArg::GrForm => BoundSpec::GrForm {
            beta: required(a.beta, "beta")?,
            lambda: required(a.lambda, "lambda")?,
        },
        BoundSpecArg::AstS => BoundSpec::AstS {
            s: required(a.s, "s")?,
        },
        BoundSpecArg::AstEps => BoundSpec::AstEps {
            epsilon: required(a.eps, "eps")?,
        },
    })
}

fn override_bound(bound: &mut BoundSpec, a: &ExperimentArgs) {
    match bound {
        BoundSpec::Main { epsilon, delta, s } => {
            *epsilon = a.eps.unwrap_or(*epsilon);
            *delta = a.delta.unwrap_or(*delta);
            *s = a.s.unwrap_or(*s);
        }
        BoundSpec::FixedS { epsilon, delta } => {
            *epsilon = a.eps.unwrap_or(*epsilon);
            *delta = a.delta.unwrap_or(*delta);
        }
        BoundSpec::LoadFactor { epsilon } | BoundSpec::AstEps { epsilon } => {
            *epsilon = a.eps.unwrap_or(*epsilon);
        }
        BoundSpec::Gr { beta, lambda } | BoundSpec::GrForm { beta, lambda } => {
            *beta = a.beta.unwrap_or(*beta);
            *lambda = a.lambda.unwrap_or(*lambda);
        }
        BoundSpec::AstS { s } => *s = a.s.unwrap_or(*s),
    }
}

/// Builds the effective configuration: file values, then flag overrides.
pub fn experiment_config(a: &ExperimentArgs) -> std::result::Result<ExperimentConfig, String> {
    resolve_experiment_config(a).map_err(|e| match e {
        CliError::Usage(m) => m,
        CliError::Domain(e) => e.to_string(),
    })
}

fn resolve_experiment_config(a: &ExperimentArgs) -> CliResult<ExperimentConfig> {
    let mut cfg = base_config(a)?;
    if let Some(kind) = a.kind {
        cfg.kind = match kind {
            KindArg::Collision => ExperimentKind::Collision,
            KindArg::Ast => ExperimentKind::Ast,
        };
    }
    match a.bound {
        Some(kind) => cfg.bound = bound_from_flags(kind, a)?,
        None => override_bound(&mut cfg.bound, a),
    }
    if let Some(n) = a.n {
        cfg.n = n;
    }
    if a.m.is_some() || a.load.is_some() {
        cfg.m = a.m;
        cfg.load = a.load;
    }
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
    if let Some(seed) = a.seed {
        cfg.base_seed = seed;
    }
    if let Some(spec) = a.dist.spec() {
        cfg.distribution = spec;
    }
    match a.access {
        Some(AccessArg::Uniform) => cfg.access = Some(DistSpec::Uniform),
        Some(AccessArg::Restricted) => {
            cfg.access = Some(DistSpec::Restricted {
                alpha: required(a.access_alpha, "access-alpha")?,
            })
        }
        None => {
            if let (Some(alpha), Some(DistSpec::Restricted { alpha: a0 })) =
                (a.access_alpha, cfg.access.as_mut())
            {
                *a0 = alpha;
            }
        }
    }
    if a.out.is_some() {
        cfg.output = a.out.clone();
    }
    if a.csv.is_some() {
        cfg.csv = a.csv.clone();
    }
    Ok(cfg)
}

fn cmd_experiment(a: &ExperimentArgs, out: &mut dyn Write) -> CliResult {
    let cfg = resolve_experiment_config(a)?;
    let report = run_experiment(&cfg)?;
    if let Some(path) = &cfg.output {
        report.write_json(path)?;
    }
    if let Some(path) = &cfg.csv {
        report.write_csv(path)?;
    }
    let ceiling = coverage_ceiling(report.bound.tail, report.aggregates.trials);
    emit(
        out,
        a.json,
        json!({
            "bound": to_value(&report.bound)?,
            "aggregates": to_value(&report.aggregates)?,
            "coverage_ceiling": ceiling,
            "wall_clock_seconds": report.wall_clock_seconds,
        }),
    )
}

fn cmd_lemma_check(a: &LemmaArgs, out: &mut dyn Write) -> CliResult {
    check_size(a.n)?;
    let universe = a.universe.unwrap_or(4 * a.n);
    check_size(universe)?;
    let h = HashModel::random_table(universe, a.n, a.seed)?;
    let summary = perturbation_lemma_trials(&h, a.m, a.trials, a.seed)?;
    emit(out, a.json, to_value(&summary)?)?;
    if summary.failures > 0 {
        return Err(Error::InvalidArgument(format!(
            "{} of {} pairs violated the inequality",
            summary.failures, summary.pairs
        ))
        .into());
    }
    Ok(())
}

fn example_loads(a: &ExampleArgs) -> Vec<f64> {
    if a.load.is_empty() {
        vec![1000.0, 10_000.0]
    } else {
        a.load.clone()
    }
}

fn cmd_example1(a: &ExampleArgs, out: &mut dyn Write) -> CliResult {
    let rows = example_loads(a)
        .into_iter()
        .map(|load| {
            let b = example1_bound(a.c, a.alpha, a.eps, load)?;
            let mut row = to_value(&b)?;
            row["load"] = json!(load);
            Ok(row)
        })
        .collect::<CliResult<Vec<_>>>()?;
    emit(
        out,
        a.json,
        json!({ "c": a.c, "alpha": a.alpha, "eps": a.eps, "rows": rows }),
    )
}

fn cmd_example2(a: &ExampleArgs, out: &mut dyn Write) -> CliResult {
    let rows = example_loads(a)
        .into_iter()
        .map(|load| {
            let b = example2_bound(a.c, a.alpha, a.alpha2, a.eps, load)?;
            let mut row = to_value(&b)?;
            row["load"] = json!(load);
            Ok(row)
        })
        .collect::<CliResult<Vec<_>>>()?;
    emit(
        out,
        a.json,
        json!({ "c": a.c, "alpha1": a.alpha, "alpha2": a.alpha2, "eps": a.eps, "rows": rows }),
    )
}
