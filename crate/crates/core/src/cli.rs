//! The `trajlens` command line.
//!
//! Exit status: 0 on success or a holding property, 2 when a property is
//! violated (or inconclusive) or a probe fails, 1 on any input error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::corpus::{self, CorpusEntry, CorpusModel};
use crate::cycle::max_mean_cycle_values;
use crate::dp::{discounted_value, finite_values, limit_value_estimate, DiscountedValues, RegularityReport};
use crate::model::DpModel;
use crate::report::{csv_string, preport_csv, ModelSource, Provenance, Report};
use crate::stochastic::{
    best_reply_value, eval_profile_in, shapley_discounted, shapley_finite, GameDiscountedValues,
    MarkovProfile, Player, StochasticGame,
};
use crate::trajectory::{
    check_property_p, check_property_pprime, enumerate_eps_optimal_plays, uniform_grid,
    uniform_value_probe, CheckConfig, DeviationProfile, DiscountedCheck, Extremes, PReport,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_VIOLATED: i32 = 2;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "TRAJLENS_THREADS";

#[derive(Debug, Parser)]
#[command(name = "trajlens", version, about = "Values, ε-optimal plays and their payoff profiles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Finite-horizon and discounted values of a dynamic programming model.
    Solve(SolveArgs),
    /// Check the constant-average property on ε-optimal plays of G_n.
    CheckP(CheckPArgs),
    /// Check the discounted analogue on ε-optimal plays of G_lambda.
    CheckPprime(CheckPprimeArgs),
    /// List the ε-optimal plays of G_n(s).
    Enumerate(EnumerateArgs),
    /// Shapley values of a stochastic game.
    GameSolve(GameSolveArgs),
    /// Expected payoff profile of a pair of Markov strategies.
    EvalProfile(EvalProfileArgs),
    /// Built-in example models.
    #[command(subcommand)]
    Corpus(CorpusCommand),
    /// Finite-range evidence for a uniform value.
    ProbeUniform(ProbeArgs),
}

#[derive(Debug, Clone, Args)]
struct SourceArgs {
    /// Model JSON file.
    #[arg(long, conflicts_with = "corpus", required_unless_present = "corpus")]
    model: Option<PathBuf>,
    /// Corpus entry name (see `corpus list`).
    #[arg(long)]
    corpus: Option<String>,
    /// Corpus parameter, e.g. `K=50`; repeatable.
    #[arg(long = "param", value_parser = parse_param, requires = "corpus")]
    params: Vec<(String, i64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Largest horizon N; values are reported for n = 1..N.
    #[arg(long)]
    horizon: Option<usize>,
    /// Discount factors, comma separated.
    #[arg(long, value_delimiter = ',')]
    lambda: Vec<f64>,
    /// Fixed-point tolerance for discounted values.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Also estimate the limit value at horizon N with convergence diagnostics.
    #[arg(long)]
    limit_diagnostics: bool,
}

#[derive(Debug, Args)]
struct CheckCommon {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[arg(long)]
    epsilon: f64,
    /// Report resolution: t = 0, 1/k, ..., 1; 0 reports every breakpoint.
    #[arg(long, default_value_t = 20)]
    grid_points: usize,
    /// Maximum number of plays enumerated per (scale, state).
    #[arg(long, default_value_t = 100_000)]
    limit: usize,
    /// Start state ids, comma separated; defaults to the corpus entry's
    /// starts, or every state.
    #[arg(long, value_delimiter = ',')]
    start: Vec<String>,
}

#[derive(Debug, Args)]
struct CheckPArgs {
    #[command(flatten)]
    common: CheckCommon,
    /// Horizons, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    horizons: Vec<usize>,
}

#[derive(Debug, Args)]
struct CheckPprimeArgs {
    #[command(flatten)]
    common: CheckCommon,
    /// Discount factors, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    lambdas: Vec<f64>,
    /// Cap on the enumeration depth.
    #[arg(long, default_value_t = 20_000)]
    max_depth: usize,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
}

#[derive(Debug, Args)]
struct EnumerateArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[arg(long)]
    start: Option<String>,
    #[arg(long)]
    horizon: usize,
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    #[arg(long, default_value_t = 10_000)]
    limit: usize,
}

#[derive(Debug, Args)]
struct GameSolveArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    lambda: Vec<f64>,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
}

#[derive(Debug, Args)]
struct EvalProfileArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[arg(long)]
    horizon: usize,
    #[arg(long)]
    start: Option<String>,
    /// Built-in profile pair: `half` (big-match) or `cooperate` (gamma).
    #[arg(long, conflicts_with_all = ["sigma", "tau"])]
    profile: Option<String>,
    /// Player 1 profile JSON.
    #[arg(long, requires = "tau")]
    sigma: Option<PathBuf>,
    /// Player 2 profile JSON.
    #[arg(long, requires = "sigma")]
    tau: Option<PathBuf>,
    /// Subgame entered by the `cooperate` profile; defaults to (horizon - 1) / 2.
    #[arg(long)]
    subgame: Option<usize>,
    /// Reference value; defaults to the known limit, else v_N(s).
    #[arg(long)]
    reference: Option<f64>,
    #[arg(long, default_value_t = 0)]
    grid_points: usize,
}

#[derive(Debug, Subcommand)]
enum CorpusCommand {
    /// Names, parameters and descriptions of the built-in models.
    List {
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Write one built-in model as JSON.
    Emit {
        name: String,
        /// Parameters as `KEY=VALUE`.
        #[arg(value_parser = parse_param)]
        positional: Vec<(String, i64)>,
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, i64)>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct ProbeArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[arg(long)]
    start: Option<String>,
    #[arg(long)]
    epsilon: f64,
    /// First horizon N of the probed range.
    #[arg(long)]
    threshold: usize,
    /// Last horizon of the probed range.
    #[arg(long)]
    max_horizon: usize,
}

fn parse_param(s: &str) -> Result<(String, i64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected KEY=VALUE, got `{s}`"))?;
    let v = v
        .trim()
        .parse::<i64>()
        .map_err(|e| format!("parameter `{k}`: {e}"))?;
    Ok((k.trim().to_owned(), v))
}

/// An input problem, reported with exit status 1.
#[derive(Debug)]
struct InputError(String);

impl<E: std::error::Error> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

fn input<T>(msg: impl Into<String>) -> Result<T, InputError> {
    Err(InputError(msg.into()))
}

struct Loaded {
    model: CorpusModel,
    entry: Option<CorpusEntry>,
    source: ModelSource,
}

impl Loaded {
    fn dp(&self) -> Result<&DpModel, InputError> {
        match &self.model {
            CorpusModel::Dp(m) => Ok(m),
            CorpusModel::Game(_) => input("this command needs a `dp` model, got a `zsg` game"),
        }
    }

    fn game(&self) -> Result<&StochasticGame, InputError> {
        match &self.model {
            CorpusModel::Game(g) => Ok(g),
            CorpusModel::Dp(_) => input("this command needs a `zsg` game, got a `dp` model"),
        }
    }

    fn model_type(&self) -> &'static str {
        match self.model {
            CorpusModel::Dp(_) => "dp",
            CorpusModel::Game(_) => "zsg",
        }
    }

    fn provenance(&self, command: &str, parameters: serde_json::Value) -> Provenance {
        Provenance::new(
            command,
            self.model_type(),
            self.model.content_hash(),
            self.source.clone(),
            parameters,
        )
    }

    fn state_index(&self, id: &str) -> Result<usize, InputError> {
        Ok(match &self.model {
            CorpusModel::Dp(m) => m.index_of(id)?,
            CorpusModel::Game(g) => g.index_of(id)?,
        })
    }

    fn state_id(&self, s: usize) -> String {
        match &self.model {
            CorpusModel::Dp(m) => m.id(s).to_owned(),
            CorpusModel::Game(g) => g.id(s).to_owned(),
        }
    }

    fn state_ids(&self) -> Vec<String> {
        let n = match &self.model {
            CorpusModel::Dp(m) => m.len(),
            CorpusModel::Game(g) => g.len(),
        };
        (0..n).map(|s| self.state_id(s)).collect()
    }

    /// One start: the given id, else the first default start, else state 0.
    fn single_start(&self, start: &Option<String>) -> Result<usize, InputError> {
        match start {
            Some(id) => self.state_index(id),
            None => Ok(self
                .entry
                .as_ref()
                .and_then(|e| e.default_starts.first().copied())
                .unwrap_or(0)),
        }
    }

    /// Exact limit if the corpus knows it, else the maximum-mean-cycle oracle.
    fn dp_reference(&self) -> Result<(Vec<f64>, &'static str), InputError> {
        let m = self.dp()?;
        if let Some(limit) = self.entry.as_ref().and_then(CorpusEntry::limit_f64) {
            return Ok((limit, "corpus"));
        }
        Ok((max_mean_cycle_values(m), "cycle-oracle"))
    }
}

fn load(src: &SourceArgs) -> Result<Loaded, InputError> {
    if let Some(path) = &src.model {
        let text = fs::read_to_string(path)
            .map_err(|e| InputError(format!("{}: {e}", path.display())))?;
        let at = |e: String| InputError(format!("{}: {e}", path.display()));
        let head: serde_json::Value = serde_json::from_str(&text).map_err(|e| at(e.to_string()))?;
        let model = match head.get("type").and_then(|t| t.as_str()) {
            Some("dp") => CorpusModel::Dp(DpModel::from_json_str(&text).map_err(|e| at(e.to_string()))?),
            Some("zsg") => CorpusModel::Game(
                StochasticGame::from_json_str(&text).map_err(|e| at(e.to_string()))?,
            ),
            Some(other) => return Err(at(format!("unknown model type `{other}`"))),
            None => return Err(at("missing string field `type`".into())),
        };
        return Ok(Loaded {
            model,
            entry: None,
            source: ModelSource::File {
                path: path.display().to_string(),
            },
        });
    }
    let name = src.corpus.as_deref().expect("clap enforces a source");
    let params = collect_params(&src.params)?;
    let entry = corpus::by_name(name, &params)?;
    Ok(Loaded {
        model: entry.model.clone(),
        source: ModelSource::Corpus {
            name: name.to_owned(),
            params: entry.params.clone(),
        },
        entry: Some(entry),
    })
}

fn collect_params(list: &[(String, i64)]) -> Result<BTreeMap<String, i64>, InputError> {
    let mut out = BTreeMap::new();
    for (k, v) in list {
        if out.insert(k.clone(), *v).is_some() {
            return input(format!("parameter `{k}` given twice"));
        }
    }
    Ok(out)
}

fn emit(output: &OutputArgs, text: &str, stdout: &mut dyn Write) -> Result<(), InputError> {
    match &output.out {
        Some(path) => fs::write(path, text).map_err(|e| InputError(format!("{}: {e}", path.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| InputError(format!("stdout: {e}"))),
    }
}

fn grid_for(points: usize) -> Vec<f64> {
    if points == 0 {
        Vec::new()
    } else {
        uniform_grid(points)
    }
}

fn check_lambdas(lambdas: &[f64]) -> Result<(), InputError> {
    if let Some(l) = lambdas.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
        return input(format!("--lambda {l} outside (0, 1)"));
    }
    Ok(())
}

fn check_tol(tol: f64) -> Result<(), InputError> {
    if !(tol > 0.0) {
        return input(format!("--tol must be positive, got {tol}"));
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct ValueRows {
    horizon: usize,
    /// `values[n - 1][s] = v_n(s)`.
    values: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize)]
struct LimitResult {
    estimate: Vec<f64>,
    regularity: RegularityReport,
}

#[derive(Debug, Serialize)]
struct SolveResult {
    states: Vec<String>,
    finite: Option<ValueRows>,
    discounted: Vec<DiscountedValues>,
    limit: Option<LimitResult>,
}

#[derive(Debug, Serialize)]
struct ValueCsvRow<'a> {
    kind: &'a str,
    scale: String,
    state: &'a str,
    value: f64,
}

fn value_csv(
    states: &[String],
    finite: Option<&ValueRows>,
    discounted: &[(f64, &[f64])],
    limit: Option<(usize, &[f64])>,
) -> String {
    let mut rows = Vec::new();
    if let Some(f) = finite {
        for (i, row) in f.values.iter().enumerate() {
            for (s, &v) in row.iter().enumerate() {
                rows.push(ValueCsvRow {
                    kind: "finite",
                    scale: (i + 1).to_string(),
                    state: &states[s],
                    value: v,
                });
            }
        }
    }
    for &(lambda, values) in discounted {
        for (s, &v) in values.iter().enumerate() {
            rows.push(ValueCsvRow {
                kind: "discounted",
                scale: lambda.to_string(),
                state: &states[s],
                value: v,
            });
        }
    }
    if let Some((n, values)) = limit {
        for (s, &v) in values.iter().enumerate() {
            rows.push(ValueCsvRow {
                kind: "limit",
                scale: n.to_string(),
                state: &states[s],
                value: v,
            });
        }
    }
    csv_string(rows)
}

fn cmd_solve(a: &SolveArgs, stdout: &mut dyn Write) -> Result<i32, InputError> {
    let loaded = load(&a.source)?;
    let m = loaded.dp()?;
    if a.horizon.is_none() && a.lambda.is_empty() {
        return input("give --horizon and/or --lambda");
    }
    check_lambdas(&a.lambda)?;
    check_tol(a.tol)?;
    let finite = match a.horizon {
        Some(0) => return input("--horizon must be positive"),
        Some(n) => {
            let t = finite_values(m, n);
            Some(ValueRows {
                horizon: n,
                values: (1..=n).map(|k| t.values(k)).collect(),
            })
        }
        None => None,
    };
    let discounted: Vec<DiscountedValues> =
        a.lambda.iter().map(|&l| discounted_value(m, l, a.tol)).collect();
    let limit = if a.limit_diagnostics {
        let n = match a.horizon {
            Some(n) if n >= 2 => n,
            _ => return input("--limit-diagnostics needs --horizon of at least 2"),
        };
        let (estimate, regularity) = limit_value_estimate(m, n, 1e-2);
        Some(LimitResult { estimate, regularity })
    } else {
        None
    };
    let result = SolveResult {
        states: loaded.state_ids(),
        finite,
        discounted,
        limit,
    };
    let text = match a.output.format {
        Format::Json => Report {
            provenance: loaded.provenance(
                "solve",
                json!({"horizon": a.horizon, "lambda": a.lambda, "tol": a.tol,
                       "limit_diagnostics": a.limit_diagnostics}),
            ),
            result: &result,
        }
        .to_json_string(),
        Format::Csv => {
            let disc: Vec<(f64, &[f64])> = result
                .discounted
                .iter()
                .map(|d| (d.lambda, d.values.as_slice()))
                .collect();
            value_csv(
                &result.states,
                result.finite.as_ref(),
                &disc,
                result.limit.as_ref().map(|l| (a.horizon.unwrap(), l.estimate.as_slice())),
            )
        }
    };
    emit(&a.output, &text, stdout)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct CheckResult<'a> {
    reference_source: &'a str,
    reference: Vec<f64>,
    report: PReport,
}

fn check_config(common: &CheckCommon, loaded: &Loaded) -> Result<CheckConfig, InputError> {
    let mut cfg = CheckConfig::new(common.epsilon);
    cfg.grid = grid_for(common.grid_points);
    cfg.limit = common.limit;
    if common.limit == 0 {
        return input("--limit must be positive");
    }
    cfg.starts = if common.start.is_empty() {
        loaded.entry.as_ref().map(|e| e.default_starts.clone())
    } else {
        Some(
            common
                .start
                .iter()
                .map(|id| loaded.state_index(id))
                .collect::<Result<_, _>>()?,
        )
    };
    Ok(cfg)
}

fn finish_check(
    command: &str,
    common: &CheckCommon,
    loaded: &Loaded,
    parameters: serde_json::Value,
    mut report: PReport,
    reference: Vec<f64>,
    reference_source: &str,
    stdout: &mut dyn Write,
) -> Result<i32, InputError> {
    report.label_witness(loaded.dp()?);
    let code = if report.holds() { EXIT_OK } else { EXIT_VIOLATED };
    let text = match common.output.format {
        Format::Json => Report {
            provenance: loaded.provenance(command, parameters),
            result: CheckResult {
                reference_source,
                reference,
                report,
            },
        }
        .to_json_string(),
        Format::Csv => preport_csv(&report),
    };
    emit(&common.output, &text, stdout)?;
    Ok(code)
}

fn cmd_check_p(a: &CheckPArgs, stdout: &mut dyn Write) -> Result<i32, InputError> {
    let loaded = load(&a.common.source)?;
    let m = loaded.dp()?;
    let cfg = check_config(&a.common, &loaded)?;
    let (reference, source) = loaded.dp_reference()?;
    let report = check_property_p(m, &a.horizons, &cfg, &reference)?;
    let params = json!({"epsilon": a.common.epsilon, "horizons": a.horizons,
        "grid_points": a.common.grid_points, "limit": a.common.limit, "start": a.common.start});
    finish_check("check-p", &a.common, &loaded, params, report, reference, source, stdout)
}

fn cmd_check_pprime(a: &CheckPprimeArgs, stdout: &mut dyn Write) -> Result<i32, InputError> {
    let loaded = load(&a.common.source)?;
    let m = loaded.dp()?;
    let cfg = check_config(&a.common, &loaded)?;
    check_tol(a.tol)?;
    if a.max_depth == 0 {
        return input("--max-depth must be positive");
    }
    let (reference, source) = loaded.dp_reference()?;
    let mut d = DiscountedCheck::new(a.lambdas.clone());
    d.max_depth = a.max_depth;
    d.value_tol = a.tol;
    let report = check_property_pprime(m, &d, &cfg, &reference)?;
    let params = json!({"epsilon": a.common.epsilon, "lambdas": a.lambdas,
        "grid_points": a.common.grid_points, "limit": a.common.limit, "start": a.common.start,
        "max_depth": a.max_depth, "tol": a.tol});
    finish_check("check-pprime", &a.common, &loaded, params, report, reference, source, stdout)
}

#[derive(Debug, Serialize)]
struct PlayOut {
    states: Vec<String>,
    total: f64,
}

#[derive(Debug, Serialize)]
struct EnumerateResult {
    state: String,
    horizon: usize,
    epsilon: f64,
    value: f64,
    plays: Vec<PlayOut>,
    limit_reached: bool,
}

#[derive(Debug, Serialize)]
struct PlayCsvRow<'a> {
    play: usize,
    stage: usize,
    state: &'a str,
    payoff: f64,
    cumulative: f64,
}

fn cmd_enumerate(a: &EnumerateArgs, stdout: &mut dyn Write) -> Result<i32, InputError> {
    let loaded = load(&a.source)?;
    let m = loaded.dp()?;
    if a.horizon == 0 {
        return input("--horizon must be positive");
    }
    if !(a.epsilon >= 0.0) {
        return input(format!("--epsilon must be nonnegative, got {}", a.epsilon));
    }
    if a.limit == 0 {
        return input("--limit must be positive");
    }
    let s = loaded.single_start(&a.start)?;
    let table = finite_values(m, a.horizon);
    let en = enumerate_eps_optimal_plays(m, &table, s, a.horizon, a.epsilon, a.limit);
    let text = match a.output.format {
        Format::Json => {
            let result = EnumerateResult {
                state: m.id(s).to_owned(),
                horizon: a.horizon,
                epsilon: a.epsilon,
                value: table.value(a.horizon, s),
                plays: en
                    .plays
                    .iter()
                    .map(|p| PlayOut {
                        states: p.labels(m).into_iter().map(str::to_owned).collect(),
                        total: p.total(),
                    })
                    .collect(),
                limit_reached: en.limit_reached,
            };
            Report {
                provenance: loaded.provenance(
                    "enumerate",
                    json!({"start": m.id(s), "horizon": a.horizon, "epsilon": a.epsilon,
                           "limit": a.limit}),
                ),
                result,
            }
            .to_json_string()
        }
        Format::Csv => {
            let mut rows = Vec::new();
            for (i, p) in en.plays.iter().enumerate() {
                let cum = p.cumulative();
                for (k, &st) in p.sequence.iter().enumerate() {
                    rows.push(PlayCsvRow {
                        play: i,
                        stage: k + 1,
                        state: m.id(st),
                        payoff: p.payoffs[k],
                        cumulative: cum[k + 1],
                    });
                }
            }
            csv_string(rows)
        }
    };
    emit(&a.output, &text, stdout)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct GameSolveResult {
    states: Vec<String>,
    finite: Option<ValueRows>,
    discounted: Vec<GameDiscountedValues>,
}

fn cmd_game_solve(a: &GameSolveArgs, stdout: &mut dyn Write) -> Result<i32, InputError> {
    let loaded = load(&a.source)?;
    let g = loaded.game()?;
    if a.horizon.is_none() && a.lambda.is_empty() {
        return input("give --horizon and/or --lambda");
    }
    check_lambdas(&a.lambda)?;
    check_tol(a.tol)?;
    let finite = match a.horizon {
        Some(0) => return input("--horizon must be positive"),
        Some(n) => {
            let t = shapley_finite(g, n)?;
            Some(ValueRows {
                horizon: n,
                values: (1..=n).map(|k| t.values(k).to_vec()).collect(),
            })
        }
        None => None,
    };
    let discounted = a
        .lambda
        .iter()
        .map(|&l| shapley_discounted(g, l, a.tol))
        .collect::<Result<Vec<_>, _>>()?;
    let result = GameSolveResult {
        states: loaded.state_ids(),
        finite,
        discounted,
    };
    let text = match a.output.format {
        Format::Json => Report {
            provenance: loaded.provenance(
                "game-solve",
                json!({"horizon": a.horizon, "lambda": a.lambda, "tol": a.tol}),
            ),
            result: &result,
        }
        .to_json_string(),
        Format::Csv => {
            let disc: Vec<(f64, &[f64])> = result
                .discounted
                .iter()
                .map(|d| (d.lambda, d.values.as_slice()))
                .collect();
            value_csv(&result.states, result.finite.as_ref(), &disc, None)
        }
    };
    emit(&a.output, &text, stdout)?;
    Ok(EXIT_OK)
}

/// On-disk Markov profile: mixed actions keyed by state id, either the same
/// at every stage (`stationary`) or listed per stage (`stages`). Active
/// states with a single action may be omitted.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProfileJson {
    /// 1 (rows) or 2 (columns).
    pub player: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stationary: Option<BTreeMap<String, Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stages: Option<Vec<BTreeMap<String, Vec<f64>>>>,
}

impl ProfileJson {
    pub fn into_profile(
        self,
        game: &StochasticGame,
        horizon: usize,
    ) -> Result<MarkovProfile, String> {
        let player = match self.player {
            1 => Player::One,
            2 => Player::Two,
            p => return Err(format!("player must be 1 or 2, got {p}")),
        };
        for key in self
            .stationary
            .iter()
            .flat_map(|m| m.keys())
            .chain(self.stages.iter().flatten().flat_map(|m| m.keys()))
        {
            game.index_of(key).map_err(|e| e.to_string())?;
        }
        let lookup = |table: &BTreeMap<String, Vec<f64>>, s: usize| -> Result<Vec<f64>, String> {
            if let Some(mix) = table.get(game.id(s)) {
                return Ok(mix.clone());
            }
            let (rows, cols) = game.state(s).actions();
            let k = if player == Player::One { rows } else { cols };
            if k == 1 {
                Ok(vec![1.0])
            } else {
                Err(format!("no mixed action for state `{}`", game.id(s)))
            }
        };
        let mut err = None;
        let profile = match (self.stationary, self.stages) {
            (Some(table), None) => MarkovProfile::stationary(game, player, horizon, |s| {
                lookup(&table, s).unwrap_or_else(|e| {
                    err.get_or_insert(e);
                    Vec::new()
                })
            }),
            (None, Some(stages)) => {
                if stages.len() < horizon {
                    return Err(format!("{} stages given, {horizon} needed", stages.len()));
                }
                MarkovProfile::markov(game, player, horizon, |m, s| {
                    lookup(&stages[m - 1], s).unwrap_or_else(|e| {
                        err.get_or_insert(format!("stage {m}: {e}"));
                        Vec::new()
                    })
                })
            }
            _ => return Err("give exactly one of `stationary` and `stages`".into()),
        };
        match err {
            Some(e) => Err(e),
            None => Ok(profile),
        }
    }
}

fn read_profile(path: &PathBuf, game: &StochasticGame, horizon: usize) -> Result<MarkovProfile, InputError> {
    let at = |e: String| InputError(format!("{}: {e}", path.display()));
    let text = fs::read_to_string(path).map_err(|e| at(e.to_string()))?;
    let raw: ProfileJson = serde_json::from_str(&text).map_err(|e| at(e.to_string()))?;
    raw.into_profile(game, horizon).map_err(at)
}

#[derive(Debug, Serialize)]
struct EvalResult {
    state: String,
    horizon: usize,
    reference: f64,
    cumulative: Vec<f64>,
    mass: Vec<f64>,
    profile: DeviationProfile,
    extremes: Extremes,
    /// `v_N(s)`.
    value: Option<f64>,
    /// Average payoff of player 1's best reply to `tau`.
    best_reply_player_one: Option<f64>,
    /// Average payoff of player 2's best reply to `sigma`.
    best_reply_player_two: Option<f64>,
}

#[derive(Debug, Serialize)]
struct EvalCsvRow {
    k: usize,
    t: f64,
    cumulative: f64,
    deviation: f64,
}

fn cmd_eval_profile(a: &EvalProfileArgs, stdout: &mut dyn Write) -> Result<i32, InputError> {
    let loaded = load(&a.source)?;
    let g = loaded.game()?;
    let n = a.horizon;
    if n == 0 {
        return input("--horizon must be positive");
    }
    let s = loaded.single_start(&a.start)?;
    let (sigma, tau) = match (&a.profile, &a.sigma, &a.tau) {
        (Some(name), _, _) => builtin_profiles(&loaded, name, n, a.subgame)?,
        (None, Some(sp), Some(tp)) => (read_profile(sp, g, n)?, read_profile(tp, g, n)?),
        _ => return input("give --profile or both --sigma and --tau"),
    };
    if sigma.player != Player::One || tau.player != Player::Two {
        return input("--sigma must be a player 1 profile and --tau a player 2 profile");
    }
    let ev = eval_profile_in::<f64>(g, &sigma, &tau, s, n)?;
    let value = shapley_finite(g, n)?.value(n, s);
    let reference = match a.reference {
        Some(r) => r,
        None => loaded
            .entry
            .as_ref()
            .and_then(CorpusEntry::limit_f64)
            .map(|l| l[s])
            .unwrap_or(value),
    };
    let grid = grid_for(a.grid_points);
    let mut profile = DeviationProfile::from_cumulative(ev.cumulative.clone(), reference, &grid);
    profile.start = Some(s);
    let extremes = profile.breakpoint_extremes();
    let text = match a.output.format {
        Format::Json => {
            let result = EvalResult {
                state: g.id(s).to_owned(),
                horizon: n,
                reference,
                cumulative: ev.cumulative.clone(),
                mass: ev.mass.clone(),
                extremes,
                value: Some(value),
                best_reply_player_one: Some(best_reply_value(g, &tau, s, n)?),
                best_reply_player_two: Some(best_reply_value(g, &sigma, s, n)?),
                profile,
            };
            Report {
                provenance: loaded.provenance(
                    "eval-profile",
                    json!({"horizon": n, "start": g.id(s), "profile": a.profile,
                           "sigma": a.sigma, "tau": a.tau, "subgame": a.subgame,
                           "reference": reference, "grid_points": a.grid_points}),
                ),
                result,
            }
            .to_json_string()
        }
        Format::Csv => {
            let rows = (0..=n).map(|k| EvalCsvRow {
                k,
                t: k as f64 / n as f64,
                cumulative: ev.cumulative[k],
                deviation: profile.at_breakpoint(k),
            });
            csv_string(rows)
        }
    };
    emit(&a.output, &text, stdout)?;
    Ok(EXIT_OK)
}

fn builtin_profiles(
    loaded: &Loaded,
    name: &str,
    horizon: usize,
    subgame: Option<usize>,
) -> Result<(MarkovProfile, MarkovProfile), InputError> {
    let entry = loaded
        .entry
        .as_ref()
        .ok_or_else(|| InputError("built-in profiles need a --corpus model".into()))?;
    let g = loaded.game()?;
    match (entry.name.as_str(), name) {
        ("big-match", "half") => Ok((
            MarkovProfile::stationary(g, Player::One, horizon, |_| vec![0.5, 0.5]),
            corpus::big_match_half_column(g, horizon),
        )),
        ("gamma", "cooperate") => {
            let n = subgame.unwrap_or((horizon.saturating_sub(1) / 2).max(1));
            Ok(corpus::gamma_cooperate_profiles(entry, n, horizon)?)
        }
        (corpus_name, _) => input(format!(
            "no built-in profile `{name}` for `{corpus_name}` (big-match: half, gamma: cooperate)"
        )),
    }
}

#[derive(Debug, Serialize)]
struct ProbeResult {
    state: String,
    reference: f64,
    epsilon: f64,
    threshold: usize,
    max_horizon: usize,
    guarantee_failure: Option<usize>,
    cap_failure: Option<usize>,
    play: Vec<String>,
    passes: bool,
}

fn cmd_probe(a: &ProbeArgs, stdout: &mut dyn Write) -> Result<i32, InputError> {
    let loaded = load(&a.source)?;
    let m = loaded.dp()?;
    if !(a.epsilon > 0.0) {
        return input(format!("--epsilon must be positive, got {}", a.epsilon));
    }
    if a.threshold == 0 || a.threshold > a.max_horizon {
        return input("need 1 <= --threshold <= --max-horizon");
    }
    let s = loaded.single_start(&a.start)?;
    let (reference, _) = loaded.dp_reference()?;
    let probe = uniform_value_probe(m, s, a.epsilon, a.threshold, a.max_horizon, reference[s]);
    let passes = probe.passes();
    let result = ProbeResult {
        state: m.id(s).to_owned(),
        reference: probe.reference,
        epsilon: probe.epsilon,
        threshold: probe.threshold,
        max_horizon: probe.max_horizon,
        guarantee_failure: probe.guarantee_failure,
        cap_failure: probe.cap_failure,
        play: probe.play.iter().map(|&x| m.id(x).to_owned()).collect(),
        passes,
    };
    let text = match a.output.format {
        Format::Json => Report {
            provenance: loaded.provenance(
                "probe-uniform",
                json!({"start": m.id(s), "epsilon": a.epsilon, "threshold": a.threshold,
                       "max_horizon": a.max_horizon}),
            ),
            result: &result,
        }
        .to_json_string(),
        Format::Csv => {
            #[derive(Serialize)]
            struct Row<'a> {
                state: &'a str,
                epsilon: f64,
                threshold: usize,
                max_horizon: usize,
                guarantee_failure: Option<usize>,
                cap_failure: Option<usize>,
                passes: bool,
            }
            csv_string([Row {
                state: &result.state,
                epsilon: result.epsilon,
                threshold: result.threshold,
                max_horizon: result.max_horizon,
                guarantee_failure: result.guarantee_failure,
                cap_failure: result.cap_failure,
                passes,
            }])
        }
    };
    emit(&a.output, &text, stdout)?;
    Ok(if passes { EXIT_OK } else { EXIT_VIOLATED })
}

#[derive(Debug, Serialize)]
struct CatalogRow {
    name: &'static str,
    params: String,
    description: &'static str,
}

fn cmd_corpus(c: &CorpusCommand, stdout: &mut dyn Write) -> Result<i32, InputError> {
    match c {
        CorpusCommand::List { output } => {
            let rows: Vec<CatalogRow> = corpus::catalog()
                .into_iter()
                .map(|(name, params, description)| CatalogRow {
                    name,
                    params: params
                        .iter()
                        .map(|(k, v)| format!("{k}={v}"))
                        .collect::<Vec<_>>()
                        .join(" "),
                    description,
                })
                .collect();
            let text = match output.format {
                Format::Json => {
                    let mut s = serde_json::to_string_pretty(&rows).expect("catalog serializes");
                    s.push('\n');
                    s
                }
                Format::Csv => csv_string(rows),
            };
            emit(output, &text, stdout)?;
        }
        CorpusCommand::Emit {
            name,
            positional,
            params,
            out,
        } => {
            let all: Vec<(String, i64)> = positional.iter().chain(params).cloned().collect();
            let entry = corpus::by_name(name, &collect_params(&all)?)?;
            let mut text = entry.model.to_json_string();
            text.push('\n');
            let output = OutputArgs {
                out: out.clone(),
                format: Format::Json,
            };
            emit(&output, &text, stdout)?;
        }
    }
    Ok(EXIT_OK)
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write) -> Result<i32, InputError> {
    match &cli.command {
        Command::Solve(a) => cmd_solve(a, stdout),
        Command::CheckP(a) => cmd_check_p(a, stdout),
        Command::CheckPprime(a) => cmd_check_pprime(a, stdout),
        Command::Enumerate(a) => cmd_enumerate(a, stdout),
        Command::GameSolve(a) => cmd_game_solve(a, stdout),
        Command::EvalProfile(a) => cmd_eval_profile(a, stdout),
        Command::Corpus(c) => cmd_corpus(c, stdout),
        Command::ProbeUniform(a) => cmd_probe(a, stdout),
    }
}

fn thread_cap() -> Result<Option<usize>, InputError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => input(format!("{THREADS_ENV} must be a positive integer, got `{v}`")),
        },
    }
}

/// Runs one invocation; `args` includes the program name.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let mut buf: Vec<u8> = Vec::new();
    let outcome = match thread_cap() {
        Err(e) => Err(e),
        Ok(None) => dispatch(&cli, &mut buf),
        Ok(Some(n)) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli, &mut buf)),
            Err(e) => Err(InputError(e.to_string())),
        },
    };
    match stdout.write_all(&buf) {
        Ok(()) => {}
        // reader went away (e.g. `| head`); keep the computed status
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
        Err(e) => {
            let _ = writeln!(stderr, "error: stdout: {e}");
            return EXIT_INPUT;
        }
    }
    match outcome {
        Ok(code) => code,
        Err(InputError(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_INPUT
        }
    }
}

/// [`run_with`] on the process's standard streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    let code = run_with(args, &mut out, &mut err);
    let _ = out.flush();
    code
}
