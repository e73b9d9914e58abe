//! Command-line front end. [`execute`] runs one command line and returns
//! its exit code and output; the `sharpnfa` binary only forwards them.

mod selftest;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sharpnfa::fpras::{to_exact, FORMAT_VERSION};
use sharpnfa::{
    brute_force_count, count, determinized_count, sample_accepted, Budget, CountConfig, FprasError,
    Nfa, OracleError, Rational, RunOptions, Scalar, Word,
};
use sharpnfa_bench::{default_grid, run_suite, write_csv, Cell, SuiteConfig};
use sharpnfa_rpq::{compile_query, GraphError, LabeledGraph, RpqError};

#[derive(Parser)]
#[command(
    name = "sharpnfa",
    version,
    about = "Approximate counting and sampling of NFA languages"
)]
struct Cli {
    /// Worker threads for the parallel parts (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate |L(A_n)|.
    Count {
        #[arg(long)]
        nfa: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Also compute the exact count and report whether the estimate is inside the sandwich.
        #[arg(long)]
        check_oracle: bool,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Sample words of L(A_n) almost uniformly.
    Sample {
        #[arg(long)]
        nfa: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 1)]
        samples: usize,
    },
    /// Exact counts from both oracles.
    Exact {
        #[arg(long)]
        nfa: PathBuf,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Count or sample the answers of a regular path query.
    Rpq {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
        #[arg(long)]
        regex: String,
        #[command(flatten)]
        run: RunArgs,
        /// Sample this many answers instead of counting.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        check_oracle: bool,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Accuracy harness over random automata; CSV on the output, summary on stderr.
    Bench {
        /// Cells as `MxN` pairs, e.g. `4x6,6x10`.
        #[arg(long, value_delimiter = ',')]
        cells: Vec<String>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.2)]
        delta: f64,
        #[arg(long, default_value_t = 0.3)]
        density: f64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = OnOff::On)]
        fallback: OnOff,
        #[arg(long, value_enum, default_value_t = ScalarKind::Exact)]
        scalar: ScalarKind,
        #[arg(long)]
        omit_timing: bool,
        /// Exit 1 when a cell's failure rate exceeds δ + 0.05.
        #[arg(long)]
        strict: bool,
    },
    /// Run the embedded property checks.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args, Clone)]
struct RunArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    delta: f64,
    /// Defaults to fresh OS entropy; always echoed in the output.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = OnOff::On)]
    fallback: OnOff,
    #[arg(long, value_enum, default_value_t = ScheduleKind::Practical)]
    schedule: ScheduleKind,
    #[arg(long, value_enum, default_value_t = ScalarKind::Exact)]
    scalar: ScalarKind,
    /// Refuse runs whose projected work exceeds this; 0 disables the check.
    #[arg(long, default_value_t = 1e11)]
    work_limit: f64,
    /// Report wall_ms as 0 so output is byte-reproducible.
    #[arg(long)]
    omit_timing: bool,
}

#[derive(Args, Clone, Copy)]
struct BudgetArgs {
    /// Largest σ^n the brute-force oracle may enumerate.
    #[arg(long, default_value_t = 1 << 24)]
    max_words: u64,
    /// Largest m the subset construction accepts.
    #[arg(long, default_value_t = 20)]
    max_subset_states: usize,
}

impl BudgetArgs {
    fn budget(self) -> Budget {
        Budget {
            max_words: self.max_words,
            max_subset_states: self.max_subset_states,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum OnOff {
    On,
    Off,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum ScheduleKind {
    Theoretical,
    Practical,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum ScalarKind {
    Exact,
    F64,
}

enum CliError {
    Usage(String),
    Parse(String),
    Budget(String),
    Runtime(String),
    Selftest,
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Runtime(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Parse(_) => 3,
            CliError::Budget(_) => 4,
            CliError::Selftest => 5,
        }
    }
}

impl From<FprasError> for CliError {
    fn from(e: FprasError) -> Self {
        match e {
            FprasError::Params(_) | FprasError::EmptyLanguage(_) => CliError::Usage(e.to_string()),
            FprasError::WorkBudget { .. } => CliError::Budget(e.to_string()),
            e => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            e => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<RpqError> for CliError {
    fn from(e: RpqError) -> Self {
        match e {
            RpqError::Fpras(e) => e.into(),
            RpqError::Regex(_) | RpqError::Graph(GraphError::Syntax { .. }) => {
                CliError::Parse(e.to_string())
            }
            e => CliError::Usage(e.to_string()),
        }
    }
}

impl RunArgs {
    fn config(&self) -> CountConfig {
        let base = match self.schedule {
            ScheduleKind::Theoretical => CountConfig::theoretical(self.epsilon, self.delta),
            ScheduleKind::Practical => CountConfig::practical(self.epsilon, self.delta),
        };
        CountConfig {
            fallback: self.fallback == OnOff::On,
            options: RunOptions {
                work_limit: (self.work_limit > 0.0).then_some(self.work_limit),
            },
            ..base
        }
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or_else(rand::random)
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn load_nfa(path: &Path) -> Result<Nfa, CliError> {
    Nfa::parse(&read(path)?).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Result<LabeledGraph, CliError> {
    LabeledGraph::parse(&read(path)?)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct OracleCheck {
    determinized: String,
    inside: bool,
}

fn oracle_check<S: Scalar>(
    a: &Nfa,
    n: usize,
    estimate: &S,
    epsilon: f64,
    budget: Budget,
) -> Result<OracleCheck, CliError> {
    let c = determinized_count(a, n, &budget)?.total;
    Ok(OracleCheck {
        inside: sharpnfa_bench::sandwiched(&to_exact(estimate), &c, epsilon),
        determinized: c.to_string(),
    })
}

fn count_json<S: Scalar>(
    a: &Nfa,
    run: &RunArgs,
    oracle: Option<Budget>,
) -> Result<Value, CliError> {
    let r = count::<S>(a, run.n, &run.config(), run.seed())?;
    let mut report = r.report();
    if run.omit_timing {
        report.wall_ms = 0;
    }
    let mut out = serde_json::to_value(&report).expect("report serializes");
    if let Some(budget) = oracle {
        let check = oracle_check(a, run.n, &r.estimate, run.epsilon, budget)?;
        out["oracle"] = serde_json::to_value(check).expect("check serializes");
    }
    Ok(out)
}

fn sample_lines<S: Scalar>(
    a: &Nfa,
    run: &RunArgs,
    samples: usize,
    render: &dyn Fn(&Word) -> String,
) -> Result<String, CliError> {
    let seed = run.seed();
    let out = sample_accepted::<S>(a, run.n, samples, &run.config(), seed)?;
    let est = to_exact(&out.estimate);
    let mut text = format!(
        "# format={FORMAT_VERSION} version={} n={} m={} epsilon={} delta={} seed={seed} samples={samples} estimate_num={} estimate_den={} sampler_calls={}\n",
        env!("CARGO_PKG_VERSION"),
        run.n,
        a.num_states(),
        run.epsilon,
        run.delta,
        est.numer(),
        est.denom(),
        out.sampler_calls,
    );
    for w in &out.words {
        text.push_str(&render(w));
        text.push('\n');
    }
    Ok(text)
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("value serializes");
    s.push('\n');
    s
}

fn parse_cell(text: &str, template: Cell) -> Result<Cell, CliError> {
    let bad = || CliError::Usage(format!("bad cell `{text}`, expected MxN"));
    let (m, n) = text.trim().split_once('x').ok_or_else(bad)?;
    Ok(Cell {
        m: m.parse().map_err(|_| bad())?,
        n: n.parse().map_err(|_| bad())?,
        ..template
    })
}

fn run(cli: Cli, log: &mut String) -> Result<String, CliError> {
    match cli.command {
        Command::Count {
            nfa,
            run,
            check_oracle,
            budget,
        } => {
            let a = load_nfa(&nfa)?;
            let oracle = check_oracle.then(|| budget.budget());
            let v = match run.scalar {
                ScalarKind::Exact => count_json::<Rational>(&a, &run, oracle)?,
                ScalarKind::F64 => count_json::<f64>(&a, &run, oracle)?,
            };
            Ok(json_text(&v))
        }
        Command::Sample { nfa, run, samples } => {
            let a = load_nfa(&nfa)?;
            let sigma = a.sigma();
            let render = move |w: &Word| w.render(sigma);
            match run.scalar {
                ScalarKind::Exact => sample_lines::<Rational>(&a, &run, samples, &render),
                ScalarKind::F64 => sample_lines::<f64>(&a, &run, samples, &render),
            }
        }
        Command::Exact { nfa, n, budget } => {
            let a = load_nfa(&nfa)?;
            let brute = brute_force_count(&a, n, &budget.budget())?;
            let det = determinized_count(&a, n, &budget.budget())?.total;
            Ok(json_text(&json!({
                "format": FORMAT_VERSION,
                "version": env!("CARGO_PKG_VERSION"),
                "n": n,
                "m": a.num_states(),
                "brute": brute.to_string(),
                "determinized": det.to_string(),
                "agree": brute == det,
            })))
        }
        Command::Rpq {
            graph,
            from,
            to,
            regex,
            run,
            samples,
            check_oracle,
            budget,
        } => {
            let g = load_graph(&graph)?;
            let q = compile_query(&g, from, to, &regex)?;
            if let Some(k) = samples {
                let alphabet = g.alphabet().clone();
                let sigma = g.sigma();
                let render = move |w: &Word| match w
                    .symbols()
                    .iter()
                    .map(|&b| alphabet.literal(b))
                    .collect::<Option<String>>()
                {
                    Some(s) => s,
                    None => w.render(sigma),
                };
                return match run.scalar {
                    ScalarKind::Exact => sample_lines::<Rational>(&q.product, &run, k, &render),
                    ScalarKind::F64 => sample_lines::<f64>(&q.product, &run, k, &render),
                };
            }
            let oracle = check_oracle.then(|| budget.budget());
            let mut v = match run.scalar {
                ScalarKind::Exact => count_json::<Rational>(&q.product, &run, oracle)?,
                ScalarKind::F64 => count_json::<f64>(&q.product, &run, oracle)?,
            };
            v["query"] = json!({
                "from": from,
                "to": to,
                "regex": regex,
                "graph_nodes": g.nodes(),
                "regex_states": q.regex_nfa.num_states(),
                "product_states": q.product.num_states(),
            });
            Ok(json_text(&v))
        }
        Command::Bench {
            cells,
            trials,
            epsilon,
            delta,
            density,
            seed,
            fallback,
            scalar,
            omit_timing,
            strict,
        } => {
            let template = |c: Cell| Cell {
                epsilon,
                delta,
                density,
                trials: trials.unwrap_or(c.trials),
                ..c
            };
            let cells = if cells.is_empty() {
                default_grid().into_iter().map(template).collect()
            } else {
                cells
                    .iter()
                    .map(|t| parse_cell(t, template(Cell::new(0, 0, 40))))
                    .collect::<Result<Vec<_>, _>>()?
            };
            let config = SuiteConfig {
                cells,
                seed: seed.unwrap_or_else(rand::random),
                fallback: fallback == OnOff::On,
                omit_timing,
            };
            let report = match scalar {
                ScalarKind::Exact => run_suite::<Rational>(&config),
                ScalarKind::F64 => run_suite::<f64>(&config),
            };
            let mut csv = Vec::new();
            write_csv(&report.rows, config.seed, &mut csv)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            let mut over = false;
            for s in &report.summaries {
                let ok = s.failure_rate <= s.cell.delta + 0.05;
                over |= !ok;
                let mut line = serde_json::to_value(s).expect("summary serializes");
                line["within_threshold"] = json!(ok);
                log.push_str(&format!("{line}\n"));
            }
            if strict && over {
                return Err(CliError::Runtime(
                    "a cell exceeded its failure threshold".into(),
                ));
            }
            Ok(String::from_utf8(csv).expect("csv is utf-8"))
        }
        Command::Selftest { seed } => {
            let results = selftest::run_all(seed);
            let mut text = String::new();
            for (name, r) in &results {
                match r {
                    Ok(()) => text.push_str(&format!("ok   {name}\n")),
                    Err(e) => text.push_str(&format!("FAIL {name}: {e}\n")),
                }
            }
            if results.iter().any(|(_, r)| r.is_err()) {
                log.push_str(&text);
                return Err(CliError::Selftest);
            }
            Ok(text)
        }
    }
}

/// Result of one command line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Execution {
    pub code: u8,
    pub stdout: Vec<u8>,
    pub stderr: String,
}

impl Execution {
    fn failed(code: u8, stderr: String) -> Self {
        Self {
            code,
            stdout: Vec::new(),
            stderr,
        }
    }
}

/// Runs one command line (program name first) inside a pool of `--threads`
/// workers.
pub fn execute<I, T>(args: I) -> Execution
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Execution::failed(e.exit_code() as u8, text)
            } else {
                Execution {
                    code: 0,
                    stdout: text.into_bytes(),
                    stderr: String::new(),
                }
            };
        }
    };
    let output = cli.output.clone();
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => return Execution::failed(2, format!("error: {e}\n")),
    };
    let mut log = String::new();
    match pool.install(|| run(cli, &mut log)) {
        Ok(text) => match &output {
            Some(path) => match fs::write(path, text) {
                Ok(()) => Execution {
                    code: 0,
                    stdout: Vec::new(),
                    stderr: log,
                },
                Err(e) => Execution::failed(1, format!("{log}error: {}: {e}\n", path.display())),
            },
            None => Execution {
                code: 0,
                stdout: text.into_bytes(),
                stderr: log,
            },
        },
        Err(e) => {
            let msg = match &e {
                CliError::Usage(m)
                | CliError::Parse(m)
                | CliError::Budget(m)
                | CliError::Runtime(m) => m.as_str(),
                CliError::Selftest => "selftest failed",
            };
            Execution::failed(e.code(), format!("{log}error: {msg}\n"))
        }
    }
}
