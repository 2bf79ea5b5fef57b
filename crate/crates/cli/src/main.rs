use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use ccp_core::ccp::{t_distribution, t_expectation, w_distribution};
use ccp_core::checks::{self, Check};
use ccp_core::combinatorics::{el_cdf_continuous, harmonic_real};
use ccp_core::popularity::{parse_weight_list, PopularitySpec};
use ccp_core::scalar::{format_float, ratio_to_f64};
use ccp_core::sim::{sim_lru_miss_rate, sim_waiting_time, sim_working_set, SimConfig, SimReport};
use ccp_core::subsets::set_max_subsets;
use ccp_core::ws_lru::{
    delta_expectation, fagin_miss_rate, mr_delta_product, working_set, working_set_inverse, ws_powerlaw_inverse,
    PowerLawModel, WsBase, WsCurve,
};
use ccp_core::{CheckReport, Error, ExactPopularity, FloatPopularity, Popularity, Rational, Scalar};

#[derive(Parser, Debug)]
#[command(name = "ccp", version, about = "Coupon collector and LRU miss-rate calculator")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Arithmetic used for distribution sums.
    #[arg(long, value_enum, default_value_t = Mode::Float, global = true)]
    mode: Mode,

    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,

    /// Seed for the simulator.
    #[arg(long, default_value_t = 1, global = true)]
    seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Float,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Var {
    #[value(name = "T")]
    T,
    #[value(name = "W")]
    W,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SimVar {
    #[value(name = "T")]
    T,
    #[value(name = "W")]
    W,
    Lru,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Base {
    Exact,
    Exp,
}

impl From<Base> for WsBase {
    fn from(b: Base) -> Self {
        match b {
            Base::Exact => WsBase::Exact,
            Base::Exp => WsBase::Exp,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Recipe {
    #[value(name = "fig-pdf-N12")]
    FigPdfN12,
    #[value(name = "erdos-renyi")]
    ErdosRenyi,
    #[value(name = "cdf-at-expectation-N15")]
    CdfAtExpectationN15,
    #[value(name = "appendix14-N6")]
    Appendix14N6,
    #[value(name = "powerlaw-fit-N20")]
    PowerlawFitN20,
}

#[derive(Args, Debug, Clone)]
#[group(id = "source", multiple = false)]
struct PopArgs {
    /// JSON file `{"weights": [...]}`.
    #[arg(long, group = "source")]
    file: Option<PathBuf>,

    #[arg(long, value_name = "N", group = "source")]
    uniform: Option<usize>,

    /// Power law `p_i ~ 1/i^a`.
    #[arg(long, num_args = 2, value_names = ["N", "A"], group = "source")]
    powerlaw: Option<Vec<String>>,

    /// Comma separated weights, e.g. `1,2,1/2,0.25`.
    #[arg(long, group = "source", allow_hyphen_values = true)]
    weights: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Distribution table of T_n or W_k.
    Dist {
        #[command(flatten)]
        pop: PopArgs,
        #[arg(long, value_enum, default_value_t = Var::T)]
        var: Var,
        /// Target number of distinct items (T); defaults to N.
        #[arg(long)]
        n: Option<usize>,
        /// Last k of the T table; defaults to about 2 N H_N.
        #[arg(long)]
        kmax: Option<u32>,
        /// Number of draws (W).
        #[arg(long)]
        k: Option<u32>,
    },
    /// E[T_n] and the forward difference E[T_{n+1}] - E[T_n].
    Expect {
        #[command(flatten)]
        pop: PopArgs,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Working set WS(t) at given times, or its inverse at given sizes.
    Ws {
        #[command(flatten)]
        pop: PopArgs,
        #[arg(long, value_enum, default_value_t = Base::Exact)]
        base: Base,
        /// Comma separated times.
        #[arg(long, conflicts_with = "j")]
        t: Option<String>,
        /// Comma separated sizes for the inverse; defaults to 1..N-1.
        #[arg(long)]
        j: Option<String>,
    },
    /// Fagin miss rate, E[T_{j+1}] - E[T_j] and their product.
    Lru {
        #[command(flatten)]
        pop: PopArgs,
        /// Cache size; defaults to every 1 <= j < N.
        #[arg(long)]
        j: Option<usize>,
    },
    /// Monte Carlo estimate of E[T_n], E[W_k] or the LRU miss rate.
    Sim {
        #[command(flatten)]
        pop: PopArgs,
        #[arg(long, value_enum, default_value_t = SimVar::T)]
        var: SimVar,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<u64>,
        #[arg(long)]
        j: Option<usize>,
        #[arg(long, default_value_t = 1000)]
        reps: u64,
        /// References per replication (LRU).
        #[arg(long, default_value_t = 100_000)]
        stream: u64,
        /// Uncounted leading references (LRU); defaults to 10 N H_N.
        #[arg(long)]
        warmup: Option<u64>,
    },
    /// Property suite as JSON; with a popularity, the inequality and identity
    /// checks on that popularity only.
    Verify {
        #[command(flatten)]
        pop: PopArgs,
        /// Add the N = 6 grid search and a 1000-point fuzz run.
        #[arg(long)]
        full: bool,
    },
    /// Data behind a named figure or table.
    Repro {
        #[arg(value_enum)]
        recipe: Recipe,
    },
}

/// Failure with its exit status.
#[derive(Debug)]
enum Failure {
    Validation(String),
    Capacity(String),
    Checks(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Capacity(_) => 2,
            Failure::Checks(_) => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Validation(_) => "validation",
            Failure::Capacity(_) => "capacity",
            Failure::Checks(_) => "check_failure",
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Capacity(m) | Failure::Checks(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Capacity { .. } => Failure::Capacity(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn invalid<T>(msg: impl Into<String>) -> Outcome<T> {
    Err(Failure::Validation(msg.into()))
}

#[derive(Debug, Clone)]
enum Cell {
    Int(i128),
    Float(f64),
    Text(String),
}

impl Cell {
    fn of<S: Scalar>(v: &S) -> Cell {
        if S::EXACT {
            Cell::Text(v.render())
        } else {
            Cell::Float(v.to_f64())
        }
    }

    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(f) => format_float(*f),
            Cell::Text(s) if s.contains([',', '"']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(f) if f.is_finite() => format_float(*f),
            Cell::Float(_) => "null".into(),
            Cell::Text(s) => serde_json::to_string(s).expect("string serializes"),
        }
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v.into())
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i128)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn render(&self, format: Format) -> String {
        let mut out = String::new();
        match format {
            Format::Csv => {
                out.push_str(&self.columns.join(","));
                out.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
            }
            Format::Json => {
                out.push('[');
                for (r, row) in self.rows.iter().enumerate() {
                    if r > 0 {
                        out.push(',');
                    }
                    out.push_str("\n  {");
                    for (i, (c, v)) in self.columns.iter().zip(row).enumerate() {
                        if i > 0 {
                            out.push_str(", ");
                        }
                        let _ = write!(out, "\"{c}\": {}", v.json());
                    }
                    out.push('}');
                }
                out.push_str("\n]\n");
            }
        }
        out
    }
}

/// Popularity source resolved to weights or a power law.
enum Source {
    Weights(Vec<Rational>),
    PowerLaw(usize, f64),
}

fn resolve(args: &PopArgs) -> Outcome<Source> {
    if let Some(path) = &args.file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Validation(format!("cannot read {}: {e}", path.display())))?;
        return Ok(Source::Weights(PopularitySpec::from_json(&text)?.rationals()?));
    }
    if let Some(n) = args.uniform {
        return Ok(Source::Weights(vec![Rational::from_integer(1.into()); n]));
    }
    if let Some(v) = &args.powerlaw {
        let n: usize = v[0].parse().map_err(|_| Failure::Validation(format!("bad N {:?}", v[0])))?;
        let a: f64 = v[1].parse().map_err(|_| Failure::Validation(format!("bad skewness {:?}", v[1])))?;
        return Ok(Source::PowerLaw(n, a));
    }
    if let Some(w) = &args.weights {
        return Ok(Source::Weights(parse_weight_list(w)?));
    }
    invalid("a popularity source is required: --file, --uniform, --powerlaw or --weights")
}

fn exact_pop(src: &Source) -> Outcome<ExactPopularity> {
    match src {
        Source::Weights(w) => Ok(ExactPopularity::from_weights(w.clone())?),
        Source::PowerLaw(n, a) => {
            if a.fract() != 0.0 || *a < 0.0 || *a > u32::MAX as f64 {
                return invalid(format!("exact mode needs a non-negative integer skewness, got {a}"));
            }
            Ok(ExactPopularity::power_law(*n, *a as u32)?)
        }
    }
}

fn float_pop(src: &Source) -> Outcome<FloatPopularity> {
    match src {
        Source::Weights(w) => Ok(FloatPopularity::from_weights(w.iter().map(ratio_to_f64).collect())?),
        Source::PowerLaw(n, a) => Ok(FloatPopularity::power_law_real(*n, *a)?),
    }
}

/// Runs `$body` with `$pop` bound to the popularity in the selected mode.
macro_rules! with_pop {
    ($mode:expr, $args:expr, |$pop:ident| $body:expr) => {{
        let src = resolve($args)?;
        match $mode {
            Mode::Exact => {
                let $pop = exact_pop(&src)?;
                $body
            }
            Mode::Float => {
                let $pop = float_pop(&src)?;
                $body
            }
        }
    }};
}

fn parse_list(text: &str) -> Outcome<Vec<f64>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<f64>().map_err(|_| Failure::Validation(format!("not a number: {s:?}"))))
        .collect()
}

fn dist<S: Scalar>(pop: &Popularity<S>, var: Var, n: Option<usize>, kmax: Option<u32>, k: Option<u32>) -> Outcome<Table> {
    let big_n = pop.len();
    let table = match var {
        Var::T => {
            if k.is_some() {
                return invalid("--k applies to --var W; use --kmax for T");
            }
            let n = n.unwrap_or(big_n);
            let default_kmax = (2.0 * big_n as f64 * harmonic_real(big_n as u64, 1.0)).ceil() as u32;
            let kmax = kmax.unwrap_or(default_kmax.max(n as u32));
            let t = t_distribution(pop, n, kmax)?;
            let mut out = Table::new(&["k", "pdf", "cdf", "ccdf"]);
            for (x, p, c, cc) in t.rows() {
                out.push(vec![x.into(), Cell::of(p), Cell::of(c), Cell::of(cc)]);
            }
            out
        }
        Var::W => {
            if n.is_some() || kmax.is_some() {
                return invalid("--n and --kmax apply to --var T; use --k for W");
            }
            let Some(k) = k else {
                return invalid("--var W needs --k");
            };
            let w = w_distribution(pop, k)?;
            let mut out = Table::new(&["n", "pdf", "cdf", "ccdf"]);
            for (x, p, c, cc) in w.rows() {
                out.push(vec![x.into(), Cell::of(p), Cell::of(c), Cell::of(cc)]);
            }
            out
        }
    };
    Ok(table)
}

fn expect<S: Scalar>(pop: &Popularity<S>, n: Option<usize>) -> Outcome<Table> {
    let big_n = pop.len();
    let range = match n {
        Some(n) if n > big_n => return invalid(format!("n = {n} exceeds N = {big_n}")),
        Some(n) => n..=n,
        None => 1..=big_n,
    };
    let mut out = Table::new(&["n", "expectation", "delta"]);
    for m in range {
        let e = t_expectation(pop, m)?;
        let delta = if m < big_n {
            Cell::of(&delta_expectation(pop, m)?)
        } else {
            Cell::Text(String::new())
        };
        out.push(vec![m.into(), Cell::of(&e), delta]);
    }
    Ok(out)
}

fn ws<S: Scalar>(pop: &Popularity<S>, base: Base, t: Option<&str>, j: Option<&str>) -> Outcome<Table> {
    let curve = WsCurve::new(pop, base.into());
    if let Some(t) = t {
        let mut out = Table::new(&["t", "ws"]);
        for x in parse_list(t)? {
            if !(x >= 0.0) {
                return invalid(format!("time must be >= 0, got {x}"));
            }
            out.push(vec![x.into(), working_set(&curve, x).into()]);
        }
        return Ok(out);
    }
    let js = match j {
        Some(j) => parse_list(j)?,
        None => (1..pop.len()).map(|j| j as f64).collect(),
    };
    let mut out = Table::new(&["j", "ws_inverse"]);
    for x in js {
        out.push(vec![x.into(), working_set_inverse(&curve, x)?.into()]);
    }
    Ok(out)
}

fn lru<S: Scalar>(pop: &Popularity<S>, j: Option<usize>) -> Outcome<Table> {
    let n = pop.len();
    let range = match j {
        Some(j) if j == 0 || j >= n => return invalid(format!("cache size must satisfy 1 <= j < N = {n}, got {j}")),
        Some(j) => j..=j,
        None => 1..=n - 1,
    };
    let curve = WsCurve::new(pop, WsBase::Exact);
    let mut out = Table::new(&["j", "miss_rate", "delta_e", "product"]);
    for j in range {
        // uniform: both factors are rational
        let (mr, delta) = if pop.is_uniform() {
            let (n, j) = (n as i64, j as i64);
            (Cell::of(&S::from_ratio(n - j, n)), Cell::of(&S::from_ratio(n, n - j)))
        } else {
            (fagin_miss_rate(&curve, j as f64)?.into(), Cell::of(&delta_expectation(pop, j)?))
        };
        let product = mr_delta_product(pop, j)?;
        let product = if S::EXACT && pop.is_uniform() {
            Cell::Text(Rational::from_float(product).map(|r| r.to_string()).unwrap_or_default())
        } else {
            product.into()
        };
        out.push(vec![j.into(), mr, delta, product]);
    }
    Ok(out)
}

const SIM_COLUMNS: [&str; 5] = ["quantity", "estimate", "sample_variance", "replications", "ci95_halfwidth"];

fn sim_row(label: String, r: &SimReport) -> Vec<Cell> {
    vec![
        label.into(),
        r.estimate.into(),
        r.sample_variance.into(),
        r.replications.into(),
        r.ci95_halfwidth.into(),
    ]
}

#[allow(clippy::too_many_arguments)]
fn sim<S: Scalar>(
    pop: &Popularity<S>,
    var: SimVar,
    n: Option<usize>,
    k: Option<u64>,
    j: Option<usize>,
    cfg: SimConfig,
) -> Outcome<Table> {
    let mut out = Table::new(&SIM_COLUMNS);
    match var {
        SimVar::T => {
            let n = n.unwrap_or(pop.len());
            out.push(sim_row(format!("T_{n}"), &sim_waiting_time(pop, n, &cfg)?));
        }
        SimVar::W => {
            let Some(k) = k else {
                return invalid("--var W needs --k");
            };
            out.push(sim_row(format!("W_{k}"), &sim_working_set(pop, k, &cfg)?));
        }
        SimVar::Lru => {
            let Some(j) = j else {
                return invalid("--var lru needs --j");
            };
            out.push(sim_row(format!("MR_{j}"), &sim_lru_miss_rate(pop, j, &cfg)?));
        }
    }
    Ok(out)
}

fn reports_json(reports: &[CheckReport]) -> String {
    let mut s = serde_json::to_string_pretty(reports).expect("reports serialize");
    s.push('\n');
    s
}

fn verify_pop<S: Scalar>(pop: &Popularity<S>) -> Outcome<Vec<CheckReport>> {
    let mut set = Check::inequality_set(pop.len());
    set.push(Check::WsSandwich);
    set.push(Check::Identities { k_max: 4 });
    let mut reports = set.iter().map(|c| c.run(pop)).collect::<ccp_core::Result<Vec<_>>>()?;
    reports.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(reports)
}

fn verify_outcome(reports: Vec<CheckReport>) -> Outcome<String> {
    let text = reports_json(&reports);
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
    if failed.is_empty() {
        Ok(text)
    } else {
        print!("{text}");
        Err(Failure::Checks(format!("{} failing reports: {}", failed.len(), failed.join(", "))))
    }
}

fn repro(recipe: Recipe) -> Outcome<Table> {
    match recipe {
        Recipe::FigPdfN12 => {
            const N: usize = 12;
            const K_MAX: u32 = 200;
            let mut out = Table::new(&["popularity", "k", "pdf", "log10_pdf"]);
            for (name, a) in [("uniform", 0.0), ("zipf", 1.0), ("powerlaw_0.5", 0.5)] {
                let pop = FloatPopularity::power_law_real(N, a)?;
                let t = t_distribution(&pop, N, K_MAX)?;
                for (k, p, _, _) in t.rows() {
                    if k >= N as u64 {
                        out.push(vec![name.into(), k.into(), (*p).into(), p.log10().into()]);
                    }
                }
            }
            Ok(out)
        }
        Recipe::ErdosRenyi => {
            let limit = (-(-0.577_215_664_901_532_9f64).exp()).exp();
            let mut out = Table::new(&["n", "k", "cdf", "limit"]);
            for n in [10u64, 30, 100, 300, 1000, 3000, 10000] {
                let k = n as f64 * harmonic_real(n, 1.0);
                out.push(vec![n.into(), k.into(), el_cdf_continuous(n, k).into(), limit.into()]);
            }
            Ok(out)
        }
        Recipe::CdfAtExpectationN15 => {
            let mut out = Table::new(&["a", "expectation", "cdf_at_expectation"]);
            for a in [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0] {
                let pop = FloatPopularity::power_law_real(15, a)?;
                let e = t_expectation(&pop, 15)?;
                let v = ccp_core::ccp::complete_cdf_continuous(&pop, e)?;
                out.push(vec![a.into(), e.into(), v.into()]);
            }
            Ok(out)
        }
        Recipe::Appendix14N6 => {
            let rows = checks::appendix14_rows(6, 0.01)?;
            let mut out = Table::new(&[
                "j",
                "max_observed",
                "published_max",
                "bound",
                "el_value",
                "min_observed",
                "argmax",
                "argmin",
            ]);
            let join = |p: &[f64]| p.iter().map(|x| format!("{x:.5}")).collect::<Vec<_>>().join(";");
            for r in rows {
                out.push(vec![
                    r.j.into(),
                    r.max_observed.into(),
                    checks::APPENDIX14_N6_MAXIMA[r.j - 2].into(),
                    r.bound.into(),
                    r.el_value.into(),
                    r.min_observed.into(),
                    join(&r.argmax).into(),
                    join(&r.argmin).into(),
                ]);
            }
            Ok(out)
        }
        Recipe::PowerlawFitN20 => {
            const N: usize = 20;
            let mut out = Table::new(&["a", "n", "expectation", "ws_inverse_continuum"]);
            for a in [0.1, 1.0] {
                let pop = FloatPopularity::power_law_real(N, a)?;
                let model = PowerLawModel::new(N, a)?;
                for n in 1..N {
                    let e = t_expectation(&pop, n)?;
                    out.push(vec![a.into(), n.into(), e.into(), ws_powerlaw_inverse(&model, n as f64)?.into()]);
                }
            }
            Ok(out)
        }
    }
}

fn run(cli: Cli) -> Outcome<String> {
    if let Ok(cap) = std::env::var("CCP_MAX_SUBSETS") {
        let cap: u64 = cap
            .trim()
            .parse()
            .map_err(|_| Failure::Validation(format!("CCP_MAX_SUBSETS must be a positive integer, got {cap:?}")))?;
        if cap == 0 {
            return invalid("CCP_MAX_SUBSETS must be positive");
        }
        set_max_subsets(cap);
    }
    let format = cli.format;
    let table = match &cli.command {
        Command::Dist { pop, var, n, kmax, k } => with_pop!(cli.mode, pop, |p| dist(&p, *var, *n, *kmax, *k))?,
        Command::Expect { pop, n } => with_pop!(cli.mode, pop, |p| expect(&p, *n))?,
        Command::Ws { pop, base, t, j } => with_pop!(cli.mode, pop, |p| ws(&p, *base, t.as_deref(), j.as_deref()))?,
        Command::Lru { pop, j } => with_pop!(cli.mode, pop, |p| lru(&p, *j))?,
        Command::Sim {
            pop,
            var,
            n,
            k,
            j,
            reps,
            stream,
            warmup,
        } => {
            let cfg = SimConfig::new(cli.seed, *reps).with_stream(*stream, *warmup);
            with_pop!(cli.mode, pop, |p| sim(&p, *var, *n, *k, *j, cfg))?
        }
        Command::Verify { pop, full } => {
            let given = pop.file.is_some() || pop.uniform.is_some() || pop.powerlaw.is_some() || pop.weights.is_some();
            let reports = if given {
                with_pop!(cli.mode, pop, |p| verify_pop(&p))?
            } else {
                checks::run_suite(*full)?
            };
            return verify_outcome(reports);
        }
        Command::Repro { recipe } => repro(*recipe)?,
    };
    Ok(table.render(format))
}

fn report_failure(f: &Failure) {
    let line = json!({ "error": f.kind(), "code": f.code(), "message": f.message() });
    eprintln!("{line}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let f = Failure::Validation(e.render().to_string().trim().to_string());
            report_failure(&f);
            return ExitCode::from(f.code());
        }
    };
    match run(cli) {
        Ok(text) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::FAILURE;
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            report_failure(&f);
            ExitCode::from(f.code())
        }
    }
}
