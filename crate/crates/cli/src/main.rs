use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use aztec_core::arith::{Backend, Rational};
use aztec_core::diamond::{CellGrid, Matching};
use aztec_core::exec::Exec;
use aztec_core::oracle::equivalence_suite;
use aztec_core::probs::{prob_sweep_any, AnyProbs};
use aztec_core::reduce::{build_trace, AnyTrace};
use aztec_core::regions::{embed, lift_matching, Embedding, RegionSpec};
use aztec_core::render::{add_octic_overlay, matching_scene, tiling_scene, DEFAULT_OVERLAY_RESOLUTION};
use aztec_core::series::generating_function;
use aztec_core::shuffle::{asm_of_matching, AnySampler, RandomSource};

#[derive(Parser)]
#[command(
    name = "aztec",
    version,
    about = "Weighted Aztec diamond matchings: counts, edge probabilities, random tilings"
)]
struct Cli {
    /// Worker threads for parallel stages (1 runs sequentially).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Weighted count of perfect matchings or region tilings.
    Count {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum, default_value_t = BackendArg::Exact)]
        backend: BackendArg,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Also write the diamond weighting to this file.
        #[arg(long)]
        export_weights: Option<PathBuf>,
    },
    /// Edge inclusion probabilities.
    Probs {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum, default_value_t = BackendArg::Exact)]
        backend: BackendArg,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw a random matching, lifted to a region tiling when a region is given.
    Sample(SampleArgs),
    /// Draw (or load) a matching and write it as SVG.
    Render {
        #[command(flatten)]
        sample: SampleArgs,
        /// Render this saved matching instead of sampling.
        #[arg(long)]
        matching: Option<PathBuf>,
    },
    /// Coefficients of the fortress bond generating function.
    Gf {
        #[arg(long, default_value = "1/2")]
        t: Rational,
        /// Highest diamond order included.
        #[arg(long, default_value_t = 10)]
        trunc: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare counts and probabilities with brute force on random diamonds.
    OracleCheck {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        cases: usize,
        #[arg(long, default_value_t = 4)]
        max_order: usize,
    },
}

#[derive(Args)]
struct Source {
    /// Region such as aztec:3, grid:4, hex:2,2,2 or fortress:3:t=1/2:phase=0.
    #[arg(required_unless_present = "weights", conflicts_with = "weights")]
    region: Option<String>,
    /// Weighting file as written by `count --export-weights`.
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Fortress weight, overriding any `t=` in the region.
    #[arg(long)]
    t: Option<Rational>,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = BackendArg::Exact)]
    backend: BackendArg,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Draw the octic curve over fortress tilings.
    #[arg(long)]
    overlay: bool,
    /// Contouring grid for the overlay.
    #[arg(long, default_value_t = DEFAULT_OVERLAY_RESOLUTION)]
    resolution: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    Exact,
    Eps,
    Float64,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Backend {
        match b {
            BackendArg::Exact => Backend::ExactRational,
            BackendArg::Eps => Backend::ExactEps,
            BackendArg::Float64 => Backend::Float64,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
    Svg,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] aztec_core::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Io { .. } => "IoError",
            CliError::Json(_) => "ParseError",
            CliError::Usage(_) => "InvalidInput",
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.display().to_string(), source }
}

struct Input {
    label: String,
    target: CellGrid<Rational>,
    embedding: Option<Embedding>,
}

impl Source {
    fn load(&self) -> CliResult<Input> {
        if let Some(path) = &self.weights {
            let text = fs::read_to_string(path).map_err(io_err(path))?;
            let target: CellGrid<Rational> = serde_json::from_str(&text)?;
            return Ok(Input { label: path.display().to_string(), target, embedding: None });
        }
        let text = self.region.as_deref().expect("clap requires a source");
        let mut spec: RegionSpec = text.parse()?;
        if let Some(t) = &self.t {
            match &mut spec {
                RegionSpec::Fortress { t: slot, .. } => *slot = t.clone(),
                _ => return Err(CliError::Usage("--t applies to fortress regions only".into())),
            }
            spec.validate()?;
        }
        let emb = embed(&spec)?;
        Ok(Input { label: spec.to_string(), target: emb.target.clone(), embedding: Some(emb) })
    }
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(io_err(path)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(io_err(Path::new("<stdout>")))
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

fn count(source: &Source, backend: BackendArg, format: Format, export: Option<&Path>, exec: Exec) -> CliResult<()> {
    if backend == BackendArg::Float64 {
        return Err(CliError::Usage("count needs an exact backend".into()));
    }
    let input = source.load()?;
    if let Some(path) = export {
        let text = serde_json::to_string_pretty(&input.target)?;
        fs::write(path, text + "\n").map_err(io_err(path))?;
    }
    let trace = build_trace(&input.target, backend.into(), exec)?;
    let diamond = trace.with_refinement(exec, AnyTrace::exact_count)?;
    let prefactor = input.embedding.as_ref().map_or_else(Rational::one, |e| e.prefactor.clone());
    let total = &prefactor * &diamond;
    match format {
        Format::Text => emit(None, &format!("{total}\n")),
        Format::Json => emit(
            None,
            &pretty(&json!({
                "source": input.label,
                "backend": trace.backend().to_string(),
                "diamond_count": diamond,
                "prefactor": prefactor,
                "count": total,
            })),
        ),
        _ => Err(CliError::Usage("count writes text or json".into())),
    }
}

fn probs(source: &Source, backend: BackendArg, format: Format, out: Option<&Path>, exec: Exec) -> CliResult<()> {
    if backend == BackendArg::Float64 {
        return Err(CliError::Usage("probs needs an exact backend".into()));
    }
    let input = source.load()?;
    let trace = build_trace(&input.target, backend.into(), exec)?;
    let probs = prob_sweep_any(&trace, exec)?;
    let text = match (format, &probs) {
        (Format::Csv, _) => probs.to_csv(),
        (Format::Json, AnyProbs::Exact(p)) => serde_json::to_string_pretty(p)? + "\n",
        (Format::Json, AnyProbs::Float(p)) => serde_json::to_string_pretty(p)? + "\n",
        _ => return Err(CliError::Usage("probs writes json or csv".into())),
    };
    emit(out, &text)
}

fn sample(args: &SampleArgs, saved: Option<&Path>, default_format: Format, exec: Exec) -> CliResult<()> {
    let input = args.source.load()?;
    let mut rng = match args.seed {
        Some(seed) => RandomSource::new(seed),
        None => RandomSource::from_entropy(),
    };
    eprintln!("seed: {}", rng.seed());
    let (matching, backend) = match saved {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(io_err(path))?;
            let m: Matching = serde_json::from_str(&text)?;
            if m.order() != input.target.order() || !m.is_perfect() {
                return Err(aztec_core::Error::InvalidMatching("saved matching does not fit the source".into()).into());
            }
            (m, "none".to_string())
        }
        None => {
            let trace = build_trace(&input.target, args.backend.into(), exec)?;
            let sampler = AnySampler::new(&trace)?;
            (sampler.sample(&mut rng), trace.backend().to_string())
        }
    };
    let tiling = match &input.embedding {
        Some(emb) => Some(lift_matching(&matching, emb, &mut rng)?),
        None => None,
    };
    match args.format.unwrap_or(default_format) {
        Format::Svg => {
            let mut scene = match (&input.embedding, &tiling) {
                (Some(emb), Some(t)) if !matches!(emb.spec, RegionSpec::Aztec { .. }) => tiling_scene(&emb.region, t),
                _ => matching_scene(&matching),
            };
            if args.overlay {
                match input.embedding.as_ref().map(|e| &e.spec) {
                    Some(RegionSpec::Fortress { n, .. }) => add_octic_overlay(&mut scene, *n, args.resolution),
                    _ => return Err(CliError::Usage("--overlay applies to fortress regions only".into())),
                }
            }
            emit(args.out.as_deref(), &scene.to_svg())
        }
        Format::Json => {
            let mut doc = json!({
                "seed": rng.seed(),
                "source": input.label,
                "backend": backend,
                "matching": matching,
                "asm": asm_of_matching(&matching),
            });
            if let Some(t) = &tiling {
                doc["tiling"] = json!(t.edges);
            }
            emit(args.out.as_deref(), &pretty(&doc))
        }
        _ => Err(CliError::Usage("sample writes json or svg".into())),
    }
}

fn gf(t: &Rational, trunc: usize, out: Option<&Path>) -> CliResult<()> {
    let p = generating_function(t, trunc)?;
    let terms: Vec<Value> = p.terms().map(|(i, j, n, c)| json!({ "i": i, "j": j, "n": n, "coeff": c })).collect();
    emit(out, &pretty(&json!({ "t": t, "N": trunc, "terms": terms })))
}

fn oracle_check(seed: u64, cases: usize, max_order: usize, exec: Exec) -> CliResult<bool> {
    let report = equivalence_suite(seed, cases, max_order, exec)?;
    emit(None, &pretty(&serde_json::to_value(&report)?))?;
    Ok(report.failures.is_empty())
}

fn run(cli: Cli) -> CliResult<bool> {
    let mut exec = Exec::default();
    if let Some(k) = cli.threads {
        if k == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        if k == 1 {
            exec = Exec::Sequential;
        }
        #[cfg(feature = "parallel")]
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Count { source, backend, format, export_weights } => {
            count(source, *backend, *format, export_weights.as_deref(), exec)?
        }
        Command::Probs { source, backend, format, out } => probs(source, *backend, *format, out.as_deref(), exec)?,
        Command::Sample(args) => sample(args, None, Format::Json, exec)?,
        Command::Render { sample: args, matching } => sample(args, matching.as_deref(), Format::Svg, exec)?,
        Command::Gf { t, trunc, out } => gf(t, *trunc, out.as_deref())?,
        Command::OracleCheck { seed, cases, max_order } => return oracle_check(*seed, *cases, *max_order, exec),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", json!({ "error": e.kind(), "message": e.to_string() }));
            ExitCode::from(2)
        }
    }
}
