//! The `confusion` command line.
//!
//! Every subcommand becomes a flat parameter map for
//! [`confusion_core::api::handle`], the same entry point the HTTP service
//! uses, so JSON output is byte-identical between the two.

mod svg;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind as ClapErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use confusion_core::api::{handle, ApiError, Endpoint, Limits, Params, Response, Table};

/// Environment variable naming the directory for relative `--output` paths.
pub const OUT_DIR_ENV: &str = "CONFUSION_OUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "confusion", version, about = "Exact geometry and metric distributions of binary confusion matrices")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write to this file instead of standard output. Relative paths are
    /// resolved against $CONFUSION_OUT_DIR when it is set.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Enumerate a ROC slice or all matrices of a total, or count them.
    Lattice(LatticeArgs),
    /// Project matrices into 3D (simplex, tetrahedron or barycentric).
    Project(ProjectArgs),
    /// Sample metric contours in ROC space.
    Contours(ContourArgs),
    /// Posterior predictive pmf: the joint over (TP, TN), or a metric's pmf with --metric.
    Pmf(PmfArgs),
    /// Monte Carlo check of the joint pmf.
    Oracle(OracleArgs),
    /// Map ROC points to precision-recall space.
    PrMap(PrMapArgs),
    /// List the metric catalogue.
    Metrics,
}

#[derive(Args, Debug, Default)]
pub struct SliceArgs {
    /// Number of positives p.
    #[arg(long)]
    pub pos: Option<u64>,
    /// Number of negatives n.
    #[arg(long)]
    pub neg: Option<u64>,
}

#[derive(Args, Debug, Default)]
pub struct CountArgs {
    /// True positives.
    #[arg(long)]
    pub tp: Option<u64>,
    /// False positives.
    #[arg(long)]
    pub fp: Option<u64>,
    /// False negatives.
    #[arg(long = "fn")]
    pub fn_: Option<u64>,
    /// True negatives.
    #[arg(long)]
    pub tn: Option<u64>,
}

#[derive(Args, Debug, Default)]
pub struct ModelArgs {
    /// binomial or beta-binomial.
    #[arg(long)]
    pub model: Option<String>,
    /// Beta prior `u,v` for both rates.
    #[arg(long)]
    pub prior: Option<String>,
    /// Beta prior `u,v` for the true positive rate.
    #[arg(long)]
    pub prior_tp: Option<String>,
    /// Beta prior `u,v` for the true negative rate.
    #[arg(long)]
    pub prior_tn: Option<String>,
}

#[derive(Args, Debug)]
pub struct LatticeArgs {
    /// Enumerate every matrix with this total instead of a slice.
    #[arg(long)]
    pub total: Option<u64>,
    #[command(flatten)]
    pub slice: SliceArgs,
    /// Print only the number of matrices.
    #[arg(long)]
    pub count_only: bool,
}

#[derive(Args, Debug)]
pub struct ProjectArgs {
    /// simplex, tetra or bary.
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub total: Option<u64>,
    #[command(flatten)]
    pub slice: SliceArgs,
    #[command(flatten)]
    pub counts: CountArgs,
}

#[derive(Args, Debug)]
pub struct ContourArgs {
    #[arg(long)]
    pub metric: String,
    /// Comma-separated levels; `sqrt(q)` and `-sqrt(q)` are accepted.
    #[arg(long, allow_hyphen_values = true)]
    pub levels: Option<String>,
    #[command(flatten)]
    pub slice: SliceArgs,
    /// `lo,hi` for a square window or `x0,x1,y0,y1`.
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<String>,
    #[arg(long)]
    pub steps: Option<u64>,
    /// Benefit matrix `a,b,c,d` for the decision-benefit metric.
    #[arg(long, allow_hyphen_values = true)]
    pub benefits: Option<String>,
}

#[derive(Args, Debug)]
pub struct PmfArgs {
    #[command(flatten)]
    pub counts: CountArgs,
    #[command(flatten)]
    pub slice: SliceArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Push the joint through this metric.
    #[arg(long)]
    pub metric: Option<String>,
    /// Central interval mass for the metric summary.
    #[arg(long)]
    pub interval: Option<String>,
    /// Histogram bins for the metric pmf.
    #[arg(long)]
    pub bins: Option<u64>,
    /// Benefit matrix `a,b,c,d` for the decision-benefit metric.
    #[arg(long, allow_hyphen_values = true)]
    pub benefits: Option<String>,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[command(flatten)]
    pub counts: CountArgs,
    #[command(flatten)]
    pub slice: SliceArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub draws: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct PrMapArgs {
    #[command(flatten)]
    pub slice: SliceArgs,
    #[arg(long)]
    pub fpr: Option<String>,
    #[arg(long)]
    pub tpr: Option<String>,
}

#[derive(Default)]
struct ParamBuilder(Params);

impl ParamBuilder {
    fn put(&mut self, key: &str, value: Option<impl ToString>) -> &mut Self {
        if let Some(v) = value {
            self.0.insert(key.to_string(), v.to_string());
        }
        self
    }

    fn slice(&mut self, s: &SliceArgs) -> &mut Self {
        self.put("pos", s.pos).put("neg", s.neg)
    }

    fn counts(&mut self, c: &CountArgs) -> &mut Self {
        self.put("tp", c.tp).put("fp", c.fp).put("fn", c.fn_).put("tn", c.tn)
    }

    fn model(&mut self, m: &ModelArgs) -> &mut Self {
        self.put("model", m.model.as_ref())
            .put("prior", m.prior.as_ref())
            .put("prior_tp", m.prior_tp.as_ref())
            .put("prior_tn", m.prior_tn.as_ref())
    }
}

impl Command {
    /// The service endpoint and parameter map equivalent to this command.
    pub fn request(&self) -> (Endpoint, Params) {
        let mut b = ParamBuilder::default();
        let endpoint = match self {
            Command::Lattice(a) => {
                b.put("total", a.total).slice(&a.slice).put("count_only", a.count_only.then_some("true"));
                Endpoint::Lattice
            }
            Command::Project(a) => {
                b.put("kind", a.kind.as_ref()).put("total", a.total).slice(&a.slice).counts(&a.counts);
                Endpoint::Project
            }
            Command::Contours(a) => {
                b.put("metric", Some(&a.metric))
                    .put("levels", a.levels.as_ref())
                    .slice(&a.slice)
                    .put("window", a.window.as_ref())
                    .put("steps", a.steps)
                    .put("benefits", a.benefits.as_ref());
                Endpoint::Contours
            }
            Command::Pmf(a) => {
                b.counts(&a.counts)
                    .slice(&a.slice)
                    .model(&a.model)
                    .put("metric", a.metric.as_ref())
                    .put("interval", a.interval.as_ref())
                    .put("bins", a.bins)
                    .put("benefits", a.benefits.as_ref());
                if a.metric.is_some() {
                    Endpoint::MetricPmf
                } else {
                    Endpoint::JointPmf
                }
            }
            Command::Oracle(a) => {
                b.counts(&a.counts).slice(&a.slice).model(&a.model).put("draws", a.draws).put("seed", a.seed);
                Endpoint::Oracle
            }
            Command::PrMap(a) => {
                b.slice(&a.slice).put("fpr", a.fpr.as_ref()).put("tpr", a.tpr.as_ref());
                Endpoint::PrMap
            }
            Command::Metrics => Endpoint::Metrics,
        };
        (endpoint, b.0)
    }
}

/// Result of one invocation: what to print and the exit status.
#[derive(Debug, Default)]
pub struct Outcome {
    pub code: u8,
    pub stdout: Vec<u8>,
    pub stderr: String,
}

impl Outcome {
    fn failure(code: i32, message: String) -> Self {
        Outcome { code: code as u8, stdout: Vec::new(), stderr: message }
    }
}

fn api_failure(e: &ApiError) -> Outcome {
    Outcome::failure(e.exit_code(), format!("error[{}]: {}\n", e.code, e.message))
}

pub fn render_csv(table: &Table) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.headers)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.into_inner().map_err(|e| e.into_error().into())
}

fn render(format: Format, response: &Response) -> Result<Vec<u8>, ApiError> {
    match format {
        Format::Json => Ok(response.to_json_string().into_bytes()),
        Format::Csv => render_csv(&response.table).map_err(|e| ApiError::usage("io", e.to_string())),
        Format::Svg => match &response.plot {
            Some(plot) => Ok(svg::render(plot).into_bytes()),
            None => Err(ApiError::usage("no_plot", "this command has no SVG rendering")),
        },
    }
}

fn resolve(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

/// Runs one invocation; `args` includes the program name.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion => {
                    Outcome { code: 0, stdout: text.into_bytes(), stderr: String::new() }
                }
                _ => Outcome::failure(2, text),
            };
        }
    };
    let (endpoint, params) = cli.command.request();
    let bytes = match handle(endpoint, &params, &Limits::default()).and_then(|r| render(cli.format, &r)) {
        Ok(bytes) => bytes,
        Err(e) => return api_failure(&e),
    };
    match &cli.output {
        None => Outcome { code: 0, stdout: bytes, stderr: String::new() },
        Some(path) => {
            let path = resolve(path);
            let written = path
                .parent()
                .filter(|d| !d.as_os_str().is_empty())
                .map_or(Ok(()), std::fs::create_dir_all)
                .and_then(|_| std::fs::write(&path, &bytes));
            match written {
                Ok(()) => Outcome::default(),
                Err(e) => Outcome::failure(1, format!("error[io]: cannot write {}: {e}\n", path.display())),
            }
        }
    }
}
