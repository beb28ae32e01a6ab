//! The `rdwd` command-line tool: train, predict, simulate and report.

pub mod report;
pub mod table;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use rdwd_core::baselines::default_ldwd_penalty;
use rdwd_core::data::format_real;
use rdwd_core::rdwd::{ClassWeights, InitMode, Penalty};
use rdwd_core::simlab::{run_scenario, ExperimentScenario};
use rdwd_core::{fit, ldwd_fit, md_fit, Label, Model, ModelFile, RdwdConfig, Scorer};

use table::{CoverageTable, RowLabel};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("fit failed: {0}")]
    Fit(String),
    #[error("dimension mismatch: {0}")]
    Mismatch(String),
    #[error("scenario error: {0}")]
    Scenario(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Fit(_) => 3,
            CliError::Mismatch(_) => 4,
            CliError::Scenario(_) => 5,
            CliError::Io(_) => 1,
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

#[derive(Debug, Parser)]
#[command(name = "rdwd", version, about = "Radial distance weighted discrimination")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a classifier to a labeled CSV and write a model file.
    Train(TrainArgs),
    /// Score samples: `sample_id,signed_distance,predicted_label`.
    Predict(PredictArgs),
    /// Run a simulation scenario and write its error table.
    Simulate(SimulateArgs),
    /// Error rates plus jitter and density data for a labeled CSV.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Rdwd,
    Md,
    Ldwd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    Mean,
    Median,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// CSV with header `sample_id,label,...`.
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "rdwd")]
    pub method: MethodArg,
    /// Slack penalty C; chosen from the data when omitted.
    #[arg(long)]
    pub penalty: Option<f64>,
    /// Outer-loop stopping threshold on the objective change.
    #[arg(long, default_value_t = 1e-4)]
    pub eps: f64,
    /// Trust-region radius on the center update.
    #[arg(long, default_value_t = 1e-3)]
    pub delta: f64,
    /// `auto` or `w+,w-`.
    #[arg(long, default_value = "auto")]
    pub weights: String,
    #[arg(long, value_enum, default_value = "mean")]
    pub init: InitArg,
    /// Features are already on the simplex; skip L1 normalization.
    #[arg(long)]
    pub no_normalize: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    pub model: PathBuf,
    pub input: PathBuf,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub scenario: PathBuf,
    /// Replaces the scenario's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Dimensions up to 100000, 5000 test samples, 30 replications.
    #[arg(long)]
    pub full: bool,
    /// Directory receiving `error_table.csv` and `plot_data.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    pub model: PathBuf,
    pub input: PathBuf,
    /// Seed of the jitter heights.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory receiving `metrics.csv`, `jitter.csv` and `kde.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Train(a) => cmd_train(&a),
        Command::Predict(a) => cmd_predict(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Report(a) => cmd_report(&a),
    }
}

fn read_table(path: &Path) -> Result<CoverageTable, CliError> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    CoverageTable::read(std::io::BufReader::new(file))
        .map_err(|e| match e {
            CliError::Parse(m) => CliError::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
}

fn read_model(path: &Path) -> Result<ModelFile, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    ModelFile::parse(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| io_err(path, e))
}

fn parse_weights(text: &str) -> Result<ClassWeights, CliError> {
    if text == "auto" {
        return Ok(ClassWeights::Auto);
    }
    let bad = || CliError::Parse(format!("--weights expects `auto` or `w+,w-`, got `{text}`"));
    let (p, m) = text.split_once(',').ok_or_else(bad)?;
    let plus: f64 = p.trim().parse().map_err(|_| bad())?;
    let minus: f64 = m.trim().parse().map_err(|_| bad())?;
    Ok(ClassWeights::Fixed { plus, minus })
}

pub fn cmd_train(a: &TrainArgs) -> Result<(), CliError> {
    let weights = parse_weights(&a.weights)?;
    let table = read_table(&a.input)?;
    let data = table.training_set(!a.no_normalize)?;
    let mut out = String::new();
    let model = match a.method {
        MethodArg::Rdwd => {
            let config = RdwdConfig {
                penalty: a.penalty.map_or(Penalty::Auto, Penalty::Fixed),
                stop_eps: a.eps,
                step_length: a.delta,
                weights,
                init: match a.init {
                    InitArg::Mean => InitMode::MeanPlus,
                    InitArg::Median => InitMode::MedianPlus,
                },
                ..RdwdConfig::default()
            };
            let result = fit(&data, &config).map_err(|e| CliError::Fit(e.to_string()))?;
            for w in &result.warnings {
                eprintln!("warning: {w}");
            }
            let m = &result.model;
            out += &format!("outer_iterations {}\n", m.iterations);
            out += &format!("objective {}\n", format_real(m.objective));
            out += &format!(
                "kkt_max_residual {}\n",
                format_real(result.certificate.kkt_residuals.max_residual())
            );
            out += &format!("converged {}\n", m.converged);
            out += &format!("radius {}\n", format_real(m.radius));
            Model::Sphere(result.model)
        }
        MethodArg::Md => Model::Hyperplane(md_fit(&data).map_err(|e| CliError::Fit(e.to_string()))?),
        MethodArg::Ldwd => {
            let c = a.penalty.unwrap_or_else(|| default_ldwd_penalty(&data));
            let m = ldwd_fit(&data, c).map_err(|e| CliError::Fit(e.to_string()))?;
            out += &format!("penalty {}\n", format_real(c));
            Model::Hyperplane(m)
        }
    };
    let file = ModelFile::new(model).with_meta("normalize", &(!a.no_normalize).to_string());
    write_file(&a.out, &file.to_text())?;
    let mut stdout = std::io::stdout().lock();
    let _ = write!(
        stdout,
        "method {}\nsamples {} (+1: {}, -1: {}, zero -1 dropped: {})\n{out}",
        file.model.method_name(),
        data.n(),
        data.n_pos(),
        data.n_neg(),
        table
            .rows
            .iter()
            .filter(|r| r.label == Some(RowLabel::Known(Label::Negative))
                && r.features.iter().all(|&v| v == 0.0))
            .count(),
    );
    Ok(())
}

/// Signed distances of every row of `input` under the model in `model`.
fn score_table(model: &ModelFile, table: &CoverageTable) -> Result<Vec<f64>, CliError> {
    if table.dim != model.model.dim() {
        return Err(CliError::Mismatch(format!(
            "model has d = {}, input has d = {}",
            model.model.dim(),
            table.dim
        )));
    }
    let normalize = model.meta("normalize") != Some("false");
    let scorer: &dyn Scorer = model.model.scorer();
    table
        .prepared(normalize)?
        .iter()
        .map(|p| {
            p.signed_distance(scorer)
                .map_err(|e| CliError::Mismatch(e.to_string()))
        })
        .collect()
}

fn predicted(distance: f64) -> Label {
    if distance >= 0.0 {
        Label::Positive
    } else {
        Label::Negative
    }
}

fn csv_string(rows: impl IntoIterator<Item = Vec<String>>) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for row in rows {
        w.write_record(&row).map_err(|e| CliError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

pub fn cmd_predict(a: &PredictArgs) -> Result<(), CliError> {
    let model = read_model(&a.model)?;
    let table = read_table(&a.input)?;
    let distances = score_table(&model, &table)?;
    let header = ["sample_id", "signed_distance", "predicted_label"].map(String::from).to_vec();
    let body = table.rows.iter().zip(&distances).map(|(row, &d)| {
        vec![row.sample_id.clone(), format_real(d), predicted(d).token().to_string()]
    });
    let text = csv_string(std::iter::once(header).chain(body))?;
    match &a.out {
        Some(path) => write_file(path, &text),
        None => {
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
            Ok(())
        }
    }
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let text = fs::read_to_string(&a.scenario).map_err(|e| io_err(&a.scenario, e))?;
    let mut scenario = ExperimentScenario::parse(&text)
        .map_err(|e| CliError::Scenario(format!("{}: {e}", a.scenario.display())))?;
    if let Some(seed) = a.seed {
        scenario.seed = seed;
    }
    if a.full {
        scenario = scenario.full();
    }
    let table = run_scenario(&scenario).map_err(|e| CliError::Scenario(e.to_string()))?;
    for row in &table.rows {
        for f in &row.failures {
            eprintln!("warning: {} d = {}: {f}", row.method.name(), row.d);
        }
    }
    fs::create_dir_all(&a.out).map_err(|e| io_err(&a.out, e))?;
    let csv = table.to_csv();
    write_file(&a.out.join("error_table.csv"), &csv)?;
    write_file(&a.out.join("plot_data.csv"), &table.plot_data_csv())?;
    let _ = std::io::stdout().lock().write_all(csv.as_bytes());
    Ok(())
}

pub fn cmd_report(a: &ReportArgs) -> Result<(), CliError> {
    let model = read_model(&a.model)?;
    let table = read_table(&a.input)?;
    if !table.labeled {
        return Err(CliError::Parse("report needs a label column".into()));
    }
    let distances = score_table(&model, &table)?;
    let truth: Vec<Option<Label>> = table
        .rows
        .iter()
        .map(|r| r.label.and_then(RowLabel::known))
        .collect();

    let count = |class: Label| {
        let in_class = truth.iter().zip(&distances).filter(|(t, _)| **t == Some(class));
        let total = in_class.clone().count();
        let wrong = in_class.filter(|(_, &d)| predicted(d) != class).count();
        (wrong, total)
    };
    let (fp, neg) = count(Label::Negative);
    let (fnr, pos) = count(Label::Positive);
    if neg + pos == 0 {
        return Err(CliError::Parse("no labeled samples".into()));
    }
    let rate = |k: usize, n: usize| {
        if n == 0 {
            "NA".to_string()
        } else {
            format_real(k as f64 / n as f64)
        }
    };
    let metrics = csv_string([
        ["metric", "count", "total", "rate"].map(String::from).to_vec(),
        vec!["false_positive".into(), fp.to_string(), neg.to_string(), rate(fp, neg)],
        vec!["false_negative".into(), fnr.to_string(), pos.to_string(), rate(fnr, pos)],
    ])?;

    let heights = report::jitter(table.rows.len(), a.seed);
    let header = ["sample_id", "label", "signed_distance", "jitter"].map(String::from).to_vec();
    let jitter_rows = table.rows.iter().zip(&distances).zip(&heights).map(|((row, &d), &h)| {
        let label = row.label.map_or("unknown", RowLabel::token).to_string();
        vec![row.sample_id.clone(), label, format_real(d), format_real(h)]
    });
    let jitter = csv_string(std::iter::once(header).chain(jitter_rows))?;

    let mut kde_rows = vec![["label", "x", "density"].map(String::from).to_vec()];
    for class in [Label::Positive, Label::Negative] {
        let finite: Vec<f64> = truth
            .iter()
            .zip(&distances)
            .filter(|(t, d)| **t == Some(class) && d.is_finite())
            .map(|(_, &d)| d)
            .collect();
        if finite.is_empty() {
            continue;
        }
        for (x, y) in report::kde(&finite) {
            kde_rows.push(vec![class.token().into(), format_real(x), format_real(y)]);
        }
    }
    let kde = csv_string(kde_rows)?;

    fs::create_dir_all(&a.out).map_err(|e| io_err(&a.out, e))?;
    write_file(&a.out.join("metrics.csv"), &metrics)?;
    write_file(&a.out.join("jitter.csv"), &jitter)?;
    write_file(&a.out.join("kde.csv"), &kde)?;
    let _ = std::io::stdout().lock().write_all(metrics.as_bytes());
    Ok(())
}
