//! Operator command line.
//!
//! Exit codes: 0 success, 1 evaluation/verification failure (reports are
//! still written), 2 usage or configuration errors.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::Result;
use crate::executor::Executor;
use crate::metrics::{aggregate, read_attempt_log, write_attempt_log, GroupBy};
use crate::pipeline::{attempt_records, eval_batch, write_transcript_log, Pipeline, Strategy};
use crate::problem::Dataset;
use crate::provider::{ProviderConfig, SamplingParams};
use crate::runner::Registry;
use crate::service::{ConfigLayer, ServiceConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser)]
#[command(name = "evalbox", about = "Sandboxed code-evaluation harness", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Start the HTTP service.
    Serve(ServeArgs),
    /// Run every problem's reference solution through the pipeline.
    Verify(VerifyArgs),
    /// Evaluate a provider over a dataset and write judgment logs.
    Eval(EvalArgs),
    /// Compute grouped pass rates from a judgment log.
    Metrics(MetricsArgs),
    /// Debug code extraction on a saved response.
    Extract(ExtractArgs),
}

#[derive(Args)]
struct ServeArgs {
    /// Listen address, e.g. 127.0.0.1:8572
    #[arg(long)]
    listen: Option<String>,
    /// TOML config file; values in it override flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Datasets to load, as NAME=PATH. Repeatable.
    #[arg(long = "dataset", value_name = "NAME=PATH")]
    datasets: Vec<String>,
    /// Execution worker pool size.
    #[arg(long)]
    workers: Option<usize>,
    /// Runner-profile TOML merged over the built-ins.
    #[arg(long)]
    runners: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Problem file to verify.
    #[arg(long)]
    dataset: PathBuf,
    /// Runner-profile TOML merged over the built-ins.
    #[arg(long)]
    runners: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Problem file to evaluate.
    #[arg(long)]
    dataset: PathBuf,
    /// Provider: replay:FIXTURE.json, scripted:NAME, or remote:URL.
    #[arg(long)]
    provider: String,
    /// Strategy: single, bon:N, or reflect:N.
    #[arg(long, default_value = "single")]
    strategy: String,
    /// Output directory for judgments, transcripts, and the report.
    #[arg(long)]
    out: PathBuf,
    /// Sampling temperature.
    #[arg(long, default_value_t = 0.0)]
    temperature: f64,
    /// Completion token budget.
    #[arg(long, default_value_t = 2048)]
    max_tokens: u32,
    /// Runner-profile TOML merged over the built-ins.
    #[arg(long)]
    runners: Option<PathBuf>,
}

#[derive(Args)]
struct MetricsArgs {
    /// Judgment log (JSON lines of attempt records).
    #[arg(long)]
    judgments: PathBuf,
    /// Problem file supplying labels.
    #[arg(long)]
    dataset: PathBuf,
    /// Grouping: domain, programming_language, difficulty,
    /// natural_language.
    #[arg(long = "group-by")]
    group_by: String,
    /// Output format: table or json.
    #[arg(long, default_value = "table")]
    format: String,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExtractArgs {
    /// File holding the raw model response.
    #[arg(long)]
    response: PathBuf,
    /// Target language for extraction.
    #[arg(long)]
    lang: String,
}

/// Run the CLI; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            // clap renders help/version on stdout with exit 0
            let code = if err.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_OK
            };
            let _ = err.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Serve(args) => cmd_serve(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Metrics(args) => cmd_metrics(args),
        Command::Extract(args) => cmd_extract(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            EXIT_USAGE
        }
    }
}

fn build_registry(runners: Option<&PathBuf>) -> Result<Registry> {
    let mut registry = Registry::builtin();
    if let Some(path) = runners {
        registry.merge_toml_file(path)?;
    }
    Ok(registry)
}

fn cmd_serve(args: ServeArgs) -> Result<i32> {
    let mut datasets = BTreeMap::new();
    for entry in &args.datasets {
        let (name, path) = entry.split_once('=').ok_or_else(|| {
            crate::error::Error::Config(format!("dataset {entry:?} is not NAME=PATH"))
        })?;
        datasets.insert(name.to_string(), PathBuf::from(path));
    }
    let flags = ConfigLayer {
        listen: args.listen,
        workers: args.workers,
        limits: None,
        datasets: if datasets.is_empty() {
            None
        } else {
            Some(datasets)
        },
        scratch_root: None,
        runners: args.runners,
    };
    let config = ServiceConfig::resolve(flags, args.config.as_deref())?;
    let runtime = tokio::runtime::Runtime::new()
        .map_err(|e| crate::error::Error::Config(format!("tokio runtime: {e}")))?;
    runtime.block_on(crate::service::serve(config))?;
    Ok(EXIT_OK)
}

fn cmd_verify(args: VerifyArgs) -> Result<i32> {
    let dataset = Dataset::load(&args.dataset)?;
    let registry = build_registry(args.runners.as_ref())?;
    let pipeline = Pipeline::new(Executor::new(registry));

    let mut failures = 0usize;
    for problem in dataset.problems() {
        let judgment = pipeline.verify_reference(problem);
        let mark = if judgment.passed { "ok  " } else { "FAIL" };
        if !judgment.passed {
            failures += 1;
            let kind = judgment.failure_kind.map(|k| k.name()).unwrap_or("unknown");
            println!("{mark} {} ({kind})", problem.id);
        } else {
            println!("{mark} {}", problem.id);
        }
    }
    let total = dataset.len();
    println!("verified {}/{} references pass", total - failures, total);
    Ok(if failures == 0 { EXIT_OK } else { EXIT_FAILURE })
}

fn parse_provider(text: &str) -> Result<ProviderConfig> {
    if let Some(path) = text.strip_prefix("replay:") {
        return Ok(ProviderConfig::replay(path));
    }
    if let Some(name) = text.strip_prefix("scripted:") {
        return Ok(ProviderConfig::scripted(name));
    }
    if let Some(url) = text.strip_prefix("remote:") {
        let endpoint = if url.is_empty() {
            std::env::var("MODEL_API_BASE").map_err(|_| {
                crate::error::Error::Config("remote: with no URL requires MODEL_API_BASE".into())
            })?
        } else {
            url.to_string()
        };
        return Ok(ProviderConfig::remote(endpoint, "MODEL_API_KEY"));
    }
    Err(crate::error::Error::Config(format!(
        "unknown provider {text:?} (expected replay:PATH, scripted:NAME, or remote:URL)"
    )))
}

fn cmd_eval(args: EvalArgs) -> Result<i32> {
    let dataset = Dataset::load(&args.dataset)?;
    let strategy = Strategy::parse(&args.strategy)?;
    let provider_config = parse_provider(&args.provider)?;
    let provider = provider_config.build(Some(&dataset))?;
    let registry = build_registry(args.runners.as_ref())?;
    let pipeline = Pipeline::new(Executor::new(registry));
    let params = SamplingParams {
        temperature: args.temperature,
        max_tokens: args.max_tokens,
    };

    std::fs::create_dir_all(&args.out).map_err(|e| crate::error::Error::io(&args.out, e))?;

    let results = eval_batch(&pipeline, &dataset, provider.as_ref(), &params, strategy);

    let records = attempt_records(&results, &dataset);
    write_attempt_log(args.out.join("judgments.jsonl"), &records)?;
    write_transcript_log(args.out.join("transcript.jsonl"), &results)?;

    let report = aggregate(&records, &dataset, GroupBy::ProgrammingLanguage)?;
    std::fs::write(
        args.out.join("report.json"),
        serde_json::to_string_pretty(&report)?,
    )
    .map_err(|e| crate::error::Error::io(args.out.join("report.json"), e))?;
    std::fs::write(args.out.join("report.txt"), report.to_table())
        .map_err(|e| crate::error::Error::io(args.out.join("report.txt"), e))?;

    let passed = results.iter().filter(|r| r.judgment.passed).count();
    println!(
        "evaluated {} problems: {} passed, {} failed (strategy {strategy})",
        results.len(),
        passed,
        results.len() - passed,
    );

    // harness-level failures (not model failures) surface in the exit code
    let setup_failures = results
        .iter()
        .filter(|r| r.judgment.failure_kind == Some(crate::judge::FailureKind::SetupError))
        .count();
    Ok(if setup_failures == 0 {
        EXIT_OK
    } else {
        EXIT_FAILURE
    })
}

fn cmd_metrics(args: MetricsArgs) -> Result<i32> {
    let records = read_attempt_log(&args.judgments)?;
    let dataset = Dataset::load(&args.dataset)?;
    let group_by = GroupBy::parse(&args.group_by)?;
    let report = aggregate(&records, &dataset, group_by)?;
    let rendered = match args.format.as_str() {
        "table" => report.to_table(),
        "json" => serde_json::to_string_pretty(&report)?,
        other => {
            return Err(crate::error::Error::Config(format!(
                "unknown format {other:?} (expected table or json)"
            )))
        }
    };
    match args.out {
        Some(path) => {
            std::fs::write(&path, rendered).map_err(|e| crate::error::Error::io(&path, e))?
        }
        None => print!("{rendered}"),
    }
    Ok(EXIT_OK)
}

fn cmd_extract(args: ExtractArgs) -> Result<i32> {
    let response = std::fs::read_to_string(&args.response)
        .map_err(|e| crate::error::Error::io(&args.response, e))?;
    let language = crate::lang::Language::from_name(&args.lang);
    let result = crate::extract::extract_code(&response, &language);
    println!("{}", serde_json::to_string_pretty(&result)?);
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn provider_shorthand_parses() {
        assert!(matches!(
            parse_provider("replay:fix.json").unwrap().kind,
            crate::provider::ProviderKind::Replay
        ));
        assert!(matches!(
            parse_provider("scripted:echo").unwrap().kind,
            crate::provider::ProviderKind::Scripted
        ));
        assert!(parse_provider("bogus").is_err());
    }

    #[test]
    fn usage_error_exits_2() {
        assert_eq!(run(["evalbox", "not-a-command"]), EXIT_USAGE);
        assert_eq!(run(["evalbox", "verify"]), EXIT_USAGE); // missing --dataset
    }

    #[test]
    fn help_exits_0() {
        assert_eq!(run(["evalbox", "--help"]), EXIT_OK);
    }
}
