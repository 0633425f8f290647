//! Command-line front end for the whole pipeline.
//!
//! Five subcommands cover the stages: `discover` mines a model from an
//! event log, `conform` scores a model against a teacher log, `reward`
//! scores response batches, `extract` turns one text into a trace, and
//! `train` runs the policy optimizer. Every command is deterministic under
//! a fixed seed and fixed inputs. Exit codes: 0 success, 1 usage or input
//! error, 2 domain error such as an unreachable final marking.

use std::ffi::OsString;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::conformance::{align, conformance_check, AlignmentMove, ConformanceError};
use crate::discovery::{discover_tree, tree_to_petri, NetError, PetriNet};
use crate::eventlog::{read_log_file, write_log_file, EventLog, LogFormat};
use crate::extract::{extract_trace, extract_trace_remote};
use crate::gspo::{train_weighted, DEFAULT_PRIME_BIAS};
use crate::reward::{total_reward, Query, RolloutText};

#[derive(Parser)]
#[command(
    name = "thip",
    version,
    about = "Process-mining rewards for sequence policies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mine a process tree and Petri net from an event log.
    Discover {
        /// Event log file (JSONL or XES).
        log: PathBuf,
        /// Log format; inferred from the extension when omitted.
        #[arg(long)]
        format: Option<String>,
        /// Write the model here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Score a Petri net against a teacher event log.
    Conform {
        /// Petri net in the textual format written by `discover`.
        model: PathBuf,
        /// Teacher event log file.
        teacher_log: PathBuf,
        /// Log format; inferred from the extension when omitted.
        #[arg(long)]
        format: Option<String>,
        /// Print the alignment moves for every trace.
        #[arg(long)]
        dump: bool,
        /// Run configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Score a batch of responses against a teacher event log.
    Reward {
        /// JSONL records {query_id, text, ground_truth}.
        responses: PathBuf,
        /// Teacher event log file.
        teacher_log: PathBuf,
        /// Log format; inferred from the extension when omitted.
        #[arg(long)]
        format: Option<String>,
        /// Write score records here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Segment and label one text file into a trace.
    Extract {
        /// Plain text file holding the response or reasoning.
        text: PathBuf,
        /// Case identifier for the trace; default is the file stem.
        #[arg(long)]
        case_id: Option<String>,
        /// Write a single-trace event log here instead of printing steps.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Output log format; inferred from the extension when omitted.
        #[arg(long)]
        format: Option<String>,
        /// Label via the configured remote service instead of local rules.
        #[arg(long)]
        remote: bool,
        /// Run configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Optimize the toy policy on the configured synthetic task.
    Train {
        /// Run configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Seed override; wins over config and environment.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory override.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A command failure carrying its exit code.
#[derive(Debug)]
enum CliError {
    /// Unusable input or configuration: exit 1.
    Input(String),
    /// The inputs were readable but the domain rejected them: exit 2.
    Domain(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Domain(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Domain(m) => m,
        }
    }
}

fn input_error(err: impl std::fmt::Display) -> CliError {
    CliError::Input(err.to_string())
}

fn conformance_error(err: ConformanceError) -> CliError {
    match err {
        ConformanceError::FinalMarkingUnreachable | ConformanceError::StateBoundExceeded(_) => {
            CliError::Domain(err.to_string())
        }
        other => CliError::Input(other.to_string()),
    }
}

fn net_error(err: NetError) -> CliError {
    match err {
        NetError::StateBoundExceeded(_) => CliError::Domain(err.to_string()),
        other => CliError::Input(other.to_string()),
    }
}

/// Parses `args` and runs the selected command, returning the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Discover {
            log,
            format,
            out,
            config,
        } => cmd_discover(&log, format.as_deref(), out.as_deref(), config.as_deref()),
        Command::Conform {
            model,
            teacher_log,
            format,
            dump,
            config,
        } => cmd_conform(
            &model,
            &teacher_log,
            format.as_deref(),
            dump,
            config.as_deref(),
        ),
        Command::Reward {
            responses,
            teacher_log,
            format,
            out,
            config,
        } => cmd_reward(
            &responses,
            &teacher_log,
            format.as_deref(),
            out.as_deref(),
            config.as_deref(),
        ),
        Command::Extract {
            text,
            case_id,
            out,
            format,
            remote,
            config,
        } => cmd_extract(
            &text,
            case_id.as_deref(),
            out.as_deref(),
            format.as_deref(),
            remote,
            config.as_deref(),
        ),
        Command::Train { config, seed, out } => cmd_train(config.as_deref(), seed, out.as_deref()),
    };
    match result {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {}", err.message());
            err.code()
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, CliError> {
    let config = match path {
        Some(p) => RunConfig::load(p),
        None => RunConfig::from_env(),
    };
    config.map_err(input_error)
}

/// Picks the log format from an explicit name or the file extension.
fn detect_format(path: &Path, name: Option<&str>) -> Result<LogFormat, CliError> {
    if let Some(name) = name {
        return LogFormat::from_name(name)
            .ok_or_else(|| CliError::Input(format!("unknown log format {name:?}")));
    }
    let extension = path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase();
    match extension.as_str() {
        "xes" => Ok(LogFormat::Xes),
        "jsonl" | "ndjson" | "json" => Ok(LogFormat::Jsonl),
        other => Err(CliError::Input(format!(
            "cannot infer log format from extension {other:?}; pass --format"
        ))),
    }
}

fn write_text_output(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(input_error),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_discover(
    log_path: &Path,
    format: Option<&str>,
    out: Option<&Path>,
    config: Option<&Path>,
) -> Result<(), CliError> {
    let config = load_config(config)?;
    let log_path = config.resolve_input(log_path);
    let format = detect_format(&log_path, format)?;
    let log = read_log_file(&log_path, format).map_err(input_error)?;
    let tree = discover_tree(&log).map_err(input_error)?;
    let net = tree_to_petri(&tree).map_err(input_error)?;
    let text = format!("# tree: {tree}\n{}", net.to_text());
    write_text_output(out, &text)
}

fn cmd_conform(
    model_path: &Path,
    teacher_path: &Path,
    format: Option<&str>,
    dump: bool,
    config: Option<&Path>,
) -> Result<(), CliError> {
    let config = load_config(config)?;
    let model_path = config.resolve_input(model_path);
    let teacher_path = config.resolve_input(teacher_path);
    let model_text = fs::read_to_string(&model_path).map_err(input_error)?;
    let net = PetriNet::from_text(&model_text).map_err(net_error)?;
    let format = detect_format(&teacher_path, format)?;
    let teacher = read_log_file(&teacher_path, format).map_err(input_error)?;
    let result = conformance_check(&net, &teacher).map_err(conformance_error)?;
    println!(
        "fitness={:.6} precision={:.6} f1={:.6}",
        result.fitness, result.precision, result.f1
    );
    if dump {
        for trace in teacher.traces() {
            let alignment = align(&net, trace.activities()).map_err(conformance_error)?;
            println!("case {}", trace.case_id());
            for step in &alignment.moves {
                match step {
                    AlignmentMove::Synchronous { label } => println!("  sync {label}"),
                    AlignmentMove::LogMove { label } => println!("  log {label}"),
                    AlignmentMove::ModelMove { label: Some(label) } => println!("  model {label}"),
                    AlignmentMove::ModelMove { label: None } => println!("  tau"),
                }
            }
            println!("cost {}", alignment.total_cost);
        }
    }
    Ok(())
}

/// One line of the `reward` input batch.
#[derive(Debug, Deserialize)]
struct ResponseRecord {
    query_id: Option<String>,
    text: Option<String>,
    ground_truth: Option<String>,
}

/// One line of the `reward` output.
#[derive(Debug, Serialize)]
struct ScoreRecord {
    query_id: String,
    format: f64,
    answer: f64,
    conformance: f64,
    total: f64,
}

fn cmd_reward(
    responses_path: &Path,
    teacher_path: &Path,
    format: Option<&str>,
    out: Option<&Path>,
    config: Option<&Path>,
) -> Result<(), CliError> {
    let config = load_config(config)?;
    let responses_path = config.resolve_input(responses_path);
    let teacher_path = config.resolve_input(teacher_path);
    let rules = config.to_rules().map_err(input_error)?;
    let format = detect_format(&teacher_path, format)?;
    let teacher = read_log_file(&teacher_path, format).map_err(input_error)?;
    let file = fs::File::open(&responses_path).map_err(input_error)?;

    let mut lines = Vec::new();
    for (number, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(input_error)?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ResponseRecord = match serde_json::from_str(&line) {
            Ok(record) => record,
            Err(err) => {
                log::warn!("skipping response line {}: {err}", number + 1);
                continue;
            }
        };
        let (Some(query_id), Some(text), Some(ground_truth)) =
            (record.query_id, record.text, record.ground_truth)
        else {
            log::warn!(
                "skipping response line {}: missing query_id, text, or ground_truth",
                number + 1
            );
            continue;
        };
        let query = Query {
            id: query_id.clone(),
            prompt: String::new(),
            ground_truth,
        };
        let rollout = RolloutText::parse(text);
        let breakdown = total_reward(&query, &rollout, &teacher, &rules);
        let score = ScoreRecord {
            query_id,
            format: breakdown.format,
            answer: breakdown.answer,
            conformance: breakdown.conformance,
            total: breakdown.total,
        };
        lines.push(serde_json::to_string(&score).expect("score records serialize"));
    }

    let mut text = lines.join("\n");
    if !text.is_empty() {
        text.push('\n');
    }
    write_text_output(out, &text)
}

fn cmd_extract(
    text_path: &Path,
    case_id: Option<&str>,
    out: Option<&Path>,
    format: Option<&str>,
    remote: bool,
    config: Option<&Path>,
) -> Result<(), CliError> {
    let config = load_config(config)?;
    let text_path = config.resolve_input(text_path);
    let text = fs::read_to_string(&text_path).map_err(input_error)?;
    let case_id = match case_id {
        Some(id) => id.to_string(),
        None => text_path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("case")
            .to_string(),
    };
    let trace = if remote {
        let labeler = config
            .labeler_config()
            .map_err(input_error)?
            .ok_or_else(|| {
                CliError::Input("--remote needs a [labeler] section or THIP_LABELER_* vars".into())
            })?;
        extract_trace_remote(&text, &labeler, &case_id).map_err(input_error)?
    } else {
        let rules = config.to_rules().map_err(input_error)?;
        extract_trace(&text, &rules, &case_id)
    };
    match out {
        Some(path) => {
            let format = detect_format(path, format)?;
            let log = EventLog::from_trace(trace);
            write_log_file(path, &log, format).map_err(input_error)
        }
        None => {
            for activity in trace.activities() {
                println!("{activity}");
            }
            Ok(())
        }
    }
}

fn cmd_train(
    config: Option<&Path>,
    seed: Option<u64>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let config = load_config(config)?;
    let gspo = config.gspo_config(seed).map_err(input_error)?;
    let task = config.to_task().map_err(input_error)?;
    let weights = config.reward_weights().map_err(input_error)?;
    let out_dir = out.unwrap_or_else(|| config.out_dir()).to_path_buf();
    fs::create_dir_all(&out_dir).map_err(input_error)?;

    let params = task
        .format_primed_policy(DEFAULT_PRIME_BIAS)
        .map_err(input_error)?;
    let report = train_weighted(params, &task, &gspo, &weights).map_err(input_error)?;

    let report_path = out_dir.join("report.jsonl");
    let mut report_file = fs::File::create(&report_path).map_err(input_error)?;
    report
        .write_step_jsonl(&mut report_file)
        .map_err(input_error)?;
    let policy_path = out_dir.join("policy.json");
    let mut policy_json =
        serde_json::to_string_pretty(&report.final_params).expect("policy serializes");
    policy_json.push('\n');
    fs::write(&policy_path, policy_json).map_err(input_error)?;

    let means = report.window_means(100);
    println!("steps={} group_size={} seed={}", gspo.steps, gspo.group_size, gspo.seed);
    println!(
        "final100 format={:.6} answer={:.6} conformance={:.6} total={:.6}",
        means.format, means.answer, means.conformance, means.total
    );
    println!("report={}", report_path.display());
    println!("policy={}", policy_path.display());
    let _ = std::io::stdout().flush();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_detection_prefers_the_flag() {
        let path = Path::new("log.xes");
        assert_eq!(
            detect_format(path, Some("jsonl")).unwrap(),
            LogFormat::Jsonl
        );
        assert_eq!(detect_format(path, None).unwrap(), LogFormat::Xes);
        assert_eq!(
            detect_format(Path::new("x.ndjson"), None).unwrap(),
            LogFormat::Jsonl
        );
        assert!(detect_format(Path::new("x.csv"), None).is_err());
        assert!(detect_format(path, Some("csv")).is_err());
    }

    #[test]
    fn exit_codes_separate_input_and_domain_errors() {
        assert_eq!(CliError::Input("x".into()).code(), 1);
        assert_eq!(CliError::Domain("x".into()).code(), 2);
        assert_eq!(
            conformance_error(ConformanceError::FinalMarkingUnreachable).code(),
            2
        );
        assert_eq!(
            conformance_error(ConformanceError::EmptyTeacherLog).code(),
            1
        );
    }

    #[test]
    fn response_records_tolerate_extra_fields() {
        let record: ResponseRecord =
            serde_json::from_str(r#"{"query_id":"q","text":"t","ground_truth":"1","note":"x"}"#)
                .unwrap();
        assert_eq!(record.query_id.as_deref(), Some("q"));
        assert_eq!(record.text.as_deref(), Some("t"));
        assert_eq!(record.ground_truth.as_deref(), Some("1"));
    }
}
