use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use tabrex_core::executor::{execute_plan, RunOutcome};
use tabrex_core::explain::{parse_explanation, render, validate_refs, RenderMode};
use tabrex_core::formatter::{format_table, FormatMode};
use tabrex_core::gateway::{build_gateway, Gateway};
use tabrex_core::harness::{evaluate, load_records, synthesize, tool_stats, Config, Method, RecordSchema, SynthModule};
use tabrex_core::plan::{parse_plan, validate_plan};
use tabrex_core::table::{parse_table, Table, TableFormat};
use tabrex_core::toolkit::{builtin_registry, Registry};

#[derive(Parser)]
#[command(name = "tabrex", version, about = "Table reasoning with function-call plans")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Clean and standardize a table; prints the canonical form and a report.
    Format(FormatArgs),
    /// Execute a plan over a table and print the outcome as JSON.
    Run(RunArgs),
    /// Check an explanation against a plan and render it.
    Explain(ExplainArgs),
    /// Evaluate a method over a record file.
    Eval(EvalArgs),
    /// Build training data from teacher outputs.
    Synth(SynthArgs),
    /// Tool registry and usage analytics.
    Tools {
        #[command(subcommand)]
        command: ToolsCommand,
    },
}

#[derive(Args)]
struct TableArgs {
    /// Table file.
    #[arg(long)]
    table: PathBuf,
    /// csv, markdown, or json_rows. Guessed from the extension when omitted.
    #[arg(long)]
    table_format: Option<TableFormat>,
}

#[derive(Args)]
struct FormatArgs {
    #[command(flatten)]
    table: TableArgs,
    #[arg(long, default_value = "")]
    query: String,
    #[arg(long, default_value = "rules")]
    mode: FormatMode,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    table: TableArgs,
    /// Plan file in the single-assignment DSL.
    #[arg(long)]
    plan: PathBuf,
    /// Execute over the table as given, without rule formatting.
    #[arg(long)]
    raw: bool,
    /// Extra tool registry (TOML) replacing the builtin one.
    #[arg(long)]
    registry: Option<PathBuf>,
}

#[derive(Args)]
struct ExplainArgs {
    #[command(flatten)]
    table: TableArgs,
    #[arg(long)]
    plan: PathBuf,
    /// Explanation text with `<<<###k>>>` call references.
    #[arg(long)]
    explanation: PathBuf,
    #[arg(long, default_value = "symbolic")]
    mode: RenderMode,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    records: PathBuf,
    #[arg(long)]
    method: Method,
    /// Metrics output file.
    #[arg(long)]
    out: PathBuf,
    /// Directory for per-record outcome files.
    #[arg(long)]
    traces: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    records: PathBuf,
    /// Output directory for the three record streams and stats.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ToolsCommand {
    /// Call frequencies, categories, and overlap from trace directories.
    Stats {
        #[arg(long)]
        traces: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Out-of-domain trace directory for the overlap figures.
        #[arg(long)]
        ood: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        top_k: usize,
    },
    /// Print the builtin registry as TOML.
    Registry,
}

fn load_config(path: Option<&Path>) -> Result<Config> {
    let mut config = match path {
        Some(p) => Config::load(p).map_err(anyhow::Error::msg)?,
        None => Config::default(),
    };
    config.gateway = config.gateway.with_env_overrides();
    Ok(config)
}

fn gateway(config: &Config) -> Result<Box<dyn Gateway>> {
    build_gateway(&config.gateway).context("cannot build gateway")
}

fn read_table(args: &TableArgs) -> Result<Table> {
    let text = fs::read_to_string(&args.table).with_context(|| format!("cannot read {}", args.table.display()))?;
    let format = match args.table_format {
        Some(f) => f,
        None => match args.table.extension().and_then(|e| e.to_str()) {
            Some("md") | Some("markdown") => TableFormat::Markdown,
            Some("json") => TableFormat::JsonRows,
            _ => TableFormat::Csv,
        },
    };
    parse_table(&text, format).map_err(|e| anyhow::anyhow!("{}: {e}", args.table.display()))
}

fn read_plan(path: &Path) -> Result<tabrex_core::plan::Plan> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_plan(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn read_traces(dir: &Path) -> Result<Vec<RunOutcome>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("cannot read {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    let mut outcomes = Vec::new();
    for p in paths {
        let value: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(&p)?).with_context(|| format!("{} is not JSON", p.display()))?;
        let outcome = value.get("outcome").cloned().unwrap_or(value);
        outcomes
            .push(serde_json::from_value(outcome).with_context(|| format!("{} is not a run outcome", p.display()))?);
    }
    Ok(outcomes)
}

fn cmd_format(args: FormatArgs) -> Result<()> {
    let table = read_table(&args.table)?;
    let config = load_config(args.config.as_deref())?;
    let gw = match args.mode {
        FormatMode::Llm => Some(gateway(&config)?),
        FormatMode::Rules => None,
    };
    let (formatted, report) = format_table(
        &table,
        &args.query,
        args.mode,
        gw.as_deref().map(|g| (g, config.gateway.token_budget)),
    )?;
    print_json(&json!({
        "table": formatted.serialize_canonical(),
        "report": report,
    }))
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let mut table = read_table(&args.table)?;
    if !args.raw {
        table = tabrex_core::formatter::format_rules(&table).0;
    }
    let plan = read_plan(&args.plan)?;
    let registry = match &args.registry {
        Some(p) => Registry::from_toml(&fs::read_to_string(p)?)?,
        None => builtin_registry(),
    };
    for d in validate_plan(&plan, &registry) {
        eprintln!("{d}");
    }
    let outcome = execute_plan(&plan, &table, &registry);
    print_json(&outcome)?;
    if !outcome.executable {
        std::process::exit(2);
    }
    Ok(())
}

fn cmd_explain(args: ExplainArgs) -> Result<()> {
    let table = tabrex_core::formatter::format_rules(&read_table(&args.table)?).0;
    let plan = read_plan(&args.plan)?;
    let text = fs::read_to_string(&args.explanation)?;
    let expl = parse_explanation(text.trim())?;
    let diagnostics = validate_refs(&expl, &plan);
    let outcome = execute_plan(&plan, &table, &builtin_registry());
    let rendered = render(&expl, &plan, &outcome, args.mode)?;
    print_json(&json!({
        "diagnostics": diagnostics,
        "rendered": rendered,
    }))
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let config = load_config(args.config.as_deref())?;
    let records = load_records(&args.records, RecordSchema::JsonlV1, &config.labels)?;
    if records.is_empty() {
        bail!("{} has no records", args.records.display());
    }
    let gw = gateway(&config)?;
    let registry = builtin_registry();
    let report = evaluate(&records, args.method, gw.as_ref(), &config, &registry);
    write_json(&args.out, &report.metrics)?;
    if let Some(dir) = &args.traces {
        fs::create_dir_all(dir)?;
        for r in &report.results {
            write_json(&dir.join(format!("{}.json", file_stem(&r.id))), r)?;
        }
    }
    eprintln!(
        "{}: accuracy {:.1}, execution rate {:.1} over {} records",
        report.metrics.method, report.metrics.accuracy, report.metrics.execution_rate, report.metrics.n
    );
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let config = load_config(args.config.as_deref())?;
    let records = load_records(&args.records, RecordSchema::JsonlV1, &config.labels)?;
    let gw = gateway(&config)?;
    let (out, stats) = synthesize(&records, gw.as_ref(), &config, &builtin_registry());
    fs::create_dir_all(&args.out)?;
    for (module, name) in [
        (SynthModule::Formatter, "formatter.jsonl"),
        (SynthModule::Toolmaker, "toolmaker.jsonl"),
        (SynthModule::Explainer, "explainer.jsonl"),
    ] {
        let mut text = String::new();
        for r in out.iter().filter(|r| r.module == module) {
            text.push_str(&serde_json::to_string(r)?);
            text.push('\n');
        }
        fs::write(args.out.join(name), text)?;
    }
    write_json(&args.out.join("stats.json"), &stats)?;
    eprintln!(
        "formatter {}, toolmaker {}, explainer {} from {} records",
        stats.formatter, stats.toolmaker, stats.explainer, stats.generated
    );
    Ok(())
}

fn cmd_tools(command: ToolsCommand) -> Result<()> {
    match command {
        ToolsCommand::Stats {
            traces,
            out,
            ood,
            top_k,
        } => {
            let outcomes = read_traces(&traces)?;
            let ood = ood.as_deref().map(read_traces).transpose()?;
            let stats = tool_stats(&outcomes, ood.as_deref(), &builtin_registry(), top_k);
            write_json(&out, &stats)
        }
        ToolsCommand::Registry => {
            print!("{}", builtin_registry().to_toml());
            Ok(())
        }
    }
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Format(a) => cmd_format(a),
        Command::Run(a) => cmd_run(a),
        Command::Explain(a) => cmd_explain(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Tools { command } => cmd_tools(command),
    }
}
