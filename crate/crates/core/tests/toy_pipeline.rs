use std::path::{Path, PathBuf};

use tabrex_core::executor::run_toolmaker_response;
use tabrex_core::formatter::format_rules;
use tabrex_core::gateway::{build_gateway, Gateway, GatewayError, PromptBundle, PromptKind};
use tabrex_core::harness::{evaluate, load_records, synthesize, Config, Method, Record, RecordSchema, SynthModule};
use tabrex_core::toolkit::builtin_registry;

fn toy() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/toy")
}

fn setup() -> (Vec<Record>, Config, Box<dyn Gateway>) {
    let config = Config::load(&toy().join("config.toml")).unwrap();
    let records = load_records(&toy().join("records.jsonl"), RecordSchema::JsonlV1, &config.labels).unwrap();
    let gateway = build_gateway(&config.gateway).unwrap();
    (records, config, gateway)
}

fn golden(method: &str) -> String {
    std::fs::read_to_string(toy().join(format!("golden/metrics.{method}.json"))).unwrap()
}

fn pretty(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).unwrap();
    s.push('\n');
    s
}

#[test]
fn metrics_match_golden_files() {
    let (records, config, gateway) = setup();
    assert_eq!(records.len(), 25);
    for (method, name) in [
        (Method::Tart, "tart"),
        (Method::Cot, "cot"),
        (Method::DirectQa, "directqa"),
    ] {
        let report = evaluate(&records, method, gateway.as_ref(), &config, &builtin_registry());
        assert_eq!(pretty(&report.metrics), golden(name), "{name}");
    }
}

#[test]
fn fallback_only_where_plans_fail() {
    let (records, config, gateway) = setup();
    let report = evaluate(&records, Method::Tart, gateway.as_ref(), &config, &builtin_registry());
    let fell_back: Vec<&str> = report
        .results
        .iter()
        .filter(|r| r.outcome.fallback_used)
        .map(|r| r.id.as_str())
        .collect();
    assert_eq!(fell_back, ["r04", "r08", "r13", "r19"]);
    for r in &report.results {
        assert_eq!(r.outcome.executable, !r.outcome.fallback_used, "{}", r.id);
        assert!(!r.outcome.answer.is_empty(), "{} has no answer", r.id);
    }
    let wrong: Vec<&str> = report
        .results
        .iter()
        .filter(|r| !r.correct)
        .map(|r| r.id.as_str())
        .collect();
    assert!(wrong.contains(&"r10"));
}

#[test]
fn parallelism_does_not_change_results() {
    let (records, mut config, gateway) = setup();
    config.run.parallelism = 1;
    let serial = evaluate(&records, Method::Tart, gateway.as_ref(), &config, &builtin_registry());
    config.run.parallelism = 8;
    let parallel = evaluate(&records, Method::Tart, gateway.as_ref(), &config, &builtin_registry());
    assert_eq!(serial, parallel);
    config.run.parallelism = 8;
    let (a, sa) = synthesize(&records, gateway.as_ref(), &config, &builtin_registry());
    config.run.parallelism = 1;
    let (b, sb) = synthesize(&records, gateway.as_ref(), &config, &builtin_registry());
    assert_eq!((a, sa), (b, sb));
}

#[test]
fn synthesis_counts_and_aliases() {
    let (records, config, gateway) = setup();
    let (out, stats) = synthesize(&records, gateway.as_ref(), &config, &builtin_registry());
    assert_eq!(stats.generated, 25);
    assert_eq!(stats.executable, 21);
    assert_eq!(stats.verified, 20);
    assert_eq!(stats.dropped_at_verification, 5);
    assert_eq!(stats.dropped_singleton_tools, 2);
    assert_eq!(stats.dropped_at_reverification, 0);
    assert_eq!((stats.formatter, stats.toolmaker, stats.explainer), (20, 18, 18));
    assert_eq!(stats.aliases.get("sum").map(String::as_str), Some("add"));
    let count = |m| out.iter().filter(|r| r.module == m).count();
    assert_eq!(count(SynthModule::Formatter), 20);
    assert_eq!(count(SynthModule::Toolmaker), 18);
    assert_eq!(count(SynthModule::Explainer), 18);
    for id in ["r04", "r08", "r10", "r13", "r19", "r05", "r22"] {
        assert!(
            out.iter()
                .all(|r| r.module == SynthModule::Formatter || r.source_record != id),
            "{id} should not feed the tool maker"
        );
    }
}

#[test]
fn every_toolmaker_target_reexecutes_to_gold() {
    let (records, config, gateway) = setup();
    let (out, _) = synthesize(&records, gateway.as_ref(), &config, &builtin_registry());
    let registry = builtin_registry();
    for target in out.iter().filter(|r| r.module == SynthModule::Toolmaker) {
        assert!(target.verified);
        assert!(
            !target.target.contains("def sum("),
            "{} keeps an aliased name",
            target.source_record
        );
        let record = records.iter().find(|r| r.id == target.source_record).unwrap();
        let table = format_rules(&record.table).0;
        let run = run_toolmaker_response(&target.target, &table, &registry);
        assert!(run.outcome.executable, "{}", target.source_record);
        let mut answer = run.outcome.answer.clone();
        if let Some(map) = config.labels.get(&record.dataset) {
            answer = map.map(&answer);
        }
        assert!(
            tabrex_core::harness::score(
                &answer,
                &record.gold,
                record.task,
                config.labels.get(&record.dataset),
                &config.scoring
            ),
            "{}: {answer} vs {}",
            record.id,
            record.gold
        );
    }
}

/// Teacher whose programs all return the same unusable literal.
struct WrongTeacher;

impl Gateway for WrongTeacher {
    fn complete(&self, bundle: &PromptBundle) -> Result<String, GatewayError> {
        Ok(match bundle.kind {
            PromptKind::Toolmaker => "def solution(table_data):\n    return \"no idea\"".into(),
            _ => "no idea".into(),
        })
    }
}

#[test]
fn wrong_teacher_yields_nothing() {
    let (records, config, _) = setup();
    let (out, stats) = synthesize(&records, &WrongTeacher, &config, &builtin_registry());
    assert!(out.is_empty());
    assert_eq!(stats.verified, 0);
    assert_eq!(stats.dropped_at_verification, 25);
    assert_eq!(stats.executable, 25);
}

#[test]
fn config_paths_resolve_next_to_the_file() {
    let config = Config::load(&toy().join("config.toml")).unwrap();
    let fixture = config.gateway.fixture.unwrap();
    assert!(fixture.starts_with(toy()));
    assert!(Path::new(&fixture).exists());
}
