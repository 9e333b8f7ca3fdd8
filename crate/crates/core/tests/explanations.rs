use std::path::PathBuf;

use proptest::prelude::*;
use serde::Deserialize;

use tabrex_core::diagnostics::{Diagnostic, DiagnosticKind};
use tabrex_core::executor::execute_plan;
use tabrex_core::explain::{parse_explanation, render, serialize, validate_refs, Explanation, RenderMode, Segment};
use tabrex_core::plan::parse_plan;
use tabrex_core::table::{parse_table, TableFormat};
use tabrex_core::toolkit::builtin_registry;

#[derive(Deserialize)]
struct Suite {
    table: String,
    plan: String,
    cases: Vec<Case>,
}

#[derive(Deserialize)]
struct Case {
    name: String,
    explanation: String,
    mode: RenderMode,
    #[serde(default)]
    malformed: bool,
    #[serde(default)]
    errors: Vec<(String, usize)>,
    #[serde(default)]
    warnings: Vec<(String, usize)>,
    rendered: Option<String>,
}

fn kind_line(d: &Diagnostic) -> (String, usize) {
    let (name, line) = match d.kind {
        DiagnosticKind::OutOfRange { line, .. } => ("out_of_range", line),
        DiagnosticKind::NonIncreasing { line, .. } => ("non_increasing", line),
        DiagnosticKind::Uncovered { line } => ("uncovered", line),
        ref other => panic!("unexpected {other:?}"),
    };
    (name.to_string(), line)
}

#[test]
fn fixture_cases() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/explanations/cases.json");
    let suite: Suite = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(suite.cases.len(), 6);
    let table = parse_table(&suite.table, TableFormat::Csv).unwrap();
    let plan = parse_plan(&suite.plan).unwrap();
    let outcome = execute_plan(&plan, &table, &builtin_registry());
    assert_eq!(outcome.answer, "4");

    for case in &suite.cases {
        let parsed = parse_explanation(&case.explanation);
        if case.malformed {
            assert!(parsed.is_err(), "{} parsed", case.name);
            continue;
        }
        let expl = parsed.unwrap();
        assert_eq!(serialize(&expl), case.explanation, "{}", case.name);
        let diags = validate_refs(&expl, &plan);
        let errors: Vec<_> = diags.iter().filter(|d| d.is_error()).map(kind_line).collect();
        let warnings: Vec<_> = diags.iter().filter(|d| !d.is_error()).map(kind_line).collect();
        assert_eq!(errors, case.errors, "{}", case.name);
        assert_eq!(warnings, case.warnings, "{}", case.name);
        if let Some(want) = &case.rendered {
            assert_eq!(
                &render(&expl, &plan, &outcome, case.mode).unwrap(),
                want,
                "{}",
                case.name
            );
        }
    }
}

#[test]
fn results_need_an_executed_plan() {
    let plan = parse_plan("a = divide(1, 0)\nANSWER = a").unwrap();
    let table = parse_table("x\n1", TableFormat::Csv).unwrap();
    let outcome = execute_plan(&plan, &table, &builtin_registry());
    let expl = parse_explanation("Divide <<<###1>>>.").unwrap();
    assert!(render(&expl, &plan, &outcome, RenderMode::WithResults).is_err());
    assert!(render(&expl, &plan, &outcome, RenderMode::Symbolic).is_ok());
}

fn text_piece() -> impl Strategy<Value = String> {
    "[A-Za-z0-9 ,.:;#<>()\n-]{1,20}".prop_filter("no island delimiters", |s| {
        !s.contains("<<<") && !s.contains(">>>") && !s.ends_with('<') && !s.starts_with('>')
    })
}

fn refs() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::btree_set(1usize..40, 1..5).prop_map(|s| s.into_iter().collect())
}

fn explanation() -> impl Strategy<Value = Explanation> {
    (
        any::<bool>(),
        prop::collection::vec((text_piece(), refs()), 0..6),
        prop::option::of(text_piece()),
    )
        .prop_map(|(lead_with_ref, pairs, tail)| {
            let mut segments = Vec::new();
            for (i, (text, lines)) in pairs.into_iter().enumerate() {
                if i > 0 || !lead_with_ref {
                    segments.push(Segment::Text(text));
                }
                segments.push(Segment::CallRef(lines));
            }
            if let Some(t) = tail {
                segments.push(Segment::Text(t));
            }
            Explanation { segments }
        })
}

/// Errors and uncovered lines by direct reading of the rules.
fn expected_counts(expl: &Explanation, steps: usize) -> (usize, usize) {
    let mut errors = 0;
    let mut previous = 0;
    let mut covered = vec![false; steps + 1];
    for seg in &expl.segments {
        if let Segment::CallRef(lines) = seg {
            for &k in lines {
                if k > steps || k <= previous {
                    errors += 1;
                } else {
                    previous = k;
                    covered[k] = true;
                }
            }
        }
    }
    (errors, (1..=steps).filter(|k| !covered[*k]).count())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn wire_form_round_trips(expl in explanation()) {
        let text = serialize(&expl);
        prop_assert_eq!(parse_explanation(&text).unwrap(), expl);
    }

    #[test]
    fn validation_matches_counting(expl in explanation(), steps in 1usize..30) {
        let body: String = (1..=steps).map(|i| format!("v{i} = add({i}, 1)\n")).collect();
        let plan = parse_plan(&format!("{body}ANSWER = v{steps}")).unwrap();
        let diags = validate_refs(&expl, &plan);
        let errors = diags.iter().filter(|d| d.is_error()).count();
        let warnings = diags.len() - errors;
        prop_assert_eq!((errors, warnings), expected_counts(&expl, steps));
    }
}
