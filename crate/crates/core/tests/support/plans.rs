//! Random plans over a small tool vocabulary, including one unknown tool.
#![allow(dead_code)]

use proptest::prelude::*;
use tabrex_core::plan::{ArgExpr, Literal, Plan};

const TOOLS: &[&str] = &["add", "max", "get_column_by_name", "equal_to", "frobnicate", "count"];

pub fn literal() -> impl Strategy<Value = Literal> {
    let number = (-100_000i64..100_000, 0u32..4)
        .prop_map(|(m, s)| Literal::Number(rust_decimal::Decimal::new(m, s).normalize()));
    let text = "[ -~]{0,8}".prop_map(Literal::Str);
    let flag = any::<bool>().prop_map(Literal::Bool);
    let numbers =
        prop::collection::vec((-999i64..999).prop_map(|n| Literal::Number(n.into())), 1..4).prop_map(Literal::Array);
    prop_oneof![4 => number, 3 => text, 1 => flag, 1 => numbers]
}

pub fn plan() -> impl Strategy<Value = Plan> {
    prop::collection::vec(
        (
            prop::sample::select(TOOLS),
            prop::collection::vec((any::<bool>(), literal(), any::<prop::sample::Index>()), 0..4),
        ),
        0..8,
    )
    .prop_flat_map(|steps| {
        let n = steps.len();
        let parts: Vec<(String, String, Vec<ArgExpr>)> = steps
            .into_iter()
            .enumerate()
            .map(|(i, (tool, args))| {
                let args = args
                    .into_iter()
                    .map(|(is_ref, lit, idx)| {
                        if is_ref {
                            let pick = idx.index(i + 1);
                            ArgExpr::VarRef(if pick == 0 {
                                "table_data".to_string()
                            } else {
                                format!("v{}", pick - 1)
                            })
                        } else {
                            ArgExpr::Lit(lit)
                        }
                    })
                    .collect();
                (format!("v{i}"), tool.to_string(), args)
            })
            .collect();
        let answer = if n == 0 {
            literal().prop_map(ArgExpr::Lit).boxed()
        } else {
            (0..n).prop_map(|k| ArgExpr::VarRef(format!("v{k}"))).boxed()
        };
        answer.prop_map(move |a| Plan::from_parts(parts.clone(), a))
    })
}
