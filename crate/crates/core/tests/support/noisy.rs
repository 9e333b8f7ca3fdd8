//! Random tables with the usual scraping noise: currency, grouping commas,
//! footnote marks, mixed date layouts, and blanks.
#![allow(dead_code)]

use proptest::prelude::*;
use tabrex_core::table::{CellValue, Table};

pub const MONTHS: [&str; 12] = [
    "January",
    "February",
    "March",
    "April",
    "May",
    "June",
    "July",
    "August",
    "September",
    "October",
    "November",
    "December",
];

pub fn noisy_cell() -> impl Strategy<Value = String> {
    prop_oneof![
        (-5000i64..5000).prop_map(|n| n.to_string()),
        (0i64..100_000).prop_map(|n| format!("${}", group(n))),
        (0i64..100_000, 0u32..100).prop_map(|(n, c)| format!("€{}.{c:02}", group(n))),
        (0i64..1000).prop_map(|n| format!("{n}%")),
        (0i64..1000, prop_oneof![Just("*"), Just("†"), Just("[1]"), Just("‡")]).prop_map(|(n, m)| format!("{n}{m}")),
        (1u32..=12, 1u32..=28, 2000i32..2030).prop_map(|(m, d, y)| format!("{m:02}/{d:02}/{y}")),
        (1u32..=12, 1u32..=28, 2000i32..2030).prop_map(|(m, d, y)| format!("{} {d}, {y}", MONTHS[m as usize - 1])),
        (1u32..=12, 1u32..=28, 2000i32..2030).prop_map(|(m, d, y)| format!("{y}-{m:02}-{d:02}")),
        "[a-z]{1,8}( [a-z]{1,6})?",
        Just(String::new()),
        Just("  ".to_string()),
        Just("n/a".to_string()),
        Just("yes".to_string()),
    ]
}

fn group(n: i64) -> String {
    let s = n.to_string();
    let mut out = String::new();
    for (i, c) in s.chars().enumerate() {
        if i > 0 && (s.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(c);
    }
    out
}

pub fn noisy_table() -> impl Strategy<Value = Table> {
    (1usize..6, 0usize..8).prop_flat_map(|(cols, rows)| {
        (
            prop::collection::vec(prop_oneof![Just(String::new()), "[A-Za-z]{1,6}"], cols),
            prop::collection::vec(prop::collection::vec(noisy_cell(), cols), rows),
        )
            .prop_map(|(headers, rows)| {
                let rows = rows
                    .into_iter()
                    .map(|r| r.iter().map(|s| CellValue::parse(s)).collect())
                    .collect();
                Table::new("", headers, rows).unwrap()
            })
    })
}
