use chrono::NaiveDate;
use proptest::prelude::*;
use rust_decimal::Decimal;

mod support;

use support::noisy::{noisy_table, MONTHS};
use tabrex_core::formatter::{format_rules, standardize, CellCoord};
use tabrex_core::table::{parse_table, table_from_json, CellValue, Table, TableFormat};

fn days_in(year: i32, month: u32) -> u32 {
    (28..=31)
        .rev()
        .find(|d| NaiveDate::from_ymd_opt(year, month, *d).is_some())
        .unwrap()
}

fn standardize_one(raw: &str) -> (CellValue, Vec<CellCoord>) {
    let t = Table::new("", vec!["d".into()], vec![vec![CellValue::Text(raw.into())]]).unwrap();
    let (out, report) = standardize(&t);
    (out.rows()[0][0].clone(), report.ambiguous_dates)
}

#[test]
fn every_calendar_day_in_every_layout() {
    let mut checked = 0;
    for year in [2000, 2015, 2023, 2024] {
        for month in 1..=12u32 {
            for day in 1..=days_in(year, month) {
                let want = NaiveDate::from_ymd_opt(year, month, day).unwrap();
                let name = MONTHS[month as usize - 1];
                let mut layouts = vec![
                    format!("{year}-{month:02}-{day:02}"),
                    format!("{name} {day}, {year}"),
                    format!("{day} {} {year}", &name[..3]),
                ];
                // slash dates only count when one reading is impossible or both agree
                if day > 12 || day == month {
                    layouts.push(format!("{month:02}/{day:02}/{year}"));
                    layouts.push(format!("{day:02}/{month:02}/{year}"));
                }
                for raw in layouts {
                    let (cell, ambiguous) = standardize_one(&raw);
                    assert_eq!(cell, CellValue::Date(want), "reading {raw}");
                    assert!(ambiguous.is_empty(), "{raw} flagged ambiguous");
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 5000);
}

#[test]
fn ambiguous_slash_dates_stay_text() {
    let mut seen = 0;
    for a in 1..=12u32 {
        for b in 1..=12u32 {
            if a == b {
                continue;
            }
            let raw = format!("{a:02}/{b:02}/2015");
            let (cell, ambiguous) = standardize_one(&raw);
            assert_eq!(cell, CellValue::Text(raw.clone()));
            assert_eq!(ambiguous, vec![CellCoord { row: 0, col: 0 }], "{raw}");
            seen += 1;
        }
    }
    assert_eq!(seen, 132);
    let (cell, _) = standardize_one("01/02/2015");
    assert_eq!(cell, CellValue::Text("01/02/2015".into()));
}

#[test]
fn impossible_dates_are_not_dates() {
    for raw in [
        "02/30/2015",
        "13/13/2015",
        "February 30, 2015",
        "31 Apr 2015",
        "2015-02-29",
    ] {
        let (cell, ambiguous) = standardize_one(raw);
        assert!(!matches!(cell, CellValue::Date(_)), "{raw} became a date");
        assert!(ambiguous.is_empty());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn rules_are_idempotent_and_keep_shape(table in noisy_table()) {
        let (once, _) = format_rules(&table);
        let (twice, report) = format_rules(&once);
        prop_assert_eq!(&twice, &once);
        prop_assert!(report.is_noop(), "second pass changed something: {:?}", report);
        prop_assert_eq!(once.n_rows(), table.n_rows());
        prop_assert_eq!(once.n_cols(), table.n_cols());
    }

    #[test]
    fn formatted_headers_are_unique_and_named(table in noisy_table()) {
        let (out, _) = format_rules(&table);
        let mut names: Vec<&String> = out.headers().iter().collect();
        prop_assert!(names.iter().all(|h| !h.trim().is_empty()));
        names.sort();
        names.dedup();
        prop_assert_eq!(names.len(), out.n_cols());
    }

    #[test]
    fn formatted_cells_carry_no_currency(table in noisy_table()) {
        let (out, _) = format_rules(&table);
        for row in out.rows() {
            for cell in row {
                prop_assert!(!matches!(cell, CellValue::Currency { .. }), "currency left in {:?}", cell);
            }
        }
    }
}

fn plain_cell() -> impl Strategy<Value = CellValue> {
    prop_oneof![
        (-400i64..400).prop_map(|q| CellValue::Number(Decimal::new(q * 25, 2))),
        "[a-z]{1,6}( [a-z]{1,4})?".prop_map(CellValue::Text),
        (1u32..=12, 1u32..=28, 1990i32..2030)
            .prop_map(|(m, d, y)| CellValue::Date(NaiveDate::from_ymd_opt(y, m, d).unwrap())),
        Just(CellValue::Missing),
    ]
}

fn plain_table() -> impl Strategy<Value = Table> {
    (1usize..5, 0usize..6).prop_flat_map(|(cols, rows)| {
        (
            prop::collection::vec("[a-z]{1,6}", cols),
            prop::collection::vec(prop::collection::vec(plain_cell(), cols), rows),
        )
            .prop_map(|(headers, rows)| Table::new("", headers, rows).unwrap())
    })
}

fn to_csv(table: &Table) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(table.headers()).unwrap();
    for row in table.rows() {
        w.write_record(row.iter().map(CellValue::render_plain)).unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn canonical_array_round_trips(table in plain_table()) {
        let json: serde_json::Value = serde_json::from_str(&table.serialize_canonical()).unwrap();
        prop_assert_eq!(table_from_json(&json).unwrap(), table);
    }

    #[test]
    fn csv_round_trips(table in plain_table().prop_filter("csv needs a data row", |t| t.n_rows() > 0)) {
        prop_assert_eq!(parse_table(&to_csv(&table), TableFormat::Csv).unwrap(), table);
    }
}
