mod common;

use common::*;
use exposome::ingest::{fold_identities, parse_csv, parse_jsonl, write_csv, write_jsonl};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

/// Ways to spoil a valid JSONL line, each yielding a known reject code.
fn corrupt(line: &str, how: usize) -> (String, &'static str) {
    let mut v: serde_json::Value = serde_json::from_str(line).unwrap();
    match how {
        0 => ("{not json".to_string(), "MALFORMED_LINE"),
        1 => {
            v["agents"] = serde_json::json!([]);
            (v.to_string(), "NO_AGENTS")
        }
        2 => {
            let agent = v["agents"][0].clone();
            v["agents"] = serde_json::Value::Array(vec![agent; 6]);
            (v.to_string(), "MAX_AGENTS_EXCEEDED")
        }
        3 => {
            v["agents"][0]["responsibility"] = serde_json::json!(7);
            (v.to_string(), "BAD_RESPONSIBILITY")
        }
        4 => {
            v["reported_on"] = serde_json::json!("2015-02-30");
            (v.to_string(), "BAD_DATE")
        }
        _ => {
            v["sector"] = serde_json::json!("  ");
            (v.to_string(), "EMPTY_FIELD(sector)")
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jsonl_round_trip(seed in any::<u64>(), n in 0usize..120) {
        let records = random_records(&mut rng(seed), n, Vocab::default());
        let mut buf = Vec::new();
        write_jsonl(&records, &mut buf).unwrap();
        let parsed = parse_jsonl(buf.as_slice()).unwrap();
        prop_assert!(parsed.rejects.is_empty());
        prop_assert_eq!(parsed.records, records);
    }

    #[test]
    fn csv_round_trip(seed in any::<u64>(), n in 0usize..120) {
        let records = random_records(&mut rng(seed), n, Vocab { max_agents: 5, ..Vocab::default() });
        let mut buf = Vec::new();
        write_csv(&records, &mut buf).unwrap();
        let parsed = parse_csv(buf.as_slice()).unwrap();
        prop_assert!(parsed.rejects.is_empty());
        prop_assert_eq!(parsed.records, records);
    }

    #[test]
    fn every_line_is_accounted_for(seed in any::<u64>(), n in 1usize..80) {
        let mut r = rng(seed);
        let records = random_records(&mut r, n, Vocab::default());
        let mut lines = Vec::new();
        let mut expected = Vec::new();
        let mut blanks = 0;
        for rec in &records {
            let line = serde_json::to_string(&rec.to_raw()).unwrap();
            match r.random_range(0..10) {
                0..=5 => lines.push(line),
                6 => {
                    blanks += 1;
                    lines.push(String::new());
                    lines.push(line);
                }
                _ => {
                    let (bad, code) = corrupt(&line, r.random_range(0..6));
                    expected.push((lines.len() + 1, code));
                    lines.push(bad);
                }
            }
        }
        let text = lines.join("\n");
        let parsed = parse_jsonl(text.as_bytes()).unwrap();
        prop_assert_eq!(parsed.total_lines, lines.len());
        prop_assert_eq!(parsed.blank_lines, blanks);
        prop_assert_eq!(parsed.records.len() + parsed.rejects.len() + blanks, lines.len());
        let got: Vec<(usize, String)> = parsed
            .rejects
            .iter()
            .map(|rj| (rj.line_number, rj.errors[0].code()))
            .collect();
        let want: Vec<(usize, String)> = expected.into_iter().map(|(l, c)| (l, c.to_string())).collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn fold_ignores_order_and_splits(seed in any::<u64>(), n in 0usize..200, cut in 0usize..200) {
        let mut r = rng(seed);
        let records = random_records(&mut r, n, Vocab { pathologies: 6, agents: 4, occupations: 3, sectors: 2, ..Vocab::default() });
        let ledger = fold_identities(&records);
        prop_assert_eq!(ledger.total_weight(), n as u64);

        let mut shuffled = records.clone();
        shuffled.shuffle(&mut r);
        prop_assert_eq!(&fold_identities(&shuffled), &ledger);

        let cut = cut.min(n);
        let mut merged = fold_identities(&records[..cut]);
        merged.merge(&fold_identities(&records[cut..]));
        prop_assert_eq!(&merged, &ledger);

        for (identity, entry) in ledger.iter() {
            let members: Vec<_> = records.iter().filter(|r| &r.identity() == identity).collect();
            prop_assert_eq!(entry.weight, members.len() as u64);
            prop_assert_eq!(entry.first_seen, members.iter().map(|r| r.reported_on).min().unwrap());
            prop_assert_eq!(entry.last_seen, members.iter().map(|r| r.reported_on).max().unwrap());
        }
    }
}
