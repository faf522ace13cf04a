// Generates a seeded corpus, writes it as CSV and JSON Lines, and reads
// both back. The same seed always gives the same bytes.
//
//     cargo run --example synthetic_corpus

use std::collections::BTreeMap;
use std::error::Error;

use exposome::ingest::{fold_identities, parse_csv, parse_jsonl, write_csv, write_jsonl};
use exposome::synth::{generate, SynthConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let config: SynthConfig = toml::from_str(
        r#"
        seed = 2024
        n_records = 2000
        start = "2010-01-01"
        end = "2011-12-31"
        skew = 0.9
        "#,
    )?;
    let records = generate(&config)?;

    let mut csv = Vec::new();
    write_csv(&records, &mut csv)?;
    let mut jsonl = Vec::new();
    write_jsonl(&records, &mut jsonl)?;
    println!("CSV {} bytes, JSONL {} bytes", csv.len(), jsonl.len());
    println!(
        "{}",
        String::from_utf8_lossy(&csv)
            .lines()
            .nth(1)
            .unwrap_or_default()
    );

    assert_eq!(parse_csv(csv.as_slice())?.records, records);
    assert_eq!(parse_jsonl(jsonl.as_slice())?.records, records);

    let mut again = Vec::new();
    write_jsonl(&generate(&config)?, &mut again)?;
    println!("regenerated corpus identical: {}", again == jsonl);

    // popularity is Zipf-skewed: low ranks dominate
    let mut per_agent: BTreeMap<&str, usize> = BTreeMap::new();
    for r in &records {
        for a in &r.agents {
            *per_agent.entry(a.code.as_str()).or_default() += 1;
        }
    }
    let mut top: Vec<_> = per_agent.into_iter().collect();
    top.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    println!(
        "{} identities; top agents {:?}",
        fold_identities(&records).len(),
        &top[..3]
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
