// Plants an emerging OHP in a synthetic year of reports and replays the
// second half-year in monthly windows to see it surface.
//
//     cargo run --example surveillance_replay

use std::error::Error;

use chrono::NaiveDate;
use exposome::graph::{DimSet, GraphConfig};
use exposome::model::PathologyLevel;
use exposome::surveillance::{replay, EventKind, Subject, SurveillanceConfig};
use exposome::synth::{generate, Plant, SynthConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let day = |s: &str| NaiveDate::parse_from_str(s, "%Y-%m-%d");
    let config = SynthConfig {
        n_records: 4_000,
        plants: vec![Plant {
            pathology: "J84.1".into(),
            agents: vec!["AG-NANOTUBES".into(), "AG00002".into()],
            occupation: "OCC0003".into(),
            sector: "SEC0002".into(),
            start: day("2001-08-06")?,
            records_per_window: 3,
            window_days: 30,
            windows: 4,
        }],
        ..SynthConfig::default()
    };
    let records = generate(&config)?;

    let graph = GraphConfig::new(DimSet::agent_only(), PathologyLevel::Disease);
    let watch = SurveillanceConfig::new(graph, day("2001-06-30")?, 30);
    let result = replay(&records, &watch, None)?;
    println!(
        "{} baseline records, {} replayed in {} windows, {} events",
        result.baseline_records,
        result.replayed_records,
        result.active_windows,
        result.events.len()
    );

    let planted = |s: &Subject| match s {
        Subject::Node(k) => k.to_string().contains("AG-NANOTUBES"),
        Subject::Pair(a, b) => {
            a.to_string().contains("AG-NANOTUBES") || b.to_string().contains("AG-NANOTUBES")
        }
    };
    for event in result.events.iter().filter(|e| planted(&e.subject)) {
        println!("{}", serde_json::to_string(event)?);
    }
    let growth = result
        .events
        .iter()
        .filter(|e| e.kind == EventKind::WeightGrowth)
        .count();
    println!("{growth} weight-growth signals in total");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
