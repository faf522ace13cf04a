// Builds the exposome network of the bundled fixture and prints its
// statistics, the largest connected component, and one node's neighbours.
//
//     cargo run --example build_exposome

use std::error::Error;
use std::fs::File;
use std::io::BufReader;

use exposome::graph::{build_graph, components, GraphConfig};
use exposome::ingest::{fold_identities, parse_jsonl};
use exposome::stats::StatsReport;

const FIXTURE: &str = concat!(
    env!("CARGO_MANIFEST_DIR"),
    "/tests/fixtures/isolated_links.jsonl"
);

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let outcome = parse_jsonl(BufReader::new(File::open(FIXTURE)?))?;
    let ledger = fold_identities(&outcome.records);
    println!(
        "{} records fold into {} OHP identities",
        outcome.records.len(),
        ledger.len()
    );

    let graph = build_graph(&ledger, GraphConfig::default());
    let report = StatsReport::new(&graph, Some(&outcome));
    println!("{}", report.summary());

    let comps = components(&graph);
    let largest = comps
        .groups()
        .iter()
        .max_by_key(|g| g.len())
        .ok_or("empty graph")?;
    println!("largest component ({} OHPs):", largest.len());
    for &i in largest {
        println!("  {}", graph.nodes()[i].key);
    }

    let hub = (0..graph.node_count())
        .max_by_key(|&i| graph.degree(i))
        .unwrap();
    println!(
        "best connected: {} ({} links)",
        graph.nodes()[hub].key,
        graph.degree(hub)
    );
    for edge in graph
        .edges()
        .filter(|e| e.source_index() == hub || e.target_index() == hub)
    {
        let other = if edge.source_index() == hub {
            edge.target()
        } else {
            edge.source()
        };
        let shared: Vec<String> = edge.shared().map(|el| el.to_string()).collect();
        println!("  -- {}  via {}", other.key, shared.join(", "));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
