// Splits the fixture's 38 diseases into linked and isolated ones when
// only the noxious agent is allowed to connect them.
//
//     cargo run --example isolated_links

use std::error::Error;
use std::fs::File;
use std::io::BufReader;

use exposome::graph::{components, DimSet, GraphBuilder, GraphConfig};
use exposome::ingest::{fold_identities, parse_jsonl};
use exposome::model::PathologyLevel;

const FIXTURE: &str = concat!(
    env!("CARGO_MANIFEST_DIR"),
    "/tests/fixtures/isolated_links.jsonl"
);

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let records = parse_jsonl(BufReader::new(File::open(FIXTURE)?))?.records;
    let config = GraphConfig::new(DimSet::agent_only(), PathologyLevel::Disease);
    let graph = GraphBuilder::new(config).build(&fold_identities(&records))?;
    let comps = components(&graph);

    println!(
        "{} diseases, {} isolated",
        graph.node_count(),
        comps.isolated_count()
    );
    for group in comps.groups().iter().filter(|g| g.len() > 1) {
        println!("linked group of {}:", group.len());
        for &i in group {
            let node = &graph.nodes()[i];
            let agents: Vec<&str> = node.exposure.agent.iter().map(String::as_str).collect();
            println!("  {:<8} {}", node.key.pathology(), agents.join(" + "));
        }
    }
    let isolated: Vec<&str> = comps
        .isolated()
        .map(|i| graph.nodes()[i].key.pathology())
        .collect();
    println!("isolated: {}", isolated.join(" "));

    // with occupations and sectors also counted, several isolated diseases join up
    let all = GraphBuilder::new(GraphConfig::default()).build(&fold_identities(&records))?;
    println!(
        "with all dimensions: {} isolated",
        components(&all).isolated_count()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
