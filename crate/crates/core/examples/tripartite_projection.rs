// Projects the fixture onto the disease / agent / occupation graph,
// restricted to neoplasms (codes starting with C), and renders it as DOT.
//
//     cargo run --example tripartite_projection > neoplasms.dot

use std::error::Error;
use std::fs::File;
use std::io::BufReader;

use exposome::export::{to_dot, GraphDocument};
use exposome::ingest::{fold_identities, parse_jsonl};
use exposome::tripartite::project_tripartite;

const FIXTURE: &str = concat!(
    env!("CARGO_MANIFEST_DIR"),
    "/tests/fixtures/isolated_links.jsonl"
);

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let records = parse_jsonl(BufReader::new(File::open(FIXTURE)?))?.records;
    let graph = project_tripartite(&fold_identities(&records), Some("C"));
    graph.check_invariants()?;

    eprintln!(
        "{} pathologies, {} agents, {} occupations",
        graph.pathologies.len(),
        graph.agents.len(),
        graph.occupations.len()
    );
    for ((agent, pathology), support) in &graph.agent_pathology {
        eprintln!("  {agent:<20} -> {pathology:<6} ({support} reports)");
    }
    print!("{}", to_dot(&GraphDocument::from_tripartite(&graph)));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
