// Coarsens the disease-level network to subgroups and categories, first
// with the code-prefix rule and then with an explicit hierarchy table.
//
//     cargo run --example hierarchy_levels

use std::error::Error;
use std::fs::File;
use std::io::BufReader;

use exposome::graph::{aggregate, components, DimSet, GraphBuilder, GraphConfig};
use exposome::ingest::{fold_identities, parse_jsonl};
use exposome::model::{pathology_at, Hierarchy, PathologyLevel};

const FIXTURE: &str = concat!(
    env!("CARGO_MANIFEST_DIR"),
    "/tests/fixtures/isolated_links.jsonl"
);
const TABLE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/hierarchy.tsv");

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let records = parse_jsonl(BufReader::new(File::open(FIXTURE)?))?.records;
    let ledger = fold_identities(&records);

    for code in ["C34.1", "J61", "L23.0"] {
        println!(
            "{code}: subgroup {}, category {}",
            pathology_at(code, PathologyLevel::Subgroup, None)?,
            pathology_at(code, PathologyLevel::Category, None)?
        );
    }

    let fine = GraphBuilder::new(GraphConfig::new(
        DimSet::agent_only(),
        PathologyLevel::Disease,
    ))
    .build(&ledger)?;
    for level in [PathologyLevel::Subgroup, PathologyLevel::Category] {
        let coarse = aggregate(&fine, level, None)?;
        println!(
            "prefix rule, {level}: {} nodes, {} edges, {} isolated",
            coarse.node_count(),
            coarse.edge_count(),
            components(&coarse).isolated_count()
        );
    }

    let table = Hierarchy::from_reader(BufReader::new(File::open(TABLE)?))?;
    let config = GraphConfig::new(DimSet::agent_only(), PathologyLevel::Category);
    let chapters = GraphBuilder::new(config)
        .hierarchy(Some(&table))
        .build(&ledger)?;
    println!("table categories:");
    for (i, node) in chapters.nodes().iter().enumerate() {
        println!(
            "  {:<16} weight {:>2}, degree {}",
            node.key.to_string(),
            node.weight,
            chapters.degree(i)
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
