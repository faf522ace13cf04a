// Writes the fixture network as GraphML, DOT and JSON into a directory
// (default: a temporary one) for viewing in an external tool.
//
//     cargo run --example export_formats -- out/

use std::error::Error;
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use exposome::export::{Format, GraphDocument};
use exposome::graph::{DimSet, GraphBuilder, GraphConfig};
use exposome::ingest::{fold_identities, parse_jsonl};
use exposome::model::PathologyLevel;

const FIXTURE: &str = concat!(
    env!("CARGO_MANIFEST_DIR"),
    "/tests/fixtures/isolated_links.jsonl"
);

pub fn run_example() -> Result<(), Box<dyn Error>> {
    export_to(std::env::temp_dir().join("exposome-export"))
}

fn export_to(dir: PathBuf) -> Result<(), Box<dyn Error>> {
    std::fs::create_dir_all(&dir)?;

    let records = parse_jsonl(BufReader::new(File::open(FIXTURE)?))?.records;
    let config = GraphConfig::new(DimSet::agent_only(), PathologyLevel::Disease);
    let graph = GraphBuilder::new(config).build(&fold_identities(&records))?;
    let doc = GraphDocument::from_exposome(&graph);

    for format in [Format::GraphMl, Format::Dot, Format::Json] {
        let path = dir.join(format!("fixture.{}", format.extension()));
        let text = doc.render(format);
        std::fs::write(&path, &text)?;
        println!("{} ({} bytes)", path.display(), text.len());
    }
    let edge = doc.edges.first().ok_or("no edges")?;
    println!("first edge: {} -- {}", edge.source, edge.target);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    match std::env::args_os().nth(1) {
        Some(dir) => export_to(PathBuf::from(dir)),
        None => run_example(),
    }
}
