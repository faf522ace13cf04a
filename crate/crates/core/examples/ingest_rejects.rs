// Parses a deliberately messy CSV extract and shows which lines were
// rejected and why. Rejects are reported, never fatal.
//
//     cargo run --example ingest_rejects

use std::error::Error;

use exposome::ingest::{csv_header, parse_csv};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let header = csv_header().join(",");
    let rows = [
        "R1,2016-03-02,LYO,C45.0,ISCO7126,F43,asbestos,3,,,,,,,,",
        "R2,2016-03-09,LYO,J45.0,ISCO7512,C10,flour_dust,2,enzymes,1,,,,,,",
        "R3,2016-02-30,GRE,J45.0,ISCO7512,C10,flour_dust,2,,,,,,,,",
        "R4,2016-03-10,GRE,L23.0,ISCO5141,S96,,,,,,,,,,",
        "R5,2016-03-11,PAR,L24.5,ISCO7223,C28,cutting_fluids,5,,,,,,,,",
        "R6,2016-03-12,PAR,J68.0,ISCO9112,,chlorine,1,,,,,,,,",
        "R7,2016-03-13,PAR,M75.1,ISCO7411,F43,overhead_work,1,,,vibration,2,,,,",
        "R1,2016-03-14,LYO,C45.0,ISCO7126,F43,asbestos,3,,,,,,,,",
    ];
    let text = format!("{header}\n{}\n", rows.join("\n"));
    let outcome = parse_csv(text.as_bytes())?;

    println!(
        "{} accepted, {} rejected",
        outcome.records.len(),
        outcome.rejects.len()
    );
    for reject in &outcome.rejects {
        let codes: Vec<String> = reject.errors.iter().map(|e| e.code()).collect();
        println!(
            "  line {} ({}): {}",
            reject.line_number,
            reject.record_id.as_deref().unwrap_or("?"),
            codes.join(", ")
        );
    }
    for warning in &outcome.warnings {
        println!(
            "  line {}: {} {}",
            warning.line_number, warning.message, warning.record_id
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
