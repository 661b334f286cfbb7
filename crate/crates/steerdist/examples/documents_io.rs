//! Assemblage documents on disk.
//!
//! Emits a state assemblage as JSON, reads it back bit-exactly, and shows
//! the positioned error you get for a malformed file.
//!
//! Run with: cargo run --example documents_io

use steerdist::document::AssemblageDocument;
use steerdist::presets;

fn main() -> Result<(), steerdist::Error> {
    let sigma = presets::paper_assemblage(0.5)?;
    let doc = AssemblageDocument::from_state(&sigma);
    let json = doc.to_json();
    println!("document is {} bytes of JSON; first lines:", json.len());
    for line in json.lines().take(7) {
        println!("  {line}");
    }

    let parsed = AssemblageDocument::from_json(&json)?;
    assert_eq!(doc, parsed, "round trip must be bit-exact");
    println!("round trip: bit-exact");

    let broken = json.replacen("\"dim\": 3", "\"dim\": 3, \"extra\": true", 1);
    match AssemblageDocument::from_json(&broken) {
        Err(e) => println!("malformed file rejected: {e}"),
        Ok(_) => unreachable!("unknown fields must be rejected"),
    }
    Ok(())
}
