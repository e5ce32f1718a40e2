//! Regenerate the committed `data/` fixtures from the in-crate builders:
//!
//! ```text
//! cargo run -p ripscan --example gen_fixtures -- data
//! ```
//!
//! Output is deterministic, so a clean regeneration leaves git quiet.

use std::collections::BTreeMap;
use std::fs;
use std::io::Cursor;
use std::path::PathBuf;

use ripscan::catalog::{self, Catalog};
use ripscan::loss;
use ripscan::report::RightsHolderMap;

/// Regions the simulator's language mix can map to, plus the US fallback.
const REGIONS: [&str; 8] = ["US", "IR", "IN", "ES", "BR", "RU", "SA", "KR"];

fn main() -> std::io::Result<()> {
    let out: PathBuf = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("data"));
    fs::create_dir_all(&out)?;

    fs::write(out.join("lexicon.txt"), include_str!("../data/lexicon.txt"))?;

    let catalog_jsonl = catalog::fixture::to_jsonl();
    fs::write(out.join("fixture_catalog.jsonl"), &catalog_jsonl)?;

    let catalog = Catalog::ingest_path(&out.join("fixture_catalog.jsonl"))
        .expect("generated catalog ingests");
    let regions: Vec<String> = REGIONS.map(str::to_string).into();
    let pricing = loss::fixture::pricing_for(catalog.entries(), &regions);
    fs::write(out.join("pricing.jsonl"), loss::fixture::to_jsonl(&pricing))?;

    let mut fx = serde_json::to_string_pretty(&loss::fixture::fx_table())?;
    fx.push('\n');
    fs::write(out.join("fx.json"), fx)?;

    // Two illustrative rights holders splitting the catalog's production
    // companies down the middle; real deployments load a curated map.
    let mut contacts: BTreeMap<String, String> = BTreeMap::new();
    for (i, entry) in catalog.entries().iter().enumerate() {
        let holder = if i % 2 == 0 { "Aurora Rights Group" } else { "Borealis Media" };
        for company in &entry.companies {
            contacts.entry(company.clone()).or_insert_with(|| holder.to_string());
        }
    }
    let mut holders =
        serde_json::to_string_pretty(&RightsHolderMap { contacts })?;
    holders.push('\n');
    fs::write(out.join("rights_holders.json"), holders)?;

    // Sanity: the shipped map must parse through the public loader.
    RightsHolderMap::from_path(&out.join("rights_holders.json"))
        .expect("generated rights holder map parses");
    Catalog::ingest_reader(Cursor::new(catalog_jsonl)).expect("catalog round trips");

    println!("fixtures written to {}", out.display());
    Ok(())
}
