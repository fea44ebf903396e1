//! Write synthetic inputs for trying the CLI:
//!
//! ```text
//! cargo run -p finsent-core --example make_fixtures -- <out-dir>
//! ```
//!
//! Produces `labeled.jsonl` (two experts with complementary competence),
//! `news.jsonl` (dated single-expert records) and `SYN.csv` (closes linked to
//! the news sentiment).

use std::fs::File;
use std::path::PathBuf;

use finsent::records::{write_prices, write_records};
use finsent::synth::{complementary_experts, linkage_fixture};

fn main() -> finsent::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    std::fs::create_dir_all(&dir).map_err(|e| finsent::Error::io(&dir, e))?;
    let create = |name: &str| {
        let p = dir.join(name);
        File::create(&p).map_err(|e| finsent::Error::io(&p, e))
    };

    let labeled = complementary_experts(600, "finbert", "roberta", 7);
    write_records(&labeled, create("labeled.jsonl")?)?;

    let (news, prices) = linkage_fixture(500, "finbert", "SYN", 11);
    write_records(&news, create("news.jsonl")?)?;
    write_prices(&prices, create("SYN.csv")?)?;

    println!("wrote labeled.jsonl, news.jsonl and SYN.csv to {}", dir.display());
    Ok(())
}
