//! Regenerates `fixtures/`: `cargo run --example make_fixtures [-- DIR]`.

use std::path::PathBuf;

use syneval::dataset::write_table;
use syneval::toy::{corrupt_text, review_corpus, review_schema, CorpusOptions, IdScheme};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures"));
    std::fs::create_dir_all(&dir)?;
    let pooled = CorpusOptions {
        ids: IdScheme::Pooled(40),
        ..Default::default()
    };

    let real = review_corpus(400, 1, &pooled);
    let members: Vec<usize> = (0..200).collect();
    let members = real.take_rows(&members);
    let non_members = review_corpus(200, 2, &pooled);
    let synthetic = corrupt_text(&review_corpus(400, 3, &pooled), "text", 0.3, 4);

    write_table(&real, dir.join("real.csv"))?;
    write_table(&synthetic, dir.join("synthetic.csv"))?;
    write_table(&members, dir.join("members.csv"))?;
    write_table(&non_members, dir.join("non_members.csv"))?;
    std::fs::write(dir.join("schema.json"), review_schema().to_json_pretty() + "\n")?;
    println!("wrote fixtures to {}", dir.display());
    Ok(())
}
