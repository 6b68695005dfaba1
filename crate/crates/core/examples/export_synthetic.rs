//! Writes a synthetic multi-label dataset with a known informative feature set as an
//! ARFF file plus MULAN label XML, ready for the `mfsir` command-line tool.
//!
//! ```text
//! cargo run --example export_synthetic -- out_dir [n m k q seed]
//! ```

use std::path::PathBuf;

use mfsir::synthetic::sparse_recovery;
use mfsir::{save_dataset, summarize, DatasetSummary};

fn main() -> mfsir::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let dir = PathBuf::from(args.first().map(String::as_str).unwrap_or("synthetic_data"));
    let num = |i: usize, default: u64| args.get(i).and_then(|s| s.parse().ok()).unwrap_or(default);
    let (n, m, k, q, seed) = (
        num(1, 200) as usize,
        num(2, 40) as usize,
        num(3, 5) as usize,
        num(4, 4) as usize,
        num(5, 0),
    );

    let data = sparse_recovery(n, m, k, q, seed)?;
    std::fs::create_dir_all(&dir).map_err(|e| mfsir::Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    let name = data.dataset.name().to_string();
    let arff = dir.join(format!("{name}.arff"));
    let xml = dir.join(format!("{name}.xml"));
    save_dataset(&data.dataset, &arff, &xml)?;

    println!("{}", DatasetSummary::CSV_HEADER);
    println!("{}", summarize(&data.dataset).csv_row());
    println!("informative features: {:?}", data.informative);
    println!("wrote {} and {}", arff.display(), xml.display());
    Ok(())
}
