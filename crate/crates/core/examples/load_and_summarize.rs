//! Loads a MULAN dataset (ARFF + label XML) and prints its Table-style statistics.
//!
//! ```text
//! cargo run --example load_and_summarize -- emotions.arff emotions.xml
//! ```
//!
//! Without arguments a small inline dataset is parsed instead, showing the dense and
//! sparse row syntax and one-hot encoding of nominal features.

use std::path::Path;

use mfsir::dataset::parse_dataset;
use mfsir::{load_dataset, summarize, DatasetSummary};

const ARFF: &str = "\
% two numeric features, one nominal feature, three labels
@relation demo
@attribute tempo numeric
@attribute loudness real
@attribute mode {major, minor}
@attribute happy {0,1}
@attribute sad {0,1}
@attribute calm {0,1}
@data
120.0, -7.5, major, 1, 0, 0
72.0, -12.0, minor, 0, 1, 1
{0 90, 1 -9.25, 2 minor, 5 1}
";

const XML: &str = r#"<?xml version="1.0" encoding="utf-8"?>
<labels xmlns="http://mulan.sourceforge.net/labels">
  <label name="happy"></label>
  <label name="sad"></label>
  <label name="calm"></label>
</labels>"#;

fn main() -> mfsir::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let d = match args.as_slice() {
        [arff, xml] => load_dataset(Path::new(arff), Path::new(xml))?,
        _ => parse_dataset("demo", ARFF, XML)?,
    };
    println!("features: {:?}", d.feature_names());
    println!("labels:   {:?}", d.label_names());
    println!("{}", DatasetSummary::CSV_HEADER);
    println!("{}", summarize(&d).csv_row());
    Ok(())
}
