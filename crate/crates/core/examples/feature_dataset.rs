//! Prints the method-level and pair-level datasets of the bundled
//! `features` project.

use tplab::lang::load_project;
use tplab::metrics::{write_dataset_csv, Granularity};
use tplab::pipeline::{analyze_project, bundled_corpus_dir, RunOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let project = load_project(&bundled_corpus_dir().join("features"))?;
    let options = RunOptions::from_settings(&Default::default());
    let analysis = analyze_project(&project.program, &options)?;
    write_dataset_csv(&analysis.method_rows, Granularity::Method, std::io::stdout())?;
    println!();
    write_dataset_csv(&analysis.pair_rows, Granularity::Pair, std::io::stdout())?;
    Ok(())
}
