//! Runs the whole analysis over the bundled corpus and writes every output
//! file into a directory (default `pipeline_out`).

use std::path::PathBuf;

use tplab::pipeline::{
    analyze_corpus, bundled_corpus_dir, cmd_correlate, cmd_predict, cmd_report, Corpus, RunOptions, Scenario,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "pipeline_out".into()));
    let corpus = Corpus::load(&bundled_corpus_dir())?;
    let options = RunOptions::from_settings(&corpus.settings);
    let analyses = analyze_corpus(&corpus, &options)?;
    cmd_correlate(&analyses, &out)?;
    let doc = cmd_predict(&analyses, &Scenario::grid(None, None, None), &corpus.settings, options.seed, &out)?;
    print!("{}", cmd_report(&analyses, &out)?);
    for s in &doc.scenarios {
        println!("{:<26} weighted f {:.3}", s.scenario.to_string(), s.pooled.weighted.f_score);
    }
    println!("outputs in {}", out.display());
    Ok(())
}
