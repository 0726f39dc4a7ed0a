//! Rank correlation between stack distance and ineffectiveness on the
//! bundled `monotone` project, with the distance buckets behind it.

use tplab::lang::load_project;
use tplab::pipeline::{analyze_project, bundled_corpus_dir, RunOptions};
use tplab::stats::{correlate_rows, distance_bucket_report, kendall_tau_b, spearman, BUCKET_CROP_THRESHOLD};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let x = [1.0, 2.0, 3.0, 4.0, 5.0];
    let y = [2.0, 1.0, 4.0, 3.0, 5.0];
    let s = spearman(&x, &y)?;
    let k = kendall_tau_b(&x, &y)?;
    println!("toy: spearman {:.3} (p {:.3}, exact {}), kendall {:.3} (p {:.3})", s.coefficient, s.p_value, s.exact, k.coefficient, k.p_value);

    let project = load_project(&bundled_corpus_dir().join("monotone"))?;
    let analysis = analyze_project(&project.program, &RunOptions::from_settings(&Default::default()))?;
    for row in correlate_rows("monotone", &analysis.method_rows) {
        match row.result {
            Ok(r) => println!("monotone {}: {:.3} (p {:.2e}, n {})", row.method, r.coefficient, r.p_value, r.n),
            Err(e) => println!("monotone {}: {e}", row.method),
        }
    }
    println!("{:>8} {:>8} {:>12}", "distance", "methods", "ineffective");
    for b in distance_bucket_report(&analysis.method_rows, BUCKET_CROP_THRESHOLD) {
        println!("{:>8} {:>8} {:>12.3}", b.distance, b.methods, b.ineffective_proportion);
    }
    Ok(())
}
