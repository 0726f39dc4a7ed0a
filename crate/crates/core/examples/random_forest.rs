//! Trains a random forest on a synthetic dataset, cross-validates it and
//! prints feature importance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tplab::learn::{cross_validate, train_forest, CvConfig, Dataset, ForestConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..300 {
        let distance = f64::from(rng.gen_range(1..8));
        let noise: f64 = rng.gen();
        let ineffective = distance + rng.gen_range(-1.5..1.5) > 4.5;
        rows.push(vec![distance, noise]);
        labels.push(u8::from(ineffective));
    }
    let mut data = Dataset::from_rows(rows, labels)?;
    data.feature_names = vec!["min_stack_distance".into(), "noise".into()];

    let model = train_forest(&data, &ForestConfig::default(), 42)?;
    for (name, value) in model.importance_report() {
        println!("{name:<20} {value:.3}");
    }
    let p = model.predict_row(&[7.0, 0.5])?;
    println!("distance 7 -> class {} ({:.0}% of trees)", p.class, p.vote_fraction * 100.0);

    let report = cross_validate(&data, &CvConfig::default(), 42)?;
    let w = report.weighted;
    println!("10x3 CV: precision {:.3} recall {:.3} f {:.3}", w.precision, w.recall, w.f_score);
    println!("confusion [actual][predicted]: {:?}", report.confusion_matrix.0);
    Ok(())
}
