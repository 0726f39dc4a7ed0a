//! Oversamples a minority class and shows where each synthetic row came from.

use tplab::learn::{smote, Dataset, RowOrigin};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..12 {
        rows.push(vec![f64::from(i), f64::from(i % 3)]);
        labels.push(0);
    }
    for i in 0..4 {
        rows.push(vec![20.0 + f64::from(i), 5.0 - f64::from(i)]);
        labels.push(1);
    }
    let data = Dataset::from_rows(rows, labels)?;
    let out = smote(&data, 3, 1.0, 7)?;
    println!("before {:?}, after {:?}", data.class_counts(), out.class_counts());
    for (row, origin) in out.rows.iter().zip(&out.origins) {
        if let RowOrigin::Synthetic { seed, neighbor } = origin {
            println!("{row:.3?} between row {seed} and row {neighbor}");
        }
    }
    Ok(())
}
