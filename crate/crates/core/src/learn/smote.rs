//! Synthetic minority oversampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dataset::{Dataset, RowOrigin};
use super::LearnError;

pub const DEFAULT_NEIGHBORS: usize = 5;

/// Number of minority rows needed to reach `ratio` minority rows per majority row.
pub fn smote_target(majority: usize, ratio: f64) -> usize {
    (ratio * majority as f64).round() as usize
}

fn distance2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Adds synthetic minority rows until the minority class holds
/// `smote_target(majority, ratio)` rows. Nothing is added if it already does.
///
/// Seed rows are taken round-robin over the minority rows; each synthetic row
/// lies on the segment between its seed and one of the seed's `k` nearest
/// minority neighbours (Euclidean on numeric columns). One-hot columns are
/// copied from the seed.
pub fn smote(data: &Dataset, k: usize, ratio: f64, seed: u64) -> Result<Dataset, LearnError> {
    let minority_class = data.minority_class();
    let minority: Vec<usize> = (0..data.len()).filter(|&i| data.labels[i] == minority_class).collect();
    let majority = data.len() - minority.len();
    if minority.len() < 2 {
        return Err(LearnError::TooFewMinoritySamples(minority.len()));
    }
    let k = k.clamp(1, minority.len() - 1);
    let target = smote_target(majority, ratio);
    let mut out = data.clone();
    if target <= minority.len() {
        return Ok(out);
    }
    let numeric = data.numeric_columns;
    let neighbors: Vec<Vec<usize>> = minority
        .iter()
        .map(|&i| {
            let mut others: Vec<(f64, usize)> = minority
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| (distance2(&data.rows[i][..numeric], &data.rows[j][..numeric]), j))
                .collect();
            others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            others.into_iter().take(k).map(|(_, j)| j).collect()
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for s in 0..target - minority.len() {
        let slot = s % minority.len();
        let base = minority[slot];
        let nn = neighbors[slot][rng.gen_range(0..k)];
        let u: f64 = rng.gen();
        let mut row = data.rows[base].clone();
        for (c, v) in row.iter_mut().enumerate().take(numeric) {
            let (a, b) = (data.rows[base][c], data.rows[nn][c]);
            *v = (a + u * (b - a)).clamp(a.min(b), a.max(b));
        }
        out.rows.push(row);
        out.labels.push(minority_class);
        out.groups.push(data.groups[base].clone());
        out.origins.push(RowOrigin::Synthetic { seed: base, neighbor: nn });
    }
    Ok(out)
}
