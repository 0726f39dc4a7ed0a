//! Binary CART classification trees split on Gini impurity.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dataset::{Class, Dataset, INEFFECTIVE};

/// Split candidates whose score differs by no more than this are treated as equal;
/// the one found first wins.
pub const SCORE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go left.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf { counts: [u32; 2] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

pub struct TreeParams {
    /// Features examined per split; at least this many non-constant ones are
    /// visited when available.
    pub max_features: usize,
    pub min_leaf: usize,
}

pub fn gini(counts: [u32; 2]) -> f64 {
    let n = f64::from(counts[0] + counts[1]);
    if n == 0.0 {
        return 0.0;
    }
    let (a, b) = (f64::from(counts[0]) / n, f64::from(counts[1]) / n);
    1.0 - a * a - b * b
}

/// Sum over both children of (c0^2 + c1^2) / n; larger means purer children.
pub fn split_score(left: [u32; 2], right: [u32; 2]) -> f64 {
    let part = |c: [u32; 2]| {
        let (a, b) = (f64::from(c[0]), f64::from(c[1]));
        (a * a + b * b) / (a + b)
    };
    part(left) + part(right)
}

fn counts_of(data: &Dataset, rows: &[usize]) -> [u32; 2] {
    let mut c = [0u32; 2];
    for &r in rows {
        c[data.labels[r] as usize] += 1;
    }
    c
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    score: f64,
}

fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    if m >= b {
        a
    } else {
        m
    }
}

/// Best threshold on one feature, or `None` when no split leaves `min_leaf` rows on both sides.
fn best_threshold(data: &Dataset, rows: &[usize], feature: usize, min_leaf: usize) -> Option<(f64, f64)> {
    let mut sorted: Vec<(f64, Class)> = rows.iter().map(|&r| (data.rows[r][feature], data.labels[r])).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total = counts_of(data, rows);
    let mut left = [0u32; 2];
    let mut best: Option<(f64, f64)> = None;
    for i in 0..sorted.len() - 1 {
        left[sorted[i].1 as usize] += 1;
        if sorted[i].0 == sorted[i + 1].0 || i + 1 < min_leaf || sorted.len() - i - 1 < min_leaf {
            continue;
        }
        let right = [total[0] - left[0], total[1] - left[1]];
        let score = split_score(left, right);
        if best.map_or(true, |(_, s)| score > s + SCORE_TOLERANCE) {
            best = Some((midpoint(sorted[i].0, sorted[i + 1].0), score));
        }
    }
    best
}

impl Tree {
    /// Grows a tree on `rows` (indices into `data`, repeats allowed).
    ///
    /// When `max_features` covers every column, features are examined in
    /// column order and no randomness is drawn.
    pub fn fit<R: Rng>(data: &Dataset, rows: Vec<usize>, params: &TreeParams, rng: &mut R, importance: &mut [f64]) -> Tree {
        let mut tree = Tree { nodes: Vec::new() };
        tree.grow(data, rows, params, rng, importance);
        tree
    }

    fn grow<R: Rng>(
        &mut self,
        data: &Dataset,
        rows: Vec<usize>,
        params: &TreeParams,
        rng: &mut R,
        importance: &mut [f64],
    ) -> usize {
        let id = self.nodes.len();
        let counts = counts_of(data, &rows);
        self.nodes.push(Node::Leaf { counts });
        if counts[0] == 0 || counts[1] == 0 || rows.len() < 2 * params.min_leaf.max(1) {
            return id;
        }
        let width = data.width();
        let mut order: Vec<usize> = (0..width).collect();
        if params.max_features < width {
            order.shuffle(rng);
        }
        let mut best: Option<BestSplit> = None;
        let mut visited = 0;
        for &f in &order {
            if visited >= params.max_features {
                break;
            }
            let first = data.rows[rows[0]][f];
            if rows.iter().all(|&r| data.rows[r][f] == first) {
                continue;
            }
            visited += 1;
            if let Some((threshold, score)) = best_threshold(data, &rows, f, params.min_leaf) {
                if best.as_ref().map_or(true, |b| score > b.score + SCORE_TOLERANCE) {
                    best = Some(BestSplit { feature: f, threshold, score });
                }
            }
        }
        let Some(best) = best else { return id };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&r| data.rows[r][best.feature] <= best.threshold);
        let (lc, rc) = (counts_of(data, &left_rows), counts_of(data, &right_rows));
        importance[best.feature] += f64::from(counts[0] + counts[1]) * gini(counts)
            - f64::from(lc[0] + lc[1]) * gini(lc)
            - f64::from(rc[0] + rc[1]) * gini(rc);
        let left = self.grow(data, left_rows, params, rng, importance);
        let right = self.grow(data, right_rows, params, rng, importance);
        self.nodes[id] = Node::Split { feature: best.feature, threshold: best.threshold, left, right };
        id
    }

    pub fn leaf_counts(&self, x: &[f64]) -> [u32; 2] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { counts } => return *counts,
                Node::Split { feature, threshold, left, right } => {
                    i = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    /// Majority class of the reached leaf; an even leaf goes to `tie_class`.
    pub fn predict(&self, x: &[f64], tie_class: Class) -> Class {
        let c = self.leaf_counts(x);
        match c[0].cmp(&c[1]) {
            std::cmp::Ordering::Greater => 0,
            std::cmp::Ordering::Less => INEFFECTIVE,
            std::cmp::Ordering::Equal => tie_class,
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}
