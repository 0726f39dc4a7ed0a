//! Reference implementations that the library is checked against. Each one
//! recomputes a result from scratch by a different route than the library.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use tplab::interp::{Caller, EnterEvent, ExecutionHooks, Interpreter, NoHooks};
use tplab::lang::{parse_project, LoadedProject, Program, SourceFile, Type};
use tplab::learn::Dataset;
use tplab::pipeline::{bundled_corpus_dir, Corpus};

pub fn corpus() -> Corpus {
    Corpus::load(&bundled_corpus_dir()).expect("bundled corpus loads")
}

// ---------------------------------------------------------------------------
// Stack distance: BFS over the dynamic call graph of each test.

#[derive(Default)]
struct EdgeRecorder {
    test: usize,
    /// test -> caller node -> callees; node 0 is the test, method m is m + 1.
    edges: BTreeMap<usize, BTreeMap<usize, BTreeSet<usize>>>,
}

impl ExecutionHooks for EdgeRecorder {
    fn test_start(&mut self, test: usize) {
        self.test = test;
        self.edges.entry(test).or_default();
    }

    fn enter(&mut self, e: EnterEvent) {
        let from = match e.caller {
            Caller::Test => 0,
            Caller::Method(m) => m + 1,
        };
        self.edges.entry(self.test).or_default().entry(from).or_default().insert(e.method + 1);
    }
}

/// (method, test) -> shortest call path length from the test to the method.
pub fn bfs_distances(program: &Program) -> BTreeMap<(usize, usize), u32> {
    let mut rec = EdgeRecorder::default();
    {
        let mut interp = Interpreter::new(program, &mut rec);
        for t in 0..program.tests.len() {
            interp.run_test(t);
        }
    }
    let mut out = BTreeMap::new();
    for (test, graph) in rec.edges {
        let mut dist: BTreeMap<usize, u32> = BTreeMap::from([(0, 0)]);
        let mut queue = VecDeque::from([0usize]);
        while let Some(node) = queue.pop_front() {
            for &next in graph.get(&node).into_iter().flatten() {
                if !dist.contains_key(&next) {
                    dist.insert(next, dist[&node] + 1);
                    queue.push_back(next);
                }
            }
        }
        for (node, d) in dist {
            if node > 0 {
                out.insert((node - 1, test), d);
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Mutation: splice replacement bodies into the source text and rerun.

/// Replacement bodies for a declared return type, as source text.
pub fn replacement_bodies(ty: Type) -> Vec<&'static str> {
    match ty {
        Type::Void => vec!["{}"],
        Type::Bool => vec!["{ return false; }", "{ return true; }"],
        Type::Int => vec!["{ return 0; }", "{ return 1; }"],
        Type::Float => vec!["{ return 0.0; }", "{ return 0.1; }"],
        Type::Str => vec!["{ return \"\"; }", "{ return \"A\"; }"],
        Type::Arr => vec!["{ return []; }"],
        Type::Ref => vec!["{ return null; }"],
    }
}

fn squash(text: &str) -> String {
    text.chars().filter(|c| !c.is_whitespace()).collect()
}

/// Decided from the body text alone.
pub fn textually_eligible(body: &str) -> bool {
    !matches!(squash(body).as_str(), "{}" | "{returnnull;}" | "{return[];}")
}

/// Tests of the original program that fail after swapping one function body.
fn failing_tests(project: &LoadedProject, func: usize, body: &str) -> BTreeSet<usize> {
    let f = &project.program.functions[func];
    let sources: Vec<SourceFile> = project
        .sources
        .iter()
        .map(|s| {
            if s.name == f.file {
                let text = format!("{}{}{}", &s.text[..f.body_span.start], body, &s.text[f.body_span.end..]);
                SourceFile::new(s.name.clone(), text)
            } else {
                s.clone()
            }
        })
        .collect();
    let mutated = parse_project(&project.program.project_id, &sources).expect("mutant parses");
    let mut interp = Interpreter::new(&mutated, NoHooks).with_step_budget(tplab::interp::DEFAULT_STEP_BUDGET);
    (0..mutated.tests.len()).filter(|&t| !interp.run_test(t).passed()).collect()
}

/// Per function: `None` if ineligible, otherwise the tests killing at least one of its mutants.
pub fn body_replacement_kills(project: &LoadedProject) -> Vec<Option<BTreeSet<usize>>> {
    project
        .program
        .functions
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let src = project.sources.iter().find(|s| s.name == f.file).unwrap();
            if !textually_eligible(&src.text[f.body_span.start..f.body_span.end]) {
                return None;
            }
            let mut killers = BTreeSet::new();
            for body in replacement_bodies(f.return_type) {
                killers.extend(failing_tests(project, i, body));
            }
            Some(killers)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Statistics by brute force.

/// Average rank by counting smaller and equal values.
pub fn ranks_by_counting(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|x| {
            let less = v.iter().filter(|y| *y < x).count() as f64;
            let equal = v.iter().filter(|y| *y == x).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

pub fn pearson_by_sums(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (sx, sy) = (x.iter().sum::<f64>(), y.iter().sum::<f64>());
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

pub fn spearman_oracle(x: &[f64], y: &[f64]) -> f64 {
    pearson_by_sums(&ranks_by_counting(x), &ranks_by_counting(y))
}

pub fn kendall_oracle(x: &[f64], y: &[f64]) -> f64 {
    let (mut conc, mut disc, mut tx, mut ty) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let (dx, dy) = (x[i] - x[j], y[i] - y[j]);
            if dx == 0.0 && dy == 0.0 {
                continue;
            } else if dx == 0.0 {
                tx += 1.0;
            } else if dy == 0.0 {
                ty += 1.0;
            } else if dx * dy > 0.0 {
                conc += 1.0;
            } else {
                disc += 1.0;
            }
        }
    }
    let f64_max = |a: f64| a;
    (conc - disc) / f64_max(((conc + disc + tx) * (conc + disc + ty)) as f64).sqrt()
}

fn permutations(items: &[f64]) -> Vec<Vec<f64>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, head);
            out.push(p);
        }
    }
    out
}

/// Two-sided permutation p-value of a statistic over all orderings of `y`.
pub fn exact_p(x: &[f64], y: &[f64], stat: fn(&[f64], &[f64]) -> f64) -> f64 {
    let observed = stat(x, y).abs();
    let perms = permutations(y);
    let hits = perms.iter().filter(|p| stat(x, p).abs() >= observed - 1e-9).count();
    hits as f64 / perms.len() as f64
}

// ---------------------------------------------------------------------------
// Greedy CART: every feature, every midpoint, weighted Gini, first best wins.

#[derive(Debug, Clone, PartialEq)]
pub enum CartNode {
    Leaf([u32; 2]),
    Split { feature: usize, threshold: f64, left: Box<CartNode>, right: Box<CartNode> },
}

fn gini_mass(c: [u32; 2]) -> f64 {
    // n * gini = n - (c0^2 + c1^2) / n
    let n = f64::from(c[0] + c[1]);
    if n == 0.0 {
        return 0.0;
    }
    n - (f64::from(c[0]).powi(2) + f64::from(c[1]).powi(2)) / n
}

pub fn greedy_cart(d: &Dataset, rows: &[usize]) -> CartNode {
    let mut counts = [0u32; 2];
    for &r in rows {
        counts[d.labels[r] as usize] += 1;
    }
    if counts[0] == 0 || counts[1] == 0 || rows.len() < 2 {
        return CartNode::Leaf(counts);
    }
    let mut best: Option<(f64, usize, f64)> = None;
    for f in 0..d.width() {
        let mut values: Vec<f64> = rows.iter().map(|&r| d.rows[r][f]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for w in values.windows(2) {
            let mut t = w[0] + (w[1] - w[0]) / 2.0;
            if t >= w[1] {
                t = w[0];
            }
            let (mut l, mut r) = ([0u32; 2], [0u32; 2]);
            for &i in rows {
                if d.rows[i][f] <= t {
                    l[d.labels[i] as usize] += 1;
                } else {
                    r[d.labels[i] as usize] += 1;
                }
            }
            let impurity = gini_mass(l) + gini_mass(r);
            if best.map_or(true, |(b, _, _)| impurity < b - 1e-12) {
                best = Some((impurity, f, t));
            }
        }
    }
    let Some((_, feature, threshold)) = best else { return CartNode::Leaf(counts) };
    let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| d.rows[i][feature] <= threshold);
    CartNode::Split { feature, threshold, left: Box::new(greedy_cart(d, &l)), right: Box::new(greedy_cart(d, &r)) }
}

pub fn cart_predict(node: &CartNode, x: &[f64], tie: u8) -> u8 {
    match node {
        CartNode::Leaf(c) => match c[0].cmp(&c[1]) {
            std::cmp::Ordering::Greater => 0,
            std::cmp::Ordering::Less => 1,
            std::cmp::Ordering::Equal => tie,
        },
        CartNode::Split { feature, threshold, left, right } => {
            cart_predict(if x[*feature] <= *threshold { left } else { right }, x, tie)
        }
    }
}

/// Converts a library tree into the oracle's nested form.
pub fn to_cart(tree: &tplab::learn::tree::Tree) -> CartNode {
    fn walk(nodes: &[tplab::learn::tree::Node], i: usize) -> CartNode {
        match &nodes[i] {
            tplab::learn::tree::Node::Leaf { counts } => CartNode::Leaf(*counts),
            tplab::learn::tree::Node::Split { feature, threshold, left, right } => CartNode::Split {
                feature: *feature,
                threshold: *threshold,
                left: Box::new(walk(nodes, *left)),
                right: Box::new(walk(nodes, *right)),
            },
        }
    }
    walk(&tree.nodes, 0)
}

// ---------------------------------------------------------------------------
// Metrics straight from confusion counts.

/// (precision, recall, f) weighted by class support, from `[actual][predicted]` counts.
pub fn weighted_from_counts(c: [[u64; 2]; 2]) -> (f64, f64, f64) {
    let total = (c[0][0] + c[0][1] + c[1][0] + c[1][1]) as f64;
    let (mut p, mut r, mut f) = (0.0, 0.0, 0.0);
    if total == 0.0 {
        return (p, r, f);
    }
    for k in 0..2 {
        let tp = c[k][k] as f64;
        let predicted = (c[0][k] + c[1][k]) as f64;
        let support = (c[k][0] + c[k][1]) as f64;
        let prec = if predicted == 0.0 { 0.0 } else { tp / predicted };
        let rec = if support == 0.0 { 0.0 } else { tp / support };
        let fs = if prec + rec == 0.0 { 0.0 } else { 2.0 * prec * rec / (prec + rec) };
        let w = support / total;
        p += w * prec;
        r += w * rec;
        f += w * fs;
    }
    (p, r, f)
}
