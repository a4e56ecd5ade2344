//! Exact deterministic one-way complexity of small partial functions.
//!
//! Any deterministic one-way protocol must give distinct rows different messages, so the
//! minimum number of messages is the chromatic number of the conflict graph whose edges
//! join distinct rows.

use crate::error::{Error, Result};
use crate::function::{ceil_log2, PartialFunction};
use crate::learner::{DeterministicOneWay, Transcript};

/// Default largest component colored exactly.
pub const DEFAULT_EXACT_LIMIT: usize = 20;

/// Rows of a communication matrix, joined when they are distinct.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictGraph {
    adjacency: Vec<Vec<bool>>,
}

impl ConflictGraph {
    pub fn from_adjacency(adjacency: Vec<Vec<bool>>) -> Self {
        Self { adjacency }
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency[a][b]
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.vertex_count();
        (0..n).flat_map(|a| ((a + 1)..n).filter(move |&b| self.adjacency[a][b]).map(move |b| (a, b))).collect()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].iter().filter(|&&e| e).count()
    }

    /// Connected components, each sorted ascending; components ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.vertex_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut stack = vec![start];
            let mut comp = Vec::new();
            while let Some(v) = stack.pop() {
                comp.push(v);
                for w in 0..n {
                    if self.adjacency[v][w] && !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    fn induced(&self, vertices: &[usize]) -> Self {
        Self {
            adjacency: vertices
                .iter()
                .map(|&a| vertices.iter().map(|&b| self.adjacency[a][b]).collect())
                .collect(),
        }
    }

    /// True iff `colors` assigns different colors to adjacent vertices.
    pub fn is_proper(&self, colors: &[usize]) -> bool {
        self.edges().iter().all(|&(a, b)| colors[a] != colors[b])
    }
}

/// Exhaustive column scan: `x` and `x'` conflict when some column has both defined and different.
pub fn distinct_rows(f: &PartialFunction) -> ConflictGraph {
    let n = f.x_count();
    let mut adjacency = vec![vec![false; n]; n];
    for a in 0..n {
        for b in (a + 1)..n {
            let conflict = f
                .row(a)
                .iter()
                .zip(f.row(b))
                .any(|(u, v)| matches!((u.bit(), v.bit()), (Some(p), Some(q)) if p != q));
            adjacency[a][b] = conflict;
            adjacency[b][a] = conflict;
        }
    }
    ConflictGraph { adjacency }
}

/// DSATUR greedy coloring; returns colors and the number used.
fn dsatur(g: &ConflictGraph) -> (Vec<usize>, usize) {
    let n = g.vertex_count();
    let mut colors: Vec<Option<usize>> = vec![None; n];
    let mut used = 0;
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| colors[v].is_none())
            .max_by_key(|&v| {
                let mut neighbor_colors: Vec<usize> =
                    (0..n).filter(|&w| g.adjacent(v, w)).filter_map(|w| colors[w]).collect();
                neighbor_colors.sort_unstable();
                neighbor_colors.dedup();
                (neighbor_colors.len(), g.degree(v), std::cmp::Reverse(v))
            })
            .expect("uncolored vertex remains");
        let c = (0..)
            .find(|&c| (0..n).all(|w| !(g.adjacent(v, w) && colors[w] == Some(c))))
            .expect("some color is free");
        colors[v] = Some(c);
        used = used.max(c + 1);
    }
    (colors.into_iter().map(|c| c.expect("all colored")).collect(), used)
}

/// Greedy clique built from highest-degree vertices; a lower bound on the chromatic number.
fn greedy_clique(g: &ConflictGraph) -> usize {
    let n = g.vertex_count();
    let mut best = usize::from(n > 0);
    for start in 0..n {
        let mut clique = vec![start];
        let mut candidates: Vec<usize> = (0..n).filter(|&w| g.adjacent(start, w)).collect();
        candidates.sort_by_key(|&w| std::cmp::Reverse(g.degree(w)));
        for w in candidates {
            if clique.iter().all(|&c| g.adjacent(c, w)) {
                clique.push(w);
            }
        }
        best = best.max(clique.len());
    }
    best
}

fn colorable(g: &ConflictGraph, order: &[usize], k: usize, colors: &mut [Option<usize>], pos: usize, max_used: usize) -> bool {
    if pos == order.len() {
        return true;
    }
    let v = order[pos];
    // Symmetry breaking: a fresh color is only ever the next unused one.
    for c in 0..k.min(max_used + 1) {
        let clash = (0..g.vertex_count()).any(|w| g.adjacent(v, w) && colors[w] == Some(c));
        if clash {
            continue;
        }
        colors[v] = Some(c);
        if colorable(g, order, k, colors, pos + 1, max_used.max(c + 1)) {
            return true;
        }
        colors[v] = None;
    }
    false
}

/// Exact chromatic number by branch and bound between a clique lower bound and DSATUR.
pub fn chromatic_number(g: &ConflictGraph) -> usize {
    let n = g.vertex_count();
    if n == 0 {
        return 0;
    }
    let (_, upper) = dsatur(g);
    let lower = greedy_clique(g);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(g.degree(v)));
    for k in lower..upper {
        let mut colors = vec![None; n];
        if colorable(g, &order, k, &mut colors, 0, 0) {
            return k;
        }
    }
    upper
}

/// Minimum message count and its bit cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleCost {
    /// Chromatic number of the conflict graph (or a greedy upper bound when not exact).
    pub messages: usize,
    /// `ceil(log2 messages)`.
    pub bits: u32,
    pub exact: bool,
}

/// Exact `D^{A->B}` as `ceil(log2 chi)` of the conflict graph.
///
/// Components are colored independently; one with more than `limit` rows falls back to a
/// DSATUR upper bound and the result is flagged inexact.
pub fn exact_one_way_cost(f: &PartialFunction, limit: usize) -> OracleCost {
    let g = distinct_rows(f);
    let mut messages = 0;
    let mut exact = true;
    for comp in g.components() {
        let sub = g.induced(&comp);
        let chi = if comp.len() <= limit {
            chromatic_number(&sub)
        } else {
            exact = false;
            dsatur(&sub).1
        };
        messages = messages.max(chi);
    }
    OracleCost { messages, bits: ceil_log2(messages), exact }
}

/// First cell where a deterministic protocol disagrees with the function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Counterexample {
    pub x: usize,
    pub y: usize,
    pub expected: bool,
    pub got: bool,
}

/// Exhaustive check of a deterministic protocol on every defined cell.
pub fn validate_compiled(det: &impl DeterministicOneWay, f: &PartialFunction) -> Result<Option<Counterexample>> {
    if det.x_count() != f.x_count() {
        return Err(Error::DimensionMismatch(format!(
            "protocol has {} rows, function has {}",
            det.x_count(),
            f.x_count()
        )));
    }
    for x in 0..f.x_count() {
        let outputs = det.outputs(x)?;
        if outputs.len() != f.y_count() {
            return Err(Error::DimensionMismatch(format!(
                "protocol answers {} columns, function has {}",
                outputs.len(),
                f.y_count()
            )));
        }
        for (y, expected) in f.defined_in_row(x) {
            if outputs[y] != expected {
                return Ok(Some(Counterexample { x, y, expected, got: outputs[y] }));
            }
        }
    }
    Ok(None)
}

/// A deterministic protocol given by an explicit message per row and an output table per message.
#[derive(Debug, Clone)]
pub struct LookupProtocol {
    messages: Vec<Transcript>,
    outputs: Vec<Vec<bool>>,
}

impl LookupProtocol {
    pub fn new(messages: Vec<Transcript>, outputs: Vec<Vec<bool>>) -> Result<Self> {
        if messages.len() != outputs.len() {
            return Err(Error::DimensionMismatch("one output row per message".into()));
        }
        Ok(Self { messages, outputs })
    }

    /// Copies another protocol's messages and outputs.
    pub fn tabulate(det: &impl DeterministicOneWay) -> Result<Self> {
        let messages = (0..det.x_count()).map(|x| det.message(x).clone()).collect();
        let outputs = (0..det.x_count()).map(|x| det.outputs(x)).collect::<Result<_>>()?;
        Self::new(messages, outputs)
    }

    pub fn flip(&mut self, x: usize, y: usize) {
        self.outputs[x][y] = !self.outputs[x][y];
    }
}

impl DeterministicOneWay for LookupProtocol {
    fn x_count(&self) -> usize {
        self.messages.len()
    }

    fn message(&self, x: usize) -> &Transcript {
        &self.messages[x]
    }

    fn outputs(&self, x: usize) -> Result<Vec<bool>> {
        Ok(self.outputs[x].clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::Cell;
    use crate::learner::{compile_deterministic_protocol, LearnerConfig};
    use crate::protocol::{planted_protocol, PlantedSpec};
    use crate::random::seeded_rng;

    /// Chromatic number by trying every coloring with `k` colors.
    fn brute_force_chi(g: &ConflictGraph) -> usize {
        let n = g.vertex_count();
        for k in 1..=n.max(1) {
            let total = k.pow(n as u32);
            for code in 0..total {
                let colors: Vec<usize> = (0..n).map(|i| code / k.pow(i as u32) % k).collect();
                if g.is_proper(&colors) {
                    return k;
                }
            }
        }
        0
    }

    #[test]
    fn constant_function_has_no_conflicts() {
        let f = PartialFunction::constant(5, 3, false);
        assert!(distinct_rows(&f).edges().is_empty());
        assert_eq!(exact_one_way_cost(&f, 20), OracleCost { messages: 1, bits: 0, exact: true });
    }

    #[test]
    fn identity_valued_total_function() {
        let f = PartialFunction::from_fn(2, 2, |x, y| Cell::from_bit(x == y)).unwrap();
        assert_eq!(distinct_rows(&f).edges(), vec![(0, 1)]);
    }

    #[test]
    fn non_transitive_witness() {
        // Row 0 is undefined where rows 1 and 2 disagree.
        let cells = vec![
            Cell::One, Cell::Undefined, //
            Cell::One, Cell::One, //
            Cell::One, Cell::Zero,
        ];
        let f = PartialFunction::new(3, 2, cells).unwrap();
        let g = distinct_rows(&f);
        assert!(!g.adjacent(0, 1));
        assert!(!g.adjacent(0, 2));
        assert!(g.adjacent(1, 2));
    }

    #[test]
    fn two_bit_equality_needs_four_messages() {
        let f = PartialFunction::from_fn(4, 4, |x, y| Cell::from_bit(x == y)).unwrap();
        assert_eq!(exact_one_way_cost(&f, 20), OracleCost { messages: 4, bits: 2, exact: true });
    }

    #[test]
    fn index_shift_footnote_function() {
        let f = PartialFunction::index_shift(4).unwrap();
        let cost = exact_one_way_cost(&f, DEFAULT_EXACT_LIMIT);
        assert!(cost.exact);
        assert_eq!(cost.messages, 4);
        assert!(cost.bits <= 4);
    }

    #[test]
    fn branch_and_bound_matches_brute_force() {
        let mut rng = seeded_rng(51);
        use rand::Rng;
        for _ in 0..40 {
            let n = rng.random_range(1..=6);
            let mut adjacency = vec![vec![false; n]; n];
            for a in 0..n {
                for b in (a + 1)..n {
                    let e = rng.random_bool(0.5);
                    adjacency[a][b] = e;
                    adjacency[b][a] = e;
                }
            }
            let g = ConflictGraph::from_adjacency(adjacency);
            assert_eq!(chromatic_number(&g), brute_force_chi(&g));
        }
    }

    #[test]
    fn total_function_chi_counts_row_classes() {
        let mut rng = seeded_rng(52);
        use rand::Rng;
        for _ in 0..20 {
            let classes: Vec<Vec<bool>> = (0..3).map(|_| (0..4).map(|_| rng.random_bool(0.5)).collect()).collect();
            let rows: Vec<usize> = (0..8).map(|_| rng.random_range(0..3)).collect();
            let f = PartialFunction::from_fn(8, 4, |x, y| Cell::from_bit(classes[rows[x]][y])).unwrap();
            let mut distinct: Vec<&Vec<bool>> = rows.iter().map(|&r| &classes[r]).collect();
            distinct.sort();
            distinct.dedup();
            assert_eq!(exact_one_way_cost(&f, 20).messages, distinct.len());
        }
    }

    #[test]
    fn oversized_component_falls_back_to_greedy() {
        let f = PartialFunction::from_fn(6, 6, |x, y| Cell::from_bit(x == y)).unwrap();
        let cost = exact_one_way_cost(&f, 4);
        assert!(!cost.exact);
        assert_eq!(cost.messages, 6);
    }

    #[test]
    fn validation_reports_flipped_cell() {
        let spec = PlantedSpec { qubits: 1, x_count: 4, y_count: 8, epsilon: 1e-4, undefined_fraction: 0.0 };
        let (f, p) = planted_protocol(spec, &mut seeded_rng(53)).unwrap();
        let compiled = compile_deterministic_protocol(&p, &f, &LearnerConfig::new(1e-4).unwrap()).unwrap();
        assert_eq!(validate_compiled(&compiled, &f).unwrap(), None);

        let (x, y, v) = f.defined_cells().nth(3).unwrap();
        let mut table = LookupProtocol::tabulate(&compiled).unwrap();
        table.flip(x, y);
        assert_eq!(
            validate_compiled(&table, &f).unwrap(),
            Some(Counterexample { x, y, expected: v, got: !v })
        );
    }
}
