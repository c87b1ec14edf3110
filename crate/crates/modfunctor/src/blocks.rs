//! Conformal-block dimensions over stable genus-labeled graphs.
//!
//! The primary evaluation path is the graph sum: a dimension query on a
//! stable graph sums, over all labelings of the internal edges (with dual
//! labels at the two ends of each edge), the product of per-vertex smooth
//! dimensions. Smooth dimensions themselves are evaluated on a canonical
//! trivalent pair-of-pants graph, so everything reduces to the fusion
//! tensor. An independent closed-form evaluation through the S-matrix
//! characters is kept alongside as an oracle:
//!
//! `dim(g; x_1..x_n) = sum_m (prod_i S[x_i][m]/S[0][m]) * S[0][m]^(2-2g)`.
//!
//! Factorization (graph-independence of the value) and propagation of vacua
//! (inserting the vacuum label changes nothing) are exposed as check
//! operations.

use std::collections::{BTreeMap, HashMap};
use std::sync::RwLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::{GenusGraph, GraphBuilder};
use crate::modular::{within_tol, Label, ModularDatum, Tolerances};
use crate::report::{CheckEntry, Residual};

/// A dimension query: a stable genus-labeled graph together with one module
/// label per leg, in leg declaration order. The datum is supplied by the
/// [`BlockEvaluator`] the query is run against.
#[derive(Debug, Clone)]
pub struct BlockQuery {
    pub shape: GenusGraph,
    pub leg_labels: Vec<Label>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DimensionResult {
    pub value: u64,
    /// Number of complete edge labelings whose product was evaluated
    /// (pruned branches are not counted).
    pub labelings_enumerated: u64,
}

/// Evaluator bound to one datum, with a concurrent memo cache keyed by
/// `(genus, sorted label multiset)`. Cache writes are idempotent, so
/// concurrent insertion of identical keys is harmless.
pub struct BlockEvaluator<'a> {
    datum: &'a ModularDatum,
    tol: Tolerances,
    jobs: usize,
    cache: RwLock<HashMap<(u32, Vec<Label>), u64>>,
}

impl<'a> BlockEvaluator<'a> {
    pub fn new(datum: &'a ModularDatum, tol: Tolerances) -> Self {
        Self::with_jobs(datum, tol, 1)
    }

    pub fn with_jobs(datum: &'a ModularDatum, tol: Tolerances, jobs: usize) -> Self {
        BlockEvaluator {
            datum,
            tol,
            jobs: jobs.max(1),
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn datum(&self) -> &ModularDatum {
        self.datum
    }

    /// Dimension for a smooth surface of genus `g` with the given boundary
    /// labels, evaluated on the canonical pair-of-pants graph. Closed
    /// surfaces of positive genus evaluate through their loop graphs; in
    /// particular the genus-1 dimension with no insertions is the rank.
    pub fn dim_smooth(&self, genus: u32, labels: &[Label]) -> Result<u64> {
        if !evaluable_pair(genus, labels.len()) {
            return Err(Error::UnstablePair {
                genus,
                legs: labels.len(),
            });
        }
        let mut key_labels = labels.to_vec();
        key_labels.sort_unstable();
        let key = (genus, key_labels);
        if let Some(&v) = self.cache.read().unwrap().get(&key) {
            return Ok(v);
        }
        let value = if genus == 0 && labels.len() == 2 {
            // two-point sphere: the non-degenerate pairing
            u64::from(labels[1] == self.datum.dual(labels[0]))
        } else {
            let shape = canonical_pants_graph(genus, labels.len());
            let (value, _) = self.sum_over_labelings(&shape, labels, &|g, ls| {
                debug_assert_eq!(g, 0);
                match ls.len() {
                    2 => Ok(u64::from(ls[1] == self.datum.dual(ls[0]))),
                    3 => Ok(self.datum.fusion(ls[0], ls[1], ls[2])),
                    _ => unreachable!("decomposition graphs are trivalent"),
                }
            })?;
            value
        };
        self.cache.write().unwrap().insert(key, value);
        Ok(value)
    }

    /// Dimension attached to an arbitrary stable graph: sum over internal
    /// edge labelings of the product of per-vertex smooth dimensions.
    /// Disconnected graphs multiply component-wise.
    pub fn dim_graph(&self, query: &BlockQuery) -> Result<DimensionResult> {
        let legs = query.shape.graph.legs();
        if legs.len() != query.leg_labels.len() {
            return Err(Error::LengthMismatch {
                expected: legs.len(),
                got: query.leg_labels.len(),
            });
        }
        let (value, labelings_enumerated) =
            self.sum_over_labelings(&query.shape, &query.leg_labels, &|g, ls| {
                self.dim_smooth(g, ls)
            })?;
        Ok(DimensionResult {
            value,
            labelings_enumerated,
        })
    }

    /// Closed-form evaluation through S-matrix characters; the independent
    /// oracle for the graph sum.
    pub fn dim_closed_form(&self, genus: u32, labels: &[Label]) -> Result<u64> {
        if !evaluable_pair(genus, labels.len()) {
            return Err(Error::UnstablePair {
                genus,
                legs: labels.len(),
            });
        }
        let d = self.datum;
        let n = d.rank();
        let exponent = 2i32 - 2 * genus as i32;
        let mut acc = Complex64::new(0.0, 0.0);
        for m in 0..n {
            let s0m = d.s(0, m);
            let mut term = cpowi(s0m, exponent);
            for &x in labels {
                term *= d.s(x.0, m) / s0m;
            }
            acc += term;
        }
        let rounded = acc.re.round();
        // NaN-strict: a non-finite sum (degenerate S) must not round
        if !within_tol((acc - rounded).norm(), self.tol.integer) || rounded < 0.0 {
            return Err(Error::NonIntegralCoefficient {
                i: genus as usize,
                j: labels.len(),
                k: 0,
                value: acc.re,
            });
        }
        Ok(rounded as u64)
    }

    /// Propagation of vacua: appending the vacuum label must not change the
    /// dimension.
    pub fn check_vacuum_propagation(&self, genus: u32, labels: &[Label]) -> Result<CheckEntry> {
        let base = self.dim_smooth(genus, labels)?;
        let mut extended = labels.to_vec();
        extended.push(Label::VACUUM);
        let with_vacuum = self.dim_smooth(genus, &extended)?;
        let name = format!("vacuum/g{}n{}", genus, labels.len());
        if base == with_vacuum {
            Ok(CheckEntry::pass(
                name,
                Residual::Exact,
                format!("dim {} unchanged by vacuum insertion", base),
            ))
        } else {
            Ok(CheckEntry::fail(
                name,
                Residual::Float((base as f64 - with_vacuum as f64).abs()),
                format!("dim {} became {} after vacuum insertion", base, with_vacuum),
            ))
        }
    }

    /// Factorization: every one-edge degeneration of the graph carries the
    /// same dimension. All comparisons are reported in the detail string.
    pub fn check_factorization(
        &self,
        shape: &GenusGraph,
        leg_labels: &[Label],
    ) -> Result<CheckEntry> {
        let base = self
            .dim_graph(&BlockQuery {
                shape: shape.clone(),
                leg_labels: leg_labels.to_vec(),
            })?
            .value;
        let name = format!(
            "factorization/g{}n{}",
            shape.total_genus(),
            leg_labels.len()
        );
        let degenerations = shape.one_edge_degenerations();
        let mut worst: Option<(u64, usize)> = None;
        for (idx, refined) in degenerations.iter().enumerate() {
            let value = self
                .dim_graph(&BlockQuery {
                    shape: refined.clone(),
                    leg_labels: leg_labels.to_vec(),
                })?
                .value;
            if value != base && worst.is_none() {
                worst = Some((value, idx));
            }
        }
        match worst {
            None => Ok(CheckEntry::pass(
                name,
                Residual::Exact,
                format!(
                    "{} degenerations all evaluate to {}",
                    degenerations.len(),
                    base
                ),
            )),
            Some((value, idx)) => Ok(CheckEntry::fail(
                name,
                Residual::Float((base as f64 - value as f64).abs()),
                format!(
                    "degeneration {} evaluates to {} instead of {}",
                    idx, value, base
                ),
            )),
        }
    }

    /// Shared labeling enumeration. `vertex_factor(genus, incident labels)`
    /// supplies the per-vertex dimension; edges are enumerated in declaration
    /// order with lexicographic label order and early exit on a zero partial
    /// product.
    fn sum_over_labelings(
        &self,
        shape: &GenusGraph,
        leg_labels: &[Label],
        vertex_factor: &(dyn Fn(u32, &[Label]) -> Result<u64> + Sync),
    ) -> Result<(u64, u64)> {
        let graph = &shape.graph;
        let legs = graph.legs();
        if legs.len() != leg_labels.len() {
            return Err(Error::LengthMismatch {
                expected: legs.len(),
                got: leg_labels.len(),
            });
        }
        let label_of_leg: BTreeMap<usize, Label> = legs
            .iter()
            .copied()
            .zip(leg_labels.iter().copied())
            .collect();

        let mut total: u64 = 1;
        let mut leaves: u64 = 0;
        for component in graph.components() {
            let (value, n) = self.component_sum(shape, &component, &label_of_leg, vertex_factor)?;
            total *= value;
            leaves += n;
        }
        Ok((total, leaves))
    }

    fn component_sum(
        &self,
        shape: &GenusGraph,
        component: &[usize],
        label_of_leg: &BTreeMap<usize, Label>,
        vertex_factor: &(dyn Fn(u32, &[Label]) -> Result<u64> + Sync),
    ) -> Result<(u64, u64)> {
        let graph = &shape.graph;
        let in_component = |v: usize| component.binary_search(&v).is_ok();
        let edges: Vec<(usize, usize)> = graph
            .internal_edges()
            .into_iter()
            .filter(|&(h, _)| in_component(graph.source_of(h)))
            .collect();
        let edge_index: BTreeMap<usize, (usize, bool)> = edges
            .iter()
            .enumerate()
            .flat_map(|(i, &(h1, h2))| [(h1, (i, false)), (h2, (i, true))])
            .collect();

        // Per vertex: the slot plan (legs resolved now, edge halves filled
        // during enumeration) and the last edge the vertex waits for.
        enum Slot {
            Fixed(Label),
            Edge(usize, bool),
        }
        let mut plans: Vec<(u32, Vec<Slot>, isize)> = Vec::new();
        for &v in component {
            let mut slots = Vec::new();
            let mut ready_at: isize = -1;
            for h in graph.half_edges_at(v) {
                if let Some(&l) = label_of_leg.get(&h) {
                    slots.push(Slot::Fixed(l));
                } else {
                    let (e, dualized) = edge_index[&h];
                    ready_at = ready_at.max(e as isize);
                    slots.push(Slot::Edge(e, dualized));
                }
            }
            plans.push((shape.genus[v], slots, ready_at));
        }

        // vertices grouped by the edge depth at which they become evaluable
        let mut ready: Vec<Vec<usize>> = vec![Vec::new(); edges.len() + 1];
        for (pi, plan) in plans.iter().enumerate() {
            ready[(plan.2 + 1) as usize].push(pi);
        }

        let rank = self.datum.rank();
        let eval_vertex = |pi: usize, assignment: &[Label]| -> Result<u64> {
            let (genus, slots, _) = &plans[pi];
            let labels: Vec<Label> = slots
                .iter()
                .map(|s| match s {
                    Slot::Fixed(l) => *l,
                    Slot::Edge(e, dualized) => {
                        let l = assignment[*e];
                        if *dualized {
                            self.datum.dual(l)
                        } else {
                            l
                        }
                    }
                })
                .collect();
            vertex_factor(*genus, &labels)
        };

        // product of the vertices with no internal edges
        let mut prefix: u64 = 1;
        for &pi in &ready[0] {
            prefix = prefix.saturating_mul(eval_vertex(pi, &[])?);
        }
        if edges.is_empty() {
            return Ok((prefix, 1));
        }
        if prefix == 0 {
            return Ok((0, 0));
        }

        let descend = |first: Label| -> Result<(u64, u64)> {
            let mut assignment = vec![Label(0); edges.len()];
            assignment[0] = first;
            self.descend_rec(
                &ready,
                &eval_vertex,
                rank,
                &mut assignment,
                0,
                prefix,
                edges.len(),
            )
        };

        if self.jobs > 1 && rank > 1 {
            // split the first edge label across workers
            let descend = &descend;
            let results: Vec<Result<(u64, u64)>> = std::thread::scope(|scope| {
                let handles: Vec<_> = (0..rank)
                    .map(|l| scope.spawn(move || descend(Label(l))))
                    .collect();
                handles.into_iter().map(|h| h.join().unwrap()).collect()
            });
            let mut value = 0u64;
            let mut leaves = 0u64;
            for r in results {
                let (v, n) = r?;
                value += v;
                leaves += n;
            }
            Ok((value, leaves))
        } else {
            let mut value = 0u64;
            let mut leaves = 0u64;
            for l in 0..rank {
                let (v, n) = descend(Label(l))?;
                value += v;
                leaves += n;
            }
            Ok((value, leaves))
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn descend_rec(
        &self,
        ready: &[Vec<usize>],
        eval_vertex: &dyn Fn(usize, &[Label]) -> Result<u64>,
        rank: usize,
        assignment: &mut Vec<Label>,
        depth: usize,
        partial: u64,
        n_edges: usize,
    ) -> Result<(u64, u64)> {
        // assignment[depth] is set; fold in the vertices completed by it
        let mut product = partial;
        for &pi in &ready[depth + 1] {
            product = product.saturating_mul(eval_vertex(pi, assignment)?);
            if product == 0 {
                break;
            }
        }
        if depth + 1 == n_edges {
            return Ok((product, 1));
        }
        if product == 0 {
            return Ok((0, 0));
        }
        let mut value = 0u64;
        let mut leaves = 0u64;
        for l in 0..rank {
            assignment[depth + 1] = Label(l);
            let (v, n) = self.descend_rec(
                ready,
                eval_vertex,
                rank,
                assignment,
                depth + 1,
                product,
                n_edges,
            )?;
            value += v;
            leaves += n;
        }
        Ok((value, leaves))
    }
}

/// Pairs a dimension query accepts: everything except the sphere with
/// fewer than two points. `(1, 0)` is admitted (loop graph), even though it
/// is not a stable pair in the moduli sense.
fn evaluable_pair(genus: u32, n_legs: usize) -> bool {
    genus > 0 || n_legs >= 2
}

/// Integer complex power without branch cuts.
fn cpowi(z: Complex64, e: i32) -> Complex64 {
    if e < 0 {
        return Complex64::new(1.0, 0.0) / cpowi(z, -e);
    }
    let mut acc = Complex64::new(1.0, 0.0);
    for _ in 0..e {
        acc *= z;
    }
    acc
}

/// The canonical trivalent genus-0 decomposition graph for a stable pair:
/// a caterpillar chain carrying the `n` legs, with `g` loops appended at the
/// tail (each on its own trivalent vertex). Legs are named `p0..p{n-1}` in
/// order.
pub fn canonical_pants_graph(genus: u32, n_legs: usize) -> GenusGraph {
    assert!(evaluable_pair(genus, n_legs), "unstable pair");
    let g = genus as usize;
    let m = n_legs + g;
    let mut b = GraphBuilder::new();
    match (genus, n_legs) {
        (0, 2) => {
            // no trivalent decomposition exists; a single two-leg vertex
            let v = b.add_vertex();
            b.add_leg(v, "p0");
            b.add_leg(v, "p1");
            return GenusGraph::new(b.build(), vec![0]).unwrap();
        }
        (1, 0) => {
            // closed torus: the loop graph on a two-slot vertex
            let v = b.add_vertex();
            b.add_edge(v, v);
            return GenusGraph::new(b.build(), vec![0]).unwrap();
        }
        (1, 1) => {
            let v = b.add_vertex();
            b.add_leg(v, "p0");
            b.add_edge(v, v);
            return GenusGraph::new(b.build(), vec![0]).unwrap();
        }
        (2, 0) => {
            let v = b.add_vertex();
            let w = b.add_vertex();
            b.add_edge(v, v);
            b.add_edge(v, w);
            b.add_edge(w, w);
            return GenusGraph::new(b.build(), vec![0, 0]).unwrap();
        }
        _ => {}
    }
    debug_assert!(m >= 3);
    let chain_len = m - 2;
    let chain: Vec<usize> = b.add_vertices(chain_len).collect();
    // ports in caterpillar order: 2 at the head, 1 per middle vertex, 2 at
    // the tail; the first n are legs, the rest carry loops
    let mut port = 0usize;
    let place = |b: &mut GraphBuilder, v: usize, port: usize| {
        if port < n_legs {
            b.add_leg(v, format!("p{}", port));
        } else {
            let w = b.add_vertex();
            b.add_edge(v, w);
            b.add_edge(w, w);
        }
    };
    for (i, &v) in chain.iter().enumerate() {
        let ports_here = if chain_len == 1 {
            3
        } else if i == 0 || i + 1 == chain_len {
            2
        } else {
            1
        };
        for _ in 0..ports_here {
            place(&mut b, v, port);
            port += 1;
        }
        if i + 1 < chain_len {
            b.add_edge(v, chain[i + 1]);
        }
    }
    debug_assert_eq!(port, m);
    let graph = b.build();
    let genus_labels = vec![0; graph.n_vertices()];
    GenusGraph::new(graph, genus_labels).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::stable_pair;
    use crate::modular::parse_modular_datum;

    fn fixture(name: &str) -> ModularDatum {
        let path = format!("{}/../../fixtures/{}.md", env!("CARGO_MANIFEST_DIR"), name);
        let text = std::fs::read_to_string(path).unwrap();
        parse_modular_datum(&text, &Tolerances::default()).unwrap()
    }

    #[test]
    fn pants_graphs_are_trivalent_and_stable() {
        for g in 0..=4u32 {
            for n in 0..=5usize {
                if !stable_pair(g, n) || (g, n) == (0, 2) {
                    continue;
                }
                let pg = canonical_pants_graph(g, n);
                assert_eq!(pg.total_genus(), g, "genus ({}, {})", g, n);
                assert_eq!(pg.graph.legs().len(), n);
                for v in 0..pg.graph.n_vertices() {
                    assert_eq!(pg.graph.valence(v), 3, "({}, {}) vertex {}", g, n, v);
                    assert_eq!(pg.genus[v], 0);
                }
            }
        }
    }

    #[test]
    fn unstable_pairs_rejected() {
        let d = fixture("fibonacci");
        let ev = BlockEvaluator::new(&d, Tolerances::default());
        for (g, n) in [(0u32, 0usize), (0, 1)] {
            let labels = vec![Label(0); n];
            assert!(matches!(
                ev.dim_smooth(g, &labels),
                Err(Error::UnstablePair { .. })
            ));
            assert!(matches!(
                ev.dim_closed_form(g, &labels),
                Err(Error::UnstablePair { .. })
            ));
        }
        // the closed torus evaluates through its loop graph
        assert_eq!(ev.dim_smooth(1, &[]).unwrap(), 2);
    }

    #[test]
    fn trivial_datum_dimensions_are_one() {
        let d = fixture("trivial");
        let ev = BlockEvaluator::new(&d, Tolerances::default());
        for g in 0..=7u32 {
            for n in 0..=4usize {
                if !stable_pair(g, n) {
                    continue;
                }
                let labels = vec![Label(0); n];
                assert_eq!(ev.dim_smooth(g, &labels).unwrap(), 1);
                assert_eq!(ev.dim_closed_form(g, &labels).unwrap(), 1);
            }
        }
    }

    #[test]
    fn fibonacci_spot_dimensions() {
        let d = fixture("fibonacci");
        let ev = BlockEvaluator::new(&d, Tolerances::default());
        assert_eq!(ev.dim_smooth(1, &[]).unwrap(), 2);
        assert_eq!(ev.dim_smooth(2, &[]).unwrap(), 5);
        assert_eq!(ev.dim_smooth(3, &[]).unwrap(), 15);
        // genus-1 one tau point
        assert_eq!(ev.dim_smooth(1, &[Label(1)]).unwrap(), 1);
    }

    #[test]
    fn ising_spot_dimensions() {
        let d = fixture("ising");
        let ev = BlockEvaluator::new(&d, Tolerances::default());
        assert_eq!(ev.dim_smooth(1, &[]).unwrap(), 3);
        assert_eq!(ev.dim_smooth(2, &[]).unwrap(), 10);
        // four sigmas on a sphere
        let sigma = Label(2);
        assert_eq!(ev.dim_smooth(0, &[sigma; 4]).unwrap(), 2);
    }

    #[test]
    fn loop_graph_matches_hand_count() {
        // loop on a genus-0 vertex with one tau leg: two labelings, one
        // admissible
        let d = fixture("fibonacci");
        let ev = BlockEvaluator::new(&d, Tolerances::default());
        let mut b = GraphBuilder::new();
        let v = b.add_vertex();
        b.add_leg(v, "tau");
        b.add_edge(v, v);
        let shape = GenusGraph::new(b.build(), vec![0]).unwrap();
        let r = ev
            .dim_graph(&BlockQuery {
                shape,
                leg_labels: vec![Label(1)],
            })
            .unwrap();
        assert_eq!(r.value, 1);
        assert_eq!(r.labelings_enumerated, 2);
    }

    #[test]
    fn ising_two_vertex_graph() {
        // two trivalent genus-0 vertices joined by one edge, legs
        // (sigma, sigma | sigma, sigma): 1*1 + 1*1 + 0 = 2
        let d = fixture("ising");
        let ev = BlockEvaluator::new(&d, Tolerances::default());
        let mut b = GraphBuilder::new();
        let v = b.add_vertex();
        let w = b.add_vertex();
        b.add_leg(v, "s1");
        b.add_leg(v, "s2");
        b.add_leg(w, "s3");
        b.add_leg(w, "s4");
        b.add_edge(v, w);
        let shape = GenusGraph::new(b.build(), vec![0, 0]).unwrap();
        let sigma = Label(2);
        let r = ev
            .dim_graph(&BlockQuery {
                shape,
                leg_labels: vec![sigma; 4],
            })
            .unwrap();
        assert_eq!(r.value, 2);
        assert_eq!(r.labelings_enumerated, 3);
    }

    #[test]
    fn disconnected_graph_multiplies() {
        let d = fixture("ising");
        let ev = BlockEvaluator::new(&d, Tolerances::default());
        let mut b = GraphBuilder::new();
        let v = b.add_vertex();
        let w = b.add_vertex();
        b.add_leg(v, "e1");
        b.add_leg(w, "e2");
        let shape = GenusGraph::new(b.build(), vec![2, 1]).unwrap();
        let eps = Label(1);
        let r = ev
            .dim_graph(&BlockQuery {
                shape,
                leg_labels: vec![eps, eps],
            })
            .unwrap();
        // dim(g=2; eps) * dim(g=1; eps) = 6 * 1
        assert_eq!(ev.dim_smooth(2, &[eps]).unwrap(), 6);
        assert_eq!(ev.dim_smooth(1, &[eps]).unwrap(), 1);
        assert_eq!(r.value, 6);
    }

    #[test]
    fn vacuum_propagation_spots() {
        let tol = Tolerances::default();
        for name in ["trivial", "fibonacci", "ising"] {
            let d = fixture(name);
            let ev = BlockEvaluator::new(&d, tol);
            assert!(ev.check_vacuum_propagation(1, &[]).unwrap().pass);
        }
        let d = fixture("ising");
        let ev = BlockEvaluator::new(&d, tol);
        let (sigma, eps) = (Label(2), Label(1));
        let e = ev
            .check_vacuum_propagation(0, &[sigma, sigma, eps])
            .unwrap();
        assert!(e.pass, "{}", e.detail);
    }

    #[test]
    fn factorization_of_genus2_vertex() {
        let d = fixture("fibonacci");
        let ev = BlockEvaluator::new(&d, Tolerances::default());
        let shape = GenusGraph::single_vertex(2, 0).unwrap();
        let entry = ev.check_factorization(&shape, &[]).unwrap();
        assert!(entry.pass, "{}", entry.detail);
        assert!(entry.detail.contains("2 degenerations"));
        assert!(entry.detail.contains("5"));
    }

    #[test]
    fn factorization_of_genus1_eps_vertex() {
        let d = fixture("ising");
        let ev = BlockEvaluator::new(&d, Tolerances::default());
        let shape = GenusGraph::single_vertex(1, 1).unwrap();
        let entry = ev.check_factorization(&shape, &[Label(1)]).unwrap();
        assert!(entry.pass, "{}", entry.detail);
    }

    /// Naive reference enumeration: all label tuples, no pruning, no cache,
    /// vertex factors through the closed form. A third route for checking
    /// the pruned enumerator's bookkeeping.
    fn naive_graph_sum(d: &ModularDatum, shape: &GenusGraph, leg_labels: &[Label]) -> u64 {
        let ev = BlockEvaluator::new(d, Tolerances::default());
        let graph = &shape.graph;
        let edges = graph.internal_edges();
        let legs = graph.legs();
        let mut total = 0u64;
        let mut tuple = vec![0usize; edges.len()];
        loop {
            let mut product = 1u64;
            for v in 0..graph.n_vertices() {
                let mut labels = Vec::new();
                for h in graph.half_edges_at(v) {
                    if graph.is_leg(h) {
                        let pos = legs.iter().position(|&l| l == h).unwrap();
                        labels.push(leg_labels[pos]);
                    } else {
                        let (e, second) = edges
                            .iter()
                            .enumerate()
                            .find_map(|(e, &(h1, h2))| {
                                if h == h1 {
                                    Some((e, false))
                                } else if h == h2 {
                                    Some((e, true))
                                } else {
                                    None
                                }
                            })
                            .unwrap();
                        let l = Label(tuple[e]);
                        labels.push(if second { d.dual(l) } else { l });
                    }
                }
                product *= ev.dim_closed_form(shape.genus[v], &labels).unwrap();
            }
            total += product;
            let mut pos = 0;
            loop {
                if pos == edges.len() {
                    return total;
                }
                tuple[pos] += 1;
                if tuple[pos] < d.rank() {
                    break;
                }
                tuple[pos] = 0;
                pos += 1;
            }
        }
    }

    #[test]
    fn pruned_enumeration_matches_naive_reference() {
        let mut rng = crate::rng::Rng::new(4242);
        for name in ["fibonacci", "ising", "su3_1"] {
            let d = fixture(name);
            let ev = BlockEvaluator::new(&d, Tolerances::default());
            for _ in 0..15 {
                let g = rng.below(3) as u32;
                let n = rng.below(4);
                if !stable_pair(g, n) {
                    continue;
                }
                let shape = crate::graph::random_stable_graph(&mut rng, g, n);
                let labels: Vec<Label> = (0..n).map(|_| Label(rng.below(d.rank()))).collect();
                let fast = ev
                    .dim_graph(&BlockQuery {
                        shape: shape.clone(),
                        leg_labels: labels.clone(),
                    })
                    .unwrap()
                    .value;
                assert_eq!(
                    fast,
                    naive_graph_sum(&d, &shape, &labels),
                    "{} g={} n={}",
                    name,
                    g,
                    n
                );
            }
        }
    }

    #[test]
    fn graph_sum_matches_closed_form_on_random_labels() {
        let tol = Tolerances::default();
        let mut rng = crate::rng::Rng::new(1234);
        for name in ["fibonacci", "ising", "su3_1"] {
            let d = fixture(name);
            let ev = BlockEvaluator::new(&d, tol);
            for _ in 0..30 {
                let g = rng.below(3) as u32;
                let n = rng.below(4);
                if !stable_pair(g, n) {
                    continue;
                }
                let labels: Vec<Label> = (0..n).map(|_| Label(rng.below(d.rank()))).collect();
                assert_eq!(
                    ev.dim_smooth(g, &labels).unwrap(),
                    ev.dim_closed_form(g, &labels).unwrap(),
                    "{} g={} labels={:?}",
                    name,
                    g,
                    labels
                );
            }
        }
    }

    #[test]
    fn dualizing_all_labels_preserves_dimension() {
        let d = fixture("su3_1");
        let ev = BlockEvaluator::new(&d, Tolerances::default());
        let mut rng = crate::rng::Rng::new(77);
        for _ in 0..40 {
            let g = rng.below(3) as u32;
            let n = rng.below(4);
            if !stable_pair(g, n) {
                continue;
            }
            let labels: Vec<Label> = (0..n).map(|_| Label(rng.below(3))).collect();
            let dualized: Vec<Label> = labels.iter().map(|&l| d.dual(l)).collect();
            assert_eq!(
                ev.dim_smooth(g, &labels).unwrap(),
                ev.dim_smooth(g, &dualized).unwrap()
            );
        }
    }

    #[test]
    fn dim_graph_requires_every_leg_labeled() {
        let d = fixture("ising");
        let ev = BlockEvaluator::new(&d, Tolerances::default());
        let shape = GenusGraph::single_vertex(0, 3).unwrap();
        let err = ev
            .dim_graph(&BlockQuery {
                shape,
                leg_labels: vec![Label(0)],
            })
            .unwrap_err();
        assert!(matches!(
            err,
            Error::LengthMismatch {
                expected: 3,
                got: 1
            }
        ));
    }

    #[test]
    fn parallel_jobs_agree_with_serial() {
        let d = fixture("su2_4");
        let serial = BlockEvaluator::new(&d, Tolerances::default());
        let parallel = BlockEvaluator::with_jobs(&d, Tolerances::default(), 4);
        let labels = [Label(1), Label(2), Label(3)];
        assert_eq!(
            serial.dim_smooth(2, &labels).unwrap(),
            parallel.dim_smooth(2, &labels).unwrap()
        );
    }
}
