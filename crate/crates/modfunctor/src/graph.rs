//! The combinatorial category of graphs and genus-labeled stable graphs.
//!
//! A graph is a tuple `(V, H, i, s)`: finite sets of vertices and half-edges,
//! an involution `i` on half-edges and a source map `s: H -> V`. Fixed points
//! of `i` are legs, 2-cycles are internal edges. Objects of the category are
//! disjoint unions of corollas (one-vertex graphs with legs only); a morphism
//! is a graph together with identifications of its cut form `nu` with the
//! source object and of its contraction `pi0` with the target object.
//!
//! Genus-labeled graphs ([`GenusGraph`]) are the dual graphs of nodal curves:
//! every vertex carries a genus and must satisfy the stability constraint
//! that `(genus, valence)` avoids `(0,0)`, `(0,1)` and `(1,0)`.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::rng::Rng;

/// Immutable graph `(V, H, i, s)`. Half-edge identifiers are internal;
/// externally, legs are addressed by their position in declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n_vertices: usize,
    source: Vec<usize>,
    pairing: Vec<usize>,
    leg_names: Vec<Option<String>>,
}

pub struct GraphBuilder {
    n_vertices: usize,
    source: Vec<usize>,
    pairing: Vec<usize>,
    leg_names: Vec<Option<String>>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        GraphBuilder {
            n_vertices: 0,
            source: Vec::new(),
            pairing: Vec::new(),
            leg_names: Vec::new(),
        }
    }

    pub fn add_vertex(&mut self) -> usize {
        self.n_vertices += 1;
        self.n_vertices - 1
    }

    pub fn add_vertices(&mut self, k: usize) -> std::ops::Range<usize> {
        let start = self.n_vertices;
        self.n_vertices += k;
        start..self.n_vertices
    }

    pub fn add_leg(&mut self, v: usize, name: impl Into<String>) -> usize {
        assert!(v < self.n_vertices);
        let h = self.source.len();
        self.source.push(v);
        self.pairing.push(h);
        self.leg_names.push(Some(name.into()));
        h
    }

    /// Internal edge between `v` and `w`; `v == w` yields a self-loop.
    pub fn add_edge(&mut self, v: usize, w: usize) -> (usize, usize) {
        assert!(v < self.n_vertices && w < self.n_vertices);
        let h1 = self.source.len();
        let h2 = h1 + 1;
        self.source.push(v);
        self.source.push(w);
        self.pairing.push(h2);
        self.pairing.push(h1);
        self.leg_names.push(None);
        self.leg_names.push(None);
        (h1, h2)
    }

    pub fn build(self) -> Graph {
        Graph {
            n_vertices: self.n_vertices,
            source: self.source,
            pairing: self.pairing,
            leg_names: self.leg_names,
        }
    }
}

impl Default for GraphBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl Graph {
    /// A single corolla with the given leg names.
    pub fn corolla(leg_names: &[&str]) -> Graph {
        let mut b = GraphBuilder::new();
        let v = b.add_vertex();
        for name in leg_names {
            b.add_leg(v, *name);
        }
        b.build()
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_half_edges(&self) -> usize {
        self.source.len()
    }

    pub fn source_of(&self, h: usize) -> usize {
        self.source[h]
    }

    pub fn paired(&self, h: usize) -> usize {
        self.pairing[h]
    }

    pub fn is_leg(&self, h: usize) -> bool {
        self.pairing[h] == h
    }

    /// Leg half-edges in declaration order.
    pub fn legs(&self) -> Vec<usize> {
        (0..self.source.len()).filter(|&h| self.is_leg(h)).collect()
    }

    pub fn leg_name(&self, h: usize) -> Option<&str> {
        self.leg_names[h].as_deref()
    }

    /// Internal edges as half-edge pairs `(h, i(h))` with `h < i(h)`, in
    /// declaration order.
    pub fn internal_edges(&self) -> Vec<(usize, usize)> {
        (0..self.source.len())
            .filter(|&h| self.pairing[h] > h)
            .map(|h| (h, self.pairing[h]))
            .collect()
    }

    pub fn half_edges_at(&self, v: usize) -> Vec<usize> {
        (0..self.source.len())
            .filter(|&h| self.source[h] == v)
            .collect()
    }

    pub fn valence(&self, v: usize) -> usize {
        self.source.iter().filter(|&&s| s == v).count()
    }

    /// Connected components as sorted vertex lists, ordered by smallest
    /// vertex. Isolated vertices form their own components.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut comp = vec![usize::MAX; self.n_vertices];
        let mut next = 0;
        for start in 0..self.n_vertices {
            if comp[start] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            comp[start] = next;
            while let Some(v) = stack.pop() {
                for h in self.half_edges_at(v) {
                    let u = self.source[self.pairing[h]];
                    if comp[u] == usize::MAX {
                        comp[u] = next;
                        stack.push(u);
                    }
                }
            }
            next += 1;
        }
        let mut out = vec![Vec::new(); next];
        for v in 0..self.n_vertices {
            out[comp[v]].push(v);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// First Betti number: `E - V + #components`.
    pub fn betti(&self) -> usize {
        let e = self.internal_edges().len();
        e + self.components().len() - self.n_vertices
    }

    /// Cut all edges: same vertices and half-edges, identity involution.
    pub fn nu(&self) -> Graph {
        Graph {
            n_vertices: self.n_vertices,
            source: self.source.clone(),
            pairing: (0..self.source.len()).collect(),
            leg_names: self.leg_names.clone(),
        }
    }

    /// Contract all internal edges: one vertex per connected component,
    /// legs preserved with their incidence.
    pub fn pi0(&self) -> Graph {
        let comps = self.components();
        let mut comp_of = vec![0usize; self.n_vertices];
        for (c, vs) in comps.iter().enumerate() {
            for &v in vs {
                comp_of[v] = c;
            }
        }
        let mut b = GraphBuilder::new();
        b.add_vertices(comps.len());
        for h in self.legs() {
            let name = self.leg_names[h].clone().unwrap_or_default();
            b.add_leg(comp_of[self.source[h]], name);
        }
        b.build()
    }

    /// True when this graph is a disjoint union of corollas.
    pub fn is_union_of_corollas(&self) -> bool {
        self.internal_edges().is_empty()
    }

    /// New graph in which the given leg pairs become internal edges.
    /// Half-edge identifiers are preserved; the glued legs lose their names.
    pub fn glue_legs(&self, pairs: &[(usize, usize)]) -> Result<Graph> {
        let mut g = self.clone();
        for &(a, b) in pairs {
            if a == b || !g.is_leg(a) || !g.is_leg(b) {
                return Err(Error::InvalidGraph(format!(
                    "cannot glue half-edges {} and {}: need two distinct legs",
                    a, b
                )));
            }
            g.pairing[a] = b;
            g.pairing[b] = a;
            g.leg_names[a] = None;
            g.leg_names[b] = None;
        }
        Ok(g)
    }
}

/// One-vertex graph with an ordered, named set of legs: the building block
/// of objects in the category.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corolla {
    pub legs: Vec<String>,
}

impl Corolla {
    pub fn new(legs: &[&str]) -> Self {
        Corolla {
            legs: legs.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn arity(&self) -> usize {
        self.legs.len()
    }
}

/// An object: a finite disjoint union of corollas.
pub type GraphObject = Vec<Corolla>;

/// Morphism between objects: a graph with identifications of `nu(graph)`
/// with the source and of `pi0(graph)` with the target.
///
/// `phi0[c][p]` is the half-edge of `graph` assigned to leg `p` of source
/// corolla `c`; since every half-edge of the graph is a leg of `nu(graph)`,
/// `phi0` is a bijection onto all half-edges sending corollas to vertices.
/// `phi1[c][p]` is the leg of `graph` assigned to leg `p` of target corolla
/// `c`, a bijection onto the legs sending corollas to connected components.
///
/// Two triples are equal when the unique half-edge bijection forced by the
/// `phi0`s is a graph isomorphism commuting with the `phi1`s.
#[derive(Debug, Clone)]
pub struct GraphMorphism {
    pub graph: Graph,
    pub source: GraphObject,
    pub target: GraphObject,
    pub phi0: Vec<Vec<usize>>,
    pub phi1: Vec<Vec<usize>>,
}

impl GraphMorphism {
    pub fn new(
        graph: Graph,
        source: GraphObject,
        target: GraphObject,
        phi0: Vec<Vec<usize>>,
        phi1: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let m = GraphMorphism {
            graph,
            source,
            target,
            phi0,
            phi1,
        };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        let g = &self.graph;
        let mismatch = |msg: String| Error::BoundaryMismatch(msg);

        // phi0: bijection source legs -> all half-edges, corolla-to-vertex
        if self.phi0.len() != self.source.len() {
            return Err(mismatch("phi0 corolla count".into()));
        }
        let mut seen = vec![false; g.n_half_edges()];
        let mut vertex_of_corolla = Vec::new();
        for (c, corolla) in self.source.iter().enumerate() {
            if self.phi0[c].len() != corolla.arity() {
                return Err(mismatch(format!("phi0 arity at corolla {}", c)));
            }
            let mut vertices: BTreeSet<usize> = BTreeSet::new();
            for &h in &self.phi0[c] {
                if h >= g.n_half_edges() || seen[h] {
                    return Err(mismatch("phi0 not injective into half-edges".into()));
                }
                seen[h] = true;
                vertices.insert(g.source_of(h));
            }
            // an empty corolla would be a (0,0) vertex; disallow
            if vertices.len() != 1 {
                return Err(mismatch(format!(
                    "source corolla {} does not map onto a single vertex",
                    c
                )));
            }
            let v = *vertices.iter().next().unwrap();
            if self.phi0[c].len() != g.valence(v) {
                return Err(mismatch(format!(
                    "corolla {} misses half-edges of its vertex",
                    c
                )));
            }
            vertex_of_corolla.push(v);
        }
        if !seen.iter().all(|&x| x) {
            return Err(mismatch("phi0 not surjective onto half-edges".into()));
        }
        let distinct: BTreeSet<usize> = vertex_of_corolla.iter().copied().collect();
        if distinct.len() != g.n_vertices() {
            return Err(mismatch("phi0 vertex assignment not bijective".into()));
        }

        // phi1: bijection target legs -> legs, corolla-to-component
        let comps = g.components();
        let mut comp_of = vec![0usize; g.n_vertices()];
        for (ci, vs) in comps.iter().enumerate() {
            for &v in vs {
                comp_of[v] = ci;
            }
        }
        if self.phi1.len() != self.target.len() {
            return Err(mismatch("phi1 corolla count".into()));
        }
        let legs = g.legs();
        let mut seen_leg: BTreeSet<usize> = BTreeSet::new();
        let mut comp_of_corolla = Vec::new();
        for (c, corolla) in self.target.iter().enumerate() {
            if self.phi1[c].len() != corolla.arity() {
                return Err(mismatch(format!("phi1 arity at corolla {}", c)));
            }
            let mut cs: BTreeSet<usize> = BTreeSet::new();
            for &h in &self.phi1[c] {
                if !g.is_leg(h) || !seen_leg.insert(h) {
                    return Err(mismatch("phi1 not injective into legs".into()));
                }
                cs.insert(comp_of[g.source_of(h)]);
            }
            // a legless target corolla corresponds to a closed component;
            // record it only when the graph has such a component available
            if cs.len() > 1 {
                return Err(mismatch(format!(
                    "target corolla {} spans several components",
                    c
                )));
            }
            comp_of_corolla.push(cs.into_iter().next());
        }
        if seen_leg.len() != legs.len() {
            return Err(mismatch("phi1 not surjective onto legs".into()));
        }
        // components with legs must be hit exactly once; legless corollas
        // must match legless components bijectively
        let mut hit = vec![0usize; comps.len()];
        let mut legless_corollas = 0;
        for c in &comp_of_corolla {
            match c {
                Some(ci) => hit[*ci] += 1,
                None => legless_corollas += 1,
            }
        }
        let mut legless_components = 0;
        for (ci, hits) in hit.iter().enumerate() {
            let has_legs = legs.iter().any(|&h| comp_of[g.source_of(h)] == ci);
            match (has_legs, hits) {
                (true, 1) => {}
                (false, 0) => legless_components += 1,
                _ => return Err(mismatch("phi1 component assignment not bijective".into())),
            }
        }
        if legless_corollas != legless_components {
            return Err(mismatch(
                "legless corollas do not match closed components".into(),
            ));
        }
        Ok(())
    }

    /// Identity morphism of an object: the object itself as a graph.
    pub fn identity(object: &GraphObject) -> GraphMorphism {
        let mut b = GraphBuilder::new();
        let mut phi0 = Vec::new();
        for corolla in object {
            let v = b.add_vertex();
            let mut hs = Vec::new();
            for name in &corolla.legs {
                hs.push(b.add_leg(v, name.clone()));
            }
            phi0.push(hs);
        }
        let phi1 = phi0.clone();
        GraphMorphism {
            graph: b.build(),
            source: object.clone(),
            target: object.clone(),
            phi0,
            phi1,
        }
    }

    /// Relabeling morphism on one corolla: leg `p` of the target is
    /// identified with leg `perm[p]` of the source.
    pub fn permutation(corolla: &Corolla, perm: &[usize]) -> Result<GraphMorphism> {
        let n = corolla.arity();
        if perm.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: perm.len(),
            });
        }
        let id = GraphMorphism::identity(&vec![corolla.clone()]);
        let phi1 = vec![perm.iter().map(|&p| id.phi0[0][p]).collect()];
        GraphMorphism::new(id.graph, id.source, vec![corolla.clone()], id.phi0, phi1)
    }

    /// Extract the permutation realized by a corolla-to-corolla relabeling.
    pub fn as_permutation(&self) -> Option<Vec<usize>> {
        if self.source.len() != 1 || self.target.len() != 1 || !self.graph.is_union_of_corollas() {
            return None;
        }
        let inverse0: std::collections::HashMap<usize, usize> = self.phi0[0]
            .iter()
            .enumerate()
            .map(|(p, &h)| (h, p))
            .collect();
        Some(self.phi1[0].iter().map(|h| inverse0[h]).collect())
    }

    /// Composition `self` followed by `next`: the graph of `self` with the
    /// internal edges of `next` pulled back along the boundary
    /// identifications.
    pub fn compose(&self, next: &GraphMorphism) -> Result<GraphMorphism> {
        if self.target != next.source {
            return Err(Error::BoundaryMismatch(
                "target of first morphism differs from source of second".into(),
            ));
        }
        // position of each half-edge of next.graph inside its source object
        let mut slot_of = vec![(0usize, 0usize); next.graph.n_half_edges()];
        for (c, hs) in next.phi0.iter().enumerate() {
            for (p, &h) in hs.iter().enumerate() {
                slot_of[h] = (c, p);
            }
        }
        let mut graph = self.graph.clone();
        for (h1, h2) in next.graph.internal_edges() {
            let (c1, p1) = slot_of[h1];
            let (c2, p2) = slot_of[h2];
            let l1 = self.phi1[c1][p1];
            let l2 = self.phi1[c2][p2];
            if !graph.is_leg(l1) || !graph.is_leg(l2) || l1 == l2 {
                return Err(Error::BoundaryMismatch(
                    "gluing instructions collide on a leg".into(),
                ));
            }
            graph.pairing[l1] = l2;
            graph.pairing[l2] = l1;
            graph.leg_names[l1] = None;
            graph.leg_names[l2] = None;
        }
        let phi1 = next
            .phi1
            .iter()
            .map(|hs| {
                hs.iter()
                    .map(|&h| {
                        let (c, p) = slot_of[h];
                        self.phi1[c][p]
                    })
                    .collect()
            })
            .collect();
        GraphMorphism::new(
            graph,
            self.source.clone(),
            next.target.clone(),
            self.phi0.clone(),
            phi1,
        )
    }

    /// Equality of morphism triples: the bijection forced by the `phi0`s
    /// must be a graph isomorphism commuting with the `phi1`s.
    pub fn equivalent(&self, other: &GraphMorphism) -> bool {
        if self.source != other.source || self.target != other.target {
            return false;
        }
        let (g1, g2) = (&self.graph, &other.graph);
        if g1.n_half_edges() != g2.n_half_edges() || g1.n_vertices() != g2.n_vertices() {
            return false;
        }
        // psi: half-edges of g1 -> half-edges of g2
        let mut psi = vec![usize::MAX; g1.n_half_edges()];
        for (c, hs) in self.phi0.iter().enumerate() {
            for (p, &h) in hs.iter().enumerate() {
                psi[h] = other.phi0[c][p];
            }
        }
        // psi must intertwine the involutions (sources match automatically
        // because corollas map onto single vertices)
        for h in 0..g1.n_half_edges() {
            if psi[g1.paired(h)] != g2.paired(psi[h]) {
                return false;
            }
        }
        for (c, hs) in self.phi1.iter().enumerate() {
            for (p, &h) in hs.iter().enumerate() {
                if psi[h] != other.phi1[c][p] {
                    return false;
                }
            }
        }
        true
    }
}

/// Genus-labeled graph: the dual graph of a nodal curve. Every vertex must
/// be a stable pair, i.e. `(genus, valence)` avoids `(0,0)`, `(0,1)`,
/// `(1,0)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenusGraph {
    pub graph: Graph,
    pub genus: Vec<u32>,
}

/// Stability of a `(genus, valence)` pair for graph vertices and moduli
/// pairs alike.
pub fn stable_pair(genus: u32, valence: usize) -> bool {
    !matches!((genus, valence), (0, 0) | (0, 1) | (1, 0))
}

/// Strict vertex stability used when enumerating curve degenerations:
/// `2g - 2 + valence > 0`, which additionally rules out `(0, 2)`.
fn stable_curve_vertex(genus: u32, valence: usize) -> bool {
    2 * genus as i64 - 2 + valence as i64 > 0
}

impl GenusGraph {
    pub fn new(graph: Graph, genus: Vec<u32>) -> Result<Self> {
        if genus.len() != graph.n_vertices() {
            return Err(Error::InvalidGraph(format!(
                "{} genus labels for {} vertices",
                genus.len(),
                graph.n_vertices()
            )));
        }
        for v in 0..graph.n_vertices() {
            if !stable_pair(genus[v], graph.valence(v)) {
                return Err(Error::InvalidGraph(format!(
                    "unstable vertex {}: genus {}, valence {}",
                    v,
                    genus[v],
                    graph.valence(v)
                )));
            }
        }
        Ok(GenusGraph { graph, genus })
    }

    /// Single stable vertex with `n` legs named `p0..`.
    pub fn single_vertex(genus: u32, n_legs: usize) -> Result<Self> {
        let mut b = GraphBuilder::new();
        let v = b.add_vertex();
        for p in 0..n_legs {
            b.add_leg(v, format!("p{}", p));
        }
        GenusGraph::new(b.build(), vec![genus])
    }

    /// Sum of vertex genera plus the first Betti number.
    pub fn total_genus(&self) -> u32 {
        self.genus.iter().sum::<u32>() + self.graph.betti() as u32
    }

    /// Contract one internal edge (by index into `internal_edges`).
    /// A loop adds 1 to its vertex genus; a non-loop edge merges the two
    /// endpoint vertices and sums their genera.
    pub fn contract_edge(&self, edge_index: usize) -> GenusGraph {
        let edges = self.graph.internal_edges();
        let (h1, h2) = edges[edge_index];
        let (v, w) = (self.graph.source_of(h1), self.graph.source_of(h2));
        if v == w {
            // loop
            let mut b = GraphBuilder::new();
            b.add_vertices(self.graph.n_vertices());
            let mut genus = self.genus.clone();
            genus[v] += 1;
            self.copy_half_edges(&mut b, |h| h != h1 && h != h2, |u| u);
            GenusGraph {
                graph: b.build(),
                genus,
            }
        } else {
            let (keep, drop) = (v.min(w), v.max(w));
            let mut b = GraphBuilder::new();
            b.add_vertices(self.graph.n_vertices() - 1);
            let remap = |u: usize| {
                if u == drop {
                    keep
                } else if u > drop {
                    u - 1
                } else {
                    u
                }
            };
            let mut genus = Vec::with_capacity(self.genus.len() - 1);
            for (u, &g) in self.genus.iter().enumerate() {
                if u == drop {
                    continue;
                }
                genus.push(if u == keep { g + self.genus[drop] } else { g });
            }
            self.copy_half_edges(&mut b, |h| h != h1 && h != h2, remap);
            GenusGraph {
                graph: b.build(),
                genus,
            }
        }
    }

    fn copy_half_edges(
        &self,
        b: &mut GraphBuilder,
        keep: impl Fn(usize) -> bool,
        remap: impl Fn(usize) -> usize,
    ) {
        let g = &self.graph;
        for h in 0..g.n_half_edges() {
            if !keep(h) {
                continue;
            }
            if g.is_leg(h) {
                b.add_leg(
                    remap(g.source_of(h)),
                    g.leg_name(h).unwrap_or("").to_string(),
                );
            } else if g.paired(h) > h {
                let h2 = g.paired(h);
                if keep(h2) {
                    b.add_edge(remap(g.source_of(h)), remap(g.source_of(h2)));
                }
            }
        }
    }

    /// All stable one-edge refinements of this graph, complete and
    /// duplicate-free up to isomorphism fixing the legs. Each result has one
    /// extra internal edge and contracts back to `self` along it.
    ///
    /// Per vertex there are two families: the non-separating refinement
    /// (genus drops by one, a self-loop appears) and the separating
    /// refinements (the vertex splits into `g1 + g2` with every distribution
    /// of its incident half-edge slots). A refinement counts only if both
    /// new vertices are stable components of a stable curve, i.e.
    /// `2g - 2 + valence > 0`; in particular genus-0 ends with fewer than
    /// three slots are discarded.
    pub fn one_edge_degenerations(&self) -> Vec<GenusGraph> {
        let mut out: Vec<GenusGraph> = Vec::new();
        let mut seen: BTreeSet<Vec<u64>> = BTreeSet::new();
        for v in 0..self.graph.n_vertices() {
            for cand in self.degenerations_at(v) {
                let key = cand.canonical_key();
                if seen.insert(key) {
                    out.push(cand);
                }
            }
        }
        out
    }

    fn degenerations_at(&self, v: usize) -> Vec<GenusGraph> {
        let g = &self.graph;
        let mut out = Vec::new();
        let slots = g.half_edges_at(v);

        // non-separating: genus g -> g-1 with a new loop
        if self.genus[v] >= 1 && stable_curve_vertex(self.genus[v] - 1, slots.len() + 2) {
            let mut b = GraphBuilder::new();
            b.add_vertices(g.n_vertices());
            self.copy_half_edges(&mut b, |_| true, |u| u);
            b.add_edge(v, v);
            let mut genus = self.genus.clone();
            genus[v] -= 1;
            out.push(GenusGraph {
                graph: b.build(),
                genus,
            });
        }

        // separating: split v into (g1 | g2) distributing incident slots
        for g1 in 0..=self.genus[v] {
            let g2 = self.genus[v] - g1;
            for mask in 0..(1u64 << slots.len()) {
                let side1 = mask.count_ones() as usize;
                let side2 = slots.len() - side1;
                if !stable_curve_vertex(g1, side1 + 1) || !stable_curve_vertex(g2, side2 + 1) {
                    continue;
                }
                let v2 = g.n_vertices();
                let mut assign = vec![v; g.n_half_edges()];
                for (bit, &h) in slots.iter().enumerate() {
                    if mask & (1 << bit) == 0 {
                        assign[h] = v2;
                    }
                }
                let mut b = GraphBuilder::new();
                b.add_vertices(g.n_vertices() + 1);
                let remap = |h_source: usize, h: usize| {
                    if h_source == v {
                        assign[h]
                    } else {
                        h_source
                    }
                };
                for h in 0..g.n_half_edges() {
                    if g.is_leg(h) {
                        b.add_leg(
                            remap(g.source_of(h), h),
                            g.leg_name(h).unwrap_or("").to_string(),
                        );
                    } else if g.paired(h) > h {
                        let h2 = g.paired(h);
                        b.add_edge(remap(g.source_of(h), h), remap(g.source_of(h2), h2));
                    }
                }
                b.add_edge(v, v2);
                let mut genus = self.genus.clone();
                genus[v] = g1;
                genus.push(g2);
                out.push(GenusGraph {
                    graph: b.build(),
                    genus,
                });
            }
        }
        out
    }

    /// Canonical invariant under vertex renumbering and half-edge
    /// relabeling, with legs pinned by their declaration order. Computed by
    /// iterative color refinement followed by exhaustive search over the
    /// remaining vertex orderings (graphs here are small).
    pub fn canonical_key(&self) -> Vec<u64> {
        let g = &self.graph;
        let n = g.n_vertices();
        let legs = g.legs();
        let leg_pos: std::collections::HashMap<usize, usize> =
            legs.iter().enumerate().map(|(p, &h)| (h, p)).collect();

        // adjacency with multiplicity; loops counted separately
        let mut adj = vec![vec![0u32; n]; n];
        let mut loops = vec![0u32; n];
        for (h1, h2) in g.internal_edges() {
            let (a, b) = (g.source_of(h1), g.source_of(h2));
            if a == b {
                loops[a] += 1;
            } else {
                adj[a][b] += 1;
                adj[b][a] += 1;
            }
        }
        let mut legs_at: Vec<Vec<u64>> = vec![Vec::new(); n];
        for &h in &legs {
            legs_at[g.source_of(h)].push(leg_pos[&h] as u64);
        }
        for l in legs_at.iter_mut() {
            l.sort_unstable();
        }

        // iterative refinement on vertex colors
        let mut color: Vec<u64> = (0..n)
            .map(|v| {
                let mut sig = vec![self.genus[v] as u64, g.valence(v) as u64, loops[v] as u64];
                sig.extend(&legs_at[v]);
                hash_tokens(&sig)
            })
            .collect();
        for _ in 0..n {
            let mut next = Vec::with_capacity(n);
            for v in 0..n {
                let mut sig = vec![color[v]];
                let mut ns: Vec<u64> = (0..n)
                    .filter(|&u| adj[v][u] > 0)
                    .map(|u| hash_tokens(&[color[u], adj[v][u] as u64]))
                    .collect();
                ns.sort_unstable();
                sig.extend(ns);
                next.push(hash_tokens(&sig));
            }
            if next == color {
                break;
            }
            color = next;
        }

        // group vertices by color, exhaust orderings within groups
        let mut groups: std::collections::BTreeMap<u64, Vec<usize>> = Default::default();
        for v in 0..n {
            groups.entry(color[v]).or_default().push(v);
        }
        let groups: Vec<Vec<usize>> = groups.into_values().collect();

        let mut best: Option<Vec<u64>> = None;
        let mut order: Vec<usize> = Vec::with_capacity(n);
        self.search_orderings(&groups, 0, &mut order, &mut best, &adj, &loops, &legs_at);
        best.expect("at least one ordering")
    }

    #[allow(clippy::too_many_arguments)]
    fn search_orderings(
        &self,
        groups: &[Vec<usize>],
        gi: usize,
        order: &mut Vec<usize>,
        best: &mut Option<Vec<u64>>,
        adj: &[Vec<u32>],
        loops: &[u32],
        legs_at: &[Vec<u64>],
    ) {
        if gi == groups.len() {
            let key = self.encode_ordering(order, adj, loops, legs_at);
            if best.is_none() || key < *best.as_ref().unwrap() {
                *best = Some(key);
            }
            return;
        }
        let mut perm = groups[gi].clone();
        permute_all(&mut perm, 0, &mut |p| {
            order.extend_from_slice(p);
            self.search_orderings(groups, gi + 1, order, best, adj, loops, legs_at);
            order.truncate(order.len() - p.len());
        });
    }

    fn encode_ordering(
        &self,
        order: &[usize],
        adj: &[Vec<u32>],
        loops: &[u32],
        legs_at: &[Vec<u64>],
    ) -> Vec<u64> {
        let n = order.len();
        let mut pos = vec![0usize; n];
        for (p, &v) in order.iter().enumerate() {
            pos[v] = p;
        }
        let mut key = vec![n as u64];
        for &v in order {
            key.push(self.genus[v] as u64);
            key.push(loops[v] as u64);
            key.push(legs_at[v].len() as u64);
            key.extend(&legs_at[v]);
        }
        let mut edges: Vec<u64> = Vec::new();
        for a in 0..n {
            for b in a..n {
                let m = if a == b { 0 } else { adj[a][b] };
                if m > 0 {
                    let (pa, pb) = (pos[a].min(pos[b]), pos[a].max(pos[b]));
                    edges.push(((pa * n + pb) as u64) << 8 | m as u64);
                }
            }
        }
        edges.sort_unstable();
        key.extend(edges);
        key
    }

    pub fn is_isomorphic(&self, other: &GenusGraph) -> bool {
        self.canonical_key() == other.canonical_key()
    }
}

fn hash_tokens(tokens: &[u64]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &t in tokens {
        for b in t.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
    }
    h
}

fn permute_all<T: Clone>(xs: &mut Vec<T>, k: usize, f: &mut impl FnMut(&[T])) {
    if k == xs.len() {
        f(xs);
        return;
    }
    for i in k..xs.len() {
        xs.swap(k, i);
        permute_all(xs, k + 1, f);
        xs.swap(k, i);
    }
}

/// Parse the stable-graph file format:
/// `vertex <id> genus <g>`, `leg <vertex_id> <label>`,
/// `edge <vertex_id> <vertex_id>` (self-edges allowed). Declaration order
/// defines the leg ordering.
pub fn parse_genus_graph(text: &str) -> Result<GenusGraph> {
    let syntax = |line: usize, msg: &str| Error::Syntax {
        line,
        msg: msg.to_string(),
    };
    let mut ids: Vec<u64> = Vec::new();
    let mut genus: Vec<u32> = Vec::new();
    #[allow(clippy::type_complexity)]
    let mut items: Vec<(usize, bool, usize, usize, String)> = Vec::new(); // (line, is_edge, v, w, name)

    let lookup = |ids: &[u64], raw: u64, line: usize| -> Result<usize> {
        ids.iter()
            .position(|&x| x == raw)
            .ok_or_else(|| syntax(line, "vertex used before declaration"))
    };

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        match parts[0] {
            "vertex" => {
                if parts.len() != 4 || parts[2] != "genus" {
                    return Err(syntax(lineno, "expected `vertex <id> genus <g>`"));
                }
                let id: u64 = parts[1]
                    .parse()
                    .map_err(|_| syntax(lineno, "bad vertex id"))?;
                if ids.contains(&id) {
                    return Err(syntax(lineno, "duplicate vertex id"));
                }
                let g: u32 = parts[3].parse().map_err(|_| syntax(lineno, "bad genus"))?;
                ids.push(id);
                genus.push(g);
            }
            "leg" => {
                if parts.len() != 3 {
                    return Err(syntax(lineno, "expected `leg <vertex_id> <label>`"));
                }
                let id: u64 = parts[1]
                    .parse()
                    .map_err(|_| syntax(lineno, "bad vertex id"))?;
                let v = lookup(&ids, id, lineno)?;
                items.push((lineno, false, v, 0, parts[2].to_string()));
            }
            "edge" => {
                if parts.len() != 3 {
                    return Err(syntax(lineno, "expected `edge <v> <w>`"));
                }
                let a: u64 = parts[1]
                    .parse()
                    .map_err(|_| syntax(lineno, "bad vertex id"))?;
                let b: u64 = parts[2]
                    .parse()
                    .map_err(|_| syntax(lineno, "bad vertex id"))?;
                let v = lookup(&ids, a, lineno)?;
                let w = lookup(&ids, b, lineno)?;
                items.push((lineno, true, v, w, String::new()));
            }
            other => return Err(syntax(lineno, &format!("unknown directive `{}`", other))),
        }
    }
    let mut b = GraphBuilder::new();
    b.add_vertices(ids.len());
    for (_, is_edge, v, w, name) in items {
        if is_edge {
            b.add_edge(v, w);
        } else {
            b.add_leg(v, name);
        }
    }
    GenusGraph::new(b.build(), genus)
}

/// Random maximal one-edge degeneration of the single stable vertex: a
/// uniform-ish walk down the degeneration poset until no refinement is left
/// (for pairs admitting one, the result is a trivalent genus-0
/// decomposition graph).
pub fn random_pants_graph(rng: &mut Rng, total_genus: u32, n_legs: usize) -> GenusGraph {
    let mut sg = GenusGraph::single_vertex(total_genus, n_legs).expect("stable pair");
    loop {
        let candidates = sg.one_edge_degenerations();
        if candidates.is_empty() {
            return sg;
        }
        sg = candidates[rng.below(candidates.len())].clone();
    }
}

/// Generate a random connected stable graph with the given total genus and
/// legs named `p0..p{n-1}`. Used by the factorization batteries; falls back
/// to a single vertex carrying the full genus when sampling fails.
pub fn random_stable_graph(rng: &mut Rng, total_genus: u32, n_legs: usize) -> GenusGraph {
    for _ in 0..300 {
        let max_v = 1 + rng.below(4);
        let n_v = rng.range(1, max_v);
        let betti = if total_genus == 0 {
            0
        } else {
            rng.range(0, total_genus as usize)
        } as u32;
        if (betti as usize) > 0 && n_v == 0 {
            continue;
        }
        let mut b = GraphBuilder::new();
        b.add_vertices(n_v);
        // random spanning tree
        for v in 1..n_v {
            let parent = rng.below(v);
            b.add_edge(parent, v);
        }
        // extra edges realize the Betti number; endpoints may coincide
        for _ in 0..betti {
            let v = rng.below(n_v);
            let w = rng.below(n_v);
            b.add_edge(v, w);
        }
        for p in 0..n_legs {
            b.add_leg(rng.below(n_v), format!("p{}", p));
        }
        // distribute the remaining genus over the vertices
        let mut genus = vec![0u32; n_v];
        for _ in 0..(total_genus - betti) {
            genus[rng.below(n_v)] += 1;
        }
        let graph = b.build();
        if !graph.is_connected() {
            continue;
        }
        if let Ok(sg) = GenusGraph::new(graph, genus) {
            debug_assert_eq!(sg.total_genus(), total_genus);
            return sg;
        }
    }
    GenusGraph::single_vertex(total_genus, n_legs).expect("stable pair")
}
