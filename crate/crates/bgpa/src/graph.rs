//! Finite bipartite multigraphs with spin vectors.
//!
//! Vertices carry a parity (even/odd) and every edge joins an even vertex to
//! an odd one.  Parallel edges are kept separate and numbered by input order,
//! so an automorphism can be extended to edges deterministically.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }
}

/// Sign of a box space: `Plus` spaces are indexed by walks based at even
/// vertices, `Minus` by walks based at odd vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn start_parity(self) -> Parity {
        match self {
            Sign::Plus => Parity::Even,
            Sign::Minus => Parity::Odd,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Vertex {
    pub id: String,
    pub parity: Parity,
}

/// One edge of the multigraph.  `local_index` numbers parallel edges between
/// the same vertex pair 1..m in input order.
#[derive(Debug, Clone)]
pub struct Edge {
    pub even: u32,
    pub odd: u32,
    pub local_index: u32,
}

#[derive(Debug, Clone)]
pub struct BipartiteGraph {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    id_index: HashMap<String, u32>,
    incident: Vec<Vec<u32>>,
    even_order: Vec<u32>,
    odd_order: Vec<u32>,
}

/// Plain description used to build a graph: vertices with parity, edges by
/// endpoint ids (in either order).  Edge order is preserved.
#[derive(Debug, Clone, Default)]
pub struct GraphSpec {
    pub vertices: Vec<(String, Parity)>,
    pub edges: Vec<(String, String)>,
}

impl GraphSpec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex(mut self, id: &str, parity: Parity) -> Self {
        self.vertices.push((id.to_string(), parity));
        self
    }

    pub fn edge(mut self, a: &str, b: &str) -> Self {
        self.edges.push((a.to_string(), b.to_string()));
        self
    }

    pub fn build(self) -> Result<BipartiteGraph> {
        BipartiteGraph::build(self)
    }
}

impl BipartiteGraph {
    pub fn build(spec: GraphSpec) -> Result<BipartiteGraph> {
        if spec.vertices.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let mut id_index = HashMap::new();
        let mut vertices = Vec::with_capacity(spec.vertices.len());
        for (i, (id, parity)) in spec.vertices.iter().enumerate() {
            if id_index.insert(id.clone(), i as u32).is_some() {
                return Err(Error::DuplicateVertex(id.clone()));
            }
            vertices.push(Vertex {
                id: id.clone(),
                parity: *parity,
            });
        }
        let mut edges = Vec::with_capacity(spec.edges.len());
        let mut pair_counts: HashMap<(u32, u32), u32> = HashMap::new();
        for (a, b) in &spec.edges {
            let ia = *id_index
                .get(a)
                .ok_or_else(|| Error::UnknownVertex(a.clone()))?;
            let ib = *id_index
                .get(b)
                .ok_or_else(|| Error::UnknownVertex(b.clone()))?;
            let (even, odd) = match (vertices[ia as usize].parity, vertices[ib as usize].parity) {
                (Parity::Even, Parity::Odd) => (ia, ib),
                (Parity::Odd, Parity::Even) => (ib, ia),
                _ => {
                    return Err(Error::NonBipartiteEdge {
                        a: a.clone(),
                        b: b.clone(),
                    })
                }
            };
            let count = pair_counts.entry((even, odd)).or_insert(0);
            *count += 1;
            edges.push(Edge {
                even,
                odd,
                local_index: *count,
            });
        }
        let mut incident = vec![Vec::new(); vertices.len()];
        for (e, edge) in edges.iter().enumerate() {
            incident[edge.even as usize].push(e as u32);
            incident[edge.odd as usize].push(e as u32);
        }
        let even_order = (0..vertices.len() as u32)
            .filter(|&v| vertices[v as usize].parity == Parity::Even)
            .collect();
        let odd_order = (0..vertices.len() as u32)
            .filter(|&v| vertices[v as usize].parity == Parity::Odd)
            .collect();
        Ok(BipartiteGraph {
            vertices,
            edges,
            id_index,
            incident,
            even_order,
            odd_order,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex(&self, v: u32) -> &Vertex {
        &self.vertices[v as usize]
    }

    pub fn edge(&self, e: u32) -> &Edge {
        &self.edges[e as usize]
    }

    pub fn parity(&self, v: u32) -> Parity {
        self.vertices[v as usize].parity
    }

    pub fn id(&self, v: u32) -> &str {
        &self.vertices[v as usize].id
    }

    pub fn lookup(&self, id: &str) -> Result<u32> {
        self.id_index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(id.to_string()))
    }

    /// Even vertices in input order.
    pub fn even_vertices(&self) -> &[u32] {
        &self.even_order
    }

    /// Odd vertices in input order.
    pub fn odd_vertices(&self) -> &[u32] {
        &self.odd_order
    }

    pub fn vertices_of(&self, parity: Parity) -> &[u32] {
        match parity {
            Parity::Even => &self.even_order,
            Parity::Odd => &self.odd_order,
        }
    }

    /// Edge ids incident to `v`, in input order.
    pub fn incident_edges(&self, v: u32) -> &[u32] {
        &self.incident[v as usize]
    }

    pub fn degree(&self, v: u32) -> usize {
        self.incident[v as usize].len()
    }

    /// The endpoint of `e` opposite to `v`.
    pub fn other_end(&self, e: u32, v: u32) -> u32 {
        let edge = &self.edges[e as usize];
        if edge.even == v {
            edge.odd
        } else {
            edge.even
        }
    }

    /// Number of edges between an even vertex `v` and an odd vertex `w`.
    pub fn connection_count(&self, even: u32, odd: u32) -> usize {
        self.incident[even as usize]
            .iter()
            .filter(|&&e| self.edges[e as usize].odd == odd)
            .count()
    }

    /// Edge ids between the pair, in input (= local index) order.
    pub fn edges_between(&self, even: u32, odd: u32) -> Vec<u32> {
        self.incident[even as usize]
            .iter()
            .copied()
            .filter(|&e| self.edges[e as usize].odd == odd)
            .collect()
    }

    /// Adjacent vertex pairs (even, odd) that carry at least one edge, sorted.
    pub fn adjacent_pairs(&self) -> Vec<(u32, u32)> {
        let mut pairs: Vec<(u32, u32)> = Vec::new();
        for edge in &self.edges {
            if !pairs.contains(&(edge.even, edge.odd)) {
                pairs.push((edge.even, edge.odd));
            }
        }
        pairs.sort();
        pairs
    }

    /// Connected components as lists of vertex ids.
    pub fn components(&self) -> Vec<Vec<String>> {
        let n = self.vertices.len();
        let mut seen = vec![false; n];
        let mut comps = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut stack = vec![start as u32];
            let mut comp = Vec::new();
            seen[start] = true;
            while let Some(v) = stack.pop() {
                comp.push(self.vertices[v as usize].id.clone());
                for &e in &self.incident[v as usize] {
                    let w = self.other_end(e, v);
                    if !seen[w as usize] {
                        seen[w as usize] = true;
                        stack.push(w);
                    }
                }
            }
            comp.sort();
            comps.push(comp);
        }
        comps
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }

    fn require_connected(&self) -> Result<()> {
        let comps = self.components();
        if comps.len() > 1 {
            return Err(Error::Disconnected { components: comps });
        }
        Ok(())
    }

    /// A BFS spanning tree rooted at vertex 0.  Returns (tree edge ids,
    /// parent step per vertex as (parent vertex, edge)).
    fn spanning_tree(&self) -> Result<(Vec<u32>, Vec<Option<(u32, u32)>>)> {
        self.require_connected()?;
        let n = self.vertices.len();
        let mut parent: Vec<Option<(u32, u32)>> = vec![None; n];
        let mut in_tree = vec![false; n];
        let mut tree_edges = Vec::new();
        let mut queue = std::collections::VecDeque::new();
        in_tree[0] = true;
        queue.push_back(0u32);
        while let Some(v) = queue.pop_front() {
            for &e in &self.incident[v as usize] {
                let w = self.other_end(e, v);
                if !in_tree[w as usize] {
                    in_tree[w as usize] = true;
                    parent[w as usize] = Some((v, e));
                    tree_edges.push(e);
                    queue.push_back(w);
                }
            }
        }
        Ok((tree_edges, parent))
    }

    /// Rank of the cycle space, |E| - |V| + 1, together with a fundamental
    /// cycle basis from a BFS spanning tree.
    pub fn cycle_basis(&self) -> Result<CycleBasis> {
        let (tree_edges, parent) = self.spanning_tree()?;
        let in_tree: std::collections::HashSet<u32> = tree_edges.iter().copied().collect();
        let mut cycles = Vec::new();
        let mut chords = Vec::new();
        for e in 0..self.edges.len() as u32 {
            if in_tree.contains(&e) {
                continue;
            }
            chords.push(e);
            let edge = &self.edges[e as usize];
            // Orient the chord even -> odd, then return along the tree.
            let (from, to) = (edge.even, edge.odd);
            let up = |mut v: u32| {
                let mut steps = Vec::new();
                while let Some((p, pe)) = parent[v as usize] {
                    steps.push((v, pe));
                    v = p;
                }
                (steps, v)
            };
            let (mut a_up, _) = up(to);
            let (mut b_up, _) = up(from);
            // Trim the common tail above the meeting point.
            while let (Some(&(_, ea)), Some(&(_, eb))) = (a_up.last(), b_up.last()) {
                if ea == eb {
                    a_up.pop();
                    b_up.pop();
                } else {
                    break;
                }
            }
            let mut steps = vec![CycleStep {
                edge: e,
                from_even: true,
            }];
            let mut at = to;
            for (v, pe) in a_up {
                debug_assert_eq!(v, at);
                steps.push(CycleStep {
                    edge: pe,
                    from_even: self.parity(at) == Parity::Even,
                });
                at = self.other_end(pe, at);
            }
            // Now walk down from the meeting point to `from`.
            for (v, pe) in b_up.iter().rev() {
                let prev = self.other_end(*pe, *v);
                debug_assert_eq!(prev, at);
                steps.push(CycleStep {
                    edge: *pe,
                    from_even: self.parity(at) == Parity::Even,
                });
                at = *v;
            }
            debug_assert_eq!(at, from);
            cycles.push(steps);
        }
        Ok(CycleBasis { cycles, chords })
    }

    pub fn cycle_rank(&self) -> Result<usize> {
        self.require_connected()?;
        Ok(self.edges.len() + 1 - self.vertices.len())
    }

    /// Modulus-delta spin vector from the dominant eigenvector of the
    /// connection matrix, normalized so the first even vertex has weight 1.
    pub fn perron_spin(&self) -> Result<SpinVector> {
        self.require_connected()?;
        if self.edges.is_empty() {
            return Err(Error::NoEdges);
        }
        let evens = &self.even_order;
        let odds = &self.odd_order;
        let ne = evens.len();
        let no = odds.len();
        let even_pos: HashMap<u32, usize> = evens.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let odd_pos: HashMap<u32, usize> = odds.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        // Biadjacency with multiplicities.
        let mut b = vec![vec![0f64; no]; ne];
        for edge in &self.edges {
            b[even_pos[&edge.even]][odd_pos[&edge.odd]] += 1.0;
        }
        // Power iteration on B B^T over the even part; deterministic all-ones
        // start.  Connected graphs make B B^T primitive, so this converges.
        let mut u = vec![1f64; ne];
        let mut lambda = 0f64;
        for _ in 0..200_000 {
            let mut bv = vec![0f64; no];
            for i in 0..ne {
                for j in 0..no {
                    bv[j] += b[i][j] * u[i];
                }
            }
            let mut next = vec![0f64; ne];
            for i in 0..ne {
                for j in 0..no {
                    next[i] += b[i][j] * bv[j];
                }
            }
            let num: f64 = next.iter().zip(&u).map(|(a, b)| a * b).sum();
            let den: f64 = u.iter().map(|a| a * a).sum();
            let new_lambda = num / den;
            let norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
            let mut diff = 0f64;
            for i in 0..ne {
                let scaled = next[i] / norm;
                diff = diff.max((scaled - u[i] / den.sqrt()).abs());
                u[i] = scaled;
            }
            let done = (new_lambda - lambda).abs() < 1e-13 && diff < 1e-13;
            lambda = new_lambda;
            if done {
                break;
            }
        }
        let delta = lambda.sqrt();
        // Odd part of the squared-spin eigenvector: B^T u / delta.
        let mut w = vec![0f64; no];
        for i in 0..ne {
            for j in 0..no {
                w[j] += b[i][j] * u[i];
            }
        }
        for x in &mut w {
            *x /= delta;
        }
        let mut mu = vec![0f64; self.vertices.len()];
        for (i, &v) in evens.iter().enumerate() {
            mu[v as usize] = u[i].sqrt();
        }
        for (j, &v) in odds.iter().enumerate() {
            mu[v as usize] = w[j].sqrt();
        }
        let scale = mu[evens[0] as usize];
        for x in &mut mu {
            *x /= scale;
        }
        Ok(SpinVector {
            mu,
            modulus: Some(delta),
        })
    }
}

/// One traversal step inside a cycle-basis element: `from_even` records the
/// direction the edge is crossed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleStep {
    pub edge: u32,
    pub from_even: bool,
}

#[derive(Debug, Clone)]
pub struct CycleBasis {
    /// Fundamental cycles as cyclic step lists; cycle `k` traverses chord
    /// `chords[k]` (even to odd) exactly once and no other chord.
    pub cycles: Vec<Vec<CycleStep>>,
    pub chords: Vec<u32>,
}

impl CycleBasis {
    pub fn rank(&self) -> usize {
        self.cycles.len()
    }
}

/// Positive weight per vertex, with optional modulus bookkeeping.
#[derive(Debug, Clone)]
pub struct SpinVector {
    mu: Vec<f64>,
    pub modulus: Option<f64>,
}

impl SpinVector {
    pub fn constant(graph: &BipartiteGraph, value: f64) -> SpinVector {
        SpinVector {
            mu: vec![value; graph.vertex_count()],
            modulus: None,
        }
    }

    pub fn from_map(graph: &BipartiteGraph, values: &BTreeMap<String, f64>) -> Result<SpinVector> {
        let mut mu = vec![0f64; graph.vertex_count()];
        for v in 0..graph.vertex_count() as u32 {
            let id = graph.id(v);
            let value = *values
                .get(id)
                .ok_or_else(|| Error::MissingSpin(id.to_string()))?;
            if !(value > 0.0) {
                return Err(Error::NonPositiveSpin(id.to_string()));
            }
            mu[v as usize] = value;
        }
        Ok(SpinVector { mu, modulus: None })
    }

    pub fn from_values(mu: Vec<f64>) -> SpinVector {
        SpinVector { mu, modulus: None }
    }

    pub fn with_modulus(mut self, delta: f64) -> SpinVector {
        self.modulus = Some(delta);
        self
    }

    pub fn mu(&self, v: u32) -> f64 {
        self.mu[v as usize]
    }

    pub fn values(&self) -> &[f64] {
        &self.mu
    }

    pub fn set(&mut self, v: u32, value: f64) {
        self.mu[v as usize] = value;
        self.modulus = None;
    }

    /// Sum of mu^4 over the given parity class (the partition-function mass).
    pub fn quartic_mass(&self, graph: &BipartiteGraph, parity: Parity) -> f64 {
        graph
            .vertices_of(parity)
            .iter()
            .map(|&v| self.mu(v).powi(4))
            .sum()
    }
}

/// Outcome of the per-vertex eigenvalue test for a spin vector.
#[derive(Debug, Clone)]
pub enum ModulusCheck {
    Ok { delta: f64 },
    Violations(Vec<ModulusViolation>),
}

#[derive(Debug, Clone)]
pub struct ModulusViolation {
    pub vertex: String,
    /// Sum over incident edges of mu(other end)^2.
    pub lhs: f64,
    /// Consensus delta times mu(vertex)^2.
    pub rhs: f64,
}

impl ModulusCheck {
    pub fn is_ok(&self) -> bool {
        matches!(self, ModulusCheck::Ok { .. })
    }

    pub fn delta(&self) -> Option<f64> {
        match self {
            ModulusCheck::Ok { delta } => Some(*delta),
            ModulusCheck::Violations(_) => None,
        }
    }
}

/// Check that mu^2 is an eigenvector of the connection matrix: at every
/// vertex, sum of mu(t(e))^2 over incident edges equals delta * mu(v)^2 for
/// one common delta.  `tol` is relative.
pub fn check_modulus(graph: &BipartiteGraph, spin: &SpinVector, tol: f64) -> ModulusCheck {
    let mut ratios = Vec::with_capacity(graph.vertex_count());
    for v in 0..graph.vertex_count() as u32 {
        let lhs: f64 = graph
            .incident_edges(v)
            .iter()
            .map(|&e| spin.mu(graph.other_end(e, v)).powi(2))
            .sum();
        ratios.push(lhs / spin.mu(v).powi(2));
    }
    let mut sorted = ratios.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let delta = sorted[sorted.len() / 2];
    let mut violations = Vec::new();
    for v in 0..graph.vertex_count() as u32 {
        if (ratios[v as usize] - delta).abs() > tol * delta.max(1.0) {
            violations.push(ModulusViolation {
                vertex: graph.id(v).to_string(),
                lhs: ratios[v as usize] * spin.mu(v).powi(2),
                rhs: delta * spin.mu(v).powi(2),
            });
        }
    }
    if violations.is_empty() {
        ModulusCheck::Ok { delta }
    } else {
        ModulusCheck::Violations(violations)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn build_rejects_bad_input() {
        let dup = GraphSpec::new()
            .vertex("a", Parity::Even)
            .vertex("a", Parity::Odd);
        assert!(matches!(dup.build(), Err(Error::DuplicateVertex(_))));

        let nonbip = GraphSpec::new()
            .vertex("a", Parity::Even)
            .vertex("b", Parity::Even)
            .edge("a", "b");
        assert!(matches!(nonbip.build(), Err(Error::NonBipartiteEdge { .. })));

        assert!(matches!(GraphSpec::new().build(), Err(Error::EmptyGraph)));
    }

    #[test]
    fn degenerate_graph_is_valid() {
        let g = GraphSpec::new().vertex("a", Parity::Even).build().unwrap();
        assert_eq!(g.vertex_count(), 1);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn parallel_edges_are_numbered_in_order() {
        let g = GraphSpec::new()
            .vertex("a", Parity::Even)
            .vertex("b", Parity::Odd)
            .edge("a", "b")
            .edge("b", "a")
            .edge("a", "b")
            .build()
            .unwrap();
        let locals: Vec<u32> = g.edges().iter().map(|e| e.local_index).collect();
        assert_eq!(locals, vec![1, 2, 3]);
        assert_eq!(g.connection_count(0, 1), 3);
    }

    #[test]
    fn cube_counts() {
        let (g, spin) = catalog::cube_graph();
        assert_eq!(g.even_vertices().len(), 4);
        assert_eq!(g.odd_vertices().len(), 4);
        assert_eq!(g.edge_count(), 12);
        for v in 0..8 {
            assert_eq!(g.degree(v), 3);
        }
        assert_eq!(g.cycle_rank().unwrap(), 5);
        let basis = g.cycle_basis().unwrap();
        assert_eq!(basis.rank(), 5);
        // Every fundamental cycle crosses its own chord once and no other.
        for (k, cycle) in basis.cycles.iter().enumerate() {
            for (j, &chord) in basis.chords.iter().enumerate() {
                let count = cycle.iter().filter(|s| s.edge == chord).count();
                assert_eq!(count, usize::from(j == k));
            }
        }
        let check = check_modulus(&g, &spin, 1e-9);
        assert!((check.delta().unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn perron_on_cube_is_constant() {
        let (g, _) = catalog::cube_graph();
        let spin = g.perron_spin().unwrap();
        assert!((spin.modulus.unwrap() - 3.0).abs() < 1e-10);
        for v in 0..8 {
            assert!((spin.mu(v) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn perron_on_multiedge() {
        let (g, _) = catalog::multiedge_graph(4);
        let spin = g.perron_spin().unwrap();
        assert!((spin.modulus.unwrap() - 4.0).abs() < 1e-10);
        assert!((spin.mu(0) - 1.0).abs() < 1e-12);
        assert!((spin.mu(1) - 1.0).abs() < 1e-10);
        assert_eq!(g.cycle_rank().unwrap(), 3);
    }

    #[test]
    fn perron_on_star() {
        // 3 * mu(leaf)^2 = delta * mu(center)^2 and mu(center)^2 = delta * mu(leaf)^2
        // force delta = sqrt(3).
        let (g, _) = catalog::star_graph(3);
        let spin = g.perron_spin().unwrap();
        let delta = spin.modulus.unwrap();
        assert!((delta - 3f64.sqrt()).abs() < 1e-10);
        assert!((spin.mu(0) - 1.0).abs() < 1e-12);
        let leaf = spin.mu(1);
        assert!((leaf - (1.0 / 3f64.powf(0.25))).abs() < 1e-9);
        let check = check_modulus(&g, &spin, 1e-9);
        assert!(check.is_ok());
    }

    #[test]
    fn perron_rejects_disconnected() {
        let g = GraphSpec::new()
            .vertex("a", Parity::Even)
            .vertex("b", Parity::Odd)
            .vertex("c", Parity::Even)
            .vertex("d", Parity::Odd)
            .edge("a", "b")
            .edge("c", "d")
            .build()
            .unwrap();
        match g.perron_spin() {
            Err(Error::Disconnected { components }) => assert_eq!(components.len(), 2),
            other => panic!("expected disconnected error, got {other:?}"),
        }
    }

    #[test]
    fn modulus_check_flags_perturbation() {
        let (g, mut spin) = catalog::cube_graph();
        spin.set(0, 2.0);
        match check_modulus(&g, &spin, 1e-9) {
            ModulusCheck::Violations(list) => {
                let names: Vec<&str> = list.iter().map(|v| v.vertex.as_str()).collect();
                // The perturbed vertex and its three neighbors deviate.
                assert_eq!(names.len(), 4);
                assert!(names.contains(&g.id(0)));
            }
            ModulusCheck::Ok { .. } => panic!("perturbation not detected"),
        }
    }

    #[test]
    fn tree_has_rank_zero() {
        let (g, _) = catalog::star_graph(4);
        assert_eq!(g.cycle_rank().unwrap(), 0);
        assert_eq!(g.cycle_basis().unwrap().rank(), 0);
    }
}
