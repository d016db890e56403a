//! Paths and loops on a bipartite graph, and their enumeration tables.
//!
//! A path of length n is a walk of n edge traversals; parities alternate, so
//! the direction of each step is determined by the start parity and the step
//! position.  A loop is a pair of equal-endpoint paths (pi, eps); it can also
//! be read as a cyclic traversal list of length 2n (pi followed by the
//! reverse of eps).

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, Parity, Sign};

/// A walk on the graph: a start vertex and the edges crossed in order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Path {
    start: u32,
    edges: Vec<u32>,
}

impl Path {
    pub fn empty(start: u32) -> Path {
        Path {
            start,
            edges: Vec::new(),
        }
    }

    /// Build a path, validating that consecutive traversals share a vertex.
    pub fn new(graph: &BipartiteGraph, start: u32, edges: Vec<u32>) -> Result<Path> {
        let mut at = start;
        for &e in &edges {
            let edge = graph.edge(e);
            if edge.even != at && edge.odd != at {
                return Err(Error::LoopNotOnGraph(format!(
                    "edge {e} is not incident to vertex {}",
                    graph.id(at)
                )));
            }
            at = graph.other_end(e, at);
        }
        Ok(Path { start, edges })
    }

    pub fn start(&self) -> u32 {
        self.start
    }

    pub fn end(&self, graph: &BipartiteGraph) -> u32 {
        let mut at = self.start;
        for &e in &self.edges {
            at = graph.other_end(e, at);
        }
        at
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> &[u32] {
        &self.edges
    }

    pub fn sign(&self, graph: &BipartiteGraph) -> Sign {
        match graph.parity(self.start) {
            Parity::Even => Sign::Plus,
            Parity::Odd => Sign::Minus,
        }
    }

    /// Vertices visited, length n + 1.
    pub fn vertices(&self, graph: &BipartiteGraph) -> Vec<u32> {
        let mut at = self.start;
        let mut out = vec![at];
        for &e in &self.edges {
            at = graph.other_end(e, at);
            out.push(at);
        }
        out
    }

    /// Traversal directions: true when the step leaves an even vertex.
    pub fn directions(&self, graph: &BipartiteGraph) -> Vec<bool> {
        let mut at = self.start;
        let mut out = Vec::with_capacity(self.edges.len());
        for &e in &self.edges {
            out.push(graph.parity(at) == Parity::Even);
            at = graph.other_end(e, at);
        }
        out
    }

    /// Drop the last `k` traversals.
    pub fn truncated(&self, k: usize) -> Path {
        Path {
            start: self.start,
            edges: self.edges[..self.edges.len() - k].to_vec(),
        }
    }

    /// Drop the first `k` traversals.
    pub fn suffix(&self, graph: &BipartiteGraph, k: usize) -> Path {
        let mut at = self.start;
        for &e in &self.edges[..k] {
            at = graph.other_end(e, at);
        }
        Path {
            start: at,
            edges: self.edges[k..].to_vec(),
        }
    }

    /// Append a single traversal.
    pub fn extended(&self, edge: u32) -> Path {
        let mut edges = self.edges.clone();
        edges.push(edge);
        Path {
            start: self.start,
            edges,
        }
    }
}

/// Concatenation: `None` when t(p) != s(q), otherwise p followed by q.
pub fn concat(graph: &BipartiteGraph, p: &Path, q: &Path) -> Option<Path> {
    if p.end(graph) != q.start() {
        return None;
    }
    let mut edges = p.edges.clone();
    edges.extend_from_slice(&q.edges);
    Some(Path {
        start: p.start,
        edges,
    })
}

/// The same edges and vertices taken in the opposite order.
pub fn reverse_path(graph: &BipartiteGraph, p: &Path) -> Path {
    let mut edges = p.edges.clone();
    edges.reverse();
    Path {
        start: p.end(graph),
        edges,
    }
}

/// A loop: a pair of paths with the same start and end.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LoopRef {
    pub pi: Path,
    pub eps: Path,
}

impl LoopRef {
    pub fn new(graph: &BipartiteGraph, pi: Path, eps: Path) -> Result<LoopRef> {
        if pi.start() != eps.start() || pi.end(graph) != eps.end(graph) || pi.len() != eps.len() {
            return Err(Error::LoopNotOnGraph(
                "paths of a loop must share both endpoints and length".into(),
            ));
        }
        Ok(LoopRef { pi, eps })
    }

    pub fn diagonal(p: &Path) -> LoopRef {
        LoopRef {
            pi: p.clone(),
            eps: p.clone(),
        }
    }

    pub fn level(&self) -> usize {
        self.pi.len()
    }

    pub fn base(&self) -> u32 {
        self.pi.start()
    }

    /// Cyclic traversal list of length 2n: pi forward, then eps backward.
    /// Each entry is (edge id, crossed from the even side).
    pub fn cyclic(&self, graph: &BipartiteGraph) -> Vec<(u32, bool)> {
        let mut steps = Vec::with_capacity(2 * self.level());
        let mut at = self.pi.start();
        for &e in self.pi.edges() {
            steps.push((e, graph.parity(at) == Parity::Even));
            at = graph.other_end(e, at);
        }
        let rev = reverse_path(graph, &self.eps);
        let mut at = rev.start();
        for &e in rev.edges() {
            steps.push((e, graph.parity(at) == Parity::Even));
            at = graph.other_end(e, at);
        }
        steps
    }

    /// Rebuild the (pi, eps) pair from a cyclic traversal list.
    pub fn from_cyclic(graph: &BipartiteGraph, base: u32, steps: &[(u32, bool)]) -> Result<LoopRef> {
        if steps.len() % 2 != 0 {
            return Err(Error::LoopNotOnGraph("cyclic form must have even length".into()));
        }
        let n = steps.len() / 2;
        let pi = Path::new(graph, base, steps[..n].iter().map(|s| s.0).collect())?;
        let second = Path::new(graph, pi.end(graph), steps[n..].iter().map(|s| s.0).collect())?;
        if second.end(graph) != base {
            return Err(Error::LoopNotOnGraph("cyclic form does not close up".into()));
        }
        let eps = reverse_path(graph, &second);
        LoopRef::new(graph, pi, eps)
    }

    /// Net signed traversal count per edge: +1 crossing even -> odd, -1 the
    /// other way.  Zero everywhere exactly when the loop is a trivial 1-chain.
    pub fn net_traversal(&self, graph: &BipartiteGraph) -> Vec<i32> {
        let mut net = vec![0i32; graph.edge_count()];
        for (e, from_even) in self.cyclic(graph) {
            net[e as usize] += if from_even { 1 } else { -1 };
        }
        net
    }
}

/// All paths of one length and sign, indexed and grouped into
/// (start, end)-blocks.  Block keys are sorted; path order inside a block and
/// globally is lexicographic by (start vertex position, edge ids).
#[derive(Debug)]
pub struct PathTable {
    pub level: usize,
    pub sign: Sign,
    paths: Vec<Path>,
    index: HashMap<Path, u32>,
    blocks: BTreeMap<(u32, u32), Vec<u32>>,
    position: Vec<((u32, u32), usize)>,
}

impl PathTable {
    pub fn build(graph: &BipartiteGraph, level: usize, sign: Sign) -> PathTable {
        let mut paths = Vec::new();
        for &start in graph.vertices_of(sign.start_parity()) {
            let mut stack = vec![(Path::empty(start), start)];
            // Depth-first in edge-id order yields lexicographic enumeration.
            fn grow(
                graph: &BipartiteGraph,
                path: Path,
                at: u32,
                remaining: usize,
                out: &mut Vec<Path>,
            ) {
                if remaining == 0 {
                    out.push(path);
                    return;
                }
                for &e in graph.incident_edges(at) {
                    grow(
                        graph,
                        path.extended(e),
                        graph.other_end(e, at),
                        remaining - 1,
                        out,
                    );
                }
            }
            while let Some((path, at)) = stack.pop() {
                grow(graph, path, at, level, &mut paths);
            }
        }
        let index: HashMap<Path, u32> = paths
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i as u32))
            .collect();
        let mut blocks: BTreeMap<(u32, u32), Vec<u32>> = BTreeMap::new();
        for (i, p) in paths.iter().enumerate() {
            blocks
                .entry((p.start(), p.end(graph)))
                .or_default()
                .push(i as u32);
        }
        let mut position = vec![((0, 0), 0); paths.len()];
        for (&key, members) in &blocks {
            for (pos, &p) in members.iter().enumerate() {
                position[p as usize] = (key, pos);
            }
        }
        PathTable {
            level,
            sign,
            paths,
            index,
            blocks,
            position,
        }
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    pub fn path(&self, i: u32) -> &Path {
        &self.paths[i as usize]
    }

    pub fn lookup(&self, p: &Path) -> Option<u32> {
        self.index.get(p).copied()
    }

    pub fn blocks(&self) -> &BTreeMap<(u32, u32), Vec<u32>> {
        &self.blocks
    }

    pub fn block(&self, key: (u32, u32)) -> Option<&Vec<u32>> {
        self.blocks.get(&key)
    }

    /// Block key and within-block position of path `i`.
    pub fn position(&self, i: u32) -> ((u32, u32), usize) {
        self.position[i as usize]
    }
}

/// All loops of one length and sign, as (pi, eps) index pairs into the path
/// table, ordered block by block.
#[derive(Debug)]
pub struct LoopTable {
    pub level: usize,
    pub sign: Sign,
    loops: Vec<(u32, u32)>,
    index: HashMap<(u32, u32), u32>,
}

impl LoopTable {
    pub fn build(paths: &PathTable) -> LoopTable {
        let mut loops = Vec::new();
        for members in paths.blocks().values() {
            for &pi in members {
                for &eps in members {
                    loops.push((pi, eps));
                }
            }
        }
        let index = loops
            .iter()
            .enumerate()
            .map(|(i, &l)| (l, i as u32))
            .collect();
        LoopTable {
            level: paths.level,
            sign: paths.sign,
            loops,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.loops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.loops.is_empty()
    }

    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.loops
    }

    pub fn lookup(&self, pair: (u32, u32)) -> Option<u32> {
        self.index.get(&pair).copied()
    }

    pub fn loop_ref(&self, paths: &PathTable, i: u32) -> LoopRef {
        let (pi, eps) = self.loops[i as usize];
        LoopRef {
            pi: paths.path(pi).clone(),
            eps: paths.path(eps).clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use proptest::prelude::*;

    #[test]
    fn path_enumeration_counts() {
        let (g, _) = catalog::cube_graph();
        assert_eq!(PathTable::build(&g, 0, Sign::Plus).len(), 4);
        assert_eq!(PathTable::build(&g, 1, Sign::Plus).len(), 12);
        assert_eq!(PathTable::build(&g, 1, Sign::Minus).len(), 12);
        // Adjacency-power oracle: number of length-n walks from even starts.
        let n3 = PathTable::build(&g, 3, Sign::Plus).len();
        let mut count = 0usize;
        for &v in g.even_vertices() {
            let mut reach = vec![0usize; g.vertex_count()];
            reach[v as usize] = 1;
            for _ in 0..3 {
                let mut next = vec![0usize; g.vertex_count()];
                for u in 0..g.vertex_count() as u32 {
                    if reach[u as usize] > 0 {
                        for &e in g.incident_edges(u) {
                            next[g.other_end(e, u) as usize] += reach[u as usize];
                        }
                    }
                }
                reach = next;
            }
            count += reach.iter().sum::<usize>();
        }
        assert_eq!(n3, count);
    }

    #[test]
    fn multiedge_paths() {
        let (g, _) = catalog::multiedge_graph(3);
        assert_eq!(PathTable::build(&g, 2, Sign::Plus).len(), 9);
    }

    #[test]
    fn loop_counts() {
        let (g, _) = catalog::cube_graph();
        let p0 = PathTable::build(&g, 0, Sign::Plus);
        assert_eq!(LoopTable::build(&p0).len(), 4);
        let p1 = PathTable::build(&g, 1, Sign::Plus);
        assert_eq!(LoopTable::build(&p1).len(), 12);
        let p2 = PathTable::build(&g, 2, Sign::Plus);
        assert_eq!(LoopTable::build(&p2).len(), 84);
    }

    #[test]
    fn concat_and_reverse() {
        let (g, _) = catalog::cube_graph();
        let table = PathTable::build(&g, 1, Sign::Plus);
        let p = table.path(0).clone();
        let q = reverse_path(&g, &p);
        let loop_path = concat(&g, &p, &q).unwrap();
        assert_eq!(loop_path.len(), 2);
        assert_eq!(loop_path.start(), loop_path.end(&g));
        // Mismatched endpoints concatenate to nothing.
        let other = table
            .paths()
            .iter()
            .find(|r| r.start() != p.end(&g))
            .unwrap();
        assert!(concat(&g, &p, other).is_none());
        // Empty path is an identity for concatenation.
        let unit = Path::empty(p.start());
        assert_eq!(concat(&g, &unit, &p).unwrap(), p);
        assert_eq!(reverse_path(&g, &reverse_path(&g, &p)), p);
    }

    fn arbitrary_graph() -> impl Strategy<Value = crate::graph::BipartiteGraph> {
        // Small random bipartite multigraphs (2-3 even, 2-3 odd, <= 8 edges).
        (2usize..4, 2usize..4, proptest::collection::vec((0usize..3, 0usize..3), 1..8)).prop_map(
            |(ne, no, raw_edges)| {
                let mut spec = crate::graph::GraphSpec::new();
                for i in 0..ne {
                    spec = spec.vertex(&format!("e{i}"), crate::graph::Parity::Even);
                }
                for j in 0..no {
                    spec = spec.vertex(&format!("o{j}"), crate::graph::Parity::Odd);
                }
                for (a, b) in raw_edges {
                    spec = spec.edge(&format!("e{}", a % ne), &format!("o{}", b % no));
                }
                spec.build().unwrap()
            },
        )
    }

    proptest! {
        #[test]
        fn concat_is_associative(g in arbitrary_graph(), seed in 0u64..1000) {
            let table = PathTable::build(&g, 1, Sign::Plus);
            prop_assume!(!table.is_empty());
            let pick = |k: u64| table.path((k % table.len() as u64) as u32).clone();
            let p = pick(seed);
            let table2 = PathTable::build(&g, 1, Sign::Minus);
            prop_assume!(!table2.is_empty());
            // Build a composable triple by reversing.
            let q = reverse_path(&g, &p);
            let r = p.clone();
            let left = concat(&g, &concat(&g, &p, &q).unwrap(), &r);
            let right = concat(&g, &p, &concat(&g, &q, &r).unwrap());
            prop_assert_eq!(left, right);
        }

        #[test]
        fn loops_roundtrip_cyclic(g in arbitrary_graph(), seed in 0u64..1000) {
            for level in 0..3usize {
                let paths = PathTable::build(&g, level, Sign::Plus);
                let loops = LoopTable::build(&paths);
                if loops.is_empty() { continue; }
                let i = (seed % loops.len() as u64) as u32;
                let l = loops.loop_ref(&paths, i);
                let cyc = l.cyclic(&g);
                let back = LoopRef::from_cyclic(&g, l.base(), &cyc).unwrap();
                prop_assert_eq!(back, l);
            }
        }
    }
}
