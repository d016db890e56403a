//! Automorphisms of a bipartite graph planar algebra.
//!
//! Every automorphism factors as a graph-automorphism operator (a
//! parity-preserving, multiplicity-preserving, spin-scaling vertex
//! permutation extended to edges by numbering) composed with a
//! multiplication operator (a unitary block per adjacent vertex pair acting
//! on the parallel-edge space).  Ops are stored structurally as
//! (kappa, lambda, blocks) and their level-n action is computed on demand.

use std::collections::{BTreeMap, HashMap, VecDeque};

use num_complex::Complex64;

use crate::algebra::{AlgebraElement, Bgpa, Block, ZeroBoxElement};
use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, CycleBasis, Parity, SpinVector};
use crate::paths::{LoopRef, Path};

const GAUGE_TOL: f64 = 1e-10;

/// A structural planar-algebra automorphism: vertex permutation, spin scale,
/// and one unitary per adjacent vertex pair (missing blocks are identities).
#[derive(Debug, Clone)]
pub struct AutomorphismOp {
    kappa: Vec<u32>,
    lambda: f64,
    blocks: BTreeMap<(u32, u32), Block>,
}

impl AutomorphismOp {
    pub fn identity(graph: &BipartiteGraph) -> AutomorphismOp {
        AutomorphismOp {
            kappa: (0..graph.vertex_count() as u32).collect(),
            lambda: 1.0,
            blocks: BTreeMap::new(),
        }
    }

    /// The operator extending a vertex permutation to edges by numbering
    /// preservation.  Validates parity, connection counts and constant spin
    /// ratio.
    pub fn graph_auto(
        graph: &BipartiteGraph,
        spin: &SpinVector,
        kappa: Vec<u32>,
    ) -> Result<AutomorphismOp> {
        validate_graph_perm(graph, &kappa)?;
        let lambda = spin_ratio(graph, spin, &kappa)?;
        Ok(AutomorphismOp {
            kappa,
            lambda,
            blocks: BTreeMap::new(),
        })
    }

    /// A multiplication operator: trivial vertex action, one unitary per
    /// adjacent pair.
    pub fn mult_op(
        graph: &BipartiteGraph,
        blocks: BTreeMap<(u32, u32), Block>,
    ) -> Result<AutomorphismOp> {
        for (&(v, w), mat) in &blocks {
            let size = graph.connection_count(v, w);
            if size == 0 || mat.nrows() != size || mat.ncols() != size {
                return Err(Error::BlockSizeMismatch {
                    even: graph.id(v).to_string(),
                    odd: graph.id(w).to_string(),
                    expected: size,
                    got: mat.nrows(),
                });
            }
            let gram = mat.adjoint() * mat;
            if (&gram - Block::identity(size, size))
                .iter()
                .any(|c| c.norm() > 1e-9)
            {
                return Err(Error::NonUnitaryBlock {
                    even: graph.id(v).to_string(),
                    odd: graph.id(w).to_string(),
                });
            }
        }
        Ok(AutomorphismOp {
            kappa: (0..graph.vertex_count() as u32).collect(),
            lambda: 1.0,
            blocks,
        })
    }

    /// A multiplication operator acting by per-edge phases, chosen so that
    /// the induced loop-phase character takes the value `chi[k]` on the k-th
    /// fundamental cycle of `basis` and 1 on the others.  Each fundamental
    /// cycle crosses its own chord (even to odd) once, so placing the phase
    /// on the chord realizes the character exactly.
    pub fn scalar_op_from_character(
        graph: &BipartiteGraph,
        basis: &CycleBasis,
        chi: &[Complex64],
    ) -> Result<AutomorphismOp> {
        if chi.len() != basis.rank() {
            return Err(Error::InvalidInput(format!(
                "expected {} character values, got {}",
                basis.rank(),
                chi.len()
            )));
        }
        let mut blocks: BTreeMap<(u32, u32), Block> = BTreeMap::new();
        for (k, &value) in chi.iter().enumerate() {
            if (value.norm() - 1.0).abs() > 1e-9 {
                return Err(Error::NonUnitCharacter(k));
            }
            let chord = basis.chords[k];
            let edge = graph.edge(chord);
            let pair = (edge.even, edge.odd);
            let parallels = graph.edges_between(edge.even, edge.odd);
            let size = parallels.len();
            let block = blocks
                .entry(pair)
                .or_insert_with(|| Block::identity(size, size));
            let pos = parallels.iter().position(|&e| e == chord).unwrap();
            block[(pos, pos)] *= value;
        }
        blocks.retain(|_, mat| !is_identity(mat));
        Ok(AutomorphismOp {
            kappa: (0..graph.vertex_count() as u32).collect(),
            lambda: 1.0,
            blocks,
        })
    }

    pub fn kappa(&self) -> &[u32] {
        &self.kappa
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn blocks(&self) -> &BTreeMap<(u32, u32), Block> {
        &self.blocks
    }

    pub fn is_vertex_trivial(&self) -> bool {
        self.kappa.iter().enumerate().all(|(i, &v)| i as u32 == v)
    }

    pub fn is_pure_permutation(&self) -> bool {
        self.blocks.is_empty()
    }

    /// A multiplication operator is scalar when every block is a scalar
    /// multiple of the identity.
    pub fn is_scalar_mult_op(&self) -> bool {
        self.is_vertex_trivial()
            && self.blocks.values().all(|mat| {
                let c = mat[(0, 0)];
                (mat - Block::identity(mat.nrows(), mat.ncols()).map(|x| x * c))
                    .iter()
                    .all(|z| z.norm() < 1e-10)
            })
    }

    /// Image of an edge under the numbering-preserving extension of kappa.
    pub fn transport_edge(&self, graph: &BipartiteGraph, e: u32) -> u32 {
        let edge = graph.edge(e);
        let targets = graph.edges_between(self.kappa[edge.even as usize], self.kappa[edge.odd as usize]);
        targets[(edge.local_index - 1) as usize]
    }

    /// All images of one traversal with coefficients: the block acts first
    /// (conjugated on odd-start traversals), then the permutation relabels.
    pub fn edge_action(
        &self,
        graph: &BipartiteGraph,
        e: u32,
        from_even: bool,
    ) -> Vec<(u32, Complex64)> {
        let edge = graph.edge(e);
        let pair = (edge.even, edge.odd);
        match self.blocks.get(&pair) {
            None => vec![(self.transport_edge(graph, e), Complex64::new(1.0, 0.0))],
            Some(mat) => {
                let parallels = graph.edges_between(edge.even, edge.odd);
                let col = parallels.iter().position(|&x| x == e).unwrap();
                let mut out = Vec::new();
                for (row, &e_prime) in parallels.iter().enumerate() {
                    let mut coeff = mat[(row, col)];
                    if !from_even {
                        coeff = coeff.conj();
                    }
                    if coeff.norm() > 0.0 {
                        out.push((self.transport_edge(graph, e_prime), coeff));
                    }
                }
                out
            }
        }
    }

    /// Whether every block maps each basis edge to a single edge with a
    /// phase (permutations, diagonal phases, monomial unitaries).
    pub fn is_monomial(&self) -> bool {
        self.blocks.values().all(|mat| {
            (0..mat.ncols()).all(|j| {
                mat.column(j).iter().filter(|c| c.norm() > GAUGE_TOL).count() == 1
            })
        })
    }

    /// Image of a path with its phase; `None` when some block is not
    /// monomial.
    pub fn map_path(&self, graph: &BipartiteGraph, path: &Path) -> Option<(Path, Complex64)> {
        let mut phase = Complex64::new(1.0, 0.0);
        let mut edges = Vec::with_capacity(path.len());
        let mut at = path.start();
        for &e in path.edges() {
            let from_even = graph.parity(at) == Parity::Even;
            let images = self.edge_action(graph, e, from_even);
            if images.len() != 1 {
                return None;
            }
            let (e_new, coeff) = images[0];
            phase *= coeff;
            edges.push(e_new);
            at = graph.other_end(e, at);
        }
        let start = self.kappa[path.start() as usize];
        Some((Path::new(graph, start, edges).unwrap(), phase))
    }

    /// Image of a loop unit: `Ad U` sends the unit of (pi, eps) to
    /// phase(pi) * conj(phase(eps)) times the unit of the image loop.
    pub fn map_loop(&self, graph: &BipartiteGraph, l: &LoopRef) -> Option<(LoopRef, Complex64)> {
        let (pi, phase_pi) = self.map_path(graph, &l.pi)?;
        let (eps, phase_eps) = self.map_path(graph, &l.eps)?;
        Some((
            LoopRef::new(graph, pi, eps).unwrap(),
            phase_pi * phase_eps.conj(),
        ))
    }

    /// The level-n adjoint action on an element.
    pub fn apply(&self, pa: &Bgpa, a: &AlgebraElement) -> AlgebraElement {
        let table = pa.paths(a.level(), a.sign());
        let mut out = pa.zero(a.level(), a.sign());
        for (&(v, w), mat) in a.blocks() {
            let members = table.block((v, w)).unwrap();
            let out_key = (self.kappa[v as usize], self.kappa[w as usize]);
            let out_members = table.block(out_key).unwrap();
            debug_assert_eq!(members.len(), out_members.len());
            let out_pos: HashMap<u32, usize> = out_members
                .iter()
                .enumerate()
                .map(|(pos, &p)| (p, pos))
                .collect();
            // Column p of U over the output block: expand step images.
            let size = members.len();
            let mut u = Block::zeros(size, size);
            for (col, &p) in members.iter().enumerate() {
                let path = table.path(p);
                let mut partial: Vec<(Path, Complex64)> = vec![(
                    Path::empty(self.kappa[path.start() as usize]),
                    Complex64::new(1.0, 0.0),
                )];
                let mut at = path.start();
                for &e in path.edges() {
                    let from_even = pa.graph().parity(at) == Parity::Even;
                    let images = self.edge_action(pa.graph(), e, from_even);
                    let mut next = Vec::with_capacity(partial.len() * images.len());
                    for (q, c) in &partial {
                        for &(e_new, coeff) in &images {
                            next.push((q.extended(e_new), c * coeff));
                        }
                    }
                    partial = next;
                    at = pa.graph().other_end(e, at);
                }
                for (q, c) in partial {
                    let idx = table.lookup(&q).unwrap();
                    u[(out_pos[&idx], col)] += c;
                }
            }
            let image = &u * mat * u.adjoint();
            out.blocks_mut()
                .entry(out_key)
                .and_modify(|b| *b += &image)
                .or_insert(image);
        }
        out
    }

    /// Action on the zero-box space: the vertex permutation.
    pub fn apply_zero_box(&self, z: &ZeroBoxElement) -> ZeroBoxElement {
        let coeffs = z
            .coeffs
            .iter()
            .map(|(&v, &c)| (self.kappa[v as usize], c))
            .collect();
        ZeroBoxElement {
            sign: z.sign,
            coeffs,
        }
    }

    /// Composition: `self` after `other` (as unitaries, U_self U_other).
    pub fn compose(&self, graph: &BipartiteGraph, other: &AutomorphismOp) -> AutomorphismOp {
        let kappa: Vec<u32> = other
            .kappa
            .iter()
            .map(|&v| self.kappa[v as usize])
            .collect();
        let mut blocks = BTreeMap::new();
        for (v, w) in graph.adjacent_pairs() {
            let size = graph.connection_count(v, w);
            let transported = (
                other.kappa[v as usize],
                other.kappa[w as usize],
            );
            let first = other
                .blocks
                .get(&(v, w))
                .cloned()
                .unwrap_or_else(|| Block::identity(size, size));
            let second = self
                .blocks
                .get(&transported)
                .cloned()
                .unwrap_or_else(|| Block::identity(size, size));
            let product = second * first;
            if !is_identity(&product) {
                blocks.insert((v, w), product);
            }
        }
        AutomorphismOp {
            kappa,
            lambda: self.lambda * other.lambda,
            blocks,
        }
    }

    pub fn inverse(&self) -> AutomorphismOp {
        let mut kappa_inv = vec![0u32; self.kappa.len()];
        for (i, &v) in self.kappa.iter().enumerate() {
            kappa_inv[v as usize] = i as u32;
        }
        let mut blocks = BTreeMap::new();
        for (&(v, w), mat) in &self.blocks {
            let target = (kappa_inv[v as usize], kappa_inv[w as usize]);
            let inv = mat.adjoint();
            if !is_identity(&inv) {
                blocks.insert(target, inv);
            }
        }
        AutomorphismOp {
            kappa: kappa_inv,
            lambda: 1.0 / self.lambda,
            blocks,
        }
    }

    /// Gauge-canonical representative of the same adjoint action: block
    /// phases are normalized along a spanning tree (trivially-acting scalar
    /// factors are exactly the tree gauge), and blocks equal to the identity
    /// are dropped.
    pub fn canonicalize(&self, graph: &BipartiteGraph) -> AutomorphismOp {
        let n = graph.vertex_count();
        let mut psi = vec![0f64; n];
        let mut seen = vec![false; n];
        for root in 0..n {
            if seen[root] {
                continue;
            }
            seen[root] = true;
            let mut queue = VecDeque::from([root as u32]);
            while let Some(v) = queue.pop_front() {
                for &e in graph.incident_edges(v) {
                    let w = graph.other_end(e, v);
                    if seen[w as usize] {
                        continue;
                    }
                    seen[w as usize] = true;
                    let edge = graph.edge(e);
                    let pair = (edge.even, edge.odd);
                    let current = self
                        .blocks
                        .get(&pair)
                        .map(|m| first_nonzero_arg(m))
                        .unwrap_or(0.0);
                    // Choose psi(w) so the gauge-fixed block has a real
                    // positive leading entry.
                    psi[w as usize] = -(current + psi[v as usize]);
                    queue.push_back(w);
                }
            }
        }
        let mut blocks = BTreeMap::new();
        for (v, w) in graph.adjacent_pairs() {
            let size = graph.connection_count(v, w);
            let base = self
                .blocks
                .get(&(v, w))
                .cloned()
                .unwrap_or_else(|| Block::identity(size, size));
            let phase = Complex64::from_polar(1.0, psi[v as usize] + psi[w as usize]);
            let fixed = base.map(|c| c * phase);
            if !is_identity(&fixed) {
                blocks.insert((v, w), fixed);
            }
        }
        AutomorphismOp {
            kappa: self.kappa.clone(),
            lambda: self.lambda,
            blocks,
        }
    }

    /// Stable text fingerprint of the canonical form, used for dedup.
    fn fingerprint(&self, graph: &BipartiteGraph) -> String {
        let canon = self.canonicalize(graph);
        let mut s = String::new();
        for &v in &canon.kappa {
            s.push_str(&format!("{v},"));
        }
        s.push_str(&format!("|{};", quantize(canon.lambda)));
        for (&(v, w), mat) in &canon.blocks {
            s.push_str(&format!("({v},{w})["));
            for c in mat.iter() {
                s.push_str(&format!("{}:{};", quantize(c.re), quantize(c.im)));
            }
            s.push(']');
        }
        s
    }

    /// Factor the op as graph part, non-scalar multiplication part, and a
    /// character of the cycle space (the residual per-block phases read on a
    /// fundamental cycle basis).
    pub fn decompose(&self, graph: &BipartiteGraph, spin: &SpinVector) -> Result<Decomposition> {
        let graph_part = AutomorphismOp::graph_auto(graph, spin, self.kappa.clone())?;
        // Peel one phase off each block; what is left is the inner part.
        let mut thetas: BTreeMap<(u32, u32), f64> = BTreeMap::new();
        let mut inner_blocks = BTreeMap::new();
        for (&pair, mat) in &self.blocks {
            let theta = first_nonzero_arg(mat);
            thetas.insert(pair, theta);
            let stripped = mat.map(|c| c * Complex64::from_polar(1.0, -theta));
            if !is_identity(&stripped) {
                inner_blocks.insert(pair, stripped);
            }
        }
        let inner_part = AutomorphismOp {
            kappa: (0..graph.vertex_count() as u32).collect(),
            lambda: 1.0,
            blocks: inner_blocks,
        };
        let basis = graph.cycle_basis()?;
        let mut character = Vec::with_capacity(basis.rank());
        for cycle in &basis.cycles {
            let mut angle = 0f64;
            for step in cycle {
                let edge = graph.edge(step.edge);
                let theta = thetas.get(&(edge.even, edge.odd)).copied().unwrap_or(0.0);
                angle += if step.from_even { theta } else { -theta };
            }
            character.push(Complex64::from_polar(1.0, angle));
        }
        Ok(Decomposition {
            graph_part,
            inner_part,
            character,
            basis,
        })
    }
}

/// Result of `AutomorphismOp::decompose`.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub graph_part: AutomorphismOp,
    pub inner_part: AutomorphismOp,
    pub character: Vec<Complex64>,
    pub basis: CycleBasis,
}

impl Decomposition {
    /// Reassemble an op with the same adjoint action as the original.
    pub fn recompose(&self, graph: &BipartiteGraph) -> Result<AutomorphismOp> {
        let scalar = AutomorphismOp::scalar_op_from_character(graph, &self.basis, &self.character)?;
        Ok(self
            .graph_part
            .compose(graph, &self.inner_part.compose(graph, &scalar)))
    }
}

fn validate_graph_perm(graph: &BipartiteGraph, kappa: &[u32]) -> Result<()> {
    let n = graph.vertex_count();
    if kappa.len() != n {
        return Err(Error::NotAnAutomorphism(format!(
            "permutation length {} does not match vertex count {n}",
            kappa.len()
        )));
    }
    let mut seen = vec![false; n];
    for (i, &v) in kappa.iter().enumerate() {
        if v as usize >= n || seen[v as usize] {
            return Err(Error::NotAnAutomorphism("not a bijection".into()));
        }
        seen[v as usize] = true;
        if graph.parity(i as u32) != graph.parity(v) {
            return Err(Error::NotAnAutomorphism(format!(
                "parity of `{}` is not preserved",
                graph.id(i as u32)
            )));
        }
    }
    for &v in graph.even_vertices() {
        for &w in graph.odd_vertices() {
            let before = graph.connection_count(v, w);
            let after = graph.connection_count(kappa[v as usize], kappa[w as usize]);
            if before != after {
                return Err(Error::NotAnAutomorphism(format!(
                    "connection count at ({}, {}) changes from {before} to {after}",
                    graph.id(v),
                    graph.id(w)
                )));
            }
        }
    }
    Ok(())
}

fn spin_ratio(graph: &BipartiteGraph, spin: &SpinVector, kappa: &[u32]) -> Result<f64> {
    let lambda = spin.mu(kappa[0]) / spin.mu(0);
    for v in 0..graph.vertex_count() as u32 {
        let ratio = spin.mu(kappa[v as usize]) / spin.mu(v);
        if (ratio - lambda).abs() > 1e-9 * lambda.max(1.0) {
            return Err(Error::NotAnAutomorphism(format!(
                "spin ratio varies: {lambda} at `{}` vs {ratio} at `{}`",
                graph.id(0),
                graph.id(v)
            )));
        }
    }
    Ok(lambda)
}

fn is_identity(mat: &Block) -> bool {
    let n = mat.nrows();
    (mat - Block::identity(n, n)).iter().all(|c| c.norm() < GAUGE_TOL)
}

fn first_nonzero_arg(mat: &Block) -> f64 {
    // Row-major scan for determinism.
    for i in 0..mat.nrows() {
        for j in 0..mat.ncols() {
            if mat[(i, j)].norm() > GAUGE_TOL {
                return mat[(i, j)].arg();
            }
        }
    }
    0.0
}

fn quantize(x: f64) -> i64 {
    (x / 1e-9).round() as i64
}

/// Which part of the edge-phase torus to adjoin when taking fixed points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TorusMode {
    #[default]
    None,
    /// All scalar multiplication operators (one phase per adjacent pair).
    BlockScalar,
    /// The full diagonal torus (one phase per edge).
    EdgeDiagonal,
}

/// A finite set of ops closed under composition and inverse, optionally
/// extended by an edge-phase torus handled combinatorially.
#[derive(Debug, Clone)]
pub struct GroupAction {
    ops: Vec<AutomorphismOp>,
    pub torus: TorusMode,
}

impl GroupAction {
    pub fn trivial(graph: &BipartiteGraph) -> GroupAction {
        GroupAction {
            ops: vec![AutomorphismOp::identity(graph)],
            torus: TorusMode::None,
        }
    }

    /// Close the generators under composition, up to `bound` elements.
    pub fn closure(
        graph: &BipartiteGraph,
        generators: Vec<AutomorphismOp>,
        bound: usize,
    ) -> Result<GroupAction> {
        let identity = AutomorphismOp::identity(graph);
        let mut ops = vec![identity.clone()];
        let mut keys: HashMap<String, usize> = HashMap::new();
        keys.insert(identity.fingerprint(graph), 0);
        let gens: Vec<AutomorphismOp> = generators
            .iter()
            .map(|g| g.canonicalize(graph))
            .collect();
        let mut frontier: Vec<usize> = vec![0];
        while let Some(i) = frontier.pop() {
            let base = ops[i].clone();
            for g in &gens {
                let next = g.compose(graph, &base).canonicalize(graph);
                let fp = next.fingerprint(graph);
                if !keys.contains_key(&fp) {
                    if ops.len() >= bound {
                        return Err(Error::ClosureBoundExceeded { bound });
                    }
                    keys.insert(fp, ops.len());
                    frontier.push(ops.len());
                    ops.push(next);
                }
            }
        }
        Ok(GroupAction {
            ops,
            torus: TorusMode::None,
        })
    }

    pub fn with_torus(mut self, mode: TorusMode) -> GroupAction {
        self.torus = mode;
        self
    }

    pub fn ops(&self) -> &[AutomorphismOp] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn is_pure_permutation(&self) -> bool {
        self.ops.iter().all(|op| op.is_pure_permutation())
    }

    pub fn is_monomial(&self) -> bool {
        self.ops.iter().all(|op| op.is_monomial())
    }

    /// Check closure under composition and inverse (pairwise products stay
    /// in the set).
    pub fn verify_closed(&self, graph: &BipartiteGraph) -> Result<()> {
        let keys: std::collections::HashSet<String> = self
            .ops
            .iter()
            .map(|op| op.fingerprint(graph))
            .collect();
        for a in &self.ops {
            let inv = a.inverse().canonicalize(graph);
            if !keys.contains(&inv.fingerprint(graph)) {
                return Err(Error::GroupNotClosed("inverse missing".into()));
            }
            for b in &self.ops {
                let ab = a.compose(graph, b).canonicalize(graph);
                if !keys.contains(&ab.fingerprint(graph)) {
                    return Err(Error::GroupNotClosed(format!(
                        "product of two elements escapes the set ({} elements)",
                        self.ops.len()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Orbit count of the permutation parts on the vertices of one parity.
    pub fn vertex_orbit_count(&self, graph: &BipartiteGraph, parity: Parity) -> usize {
        let vertices = graph.vertices_of(parity);
        let mut seen: std::collections::HashSet<u32> = std::collections::HashSet::new();
        let mut orbits = 0;
        for &v in vertices {
            if seen.contains(&v) {
                continue;
            }
            orbits += 1;
            let mut stack = vec![v];
            seen.insert(v);
            while let Some(u) = stack.pop() {
                for op in &self.ops {
                    let img = op.kappa()[u as usize];
                    if seen.insert(img) {
                        stack.push(img);
                    }
                }
            }
        }
        orbits
    }
}

/// All parity-preserving vertex permutations that preserve connection counts
/// and scale the spin by a constant, found by backtracking with degree and
/// spin pruning.
pub fn find_graph_autos(graph: &BipartiteGraph, spin: &SpinVector) -> Vec<Vec<u32>> {
    let n = graph.vertex_count();
    if n == 0 {
        return vec![Vec::new()];
    }
    // Candidate images must match parity, degree and spin value (finite
    // graphs force the scale to be 1).
    let mut candidates: Vec<Vec<u32>> = Vec::with_capacity(n);
    for v in 0..n as u32 {
        let list = (0..n as u32)
            .filter(|&w| {
                graph.parity(v) == graph.parity(w)
                    && graph.degree(v) == graph.degree(w)
                    && (spin.mu(v) - spin.mu(w)).abs() <= 1e-9 * spin.mu(v).max(1.0)
            })
            .collect();
        candidates.push(list);
    }
    let mut out = Vec::new();
    let mut assignment: Vec<Option<u32>> = vec![None; n];
    let mut used = vec![false; n];
    fn backtrack(
        graph: &BipartiteGraph,
        candidates: &[Vec<u32>],
        assignment: &mut Vec<Option<u32>>,
        used: &mut Vec<bool>,
        depth: usize,
        out: &mut Vec<Vec<u32>>,
    ) {
        let n = assignment.len();
        if depth == n {
            out.push(assignment.iter().map(|x| x.unwrap()).collect());
            return;
        }
        let v = depth as u32;
        'next: for &img in &candidates[depth] {
            if used[img as usize] {
                continue;
            }
            // Connection counts to every already-assigned opposite-parity
            // vertex must be preserved.
            for u in 0..depth as u32 {
                if graph.parity(u) == graph.parity(v) {
                    continue;
                }
                let target = assignment[u as usize].unwrap();
                let (a, b) = if graph.parity(v) == Parity::Even {
                    ((v, u), (img, target))
                } else {
                    ((u, v), (target, img))
                };
                if graph.connection_count(a.0, a.1) != graph.connection_count(b.0, b.1) {
                    continue 'next;
                }
            }
            assignment[depth] = Some(img);
            used[img as usize] = true;
            backtrack(graph, candidates, assignment, used, depth + 1, out);
            assignment[depth] = None;
            used[img as usize] = false;
        }
    }
    backtrack(graph, &candidates, &mut assignment, &mut used, 0, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::graph::Sign;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cube() -> Bgpa {
        let (g, s) = catalog::cube_graph();
        Bgpa::new(g, s)
    }

    #[test]
    fn cube_has_24_graph_autos() {
        let pa = cube();
        let autos = find_graph_autos(pa.graph(), pa.spin());
        assert_eq!(autos.len(), 24);
    }

    #[test]
    fn star_autos_are_leaf_permutations() {
        let (g, s) = catalog::star_graph(4);
        assert_eq!(find_graph_autos(&g, &s).len(), 24);
    }

    #[test]
    fn distinct_spins_break_symmetry() {
        let g = crate::graph::GraphSpec::new()
            .vertex("a", Parity::Even)
            .vertex("b", Parity::Odd)
            .vertex("c", Parity::Even)
            .edge("a", "b")
            .edge("b", "c")
            .build()
            .unwrap();
        let spin = SpinVector::from_values(vec![1.0, 1.3, 2.0]);
        assert_eq!(find_graph_autos(&g, &spin).len(), 1);
    }

    #[test]
    fn closure_orders_on_the_cube() {
        assert_eq!(catalog::cube_z2z2().unwrap().len(), 4);
        assert_eq!(catalog::cube_a4().unwrap().len(), 12);
        assert_eq!(catalog::cube_s4().unwrap().len(), 24);
        catalog::cube_s4()
            .unwrap()
            .verify_closed(cube().graph())
            .unwrap();
    }

    #[test]
    fn closure_bound_trips_on_infinite_order() {
        let (g, _) = catalog::cube_graph();
        let basis = g.cycle_basis().unwrap();
        let mut chi = vec![Complex64::new(1.0, 0.0); basis.rank()];
        chi[0] = Complex64::from_polar(1.0, 2.0f64.sqrt());
        let op = AutomorphismOp::scalar_op_from_character(&g, &basis, &chi).unwrap();
        match GroupAction::closure(&g, vec![op], 64) {
            Err(Error::ClosureBoundExceeded { bound }) => assert_eq!(bound, 64),
            other => panic!("expected bound exceeded, got {:?}", other.map(|g| g.len())),
        }
    }

    #[test]
    fn graph_auto_op_acts_by_loop_relabelling() {
        let pa = cube();
        let group = catalog::cube_s4().unwrap();
        let op = &group.ops()[1];
        let paths = pa.paths(2, Sign::Plus);
        let loops = pa.loops(2, Sign::Plus);
        let l = loops.loop_ref(&paths, 5);
        let (image, phase) = op.map_loop(pa.graph(), &l).unwrap();
        assert_eq!(phase, Complex64::new(1.0, 0.0));
        let u = pa.loop_unit(&l).unwrap();
        let applied = op.apply(&pa, &u);
        let expected = pa.loop_unit(&image).unwrap();
        assert!(applied.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn ops_commute_with_the_generating_tangles() {
        let pa = cube();
        let group = catalog::cube_s4().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let op = &group.ops()[7];
        for level in 1..3usize {
            let a = pa.random_element(level, Sign::Plus, &mut rng);
            let b = pa.random_element(level, Sign::Plus, &mut rng);
            // Algebra homomorphism.
            let lhs = op.apply(&pa, &a.multiply(&b).unwrap());
            let rhs = op.apply(&pa, &a).multiply(&op.apply(&pa, &b)).unwrap();
            assert!(lhs.max_abs_diff(&rhs) < 1e-10);
            // Star preservation.
            assert!(op
                .apply(&pa, &a.adjoint())
                .max_abs_diff(&op.apply(&pa, &a).adjoint())
                < 1e-10);
            // Embeddings.
            assert!(op
                .apply(&pa, &pa.left_embed(&a))
                .max_abs_diff(&pa.left_embed(&op.apply(&pa, &a)))
                < 1e-10);
            assert!(op
                .apply(&pa, &pa.right_embed(&a))
                .max_abs_diff(&pa.right_embed(&op.apply(&pa, &a)))
                < 1e-10);
            // Caps.
            assert!(op
                .apply(&pa, &pa.left_cap(&a).unwrap())
                .max_abs_diff(&pa.left_cap(&op.apply(&pa, &a)).unwrap())
                < 1e-10);
            assert!(op
                .apply(&pa, &pa.right_cap(&a).unwrap())
                .max_abs_diff(&pa.right_cap(&op.apply(&pa, &a)).unwrap())
                < 1e-10);
        }
        // TL generators are fixed.
        for sign in [Sign::Plus, Sign::Minus] {
            let tl = pa.tl_generator(sign).element;
            assert!(op.apply(&pa, &tl).max_abs_diff(&tl) < 1e-10);
        }
    }

    #[test]
    fn mult_op_on_multiedge_is_block_conjugation() {
        let (g, s) = catalog::multiedge_graph(3);
        let pa = Bgpa::new(g, s);
        // A non-monomial unitary: a real rotation mixing two parallel edges.
        let mut mat = Block::identity(3, 3);
        let (c, sn) = (0.6f64, 0.8f64);
        mat[(0, 0)] = Complex64::new(c, 0.0);
        mat[(0, 1)] = Complex64::new(-sn, 0.0);
        mat[(1, 0)] = Complex64::new(sn, 0.0);
        mat[(1, 1)] = Complex64::new(c, 0.0);
        let mut blocks = BTreeMap::new();
        blocks.insert((0u32, 1u32), mat.clone());
        let op = AutomorphismOp::mult_op(pa.graph(), blocks).unwrap();
        assert!(!op.is_monomial());
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let a = pa.random_element(1, Sign::Plus, &mut rng);
        let applied = op.apply(&pa, &a);
        // V_1^+ of the m-fold edge is the full matrix algebra on the edge
        // space; the action is conjugation by the block.
        let direct = &mat * a.blocks().get(&(0, 1)).unwrap() * mat.adjoint();
        assert!((applied.blocks().get(&(0, 1)).unwrap() - direct)
            .iter()
            .all(|z| z.norm() < 1e-12));
        // The tangle contract holds for non-monomial ops too.
        let b = pa.random_element(1, Sign::Plus, &mut rng);
        let lhs = op.apply(&pa, &a.multiply(&b).unwrap());
        let rhs = op.apply(&pa, &a).multiply(&op.apply(&pa, &b)).unwrap();
        assert!(lhs.max_abs_diff(&rhs) < 1e-10);
        let tl = pa.tl_generator(Sign::Plus).element;
        assert!(op.apply(&pa, &tl).max_abs_diff(&tl) < 1e-10);
        // Half rotation commutes with multiplication operators.
        let rot = pa.half_rotation(&op.apply(&pa, &a)).unwrap();
        let rot2 = op.apply(&pa, &pa.half_rotation(&a).unwrap());
        assert!(rot.max_abs_diff(&rot2) < 1e-10);
    }

    #[test]
    fn mult_op_rejects_non_unitary_blocks() {
        let (g, _) = catalog::multiedge_graph(2);
        let mut blocks = BTreeMap::new();
        blocks.insert((0u32, 1u32), Block::identity(2, 2).map(|c| c * 2.0));
        assert!(matches!(
            AutomorphismOp::mult_op(&g, blocks),
            Err(Error::NonUnitaryBlock { .. })
        ));
    }

    #[test]
    fn scalar_ops_realize_characters_and_act_trivially_on_level_one() {
        let pa = cube();
        let basis = pa.graph().cycle_basis().unwrap();
        let mut chi = vec![Complex64::new(1.0, 0.0); basis.rank()];
        chi[2] = Complex64::new(-1.0, 0.0);
        let op = AutomorphismOp::scalar_op_from_character(pa.graph(), &basis, &chi).unwrap();
        // The loop-phase character matches chi on every basis cycle.
        for (k, cycle) in basis.cycles.iter().enumerate() {
            let mut phase = Complex64::new(1.0, 0.0);
            for step in cycle {
                let images = op.edge_action(pa.graph(), step.edge, step.from_even);
                assert_eq!(images.len(), 1);
                phase *= images[0].1;
            }
            assert!((phase - chi[k]).norm() < 1e-12, "cycle {k}");
        }
        // Scalar ops act trivially on the level-one spaces of a simple
        // graph.
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let a = pa.random_element(1, Sign::Plus, &mut rng);
        assert!(op.apply(&pa, &a).max_abs_diff(&a) < 1e-12);
        // Trivial character gives the identity op.
        let trivial = AutomorphismOp::scalar_op_from_character(
            pa.graph(),
            &basis,
            &vec![Complex64::new(1.0, 0.0); basis.rank()],
        )
        .unwrap();
        assert!(trivial.is_pure_permutation() && trivial.is_vertex_trivial());
        // A non-unit character is rejected.
        let mut bad = vec![Complex64::new(1.0, 0.0); basis.rank()];
        bad[0] = Complex64::new(0.5, 0.0);
        assert!(matches!(
            AutomorphismOp::scalar_op_from_character(pa.graph(), &basis, &bad),
            Err(Error::NonUnitCharacter(0))
        ));
    }

    #[test]
    fn conjugating_a_mult_op_by_a_graph_auto_transports_blocks() {
        let pa = cube();
        let group = catalog::cube_s4().unwrap();
        let auto = &group.ops()[3];
        let basis = pa.graph().cycle_basis().unwrap();
        let mut chi = vec![Complex64::new(1.0, 0.0); basis.rank()];
        chi[0] = Complex64::new(0.0, 1.0);
        let mult = AutomorphismOp::scalar_op_from_character(pa.graph(), &basis, &chi).unwrap();
        let conj = auto
            .compose(pa.graph(), &mult)
            .compose(pa.graph(), &auto.inverse());
        assert!(conj.is_vertex_trivial());
        // Blocks moved to the transported pairs.
        for (&(v, w), mat) in mult.blocks() {
            let target = (
                auto.kappa()[v as usize],
                auto.kappa()[w as usize],
            );
            let moved = conj.blocks().get(&target).expect("transported block");
            assert!((moved - mat).iter().all(|z| z.norm() < 1e-12));
        }
    }

    #[test]
    fn decompose_recompose_identity_on_catalog_ops() {
        let pa = cube();
        let group = catalog::cube_s4().unwrap();
        let basis = pa.graph().cycle_basis().unwrap();
        let mut chi = vec![Complex64::new(1.0, 0.0); basis.rank()];
        chi[1] = Complex64::new(-1.0, 0.0);
        let scalar = AutomorphismOp::scalar_op_from_character(pa.graph(), &basis, &chi).unwrap();
        let composite = group.ops()[5].compose(pa.graph(), &scalar);
        for op in [&group.ops()[5], &composite, &AutomorphismOp::identity(pa.graph())] {
            let decomp = op.decompose(pa.graph(), pa.spin()).unwrap();
            let rebuilt = decomp.recompose(pa.graph()).unwrap();
            // Same action on all loop units up to level 2.
            for level in 0..3usize {
                let paths = pa.paths(level, Sign::Plus);
                let loops = pa.loops(level, Sign::Plus);
                for i in 0..loops.len() as u32 {
                    let u = pa.loop_unit(&loops.loop_ref(&paths, i)).unwrap();
                    let a = op.apply(&pa, &u);
                    let b = rebuilt.apply(&pa, &u);
                    assert!(a.max_abs_diff(&b) < 1e-10);
                }
            }
        }
        // A pure graph op decomposes as itself with trivial parts.
        let decomp = group.ops()[5].decompose(pa.graph(), pa.spin()).unwrap();
        assert!(decomp.inner_part.is_pure_permutation());
        assert!(decomp.character.iter().all(|c| (c - Complex64::new(1.0, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn vertex_orbit_counts() {
        let pa = cube();
        let s4 = catalog::cube_s4().unwrap();
        assert_eq!(s4.vertex_orbit_count(pa.graph(), Parity::Even), 1);
        assert_eq!(s4.vertex_orbit_count(pa.graph(), Parity::Odd), 1);
        let trivial = GroupAction::trivial(pa.graph());
        assert_eq!(trivial.vertex_orbit_count(pa.graph(), Parity::Even), 4);
    }
}
