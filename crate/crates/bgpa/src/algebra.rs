//! Box spaces of a bipartite graph planar algebra.
//!
//! Elements of the level-n spaces are functions on loops, stored as block
//! matrices over the path basis: the block at (v, w) collects the paths from
//! v to w, and only equal-endpoint path pairs can carry a nonzero entry.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, Parity, Sign, SpinVector};
use crate::paths::{concat, LoopRef, LoopTable, Path, PathTable};

pub type Block = DMatrix<Complex64>;
pub type BlockKey = (u32, u32);

/// The planar algebra of a bipartite graph with a spin vector: owns the
/// graph data and caches path/loop tables per level and sign.  All
/// operations are pure; the value is safe to share across threads.
pub struct Bgpa {
    graph: Arc<BipartiteGraph>,
    spin: SpinVector,
    tol: f64,
    paths: Mutex<HashMap<(usize, Sign), Arc<PathTable>>>,
    loops: Mutex<HashMap<(usize, Sign), Arc<LoopTable>>>,
}

impl Bgpa {
    pub fn new(graph: BipartiteGraph, spin: SpinVector) -> Bgpa {
        Bgpa {
            graph: Arc::new(graph),
            spin,
            tol: 1e-9,
            paths: Mutex::new(HashMap::new()),
            loops: Mutex::new(HashMap::new()),
        }
    }

    pub fn with_tolerance(mut self, tol: f64) -> Bgpa {
        self.tol = tol;
        self
    }

    pub fn graph(&self) -> &BipartiteGraph {
        &self.graph
    }

    pub fn spin(&self) -> &SpinVector {
        &self.spin
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn modulus(&self) -> Result<f64> {
        self.spin
            .modulus
            .ok_or_else(|| Error::NoModulus("construct the spin with a modulus first".into()))
    }

    pub fn mu(&self, v: u32) -> f64 {
        self.spin.mu(v)
    }

    pub fn paths(&self, level: usize, sign: Sign) -> Arc<PathTable> {
        let mut cache = self.paths.lock().unwrap();
        cache
            .entry((level, sign))
            .or_insert_with(|| Arc::new(PathTable::build(&self.graph, level, sign)))
            .clone()
    }

    pub fn loops(&self, level: usize, sign: Sign) -> Arc<LoopTable> {
        let mut cache = self.loops.lock().unwrap();
        if let Some(table) = cache.get(&(level, sign)) {
            return table.clone();
        }
        let paths = self.paths(level, sign);
        cache
            .entry((level, sign))
            .or_insert_with(|| Arc::new(LoopTable::build(&paths)))
            .clone()
    }

    pub fn zero(&self, level: usize, sign: Sign) -> AlgebraElement {
        AlgebraElement {
            level,
            sign,
            blocks: BTreeMap::new(),
        }
    }

    pub fn identity(&self, level: usize, sign: Sign) -> AlgebraElement {
        let table = self.paths(level, sign);
        let mut blocks = BTreeMap::new();
        for (&key, members) in table.blocks() {
            blocks.insert(key, Block::identity(members.len(), members.len()));
        }
        AlgebraElement {
            level,
            sign,
            blocks,
        }
    }

    /// The matrix unit supported on a single loop.
    pub fn loop_unit(&self, l: &LoopRef) -> Result<AlgebraElement> {
        let sign = l.pi.sign(&self.graph);
        let table = self.paths(l.level(), sign);
        let pi = table
            .lookup(&l.pi)
            .ok_or_else(|| Error::LoopNotOnGraph("pi path not found".into()))?;
        let eps = table
            .lookup(&l.eps)
            .ok_or_else(|| Error::LoopNotOnGraph("eps path not found".into()))?;
        let (key, row) = table.position(pi);
        let (key2, col) = table.position(eps);
        if key != key2 {
            return Err(Error::LoopNotOnGraph("paths do not share endpoints".into()));
        }
        let size = table.block(key).unwrap().len();
        let mut mat = Block::zeros(size, size);
        mat[(row, col)] = Complex64::new(1.0, 0.0);
        let mut blocks = BTreeMap::new();
        blocks.insert(key, mat);
        Ok(AlgebraElement {
            level: l.level(),
            sign,
            blocks,
        })
    }

    /// Dense random element (entries uniform in the complex unit square).
    pub fn random_element<R: Rng>(&self, level: usize, sign: Sign, rng: &mut R) -> AlgebraElement {
        let table = self.paths(level, sign);
        let mut blocks = BTreeMap::new();
        for (&key, members) in table.blocks() {
            let n = members.len();
            let mat = Block::from_fn(n, n, |_, _| {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            blocks.insert(key, mat);
        }
        AlgebraElement {
            level,
            sign,
            blocks,
        }
    }

    /// Left embedding: prepend one strand.  Level goes up by one and the
    /// sign flips.
    pub fn left_embed(&self, a: &AlgebraElement) -> AlgebraElement {
        let out_sign = a.sign.flip();
        let out_table = self.paths(a.level + 1, out_sign);
        let in_table = self.paths(a.level, a.sign);
        let mut out = self.zero(a.level + 1, out_sign);
        for (&(v, w), mat) in &a.blocks {
            let members = in_table.block((v, w)).unwrap();
            for &f in self.graph.incident_edges(v) {
                let u = self.graph.other_end(f, v);
                let prefix = Path::new(&self.graph, u, vec![f]).unwrap();
                let positions: Vec<usize> = members
                    .iter()
                    .map(|&p| {
                        let composed = concat(&self.graph, &prefix, in_table.path(p)).unwrap();
                        let idx = out_table.lookup(&composed).unwrap();
                        out_table.position(idx).1
                    })
                    .collect();
                let out_key = (u, w);
                let size = out_table.block(out_key).unwrap().len();
                let block = out
                    .blocks
                    .entry(out_key)
                    .or_insert_with(|| Block::zeros(size, size));
                for (i, &oi) in positions.iter().enumerate() {
                    for (j, &oj) in positions.iter().enumerate() {
                        block[(oi, oj)] += mat[(i, j)];
                    }
                }
            }
        }
        out
    }

    /// Right embedding: append one strand.  Level goes up by one, sign is
    /// preserved.
    pub fn right_embed(&self, a: &AlgebraElement) -> AlgebraElement {
        let out_table = self.paths(a.level + 1, a.sign);
        let in_table = self.paths(a.level, a.sign);
        let mut out = self.zero(a.level + 1, a.sign);
        for (&(v, w), mat) in &a.blocks {
            let members = in_table.block((v, w)).unwrap();
            for &f in self.graph.incident_edges(w) {
                let u = self.graph.other_end(f, w);
                let positions: Vec<usize> = members
                    .iter()
                    .map(|&p| {
                        let extended = in_table.path(p).extended(f);
                        let idx = out_table.lookup(&extended).unwrap();
                        out_table.position(idx).1
                    })
                    .collect();
                let out_key = (v, u);
                let size = out_table.block(out_key).unwrap().len();
                let block = out
                    .blocks
                    .entry(out_key)
                    .or_insert_with(|| Block::zeros(size, size));
                for (i, &oi) in positions.iter().enumerate() {
                    for (j, &oj) in positions.iter().enumerate() {
                        block[(oi, oj)] += mat[(i, j)];
                    }
                }
            }
        }
        out
    }

    /// Close the rightmost strand: entries with a shared final traversal
    /// survive, weighted by mu(closed end)^2 / mu(new end)^2.
    pub fn right_cap(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        if a.level == 0 {
            return Err(Error::LevelTooSmall {
                required: 1,
                got: 0,
            });
        }
        let in_table = self.paths(a.level, a.sign);
        let out_table = self.paths(a.level - 1, a.sign);
        let mut out = self.zero(a.level - 1, a.sign);
        for (&(v, w), mat) in &a.blocks {
            let members = in_table.block((v, w)).unwrap();
            let stripped: Vec<(u32, u32, usize)> = members
                .iter()
                .map(|&p| {
                    let path = in_table.path(p);
                    let last = *path.edges().last().unwrap();
                    let short = path.truncated(1);
                    let end = short.end(&self.graph);
                    let idx = out_table.lookup(&short).unwrap();
                    (last, end, out_table.position(idx).1)
                })
                .collect();
            for (i, &(ei, endi, oi)) in stripped.iter().enumerate() {
                for (j, &(ej, _endj, oj)) in stripped.iter().enumerate() {
                    if ei != ej {
                        continue;
                    }
                    let value = mat[(i, j)];
                    if value == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let weight = self.mu(w).powi(2) / self.mu(endi).powi(2);
                    let out_key = (v, endi);
                    let size = out_table.block(out_key).unwrap().len();
                    let block = out
                        .blocks
                        .entry(out_key)
                        .or_insert_with(|| Block::zeros(size, size));
                    block[(oi, oj)] += value * weight;
                }
            }
        }
        Ok(out)
    }

    /// Close the leftmost strand: entries with a shared first traversal
    /// survive, weighted by mu(closed end)^2 / mu(new start)^2.  The sign
    /// flips.
    pub fn left_cap(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        if a.level == 0 {
            return Err(Error::LevelTooSmall {
                required: 1,
                got: 0,
            });
        }
        let in_table = self.paths(a.level, a.sign);
        let out_sign = a.sign.flip();
        let out_table = self.paths(a.level - 1, out_sign);
        let mut out = self.zero(a.level - 1, out_sign);
        for (&(v, w), mat) in &a.blocks {
            let members = in_table.block((v, w)).unwrap();
            let stripped: Vec<(u32, u32, usize)> = members
                .iter()
                .map(|&p| {
                    let path = in_table.path(p);
                    let first = path.edges()[0];
                    let short = path.suffix(&self.graph, 1);
                    let start = short.start();
                    let idx = out_table.lookup(&short).unwrap();
                    (first, start, out_table.position(idx).1)
                })
                .collect();
            for (i, &(ei, starti, oi)) in stripped.iter().enumerate() {
                for (j, &(ej, _startj, oj)) in stripped.iter().enumerate() {
                    if ei != ej {
                        continue;
                    }
                    let value = mat[(i, j)];
                    if value == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let weight = self.mu(v).powi(2) / self.mu(starti).powi(2);
                    let out_key = (starti, w);
                    let size = out_table.block(out_key).unwrap().len();
                    let block = out
                        .blocks
                        .entry(out_key)
                        .or_insert_with(|| Block::zeros(size, size));
                    block[(oi, oj)] += value * weight;
                }
            }
        }
        Ok(out)
    }

    /// Box-space-valued sesquilinear form: the right capping of b* a down to
    /// level zero.
    pub fn inner_form(&self, a: &AlgebraElement, b: &AlgebraElement) -> Result<ZeroBoxElement> {
        let mut x = b.adjoint().multiply(a)?;
        for _ in 0..a.level {
            x = self.right_cap(&x)?;
        }
        self.to_zero_box(&x)
    }

    /// Scalarized form: the partition-function trace of `inner_form`,
    /// normalized to total mass one on the parity class.  Equals the direct
    /// weighted entry sum, which is how it is computed.
    pub fn form(&self, a: &AlgebraElement, b: &AlgebraElement) -> Result<Complex64> {
        if a.level != b.level {
            return Err(Error::LevelMismatch {
                left: a.level,
                right: b.level,
            });
        }
        if a.sign != b.sign {
            return Err(Error::SignMismatch);
        }
        let mass = self
            .spin
            .quartic_mass(&self.graph, a.sign.start_parity());
        let mut acc = Complex64::new(0.0, 0.0);
        for (key, mat_a) in &a.blocks {
            if let Some(mat_b) = b.blocks.get(key) {
                let weight = self.mu(key.0).powi(2) * self.mu(key.1).powi(2);
                let mut dot = Complex64::new(0.0, 0.0);
                for (x, y) in mat_a.iter().zip(mat_b.iter()) {
                    dot += y.conj() * x;
                }
                acc += dot * weight;
            }
        }
        Ok(acc / mass)
    }

    pub fn norm(&self, a: &AlgebraElement) -> f64 {
        self.form(a, a).map(|v| v.re.max(0.0).sqrt()).unwrap_or(0.0)
    }

    /// Hermitian matrix of pairwise forms.
    pub fn gram_matrix(&self, basis: &[AlgebraElement]) -> Result<DMatrix<Complex64>> {
        let n = basis.len();
        let mut g = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = self.form(&basis[i], &basis[j])?;
                g[(i, j)] = v;
                g[(j, i)] = v.conj();
            }
        }
        Ok(g)
    }

    pub fn to_zero_box(&self, a: &AlgebraElement) -> Result<ZeroBoxElement> {
        if a.level != 0 {
            return Err(Error::LevelMismatch {
                left: a.level,
                right: 0,
            });
        }
        let mut coeffs = BTreeMap::new();
        for (&(v, w), mat) in &a.blocks {
            debug_assert_eq!(v, w);
            let value = mat[(0, 0)];
            if value != Complex64::new(0.0, 0.0) {
                coeffs.insert(v, value);
            }
        }
        Ok(ZeroBoxElement {
            sign: a.sign,
            coeffs,
        })
    }

    pub fn from_zero_box(&self, z: &ZeroBoxElement) -> AlgebraElement {
        let mut blocks = BTreeMap::new();
        for (&v, &c) in &z.coeffs {
            let mut mat = Block::zeros(1, 1);
            mat[(0, 0)] = c;
            blocks.insert((v, v), mat);
        }
        AlgebraElement {
            level: 0,
            sign: z.sign,
            blocks,
        }
    }

    /// Partition-function trace on the zero-box space, normalized so the
    /// identity maps to 1.
    pub fn scalarize(&self, z: &ZeroBoxElement) -> Complex64 {
        let parity = z.sign.start_parity();
        let mass = self.spin.quartic_mass(&self.graph, parity);
        let mut acc = Complex64::new(0.0, 0.0);
        for (&v, &c) in &z.coeffs {
            acc += c * self.mu(v).powi(4);
        }
        acc / mass
    }

    /// If the zero-box element is a multiple of the identity (within `tol`),
    /// return the scalar.
    pub fn as_scalar(&self, z: &ZeroBoxElement, tol: f64) -> Option<Complex64> {
        let class = self.graph.vertices_of(z.sign.start_parity());
        let first = z.coeffs.get(&class[0]).copied().unwrap_or_default();
        for &v in class {
            let c = z.coeffs.get(&v).copied().unwrap_or_default();
            if (c - first).norm() > tol * (1.0 + first.norm()) {
                return None;
            }
        }
        Some(first)
    }
}

/// An element of a level-n box space, block by block over the path basis.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    level: usize,
    sign: Sign,
    blocks: BTreeMap<BlockKey, Block>,
}

impl AlgebraElement {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn blocks(&self) -> &BTreeMap<BlockKey, Block> {
        &self.blocks
    }

    pub fn blocks_mut(&mut self) -> &mut BTreeMap<BlockKey, Block> {
        &mut self.blocks
    }

    pub fn from_blocks(level: usize, sign: Sign, blocks: BTreeMap<BlockKey, Block>) -> Self {
        AlgebraElement {
            level,
            sign,
            blocks,
        }
    }

    pub fn entry(&self, table: &PathTable, pi: u32, eps: u32) -> Complex64 {
        let (key, row) = table.position(pi);
        let (key2, col) = table.position(eps);
        if key != key2 {
            return Complex64::new(0.0, 0.0);
        }
        self.blocks
            .get(&key)
            .map(|m| m[(row, col)])
            .unwrap_or_default()
    }

    pub fn set_entry(&mut self, table: &PathTable, pi: u32, eps: u32, value: Complex64) {
        let (key, row) = table.position(pi);
        let (key2, col) = table.position(eps);
        assert_eq!(key, key2, "entry must respect the endpoint constraint");
        let size = table.block(key).unwrap().len();
        let block = self
            .blocks
            .entry(key)
            .or_insert_with(|| Block::zeros(size, size));
        block[(row, col)] = value;
    }

    pub fn multiply(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        if self.level != other.level {
            return Err(Error::LevelMismatch {
                left: self.level,
                right: other.level,
            });
        }
        if self.sign != other.sign {
            return Err(Error::SignMismatch);
        }
        let mut blocks = BTreeMap::new();
        for (key, a) in &self.blocks {
            if let Some(b) = other.blocks.get(key) {
                blocks.insert(*key, a * b);
            }
        }
        Ok(AlgebraElement {
            level: self.level,
            sign: self.sign,
            blocks,
        })
    }

    /// Conjugate transpose in the path basis.
    pub fn adjoint(&self) -> AlgebraElement {
        let blocks = self
            .blocks
            .iter()
            .map(|(k, m)| (*k, m.adjoint()))
            .collect();
        AlgebraElement {
            level: self.level,
            sign: self.sign,
            blocks,
        }
    }

    pub fn scaled(&self, c: Complex64) -> AlgebraElement {
        let blocks = self.blocks.iter().map(|(k, m)| (*k, m * c)).collect();
        AlgebraElement {
            level: self.level,
            sign: self.sign,
            blocks,
        }
    }

    pub fn plus(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        if self.level != other.level {
            return Err(Error::LevelMismatch {
                left: self.level,
                right: other.level,
            });
        }
        if self.sign != other.sign {
            return Err(Error::SignMismatch);
        }
        let mut blocks = self.blocks.clone();
        for (key, m) in &other.blocks {
            blocks
                .entry(*key)
                .and_modify(|b| *b += m)
                .or_insert_with(|| m.clone());
        }
        Ok(AlgebraElement {
            level: self.level,
            sign: self.sign,
            blocks,
        })
    }

    pub fn minus(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.plus(&other.scaled(Complex64::new(-1.0, 0.0)))
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks
            .values()
            .flat_map(|m| m.iter())
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &AlgebraElement) -> f64 {
        match self.minus(other) {
            Ok(diff) => diff.max_abs(),
            Err(_) => f64::INFINITY,
        }
    }

    /// Hilbert-space trace of the element in its concrete representation.
    pub fn concrete_trace(&self) -> Complex64 {
        self.blocks
            .values()
            .map(|m| m.diagonal().iter().sum::<Complex64>())
            .sum()
    }

    /// Drop blocks whose entries are all below `tol` in magnitude.
    pub fn pruned(&self, tol: f64) -> AlgebraElement {
        let blocks = self
            .blocks
            .iter()
            .filter(|(_, m)| m.iter().any(|c| c.norm() > tol))
            .map(|(k, m)| (*k, m.clone()))
            .collect();
        AlgebraElement {
            level: self.level,
            sign: self.sign,
            blocks,
        }
    }

    /// Stable text dump: `(level, sign, [(pi, eps, re, im)])` with entries in
    /// block order.
    pub fn debug_lines(&self, bgpa: &Bgpa) -> String {
        let table = bgpa.paths(self.level, self.sign);
        let mut out = String::new();
        let sign = match self.sign {
            Sign::Plus => "+",
            Sign::Minus => "-",
        };
        writeln!(out, "level {} sign {}", self.level, sign).unwrap();
        for (&key, mat) in &self.blocks {
            let members = table.block(key).unwrap();
            for (i, &pi) in members.iter().enumerate() {
                for (j, &eps) in members.iter().enumerate() {
                    let c = mat[(i, j)];
                    if c.norm() == 0.0 {
                        continue;
                    }
                    let render = |p: &Path| {
                        let mut s = bgpa.graph().id(p.start()).to_string();
                        for &e in p.edges() {
                            s.push_str(&format!(" e{e}"));
                        }
                        s
                    };
                    writeln!(
                        out,
                        "({}, {}, {:.12e}, {:.12e})",
                        render(table.path(pi)),
                        render(table.path(eps)),
                        c.re,
                        c.im
                    )
                    .unwrap();
                }
            }
        }
        out
    }
}

/// An element of a zero-box space: one coefficient per vertex of the
/// matching parity.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroBoxElement {
    pub sign: Sign,
    pub coeffs: BTreeMap<u32, Complex64>,
}

impl ZeroBoxElement {
    pub fn vertex_projection(graph: &BipartiteGraph, v: u32) -> ZeroBoxElement {
        let sign = match graph.parity(v) {
            Parity::Even => Sign::Plus,
            Parity::Odd => Sign::Minus,
        };
        let mut coeffs = BTreeMap::new();
        coeffs.insert(v, Complex64::new(1.0, 0.0));
        ZeroBoxElement { sign, coeffs }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cube() -> Bgpa {
        let (g, s) = catalog::cube_graph();
        Bgpa::new(g, s)
    }

    #[test]
    fn matrix_unit_laws() {
        let pa = cube();
        let loops = pa.loops(1, Sign::Plus);
        let paths = pa.paths(1, Sign::Plus);
        let diag = loops.loop_ref(&paths, 0);
        let u = pa.loop_unit(&diag).unwrap();
        // Diagonal units are orthogonal projections.
        assert_eq!(u.multiply(&u).unwrap(), u);
        assert_eq!(u.adjoint(), u);
        let id = pa.identity(1, Sign::Plus);
        assert!(id.multiply(&u).unwrap().max_abs_diff(&u) < 1e-14);

        // On a multi-edge graph, off-diagonal units obey u u* = projection.
        let (g, s) = catalog::multiedge_graph(2);
        let pa2 = Bgpa::new(g, s);
        let paths2 = pa2.paths(1, Sign::Plus);
        let p = paths2.path(0).clone();
        let q = paths2.path(1).clone();
        let l = LoopRef::new(pa2.graph(), p.clone(), q).unwrap();
        let u = pa2.loop_unit(&l).unwrap();
        let proj = u.multiply(&u.adjoint()).unwrap();
        let expected = pa2.loop_unit(&LoopRef::diagonal(&p)).unwrap();
        assert!(proj.max_abs_diff(&expected) < 1e-14);
        // u(p,q) u(q,r): matrix unit composition law.
        assert!(u.multiply(&u).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn ring_axioms_on_random_elements() {
        let pa = cube();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for level in 0..3usize {
            let a = pa.random_element(level, Sign::Plus, &mut rng);
            let b = pa.random_element(level, Sign::Plus, &mut rng);
            let c = pa.random_element(level, Sign::Plus, &mut rng);
            let left = a.multiply(&b).unwrap().multiply(&c).unwrap();
            let right = a.multiply(&b.multiply(&c).unwrap()).unwrap();
            assert!(left.max_abs_diff(&right) < 1e-10);
            let dist = a.multiply(&b.plus(&c).unwrap()).unwrap();
            let split = a.multiply(&b).unwrap().plus(&a.multiply(&c).unwrap()).unwrap();
            assert!(dist.max_abs_diff(&split) < 1e-10);
            // Star-algebra law.
            let lhs = a.multiply(&b).unwrap().adjoint();
            let rhs = b.adjoint().multiply(&a.adjoint()).unwrap();
            assert!(lhs.max_abs_diff(&rhs) < 1e-10);
            // Antilinearity of the involution.
            let i = Complex64::new(0.0, 1.0);
            assert!(a.scaled(i).adjoint().max_abs_diff(&a.adjoint().scaled(-i)) < 1e-12);
        }
    }

    #[test]
    fn embeddings_are_unital_homomorphisms_and_commute() {
        let pa = cube();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let id1 = pa.identity(1, Sign::Plus);
        assert!(pa.left_embed(&id1).max_abs_diff(&pa.identity(2, Sign::Minus)) < 1e-14);
        assert!(pa.right_embed(&id1).max_abs_diff(&pa.identity(2, Sign::Plus)) < 1e-14);

        let a = pa.random_element(2, Sign::Plus, &mut rng);
        let b = pa.random_element(2, Sign::Plus, &mut rng);
        for embed in [Bgpa::left_embed, Bgpa::right_embed] {
            let lhs = embed(&pa, &a.multiply(&b).unwrap());
            let rhs = embed(&pa, &a).multiply(&embed(&pa, &b)).unwrap();
            assert!(lhs.max_abs_diff(&rhs) < 1e-10);
            let star = embed(&pa, &a.adjoint());
            assert!(star.max_abs_diff(&embed(&pa, &a).adjoint()) < 1e-12);
        }
        let lr = pa.left_embed(&pa.right_embed(&a));
        let rl = pa.right_embed(&pa.left_embed(&a));
        assert!(lr.max_abs_diff(&rl) < 1e-12);
    }

    #[test]
    fn right_embed_of_diagonal_unit_spreads_over_extensions() {
        let pa = cube();
        let paths1 = pa.paths(1, Sign::Plus);
        let p = paths1.path(0).clone();
        let u = pa.loop_unit(&LoopRef::diagonal(&p)).unwrap();
        let embedded = pa.right_embed(&u);
        // Three extensions at the odd endpoint give three diagonal units.
        let total: Complex64 = embedded.concrete_trace();
        assert!((total - Complex64::new(3.0, 0.0)).norm() < 1e-12);
        assert!(embedded.multiply(&embedded).unwrap().max_abs_diff(&embedded) < 1e-12);
    }

    #[test]
    fn caps_commute_and_scale_identity() {
        let pa = cube();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        // Capping a single strand of the identity multiplies by delta.
        let id1 = pa.identity(1, Sign::Plus);
        let rc = pa.right_cap(&id1).unwrap();
        assert!(rc.max_abs_diff(&pa.identity(0, Sign::Plus).scaled(3.0.into())) < 1e-12);
        let lc = pa.left_cap(&id1).unwrap();
        assert!(lc.max_abs_diff(&pa.identity(0, Sign::Minus).scaled(3.0.into())) < 1e-12);
        // Left and right caps act on disjoint ends.
        for level in 2..4usize {
            let a = pa.random_element(level, Sign::Plus, &mut rng);
            let lr = pa.left_cap(&pa.right_cap(&a).unwrap()).unwrap();
            let rl = pa.right_cap(&pa.left_cap(&a).unwrap()).unwrap();
            assert!(lr.max_abs_diff(&rl) < 1e-10);
        }
        assert!(pa.right_cap(&pa.identity(0, Sign::Plus)).is_err());
    }

    #[test]
    fn cube_unit_right_cap_value() {
        let pa = cube();
        let paths1 = pa.paths(1, Sign::Plus);
        let p = paths1.path(0).clone();
        let u = pa.loop_unit(&LoopRef::diagonal(&p)).unwrap();
        let capped = pa.right_cap(&u).unwrap();
        let z = pa.to_zero_box(&capped).unwrap();
        let expected = ZeroBoxElement::vertex_projection(pa.graph(), p.start());
        assert_eq!(z.sign, expected.sign);
        for (v, c) in &expected.coeffs {
            assert!((z.coeffs[v] - c).norm() < 1e-12);
        }
    }

    #[test]
    fn form_agrees_with_capped_inner_form() {
        let pa = cube();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for level in 0..3usize {
            for sign in [Sign::Plus, Sign::Minus] {
                let a = pa.random_element(level, sign, &mut rng);
                let b = pa.random_element(level, sign, &mut rng);
                let direct = pa.form(&a, &b).unwrap();
                let capped = pa.scalarize(&pa.inner_form(&a, &b).unwrap());
                assert!(
                    (direct - capped).norm() < 1e-9 * (1.0 + direct.norm()),
                    "level {level}: {direct} vs {capped}"
                );
            }
        }
    }

    #[test]
    fn unit_inner_forms() {
        let pa = cube();
        let paths = pa.paths(1, Sign::Plus);
        let loops = pa.loops(1, Sign::Plus);
        let u0 = pa.loop_unit(&loops.loop_ref(&paths, 0)).unwrap();
        let u1 = pa.loop_unit(&loops.loop_ref(&paths, 1)).unwrap();
        // Same diagonal: positive multiple of a rank-one projection.
        let f = pa.inner_form(&u0, &u0).unwrap();
        assert_eq!(f.coeffs.len(), 1);
        assert!(f.coeffs.values().next().unwrap().re > 0.0);
        // Distinct diagonals: zero.
        let g = pa.inner_form(&u0, &u1).unwrap();
        assert!(g.coeffs.is_empty());
    }

    #[test]
    fn gram_of_level_one_units_is_positive_diagonal() {
        let pa = cube();
        let paths = pa.paths(1, Sign::Plus);
        let loops = pa.loops(1, Sign::Plus);
        let units: Vec<AlgebraElement> = (0..loops.len() as u32)
            .map(|i| pa.loop_unit(&loops.loop_ref(&paths, i)).unwrap())
            .collect();
        let gram = pa.gram_matrix(&units).unwrap();
        for i in 0..units.len() {
            for j in 0..units.len() {
                if i == j {
                    assert!(gram[(i, j)].re > 0.0);
                } else {
                    assert!(gram[(i, j)].norm() < 1e-14);
                }
            }
        }
    }
}
