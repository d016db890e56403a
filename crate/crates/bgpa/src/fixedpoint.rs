//! Fixed-point subspaces of a group action, level by level.
//!
//! For monomial groups (vertex permutations, diagonal phases, monomial
//! blocks) the averaging projector sends each loop unit to a phase-weighted
//! orbit sum, so the fixed space has an explicit orthogonal basis of orbit
//! sums with character cancellation dropping some orbits.  General unitary
//! blocks fall back to averaging plus Gram-Schmidt.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::algebra::{AlgebraElement, Bgpa};
use crate::autos::{GroupAction, TorusMode};
use crate::error::{Error, Result};
use crate::graph::Sign;

/// An orthonormal basis (with respect to the partition-function form) of the
/// fixed subspace at one level and sign.
#[derive(Debug)]
pub struct FixedBasis {
    pub level: usize,
    pub sign: Sign,
    pub elements: Vec<AlgebraElement>,
    /// Loop index of the orbit representative each element came from.
    pub representatives: Vec<u32>,
}

impl FixedBasis {
    pub fn dim(&self) -> usize {
        self.elements.len()
    }
}

/// Loop indices fixed by the requested torus: loops whose net signed
/// traversal count vanishes per adjacent pair (`BlockScalar`, the scalar
/// multiplication operators) or per edge (`EdgeDiagonal`).
pub fn torus_fixed_loops(pa: &Bgpa, level: usize, sign: Sign, mode: TorusMode) -> Vec<u32> {
    let loops = pa.loops(level, sign);
    let paths = pa.paths(level, sign);
    let graph = pa.graph();
    (0..loops.len() as u32)
        .filter(|&i| {
            if mode == TorusMode::None {
                return true;
            }
            let l = loops.loop_ref(&paths, i);
            let net = l.net_traversal(graph);
            match mode {
                TorusMode::None => true,
                TorusMode::EdgeDiagonal => net.iter().all(|&c| c == 0),
                TorusMode::BlockScalar => {
                    let mut per_pair: BTreeMap<(u32, u32), i32> = BTreeMap::new();
                    for (e, &c) in net.iter().enumerate() {
                        let edge = graph.edge(e as u32);
                        *per_pair.entry((edge.even, edge.odd)).or_insert(0) += c;
                    }
                    per_pair.values().all(|&c| c == 0)
                }
            }
        })
        .collect()
}

/// Basis of the fixed subspace at one level and sign.
pub fn fixed_basis(pa: &Bgpa, group: &GroupAction, level: usize, sign: Sign) -> Result<FixedBasis> {
    if group.is_empty() || !group.ops()[0].is_pure_permutation() {
        return Err(Error::GroupNotClosed("identity must come first".into()));
    }
    let candidates = torus_fixed_loops(pa, level, sign, group.torus);
    if group.is_monomial() {
        monomial_fixed_basis(pa, group, level, sign, &candidates)
    } else {
        averaged_fixed_basis(pa, group, level, sign, &candidates)
    }
}

fn monomial_fixed_basis(
    pa: &Bgpa,
    group: &GroupAction,
    level: usize,
    sign: Sign,
    candidates: &[u32],
) -> Result<FixedBasis> {
    let loops = pa.loops(level, sign);
    let paths = pa.paths(level, sign);
    let graph = pa.graph();
    let mut visited: std::collections::HashSet<u32> = std::collections::HashSet::new();
    let mut elements = Vec::new();
    let mut representatives = Vec::new();
    for &start in candidates {
        if visited.contains(&start) {
            continue;
        }
        let l = loops.loop_ref(&paths, start);
        // Phase-weighted orbit sum: coefficients of the averaging projector
        // applied to the unit at `start`.
        let mut coeffs: BTreeMap<u32, Complex64> = BTreeMap::new();
        for op in group.ops() {
            let (image, phase) = op
                .map_loop(graph, &l)
                .expect("monomial ops map loops to loops");
            let idx = loops
                .lookup((
                    paths.lookup(&image.pi).unwrap(),
                    paths.lookup(&image.eps).unwrap(),
                ))
                .unwrap();
            *coeffs.entry(idx).or_default() += phase;
            visited.insert(idx);
        }
        let scale = 1.0 / group.len() as f64;
        let mut sum = pa.zero(level, sign);
        let mut nonzero = false;
        for (&idx, &c) in &coeffs {
            let value = c * scale;
            if value.norm() > 1e-12 {
                nonzero = true;
                let unit = pa.loop_unit(&loops.loop_ref(&paths, idx))?;
                sum = sum.plus(&unit.scaled(value))?;
            }
        }
        if !nonzero {
            continue;
        }
        let norm = pa.norm(&sum);
        elements.push(sum.scaled(Complex64::new(1.0 / norm, 0.0)));
        representatives.push(start);
    }
    Ok(FixedBasis {
        level,
        sign,
        elements,
        representatives,
    })
}

fn averaged_fixed_basis(
    pa: &Bgpa,
    group: &GroupAction,
    level: usize,
    sign: Sign,
    candidates: &[u32],
) -> Result<FixedBasis> {
    let loops = pa.loops(level, sign);
    let paths = pa.paths(level, sign);
    let scale = Complex64::new(1.0 / group.len() as f64, 0.0);
    let mut elements: Vec<AlgebraElement> = Vec::new();
    let mut representatives = Vec::new();
    for &start in candidates {
        let unit = pa.loop_unit(&loops.loop_ref(&paths, start))?;
        let mut avg = pa.zero(level, sign);
        for op in group.ops() {
            avg = avg.plus(&op.apply(pa, &unit))?;
        }
        let mut residual = avg.scaled(scale);
        // Modified Gram-Schmidt against the basis found so far.
        for b in &elements {
            let coeff = pa.form(&residual, b)?;
            residual = residual.minus(&b.scaled(coeff))?;
        }
        let norm = pa.norm(&residual);
        if norm > 1e-8 {
            elements.push(residual.scaled(Complex64::new(1.0 / norm, 0.0)));
            representatives.push(start);
        }
    }
    Ok(FixedBasis {
        level,
        sign,
        elements,
        representatives,
    })
}

/// The raw (not orthonormalized) averaged spanning vectors of the fixed
/// space, used for positivity reporting: for monomial groups these are the
/// phase-weighted orbit sums, in general the surviving projector images.
pub fn fixed_spanning_vectors(
    pa: &Bgpa,
    group: &GroupAction,
    level: usize,
    sign: Sign,
) -> Result<Vec<AlgebraElement>> {
    let basis = fixed_basis(pa, group, level, sign)?;
    let loops = pa.loops(level, sign);
    let paths = pa.paths(level, sign);
    let scale = Complex64::new(1.0 / group.len() as f64, 0.0);
    let mut out = Vec::with_capacity(basis.dim());
    for &rep in &basis.representatives {
        let unit = pa.loop_unit(&loops.loop_ref(&paths, rep))?;
        let mut avg = pa.zero(level, sign);
        if group.is_monomial() {
            let l = loops.loop_ref(&paths, rep);
            for op in group.ops() {
                let (image, phase) = op.map_loop(pa.graph(), &l).unwrap();
                let u = pa.loop_unit(&image)?;
                avg = avg.plus(&u.scaled(phase))?;
            }
        } else {
            for op in group.ops() {
                avg = avg.plus(&op.apply(pa, &unit))?;
            }
        }
        out.push(avg.scaled(scale).pruned(1e-14));
    }
    Ok(out)
}

/// Fixed bases for all levels up to `max_level`, both signs.
#[derive(Debug)]
pub struct FixedTower {
    pub max_level: usize,
    levels: BTreeMap<(usize, Sign), FixedBasis>,
}

impl FixedTower {
    pub fn basis(&self, level: usize, sign: Sign) -> Option<&FixedBasis> {
        self.levels.get(&(level, sign))
    }

    pub fn dims(&self, sign: Sign) -> Vec<usize> {
        (0..=self.max_level)
            .map(|n| self.levels[&(n, sign)].dim())
            .collect()
    }
}

pub fn fixed_tower(pa: &Bgpa, group: &GroupAction, max_level: usize) -> Result<FixedTower> {
    let mut levels = BTreeMap::new();
    for n in 0..=max_level {
        for sign in [Sign::Plus, Sign::Minus] {
            levels.insert((n, sign), fixed_basis(pa, group, n, sign)?);
        }
    }
    let tower = FixedTower { max_level, levels };
    verify_embedding_compatibility(pa, &tower)?;
    Ok(tower)
}

/// Right embedding must map each fixed level into the next fixed span.
fn verify_embedding_compatibility(pa: &Bgpa, tower: &FixedTower) -> Result<()> {
    for n in 0..tower.max_level {
        for sign in [Sign::Plus, Sign::Minus] {
            let lower = &tower.levels[&(n, sign)];
            let upper = &tower.levels[&(n + 1, sign)];
            for b in &lower.elements {
                let embedded = pa.right_embed(b);
                let mut residual = embedded.clone();
                for u in &upper.elements {
                    let coeff = pa.form(&residual, u)?;
                    residual = residual.minus(&u.scaled(coeff))?;
                }
                let rel = pa.norm(&residual) / (1.0 + pa.norm(&embedded));
                if rel > 1e-8 {
                    return Err(Error::Decomposition(format!(
                        "embedded fixed element escapes the level-{} fixed span (residual {rel:.2e})",
                        n + 1
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Orbit count of a pure-permutation group on the loops of one level via
/// explicit union-find enumeration.
pub fn loop_orbit_count(pa: &Bgpa, group: &GroupAction, level: usize, sign: Sign) -> Result<usize> {
    if !group.is_pure_permutation() {
        return Err(Error::InvalidInput(
            "orbit counting needs a pure permutation group".into(),
        ));
    }
    let loops = pa.loops(level, sign);
    let paths = pa.paths(level, sign);
    let mut seen = vec![false; loops.len()];
    let mut orbits = 0usize;
    for i in 0..loops.len() as u32 {
        if seen[i as usize] {
            continue;
        }
        orbits += 1;
        let mut stack = vec![i];
        seen[i as usize] = true;
        while let Some(j) = stack.pop() {
            let l = loops.loop_ref(&paths, j);
            for op in group.ops() {
                let (image, _) = op.map_loop(pa.graph(), &l).unwrap();
                let idx = loops
                    .lookup((
                        paths.lookup(&image.pi).unwrap(),
                        paths.lookup(&image.eps).unwrap(),
                    ))
                    .unwrap();
                if !seen[idx as usize] {
                    seen[idx as usize] = true;
                    stack.push(idx);
                }
            }
        }
    }
    Ok(orbits)
}

/// Orbit count of a pure-permutation group on loops via the fixed-point
/// average (Burnside).  Independent of `loop_orbit_count`.
pub fn burnside_loop_count(
    pa: &Bgpa,
    group: &GroupAction,
    level: usize,
    sign: Sign,
) -> Result<usize> {
    if !group.is_pure_permutation() {
        return Err(Error::InvalidInput(
            "Burnside counting needs a pure permutation group".into(),
        ));
    }
    let loops = pa.loops(level, sign);
    let paths = pa.paths(level, sign);
    let mut total = 0usize;
    for op in group.ops() {
        for i in 0..loops.len() as u32 {
            let l = loops.loop_ref(&paths, i);
            let (image, _) = op.map_loop(pa.graph(), &l).unwrap();
            if image == l {
                total += 1;
            }
        }
    }
    if total % group.len() != 0 {
        return Err(Error::Decomposition(
            "Burnside sum is not divisible by the group order".into(),
        ));
    }
    Ok(total / group.len())
}
