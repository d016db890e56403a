//! Ready-made graphs, spins, and symmetry groups for the worked examples.

use crate::autos::{AutomorphismOp, GroupAction};
use crate::error::Result;
use crate::graph::{BipartiteGraph, GraphSpec, Parity, SpinVector};
use crate::oracles::GroupTable;

/// The cube graph: binary triples, bipartitioned by coordinate parity,
/// constant spin, modulus 3.
pub fn cube_graph() -> (BipartiteGraph, SpinVector) {
    let mut spec = GraphSpec::new();
    let label = |bits: usize| format!("{:03b}", bits);
    for bits in 0..8usize {
        let parity = if bits.count_ones() % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        };
        spec = spec.vertex(&label(bits), parity);
    }
    for bits in 0..8usize {
        if bits.count_ones() % 2 == 0 {
            for k in 0..3 {
                spec = spec.edge(&label(bits), &label(bits ^ (1 << k)));
            }
        }
    }
    let graph = spec.build().expect("static cube construction");
    let spin = SpinVector::constant(&graph, 1.0).with_modulus(3.0);
    (graph, spin)
}

/// Star with one even center and `n` odd leaves; modulus sqrt(n).
pub fn star_graph(n: usize) -> (BipartiteGraph, SpinVector) {
    let mut spec = GraphSpec::new().vertex("c", Parity::Even);
    for i in 1..=n {
        spec = spec.vertex(&format!("l{i}"), Parity::Odd);
    }
    for i in 1..=n {
        spec = spec.edge("c", &format!("l{i}"));
    }
    let graph = spec.build().expect("static star construction");
    let mut mu = vec![1.0; graph.vertex_count()];
    let leaf = 1.0 / (n as f64).powf(0.25);
    for v in 1..graph.vertex_count() {
        mu[v] = leaf;
    }
    let spin = SpinVector::from_values(mu).with_modulus((n as f64).sqrt());
    (graph, spin)
}

/// Two vertices joined by an m-fold multiple edge; modulus m.
pub fn multiedge_graph(m: usize) -> (BipartiteGraph, SpinVector) {
    let mut spec = GraphSpec::new()
        .vertex("a", Parity::Even)
        .vertex("b", Parity::Odd);
    for _ in 0..m {
        spec = spec.edge("a", "b");
    }
    let graph = spec.build().expect("static multiedge construction");
    let spin = SpinVector::constant(&graph, 1.0).with_modulus(m as f64);
    (graph, spin)
}

/// Cayley-style graph for a finitely generated group: one even and one odd
/// vertex per element; even x joins odd y once for every listed h (identity
/// prepended) with y = x h.  Constant spin, modulus n + 1.  The group acts by
/// left translation.
pub fn diagonal_graph(
    group: &GroupTable,
    generators: &[usize],
) -> Result<(BipartiteGraph, SpinVector, GroupAction)> {
    let order = group.order();
    let mut spec = GraphSpec::new();
    for x in 0..order {
        spec = spec.vertex(&format!("p{x}"), Parity::Even);
    }
    for x in 0..order {
        spec = spec.vertex(&format!("m{x}"), Parity::Odd);
    }
    let mut letters = vec![0usize];
    letters.extend_from_slice(generators);
    for x in 0..order {
        for &h in &letters {
            spec = spec.edge(&format!("p{x}"), &format!("m{}", group.mul(x, h)));
        }
    }
    let graph = spec.build()?;
    let spin =
        SpinVector::constant(&graph, 1.0).with_modulus(letters.len() as f64);
    let mut gens = Vec::new();
    for g in 1..order {
        let kappa: Vec<u32> = (0..2 * order as u32)
            .map(|v| {
                let x = v as usize % order;
                let translated = group.mul(g, x);
                if (v as usize) < order {
                    translated as u32
                } else {
                    (order + translated) as u32
                }
            })
            .collect();
        gens.push(AutomorphismOp::graph_auto(&graph, &spin, kappa)?);
    }
    let action = GroupAction::closure(&graph, gens, 4 * order * order)?;
    Ok((graph, spin, action))
}

/// Double-coset graph for a group generated by finite subgroups H and K with
/// trivial intersection: even vertices are cosets gH, odd vertices cosets gK,
/// one edge per group element.  Modulus sqrt(|H| |K|); the group acts by left
/// translation.
pub fn bh_coset_graph(
    group: &GroupTable,
    h_elems: &[usize],
    k_elems: &[usize],
) -> Result<(BipartiteGraph, SpinVector, GroupAction)> {
    let order = group.order();
    let coset_reps = |subgroup: &[usize]| -> Vec<Vec<usize>> {
        let mut seen = vec![false; order];
        let mut cosets = Vec::new();
        for g in 0..order {
            if seen[g] {
                continue;
            }
            let coset: Vec<usize> = subgroup.iter().map(|&s| group.mul(g, s)).collect();
            for &x in &coset {
                seen[x] = true;
            }
            cosets.push(coset);
        }
        cosets
    };
    let h_cosets = coset_reps(h_elems);
    let k_cosets = coset_reps(k_elems);
    let h_coset_of = |g: usize| h_cosets.iter().position(|c| c.contains(&g)).unwrap();
    let k_coset_of = |g: usize| k_cosets.iter().position(|c| c.contains(&g)).unwrap();

    let mut spec = GraphSpec::new();
    for i in 0..h_cosets.len() {
        spec = spec.vertex(&format!("h{i}"), Parity::Even);
    }
    for j in 0..k_cosets.len() {
        spec = spec.vertex(&format!("k{j}"), Parity::Odd);
    }
    for g in 0..order {
        spec = spec.edge(&format!("h{}", h_coset_of(g)), &format!("k{}", k_coset_of(g)));
    }
    let graph = spec.build()?;
    let h_size = h_elems.len() as f64;
    let k_size = k_elems.len() as f64;
    let mut mu = vec![0.0; graph.vertex_count()];
    for i in 0..h_cosets.len() {
        mu[i] = h_size.powf(0.25);
    }
    for j in 0..k_cosets.len() {
        mu[h_cosets.len() + j] = k_size.powf(0.25);
    }
    let spin = SpinVector::from_values(mu).with_modulus((h_size * k_size).sqrt());

    let mut gens = Vec::new();
    for g in 1..order {
        let kappa: Vec<u32> = (0..graph.vertex_count() as u32)
            .map(|v| {
                let i = v as usize;
                if i < h_cosets.len() {
                    let rep = h_cosets[i][0];
                    h_coset_of(group.mul(g, rep)) as u32
                } else {
                    let rep = k_cosets[i - h_cosets.len()][0];
                    (h_cosets.len() + k_coset_of(group.mul(g, rep))) as u32
                }
            })
            .collect();
        gens.push(AutomorphismOp::graph_auto(&graph, &spin, kappa)?);
    }
    let action = GroupAction::closure(&graph, gens, 4 * order * order)?;
    Ok((graph, spin, action))
}

/// The parity-preserving symmetries of the cube graph act as the full
/// symmetric group on the four even vertices.  This returns the subgroup
/// generated by the given even-vertex permutations (one-line form over the
/// even vertices in input order).
pub fn cube_group(perms: &[Vec<usize>]) -> Result<GroupAction> {
    let (graph, spin) = cube_graph();
    let evens = graph.even_vertices().to_vec();
    let odds = graph.odd_vertices().to_vec();
    // Odd vertices are in bijection with even ones: each odd vertex is
    // adjacent to all but one even vertex, its "antipode".
    let antipode_of_odd: Vec<usize> = odds
        .iter()
        .map(|&w| {
            (0..evens.len())
                .find(|&i| graph.connection_count(evens[i], w) == 0)
                .expect("cube odd vertex has a unique non-neighbor")
        })
        .collect();
    let odd_of_antipode: Vec<u32> = (0..evens.len())
        .map(|i| {
            odds[antipode_of_odd
                .iter()
                .position(|&a| a == i)
                .expect("antipode bijection")]
        })
        .collect();
    let mut gens = Vec::new();
    for perm in perms {
        let mut kappa: Vec<u32> = (0..graph.vertex_count() as u32).collect();
        for (i, &img) in perm.iter().enumerate() {
            kappa[evens[i] as usize] = evens[img];
        }
        for (j, &w) in odds.iter().enumerate() {
            kappa[w as usize] = odd_of_antipode[perm[antipode_of_odd[j]]];
        }
        gens.push(AutomorphismOp::graph_auto(&graph, &spin, kappa)?);
    }
    GroupAction::closure(&graph, gens, 1_000)
}

/// Symmetric group on the even vertices of the cube (order 24).
pub fn cube_s4() -> Result<GroupAction> {
    cube_group(&[vec![1, 0, 2, 3], vec![1, 2, 3, 0]])
}

/// Alternating group on the even vertices of the cube (order 12).
pub fn cube_a4() -> Result<GroupAction> {
    cube_group(&[vec![1, 2, 0, 3], vec![0, 2, 3, 1]])
}

/// The Klein four-group of double transpositions on the even vertices.
pub fn cube_z2z2() -> Result<GroupAction> {
    cube_group(&[vec![1, 0, 3, 2], vec![2, 3, 0, 1]])
}

/// Leaf-permuting symmetries of the star graph, generated by the full cycle
/// and a transposition (the whole symmetric group on the leaves).
pub fn star_leaf_group(n: usize) -> Result<GroupAction> {
    let (graph, spin) = star_graph(n);
    let mut gens = Vec::new();
    let mut perms: Vec<Vec<u32>> = Vec::new();
    if n >= 2 {
        let mut swap: Vec<u32> = (0..graph.vertex_count() as u32).collect();
        swap[1] = 2;
        swap[2] = 1;
        perms.push(swap);
        let mut cycle: Vec<u32> = (0..graph.vertex_count() as u32).collect();
        for i in 1..=n {
            cycle[i] = if i == n { 1 } else { (i + 1) as u32 };
        }
        perms.push(cycle);
    }
    for kappa in perms {
        gens.push(AutomorphismOp::graph_auto(&graph, &spin, kappa)?);
    }
    let bound = (1..=n).product::<usize>().max(4) * 2;
    GroupAction::closure(&graph, gens, bound)
}

/// Monomial symmetries of the m-fold multiple edge: the symmetric group
/// permuting the parallel edges, acting as block unitaries.
pub fn multiedge_permutation_group(m: usize) -> Result<GroupAction> {
    let (graph, _spin) = multiedge_graph(m);
    let mut gens = Vec::new();
    let mut mats = Vec::new();
    if m >= 2 {
        let mut swap = nalgebra::DMatrix::<num_complex::Complex64>::zeros(m, m);
        for i in 0..m {
            let j = match i {
                0 => 1,
                1 => 0,
                other => other,
            };
            swap[(j, i)] = num_complex::Complex64::new(1.0, 0.0);
        }
        mats.push(swap);
        let mut cycle = nalgebra::DMatrix::<num_complex::Complex64>::zeros(m, m);
        for i in 0..m {
            cycle[((i + 1) % m, i)] = num_complex::Complex64::new(1.0, 0.0);
        }
        mats.push(cycle);
    }
    for mat in mats {
        let mut blocks = std::collections::BTreeMap::new();
        blocks.insert((0u32, 1u32), mat);
        gens.push(AutomorphismOp::mult_op(&graph, blocks)?);
    }
    let bound = (1..=m).product::<usize>().max(4) * 2;
    GroupAction::closure(&graph, gens, bound)
}
