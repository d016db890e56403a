//! Combinatorial dimension oracles and small finite-group machinery.
//!
//! These count loop labellings directly from group data, independently of any
//! graph or box-space computation, so they can cross-check fixed-space
//! dimensions computed the long way.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// A finite group given by its multiplication table.  Element 0 is the
/// identity.
#[derive(Debug, Clone)]
pub struct GroupTable {
    table: Vec<Vec<usize>>,
    names: Vec<String>,
}

impl GroupTable {
    pub fn new(table: Vec<Vec<usize>>, names: Vec<String>) -> Result<GroupTable> {
        let n = table.len();
        if n == 0 || names.len() != n {
            return Err(Error::InvalidInput("empty or mismatched group table".into()));
        }
        for row in &table {
            if row.len() != n || row.iter().any(|&x| x >= n) {
                return Err(Error::InvalidInput("malformed group table row".into()));
            }
        }
        for g in 0..n {
            if table[0][g] != g || table[g][0] != g {
                return Err(Error::InvalidInput("element 0 is not an identity".into()));
            }
        }
        let gt = GroupTable { table, names };
        for g in 0..n {
            gt.inverse(g)?;
        }
        Ok(gt)
    }

    /// Generate a permutation group from generators given in one-line form
    /// (images of 0..k).  Elements are named by their one-line notation.
    pub fn from_permutations(degree: usize, generators: &[Vec<usize>]) -> Result<GroupTable> {
        for g in generators {
            if g.len() != degree {
                return Err(Error::InvalidInput("permutation degree mismatch".into()));
            }
        }
        let identity: Vec<usize> = (0..degree).collect();
        let mut elems = vec![identity];
        let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
        index.insert(elems[0].clone(), 0);
        let mut frontier = vec![0usize];
        while let Some(i) = frontier.pop() {
            let base = elems[i].clone();
            for gen in generators {
                let composed: Vec<usize> = (0..degree).map(|x| gen[base[x]]).collect();
                if !index.contains_key(&composed) {
                    index.insert(composed.clone(), elems.len());
                    frontier.push(elems.len());
                    elems.push(composed);
                }
            }
        }
        let n = elems.len();
        let mut table = vec![vec![0usize; n]; n];
        for a in 0..n {
            for b in 0..n {
                let composed: Vec<usize> = (0..degree).map(|x| elems[a][elems[b][x]]).collect();
                table[a][b] = index[&composed];
            }
        }
        let names = elems
            .iter()
            .map(|p| {
                p.iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join("")
            })
            .collect();
        GroupTable::new(table, names)
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inverse(&self, a: usize) -> Result<usize> {
        (0..self.order())
            .find(|&b| self.table[a][b] == 0)
            .ok_or_else(|| Error::InvalidInput(format!("element {a} has no inverse")))
    }

    pub fn name(&self, a: usize) -> &str {
        &self.names[a]
    }

    /// The Klein four-group.
    pub fn klein_four() -> GroupTable {
        let table = vec![
            vec![0, 1, 2, 3],
            vec![1, 0, 3, 2],
            vec![2, 3, 0, 1],
            vec![3, 2, 1, 0],
        ];
        let names = vec!["1", "g1", "g2", "g1g2"]
            .into_iter()
            .map(String::from)
            .collect();
        GroupTable::new(table, names).expect("static table")
    }

    /// Cyclic group of order n.
    pub fn cyclic(n: usize) -> GroupTable {
        let table = (0..n)
            .map(|a| (0..n).map(|b| (a + b) % n).collect())
            .collect();
        let names = (0..n).map(|a| format!("r{a}")).collect();
        GroupTable::new(table, names).expect("static table")
    }

    /// Symmetric group on 3 letters, as permutations of {0,1,2}.
    pub fn symmetric_3() -> GroupTable {
        GroupTable::from_permutations(3, &[vec![1, 0, 2], vec![1, 2, 0]]).expect("static group")
    }
}

/// Count 2n-tuples (a_1, ..., a_2n) drawn from the listed generator set
/// (index 0 is the identity, repeats allowed and counted) whose alternating
/// product a_1 a_2^{-1} a_3 ... a_{2n}^{-1} is the identity.
pub fn diagonal_dim_oracle(group: &GroupTable, generators: &[usize], n: usize) -> Result<usize> {
    for &g in generators {
        if g >= group.order() {
            return Err(Error::InvalidInput(format!("generator {g} out of range")));
        }
    }
    let mut letters = vec![0usize];
    letters.extend_from_slice(generators);
    // Dynamic count over partial alternating products.
    let mut reach = vec![0usize; group.order()];
    reach[0] = 1;
    for step in 0..2 * n {
        let mut next = vec![0usize; group.order()];
        for (x, &count) in reach.iter().enumerate() {
            if count == 0 {
                continue;
            }
            for &a in &letters {
                let y = if step % 2 == 0 {
                    group.mul(x, a)
                } else {
                    group.mul(x, group.inverse(a)?)
                };
                next[y] += count;
            }
        }
        reach = next;
    }
    Ok(reach[0])
}

/// A letter in a word over two finite groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Letter {
    H(usize),
    K(usize),
}

/// Word-problem context for the group generated by two finite groups H and K
/// with trivial intersection.
#[derive(Debug, Clone)]
pub enum WordContext {
    /// The free product H * K: words reduce by normal form.
    FreeProduct { h: GroupTable, k: GroupTable },
    /// H and K embedded in a common finite group; products are evaluated
    /// there.  `h_elems[i]`/`k_elems[i]` give the ambient element of H- or
    /// K-element i.
    Ambient {
        group: GroupTable,
        h_elems: Vec<usize>,
        k_elems: Vec<usize>,
    },
}

impl WordContext {
    fn h_order(&self) -> usize {
        match self {
            WordContext::FreeProduct { h, .. } => h.order(),
            WordContext::Ambient { h_elems, .. } => h_elems.len(),
        }
    }

    fn k_order(&self) -> usize {
        match self {
            WordContext::FreeProduct { k, .. } => k.order(),
            WordContext::Ambient { k_elems, .. } => k_elems.len(),
        }
    }

    /// Whether the word k_1 h_1 k_2 h_2 ... (alternating, given as letters)
    /// is the identity.
    fn is_trivial(&self, word: &[Letter]) -> Result<bool> {
        match self {
            WordContext::FreeProduct { h, k } => {
                // Reduce: drop identity letters, merge adjacent same-group
                // letters, repeat.  Trivial iff everything cancels.
                let mut stack: Vec<Letter> = Vec::new();
                for &letter in word {
                    push_reduced(&mut stack, letter, h, k);
                }
                Ok(stack.is_empty())
            }
            WordContext::Ambient {
                group,
                h_elems,
                k_elems,
            } => {
                let mut acc = 0usize;
                for &letter in word {
                    let g = match letter {
                        Letter::H(i) => h_elems[i],
                        Letter::K(i) => k_elems[i],
                    };
                    acc = group.mul(acc, g);
                }
                Ok(acc == 0)
            }
        }
    }
}

fn push_reduced(stack: &mut Vec<Letter>, letter: Letter, h: &GroupTable, k: &GroupTable) {
    let merged = match (stack.last(), letter) {
        (_, Letter::H(0)) | (_, Letter::K(0)) => return,
        (Some(Letter::H(a)), Letter::H(b)) => Some(Letter::H(h.mul(*a, b))),
        (Some(Letter::K(a)), Letter::K(b)) => Some(Letter::K(k.mul(*a, b))),
        _ => None,
    };
    match merged {
        Some(m) => {
            stack.pop();
            push_reduced(stack, m, h, k);
        }
        None => stack.push(letter),
    }
}

/// Count tuples (k_1, h_1, ..., k_n, h_n) with k_1 h_1 k_2 h_2 ... k_n h_n
/// equal to the identity, in the group described by `ctx`.
pub fn bh_dim_oracle(ctx: &WordContext, n: usize) -> Result<usize> {
    let mut count = 0usize;
    let kn = ctx.k_order();
    let hn = ctx.h_order();
    let total = (kn * hn).pow(n as u32);
    let mut word = Vec::with_capacity(2 * n);
    for tuple in 0..total {
        word.clear();
        let mut t = tuple;
        for _ in 0..n {
            let ki = t % kn;
            t /= kn;
            let hi = t % hn;
            t /= hn;
            word.push(Letter::K(ki));
            word.push(Letter::H(hi));
        }
        if ctx.is_trivial(&word)? {
            count += 1;
        }
    }
    Ok(count)
}
