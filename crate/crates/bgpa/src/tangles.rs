//! Generating tangles beyond multiplication and embedding: the cup-cap
//! generators, strand capping, and the half rotation on 1-boxes.
//!
//! Capping is defined abstractly by the sandwich identity
//! `r^{n-1}(TL) l(A) r^{n-1}(TL) = r^{n-1}(TL) l^2(LC(A))` (and its mirror);
//! the closed forms implemented in [`crate::algebra`] are validated against
//! that identity by `capping_residuals`.

use num_complex::Complex64;

use crate::algebra::{AlgebraElement, Bgpa, Block};
use crate::error::{Error, Result};
use crate::graph::Sign;
use crate::paths::Path;

/// Eigen-data of a cup-cap generator at one vertex: the distinguished vector
/// is a weighted sum of bounce paths out of the vertex.
#[derive(Debug, Clone)]
pub struct TlEigen {
    pub vertex: u32,
    pub eigenvalue: f64,
    /// Sparse Hilbert-space vector: (path index, coefficient).
    pub y: Vec<(u32, f64)>,
}

/// A cup-cap generator together with its eigenvector list.
#[derive(Debug, Clone)]
pub struct TlElement {
    pub element: AlgebraElement,
    pub eigen: Vec<TlEigen>,
}

impl Bgpa {
    /// The cup-cap generator of the given sign: a level-2 element supported
    /// on pairs of bounce paths out of a common vertex, with entry
    /// mu(t(a)) mu(t(c)) / mu(v)^2 between the bounces along a and c.
    pub fn tl_generator(&self, sign: Sign) -> TlElement {
        let table = self.paths(2, sign);
        let mut element = self.zero(2, sign);
        let mut eigen = Vec::new();
        for &v in self.graph().vertices_of(sign.start_parity()) {
            let edges = self.graph().incident_edges(v);
            let mut y = Vec::with_capacity(edges.len());
            let mut eigenvalue = 0.0;
            for &a in edges {
                let bounce = Path::new(self.graph(), v, vec![a, a]).unwrap();
                let idx = table.lookup(&bounce).unwrap();
                let weight = self.mu(self.graph().other_end(a, v));
                y.push((idx, weight));
                eigenvalue += weight * weight;
            }
            eigenvalue /= self.mu(v).powi(2);
            for &a in edges {
                for &c in edges {
                    let row = Path::new(self.graph(), v, vec![a, a]).unwrap();
                    let col = Path::new(self.graph(), v, vec![c, c]).unwrap();
                    let value = self.mu(self.graph().other_end(a, v))
                        * self.mu(self.graph().other_end(c, v))
                        / self.mu(v).powi(2);
                    element.set_entry(
                        &table,
                        table.lookup(&row).unwrap(),
                        table.lookup(&col).unwrap(),
                        Complex64::new(value, 0.0),
                    );
                }
            }
            eigen.push(TlEigen {
                vertex: v,
                eigenvalue,
                y,
            });
        }
        TlElement { element, eigen }
    }

    /// TL embedded so that the cup-cap occupies strands (pos, pos + 1) of a
    /// level-`level` box of the given sign.
    pub fn embedded_tl(&self, level: usize, sign: Sign, pos: usize) -> Result<AlgebraElement> {
        if level < 2 || pos == 0 || pos + 1 > level {
            return Err(Error::LevelTooSmall {
                required: 2,
                got: level,
            });
        }
        // Left embeddings flip the sign; pick the generator sign so the
        // result lands at `sign` after pos - 1 of them.
        let tl_sign = if (pos - 1) % 2 == 0 { sign } else { sign.flip() };
        let mut x = self.tl_generator(tl_sign).element;
        for _ in 0..level - 1 - pos {
            x = self.right_embed(&x);
        }
        for _ in 0..pos - 1 {
            x = self.left_embed(&x);
        }
        debug_assert_eq!(x.level(), level);
        debug_assert_eq!(x.sign(), sign);
        Ok(x)
    }

    /// The half rotation on 1-boxes: a sign-flipping linear bijection with
    /// `HR(A)(p, q) = A(rev q, rev p)`.  The two singularities of the tangle
    /// sit on opposite sides of the same region pair, so their values cancel
    /// and no spin weight survives.
    pub fn half_rotation(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        if a.level() != 1 {
            return Err(Error::LevelTooSmall {
                required: 1,
                got: a.level(),
            });
        }
        let in_table = self.paths(1, a.sign());
        let out_sign = a.sign().flip();
        let out_table = self.paths(1, out_sign);
        let mut out = self.zero(1, out_sign);
        for (&(v, w), mat) in a.blocks() {
            let members = in_table.block((v, w)).unwrap();
            let reversed: Vec<usize> = members
                .iter()
                .map(|&p| {
                    let r = crate::paths::reverse_path(self.graph(), in_table.path(p));
                    let idx = out_table.lookup(&r).unwrap();
                    out_table.position(idx).1
                })
                .collect();
            let out_key = (w, v);
            let size = out_table.block(out_key).unwrap().len();
            let block = out
                .blocks_mut()
                .entry(out_key)
                .or_insert_with(|| Block::zeros(size, size));
            for (i, &ri) in reversed.iter().enumerate() {
                for (j, &rj) in reversed.iter().enumerate() {
                    // Output entry (rev q, rev p) receives A(p, q).
                    block[(rj, ri)] += mat[(i, j)];
                }
            }
        }
        Ok(out)
    }

    /// Residuals of the two defining cap identities on `a`, as
    /// (left-cap residual, right-cap residual); both must vanish for the
    /// closed-form caps to be correct.
    pub fn capping_residuals(&self, a: &AlgebraElement) -> Result<(f64, f64)> {
        let n = a.level();
        if n < 1 {
            return Err(Error::LevelTooSmall { required: 1, got: n });
        }
        // Left-cap identity: TL of the flipped sign, right-embedded to level
        // n + 1, sandwiching l(A).
        let mut t = self.tl_generator(a.sign().flip()).element;
        for _ in 0..n - 1 {
            t = self.right_embed(&t);
        }
        let la = self.left_embed(a);
        let lhs = t.multiply(&la)?.multiply(&t)?;
        let lc = self.left_cap(a)?;
        let rhs = t.multiply(&self.left_embed(&self.left_embed(&lc)))?;
        let scale = 1.0 + lhs.max_abs().max(rhs.max_abs());
        let left_residual = lhs.max_abs_diff(&rhs) / scale;

        // Mirror: TL left-embedded, sandwiching r(A).
        let tl_sign = if (n - 1) % 2 == 0 {
            a.sign()
        } else {
            a.sign().flip()
        };
        let mut t2 = self.tl_generator(tl_sign).element;
        for _ in 0..n - 1 {
            t2 = self.left_embed(&t2);
        }
        let ra = self.right_embed(a);
        let lhs2 = t2.multiply(&ra)?.multiply(&t2)?;
        let rc = self.right_cap(a)?;
        let rhs2 = t2.multiply(&self.right_embed(&self.right_embed(&rc)))?;
        let scale2 = 1.0 + lhs2.max_abs().max(rhs2.max_abs());
        let right_residual = lhs2.max_abs_diff(&rhs2) / scale2;
        Ok((left_residual, right_residual))
    }
}

impl AlgebraElement {
    /// Apply the element to a dense Hilbert-space vector over the path basis.
    pub fn apply_vector(
        &self,
        table: &crate::paths::PathTable,
        vec: &[Complex64],
    ) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); vec.len()];
        for (&key, mat) in self.blocks() {
            let members = table.block(key).unwrap();
            for (i, &pi) in members.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, &eps) in members.iter().enumerate() {
                    acc += mat[(i, j)] * vec[eps as usize];
                }
                out[pi as usize] += acc;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::graph::SpinVector;
    use crate::paths::{reverse_path, LoopRef};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cube() -> Bgpa {
        let (g, s) = catalog::cube_graph();
        Bgpa::new(g, s)
    }

    #[test]
    fn tl_is_self_adjoint_with_tl_squared_delta_tl() {
        for pa in [cube(), {
            let (g, s) = catalog::multiedge_graph(3);
            Bgpa::new(g, s)
        }] {
            for sign in [Sign::Plus, Sign::Minus] {
                let tl = pa.tl_generator(sign).element;
                assert!(tl.adjoint().max_abs_diff(&tl) < 1e-14);
                let delta = pa.modulus().unwrap();
                let squared = tl.multiply(&tl).unwrap();
                assert!(squared.max_abs_diff(&tl.scaled(delta.into())) < 1e-10);
            }
        }
    }

    #[test]
    fn tl_eigenvectors_and_complement() {
        let pa = cube();
        let tl = pa.tl_generator(Sign::Plus);
        let table = pa.paths(2, Sign::Plus);
        for eig in &tl.eigen {
            assert!((eig.eigenvalue - 3.0).abs() < 1e-12);
            let mut v = vec![Complex64::new(0.0, 0.0); table.len()];
            for &(p, c) in &eig.y {
                v[p as usize] = Complex64::new(c, 0.0);
            }
            let image = tl.element.apply_vector(&table, &v);
            for i in 0..v.len() {
                assert!((image[i] - v[i] * Complex64::from(eig.eigenvalue)).norm() < 1e-12);
            }
        }
        // TL kills vectors orthogonal to every y_v: a difference of two
        // bounce paths with equal weights, and any non-bounce path.
        let first = &tl.eigen[0];
        let mut v = vec![Complex64::new(0.0, 0.0); table.len()];
        v[first.y[0].0 as usize] = Complex64::new(1.0 / first.y[0].1, 0.0);
        v[first.y[1].0 as usize] = Complex64::new(-1.0 / first.y[1].1, 0.0);
        let image = tl.element.apply_vector(&table, &v);
        assert!(image.iter().all(|c| c.norm() < 1e-12));
        let non_bounce = table
            .paths()
            .iter()
            .position(|p| p.edges()[0] != p.edges()[1])
            .unwrap();
        let mut v = vec![Complex64::new(0.0, 0.0); table.len()];
        v[non_bounce] = Complex64::new(1.0, 0.0);
        let image = tl.element.apply_vector(&table, &v);
        assert!(image.iter().all(|c| c.norm() < 1e-12));
    }

    #[test]
    fn tl_on_single_edge_graph() {
        let (g, _) = catalog::star_graph(1);
        let spin = g.perron_spin().unwrap();
        let pa = Bgpa::new(g, spin);
        let tl = pa.tl_generator(Sign::Plus);
        // One loop only; entry mu(t)^2 / mu(s)^2 = 1 for the Perron spin.
        assert_eq!(tl.eigen.len(), 1);
        assert!((tl.element.max_abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn multiedge_tl_is_scaled_rank_one() {
        let (g, s) = catalog::multiedge_graph(4);
        let pa = Bgpa::new(g, s);
        let tl = pa.tl_generator(Sign::Plus);
        // All entries are 1 on bounce pairs; the operator is 4 times a
        // rank-one projection.
        let squared = tl.element.multiply(&tl.element).unwrap();
        assert!(squared.max_abs_diff(&tl.element.scaled(4.0.into())) < 1e-12);
        assert_eq!(tl.eigen[0].eigenvalue, 4.0);
    }

    #[test]
    fn capping_identities_hold_on_catalog_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for pa in [cube(), {
            let (g, s) = catalog::star_graph(3);
            Bgpa::new(g, s)
        }] {
            for level in 1..4usize {
                for sign in [Sign::Plus, Sign::Minus] {
                    let a = pa.random_element(level, sign, &mut rng);
                    let (l, r) = pa.capping_residuals(&a).unwrap();
                    assert!(l < 1e-10, "left residual {l} at level {level}");
                    assert!(r < 1e-10, "right residual {r} at level {level}");
                }
            }
        }
    }

    #[test]
    fn half_rotation_matches_state_sum_oracle() {
        // Independent evaluation of the rotation tangle on two-vertex
        // graphs: regions R_out (odd) and R_in (even); the strand closing the
        // box bottom has a minimum with concave side R_in, the strand
        // closing the top a maximum with concave side R_out.  Reading the
        // boundary gives output loop (e2, e1) and input loop (rev e1, rev e2).
        let (g, _) = catalog::multiedge_graph(3);
        let spin = SpinVector::from_values(vec![1.0, 1.7]);
        let pa = Bgpa::new(g, spin);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let a = pa.random_element(1, Sign::Plus, &mut rng);
        let rotated = pa.half_rotation(&a).unwrap();
        let paths_out = pa.paths(1, Sign::Minus);
        let loops_out = pa.loops(1, Sign::Minus);
        let paths_in = pa.paths(1, Sign::Plus);
        for i in 0..loops_out.len() as u32 {
            let m = loops_out.loop_ref(&paths_out, i);
            let w = m.pi.start();
            let v = m.pi.end(pa.graph());
            let min_value = pa.mu(v) / pa.mu(w);
            let max_value = pa.mu(w) / pa.mu(v);
            let source = LoopRef::new(
                pa.graph(),
                reverse_path(pa.graph(), &m.eps),
                reverse_path(pa.graph(), &m.pi),
            )
            .unwrap();
            let expected = a.entry(
                &paths_in,
                paths_in.lookup(&source.pi).unwrap(),
                paths_in.lookup(&source.eps).unwrap(),
            ) * min_value
                * max_value;
            let got = rotated.entry(
                &paths_out,
                paths_out.lookup(&m.pi).unwrap(),
                paths_out.lookup(&m.eps).unwrap(),
            );
            assert!((expected - got).norm() < 1e-12);
        }
    }

    #[test]
    fn half_rotation_is_a_bijection_and_involution_up_to_rescaling() {
        let pa = cube();
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let a = pa.random_element(1, Sign::Plus, &mut rng);
        let twice = pa.half_rotation(&pa.half_rotation(&a).unwrap()).unwrap();
        assert!(twice.max_abs_diff(&a) < 1e-12);

        // Single-edge graph with unit spin: rotation of the unit is the
        // reversed unit.
        let (g, _) = catalog::star_graph(1);
        let pa1 = Bgpa::new(g, SpinVector::from_values(vec![1.0, 1.0]));
        let paths = pa1.paths(1, Sign::Plus);
        let p = paths.path(0).clone();
        let u = pa1.loop_unit(&LoopRef::diagonal(&p)).unwrap();
        let rotated = pa1.half_rotation(&u).unwrap();
        let rev_unit = pa1
            .loop_unit(&LoopRef::diagonal(&reverse_path(pa1.graph(), &p)))
            .unwrap();
        assert!(rotated.max_abs_diff(&rev_unit) < 1e-14);
    }

    #[test]
    fn half_rotation_carries_left_cap_to_right_cap() {
        // Closing the left strand of A equals closing the right strand of
        // the rotated box; this pins both the index map and the trivial
        // weight.
        let (g, s) = catalog::multiedge_graph(2);
        let pa = Bgpa::new(g, s);
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let a = pa.random_element(1, Sign::Plus, &mut rng);
        let lc = pa.left_cap(&a).unwrap();
        let rc_rot = pa.right_cap(&pa.half_rotation(&a).unwrap()).unwrap();
        assert!(lc.max_abs_diff(&rc_rot) < 1e-12);
    }

    #[test]
    fn scalarized_caps_of_identity_agree_on_modulus_graphs() {
        let pa = cube();
        let id = pa.identity(1, Sign::Plus);
        let left = pa.scalarize(&pa.to_zero_box(&pa.left_cap(&id).unwrap()).unwrap());
        let right = pa.scalarize(&pa.to_zero_box(&pa.right_cap(&id).unwrap()).unwrap());
        assert!((left - right).norm() < 1e-12);
        assert!((left - Complex64::new(3.0, 0.0)).norm() < 1e-12);
    }
}
