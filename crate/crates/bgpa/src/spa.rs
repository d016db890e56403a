//! Subfactor-axiom verification for a fixed-point subalgebra: scalar
//! zero-boxes, finite dimensions, sphericality of the caps, and positive
//! definiteness of the form.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::Bgpa;
use crate::autos::GroupAction;
use crate::error::{Error, Result};
use crate::fixedpoint::{fixed_basis, fixed_spanning_vectors};
use crate::graph::{check_modulus, Parity, Sign};

/// Dimension of the fixed zero-box spaces: orbit counts of the vertex
/// permutations on each parity class (block unitaries act trivially there).
pub fn zero_box_dims(pa: &Bgpa, group: &GroupAction) -> (usize, usize) {
    (
        group.vertex_orbit_count(pa.graph(), Parity::Even),
        group.vertex_orbit_count(pa.graph(), Parity::Odd),
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct SphericalityDetail {
    pub left: f64,
    pub right: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SphericalityReport {
    pub spherical: bool,
    pub max_gap: f64,
    /// Measured ratio of scalarized left over right caps, when defined; it
    /// must be the same constant for every element.
    pub cap_ratio: Option<f64>,
    pub details: Vec<SphericalityDetail>,
}

/// Compare the scalarized left and right caps of every fixed level-one
/// element.  Requires scalar fixed zero-boxes, so the caps of fixed
/// elements are scalars.
pub fn sphericality_check(pa: &Bgpa, group: &GroupAction, tol: f64) -> Result<SphericalityReport> {
    let dims = zero_box_dims(pa, group);
    if dims != (1, 1) {
        return Err(Error::NotScalar(format!(
            "fixed zero-box dimensions are {dims:?}, need (1, 1)"
        )));
    }
    let basis = fixed_basis(pa, group, 1, Sign::Plus)?;
    let mut details = Vec::with_capacity(basis.dim());
    let mut max_gap = 0f64;
    let mut ratio: Option<f64> = None;
    for x in &basis.elements {
        let left_box = pa.to_zero_box(&pa.left_cap(x)?)?;
        let right_box = pa.to_zero_box(&pa.right_cap(x)?)?;
        let left = pa
            .as_scalar(&left_box, 1e-7)
            .ok_or_else(|| Error::NotScalar("left cap of a fixed element".into()))?;
        let right = pa
            .as_scalar(&right_box, 1e-7)
            .ok_or_else(|| Error::NotScalar("right cap of a fixed element".into()))?;
        let gap = (left - right).norm();
        max_gap = max_gap.max(gap);
        if right.norm() > 1e-9 {
            let r = (left / right).re;
            match ratio {
                None => ratio = Some(r),
                Some(existing) => {
                    if (existing - r).abs() > 1e-6 * (1.0 + existing.abs()) {
                        return Err(Error::NotScalar(format!(
                            "cap ratio varies across elements: {existing} vs {r}"
                        )));
                    }
                }
            }
        }
        details.push(SphericalityDetail {
            left: left.re,
            right: right.re,
            gap,
        });
    }
    Ok(SphericalityReport {
        spherical: max_gap < tol,
        max_gap,
        cap_ratio: ratio,
        details,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PositivityLevel {
    pub level: usize,
    pub sign: Sign,
    pub dim: usize,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub pass: bool,
}

/// Smallest eigenvalue of the Gram matrix of the raw fixed spanning vectors
/// at one level: positive definiteness of the form on the fixed space.
pub fn positivity_check(
    pa: &Bgpa,
    group: &GroupAction,
    level: usize,
    sign: Sign,
    tol: f64,
) -> Result<PositivityLevel> {
    let vectors = fixed_spanning_vectors(pa, group, level, sign)?;
    if vectors.is_empty() {
        return Ok(PositivityLevel {
            level,
            sign,
            dim: 0,
            min_eigenvalue: 0.0,
            max_eigenvalue: 0.0,
            pass: true,
        });
    }
    let gram = pa.gram_matrix(&vectors)?;
    let (min, max) = hermitian_extremes(&gram);
    Ok(PositivityLevel {
        level,
        sign,
        dim: vectors.len(),
        min_eigenvalue: min,
        max_eigenvalue: max,
        pass: min > tol * max.max(1e-300),
    })
}

pub(crate) fn hermitian_extremes(mat: &DMatrix<Complex64>) -> (f64, f64) {
    let eig = mat.clone().symmetric_eigen();
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &v in eig.eigenvalues.iter() {
        min = min.min(v);
        max = max.max(v);
    }
    (min, max)
}

/// Aggregated subfactor-axiom report.
#[derive(Debug, Clone, Serialize)]
pub struct SpaReport {
    pub modulus_ok: bool,
    pub modulus: Option<f64>,
    pub index: Option<f64>,
    pub zero_box_dims: (usize, usize),
    pub zero_box_ok: bool,
    pub dims_plus: Vec<usize>,
    pub dims_minus: Vec<usize>,
    pub spherical: bool,
    pub max_spherical_gap: Option<f64>,
    pub cap_ratio: Option<f64>,
    pub positivity: Vec<PositivityLevel>,
    pub positive: bool,
    pub verdict: bool,
    pub failures: Vec<String>,
}

/// Run every axiom check up to level `max_level`.
pub fn spa_verdict(pa: &Bgpa, group: &GroupAction, max_level: usize) -> Result<SpaReport> {
    let mut failures = Vec::new();
    let tol = pa.tolerance();

    let modulus_report = check_modulus(pa.graph(), pa.spin(), tol.max(1e-9));
    let modulus_ok = modulus_report.is_ok();
    let modulus = modulus_report.delta();
    if !modulus_ok {
        failures.push("spin vector does not have a modulus".to_string());
    }

    let dims = zero_box_dims(pa, group);
    let zero_box_ok = dims == (1, 1);
    if !zero_box_ok {
        failures.push(format!(
            "fixed zero-box dimensions {dims:?} are not (1, 1): the vertex action is not transitive"
        ));
    }

    let mut dims_plus = Vec::new();
    let mut dims_minus = Vec::new();
    for n in 0..=max_level {
        dims_plus.push(fixed_basis(pa, group, n, Sign::Plus)?.dim());
        dims_minus.push(fixed_basis(pa, group, n, Sign::Minus)?.dim());
    }

    let (spherical, max_gap, cap_ratio) = if zero_box_ok && modulus_ok {
        let report = sphericality_check(pa, group, 1e-8)?;
        if !report.spherical {
            failures.push(format!(
                "left and right caps disagree (max gap {:.3e})",
                report.max_gap
            ));
        }
        (report.spherical, Some(report.max_gap), report.cap_ratio)
    } else {
        (false, None, None)
    };

    let mut positivity = Vec::new();
    let mut positive = true;
    for n in 0..=max_level {
        for sign in [Sign::Plus, Sign::Minus] {
            let level = positivity_check(pa, group, n, sign, tol)?;
            positive &= level.pass;
            positivity.push(level);
        }
    }
    if !positive {
        failures.push("Gram form is not positive definite on some fixed level".to_string());
    }

    let verdict = modulus_ok && zero_box_ok && spherical && positive;
    Ok(SpaReport {
        modulus_ok,
        modulus,
        index: modulus.map(|d| d * d),
        zero_box_dims: dims,
        zero_box_ok,
        dims_plus,
        dims_minus,
        spherical,
        max_spherical_gap: max_gap,
        cap_ratio,
        positivity,
        positive,
        verdict,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autos::GroupAction;
    use crate::catalog;

    fn cube() -> Bgpa {
        let (g, s) = catalog::cube_graph();
        Bgpa::new(g, s)
    }

    #[test]
    fn zero_box_dims_on_the_cube() {
        let pa = cube();
        assert_eq!(zero_box_dims(&pa, &catalog::cube_s4().unwrap()), (1, 1));
        assert_eq!(zero_box_dims(&pa, &catalog::cube_z2z2().unwrap()), (1, 1));
        assert_eq!(
            zero_box_dims(&pa, &GroupAction::trivial(pa.graph())),
            (4, 4)
        );
    }

    #[test]
    fn transitive_actions_are_spherical() {
        let pa = cube();
        for group in [catalog::cube_s4().unwrap(), catalog::cube_z2z2().unwrap()] {
            let report = sphericality_check(&pa, &group, 1e-8).unwrap();
            assert!(report.spherical, "max gap {}", report.max_gap);
            // The measured left/right ratio is 1 on a modulus graph.
            assert!((report.cap_ratio.unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn identity_caps_scalarize_to_delta() {
        let pa = cube();
        let group = catalog::cube_s4().unwrap();
        let report = sphericality_check(&pa, &group, 1e-8).unwrap();
        // The unique fixed line at level one is spanned by the normalized
        // identity; both caps carry the same positive scalar.
        assert_eq!(report.details.len(), 1);
        assert!(report.details[0].left > 0.0);
        assert!((report.details[0].left - report.details[0].right).abs() < 1e-10);
    }

    #[test]
    fn sphericality_requires_scalar_zero_boxes() {
        let pa = cube();
        let trivial = GroupAction::trivial(pa.graph());
        assert!(matches!(
            sphericality_check(&pa, &trivial, 1e-8),
            Err(Error::NotScalar(_))
        ));
    }

    #[test]
    fn positivity_of_full_loop_bases() {
        let pa = cube();
        let trivial = GroupAction::trivial(pa.graph());
        for level in 0..3usize {
            let report = positivity_check(&pa, &trivial, level, Sign::Plus, 1e-9).unwrap();
            assert!(report.pass);
            assert!(report.min_eigenvalue > 0.0);
        }
    }

    #[test]
    fn spa_passes_on_the_cube_with_s4() {
        let pa = cube();
        let report = spa_verdict(&pa, &catalog::cube_s4().unwrap(), 2).unwrap();
        assert!(report.verdict, "failures: {:?}", report.failures);
        assert_eq!(report.zero_box_dims, (1, 1));
        assert_eq!(report.dims_plus, vec![1, 1, 4]);
        assert!((report.index.unwrap() - 9.0).abs() < 1e-9);
    }

    #[test]
    fn spa_fails_for_non_transitive_groups() {
        let pa = cube();
        let report = spa_verdict(&pa, &GroupAction::trivial(pa.graph()), 1).unwrap();
        assert!(!report.verdict);
        assert!(!report.zero_box_ok);
        assert!(report.failures.iter().any(|f| f.contains("zero-box")));
    }

    #[test]
    fn spa_reports_broken_modulus() {
        let (g, _) = catalog::cube_graph();
        let spin =
            crate::graph::SpinVector::from_values(vec![1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
        let mut spin = spin;
        spin.set(7, 1.1);
        let pa = Bgpa::new(g, spin);
        let group = catalog::cube_z2z2().unwrap();
        match spa_verdict(&pa, &group, 1) {
            Ok(report) => {
                assert!(!report.verdict);
                assert!(!report.modulus_ok);
            }
            Err(_) => {
                // Also acceptable: the perturbed spin can invalidate other
                // stages before the report is assembled.
            }
        }
    }
}

