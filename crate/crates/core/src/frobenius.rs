//! Dagger Frobenius algebras: construction, law checking, classical states and
//! strong complementarity.
//!
//! An algebra is given by its multiplication `H ⊗ H -> H` and unit `I -> H`;
//! the comultiplication and counit are their daggers. All law checks work on
//! the raw sparse matrices so that three- and four-fold tensor powers of a
//! 125-dimensional space stay cheap.

use std::collections::HashMap;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::groups::{gadd, group_order, GroupElement};
use crate::hilb::{swap_matrix, Label, Morphism, TruncatedSpace};
use crate::report::{fit_scalar, CheckReport};
use crate::sparse::{SparseMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgebraKind {
    /// Copies a chosen orthonormal basis.
    SpecialFromBasis,
    /// Linear extension of a group law on basis labels.
    GroupAlgebra,
}

#[derive(Debug, Clone)]
pub struct FrobeniusAlgebra {
    space: TruncatedSpace,
    mult: Morphism,
    unit: Morphism,
    kind: AlgebraKind,
}

impl FrobeniusAlgebra {
    /// Assembles an algebra from explicit structure maps (no laws are checked).
    pub fn from_parts(mult: Morphism, unit: Morphism, kind: AlgebraKind) -> Result<Self> {
        let space = unit.target().clone();
        let expect_mult_src = space.tensor(&space);
        if *mult.source() != expect_mult_src || *mult.target() != space {
            return Err(Error::SpaceMismatch {
                left: format!("{} -> {}", mult.source(), mult.target()),
                right: format!("{} -> {}", expect_mult_src, space),
            });
        }
        if !unit.source().is_unit() {
            return Err(Error::SpaceMismatch {
                left: unit.source().to_string(),
                right: "I".to_string(),
            });
        }
        Ok(Self {
            space,
            mult,
            unit,
            kind,
        })
    }

    pub fn space(&self) -> &TruncatedSpace {
        &self.space
    }

    pub fn mult(&self) -> &Morphism {
        &self.mult
    }

    pub fn unit(&self) -> &Morphism {
        &self.unit
    }

    pub fn comult(&self) -> Morphism {
        self.mult.dagger()
    }

    pub fn counit(&self) -> Morphism {
        self.unit.dagger()
    }

    pub fn kind(&self) -> AlgebraKind {
        self.kind
    }
}

/// The copy algebra of the frame of `h`: `comult|e_i⟩ = |e_i⟩ ⊗ |e_i⟩`.
pub fn algebra_from_onb(h: &TruncatedSpace) -> FrobeniusAlgebra {
    let d = h.dim();
    let one = C64::new(1.0, 0.0);
    let mult = SparseMatrix::from_triplets(d, d * d, (0..d).map(|i| (i, i * d + i, one)));
    let unit = SparseMatrix::from_triplets(d, 1, (0..d).map(|i| (i, 0, one)));
    FrobeniusAlgebra {
        space: h.clone(),
        mult: Morphism::new(h.tensor(h), h.clone(), mult).expect("shape by construction"),
        unit: Morphism::new(TruncatedSpace::unit(), h.clone(), unit).expect("shape by construction"),
        kind: AlgebraKind::SpecialFromBasis,
    }
}

/// The copy algebra of an arbitrary orthonormal basis of `h`, given as the
/// columns of `basis` in model coordinates.
pub fn algebra_from_basis(h: &TruncatedSpace, basis: &SparseMatrix) -> Result<FrobeniusAlgebra> {
    let d = h.dim();
    if basis.shape() != (d, d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: basis.rows().max(basis.cols()),
        });
    }
    let deviation = basis
        .adjoint()
        .matmul(basis)
        .max_abs_diff(&SparseMatrix::identity(d));
    if !(deviation < crate::hilb::DEFAULT_TOL) {
        return Err(Error::NonOrthonormalFrame { deviation });
    }
    let std = algebra_from_onb(h);
    let ud = basis.adjoint();
    let mult = basis
        .matmul(std.mult.matrix())
        .matmul(&ud.kron(&ud));
    let unit = basis.matmul(std.unit.matrix());
    Ok(FrobeniusAlgebra {
        space: h.clone(),
        mult: Morphism::new(h.tensor(h), h.clone(), mult)?,
        unit: Morphism::new(TruncatedSpace::unit(), h.clone(), unit)?,
        kind: AlgebraKind::SpecialFromBasis,
    })
}

/// The group algebra of `Z_{2ω+1}^n` on a space whose labels enumerate the
/// group exactly once: `mult(e_k ⊗ e_h) = e_{k⊕h}`, `unit = e_0`.
pub fn group_algebra(h: &TruncatedSpace) -> Result<FrobeniusAlgebra> {
    let labels = h
        .labels()
        .ok_or_else(|| Error::BadLabeling("space has no labels".into()))?;
    let elements: Vec<&GroupElement> = labels
        .iter()
        .map(|l| match l {
            Label::Group(g) => Ok(g),
            other => Err(Error::BadLabeling(format!("label {other} is not a group element"))),
        })
        .collect::<Result<_>>()?;
    let first = elements
        .first()
        .ok_or_else(|| Error::BadLabeling("empty labeling".into()))?;
    let (omega, n) = (first.omega(), first.n());
    if elements.len() != group_order(omega, n) {
        return Err(Error::BadLabeling(format!(
            "{} labels for a group of order {}",
            elements.len(),
            group_order(omega, n)
        )));
    }
    let mut position: HashMap<&GroupElement, usize> = HashMap::with_capacity(elements.len());
    for (i, g) in elements.iter().enumerate() {
        if g.omega() != omega || g.n() != n {
            return Err(Error::BadLabeling(format!("label {g} from a different group")));
        }
        if position.insert(g, i).is_some() {
            return Err(Error::BadLabeling(format!("label {g} repeated")));
        }
    }
    let d = elements.len();
    let one = C64::new(1.0, 0.0);
    let mut triplets = Vec::with_capacity(d * d);
    for (i, k) in elements.iter().enumerate() {
        for (j, g) in elements.iter().enumerate() {
            let s = gadd(k, g)?;
            triplets.push((position[&s], i * d + j, one));
        }
    }
    let zero = GroupElement::zero(omega, n);
    let unit = SparseMatrix::from_triplets(d, 1, [(position[&zero], 0, one)]);
    Ok(FrobeniusAlgebra {
        space: h.clone(),
        mult: Morphism::new(h.tensor(h), h.clone(), SparseMatrix::from_triplets(d, d * d, triplets))?,
        unit: Morphism::new(TruncatedSpace::unit(), h.clone(), unit)?,
        kind: AlgebraKind::GroupAlgebra,
    })
}

/// Checks associativity, unitality, commutativity, the Frobenius law and
/// (quasi-)speciality `mult ∘ comult = c·id`, reporting the fitted `c`.
pub fn check_frobenius_laws(a: &FrobeniusAlgebra, tol: f64) -> CheckReport {
    let d = a.space.dim();
    let m = a.mult.matrix();
    let u = a.unit.matrix();
    let cm = m.adjoint();
    let id = SparseMatrix::identity(d);

    let assoc = m
        .matmul(&m.kron(&id))
        .max_abs_diff(&m.matmul(&id.kron(m)));
    let unital = m
        .matmul(&u.kron(&id))
        .max_abs_diff(&id)
        .max(m.matmul(&id.kron(u)).max_abs_diff(&id));
    let commut = m.matmul(&swap_matrix(d, d)).max_abs_diff(m);
    let middle = cm.matmul(m);
    let left = m.kron(&id).matmul(&id.kron(&cm));
    let right = id.kron(m).matmul(&cm.kron(&id));
    let frob = left.max_abs_diff(&middle).max(right.max_abs_diff(&middle));
    let (c, special) = fit_scalar(&m.matmul(&cm), &id);

    let name = match a.kind {
        AlgebraKind::SpecialFromBasis => "copy algebra",
        AlgebraKind::GroupAlgebra => "group algebra",
    };
    CheckReport::group(
        format!("frobenius laws: {name} on {}", a.space.describe()),
        vec![
            CheckReport::leaf("associativity", assoc, tol),
            CheckReport::leaf("unitality", unital, tol),
            CheckReport::leaf("commutativity", commut, tol),
            CheckReport::leaf("frobenius", frob, tol),
            CheckReport::leaf("speciality", special, tol).with_scalar(c),
        ],
        tol,
    )
}

/// `(‖comult(ψ) − ψ⊗ψ‖_max, |counit(ψ) − 1|)`.
pub fn classicality_residual(a: &FrobeniusAlgebra, psi: &DVector<C64>) -> Result<(f64, f64)> {
    let d = a.space.dim();
    if psi.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: psi.len(),
        });
    }
    let v = SparseMatrix::column_vector(psi);
    let copied = a.mult.matrix().adjoint().matmul(&v);
    let copy = copied.max_abs_diff(&v.kron(&v));
    let deleted = a.unit.matrix().adjoint().matmul(&v).get(0, 0);
    Ok((copy, (deleted - C64::new(1.0, 0.0)).norm()))
}

/// Verifies the bialgebra-style interaction laws between `(X-mult, X-unit)`
/// and `(Z-comult, Z-counit)`, each up to a fitted scalar:
///
/// 1. `Z-comult ∘ X-mult = (X-mult ⊗ X-mult) ∘ (id ⊗ swap ⊗ id) ∘ (Z-comult ⊗ Z-comult)`
/// 2. `Z-counit ∘ X-mult = c · (Z-counit ⊗ Z-counit)`
/// 3. `Z-comult ∘ X-unit = c · (X-unit ⊗ X-unit)`
/// 4. `Z-counit ∘ X-unit`, reported as a scalar
pub fn check_strong_complementarity(
    x: &FrobeniusAlgebra,
    z: &FrobeniusAlgebra,
    tol: f64,
) -> Result<CheckReport> {
    if x.space != z.space {
        return Err(Error::SpaceMismatch {
            left: x.space.to_string(),
            right: z.space.to_string(),
        });
    }
    let d = x.space.dim();
    let xm = x.mult.matrix();
    let xu = x.unit.matrix();
    let zc = z.mult.matrix().adjoint();
    let zcu = z.unit.matrix().adjoint();
    let id = SparseMatrix::identity(d);
    let sw = swap_matrix(d, d);

    let lhs1 = zc.matmul(xm);
    let rhs1 = zc
        .kron(&zc)
        .apply_tensor(&[&id, &sw, &id])
        .apply_tensor(&[xm, xm]);
    let (c1, r1) = fit_scalar(&lhs1, &rhs1);

    let (c2, r2) = fit_scalar(&zcu.matmul(xm), &zcu.kron(&zcu));
    let (c3, r3) = fit_scalar(&zc.matmul(xu), &xu.kron(xu));
    let c4 = zcu.matmul(xu).get(0, 0);

    Ok(CheckReport::group(
        format!("strong complementarity on {}", x.space.describe()),
        vec![
            CheckReport::leaf("bialgebra", r1, tol).with_scalar(c1),
            CheckReport::leaf("counit-mult", r2, tol).with_scalar(c2),
            CheckReport::leaf("comult-unit", r3, tol).with_scalar(c3),
            CheckReport::leaf("counit-unit", 0.0, tol).with_scalar(c4),
        ],
        tol,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::enumerate;
    use crate::hilb::DEFAULT_TOL;

    fn group_space(omega: u32, n: usize) -> TruncatedSpace {
        TruncatedSpace::standard_labeled(
            "G",
            enumerate(omega, n).into_iter().map(Label::Group).collect(),
        )
    }

    fn basis(d: usize, i: usize) -> DVector<C64> {
        DVector::from_fn(d, |k, _| C64::new(if k == i { 1.0 } else { 0.0 }, 0.0))
    }

    #[test]
    fn copy_algebra_small_cases() {
        let a = algebra_from_onb(&TruncatedSpace::standard("H", 1));
        assert_eq!(a.mult().to_dense()[(0, 0)], C64::new(1.0, 0.0));
        assert_eq!(a.unit().to_dense()[(0, 0)], C64::new(1.0, 0.0));

        let a2 = algebra_from_onb(&TruncatedSpace::standard("H", 2));
        let m = a2.mult().to_dense();
        // columns e1e1, e1e2, e2e1, e2e2
        assert_eq!(m[(0, 0)], C64::new(1.0, 0.0));
        assert_eq!(m[(1, 3)], C64::new(1.0, 0.0));
        assert_eq!(m.column(1).norm(), 0.0);
        assert_eq!(m.column(2).norm(), 0.0);

        let a3 = algebra_from_onb(&TruncatedSpace::standard("H", 3));
        let s = a3.counit().after(a3.unit()).unwrap().scalar_value().unwrap();
        assert_eq!(s, C64::new(3.0, 0.0));
    }

    #[test]
    fn group_algebra_wraps_and_is_unital() {
        let h = group_space(1, 1);
        let a = group_algebra(&h).unwrap();
        // labels -1, 0, 1 at positions 0, 1, 2; e_1 ⊗ e_1 is column 2*3+2
        let m = a.mult().to_dense();
        assert_eq!(m[(0, 8)], C64::new(1.0, 0.0));
        assert_eq!(a.unit().state_vector().unwrap(), basis(3, 1));
        for k in 0..3 {
            assert_eq!(m[(k, k * 3 + 1)], C64::new(1.0, 0.0));
        }
        let r = check_frobenius_laws(&a, DEFAULT_TOL);
        let c = r.detail("speciality").unwrap().fitted_scalar.unwrap();
        assert!((c - C64::new(3.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn group_algebra_rejects_bad_labels() {
        let h = TruncatedSpace::standard("H", 3);
        assert!(matches!(group_algebra(&h), Err(Error::BadLabeling(_))));
        let short = TruncatedSpace::standard_labeled(
            "H",
            enumerate(1, 1).into_iter().take(2).map(Label::Group).collect(),
        );
        assert!(matches!(group_algebra(&short), Err(Error::BadLabeling(_))));
        let g = GroupElement::zero(1, 1);
        let dup = TruncatedSpace::standard_labeled(
            "H",
            vec![Label::Group(g.clone()), Label::Group(g.clone()), Label::Group(g)],
        );
        assert!(matches!(group_algebra(&dup), Err(Error::BadLabeling(_))));
    }

    #[test]
    fn laws_pass_for_copy_algebra() {
        let r = check_frobenius_laws(&algebra_from_onb(&TruncatedSpace::standard("H", 4)), DEFAULT_TOL);
        assert!(r.passed, "{r:?}");
        let c = r.detail("speciality").unwrap().fitted_scalar.unwrap();
        assert!((c - C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn laws_pass_for_group_algebra_omega_two() {
        let r = check_frobenius_laws(&group_algebra(&group_space(2, 1)).unwrap(), DEFAULT_TOL);
        assert!(r.passed);
        let c = r.detail("speciality").unwrap().fitted_scalar.unwrap();
        assert!((c - C64::new(5.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn corrupted_mult_breaks_frobenius_law() {
        let h = TruncatedSpace::standard("H", 3);
        let a = algebra_from_onb(&h);
        // Scaling a copy entry (i, i⊗i) keeps the Frobenius law, so only the
        // structurally zero entries are perturbed.
        for i in 0..3 {
            for j in (0..9).filter(|&j| j != i * 3 + i) {
                let mut m = a.mult().to_dense();
                m[(i, j)] += C64::new(0.1, 0.0);
                let bad = FrobeniusAlgebra::from_parts(
                    Morphism::from_dense(h.tensor(&h), h.clone(), &m).unwrap(),
                    a.unit().clone(),
                    AlgebraKind::SpecialFromBasis,
                )
                .unwrap();
                let r = check_frobenius_laws(&bad, DEFAULT_TOL);
                assert!(!r.passed);
                assert!(r.detail("frobenius").unwrap().residual >= 0.05, "entry ({i}, {j})");
            }
        }
    }

    #[test]
    fn basis_states_are_copied() {
        let a = algebra_from_onb(&TruncatedSpace::standard("H", 4));
        for i in 0..4 {
            let (copy, delete) = classicality_residual(&a, &basis(4, i)).unwrap();
            assert_eq!(copy, 0.0);
            assert_eq!(delete, 0.0);
        }
        assert!(matches!(
            classicality_residual(&a, &basis(3, 0)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn group_and_copy_algebras_are_strongly_complementary() {
        let h = group_space(1, 1);
        let x = group_algebra(&h).unwrap();
        let z = algebra_from_onb(&h);
        let r = check_strong_complementarity(&x, &z, DEFAULT_TOL).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn copy_algebra_is_not_complementary_to_itself() {
        let z = algebra_from_onb(&TruncatedSpace::standard("H", 2));
        let r = check_strong_complementarity(&z, &z, DEFAULT_TOL).unwrap();
        assert!(!r.passed);
        assert!(r.detail("counit-mult").unwrap().residual >= 0.5);
        assert!(r.detail("comult-unit").unwrap().residual >= 0.5);
    }

    #[test]
    fn one_dimensional_pair_is_trivially_complementary() {
        let h = group_space(0, 1);
        let r = check_strong_complementarity(&group_algebra(&h).unwrap(), &algebra_from_onb(&h), DEFAULT_TOL).unwrap();
        assert!(r.passed);
    }

    #[test]
    fn complementarity_requires_same_space() {
        let a = algebra_from_onb(&TruncatedSpace::standard("H", 2));
        let b = algebra_from_onb(&TruncatedSpace::standard("K", 2));
        assert!(matches!(
            check_strong_complementarity(&a, &b, DEFAULT_TOL),
            Err(Error::SpaceMismatch { .. })
        ));
    }
}
