//! The particle on a torus, on a lattice and in real space, each as a
//! `(2ω+1)^n`-dimensional space carrying a copy algebra of its defining basis
//! and the group algebra of `Z_{2ω+1}^n` on the basis labels.
//!
//! | flavor  | defining basis          | labels             | dual mesh      |
//! |---------|-------------------------|--------------------|----------------|
//! | torus   | momentum eigenstates    | `k ∈ Z^n`          | `1/(2ω+1)`     |
//! | lattice | position eigenstates    | `k ∈ Z^n`          | `1/(2ω+1)`     |
//! | real    | momentum eigenstates    | `k/ω_uv`           | `1/ω_ir`       |
//!
//! The group-algebra-classical states are the delta functions (torus, real)
//! and the plane waves (lattice); they are copyable exactly when their
//! argument lies on the dual mesh.

use std::fmt;

use nalgebra::DVector;
use num_rational::Rational64;

use crate::error::{Error, Result};
use crate::frobenius::{algebra_from_onb, classicality_residual, group_algebra, FrobeniusAlgebra};
use crate::groups::{enumerate, omega_from_factors, plane_wave, turn, GroupElement, LatticePoint};
use crate::hilb::{Label, Morphism, TruncatedSpace};
use crate::report::{fit_scalar, CheckReport};
use crate::sparse::{SparseMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    Torus,
    Lattice,
    Real { omega_uv: u32, omega_ir: u32 },
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Flavor::Torus => f.write_str("torus"),
            Flavor::Lattice => f.write_str("lattice"),
            Flavor::Real { omega_uv, omega_ir } => {
                write!(f, "real(omega_uv={omega_uv}, omega_ir={omega_ir})")
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct QuantumSystem {
    flavor: Flavor,
    omega: u32,
    n: usize,
    space: TruncatedSpace,
    elements: Vec<GroupElement>,
    z_alg: FrobeniusAlgebra,
    x_alg: FrobeniusAlgebra,
}

/// Translation and boost unitaries of a system.
#[derive(Debug, Clone)]
pub struct WeylPair {
    /// `U_x`, translation by `x`.
    pub translation: Morphism,
    /// `V_p`, boost by `p`.
    pub boost: Morphism,
    /// False when the continuous argument is off its mesh; the unitaries are
    /// still built, but the commutation relation may fail.
    pub on_mesh: bool,
}

fn build(flavor: Flavor, omega: u32, n: usize, name: String) -> Result<QuantumSystem> {
    let elements = enumerate(omega, n);
    let labels = elements.iter().cloned().map(Label::Group).collect();
    let mut space = TruncatedSpace::standard_labeled(name, labels);
    if let Flavor::Real { omega_uv, .. } = flavor {
        space = space.with_amplitude(1.0 / f64::from(omega_uv).sqrt());
    }
    let z_alg = algebra_from_onb(&space);
    let x_alg = group_algebra(&space)?;
    Ok(QuantumSystem {
        flavor,
        omega,
        n,
        space,
        elements,
        z_alg,
        x_alg,
    })
}

/// Particle on the `n`-torus: defining basis of momentum eigenstates `χ_k`.
pub fn make_torus_system(omega: u32, n: usize) -> Result<QuantumSystem> {
    if omega < 1 {
        return Err(Error::OutOfRange("torus system needs omega >= 1".into()));
    }
    build(Flavor::Torus, omega, n, format!("T{n}[w={omega}]"))
}

/// Particle on the lattice `Z^n`: defining basis of position eigenstates `δ_k`.
pub fn make_lattice_system(omega: u32, n: usize) -> Result<QuantumSystem> {
    if omega < 1 {
        return Err(Error::OutOfRange("lattice system needs omega >= 1".into()));
    }
    build(Flavor::Lattice, omega, n, format!("Z{n}[w={omega}]"))
}

/// Particle in `R^n` with `2ω+1 = ω_uv ω_ir`: defining basis of momentum
/// eigenstates `χ_p`, `p` on the mesh `1/ω_uv`. Their `1/sqrt(ω_uv)` amplitude is
/// kept as metadata on the space; model coordinates are orthonormal.
pub fn make_real_system(omega_uv: u32, omega_ir: u32, n: usize) -> Result<QuantumSystem> {
    if omega_uv < 3 || omega_ir < 3 {
        return Err(Error::BadFactorization(format!(
            "omega_uv = {omega_uv} and omega_ir = {omega_ir} must both be at least 3"
        )));
    }
    let omega = omega_from_factors(omega_uv, omega_ir)?;
    build(
        Flavor::Real { omega_uv, omega_ir },
        omega,
        n,
        format!("R{n}[uv={omega_uv},ir={omega_ir}]"),
    )
}

impl QuantumSystem {
    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn omega(&self) -> u32 {
        self.omega
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn space(&self) -> &TruncatedSpace {
        &self.space
    }

    /// Copy algebra of the defining basis.
    pub fn z_alg(&self) -> &FrobeniusAlgebra {
        &self.z_alg
    }

    /// Group algebra on the labels.
    pub fn x_alg(&self) -> &FrobeniusAlgebra {
        &self.x_alg
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    /// Amplitude of the physical basis functions (`1/sqrt(ω_uv)` for real space).
    pub fn amplitude(&self) -> f64 {
        self.space.amplitude()
    }

    /// Denominator of the mesh the basis labels live on.
    pub fn label_denominator(&self) -> i64 {
        match self.flavor {
            Flavor::Torus | Flavor::Lattice => 1,
            Flavor::Real { omega_uv, .. } => i64::from(omega_uv),
        }
    }

    /// Denominator of the mesh on which the classical states of the group
    /// algebra are copyable.
    pub fn dual_denominator(&self) -> i64 {
        match self.flavor {
            Flavor::Torus | Flavor::Lattice => 2 * i64::from(self.omega) + 1,
            Flavor::Real { omega_ir, .. } => i64::from(omega_ir),
        }
    }

    /// Physical points of the defining basis labels, in basis order.
    pub fn basis_points(&self) -> Vec<LatticePoint> {
        let d = self.label_denominator();
        self.elements
            .iter()
            .map(|k| LatticePoint::scaled(k, d))
            .collect()
    }

    /// All points of the dual mesh, `(1/dual_denominator) Z_{2ω+1}^n`.
    pub fn dual_points(&self) -> Vec<LatticePoint> {
        let d = self.dual_denominator();
        self.elements
            .iter()
            .map(|k| LatticePoint::scaled(k, d))
            .collect()
    }

    fn check_point(&self, x: &LatticePoint) -> Result<()> {
        if x.n() != self.n {
            return Err(Error::ParameterMismatch(format!(
                "point {x} has dimension {}, system has {}",
                x.n(),
                self.n
            )));
        }
        Ok(())
    }

    /// Index of the basis vector labeled by `p`, if `p` is a label.
    pub fn label_index(&self, p: &LatticePoint) -> Option<usize> {
        let k = GroupElement::new(self.omega, p.mesh_indices(self.label_denominator())?).ok()?;
        (k.n() == self.n).then(|| k.index())
    }

    /// The defining basis vector labeled by `p`.
    pub fn basis_state(&self, p: &LatticePoint) -> Result<DVector<C64>> {
        self.check_point(p)?;
        let i = self.label_index(p).ok_or_else(|| Error::OffMeshPoint {
            point: p.to_string(),
            mesh: format!("1/{} label", self.label_denominator()),
        })?;
        Ok(DVector::from_fn(self.dim(), |r, _| {
            C64::new(if r == i { 1.0 } else { 0.0 }, 0.0)
        }))
    }

    /// `δ_x = Σ_p χ_p(x)* |χ_p⟩` (torus and real flavors).
    pub fn delta_state(&self, x: &LatticePoint) -> Result<DVector<C64>> {
        if self.flavor == Flavor::Lattice {
            return Err(Error::FlavorMismatch(
                "position eigenstates of the lattice are its defining basis; use basis_state".into(),
            ));
        }
        self.check_point(x)?;
        let coeffs = self
            .basis_points()
            .iter()
            .map(|p| plane_wave(p, x).map(|c| c.conj()))
            .collect::<Result<Vec<_>>>()?;
        Ok(DVector::from_vec(coeffs))
    }

    /// `χ_x = Σ_k e^{−i2πk·x} |δ_k⟩` (lattice flavor).
    pub fn plane_wave_state(&self, x: &LatticePoint) -> Result<DVector<C64>> {
        if self.flavor != Flavor::Lattice {
            return Err(Error::FlavorMismatch(
                "plane waves are the defining basis of this flavor; use basis_state".into(),
            ));
        }
        self.check_point(x)?;
        let coeffs = self
            .basis_points()
            .iter()
            .map(|k| plane_wave(k, x))
            .collect::<Result<Vec<_>>>()?;
        Ok(DVector::from_vec(coeffs))
    }

    /// The group-algebra-classical state at `x`: a delta function for the
    /// torus and real flavors, a plane wave for the lattice.
    pub fn classical_state(&self, x: &LatticePoint) -> Result<DVector<C64>> {
        match self.flavor {
            Flavor::Lattice => self.plane_wave_state(x),
            _ => self.delta_state(x),
        }
    }

    /// `mult ∘ (|ψ⟩ ⊗ id)`.
    fn multiply_by(alg: &FrobeniusAlgebra, psi: &DVector<C64>) -> Result<Morphism> {
        let h = alg.space();
        Morphism::state(h, psi)?
            .tensor(&Morphism::identity(h))
            .then(alg.mult())
    }

    /// Translation `U_x` and boost `V_p`.
    ///
    /// Torus and real flavors: `U_x` is the copy-algebra multiplication by the
    /// classical state at `−x`, so `U_x|χ_q⟩ = χ_q(x)|χ_q⟩`; `V_p` is the group
    /// multiplication by `|χ_p⟩`, so `V_p|χ_q⟩ = |χ_{q⊕p}⟩`. The lattice
    /// flavor swaps the roles: `U_x` shifts positions, `V_p` multiplies by
    /// `e^{i2πk·p}`. With these conventions `V_p U_x = e^{i2πp·x} U_x V_p`.
    pub fn weyl_unitaries(&self, x: &LatticePoint, p: &LatticePoint) -> Result<WeylPair> {
        self.check_point(x)?;
        self.check_point(p)?;
        match self.flavor {
            Flavor::Torus | Flavor::Real { .. } => {
                let on_mesh = x.on_mesh(self.dual_denominator());
                let translation = Self::multiply_by(&self.z_alg, &self.delta_state(&x.neg())?)?;
                let boost = Self::multiply_by(&self.x_alg, &self.basis_state(p)?)?;
                Ok(WeylPair {
                    translation,
                    boost,
                    on_mesh,
                })
            }
            Flavor::Lattice => {
                let on_mesh = p.on_mesh(self.dual_denominator());
                let translation = Self::multiply_by(&self.x_alg, &self.basis_state(x)?)?;
                let boost = Self::multiply_by(&self.z_alg, &self.plane_wave_state(&p.neg())?)?;
                Ok(WeylPair {
                    translation,
                    boost,
                    on_mesh,
                })
            }
        }
    }

    /// Checks `V_p ∘ U_x = e^{i2πp·x} U_x ∘ V_p`: fits the phase by least
    /// squares, then compares it with `e^{i2πp·x}`.
    pub fn weyl_ccr_check(&self, x: &LatticePoint, p: &LatticePoint, tol: f64) -> Result<CheckReport> {
        let pair = self.weyl_unitaries(x, p)?;
        let lhs = pair.translation.then(&pair.boost)?;
        let rhs = pair.boost.then(&pair.translation)?;
        let (phase, residual) = fit_scalar(lhs.matrix(), rhs.matrix());
        let expected = turn(p.dot(x)?);
        let phase_error = (phase - expected).norm();
        let unitarity = pair
            .translation
            .matrix()
            .adjoint()
            .matmul(pair.translation.matrix())
            .max_abs_diff(&SparseMatrix::identity(self.dim()))
            .max(
                pair.boost
                    .matrix()
                    .adjoint()
                    .matmul(pair.boost.matrix())
                    .max_abs_diff(&SparseMatrix::identity(self.dim())),
            );
        let mut report = CheckReport::group(
            format!("weyl ccr on {} at x={x} p={p}", self.space.describe()),
            vec![
                CheckReport::leaf("commutation", residual, tol).with_scalar(phase),
                CheckReport::leaf("phase", phase_error, tol).with_scalar(expected),
                CheckReport::leaf("unitarity", unitarity, tol),
            ],
            tol,
        );
        report.fitted_scalar = Some(phase);
        Ok(report)
    }

    /// Copy residuals of the group-algebra-classical states.
    ///
    /// `on_mesh`: the largest copy or delete residual over the dual mesh.
    /// `square_norm`: the largest deviation of `‖ψ‖²` from `(2ω+1)^n`.
    /// `off_mesh`: probes `x + δ e_i` with `δ` ranging over multiples of
    /// `1/(10(2ω+1))` strictly inside a mesh cell; its residual is
    /// `max(0, threshold − smallest copy residual)` and its scalar carries that
    /// smallest copy residual.
    pub fn classicality_check(&self, threshold: f64, tol: f64) -> Result<CheckReport> {
        let order = (2 * i64::from(self.omega) + 1) as f64;
        let expected_norm = order.powi(self.n as i32);
        let mut on_mesh: f64 = 0.0;
        let mut norm_err: f64 = 0.0;
        let mut min_off = f64::INFINITY;
        let unit = 10 * (2 * i64::from(self.omega) + 1);
        let steps = unit / self.dual_denominator();
        for x in self.dual_points() {
            let psi = self.classical_state(&x)?;
            let (copy, delete) = classicality_residual(&self.x_alg, &psi)?;
            on_mesh = on_mesh.max(copy).max(delete);
            norm_err = norm_err.max((psi.norm_squared() - expected_norm).abs());
            for axis in 0..self.n {
                for m in 1..steps {
                    let mut coords = x.coords().to_vec();
                    coords[axis] += Rational64::new(m, unit);
                    let probe = self.classical_state(&LatticePoint::new(coords))?;
                    let (copy, _) = classicality_residual(&self.x_alg, &probe)?;
                    min_off = min_off.min(copy);
                }
            }
        }
        Ok(CheckReport::group(
            format!("classicality on {}", self.space.describe()),
            vec![
                CheckReport::leaf("on_mesh", on_mesh, tol),
                CheckReport::leaf("square_norm", norm_err, tol),
                CheckReport::leaf("off_mesh", (threshold - min_off).max(0.0), tol)
                    .with_scalar(C64::new(min_off, 0.0)),
            ],
            tol,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frobenius::{check_frobenius_laws, check_strong_complementarity};
    use crate::hilb::DEFAULT_TOL;

    fn pt(a: i64, b: i64) -> LatticePoint {
        LatticePoint::from_fractions(&[(a, b)])
    }

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn torus_dimensions_and_speciality() {
        assert_eq!(make_torus_system(1, 1).unwrap().dim(), 3);
        let t = make_torus_system(2, 2).unwrap();
        assert_eq!(t.dim(), 25);
        let r = check_frobenius_laws(t.x_alg(), DEFAULT_TOL);
        let c = r.detail("speciality").unwrap().fitted_scalar.unwrap();
        assert!(close(c, C64::new(25.0, 0.0)));
        let t1 = make_torus_system(1, 1).unwrap();
        assert!(check_strong_complementarity(t1.x_alg(), t1.z_alg(), DEFAULT_TOL).unwrap().passed);
        assert!(make_torus_system(0, 1).is_err());
    }

    #[test]
    fn lattice_plane_waves() {
        let l = make_lattice_system(1, 1).unwrap();
        assert_eq!(l.basis_points(), vec![pt(-1, 1), pt(0, 1), pt(1, 1)]);
        let w = l.plane_wave_state(&pt(1, 3)).unwrap();
        let e = |r: f64| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * r);
        assert!(close(w[0], e(1.0 / 3.0)));
        assert!(close(w[1], C64::new(1.0, 0.0)));
        assert!(close(w[2], e(-1.0 / 3.0)));
        for x in l.dual_points() {
            let w = l.plane_wave_state(&x).unwrap();
            assert!((w.norm_squared() - 3.0).abs() < 1e-12);
        }
        assert!(matches!(l.delta_state(&pt(0, 1)), Err(Error::FlavorMismatch(_))));
    }

    #[test]
    fn real_system_meshes() {
        let r = make_real_system(3, 5, 1).unwrap();
        assert_eq!(r.dim(), 15);
        let ps = r.basis_points();
        assert_eq!(ps.first().unwrap(), &pt(-7, 3));
        assert_eq!(ps.last().unwrap(), &pt(7, 3));
        let xs = r.dual_points();
        assert_eq!(xs.first().unwrap(), &pt(-7, 5));
        assert_eq!(xs.last().unwrap(), &pt(7, 5));
        assert_eq!(make_real_system(3, 3, 1).unwrap().dim(), 9);
        assert!((r.amplitude() - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!(matches!(make_real_system(3, 4, 1), Err(Error::BadFactorization(_))));
        assert!(matches!(make_real_system(1, 5, 1), Err(Error::BadFactorization(_))));
    }

    #[test]
    fn torus_delta_states() {
        let t = make_torus_system(1, 1).unwrap();
        let d0 = t.delta_state(&pt(0, 1)).unwrap();
        assert!(d0.iter().all(|&c| close(c, C64::new(1.0, 0.0))));
        assert!((d0.norm_squared() - 3.0).abs() < 1e-12);
        let d = t.delta_state(&pt(1, 3)).unwrap();
        let e = |r: f64| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * r);
        assert!(close(d[0], e(-1.0 / 3.0)));
        assert!(close(d[1], C64::new(1.0, 0.0)));
        assert!(close(d[2], e(1.0 / 3.0)));
        let (copy, _) = classicality_residual(t.x_alg(), &d).unwrap();
        assert!(copy < 1e-9);
        let off = t.delta_state(&pt(1, 10)).unwrap();
        let (copy_off, _) = classicality_residual(t.x_alg(), &off).unwrap();
        assert!(copy_off > 0.1);
    }

    #[test]
    fn weyl_identities_at_zero() {
        let t = make_torus_system(1, 1).unwrap();
        let pair = t.weyl_unitaries(&pt(0, 1), &pt(1, 1)).unwrap();
        assert!(pair.translation.distance(&Morphism::identity(t.space())).unwrap() < 1e-12);
        let pair = t.weyl_unitaries(&pt(1, 3), &pt(0, 1)).unwrap();
        assert!(pair.boost.distance(&Morphism::identity(t.space())).unwrap() < 1e-12);
    }

    #[test]
    fn torus_translation_is_diagonal_phase() {
        let t = make_torus_system(1, 1).unwrap();
        let pair = t.weyl_unitaries(&pt(1, 3), &pt(0, 1)).unwrap();
        let u = pair.translation.to_dense();
        let e = |r: f64| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * r);
        assert!(close(u[(0, 0)], e(1.0 / 3.0)));
        assert!(close(u[(1, 1)], C64::new(1.0, 0.0)));
        assert!(close(u[(2, 2)], e(-1.0 / 3.0)));
        assert!(pair.translation.matrix().is_diagonal());
    }

    #[test]
    fn ccr_examples() {
        let r = make_real_system(3, 5, 1).unwrap();
        let rep = r.weyl_ccr_check(&pt(1, 5), &pt(1, 3), DEFAULT_TOL).unwrap();
        assert!(rep.passed, "{rep:?}");
        let e = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 15.0);
        assert!(close(rep.fitted_scalar.unwrap(), e));

        let t = make_torus_system(2, 1).unwrap();
        let rep = t.weyl_ccr_check(&pt(1, 5), &pt(1, 1), DEFAULT_TOL).unwrap();
        assert!(rep.passed);
        let e = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 5.0);
        assert!(close(rep.fitted_scalar.unwrap(), e));

        let rep = t.weyl_ccr_check(&pt(0, 1), &pt(2, 1), DEFAULT_TOL).unwrap();
        assert!(close(rep.fitted_scalar.unwrap(), C64::new(1.0, 0.0)));
        assert!(rep.residual < 1e-12);
    }

    #[test]
    fn lattice_ccr_and_off_mesh_boost() {
        let l = make_lattice_system(2, 1).unwrap();
        let rep = l.weyl_ccr_check(&pt(1, 1), &pt(2, 5), DEFAULT_TOL).unwrap();
        assert!(rep.passed, "{rep:?}");
        let off = l.weyl_unitaries(&pt(1, 1), &pt(1, 7)).unwrap();
        assert!(!off.on_mesh);
        let rep = l.weyl_ccr_check(&pt(1, 1), &pt(1, 7), DEFAULT_TOL).unwrap();
        assert!(!rep.passed);
    }

    #[test]
    fn boost_must_be_a_label() {
        let t = make_torus_system(1, 1).unwrap();
        assert!(matches!(
            t.weyl_unitaries(&pt(0, 1), &pt(1, 2)),
            Err(Error::OffMeshPoint { .. })
        ));
        assert!(matches!(
            t.weyl_unitaries(&LatticePoint::origin(2), &pt(0, 1)),
            Err(Error::ParameterMismatch(_))
        ));
    }

    #[test]
    fn classicality_dichotomy_reports() {
        for sys in [
            make_torus_system(1, 1).unwrap(),
            make_lattice_system(2, 1).unwrap(),
            make_real_system(3, 3, 1).unwrap(),
            make_torus_system(1, 2).unwrap(),
        ] {
            let rep = sys.classicality_check(0.05, DEFAULT_TOL).unwrap();
            assert!(rep.passed, "{rep:?}");
            assert!(rep.detail("off_mesh").unwrap().fitted_scalar.unwrap().re > 0.05);
        }
    }
}
