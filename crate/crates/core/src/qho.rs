//! Truncated harmonic oscillators and the free real scalar field built from
//! one oscillator per momentum-lattice site.

use std::collections::BTreeMap;

use num_rational::Rational64;

use crate::error::{Error, Result};
use crate::fields::{dec, FieldSpace, SiteString, DEFAULT_SIZE_BUDGET};
use crate::groups::{lattice_points, omega_from_factors, turn, Embedding, LatticePoint};
use crate::hilb::{Label, Morphism, TruncatedSpace};
use crate::report::CheckReport;
use crate::sparse::{SparseMatrix, C64};

/// An oscillator truncated at energy level `τ`, on the number basis `|0⟩..|τ⟩`.
#[derive(Debug, Clone)]
pub struct Oscillator {
    tau: usize,
    space: TruncatedSpace,
}

impl Oscillator {
    pub fn new(tau: usize) -> Result<Self> {
        if tau < 1 {
            return Err(Error::OutOfRange("oscillator cutoff must be at least 1".into()));
        }
        let labels = (0..=tau).map(|n| Label::Text(n.to_string())).collect();
        Ok(Self {
            tau,
            space: TruncatedSpace::standard_labeled(format!("Q[t={tau}]"), labels),
        })
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn space(&self) -> &TruncatedSpace {
        &self.space
    }

    fn lowering(&self) -> SparseMatrix {
        SparseMatrix::from_triplets(
            self.tau + 1,
            self.tau + 1,
            (1..=self.tau).map(|n| (n - 1, n, C64::new((n as f64).sqrt(), 0.0))),
        )
    }
}

/// `(a, a†)` with `a|n⟩ = √n|n−1⟩`; `a†|τ⟩ = 0`.
pub fn ladder_ops(osc: &Oscillator) -> (Morphism, Morphism) {
    let a = Morphism::new(osc.space.clone(), osc.space.clone(), osc.lowering())
        .expect("square on its own space");
    let a_dag = a.dagger();
    (a, a_dag)
}

/// `‖[a,a†] − (id − (τ+1)|τ⟩⟨τ|)‖_max`.
pub fn ladder_commutator_defect(osc: &Oscillator) -> f64 {
    let (a, a_dag) = ladder_ops(osc);
    let comm = a.commutator(&a_dag).expect("same space");
    let d = osc.tau + 1;
    let expected = SparseMatrix::diagonal_from(
        (0..d).map(|n| C64::new(if n == osc.tau { -(osc.tau as f64) } else { 1.0 }, 0.0)),
    );
    comm.matrix().max_abs_diff(&expected)
}

/// `N = a†a`.
pub fn number_operator(osc: &Oscillator) -> Morphism {
    let (a, a_dag) = ladder_ops(osc);
    a_dag.after(&a).expect("same space")
}

/// `H = ħνN`.
pub fn oscillator_hamiltonian(osc: &Oscillator, nu: f64, hbar: f64) -> Result<Morphism> {
    if !(nu > 0.0) {
        return Err(Error::OutOfRange(format!("frequency {nu} must be positive")));
    }
    Ok(number_operator(osc).scale(C64::new(hbar * nu, 0.0)))
}

/// Checks `[a,a†]` against its corrected form and `[N,a†] = a†`, `[N,a] = −a`.
pub fn oscillator_check(osc: &Oscillator, tol: f64) -> CheckReport {
    let (a, a_dag) = ladder_ops(osc);
    let n = number_operator(osc);
    let raise = n
        .commutator(&a_dag)
        .and_then(|c| c.distance(&a_dag))
        .unwrap_or(f64::INFINITY);
    let lower = n
        .commutator(&a)
        .and_then(|c| c.distance(&a.scale(C64::new(-1.0, 0.0))))
        .unwrap_or(f64::INFINITY);
    CheckReport::group(
        format!("oscillator[t={}]", osc.tau),
        vec![
            CheckReport::leaf("ladder_commutator", ladder_commutator_defect(osc), tol),
            CheckReport::leaf("number_raising", raise, tol),
            CheckReport::leaf("number_lowering", lower, tol),
        ],
        tol,
    )
}

/// `ν_p = √(|p|² + m²)`.
pub fn dispersion(p: &LatticePoint, m: f64) -> f64 {
    (p.norm_squared() + m * m).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Phi,
    Pi,
}

/// One oscillator per momentum `p`, with frequency `ν_p`.
#[derive(Debug, Clone)]
pub struct OscillatorField {
    osc: Oscillator,
    field: FieldSpace,
    omega_uv: u32,
    n: usize,
    mass: f64,
    hbar: f64,
    frequencies: Vec<f64>,
    position_denominator: Option<i64>,
}

impl OscillatorField {
    /// A field over an explicit list of momenta.
    pub fn new(
        tau: usize,
        momenta: Vec<LatticePoint>,
        omega_uv: u32,
        n: usize,
        mass: f64,
        hbar: f64,
        budget: u128,
    ) -> Result<Self> {
        if !(mass >= 0.0) {
            return Err(Error::OutOfRange(format!("mass {mass} must be nonnegative")));
        }
        if !(hbar > 0.0) {
            return Err(Error::OutOfRange(format!("hbar {hbar} must be positive")));
        }
        if omega_uv == 0 {
            return Err(Error::OutOfRange("omega_uv must be positive".into()));
        }
        if let Some(p) = momenta.iter().find(|p| p.n() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: p.n(),
            });
        }
        let osc = Oscillator::new(tau)?;
        let frequencies = momenta.iter().map(|p| dispersion(p, mass)).collect();
        let field = FieldSpace::over_sites(osc.space(), momenta, budget)?;
        Ok(Self {
            osc,
            field,
            omega_uv,
            n,
            mass,
            hbar,
            frequencies,
            position_denominator: None,
        })
    }

    /// A field over the whole `1/ω_uv` momentum mesh of `Z_{ω_uv ω_ir}^n`,
    /// with positions on the `1/ω_ir` mesh.
    pub fn on_uv_lattice(
        tau: usize,
        omega_uv: u32,
        omega_ir: u32,
        n: usize,
        mass: f64,
        hbar: f64,
    ) -> Result<Self> {
        Self::on_uv_lattice_with_budget(tau, omega_uv, omega_ir, n, mass, hbar, DEFAULT_SIZE_BUDGET)
    }

    pub fn on_uv_lattice_with_budget(
        tau: usize,
        omega_uv: u32,
        omega_ir: u32,
        n: usize,
        mass: f64,
        hbar: f64,
        budget: u128,
    ) -> Result<Self> {
        let omega = omega_from_factors(omega_uv, omega_ir)?;
        let momenta = lattice_points(omega, n, Embedding::UvMesh { omega_uv, omega_ir })?;
        let mut f = Self::new(tau, momenta, omega_uv, n, mass, hbar, budget)?;
        f.position_denominator = Some(i64::from(omega_ir));
        Ok(f)
    }

    pub fn oscillator(&self) -> &Oscillator {
        &self.osc
    }

    pub fn field_space(&self) -> &FieldSpace {
        &self.field
    }

    pub fn space(&self) -> &TruncatedSpace {
        self.field.space()
    }

    pub fn momenta(&self) -> &[LatticePoint] {
        self.field.sites()
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// `ω_uv^n`.
    pub fn volume_factor(&self) -> f64 {
        f64::from(self.omega_uv).powi(self.n as i32)
    }

    fn site_of(&self, p: &LatticePoint) -> Result<usize> {
        self.field
            .site_position(p)
            .ok_or_else(|| Error::OffMeshPoint {
                point: p.to_string(),
                mesh: "momentum lattice".into(),
            })
    }

    /// `id ⊗ … ⊗ op ⊗ … ⊗ id` with `op` at site `site`.
    fn local(&self, site: usize, op: &SparseMatrix) -> Morphism {
        let d = self.osc.tau + 1;
        let before = SparseMatrix::identity(d.pow(site as u32));
        let after = SparseMatrix::identity(d.pow((self.field.mu() - site - 1) as u32));
        let mat = before.kron(op).kron(&after);
        Morphism::new(self.space().clone(), self.space().clone(), mat).expect("square on field space")
    }

    /// `(a_p, a†_p)` acting on the oscillator at `p`.
    pub fn site_ladder(&self, p: &LatticePoint) -> Result<(Morphism, Morphism)> {
        let a = self.local(self.site_of(p)?, &self.osc.lowering());
        let a_dag = a.dagger();
        Ok((a, a_dag))
    }

    /// `(a(p), a†(p)) = √(ω_uv^n) (a_p, a†_p)`.
    pub fn site_ladder_rescaled(&self, p: &LatticePoint) -> Result<(Morphism, Morphism)> {
        let (a, a_dag) = self.site_ladder(p)?;
        let s = C64::new(self.volume_factor().sqrt(), 0.0);
        Ok((a.scale(s), a_dag.scale(s)))
    }

    /// `φ(x)` or `π(x)` as a sum over the momentum lattice of rescaled ladders.
    pub fn field_operator(&self, x: &LatticePoint, kind: FieldKind) -> Result<Morphism> {
        if let Some(denom) = self.position_denominator {
            if !x.on_mesh(denom) {
                return Err(Error::OffMeshPoint {
                    point: x.to_string(),
                    mesh: format!("1/{denom}"),
                });
            }
        }
        let inv_volume = 1.0 / self.volume_factor();
        let mut total = Morphism::zero(self.space(), self.space());
        for (p, &nu) in self.momenta().iter().zip(&self.frequencies) {
            if !(nu > 0.0) {
                return Err(Error::ZeroFrequency(p.to_string()));
            }
            let (a, a_dag) = self.site_ladder_rescaled(p)?;
            let phase = turn(p.dot(x)?);
            let (coeff, sign) = match kind {
                FieldKind::Phi => (C64::new(inv_volume / nu.sqrt(), 0.0), 1.0),
                FieldKind::Pi => (C64::new(0.0, -inv_volume * nu.sqrt() / 2.0), -1.0),
            };
            let term = a
                .scale(phase)
                .add(&a_dag.scale(phase.conj() * sign))?
                .scale(coeff);
            total = total.add(&term)?;
        }
        Ok(total)
    }

    /// `[φ(x), π(y)]`.
    pub fn phi_pi_commutator(&self, x: &LatticePoint, y: &LatticePoint) -> Result<Morphism> {
        self.field_operator(x, FieldKind::Phi)?
            .commutator(&self.field_operator(y, FieldKind::Pi)?)
    }

    /// `N = Σ_p a†_p a_p` and `H = Σ_p ħν_p a†_p a_p`.
    pub fn number_and_hamiltonian(&self) -> Result<(Morphism, Morphism)> {
        let mut number = Morphism::zero(self.space(), self.space());
        let mut energy = Morphism::zero(self.space(), self.space());
        for (p, &nu) in self.momenta().iter().zip(&self.frequencies) {
            let (a, a_dag) = self.site_ladder(p)?;
            let np = a_dag.after(&a)?;
            energy = energy.add(&np.scale(C64::new(self.hbar * nu, 0.0)))?;
            number = number.add(&np)?;
        }
        Ok((number, energy))
    }

    /// `N` and `H` written with rescaled ladders, `Σ_p (1/ω_uv^n) a†(p) a(p)`.
    pub fn number_and_hamiltonian_rescaled(&self) -> Result<(Morphism, Morphism)> {
        let inv_volume = C64::new(1.0 / self.volume_factor(), 0.0);
        let mut number = Morphism::zero(self.space(), self.space());
        let mut energy = Morphism::zero(self.space(), self.space());
        for (p, &nu) in self.momenta().iter().zip(&self.frequencies) {
            let (a, a_dag) = self.site_ladder_rescaled(p)?;
            let np = a_dag.after(&a)?.scale(inv_volume);
            energy = energy.add(&np.scale(C64::new(self.hbar * nu, 0.0)))?;
            number = number.add(&np)?;
        }
        Ok((number, energy))
    }

    /// Occupation map `n(p)` of the basis vector at 0-based position `index`.
    pub fn occupation(&self, index: usize) -> Result<Vec<u32>> {
        Ok(self.field.string_at(index)?.chars().iter().map(|c| c - 1).collect())
    }

    /// Basis position of an occupation map.
    pub fn occupation_index(&self, occ: &[u32]) -> Result<usize> {
        let d = self.field.d();
        let s = SiteString::new(d, occ.iter().map(|n| n + 1).collect())?;
        Ok(crate::fields::enc(d, self.field.mu(), &s)? as usize - 1)
    }

    /// One row per number-basis vector, in basis order.
    pub fn spectrum_table(&self) -> Result<Vec<SpectrumRow>> {
        let (number, energy) = self.number_and_hamiltonian()?;
        let nd = number.matrix().diagonal();
        let hd = energy.matrix().diagonal();
        (0..self.field.dim())
            .map(|i| {
                Ok(SpectrumRow {
                    occupation: self.occupation(i)?,
                    number: nd[i].re,
                    energy: hd[i].re,
                })
            })
            .collect()
    }

    /// Checks that `N` and `H` are diagonal with entries `Σ n(p)` and
    /// `Σ ħν_p n(p)`, that `[N,H] = 0`, and that the rescaled forms agree.
    pub fn spectrum_check(&self, tol: f64) -> Result<CheckReport> {
        let (number, energy) = self.number_and_hamiltonian()?;
        let (rn, rh) = self.number_and_hamiltonian_rescaled()?;
        let d = self.field.d();
        let mut diag_err: f64 = 0.0;
        for i in 0..self.field.dim() {
            let s = dec(d, self.field.mu(), i as u128 + 1)?;
            let occ: Vec<f64> = s.chars().iter().map(|&c| f64::from(c - 1)).collect();
            let n_expected: f64 = occ.iter().sum();
            let h_expected: f64 = occ
                .iter()
                .zip(&self.frequencies)
                .map(|(n, nu)| self.hbar * nu * n)
                .sum();
            diag_err = diag_err
                .max((number.matrix().get(i, i) - C64::new(n_expected, 0.0)).norm())
                .max((energy.matrix().get(i, i) - C64::new(h_expected, 0.0)).norm());
        }
        let off_diag = |m: &Morphism| {
            m.matrix()
                .triplets()
                .filter(|(i, j, _)| i != j)
                .map(|(_, _, v)| v.norm())
                .fold(0.0, f64::max)
        };
        let rescaled = number.distance(&rn)?.max(energy.distance(&rh)?);
        Ok(CheckReport::group(
            format!("field_spectrum[mu={},t={}]", self.field.mu(), self.osc.tau),
            vec![
                CheckReport::leaf("diagonal", off_diag(&number).max(off_diag(&energy)), tol),
                CheckReport::leaf("occupation_sums", diag_err, tol),
                CheckReport::leaf("number_energy_commute", number.commutator(&energy)?.matrix().max_abs(), tol),
                CheckReport::leaf("rescaled_agreement", rescaled, tol),
            ],
            tol,
        ))
    }
}

/// A row of the joint number-basis table.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRow {
    pub occupation: Vec<u32>,
    pub number: f64,
    pub energy: f64,
}

impl SpectrumRow {
    /// Occupations joined by `|`, e.g. `0|1`.
    pub fn occupation_string(&self) -> String {
        let parts: Vec<String> = self.occupation.iter().map(|n| n.to_string()).collect();
        parts.join("|")
    }
}

/// `count(q) = Σ_{p : cell(p) = q} n(p)`.
pub fn bucket_counts<Q: Ord>(
    config: &[(LatticePoint, u64)],
    cell: impl Fn(&LatticePoint) -> Q,
) -> BTreeMap<Q, u64> {
    let mut out = BTreeMap::new();
    for (p, n) in config {
        *out.entry(cell(p)).or_insert(0) += n;
    }
    out
}

/// The integer point `q` whose cell `[q − 1/2, q + 1/2)^n` contains `p`.
pub fn nearest_integer_cell(p: &LatticePoint) -> Vec<i64> {
    p.coords()
        .iter()
        .map(|c| (c + Rational64::new(1, 2)).floor().to_integer())
        .collect()
}
