//! Quantum fields on lattices: a copy of a site space at every lattice point,
//! addressed through strings `s ∈ {1..D}^μ`.
//!
//! `dec(D, μ, i)` writes `i − 1` in base `D` with `μ` digits, most significant
//! digit first, and adds one to every digit; `enc` is its inverse. Site `1` is
//! therefore the leftmost tensor factor, which makes the field basis vector
//! `e_s = e_{s(1)} ⊗ ... ⊗ e_{s(μ)}` sit at position `enc(s) − 1` under the
//! row-major Kronecker pairing used everywhere else.

use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::frobenius::{algebra_from_basis, FrobeniusAlgebra};
use crate::groups::{lattice_points, Embedding, LatticePoint};
use crate::hilb::{Morphism, TruncatedSpace, DEFAULT_TOL};
use crate::sparse::{SparseMatrix, C64};

/// Largest field dimension `D^μ` built without an explicit override.
pub const DEFAULT_SIZE_BUDGET: u128 = 1 << 20;

/// A string of `μ` characters in `1..=D`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SiteString {
    d: u32,
    chars: Vec<u32>,
}

impl SiteString {
    pub fn new(d: u32, chars: Vec<u32>) -> Result<Self> {
        if let Some(c) = chars.iter().find(|&&c| c == 0 || c > d) {
            return Err(Error::OutOfRange(format!("character {c} outside 1..={d}")));
        }
        Ok(Self { d, chars })
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn mu(&self) -> usize {
        self.chars.len()
    }

    pub fn chars(&self) -> &[u32] {
        &self.chars
    }

    /// The character at site `site` (0-based).
    pub fn at(&self, site: usize) -> u32 {
        self.chars[site]
    }
}

impl std::fmt::Display for SiteString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.chars.iter().map(|c| c.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

fn checked_size(d: u32, mu: usize) -> Option<u128> {
    u128::from(d).checked_pow(u32::try_from(mu).ok()?)
}

/// `enc_{D,μ}: {1..D}^μ -> {1..D^μ}`.
pub fn enc(d: u32, mu: usize, s: &SiteString) -> Result<u128> {
    if s.d != d || s.mu() != mu {
        return Err(Error::OutOfRange(format!(
            "string over {} characters of length {} used with D={d}, mu={mu}",
            s.d,
            s.mu()
        )));
    }
    checked_size(d, mu).ok_or_else(|| Error::OutOfRange(format!("{d}^{mu} overflows")))?;
    Ok(s
        .chars
        .iter()
        .fold(0u128, |acc, &c| acc * u128::from(d) + u128::from(c - 1))
        + 1)
}

/// `dec_{D,μ}: {1..D^μ} -> {1..D}^μ`.
pub fn dec(d: u32, mu: usize, index: u128) -> Result<SiteString> {
    let size = checked_size(d, mu).ok_or_else(|| Error::OutOfRange(format!("{d}^{mu} overflows")))?;
    if index == 0 || index > size || d == 0 {
        return Err(Error::OutOfRange(format!("index {index} outside 1..={size}")));
    }
    let mut rem = index - 1;
    let mut chars = vec![0u32; mu];
    for c in chars.iter_mut().rev() {
        *c = (rem % u128::from(d)) as u32 + 1;
        rem /= u128::from(d);
    }
    Ok(SiteString { d, chars })
}

/// `site_space^{⊗μ}` over an ordered list of sites.
#[derive(Debug, Clone)]
pub struct FieldSpace {
    site_space: TruncatedSpace,
    sites: Vec<LatticePoint>,
    space: TruncatedSpace,
}

/// Field over the lattice `Z_{2ω+1}^n` (`μ = (2ω+1)^n`, lexicographic site order).
pub fn make_field_space(site_space: &TruncatedSpace, omega: u32, n: usize) -> Result<FieldSpace> {
    make_field_space_with_budget(site_space, omega, n, DEFAULT_SIZE_BUDGET)
}

pub fn make_field_space_with_budget(
    site_space: &TruncatedSpace,
    omega: u32,
    n: usize,
    budget: u128,
) -> Result<FieldSpace> {
    let sites = lattice_points(omega, n, Embedding::UnitMesh)?;
    FieldSpace::over_sites(site_space, sites, budget)
}

impl FieldSpace {
    /// Field over an arbitrary ordered list of sites.
    pub fn over_sites(
        site_space: &TruncatedSpace,
        sites: Vec<LatticePoint>,
        budget: u128,
    ) -> Result<Self> {
        let d = site_space.dim() as u32;
        let required = checked_size(d, sites.len()).unwrap_or(u128::MAX);
        if required > budget {
            return Err(Error::SizeBudgetExceeded { required, budget });
        }
        Ok(Self {
            site_space: site_space.clone(),
            space: site_space.power(sites.len()),
            sites,
        })
    }

    pub fn site_space(&self) -> &TruncatedSpace {
        &self.site_space
    }

    pub fn space(&self) -> &TruncatedSpace {
        &self.space
    }

    pub fn sites(&self) -> &[LatticePoint] {
        &self.sites
    }

    /// `μ`, the number of sites.
    pub fn mu(&self) -> usize {
        self.sites.len()
    }

    /// `D`, the site dimension.
    pub fn d(&self) -> u32 {
        self.site_space.dim() as u32
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// Position of a site in the enumeration.
    pub fn site_position(&self, site: &LatticePoint) -> Option<usize> {
        self.sites.iter().position(|s| s == site)
    }

    /// `s(k)`: the character of `s` at lattice site `k`.
    pub fn char_at(&self, s: &SiteString, site: &LatticePoint) -> Option<u32> {
        self.site_position(site).map(|i| s.at(i))
    }

    /// The basis string at 0-based position `index`.
    pub fn string_at(&self, index: usize) -> Result<SiteString> {
        dec(self.d(), self.mu(), index as u128 + 1)
    }

    fn check_sites<'a>(&self, vs: &'a [DVector<C64>]) -> Result<&'a [DVector<C64>]> {
        if vs.len() != self.mu() {
            return Err(Error::DimensionMismatch {
                expected: self.mu(),
                found: vs.len(),
            });
        }
        if let Some(v) = vs.iter().find(|v| v.len() != self.site_space.dim()) {
            return Err(Error::DimensionMismatch {
                expected: self.site_space.dim(),
                found: v.len(),
            });
        }
        Ok(vs)
    }
}

/// `θ(k ↦ Σ_d v_d(k) e_d) = Σ_s (Π_k v_{s(k)}(k)) e_s`.
pub fn theta(fs: &FieldSpace, site_vectors: &[DVector<C64>]) -> Result<DVector<C64>> {
    let vs = fs.check_sites(site_vectors)?;
    Ok(vs
        .iter()
        .fold(DVector::from_element(1, C64::new(1.0, 0.0)), |acc, v| acc.kronecker(v)))
}

/// The copy algebra of the product basis `φ_s = ⊗_k φ^{(k)}_{s(k)}`, where
/// the columns of `site_frames[k]` are the orthonormal family at site `k`.
pub fn field_observable(fs: &FieldSpace, site_frames: &[DMatrix<C64>]) -> Result<FrobeniusAlgebra> {
    if site_frames.len() != fs.mu() {
        return Err(Error::DimensionMismatch {
            expected: fs.mu(),
            found: site_frames.len(),
        });
    }
    let d = fs.site_space.dim();
    let mut basis = SparseMatrix::identity(1);
    for f in site_frames {
        if f.shape() != (d, d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: f.nrows().max(f.ncols()),
            });
        }
        let deviation = (f.adjoint() * f - DMatrix::identity(d, d))
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        if !(deviation < DEFAULT_TOL) {
            return Err(Error::NonOrthonormalFrame { deviation });
        }
        basis = basis.kron(&SparseMatrix::from_dense(f));
    }
    algebra_from_basis(&fs.space, &basis)
}

/// A black-box multilinear map on site-vector tuples.
pub type MultilinearMap<'a> = dyn Fn(&[DVector<C64>]) -> DVector<C64> + 'a;

fn random_vector(rng: &mut StdRng, d: usize) -> DVector<C64> {
    DVector::from_fn(d, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn random_sites(rng: &mut StdRng, fs: &FieldSpace) -> Vec<DVector<C64>> {
    (0..fs.mu())
        .map(|_| random_vector(rng, fs.site_space.dim()))
        .collect()
}

/// Random product inputs for probing, from a fixed seed.
pub fn random_product_inputs(fs: &FieldSpace, count: usize, seed: u64) -> Vec<Vec<DVector<C64>>> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..count).map(|_| random_sites(&mut rng, fs)).collect()
}

fn max_abs(v: &DVector<C64>) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Probes linearity of `f` in each slot at random points:
/// `f(…, αv + βw, …) = α f(…, v, …) + β f(…, w, …)`.
pub fn check_multilinear(
    fs: &FieldSpace,
    f: &MultilinearMap<'_>,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<()> {
    let mut rng = StdRng::seed_from_u64(seed);
    for _ in 0..trials {
        let base = random_sites(&mut rng, fs);
        for slot in 0..fs.mu() {
            let w = random_vector(&mut rng, fs.site_space.dim());
            let alpha = C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let beta = C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let mut mixed = base.clone();
            mixed[slot] = base[slot].scale(1.0).map(|c| c * alpha) + w.map(|c| c * beta);
            let mut other = base.clone();
            other[slot] = w.clone();
            let fv = f(&base);
            let fw = f(&other);
            let lhs = f(&mixed);
            if lhs.len() != fv.len() {
                return Err(Error::DimensionMismatch {
                    expected: fv.len(),
                    found: lhs.len(),
                });
            }
            let rhs = fv.map(|c| c * alpha) + fw.map(|c| c * beta);
            let defect = max_abs(&(&lhs - &rhs));
            let scale = 1.0 + max_abs(&lhs).max(max_abs(&rhs));
            if !(defect <= tol * scale) {
                return Err(Error::NotMultilinear { slot, defect });
            }
        }
    }
    Ok(())
}

/// The unique linear `F` with `F ∘ θ = F̃`, defined on the field basis by
/// `F(e_s) = F̃(k ↦ e_{s(k)})`. `F̃` is first probed for multilinearity.
pub fn factor_through_theta(
    fs: &FieldSpace,
    f_tilde: &MultilinearMap<'_>,
    target: &TruncatedSpace,
) -> Result<Morphism> {
    check_multilinear(fs, f_tilde, 4, 0x5eed, DEFAULT_TOL)?;
    let d = fs.site_space.dim();
    let unit_vectors: Vec<DVector<C64>> = (0..d)
        .map(|i| DVector::from_fn(d, |r, _| C64::new(if r == i { 1.0 } else { 0.0 }, 0.0)))
        .collect();
    let mut columns = Vec::with_capacity(fs.dim());
    for index in 0..fs.dim() {
        let s = fs.string_at(index)?;
        let args: Vec<DVector<C64>> = s
            .chars()
            .iter()
            .map(|&c| unit_vectors[c as usize - 1].clone())
            .collect();
        let value = f_tilde(&args);
        if value.len() != target.dim() {
            return Err(Error::DimensionMismatch {
                expected: target.dim(),
                found: value.len(),
            });
        }
        columns.push(
            value
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != C64::new(0.0, 0.0))
                .map(|(r, &c)| (r, c))
                .collect(),
        );
    }
    Morphism::new(
        fs.space.clone(),
        target.clone(),
        SparseMatrix::from_columns(target.dim(), columns),
    )
}

/// `max |F(θ(v)) − F̃(v)|` over the given product inputs.
pub fn factorization_residual(
    fs: &FieldSpace,
    f: &Morphism,
    f_tilde: &MultilinearMap<'_>,
    inputs: &[Vec<DVector<C64>>],
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for v in inputs {
        let lhs = f.apply(&theta(fs, v)?)?;
        let rhs = f_tilde(v);
        worst = worst.max(max_abs(&(&lhs - &rhs)));
    }
    Ok(worst)
}
