//! The cyclic group `Z_{2ω+1}^n` on the symmetric interval `[-ω, ω]`, its
//! characters, and the three ways of embedding it as a lattice.

use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::sparse::C64;

/// An element of `Z_{2ω+1}^n`, every coordinate in `[-ω, ω]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    omega: i64,
    coords: Vec<i64>,
}

impl GroupElement {
    pub fn new(omega: u32, coords: Vec<i64>) -> Result<Self> {
        let w = i64::from(omega);
        if let Some(k) = coords.iter().find(|k| k.abs() > w) {
            return Err(Error::OutOfRange(format!(
                "coordinate {k} outside [-{w}, {w}]"
            )));
        }
        Ok(Self { omega: w, coords })
    }

    pub fn zero(omega: u32, n: usize) -> Self {
        Self {
            omega: i64::from(omega),
            coords: vec![0; n],
        }
    }

    pub fn omega(&self) -> u32 {
        self.omega as u32
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    fn modulus(&self) -> i64 {
        2 * self.omega + 1
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.omega != other.omega || self.n() != other.n() {
            return Err(Error::ParameterMismatch(format!(
                "Z_{}^{} vs Z_{}^{}",
                self.modulus(),
                self.n(),
                other.modulus(),
                other.n()
            )));
        }
        Ok(())
    }

    /// `k ⊕ h` together with the wraparound vector `s ∈ {-1,0,1}^n`, defined
    /// by `k ⊕ h = k + h − (2ω+1) s`.
    pub fn add_with_wrap(&self, other: &Self) -> Result<(Self, Vec<i64>)> {
        self.check_compatible(other)?;
        let m = self.modulus();
        let (coords, wrap) = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(&k, &h)| {
                let s = k + h;
                if s > self.omega {
                    (s - m, 1)
                } else if s < -self.omega {
                    (s + m, -1)
                } else {
                    (s, 0)
                }
            })
            .unzip();
        Ok((
            Self {
                omega: self.omega,
                coords,
            },
            wrap,
        ))
    }

    pub fn neg(&self) -> Self {
        Self {
            omega: self.omega,
            coords: self.coords.iter().map(|k| -k).collect(),
        }
    }

    /// Position in the canonical lexicographic enumeration.
    pub fn index(&self) -> usize {
        let m = self.modulus();
        self.coords
            .iter()
            .fold(0i64, |acc, &k| acc * m + (k + self.omega)) as usize
    }

    /// Inverse of [`GroupElement::index`].
    pub fn from_index(omega: u32, n: usize, mut index: usize) -> Result<Self> {
        let m = 2 * omega as usize + 1;
        if index >= group_order(omega, n) {
            return Err(Error::OutOfRange(format!(
                "index {index} outside Z_{m}^{n}"
            )));
        }
        let mut coords = vec![0i64; n];
        for c in coords.iter_mut().rev() {
            *c = (index % m) as i64 - i64::from(omega);
            index /= m;
        }
        Ok(Self {
            omega: i64::from(omega),
            coords,
        })
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|k| k.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// `k ⊕ h`, coordinatewise addition with wraparound into `[-ω, ω]`.
pub fn gadd(k: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
    Ok(k.add_with_wrap(h)?.0)
}

/// `(2ω+1)^n`.
pub fn group_order(omega: u32, n: usize) -> usize {
    (2 * omega as usize + 1).pow(n as u32)
}

/// All of `Z_{2ω+1}^n` in lexicographic order, coordinates from `-ω` to `ω`.
pub fn enumerate(omega: u32, n: usize) -> Vec<GroupElement> {
    (0..group_order(omega, n))
        .map(|i| GroupElement::from_index(omega, n, i).expect("index in range"))
        .collect()
}

/// A point of `Q^n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint {
    coords: Vec<Rational64>,
}

impl LatticePoint {
    pub fn new(coords: Vec<Rational64>) -> Self {
        Self { coords }
    }

    pub fn origin(n: usize) -> Self {
        Self {
            coords: vec![Rational64::zero(); n],
        }
    }

    /// Convenience constructor from `(numerator, denominator)` pairs.
    pub fn from_fractions(parts: &[(i64, i64)]) -> Self {
        Self {
            coords: parts.iter().map(|&(a, b)| Rational64::new(a, b)).collect(),
        }
    }

    /// The point `k / denominator`.
    pub fn scaled(k: &GroupElement, denominator: i64) -> Self {
        Self {
            coords: k
                .coords()
                .iter()
                .map(|&c| Rational64::new(c, denominator))
                .collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Rational64] {
        &self.coords
    }

    pub fn neg(&self) -> Self {
        Self {
            coords: self.coords.iter().map(|c| -c).collect(),
        }
    }

    pub fn is_origin(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    /// Whether every coordinate is an integer multiple of `1/denominator`.
    pub fn on_mesh(&self, denominator: i64) -> bool {
        self.coords
            .iter()
            .all(|c| (c * Rational64::from_integer(denominator)).is_integer())
    }

    /// Integer indices `x * denominator`, if the point is on that mesh.
    pub fn mesh_indices(&self, denominator: i64) -> Option<Vec<i64>> {
        self.coords
            .iter()
            .map(|c| {
                let s = c * Rational64::from_integer(denominator);
                s.is_integer().then(|| s.to_integer())
            })
            .collect()
    }

    /// Exact dot product.
    pub fn dot(&self, other: &Self) -> Result<Rational64> {
        if self.n() != other.n() {
            return Err(Error::ParameterMismatch(format!(
                "points of dimension {} and {}",
                self.n(),
                other.n()
            )));
        }
        Ok(self
            .coords
            .iter()
            .zip(&other.coords)
            .fold(Rational64::zero(), |acc, (a, b)| acc + a * b))
    }

    pub fn norm_squared(&self) -> f64 {
        self.coords.iter().map(|c| ratio_to_f64(c).powi(2)).sum()
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for LatticePoint {
    type Err = Error;

    /// Parses comma-separated rationals such as `1/3,-2/5` or `0`.
    fn from_str(s: &str) -> Result<Self> {
        let coords = s
            .split(',')
            .map(|part| {
                let part = part.trim();
                part.parse::<Rational64>().map_err(|_| {
                    Error::OutOfRange(format!("cannot parse {part:?} as a rational"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { coords })
    }
}

pub fn ratio_to_f64(r: &Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `e^{i 2π r}`, with `r` reduced into `[0, 1)` exactly before exponentiating.
pub fn turn(r: Rational64) -> C64 {
    let frac = r - r.floor();
    debug_assert!(!frac.is_negative());
    C64::from_polar(1.0, 2.0 * std::f64::consts::PI * ratio_to_f64(&frac))
}

/// `χ_p(x) = e^{−i 2π p·x}` for two rational points.
pub fn plane_wave(p: &LatticePoint, x: &LatticePoint) -> Result<C64> {
    Ok(turn(-p.dot(x)?))
}

/// The character `χ_k(x) = e^{−i 2π k·x}` of a group element at a point.
pub fn character(k: &GroupElement, x: &LatticePoint) -> Result<C64> {
    if k.n() != x.n() {
        return Err(Error::ParameterMismatch(format!(
            "group element of dimension {} and point of dimension {}",
            k.n(),
            x.n()
        )));
    }
    plane_wave(&LatticePoint::scaled(k, 1), x)
}

/// The three lattice embeddings of `Z_{2ω+1}^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Embedding {
    /// `k ↦ k`
    UnitMesh,
    /// `k ↦ k / ω_uv` with `2ω+1 = ω_uv ω_ir`
    UvMesh { omega_uv: u32, omega_ir: u32 },
    /// `k ↦ k / (2ω+1)`
    TorusMesh,
}

impl Embedding {
    /// Denominator of the mesh for a given ω.
    pub fn denominator(&self, omega: u32) -> i64 {
        match *self {
            Embedding::UnitMesh => 1,
            Embedding::UvMesh { omega_uv, .. } => i64::from(omega_uv),
            Embedding::TorusMesh => 2 * i64::from(omega) + 1,
        }
    }
}

/// Checks `2ω+1 = ω_uv ω_ir` with both factors odd, returning ω.
pub fn omega_from_factors(omega_uv: u32, omega_ir: u32) -> Result<u32> {
    if omega_uv.is_multiple_of(2) || omega_ir.is_multiple_of(2) {
        return Err(Error::BadFactorization(format!(
            "factors {omega_uv} and {omega_ir} must both be odd"
        )));
    }
    Ok((omega_uv * omega_ir - 1) / 2)
}

pub fn lattice_points(omega: u32, n: usize, embedding: Embedding) -> Result<Vec<LatticePoint>> {
    if let Embedding::UvMesh { omega_uv, omega_ir } = embedding {
        let expected = omega_from_factors(omega_uv, omega_ir)?;
        if expected != omega {
            return Err(Error::BadFactorization(format!(
                "2ω+1 = {} is not {omega_uv} × {omega_ir}",
                2 * omega + 1
            )));
        }
    }
    let denom = embedding.denominator(omega);
    Ok(enumerate(omega, n)
        .iter()
        .map(|k| LatticePoint::scaled(k, denom))
        .collect())
}

/// `x ⊞ y` on the lattice `(1/denominator) Z_{2ω+1}^n`: add mesh indices with
/// `⊕`. Returns `None` if either point is off the mesh or out of range.
pub fn mesh_add(
    x: &LatticePoint,
    y: &LatticePoint,
    omega: u32,
    denominator: i64,
) -> Option<LatticePoint> {
    let kx = GroupElement::new(omega, x.mesh_indices(denominator)?).ok()?;
    let ky = GroupElement::new(omega, y.mesh_indices(denominator)?).ok()?;
    let sum = gadd(&kx, &ky).ok()?;
    Some(LatticePoint::scaled(&sum, denominator))
}
