//! Objects, morphisms and the dagger compact structure of the finite model.
//!
//! An object is a finite orthonormal family inside an ambient space, stored
//! as the isometry `E` whose columns are the family. Its truncating projector
//! is `P = E E†`. A morphism `H -> G` is stored in frame coordinates, i.e. the
//! matrix `<f_m| F |e_n>`; the ambient action `E_G M E_H†` then satisfies
//! `P_G F P_H = F` automatically.
//!
//! Tensor products are strictly associative and unital: a space is a list of
//! atomic factors, the unit object is the empty list, and the tensor product
//! concatenates lists. Index pairing is row-major, `(i, j) -> i * D2 + j`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::groups::{GroupElement, LatticePoint};
use crate::sparse::{SparseMatrix, C64};

/// Default absolute tolerance on the max-entry norm.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Complex scalars of the model.
pub type Scalar = C64;

#[derive(Debug, Clone, PartialEq)]
pub enum Label {
    Group(GroupElement),
    Point(LatticePoint),
    Text(String),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Group(g) => write!(f, "{g}"),
            Label::Point(p) => write!(f, "{p}"),
            Label::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Debug)]
struct Atom {
    name: String,
    ambient_dim: usize,
    dim: usize,
    frame: SparseMatrix,
    labels: Option<Vec<Label>>,
    /// Amplitude carried by the physical basis functions but not by the
    /// orthonormal model coordinates (e.g. `1/sqrt(omega_uv)`).
    amplitude: f64,
}

#[derive(Debug, Clone)]
struct Factor {
    atom: Arc<Atom>,
    dual: bool,
}

impl PartialEq for Factor {
    fn eq(&self, other: &Self) -> bool {
        if self.dual != other.dual {
            return false;
        }
        if Arc::ptr_eq(&self.atom, &other.atom) {
            return true;
        }
        let (a, b) = (&*self.atom, &*other.atom);
        a.name == b.name
            && a.dim == b.dim
            && a.ambient_dim == b.ambient_dim
            && a.labels == b.labels
            && a.frame == b.frame
    }
}

/// An object of the model: an orthonormal family of `dim` vectors in an
/// ambient space of dimension `ambient_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSpace {
    factors: Vec<Factor>,
}

/// Residuals of the frame and projector laws of a space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameResiduals {
    /// `max |E†E - I|`
    pub gram: f64,
    /// `max |P P - P|`
    pub idempotence: f64,
    /// `max |P - P†|`
    pub self_adjointness: f64,
}

impl FrameResiduals {
    pub fn max(&self) -> f64 {
        self.gram.max(self.idempotence).max(self.self_adjointness)
    }
}

impl TruncatedSpace {
    /// Builds a space from an explicit orthonormal frame, checked at [`DEFAULT_TOL`].
    pub fn new(
        name: impl Into<String>,
        ambient_dim: usize,
        frame: &[DVector<C64>],
        labels: Option<Vec<Label>>,
    ) -> Result<Self> {
        Self::with_tolerance(name, ambient_dim, frame, labels, DEFAULT_TOL)
    }

    pub fn with_tolerance(
        name: impl Into<String>,
        ambient_dim: usize,
        frame: &[DVector<C64>],
        labels: Option<Vec<Label>>,
        tol: f64,
    ) -> Result<Self> {
        if let Some(v) = frame.iter().find(|v| v.len() != ambient_dim) {
            return Err(Error::DimensionMismatch {
                expected: ambient_dim,
                found: v.len(),
            });
        }
        if frame.len() > ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: ambient_dim,
                found: frame.len(),
            });
        }
        if let Some(labels) = &labels {
            if labels.len() != frame.len() {
                return Err(Error::DimensionMismatch {
                    expected: frame.len(),
                    found: labels.len(),
                });
            }
        }
        let dense = DMatrix::from_columns(frame);
        let dense = if frame.is_empty() {
            DMatrix::zeros(ambient_dim, 0)
        } else {
            dense
        };
        let e = SparseMatrix::from_dense(&dense);
        let deviation = e
            .adjoint()
            .matmul(&e)
            .max_abs_diff(&SparseMatrix::identity(frame.len()));
        if !(deviation < tol) {
            return Err(Error::NonOrthonormalFrame { deviation });
        }
        Ok(Self::from_atom(Atom {
            name: name.into(),
            ambient_dim,
            dim: frame.len(),
            frame: e,
            labels,
            amplitude: 1.0,
        }))
    }

    /// The standard basis of `C^dim`; the projector is the identity.
    pub fn standard(name: impl Into<String>, dim: usize) -> Self {
        Self::from_atom(Atom {
            name: name.into(),
            ambient_dim: dim,
            dim,
            frame: SparseMatrix::identity(dim),
            labels: None,
            amplitude: 1.0,
        })
    }

    /// Standard basis with one label per basis vector.
    pub fn standard_labeled(name: impl Into<String>, labels: Vec<Label>) -> Self {
        let dim = labels.len();
        Self::from_atom(Atom {
            name: name.into(),
            ambient_dim: dim,
            dim,
            frame: SparseMatrix::identity(dim),
            labels: Some(labels),
            amplitude: 1.0,
        })
    }

    /// A `dim`-dimensional space embedded in a larger ambient space through the
    /// first `dim` columns of the unitary discrete Fourier matrix, so that the
    /// projector is neither diagonal nor the identity.
    pub fn padded(
        name: impl Into<String>,
        dim: usize,
        ambient_dim: usize,
        labels: Option<Vec<Label>>,
    ) -> Result<Self> {
        if dim > ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: ambient_dim,
                found: dim,
            });
        }
        let norm = (ambient_dim as f64).sqrt();
        let frame: Vec<DVector<C64>> = (0..dim)
            .map(|j| {
                DVector::from_fn(ambient_dim, |i, _| {
                    let angle = 2.0 * std::f64::consts::PI * ((i * j) % ambient_dim) as f64
                        / ambient_dim as f64;
                    C64::from_polar(1.0 / norm, angle)
                })
            })
            .collect();
        Self::new(name, ambient_dim, &frame, labels)
    }

    /// The monoidal unit: a one-dimensional space with no factors.
    pub fn unit() -> Self {
        Self {
            factors: Vec::new(),
        }
    }

    fn from_atom(atom: Atom) -> Self {
        Self {
            factors: vec![Factor {
                atom: Arc::new(atom),
                dual: false,
            }],
        }
    }

    /// Attaches a physical amplitude (metadata only, not used in coordinates).
    pub fn with_amplitude(self, amplitude: f64) -> Self {
        match self.factors.as_slice() {
            [f] => {
                let a = &f.atom;
                Self::from_atom(Atom {
                    name: a.name.clone(),
                    ambient_dim: a.ambient_dim,
                    dim: a.dim,
                    frame: a.frame.clone(),
                    labels: a.labels.clone(),
                    amplitude,
                })
            }
            _ => self,
        }
    }

    pub fn amplitude(&self) -> f64 {
        self.factors.iter().map(|f| f.atom.amplitude).product()
    }

    pub fn is_unit(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.atom.dim).product()
    }

    pub fn ambient_dim(&self) -> usize {
        self.factors.iter().map(|f| f.atom.ambient_dim).product()
    }

    /// Number of tensor factors (0 for the unit).
    pub fn arity(&self) -> usize {
        self.factors.len()
    }

    /// Basis labels, available for single non-dual factors.
    pub fn labels(&self) -> Option<&[Label]> {
        match self.factors.as_slice() {
            [f] if !f.dual => f.atom.labels.as_deref(),
            _ => None,
        }
    }

    /// The isometry `E` (ambient_dim x dim) whose columns are the frame.
    pub fn frame(&self) -> SparseMatrix {
        self.factors
            .iter()
            .fold(SparseMatrix::identity(1), |acc, f| {
                let e = if f.dual {
                    f.atom.frame.conj()
                } else {
                    f.atom.frame.clone()
                };
                acc.kron(&e)
            })
    }

    /// The truncating projector `P = E E†` on the ambient space.
    pub fn projector(&self) -> SparseMatrix {
        let e = self.frame();
        e.matmul(&e.adjoint())
    }

    pub fn frame_residuals(&self) -> FrameResiduals {
        let e = self.frame();
        let gram = e
            .adjoint()
            .matmul(&e)
            .max_abs_diff(&SparseMatrix::identity(self.dim()));
        let p = e.matmul(&e.adjoint());
        FrameResiduals {
            gram,
            idempotence: p.matmul(&p).max_abs_diff(&p),
            self_adjointness: p.max_abs_diff(&p.adjoint()),
        }
    }

    /// The dual object `H*`, framed by the conjugate family.
    pub fn dual(&self) -> Self {
        Self {
            factors: self
                .factors
                .iter()
                .rev()
                .map(|f| Factor {
                    atom: f.atom.clone(),
                    dual: !f.dual,
                })
                .collect(),
        }
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        Self { factors }
    }

    /// `self ⊗ self ⊗ ... ` (`k` copies; the unit for `k = 0`).
    pub fn power(&self, k: usize) -> Self {
        (0..k).fold(Self::unit(), |acc, _| acc.tensor(self))
    }

    /// Human-readable description, e.g. `T ⊗ T*`.
    pub fn describe(&self) -> String {
        if self.factors.is_empty() {
            return "I".to_string();
        }
        self.factors
            .iter()
            .map(|f| {
                if f.dual {
                    format!("{}*", f.atom.name)
                } else {
                    f.atom.name.clone()
                }
            })
            .collect::<Vec<_>>()
            .join(" ⊗ ")
    }

    /// Coordinates of an ambient vector: `E† v`.
    pub fn coordinates(&self, ambient: &DVector<C64>) -> Result<DVector<C64>> {
        if ambient.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                found: ambient.len(),
            });
        }
        let v = self.frame().adjoint().matmul(&SparseMatrix::column_vector(ambient));
        Ok(v.column_dense(0))
    }

    /// Ambient vector of model coordinates: `E c`.
    pub fn embed(&self, coords: &DVector<C64>) -> Result<DVector<C64>> {
        if coords.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: coords.len(),
            });
        }
        let v = self.frame().matmul(&SparseMatrix::column_vector(coords));
        Ok(v.column_dense(0))
    }
}

impl fmt::Display for TruncatedSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (dim {})", self.describe(), self.dim())
    }
}

fn ensure_same(left: &TruncatedSpace, right: &TruncatedSpace) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::SpaceMismatch {
            left: left.to_string(),
            right: right.to_string(),
        })
    }
}

/// A linear map between truncated spaces, in frame coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Morphism {
    source: TruncatedSpace,
    target: TruncatedSpace,
    mat: SparseMatrix,
}

impl Morphism {
    pub fn new(source: TruncatedSpace, target: TruncatedSpace, mat: SparseMatrix) -> Result<Self> {
        if mat.rows() != target.dim() {
            return Err(Error::DimensionMismatch {
                expected: target.dim(),
                found: mat.rows(),
            });
        }
        if mat.cols() != source.dim() {
            return Err(Error::DimensionMismatch {
                expected: source.dim(),
                found: mat.cols(),
            });
        }
        Ok(Self {
            source,
            target,
            mat,
        })
    }

    pub fn from_dense(
        source: TruncatedSpace,
        target: TruncatedSpace,
        mat: &DMatrix<C64>,
    ) -> Result<Self> {
        Self::new(source, target, SparseMatrix::from_dense(mat))
    }

    pub fn identity(space: &TruncatedSpace) -> Self {
        Self {
            source: space.clone(),
            target: space.clone(),
            mat: SparseMatrix::identity(space.dim()),
        }
    }

    pub fn zero(source: &TruncatedSpace, target: &TruncatedSpace) -> Self {
        Self {
            source: source.clone(),
            target: target.clone(),
            mat: SparseMatrix::zeros(target.dim(), source.dim()),
        }
    }

    /// The scalar `c` as a morphism `I -> I`.
    pub fn scalar(c: C64) -> Self {
        Self {
            source: TruncatedSpace::unit(),
            target: TruncatedSpace::unit(),
            mat: SparseMatrix::diagonal_from([c]),
        }
    }

    /// The state `|v⟩ : I -> H` for model coordinates `v`.
    pub fn state(space: &TruncatedSpace, v: &DVector<C64>) -> Result<Self> {
        Self::new(
            TruncatedSpace::unit(),
            space.clone(),
            SparseMatrix::column_vector(v),
        )
    }

    /// The effect `⟨v| : H -> I`.
    pub fn effect(space: &TruncatedSpace, v: &DVector<C64>) -> Result<Self> {
        Ok(Self::state(space, v)?.dagger())
    }

    /// Restricts an ambient operator `F : ambient(H) -> ambient(G)` to the
    /// frames: `mat[m][n] = <f_m| F |e_n>`.
    pub fn truncate(
        ambient: &SparseMatrix,
        source: &TruncatedSpace,
        target: &TruncatedSpace,
    ) -> Result<Self> {
        if ambient.rows() != target.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: target.ambient_dim(),
                found: ambient.rows(),
            });
        }
        if ambient.cols() != source.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: source.ambient_dim(),
                found: ambient.cols(),
            });
        }
        let mat = target
            .frame()
            .adjoint()
            .matmul(ambient)
            .matmul(&source.frame());
        Self::new(source.clone(), target.clone(), mat)
    }

    /// The ambient action `E_G M E_H†`.
    pub fn ambient(&self) -> SparseMatrix {
        self.target
            .frame()
            .matmul(&self.mat)
            .matmul(&self.source.frame().adjoint())
    }

    pub fn source(&self) -> &TruncatedSpace {
        &self.source
    }

    pub fn target(&self) -> &TruncatedSpace {
        &self.target
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.mat
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        self.mat.to_dense()
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn after(&self, first: &Morphism) -> Result<Morphism> {
        ensure_same(&first.target, &self.source)?;
        Ok(Self {
            source: first.source.clone(),
            target: self.target.clone(),
            mat: self.mat.matmul(&first.mat),
        })
    }

    /// `next ∘ self`: apply `self`, then `next` (diagram order).
    pub fn then(&self, next: &Morphism) -> Result<Morphism> {
        next.after(self)
    }

    pub fn tensor(&self, other: &Morphism) -> Morphism {
        Self {
            source: self.source.tensor(&other.source),
            target: self.target.tensor(&other.target),
            mat: self.mat.kron(&other.mat),
        }
    }

    pub fn dagger(&self) -> Morphism {
        Self {
            source: self.target.clone(),
            target: self.source.clone(),
            mat: self.mat.adjoint(),
        }
    }

    pub fn scale(&self, c: C64) -> Morphism {
        Self {
            source: self.source.clone(),
            target: self.target.clone(),
            mat: self.mat.scale(c),
        }
    }

    fn ensure_parallel(&self, other: &Morphism) -> Result<()> {
        ensure_same(&self.source, &other.source)?;
        ensure_same(&self.target, &other.target)
    }

    pub fn add(&self, other: &Morphism) -> Result<Morphism> {
        self.ensure_parallel(other)?;
        Ok(Self {
            source: self.source.clone(),
            target: self.target.clone(),
            mat: self.mat.add(&other.mat),
        })
    }

    pub fn sub(&self, other: &Morphism) -> Result<Morphism> {
        self.ensure_parallel(other)?;
        Ok(Self {
            source: self.source.clone(),
            target: self.target.clone(),
            mat: self.mat.sub(&other.mat),
        })
    }

    /// `[self, other] = self∘other − other∘self` for endomorphisms.
    pub fn commutator(&self, other: &Morphism) -> Result<Morphism> {
        self.after(other)?.sub(&other.after(self)?)
    }

    /// Max-entry distance to a parallel morphism.
    pub fn distance(&self, other: &Morphism) -> Result<f64> {
        self.ensure_parallel(other)?;
        Ok(self.mat.max_abs_diff(&other.mat))
    }

    /// The value of a morphism `I -> I`.
    pub fn scalar_value(&self) -> Result<C64> {
        if !self.source.is_unit() || !self.target.is_unit() {
            return Err(Error::SpaceMismatch {
                left: format!("{} -> {}", self.source, self.target),
                right: "I -> I".to_string(),
            });
        }
        Ok(self.mat.get(0, 0))
    }

    /// Coordinates of a state `I -> H`.
    pub fn state_vector(&self) -> Result<DVector<C64>> {
        if !self.source.is_unit() {
            return Err(Error::SpaceMismatch {
                left: self.source.to_string(),
                right: "I".to_string(),
            });
        }
        Ok(self.mat.column_dense(0))
    }

    /// Applies the morphism to a coordinate vector of its source.
    pub fn apply(&self, v: &DVector<C64>) -> Result<DVector<C64>> {
        if v.len() != self.source.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.source.dim(),
                found: v.len(),
            });
        }
        Ok(self.mat.matmul(&SparseMatrix::column_vector(v)).column_dense(0))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.source == self.target
            && self
                .mat
                .adjoint()
                .matmul(&self.mat)
                .max_abs_diff(&SparseMatrix::identity(self.source.dim()))
                < tol
    }
}

/// `g ∘ f`.
pub fn compose(g: &Morphism, f: &Morphism) -> Result<Morphism> {
    g.after(f)
}

pub fn tensor(f: &Morphism, g: &Morphism) -> Morphism {
    f.tensor(g)
}

pub fn dagger(f: &Morphism) -> Morphism {
    f.dagger()
}

/// The permutation matrix of `H ⊗ K -> K ⊗ H` on raw dimensions.
pub fn swap_matrix(dh: usize, dk: usize) -> SparseMatrix {
    SparseMatrix::from_triplets(
        dh * dk,
        dh * dk,
        (0..dh).flat_map(|i| (0..dk).map(move |j| (j * dh + i, i * dk + j, C64::new(1.0, 0.0)))),
    )
}

/// Symmetric braiding `H ⊗ K -> K ⊗ H`.
pub fn swap(h: &TruncatedSpace, k: &TruncatedSpace) -> Morphism {
    Morphism {
        source: h.tensor(k),
        target: k.tensor(h),
        mat: swap_matrix(h.dim(), k.dim()),
    }
}

/// Cup, cap and dual of a space.
#[derive(Debug, Clone)]
pub struct CompactStructure {
    /// `I -> H ⊗ H*`, `Σ_n |e_n⟩ ⊗ |ξ_n⟩`.
    pub cup: Morphism,
    /// `H* ⊗ H -> I`, `Σ_n ⟨ξ_n| ⊗ ⟨e_n|`.
    pub cap: Morphism,
    pub dual: TruncatedSpace,
}

fn paired_diagonal(d: usize) -> SparseMatrix {
    SparseMatrix::from_triplets(
        d * d,
        1,
        (0..d).map(|n| (n * d + n, 0, C64::new(1.0, 0.0))),
    )
}

pub fn compact_structure(h: &TruncatedSpace) -> CompactStructure {
    let dual = h.dual();
    let d = h.dim();
    let cup = Morphism {
        source: TruncatedSpace::unit(),
        target: h.tensor(&dual),
        mat: paired_diagonal(d),
    };
    let cap = Morphism {
        source: dual.tensor(h),
        target: TruncatedSpace::unit(),
        mat: paired_diagonal(d).adjoint(),
    };
    CompactStructure { cup, cap, dual }
}

/// The closed loop `cap ∘ swap ∘ cup`.
pub fn dimension_scalar(h: &TruncatedSpace) -> Scalar {
    let cs = compact_structure(h);
    let loop_ = cs
        .cup
        .then(&swap(h, &cs.dual))
        .and_then(|m| m.then(&cs.cap))
        .expect("cup, swap and cap compose by construction");
    loop_.scalar_value().expect("closed loop is a scalar")
}

/// Residuals of the two snake equations:
/// `(id_H ⊗ cap) ∘ (cup ⊗ id_H) = id_H` and
/// `(cap ⊗ id_H*) ∘ (id_H* ⊗ cup) = id_H*`.
pub fn snake_residuals(h: &TruncatedSpace) -> (f64, f64) {
    let cs = compact_structure(h);
    let id_h = Morphism::identity(h);
    let id_dual = Morphism::identity(&cs.dual);
    let left = cs
        .cup
        .tensor(&id_h)
        .then(&id_h.tensor(&cs.cap))
        .expect("snake composes by construction");
    let right = id_dual
        .tensor(&cs.cup)
        .then(&cs.cap.tensor(&id_dual))
        .expect("snake composes by construction");
    (
        left.distance(&id_h).expect("snake is an endomorphism"),
        right.distance(&id_dual).expect("snake is an endomorphism"),
    )
}
