//! Dense complex Hermitian operators and spectral functional calculus.
//!
//! `HermOp` is the universal matrix type of the crate: Hamiltonians,
//! observables, density operators and dual effective operators are all
//! instances of it. Entries are stored row-major; Hermiticity is validated on
//! construction (tolerance 1e-12 relative to the largest entry) and then
//! enforced exactly by symmetrizing, so downstream code never sees drift.
//!
//! Tensor ordering convention, fixed globally: in `A ⊗ B` the left factor
//! owns the most significant index block, i.e. basis vector `|a⟩⊗|b⟩` has
//! flat index `a * dim(B) + b`.

use alloc::vec::Vec;
use nalgebra::DMatrix;

use crate::error::Error;

pub type C64 = num_complex::Complex<f64>;

const HERMITICITY_RTOL: f64 = 1e-12;

/// Dense complex Hermitian operator.
#[derive(Debug, Clone, PartialEq)]
pub struct HermOp {
    dim: usize,
    entries: Vec<C64>,
}

/// Which tensor factor a partial trace removes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

impl HermOp {
    /// Validates Hermiticity and dimension, then stores the exact
    /// symmetrization (A + A†)/2.
    pub fn new(dim: usize, entries: Vec<C64>) -> Result<Self, Error> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if entries.len() != dim * dim {
            return Err(Error::BadEntryCount {
                dim,
                got: entries.len(),
            });
        }
        let scale = entries.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        let mut deviation = 0.0f64;
        for i in 0..dim {
            for j in i..dim {
                let d = (entries[i * dim + j] - entries[j * dim + i].conj()).norm();
                deviation = deviation.max(d);
            }
        }
        if deviation > HERMITICITY_RTOL * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::NotHermitian { deviation, scale });
        }
        Ok(Self::hermitized(dim, entries))
    }

    /// Builds (A + A†)/2 without validating; used internally after products
    /// and lifts to suppress roundoff drift.
    pub(crate) fn hermitized(dim: usize, mut entries: Vec<C64>) -> Self {
        for i in 0..dim {
            entries[i * dim + i] = C64::new(entries[i * dim + i].re, 0.0);
            for j in (i + 1)..dim {
                let a = entries[i * dim + j];
                let b = entries[j * dim + i];
                let m = (a + b.conj()) * 0.5;
                entries[i * dim + j] = m;
                entries[j * dim + i] = m.conj();
            }
        }
        Self { dim, entries }
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> C64) -> Result<Self, Error> {
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(f(i, j));
            }
        }
        Self::new(dim, entries)
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: alloc::vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let dim = values.len();
        let mut m = Self::zeros(dim);
        for (i, &v) in values.iter().enumerate() {
            m.entries[i * dim + i] = C64::new(v, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.entries[i * self.dim + j]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.entries[i * self.dim + i].re)
            .sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.entries.iter().map(|z| z.norm_sqr()).sum())
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, Error> {
        self.check_dim(other)?;
        Ok(Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, Error> {
        self.check_dim(other)?;
        Ok(Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Real linear combination `sum_k coeffs[k] * ops[k]`.
    pub fn linear_combination(ops: &[Self], coeffs: &[f64]) -> Result<Self, Error> {
        if ops.is_empty() || ops.len() != coeffs.len() {
            return Err(Error::InvalidInput(alloc::format!(
                "linear combination needs matching nonempty lists, got {} ops and {} coefficients",
                ops.len(),
                coeffs.len()
            )));
        }
        let dim = ops[0].dim;
        let mut entries = alloc::vec![C64::new(0.0, 0.0); dim * dim];
        for (op, &c) in ops.iter().zip(coeffs) {
            if op.dim != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: op.dim,
                });
            }
            for (e, z) in entries.iter_mut().zip(&op.entries) {
                *e += z * c;
            }
        }
        Ok(Self { dim, entries })
    }

    fn check_dim(&self, other: &Self) -> Result<(), Error> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }

    /// Re Tr[AB]. The imaginary part vanishes exactly for Hermitian A, B and
    /// is asserted small in debug builds.
    pub fn trace_inner(&self, other: &Self) -> Result<f64, Error> {
        self.check_dim(other)?;
        let d = self.dim;
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                acc += self.entries[i * d + j] * other.entries[j * d + i];
            }
        }
        // entrywise scale; Frobenius norms of denormal-range operators
        // underflow and would turn this tripwire into a false alarm
        debug_assert!(
            acc.im.abs()
                <= 1e-10 * d as f64 * self.max_abs_entry() * other.max_abs_entry() + 1e-300,
            "Tr[AB] acquired an imaginary part: {:e}",
            acc.im
        );
        Ok(acc.re)
    }

    /// Tensor product with `self` on the most significant index block.
    pub fn kron(&self, other: &Self) -> Self {
        let (da, db) = (self.dim, other.dim);
        let d = da * db;
        let mut entries = alloc::vec![C64::new(0.0, 0.0); d * d];
        for ia in 0..da {
            for ja in 0..da {
                let za = self.entries[ia * da + ja];
                if za == C64::new(0.0, 0.0) {
                    continue;
                }
                for ib in 0..db {
                    for jb in 0..db {
                        entries[(ia * db + ib) * d + (ja * db + jb)] =
                            za * other.entries[ib * db + jb];
                    }
                }
            }
        }
        Self { dim: d, entries }
    }

    /// Kronecker sum `U ⊗ I + I ⊗ V`.
    pub fn kron_sum(u: &Self, v: &Self) -> Self {
        let a = u.kron(&Self::identity(v.dim));
        let b = Self::identity(u.dim).kron(v);
        a.add(&b).expect("dims agree by construction")
    }

    /// Partial trace over the given factor of a `d*d`-dimensional bipartite
    /// operator. Satisfies Tr[(I⊗U) π] = Tr[U Tr₁π] and the symmetric
    /// identity for Tr₂.
    pub fn partial_trace(&self, traced: Subsystem, d: usize) -> Result<Self, Error> {
        if d == 0 || self.dim != d * d {
            return Err(Error::NotBipartite {
                dim: self.dim,
                sub: d,
            });
        }
        let n = self.dim;
        let mut entries = alloc::vec![C64::new(0.0, 0.0); d * d];
        match traced {
            Subsystem::Second => {
                for i in 0..d {
                    for j in 0..d {
                        let mut acc = C64::new(0.0, 0.0);
                        for k in 0..d {
                            acc += self.entries[(i * d + k) * n + (j * d + k)];
                        }
                        entries[i * d + j] = acc;
                    }
                }
            }
            Subsystem::First => {
                for i in 0..d {
                    for j in 0..d {
                        let mut acc = C64::new(0.0, 0.0);
                        for k in 0..d {
                            acc += self.entries[(k * d + i) * n + (k * d + j)];
                        }
                        entries[i * d + j] = acc;
                    }
                }
            }
        }
        Ok(Self::hermitized(d, entries))
    }

    /// Full spectral decomposition with eigenvalues sorted ascending.
    pub fn spectral_decompose(&self) -> SpectralDecomp {
        let d = self.dim;
        let m = DMatrix::from_fn(d, d, |r, c| self.entries[r * d + c]);
        let se = m.symmetric_eigen();
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| {
            se.eigenvalues[a]
                .partial_cmp(&se.eigenvalues[b])
                .unwrap_or(core::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        let mut eigenvalues = Vec::with_capacity(d);
        let mut vectors = Vec::with_capacity(d * d);
        for &k in &order {
            eigenvalues.push(se.eigenvalues[k]);
            let col = se.eigenvectors.column(k);
            for i in 0..d {
                vectors.push(col[i]);
            }
        }
        SpectralDecomp {
            dim: d,
            eigenvalues,
            vectors,
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.spectral_decompose().eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self
            .spectral_decompose()
            .eigenvalues
            .last()
            .expect("dim >= 1")
    }

    /// Lifts a scalar function through the spectrum: Σ g(λᵢ)|ξᵢ⟩⟨ξᵢ|.
    pub fn lift(&self, g: impl Fn(f64) -> f64) -> Self {
        self.spectral_decompose().apply(g)
    }

    /// Like [`lift`](Self::lift) but the scalar function may reject an
    /// eigenvalue outside its domain.
    pub fn try_lift(&self, g: impl Fn(f64) -> Result<f64, Error>) -> Result<Self, Error> {
        self.spectral_decompose().try_apply(g)
    }

    /// Spectral square root of a PSD operator; eigenvalues in [-1e-10, 0) are
    /// clamped to zero, anything lower is an error.
    pub fn sqrt_psd(&self) -> Result<Self, Error> {
        self.try_lift(|x| {
            if x < -1e-10 {
                Err(Error::NotPsd { min_eigenvalue: x })
            } else {
                Ok(libm::sqrt(x.max(0.0)))
            }
        })
    }
}

/// Eigen-decomposition of a [`HermOp`], eigenvalues ascending, eigenvectors
/// orthonormal. Row `i` of `vectors` is the eigenvector of `eigenvalues[i]`.
#[derive(Debug, Clone)]
pub struct SpectralDecomp {
    dim: usize,
    eigenvalues: Vec<f64>,
    vectors: Vec<C64>,
}

impl SpectralDecomp {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvector(&self, i: usize) -> &[C64] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    /// Σ g(λᵢ)|ξᵢ⟩⟨ξᵢ|, assembled Hermitian by construction.
    pub fn apply(&self, g: impl Fn(f64) -> f64) -> HermOp {
        self.apply_values(&self.eigenvalues.iter().map(|&x| g(x)).collect::<Vec<_>>())
    }

    pub fn try_apply(&self, g: impl Fn(f64) -> Result<f64, Error>) -> Result<HermOp, Error> {
        let mut vals = Vec::with_capacity(self.dim);
        for &x in &self.eigenvalues {
            vals.push(g(x)?);
        }
        Ok(self.apply_values(&vals))
    }

    fn apply_values(&self, vals: &[f64]) -> HermOp {
        let d = self.dim;
        let mut entries = alloc::vec![C64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for j in i..d {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..d {
                    let vk = &self.vectors[k * d..(k + 1) * d];
                    acc += vals[k] * vk[i] * vk[j].conj();
                }
                if i == j {
                    entries[i * d + i] = C64::new(acc.re, 0.0);
                } else {
                    entries[i * d + j] = acc;
                    entries[j * d + i] = acc.conj();
                }
            }
        }
        HermOp { dim: d, entries }
    }

    pub fn reconstruct(&self) -> HermOp {
        self.apply(|x| x)
    }
}

/// Row-major complex matrix product of two `d x d` buffers.
pub(crate) fn matmul(a: &[C64], b: &[C64], d: usize) -> Vec<C64> {
    let mut out = alloc::vec![C64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for k in 0..d {
            let aik = a[i * d + k];
            if aik == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..d {
                out[i * d + j] += aik * b[k * d + j];
            }
        }
    }
    out
}
