//! Finite-dimensional Hilbert-space arithmetic: labelled bases, normed
//! state vectors and dense complex operators.
//!
//! Basis labels are opaque strings. A label of the form `path:internal`
//! (for example `I:up`) belongs to path `I`; elements and detectors that
//! refer to a path act on every label of that path.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tolerance::{TAU_NORM, TAU_SUPERPOSE};
#[allow(unused_imports)] // shadowed by inherent f64 methods when std is linked
use num_traits::Float;

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Path component of a basis label (text before the first `:`).
pub fn path_of(label: &str) -> &str {
    label.split_once(':').map_or(label, |(path, _)| path)
}

/// Internal component of a basis label (text after the first `:`, or empty).
pub fn internal_of(label: &str) -> &str {
    label.split_once(':').map_or("", |(_, internal)| internal)
}

/// Ordered set of distinct basis labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Basis {
    labels: Vec<String>,
}

impl Basis {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::EmptyBasis);
        }
        for (i, label) in labels.iter().enumerate() {
            if labels[..i].contains(label) {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }
        Ok(Self { labels })
    }

    /// The two-path basis `[I, II]` of an interferometer.
    pub fn two_path() -> Self {
        Self::new(["I", "II"]).expect("static basis")
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Indices selected by `reference`: an exact label, or every label whose
    /// path component equals `reference`. Errors if nothing matches.
    pub fn region(&self, reference: &str) -> Result<Vec<usize>> {
        if let Some(i) = self.index_of(reference) {
            return Ok(vec![i]);
        }
        let hits: Vec<usize> = self
            .labels
            .iter()
            .enumerate()
            .filter(|(_, l)| path_of(l) == reference)
            .map(|(i, _)| i)
            .collect();
        if hits.is_empty() {
            Err(Error::UnknownLabel(reference.to_string()))
        } else {
            Ok(hits)
        }
    }

    /// Pairs up the labels of two regions by internal component, as needed
    /// by two-port elements acting as identity on internal degrees of freedom.
    pub fn region_pairs(&self, first: &str, second: &str) -> Result<Vec<(usize, usize)>> {
        let invalid = || Error::InvalidPathPair(first.to_string(), second.to_string());
        let a = self.region(first)?;
        let b = self.region(second)?;
        if a.len() != b.len() || a.iter().any(|i| b.contains(i)) {
            return Err(invalid());
        }
        let mut pairs = Vec::with_capacity(a.len());
        for &i in &a {
            let want = internal_of(&self.labels[i]);
            let j = b
                .iter()
                .copied()
                .find(|&j| internal_of(&self.labels[j]) == want || b.len() == 1)
                .ok_or_else(invalid)?;
            pairs.push((i, j));
        }
        Ok(pairs)
    }

    /// Projector onto the span of the labels selected by `reference`.
    pub fn region_projector(&self, reference: &str) -> Result<Operator> {
        let mut p = Operator::zeros(self.dim());
        for i in self.region(reference)? {
            p[(i, i)] = ONE;
        }
        Ok(p)
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.labels.join(", "))
    }
}

pub(crate) fn vector_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `<u|v>`, antilinear in the first argument.
pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

fn all_finite(v: &[C64]) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// A pure state: a unit vector over a labelled basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    basis: Basis,
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// Builds a state, rejecting vectors whose norm differs from 1 by more
    /// than [`TAU_NORM`].
    pub fn new(basis: Basis, amplitudes: Vec<C64>) -> Result<Self> {
        Self::with_tolerance(basis, amplitudes, TAU_NORM)
    }

    pub fn with_tolerance(basis: Basis, amplitudes: Vec<C64>, tau_norm: f64) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                found: amplitudes.len(),
            });
        }
        if !all_finite(&amplitudes) {
            return Err(Error::NonFinite);
        }
        let norm = vector_norm(&amplitudes);
        if (norm - 1.0).abs() > tau_norm {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { basis, amplitudes })
    }

    /// Scales `amplitudes` to unit norm.
    pub fn normalized(basis: Basis, mut amplitudes: Vec<C64>) -> Result<Self> {
        if !all_finite(&amplitudes) {
            return Err(Error::NonFinite);
        }
        let norm = vector_norm(&amplitudes);
        if norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        amplitudes.iter_mut().for_each(|z| *z /= norm);
        Self::new(basis, amplitudes)
    }

    /// The basis vector for `label`.
    pub fn basis_state(basis: Basis, label: &str) -> Result<Self> {
        let i = basis
            .index_of(label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
        let mut amplitudes = vec![ZERO; basis.dim()];
        amplitudes[i] = ONE;
        Ok(Self { basis, amplitudes })
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, label: &str) -> Option<C64> {
        self.basis.index_of(label).map(|i| self.amplitudes[i])
    }

    pub fn norm(&self) -> f64 {
        vector_norm(&self.amplitudes)
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch);
        }
        Ok(inner(&self.amplitudes, &other.amplitudes))
    }

    /// Probability of finding the quantum in the region selected by `reference`.
    pub fn weight_on(&self, reference: &str) -> Result<f64> {
        Ok(self
            .basis
            .region(reference)?
            .into_iter()
            .map(|i| self.amplitudes[i].norm_sqr())
            .sum())
    }
}

/// `c1 phi1 + c2 phi2` for orthogonal unit vectors and normalized coefficients.
///
/// The raw combination is returned unchanged when its norm is within
/// [`TAU_NORM`] of one; otherwise (coefficients normalized only to
/// [`TAU_SUPERPOSE`]) it is rescaled onto the unit sphere.
pub fn superpose(c1: C64, phi1: &StateVector, c2: C64, phi2: &StateVector) -> Result<StateVector> {
    if phi1.basis != phi2.basis {
        return Err(Error::BasisMismatch);
    }
    if !all_finite(&[c1, c2]) {
        return Err(Error::NonFinite);
    }
    let overlap = inner(&phi1.amplitudes, &phi2.amplitudes).norm();
    if overlap > TAU_SUPERPOSE {
        return Err(Error::NotOrthogonal { overlap });
    }
    let norm_sq = c1.norm_sqr() + c2.norm_sqr();
    if (norm_sq - 1.0).abs() > TAU_SUPERPOSE {
        return Err(Error::CoefficientsNotNormalized { norm_sq });
    }
    let amplitudes: Vec<C64> = phi1
        .amplitudes
        .iter()
        .zip(&phi2.amplitudes)
        .map(|(a, b)| c1 * a + c2 * b)
        .collect();
    if (vector_norm(&amplitudes) - 1.0).abs() <= TAU_NORM {
        StateVector::new(phi1.basis.clone(), amplitudes)
    } else {
        StateVector::normalized(phi1.basis.clone(), amplitudes)
    }
}

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    dim: usize,
    entries: Vec<C64>,
}

impl core::ops::Index<(usize, usize)> for Operator {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.entries[i * self.dim + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Operator {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.entries[i * self.dim + j]
    }
}

impl Operator {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut op = Self::zeros(dim);
        for i in 0..dim {
            op[(i, i)] = ONE;
        }
        op
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut op = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            op[(i, i)] = C64::new(d, 0.0);
        }
        op
    }

    /// Builds an operator from row-major rows.
    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::EmptyBasis);
        }
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::NotSquare);
        }
        let entries: Vec<C64> = rows.into_iter().flatten().collect();
        if !all_finite(&entries) {
            return Err(Error::NonFinite);
        }
        Ok(Self { dim, entries })
    }

    /// `|u><v|`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        assert_eq!(u.len(), v.len(), "outer product of unequal lengths");
        let dim = u.len();
        let mut op = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                op[(i, j)] = u[i] * v[j].conj();
            }
        }
        op
    }

    /// `|v><v|`.
    pub fn projector(v: &[C64]) -> Self {
        Self::outer(v, v)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn rows(&self) -> impl Iterator<Item = &[C64]> {
        self.entries.chunks(self.dim)
    }

    pub fn is_finite(&self) -> bool {
        all_finite(&self.entries)
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if self.dim == found {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim,
                found,
            })
        }
    }

    pub fn matmul(&self, rhs: &Operator) -> Result<Operator> {
        self.check_dim(rhs.dim)?;
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.entries[i * n + j] += a * rhs.entries[k * n + j];
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        self.check_dim(v.len())?;
        Ok(self
            .rows()
            .map(|row| row.iter().zip(v).map(|(a, x)| a * x).sum())
            .collect())
    }

    /// `<v|A|v>` for an arbitrary (not necessarily normed) vector.
    pub fn quadratic_form(&self, v: &[C64]) -> Result<C64> {
        Ok(inner(v, &self.apply(v)?))
    }

    pub fn add(&self, rhs: &Operator) -> Result<Operator> {
        self.check_dim(rhs.dim)?;
        Ok(self.zip_with(rhs, |a, b| a + b))
    }

    pub fn sub(&self, rhs: &Operator) -> Result<Operator> {
        self.check_dim(rhs.dim)?;
        Ok(self.zip_with(rhs, |a, b| a - b))
    }

    fn zip_with(&self, rhs: &Operator, f: impl Fn(C64, C64) -> C64) -> Operator {
        Operator {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn scale(&self, factor: f64) -> Operator {
        Operator {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// `max |A_ij - conj(A_ji)|`.
    pub fn hermiticity_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `max |A_ij|`.
    pub fn max_abs_entry(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        vector_norm(&self.entries)
    }

    /// `max |(U^dagger U - I)_ij|`.
    pub fn unitarity_residual(&self) -> f64 {
        let gram = self.adjoint().matmul(self).expect("same dimension");
        gram.sub(&Operator::identity(self.dim))
            .expect("same dimension")
            .max_abs_entry()
    }

    /// Eigenvalues of the hermitian part `(A + A^dagger)/2`, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(self)
    }

    /// Largest `|eigenvalue|` of the hermitian part; the operator norm for
    /// hermitian operators.
    pub fn hermitian_norm(&self) -> f64 {
        self.hermitian_eigenvalues()
            .iter()
            .fold(0.0, |m: f64, l| m.max(l.abs()))
    }

    /// Matrix of `A` in the (not necessarily orthonormal) frame `vectors`:
    /// entry `(i, j)` is `<v_i|A|v_j>`.
    pub fn compress(&self, vectors: &[&[C64]]) -> Result<Operator> {
        let images = vectors.iter().map(|v| self.apply(v)).collect::<Result<Vec<_>>>()?;
        let mut out = Operator::zeros(vectors.len());
        for (i, vi) in vectors.iter().enumerate() {
            for (j, img) in images.iter().enumerate() {
                out[(i, j)] = inner(vi, img);
            }
        }
        Ok(out)
    }
}

/// Eigenvalues of a hermitian matrix via cyclic Jacobi rotations on its real
/// symmetric embedding `[[Re, -Im], [Im, Re]]`, whose spectrum is that of `A`
/// with every eigenvalue doubled.
fn hermitian_eigenvalues(op: &Operator) -> Vec<f64> {
    let n = op.dim;
    let m = 2 * n;
    let mut a = vec![0.0_f64; m * m];
    for i in 0..n {
        for j in 0..n {
            let h = (op[(i, j)] + op[(j, i)].conj()) * 0.5;
            a[i * m + j] = h.re;
            a[(i + n) * m + (j + n)] = h.re;
            a[i * m + (j + n)] = -h.im;
            a[(i + n) * m + j] = h.im;
        }
    }
    jacobi_symmetric(&mut a, m);
    let mut all: Vec<f64> = (0..m).map(|i| a[i * m + i]).collect();
    all.sort_by(f64::total_cmp);
    all.chunks(2).map(|pair| 0.5 * (pair[0] + pair[1])).collect()
}

fn jacobi_symmetric(a: &mut [f64], n: usize) {
    let total: f64 = a.iter().map(|x| x * x).sum();
    if total == 0.0 {
        return;
    }
    for sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        // Off-diagonal mass at the rounding floor; eigenvalues are then
        // accurate to a few ulps of the Frobenius norm.
        if off <= 256.0 * f64::EPSILON * f64::EPSILON * total {
            return;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let (app, aqq) = (a[p * n + p], a[q * n + q]);
                let g = 100.0 * apq.abs();
                if sweep > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
}
