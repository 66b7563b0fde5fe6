//! Dense complex linear algebra.
//!
//! Everything here works on [`ComplexMatrix`], a row-major `Vec<Complex64>`
//! with explicit shape. The eigensolver is a cyclic complex Jacobi sweep,
//! which is slow for large matrices but deterministic and needs no LAPACK.
//! Matrices up to a few hundred rows are routine; 4096 is the hard ceiling.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance on `max |M - M†|` accepted as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalues closer than this are treated as one degenerate cluster.
pub const DEGENERACY_GAP: f64 = 1e-9;
/// Largest supported matrix dimension.
pub const MAX_DIM: usize = 4096;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("matrix entry".into()));
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(rows, cols, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<Complex64>]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::DimensionMismatch("columns of unequal length".into()));
        }
        Ok(Self::from_fn(rows, cols, |r, c| columns[c][r]))
    }

    /// Rank-one projector `|v><v|`.
    pub fn outer(v: &[Complex64]) -> Self {
        Self::from_fn(v.len(), v.len(), |r, c| v[r] * v[c].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        ComplexMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn diag_real(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)].re).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `max |M - M†|`; infinite for non-square input.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn ensure_hermitian(&self) -> Result<()> {
        if !self.is_square() {
            return Err(Error::NonSquare { rows: self.rows, cols: self.cols });
        }
        let defect = self.hermitian_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::NonHermitian(defect));
        }
        Ok(())
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            let out_row = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let rhs_row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len(), "matvec shape mismatch");
        (0..self.rows)
            .map(|r| self.data[r * self.cols..(r + 1) * self.cols].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `<u|M|v>`
    pub fn sandwich(&self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        inner(u, &self.matvec(v))
    }

    pub fn kron(&self, rhs: &Self) -> Self {
        let rows = self.rows * rhs.rows;
        let cols = self.cols * rhs.cols;
        Self::from_fn(rows, cols, |r, c| {
            self[(r / rhs.rows, c / rhs.cols)] * rhs[(r % rhs.rows, c % rhs.cols)]
        })
    }

    /// `U† M U`
    pub fn conjugate_by(&self, u: &Self) -> Self {
        u.adjoint().matmul(&self.matmul(u))
    }

    /// Principal submatrix on the given index set.
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), idx.len(), |r, c| self[(idx[r], idx[c])])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

/// `<u|v>`, conjugating the left argument.
pub fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalized(v: &[Complex64]) -> Option<Vec<Complex64>> {
    let n = norm(v);
    (n > 0.0 && n.is_finite()).then(|| v.iter().map(|z| z / n).collect())
}

/// Rotates `v` so its first component above `1e-12` in modulus is real positive.
pub fn fix_phase(v: &mut [Complex64]) {
    if let Some(anchor) = v.iter().find(|z| z.norm() > 1e-12) {
        let phase = anchor.conj() / anchor.norm();
        for z in v.iter_mut() {
            *z *= phase;
        }
    }
}

/// Removes the components of `v` along each (orthonormal) vector in `basis`.
/// Two passes, which keeps the result orthogonal to working precision.
pub fn orthogonalize_against(v: &mut [Complex64], basis: &[Vec<Complex64>]) {
    for _ in 0..2 {
        for b in basis {
            let overlap = inner(b, v);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= overlap * y;
            }
        }
    }
}

/// Extends an orthonormal set to a full orthonormal basis of `C^dim` by
/// Gram–Schmidt over the canonical vectors `e_0, e_1, ...` in order.
pub fn complete_basis(mut basis: Vec<Vec<Complex64>>, dim: usize) -> Vec<Vec<Complex64>> {
    complete_within(&mut basis, &(0..dim).collect::<Vec<_>>(), dim, dim);
    basis
}

/// Completes `basis` up to `target` vectors using canonical vectors drawn from
/// `support` (in that order). Only vectors whose residual exceeds a threshold
/// scaled to the support size are accepted, so the choice is deterministic
/// and well conditioned.
pub(crate) fn complete_within(basis: &mut Vec<Vec<Complex64>>, support: &[usize], dim: usize, target: usize) {
    let threshold = 0.5 / (support.len().max(1) as f64).sqrt();
    for &k in support {
        if basis.len() >= target {
            break;
        }
        let mut v = vec![ZERO; dim];
        v[k] = ONE;
        orthogonalize_against(&mut v, basis);
        let n = norm(&v);
        if n > threshold {
            basis.push(v.iter().map(|z| z / n).collect());
        }
    }
}

#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Columns are the eigenvectors, matching `eigenvalues`.
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, i: usize) -> Vec<Complex64> {
        self.eigenvectors.column(i)
    }

    /// `V f(Λ) V†`
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let n = self.dim();
        let weights: Vec<f64> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        let mut out = ComplexMatrix::zeros(n, n);
        for r in 0..n {
            for c in r..n {
                let mut acc = ZERO;
                for k in 0..n {
                    if weights[k] != 0.0 {
                        acc += v[(r, k)] * v[(c, k)].conj() * weights[k];
                    }
                }
                out[(r, c)] = acc;
                out[(c, r)] = acc.conj();
            }
            out[(r, r)] = Complex64::new(out[(r, r)].re, 0.0);
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|x| x)
    }
}

/// Full eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Eigenvalues come back ascending. Each degenerate cluster (consecutive gaps
/// below [`DEGENERACY_GAP`]) is re-spanned by projecting the canonical basis
/// vectors in order, and every eigenvector is phase-fixed with [`fix_phase`].
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<EigenDecomposition> {
    m.ensure_hermitian()?;
    let n = m.rows();
    if n > MAX_DIM {
        return Err(Error::DimensionTooLarge(n));
    }
    let mut a = m.clone();
    // exact Hermitian symmetry before rotating
    for r in 0..n {
        a[(r, r)] = Complex64::new(a[(r, r)].re, 0.0);
        for c in r + 1..n {
            let avg = (a[(r, c)] + a[(c, r)].conj()) * 0.5;
            a[(r, c)] = avg;
            a[(c, r)] = avg.conj();
        }
    }
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm();
    if n > 1 && scale > 0.0 {
        jacobi_sweeps(&mut a, &mut v, scale);
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag = a.diag_real();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]).then(i.cmp(&j)));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let mut vectors: Vec<Vec<Complex64>> = order.iter().map(|&i| v.column(i)).collect();

    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && eigenvalues[end] - eigenvalues[end - 1] < DEGENERACY_GAP {
            end += 1;
        }
        if end - start > 1 {
            let cluster = regauge_cluster(&vectors[start..end], n);
            vectors.splice(start..end, cluster);
        }
        start = end;
    }
    for vec in &mut vectors {
        fix_phase(vec);
    }
    Ok(EigenDecomposition { eigenvalues, eigenvectors: ComplexMatrix::from_columns(&vectors)? })
}

fn jacobi_sweeps(a: &mut ComplexMatrix, v: &mut ComplexMatrix, scale: f64) {
    const MAX_SWEEPS: usize = 100;
    let n = a.rows();
    let target = 1e-14 * scale;
    let negligible = 1e-18 * scale;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| a[(r, c)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off < target {
            return;
        }
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= negligible {
                    continue;
                }
                rotated = true;
                rotate(a, v, p, q, apq, mag);
            }
        }
        if !rotated {
            return;
        }
    }
}

/// Applies `A <- J† A J`, `V <- V J` with
/// `J = [[c, s·e], [-s·ē, c]]` on the (p, q) plane, `e = a_pq/|a_pq|`.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize, apq: Complex64, mag: f64) {
    let n = a.rows();
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau == 0.0 { 1.0 } else { tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt()) };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let e = apq / mag;
    let se = e * s;
    let se_conj = se.conj();

    // columns: A J
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c - akq * se_conj;
        a[(k, q)] = akp * se + akq * c;
    }
    // rows: J† (A J)
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c - aqk * se;
        a[(q, k)] = apk * se_conj + aqk * c;
    }
    a[(p, p)] = Complex64::new(app - t * mag, 0.0);
    a[(q, q)] = Complex64::new(aqq + t * mag, 0.0);
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * se_conj;
        v[(k, q)] = vkp * se + vkq * c;
    }
}

fn regauge_cluster(cluster: &[Vec<Complex64>], n: usize) -> Vec<Vec<Complex64>> {
    let k = cluster.len();
    let mut out: Vec<Vec<Complex64>> = Vec::with_capacity(k);
    let threshold = 0.5 / (n as f64).sqrt();
    for j in 0..n {
        if out.len() == k {
            break;
        }
        // projection of e_j onto the cluster span
        let mut proj = vec![ZERO; n];
        for u in cluster {
            let w = u[j].conj();
            for (x, y) in proj.iter_mut().zip(u) {
                *x += w * y;
            }
        }
        orthogonalize_against(&mut proj, &out);
        let nrm = norm(&proj);
        if nrm > threshold {
            out.push(proj.iter().map(|z| z / nrm).collect());
        }
    }
    if out.len() < k {
        // only reachable through severe roundoff; keep the solver's own vectors
        return cluster.to_vec();
    }
    out
}

/// Scalar maps applied through the spectrum by [`hermitian_function`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpectralMap {
    /// `x -> exp(-beta * x)`
    ExpScaled { beta: f64 },
    /// `x -> x ln x`, with `0 ln 0 = 0` and non-positive inputs mapped to 0.
    XLogX,
}

impl SpectralMap {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            SpectralMap::ExpScaled { beta } => (-beta * x).exp(),
            SpectralMap::XLogX => xlogx(x),
        }
    }
}

pub fn xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

pub fn hermitian_function(m: &ComplexMatrix, map: SpectralMap) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(m)?;
    Ok(eig.reconstruct_with(|x| map.apply(x)))
}

/// Von Neumann entropy (natural log) from a spectrum.
pub fn entropy_of_spectrum(eigenvalues: &[f64]) -> f64 {
    -eigenvalues.iter().map(|&x| xlogx(x)).sum::<f64>()
}

#[derive(Clone, Debug)]
pub struct SchmidtDecomposition {
    /// Descending, non-negative; squares sum to one.
    pub coefficients: Vec<f64>,
    pub left: Vec<Vec<Complex64>>,
    pub right: Vec<Vec<Complex64>>,
}

impl SchmidtDecomposition {
    pub fn max_coefficient(&self) -> f64 {
        self.coefficients.first().copied().unwrap_or(0.0)
    }

    pub fn reconstruct(&self) -> Vec<Complex64> {
        let (da, db) = (self.left.first().map_or(0, Vec::len), self.right.first().map_or(0, Vec::len));
        let mut out = vec![ZERO; da * db];
        for ((c, u), w) in self.coefficients.iter().zip(&self.left).zip(&self.right) {
            for i in 0..da {
                for j in 0..db {
                    out[i * db + j] += u[i] * w[j] * *c;
                }
            }
        }
        out
    }
}

/// A split of the qubit sites `1..=n` into two parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Bipartition {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

impl Bipartition {
    pub fn new(n_sites: usize, left: Vec<usize>, right: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; n_sites + 1];
        for &s in left.iter().chain(&right) {
            if s == 0 || s > n_sites {
                return Err(Error::InvalidSplit(format!("site {s} outside 1..={n_sites}")));
            }
            if seen[s] {
                return Err(Error::InvalidSplit(format!("site {s} listed twice")));
            }
            seen[s] = true;
        }
        if seen[1..].iter().any(|&x| !x) {
            return Err(Error::InvalidSplit("split does not cover every site".into()));
        }
        if left.is_empty() || right.is_empty() {
            return Err(Error::InvalidSplit("both sides must be nonempty".into()));
        }
        Ok(Bipartition { left, right })
    }

    /// Sites `1..=k` against `k+1..=n`.
    pub fn contiguous(n_sites: usize, k: usize) -> Result<Self> {
        Self::new(n_sites, (1..=k).collect(), (k + 1..=n_sites).collect())
    }

    pub fn n_sites(&self) -> usize {
        self.left.len() + self.right.len()
    }

    pub fn label(&self) -> String {
        let join = |s: &[usize]| s.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
        format!("{}|{}", join(&self.left), join(&self.right))
    }
}

/// Reshapes a qubit state vector into a `2^|A| x 2^|B|` amplitude matrix.
/// Site 1 is the most significant bit of the computational index.
pub(crate) fn amplitude_matrix(state: &[Complex64], split: &Bipartition) -> Result<ComplexMatrix> {
    let n = split.n_sites();
    if state.len() != 1 << n {
        return Err(Error::InvalidSplit(format!("state of length {} is not on {n} qubits", state.len())));
    }
    let (da, db) = (1usize << split.left.len(), 1usize << split.right.len());
    let bit = |index: usize, site: usize| (index >> (n - site)) & 1;
    let mut m = ComplexMatrix::zeros(da, db);
    for (index, amp) in state.iter().enumerate() {
        let a = split.left.iter().fold(0, |acc, &s| (acc << 1) | bit(index, s));
        let b = split.right.iter().fold(0, |acc, &s| (acc << 1) | bit(index, s));
        m[(a, b)] = *amp;
    }
    Ok(m)
}

/// Schmidt decomposition via the eigendecomposition of the reduced density
/// matrix `M M†` of the left part.
pub fn schmidt(state: &[Complex64], split: &Bipartition) -> Result<SchmidtDecomposition> {
    let m = amplitude_matrix(state, split)?;
    let rho_a = m.matmul(&m.adjoint());
    let eig = hermitian_eig(&rho_a)?;
    let mh = m.adjoint();
    let mut coefficients = Vec::new();
    let mut left = Vec::new();
    let mut right = Vec::new();
    for i in (0..eig.dim()).rev() {
        let c = eig.eigenvalues[i].max(0.0).sqrt();
        if c < 1e-12 {
            break;
        }
        let u = eig.vector(i);
        let w: Vec<Complex64> = mh.matvec(&u).iter().map(|z| z.conj() / c).collect();
        coefficients.push(c);
        left.push(u);
        right.push(w);
    }
    Ok(SchmidtDecomposition { coefficients, left, right })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_hermitian(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(n, n);
        for r in 0..n {
            m[(r, r)] = c(rng.gen_range(-1.0..1.0), 0.0);
            for col in r + 1..n {
                let z = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                m[(r, col)] = z;
                m[(col, r)] = z.conj();
            }
        }
        m
    }

    #[test]
    fn identity_spectrum() {
        let eig = hermitian_eig(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(eig.eigenvalues, vec![1.0, 1.0]);
        assert!(eig.eigenvectors.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);
    }

    #[test]
    fn pauli_x_spectrum() {
        let x = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let eig = hermitian_eig(&x).unwrap();
        assert!((eig.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((eig.eigenvalues[1] - 1.0).abs() < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = eig.vector(0);
        assert!((v0[0] - c(s, 0.0)).norm() < 1e-14 && (v0[1] - c(-s, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian_and_non_square() {
        let m = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(hermitian_eig(&m), Err(Error::NonHermitian(_))));
        let r = ComplexMatrix::zeros(2, 3);
        assert!(matches!(hermitian_eig(&r), Err(Error::NonSquare { .. })));
    }

    #[test]
    fn random_reconstruction_and_orthonormality() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &n in &[1, 2, 3, 5, 8, 16, 33, 64] {
            let m = random_hermitian(n, &mut rng);
            let eig = hermitian_eig(&m).unwrap();
            assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
            assert!(eig.reconstruct().max_abs_diff(&m) < 1e-10, "n={n}");
            let v = &eig.eigenvectors;
            assert!(v.adjoint().matmul(v).max_abs_diff(&ComplexMatrix::identity(n)) < 1e-10);
            for i in 0..n {
                let mv = m.matvec(&eig.vector(i));
                let lv: Vec<_> = eig.vector(i).iter().map(|z| z * eig.eigenvalues[i]).collect();
                assert!(mv.iter().zip(&lv).all(|(a, b)| (a - b).norm() < 1e-10));
            }
        }
    }

    #[test]
    fn degenerate_cluster_is_canonical() {
        // diag(2, 1, 1) rotated in the degenerate block must come back as e_1, e_2
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let u = ComplexMatrix::from_vec(
            3,
            3,
            vec![
                c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0),
                c(0.0, 0.0), c(s, 0.0), c(0.0, s),
                c(0.0, 0.0), c(0.0, s), c(s, 0.0),
            ],
        )
        .unwrap();
        let m = ComplexMatrix::diagonal(&[2.0, 1.0, 1.0]).conjugate_by(&u.adjoint());
        let eig = hermitian_eig(&m).unwrap();
        let v0 = eig.vector(0);
        let v1 = eig.vector(1);
        assert!((v0[1] - c(1.0, 0.0)).norm() < 1e-12, "{v0:?}");
        assert!((v1[2] - c(1.0, 0.0)).norm() < 1e-12, "{v1:?}");
    }

    #[test]
    fn spectral_maps() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(4, &mut rng);
        let id = hermitian_function(&h, SpectralMap::ExpScaled { beta: 0.0 }).unwrap();
        assert!(id.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-12);

        let d = ComplexMatrix::diagonal(&[-1.0, 1.0]);
        let e = hermitian_function(&d, SpectralMap::ExpScaled { beta: std::f64::consts::LN_2 }).unwrap();
        assert!(e.max_abs_diff(&ComplexMatrix::diagonal(&[2.0, 0.5])) < 1e-14);

        let half = ComplexMatrix::identity(2).scale_real(0.5);
        let f = hermitian_function(&half, SpectralMap::XLogX).unwrap();
        assert!((-f.trace().re - std::f64::consts::LN_2).abs() < 1e-14);
    }

    #[test]
    fn exp_map_is_positive_definite() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for beta in [0.1, 1.0, 3.0] {
            let h = random_hermitian(5, &mut rng);
            let e = hermitian_function(&h, SpectralMap::ExpScaled { beta }).unwrap();
            let spec = hermitian_eig(&e).unwrap().eigenvalues;
            assert!(spec[0] > 0.0, "beta={beta} {spec:?}");
        }
    }

    #[test]
    fn schmidt_examples() {
        let split = Bipartition::contiguous(2, 1).unwrap();
        let product = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let sd = schmidt(&product, &split).unwrap();
        assert_eq!(sd.coefficients.len(), 1);
        assert!((sd.coefficients[0] - 1.0).abs() < 1e-14);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = vec![c(0.0, 0.0), c(s, 0.0), c(s, 0.0), c(0.0, 0.0)];
        let sd = schmidt(&bell, &split).unwrap();
        assert!(sd.coefficients.iter().all(|x| (x - s).abs() < 1e-12));

        // SVD of [[cos, 0], [0, sin]] is immediate: singular values cos(pi/8), sin(pi/8)
        let t = std::f64::consts::PI / 8.0;
        let g = vec![c(t.cos(), 0.0), c(0.0, 0.0), c(0.0, 0.0), c(t.sin(), 0.0)];
        let sd = schmidt(&g, &split).unwrap();
        assert!((sd.coefficients[0] - t.cos()).abs() < 1e-12);
        assert!((sd.coefficients[1] - t.sin()).abs() < 1e-12);
        let back = sd.reconstruct();
        assert!(back.iter().zip(&g).all(|(a, b)| (a - b).norm() < 1e-12));
    }

    #[test]
    fn schmidt_rejects_bad_split() {
        assert!(matches!(Bipartition::new(3, vec![1, 2], vec![2, 3]), Err(Error::InvalidSplit(_))));
        assert!(matches!(Bipartition::new(3, vec![1], vec![2]), Err(Error::InvalidSplit(_))));
        assert!(matches!(Bipartition::new(2, vec![1], vec![3]), Err(Error::InvalidSplit(_))));
    }

    #[test]
    fn schmidt_non_contiguous_split() {
        // |0>_1 (x) Bell_{23}: cutting {2} | {1,3} leaves one Bell pair across
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut v = vec![c(0.0, 0.0); 8];
        v[0b000] = c(s, 0.0);
        v[0b011] = c(s, 0.0);
        let split = Bipartition::new(3, vec![2], vec![1, 3]).unwrap();
        let sd = schmidt(&v, &split).unwrap();
        assert_eq!(sd.coefficients.len(), 2);
        let split = Bipartition::new(3, vec![1], vec![2, 3]).unwrap();
        assert_eq!(schmidt(&v, &split).unwrap().coefficients.len(), 1);
    }
}
