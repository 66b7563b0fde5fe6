//! Pure and mixed states, incoherent bases, ground and Gibbs states.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, fix_phase, hermitian_eig, ComplexMatrix};

pub const NORM_TOL: f64 = 1e-12;
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let n = linalg::norm(&amplitudes);
        if !n.is_finite() {
            return Err(Error::NonFinite("state amplitudes".into()));
        }
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("norm {n} is not 1")));
        }
        Ok(PureState { amplitudes })
    }

    pub fn normalize(amplitudes: Vec<Complex64>) -> Result<Self> {
        let v = linalg::normalized(&amplitudes).ok_or_else(|| Error::InvalidState("zero vector".into()))?;
        Ok(PureState { amplitudes: v })
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::normalize(amplitudes.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Computational basis vector `|index>`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        v[index] = Complex64::new(1.0, 0.0);
        PureState { amplitudes: v }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn overlap(&self, other: &PureState) -> Complex64 {
        linalg::inner(&self.amplitudes, &other.amplitudes)
    }

    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix { matrix: ComplexMatrix::outer(&self.amplitudes) }
    }

    pub fn phase_fixed(mut self) -> Self {
        fix_phase(&mut self.amplitudes);
        self
    }

    /// `<psi|O|psi>`
    pub fn expectation(&self, op: &ComplexMatrix) -> Complex64 {
        op.sandwich(&self.amplitudes, &self.amplitudes)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity (min eigenvalue >= -1e-10).
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        matrix.ensure_hermitian()?;
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min = hermitian_eig(&matrix)?.eigenvalues.first().copied().unwrap_or(0.0);
        if min < -1e-10 {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(DensityMatrix { matrix })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix { matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64) }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn spectrum(&self) -> Result<Vec<f64>> {
        Ok(hermitian_eig(&self.matrix)?.eigenvalues)
    }

    pub fn purity(&self) -> f64 {
        self.matrix.entries().iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn expectation(&self, op: &ComplexMatrix) -> Complex64 {
        self.matrix.matmul(op).trace()
    }
}

/// A state on a curve: a ground state (pure) or a thermal state (mixed).
#[derive(Clone, Debug, PartialEq)]
pub enum QuantumState {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl QuantumState {
    pub fn dim(&self) -> usize {
        match self {
            QuantumState::Pure(p) => p.dim(),
            QuantumState::Mixed(m) => m.dim(),
        }
    }

    pub fn density(&self) -> DensityMatrix {
        match self {
            QuantumState::Pure(p) => p.projector(),
            QuantumState::Mixed(m) => m.clone(),
        }
    }

    pub fn as_pure(&self) -> Option<&PureState> {
        match self {
            QuantumState::Pure(p) => Some(p),
            QuantumState::Mixed(_) => None,
        }
    }

    pub fn expectation(&self, op: &ComplexMatrix) -> Complex64 {
        match self {
            QuantumState::Pure(p) => p.expectation(op),
            QuantumState::Mixed(m) => m.expectation(op),
        }
    }
}

impl From<PureState> for QuantumState {
    fn from(p: PureState) -> Self {
        QuantumState::Pure(p)
    }
}

impl From<DensityMatrix> for QuantumState {
    fn from(m: DensityMatrix) -> Self {
        QuantumState::Mixed(m)
    }
}

/// An orthonormal basis `{|e_i>}`, stored as the columns of a unitary `E`.
#[derive(Clone, Debug, PartialEq)]
pub struct IncoherentBasis {
    columns: ComplexMatrix,
}

impl IncoherentBasis {
    pub fn new(columns: ComplexMatrix) -> Result<Self> {
        if !columns.is_square() {
            return Err(Error::NonSquare { rows: columns.rows(), cols: columns.cols() });
        }
        let defect = columns.adjoint().matmul(&columns).max_abs_diff(&ComplexMatrix::identity(columns.rows()));
        if defect > 1e-10 {
            return Err(Error::InvalidState(format!("basis is not orthonormal (defect {defect:.3e})")));
        }
        Ok(IncoherentBasis { columns })
    }

    pub fn from_vectors(vectors: &[Vec<Complex64>]) -> Result<Self> {
        Self::new(ComplexMatrix::from_columns(vectors)?)
    }

    pub fn computational(dim: usize) -> Self {
        IncoherentBasis { columns: ComplexMatrix::identity(dim) }
    }

    /// `{(|01>+|10>)/√2, (|01>-|10>)/√2, |00>, |11>}`
    pub fn bell_type_2q() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let r = |x: f64| Complex64::new(x, 0.0);
        let vectors = vec![
            vec![r(0.0), r(s), r(s), r(0.0)],
            vec![r(0.0), r(s), r(-s), r(0.0)],
            vec![r(1.0), r(0.0), r(0.0), r(0.0)],
            vec![r(0.0), r(0.0), r(0.0), r(1.0)],
        ];
        Self::from_vectors(&vectors).expect("orthonormal")
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.columns
    }

    pub fn dim(&self) -> usize {
        self.columns.rows()
    }

    pub fn vector(&self, i: usize) -> Vec<Complex64> {
        self.columns.column(i)
    }

    pub fn is_computational(&self) -> bool {
        self.columns == ComplexMatrix::identity(self.dim())
    }

    /// Same basis with columns reordered: new column `k` is old column `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let vectors: Vec<_> = order.iter().map(|&i| self.vector(i)).collect();
        Self::from_vectors(&vectors)
    }

    /// The same set of vectors in a fixed column order (lexicographically
    /// descending), so order-sensitive iterative solvers see one input.
    /// The computational basis is its own canonical form.
    pub fn canonical(&self) -> Self {
        let key = |v: &Vec<Complex64>| v.iter().flat_map(|z| [z.re, z.im]).collect::<Vec<f64>>();
        let mut vectors: Vec<_> = (0..self.dim()).map(|i| self.vector(i)).collect();
        vectors.sort_by(|a, b| {
            let (ka, kb) = (key(a), key(b));
            kb.iter().zip(&ka).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
        });
        IncoherentBasis { columns: ComplexMatrix::from_columns(&vectors).expect("square") }
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch(format!("basis has dimension {}, state {dim}", self.dim())));
        }
        Ok(())
    }
}

/// `E† rho E`: the state written in the incoherent basis.
pub fn change_basis(rho: &DensityMatrix, basis: &IncoherentBasis) -> Result<DensityMatrix> {
    basis.check_dim(rho.dim())?;
    if basis.is_computational() {
        return Ok(rho.clone());
    }
    let mut m = rho.matrix.conjugate_by(&basis.columns);
    for i in 0..m.rows() {
        m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
    }
    Ok(DensityMatrix { matrix: m })
}

/// `E† psi`: amplitudes in the incoherent basis.
pub fn amplitudes_in_basis(psi: &PureState, basis: &IncoherentBasis) -> Result<Vec<Complex64>> {
    basis.check_dim(psi.dim())?;
    if basis.is_computational() {
        return Ok(psi.amplitudes.clone());
    }
    Ok(basis.columns.adjoint().matvec(&psi.amplitudes))
}

/// `sum_i |e_i><e_i| rho |e_i><e_i|`
pub fn dephase(rho: &DensityMatrix, basis: &IncoherentBasis) -> Result<DensityMatrix> {
    let local = change_basis(rho, basis)?;
    let diag = ComplexMatrix::diagonal(&local.matrix.diag_real());
    if basis.is_computational() {
        return Ok(DensityMatrix { matrix: diag });
    }
    Ok(DensityMatrix { matrix: diag.conjugate_by(&basis.columns.adjoint()) })
}

#[derive(Clone, Debug)]
pub struct GroundStateResult {
    pub state: PureState,
    pub energy: f64,
    /// `E_1 - E_0`; infinite for a one-dimensional space.
    pub gap: f64,
    pub degenerate: bool,
}

pub fn ground_state(h: &ComplexMatrix, degeneracy_tol: f64) -> Result<GroundStateResult> {
    let eig = hermitian_eig(h)?;
    let energy = eig.eigenvalues[0];
    let gap = eig.eigenvalues.get(1).map_or(f64::INFINITY, |e1| e1 - energy);
    let state = PureState { amplitudes: eig.vector(0) }.phase_fixed();
    Ok(GroundStateResult { state, energy, gap, degenerate: gap < degeneracy_tol })
}

/// Ground state of a Hamiltonian that commutes with a diagonal operator whose
/// diagonal is `labels`. Each label sector is diagonalized on its own, which
/// is much cheaper than the full matrix. Results agree with [`ground_state`]
/// up to the gauge choice inside a degenerate level.
pub fn ground_state_sectored(h: &ComplexMatrix, labels: &[f64], degeneracy_tol: f64) -> Result<GroundStateResult> {
    h.ensure_hermitian()?;
    if labels.len() != h.rows() {
        return Err(Error::DimensionMismatch("sector labels do not match the Hamiltonian".into()));
    }
    let mut keys: Vec<f64> = labels.to_vec();
    keys.sort_by(f64::total_cmp);
    keys.dedup();
    for r in 0..h.rows() {
        for c in 0..h.cols() {
            if labels[r] != labels[c] && h[(r, c)].norm() > linalg::HERMITIAN_TOL {
                return Err(Error::InvalidState("Hamiltonian mixes symmetry sectors".into()));
            }
        }
    }
    // (energy, sector index, vector) for the two lowest levels of every sector
    let mut levels: Vec<(f64, usize, Option<Vec<Complex64>>)> = Vec::new();
    let mut sectors = Vec::new();
    for (k, key) in keys.iter().enumerate() {
        let idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == *key).collect();
        let eig = hermitian_eig(&h.submatrix(&idx))?;
        levels.push((eig.eigenvalues[0], k, Some(eig.vector(0))));
        if let Some(&e1) = eig.eigenvalues.get(1) {
            levels.push((e1, k, None));
        }
        sectors.push(idx);
    }
    levels.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let (energy, sector, local) = levels[0].clone();
    let gap = levels.get(1).map_or(f64::INFINITY, |l| l.0 - energy);
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); h.rows()];
    for (&i, z) in sectors[sector].iter().zip(local.expect("sector minimum carries its vector")) {
        amplitudes[i] = z;
    }
    let state = PureState { amplitudes }.phase_fixed();
    Ok(GroundStateResult { state, energy, gap, degenerate: gap < degeneracy_tol })
}

/// `exp(-beta H) / Z`, computed with the spectrum shifted by its minimum.
pub fn gibbs_state(h: &ComplexMatrix, beta: f64) -> Result<DensityMatrix> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::Config(format!("inverse temperature {beta} must be finite and >= 0")));
    }
    let eig = hermitian_eig(h)?;
    let e0 = eig.eigenvalues[0];
    let z: f64 = eig.eigenvalues.iter().map(|&e| (-beta * (e - e0)).exp()).sum();
    let mut m = eig.reconstruct_with(|e| (-beta * (e - e0)).exp() / z);
    // remove residual trace error from the reconstruction
    let tr = m.trace().re;
    m = m.scale_real(1.0 / tr);
    Ok(DensityMatrix { matrix: m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_xy_two_spin;
    use std::f64::consts::{FRAC_1_SQRT_2, LN_2, PI};

    fn assert_amps(state: &PureState, expected: &[f64], tol: f64) {
        for (a, b) in state.amplitudes().iter().zip(expected) {
            assert!((a - Complex64::new(*b, 0.0)).norm() < tol, "{:?} vs {expected:?}", state.amplitudes());
        }
    }

    #[test]
    fn two_spin_ground_states() {
        let g = ground_state(&build_xy_two_spin(0.5, 0.5), DEFAULT_DEGENERACY_TOL).unwrap();
        assert!((g.energy + 1.0).abs() < 1e-12);
        assert_amps(&g.state, &[0.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0], 1e-10);
        assert!(!g.degenerate);

        let g = ground_state(&build_xy_two_spin(1.0, 1.0), DEFAULT_DEGENERACY_TOL).unwrap();
        assert!((g.energy + 2f64.sqrt()).abs() < 1e-12);
        let t = PI / 8.0;
        assert_amps(&g.state, &[t.cos(), 0.0, 0.0, t.sin()], 1e-10);

        let g = ground_state(&build_xy_two_spin(0.6, 0.8), DEFAULT_DEGENERACY_TOL).unwrap();
        assert!(g.degenerate);
        assert!(g.gap.abs() < 1e-12);
    }

    #[test]
    fn sectored_matches_full() {
        let parity = crate::model::parity_diagonal(4);
        for (d, h) in [(0.6, 0.3), (0.6, 0.9), (1.0, 0.0), (0.2, -0.4)] {
            let m = crate::model::build_xy_chain(4, d, h, crate::model::Boundary::Periodic).unwrap();
            let a = ground_state(&m, 1e-9).unwrap();
            let b = ground_state_sectored(&m, &parity, 1e-9).unwrap();
            assert!((a.energy - b.energy).abs() < 1e-12);
            assert!((a.gap - b.gap).abs() < 1e-10);
            if !a.degenerate {
                assert!(a.state.overlap(&b.state).norm() > 1.0 - 1e-10);
            }
        }
        let m = crate::model::build_xy_chain(3, 0.3, 0.2, crate::model::Boundary::Open).unwrap();
        let bad_labels = vec![0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0];
        assert!(ground_state_sectored(&m, &bad_labels, 1e-9).is_err());
    }

    #[test]
    fn gibbs_limits() {
        let h = build_xy_two_spin(0.3, 1.2);
        let g0 = gibbs_state(&h, 0.0).unwrap();
        assert!(g0.matrix().max_abs_diff(&ComplexMatrix::identity(4).scale_real(0.25)) < 1e-14);

        let d = ComplexMatrix::diagonal(&[-1.0, 1.0]);
        let g = gibbs_state(&d, LN_2).unwrap();
        assert!(g.matrix().max_abs_diff(&ComplexMatrix::diagonal(&[0.8, 0.2])) < 1e-14);

        // gap at (1,1) is 1 - ... : levels -√2, -1 so gap ≈ 0.414
        let h = build_xy_two_spin(1.0, 1.0);
        let cold = gibbs_state(&h, 50.0).unwrap();
        let gs = ground_state(&h, 1e-9).unwrap().state.projector();
        let diff = cold.matrix() - gs.matrix();
        let trace_dist = 0.5 * hermitian_eig(&diff).unwrap().eigenvalues.iter().map(|x| x.abs()).sum::<f64>();
        assert!(trace_dist <= 1e-6, "{trace_dist}");
    }

    #[test]
    fn gibbs_is_a_state() {
        let h = crate::model::build_xy_chain(3, 0.4, 0.7, crate::model::Boundary::Periodic).unwrap();
        for beta in [0.0, 0.5, 3.0, 40.0, 500.0] {
            let g = gibbs_state(&h, beta).unwrap();
            assert!((g.matrix().trace().re - 1.0).abs() < 1e-12);
            assert!(g.spectrum().unwrap()[0] >= -1e-10);
            DensityMatrix::new(g.matrix().clone()).unwrap();
        }
        assert!(gibbs_state(&h, -1.0).is_err());
    }

    #[test]
    fn dephasing() {
        let comp = IncoherentBasis::computational(2);
        let diag = DensityMatrix::new(ComplexMatrix::diagonal(&[0.3, 0.7])).unwrap();
        assert_eq!(dephase(&diag, &comp).unwrap(), diag);

        let plus = PureState::from_real(&[1.0, 1.0]).unwrap().projector();
        let d = dephase(&plus, &comp).unwrap();
        assert!(d.matrix().max_abs_diff(&ComplexMatrix::diagonal(&[0.5, 0.5])) < 1e-15);

        let t = PI / 8.0;
        let g = PureState::from_real(&[t.cos(), 0.0, 0.0, t.sin()]).unwrap().projector();
        let d = dephase(&g, &IncoherentBasis::computational(4)).unwrap();
        let expected = ComplexMatrix::diagonal(&[t.cos().powi(2), 0.0, 0.0, t.sin().powi(2)]);
        assert!(d.matrix().max_abs_diff(&expected) < 1e-15);

        // idempotent in a non-trivial basis
        let bell = IncoherentBasis::bell_type_2q();
        let once = dephase(&g, &bell).unwrap();
        let twice = dephase(&once, &bell).unwrap();
        assert!(once.matrix().max_abs_diff(twice.matrix()) < 1e-12);
        assert!((once.matrix().trace().re - 1.0).abs() < 1e-12);

        assert!(matches!(dephase(&plus, &bell), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn basis_change() {
        let g_minus = PureState::from_real(&[0.0, 1.0, 1.0, 0.0]).unwrap().projector();
        let same = change_basis(&g_minus, &IncoherentBasis::computational(4)).unwrap();
        assert_eq!(same, g_minus);

        let local = change_basis(&g_minus, &IncoherentBasis::bell_type_2q()).unwrap();
        let mut expected = ComplexMatrix::zeros(4, 4);
        expected[(0, 0)] = Complex64::new(1.0, 0.0);
        assert!(local.matrix().max_abs_diff(&expected) < 1e-15);

        let h = build_xy_two_spin(0.2, 0.9);
        let rho = gibbs_state(&h, 1.3).unwrap();
        let before = rho.spectrum().unwrap();
        let after = change_basis(&rho, &IncoherentBasis::bell_type_2q()).unwrap().spectrum().unwrap();
        assert!(before.iter().zip(&after).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn validation() {
        assert!(PureState::new(vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::diagonal(&[1.5, -0.5])).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::diagonal(&[0.5, 0.6])).is_err());
        let not_unitary = ComplexMatrix::from_real(2, 2, &[1.0, 1.0, 0.0, 1.0]).unwrap();
        assert!(IncoherentBasis::new(not_unitary).is_err());
    }

    #[test]
    fn canonical_order_ignores_labels() {
        assert!(IncoherentBasis::computational(8).canonical().is_computational());
        let bell = IncoherentBasis::bell_type_2q();
        for order in [[0, 1, 2, 3], [3, 1, 0, 2], [2, 0, 3, 1]] {
            assert_eq!(bell.permuted(&order).unwrap().canonical(), bell.canonical());
        }
    }
}
