//! Distances between states and the geometric quantifiers built on them.
//!
//! A geometric quantifier is the distance from a state to a closed set of
//! "classical" states. The three sets used here are the incoherent states of
//! a basis (coherence), product pure states (entanglement) and
//! classical-quantum states on qubit A (discord).
//!
//! Normalization: the trace distance carries the factor ½, the entrywise l1
//! distance does not, and Hilbert–Schmidt is the plain Frobenius norm.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{entropy_of_spectrum, hermitian_eig, schmidt, Bipartition, ComplexMatrix};
use crate::optimize::{self, MinimizerOptions, SimplexMinimum};
use crate::states::{amplitudes_in_basis, change_basis, DensityMatrix, IncoherentBasis, PureState, QuantumState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DistanceKind {
    L1Entrywise,
    Trace,
    HilbertSchmidt,
}

impl DistanceKind {
    pub const ALL: [DistanceKind; 3] = [DistanceKind::L1Entrywise, DistanceKind::Trace, DistanceKind::HilbertSchmidt];

    pub fn name(self) -> &'static str {
        match self {
            DistanceKind::L1Entrywise => "l1",
            DistanceKind::Trace => "trace",
            DistanceKind::HilbertSchmidt => "hs",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn check_same_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch(format!("dimensions {a} and {b}")));
    }
    Ok(())
}

/// Norm of a Hermitian difference matrix under the chosen distance.
pub(crate) fn difference_norm(diff: &ComplexMatrix, kind: DistanceKind) -> Result<f64> {
    Ok(match kind {
        DistanceKind::L1Entrywise => diff.entries().iter().map(|z| z.norm()).sum(),
        DistanceKind::HilbertSchmidt => diff.frobenius_norm(),
        DistanceKind::Trace => 0.5 * hermitian_eig(diff)?.eigenvalues.iter().map(|x| x.abs()).sum::<f64>(),
    })
}

pub fn distance(rho: &DensityMatrix, sigma: &DensityMatrix, kind: DistanceKind) -> Result<f64> {
    check_same_dim(rho.dim(), sigma.dim())?;
    difference_norm(&(rho.matrix() - sigma.matrix()), kind)
}

/// [`distance`] with closed forms when both states are pure.
pub fn state_distance(a: &QuantumState, b: &QuantumState, kind: DistanceKind) -> Result<f64> {
    check_same_dim(a.dim(), b.dim())?;
    match (a, b) {
        (QuantumState::Pure(x), QuantumState::Pure(y)) => {
            let ov = x.overlap(y).norm_sqr().min(1.0);
            Ok(match kind {
                DistanceKind::Trace => (1.0 - ov).max(0.0).sqrt(),
                DistanceKind::HilbertSchmidt => (2.0 * (1.0 - ov)).max(0.0).sqrt(),
                DistanceKind::L1Entrywise => {
                    let (u, v) = (x.amplitudes(), y.amplitudes());
                    let mut total = 0.0;
                    for i in 0..u.len() {
                        for j in 0..u.len() {
                            total += (u[i] * u[j].conj() - v[i] * v[j].conj()).norm();
                        }
                    }
                    total
                }
            })
        }
        _ => distance(&a.density(), &b.density(), kind),
    }
}

/// Sum of the moduli of the off-diagonal entries of `E† rho E`.
pub fn coherence_l1(rho: &DensityMatrix, basis: &IncoherentBasis) -> Result<f64> {
    let local = change_basis(rho, basis)?;
    let m = local.matrix();
    let n = m.rows();
    let mut total = 0.0;
    for r in 0..n {
        for c in 0..n {
            if r != c {
                total += m[(r, c)].norm();
            }
        }
    }
    Ok(total)
}

/// `(sum_i |a_i|)^2 - 1` with `a = E† psi`.
pub fn coherence_l1_pure(psi: &PureState, basis: &IncoherentBasis) -> Result<f64> {
    let a = amplitudes_in_basis(psi, basis)?;
    let s: f64 = a.iter().map(|z| z.norm()).sum();
    let sq: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    Ok((s * s - sq).max(0.0))
}

/// `S(dephased rho) - S(rho)` in nats.
pub fn coherence_relative_entropy(rho: &DensityMatrix, basis: &IncoherentBasis) -> Result<f64> {
    let local = change_basis(rho, basis)?;
    let diag: Vec<f64> = local.matrix().diag_real();
    let value = entropy_of_spectrum(&diag) - entropy_of_spectrum(&rho.spectrum()?);
    Ok(value.max(0.0))
}

pub fn coherence_relative_entropy_pure(psi: &PureState, basis: &IncoherentBasis) -> Result<f64> {
    let a = amplitudes_in_basis(psi, basis)?;
    let p: Vec<f64> = a.iter().map(|z| z.norm_sqr()).collect();
    Ok(entropy_of_spectrum(&p).max(0.0))
}

/// Minimum distance from `rho` to the states diagonal in `basis`.
///
/// Hilbert–Schmidt uses the closed form (the dephased state is nearest).
/// The other two kinds run the certified simplex minimizer, which fails with
/// [`Error::OptimizerDidNotConverge`] if it cannot close its optimality gap
/// to 1e-8.
pub fn geometric_coherence(rho: &DensityMatrix, basis: &IncoherentBasis, kind: DistanceKind) -> Result<f64> {
    match kind {
        DistanceKind::HilbertSchmidt => {
            let local = change_basis(rho, basis)?;
            let m = local.matrix();
            let n = m.rows();
            let mut total = 0.0;
            for r in 0..n {
                for c in 0..n {
                    if r != c {
                        total += m[(r, c)].norm_sqr();
                    }
                }
            }
            Ok(total.sqrt())
        }
        _ => Ok(nearest_incoherent(rho, &basis.canonical(), kind, &MinimizerOptions::default())?.value),
    }
}

/// Runs the simplex minimizer for any distance kind and returns the full result,
/// including the optimal diagonal weights.
pub fn nearest_incoherent(
    rho: &DensityMatrix,
    basis: &IncoherentBasis,
    kind: DistanceKind,
    options: &MinimizerOptions,
) -> Result<SimplexMinimum> {
    let local = change_basis(rho, basis)?;
    optimize::minimize_diagonal_distance(local.matrix(), kind, options)
}

/// `1 - (largest Schmidt coefficient)^2`
pub fn geometric_entanglement(psi: &PureState, split: &Bipartition) -> Result<f64> {
    let sd = schmidt(psi.amplitudes(), split)?;
    let c = sd.max_coefficient();
    Ok((1.0 - c * c).max(0.0))
}

/// `||rho||^2 - sum_k ||Tr_A[(P_k (x) I) rho]||^2` for the projective
/// measurement on qubit A along the Bloch direction `(theta, phi)`.
pub fn discord_objective(rho: &ComplexMatrix, theta: f64, phi: f64) -> f64 {
    let n = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
    let total = rho.entries().iter().map(|z| z.norm_sqr()).sum::<f64>();
    let mut kept = 0.0;
    for sign in [1.0, -1.0] {
        // P = (I + s n.sigma)/2 on qubit A
        let p = [
            [Complex64::new(0.5 * (1.0 + sign * n[2]), 0.0), Complex64::new(0.5 * sign * n[0], -0.5 * sign * n[1])],
            [Complex64::new(0.5 * sign * n[0], 0.5 * sign * n[1]), Complex64::new(0.5 * (1.0 - sign * n[2]), 0.0)],
        ];
        // tau[b, b'] = sum_{a, a'} P[a', a] rho[(a, b), (a', b')]
        let mut tau = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (b, row) in tau.iter_mut().enumerate() {
            for (bp, entry) in row.iter_mut().enumerate() {
                for a in 0..2 {
                    for ap in 0..2 {
                        *entry += p[ap][a] * rho[(2 * a + b, 2 * ap + bp)];
                    }
                }
            }
        }
        kept += tau.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>();
    }
    (total - kept).max(0.0)
}

/// Squared Hilbert–Schmidt distance to the nearest classical-quantum state
/// (classical on qubit A). Coarse 64×64 grid over measurement directions,
/// then Nelder–Mead refinement from the best grid point.
pub fn geometric_discord_2q(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch(format!("two-qubit discord needs dimension 4, got {}", rho.dim())));
    }
    const GRID: usize = 64;
    let m = rho.matrix();
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..GRID {
        // theta in [0, pi], phi in [0, 2pi)
        let theta = std::f64::consts::PI * i as f64 / (GRID - 1) as f64;
        for j in 0..GRID {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / GRID as f64;
            let v = discord_objective(m, theta, phi);
            if v < best.0 {
                best = (v, theta, phi);
            }
        }
    }
    let step = std::f64::consts::PI / GRID as f64;
    let refined = optimize::nelder_mead(
        |x| discord_objective(m, x[0], x[1]),
        &[best.1, best.2],
        step,
        1e-14,
        2000,
    );
    Ok(refined.value.min(best.0))
}

/// Which quantity a sweep row reports. Coherence-type measures carry the
/// incoherent basis they are evaluated in.
#[derive(Clone, Debug, PartialEq)]
pub enum MeasureKind {
    CoherenceL1 { basis: IncoherentBasis },
    CoherenceRelativeEntropy { basis: IncoherentBasis },
    GeometricCoherence { basis: IncoherentBasis, kind: DistanceKind },
    GeometricEntanglement { split: Bipartition },
    GeometricDiscord2q,
}

impl MeasureKind {
    pub fn base_name(&self) -> String {
        match self {
            MeasureKind::CoherenceL1 { .. } => "coherence_l1".into(),
            MeasureKind::CoherenceRelativeEntropy { .. } => "coherence_relative_entropy".into(),
            MeasureKind::GeometricCoherence { kind, .. } => format!("geometric_coherence_{}", kind.name()),
            MeasureKind::GeometricEntanglement { .. } => "geometric_entanglement".into(),
            MeasureKind::GeometricDiscord2q => "geometric_discord_2q".into(),
        }
    }

    pub fn basis(&self) -> Option<&IncoherentBasis> {
        match self {
            MeasureKind::CoherenceL1 { basis }
            | MeasureKind::CoherenceRelativeEntropy { basis }
            | MeasureKind::GeometricCoherence { basis, .. } => Some(basis),
            _ => None,
        }
    }

    pub fn evaluate(&self, state: &QuantumState) -> Result<f64> {
        match (self, state) {
            (MeasureKind::CoherenceL1 { basis }, QuantumState::Pure(p)) => coherence_l1_pure(p, basis),
            (MeasureKind::CoherenceL1 { basis }, QuantumState::Mixed(m)) => coherence_l1(m, basis),
            (MeasureKind::CoherenceRelativeEntropy { basis }, QuantumState::Pure(p)) => {
                coherence_relative_entropy_pure(p, basis)
            }
            (MeasureKind::CoherenceRelativeEntropy { basis }, QuantumState::Mixed(m)) => {
                coherence_relative_entropy(m, basis)
            }
            (MeasureKind::GeometricCoherence { basis, kind: DistanceKind::HilbertSchmidt }, QuantumState::Pure(p)) => {
                let a = amplitudes_in_basis(p, basis)?;
                let quartic: f64 = a.iter().map(|z| z.norm_sqr().powi(2)).sum();
                let total: f64 = a.iter().map(|z| z.norm_sqr()).sum();
                Ok((total * total - quartic).max(0.0).sqrt())
            }
            (MeasureKind::GeometricCoherence { basis, kind }, s) => geometric_coherence(&s.density(), basis, *kind),
            (MeasureKind::GeometricEntanglement { split }, QuantumState::Pure(p)) => geometric_entanglement(p, split),
            (MeasureKind::GeometricEntanglement { .. }, QuantumState::Mixed(_)) => {
                Err(Error::Unsupported("geometric entanglement is defined for pure states only".into()))
            }
            (MeasureKind::GeometricDiscord2q, s) => geometric_discord_2q(&s.density()),
        }
    }

    /// The distance this quantity is a minimum of, if any, together with the
    /// map taking the reported value to that minimum distance.
    ///
    /// Entanglement `1 - c_max^2` is the squared trace distance to the nearest
    /// product pure state; discord is a squared Hilbert–Schmidt distance.
    pub fn distance_form(&self) -> Option<(DistanceKind, fn(f64) -> f64)> {
        fn ident(x: f64) -> f64 {
            x
        }
        fn root(x: f64) -> f64 {
            x.max(0.0).sqrt()
        }
        match self {
            MeasureKind::CoherenceL1 { .. } => Some((DistanceKind::L1Entrywise, ident)),
            MeasureKind::GeometricCoherence { kind, .. } => Some((*kind, ident)),
            MeasureKind::GeometricEntanglement { .. } => Some((DistanceKind::Trace, root)),
            MeasureKind::GeometricDiscord2q => Some((DistanceKind::HilbertSchmidt, root)),
            MeasureKind::CoherenceRelativeEntropy { .. } => None,
        }
    }

    pub fn is_coherence(&self) -> bool {
        self.basis().is_some()
    }
}
