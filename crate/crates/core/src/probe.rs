//! Finite-difference probes along a parameter curve, divergence
//! classification, and the basis constructions that expose a ground-state
//! jump as a coherence step.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, complete_basis, complete_within, hermitian_eig, ComplexMatrix};
use crate::measures::{state_distance, DistanceKind, MeasureKind};
use crate::model::{self, Boundary, CurvePoint, CurveSpec, Temperature};
use crate::states::{self, IncoherentBasis, PureState, QuantumState};

/// Ratio window that marks `1/δλ` scaling of a step.
pub const DIVERGENT_RATIO: (f64, f64) = (1.8, 2.2);
/// Ratio window for a quantity that stays bounded under refinement.
pub const BOUNDED_RATIO: (f64, f64) = (0.8, 1.2);
/// Finest-level magnitude below which scaling ratios are roundoff, not signal.
pub const NOISE_FLOOR: f64 = 1e-6;

/// A state on the curve together with the parameters that produced it.
#[derive(Clone, Debug)]
pub struct CurveState {
    pub lambda: f64,
    pub point: CurvePoint,
    pub state: QuantumState,
    /// The ground level is degenerate within tolerance: the representative is gauge-dependent.
    pub crossing: bool,
    /// Spectral gap above the ground level; `None` for thermal states.
    pub gap: Option<f64>,
}

/// Anything that maps a curve parameter to a state.
pub trait StateFamily: Sync {
    fn state_at(&self, lambda: f64) -> Result<CurveState>;
}

/// XY chain ground or Gibbs states along a [`CurveSpec`].
#[derive(Clone, Debug)]
pub struct XyFamily {
    pub n_sites: usize,
    pub boundary: Boundary,
    pub curve: CurveSpec,
    pub degeneracy_tol: f64,
}

impl XyFamily {
    pub fn new(n_sites: usize, boundary: Boundary, curve: CurveSpec) -> Self {
        XyFamily { n_sites, boundary, curve, degeneracy_tol: states::DEFAULT_DEGENERACY_TOL }
    }

    pub fn hamiltonian(&self, point: &CurvePoint) -> Result<ComplexMatrix> {
        model::build_xy_chain(self.n_sites, point.delta, point.h, self.boundary)
    }
}

impl StateFamily for XyFamily {
    fn state_at(&self, lambda: f64) -> Result<CurveState> {
        let point = self.curve.evaluate(lambda)?;
        let h = self.hamiltonian(&point)?;
        match point.temperature {
            Temperature::Zero => {
                let labels = model::parity_diagonal(self.n_sites);
                let gs = states::ground_state_sectored(&h, &labels, self.degeneracy_tol)?;
                Ok(CurveState {
                    lambda,
                    point,
                    state: QuantumState::Pure(gs.state),
                    crossing: gs.degenerate,
                    gap: Some(gs.gap),
                })
            }
            Temperature::Beta(beta) => Ok(CurveState {
                lambda,
                point,
                state: QuantumState::Mixed(states::gibbs_state(&h, beta)?),
                crossing: false,
                gap: None,
            }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SusceptibilityKind {
    MeasureFirst,
    MeasureSecond,
    LineElementFirst,
    LineElementSecond,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SusceptibilityEstimate {
    pub lambda: f64,
    pub step: f64,
    pub value: f64,
    pub kind: SusceptibilityKind,
    /// An evaluated point sits on a degenerate ground level.
    pub crossing: bool,
    pub overflow: bool,
}

impl SusceptibilityEstimate {
    fn new(lambda: f64, step: f64, value: f64, kind: SusceptibilityKind, crossing: bool) -> Self {
        SusceptibilityEstimate { lambda, step, value, kind, crossing, overflow: !value.is_finite() }
    }
}

fn check_step(step: f64) -> Result<()> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Config(format!("step {step} must be positive")));
    }
    Ok(())
}

/// `{f(λ+δ) - f(λ-δ)} / 2δ` over a sampled profile; the flag is OR-ed across samples.
pub fn central_difference(f: impl Fn(f64) -> Result<(f64, bool)>, lambda: f64, step: f64) -> Result<(f64, bool)> {
    check_step(step)?;
    let (hi, c1) = f(lambda + step)?;
    let (lo, c2) = f(lambda - step)?;
    Ok(((hi - lo) / (2.0 * step), c1 || c2))
}

/// `{f(λ+δ) - 2f(λ) + f(λ-δ)} / δ²`
pub fn second_difference(f: impl Fn(f64) -> Result<(f64, bool)>, lambda: f64, step: f64) -> Result<(f64, bool)> {
    check_step(step)?;
    let (hi, c1) = f(lambda + step)?;
    let (mid, c2) = f(lambda)?;
    let (lo, c3) = f(lambda - step)?;
    Ok(((hi - 2.0 * mid + lo) / (step * step), c1 || c2 || c3))
}

fn measure_at(measure: &MeasureKind, family: &dyn StateFamily, lambda: f64) -> Result<(f64, bool)> {
    let s = family.state_at(lambda)?;
    Ok((measure.evaluate(&s.state)?, s.crossing))
}

/// One-sided `D[ρ(λ+δ), ρ(λ)] / δ`.
pub fn line_element_rate(
    family: &dyn StateFamily,
    lambda: f64,
    step: f64,
    kind: DistanceKind,
) -> Result<SusceptibilityEstimate> {
    check_step(step)?;
    let a = family.state_at(lambda)?;
    let b = family.state_at(lambda + step)?;
    let d = state_distance(&b.state, &a.state, kind)?;
    Ok(SusceptibilityEstimate::new(
        lambda,
        step,
        d / step,
        SusceptibilityKind::LineElementFirst,
        a.crossing || b.crossing,
    ))
}

/// Second derivative of arclength: `{D[ρ(λ+δ),ρ(λ)] - D[ρ(λ),ρ(λ-δ)]} / δ²`,
/// the central second difference of `s` with each increment taken as the
/// chord distance of one step.
pub fn line_element_second(
    family: &dyn StateFamily,
    lambda: f64,
    step: f64,
    kind: DistanceKind,
) -> Result<SusceptibilityEstimate> {
    check_step(step)?;
    let lo = family.state_at(lambda - step)?;
    let mid = family.state_at(lambda)?;
    let hi = family.state_at(lambda + step)?;
    let forward = state_distance(&hi.state, &mid.state, kind)?;
    let backward = state_distance(&mid.state, &lo.state, kind)?;
    Ok(SusceptibilityEstimate::new(
        lambda,
        step,
        (forward - backward) / (step * step),
        SusceptibilityKind::LineElementSecond,
        lo.crossing || mid.crossing || hi.crossing,
    ))
}

pub fn measure_susceptibility(
    measure: &MeasureKind,
    family: &dyn StateFamily,
    lambda: f64,
    step: f64,
) -> Result<SusceptibilityEstimate> {
    let (v, crossing) = central_difference(|x| measure_at(measure, family, x), lambda, step)?;
    Ok(SusceptibilityEstimate::new(lambda, step, v, SusceptibilityKind::MeasureFirst, crossing))
}

pub fn second_susceptibility(
    measure: &MeasureKind,
    family: &dyn StateFamily,
    lambda: f64,
    step: f64,
) -> Result<SusceptibilityEstimate> {
    let (v, crossing) = second_difference(|x| measure_at(measure, family, x), lambda, step)?;
    Ok(SusceptibilityEstimate::new(lambda, step, v, SusceptibilityKind::MeasureSecond, crossing))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Classification {
    Finite,
    Divergent,
    Cusp,
}

impl Classification {
    pub fn name(self) -> &'static str {
        match self {
            Classification::Finite => "finite",
            Classification::Divergent => "divergent",
            Classification::Cusp => "cusp",
        }
    }
}

/// First (and optionally second) difference at one refinement level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelEstimate {
    pub step: f64,
    pub first: f64,
    pub second: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DivergenceReport {
    pub lambda: f64,
    pub classification: Classification,
    /// `|first(δ/2)| / |first(δ)|` for successive levels.
    pub first_ratios: Vec<f64>,
    pub second_ratios: Vec<f64>,
    /// Levels ordered by step, largest first.
    pub levels: Vec<LevelEstimate>,
}

fn ratios(values: &[f64]) -> Vec<f64> {
    values.windows(2).map(|w| w[1].abs() / w[0].abs()).collect()
}

fn all_within(rs: &[f64], (lo, hi): (f64, f64)) -> bool {
    !rs.is_empty() && rs.iter().all(|r| r.is_finite() && *r >= lo && *r <= hi)
}

/// Classifies how a susceptibility scales as the step is halved.
///
/// * divergent: successive first-difference ratios all in [1.8, 2.2]
/// * cusp: first-difference ratios in [0.8, 1.2] while second-difference
///   ratios are in [1.8, 2.2]
/// * finite: anything else
///
/// A finest-level magnitude below [`NOISE_FLOOR`] never counts as divergent.
pub fn classify_divergence(lambda: f64, levels: &[LevelEstimate]) -> Result<DivergenceReport> {
    if levels.len() < 3 {
        return Err(Error::InsufficientLevels(levels.len()));
    }
    let mut levels = levels.to_vec();
    levels.sort_by(|a, b| b.step.total_cmp(&a.step));
    let firsts: Vec<f64> = levels.iter().map(|l| l.first).collect();
    let first_ratios = ratios(&firsts);
    let seconds: Option<Vec<f64>> = levels.iter().map(|l| l.second).collect();
    let second_ratios = seconds.as_deref().map(ratios).unwrap_or_default();
    let finest_first = firsts.last().copied().unwrap_or(0.0).abs();
    let finest_second = seconds.as_ref().and_then(|s| s.last().copied()).unwrap_or(0.0).abs();

    let classification = if finest_first >= NOISE_FLOOR && all_within(&first_ratios, DIVERGENT_RATIO) {
        Classification::Divergent
    } else if all_within(&first_ratios, BOUNDED_RATIO)
        && finest_second >= NOISE_FLOOR
        && all_within(&second_ratios, DIVERGENT_RATIO)
    {
        Classification::Cusp
    } else {
        Classification::Finite
    };
    Ok(DivergenceReport { lambda, classification, first_ratios, second_ratios, levels })
}

/// Central first and second differences of a sampled profile at each step,
/// classified. The second difference is skipped when `lambda` itself sits
/// on a degenerate crossing.
pub fn probe_profile(f: &dyn Fn(f64) -> Result<(f64, bool)>, lambda: f64, steps: &[f64]) -> Result<DivergenceReport> {
    let (_, at_crossing) = f(lambda)?;
    let levels = steps
        .iter()
        .map(|&step| {
            let (first, _) = central_difference(f, lambda, step)?;
            let second = if at_crossing { None } else { Some(second_difference(f, lambda, step)?.0) };
            Ok(LevelEstimate { step, first, second })
        })
        .collect::<Result<Vec<_>>>()?;
    classify_divergence(lambda, &levels)
}

pub fn probe_measure(
    measure: &MeasureKind,
    family: &dyn StateFamily,
    lambda: f64,
    steps: &[f64],
) -> Result<DivergenceReport> {
    probe_profile(&|x| measure_at(measure, family, x), lambda, steps)
}

/// Line-element rate straddling `lambda` symmetrically (from `λ - δ/2` to `λ + δ/2`)
/// at each step, classified like a susceptibility.
pub fn probe_line_element(
    family: &dyn StateFamily,
    lambda: f64,
    steps: &[f64],
    kind: DistanceKind,
) -> Result<DivergenceReport> {
    let levels = steps
        .iter()
        .map(|&step| {
            let first = line_element_rate(family, lambda - 0.5 * step, step, kind)?.value;
            Ok(LevelEstimate { step, first, second: None })
        })
        .collect::<Result<Vec<_>>>()?;
    classify_divergence(lambda, &levels)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BerryPhaseResult {
    /// `2π <ψ|O|ψ>`
    pub analytic: f64,
    /// `i ∫ <ψ|U†(μ) dU/dμ|ψ> dμ` over `[0, 2π]` by composite Simpson.
    pub integrated: f64,
    pub generator: String,
}

pub const BERRY_PANELS: usize = 10_000;

/// Berry phase of `ψ` under `U(μ) = exp(-iμO)`, `μ ∈ [0, 2π]`.
///
/// The integrand is evaluated independently of the closed form: `U(μ)ψ` is
/// propagated in the eigenbasis of `O` and `dU/dμ ψ` is a central finite
/// difference of the propagated state.
pub fn berry_phase(psi: &PureState, generator: &ComplexMatrix, label: &str) -> Result<BerryPhaseResult> {
    let eig = hermitian_eig(generator)?;
    if eig.dim() != psi.dim() {
        return Err(Error::DimensionMismatch("generator and state".into()));
    }
    let coeffs = eig.eigenvectors.adjoint().matvec(psi.amplitudes());
    let weights: Vec<f64> = coeffs.iter().map(|c| c.norm_sqr()).collect();
    let cyclic_defect = coeffs
        .iter()
        .zip(&eig.eigenvalues)
        .map(|(c, &l)| (Complex64::from_polar(1.0, -2.0 * PI * l) - 1.0).norm_sqr() * c.norm_sqr())
        .sum::<f64>()
        .sqrt();
    if cyclic_defect > 1e-8 {
        return Err(Error::NotCyclic(cyclic_defect));
    }
    let analytic = 2.0 * PI * order_parameter_expectation(psi, generator)?;

    const H: f64 = 1e-5;
    // <U(μ)ψ | (U(μ+h)ψ - U(μ-h)ψ) / 2h>, computed in the eigenbasis where U is diagonal
    let integrand = |mu: f64| -> Complex64 {
        weights
            .iter()
            .zip(&eig.eigenvalues)
            .map(|(&w, &l)| {
                let here = Complex64::from_polar(1.0, -mu * l);
                let ahead = Complex64::from_polar(1.0, -(mu + H) * l);
                let behind = Complex64::from_polar(1.0, -(mu - H) * l);
                here.conj() * (ahead - behind) / (2.0 * H) * w
            })
            .sum()
    };
    let h = 2.0 * PI / BERRY_PANELS as f64;
    let mut acc = integrand(0.0) + integrand(2.0 * PI);
    for k in 1..BERRY_PANELS {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += integrand(k as f64 * h) * w;
    }
    let integral = acc * (h / 3.0);
    let integrated = (Complex64::new(0.0, 1.0) * integral).re;
    Ok(BerryPhaseResult { analytic, integrated, generator: label.to_string() })
}

/// `<ψ|O|ψ>`; errors if `O` is not Hermitian.
pub fn order_parameter_expectation(psi: &PureState, op: &ComplexMatrix) -> Result<f64> {
    op.ensure_hermitian()?;
    if op.rows() != psi.dim() {
        return Err(Error::DimensionMismatch("operator and state".into()));
    }
    let v = psi.expectation(op);
    debug_assert!(v.im.abs() < 1e-10);
    Ok(v.re)
}

/// Incoherent basis in which `before` is a basis vector and `after` is not.
///
/// `e_0 = before`. If the states overlap, `e_1` is the normalized part of
/// `after` orthogonal to `before`. If they are orthogonal, `after` is split
/// evenly over `e_1 = (after + w)/√2` and `e_2 = (after - w)/√2` with `w`
/// orthogonal to both, which needs dimension at least 3. The rest is
/// completed by Gram–Schmidt over the canonical vectors.
pub fn theorem3_basis(before: &PureState, after: &PureState) -> Result<IncoherentBasis> {
    let d = before.dim();
    if after.dim() != d {
        return Err(Error::DimensionMismatch("states of different dimension".into()));
    }
    let ov = before.overlap(after);
    if ov.norm() > 1.0 - 1e-10 {
        return Err(Error::IdenticalStates);
    }
    let e0 = before.amplitudes().to_vec();
    let vectors = if ov.norm() > 1e-10 {
        let perp: Vec<Complex64> = after.amplitudes().iter().zip(&e0).map(|(a, b)| a - ov * b).collect();
        let e1 = linalg::normalized(&perp).ok_or(Error::IdenticalStates)?;
        complete_basis(vec![e0, e1], d)
    } else {
        if d < 3 {
            return Err(Error::DimensionTooSmall(
                "orthogonal states cannot be separated by an incoherent basis in dimension 2".into(),
            ));
        }
        let a = after.amplitudes().to_vec();
        let mut pair = vec![e0.clone(), a.clone()];
        complete_within(&mut pair, &(0..d).collect::<Vec<_>>(), d, 3);
        let w = pair.pop().expect("third vector");
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let e1: Vec<Complex64> = a.iter().zip(&w).map(|(x, y)| (x + y) * s).collect();
        let e2: Vec<Complex64> = a.iter().zip(&w).map(|(x, y)| (x - y) * s).collect();
        complete_basis(vec![e0, e1, e2], d)
    };
    IncoherentBasis::from_vectors(&vectors)
}

/// Parity-sector basis for an `N`-spin chain: the sector of `before` keeps
/// `before` itself as a basis vector; the sector of `after` is spanned by an
/// orthonormal set anchored at `after` and then Fourier-mixed, so `after`
/// spreads evenly over that sector. Columns: the mixed sector first.
pub fn parity_fourier_basis(n_sites: usize, before: &PureState, after: &PureState) -> Result<IncoherentBasis> {
    let dim = 1usize << n_sites;
    if before.dim() != dim || after.dim() != dim {
        return Err(Error::DimensionMismatch(format!("states must have dimension {dim}")));
    }
    let parity = model::parity_diagonal(n_sites);
    let expect = |psi: &PureState| -> f64 {
        psi.amplitudes().iter().zip(&parity).map(|(z, p)| z.norm_sqr() * p).sum()
    };
    let (pb, pa) = (expect(before), expect(after));
    for (name, p) in [("before", pb), ("after", pa)] {
        if (p.abs() - 1.0).abs() > 1e-8 {
            return Err(Error::NotParityEigenstates(format!("<P> = {p} for the {name} state")));
        }
    }
    if pb.signum() == pa.signum() {
        return Err(Error::SameParity);
    }
    let sector = |sign: f64| -> Vec<usize> { (0..dim).filter(|&i| parity[i] == sign).collect() };
    let project = |psi: &PureState, idx: &[usize]| -> Result<Vec<Complex64>> {
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        for &i in idx {
            v[i] = psi.amplitudes()[i];
        }
        linalg::normalized(&v).ok_or_else(|| Error::NotParityEigenstates("empty projection".into()))
    };
    let before_sector = sector(pb.signum());
    let after_sector = sector(pa.signum());

    let mut kept = vec![project(before, &before_sector)?];
    complete_within(&mut kept, &before_sector, dim, before_sector.len());

    let mut anchored = vec![project(after, &after_sector)?];
    complete_within(&mut anchored, &after_sector, dim, after_sector.len());
    let m = anchored.len();
    if kept.len() != before_sector.len() || m != after_sector.len() {
        return Err(Error::InvalidState("sector completion fell short".into()));
    }
    let mut vectors = Vec::with_capacity(dim);
    for mp in 0..m {
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        for (mm, e) in anchored.iter().enumerate() {
            let phase = Complex64::from_polar(1.0 / (m as f64).sqrt(), -2.0 * PI * (mm * mp) as f64 / m as f64);
            for (x, y) in v.iter_mut().zip(e) {
                *x += phase * y;
            }
        }
        vectors.push(v);
    }
    vectors.extend(kept);
    IncoherentBasis::from_vectors(&vectors)
}

/// `(|N(λ+δ) - N(λ)|, D[ρ(λ+δ), ρ(λ)])` for a quantifier that is a minimum
/// distance under `kind`. The first never exceeds the second.
pub fn verify_theorem1_bound(
    measure: &MeasureKind,
    family: &dyn StateFamily,
    lambda: f64,
    step: f64,
    kind: DistanceKind,
) -> Result<(f64, f64)> {
    check_step(step)?;
    let a = family.state_at(lambda)?;
    let b = family.state_at(lambda + step)?;
    bound_pair(measure, &a.state, &b.state, kind)
}

/// The two sides of the reverse-triangle bound for a pair of states.
pub fn bound_pair(
    measure: &MeasureKind,
    a: &QuantumState,
    b: &QuantumState,
    kind: DistanceKind,
) -> Result<(f64, f64)> {
    let (own, to_distance) = measure
        .distance_form()
        .ok_or_else(|| Error::Unsupported(format!("{} is not a minimum distance", measure.base_name())))?;
    if own != kind {
        return Err(Error::Unsupported(format!(
            "{} is a minimum of the {own} distance, not {kind}",
            measure.base_name()
        )));
    }
    let lhs = (to_distance(measure.evaluate(b)?) - to_distance(measure.evaluate(a)?)).abs();
    let rhs = state_distance(b, a, kind)?;
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Bipartition;
    use crate::measures::coherence_l1_pure;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn g_minus() -> PureState {
        PureState::from_real(&[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    fn g_plus(theta: f64) -> PureState {
        PureState::from_real(&[(theta / 2.0).cos(), 0.0, 0.0, (theta / 2.0).sin()]).unwrap()
    }

    fn radial(theta: f64, lo: f64, hi: f64) -> XyFamily {
        XyFamily::new(2, Boundary::Periodic, CurveSpec::radial(theta, lo, hi))
    }

    /// A family with a fixed state, whatever λ is.
    struct Constant;
    impl StateFamily for Constant {
        fn state_at(&self, lambda: f64) -> Result<CurveState> {
            Ok(CurveState {
                lambda,
                point: CurvePoint { delta: 0.3, h: 0.4, temperature: Temperature::Zero },
                state: g_plus(0.7).into(),
                crossing: false,
                gap: Some(1.0),
            })
        }
    }

    #[test]
    fn line_element_constant_curve() {
        for kind in DistanceKind::ALL {
            assert_eq!(line_element_rate(&Constant, 0.5, 1e-2, kind).unwrap().value, 0.0);
        }
        let fixed = XyFamily::new(2, Boundary::Periodic, CurveSpec::parse("0.3", "0.2", "zero-temperature", 0.0, 1.0).unwrap());
        // pure-state trace distance is √(1 - |<a|b>|²): roundoff surfaces at √ε
        let d = line_element_rate(&fixed, 0.5, 1e-2, DistanceKind::Trace).unwrap().value * 1e-2;
        assert!(d.abs() < 1e-7, "{d}");
    }

    #[test]
    fn line_element_straddling_crossing() {
        let theta = PI / 3.0;
        let fam = radial(theta, 0.5, 1.5);
        let step = 1e-2;
        let est = line_element_rate(&fam, 1.0 - step / 2.0, step, DistanceKind::Trace).unwrap();
        // closed form: trace distance between orthogonal-sector pure states is 1
        let jump = state_distance(&g_minus().into(), &g_plus(theta).into(), DistanceKind::Trace).unwrap();
        assert!((jump - 1.0).abs() < 1e-12);
        assert!(est.value >= 0.5 / step * jump);
        assert!(!est.crossing);
    }

    #[test]
    fn line_element_smooth_segment_converges() {
        // r in (1, 2): ground state g+(θ) with θ fixed, so ρ is constant and any
        // curve bending θ is needed for a nonzero rate; use h fixed, δ varying
        let fam = XyFamily::new(
            2,
            Boundary::Periodic,
            CurveSpec::parse("lambda", "1.2", "zero-temperature", 0.0, 2.0).unwrap(),
        );
        let a = line_element_rate(&fam, 0.8, 1e-2, DistanceKind::Trace).unwrap().value;
        let b = line_element_rate(&fam, 0.8, 5e-3, DistanceKind::Trace).unwrap().value;
        assert!(a > 0.1);
        assert!(((a - b) / b).abs() < 0.05, "{a} {b}");
    }

    #[test]
    fn l1_susceptibility_step_at_circle() {
        let theta = PI / 4.0;
        let fam = radial(theta, 0.5, 1.5);
        let measure = MeasureKind::CoherenceL1 { basis: IncoherentBasis::computational(4) };
        for step in [1e-2, 5e-3, 2.5e-3] {
            let est = measure_susceptibility(&measure, &fam, 1.0, step).unwrap();
            let expected = (1.0 - theta.sin()) / (2.0 * step);
            assert!((est.value.abs() - expected).abs() < 1e-9, "{} vs {expected}", est.value);
        }
    }

    #[test]
    fn entanglement_blind_at_delta_one() {
        let fam = XyFamily::new(2, Boundary::Periodic, CurveSpec::parse("lambda", "0", "zero-temperature", 0.5, 1.5).unwrap());
        let measure = MeasureKind::GeometricEntanglement { split: Bipartition::contiguous(2, 1).unwrap() };
        for step in [1e-2, 5e-3, 2.5e-3] {
            assert!(measure_susceptibility(&measure, &fam, 1.0, step).unwrap().value.abs() <= 1.0);
        }
        assert_eq!(measure_susceptibility(&measure, &Constant, 0.3, 1e-2).unwrap().value, 0.0);
    }

    #[test]
    fn synthetic_second_differences() {
        let linear = |x: f64| Ok((3.0 * x - 1.0, false));
        for step in [1e-2, 1e-3] {
            let (v, _) = second_difference(linear, 0.4, step).unwrap();
            assert!(v.abs() <= 10.0 * f64::EPSILON / (step * step) * 4.0);
        }
        let quad = |x: f64| Ok((2.5 * x * x, false));
        let (v, _) = second_difference(quad, 0.7, 1e-3).unwrap();
        assert!((v - 5.0).abs() < 0.05);
        let kink = |x: f64| Ok(((x - 0.5).abs(), false));
        let (a, _) = second_difference(kink, 0.5, 1e-2).unwrap();
        let (b, _) = second_difference(kink, 0.5, 5e-3).unwrap();
        assert!((a - 2.0 / 1e-2).abs() < 1e-8 && (b / a - 2.0).abs() < 1e-9);
    }

    #[test]
    fn classification_examples() {
        let lv = |first: [f64; 3], second: Option<[f64; 3]>| -> Vec<LevelEstimate> {
            [1e-2, 5e-3, 2.5e-3]
                .iter()
                .enumerate()
                .map(|(i, &step)| LevelEstimate { step, first: first[i], second: second.map(|s| s[i]) })
                .collect()
        };
        let c = |l: Vec<LevelEstimate>| classify_divergence(0.0, &l).unwrap().classification;
        assert_eq!(c(lv([100.0, 200.0, 400.0], None)), Classification::Divergent);
        assert_eq!(c(lv([5.0, 5.0, 5.0], Some([50.0, 100.0, 200.0]))), Classification::Cusp);
        assert_eq!(c(lv([5.0, 5.1, 5.05], None)), Classification::Finite);
        assert_eq!(c(lv([1e-14, 2e-14, 4e-14], None)), Classification::Finite);
        // order of the input levels does not matter
        let mut rev = lv([100.0, 200.0, 400.0], None);
        rev.reverse();
        assert_eq!(c(rev), Classification::Divergent);
        assert!(matches!(classify_divergence(0.0, &lv([1.0, 2.0, 4.0], None)[..2]), Err(Error::InsufficientLevels(2))));
    }

    #[test]
    fn berry_phase_examples() {
        let o = model::total_magnetization(2).scale_real(0.5);
        let r = berry_phase(&g_minus(), &o, "Sz/2").unwrap();
        assert!(r.analytic.abs() < 1e-12 && r.integrated.abs() < 1e-8);

        let r = berry_phase(&g_plus(PI / 4.0), &o, "Sz/2").unwrap();
        assert!((r.analytic - 2.0 * PI * (PI / 4.0).cos()).abs() < 1e-12);
        assert!((r.analytic - 4.44288).abs() < 1e-5);
        assert!((r.analytic - r.integrated).abs() < 1e-8, "{r:?}");

        let zero = ComplexMatrix::zeros(4, 4);
        let r = berry_phase(&g_plus(0.3), &zero, "0").unwrap();
        assert_eq!(r.analytic, 0.0);
        assert!(r.integrated.abs() < 1e-12);

        // half-integer generator on a single spin is not cyclic
        let half = model::total_magnetization(1).scale_real(0.5);
        let plus = PureState::from_real(&[1.0, 1.0]).unwrap();
        assert!(matches!(berry_phase(&plus, &half, "Sz/2"), Err(Error::NotCyclic(_))));
    }

    #[test]
    fn order_parameter_examples() {
        let o = model::total_magnetization(2);
        assert!(order_parameter_expectation(&g_minus(), &o).unwrap().abs() < 1e-12);
        let v = order_parameter_expectation(&g_plus(PI / 4.0), &o).unwrap();
        assert!((v - 2.0 * (PI / 4.0).cos()).abs() < 1e-12);
        assert!((order_parameter_expectation(&PureState::basis(4, 3), &o).unwrap() + 2.0).abs() < 1e-15);
        let bad = ComplexMatrix::from_real(4, 4, &[0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(order_parameter_expectation(&g_minus(), &bad), Err(Error::NonHermitian(_))));
    }

    #[test]
    fn theorem3_partial_overlap() {
        let before = PureState::basis(2, 0);
        let after = PureState::from_real(&[1.0, 1.0]).unwrap();
        let b = theorem3_basis(&before, &after).unwrap();
        assert!(b.matrix().max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);
        assert!((coherence_l1_pure(&after, &b).unwrap() - 1.0).abs() < 1e-12);
        assert!(coherence_l1_pure(&before, &b).unwrap() < 1e-15);
    }

    #[test]
    fn theorem3_orthogonal() {
        let before = PureState::basis(3, 0);
        let after = PureState::basis(3, 1);
        let b = theorem3_basis(&before, &after).unwrap();
        let s = FRAC_1_SQRT_2;
        let e1 = b.vector(1);
        let e2 = b.vector(2);
        assert!((e1[1].re - s).abs() < 1e-15 && (e1[2].re - s).abs() < 1e-15);
        assert!((e2[1].re - s).abs() < 1e-15 && (e2[2].re + s).abs() < 1e-15);
        assert!((coherence_l1_pure(&after, &b).unwrap() - 1.0).abs() < 1e-12);

        let b = theorem3_basis(&g_minus(), &g_plus(PI / 2.0)).unwrap();
        assert!(coherence_l1_pure(&g_minus(), &b).unwrap() < 1e-12);
        assert!((coherence_l1_pure(&g_plus(PI / 2.0), &b).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn theorem3_errors() {
        let a = PureState::basis(2, 0);
        assert!(matches!(theorem3_basis(&a, &a), Err(Error::IdenticalStates)));
        assert!(matches!(theorem3_basis(&a, &PureState::basis(2, 1)), Err(Error::DimensionTooSmall(_))));
    }

    #[test]
    fn parity_fourier_two_spins() {
        let b = parity_fourier_basis(2, &g_minus(), &g_plus(PI / 2.0)).unwrap();
        assert!(coherence_l1_pure(&g_minus(), &b).unwrap() < 1e-12);
        assert!((coherence_l1_pure(&g_plus(PI / 2.0), &b).unwrap() - 1.0).abs() < 1e-12);
        // the Bell-type basis gives the same 0 -> positive step
        let bell = IncoherentBasis::bell_type_2q();
        assert!(coherence_l1_pure(&g_minus(), &bell).unwrap() < 1e-12);
        assert!(coherence_l1_pure(&g_plus(PI / 2.0), &bell).unwrap() > 0.5);
    }

    #[test]
    fn parity_fourier_errors() {
        let mixed_parity = PureState::from_real(&[1.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(parity_fourier_basis(2, &mixed_parity, &g_minus()), Err(Error::NotParityEigenstates(_))));
        assert!(matches!(parity_fourier_basis(2, &g_plus(0.2), &g_plus(1.0)), Err(Error::SameParity)));
    }

    #[test]
    fn theorem1_bound_examples() {
        let fam = radial(PI / 4.0, 0.5, 1.5);
        let measure = MeasureKind::GeometricCoherence { basis: IncoherentBasis::computational(4), kind: DistanceKind::Trace };
        let (lhs, rhs) = verify_theorem1_bound(&measure, &fam, 0.995, 1e-2, DistanceKind::Trace).unwrap();
        assert!(lhs > 0.01 && lhs <= rhs + 1e-10, "{lhs} {rhs}");
        let (lhs, rhs) = verify_theorem1_bound(&measure, &Constant, 0.3, 1e-2, DistanceKind::Trace).unwrap();
        assert_eq!((lhs, rhs), (0.0, 0.0));
        assert!(verify_theorem1_bound(&measure, &fam, 0.7, 1e-2, DistanceKind::HilbertSchmidt).is_err());
    }
}
