//! Spin Hamiltonians, the global parity operator and parameter curves.
//!
//! Basis convention: site 1 is the most significant bit of the computational
//! index, and `Z|0> = +|0>`. So for two spins the basis order is
//! `|00>, |01>, |10>, |11>`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::linalg::ComplexMatrix;

pub const MAX_SITES: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> ComplexMatrix {
        let (o, l, i) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0));
        let data = match self {
            Pauli::X => vec![o, l, l, o],
            Pauli::Y => vec![o, -i, i, o],
            Pauli::Z => vec![l, o, o, -l],
        };
        ComplexMatrix::from_vec(2, 2, data).expect("2x2")
    }
}

/// `coefficient * prod_k sigma^{axis_k}_{site_k}` with 1-based sites.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub ops: Vec<(usize, Pauli)>,
}

impl PauliTerm {
    pub fn new(coefficient: f64, ops: Vec<(usize, Pauli)>) -> Self {
        PauliTerm { coefficient, ops }
    }

    fn validate(&self, n_sites: usize) -> Result<()> {
        let mut seen = vec![false; n_sites + 1];
        for &(site, _) in &self.ops {
            if site == 0 || site > n_sites {
                return Err(Error::InvalidSplit(format!("Pauli site {site} outside 1..={n_sites}")));
            }
            if std::mem::replace(&mut seen[site], true) {
                return Err(Error::InvalidSplit(format!("Pauli site {site} repeated in one term")));
            }
        }
        if !self.coefficient.is_finite() {
            return Err(Error::NonFinite("Pauli coefficient".into()));
        }
        Ok(())
    }

    /// Dense matrix by Kronecker products, site 1 leftmost.
    pub fn kron_matrix(&self, n_sites: usize) -> Result<ComplexMatrix> {
        self.validate(n_sites)?;
        let mut m = ComplexMatrix::identity(1);
        for site in 1..=n_sites {
            let local = match self.ops.iter().find(|(s, _)| *s == site) {
                Some((_, p)) => p.matrix(),
                None => ComplexMatrix::identity(2),
            };
            m = m.kron(&local);
        }
        Ok(m.scale_real(self.coefficient))
    }

    /// Bit-flip mask and the phase a basis state picks up: `P|b> = phase(b) |b ^ flip>`.
    fn action(&self, n_sites: usize) -> (usize, impl Fn(usize) -> Complex64 + '_) {
        let flip = self
            .ops
            .iter()
            .filter(|(_, p)| *p != Pauli::Z)
            .fold(0usize, |m, &(s, _)| m | (1 << (n_sites - s)));
        let phase = move |b: usize| {
            let mut ph = Complex64::new(self.coefficient, 0.0);
            for &(s, p) in &self.ops {
                let bit = (b >> (n_sites - s)) & 1;
                match p {
                    Pauli::X => {}
                    // Y|0> = i|1>, Y|1> = -i|0>
                    Pauli::Y => ph *= if bit == 0 { Complex64::new(0.0, 1.0) } else { Complex64::new(0.0, -1.0) },
                    Pauli::Z => {
                        if bit == 1 {
                            ph = -ph
                        }
                    }
                }
            }
            ph
        };
        (flip, phase)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Boundary {
    Open,
    #[default]
    Periodic,
}

impl Boundary {
    pub fn name(self) -> &'static str {
        match self {
            Boundary::Open => "open",
            Boundary::Periodic => "periodic",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianSpec {
    pub n_sites: usize,
    pub terms: Vec<PauliTerm>,
}

impl HamiltonianSpec {
    pub fn new(n_sites: usize, terms: Vec<PauliTerm>) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::DimensionTooSmall("need at least one site".into()));
        }
        if n_sites > MAX_SITES {
            return Err(Error::DimensionTooLarge(1 << n_sites));
        }
        for t in &terms {
            t.validate(n_sites)?;
        }
        Ok(HamiltonianSpec { n_sites, terms })
    }

    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }

    /// Dense matrix, summing each Pauli string by its action on basis states.
    /// Agrees entrywise with the sum of [`PauliTerm::kron_matrix`].
    pub fn build(&self) -> ComplexMatrix {
        let dim = self.dim();
        let mut h = ComplexMatrix::zeros(dim, dim);
        for term in &self.terms {
            let (flip, phase) = term.action(self.n_sites);
            for b in 0..dim {
                // column b: P|b> lands on row b ^ flip
                h[(b ^ flip, b)] += phase(b);
            }
        }
        h
    }
}

/// Two-spin XY Hamiltonian
/// `-(1+d)/2 X1X2 - (1-d)/2 Y1Y2 - h/2 (Z1 + Z2)`.
pub fn build_xy_two_spin(delta: f64, h: f64) -> ComplexMatrix {
    let terms = vec![
        PauliTerm::new(-(1.0 + delta) / 2.0, vec![(1, Pauli::X), (2, Pauli::X)]),
        PauliTerm::new(-(1.0 - delta) / 2.0, vec![(1, Pauli::Y), (2, Pauli::Y)]),
        PauliTerm::new(-h / 2.0, vec![(1, Pauli::Z)]),
        PauliTerm::new(-h / 2.0, vec![(2, Pauli::Z)]),
    ];
    HamiltonianSpec::new(2, terms).expect("two sites").build()
}

/// Pauli-term form of the N-spin XY chain
/// `-sum_j [(1+d)/4 XjXj+1 + (1-d)/4 YjYj+1 + h/2 Zj]`.
///
/// With periodic boundary the bond `N -> 1` is included; for `N = 2` that
/// doubles the single bond and reproduces [`build_xy_two_spin`].
pub fn xy_chain_spec(n_sites: usize, delta: f64, h: f64, boundary: Boundary) -> Result<HamiltonianSpec> {
    if n_sites > MAX_SITES {
        return Err(Error::DimensionTooLarge(1usize << n_sites.min(63)));
    }
    if n_sites < 2 {
        return Err(Error::DimensionTooSmall(format!("XY chain needs at least 2 sites, got {n_sites}")));
    }
    let bonds = match boundary {
        Boundary::Open => n_sites - 1,
        Boundary::Periodic => n_sites,
    };
    let mut terms = Vec::with_capacity(2 * bonds + n_sites);
    for j in 1..=bonds {
        let k = j % n_sites + 1;
        terms.push(PauliTerm::new(-(1.0 + delta) / 4.0, vec![(j, Pauli::X), (k, Pauli::X)]));
        terms.push(PauliTerm::new(-(1.0 - delta) / 4.0, vec![(j, Pauli::Y), (k, Pauli::Y)]));
    }
    for j in 1..=n_sites {
        terms.push(PauliTerm::new(-h / 2.0, vec![(j, Pauli::Z)]));
    }
    HamiltonianSpec::new(n_sites, terms)
}

pub fn build_xy_chain(n_sites: usize, delta: f64, h: f64, boundary: Boundary) -> Result<ComplexMatrix> {
    Ok(xy_chain_spec(n_sites, delta, h, boundary)?.build())
}

/// Diagonal of `Z (x) Z (x) ... (x) Z`: `+1` for an even number of 1-bits.
pub fn parity_diagonal(n_sites: usize) -> Vec<f64> {
    (0..1usize << n_sites).map(|b| if b.count_ones() % 2 == 0 { 1.0 } else { -1.0 }).collect()
}

pub fn parity_operator(n_sites: usize) -> ComplexMatrix {
    ComplexMatrix::diagonal(&parity_diagonal(n_sites))
}

/// `sum_j Z_j`, the total magnetization along z.
pub fn total_magnetization(n_sites: usize) -> ComplexMatrix {
    let diag: Vec<f64> = (0..1usize << n_sites).map(|b| n_sites as f64 - 2.0 * b.count_ones() as f64).collect();
    ComplexMatrix::diagonal(&diag)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Temperature {
    Zero,
    /// Inverse temperature `beta >= 0`.
    Beta(f64),
}

/// A point `(delta, h, beta)` on a parameter curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub delta: f64,
    pub h: f64,
    pub temperature: Temperature,
}

impl CurvePoint {
    pub fn beta_value(&self) -> f64 {
        match self.temperature {
            Temperature::Zero => f64::INFINITY,
            Temperature::Beta(b) => b,
        }
    }
}

/// `lambda -> (delta, h, beta)`; `beta = None` means zero temperature.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveSpec {
    pub delta: Expr,
    pub h: Expr,
    pub beta: Option<Expr>,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

/// Keyword that selects ground-state evaluation in place of a `beta` expression.
pub const ZERO_TEMPERATURE: &str = "zero-temperature";

impl CurveSpec {
    pub fn parse(delta: &str, h: &str, beta: &str, lambda_min: f64, lambda_max: f64) -> Result<Self> {
        if !(lambda_min.is_finite() && lambda_max.is_finite() && lambda_min <= lambda_max) {
            return Err(Error::Config(format!("invalid lambda range [{lambda_min}, {lambda_max}]")));
        }
        let beta = match beta.trim() {
            ZERO_TEMPERATURE => None,
            text => Some(Expr::parse(text)?),
        };
        Ok(CurveSpec { delta: Expr::parse(delta)?, h: Expr::parse(h)?, beta, lambda_min, lambda_max })
    }

    /// Straight ray `delta = lambda sin(theta)`, `h = lambda cos(theta)`, so `r = lambda`.
    pub fn radial(theta: f64, lambda_min: f64, lambda_max: f64) -> Self {
        CurveSpec {
            delta: Expr::Bin(crate::expr::BinOp::Mul, Box::new(Expr::Lambda), Box::new(Expr::Num(theta.sin()))),
            h: Expr::Bin(crate::expr::BinOp::Mul, Box::new(Expr::Lambda), Box::new(Expr::Num(theta.cos()))),
            beta: None,
            lambda_min,
            lambda_max,
        }
    }

    pub fn with_beta(mut self, beta: Option<Expr>) -> Self {
        self.beta = beta;
        self
    }

    pub fn contains(&self, lambda: f64) -> bool {
        lambda >= self.lambda_min && lambda <= self.lambda_max
    }

    pub fn evaluate(&self, lambda: f64) -> Result<CurvePoint> {
        evaluate_curve(self, lambda)
    }

    /// Same curve without the range restriction, for probes that step past the grid ends.
    pub fn evaluate_unchecked(&self, lambda: f64) -> Result<CurvePoint> {
        let delta = self.delta.eval(lambda)?;
        let h = self.h.eval(lambda)?;
        let temperature = match &self.beta {
            None => Temperature::Zero,
            Some(e) => {
                let b = e.eval(lambda)?;
                if b < 0.0 {
                    return Err(Error::Config(format!("beta = {b} is negative at lambda = {lambda}")));
                }
                Temperature::Beta(b)
            }
        };
        Ok(CurvePoint { delta, h, temperature })
    }
}

pub fn evaluate_curve(curve: &CurveSpec, lambda: f64) -> Result<CurvePoint> {
    if !curve.contains(lambda) {
        return Err(Error::OutOfRange { value: lambda, min: curve.lambda_min, max: curve.lambda_max });
    }
    curve.evaluate_unchecked(lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eig;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bit_action_matches_kronecker_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let axes = [Pauli::X, Pauli::Y, Pauli::Z];
        for _ in 0..30 {
            let n = rng.gen_range(1..=4);
            let mut sites: Vec<usize> = (1..=n).collect();
            sites.retain(|_| rng.gen_bool(0.6));
            let ops: Vec<_> = sites.iter().map(|&s| (s, axes[rng.gen_range(0..3)])).collect();
            let term = PauliTerm::new(rng.gen_range(-2.0..2.0), ops);
            let spec = HamiltonianSpec::new(n, vec![term.clone()]).unwrap();
            assert!(spec.build().max_abs_diff(&term.kron_matrix(n).unwrap()) < 1e-15);
        }
    }

    #[test]
    fn two_spin_closed_form_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let (d, h) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let m = build_xy_two_spin(d, h);
            assert!(m.hermitian_defect() <= 1e-14);
            let r = f64::hypot(d, h);
            let mut expected = [-1.0, -r, r, 1.0];
            expected.sort_by(f64::total_cmp);
            let eig = hermitian_eig(&m).unwrap();
            for (a, b) in eig.eigenvalues.iter().zip(expected) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn two_spin_degenerate_circle() {
        let eig = hermitian_eig(&build_xy_two_spin(0.6, 0.8)).unwrap();
        let expected = [-1.0, -1.0, 1.0, 1.0];
        assert!(eig.eigenvalues.iter().zip(expected).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn periodic_two_site_chain_is_two_spin_form() {
        let a = build_xy_chain(2, 0.3, 0.7, Boundary::Periodic).unwrap();
        assert!(a.max_abs_diff(&build_xy_two_spin(0.3, 0.7)) < 1e-15);
    }

    #[test]
    fn open_two_site_chain_matches_after_rescaling() {
        // open chain: couplings (1±d)/4, field h/2; doubling the couplings gives the two-spin form
        let (d, h) = (0.4, 0.9);
        let open = build_xy_chain(2, d, h, Boundary::Open).unwrap();
        let field = ComplexMatrix::diagonal(&[-h, 0.0, 0.0, h]);
        let doubled = &(&open - &field).scale_real(2.0) + &field;
        let a = hermitian_eig(&doubled).unwrap().eigenvalues;
        let b = hermitian_eig(&build_xy_two_spin(d, h)).unwrap().eigenvalues;
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-12));
    }

    #[test]
    fn chain_commutes_with_parity() {
        for n in [2, 3, 4, 5, 6] {
            for boundary in [Boundary::Open, Boundary::Periodic] {
                let h = build_xy_chain(n, 0.37, -0.52, boundary).unwrap();
                assert!(h.hermitian_defect() <= 1e-14);
                let p = parity_operator(n);
                assert!(h.matmul(&p).max_abs_diff(&p.matmul(&h)) <= 1e-12);
            }
        }
    }

    #[test]
    fn chain_size_limits() {
        assert!(matches!(build_xy_chain(13, 0.0, 0.0, Boundary::Open), Err(Error::DimensionTooLarge(_))));
        assert!(build_xy_chain(1, 0.0, 0.0, Boundary::Open).is_err());
    }

    #[test]
    fn parity_examples() {
        assert_eq!(parity_operator(1), Pauli::Z.matrix());
        assert_eq!(parity_diagonal(2), vec![1.0, -1.0, -1.0, 1.0]);
        assert_eq!(total_magnetization(2).diag_real(), vec![2.0, 0.0, 0.0, -2.0]);
    }

    #[test]
    fn curve_evaluation() {
        let c = CurveSpec::parse("0.5+0.5*lambda", "0", ZERO_TEMPERATURE, 0.0, 2.0).unwrap();
        let p = c.evaluate(1.0).unwrap();
        assert_eq!(p.delta, 1.0);
        assert_eq!(p.temperature, Temperature::Zero);
        assert!(matches!(c.evaluate(2.5), Err(Error::OutOfRange { .. })));

        let radial = CurveSpec::parse("lambda*sin(pi/3)", "lambda*cos(pi/3)", "50", 0.0, 2.0).unwrap();
        let p = radial.evaluate(1.0).unwrap();
        assert!((f64::hypot(p.delta, p.h) - 1.0).abs() < 1e-15);
        assert_eq!(p.temperature, Temperature::Beta(50.0));

        let bad = CurveSpec::parse("1/lambda", "0", ZERO_TEMPERATURE, 0.0, 1.0).unwrap();
        assert!(matches!(bad.evaluate(0.0), Err(Error::Expression(_))));
        let neg = CurveSpec::parse("0", "0", "-1", 0.0, 1.0).unwrap();
        assert!(neg.evaluate(0.5).is_err());
    }
}
