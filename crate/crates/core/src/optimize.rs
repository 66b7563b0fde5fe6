//! Small convex and derivative-free minimizers.
//!
//! [`minimize_diagonal_distance`] finds the diagonal density matrix nearest
//! to a given matrix. It runs a central-cut ellipsoid method over the
//! probability simplex and keeps two lower bounds on the optimum: the
//! ellipsoid bound `f(x) - sqrt(g' P g)` and a dual bound from the
//! subgradient matrix `W`, `Re<W, M> - max_i W_ii`. The reported residual is
//! the gap between the best value found and the best lower bound, so a small
//! residual certifies the result.

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, ComplexMatrix};
use crate::measures::DistanceKind;

#[derive(Clone, Debug)]
pub struct MinimizerOptions {
    /// Evaluate the dephased state first; its dual bound often closes the gap at once.
    pub warm_start: bool,
    pub max_iterations: usize,
    /// Stop once the certified gap is below this.
    pub target_gap: f64,
    /// Report non-convergence if the final gap exceeds this.
    pub tolerance: f64,
}

impl Default for MinimizerOptions {
    fn default() -> Self {
        MinimizerOptions { warm_start: true, max_iterations: 100_000, target_gap: 1e-13, tolerance: 1e-8 }
    }
}

#[derive(Clone, Debug)]
pub struct SimplexMinimum {
    pub value: f64,
    /// Diagonal of the nearest incoherent state.
    pub weights: Vec<f64>,
    /// Certified optimality gap.
    pub residual: f64,
    pub iterations: usize,
}

struct Probe {
    value: f64,
    gradient: Vec<f64>,
    dual_bound: f64,
}

fn probe(m: &ComplexMatrix, p: &[f64], kind: DistanceKind) -> Result<Probe> {
    let d = p.len();
    let mut a = m.clone();
    for (i, &pi) in p.iter().enumerate() {
        a[(i, i)] -= pi;
    }
    // W is a dual-feasible subgradient matrix; only its diagonal and <W, M> are needed
    let (value, w_diag, w_dot_m) = match kind {
        DistanceKind::Trace => {
            let eig = hermitian_eig(&a)?;
            let value = 0.5 * eig.eigenvalues.iter().map(|x| x.abs()).sum::<f64>();
            let w = eig.reconstruct_with(|x| 0.5 * sign(x));
            let w_dot_m: f64 = w.entries().iter().zip(m.entries()).map(|(x, y)| (x.conj() * y).re).sum();
            (value, w.diag_real(), w_dot_m)
        }
        DistanceKind::L1Entrywise => {
            let value: f64 = a.entries().iter().map(|z| z.norm()).sum();
            let mut w_dot_m = 0.0;
            let mut w_diag = vec![0.0; d];
            for r in 0..d {
                for c in 0..d {
                    let z = a[(r, c)];
                    let n = z.norm();
                    if n > 1e-300 {
                        let w = z / n;
                        w_dot_m += (w.conj() * m[(r, c)]).re;
                        if r == c {
                            w_diag[r] = w.re;
                        }
                    }
                }
            }
            (value, w_diag, w_dot_m)
        }
        DistanceKind::HilbertSchmidt => {
            let value = a.frobenius_norm();
            if value == 0.0 {
                (0.0, vec![0.0; d], 0.0)
            } else {
                let w_dot_m: f64 = a.entries().iter().zip(m.entries()).map(|(x, y)| (x.conj() * y).re).sum::<f64>() / value;
                (value, a.diag_real().iter().map(|x| x / value).collect(), w_dot_m)
            }
        }
    };
    let max_w = w_diag.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(Probe { value, gradient: w_diag.iter().map(|w| -w).collect(), dual_bound: w_dot_m - max_w })
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

struct Incumbent {
    value: f64,
    weights: Vec<f64>,
    lower: f64,
}

impl Incumbent {
    fn offer(&mut self, p: &[f64], pr: &Probe) {
        if pr.value < self.value {
            self.value = pr.value;
            self.weights = p.to_vec();
        }
        self.lower = self.lower.max(pr.dual_bound);
    }

    fn gap(&self) -> f64 {
        (self.value - self.lower).max(0.0)
    }
}

/// Minimizes `D(M, diag(p))` over probability vectors `p`, where `M` is
/// already expressed in the incoherent basis.
pub fn minimize_diagonal_distance(
    m: &ComplexMatrix,
    kind: DistanceKind,
    options: &MinimizerOptions,
) -> Result<SimplexMinimum> {
    m.ensure_hermitian()?;
    let d = m.rows();
    let mut best = Incumbent { value: f64::INFINITY, weights: vec![1.0; d.min(1)], lower: f64::NEG_INFINITY };
    if d == 1 {
        let p = [1.0];
        let pr = probe(m, &p, kind)?;
        return Ok(SimplexMinimum { value: pr.value, weights: p.to_vec(), residual: 0.0, iterations: 0 });
    }
    if options.warm_start {
        let mut p: Vec<f64> = m.diag_real().iter().map(|x| x.max(0.0)).collect();
        let s: f64 = p.iter().sum();
        if s > 0.0 {
            p.iter_mut().for_each(|x| *x /= s);
            let pr = probe(m, &p, kind)?;
            best.offer(&p, &pr);
        }
    }
    let mut iterations = 0;
    if best.gap() > options.target_gap {
        iterations = if d == 2 {
            bisect(m, kind, options, &mut best)?
        } else {
            ellipsoid(m, kind, options, &mut best)?
        };
    }
    let residual = best.gap();
    if residual > options.tolerance {
        return Err(Error::OptimizerDidNotConverge { residual, iterations });
    }
    Ok(SimplexMinimum { value: best.value, weights: best.weights, residual, iterations })
}

fn bisect(m: &ComplexMatrix, kind: DistanceKind, options: &MinimizerOptions, best: &mut Incumbent) -> Result<usize> {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut k = 0;
    while k < options.max_iterations {
        k += 1;
        let x = 0.5 * (lo + hi);
        let p = [x, 1.0 - x];
        let pr = probe(m, &p, kind)?;
        best.offer(&p, &pr);
        let g = pr.gradient[0] - pr.gradient[1];
        best.lower = best.lower.max(pr.value - g.abs() * 0.5 * (hi - lo));
        if best.gap() <= options.target_gap || g == 0.0 || hi - lo < 1e-16 {
            break;
        }
        if g > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
    }
    Ok(k)
}

fn ellipsoid(m: &ComplexMatrix, kind: DistanceKind, options: &MinimizerOptions, best: &mut Incumbent) -> Result<usize> {
    let d = m.rows();
    let n = d - 1;
    let nf = n as f64;
    // reduced coordinates x = (p_0 .. p_{d-2}); a unit ball around the barycenter holds the simplex
    let mut x = vec![1.0 / d as f64; n];
    let mut shape = vec![0.0; n * n];
    for i in 0..n {
        shape[i * n + i] = 1.0;
    }
    let mut pg = vec![0.0; n];
    let mut k = 0;
    while k < options.max_iterations {
        k += 1;
        let sum: f64 = x.iter().sum();
        let (worst_i, worst_x) =
            x.iter().enumerate().fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
        let cut: Vec<f64> = if worst_x < 0.0 && -worst_x >= sum - 1.0 {
            let mut a = vec![0.0; n];
            a[worst_i] = -1.0;
            a
        } else if sum > 1.0 {
            vec![1.0; n]
        } else {
            let mut p = x.clone();
            p.push((1.0 - sum).max(0.0));
            let pr = probe(m, &p, kind)?;
            best.offer(&p, &pr);
            let g: Vec<f64> = (0..n).map(|i| pr.gradient[i] - pr.gradient[n]).collect();
            let gpg = quad(&shape, &g, &mut pg);
            if gpg <= 0.0 {
                best.lower = best.lower.max(pr.value);
                break;
            }
            best.lower = best.lower.max(pr.value - gpg.sqrt());
            if best.gap() <= options.target_gap {
                break;
            }
            g
        };
        let gpg = quad(&shape, &cut, &mut pg);
        if !(gpg > 1e-300) {
            break;
        }
        let root = gpg.sqrt();
        for i in 0..n {
            x[i] -= pg[i] / (root * (nf + 1.0));
        }
        let scale = nf * nf / (nf * nf - 1.0);
        let shrink = 2.0 / (nf + 1.0) / gpg;
        for i in 0..n {
            for j in i..n {
                let v = scale * (shape[i * n + j] - shrink * pg[i] * pg[j]);
                shape[i * n + j] = v;
                shape[j * n + i] = v;
            }
        }
    }
    Ok(k)
}

/// `g' P g`, leaving `P g` in `out`.
fn quad(shape: &[f64], g: &[f64], out: &mut [f64]) -> f64 {
    let n = g.len();
    for i in 0..n {
        out[i] = (0..n).map(|j| shape[i * n + j] * g[j]).sum();
    }
    g.iter().zip(out.iter()).map(|(a, b)| a * b).sum()
}

#[derive(Clone, Debug)]
pub struct NelderMeadResult {
    pub point: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

/// Standard Nelder–Mead with reflection 1, expansion 2, contraction ½ and shrink ½.
pub fn nelder_mead(
    f: impl Fn(&[f64]) -> f64,
    start: &[f64],
    step: f64,
    f_tol: f64,
    max_iterations: usize,
) -> NelderMeadResult {
    let n = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((start.to_vec(), f(start)));
    for i in 0..n {
        let mut v = start.to_vec();
        v[i] += step;
        let fv = f(&v);
        simplex.push((v, fv));
    }
    let mut it = 0;
    while it < max_iterations {
        it += 1;
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (f_best, f_worst) = (simplex[0].1, simplex[n].1);
        if (f_worst - f_best).abs() <= f_tol {
            break;
        }
        let centroid: Vec<f64> = (0..n).map(|j| simplex[..n].iter().map(|(v, _)| v[j]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> { (0..n).map(|j| centroid[j] + t * (simplex[n].0[j] - centroid[j])).collect() };
        let reflected = along(-1.0);
        let f_r = f(&reflected);
        if f_r < f_best {
            let expanded = along(-2.0);
            let f_e = f(&expanded);
            simplex[n] = if f_e < f_r { (expanded, f_e) } else { (reflected, f_r) };
        } else if f_r < simplex[n - 1].1 {
            simplex[n] = (reflected, f_r);
        } else {
            let (contracted, f_c) = if f_r < f_worst {
                let c = along(-0.5);
                let fc = f(&c);
                (c, fc)
            } else {
                let c = along(0.5);
                let fc = f(&c);
                (c, fc)
            };
            if f_c < f_worst.min(f_r) {
                simplex[n] = (contracted, f_c);
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let v: Vec<f64> = (0..n).map(|j| best[j] + 0.5 * (entry.0[j] - best[j])).collect();
                    let fv = f(&v);
                    *entry = (v, fv);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (point, value) = simplex.swap_remove(0);
    NelderMeadResult { point, value, iterations: it }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn nelder_mead_rosenbrock() {
        let r = nelder_mead(|x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2), &[-1.2, 1.0], 0.1, 1e-20, 10_000);
        assert!((r.point[0] - 1.0).abs() < 1e-5 && (r.point[1] - 1.0).abs() < 1e-5, "{r:?}");
    }

    #[test]
    fn dual_certificate_closes_at_dephased_state() {
        // HS and l1: the dephased state is optimal and the dual bound proves it immediately
        let m = ComplexMatrix::from_vec(
            3,
            3,
            vec![
                Complex64::new(0.5, 0.0), Complex64::new(0.1, 0.2), Complex64::new(0.0, -0.1),
                Complex64::new(0.1, -0.2), Complex64::new(0.3, 0.0), Complex64::new(0.05, 0.0),
                Complex64::new(0.0, 0.1), Complex64::new(0.05, 0.0), Complex64::new(0.2, 0.0),
            ],
        )
        .unwrap();
        for kind in [DistanceKind::HilbertSchmidt, DistanceKind::L1Entrywise] {
            let r = minimize_diagonal_distance(&m, kind, &MinimizerOptions::default()).unwrap();
            assert_eq!(r.iterations, 0, "{kind}");
            assert!(r.residual < 1e-14);
        }
    }

    #[test]
    fn cold_start_converges() {
        let m = ComplexMatrix::from_real(3, 3, &[0.4, 0.2, 0.1, 0.2, 0.35, -0.15, 0.1, -0.15, 0.25]).unwrap();
        let opts = MinimizerOptions { warm_start: false, ..Default::default() };
        for kind in DistanceKind::ALL {
            let r = minimize_diagonal_distance(&m, kind, &opts).unwrap();
            assert!(r.residual <= 1e-8, "{kind}: {r:?}");
            assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(r.weights.iter().all(|&w| w >= -1e-12));
        }
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let m = ComplexMatrix::from_real(3, 3, &[0.4, 0.2, 0.1, 0.2, 0.35, -0.15, 0.1, -0.15, 0.25]).unwrap();
        let opts = MinimizerOptions { warm_start: false, max_iterations: 5, ..Default::default() };
        assert!(matches!(
            minimize_diagonal_distance(&m, DistanceKind::Trace, &opts),
            Err(Error::OptimizerDidNotConverge { .. })
        ));
    }
}
