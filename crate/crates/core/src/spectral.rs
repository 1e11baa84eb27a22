//! Dominant-eigenvalue machinery for Metzler matrices, the convexity-based
//! exponent solver, and resolvent residues at the dominant pole.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::process::LaplaceExponent;

/// Absolute slack allowed on off-diagonal entries in the Metzler check.
pub const METZLER_TOL: f64 = 1e-12;
/// Residual tolerance for the exponent equation, relative to max(1, target).
pub const ROOT_TOL: f64 = 1e-10;
/// Default search cap for the tail exponent.
pub const DEFAULT_ALPHA_MAX: f64 = 50.0;

const IMAG_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Error)]
pub enum SpectralError {
    #[error("entry ({row},{col}) = {value:.3e} makes the matrix non-Metzler")]
    NotMetzler { row: usize, col: usize, value: f64 },
    #[error("matrix is not irreducible")]
    NotIrreducible,
    #[error("max-real-part eigenvalue has imaginary part {imag:.3e}; eigensolve failed")]
    NonRealDominant { imag: f64 },
    #[error("dominant eigenvector iteration failed to converge")]
    EigenvectorFailure,
    #[error("target {0:.3e} must be positive")]
    DegenerateTarget(f64),
    #[error("dominant eigenvalue at 0 is {0:.3e}, not 0; generator law violated")]
    ZeroLawViolated(f64),
    #[error("no exponent in (0, {alpha_max}]: r_D(A(-alpha_max)) = {at_max:.6e} < {target:.6e}")]
    NoSolution {
        alpha_max: f64,
        at_max: f64,
        target: f64,
    },
    #[error("bisection stalled; residual {residual:.3e} at alpha = {alpha:.12e}")]
    BisectionStalled { alpha: f64, residual: f64 },
    #[error("r_D(A(-alpha)) = {actual:.6e} does not match eta = {expected:.6e}")]
    EigenvalueMismatch { expected: f64, actual: f64 },
    #[error("residue factor xi = {0:.3e} is not positive; model rejected")]
    NonPositiveXi(f64),
}

/// Dominant real eigenvalue with strictly positive left/right eigenvectors,
/// normalized so the first right entry is positive and left·right = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PerronData {
    pub value: f64,
    pub right: DVector<f64>,
    pub left: DVector<f64>,
}

/// Rank-one residue of (eta·I − A(s))⁻¹ at its dominant pole s = −alpha.
#[derive(Debug, Clone)]
pub struct ResidueData {
    pub alpha: f64,
    pub xi: f64,
    pub matrix: DMatrix<f64>,
    pub perron: PerronData,
}

/// Max real part over the spectrum.
pub fn spectral_abscissa(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Spectral abscissa of a complex matrix, computed on the 2N x 2N real
/// embedding [[X, −Y], [Y, X]] whose spectrum carries the same real parts.
pub fn complex_spectral_abscissa(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut e = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for j in 0..n {
        for k in 0..n {
            let z = m[(j, k)];
            e[(j, k)] = z.re;
            e[(j, k + n)] = -z.im;
            e[(j + n, k)] = z.im;
            e[(j + n, k + n)] = z.re;
        }
    }
    spectral_abscissa(&e)
}

fn check_metzler(m: &DMatrix<f64>) -> Result<(), SpectralError> {
    let n = m.nrows();
    for j in 0..n {
        for k in 0..n {
            if j != k && m[(j, k)] < -METZLER_TOL {
                return Err(SpectralError::NotMetzler {
                    row: j,
                    col: k,
                    value: m[(j, k)],
                });
            }
        }
    }
    Ok(())
}

fn check_irreducible(m: &DMatrix<f64>) -> Result<(), SpectralError> {
    let n = m.nrows();
    if n <= 1 {
        return Ok(());
    }
    let reach = |transpose: bool| -> bool {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(j) = stack.pop() {
            for k in 0..n {
                let w = if transpose { m[(k, j)] } else { m[(j, k)] };
                if j != k && w > 0.0 && !seen[k] {
                    seen[k] = true;
                    stack.push(k);
                }
            }
        }
        seen.iter().all(|&s| s)
    };
    if reach(false) && reach(true) {
        Ok(())
    } else {
        Err(SpectralError::NotIrreducible)
    }
}

/// One eigenvector of (m − shift·I) by inverse iteration, normalized to unit
/// length with a positive leading entry.
fn inverse_iteration(m: &DMatrix<f64>, shift: f64, scale: f64) -> Option<DVector<f64>> {
    let n = m.nrows();
    let base = DMatrix::identity(n, n) * shift;
    let mut perturbation = 0.0;
    'attempt: for attempt in 0..6 {
        let lu = (m - &base - DMatrix::identity(n, n) * perturbation).lu();
        let mut v = DVector::from_element(n, 1.0 / (n as f64).sqrt());
        for _ in 0..8 {
            let next = match lu.solve(&v) {
                Some(x) => x,
                None => {
                    perturbation = scale * 1e-14 * 4f64.powi(attempt + 1);
                    continue 'attempt;
                }
            };
            let norm = next.norm();
            if !norm.is_finite() || norm == 0.0 {
                perturbation = scale * 1e-14 * 4f64.powi(attempt + 1);
                continue 'attempt;
            }
            v = next / norm;
            let residual = (m * &v - &v * shift).amax();
            if residual <= scale * 1e-13 {
                break;
            }
        }
        if (m * &v - &v * shift).amax() > scale * 1e-9 {
            perturbation = scale * 1e-14 * 4f64.powi(attempt + 1);
            continue 'attempt;
        }
        if v[0] < 0.0 {
            v = -v;
        }
        return Some(v);
    }
    None
}

/// Perron data of an irreducible Metzler matrix.
pub fn dominant_eigen(m: &DMatrix<f64>) -> Result<PerronData, SpectralError> {
    assert_eq!(m.nrows(), m.ncols(), "matrix must be square");
    check_metzler(m)?;
    check_irreducible(m)?;

    let scale = m.amax().max(1.0);
    let eigs = m.complex_eigenvalues();
    let top = eigs
        .iter()
        .cloned()
        .fold(Complex64::new(f64::NEG_INFINITY, 0.0), |best, z| {
            if z.re > best.re {
                z
            } else {
                best
            }
        });
    if top.im.abs() > IMAG_TOL * scale {
        return Err(SpectralError::NonRealDominant { imag: top.im });
    }
    let value = top.re;

    let right = inverse_iteration(m, value, scale).ok_or(SpectralError::EigenvectorFailure)?;
    let left_raw =
        inverse_iteration(&m.transpose(), value, scale).ok_or(SpectralError::EigenvectorFailure)?;

    if right.iter().any(|&x| x <= 0.0) || left_raw.iter().any(|&x| x <= 0.0) {
        return Err(SpectralError::EigenvectorFailure);
    }
    let inner = left_raw.dot(&right);
    if inner <= 0.0 {
        return Err(SpectralError::EigenvectorFailure);
    }
    Ok(PerronData {
        value,
        right,
        left: left_raw / inner,
    })
}

/// r_D(A(alpha)) with matrix overflow read as +infinity; the exponent family
/// diverges entrywise to +infinity, never to −infinity.
fn eigen_or_inf(af: &impl LaplaceExponent, alpha: f64) -> Result<f64, SpectralError> {
    let m = af.eval(alpha);
    if m.iter().any(|x| !x.is_finite()) {
        return Ok(f64::INFINITY);
    }
    Ok(dominant_eigen(&m)?.value)
}

/// Newton refinement using the eigenvalue derivative y'A'(a)x; the bisection
/// residual alone leaves too much root error for resolvent probes at
/// distances near 1e−7 from the pole.
fn polish_root(af: &impl LaplaceExponent, target: f64, mut alpha: f64) -> f64 {
    for _ in 0..3 {
        let m = af.eval(alpha);
        if m.iter().any(|x| !x.is_finite()) {
            break;
        }
        let pd = match dominant_eigen(&m) {
            Ok(p) => p,
            Err(_) => break,
        };
        let slope = pd.left.dot(&(af.deriv(alpha) * &pd.right));
        if !slope.is_finite() || slope <= 0.0 {
            break;
        }
        let step = (pd.value - target) / slope;
        let next = alpha - step;
        if !next.is_finite() || next <= 0.0 {
            break;
        }
        alpha = next;
        if step.abs() <= 1e-15 * alpha.max(1.0) {
            break;
        }
    }
    alpha
}

/// Solve r_D(A(alpha)) = target for the unique positive root, by bracket
/// doubling from 1e−3 followed by bisection; convexity of the map together
/// with its zero at the origin makes the root unique. The root is the
/// abscissa at which the moment generating function of the analyzed process
/// stops being finite, so it is the tail exponent of e^{X_T}; feed the
/// reflected exponent to obtain the lower-tail root instead.
pub fn solve_alpha(
    af: &impl LaplaceExponent,
    target: f64,
    alpha_max: f64,
) -> Result<f64, SpectralError> {
    assert!(alpha_max > 0.0, "alpha_max must be positive");
    if target <= 0.0 {
        return Err(SpectralError::DegenerateTarget(target));
    }
    let at_zero = dominant_eigen(&af.eval(0.0))?.value;
    if at_zero.abs() > 1e-9 {
        return Err(SpectralError::ZeroLawViolated(at_zero));
    }

    let tol = ROOT_TOL * target.max(1.0);
    let mut lo = 0.0;
    let mut hi = 1e-3f64.min(alpha_max);
    loop {
        let g_hi = eigen_or_inf(af, hi)?;
        if (g_hi - target).abs() <= tol {
            return Ok(polish_root(af, target, hi));
        }
        if g_hi > target {
            break;
        }
        if hi >= alpha_max {
            return Err(SpectralError::NoSolution {
                alpha_max,
                at_max: g_hi,
                target,
            });
        }
        lo = hi;
        hi = (hi * 2.0).min(alpha_max);
    }

    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let g_mid = eigen_or_inf(af, mid)?;
        if (g_mid - target).abs() <= tol {
            return Ok(polish_root(af, target, mid));
        }
        if g_mid < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let alpha = 0.5 * (lo + hi);
    let residual = (eigen_or_inf(af, alpha)? - target).abs();
    if residual <= 1e-8 * target.max(1.0) {
        Ok(polish_root(af, target, alpha))
    } else {
        Err(SpectralError::BisectionStalled { alpha, residual })
    }
}

/// Residue data of (eta·I − A(s))⁻¹ at its pole s = alpha, where
/// eta = r_D(A(alpha)): the limit of (alpha − s)(eta·I − A(s))⁻¹ is
/// xi·x·y' with xi = (y'A'(alpha)x)⁻¹, positive because the dominant
/// eigenvalue is increasing at the boundary.
pub fn resolvent_residue(
    af: &impl LaplaceExponent,
    alpha: f64,
    eta: f64,
) -> Result<ResidueData, SpectralError> {
    let perron = dominant_eigen(&af.eval(alpha))?;
    if (perron.value - eta).abs() > 1e-8 * eta.abs().max(1.0) {
        return Err(SpectralError::EigenvalueMismatch {
            expected: eta,
            actual: perron.value,
        });
    }
    let slope = perron.left.dot(&(af.deriv(alpha) * &perron.right));
    if slope <= 0.0 {
        return Err(SpectralError::NonPositiveXi(1.0 / slope));
    }
    let xi = 1.0 / slope;
    let matrix = &perron.right * perron.left.transpose() * xi;
    Ok(ResidueData {
        alpha,
        xi,
        matrix,
        perron,
    })
}

/// Off-axis abscissa scan behind the Paretian-limit diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub struct UniquenessScan {
    pub passed: bool,
    pub betas: Vec<f64>,
    pub on_axis: f64,
    pub max_off_axis: f64,
}

/// True when every scanned off-axis point alpha + iβ has spectral abscissa
/// strictly below the on-axis value, so the boundary pole is the unique
/// singularity on its axis; a diagnostic, not a proof.
pub fn uniqueness_scan_detailed(
    af: &impl LaplaceExponent,
    alpha: f64,
    beta_grid: &[f64],
) -> UniquenessScan {
    let on_axis = complex_spectral_abscissa(&af.eval_complex(Complex64::new(alpha, 0.0)));
    let mut max_off_axis = f64::NEG_INFINITY;
    let mut betas = Vec::new();
    for &beta in beta_grid {
        if beta == 0.0 {
            continue;
        }
        betas.push(beta);
        let t = complex_spectral_abscissa(&af.eval_complex(Complex64::new(alpha, beta)));
        max_off_axis = max_off_axis.max(t);
    }
    let passed = !betas.is_empty() && max_off_axis < on_axis - 1e-10;
    UniquenessScan {
        passed,
        betas,
        on_axis,
        max_off_axis,
    }
}

pub fn uniqueness_scan(af: &impl LaplaceExponent, alpha: f64, beta_grid: &[f64]) -> bool {
    uniqueness_scan_detailed(af, alpha, beta_grid).passed
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;
    use crate::process::{JumpLaw, ModulatedModel, RegimeExponent};
    use approx::assert_relative_eq;

    fn symmetric_switcher() -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 1.0, -1.0])
    }

    #[test]
    fn generator_has_zero_dominant_eigenvalue() {
        let pd = dominant_eigen(&symmetric_switcher()).unwrap();
        assert_relative_eq!(pd.value, 0.0, epsilon = 1e-10);
        assert_relative_eq!(pd.right[0], pd.right[1], epsilon = 1e-12);
        assert_relative_eq!(pd.left[0], pd.left[1], epsilon = 1e-12);
        assert_relative_eq!(pd.left.dot(&pd.right), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn left_vector_of_generator_is_stationary() {
        // two-state chain with unequal rates: stationary = (b, a)/(a+b)
        let g = DMatrix::from_row_slice(2, 2, &[-2.0, 2.0, 0.5, -0.5]);
        let pd = dominant_eigen(&g).unwrap();
        assert_relative_eq!(pd.value, 0.0, epsilon = 1e-10);
        let ratio = pd.left[0] / pd.left[1];
        assert_relative_eq!(ratio, 0.5 / 2.0, epsilon = 1e-10);
    }

    #[test]
    fn symmetric_positive_matrix() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let pd = dominant_eigen(&m).unwrap();
        assert_relative_eq!(pd.value, 3.0, epsilon = 1e-12);
        assert_relative_eq!(pd.right[0], pd.right[1], epsilon = 1e-12);
    }

    #[test]
    fn periodic_nonnegative_matrix() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 3.0, 0.0]);
        let pd = dominant_eigen(&m).unwrap();
        assert_relative_eq!(pd.value, 6f64.sqrt(), epsilon = 1e-12);
        // right eigenvector proportional to (2, sqrt 6)
        assert_relative_eq!(
            pd.right[1] / pd.right[0],
            6f64.sqrt() / 2.0,
            epsilon = 1e-10
        );
        // left proportional to (3, sqrt 6)
        assert_relative_eq!(pd.left[1] / pd.left[0], 6f64.sqrt() / 3.0, epsilon = 1e-10);
    }

    #[test]
    fn rejects_non_metzler_and_reducible() {
        let neg = DMatrix::from_row_slice(2, 2, &[1.0, -0.5, 1.0, 1.0]);
        assert!(matches!(
            dominant_eigen(&neg),
            Err(SpectralError::NotMetzler { row: 0, col: 1, .. })
        ));
        let red = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 1.0]);
        assert!(matches!(
            dominant_eigen(&red),
            Err(SpectralError::NotIrreducible)
        ));
    }

    #[test]
    fn scalar_brownian_alpha() {
        let model = models::scalar_brownian(0.0, 1.0);
        let alpha = solve_alpha(&model, 0.5, DEFAULT_ALPHA_MAX).unwrap();
        assert_relative_eq!(alpha, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn brownian_alpha_matches_quadratic_formula() {
        let (mu, var, c) = (-0.2, 1.0, 0.3);
        let model = models::scalar_brownian(mu, var);
        let alpha = solve_alpha(&model, c, DEFAULT_ALPHA_MAX).unwrap();
        let closed = (-mu + (mu * mu + 2.0 * var * c).sqrt()) / var;
        assert_relative_eq!(alpha, closed, epsilon = 1e-8);
    }

    #[test]
    fn two_regime_alpha_matches_grid_inversion() {
        let model = models::two_regime();
        let target = 0.5;
        let alpha = solve_alpha(&model, target, DEFAULT_ALPHA_MAX).unwrap();

        // oracle: tabulate r_D(A(a)) on a dense grid, invert by linear
        // interpolation between the bracketing nodes
        let grid = 100_000usize;
        let hi = 3.0;
        let mut prev = (0.0, dominant_eigen(&model.eval(0.0)).unwrap().value);
        let mut oracle = None;
        for i in 1..=grid {
            let a = hi * i as f64 / grid as f64;
            let g = dominant_eigen(&model.eval(a)).unwrap().value;
            if prev.1 < target && g >= target {
                let w = (target - prev.1) / (g - prev.1);
                oracle = Some(prev.0 + w * (a - prev.0));
                break;
            }
            prev = (a, g);
        }
        let oracle = oracle.expect("grid bracket");
        assert!((alpha - oracle).abs() < 1e-8, "{alpha} vs {oracle}");
    }

    #[test]
    fn no_solution_is_reported_with_the_cap_value() {
        // drift only: r_D(A(a)) = 0.1a stays below 3 on (0, 10]
        let model = models::scalar_brownian(0.1, 0.0);
        match solve_alpha(&model, 3.0, 10.0) {
            Err(SpectralError::NoSolution {
                alpha_max, at_max, ..
            }) => {
                assert_eq!(alpha_max, 10.0);
                assert_relative_eq!(at_max, 1.0, epsilon = 1e-12);
            }
            other => panic!("expected NoSolution, got {other:?}"),
        }
    }

    #[test]
    fn scalar_residue_values() {
        let model = models::scalar_brownian(0.0, 1.0);
        let r = resolvent_residue(&model, 1.0, 0.5).unwrap();
        assert_relative_eq!(r.xi, 1.0, epsilon = 1e-10);
        assert_relative_eq!(r.matrix[(0, 0)], 1.0, epsilon = 1e-10);

        let r2 = resolvent_residue(&model, 2.0, 2.0).unwrap();
        assert_relative_eq!(r2.xi, 0.5, epsilon = 1e-10);
    }

    #[test]
    fn residue_matches_numerical_limit() {
        let model = models::two_regime();
        let eta = 0.5;
        let alpha = solve_alpha(&model, eta, DEFAULT_ALPHA_MAX).unwrap();
        let r = resolvent_residue(&model, alpha, eta).unwrap();
        let id = DMatrix::<f64>::identity(2, 2);
        let mut last = f64::INFINITY;
        for k in 4..=7 {
            let eps = 10f64.powi(-k);
            let s = alpha - eps;
            let probe = (&id * eta - model.eval(s)).lu().solve(&id).unwrap() * eps;
            last = (&probe - &r.matrix).amax();
        }
        assert!(last < 1e-4, "limit defect {last}");
    }

    #[test]
    fn scan_passes_for_diffusive_scalar_model() {
        let model = models::scalar_brownian(0.0, 1.0);
        assert!(uniqueness_scan(
            &model,
            1.0,
            &[-0.5, 0.5, -1.0, 1.0, -5.0, 5.0]
        ));
    }

    #[test]
    fn scan_passes_for_gaussian_jump_rigidity_model() {
        let regime = RegimeExponent {
            drift: 0.0,
            diffusion_var: 0.0,
            jump_intensity: 1.0,
            jump_law: JumpLaw::Gaussian {
                mean: 0.1,
                variance: 0.5,
            },
        };
        let model = ModulatedModel::new(
            vec![regime],
            DMatrix::zeros(1, 1),
            DVector::from_element(1, 1.0),
        )
        .unwrap();
        let alpha = solve_alpha(&model, 0.2, DEFAULT_ALPHA_MAX).unwrap();
        assert!(uniqueness_scan(
            &model,
            alpha,
            &[0.25, 0.5, 1.0, 2.0, 4.0, 8.0]
        ));
    }

    #[test]
    fn scan_detects_lattice_jumps() {
        use std::f64::consts::PI;
        let regime = RegimeExponent {
            drift: 0.0,
            diffusion_var: 0.0,
            jump_intensity: 1.0,
            jump_law: JumpLaw::Degenerate { size: 1.0 },
        };
        let model = ModulatedModel::new(
            vec![regime],
            DMatrix::zeros(1, 1),
            DVector::from_element(1, 1.0),
        )
        .unwrap();
        let alpha = solve_alpha(&model, 0.2, DEFAULT_ALPHA_MAX).unwrap();
        assert!(!uniqueness_scan(&model, alpha, &[2.0 * PI]));
        assert!(uniqueness_scan(&model, alpha, &[1.0, 2.0]));
    }
}
