//! Dense matrix exponential (Padé-13 scaling and squaring) and its
//! directional derivative via block augmentation.

use nalgebra::DMatrix;
use thiserror::Error;

/// Largest spectral abscissa accepted before `exp` is declared overflowing.
pub const DEFAULT_ABSCISSA_CAP: f64 = 700.0;

#[derive(Debug, Clone, Error)]
pub enum MatExpError {
    #[error("matrix has a non-finite entry")]
    NonFinite,
    #[error("spectral abscissa {abscissa:.6e} exceeds overflow cap {cap:.6e}")]
    Overflow { abscissa: f64, cap: f64 },
}

/// Padé-13 numerator coefficients from Higham's scaling-and-squaring method.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// 1-norm threshold above which the argument is scaled down.
const THETA13: f64 = 5.371920351148152;

fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn max_real_eigenvalue_part(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

fn check_argument(m: &DMatrix<f64>, cap: f64) -> Result<(), MatExpError> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(MatExpError::NonFinite);
    }
    let abscissa = max_real_eigenvalue_part(m);
    if abscissa > cap {
        return Err(MatExpError::Overflow { abscissa, cap });
    }
    Ok(())
}

/// Padé-13 rational approximant with scaling and squaring; no domain checks.
fn pade13_exp(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let norm = one_norm(m);
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as u32
    } else {
        0
    };
    let a = m / 2f64.powi(squarings as i32);

    let id = DMatrix::<f64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let u_inner = &a6 * (&a6 * PADE13[13] + &a4 * PADE13[11] + &a2 * PADE13[9])
        + &a6 * PADE13[7]
        + &a4 * PADE13[5]
        + &a2 * PADE13[3]
        + &id * PADE13[1];
    let u = &a * u_inner;
    let v = &a6 * (&a6 * PADE13[12] + &a4 * PADE13[10] + &a2 * PADE13[8])
        + &a6 * PADE13[6]
        + &a4 * PADE13[4]
        + &a2 * PADE13[2]
        + &id * PADE13[0];

    let denom = &v - &u;
    let numer = &v + &u;
    let mut r = denom
        .lu()
        .solve(&numer)
        .expect("Pade denominator is singular");
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

/// e^M for a square real matrix.
pub fn matexp(m: &DMatrix<f64>) -> Result<DMatrix<f64>, MatExpError> {
    matexp_capped(m, DEFAULT_ABSCISSA_CAP)
}

pub fn matexp_capped(m: &DMatrix<f64>, cap: f64) -> Result<DMatrix<f64>, MatExpError> {
    assert_eq!(m.nrows(), m.ncols(), "matexp requires a square matrix");
    check_argument(m, cap)?;
    Ok(pade13_exp(m))
}

/// e^M together with the directional derivative of `exp` at M along D,
/// read off the exponential of the block matrix [[M, D], [0, M]].
pub fn matexp_with_derivative(
    m: &DMatrix<f64>,
    d: &DMatrix<f64>,
) -> Result<(DMatrix<f64>, DMatrix<f64>), MatExpError> {
    matexp_with_derivative_capped(m, d, DEFAULT_ABSCISSA_CAP)
}

pub fn matexp_with_derivative_capped(
    m: &DMatrix<f64>,
    d: &DMatrix<f64>,
    cap: f64,
) -> Result<(DMatrix<f64>, DMatrix<f64>), MatExpError> {
    let n = m.nrows();
    assert_eq!(m.ncols(), n, "matexp requires a square matrix");
    assert_eq!(d.shape(), (n, n), "direction must match the argument shape");
    // The block matrix is triangular in blocks, so its spectrum is that of M.
    check_argument(m, cap)?;
    if d.iter().any(|x| !x.is_finite()) {
        return Err(MatExpError::NonFinite);
    }

    let mut aug = DMatrix::<f64>::zeros(2 * n, 2 * n);
    aug.view_mut((0, 0), (n, n)).copy_from(m);
    aug.view_mut((0, n), (n, n)).copy_from(d);
    aug.view_mut((n, n), (n, n)).copy_from(m);

    let big = pade13_exp(&aug);
    let value = big.view((0, 0), (n, n)).into_owned();
    let derivative = big.view((0, n), (n, n)).into_owned();
    Ok((value, derivative))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_matrix_gives_identity_pair() {
        let z = DMatrix::<f64>::zeros(3, 3);
        let id = DMatrix::<f64>::identity(3, 3);
        let (e, de) = matexp_with_derivative(&z, &id).unwrap();
        assert_relative_eq!(e, id.clone(), epsilon = 1e-14);
        assert_relative_eq!(de, id, epsilon = 1e-14);
    }

    #[test]
    fn scalar_value_and_derivative() {
        let m = DMatrix::from_element(1, 1, 2f64.ln());
        let d = DMatrix::from_element(1, 1, 3.0);
        let (e, de) = matexp_with_derivative(&m, &d).unwrap();
        assert_relative_eq!(e[(0, 0)], 2.0, epsilon = 1e-13);
        assert_relative_eq!(de[(0, 0)], 6.0, epsilon = 1e-13);
    }

    #[test]
    fn generator_derivative_matches_central_difference() {
        let g = DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 1.0, -1.0]);
        let (_, de) = matexp_with_derivative(&g, &g).unwrap();
        let h = 1e-6;
        let plus = matexp(&(&g + &g * h)).unwrap();
        let minus = matexp(&(&g - &g * h)).unwrap();
        let fd = (plus - minus) / (2.0 * h);
        assert!((de - fd).amax() < 1e-8);
    }

    #[test]
    fn large_argument_is_accurate() {
        // diagonalizable with eigenpairs (3, (2,1)) and (-3, (1,-1))
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 4.0, 2.0, -1.0]);
        let e = matexp(&m).unwrap();
        let p = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, -1.0]);
        let diag = DMatrix::from_row_slice(2, 2, &[3f64.exp(), 0.0, 0.0, (-3f64).exp()]);
        let expected = &p * diag * p.try_inverse().unwrap();
        assert!((e - expected).amax() < 1e-12 * 3f64.exp());
    }

    #[test]
    fn overflow_cap_is_enforced() {
        let m = DMatrix::from_element(1, 1, 800.0);
        match matexp(&m) {
            Err(MatExpError::Overflow { .. }) => {}
            other => panic!("expected overflow, got {other:?}"),
        }
    }
}
