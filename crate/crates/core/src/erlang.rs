//! Generalized Erlang distributions: rate merging, the explicit signed-mixture
//! coefficient table, scalar density/CDF, and matrix-argument expectations.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::spectral::spectral_abscissa;

/// Cap on the total shape (number of exponential stages) of one spec.
pub const MAX_TOTAL_SHAPE: u32 = 30;
/// Rates closer than this, relatively, are treated as one rate.
pub const MERGE_RELATIVE_TOL: f64 = 1e-9;
/// Below this relative gap the coefficient formula is flagged as
/// ill-conditioned: it divides by powers of pairwise rate differences.
pub const CONDITIONING_GAP: f64 = 1e-3;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ErlangError {
    #[error("rate list is empty")]
    EmptyInput,
    #[error("rate {0:.3e} is not positive")]
    NonPositiveRate(f64),
    #[error("total shape {total} exceeds cap {MAX_TOTAL_SHAPE}")]
    ShapeCapExceeded { total: u32 },
    #[error("coefficient table fails the normalization check by {defect:.3e}")]
    CoefficientCheckFailed { defect: f64 },
    #[error("spectral abscissa {abscissa:.6e} is not below the smallest rate {smallest_rate:.6e}")]
    DomainViolation { abscissa: f64, smallest_rate: f64 },
}

/// Sort rates ascending and merge relative ties into (rate, multiplicity).
pub fn merge_rates(rates: &[f64]) -> Result<Vec<(f64, u32)>, ErlangError> {
    if rates.is_empty() {
        return Err(ErlangError::EmptyInput);
    }
    for &r in rates {
        if !r.is_finite() || r <= 0.0 {
            return Err(ErlangError::NonPositiveRate(r));
        }
    }
    let mut sorted = rates.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut merged: Vec<(f64, u32)> = Vec::new();
    for r in sorted {
        match merged.last_mut() {
            Some((rep, mult)) if (r - *rep).abs() <= MERGE_RELATIVE_TOL * r.max(*rep) => {
                *mult += 1;
            }
            _ => merged.push((r, 1)),
        }
    }
    Ok(merged)
}

fn binomial(n: u32, k: u32) -> f64 {
    let mut v = 1.0;
    for i in 1..=k {
        v *= (n - k + i) as f64 / i as f64;
    }
    v
}

/// Visit every nonnegative integer vector of length `parts` summing to `total`.
fn for_each_composition(total: u32, parts: usize, mut visit: impl FnMut(&[u32])) {
    if parts == 0 {
        if total == 0 {
            visit(&[]);
        }
        return;
    }
    if parts == 1 {
        visit(&[total]);
        return;
    }
    // odometer over the first parts-1 coordinates; the last takes the slack
    let free = parts - 1;
    let mut counters = vec![0u32; free];
    let mut used = 0u32;
    let mut d = vec![0u32; parts];
    loop {
        d[..free].copy_from_slice(&counters);
        d[free] = total - used;
        visit(&d);
        let mut i = 0;
        loop {
            if used < total {
                counters[i] += 1;
                used += 1;
                break;
            }
            used -= counters[i];
            counters[i] = 0;
            i += 1;
            if i == free {
                return;
            }
        }
    }
}

/// Coefficient table c[k][l-1] of the density
/// f(t) = Σ_k Σ_l c_{k,l} t^{l-1} e^{-a_k t} / (l-1)!
/// for a sum of independent Erlang blocks with distinct rates.
pub fn erlang_coefficients(rates: &[f64], shapes: &[u32]) -> Result<Vec<Vec<f64>>, ErlangError> {
    assert_eq!(rates.len(), shapes.len(), "rates and shapes must align");
    assert!(!rates.is_empty(), "at least one block required");
    for w in rates.windows(2) {
        assert!(w[0] < w[1], "rates must be strictly increasing");
    }
    for &r in rates {
        if !r.is_finite() || r <= 0.0 {
            return Err(ErlangError::NonPositiveRate(r));
        }
    }
    let total: u32 = shapes.iter().sum();
    if total > MAX_TOTAL_SHAPE {
        return Err(ErlangError::ShapeCapExceeded { total });
    }
    assert!(shapes.iter().all(|&b| b >= 1), "shapes must be positive");

    let d = rates.len();
    let prefactor: f64 = rates
        .iter()
        .zip(shapes)
        .map(|(&a, &b)| a.powi(b as i32))
        .product();

    let mut table = Vec::with_capacity(d);
    for k in 0..d {
        let b_k = shapes[k];
        let mut row = Vec::with_capacity(b_k as usize);
        let others: Vec<usize> = (0..d).filter(|&m| m != k).collect();
        for ell in 1..=b_k {
            let excess = b_k - ell;
            let mut sum = 0.0;
            for_each_composition(excess, others.len(), |comp| {
                let mut term = 1.0;
                for (pos, &m) in others.iter().enumerate() {
                    let d_m = comp[pos];
                    let power = shapes[m] + d_m;
                    term *= binomial(shapes[m] + d_m - 1, d_m)
                        / (rates[m] - rates[k]).powi(power as i32);
                }
                sum += term;
            });
            let sign = if excess.is_multiple_of(2) { 1.0 } else { -1.0 };
            row.push(prefactor * sign * sum);
        }
        table.push(row);
    }
    Ok(table)
}

/// A merged generalized Erlang law with its coefficient table.
#[derive(Debug, Clone, PartialEq)]
pub struct ErlangSpec {
    rates: Vec<f64>,
    shapes: Vec<u32>,
    coeffs: Vec<Vec<f64>>,
    ill_conditioned: bool,
}

impl ErlangSpec {
    /// Build from a raw (unmerged, unordered) list of exponential rates.
    pub fn from_rates(all_rates: &[f64]) -> Result<Self, ErlangError> {
        Self::from_merged(&merge_rates(all_rates)?)
    }

    pub fn from_merged(pairs: &[(f64, u32)]) -> Result<Self, ErlangError> {
        if pairs.is_empty() {
            return Err(ErlangError::EmptyInput);
        }
        let rates: Vec<f64> = pairs.iter().map(|&(r, _)| r).collect();
        let shapes: Vec<u32> = pairs.iter().map(|&(_, b)| b).collect();
        let coeffs = erlang_coefficients(&rates, &shapes)?;
        if coeffs.iter().flatten().any(|c| !c.is_finite()) {
            return Err(ErlangError::CoefficientCheckFailed { defect: f64::NAN });
        }

        // Laplace transform at 0 must reproduce total mass one.
        let mass: f64 = coeffs
            .iter()
            .zip(&rates)
            .map(|(row, &a)| {
                row.iter()
                    .enumerate()
                    .map(|(i, c)| c / a.powi(i as i32 + 1))
                    .sum::<f64>()
            })
            .sum();
        let defect = (mass - 1.0).abs();
        if defect > 1e-8 {
            return Err(ErlangError::CoefficientCheckFailed { defect });
        }

        let max_rate = rates.iter().cloned().fold(0.0, f64::max);
        let min_gap = rates
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        let ill_conditioned = rates.len() > 1 && min_gap < CONDITIONING_GAP * max_rate;

        Ok(ErlangSpec {
            rates,
            shapes,
            coeffs,
            ill_conditioned,
        })
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn shapes(&self) -> &[u32] {
        &self.shapes
    }

    pub fn total_shape(&self) -> u32 {
        self.shapes.iter().sum()
    }

    pub fn smallest_rate(&self) -> f64 {
        self.rates[0]
    }

    /// True when some pairwise rate gap is small enough to erode the
    /// coefficient table's accuracy.
    pub fn ill_conditioned(&self) -> bool {
        self.ill_conditioned
    }

    pub fn coefficients(&self) -> &[Vec<f64>] {
        &self.coeffs
    }

    /// Coefficient at the block matching `rate` (within the merge tolerance)
    /// and polynomial order `ell`; None when the spec has no such term.
    pub fn coefficient_at(&self, rate: f64, ell: u32) -> Option<f64> {
        let k = self
            .rates
            .iter()
            .position(|&a| (a - rate).abs() <= MERGE_RELATIVE_TOL * a.max(rate))?;
        if ell == 0 || ell > self.shapes[k] {
            return None;
        }
        Some(self.coeffs[k][ell as usize - 1])
    }

    pub fn density(&self, t: f64) -> f64 {
        assert!(t > 0.0, "density is defined on t > 0");
        let mut f = 0.0;
        for (k, &a) in self.rates.iter().enumerate() {
            let e = (-a * t).exp();
            let mut poly = 1.0; // t^{l-1} / (l-1)!
            for (i, &c) in self.coeffs[k].iter().enumerate() {
                if i > 0 {
                    poly *= t / i as f64;
                }
                f += c * poly * e;
            }
        }
        f
    }

    pub fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let mut total = 0.0;
        for (k, &a) in self.rates.iter().enumerate() {
            for (i, &c) in self.coeffs[k].iter().enumerate() {
                let ell = i + 1;
                // regularized lower incomplete gamma at integer shape
                let y = a * t;
                let mut tail = 0.0;
                let mut term = 1.0;
                for m in 0..ell {
                    if m > 0 {
                        term *= y / m as f64;
                    }
                    tail += term;
                }
                let p = 1.0 - (-y).exp() * tail;
                total += c / a.powi(ell as i32) * p;
            }
        }
        total
    }

    /// Mean of the distribution: sum of shape/rate over the blocks.
    pub fn mean(&self) -> f64 {
        self.rates
            .iter()
            .zip(&self.shapes)
            .map(|(&a, &b)| b as f64 / a)
            .sum()
    }

    /// Upper quantile by bisection on the CDF. The bracket comes from the
    /// analytic tail bound e^{-a_1 t}, not from doubling: the CDF is a signed
    /// sum whose rounding noise can keep it strictly below one forever.
    pub fn quantile(&self, p: f64) -> f64 {
        assert!((0.0..1.0).contains(&p));
        let mut hi = self.mean() + 60.0 / self.smallest_rate();
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// E[e^{A·T}] = Σ_k Σ_l c_{k,l} (a_k I − A)^{−l} for T with the given spec;
/// resolvent powers are accumulated by repeated linear solves against the
/// factored (a_k I − A), never by explicit inversion.
pub fn matrix_erlang_expectation(
    a_val: &DMatrix<f64>,
    spec: &ErlangSpec,
) -> Result<DMatrix<f64>, ErlangError> {
    let n = a_val.nrows();
    assert_eq!(a_val.ncols(), n, "matrix must be square");
    let abscissa = spectral_abscissa(a_val);
    if abscissa.is_nan() || abscissa >= spec.smallest_rate() {
        return Err(ErlangError::DomainViolation {
            abscissa,
            smallest_rate: spec.smallest_rate(),
        });
    }
    let id = DMatrix::<f64>::identity(n, n);
    let mut acc = DMatrix::<f64>::zeros(n, n);
    for (k, &a) in spec.rates.iter().enumerate() {
        let lu = (&id * a - a_val).lu();
        let mut power = id.clone();
        for &c in &spec.coeffs[k] {
            power = lu
                .solve(&power)
                .expect("resolvent is nonsingular inside the domain");
            acc += &power * c;
        }
    }
    Ok(acc)
}
