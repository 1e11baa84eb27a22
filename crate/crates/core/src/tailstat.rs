//! Tail estimation from samples (Hill index, plateau scale, logarithmic
//! correction slope) and comparison against an analytic report.

use thiserror::Error;

use crate::montecarlo::SampleBatch;
use crate::tail::{TailReport, TailSide};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum StatError {
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("degenerate sample: zero log-excess over the threshold")]
    DegenerateSample,
    #[error("log log threshold spread {spread:.3} is below the required 0.5")]
    DegenerateSpread { spread: f64 },
}

/// Quantile band of survival levels used to place thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileBand {
    /// Deepest survival level (smallest tail probability).
    pub deep: f64,
    /// Shallowest survival level.
    pub shallow: f64,
    pub points: usize,
}

impl QuantileBand {
    /// Default plateau band: top 0.1% to 1% of the sample.
    pub fn plateau_default() -> Self {
        QuantileBand {
            deep: 1e-3,
            shallow: 1e-2,
            points: 20,
        }
    }

    /// Default band for the log-correction regression; reaches deeper so the
    /// regressor log log y has usable spread, but never below 30 exceedances.
    pub fn correction_default(sample_count: usize) -> Self {
        QuantileBand {
            deep: (30.0 / sample_count as f64).max(1e-5),
            shallow: 1e-2,
            points: 20,
        }
    }

    fn survival_levels(&self) -> Vec<f64> {
        let lo = self.deep.ln();
        let hi = self.shallow.ln();
        (0..self.points)
            .map(|i| (lo + (hi - lo) * i as f64 / (self.points - 1).max(1) as f64).exp())
            .collect()
    }
}

fn sorted_descending(samples: &[f64]) -> Vec<f64> {
    let mut v = samples.to_vec();
    v.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    v
}

fn hill_on_sorted(sorted: &[f64], k: usize) -> Result<(f64, f64), StatError> {
    if k == 0 || k + 1 > sorted.len() {
        return Err(StatError::InsufficientData(format!(
            "k = {k} needs at least k+1 of {} samples",
            sorted.len()
        )));
    }
    let pivot = sorted[k];
    if pivot <= 0.0 {
        return Err(StatError::InsufficientData(
            "top order statistics must be positive".into(),
        ));
    }
    let sum_log: f64 = sorted[..k].iter().map(|&x| (x / pivot).ln()).sum();
    if sum_log <= 0.0 {
        return Err(StatError::DegenerateSample);
    }
    let alpha = k as f64 / sum_log;
    Ok((alpha, alpha / (k as f64).sqrt()))
}

/// Hill estimator over the top k order statistics: the reciprocal mean
/// log-excess, with standard error alpha/sqrt(k).
pub fn hill(samples: &[f64], k: usize) -> Result<(f64, f64), StatError> {
    hill_on_sorted(&sorted_descending(samples), k)
}

/// Thresholds as (level, order statistic, empirical survival) triples.
fn thresholds(sorted: &[f64], band: &QuantileBand) -> Vec<(f64, f64)> {
    let n = sorted.len();
    let mut out = Vec::new();
    for level in band.survival_levels() {
        let rank = ((level * n as f64) as usize).clamp(1, n);
        let y = sorted[rank - 1];
        let survival = rank as f64 / n as f64;
        out.push((y, survival));
    }
    out.dedup_by(|a, b| a.0 == b.0);
    out
}

/// Average of y^alpha Ŝ(y) over the band; estimates the Paretian limit when
/// the tail has no logarithmic correction.
pub fn scale_plateau(samples: &[f64], alpha: f64, band: &QuantileBand) -> Result<f64, StatError> {
    let sorted = sorted_descending(samples);
    let points: Vec<(f64, f64)> = thresholds(&sorted, band)
        .into_iter()
        .filter(|&(y, _)| y > 0.0)
        .collect();
    if points.is_empty() {
        return Err(StatError::InsufficientData("empty threshold band".into()));
    }
    let sum: f64 = points
        .iter()
        .map(|&(y, survival)| y.powf(alpha) * survival)
        .sum();
    Ok(sum / points.len() as f64)
}

/// Least-squares slope of log(y^alpha Ŝ(y)) against log log y over the band;
/// estimates the order of the logarithmic correction.
pub fn log_correction_fit(
    samples: &[f64],
    alpha: f64,
    band: &QuantileBand,
) -> Result<(f64, f64), StatError> {
    let sorted = sorted_descending(samples);
    let points: Vec<(f64, f64)> = thresholds(&sorted, band)
        .into_iter()
        .filter(|&(y, _)| y.ln() > 0.0)
        .collect();
    if points.len() < 3 {
        return Err(StatError::InsufficientData(format!(
            "{} usable thresholds, need at least 3",
            points.len()
        )));
    }
    let xs: Vec<f64> = points.iter().map(|&(y, _)| y.ln().ln()).collect();
    let ys: Vec<f64> = points
        .iter()
        .map(|&(y, survival)| alpha * y.ln() + survival.ln())
        .collect();
    let spread = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - xs.iter().cloned().fold(f64::INFINITY, f64::min);
    if spread < 0.5 {
        return Err(StatError::DegenerateSpread { spread });
    }

    let m = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / m;
    let ybar = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum();
    let slope = sxy / sxx;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let fit = ybar + slope * (x - xbar);
            (y - fit).powi(2)
        })
        .sum();
    let se = (rss / (m - 2.0) / sxx).sqrt();
    Ok((slope, se))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationCheck {
    pub name: String,
    pub verdict: Verdict,
    pub target: Option<f64>,
    pub estimate: Option<f64>,
    pub tolerance: f64,
    pub detail: String,
}

/// Estimator-vs-report summary; `passed` requires every non-skipped check.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationSummary {
    pub checks: Vec<ValidationCheck>,
    pub hill_k: usize,
    pub k_sweep: Vec<(usize, f64)>,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub hill_relative: f64,
    pub scale_relative: f64,
    pub correction_absolute: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hill_relative: 0.10,
            scale_relative: 0.25,
            correction_absolute: 0.4,
        }
    }
}

/// Run every applicable estimator against the analytic report.
pub fn validate(report: &TailReport, batch: &SampleBatch, tol: &Tolerances) -> ValidationSummary {
    // lower-tail reports are validated on 1/P_T
    let prices: Vec<f64> = match report.tail_side {
        TailSide::Upper => batch.log_prices.iter().map(|x| x.exp()).collect(),
        TailSide::Lower => batch.log_prices.iter().map(|x| (-x).exp()).collect(),
    };
    let n = prices.len();
    let sorted = sorted_descending(&prices);
    let k = (n as f64).sqrt().ceil() as usize;
    let mut checks = Vec::new();

    let mut k_sweep = Vec::new();
    let k_lo = (k / 10).max(10);
    let k_hi = (k * 10).min(n.saturating_sub(1));
    if k_lo < k_hi {
        for i in 0..10 {
            let kk = ((k_lo as f64) * ((k_hi as f64 / k_lo as f64).ln() * i as f64 / 9.0).exp())
                .round() as usize;
            if let Ok((a, _)) = hill_on_sorted(&sorted, kk) {
                k_sweep.push((kk, a));
            }
        }
    }

    match hill_on_sorted(&sorted, k) {
        Ok((alpha_hat, se)) => {
            let rel = (alpha_hat - report.alpha).abs() / report.alpha;
            checks.push(ValidationCheck {
                name: "hill-exponent".into(),
                verdict: if rel <= tol.hill_relative {
                    Verdict::Pass
                } else {
                    Verdict::Fail
                },
                target: Some(report.alpha),
                estimate: Some(alpha_hat),
                tolerance: tol.hill_relative,
                detail: format!("relative error {rel:.4}, se {se:.4}, k {k}"),
            });
        }
        Err(e) => checks.push(ValidationCheck {
            name: "hill-exponent".into(),
            verdict: Verdict::Fail,
            target: Some(report.alpha),
            estimate: None,
            tolerance: tol.hill_relative,
            detail: e.to_string(),
        }),
    }

    if report.correction_order == 0 {
        match report.paretian_limit {
            Some(limit) => {
                match scale_plateau(&prices, report.alpha, &QuantileBand::plateau_default()) {
                    Ok(estimate) => {
                        let rel = (estimate - limit).abs() / limit;
                        checks.push(ValidationCheck {
                            name: "scale-plateau".into(),
                            verdict: if rel <= tol.scale_relative {
                                Verdict::Pass
                            } else {
                                Verdict::Fail
                            },
                            target: Some(limit),
                            estimate: Some(estimate),
                            tolerance: tol.scale_relative,
                            detail: format!("relative error {rel:.4}"),
                        });
                    }
                    Err(e) => checks.push(ValidationCheck {
                        name: "scale-plateau".into(),
                        verdict: Verdict::Fail,
                        target: Some(limit),
                        estimate: None,
                        tolerance: tol.scale_relative,
                        detail: e.to_string(),
                    }),
                }
            }
            None => checks.push(ValidationCheck {
                name: "scale-plateau".into(),
                verdict: Verdict::Skipped,
                target: None,
                estimate: None,
                tolerance: tol.scale_relative,
                detail: "Paretian limit unavailable: off-axis uniqueness scan failed".into(),
            }),
        }
    } else {
        let beta = report.correction_order as f64;
        match log_correction_fit(&prices, report.alpha, &QuantileBand::correction_default(n)) {
            Ok((slope, se)) => {
                let err = (slope - beta).abs();
                checks.push(ValidationCheck {
                    name: "log-correction-slope".into(),
                    verdict: if err <= tol.correction_absolute {
                        Verdict::Pass
                    } else {
                        Verdict::Fail
                    },
                    target: Some(beta),
                    estimate: Some(slope),
                    tolerance: tol.correction_absolute,
                    detail: format!("absolute error {err:.4}, se {se:.4}"),
                });
            }
            Err(e) => checks.push(ValidationCheck {
                name: "log-correction-slope".into(),
                verdict: Verdict::Fail,
                target: Some(beta),
                estimate: None,
                tolerance: tol.correction_absolute,
                detail: e.to_string(),
            }),
        }
    }

    let passed = checks.iter().all(|c| c.verdict != Verdict::Fail);
    ValidationSummary {
        checks,
        hill_k: k,
        k_sweep,
        passed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn pareto_sample(alpha: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
                u.powf(-1.0 / alpha)
            })
            .collect()
    }

    #[test]
    fn hill_hand_arithmetic() {
        let samples = [3f64.exp(), 2f64.exp(), 1f64.exp()];
        let (alpha, se) = hill(&samples, 2).unwrap();
        assert_relative_eq!(alpha, 2.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(se, alpha / 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn hill_recovers_pareto_index() {
        let samples = pareto_sample(2.0, 100_000, 11);
        let (alpha, se) = hill(&samples, 1000).unwrap();
        assert!((alpha - 2.0).abs() < 3.0 * se, "alpha {alpha}, se {se}");
    }

    #[test]
    fn hill_rejects_constant_samples() {
        let samples = vec![5.0; 100];
        assert_eq!(hill(&samples, 10), Err(StatError::DegenerateSample));
    }

    #[test]
    fn hill_is_scale_free() {
        let samples = pareto_sample(1.5, 10_000, 12);
        let (a1, _) = hill(&samples, 100).unwrap();
        let scaled: Vec<f64> = samples.iter().map(|x| 17.0 * x).collect();
        let (a2, _) = hill(&scaled, 100).unwrap();
        assert!((a1 - a2).abs() < 1e-12);
    }

    #[test]
    fn plateau_recovers_pareto_scale() {
        // survival y^{-2} on y >= 1: scale constant 1
        let samples = pareto_sample(2.0, 1_000_000, 13);
        let est = scale_plateau(&samples, 2.0, &QuantileBand::plateau_default()).unwrap();
        assert!((est - 1.0).abs() < 0.1, "estimate {est}");
    }

    #[test]
    fn plateau_rejects_empty_band() {
        let samples = pareto_sample(2.0, 1000, 14);
        let band = QuantileBand {
            deep: 1e-9,
            shallow: 2e-9,
            points: 0,
        };
        assert!(matches!(
            scale_plateau(&samples, 2.0, &band),
            Err(StatError::InsufficientData(_))
        ));
    }

    #[test]
    fn correction_fit_flags_narrow_bands() {
        let samples = pareto_sample(1.0, 100_000, 15);
        let band = QuantileBand {
            deep: 9e-3,
            shallow: 1e-2,
            points: 3,
        };
        match log_correction_fit(&samples, 1.0, &band) {
            Err(StatError::DegenerateSpread { .. }) | Err(StatError::InsufficientData(_)) => {}
            other => panic!("expected a band error, got {other:?}"),
        }
    }

    #[test]
    fn correction_fit_is_near_zero_for_exact_pareto() {
        let samples = pareto_sample(1.0, 1_000_000, 16);
        let (slope, _) =
            log_correction_fit(&samples, 1.0, &QuantileBand::correction_default(1_000_000))
                .unwrap();
        assert!((-0.3..=0.3).contains(&slope), "slope {slope}");
    }

    #[test]
    fn correction_fit_recovers_synthetic_log_factor() {
        // survival S(y) = (log y) / y for log y >= 1, sampled by inverting
        // x e^{-x} = u on the decreasing branch with Newton bisection
        let n = 1_000_000usize;
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        let samples: Vec<f64> = (0..n)
            .map(|_| {
                let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
                let x = if u >= (-1f64).exp() {
                    -u.ln()
                } else {
                    let mut lo = 1.0f64;
                    let mut hi = 60.0f64;
                    for _ in 0..80 {
                        let mid = 0.5 * (lo + hi);
                        if mid * (-mid).exp() > u {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    0.5 * (lo + hi)
                };
                x.exp()
            })
            .collect();
        let (slope, _) =
            log_correction_fit(&samples, 1.0, &QuantileBand::correction_default(n)).unwrap();
        assert!((0.6..=1.4).contains(&slope), "slope {slope}");
    }
}
