//! Tail exponent, logarithmic-correction order, and scale constant of the
//! realized price under the two trade-timing families, plus the closed-form
//! trade-time transforms used to cross-check them.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::erlang::{matrix_erlang_expectation, merge_rates, ErlangError, ErlangSpec};
use crate::matexp::{matexp, matexp_with_derivative, MatExpError};
use crate::process::{LaplaceExponent, ModulatedModel, ReflectedExponent};
use crate::spectral::{
    dominant_eigen, resolvent_residue, solve_alpha, uniqueness_scan_detailed, PerronData,
    SpectralError, UniquenessScan, DEFAULT_ALPHA_MAX,
};

const WEIGHT_TOL: f64 = 1e-12;
const RATE_TIE_TOL: f64 = crate::erlang::MERGE_RELATIVE_TOL;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum TimingError {
    #[error("at least one trading type is required")]
    Empty,
    #[error("probability [{index}] = {value:.6} is outside (0,1)")]
    ProbabilityOutOfRange { index: usize, value: f64 },
    #[error("entry [{index}] breaks the strict ascending order")]
    NotStrictlyIncreasing { index: usize },
    #[error("expected {expected} weights, got {got}")]
    WeightCount { expected: usize, got: usize },
    #[error("weight [{index}] = {value:.6} is not positive")]
    NonPositiveWeight { index: usize, value: f64 },
    #[error("weights sum to {sum:.12}, not 1")]
    WeightsNotNormalized { sum: f64 },
    #[error("trade count must be at least 1")]
    ZeroTradeCount,
    #[error("arrival rate [{index}] = {value:.6} is not positive")]
    NonPositiveRate { index: usize, value: f64 },
    #[error("completion rate [{index}] = {value:.6} is not positive")]
    NonPositiveCompletionRate { index: usize, value: f64 },
    #[error("{stages} completion stages exceed the shape cap")]
    CompletionCapExceeded { stages: usize },
}

#[derive(Debug, Clone, Error)]
pub enum TailError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    MatExp(#[from] MatExpError),
    #[error(transparent)]
    Erlang(#[from] ErlangError),
    #[error("transform undefined: r_D(A(s)) = {value:.6e} is not below {bound:.6e}")]
    DomainViolation { value: f64, bound: f64 },
    #[error("transform matrix is singular at the evaluation point")]
    SingularTransform,
    #[error("scale constant {value:.6e} is not positive; model rejected")]
    NonPositiveScale { value: f64 },
}

fn validate_weights(weights: &[f64], expected: usize) -> Result<(), TimingError> {
    if weights.len() != expected {
        return Err(TimingError::WeightCount {
            expected,
            got: weights.len(),
        });
    }
    for (i, &q) in weights.iter().enumerate() {
        if !q.is_finite() || q <= 0.0 {
            return Err(TimingError::NonPositiveWeight { index: i, value: q });
        }
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_TOL {
        return Err(TimingError::WeightsNotNormalized { sum });
    }
    Ok(())
}

/// Intertrade incidence: trades on the unit grid; waiting time to the n-th
/// success is negative binomial, geometric when n = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct IimTiming {
    probabilities: Vec<f64>,
    weights: Vec<f64>,
    trade_count: u32,
}

impl IimTiming {
    pub fn new(
        probabilities: Vec<f64>,
        weights: Vec<f64>,
        trade_count: u32,
    ) -> Result<Self, TimingError> {
        if probabilities.is_empty() {
            return Err(TimingError::Empty);
        }
        for (i, &p) in probabilities.iter().enumerate() {
            if !(p > 0.0 && p < 1.0) {
                return Err(TimingError::ProbabilityOutOfRange { index: i, value: p });
            }
            if i > 0 && p <= probabilities[i - 1] {
                return Err(TimingError::NotStrictlyIncreasing { index: i });
            }
        }
        validate_weights(&weights, probabilities.len())?;
        if trade_count == 0 {
            return Err(TimingError::ZeroTradeCount);
        }
        Ok(IimTiming {
            probabilities,
            weights,
            trade_count,
        })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn trade_count(&self) -> u32 {
        self.trade_count
    }

    pub fn type_count(&self) -> usize {
        self.probabilities.len()
    }

    /// Pole location of the trade-time transform: −log(1 − p₁).
    pub fn pole_target(&self) -> f64 {
        -(1.0 - self.probabilities[0]).ln()
    }
}

/// Intertrade time: type-specific exponential arrival plus shared
/// exponential completion stages; generalized Erlang overall.
#[derive(Debug, Clone, PartialEq)]
pub struct ItmTiming {
    arrival_rates: Vec<f64>,
    weights: Vec<f64>,
    completion_rates: Vec<f64>,
}

impl ItmTiming {
    pub fn new(
        arrival_rates: Vec<f64>,
        weights: Vec<f64>,
        completion_rates: Vec<f64>,
    ) -> Result<Self, TimingError> {
        if arrival_rates.is_empty() {
            return Err(TimingError::Empty);
        }
        for (i, &r) in arrival_rates.iter().enumerate() {
            if !r.is_finite() || r <= 0.0 {
                return Err(TimingError::NonPositiveRate { index: i, value: r });
            }
            if i > 0 && r <= arrival_rates[i - 1] {
                return Err(TimingError::NotStrictlyIncreasing { index: i });
            }
        }
        validate_weights(&weights, arrival_rates.len())?;
        for (i, &r) in completion_rates.iter().enumerate() {
            if !r.is_finite() || r <= 0.0 {
                return Err(TimingError::NonPositiveCompletionRate { index: i, value: r });
            }
        }
        if completion_rates.len() + 1 > crate::erlang::MAX_TOTAL_SHAPE as usize {
            return Err(TimingError::CompletionCapExceeded {
                stages: completion_rates.len(),
            });
        }
        Ok(ItmTiming {
            arrival_rates,
            weights,
            completion_rates,
        })
    }

    pub fn arrival_rates(&self) -> &[f64] {
        &self.arrival_rates
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn completion_rates(&self) -> &[f64] {
        &self.completion_rates
    }

    pub fn type_count(&self) -> usize {
        self.arrival_rates.len()
    }

    /// Generalized Erlang spec of type j: its arrival rate followed by the
    /// shared completion stages, equal rates merged.
    pub fn type_spec(&self, j: usize) -> Result<ErlangSpec, ErlangError> {
        let mut rates = Vec::with_capacity(1 + self.completion_rates.len());
        rates.push(self.arrival_rates[j]);
        rates.extend_from_slice(&self.completion_rates);
        ErlangSpec::from_rates(&rates)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimingKind {
    Iim,
    Itm,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TimingModel {
    Iim(IimTiming),
    Itm(ItmTiming),
}

impl TimingModel {
    pub fn kind(&self) -> TimingKind {
        match self {
            TimingModel::Iim(_) => TimingKind::Iim,
            TimingModel::Itm(_) => TimingKind::Itm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseLabel {
    IimGeometric,
    IimNegativeBinomial,
    ItmArrivalDominant,
    ItmCompletionDominant,
    ItmTiedRates,
}

impl std::fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CaseLabel::IimGeometric => "IIM-geometric",
            CaseLabel::IimNegativeBinomial => "IIM-negbin",
            CaseLabel::ItmArrivalDominant => "ITM-a",
            CaseLabel::ItmCompletionDominant => "ITM-b",
            CaseLabel::ItmTiedRates => "ITM-c",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailSide {
    Upper,
    Lower,
}

impl std::fmt::Display for TailSide {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TailSide::Upper => "upper",
            TailSide::Lower => "lower",
        })
    }
}

/// Case assignment of the intertrade-time model: the smallest rate in the
/// trade-time distribution decides the exponent equation, and its
/// multiplicity decides the logarithmic correction.
#[derive(Debug, Clone, PartialEq)]
pub struct ItmClassification {
    pub case: CaseLabel,
    pub lambda_min: f64,
    pub correction_order: u32,
    pub merged_completion: Vec<(f64, u32)>,
}

pub fn itm_classify(timing: &ItmTiming) -> ItmClassification {
    let lambda1 = timing.arrival_rates()[0];
    let merged = if timing.completion_rates().is_empty() {
        Vec::new()
    } else {
        merge_rates(timing.completion_rates()).expect("validated rates")
    };
    match merged.first().copied() {
        None => ItmClassification {
            case: CaseLabel::ItmArrivalDominant,
            lambda_min: lambda1,
            correction_order: 0,
            merged_completion: merged,
        },
        Some((mu1, r1)) => {
            let tied = (lambda1 - mu1).abs() <= RATE_TIE_TOL * lambda1.max(mu1);
            let (case, lambda_min, beta) = if tied {
                (CaseLabel::ItmTiedRates, lambda1.min(mu1), r1)
            } else if lambda1 < mu1 {
                (CaseLabel::ItmArrivalDominant, lambda1, 0)
            } else {
                (CaseLabel::ItmCompletionDominant, mu1, r1 - 1)
            };
            ItmClassification {
                case,
                lambda_min,
                correction_order: beta,
                merged_completion: merged,
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidueProbe {
    pub epsilon: f64,
    pub value: f64,
}

/// Numerical evidence stored alongside every report.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    /// (s + alpha)^{beta+1} M_T(s) sampled at s = −alpha + 10^{−k}, k = 3..6.
    pub residue_probes: Vec<ResidueProbe>,
    /// Polynomial extrapolation of the probes to epsilon = 0.
    pub residue_extrapolated: f64,
    /// Observed convergence order of the probe sequence.
    pub residue_observed_order: f64,
    pub uniqueness: UniquenessScan,
    /// r_D(A(s)) stayed finite on [−alpha − 0.1, 0.1].
    pub domain_finite: bool,
    /// (a, r_D(A(−a))) on a uniform grid over [0, 1.1 alpha].
    pub exponent_grid: Vec<(f64, f64)>,
    pub convexity_min_second_difference: f64,
    pub notes: Vec<String>,
}

/// Tail characterization of the realized price: P(P_T > y) decays like
/// scale/alpha · (log y)^beta · y^{−alpha}, up to bounded constants in the
/// non-simple-pole cases.
#[derive(Debug, Clone, PartialEq)]
pub struct TailReport {
    pub alpha: f64,
    pub correction_order: u32,
    pub scale: f64,
    pub case: CaseLabel,
    /// Level at which r_D(A(−alpha)) pins the pole.
    pub pole_target: f64,
    /// scale/alpha when the tail is exactly Paretian (simple pole and the
    /// off-axis scan passed); None otherwise.
    pub paretian_limit: Option<f64>,
    pub perron: PerronData,
    pub tail_side: TailSide,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone)]
pub struct ReportOptions {
    pub alpha_max: f64,
    pub scan_betas: Vec<f64>,
    pub grid_points: usize,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            alpha_max: DEFAULT_ALPHA_MAX,
            scan_betas: default_scan_grid(),
            grid_points: 41,
        }
    }
}

pub fn default_scan_grid() -> Vec<f64> {
    use std::f64::consts::PI;
    vec![
        0.25,
        0.5,
        1.0,
        2.0,
        4.0,
        8.0,
        PI,
        2.0 * PI,
        3.0 * PI,
        4.0 * PI,
        6.0 * PI,
        8.0 * PI,
    ]
}

fn neville_at_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let mut p = ys.to_vec();
    let n = p.len();
    for level in 1..n {
        for i in 0..n - level {
            p[i] = (-xs[i + level] * p[i] + xs[i] * p[i + 1]) / (xs[i] - xs[i + level]);
        }
    }
    p[0]
}

fn observed_order(probes: &[ResidueProbe]) -> f64 {
    let diffs: Vec<f64> = probes
        .windows(2)
        .map(|w| (w[0].value - w[1].value).abs())
        .collect();
    let mut orders = Vec::new();
    for w in diffs.windows(2) {
        if w[1] > 0.0 {
            orders.push((w[0] / w[1]).log10());
        }
    }
    if orders.is_empty() {
        f64::INFINITY
    } else {
        orders.iter().sum::<f64>() / orders.len() as f64
    }
}

fn build_diagnostics<F: LaplaceExponent>(
    af: &F,
    alpha: f64,
    pole_order: u32,
    opts: &ReportOptions,
    notes: Vec<String>,
    mgf: impl Fn(f64) -> Result<f64, TailError>,
) -> Result<Diagnostics, TailError> {
    let mut residue_probes = Vec::with_capacity(4);
    for k in 3..=6 {
        let epsilon = 10f64.powi(-k);
        let value = epsilon.powi(pole_order as i32) * mgf(alpha - epsilon)?;
        residue_probes.push(ResidueProbe { epsilon, value });
    }
    let xs: Vec<f64> = residue_probes.iter().map(|p| p.epsilon).collect();
    let ys: Vec<f64> = residue_probes.iter().map(|p| p.value).collect();
    let residue_extrapolated = neville_at_zero(&xs, &ys);
    let residue_observed_order = observed_order(&residue_probes);

    let uniqueness = uniqueness_scan_detailed(af, alpha, &opts.scan_betas);

    // holomorphy stand-in: the exponent stays finite through the pole window
    let mut domain_finite = true;
    let lo = -0.1;
    let hi = alpha + 0.1;
    for i in 0..=32 {
        let s = lo + (hi - lo) * i as f64 / 32.0;
        let m = af.eval(s);
        if m.iter().any(|x| !x.is_finite()) || dominant_eigen(&m).is_err() {
            domain_finite = false;
            break;
        }
    }

    let points = opts.grid_points.max(5);
    let mut exponent_grid = Vec::with_capacity(points);
    for i in 0..points {
        let a = 1.1 * alpha * i as f64 / (points - 1) as f64;
        let g = dominant_eigen(&af.eval(a))?.value;
        exponent_grid.push((a, g));
    }
    let convexity_min_second_difference = exponent_grid
        .windows(3)
        .map(|w| w[2].1 - 2.0 * w[1].1 + w[0].1)
        .fold(f64::INFINITY, f64::min);

    Ok(Diagnostics {
        residue_probes,
        residue_extrapolated,
        residue_observed_order,
        uniqueness,
        domain_finite,
        exponent_grid,
        convexity_min_second_difference,
        notes,
    })
}

fn domain_checked_eval<F: LaplaceExponent>(
    af: &F,
    s: f64,
    bound: f64,
) -> Result<DMatrix<f64>, TailError> {
    let m = af.eval(s);
    if m.iter().any(|x| !x.is_finite()) {
        return Err(TailError::DomainViolation {
            value: f64::INFINITY,
            bound,
        });
    }
    let g = dominant_eigen(&m)?.value;
    if g >= bound {
        return Err(TailError::DomainViolation { value: g, bound });
    }
    Ok(m)
}

fn iim_mgf_inner<F: LaplaceExponent>(
    af: &F,
    w0: &DVector<f64>,
    timing: &IimTiming,
    s: f64,
) -> Result<f64, TailError> {
    let bound = timing.pole_target();
    let m = domain_checked_eval(af, s, bound)?;
    let e = matexp(&m)?;
    let n = af.dim();
    let id = DMatrix::<f64>::identity(n, n);
    let count = timing.trade_count() as i32;
    let mut total = 0.0;
    for (&p, &q) in timing.probabilities().iter().zip(timing.weights()) {
        let discounted = &e * (1.0 - p);
        let lu = (&id - &discounted).lu();
        // K⁻¹B = (I − B)⁻¹ − I, the per-step transform of one waiting block
        let block = lu.solve(&discounted).ok_or(TailError::SingularTransform)?;
        let mut v = DVector::from_element(n, 1.0);
        for _ in 0..count {
            v = &block * v;
        }
        total += q * (p / (1.0 - p)).powi(count) * w0.dot(&v);
    }
    Ok(total)
}

fn itm_mgf_inner<F: LaplaceExponent>(
    af: &F,
    w0: &DVector<f64>,
    weights: &[f64],
    specs: &[ErlangSpec],
    lambda_min: f64,
    s: f64,
) -> Result<f64, TailError> {
    let m = domain_checked_eval(af, s, lambda_min)?;
    let n = af.dim();
    let ones = DVector::from_element(n, 1.0);
    let mut total = 0.0;
    for (&q, spec) in weights.iter().zip(specs) {
        let e = matrix_erlang_expectation(&m, spec)?;
        total += q * w0.dot(&(&e * &ones));
    }
    Ok(total)
}

/// Closed-form M_T(s) for incidence timing; defined while
/// r_D(A(s)) < −log(1 − p₁).
pub fn iim_mgf(model: &ModulatedModel, timing: &IimTiming, s: f64) -> Result<f64, TailError> {
    iim_mgf_inner(model, model.initial_distribution(), timing, s)
}

/// Closed-form M_T(s) for intertrade timing; defined while
/// r_D(A(s)) < λ_min.
pub fn itm_mgf(model: &ModulatedModel, timing: &ItmTiming, s: f64) -> Result<f64, TailError> {
    let specs = itm_type_specs(timing)?;
    let lambda_min = itm_classify(timing).lambda_min;
    itm_mgf_inner(
        model,
        model.initial_distribution(),
        timing.weights(),
        &specs,
        lambda_min,
        s,
    )
}

fn itm_type_specs(timing: &ItmTiming) -> Result<Vec<ErlangSpec>, ErlangError> {
    (0..timing.type_count())
        .map(|j| timing.type_spec(j))
        .collect()
}

fn iim_report_inner<F: LaplaceExponent>(
    af: &F,
    w0: &DVector<f64>,
    timing: &IimTiming,
    side: TailSide,
    opts: &ReportOptions,
) -> Result<TailReport, TailError> {
    let target = timing.pole_target();
    let alpha = solve_alpha(af, target, opts.alpha_max)?;
    let a_pole = af.eval(alpha);
    let perron = dominant_eigen(&a_pole)?;

    let n = af.dim();
    let p1 = timing.probabilities()[0];
    let q1 = timing.weights()[0];
    let shifted = &a_pole + DMatrix::<f64>::identity(n, n) * (1.0 - p1).ln();
    let (_, b_deriv) = matexp_with_derivative(&shifted, &af.deriv(alpha))?;
    // y'B'(alpha)x > 0: the discounted transform's eigenvalue crosses one
    // from below at the boundary
    let denom = perron.left.dot(&(&b_deriv * &perron.right));
    if denom <= 0.0 {
        return Err(TailError::NonPositiveScale { value: denom });
    }
    let unit_residue = 1.0 / denom;

    let count = timing.trade_count();
    let w0x = w0.dot(&perron.right);
    let y_ones = perron.left.sum();
    let yx = perron.left.dot(&perron.right);
    let ratio = p1 / (1.0 - p1);
    let scale = q1
        * ratio.powi(count as i32)
        * unit_residue.powi(count as i32)
        * yx.powi(count as i32 - 1)
        * w0x
        * y_ones;
    if scale <= 0.0 {
        return Err(TailError::NonPositiveScale { value: scale });
    }

    let correction_order = count - 1;
    let diagnostics = build_diagnostics(af, alpha, count, opts, Vec::new(), |s| {
        iim_mgf_inner(af, w0, timing, s)
    })?;
    let paretian_limit =
        (correction_order == 0 && diagnostics.uniqueness.passed).then(|| scale / alpha);

    Ok(TailReport {
        alpha,
        correction_order,
        scale,
        case: if count == 1 {
            CaseLabel::IimGeometric
        } else {
            CaseLabel::IimNegativeBinomial
        },
        pole_target: target,
        paretian_limit,
        perron,
        tail_side: side,
        diagnostics,
    })
}

fn itm_report_inner<F: LaplaceExponent>(
    af: &F,
    w0: &DVector<f64>,
    timing: &ItmTiming,
    side: TailSide,
    opts: &ReportOptions,
) -> Result<TailReport, TailError> {
    let cls = itm_classify(timing);
    let alpha = solve_alpha(af, cls.lambda_min, opts.alpha_max)?;
    let residue = resolvent_residue(af, alpha, cls.lambda_min)?;
    let specs = itm_type_specs(timing)?;

    let pole_order = cls.correction_order + 1;
    let mut coefficient_sum = 0.0;
    let mut notes = Vec::new();
    for (j, (spec, &q)) in specs.iter().zip(timing.weights()).enumerate() {
        coefficient_sum += q * spec
            .coefficient_at(cls.lambda_min, pole_order)
            .unwrap_or(0.0);
        if spec.ill_conditioned() {
            notes.push(format!(
                "type {j}: near-tied rates make the coefficient table ill-conditioned"
            ));
        }
    }
    if coefficient_sum <= 0.0 {
        return Err(TailError::NonPositiveScale {
            value: coefficient_sum,
        });
    }

    let w0x = w0.dot(&residue.perron.right);
    let y_ones = residue.perron.left.sum();
    let yx = residue.perron.left.dot(&residue.perron.right);
    let scale = residue.xi.powi(pole_order as i32)
        * coefficient_sum
        * w0x
        * yx.powi(cls.correction_order as i32)
        * y_ones;
    if scale <= 0.0 {
        return Err(TailError::NonPositiveScale { value: scale });
    }

    let diagnostics = build_diagnostics(af, alpha, pole_order, opts, notes, |s| {
        itm_mgf_inner(af, w0, timing.weights(), &specs, cls.lambda_min, s)
    })?;
    let paretian_limit =
        (cls.correction_order == 0 && diagnostics.uniqueness.passed).then(|| scale / alpha);

    Ok(TailReport {
        alpha,
        correction_order: cls.correction_order,
        scale,
        case: cls.case,
        pole_target: cls.lambda_min,
        paretian_limit,
        perron: residue.perron,
        tail_side: side,
        diagnostics,
    })
}

pub fn iim_report(model: &ModulatedModel, timing: &IimTiming) -> Result<TailReport, TailError> {
    iim_report_inner(
        model,
        model.initial_distribution(),
        timing,
        TailSide::Upper,
        &ReportOptions::default(),
    )
}

pub fn itm_report(model: &ModulatedModel, timing: &ItmTiming) -> Result<TailReport, TailError> {
    itm_report_inner(
        model,
        model.initial_distribution(),
        timing,
        TailSide::Upper,
        &ReportOptions::default(),
    )
}

/// Tail of small realized prices, obtained by rerunning the upper-tail
/// analysis on the reflected exponent s ↦ A(−s).
pub fn lower_tail_report(
    model: &ModulatedModel,
    timing: &TimingModel,
) -> Result<TailReport, TailError> {
    analyze(model, timing, TailSide::Lower, &ReportOptions::default())
}

/// Report dispatcher over timing family and tail side.
pub fn analyze(
    model: &ModulatedModel,
    timing: &TimingModel,
    side: TailSide,
    opts: &ReportOptions,
) -> Result<TailReport, TailError> {
    let w0 = model.initial_distribution();
    match side {
        TailSide::Upper => match timing {
            TimingModel::Iim(t) => iim_report_inner(model, w0, t, side, opts),
            TimingModel::Itm(t) => itm_report_inner(model, w0, t, side, opts),
        },
        TailSide::Lower => {
            let dual = ReflectedExponent(model);
            match timing {
                TimingModel::Iim(t) => iim_report_inner(&dual, w0, t, side, opts),
                TimingModel::Itm(t) => itm_report_inner(&dual, w0, t, side, opts),
            }
        }
    }
}

/// M_T(s) for either timing family; the transform behind the reports.
pub fn trade_time_mgf(
    model: &ModulatedModel,
    timing: &TimingModel,
    s: f64,
) -> Result<f64, TailError> {
    match timing {
        TimingModel::Iim(t) => iim_mgf(model, t, s),
        TimingModel::Itm(t) => itm_mgf(model, t, s),
    }
}
