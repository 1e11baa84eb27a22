//! Analytic tail asymptotics for realized prices P_T = e^{X_T}, where X is a
//! Markov-modulated Lévy process and T the random time of the next trade,
//! together with exact Monte Carlo simulation and tail estimation to verify
//! every prediction.
//!
//! The crate is organized around the analysis pipeline:
//!
//! * [`process`] — the latent dynamics and their matrix Laplace exponent A(z)
//! * [`matexp`] — matrix exponentials with directional derivatives
//! * [`spectral`] — dominant-eigenvalue machinery and the exponent equation
//! * [`erlang`] — generalized Erlang densities and matrix expectations
//! * [`tail`] — tail exponent, correction order, and scale constant reports
//! * [`montecarlo`] — exact simulation of (X_T, T)
//! * [`tailstat`] — Hill/plateau/log-slope estimation and report validation
//! * [`models`] — shipped benchmark models

pub mod erlang;
pub mod matexp;
pub mod models;
pub mod montecarlo;
pub mod process;
pub mod spectral;
pub mod tail;
pub mod tailstat;

pub use erlang::{matrix_erlang_expectation, merge_rates, ErlangError, ErlangSpec};
pub use matexp::{matexp, matexp_with_derivative, MatExpError};
pub use montecarlo::{
    run_batch, sample_realized_price, sample_trade_time, sample_x_at, McError, SampleBatch,
};
pub use process::{
    JumpLaw, LaplaceExponent, ModelError, ModulatedModel, ReflectedExponent, RegimeExponent,
    TransitionJump,
};
pub use spectral::{
    dominant_eigen, resolvent_residue, solve_alpha, uniqueness_scan, PerronData, ResidueData,
    SpectralError, UniquenessScan,
};
pub use tail::{
    analyze, iim_mgf, iim_report, itm_classify, itm_mgf, itm_report, lower_tail_report,
    trade_time_mgf, CaseLabel, Diagnostics, IimTiming, ItmClassification, ItmTiming, ReportOptions,
    TailError, TailReport, TailSide, TimingError, TimingKind, TimingModel,
};
pub use tailstat::{
    hill, log_correction_fit, scale_plateau, validate, QuantileBand, StatError, Tolerances,
    ValidationCheck, ValidationSummary, Verdict,
};
