//! Serializable report documents mirroring the analysis types, with
//! provenance so validation runs can be audited.

use serde::Serialize;

use tradetail_core::tail::{Diagnostics, TailReport};
use tradetail_core::tailstat::{ValidationSummary, Verdict};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Serialize)]
pub struct Provenance {
    pub config_hash: String,
    pub version: String,
}

impl Provenance {
    pub fn new(config_hash: u64) -> Self {
        Provenance {
            config_hash: format!("{config_hash:#018x}"),
            version: ARTIFACT_VERSION.to_string(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct PerronDoc {
    pub value: f64,
    pub right: Vec<f64>,
    pub left: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct UniquenessDoc {
    pub passed: bool,
    pub betas: Vec<f64>,
    pub on_axis: f64,
    pub max_off_axis: f64,
}

#[derive(Debug, Serialize)]
pub struct DiagnosticsDoc {
    pub residue_probes: Vec<ResidueProbeDoc>,
    pub residue_extrapolated: f64,
    pub residue_observed_order: f64,
    pub uniqueness: UniquenessDoc,
    pub domain_finite: bool,
    pub exponent_grid: Vec<[f64; 2]>,
    pub convexity_min_second_difference: f64,
    pub notes: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct ResidueProbeDoc {
    pub epsilon: f64,
    pub value: f64,
}

#[derive(Debug, Serialize)]
pub struct TailReportDoc {
    pub tail_side: String,
    pub case: String,
    pub alpha: f64,
    pub correction_order: u32,
    pub scale: f64,
    pub pole_target: f64,
    pub paretian_limit: Option<f64>,
    pub perron: PerronDoc,
    pub diagnostics: DiagnosticsDoc,
}

#[derive(Debug, Serialize)]
pub struct ReportDocument {
    pub provenance: Provenance,
    pub report: TailReportDoc,
}

fn diagnostics_doc(d: &Diagnostics) -> DiagnosticsDoc {
    DiagnosticsDoc {
        residue_probes: d
            .residue_probes
            .iter()
            .map(|p| ResidueProbeDoc {
                epsilon: p.epsilon,
                value: p.value,
            })
            .collect(),
        residue_extrapolated: d.residue_extrapolated,
        residue_observed_order: d.residue_observed_order,
        uniqueness: UniquenessDoc {
            passed: d.uniqueness.passed,
            betas: d.uniqueness.betas.clone(),
            on_axis: d.uniqueness.on_axis,
            max_off_axis: d.uniqueness.max_off_axis,
        },
        domain_finite: d.domain_finite,
        exponent_grid: d.exponent_grid.iter().map(|&(a, g)| [a, g]).collect(),
        convexity_min_second_difference: d.convexity_min_second_difference,
        notes: d.notes.clone(),
    }
}

pub fn report_document(report: &TailReport, config_hash: u64) -> ReportDocument {
    ReportDocument {
        provenance: Provenance::new(config_hash),
        report: TailReportDoc {
            tail_side: report.tail_side.to_string(),
            case: report.case.to_string(),
            alpha: report.alpha,
            correction_order: report.correction_order,
            scale: report.scale,
            pole_target: report.pole_target,
            paretian_limit: report.paretian_limit,
            perron: PerronDoc {
                value: report.perron.value,
                right: report.perron.right.iter().copied().collect(),
                left: report.perron.left.iter().copied().collect(),
            },
            diagnostics: diagnostics_doc(&report.diagnostics),
        },
    }
}

pub fn render_report(report: &TailReport, config_hash: u64) -> String {
    let mut text = serde_json::to_string_pretty(&report_document(report, config_hash))
        .expect("report serializes");
    text.push('\n');
    text
}

/// One human-readable line per validation check plus an overall verdict.
pub fn render_validation(summary: &ValidationSummary) -> String {
    let mut out = String::new();
    for check in &summary.checks {
        let verdict = match check.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Skipped => "SKIP",
        };
        let target = check
            .target
            .map(|t| format!("{t:.6}"))
            .unwrap_or_else(|| "-".into());
        let estimate = check
            .estimate
            .map(|e| format!("{e:.6}"))
            .unwrap_or_else(|| "-".into());
        out.push_str(&format!(
            "{:<22} target {:<12} estimate {:<12} tolerance {:<8} {} ({})\n",
            check.name, target, estimate, check.tolerance, verdict, check.detail
        ));
    }
    out.push_str(&format!(
        "k-sweep: {}\n",
        summary
            .k_sweep
            .iter()
            .map(|(k, a)| format!("k={k} alpha={a:.4}"))
            .collect::<Vec<_>>()
            .join("; ")
    ));
    out.push_str(&format!(
        "overall: {}\n",
        if summary.passed { "PASS" } else { "FAIL" }
    ));
    out
}
