//! Analysis report: one JSON document on standard output, a
//! human-readable summary on standard error unless --quiet.

use bellcheck::criterion::{Guarantee, TestOutcome, ViolationCertificate};
use serde::Serialize;

use crate::input::StateSpec;

/// Numbers in the human summary carry 12 significant digits.
pub fn sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-4..12).contains(&magnitude) {
        format!("{x:.11e}")
    } else {
        format!("{:.*}", (11 - magnitude).max(0) as usize, x)
    }
}

#[derive(Serialize)]
pub struct Report {
    pub input: StateSpec,
    pub options: EchoedOptions,
    pub tensor: TensorSummary,
    pub general: GeneralSection,
    pub criteria: Vec<CriterionSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub werner: Option<WernerSection>,
    pub lhv: LhvSection,
    pub violated: bool,
    pub timings_ms: Timings,
}

#[derive(Serialize)]
pub struct EchoedOptions {
    pub restarts: usize,
    pub seed: u64,
    pub tol: f64,
    pub criteria: Vec<String>,
}

#[derive(Serialize)]
pub struct TensorSummary {
    pub n_qubits: usize,
    pub nonzero_components: Vec<TensorComponent>,
}

#[derive(Serialize)]
pub struct TensorComponent {
    pub axes: Vec<usize>,
    pub value: f64,
}

#[derive(Serialize)]
pub struct GeneralSection {
    /// "given" when --settings supplied the directions, else
    /// "optimized" (the tmod certificate's settings).
    pub settings_source: &'static str,
    pub settings: Vec<[[f64; 3]; 2]>,
    pub table: Vec<f64>,
    pub value: f64,
    pub bound: f64,
}

#[derive(Serialize)]
pub struct CriterionSection {
    pub id: String,
    pub guarantee: &'static str,
    pub value: f64,
    pub threshold: f64,
    pub verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateSection>,
}

#[derive(Serialize)]
pub struct CertificateSection {
    pub value: f64,
    pub frame: Vec<[[f64; 3]; 3]>,
    pub c_vectors: Vec<[f64; 2]>,
    pub settings: Vec<[[f64; 3]; 2]>,
    pub converged: bool,
    pub restarts_used: usize,
}

#[derive(Serialize)]
pub struct WernerSection {
    pub v: f64,
    pub threshold: f64,
    pub exceeds_threshold: bool,
}

#[derive(Serialize)]
pub struct LhvSection {
    pub exists: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_weight: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sectors: Option<Vec<SectorSummary>>,
    /// General-inequality value and bound, echoed when no model exists.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
}

#[derive(Serialize)]
pub struct SectorSummary {
    /// Hidden outcome signs s_j, observer 1 first.
    pub signs: Vec<i8>,
    pub probability: f64,
    pub sign: i8,
}

#[derive(Serialize)]
pub struct Timings {
    pub tensor: f64,
    pub analysis: f64,
    pub total: f64,
}

pub fn guarantee_name(g: Guarantee) -> &'static str {
    match g {
        Guarantee::NecessaryAndSufficient => "necessary-and-sufficient",
        Guarantee::SufficientForLocality => "sufficient-for-locality",
        Guarantee::WitnessOnly => "witness-only",
    }
}

pub fn certificate_section(cert: &ViolationCertificate) -> CertificateSection {
    CertificateSection {
        value: cert.value,
        frame: cert.frame.triads().to_vec(),
        c_vectors: cert.c_vectors.components().to_vec(),
        settings: cert.settings.directions().to_vec(),
        converged: cert.converged,
        restarts_used: cert.restarts_used,
    }
}

pub fn criterion_section(outcome: &TestOutcome, guarantee: Guarantee) -> CriterionSection {
    CriterionSection {
        id: outcome.id.to_string(),
        guarantee: guarantee_name(guarantee),
        value: outcome.value,
        threshold: outcome.threshold,
        verdict: outcome.verdict.as_str(),
        certificate: outcome.certificate.as_ref().map(certificate_section),
    }
}

pub fn print_summary(report: &Report) {
    eprintln!(
        "state: {} on {} qubits",
        report.input.kind_name(),
        report.input.n_qubits
    );
    eprintln!(
        "tensor: {} components above 1e-10",
        report.tensor.nonzero_components.len()
    );
    eprintln!(
        "general inequality at {} settings: {} against bound {}",
        report.general.settings_source,
        sig12(report.general.value),
        sig12(report.general.bound)
    );
    for c in &report.criteria {
        eprintln!(
            "{}: {} vs threshold {} ({}, {})",
            c.id,
            sig12(c.value),
            sig12(c.threshold),
            c.verdict,
            c.guarantee
        );
    }
    if let Some(w) = &report.werner {
        eprintln!(
            "werner weight {} vs threshold {}: {}",
            sig12(w.v),
            sig12(w.threshold),
            if w.exceeds_threshold {
                "above, nonlocal"
            } else {
                "at or below, local model exists"
            }
        );
    }
    if report.lhv.exists {
        eprintln!(
            "local model: {} sectors, noise weight {}",
            report.lhv.sectors.as_ref().map_or(0, |s| s.len()),
            sig12(report.lhv.noise_weight.unwrap_or(0.0))
        );
    } else {
        eprintln!(
            "local model: none at these settings ({} > {})",
            sig12(report.lhv.value.unwrap_or(f64::NAN)),
            sig12(report.lhv.bound.unwrap_or(f64::NAN))
        );
    }
    eprintln!(
        "verdict: {}",
        if report.violated {
            "violated"
        } else {
            "no violation found"
        }
    );
}
