//! Solution reports: a complete, re-derivable record of one solve, with a
//! pinned schema version. Field order is fixed by the struct definitions, so
//! identical runs serialize to identical bytes.

use crate::error::ConfigError;
use crate::network;
use crate::pipeline::{ComponentRun, PipelineOptions, SolveRun};
use crate::regularizer::Decision;
use crate::signs::AdmissibilityVerdict;
use crate::solver::{AnchorMethod, SolutionStatus};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionReport {
    pub schema_version: u32,
    pub config: ConfigEcho,
    pub components: Vec<ComponentReport>,
    pub combined: CombinedReport,
    pub provenance: Provenance,
}

/// The resolved configuration the run actually used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigEcho {
    pub layers: Vec<usize>,
    pub activation: String,
    pub output_activation_applied: bool,
    pub decay_exponent: f64,
    pub seed: u64,
    pub starts: usize,
    pub iters: usize,
    pub tol: f64,
    pub tail_margin: f64,
    pub lambda0: f64,
    pub include_uncertified_signs: bool,
    pub scaled_witnesses: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub version: String,
    pub seed: u64,
    pub wall_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentReport {
    pub component: usize,
    pub anchors: Vec<AnchorRecord>,
    pub excluded: Vec<ExcludedRecord>,
    pub gram: Vec<Vec<f64>>,
    pub beta: Vec<f64>,
    pub norm_bracket: [f64; 2],
    pub status: String,
    pub witness_sign: Option<Vec<i8>>,
    pub representer: RepresenterRecord,
    pub admissible: Vec<AdmissibleRecord>,
    pub sweep: Vec<SweepRecord>,
    pub r_interval: [f64; 2],
    pub decision: Decision,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnchorRecord {
    /// Index of the anchored point in the original dataset.
    pub index: usize,
    /// Packed parameter vector.
    pub theta: Vec<f64>,
    pub method: String,
    pub diag: f64,
    pub sup_bracket: [f64; 2],
    pub attaining: bool,
    pub dual_bracket: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExcludedRecord {
    pub index: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepresenterRecord {
    pub alpha: Vec<f64>,
    pub unit_ball_ok: bool,
    pub unit_ball_upper: f64,
    pub attains_ok: bool,
    pub attains_gap: f64,
    pub interpolation_ok: bool,
    pub interpolation_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdmissibleRecord {
    pub sign: Vec<i8>,
    pub verdict: String,
    pub certificate: Option<String>,
    /// Packed disproving parameter, for inadmissible verdicts.
    pub witness: Option<Vec<f64>>,
    pub value: Option<f64>,
    pub bracket: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRecord {
    pub sign: Vec<i8>,
    pub epsilon: Vec<f64>,
    pub coefficients: Vec<f64>,
    pub r_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CombinedReport {
    pub norm_bracket: [f64; 2],
    pub status: String,
}

fn status_name(status: SolutionStatus) -> String {
    match status {
        SolutionStatus::CertifiedMinimal => "certified-minimal".into(),
        SolutionStatus::Candidate => "candidate".into(),
    }
}

fn method_name(method: AnchorMethod) -> String {
    match method {
        AnchorMethod::SelectorTemplate => "selector-template".into(),
        AnchorMethod::PenalizedSearch => "penalized-search".into(),
    }
}

fn component_report(run: &ComponentRun) -> ComponentReport {
    let scalar = &run.scalar;
    let anchors = scalar
        .anchors
        .anchors
        .iter()
        .zip(&scalar.anchors.indices)
        .map(|(a, &index)| AnchorRecord {
            index,
            theta: network::pack(&a.theta),
            method: method_name(a.method),
            diag: a.diag,
            sup_bracket: [a.sup_lower, a.sup_upper],
            attaining: a.attaining,
            dual_bracket: [a.dual_lower, a.dual_upper],
        })
        .collect();
    let excluded = scalar
        .excluded
        .iter()
        .map(|e| ExcludedRecord {
            index: e.index,
            reason: e.reason.clone(),
        })
        .collect();
    let admissible = scalar
        .admissible
        .iter()
        .map(|(sign, verdict)| {
            let mut record = AdmissibleRecord {
                sign: sign.entries().to_vec(),
                verdict: verdict.kind().into(),
                certificate: None,
                witness: None,
                value: None,
                bracket: None,
            };
            match verdict {
                AdmissibilityVerdict::CertifiedAdmissible(cert) => {
                    record.certificate = Some(cert.name().into());
                }
                AdmissibilityVerdict::CertifiedInadmissible { witness, value } => {
                    record.witness = Some(network::pack(witness));
                    record.value = Some(*value);
                }
                AdmissibilityVerdict::Uncertified(est) => {
                    record.bracket = Some([est.lower, est.upper]);
                }
            }
            record
        })
        .collect();
    let sweep = run
        .sweep
        .iter()
        .map(|o| SweepRecord {
            sign: o.sign.entries().to_vec(),
            epsilon: o.epsilon.clone(),
            coefficients: o.coefficients.clone(),
            r_value: o.r_value,
        })
        .collect();
    ComponentReport {
        component: scalar.component,
        anchors,
        excluded,
        gram: scalar.anchors.gram.clone(),
        beta: scalar.beta.clone(),
        norm_bracket: [scalar.mni.norm_lower, scalar.mni.norm_upper],
        status: status_name(scalar.mni.status),
        witness_sign: scalar.mni.witness_sign.as_ref().map(|s| s.entries().to_vec()),
        representer: RepresenterRecord {
            alpha: scalar.representer.alpha.clone(),
            unit_ball_ok: scalar.representer.unit_ball_ok,
            unit_ball_upper: scalar.representer.unit_ball_upper,
            attains_ok: scalar.representer.attains_ok,
            attains_gap: scalar.representer.attains_gap,
            interpolation_ok: scalar.representer.interpolation_ok,
            interpolation_residual: scalar.representer.interpolation_residual,
        },
        admissible,
        sweep,
        r_interval: [run.r_interval.0, run.r_interval.1],
        decision: run.decision.clone(),
    }
}

impl SolutionReport {
    pub fn build(
        config: ConfigEcho,
        run: &SolveRun,
        wall_ms: u64,
    ) -> Self {
        let seed = config.seed;
        Self {
            schema_version: SCHEMA_VERSION,
            components: run.components.iter().map(component_report).collect(),
            combined: CombinedReport {
                norm_bracket: [run.norm_lower, run.norm_upper],
                status: status_name(run.status),
            },
            config,
            provenance: Provenance {
                version: env!("CARGO_PKG_VERSION").into(),
                seed,
                wall_ms,
            },
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let report: SolutionReport = serde_json::from_str(text)?;
        if report.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::SchemaVersion {
                expected: SCHEMA_VERSION,
                got: report.schema_version,
            });
        }
        Ok(report)
    }

    /// Serialization with the wall-clock field zeroed, for byte comparisons.
    pub fn canonical_json(&self) -> String {
        let mut clone = self.clone();
        clone.provenance.wall_ms = 0;
        clone.to_json()
    }
}

/// Echo assembled from the resolved context and options.
pub fn config_echo(
    ctx: &crate::kernel::KernelContext,
    opts: &PipelineOptions,
) -> ConfigEcho {
    ConfigEcho {
        layers: ctx.arch().widths().to_vec(),
        activation: match ctx.arch().activation() {
            crate::network::Activation::Relu => "relu".into(),
            crate::network::Activation::Identity => "identity".into(),
        },
        output_activation_applied: ctx.arch().output_activation_applied(),
        decay_exponent: ctx.decay().exponent(),
        seed: opts.search.seed,
        starts: opts.search.starts,
        iters: opts.search.iters,
        tol: opts.search.tolerance,
        tail_margin: opts.search.tail_margin,
        lambda0: opts.reg.lambda0,
        include_uncertified_signs: opts.include_uncertified_signs,
        scaled_witnesses: opts.signs.scaled_witnesses,
    }
}
