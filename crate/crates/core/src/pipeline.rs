//! End-to-end solve: anchors, nice subset, coefficients, admissible set,
//! norm bracket, regularization sweep, and selection, per output component.

use crate::error::SolverError;
use crate::kernel::KernelContext;
use crate::regularizer::{self, Decision, OrthantResult, RegConfig};
use crate::signs::{SignOptions, SignVector};
use crate::solver::{self, Dataset, MniOptions, ScalarSolve, SolutionStatus};
use crate::supnorm::SearchConfig;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Options for the full pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineOptions {
    pub search: SearchConfig,
    pub signs: SignOptions,
    pub reg: RegConfig,
    /// Let uncertified sign vectors join the sweep.
    pub include_uncertified_signs: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            search: SearchConfig::default(),
            signs: SignOptions::default(),
            reg: RegConfig::new(0.1).expect("default lambda0 is positive"),
            include_uncertified_signs: false,
        }
    }
}

impl PipelineOptions {
    pub fn mni_options(&self) -> MniOptions {
        MniOptions {
            search: self.search,
            signs: self.signs,
        }
    }
}

/// One component's full run: the minimal-norm stage plus the sweep and the
/// final decision.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentRun {
    pub scalar: ScalarSolve,
    pub sweep: Vec<OrthantResult>,
    pub r_interval: (f64, f64),
    pub decision: Decision,
}

/// The whole solve across components.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveRun {
    pub components: Vec<ComponentRun>,
    pub norm_lower: f64,
    pub norm_upper: f64,
    pub status: SolutionStatus,
}

/// Run one output component end to end.
pub fn run_component(
    ctx: &KernelContext,
    dataset: &Dataset,
    component: usize,
    opts: &PipelineOptions,
) -> Result<ComponentRun, SolverError> {
    let scalar = solver::solve_scalar(ctx, dataset, component, &opts.mni_options())?;

    let mut sweep_signs: Vec<SignVector> = scalar
        .admissible
        .iter()
        .filter(|(_, v)| {
            v.is_certified_admissible()
                || (opts.include_uncertified_signs && !v.is_certified_inadmissible())
        })
        .map(|(s, _)| s.clone())
        .collect();
    sweep_signs.sort();

    let diag = scalar.anchors.diag();
    let anchor_norms: Vec<f64> = scalar.anchors.anchors.iter().map(|a| a.dual_upper).collect();
    let sweep = regularizer::sweep(
        &sweep_signs,
        &scalar.beta,
        &diag,
        &anchor_norms,
        scalar.anchors.len(),
        &opts.reg,
    )?;
    let r_interval = regularizer::r_interval_unregularized(&scalar.mni, &opts.reg);
    let decision = regularizer::select(sweep.first(), r_interval);

    Ok(ComponentRun {
        scalar,
        sweep,
        r_interval,
        decision,
    })
}

/// Run every output component and combine the norm brackets.
pub fn run(
    ctx: &KernelContext,
    dataset: &Dataset,
    opts: &PipelineOptions,
) -> Result<SolveRun, SolverError> {
    if dataset.is_empty() {
        return Err(SolverError::EmptyDataset);
    }
    let t = ctx.arch().output_dim();
    let components: Vec<ComponentRun> = (0..t)
        .into_par_iter()
        .map(|c| run_component(ctx, dataset, c, opts))
        .collect::<Result<_, _>>()?;
    let norm_lower = components.iter().map(|c| c.scalar.mni.norm_lower).sum();
    let norm_upper = components.iter().map(|c| c.scalar.mni.norm_upper).sum();
    let status = if components
        .iter()
        .all(|c| c.scalar.mni.status == SolutionStatus::CertifiedMinimal)
    {
        SolutionStatus::CertifiedMinimal
    } else {
        SolutionStatus::Candidate
    };
    Ok(SolveRun {
        components,
        norm_lower,
        norm_upper,
        status,
    })
}
