//! The representer pipeline: anchor search, nice-subset extraction, the
//! diagonal coefficient solve, minimal-norm assembly with certified norm
//! brackets, and the vector-valued decomposition into scalar solves.

use crate::error::SolverError;
use crate::kernel::KernelContext;
use crate::network::{self, ParamVector};
use crate::signs::{
    self, AdmissibilityVerdict, SignOptions, SignVector,
};
use crate::supnorm::{self, Combination, SearchConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Off-diagonal magnitudes at or below this count as zero for diagonality.
pub const OFF_DIAGONAL_TOL: f64 = 1e-9;
/// Stored Gram entries must re-derive from fresh kernel evaluations to this.
pub const GRAM_REDERIVE_TOL: f64 = 1e-12;
/// Interpolation residual allowed on the solved system.
pub const INTERPOLATION_TOL: f64 = 1e-9;
/// A bracket tighter than this counts as closed for certification.
pub const CERTIFICATION_TOL: f64 = 1e-9;
/// Condition-number ceiling for the Gram solve.
pub const CONDITION_LIMIT: f64 = 1e12;
/// Weight of the off-diagonal penalty in the fallback anchor search.
pub const FALLBACK_PENALTY: f64 = 1e3;
/// Smallest usable diagonal value from a fallback anchor.
pub const ANCHOR_VALUE_FLOOR: f64 = 1e-6;

/// A finite labeled dataset with vector outputs. Inputs are unique: exact
/// duplicates with equal outputs are collapsed, conflicting ones rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    xs: Vec<Vec<f64>>,
    ys: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn new(points: Vec<(Vec<f64>, Vec<f64>)>) -> Result<Self, SolverError> {
        let mut xs: Vec<Vec<f64>> = Vec::new();
        let mut ys: Vec<Vec<f64>> = Vec::new();
        let (s, t) = match points.first() {
            Some((x, y)) => (x.len(), y.len()),
            None => (0, 0),
        };
        for (index, (x, y)) in points.into_iter().enumerate() {
            if x.len() != s {
                return Err(SolverError::InputWidth {
                    index,
                    expected: s,
                    got: x.len(),
                });
            }
            if y.len() != t {
                return Err(SolverError::OutputWidth {
                    index,
                    expected: t,
                    got: y.len(),
                });
            }
            if let Some(prev) = xs.iter().position(|seen| *seen == x) {
                if ys[prev] == y {
                    continue; // collapse exact duplicate
                }
                return Err(SolverError::InconsistentDuplicate {
                    first: prev,
                    second: index,
                });
            }
            xs.push(x);
            ys.push(y);
        }
        Ok(Self { xs, ys })
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.xs.first().map_or(0, Vec::len)
    }

    pub fn output_dim(&self) -> usize {
        self.ys.first().map_or(0, Vec::len)
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.xs
    }

    pub fn outputs(&self) -> &[Vec<f64>] {
        &self.ys
    }

    /// The scalar view of one output component.
    pub fn scalar_targets(&self, component: usize) -> Vec<f64> {
        self.ys.iter().map(|y| y[component]).collect()
    }
}

/// How an anchor was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnchorMethod {
    SelectorTemplate,
    PenalizedSearch,
}

/// A parameter anchoring one data point: its kernel section vanishes (to
/// tolerance) at every other point of the dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Anchor {
    pub theta: ParamVector,
    pub method: AnchorMethod,
    /// Diagonal Gram value k(x_i, theta_i); kept positive by orientation.
    pub diag: f64,
    /// Bracket on |k(x_i, .)|_inf for the anchored point.
    pub sup_lower: f64,
    pub sup_upper: f64,
    pub sup_certified: bool,
    /// Whether the anchor attains the sup norm at its own point, the
    /// norm-attainment condition the diagonal certification rests on.
    pub attaining: bool,
    /// Bracket on the dual norm of point evaluation at theta.
    pub dual_lower: f64,
    pub dual_upper: f64,
}

/// Why a point failed to get an anchor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorFailure {
    pub reason: String,
}

/// Per-point outcome of the anchor search, in dataset order.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorReport {
    pub outcomes: Vec<Result<Anchor, AnchorFailure>>,
}

/// Anchors for the kept (nice) subset, with the Gram matrix over it.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorSet {
    /// Output component the anchors were built for.
    pub component: usize,
    /// Indices into the original dataset, in input order.
    pub indices: Vec<usize>,
    pub anchors: Vec<Anchor>,
    /// `gram[i][j]` = k(x_i, theta_j) over the kept subset.
    pub gram: Vec<Vec<f64>>,
    pub diagonal: bool,
}

impl AnchorSet {
    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.gram[i][i]).collect()
    }
}

/// A point excluded from the nice subset, with the reason.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Excluded {
    pub index: usize,
    pub reason: String,
}

/// Find one anchor per dataset point for the given output component.
///
/// Selector templates are tried first: signed coordinate selectors and the
/// constant selector, accepted when they attain the sup norm at their own
/// point and vanish at all others. Points the templates miss go to a
/// penalized multistart search.
pub fn find_anchors(
    ctx: &KernelContext,
    dataset: &Dataset,
    component: usize,
    cfg: &SearchConfig,
) -> Result<AnchorReport, SolverError> {
    if !dataset.is_empty() && dataset.input_dim() != ctx.arch().input_dim() {
        return Err(SolverError::InputWidth {
            index: 0,
            expected: ctx.arch().input_dim(),
            got: dataset.input_dim(),
        });
    }
    let outcomes = (0..dataset.len())
        .into_par_iter()
        .map(|i| anchor_for_point(ctx, dataset.inputs(), component, i, cfg))
        .collect();
    Ok(AnchorReport { outcomes })
}

fn anchor_for_point(
    ctx: &KernelContext,
    inputs: &[Vec<f64>],
    component: usize,
    i: usize,
    cfg: &SearchConfig,
) -> Result<Anchor, AnchorFailure> {
    let x_i = &inputs[i];
    let sup = ctx.evaluation_sup_norm(x_i, component, cfg);

    // Template candidates, in the order of the worked construction: signed
    // coordinate selectors, then the constant selector.
    let dim = ctx.arch().input_dim();
    let mut templates = Vec::with_capacity(2 * dim + 1);
    for coord in 0..dim {
        for sign in [1.0, -1.0] {
            templates.push(ctx.coordinate_selector(coord, sign, component));
        }
    }
    templates.push(ctx.bias_selector(component));

    for theta in templates {
        let diag = ctx.eval_packed(x_i, &network::pack(&theta), component);
        if !sup.is_certified() || (diag - sup.upper).abs() > GRAM_REDERIVE_TOL {
            continue;
        }
        let off = worst_off_diagonal(ctx, inputs, component, i, &theta);
        if let Some((_, value)) = off {
            if value > OFF_DIAGONAL_TOL {
                continue;
            }
        }
        let dual_lower = (diag / sup.upper).min(1.0);
        return Ok(Anchor {
            theta,
            method: AnchorMethod::SelectorTemplate,
            diag,
            sup_lower: sup.lower,
            sup_upper: sup.upper,
            sup_certified: sup.is_certified(),
            attaining: true,
            dual_lower,
            dual_upper: 1.0,
        });
    }

    // Penalized search: maximize |k(x_i,.)| while pushing the other sections
    // to zero.
    let objective = |flat: &[f64]| {
        let own = ctx.eval_packed(x_i, flat, component).abs();
        let mut penalty = 0.0;
        for (j, x_j) in inputs.iter().enumerate() {
            if j != i {
                penalty += ctx.eval_packed(x_j, flat, component).abs();
            }
        }
        own - FALLBACK_PENALTY * penalty
    };
    let seeds = vec![network::pack(&ctx.selector(x_i, component))];
    let (_, flat) = supnorm::multistart_maximize(ctx.arch(), &objective, &seeds, cfg, 8.0);
    let mut theta = network::unpack(ctx.arch(), &flat).expect("search preserves packed length");
    let mut diag = ctx.eval_packed(x_i, &flat, component);
    if diag < 0.0 {
        negate_output_row(ctx, &mut theta, component);
        diag = -diag;
    }
    if diag <= ANCHOR_VALUE_FLOOR {
        return Err(AnchorFailure {
            reason: format!(
                "templates not norm-attaining or not vanishing elsewhere; search best |k| = {diag:.3e} is below the usable floor"
            ),
        });
    }
    if let Some((j, value)) = worst_off_diagonal(ctx, inputs, component, i, &theta) {
        if value > OFF_DIAGONAL_TOL {
            return Err(AnchorFailure {
                reason: format!(
                    "templates failed and search anchor leaks |k(x_{j},.)| = {value:.3e} above the off-diagonal tolerance"
                ),
            });
        }
    }
    let attaining = sup.is_certified() && (diag - sup.lower).abs() <= CERTIFICATION_TOL;
    let dual_lower = if sup.upper.is_finite() && sup.upper > 0.0 {
        (diag / sup.upper).min(1.0)
    } else {
        0.0
    };
    Ok(Anchor {
        theta,
        method: AnchorMethod::PenalizedSearch,
        diag,
        sup_lower: sup.lower,
        sup_upper: sup.upper,
        sup_certified: sup.is_certified(),
        attaining,
        dual_lower,
        dual_upper: 1.0,
    })
}

fn worst_off_diagonal(
    ctx: &KernelContext,
    inputs: &[Vec<f64>],
    component: usize,
    i: usize,
    theta: &ParamVector,
) -> Option<(usize, f64)> {
    let flat = network::pack(theta);
    inputs
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(j, x)| (j, ctx.eval_packed(x, &flat, component).abs()))
        .max_by(|a, b| a.1.total_cmp(&b.1))
}

/// Flip the sign of the kernel section of `theta` by negating the output row
/// feeding `component`; the parameter norm is unchanged.
fn negate_output_row(ctx: &KernelContext, theta: &mut ParamVector, component: usize) {
    let depth = ctx.arch().depth();
    let cols = ctx.arch().widths()[depth - 1];
    let layer = &mut theta.layers_mut()[depth - 1];
    for w in &mut layer.weights[component * cols..(component + 1) * cols] {
        *w = -*w;
    }
    layer.bias[component] = -layer.bias[component];
}

/// Greedy nice-subset extraction in input order: keep points whose anchor
/// succeeded and whose Gram row/column against the already-kept points stays
/// within the off-diagonal tolerance.
pub fn extract_nice_subset(
    ctx: &KernelContext,
    dataset: &Dataset,
    component: usize,
    report: &AnchorReport,
) -> (AnchorSet, Vec<Excluded>) {
    let mut kept: Vec<usize> = Vec::new();
    let mut anchors: Vec<Anchor> = Vec::new();
    let mut excluded = Vec::new();

    for (i, outcome) in report.outcomes.iter().enumerate() {
        match outcome {
            Err(failure) => excluded.push(Excluded {
                index: i,
                reason: failure.reason.clone(),
            }),
            Ok(anchor) => {
                let flat_i = network::pack(&anchor.theta);
                let mut clash = None;
                for (pos, &j) in kept.iter().enumerate() {
                    let row = ctx
                        .eval_packed(&dataset.inputs()[i], &network::pack(&anchors[pos].theta), component)
                        .abs();
                    let col = ctx
                        .eval_packed(&dataset.inputs()[j], &flat_i, component)
                        .abs();
                    if row > OFF_DIAGONAL_TOL || col > OFF_DIAGONAL_TOL {
                        clash = Some((j, row.max(col)));
                        break;
                    }
                }
                match clash {
                    Some((j, value)) => excluded.push(Excluded {
                        index: i,
                        reason: format!(
                            "off-diagonal entry {value:.3e} against kept point {j} exceeds the tolerance"
                        ),
                    }),
                    None => {
                        kept.push(i);
                        anchors.push(anchor.clone());
                    }
                }
            }
        }
    }

    let flats: Vec<Vec<f64>> = anchors.iter().map(|a| network::pack(&a.theta)).collect();
    let gram: Vec<Vec<f64>> = kept
        .iter()
        .map(|&i| {
            flats
                .iter()
                .map(|flat| ctx.eval_packed(&dataset.inputs()[i], flat, component))
                .collect()
        })
        .collect();
    let n = kept.len();
    let diagonal = (0..n).all(|r| {
        (0..n).all(|c| r == c || gram[r][c].abs() <= OFF_DIAGONAL_TOL)
    });
    (
        AnchorSet {
            component,
            indices: kept,
            anchors,
            gram,
            diagonal,
        },
        excluded,
    )
}

/// Solve M beta^T = y^T by elimination with partial pivoting; diagonal
/// systems reduce to exact division. Errors on singular or ill-conditioned
/// matrices with a condition estimate.
pub fn solve_coefficients(gram: &[Vec<f64>], y: &[f64]) -> Result<Vec<f64>, SolverError> {
    let n = gram.len();
    if gram.iter().any(|row| row.len() != n) {
        return Err(SolverError::NotSquare {
            rows: n,
            cols: gram.iter().map(Vec::len).max().unwrap_or(0),
        });
    }
    if y.len() != n {
        return Err(SolverError::CoefficientLen {
            expected: n,
            got: y.len(),
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }

    let diagonal = (0..n).all(|r| (0..n).all(|c| r == c || gram[r][c].abs() <= OFF_DIAGONAL_TOL));
    if diagonal {
        let mut max_d = 0.0f64;
        let mut min_d = f64::INFINITY;
        for (r, row) in gram.iter().enumerate() {
            let d = row[r].abs();
            if d == 0.0 {
                return Err(SolverError::SingularGram { row: r });
            }
            max_d = max_d.max(d);
            min_d = min_d.min(d);
        }
        let cond = max_d / min_d;
        if cond > CONDITION_LIMIT {
            return Err(SolverError::IllConditioned {
                cond,
                limit: CONDITION_LIMIT,
            });
        }
        return Ok((0..n).map(|r| y[r] / gram[r][r]).collect());
    }

    let lu = LuFactors::new(gram)?;
    let cond = one_norm(gram) * lu.inverse_one_norm();
    if cond > CONDITION_LIMIT {
        return Err(SolverError::IllConditioned {
            cond,
            limit: CONDITION_LIMIT,
        });
    }
    Ok(lu.solve(y))
}

struct LuFactors {
    lu: Vec<Vec<f64>>,
    perm: Vec<usize>,
}

impl LuFactors {
    fn new(m: &[Vec<f64>]) -> Result<Self, SolverError> {
        let n = m.len();
        let mut lu: Vec<Vec<f64>> = m.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let pivot_row = (k..n)
                .max_by(|&a, &b| lu[a][k].abs().total_cmp(&lu[b][k].abs()))
                .unwrap();
            if lu[pivot_row][k].abs() < f64::MIN_POSITIVE {
                return Err(SolverError::SingularGram { row: k });
            }
            lu.swap(k, pivot_row);
            perm.swap(k, pivot_row);
            for r in k + 1..n {
                let factor = lu[r][k] / lu[k][k];
                lu[r][k] = factor;
                for c in k + 1..n {
                    lu[r][c] -= factor * lu[k][c];
                }
            }
        }
        Ok(Self { lu, perm })
    }

    fn solve(&self, y: &[f64]) -> Vec<f64> {
        let n = y.len();
        let mut b: Vec<f64> = self.perm.iter().map(|&p| y[p]).collect();
        for r in 1..n {
            for c in 0..r {
                b[r] -= self.lu[r][c] * b[c];
            }
        }
        for r in (0..n).rev() {
            for c in r + 1..n {
                b[r] -= self.lu[r][c] * b[c];
            }
            b[r] /= self.lu[r][r];
        }
        b
    }

    fn inverse_one_norm(&self) -> f64 {
        let n = self.lu.len();
        let mut worst = 0.0f64;
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let col = self.solve(&e);
            worst = worst.max(col.iter().map(|v| v.abs()).sum());
        }
        worst
    }
}

fn one_norm(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    (0..n)
        .map(|c| m.iter().map(|row| row[c].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// A finite kernel expansion sum_i beta_i k(., theta_i) on one component.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelExpansion {
    pub terms: Vec<(f64, ParamVector)>,
    pub component: usize,
}

impl KernelExpansion {
    /// Evaluate the learned function at an input.
    pub fn evaluate(&self, ctx: &KernelContext, x: &[f64]) -> Result<f64, SolverError> {
        let mut acc = 0.0;
        for (beta, theta) in &self.terms {
            acc += beta * ctx.eval_component(x, theta, self.component)?;
        }
        Ok(acc)
    }
}

/// Whether a solution is certified minimal or merely a candidate interpolant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolutionStatus {
    CertifiedMinimal,
    Candidate,
}

/// A minimal-norm-interpolation solution with its norm bracket.
#[derive(Debug, Clone, PartialEq)]
pub struct MniSolution {
    pub expansion: KernelExpansion,
    pub norm_lower: f64,
    pub norm_upper: f64,
    pub status: SolutionStatus,
    pub witness_sign: Option<SignVector>,
}

/// The sign vector whose admissibility certifies minimality: sign(beta_i)
/// flipped by the orientation of the diagonal entry. Reduces to sign(y) for
/// positive diagonals.
pub fn certification_sign(beta: &[f64], diag: &[f64]) -> SignVector {
    let oriented: Vec<f64> = beta
        .iter()
        .zip(diag)
        .map(|(b, d)| b * d.signum())
        .collect();
    SignVector::signs_of(&oriented)
}

/// Assemble the expansion and its norm bracket from solved coefficients.
///
/// The upper bound is the triangle inequality against the dual norms of the
/// anchors; the lower bound pairs the interpolated values with every
/// certified-admissible sign vector (rescaled sections serve as unit-ball
/// witnesses). When the certification sign is admissible and every anchor
/// attains its sup norm, the bracket closes and the solution is certified
/// minimal.
pub fn assemble_mni(
    anchors: &AnchorSet,
    beta: &[f64],
    targets: &[f64],
    admissible: &[(SignVector, AdmissibilityVerdict)],
    opts: &SignOptions,
) -> MniSolution {
    let expansion = KernelExpansion {
        terms: beta
            .iter()
            .zip(&anchors.anchors)
            .map(|(b, a)| (*b, a.theta.clone()))
            .collect(),
        component: anchors.component,
    };

    let norm_upper: f64 = beta
        .iter()
        .zip(&anchors.anchors)
        .map(|(b, a)| b.abs() * a.dual_upper)
        .sum();

    let scales: Vec<f64> = anchors
        .anchors
        .iter()
        .map(|a| {
            if opts.scaled_witnesses && a.sup_upper.is_finite() && a.sup_upper > 0.0 {
                1.0 / a.sup_upper
            } else {
                1.0
            }
        })
        .collect();
    let mut norm_lower = 0.0f64;
    for (sign, verdict) in admissible {
        if !verdict.is_certified_admissible() {
            continue;
        }
        let pairing: f64 = sign
            .entries()
            .iter()
            .zip(targets)
            .zip(&scales)
            .map(|((&s, y), c)| s as f64 * y * c)
            .sum();
        norm_lower = norm_lower.max(pairing.abs());
    }

    let witness = certification_sign(beta, &anchors.diag());
    let witness_admissible = admissible
        .iter()
        .any(|(s, v)| s == &witness && v.is_certified_admissible());
    let all_attaining = anchors.anchors.iter().all(|a| a.attaining);
    let certified = anchors.diagonal
        && witness_admissible
        && all_attaining
        && norm_upper - norm_lower <= CERTIFICATION_TOL;

    MniSolution {
        expansion,
        norm_lower,
        norm_upper,
        status: if certified {
            SolutionStatus::CertifiedMinimal
        } else {
            SolutionStatus::Candidate
        },
        witness_sign: if witness_admissible { Some(witness) } else { None },
    }
}

/// One per-condition check of the finite-representer characterization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepresenterReport {
    /// The verified witness vector.
    pub alpha: Vec<f64>,
    /// The witness combination lies in the unit ball.
    pub unit_ball_ok: bool,
    pub unit_ball_upper: f64,
    /// alpha M beta reaches the expansion norm.
    pub attains_ok: bool,
    pub attains_gap: f64,
    /// The interpolation system holds.
    pub interpolation_ok: bool,
    pub interpolation_residual: f64,
}

impl RepresenterReport {
    pub fn all_pass(&self) -> bool {
        self.unit_ball_ok && self.attains_ok && self.interpolation_ok
    }
}

/// Check the three representer conditions numerically for a candidate
/// witness vector alpha.
pub fn verify_representer(
    ctx: &KernelContext,
    expansion: &KernelExpansion,
    alpha: &[f64],
    inputs: &[Vec<f64>],
    targets: &[f64],
    cfg: &SearchConfig,
) -> Result<RepresenterReport, SolverError> {
    if alpha.len() != inputs.len() || targets.len() != inputs.len() {
        return Err(SolverError::CoefficientLen {
            expected: inputs.len(),
            got: alpha.len().max(targets.len()),
        });
    }

    let comb = Combination::new(
        alpha
            .iter()
            .zip(inputs)
            .map(|(a, x)| (*a, x.clone()))
            .collect(),
        expansion.component,
    );
    let est = supnorm::estimate_sup(ctx, &comb, cfg);
    let unit_ball_ok = est.upper <= 1.0 + cfg.tolerance;

    let flats: Vec<Vec<f64>> = expansion
        .terms
        .iter()
        .map(|(_, theta)| network::pack(theta))
        .collect();
    let gram: Vec<Vec<f64>> = inputs
        .iter()
        .map(|x| {
            flats
                .iter()
                .map(|flat| ctx.eval_packed(x, flat, expansion.component))
                .collect()
        })
        .collect();

    let mut attained = 0.0;
    for (i, a) in alpha.iter().enumerate() {
        for (j, (b, _)) in expansion.terms.iter().enumerate() {
            attained += a * gram[i][j] * b;
        }
    }
    let norm_upper: f64 = expansion.terms.iter().map(|(b, _)| b.abs()).sum();
    let attains_gap = norm_upper - attained;
    let attains_ok = attains_gap <= cfg.tolerance;

    let mut interpolation_residual = 0.0f64;
    for (i, y) in targets.iter().enumerate() {
        let mut predicted = 0.0;
        for (j, (b, _)) in expansion.terms.iter().enumerate() {
            predicted += gram[i][j] * b;
        }
        interpolation_residual = interpolation_residual.max((predicted - y).abs());
    }
    let interpolation_ok = interpolation_residual <= INTERPOLATION_TOL;

    Ok(RepresenterReport {
        alpha: alpha.to_vec(),
        unit_ball_ok,
        unit_ball_upper: est.upper,
        attains_ok,
        attains_gap,
        interpolation_ok,
        interpolation_residual,
    })
}

/// Options for the minimal-norm stage.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MniOptions {
    pub search: SearchConfig,
    pub signs: SignOptions,
}

/// Everything the scalar minimal-norm stage produces for one component.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSolve {
    pub component: usize,
    pub anchor_report: AnchorReport,
    pub excluded: Vec<Excluded>,
    pub anchors: AnchorSet,
    /// Targets over the kept subset, in kept order.
    pub targets: Vec<f64>,
    pub beta: Vec<f64>,
    pub admissible: Vec<(SignVector, AdmissibilityVerdict)>,
    pub mni: MniSolution,
    pub representer: RepresenterReport,
}

/// Run the scalar pipeline for one output component: anchors, nice subset,
/// coefficients, admissible set, assembly, and the representer check.
pub fn solve_scalar(
    ctx: &KernelContext,
    dataset: &Dataset,
    component: usize,
    opts: &MniOptions,
) -> Result<ScalarSolve, SolverError> {
    if dataset.is_empty() {
        return Err(SolverError::EmptyDataset);
    }
    let report = find_anchors(ctx, dataset, component, &opts.search)?;
    let (anchors, excluded) = extract_nice_subset(ctx, dataset, component, &report);
    if anchors.is_empty() {
        let details = excluded
            .iter()
            .map(|e| format!("point {}: {}", e.index, e.reason))
            .collect::<Vec<_>>()
            .join("\n");
        return Err(SolverError::NoAnchors { details });
    }
    let kept_inputs: Vec<Vec<f64>> = anchors
        .indices
        .iter()
        .map(|&i| dataset.inputs()[i].clone())
        .collect();
    let targets: Vec<f64> = anchors
        .indices
        .iter()
        .map(|&i| dataset.outputs()[i][component])
        .collect();

    let beta = solve_coefficients(&anchors.gram, &targets)?;
    let admissible =
        signs::enumerate_admissible(ctx, &kept_inputs, component, &opts.signs, &opts.search)?;
    let mni = assemble_mni(&anchors, &beta, &targets, &admissible, &opts.signs);

    let scales = signs::section_scales(ctx, &kept_inputs, &opts.signs);
    let witness = certification_sign(&beta, &anchors.diag());
    let alpha: Vec<f64> = witness
        .entries()
        .iter()
        .zip(&scales)
        .map(|(&s, c)| s as f64 * c)
        .collect();
    let representer =
        verify_representer(ctx, &mni.expansion, &alpha, &kept_inputs, &targets, &opts.search)?;

    Ok(ScalarSolve {
        component,
        anchor_report: report,
        excluded,
        anchors,
        targets,
        beta,
        admissible,
        mni,
        representer,
    })
}

/// Combined outcome of the component-wise decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorSolve {
    pub components: Vec<ScalarSolve>,
    /// Sum of the per-component brackets: the product-space norm.
    pub norm_lower: f64,
    pub norm_upper: f64,
    pub status: SolutionStatus,
}

impl VectorSolve {
    /// Evaluate all components of the learned function.
    pub fn evaluate(&self, ctx: &KernelContext, x: &[f64]) -> Result<Vec<f64>, SolverError> {
        self.components
            .iter()
            .map(|c| c.mni.expansion.evaluate(ctx, x))
            .collect()
    }
}

/// Train every output component independently and combine the brackets.
pub fn solve_vector_valued(
    ctx: &KernelContext,
    dataset: &Dataset,
    opts: &MniOptions,
) -> Result<VectorSolve, SolverError> {
    if dataset.is_empty() {
        return Err(SolverError::EmptyDataset);
    }
    let t = ctx.arch().output_dim();
    let components: Vec<ScalarSolve> = (0..t)
        .into_par_iter()
        .map(|c| solve_scalar(ctx, dataset, c, opts))
        .collect::<Result<_, _>>()?;
    let norm_lower = components.iter().map(|c| c.mni.norm_lower).sum();
    let norm_upper = components.iter().map(|c| c.mni.norm_upper).sum();
    let status = if components
        .iter()
        .all(|c| c.mni.status == SolutionStatus::CertifiedMinimal)
    {
        SolutionStatus::CertifiedMinimal
    } else {
        SolutionStatus::Candidate
    };
    Ok(VectorSolve {
        components,
        norm_lower,
        norm_upper,
        status,
    })
}
