//! Bracketing |g|_inf over the parameter space for finite kernel combinations
//! g(theta) = sum_i alpha_i k(x_i, theta).
//!
//! Lower bounds come from deterministic probes plus a multistart compass
//! search on the packed parameter vector (the kernel is piecewise smooth, so
//! no gradients). Upper bounds come from the analytic decay certificates.
//! Everything is deterministic for a fixed seed, independent of how many
//! threads run the starts.

use crate::error::SupNormError;
use crate::kernel::{input_bound_value, KernelContext};
use crate::network::{self, ParamVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Tolerance band for unit-ball membership checks; raw equality against 1
/// would reject probes whose analytic bound is 1 up to a rounding ulp.
pub const PROBE_TOL: f64 = 1e-12;

/// A finite combination sum_i alpha_i k(x_i, .), restricted to one output
/// component. Zero-coefficient terms are dropped on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Combination {
    terms: Vec<(f64, Vec<f64>)>,
    component: usize,
}

impl Combination {
    pub fn new(terms: Vec<(f64, Vec<f64>)>, component: usize) -> Self {
        let terms = terms.into_iter().filter(|(a, _)| *a != 0.0).collect();
        Self { terms, component }
    }

    pub fn terms(&self) -> &[(f64, Vec<f64>)] {
        &self.terms
    }

    pub fn component(&self) -> usize {
        self.component
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// g(theta) on a packed parameter slice.
    pub fn eval_packed(&self, ctx: &KernelContext, flat: &[f64]) -> f64 {
        let xi = ctx.xi_packed(flat);
        let mut acc = 0.0;
        for (alpha, x) in &self.terms {
            let out = network::forward_packed(ctx.arch(), flat, x);
            acc += alpha * out[self.component];
        }
        acc * xi
    }

    pub fn eval(&self, ctx: &KernelContext, theta: &ParamVector) -> f64 {
        self.eval_packed(ctx, &network::pack(theta))
    }
}

/// Search budget and tolerances for the sup-norm estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub seed: u64,
    pub starts: usize,
    pub iters: usize,
    pub tail_margin: f64,
    pub tolerance: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            starts: 256,
            iters: 400,
            tail_margin: 1e-6,
            tolerance: 1e-9,
        }
    }
}

/// Certification status of a bracket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimateStatus {
    CertifiedExact,
    Bracketed,
}

/// A bracket [lower, upper] on a sup norm, with the parameter achieving the
/// lower bound.
#[derive(Debug, Clone, PartialEq)]
pub struct SupNormEstimate {
    pub lower: f64,
    pub upper: f64,
    pub witness: ParamVector,
    pub status: EstimateStatus,
}

impl SupNormEstimate {
    pub fn certified(value: f64, witness: ParamVector) -> Self {
        Self {
            lower: value,
            upper: value,
            witness,
            status: EstimateStatus::CertifiedExact,
        }
    }

    pub fn is_certified(&self) -> bool {
        self.status == EstimateStatus::CertifiedExact
    }
}

/// Analytic upper bound on |g|_inf.
///
/// Takes the smaller of the triangle-inequality bound sum |alpha_i| C(x_i)
/// and, for a plain difference of two sections on the depth-2 ReLU family,
/// the pairwise bound max{|x|_inf, |x~|_inf, 1}.
pub fn analytic_upper(ctx: &KernelContext, comb: &Combination) -> Result<f64, SupNormError> {
    if !ctx.certificates_available() {
        return Err(SupNormError::CertificationUnavailable {
            exponent: ctx.decay().exponent(),
            required: (ctx.arch().depth() + 1) as f64,
        });
    }
    if comb.is_zero() {
        return Ok(0.0);
    }
    let mut bound = 0.0;
    for (alpha, x) in comb.terms() {
        bound += alpha.abs() * input_bound_value(x);
    }
    if let Some(pairwise) = pairwise_bound(ctx, comb) {
        bound = bound.min(pairwise);
    }
    Ok(bound)
}

/// The depth-2 pairwise-difference bound, when it applies.
fn pairwise_bound(ctx: &KernelContext, comb: &Combination) -> Option<f64> {
    let arch = ctx.arch();
    let family_ok = arch.depth() == 2
        && arch.activation() == network::Activation::Relu
        && !arch.output_activation_applied();
    if !family_ok || comb.terms().len() != 2 {
        return None;
    }
    let (a0, x0) = &comb.terms()[0];
    let (a1, x1) = &comb.terms()[1];
    let plain_difference = (*a0 == 1.0 && *a1 == -1.0) || (*a0 == -1.0 && *a1 == 1.0);
    if !plain_difference {
        return None;
    }
    Some(input_bound_value(x0).max(input_bound_value(x1)))
}

/// Bracket |g|_inf: probes and multistart compass search below, analytic
/// certificates above.
pub fn estimate_sup(ctx: &KernelContext, comb: &Combination, cfg: &SearchConfig) -> SupNormEstimate {
    let arch = ctx.arch();
    if comb.is_zero() {
        return SupNormEstimate::certified(0.0, ParamVector::zeros(arch));
    }

    let probes = probe_points(ctx, comb);
    let objective = |flat: &[f64]| comb.eval_packed(ctx, flat).abs();
    let probe_best = best_over(&objective, probes.iter().map(|p| p.as_slice()));

    let radius = if ctx.certificates_available() {
        let c_total: f64 = comb
            .terms()
            .iter()
            .map(|(a, x)| a.abs() * input_bound_value(x))
            .sum();
        tail_radius(c_total, probe_best.0, cfg.tail_margin)
    } else {
        // No decay certificate: search a fixed generous ball.
        8.0
    };

    let searched = multistart_maximize(arch, &objective, &probes, cfg, radius);
    let (lower, witness_flat) = better(probe_best, searched);

    let upper = analytic_upper(ctx, comb).unwrap_or(f64::INFINITY);
    let status = if upper.is_finite() && upper - lower <= cfg.tolerance {
        EstimateStatus::CertifiedExact
    } else {
        EstimateStatus::Bracketed
    };
    SupNormEstimate {
        lower,
        upper: upper.max(lower),
        witness: network::unpack(arch, &witness_flat).expect("witness has packed length"),
        status,
    }
}

/// Sound truncation radius: outside the ball of this radius the decay bound
/// keeps |g| below the lower bound already in hand. The margin is applied
/// relative to the bound so the radius is invariant under scaling the
/// combination.
fn tail_radius(c_total: f64, lower: f64, tail_margin: f64) -> f64 {
    if c_total <= 0.0 {
        return 2.0;
    }
    let floor = (c_total / 64.0).max(lower * (1.0 - tail_margin));
    (c_total / floor).clamp(2.0, 64.0)
}

/// Deterministic starting candidates: the constant selector, the attaining
/// selector of every term, and every signed coordinate selector.
fn probe_points(ctx: &KernelContext, comb: &Combination) -> Vec<Vec<f64>> {
    let component = comb.component();
    let mut probes = vec![network::pack(&ctx.bias_selector(component))];
    for (_, x) in comb.terms() {
        probes.push(network::pack(&ctx.selector(x, component)));
    }
    for coord in 0..ctx.arch().input_dim() {
        for sign in [1.0, -1.0] {
            probes.push(network::pack(&ctx.coordinate_selector(coord, sign, component)));
        }
    }
    probes
}

fn best_over<'a, F: Fn(&[f64]) -> f64>(
    objective: &F,
    points: impl Iterator<Item = &'a [f64]>,
) -> (f64, Vec<f64>) {
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for p in points {
        let v = objective(p);
        best = better(best, (v, p.to_vec()));
    }
    best
}

/// Order-independent max with ties broken toward the lexicographically
/// smaller packed witness, so parallel folds agree with serial ones.
fn better(a: (f64, Vec<f64>), b: (f64, Vec<f64>)) -> (f64, Vec<f64>) {
    match a.0.total_cmp(&b.0) {
        std::cmp::Ordering::Greater => a,
        std::cmp::Ordering::Less => b,
        std::cmp::Ordering::Equal => {
            for (x, y) in a.1.iter().zip(b.1.iter()) {
                match x.total_cmp(y) {
                    std::cmp::Ordering::Less => return a,
                    std::cmp::Ordering::Greater => return b,
                    std::cmp::Ordering::Equal => {}
                }
            }
            a
        }
    }
}

/// Multistart compass search maximizing `objective` over the ball
/// param_norm(theta) <= radius. Per-start RNG streams are derived from
/// (seed, start index), so the result set does not depend on scheduling.
pub(crate) fn multistart_maximize<F>(
    arch: &network::Architecture,
    objective: &F,
    extra_starts: &[Vec<f64>],
    cfg: &SearchConfig,
    radius: f64,
) -> (f64, Vec<f64>)
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let dim = arch.param_len();
    let refine_extra = extra_starts
        .par_iter()
        .map(|p| compass_search(arch, objective, p.clone(), radius, cfg.iters));
    let random = (0..cfg.starts).into_par_iter().map(|j| {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_stream(cfg.seed, j as u64));
        let start = random_start(arch, &mut rng, j, radius, dim);
        compass_search(arch, objective, start, radius, cfg.iters)
    });
    refine_extra
        .chain(random)
        .reduce(|| (f64::NEG_INFINITY, Vec::new()), better)
}

/// SplitMix64-style stream derivation; counter-based so streams are
/// independent of evaluation order.
fn mix_stream(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Radii favor the unit sphere, where the decay weight transitions and the
/// attaining parameters tend to live.
const RADIUS_SCHEDULE: [f64; 8] = [1.0, 0.5, 1.0, 2.0, 0.75, 1.0, 1.5, 0.25];

fn random_start(
    arch: &network::Architecture,
    rng: &mut ChaCha8Rng,
    index: usize,
    radius: f64,
    dim: usize,
) -> Vec<f64> {
    let mut dir: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let norm = network::param_norm_packed(arch, &dir);
    if norm < 1e-12 {
        return vec![0.0; dim];
    }
    let base = RADIUS_SCHEDULE[index % RADIUS_SCHEDULE.len()];
    let r = if index % 16 == 15 {
        rng.random_range(0.0..1.0) * radius
    } else {
        base.min(radius)
    };
    for v in &mut dir {
        *v *= r / norm;
    }
    dir
}

/// Coordinate pattern search: full poll over +-delta moves per coordinate,
/// halving the step when no move improves.
fn compass_search<F: Fn(&[f64]) -> f64>(
    arch: &network::Architecture,
    objective: &F,
    start: Vec<f64>,
    radius: f64,
    iters: usize,
) -> (f64, Vec<f64>) {
    let mut point = start;
    let mut value = objective(&point);
    let start_norm = network::param_norm_packed(arch, &point);
    let mut delta = 0.25 * start_norm.max(1.0);
    let mut candidate = point.clone();
    for _ in 0..iters {
        let mut best_move: Option<(f64, usize, f64)> = None;
        for i in 0..point.len() {
            for step in [delta, -delta] {
                candidate.copy_from_slice(&point);
                candidate[i] += step;
                if network::param_norm_packed(arch, &candidate) > radius {
                    continue;
                }
                let v = objective(&candidate);
                if v > value && best_move.is_none_or(|(bv, _, _)| v > bv) {
                    best_move = Some((v, i, step));
                }
            }
        }
        match best_move {
            Some((v, i, step)) => {
                point[i] += step;
                value = v;
            }
            None => {
                delta *= 0.5;
                if delta < 1e-13 {
                    break;
                }
            }
        }
    }
    (value, point)
}

/// Test-side lower-bound oracle: max |g| over a Halton sample of the
/// truncated ball (directions from the box, radii along the first axis).
pub fn grid_oracle(ctx: &KernelContext, comb: &Combination, samples: usize, seed: u64) -> f64 {
    if comb.is_zero() || samples == 0 {
        return 0.0;
    }
    let arch = ctx.arch();
    let dim = arch.param_len();
    let probes = probe_points(ctx, comb);
    let objective = |flat: &[f64]| comb.eval_packed(ctx, flat).abs();
    let probe_best = best_over(&objective, probes.iter().map(|p| p.as_slice())).0;
    let radius = if ctx.certificates_available() {
        let c_total: f64 = comb
            .terms()
            .iter()
            .map(|(a, x)| a.abs() * input_bound_value(x))
            .sum();
        tail_radius(c_total, probe_best, 1e-6)
    } else {
        8.0
    };
    let offset = 1 + (seed % 1_048_573) as usize;
    (offset..offset + samples)
        .into_par_iter()
        .map(|n| {
            let mut theta = vec![0.0; dim];
            for (i, slot) in theta.iter_mut().enumerate() {
                // Cubing the centered coordinate concentrates mass near the
                // sparse directions where the norm ball has its extreme
                // points.
                let centered = 2.0 * halton(n, PRIMES[(i + 1) % PRIMES.len()]) - 1.0;
                *slot = centered * centered * centered;
            }
            let norm = network::param_norm_packed(arch, &theta);
            if norm < 1e-12 {
                return 0.0;
            }
            // Radii crowd toward the ball boundary, where suprema sit.
            let u = halton(n, PRIMES[0]);
            let r = radius * (1.0 - u * u * u);
            for v in &mut theta {
                *v *= r / norm;
            }
            objective(&theta)
        })
        .reduce(|| 0.0, f64::max)
}

const PRIMES: [usize; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn halton(mut index: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

/// Bracket on the dual norm of point evaluation at `theta` over the span of
/// the kernel sections: probes certified inside the unit ball push the lower
/// bound up, while 1 is always an upper bound on a sup-norm space.
pub fn dual_point_norm(
    ctx: &KernelContext,
    theta: &ParamVector,
    probes: &[Combination],
) -> Result<(f64, f64), SupNormError> {
    let flat = network::pack(theta);
    let mut lower = 0.0f64;
    for (index, probe) in probes.iter().enumerate() {
        let upper = analytic_upper(ctx, probe)?;
        if upper > 1.0 + PROBE_TOL {
            return Err(SupNormError::RejectedProbe { index, upper });
        }
        lower = lower.max(probe.eval_packed(ctx, &flat).abs());
    }
    Ok((lower, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{unpack, Activation, Architecture};

    fn ctx221() -> KernelContext {
        let arch = Architecture::new(vec![2, 2, 1], Activation::Relu).unwrap();
        KernelContext::with_default_decay(arch)
    }

    fn quick_cfg() -> SearchConfig {
        SearchConfig {
            starts: 48,
            iters: 150,
            ..SearchConfig::default()
        }
    }

    fn worked_inputs() -> [Vec<f64>; 3] {
        [vec![1.0, -1.0], vec![-1.0, 0.0], vec![0.0, 1.0]]
    }

    #[test]
    fn analytic_upper_triangle_and_pairwise() {
        let ctx = ctx221();
        let [x1, x2, _] = worked_inputs();
        let diff = Combination::new(vec![(1.0, x1.clone()), (-1.0, x2.clone())], 0);
        assert_eq!(analytic_upper(&ctx, &diff).unwrap(), 1.0);
        let single = Combination::new(vec![(1.0, x1.clone())], 0);
        assert_eq!(analytic_upper(&ctx, &single).unwrap(), 1.0);
        let stacked = Combination::new(vec![(2.0, x1), (3.0, x2)], 0);
        assert_eq!(analytic_upper(&ctx, &stacked).unwrap(), 5.0);
    }

    #[test]
    fn estimate_certifies_single_section() {
        let ctx = ctx221();
        let [x1, _, _] = worked_inputs();
        let est = estimate_sup(&ctx, &Combination::new(vec![(1.0, x1)], 0), &quick_cfg());
        assert!(est.lower >= 1.0 - 1e-6);
        assert_eq!(est.upper, 1.0);
        assert!(est.is_certified());
    }

    #[test]
    fn zero_combination_is_exact_zero() {
        let ctx = ctx221();
        let [x1, _, _] = worked_inputs();
        let est = estimate_sup(&ctx, &Combination::new(vec![(0.0, x1)], 0), &quick_cfg());
        assert_eq!((est.lower, est.upper), (0.0, 0.0));
        assert!(est.is_certified());
    }

    #[test]
    fn search_beats_the_published_witness() {
        // |k(x1,.) - k(x2,.) + k(x3,.)| exceeds 1.1 somewhere; the search must
        // at least match that.
        let ctx = ctx221();
        let [x1, x2, x3] = worked_inputs();
        let comb = Combination::new(vec![(1.0, x1), (-1.0, x2), (1.0, x3)], 0);
        let witness = unpack(ctx.arch(), &[0.3, 0.2, 0.0, 0.0, 0.5, 0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!((comb.eval(&ctx, &witness) - 1.1).abs() < 1e-12);
        let est = estimate_sup(&ctx, &comb, &quick_cfg());
        assert!(est.lower >= 1.1 - 1e-3, "lower = {}", est.lower);
    }

    #[test]
    fn negation_gives_identical_bracket() {
        let ctx = ctx221();
        let [x1, x2, x3] = worked_inputs();
        let cfg = quick_cfg();
        let comb = Combination::new(
            vec![(0.7, x1.clone()), (-1.3, x2.clone()), (0.4, x3.clone())],
            0,
        );
        let neg = Combination::new(vec![(-0.7, x1), (1.3, x2), (-0.4, x3)], 0);
        let a = estimate_sup(&ctx, &comb, &cfg);
        let b = estimate_sup(&ctx, &neg, &cfg);
        assert_eq!(a.lower, b.lower);
        assert_eq!(a.upper, b.upper);
        assert_eq!(a.witness, b.witness);
    }

    #[test]
    fn power_of_two_scaling_is_exact() {
        let ctx = ctx221();
        let [x1, x2, _] = worked_inputs();
        let cfg = quick_cfg();
        let comb = Combination::new(vec![(0.9, x1.clone()), (-0.35, x2.clone())], 0);
        let scaled = Combination::new(vec![(4.0 * 0.9, x1), (4.0 * -0.35, x2)], 0);
        let a = estimate_sup(&ctx, &comb, &cfg);
        let b = estimate_sup(&ctx, &scaled, &cfg);
        assert_eq!(b.lower, 4.0 * a.lower);
        assert_eq!(a.witness, b.witness);
    }

    #[test]
    fn dual_point_norm_fixtures() {
        let ctx = ctx221();
        let [x1, _, _] = worked_inputs();
        let theta1 = unpack(ctx.arch(), &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        let probe = Combination::new(vec![(1.0, x1)], 0);
        assert_eq!(
            dual_point_norm(&ctx, &theta1, std::slice::from_ref(&probe)).unwrap(),
            (1.0, 1.0)
        );
        // Scaled probe from the rescaled-anchor variant.
        let half = Combination::new(vec![(0.5, vec![2.0, -2.0])], 0);
        assert_eq!(dual_point_norm(&ctx, &theta1, &[half]).unwrap(), (1.0, 1.0));
        // Zero parameter evaluates every probe to 0.
        let zero = ParamVector::zeros(ctx.arch());
        assert_eq!(dual_point_norm(&ctx, &zero, &[probe]).unwrap(), (0.0, 1.0));
    }

    #[test]
    fn dual_point_norm_rejects_fat_probe() {
        let ctx = ctx221();
        let probe = Combination::new(vec![(2.0, vec![1.0, -1.0])], 0);
        let theta = ParamVector::zeros(ctx.arch());
        assert!(matches!(
            dual_point_norm(&ctx, &theta, &[probe]),
            Err(SupNormError::RejectedProbe { index: 0, .. })
        ));
    }

    #[test]
    fn oracle_is_a_lower_bound_and_finds_constant_ridge() {
        let ctx = ctx221();
        let [x1, x2, x3] = worked_inputs();
        let sum = Combination::new(vec![(1.0, x1), (1.0, x2), (1.0, x3)], 0);
        let v = grid_oracle(&ctx, &sum, 1_000_000, 7);
        assert!(v <= 3.0 + 1e-12);
        assert!(v >= 3.0 - 1e-2, "oracle reached only {v}");
    }

    #[test]
    fn oracle_brackets_single_section() {
        let ctx = ctx221();
        let [x1, _, _] = worked_inputs();
        let single = Combination::new(vec![(1.0, x1.clone())], 0);
        let v = grid_oracle(&ctx, &single, 1_000_000, 11);
        assert!((0.95..=1.0).contains(&v), "oracle value {v}");
        assert_eq!(grid_oracle(&ctx, &Combination::new(vec![(0.0, x1)], 0), 1_000, 11), 0.0);
    }
}
