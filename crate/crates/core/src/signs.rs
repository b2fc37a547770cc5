//! Admissible sign vectors: a sign pattern s in {-1, 0, +1}^m is admissible
//! when |sum_i s_i k(x_i, .)|_inf <= 1. Verdicts are three-valued so an
//! unresolved numerical bracket is never silently treated as a proof.

use crate::error::SignsError;
use crate::kernel::{input_bound_value, KernelContext};
use crate::network::ParamVector;
use crate::supnorm::{self, Combination, SearchConfig, SupNormEstimate, PROBE_TOL};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Strict-inequality margin around 1 for admissibility comparisons.
pub const ADMISSIBILITY_MARGIN: f64 = 1e-9;

/// An element of {-1, 0, +1}^m.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SignVector(Vec<i8>);

impl SignVector {
    pub fn new(entries: Vec<i8>) -> Result<Self, SignsError> {
        if let Some(&bad) = entries.iter().find(|e| ![-1, 0, 1].contains(*e)) {
            return Err(SignsError::BadEntry(bad));
        }
        Ok(Self(entries))
    }

    pub fn zeros(m: usize) -> Self {
        Self(vec![0; m])
    }

    /// Componentwise signs of a real vector.
    pub fn signs_of(values: &[f64]) -> Self {
        Self(
            values
                .iter()
                .map(|&v| {
                    if v > 0.0 {
                        1
                    } else if v < 0.0 {
                        -1
                    } else {
                        0
                    }
                })
                .collect(),
        )
    }

    pub fn entries(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|e| -e).collect())
    }

    pub fn nonzero_indices(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &e)| e != 0)
            .map(|(i, _)| i)
            .collect()
    }
}

impl std::fmt::Display for SignVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Which rule certified admissibility.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Certificate {
    Zero,
    UnitEvaluation,
    PairwiseDifference,
    AnalyticUpper,
}

impl Certificate {
    pub fn name(self) -> &'static str {
        match self {
            Certificate::Zero => "zero",
            Certificate::UnitEvaluation => "unit evaluation",
            Certificate::PairwiseDifference => "pairwise difference bound",
            Certificate::AnalyticUpper => "analytic upper",
        }
    }
}

/// Verdict of an admissibility check.
#[derive(Debug, Clone, PartialEq)]
pub enum AdmissibilityVerdict {
    CertifiedAdmissible(Certificate),
    CertifiedInadmissible { witness: ParamVector, value: f64 },
    Uncertified(SupNormEstimate),
}

impl AdmissibilityVerdict {
    pub fn is_certified_admissible(&self) -> bool {
        matches!(self, AdmissibilityVerdict::CertifiedAdmissible(_))
    }

    pub fn is_certified_inadmissible(&self) -> bool {
        matches!(self, AdmissibilityVerdict::CertifiedInadmissible { .. })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            AdmissibilityVerdict::CertifiedAdmissible(_) => "admissible",
            AdmissibilityVerdict::CertifiedInadmissible { .. } => "inadmissible",
            AdmissibilityVerdict::Uncertified(_) => "uncertified",
        }
    }
}

/// Options governing the admissibility machinery.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignOptions {
    /// Form combinations with coefficients s_i / |k(x_i,.)|_inf, the
    /// rescaled-witness convention that reduces to the plain definition on
    /// unit-box data.
    pub scaled_witnesses: bool,
    /// Refuse enumerations with more than 3^cap verdicts.
    pub enumeration_cap: usize,
}

impl Default for SignOptions {
    fn default() -> Self {
        Self {
            scaled_witnesses: true,
            enumeration_cap: 12,
        }
    }
}

/// Per-input coefficient scales (1 or 1/C_i) for building combinations.
pub fn section_scales(ctx: &KernelContext, inputs: &[Vec<f64>], opts: &SignOptions) -> Vec<f64> {
    inputs
        .iter()
        .map(|x| {
            if opts.scaled_witnesses && ctx.certificates_available() {
                1.0 / input_bound_value(x)
            } else {
                1.0
            }
        })
        .collect()
}

/// Decide admissibility of one sign vector over the dataset inputs.
///
/// Decision ladder: zero vector, constant-selector disproof, unit-evaluation
/// certificates, the depth-2 pairwise-difference bound, then the numerical
/// bracket.
pub fn is_admissible(
    ctx: &KernelContext,
    inputs: &[Vec<f64>],
    component: usize,
    sign: &SignVector,
    opts: &SignOptions,
    cfg: &SearchConfig,
) -> AdmissibilityVerdict {
    let scales = section_scales(ctx, inputs, opts);
    is_admissible_scaled(ctx, inputs, component, sign, &scales, opts, cfg)
}

fn is_admissible_scaled(
    ctx: &KernelContext,
    inputs: &[Vec<f64>],
    component: usize,
    sign: &SignVector,
    scales: &[f64],
    opts: &SignOptions,
    cfg: &SearchConfig,
) -> AdmissibilityVerdict {
    // (1) The zero combination.
    if sign.is_zero() {
        return AdmissibilityVerdict::CertifiedAdmissible(Certificate::Zero);
    }

    let comb = Combination::new(
        sign.entries()
            .iter()
            .zip(inputs)
            .zip(scales)
            .map(|((&s, x), &c)| (s as f64 * c, x.clone()))
            .collect(),
        component,
    );

    // (2) The constant selector evaluates every section to 1, so the
    // combination reaches the scaled sum of signs there.
    let bias = ctx.bias_selector(component);
    let at_bias = comb.eval(ctx, &bias);
    if at_bias.abs() > 1.0 + ADMISSIBILITY_MARGIN {
        return AdmissibilityVerdict::CertifiedInadmissible {
            witness: bias,
            value: at_bias.abs(),
        };
    }

    let support = sign.nonzero_indices();

    // (3) Singletons: |k(x,.)|_inf = C(x) under the decay certificates, so
    // inside the unit box the plain section sits in the unit ball, and the
    // rescaled section always does.
    if support.len() == 1 && ctx.certificates_available() {
        let i = support[0];
        if input_bound_value(&inputs[i]) <= 1.0 {
            return AdmissibilityVerdict::CertifiedAdmissible(Certificate::UnitEvaluation);
        }
        if opts.scaled_witnesses {
            return AdmissibilityVerdict::CertifiedAdmissible(Certificate::AnalyticUpper);
        }
    }

    // (4) One +1 and one -1 on unit-box inputs, depth-2 ReLU family.
    if support.len() == 2 {
        let (i, j) = (support[0], support[1]);
        let opposite = sign.entries()[i] * sign.entries()[j] == -1;
        let in_box =
            input_bound_value(&inputs[i]) <= 1.0 && input_bound_value(&inputs[j]) <= 1.0;
        let family_ok = ctx.arch().depth() == 2
            && ctx.arch().activation() == crate::network::Activation::Relu
            && !ctx.arch().output_activation_applied()
            && ctx.certificates_available();
        if opposite && in_box && family_ok {
            return AdmissibilityVerdict::CertifiedAdmissible(Certificate::PairwiseDifference);
        }
    }

    // (5) Numerical bracket.
    let est = supnorm::estimate_sup(ctx, &comb, cfg);
    if est.lower > 1.0 + ADMISSIBILITY_MARGIN {
        // Re-check the witness by direct evaluation before trusting it.
        let value = comb.eval(ctx, &est.witness).abs();
        if value > 1.0 + ADMISSIBILITY_MARGIN {
            return AdmissibilityVerdict::CertifiedInadmissible {
                witness: est.witness,
                value,
            };
        }
        return AdmissibilityVerdict::Uncertified(est);
    }
    if est.upper <= 1.0 + PROBE_TOL {
        return AdmissibilityVerdict::CertifiedAdmissible(Certificate::AnalyticUpper);
    }
    AdmissibilityVerdict::Uncertified(est)
}

/// All 3^m sign vectors with verdicts, ordered lexicographically with
/// +1 < 0 < -1 per coordinate.
pub fn enumerate_admissible(
    ctx: &KernelContext,
    inputs: &[Vec<f64>],
    component: usize,
    opts: &SignOptions,
    cfg: &SearchConfig,
) -> Result<Vec<(SignVector, AdmissibilityVerdict)>, SignsError> {
    let m = inputs.len();
    if m > opts.enumeration_cap {
        return Err(SignsError::CapExceeded {
            m,
            cost: 3u64.saturating_pow(m as u32),
            cap: opts.enumeration_cap,
        });
    }
    let scales = section_scales(ctx, inputs, opts);
    let total = 3usize.pow(m as u32);
    Ok((0..total)
        .into_par_iter()
        .map(|rank| {
            let sign = sign_at_rank(rank, m);
            let verdict = is_admissible_scaled(ctx, inputs, component, &sign, &scales, opts, cfg);
            (sign, verdict)
        })
        .collect())
}

/// Digit order +1, 0, -1; most significant digit is the first coordinate.
fn sign_at_rank(mut rank: usize, m: usize) -> SignVector {
    const DIGITS: [i8; 3] = [1, 0, -1];
    let mut entries = vec![0i8; m];
    for slot in entries.iter_mut().rev() {
        *slot = DIGITS[rank % 3];
        rank /= 3;
    }
    SignVector(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{unpack, Activation, Architecture};

    fn ctx221() -> KernelContext {
        let arch = Architecture::new(vec![2, 2, 1], Activation::Relu).unwrap();
        KernelContext::with_default_decay(arch)
    }

    fn worked_inputs() -> Vec<Vec<f64>> {
        vec![vec![1.0, -1.0], vec![-1.0, 0.0], vec![0.0, 1.0]]
    }

    fn quick_cfg() -> SearchConfig {
        SearchConfig {
            starts: 48,
            iters: 150,
            ..SearchConfig::default()
        }
    }

    #[test]
    fn ladder_handles_worked_example_vectors() {
        let ctx = ctx221();
        let inputs = worked_inputs();
        let opts = SignOptions::default();
        let cfg = quick_cfg();

        let zero = SignVector::new(vec![0, 0, 0]).unwrap();
        assert!(matches!(
            is_admissible(&ctx, &inputs, 0, &zero, &opts, &cfg),
            AdmissibilityVerdict::CertifiedAdmissible(Certificate::Zero)
        ));

        let two_plus = SignVector::new(vec![1, 1, 0]).unwrap();
        match is_admissible(&ctx, &inputs, 0, &two_plus, &opts, &cfg) {
            AdmissibilityVerdict::CertifiedInadmissible { value, witness } => {
                assert!((value - 2.0).abs() < 1e-12);
                // Witness is the constant selector.
                let flat = crate::network::pack(&witness);
                assert_eq!(flat, vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
            }
            other => panic!("expected constant-selector disproof, got {other:?}"),
        }

        let alternating = SignVector::new(vec![1, -1, 1]).unwrap();
        match is_admissible(&ctx, &inputs, 0, &alternating, &opts, &cfg) {
            AdmissibilityVerdict::CertifiedInadmissible { value, .. } => {
                assert!(value >= 1.1 - 1e-3, "witness value {value}");
            }
            other => panic!("expected inadmissible, got {other:?}"),
        }
    }

    #[test]
    fn published_witness_passes_the_recheck() {
        // The explicit parameter from the worked example disproves (1,-1,1).
        let ctx = ctx221();
        let inputs = worked_inputs();
        let witness =
            unpack(ctx.arch(), &[0.3, 0.2, 0.0, 0.0, 0.5, 0.0, 1.0, 0.0, 0.0]).unwrap();
        let comb = Combination::new(
            vec![
                (1.0, inputs[0].clone()),
                (-1.0, inputs[1].clone()),
                (1.0, inputs[2].clone()),
            ],
            0,
        );
        assert!((comb.eval(&ctx, &witness) - 1.1).abs() < 1e-12);
    }

    #[test]
    fn enumeration_matches_worked_admissible_set() {
        let ctx = ctx221();
        let inputs = worked_inputs();
        let table =
            enumerate_admissible(&ctx, &inputs, 0, &SignOptions::default(), &quick_cfg()).unwrap();
        assert_eq!(table.len(), 27);
        let admissible: Vec<_> = table
            .iter()
            .filter(|(_, v)| v.is_certified_admissible())
            .map(|(s, _)| s.entries().to_vec())
            .collect();
        let mut expected: Vec<Vec<i8>> = vec![vec![0, 0, 0]];
        for base in [
            vec![1, 0, 0],
            vec![0, 1, 0],
            vec![0, 0, 1],
            vec![1, -1, 0],
            vec![1, 0, -1],
            vec![0, 1, -1],
        ] {
            expected.push(base.iter().map(|e| -e).collect());
            expected.push(base);
        }
        assert_eq!(admissible.len(), 13);
        for e in &expected {
            assert!(admissible.contains(e), "missing {e:?}");
        }
        // Everything else is certified inadmissible, none uncertified.
        assert_eq!(
            table
                .iter()
                .filter(|(_, v)| v.is_certified_inadmissible())
                .count(),
            14
        );
    }

    #[test]
    fn enumeration_order_is_plus_zero_minus() {
        assert_eq!(sign_at_rank(0, 2).entries(), &[1, 1]);
        assert_eq!(sign_at_rank(1, 2).entries(), &[1, 0]);
        assert_eq!(sign_at_rank(2, 2).entries(), &[1, -1]);
        assert_eq!(sign_at_rank(3, 2).entries(), &[0, 1]);
        assert_eq!(sign_at_rank(8, 2).entries(), &[-1, -1]);
    }

    #[test]
    fn enumeration_cap_refuses_large_m() {
        let ctx = ctx221();
        let inputs: Vec<Vec<f64>> = (0..13).map(|i| vec![0.01 * i as f64, 0.0]).collect();
        let err = enumerate_admissible(&ctx, &inputs, 0, &SignOptions::default(), &quick_cfg())
            .unwrap_err();
        assert!(matches!(err, SignsError::CapExceeded { m: 13, .. }));
    }

    #[test]
    fn out_of_box_singleton_depends_on_scaling() {
        let ctx = ctx221();
        let inputs = vec![vec![3.0, 0.0]];
        let cfg = quick_cfg();
        let plus = SignVector::new(vec![1]).unwrap();

        // Plain definition: the selector reaches 3, so (+1) is inadmissible.
        let plain = SignOptions {
            scaled_witnesses: false,
            ..SignOptions::default()
        };
        match is_admissible(&ctx, &inputs, 0, &plus, &plain, &cfg) {
            AdmissibilityVerdict::CertifiedInadmissible { value, .. } => {
                assert!(value > 2.9, "selector witness should reach 3, got {value}");
            }
            other => panic!("expected inadmissible, got {other:?}"),
        }

        // Rescaled convention: the section is normalized to unit sup norm.
        let scaled = SignOptions::default();
        assert!(is_admissible(&ctx, &inputs, 0, &plus, &scaled, &cfg).is_certified_admissible());
    }

    #[test]
    fn single_point_unit_box_enumeration() {
        let ctx = ctx221();
        let inputs = vec![vec![0.5, -0.25]];
        let table =
            enumerate_admissible(&ctx, &inputs, 0, &SignOptions::default(), &quick_cfg()).unwrap();
        assert_eq!(table.len(), 3);
        assert!(table.iter().all(|(_, v)| v.is_certified_admissible()));
    }
}
