//! The network-induced kernel k(x, theta) = f_theta(x) * xi(theta) with the
//! decaying weight xi(theta) = 1 / max{1, |theta|^p}.

use crate::error::ShapeError;
use crate::network::{self, Activation, Architecture, ParamVector};
use crate::supnorm::{self, Combination, SearchConfig, SupNormEstimate};
use serde::{Deserialize, Serialize};

/// Decay exponent p of the weight xi. Certified bounds need p >= depth + 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayWeight {
    exponent: f64,
}

impl DecayWeight {
    pub fn new(exponent: f64) -> Result<Self, ShapeError> {
        if exponent > 0.0 {
            Ok(Self { exponent })
        } else {
            Err(ShapeError::NonPositiveExponent(exponent))
        }
    }

    /// The smallest exponent that makes k(x, .) vanish at infinity for a
    /// network of the given depth: p = l + 1.
    pub fn for_depth(depth: usize) -> Self {
        Self {
            exponent: (depth + 1) as f64,
        }
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }
}

/// An architecture together with the decay weight that certifies it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelContext {
    arch: Architecture,
    decay: DecayWeight,
}

impl KernelContext {
    pub fn new(arch: Architecture, decay: DecayWeight) -> Self {
        Self { arch, decay }
    }

    /// Context with the default exponent p = depth + 1.
    pub fn with_default_decay(arch: Architecture) -> Self {
        let decay = DecayWeight::for_depth(arch.depth());
        Self { arch, decay }
    }

    pub fn arch(&self) -> &Architecture {
        &self.arch
    }

    pub fn decay(&self) -> DecayWeight {
        self.decay
    }

    /// Whether the analytic bounds apply: p >= depth + 1.
    pub fn certificates_available(&self) -> bool {
        self.decay.exponent() >= (self.arch.depth() + 1) as f64
    }

    /// Whether the sup norm of k(x, .) is known in closed form with a
    /// norm-attaining selector witness: ReLU, affine output, p = depth + 1.
    pub fn exact_sup_norm_available(&self) -> bool {
        self.arch.activation() == Activation::Relu
            && !self.arch.output_activation_applied()
            && self.decay.exponent() == (self.arch.depth() + 1) as f64
    }

    /// xi(theta) = 1 / max{1, |theta|^p}; equals 1 exactly iff |theta| <= 1.
    pub fn xi(&self, theta: &ParamVector) -> f64 {
        xi_of_norm(network::param_norm(theta), self.decay.exponent())
    }

    pub fn xi_packed(&self, flat: &[f64]) -> f64 {
        xi_of_norm(
            network::param_norm_packed(&self.arch, flat),
            self.decay.exponent(),
        )
    }

    /// Full kernel vector (k_1(x, theta), ..., k_t(x, theta)).
    pub fn eval(&self, x: &[f64], theta: &ParamVector) -> Result<Vec<f64>, ShapeError> {
        let mut out = network::forward(&self.arch, theta, x)?;
        let xi = self.xi(theta);
        for v in &mut out {
            *v *= xi;
        }
        Ok(out)
    }

    /// One output component of the kernel.
    pub fn eval_component(
        &self,
        x: &[f64],
        theta: &ParamVector,
        component: usize,
    ) -> Result<f64, ShapeError> {
        if component >= self.arch.output_dim() {
            return Err(ShapeError::Component {
                component,
                output_dim: self.arch.output_dim(),
            });
        }
        Ok(self.eval(x, theta)?[component])
    }

    /// Hot-path component evaluation on a packed parameter slice.
    pub fn eval_packed(&self, x: &[f64], flat: &[f64], component: usize) -> f64 {
        let out = network::forward_packed(&self.arch, flat, x);
        out[component] * self.xi_packed(flat)
    }

    /// C(x) = max{1, |x|_inf}: a certified bound |k_i(x, theta)| <= C(x) for
    /// every theta and component, valid when p >= depth + 1.
    pub fn input_bound(&self, x: &[f64]) -> Result<f64, crate::error::SupNormError> {
        if !self.certificates_available() {
            return Err(crate::error::SupNormError::CertificationUnavailable {
                exponent: self.decay.exponent(),
                required: (self.arch.depth() + 1) as f64,
            });
        }
        Ok(input_bound_value(x))
    }

    /// Selector chain attaining |k(x, .)|_inf: one active neuron per layer.
    ///
    /// When |x|_inf >= 1 the first layer reads the attaining coordinate with
    /// a +-e_c row; otherwise a unit bias produces the constant 1. Deeper
    /// layers pass the value through; the output row `component` closes the
    /// chain. Every row has l1 norm at most 1, so xi = 1.
    pub fn selector(&self, x: &[f64], component: usize) -> ParamVector {
        let mut theta = ParamVector::zeros(&self.arch);
        let (c, max_abs) = argmax_abs(x);
        let first = &mut theta.layers_mut()[0];
        if max_abs >= 1.0 {
            first.weights[c] = x[c].signum();
        } else {
            first.bias[0] = 1.0;
        }
        self.route_through(&mut theta, component);
        theta
    }

    /// The constant selector: zero weights, unit output bias at `component`,
    /// so k_component(x, theta) = 1 for every x.
    pub fn bias_selector(&self, component: usize) -> ParamVector {
        let mut theta = ParamVector::zeros(&self.arch);
        let depth = self.arch.depth();
        theta.layers_mut()[depth - 1].bias[component] = 1.0;
        theta
    }

    /// Coordinate selector: first-layer row `sign * e_coord`, passed through
    /// to the output row `component`. Evaluates sigma(sign * x_coord).
    pub fn coordinate_selector(&self, coord: usize, sign: f64, component: usize) -> ParamVector {
        let mut theta = ParamVector::zeros(&self.arch);
        theta.layers_mut()[0].weights[coord] = sign;
        self.route_through(&mut theta, component);
        theta
    }

    fn route_through(&self, theta: &mut ParamVector, component: usize) {
        let depth = self.arch.depth();
        for k in 1..depth {
            let (_, cols) = (self.arch.widths()[k + 1], self.arch.widths()[k]);
            let layer = &mut theta.layers_mut()[k];
            let row = if k + 1 == depth { component } else { 0 };
            layer.weights[row * cols] = 1.0;
        }
        if depth == 1 {
            // Single-layer net: the "chain" is just the first-layer row, which
            // must live in the output row instead of row 0.
            let layer0 = theta.layers_mut().first_mut().unwrap();
            if component != 0 {
                let cols = self.arch.input_dim();
                let row0: Vec<f64> = layer0.weights[0..cols].to_vec();
                let b0 = layer0.bias[0];
                for w in &mut layer0.weights[0..cols] {
                    *w = 0.0;
                }
                layer0.bias[0] = 0.0;
                layer0.weights[component * cols..(component + 1) * cols].copy_from_slice(&row0);
                layer0.bias[component] = b0;
            }
        }
    }

    /// Bracket on |k(x, .)|_inf for one component.
    ///
    /// On the ReLU / affine-output / p = depth+1 family the value is exactly
    /// max{1, |x|_inf}, certified with a selector witness. Otherwise this
    /// falls back to the numerical bracket from the sup-norm search.
    pub fn evaluation_sup_norm(
        &self,
        x: &[f64],
        component: usize,
        cfg: &SearchConfig,
    ) -> SupNormEstimate {
        if self.exact_sup_norm_available() {
            let value = input_bound_value(x);
            let witness = self.selector(x, component);
            return SupNormEstimate::certified(value, witness);
        }
        let comb = Combination::new(vec![(1.0, x.to_vec())], component);
        supnorm::estimate_sup(self, &comb, cfg)
    }
}

#[inline]
pub(crate) fn xi_of_norm(norm: f64, exponent: f64) -> f64 {
    let powered = norm.powf(exponent);
    if powered > 1.0 {
        1.0 / powered
    } else {
        1.0
    }
}

pub(crate) fn input_bound_value(x: &[f64]) -> f64 {
    x.iter().fold(1.0f64, |acc, v| acc.max(v.abs()))
}

fn argmax_abs(x: &[f64]) -> (usize, f64) {
    let mut best = (0, 0.0f64);
    for (i, v) in x.iter().enumerate() {
        if v.abs() > best.1 {
            best = (i, v.abs());
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::unpack;

    fn ctx221() -> KernelContext {
        let arch = Architecture::new(vec![2, 2, 1], Activation::Relu).unwrap();
        KernelContext::with_default_decay(arch)
    }

    #[test]
    fn xi_closed_form() {
        let ctx = ctx221();
        let theta1 = unpack(ctx.arch(), &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(ctx.xi(&theta1), 1.0);
        assert_eq!(ctx.xi(&ParamVector::zeros(ctx.arch())), 1.0);
        // |theta| = 2, p = 3 -> 1/8.
        let theta2 = unpack(ctx.arch(), &[2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(ctx.xi(&theta2), 0.125);
    }

    #[test]
    fn kernel_eval_fixtures() {
        let ctx = ctx221();
        let theta1 = unpack(ctx.arch(), &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(ctx.eval(&[1.0, -1.0], &theta1).unwrap(), vec![1.0]);
        // The constant selector returns 1 at every input.
        let bias = ctx.bias_selector(0);
        for x in [[0.0, 0.0], [1.0, -1.0], [-1.0, 0.0], [17.0, 5.0]] {
            assert_eq!(ctx.eval(&x, &bias).unwrap(), vec![1.0]);
        }
        let interior =
            unpack(ctx.arch(), &[0.3, 0.2, 0.0, 0.0, 0.5, 0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!((ctx.eval_component(&[1.0, -1.0], &interior, 0).unwrap() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn input_bound_values() {
        let ctx = ctx221();
        assert_eq!(ctx.input_bound(&[1.0, -1.0]).unwrap(), 1.0);
        assert_eq!(ctx.input_bound(&[0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(ctx.input_bound(&[2.0, -2.0]).unwrap(), 2.0);
    }

    #[test]
    fn input_bound_needs_certificates() {
        let arch = Architecture::new(vec![2, 2, 1], Activation::Relu).unwrap();
        let ctx = KernelContext::new(arch, DecayWeight::new(1.5).unwrap());
        assert!(ctx.input_bound(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn selector_attains_the_bound() {
        let ctx = ctx221();
        // |x|_inf > 1: coordinate selector.
        let x = [2.0, -2.0];
        let sel = ctx.selector(&x, 0);
        assert_eq!(ctx.eval(&x, &sel).unwrap(), vec![2.0]);
        assert_eq!(network::param_norm(&sel), 1.0);
        // |x|_inf < 1: bias selector path.
        let x = [0.25, -0.5];
        let sel = ctx.selector(&x, 0);
        assert_eq!(ctx.eval(&x, &sel).unwrap(), vec![1.0]);
    }

    #[test]
    fn selector_chain_spans_deeper_nets() {
        let arch = Architecture::new(vec![2, 3, 2, 2], Activation::Relu).unwrap();
        let ctx = KernelContext::with_default_decay(arch);
        let x = [3.0, 1.0];
        for component in 0..2 {
            let sel = ctx.selector(&x, component);
            assert_eq!(network::param_norm(&sel), 1.0);
            let out = ctx.eval(&x, &sel).unwrap();
            assert_eq!(out[component], 3.0);
            assert_eq!(out[1 - component], 0.0);
        }
    }

    #[test]
    fn larger_exponent_falls_back_to_a_bracket() {
        // p > depth + 1: no closed-form certificate; the numerical bracket's
        // upper bound is still the input bound.
        let arch = Architecture::new(vec![2, 2, 1], Activation::Relu).unwrap();
        let ctx = KernelContext::new(arch, DecayWeight::new(4.0).unwrap());
        assert!(!ctx.exact_sup_norm_available());
        let cfg = SearchConfig {
            starts: 32,
            iters: 100,
            ..SearchConfig::default()
        };
        let est = ctx.evaluation_sup_norm(&[2.0, -2.0], 0, &cfg);
        assert_eq!(est.upper, ctx.input_bound(&[2.0, -2.0]).unwrap());
        assert!(est.lower <= est.upper);
        // The selector still attains the bound at parameter norm 1.
        assert!(est.lower >= 2.0 - 1e-9);
    }

    #[test]
    fn evaluation_sup_norm_certifies_worked_points() {
        let ctx = ctx221();
        let cfg = SearchConfig::default();
        let est = ctx.evaluation_sup_norm(&[-1.0, 0.0], 0, &cfg);
        assert!(est.is_certified());
        assert_eq!(est.lower, 1.0);
        assert_eq!(est.upper, 1.0);
        // Witness is the sigma(-x1) selector theta2 from the worked example.
        assert_eq!(
            network::pack(&est.witness),
            vec![-1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]
        );
        let est = ctx.evaluation_sup_norm(&[2.0, -2.0], 0, &cfg);
        assert_eq!((est.lower, est.upper), (2.0, 2.0));
    }
}
