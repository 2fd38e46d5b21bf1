//! The conditional-intensity kernel interface.
//!
//! A kernel maps a point configuration `μ` to a nonnegative measure
//! `π(μ, ·)`: the intensity of realizing a new point at each site given
//! `μ`. Evaluation is pure, so kernels are freely shared across threads.

use std::marker::PhantomData;

use crate::config::Config;
use crate::measure::Measure;
use crate::scalar::Scalar;
use crate::space::Space;

/// Closed-form single-site marginal law, exposed by kernels whose
/// process factorizes over sites. Used by the product-form sampler as a
/// route independent of the kernel's `eval`.
#[derive(Debug, Clone, PartialEq)]
pub enum SiteLaw {
    Poisson { rate: f64 },
    /// Number-of-failures negative binomial with shape `r` and
    /// success-complement `z`: pmf ∝ C(n+r-1, n) z^n.
    NegativeBinomial { r: f64, z: f64 },
    Binomial { n: u32, p: f64 },
}

/// A conditional-intensity kernel on a finite space.
pub trait Kernel<T: Scalar>: Send + Sync {
    fn name(&self) -> &str;

    fn space(&self) -> &Space;

    /// `π(μ, ·)` as a dense measure over the space.
    fn eval(&self, mu: &Config) -> Measure<T>;

    /// Per-site cap on admissible multiplicities, when the kernel makes
    /// configurations beyond the cap unreachable (zero weight). Sites
    /// without a cap carry `u32::MAX`. `None` means no site is capped.
    fn support_bound(&self) -> Option<&Config> {
        None
    }

    /// Closed-form per-site marginals, if the kernel has them.
    fn product_form(&self) -> Option<Vec<SiteLaw>> {
        None
    }

    /// Convenience: `π(μ, {x})`.
    fn intensity(&self, mu: &Config, site: usize) -> T {
        self.eval(mu).weight(site)
    }
}

impl<T: Scalar, K: Kernel<T> + ?Sized> Kernel<T> for &K {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn space(&self) -> &Space {
        (**self).space()
    }
    fn eval(&self, mu: &Config) -> Measure<T> {
        (**self).eval(mu)
    }
    fn support_bound(&self) -> Option<&Config> {
        (**self).support_bound()
    }
    fn product_form(&self) -> Option<Vec<SiteLaw>> {
        (**self).product_form()
    }
}

impl<T: Scalar, K: Kernel<T> + ?Sized> Kernel<T> for Box<K> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn space(&self) -> &Space {
        (**self).space()
    }
    fn eval(&self, mu: &Config) -> Measure<T> {
        (**self).eval(mu)
    }
    fn support_bound(&self) -> Option<&Config> {
        (**self).support_bound()
    }
    fn product_form(&self) -> Option<Vec<SiteLaw>> {
        (**self).product_form()
    }
}

/// Kernel defined by an arbitrary closure; the escape hatch for tests
/// and hand-built counterexamples.
pub struct FnKernel<T, F> {
    space: Space,
    name: String,
    f: F,
    bound: Option<Config>,
    _scalar: PhantomData<fn() -> T>,
}

impl<T: Scalar, F: Fn(&Config) -> Measure<T> + Send + Sync> FnKernel<T, F> {
    pub fn new(space: Space, name: impl Into<String>, f: F) -> Self {
        FnKernel {
            space,
            name: name.into(),
            f,
            bound: None,
            _scalar: PhantomData,
        }
    }

    pub fn with_bound(mut self, bound: Config) -> Self {
        self.bound = Some(bound);
        self
    }
}

impl<T: Scalar, F: Fn(&Config) -> Measure<T> + Send + Sync> Kernel<T> for FnKernel<T, F> {
    fn name(&self) -> &str {
        &self.name
    }

    fn space(&self) -> &Space {
        &self.space
    }

    fn eval(&self, mu: &Config) -> Measure<T> {
        debug_assert_eq!(mu.len(), self.space.len());
        (self.f)(mu)
    }

    fn support_bound(&self) -> Option<&Config> {
        self.bound.as_ref()
    }
}
