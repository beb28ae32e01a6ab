use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::data::{compensated_sum, SimplexVector};

use super::SimlabError;

#[derive(Debug, Clone, PartialEq)]
pub struct DirichletParams {
    alpha: Vec<f64>,
}

impl DirichletParams {
    pub fn new(alpha: Vec<f64>) -> Result<Self, SimlabError> {
        if alpha.is_empty() {
            return Err(SimlabError::InvalidAlpha("empty parameter vector".into()));
        }
        if let Some(a) = alpha.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
            return Err(SimlabError::InvalidAlpha(format!("entry {a} is not positive")));
        }
        Ok(Self { alpha })
    }

    /// `(a, ..., a)` of length `d`.
    pub fn symmetric(a: f64, d: usize) -> Result<Self, SimlabError> {
        Self::new(vec![a; d])
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }
}

/// Reusable sampler; holds one gamma distribution per distinct shape.
#[derive(Debug, Clone)]
pub struct DirichletSampler {
    gammas: Vec<Gamma<f64>>,
    /// `shape_of[j]` indexes `gammas`.
    shape_of: Vec<usize>,
}

impl DirichletSampler {
    pub fn new(params: &DirichletParams) -> Self {
        let mut shapes: Vec<f64> = Vec::new();
        let mut shape_of = Vec::with_capacity(params.dim());
        for &a in params.alpha() {
            let k = match shapes.iter().position(|&s| s == a) {
                Some(k) => k,
                None => {
                    shapes.push(a);
                    shapes.len() - 1
                }
            };
            shape_of.push(k);
        }
        let gammas = shapes
            .iter()
            .map(|&a| Gamma::new(a, 1.0).expect("validated shape"))
            .collect();
        Self { gammas, shape_of }
    }

    /// Raw entries of one draw, summing to one.
    pub fn sample_entries<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        loop {
            let mut v: Vec<f64> = self
                .shape_of
                .iter()
                .map(|&k| self.gammas[k].sample(rng))
                .collect();
            let sum = compensated_sum(&v);
            // every draw underflowed; only plausible for tiny shapes
            if !(sum > 0.0) || !sum.is_finite() {
                continue;
            }
            v.iter_mut().for_each(|x| *x /= sum);
            let again = compensated_sum(&v);
            if again != 1.0 {
                v.iter_mut().for_each(|x| *x /= again);
            }
            return v;
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SimplexVector {
        SimplexVector::new(self.sample_entries(rng)).expect("normalized gamma draw lies on the simplex")
    }
}

/// One `Dirichlet(alpha)` draw: independent `Gamma(alpha_j, 1)` entries,
/// normalized by their sum.
pub fn sample_dirichlet<R: Rng + ?Sized>(params: &DirichletParams, rng: &mut R) -> SimplexVector {
    DirichletSampler::new(params).sample(rng)
}
