//! Bayesian statistical models on finite spaces: disintegration, Bayesian
//! inversion and almost-everywhere equality of kernels.
//!
//! Everything here is exact under the rational backend. Inversions are only
//! determined up to sets of predictive measure zero; those points are filled
//! by a fixed convention and reported back to the caller.

use crate::error::{Error, Result};
use crate::kernel::{self, Factor, FiniteKernel};
use crate::measure::{same_space, FiniteMeasure};
use crate::scalar::{Scalar, KERNEL_TOL};
use crate::space::{FiniteSpace, Label};

/// A prior `μ_Θ` on a parameter space together with a sampling kernel `p: Θ ⇝ X`.
#[derive(Debug, Clone, PartialEq)]
pub struct BayesModel<S> {
    prior: FiniteMeasure<S>,
    sampling: FiniteKernel<S>,
}

/// A Bayesian inversion `q: X ⇝ Θ` plus the points where it is pure convention.
#[derive(Debug, Clone, PartialEq)]
pub struct InversionResult<S> {
    pub kernel: FiniteKernel<S>,
    /// Labels of `X` where the predictive distribution has no mass. Rows there
    /// are set to the prior.
    pub null_points: Vec<Label>,
}

/// A regular conditional probability for a joint measure, with its null rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Disintegration<S> {
    pub kernel: FiniteKernel<S>,
    /// Labels where the first marginal vanishes; rows there are uniform.
    pub null_points: Vec<Label>,
}

impl<S: Scalar> BayesModel<S> {
    pub fn new(prior: FiniteMeasure<S>, sampling: FiniteKernel<S>) -> Result<Self> {
        same_space(prior.space(), sampling.source(), "bayes model")?;
        if !prior.is_probability() {
            return Err(Error::Invalid("prior is not a probability measure".into()));
        }
        Ok(Self { prior, sampling })
    }

    pub fn theta(&self) -> &FiniteSpace {
        self.prior.space()
    }

    pub fn prior(&self) -> &FiniteMeasure<S> {
        &self.prior
    }

    pub fn sampling(&self) -> &FiniteKernel<S> {
        &self.sampling
    }

    /// Prior predictive `μ_X = p_*μ_Θ`.
    pub fn predictive(&self) -> FiniteMeasure<S> {
        kernel::pushforward(&self.sampling, &self.prior).expect("prior lives on the source")
    }

    /// Joint `(Γ_p)_*μ_Θ` on `Θ × X`.
    pub fn joint(&self) -> FiniteMeasure<S> {
        kernel::pushforward(&kernel::graph(&self.sampling), &self.prior)
            .expect("prior lives on the source")
    }
}

/// Conditional of a joint on `X × Y` given the first coordinate.
///
/// Row `x` is `μ(x, ·) / μ_X(x)`; rows where `μ_X(x) = 0` are uniform.
pub fn disintegrate<S: Scalar>(mu: &FiniteMeasure<S>) -> Result<Disintegration<S>> {
    let (xs, ys) = mu.space().binary_factors()?;
    let marginal = kernel::marginal(mu, Factor::First)?;
    let ny = ys.len();
    let uniform = S::one() / S::from_usize(ny);
    let mut null_points = Vec::new();
    let rows = marginal
        .weights()
        .iter()
        .enumerate()
        .map(|(i, mx)| {
            let block = &mu.weights()[i * ny..(i + 1) * ny];
            if mx.is_zero() {
                null_points.push(xs.label(i).clone());
                vec![uniform.clone(); ny]
            } else {
                block.iter().map(|w| w.clone() / mx.clone()).collect()
            }
        })
        .collect();
    Ok(Disintegration {
        kernel: FiniteKernel::new(xs.clone(), ys.clone(), rows)?,
        null_points,
    })
}

/// Bayes' rule: `q(θ|x) = p(x|θ) μ_Θ(θ) / μ_X(x)` on predictive-positive `x`.
pub fn bayes_invert<S: Scalar>(model: &BayesModel<S>) -> InversionResult<S> {
    let p = &model.sampling;
    let evidence = model.predictive();
    let prior = model.prior.weights();
    let mut null_points = Vec::new();
    let rows = evidence
        .weights()
        .iter()
        .enumerate()
        .map(|(x, mx)| {
            if mx.is_zero() {
                null_points.push(p.target().label(x).clone());
                prior.to_vec()
            } else {
                prior
                    .iter()
                    .enumerate()
                    .map(|(t, w)| p.entry(t, x).clone() * w.clone() / mx.clone())
                    .collect()
            }
        })
        .collect();
    InversionResult {
        kernel: FiniteKernel::from_parts(p.target().clone(), model.theta().clone(), rows),
        null_points,
    }
}

/// Both sides of the inversion identity `σ_*(Γ_q)_*μ_X = (Γ_p)_*μ_Θ`, as
/// measures on `Θ × X`.
pub fn inversion_sides<S: Scalar>(
    model: &BayesModel<S>,
    q: &FiniteKernel<S>,
) -> Result<(FiniteMeasure<S>, FiniteMeasure<S>)> {
    same_space(
        q.source(),
        model.sampling.target(),
        "verify_inversion source",
    )?;
    same_space(q.target(), model.theta(), "verify_inversion target")?;
    let lhs = kernel::mirror(&kernel::pushforward(
        &kernel::graph(q),
        &model.predictive(),
    )?)?;
    Ok((lhs, model.joint()))
}

/// Checks the defining identity of a Bayesian inversion with the shared comparator.
pub fn verify_inversion<S: Scalar>(model: &BayesModel<S>, q: &FiniteKernel<S>) -> Result<bool> {
    verify_inversion_tol(model, q, KERNEL_TOL)
}

pub fn verify_inversion_tol<S: Scalar>(
    model: &BayesModel<S>,
    q: &FiniteKernel<S>,
    tol: f64,
) -> Result<bool> {
    let (lhs, rhs) = inversion_sides(model, q)?;
    Ok(lhs.approx_eq(&rhs, tol))
}

/// Rows agree on every point of positive `μ`-mass.
pub fn ae_equal<S: Scalar>(
    t1: &FiniteKernel<S>,
    t2: &FiniteKernel<S>,
    mu: &FiniteMeasure<S>,
) -> Result<bool> {
    ae_equal_tol(t1, t2, mu, KERNEL_TOL)
}

pub fn ae_equal_tol<S: Scalar>(
    t1: &FiniteKernel<S>,
    t2: &FiniteKernel<S>,
    mu: &FiniteMeasure<S>,
    tol: f64,
) -> Result<bool> {
    same_space(t1.source(), t2.source(), "ae_equal source")?;
    same_space(t1.target(), t2.target(), "ae_equal target")?;
    same_space(t1.source(), mu.space(), "ae_equal measure")?;
    Ok(mu
        .weights()
        .iter()
        .zip(t1.rows().iter().zip(t2.rows()))
        .filter(|(w, _)| **w > S::zero())
        .all(|(_, (a, b))| a.iter().zip(b).all(|(p, q)| p.close(q, tol))))
}

/// The coarser equivalence `T_*μ = T'_*μ`.
pub fn pushforward_equal<S: Scalar>(
    t1: &FiniteKernel<S>,
    t2: &FiniteKernel<S>,
    mu: &FiniteMeasure<S>,
) -> Result<bool> {
    Ok(kernel::pushforward(t1, mu)?.approx_eq(&kernel::pushforward(t2, mu)?, KERNEL_TOL))
}

/// Inversion of a composite `p2 ∘ p1` relative to the prior of `m1`, obtained as
/// `q1 ∘ q2` where `q2` inverts `p2` relative to the intermediate predictive.
pub fn invert_composition<S: Scalar>(
    m1: &BayesModel<S>,
    p2: &FiniteKernel<S>,
) -> Result<FiniteKernel<S>> {
    same_space(m1.sampling.target(), p2.source(), "invert_composition")?;
    let q1 = bayes_invert(m1).kernel;
    let m2 = BayesModel::new(m1.predictive(), p2.clone())?;
    let q2 = bayes_invert(&m2).kernel;
    kernel::compose(&q2, &q1)
}
