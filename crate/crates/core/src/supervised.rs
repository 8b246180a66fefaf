//! Bayesian supervised learning on finite input/label spaces.
//!
//! A model assigns to each parameter `θ` a supervisor `h_θ: X ⇝ Y`. Labels are
//! conditionally independent given `θ`, so the sampling kernel at inputs
//! `(x_1, …, x_m)` has product rows on `Y^m`.

use crate::bayes::{bayes_invert, BayesModel};
use crate::error::{Error, Result};
use crate::kernel::{pushforward, FiniteKernel};
use crate::measure::{product_measure, same_space, FiniteMeasure};
use crate::scalar::{Scalar, KERNEL_TOL};
use crate::space::{FiniteSpace, Label};

#[derive(Debug, Clone, PartialEq)]
pub struct SupervisedModel<S> {
    prior: FiniteMeasure<S>,
    supervisors: Vec<FiniteKernel<S>>,
}

/// Ordered training pairs `S_n = ((x_1, y_1), …, (x_n, y_n))`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TrainingSet {
    pairs: Vec<(Label, Label)>,
}

/// Ordered, nonempty test inputs `T_m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestInputs {
    points: Vec<Label>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Posterior<S> {
    pub measure: FiniteMeasure<S>,
    /// The observed labels had zero predictive probability; `measure` is the prior.
    pub null_evidence: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Predictive<S> {
    /// Joint on `Y^m`, row-major in the test-input order.
    pub joint: FiniteMeasure<S>,
    pub null_evidence: bool,
}

impl<S: Scalar> SupervisedModel<S> {
    pub fn new(prior: FiniteMeasure<S>, supervisors: Vec<FiniteKernel<S>>) -> Result<Self> {
        if !prior.is_probability() {
            return Err(Error::Invalid("prior is not a probability measure".into()));
        }
        if supervisors.len() != prior.space().len() {
            return Err(Error::LengthMismatch {
                expected: prior.space().len(),
                actual: supervisors.len(),
            });
        }
        let first = supervisors.first().ok_or(Error::EmptySpace)?;
        for h in &supervisors[1..] {
            same_space(h.source(), first.source(), "supervisor inputs")?;
            same_space(h.target(), first.target(), "supervisor labels")?;
        }
        Ok(Self { prior, supervisors })
    }

    pub fn theta(&self) -> &FiniteSpace {
        self.prior.space()
    }

    pub fn inputs(&self) -> &FiniteSpace {
        self.supervisors[0].source()
    }

    pub fn labels(&self) -> &FiniteSpace {
        self.supervisors[0].target()
    }

    pub fn prior(&self) -> &FiniteMeasure<S> {
        &self.prior
    }

    pub fn supervisors(&self) -> &[FiniteKernel<S>] {
        &self.supervisors
    }

    /// Same supervisors, different prior on `Θ`.
    pub fn with_prior(&self, prior: FiniteMeasure<S>) -> Result<Self> {
        same_space(prior.space(), self.theta(), "replacement prior")?;
        Self::new(prior, self.supervisors.clone())
    }

    /// The model seen only through the inputs in `keep`.
    pub fn restrict_inputs(&self, keep: &[Label]) -> Result<Self> {
        let sub = self.inputs().restrict(keep)?;
        let supervisors = self
            .supervisors
            .iter()
            .map(|h| {
                let rows = sub
                    .labels()
                    .iter()
                    .map(|x| h.row_at(x))
                    .collect::<Result<Vec<_>>>()?;
                FiniteKernel::from_measures(sub.clone(), rows)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.prior.clone(), supervisors)
    }

    fn likelihood(&self, theta: usize, x: &Label, y: &Label) -> Result<S> {
        let h = &self.supervisors[theta];
        let xi = h.source().require_index(x)?;
        let yi = h.target().require_index(y)?;
        Ok(h.entry(xi, yi).clone())
    }
}

impl TrainingSet {
    pub fn new(pairs: Vec<(Label, Label)>) -> Self {
        Self { pairs }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn pairs(&self) -> &[(Label, Label)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn inputs(&self) -> Vec<Label> {
        self.pairs.iter().map(|(x, _)| x.clone()).collect()
    }

    pub fn outputs(&self) -> Vec<Label> {
        self.pairs.iter().map(|(_, y)| y.clone()).collect()
    }

    /// `self ⧺ other`.
    pub fn concat(&self, other: &TrainingSet) -> Self {
        Self::new(self.pairs.iter().chain(&other.pairs).cloned().collect())
    }

    /// Pairs reordered so that position `i` holds the old pair `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.len()];
        if perm.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: perm.len(),
            });
        }
        for &p in perm {
            if p >= self.len() || std::mem::replace(&mut seen[p], true) {
                return Err(Error::Invalid(format!("{perm:?} is not a permutation")));
            }
        }
        Ok(Self::new(
            perm.iter().map(|&p| self.pairs[p].clone()).collect(),
        ))
    }

    /// The observation `(y_1, …, y_n)` as a point of `Y^n`.
    pub fn observation_label(&self) -> Label {
        tuple_label(self.outputs())
    }

    pub fn validate<S: Scalar>(&self, model: &SupervisedModel<S>) -> Result<()> {
        for (x, y) in &self.pairs {
            model.inputs().require_index(x)?;
            model.labels().require_index(y)?;
        }
        Ok(())
    }
}

impl TestInputs {
    pub fn new(points: Vec<Label>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Invalid("test inputs must be nonempty".into()));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Label] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl<S: Scalar> Predictive<S> {
    /// Per-coordinate marginals on `Y`.
    pub fn marginals(&self, labels: &FiniteSpace) -> Vec<FiniteMeasure<S>> {
        let ny = labels.len();
        let n = self.joint.weights().len();
        let m = match self.joint.space().factors() {
            Some(f) => f.len(),
            None => 1,
        };
        (0..m)
            .map(|coord| {
                let stride = ny.pow((m - 1 - coord) as u32);
                let mut w = vec![S::zero(); ny];
                for (idx, v) in self.joint.weights().iter().enumerate().take(n) {
                    let y = (idx / stride) % ny;
                    w[y] = w[y].clone() + v.clone();
                }
                FiniteMeasure::nonnegative(labels.clone(), w).expect("marginal of a measure")
            })
            .collect()
    }
}

fn tuple_label(mut ys: Vec<Label>) -> Label {
    match ys.len() {
        1 => ys.pop().expect("one element"),
        _ => Label::Tuple(ys),
    }
}

/// Sampling kernel `Θ ⇝ Y^m` at inputs `xs`: row `θ` is `⊗_i h_θ(·|x_i)`.
///
/// `m = 1` targets `Y` itself; an empty input list targets the one-point space.
pub fn sampling_kernel<S: Scalar>(
    model: &SupervisedModel<S>,
    xs: &[Label],
) -> Result<FiniteKernel<S>> {
    let theta = model.theta().clone();
    if xs.is_empty() {
        let unit = FiniteSpace::unit();
        let rows = vec![vec![S::one()]; theta.len()];
        return FiniteKernel::new(theta, unit, rows);
    }
    let idx = xs
        .iter()
        .map(|x| model.inputs().require_index(x))
        .collect::<Result<Vec<_>>>()?;
    let rows = model
        .supervisors
        .iter()
        .map(|h| product_measure(&idx.iter().map(|&i| h.row(i)).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    FiniteKernel::from_measures(theta, rows)
}

/// Posterior on `Θ` after `s`, via the likelihood column
/// `θ ↦ Π_i h_θ(y_i|x_i)`. Agrees with Bayesian inversion of
/// [`sampling_kernel`] evaluated at the observed labels.
pub fn posterior<S: Scalar>(model: &SupervisedModel<S>, s: &TrainingSet) -> Result<Posterior<S>> {
    s.validate(model)?;
    let prior = model.prior.weights();
    let mut joint = Vec::with_capacity(prior.len());
    for (t, w) in prior.iter().enumerate() {
        let mut acc = w.clone();
        for (x, y) in s.pairs() {
            if acc.is_zero() {
                break;
            }
            acc = acc * model.likelihood(t, x, y)?;
        }
        joint.push(acc);
    }
    let evidence = joint.iter().fold(S::zero(), |a, b| a + b.clone());
    if evidence.is_zero() {
        return Ok(Posterior {
            measure: model.prior.clone(),
            null_evidence: true,
        });
    }
    let weights = joint.into_iter().map(|w| w / evidence.clone()).collect();
    Ok(Posterior {
        measure: FiniteMeasure::nonnegative(model.theta().clone(), weights)?,
        null_evidence: false,
    })
}

/// Posterior through full inversion of the sampling kernel on `Y^n`.
/// Exponential in `n`; the reference for [`posterior`].
pub fn posterior_by_inversion<S: Scalar>(
    model: &SupervisedModel<S>,
    s: &TrainingSet,
) -> Result<Posterior<S>> {
    s.validate(model)?;
    let p = sampling_kernel(model, &s.inputs())?;
    let bm = BayesModel::new(model.prior.clone(), p)?;
    let inv = bayes_invert(&bm);
    let obs = if s.is_empty() {
        FiniteSpace::unit().label(0).clone()
    } else {
        s.observation_label()
    };
    Ok(Posterior {
        measure: inv.kernel.row_at(&obs)?,
        null_evidence: inv.null_points.contains(&obs),
    })
}

/// Posterior predictive on `Y^m` at the test inputs.
pub fn predictive<S: Scalar>(
    model: &SupervisedModel<S>,
    s: &TrainingSet,
    t: &TestInputs,
) -> Result<Predictive<S>> {
    let post = posterior(model, s)?;
    let k = sampling_kernel(model, t.points())?;
    Ok(Predictive {
        joint: pushforward(&k, &post.measure)?,
        null_evidence: post.null_evidence,
    })
}

/// Recomputes posterior and predictive on the model restricted to the inputs
/// that actually occur in `s` and `t`, and compares with the full model.
pub fn restriction_consistency<S: Scalar>(
    model: &SupervisedModel<S>,
    s: &TrainingSet,
    t: &TestInputs,
) -> Result<bool> {
    let mut used: Vec<Label> = Vec::new();
    for x in s.inputs().into_iter().chain(t.points().iter().cloned()) {
        if !used.contains(&x) {
            used.push(x);
        }
    }
    let small = model.restrict_inputs(&used)?;
    let full_post = posterior(model, s)?;
    let small_post = posterior(&small, s)?;
    let full_pred = predictive(model, s, t)?;
    let small_pred = predictive(&small, s, t)?;
    Ok(full_post.null_evidence == small_post.null_evidence
        && full_post.measure.approx_eq(&small_post.measure, KERNEL_TOL)
        && full_pred.joint.approx_eq(&small_pred.joint, KERNEL_TOL))
}
