//! Randomized law suites: the algebraic identities every correct build must
//! satisfy, run on seeded random instances.
//!
//! A [`Fault`] swaps one operation for a subtly broken version so the suites
//! themselves can be shown to catch regressions.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bayes::{
    ae_equal_tol, bayes_invert, disintegrate, invert_composition, verify_inversion_tol, BayesModel,
    InversionResult,
};
use crate::error::{Error, Result};
use crate::gaussian::{
    gauss_compose, gauss_graph, gauss_invert, gauss_pushforward, AffineGaussianMap, InvertOptions,
};
use crate::gp::{
    gp_posterior_predictive, gp_predictive_by_conditioning, gp_predictive_by_inversion,
};
use crate::json::{affine_to_json, kernel_to_json, measure_to_json, training_set_to_json};
use crate::kernel::{
    self, dirac_kernel, graph, product_kernel, pullback, Factor, FiniteKernel, MeasurableMap,
};
use crate::measure::{absolutely_continuous, radon_nikodym, tv_norm, FiniteMeasure};
use crate::random;
use crate::scalar::{Scalar, ScalarKind};
use crate::supervised::{
    posterior, posterior_by_inversion, predictive, restriction_consistency, sampling_kernel,
    Posterior, Predictive, SupervisedModel, TrainingSet,
};

/// Deliberate defects for checking that the suites detect broken builds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Composition returns its rows shifted by one.
    Compose,
    /// Pushforward returns its weights rotated by one.
    Pushforward,
    /// Bayesian inversion ignores the prior (uses a uniform one).
    BayesInvert,
    /// Gaussian composition drops the propagated noise term.
    GaussCompose,
    /// Posterior ignores the last training pair.
    Posterior,
}

impl Fault {
    pub const ALL: [Fault; 5] = [
        Fault::Compose,
        Fault::Pushforward,
        Fault::BayesInvert,
        Fault::GaussCompose,
        Fault::Posterior,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Fault::Compose => "compose",
            Fault::Pushforward => "pushforward",
            Fault::BayesInvert => "bayes-invert",
            Fault::GaussCompose => "gauss-compose",
            Fault::Posterior => "posterior",
        }
    }
}

impl fmt::Display for Fault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Fault {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Fault::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown fault {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LawConfig {
    pub seed: u64,
    pub trials: usize,
    /// Max-abs tolerance for float comparisons on finite spaces.
    pub tolerance: f64,
    /// Max-abs tolerance for the affine-Gaussian and GP laws.
    pub gaussian_tolerance: f64,
    pub fault: Option<Fault>,
}

impl Default for LawConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 200,
            tolerance: 1e-12,
            gaussian_tolerance: 1e-10,
            fault: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Category,
    Graph,
    Bayes,
    Supervised,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LawOutcome {
    pub law: &'static str,
    pub suite: Suite,
    pub trials: usize,
    pub failures: usize,
    /// Up to three failing instances.
    pub counterexamples: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LawReport {
    pub seed: u64,
    pub trials: usize,
    pub backend: ScalarKind,
    pub tolerance: f64,
    pub gaussian_tolerance: f64,
    pub fault: Option<Fault>,
    pub laws: Vec<LawOutcome>,
    pub total_failures: usize,
}

impl LawReport {
    pub fn passed(&self) -> bool {
        self.total_failures == 0
    }

    pub fn outcome(&self, law: &str) -> Option<&LawOutcome> {
        self.laws.iter().find(|o| o.law == law)
    }
}

const MAX_COUNTEREXAMPLES: usize = 3;
const MAX_SPACE: usize = 6;
const MAX_JOINT_FACTOR: usize = 8;
const MAX_GAUSS_DIM: usize = 5;

/// Operations as seen by the laws, with the configured fault applied.
struct Ops {
    fault: Option<Fault>,
    tol: f64,
    gtol: f64,
}

impl Ops {
    fn compose<S: Scalar>(
        &self,
        t1: &FiniteKernel<S>,
        t2: &FiniteKernel<S>,
    ) -> Result<FiniteKernel<S>> {
        let c = kernel::compose(t1, t2)?;
        if self.fault != Some(Fault::Compose) {
            return Ok(c);
        }
        let mut rows = c.rows().to_vec();
        rows.rotate_left(1);
        FiniteKernel::new(c.source().clone(), c.target().clone(), rows)
    }

    fn pushforward<S: Scalar>(
        &self,
        t: &FiniteKernel<S>,
        m: &FiniteMeasure<S>,
    ) -> Result<FiniteMeasure<S>> {
        let p = kernel::pushforward(t, m)?;
        if self.fault != Some(Fault::Pushforward) {
            return Ok(p);
        }
        let mut w = p.weights().to_vec();
        w.rotate_left(1);
        FiniteMeasure::signed(p.space().clone(), w)
    }

    fn invert<S: Scalar>(&self, m: &BayesModel<S>) -> Result<InversionResult<S>> {
        if self.fault != Some(Fault::BayesInvert) {
            return Ok(bayes_invert(m));
        }
        let flat = BayesModel::new(
            FiniteMeasure::uniform(m.theta().clone()),
            m.sampling().clone(),
        )?;
        Ok(bayes_invert(&flat))
    }

    fn posterior<S: Scalar>(
        &self,
        m: &SupervisedModel<S>,
        s: &TrainingSet,
    ) -> Result<Posterior<S>> {
        if self.fault == Some(Fault::Posterior) && !s.is_empty() {
            let kept = s.pairs()[..s.len() - 1].to_vec();
            return posterior(m, &TrainingSet::new(kept));
        }
        posterior(m, s)
    }

    fn predictive<S: Scalar>(
        &self,
        m: &SupervisedModel<S>,
        s: &TrainingSet,
        t: &crate::supervised::TestInputs,
    ) -> Result<Predictive<S>> {
        let post = self.posterior(m, s)?;
        let k = sampling_kernel(m, t.points())?;
        Ok(Predictive {
            joint: self.pushforward(&k, &post.measure)?,
            null_evidence: post.null_evidence,
        })
    }

    fn gauss_compose(
        &self,
        t1: &AffineGaussianMap,
        t2: &AffineGaussianMap,
    ) -> Result<AffineGaussianMap> {
        let c = gauss_compose(t1, t2)?;
        if self.fault != Some(Fault::GaussCompose) {
            return Ok(c);
        }
        AffineGaussianMap::new(c.a().clone(), c.b().clone(), t2.noise().clone())
    }

    fn same_kernel<S: Scalar>(&self, a: &FiniteKernel<S>, b: &FiniteKernel<S>) -> bool {
        a.source() == b.source() && a.target() == b.target() && a.approx_eq(b, self.tol)
    }

    fn same_measure<S: Scalar>(&self, a: &FiniteMeasure<S>, b: &FiniteMeasure<S>) -> bool {
        a.space() == b.space() && a.approx_eq(b, self.tol)
    }
}

type Outcome = Result<Option<Value>>;
type Check = fn(&Ops, &mut ChaCha8Rng) -> Outcome;

struct Law {
    name: &'static str,
    suite: Suite,
    check: Check,
}

fn pass() -> Outcome {
    Ok(None)
}

fn verdict(ok: bool, witness: impl FnOnce() -> Value) -> Outcome {
    Ok(if ok { None } else { Some(witness()) })
}

fn compose_associativity<S: Scalar>(ops: &Ops, rng: &mut ChaCha8Rng) -> Outcome {
    let sp: Vec<_> = (0..4).map(|_| random::space(rng, MAX_SPACE)).collect();
    let t1 = random::kernel::<S, _>(rng, &sp[0], &sp[1]);
    let t2 = random::kernel::<S, _>(rng, &sp[1], &sp[2]);
    let t3 = random::kernel::<S, _>(rng, &sp[2], &sp[3]);
    let lhs = ops.compose(&ops.compose(&t1, &t2)?, &t3)?;
    let rhs = ops.compose(&t1, &ops.compose(&t2, &t3)?)?;
    verdict(
        ops.same_kernel(&lhs, &rhs),
        || json!({"t1": kernel_to_json(&t1), "t2": kernel_to_json(&t2), "t3": kernel_to_json(&t3)}),
    )
}

fn compose_identity<S: Scalar>(ops: &Ops, rng: &mut ChaCha8Rng) -> Outcome {
    let (x, y) = (random::space(rng, MAX_SPACE), random::space(rng, MAX_SPACE));
    let t = random::kernel::<S, _>(rng, &x, &y);
    let left = ops.compose(&FiniteKernel::identity(x), &t)?;
    let right = ops.compose(&t, &FiniteKernel::identity(y))?;
    verdict(
        ops.same_kernel(&left, &t) && ops.same_kernel(&right, &t),
        || json!({"t": kernel_to_json(&t)}),
    )
}

fn pushforward_functoriality<S: Scalar>(ops: &Ops, rng: &mut ChaCha8Rng) -> Outcome {
    let sp: Vec<_> = (0..3).map(|_| random::space(rng, MAX_SPACE)).collect();
    let t1 = random::kernel::<S, _>(rng, &sp[0], &sp[1]);
    let t2 = random::kernel::<S, _>(rng, &sp[1], &sp[2]);
    let mu = random::probability::<S, _>(rng, &sp[0]);
    let lhs = ops.pushforward(&ops.compose(&t1, &t2)?, &mu)?;
    let rhs = ops.pushforward(&t2, &ops.pushforward(&t1, &mu)?)?;
    let id = ops.pushforward(&FiniteKernel::identity(sp[0].clone()), &mu)?;
    verdict(
        ops.same_measure(&lhs, &rhs) && ops.same_measure(&id, &mu),
        || json!({"t1": kernel_to_json(&t1), "t2": kernel_to_json(&t2), "mu": measure_to_json(&mu)}),
    )
}

fn pullback_contravariance<S: Scalar>(ops: &Ops, rng: &mut ChaCha8Rng) -> Outcome {
    let sp: Vec<_> = (0..3).map(|_| random::space(rng, MAX_SPACE)).collect();
    let t1 = random::kernel::<S, _>(rng, &sp[0], &sp[1]);
    let t2 = random::kernel::<S, _>(rng, &sp[1], &sp[2]);
    let f = random::function::<S, _>(rng, &sp[2]);
    let lhs = pullback(&ops.compose(&t1, &t2)?, &f)?;
    let rhs = pullback(&t1, &pullback(&t2, &f)?)?;
    verdict(
        lhs.approx_eq(&rhs, ops.tol),
        || json!({"t1": kernel_to_json(&t1), "t2": kernel_to_json(&t2), "f": values_json(f.values())}),
    )
}

fn values_json<S: Scalar>(xs: &[S]) -> Value {
    Value::Array(xs.iter().map(Scalar::to_json).collect())
}

fn duality<S: Scalar>(ops: &Ops, rng: &mut ChaCha8Rng) -> Outcome {
    let (x, y) = (random::space(rng, MAX_SPACE), random::space(rng, MAX_SPACE));
    let t = random::kernel::<S, _>(rng, &x, &y);
    let mu = random::signed_measure::<S, _>(rng, &x);
    let g = random::function::<S, _>(rng, &y);
    let lhs = g.integrate(&ops.pushforward(&t, &mu)?)?;
    let rhs = pullback(&t, &g)?.integrate(&mu)?;
    verdict(
        lhs.close(&rhs, ops.tol),
        || json!({"t": kernel_to_json(&t), "mu": measure_to_json(&mu), "g": values_json(g.values())}),
    )
}

fn tv_contraction<S: Scalar>(ops: &Ops, rng: &mut ChaCha8Rng) -> Outcome {
    let (x, y) = (random::space(rng, MAX_SPACE), random::space(rng, MAX_SPACE));
    let t = random::kernel::<S, _>(rng, &x, &y);
    let mu = random::signed_measure::<S, _>(rng, &x);
    let pushed = tv_norm(&ops.pushforward(&t, &mu)?);
    let bound = tv_norm(&mu);
    verdict(
        pushed <= bound || pushed.close(&bound, ops.tol),
        || json!({"t": kernel_to_json(&t), "mu": measure_to_json(&mu)}),
    )
}

fn graph_projection_target<S: Scalar>(ops: &Ops, rng: &mut ChaCha8Rng) -> Outcome {
    let (x, y) = (random::space(rng, MAX_SPACE), random::space(rng, MAX_SPACE));
    let t = random::kernel::<S, _>(rng, &x, &y);
    let g = graph(&t);
    let proj = dirac_kernel(&MeasurableMap::projection(g.target(), Factor::Second)?);
    verdict(
        ops.same_kernel(&ops.compose(&g, &proj)?, &t),
        || json!({"t": kernel_to_json(&t)}),
    )
}

fn graph_projection_source<S: Scalar>(ops: &Ops, rng: &mut ChaCha8Rng) -> Outcome {
    let (x, y) = (random::space(rng, MAX_SPACE), random::space(rng, MAX_SPACE));
    let t = random::kernel::<S, _>(rng, &x, &y);
    let g = graph(&t);
    let proj = dirac_kernel(&MeasurableMap::projection(g.target(), Factor::First)?);
    verdict(
        ops.same_kernel(&ops.compose(&g, &proj)?, &FiniteKernel::identity(x)),
        || json!({"t": kernel_to_json(&t)}),
    )
}

/// `Γ_{p2∘p1} = (Id × p2) ∘ Γ_{p1}`.
fn graph_of_composite<S: Scalar>(ops: &Ops, rng: &mut ChaCha8Rng) -> Outcome {
    let sp: Vec<_> = (0..3).map(|_| random::space(rng, MAX_SPACE)).collect();
    let p1 = random::kernel::<S, _>(rng, &sp[0], &sp[1]);
    let p2 = random::kernel::<S, _>(rng, &sp[1], &sp[2]);
    let lhs = graph(&ops.compose(&p1, &p2)?);
    let id_times_p2 = product_kernel(&FiniteKernel::identity(sp[0].clone()), &p2)?;
    let rhs = ops.compose(&graph(&p1), &id_times_p2)?;
    verdict(
        ops.same_kernel(&lhs, &rhs),
        || json!({"p1": kernel_to_json(&p1), "p2": kernel_to_json(&p2)}),
    )
}

/// `(κ × Id) ∘ Γ_{p∘κ} = Γ_p ∘ κ` for a measurable map `κ`.
fn graph_pushforward_map<S: Scalar>(ops: &Ops, rng: &mut ChaCha8Rng) -> Outcome {
    let sp: Vec<_> = (0..3).map(|_| random::space(rng, MAX_SPACE)).collect();
    let kappa = random::map(rng, &sp[0], &sp[1]);
    let dk = dirac_kernel::<S>(&kappa);
    let p = random::kernel::<S, _>(rng, &sp[1], &sp[2]);
    let kappa_times_id = product_kernel(&dk, &FiniteKernel::identity(sp[2].clone()))?;
    let lhs = ops.compose(&graph(&ops.compose(&dk, &p)?), &kappa_times_id)?;
    let rhs = ops.compose(&dk, &graph(&p))?;
    verdict(
        ops.same_kernel(&lhs, &rhs),
        || json!({"kappa": kernel_to_json(&dk), "p": kernel_to_json(&p)}),
    )
}

fn disintegration_round_trip<S: Scalar>(ops: &Ops, rng: &mut ChaCha8Rng) -> Outcome {
    let mu = random::joint::<S, _>(rng, MAX_JOINT_FACTOR);
    let d = disintegrate(&mu)?;
    let first = kernel::marginal(&mu, Factor::First)?;
    let back = ops.pushforward(&graph(&d.kernel), &first)?;
    verdict(
        ops.same_measure(&back, &mu),
        || json!({"mu": measure_to_json(&mu)}),
    )
}

fn random_bayes_model<S: Scalar>(rng: &mut ChaCha8Rng) -> BayesModel<S> {
    let (theta, x) = (random::space(rng, MAX_SPACE), random::space(rng, MAX_SPACE));
    let prior = random::probability::<S, _>(rng, &theta);
    BayesModel::new(prior, random::kernel(rng, &theta, &x)).expect("matching spaces")
}

fn model_json<S: Scalar>(m: &BayesModel<S>) -> Value {
    json!({"prior": measure_to_json(m.prior()), "sampling": kernel_to_json(m.sampling())})
}

fn inversion_identity<S: Scalar>(ops: &Ops, rng: &mut ChaCha8Rng) -> Outcome {
    let m = random_bayes_model::<S>(rng);
    let q = ops.invert(&m)?.kernel;
    verdict(verify_inversion_tol(&m, &q, ops.tol)?, || model_json(&m))
}

/// The sampling kernel is an inversion of its own inversion, relative to the
/// predictive, and is recovered a.e. by inverting twice.
fn double_inversion<S: Scalar>(ops: &Ops, rng: &mut ChaCha8Rng) -> Outcome {
    let m = random_bayes_model::<S>(rng);
    let q = ops.invert(&m)?.kernel;
    let back_model = BayesModel::new(m.predictive(), q)?;
    let back = ops.invert(&back_model)?.kernel;
    let ok = verify_inversion_tol(&back_model, m.sampling(), ops.tol)?
        && ae_equal_tol(&back, m.sampling(), m.prior(), ops.tol)?;
    verdict(ok, || model_json(&m))
}

fn composite_inversion<S: Scalar>(ops: &Ops, rng: &mut ChaCha8Rng) -> Outcome {
    let m1 = random_bayes_model::<S>(rng);
    let z = random::space(rng, MAX_SPACE);
    let p2 = random::kernel::<S, _>(rng, m1.sampling().target(), &z);
    let chained = invert_composition(&m1, &p2)?;
    let composite = BayesModel::new(m1.prior().clone(), ops.compose(m1.sampling(), &p2)?)?;
    let direct = ops.invert(&composite)?.kernel;
    let ok = verify_inversion_tol(&composite, &chained, ops.tol)?
        && ae_equal_tol(&chained, &direct, &composite.predictive(), ops.tol)?;
    verdict(
        ok,
        || json!({"m1": model_json(&m1), "p2": kernel_to_json(&p2)}),
    )
}

fn absolute_continuity<S: Scalar>(ops: &Ops, rng: &mut ChaCha8Rng) -> Outcome {
    let (x, y) = (random::space(rng, MAX_SPACE), random::space(rng, MAX_SPACE));
    let mu = random::probability::<S, _>(rng, &x);
    let nu = random::dominated(rng, &mu);
    let t = random::kernel::<S, _>(rng, &x, &y);
    let ok = absolutely_continuous(&ops.pushforward(&t, &nu)?, &ops.pushforward(&t, &mu)?);
    verdict(
        ok,
        || json!({"t": kernel_to_json(&t), "mu": measure_to_json(&mu), "nu": measure_to_json(&nu)}),
    )
}

fn radon_nikodym_reconstruction<S: Scalar>(ops: &Ops, rng: &mut ChaCha8Rng) -> Outcome {
    let x = random::space(rng, MAX_SPACE);
    let mu = random::probability::<S, _>(rng, &x);
    let nu = random::dominated(rng, &mu);
    let density = radon_nikodym(&nu, &mu)?;
    verdict(
        ops.same_measure(&mu.weighted_by(&density)?, &nu),
        || json!({"mu": measure_to_json(&mu), "nu": measure_to_json(&nu)}),
    )
}

fn random_supervised<S: Scalar>(rng: &mut ChaCha8Rng) -> SupervisedModel<S> {
    random::supervised_model(rng, 5, 5, 4)
}

fn supervised_json<S: Scalar>(m: &SupervisedModel<S>, s: &TrainingSet) -> Value {
    json!({"model": crate::json::supervised_model_to_json(m), "training": training_set_to_json(s)})
}

fn sampling_factorization<S: Scalar>(ops: &Ops, rng: &mut ChaCha8Rng) -> Outcome {
    let m = random_supervised::<S>(rng);
    let t = random::test_inputs(rng, &m, 3);
    let k = sampling_kernel(&m, t.points())?;
    for (theta, h) in m.supervisors().iter().enumerate() {
        let as_pred = Predictive {
            joint: k.row(theta),
            null_evidence: false,
        };
        for (x, marg) in t.points().iter().zip(as_pred.marginals(m.labels())) {
            if !ops.same_measure(&marg, &h.row_at(x)?) {
                return Ok(Some(json!({
                    "model": crate::json::supervised_model_to_json(&m),
                    "inputs": crate::json::test_inputs_to_json(&t),
                })));
            }
        }
    }
    pass()
}

fn posterior_matches_inversion<S: Scalar>(ops: &Ops, rng: &mut ChaCha8Rng) -> Outcome {
    let m = random_supervised::<S>(rng);
    let s = random::training_set(rng, &m, 3);
    let fast = ops.posterior(&m, &s)?;
    let slow = posterior_by_inversion(&m, &s)?;
    verdict(
        fast.null_evidence == slow.null_evidence && ops.same_measure(&fast.measure, &slow.measure),
        || supervised_json(&m, &s),
    )
}

fn sequential_update<S: Scalar>(ops: &Ops, rng: &mut ChaCha8Rng) -> Outcome {
    let m = random_supervised::<S>(rng);
    let a = random::training_set(rng, &m, 3);
    let b = random::training_set(rng, &m, 3);
    let full = ops.posterior(&m, &a.concat(&b))?;
    if full.null_evidence {
        // the combined data is impossible under every θ; nothing to chain
        return pass();
    }
    let first = ops.posterior(&m, &a)?;
    let chained = ops.posterior(&m.with_prior(first.measure)?, &b)?;
    verdict(ops.same_measure(&full.measure, &chained.measure), || {
        json!({"model": crate::json::supervised_model_to_json(&m),
               "a": training_set_to_json(&a), "b": training_set_to_json(&b)})
    })
}

fn exchangeability<S: Scalar>(ops: &Ops, rng: &mut ChaCha8Rng) -> Outcome {
    let m = random_supervised::<S>(rng);
    let s = random::training_set(rng, &m, 4);
    let t = random::test_inputs(rng, &m, 2);
    let perm = random::permutation(rng, s.len());
    let shuffled = s.permuted(&perm)?;
    let ok = ops.same_measure(
        &ops.posterior(&m, &s)?.measure,
        &ops.posterior(&m, &shuffled)?.measure,
    ) && ops.same_measure(
        &ops.predictive(&m, &s, &t)?.joint,
        &ops.predictive(&m, &shuffled, &t)?.joint,
    );
    verdict(ok, || {
        json!({"model": crate::json::supervised_model_to_json(&m),
               "training": training_set_to_json(&s), "permutation": perm})
    })
}

fn restriction<S: Scalar>(ops: &Ops, rng: &mut ChaCha8Rng) -> Outcome {
    let m = random_supervised::<S>(rng);
    let s = random::training_set(rng, &m, 3);
    let t = random::test_inputs(rng, &m, 2);
    let ok = restriction_consistency(&m, &s, &t)?
        && ops.same_measure(
            &ops.predictive(&m, &s, &t)?.joint,
            &predictive(&m, &s, &t)?.joint,
        );
    verdict(ok, || supervised_json(&m, &s))
}

fn gauss_dims(rng: &mut ChaCha8Rng, k: usize) -> Vec<usize> {
    use rand::Rng;
    (0..k)
        .map(|_| rng.random_range(1..=MAX_GAUSS_DIM))
        .collect()
}

fn gauss_associativity(ops: &Ops, rng: &mut ChaCha8Rng) -> Outcome {
    use rand::Rng;
    let d = gauss_dims(rng, 4);
    let ts: Vec<_> = (0..3)
        .map(|i| {
            let noisy = rng.random_bool(0.7);
            random::affine(rng, d[i], d[i + 1], noisy)
        })
        .collect();
    let lhs = ops.gauss_compose(&ops.gauss_compose(&ts[0], &ts[1])?, &ts[2])?;
    let rhs = ops.gauss_compose(&ts[0], &ops.gauss_compose(&ts[1], &ts[2])?)?;
    verdict(lhs.max_abs_diff(&rhs) <= ops.gtol, || {
        Value::Array(ts.iter().map(affine_to_json).collect())
    })
}

fn gauss_functoriality(ops: &Ops, rng: &mut ChaCha8Rng) -> Outcome {
    let d = gauss_dims(rng, 3);
    let t1 = random::affine(rng, d[0], d[1], true);
    let t2 = random::affine(rng, d[1], d[2], true);
    let g = random::gaussian(rng, d[0]);
    let lhs = gauss_pushforward(&ops.gauss_compose(&t1, &t2)?, &g)?;
    let rhs = gauss_pushforward(&t2, &gauss_pushforward(&t1, &g)?)?;
    verdict(lhs.max_abs_diff(&rhs) <= ops.gtol, || {
        json!({"t1": affine_to_json(&t1), "t2": affine_to_json(&t2),
               "g": crate::json::gaussian_to_json(&g)})
    })
}

fn gauss_inversion_identity(ops: &Ops, rng: &mut ChaCha8Rng) -> Outcome {
    let d = gauss_dims(rng, 2);
    let t = random::affine(rng, d[0], d[1], true);
    let prior = random::gaussian(rng, d[0]);
    let q = gauss_invert(&t, &prior, InvertOptions::default())?;
    let lhs = gauss_graph(&q, &gauss_pushforward(&t, &prior)?)?.mirror(d[1])?;
    let rhs = gauss_graph(&t, &prior)?;
    verdict(
        lhs.max_abs_diff(&rhs) <= ops.gtol,
        || json!({"t": affine_to_json(&t), "prior": crate::json::gaussian_to_json(&prior)}),
    )
}

fn gauss_double_inversion(ops: &Ops, rng: &mut ChaCha8Rng) -> Outcome {
    let d = gauss_dims(rng, 2);
    let t = random::affine(rng, d[0], d[1], true);
    let prior = random::gaussian(rng, d[0]);
    let opts = InvertOptions::default();
    let evidence = gauss_pushforward(&t, &prior)?;
    let q = gauss_invert(&t, &prior, opts)?;
    let back = gauss_invert(&q, &evidence, opts)?;
    let round_trip = gauss_graph(&back, &gauss_pushforward(&q, &evidence)?)?;
    let original = gauss_graph(&t, &prior)?;
    verdict(
        round_trip.max_abs_diff(&original) <= ops.gtol,
        || json!({"t": affine_to_json(&t), "prior": crate::json::gaussian_to_json(&prior)}),
    )
}

fn gp_two_route(ops: &Ops, rng: &mut ChaCha8Rng) -> Outcome {
    let (gp, data, test) = random::gp_problem(rng, 10, 5);
    let opts = InvertOptions::default();
    let a = gp_posterior_predictive(&gp, &data, &test, opts)?;
    let b = gp_predictive_by_conditioning(&gp, &data, &test, opts)?;
    let c = gp_predictive_by_inversion(&gp, &data, &test, opts)?;
    verdict(
        a.max_abs_diff(&b) <= ops.gtol && a.max_abs_diff(&c) <= ops.gtol,
        || {
            json!({"gp": serde_json::to_value(gp).expect("plain config"),
               "xs": data.xs, "ys": data.ys, "test": test})
        },
    )
}

fn all_laws<S: Scalar>() -> Vec<Law> {
    macro_rules! law {
        ($name:literal, $suite:ident, $f:ident) => {
            Law {
                name: $name,
                suite: Suite::$suite,
                check: $f::<S>,
            }
        };
        // backend-independent laws
        ($name:literal, $suite:ident, $f:ident, gaussian) => {
            Law {
                name: $name,
                suite: Suite::$suite,
                check: $f,
            }
        };
    }
    vec![
        law!("compose-associativity", Category, compose_associativity),
        law!("compose-identity", Category, compose_identity),
        law!(
            "pushforward-functoriality",
            Category,
            pushforward_functoriality
        ),
        law!("pullback-contravariance", Category, pullback_contravariance),
        law!("pushforward-pullback-duality", Category, duality),
        law!("tv-contraction", Category, tv_contraction),
        law!("absolute-continuity", Category, absolute_continuity),
        law!(
            "radon-nikodym-reconstruction",
            Category,
            radon_nikodym_reconstruction
        ),
        law!("graph-projection-target", Graph, graph_projection_target),
        law!("graph-projection-source", Graph, graph_projection_source),
        law!("graph-of-composite", Graph, graph_of_composite),
        law!("graph-pushforward-map", Graph, graph_pushforward_map),
        law!(
            "disintegration-round-trip",
            Bayes,
            disintegration_round_trip
        ),
        law!("inversion-identity", Bayes, inversion_identity),
        law!("double-inversion", Bayes, double_inversion),
        law!("composite-inversion", Bayes, composite_inversion),
        law!("sampling-factorization", Supervised, sampling_factorization),
        law!(
            "posterior-matches-inversion",
            Supervised,
            posterior_matches_inversion
        ),
        law!("sequential-update", Supervised, sequential_update),
        law!("exchangeability", Supervised, exchangeability),
        law!("restriction-consistency", Supervised, restriction),
        law!(
            "gauss-compose-associativity",
            Gaussian,
            gauss_associativity,
            gaussian
        ),
        law!(
            "gauss-functoriality",
            Gaussian,
            gauss_functoriality,
            gaussian
        ),
        law!(
            "gauss-inversion-identity",
            Gaussian,
            gauss_inversion_identity,
            gaussian
        ),
        law!(
            "gauss-double-inversion",
            Gaussian,
            gauss_double_inversion,
            gaussian
        ),
        law!("gp-two-route", Gaussian, gp_two_route, gaussian),
    ]
}

/// Names of all laws, in run order.
pub fn law_names() -> Vec<&'static str> {
    all_laws::<f64>().into_iter().map(|l| l.name).collect()
}

/// Runs every law.
pub fn run<S: Scalar>(cfg: &LawConfig) -> LawReport {
    run_filtered::<S>(cfg, |_| true)
}

/// Runs the laws whose name passes `keep`. Each law draws from its own
/// stream of the seeded generator, so results do not depend on which other
/// laws are selected.
pub fn run_filtered<S: Scalar>(cfg: &LawConfig, keep: impl Fn(&str) -> bool) -> LawReport {
    let ops = Ops {
        fault: cfg.fault,
        tol: cfg.tolerance,
        gtol: cfg.gaussian_tolerance,
    };
    let laws: Vec<LawOutcome> = all_laws::<S>()
        .into_iter()
        .enumerate()
        .filter(|(_, law)| keep(law.name))
        .map(|(stream, law)| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(stream as u64);
            let mut failures = 0;
            let mut counterexamples = Vec::new();
            for trial in 0..cfg.trials {
                let witness = match (law.check)(&ops, &mut rng) {
                    Ok(None) => continue,
                    Ok(Some(w)) => w,
                    Err(e) => json!({"error": e.to_string()}),
                };
                failures += 1;
                if counterexamples.len() < MAX_COUNTEREXAMPLES {
                    counterexamples.push(json!({"trial": trial, "instance": witness}));
                }
            }
            LawOutcome {
                law: law.name,
                suite: law.suite,
                trials: cfg.trials,
                failures,
                counterexamples,
            }
        })
        .collect();
    LawReport {
        seed: cfg.seed,
        trials: cfg.trials,
        backend: S::KIND,
        tolerance: cfg.tolerance,
        gaussian_tolerance: cfg.gaussian_tolerance,
        fault: cfg.fault,
        total_failures: laws.iter().map(|l| l.failures).sum(),
        laws,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn quick(fault: Option<Fault>) -> LawConfig {
        LawConfig {
            seed: 7,
            trials: 25,
            fault,
            ..LawConfig::default()
        }
    }

    #[test]
    fn correct_build_passes() {
        let report = run::<Rational>(&quick(None));
        assert!(
            report.passed(),
            "{:#?}",
            report
                .laws
                .iter()
                .filter(|l| l.failures > 0)
                .collect::<Vec<_>>()
        );
        let report = run::<f64>(&quick(None));
        assert!(
            report.passed(),
            "{:#?}",
            report
                .laws
                .iter()
                .filter(|l| l.failures > 0)
                .collect::<Vec<_>>()
        );
    }

    #[test]
    fn every_fault_is_caught() {
        for fault in Fault::ALL {
            let report = run::<Rational>(&quick(Some(fault)));
            assert!(!report.passed(), "{fault} went unnoticed");
        }
    }

    #[test]
    fn fault_names_round_trip() {
        for fault in Fault::ALL {
            assert_eq!(fault.as_str().parse::<Fault>().unwrap(), fault);
        }
        assert!("nope".parse::<Fault>().is_err());
    }

    #[test]
    fn streams_are_independent_of_selection() {
        let cfg = quick(None);
        let all = run::<f64>(&cfg);
        let one = run_filtered::<f64>(&cfg, |n| n == "double-inversion");
        assert_eq!(one.laws[0], *all.outcome("double-inversion").unwrap());
    }
}
