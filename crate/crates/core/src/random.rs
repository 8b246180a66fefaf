//! Seeded generators for random instances used by the law suites, tests and
//! benchmarks. Finite weights are small-integer ratios so that rational
//! arithmetic stays cheap.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::gaussian::{AffineGaussianMap, GaussianMeasure};
use crate::gp::{GpData, GpModel};
use crate::kernel::{FiniteKernel, MeasurableMap};
use crate::measure::{BoundedFunction, FiniteMeasure};
use crate::scalar::Scalar;
use crate::space::{FiniteSpace, Label};
use crate::supervised::{SupervisedModel, TestInputs, TrainingSet};

/// Probability that an individual weight is forced to zero.
const ZERO_RATE: f64 = 0.3;

pub fn space<R: Rng>(rng: &mut R, max: usize) -> FiniteSpace {
    FiniteSpace::range(rng.random_range(1..=max)).expect("nonempty")
}

fn integer_weights<R: Rng>(rng: &mut R, n: usize, zero_rate: f64) -> Vec<i64> {
    let mut w: Vec<i64> = (0..n)
        .map(|_| {
            if rng.random_bool(zero_rate) {
                0
            } else {
                rng.random_range(1..=9)
            }
        })
        .collect();
    if w.iter().all(|&x| x == 0) {
        w[rng.random_range(0..n)] = rng.random_range(1..=9);
    }
    w
}

fn normalize<S: Scalar>(w: &[i64]) -> Vec<S> {
    let total: i64 = w.iter().sum();
    w.iter().map(|&x| S::from_ratio(x, total)).collect()
}

/// Probability vector with some zero entries.
pub fn probability<S: Scalar, R: Rng>(rng: &mut R, space: &FiniteSpace) -> FiniteMeasure<S> {
    let w = integer_weights(rng, space.len(), ZERO_RATE);
    FiniteMeasure::probability(space.clone(), normalize(&w)).expect("normalized")
}

/// Probability vector with full support.
pub fn positive_probability<S: Scalar, R: Rng>(
    rng: &mut R,
    space: &FiniteSpace,
) -> FiniteMeasure<S> {
    let w = integer_weights(rng, space.len(), 0.0);
    FiniteMeasure::probability(space.clone(), normalize(&w)).expect("normalized")
}

pub fn signed_measure<S: Scalar, R: Rng>(rng: &mut R, space: &FiniteSpace) -> FiniteMeasure<S> {
    let w = (0..space.len())
        .map(|_| S::from_ratio(rng.random_range(-9..=9), rng.random_range(1..=7)))
        .collect();
    FiniteMeasure::signed(space.clone(), w).expect("right length")
}

/// A probability measure absolutely continuous with respect to `mu`.
pub fn dominated<S: Scalar, R: Rng>(rng: &mut R, mu: &FiniteMeasure<S>) -> FiniteMeasure<S> {
    let support: Vec<usize> = (0..mu.weights().len())
        .filter(|&i| !mu.weights()[i].is_zero())
        .collect();
    let mut w = vec![0i64; mu.weights().len()];
    let picked = integer_weights(rng, support.len(), ZERO_RATE);
    for (&i, v) in support.iter().zip(picked) {
        w[i] = v;
    }
    FiniteMeasure::probability(mu.space().clone(), normalize(&w)).expect("normalized")
}

pub fn function<S: Scalar, R: Rng>(rng: &mut R, space: &FiniteSpace) -> BoundedFunction<S> {
    let v = (0..space.len())
        .map(|_| S::from_ratio(rng.random_range(-9..=9), rng.random_range(1..=5)))
        .collect();
    BoundedFunction::new(space.clone(), v).expect("right length")
}

pub fn kernel<S: Scalar, R: Rng>(
    rng: &mut R,
    source: &FiniteSpace,
    target: &FiniteSpace,
) -> FiniteKernel<S> {
    let rows = (0..source.len())
        .map(|_| normalize(&integer_weights(rng, target.len(), ZERO_RATE)))
        .collect();
    FiniteKernel::new(source.clone(), target.clone(), rows).expect("stochastic rows")
}

pub fn map<R: Rng>(rng: &mut R, source: &FiniteSpace, target: &FiniteSpace) -> MeasurableMap {
    let images = (0..source.len())
        .map(|_| rng.random_range(0..target.len()))
        .collect();
    MeasurableMap::from_indices(source.clone(), target.clone(), images).expect("indices in range")
}

/// Joint probability on `X × Y`; some rows of `X` may carry no mass.
pub fn joint<S: Scalar, R: Rng>(rng: &mut R, max: usize) -> FiniteMeasure<S> {
    let xs = space(rng, max);
    let ys = space(rng, max);
    let prod = FiniteSpace::pair(&xs, &ys).expect("nonempty factors");
    probability(rng, &prod)
}

/// Model with `|Θ| ≤ max_theta`, `|X| ≤ max_x`, `|Y| ≤ max_y`; inputs and labels
/// are named so they cannot be confused with parameter indices.
pub fn supervised_model<S: Scalar, R: Rng>(
    rng: &mut R,
    max_theta: usize,
    max_x: usize,
    max_y: usize,
) -> SupervisedModel<S> {
    let theta = space(rng, max_theta);
    let xs = FiniteSpace::from_names((0..rng.random_range(1..=max_x)).map(|i| format!("x{i}")))
        .expect("distinct names");
    let ys = FiniteSpace::from_names((0..rng.random_range(1..=max_y)).map(|i| format!("y{i}")))
        .expect("distinct names");
    let prior = probability(rng, &theta);
    let supervisors = (0..theta.len()).map(|_| kernel(rng, &xs, &ys)).collect();
    SupervisedModel::new(prior, supervisors).expect("consistent model")
}

pub fn training_set<S: Scalar, R: Rng>(
    rng: &mut R,
    model: &SupervisedModel<S>,
    max_n: usize,
) -> TrainingSet {
    let n = rng.random_range(0..=max_n);
    let pick =
        |rng: &mut R, s: &FiniteSpace| -> Label { s.label(rng.random_range(0..s.len())).clone() };
    TrainingSet::new(
        (0..n)
            .map(|_| (pick(rng, model.inputs()), pick(rng, model.labels())))
            .collect(),
    )
}

pub fn test_inputs<S: Scalar, R: Rng>(
    rng: &mut R,
    model: &SupervisedModel<S>,
    max_m: usize,
) -> TestInputs {
    let xs = model.inputs();
    let m = rng.random_range(1..=max_m);
    TestInputs::new(
        (0..m)
            .map(|_| xs.label(rng.random_range(0..xs.len())).clone())
            .collect(),
    )
    .expect("nonempty")
}

pub fn permutation<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

pub fn matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

/// `B Bᵀ + floor·I`, comfortably positive definite.
pub fn covariance<R: Rng>(rng: &mut R, n: usize, floor: f64) -> DMatrix<f64> {
    let b = matrix(rng, n, n);
    let c = &b * b.transpose() + DMatrix::identity(n, n) * floor;
    (&c + c.transpose()) * 0.5
}

pub fn gaussian<R: Rng>(rng: &mut R, n: usize) -> GaussianMeasure {
    let mean = DVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
    GaussianMeasure::new(mean, covariance(rng, n, 0.5)).expect("positive definite")
}

/// Affine-Gaussian map `R^n → R^m`; with `noisy = false` the noise is zero.
pub fn affine<R: Rng>(rng: &mut R, n: usize, m: usize, noisy: bool) -> AffineGaussianMap {
    let noise = if noisy {
        covariance(rng, m, 0.25)
    } else {
        DMatrix::zeros(m, m)
    };
    let b = DVector::from_fn(m, |_, _| rng.random_range(-2.0..2.0));
    AffineGaussianMap::new(matrix(rng, m, n), b, noise).expect("valid map")
}

/// 1-D GP regression problem with `n ≤ max_n` training and `m ≤ max_m` test points.
pub fn gp_problem<R: Rng>(
    rng: &mut R,
    max_n: usize,
    max_m: usize,
) -> (GpModel, GpData, Vec<Vec<f64>>) {
    let gp = GpModel::squared_exponential(
        rng.random_range(0.5..2.0),
        rng.random_range(0.5..2.0),
        rng.random_range(0.01..1.0),
    )
    .expect("valid hyperparameters");
    let n = rng.random_range(1..=max_n);
    let m = rng.random_range(1..=max_m);
    let xs = (0..n).map(|_| vec![rng.random_range(-3.0..3.0)]).collect();
    let ys = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    let test = (0..m).map(|_| vec![rng.random_range(-4.0..4.0)]).collect();
    (gp, GpData::new(xs, ys).expect("matching lengths"), test)
}
