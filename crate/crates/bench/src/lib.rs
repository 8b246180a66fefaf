//! Seeded fixtures shared by the benchmarks.

use probmorph::{FiniteKernel, FiniteMeasure, FiniteSpace, GpData, GpModel, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Row-stochastic `n × m` kernel with strictly positive integer-ratio entries.
pub fn dense_kernel<S: Scalar>(rng: &mut ChaCha8Rng, n: usize, m: usize) -> FiniteKernel<S> {
    let rows = (0..n)
        .map(|_| {
            let raw: Vec<i64> = (0..m).map(|_| rng.random_range(1..20)).collect();
            let total: i64 = raw.iter().sum();
            raw.iter().map(|&w| S::from_ratio(w, total)).collect()
        })
        .collect();
    FiniteKernel::new(
        FiniteSpace::range(n).unwrap(),
        FiniteSpace::range(m).unwrap(),
        rows,
    )
    .unwrap()
}

pub fn positive_measure<S: Scalar>(rng: &mut ChaCha8Rng, n: usize) -> FiniteMeasure<S> {
    let raw: Vec<i64> = (0..n).map(|_| rng.random_range(1..20)).collect();
    let total: i64 = raw.iter().sum();
    let weights = raw.iter().map(|&w| S::from_ratio(w, total)).collect();
    FiniteMeasure::probability(FiniteSpace::range(n).unwrap(), weights).unwrap()
}

/// A 1-D regression problem with `n` training points on `[-5, 5]`.
pub fn gp_problem(rng: &mut ChaCha8Rng, n: usize, m: usize) -> (GpModel, GpData, Vec<Vec<f64>>) {
    let gp = GpModel::squared_exponential(1.0, 1.5, 0.1).unwrap();
    let xs: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random_range(-5.0..5.0)]).collect();
    let ys = xs
        .iter()
        .map(|x| x[0].sin() + rng.random_range(-0.3..0.3))
        .collect();
    let test = (0..m)
        .map(|i| vec![-5.0 + 10.0 * i as f64 / m as f64])
        .collect();
    (gp, GpData::new(xs, ys).unwrap(), test)
}
