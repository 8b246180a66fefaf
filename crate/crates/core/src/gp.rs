//! Gaussian process regression through finite marginals.
//!
//! Only the joint law of `f` at the finitely many training and test inputs is
//! ever built. Observation noise is added on the training block only; test
//! predictions are for the noiseless `f(t)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{
    condition_number, gauss_invert, AffineGaussianMap, GaussianMeasure, InvertOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum CovarianceFn {
    /// `amplitude² · exp(−|x − x'|² / (2 · length_scale²))`.
    SquaredExponential { length_scale: f64, amplitude: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MeanFn {
    #[default]
    Zero,
    Constant {
        value: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GpModel {
    pub kernel: CovarianceFn,
    #[serde(default)]
    pub mean: MeanFn,
    pub noise_var: f64,
}

/// Training data `(x_i, y_i)` with vector inputs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GpData {
    pub xs: Vec<Vec<f64>>,
    pub ys: Vec<f64>,
}

impl CovarianceFn {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            CovarianceFn::SquaredExponential {
                length_scale,
                amplitude,
            } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                amplitude * amplitude * (-d2 / (2.0 * length_scale * length_scale)).exp()
            }
        }
    }
}

impl MeanFn {
    pub fn eval(&self, _x: &[f64]) -> f64 {
        match *self {
            MeanFn::Zero => 0.0,
            MeanFn::Constant { value } => value,
        }
    }
}

impl GpModel {
    pub fn squared_exponential(length_scale: f64, amplitude: f64, noise_var: f64) -> Result<Self> {
        let gp = Self {
            kernel: CovarianceFn::SquaredExponential {
                length_scale,
                amplitude,
            },
            mean: MeanFn::Zero,
            noise_var,
        };
        gp.validate()?;
        Ok(gp)
    }

    pub fn with_mean(self, mean: MeanFn) -> Self {
        Self { mean, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let CovarianceFn::SquaredExponential {
            length_scale,
            amplitude,
        } = self.kernel;
        if !(length_scale > 0.0 && length_scale.is_finite()) {
            return Err(Error::Invalid(format!(
                "length_scale must be positive, got {length_scale}"
            )));
        }
        if !amplitude.is_finite() {
            return Err(Error::Invalid("amplitude must be finite".into()));
        }
        if !(self.noise_var >= 0.0 && self.noise_var.is_finite()) {
            return Err(Error::Invalid(format!(
                "noise_var must be ≥ 0, got {}",
                self.noise_var
            )));
        }
        if let MeanFn::Constant { value } = self.mean {
            if !value.is_finite() {
                return Err(Error::Invalid("mean constant must be finite".into()));
            }
        }
        Ok(())
    }

    pub fn gram(&self, a: &[Vec<f64>], b: &[Vec<f64>]) -> DMatrix<f64> {
        DMatrix::from_fn(a.len(), b.len(), |i, j| self.kernel.eval(&a[i], &b[j]))
    }

    pub fn mean_vector(&self, xs: &[Vec<f64>]) -> DVector<f64> {
        DVector::from_iterator(xs.len(), xs.iter().map(|x| self.mean.eval(x)))
    }

    /// Prior law of `(f(t_1), …, f(t_m))`.
    pub fn prior_marginal(&self, test: &[Vec<f64>]) -> Result<GaussianMeasure> {
        GaussianMeasure::new(self.mean_vector(test), self.gram(test, test))
    }

    /// `K(X,X) + ε²I`, the matrix the predictive has to invert.
    pub fn train_covariance(&self, xs: &[Vec<f64>]) -> DMatrix<f64> {
        let mut k = self.gram(xs, xs);
        for i in 0..xs.len() {
            k[(i, i)] += self.noise_var;
        }
        k
    }
}

impl GpData {
    pub fn new(xs: Vec<Vec<f64>>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::LengthMismatch {
                expected: xs.len(),
                actual: ys.len(),
            });
        }
        check_inputs(&xs)?;
        if ys.iter().any(|y| !y.is_finite()) {
            return Err(Error::Invalid("non-finite training target".into()));
        }
        Ok(Self { xs, ys })
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }
}

fn check_inputs(xs: &[Vec<f64>]) -> Result<()> {
    if let Some(first) = xs.first() {
        if let Some(bad) = xs.iter().find(|x| x.len() != first.len()) {
            return Err(Error::DimensionMismatch {
                context: "input dimension",
                expected: first.len(),
                actual: bad.len(),
            });
        }
    }
    if xs.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("non-finite input coordinate".into()));
    }
    Ok(())
}

fn check_compatible(train: &[Vec<f64>], test: &[Vec<f64>]) -> Result<()> {
    if test.is_empty() {
        return Err(Error::Invalid("test inputs must be nonempty".into()));
    }
    check_inputs(test)?;
    if let (Some(a), Some(b)) = (train.first(), test.first()) {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch {
                context: "test vs training input dimension",
                expected: a.len(),
                actual: b.len(),
            });
        }
    }
    Ok(())
}

/// Joint law of `(f(T), y(X))`: test block first, then the noisy training block.
pub fn gp_joint(
    gp: &GpModel,
    train_xs: &[Vec<f64>],
    test_xs: &[Vec<f64>],
) -> Result<GaussianMeasure> {
    gp.validate()?;
    check_inputs(train_xs)?;
    check_compatible(train_xs, test_xs)?;
    let (m, n) = (test_xs.len(), train_xs.len());
    let mut cov = DMatrix::zeros(m + n, m + n);
    let ktx = gp.gram(test_xs, train_xs);
    cov.view_mut((0, 0), (m, m))
        .copy_from(&gp.gram(test_xs, test_xs));
    cov.view_mut((0, m), (m, n)).copy_from(&ktx);
    cov.view_mut((m, 0), (n, m)).copy_from(&ktx.transpose());
    cov.view_mut((m, m), (n, n))
        .copy_from(&gp.train_covariance(train_xs));
    let mut mean = DVector::zeros(m + n);
    mean.rows_mut(0, m).copy_from(&gp.mean_vector(test_xs));
    mean.rows_mut(m, n).copy_from(&gp.mean_vector(train_xs));
    GaussianMeasure::new(mean, cov)
}

/// Posterior predictive of the noiseless `f(T)` given the training data,
/// solved through a Cholesky factor of `K(X,X) + ε²I`.
pub fn gp_posterior_predictive(
    gp: &GpModel,
    data: &GpData,
    test_xs: &[Vec<f64>],
    opts: InvertOptions,
) -> Result<GaussianMeasure> {
    gp.validate()?;
    check_compatible(&data.xs, test_xs)?;
    if data.is_empty() {
        return gp.prior_marginal(test_xs);
    }
    let mut k = gp.train_covariance(&data.xs);
    if let Some(j) = opts.jitter {
        for i in 0..k.nrows() {
            k[(i, i)] += j;
        }
    }
    let condition = condition_number(&k);
    if condition.is_nan() || condition > opts.max_condition {
        return Err(Error::IllConditioned {
            condition,
            bound: opts.max_condition,
        });
    }
    let chol = k.clone().cholesky().ok_or(Error::IllConditioned {
        condition,
        bound: opts.max_condition,
    })?;
    let ktx = gp.gram(test_xs, &data.xs);
    let resid = DVector::from_column_slice(&data.ys) - gp.mean_vector(&data.xs);
    let mut alpha = chol.solve(&resid);
    // one step of iterative refinement
    alpha += chol.solve(&(&resid - &k * &alpha));
    let mean = gp.mean_vector(test_xs) + &ktx * alpha;
    let v = chol
        .l()
        .solve_lower_triangular(&ktx.transpose())
        .ok_or(Error::IllConditioned {
            condition,
            bound: opts.max_condition,
        })?;
    let cov = gp.gram(test_xs, test_xs) - v.transpose() * v;
    GaussianMeasure::new(mean, (&cov + cov.transpose()) * 0.5)
}

/// The same predictive by Schur-complement conditioning of [`gp_joint`] on
/// its training block.
pub fn gp_predictive_by_conditioning(
    gp: &GpModel,
    data: &GpData,
    test_xs: &[Vec<f64>],
    opts: InvertOptions,
) -> Result<GaussianMeasure> {
    let joint = gp_joint(gp, &data.xs, test_xs)?;
    let cond = joint.conditional_of_head(test_xs.len(), opts)?;
    cond.apply(&DVector::from_column_slice(&data.ys))
}

/// The same predictive by inverting the observation map `(f_T, f_X) ↦ N(f_X, ε²I)`
/// against the latent prior and projecting the posterior onto `f_T`.
pub fn gp_predictive_by_inversion(
    gp: &GpModel,
    data: &GpData,
    test_xs: &[Vec<f64>],
    opts: InvertOptions,
) -> Result<GaussianMeasure> {
    gp.validate()?;
    check_compatible(&data.xs, test_xs)?;
    let (m, n) = (test_xs.len(), data.len());
    let all: Vec<Vec<f64>> = test_xs.iter().chain(&data.xs).cloned().collect();
    let latent = GaussianMeasure::new(gp.mean_vector(&all), gp.gram(&all, &all))?;
    let mut a = DMatrix::zeros(n, m + n);
    a.view_mut((0, m), (n, n)).fill_with_identity();
    let observe =
        AffineGaussianMap::new(a, DVector::zeros(n), DMatrix::identity(n, n) * gp.noise_var)?;
    let q = gauss_invert(&observe, &latent, opts)?;
    q.apply(&DVector::from_column_slice(&data.ys))?
        .marginal(&(0..m).collect::<Vec<_>>())
}
