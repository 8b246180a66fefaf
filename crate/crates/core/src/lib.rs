//! Probabilistic morphisms (Markov kernels) on finite spaces and affine-Gaussian
//! families, with exact Bayesian inversion and a Bayesian supervised learning
//! pipeline on top.
//!
//! The finite backend is generic over [`Scalar`]: use [`Rational`] when a law
//! has to hold with equality, `f64` otherwise. The Gaussian backend and GP
//! regression work in `f64` with explicit conditioning checks.

pub mod bayes;
pub mod error;
pub mod gaussian;
pub mod gp;
pub mod json;
pub mod kernel;
pub mod laws;
pub mod measure;
pub mod random;
pub mod scalar;
pub mod space;
pub mod supervised;

pub use bayes::{
    ae_equal, bayes_invert, disintegrate, invert_composition, verify_inversion, BayesModel,
    Disintegration, InversionResult,
};
pub use error::{Error, Result};
pub use gaussian::{
    gauss_compose, gauss_convolve, gauss_discretize, gauss_graph, gauss_invert, gauss_pushforward,
    AffineGaussianMap, GaussianMeasure, GridSpec, InvertOptions,
};
pub use gp::{gp_joint, gp_posterior_predictive, GpData, GpModel};
pub use kernel::{
    compose, dirac_kernel, graph, join, marginal, mirror, pullback, pushforward, Factor,
    FiniteKernel, MeasurableMap,
};
pub use measure::{
    convolve, product_measure, radon_nikodym, tv_norm, BoundedFunction, FiniteMeasure,
};
pub use scalar::{Rational, Scalar, ScalarKind};
pub use space::{FiniteSpace, Label};
pub use supervised::{
    posterior, predictive, restriction_consistency, sampling_kernel, SupervisedModel, TestInputs,
    TrainingSet,
};
