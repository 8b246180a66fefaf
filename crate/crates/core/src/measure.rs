//! Finite signed measures, probability measures and bounded functions.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};
use crate::space::{FiniteSpace, Label};

/// A finite signed measure: one weight per point of `space`.
///
/// The same type carries signed measures, nonnegative measures and probability
/// measures; [`FiniteMeasure::probability`] and [`FiniteMeasure::nonnegative`]
/// validate the stronger invariants at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMeasure<S> {
    space: FiniteSpace,
    weights: Vec<S>,
}

/// A real function on a finite space (every function on a finite set is bounded).
#[derive(Debug, Clone, PartialEq)]
pub struct BoundedFunction<S> {
    space: FiniteSpace,
    values: Vec<S>,
}

impl<S: Scalar> FiniteMeasure<S> {
    /// Signed measure; only the length is checked.
    pub fn signed(space: FiniteSpace, weights: Vec<S>) -> Result<Self> {
        check_len(&space, weights.len())?;
        Ok(Self { space, weights })
    }

    /// Nonnegative measure. Float weights in `[-1e-12, 0)` are clamped to zero.
    pub fn nonnegative(space: FiniteSpace, weights: Vec<S>) -> Result<Self> {
        check_len(&space, weights.len())?;
        let weights = clamp_weights(&space, weights)?;
        Ok(Self { space, weights })
    }

    /// Probability measure: nonnegative and summing to one (within `1e-9` for floats).
    pub fn probability(space: FiniteSpace, weights: Vec<S>) -> Result<Self> {
        let m = Self::nonnegative(space, weights)?;
        if !scalar::is_unit_sum(&m.weights) {
            return Err(Error::NotNormalized {
                sum: scalar::sum(&m.weights).to_f64(),
            });
        }
        Ok(m)
    }

    pub fn zero(space: FiniteSpace) -> Self {
        let weights = vec![S::zero(); space.len()];
        Self { space, weights }
    }

    pub fn dirac(space: FiniteSpace, at: &Label) -> Result<Self> {
        let i = space.require_index(at)?;
        let mut m = Self::zero(space);
        m.weights[i] = S::one();
        Ok(m)
    }

    pub fn uniform(space: FiniteSpace) -> Self {
        let w = S::one() / S::from_usize(space.len());
        let weights = vec![w; space.len()];
        Self { space, weights }
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn into_weights(self) -> Vec<S> {
        self.weights
    }

    pub fn weight(&self, label: &Label) -> Option<&S> {
        self.space.index_of(label).map(|i| &self.weights[i])
    }

    pub fn total_mass(&self) -> S {
        scalar::sum(&self.weights)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.weights.iter().all(|w| *w >= S::zero())
    }

    pub fn is_probability(&self) -> bool {
        self.is_nonnegative() && scalar::is_unit_sum(&self.weights)
    }

    /// Labels carrying strictly positive mass.
    pub fn support(&self) -> Vec<&Label> {
        self.space
            .labels()
            .iter()
            .zip(&self.weights)
            .filter(|(_, w)| **w > S::zero())
            .map(|(l, _)| l)
            .collect()
    }

    pub fn scale(&self, c: &S) -> Self {
        Self {
            space: self.space.clone(),
            weights: self.weights.iter().map(|w| w.clone() * c.clone()).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_space(&self.space, &other.space, "measure addition")?;
        Ok(Self {
            space: self.space.clone(),
            weights: self
                .weights
                .iter()
                .zip(&other.weights)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        })
    }

    /// Restriction `1_B · μ` to a set of labels.
    pub fn restrict_to(&self, set: &[Label]) -> Result<Self> {
        let mut out = Self::zero(self.space.clone());
        for l in set {
            let i = self.space.require_index(l)?;
            out.weights[i] = self.weights[i].clone();
        }
        Ok(out)
    }

    /// Pointwise product with a function, `f · μ`.
    pub fn weighted_by(&self, f: &BoundedFunction<S>) -> Result<Self> {
        same_space(&self.space, &f.space, "density multiplication")?;
        Ok(Self {
            space: self.space.clone(),
            weights: self
                .weights
                .iter()
                .zip(&f.values)
                .map(|(w, v)| w.clone() * v.clone())
                .collect(),
        })
    }

    /// Normalizes a nonzero nonnegative measure to a probability measure.
    pub fn normalized(&self) -> Result<Self> {
        let total = self.total_mass();
        if total <= S::zero() {
            return Err(Error::Invalid(
                "cannot normalize a measure with no mass".into(),
            ));
        }
        Self::probability(
            self.space.clone(),
            self.weights
                .iter()
                .map(|w| w.clone() / total.clone())
                .collect(),
        )
    }

    /// Entrywise comparison, exact for rationals.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.space == other.space
            && self
                .weights
                .iter()
                .zip(&other.weights)
                .all(|(a, b)| a.close(b, tol))
    }

    /// Largest absolute weight difference, as a float.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a.clone() - b.clone()).abs().to_f64())
            .fold(0.0, f64::max)
    }

    /// Relabels points through `f`; `f` must be injective on this space.
    pub fn relabel(&self, f: impl Fn(&Label) -> Label) -> Result<Self> {
        let space = FiniteSpace::new(self.space.labels().iter().map(f).collect())?;
        Ok(Self {
            space,
            weights: self.weights.clone(),
        })
    }

    /// Converts to another scalar backend through `f64`.
    pub fn to_float(&self) -> FiniteMeasure<f64> {
        FiniteMeasure {
            space: self.space.clone(),
            weights: self.weights.iter().map(Scalar::to_f64).collect(),
        }
    }
}

impl<S: Scalar> BoundedFunction<S> {
    pub fn new(space: FiniteSpace, values: Vec<S>) -> Result<Self> {
        check_len(&space, values.len())?;
        Ok(Self { space, values })
    }

    pub fn constant(space: FiniteSpace, c: S) -> Self {
        let values = vec![c; space.len()];
        Self { space, values }
    }

    /// Characteristic function of a set of labels.
    pub fn indicator(space: FiniteSpace, set: &[Label]) -> Result<Self> {
        let mut f = Self::constant(space, S::zero());
        for l in set {
            let i = f.space.require_index(l)?;
            f.values[i] = S::one();
        }
        Ok(f)
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn sup_norm(&self) -> S {
        self.values
            .iter()
            .map(|v| v.abs())
            .fold(S::zero(), |a, b| if b > a { b } else { a })
    }

    /// `∫ f dμ`.
    pub fn integrate(&self, mu: &FiniteMeasure<S>) -> Result<S> {
        same_space(&self.space, &mu.space, "integration")?;
        Ok(scalar::dot(&self.values, &mu.weights))
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.space == other.space
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a.close(b, tol))
    }
}

/// Total-variation norm `Σ_x |μ(x)|`.
pub fn tv_norm<S: Scalar>(m: &FiniteMeasure<S>) -> S {
    m.weights.iter().fold(S::zero(), |acc, w| acc + w.abs())
}

/// Product measure `μ_1 ⊗ … ⊗ μ_k` on the row-major product space.
pub fn product_measure<S: Scalar>(ms: &[FiniteMeasure<S>]) -> Result<FiniteMeasure<S>> {
    let first = ms
        .first()
        .ok_or_else(|| Error::Invalid("product of an empty list of measures".into()))?;
    if ms.len() == 1 {
        return Ok(first.clone());
    }
    let spaces: Vec<FiniteSpace> = ms.iter().map(|m| m.space.clone()).collect();
    let space = FiniteSpace::product(&spaces)?;
    let mut weights = vec![S::one()];
    for m in ms {
        weights = weights
            .iter()
            .flat_map(|a| m.weights.iter().map(move |b| a.clone() * b.clone()))
            .collect();
    }
    Ok(FiniteMeasure { space, weights })
}

/// Convolution `(Ad)_*(μ ⊗ ν)` for measures on finite subsets of an integer lattice.
///
/// The result lives on the Minkowski sum of the two spaces, with points sorted
/// lexicographically. Points of the sum that carry no mass keep a zero weight.
pub fn convolve<S: Scalar>(
    m1: &FiniteMeasure<S>,
    m2: &FiniteMeasure<S>,
) -> Result<FiniteMeasure<S>> {
    let pts1 = lattice_points(&m1.space)?;
    let pts2 = lattice_points(&m2.space)?;
    let dim = pts1[0].len();
    if pts2[0].len() != dim {
        return Err(Error::UnsupportedStructure(format!(
            "cannot add lattice points of dimension {dim} and {}",
            pts2[0].len()
        )));
    }
    let mut acc: BTreeMap<Vec<i64>, S> = BTreeMap::new();
    for (p, w1) in pts1.iter().zip(&m1.weights) {
        for (q, w2) in pts2.iter().zip(&m2.weights) {
            let z: Vec<i64> = p.iter().zip(q).map(|(a, b)| a + b).collect();
            let slot = acc.entry(z).or_insert_with(S::zero);
            *slot = slot.clone() + w1.clone() * w2.clone();
        }
    }
    let (labels, weights): (Vec<Label>, Vec<S>) = acc
        .into_iter()
        .map(|(z, w)| {
            let label = if dim == 1 {
                Label::Int(z[0])
            } else {
                Label::Tuple(z.into_iter().map(Label::Int).collect())
            };
            (label, w)
        })
        .unzip();
    Ok(FiniteMeasure {
        space: FiniteSpace::new(labels)?,
        weights,
    })
}

/// Density `dν/dμ`: `ν(x)/μ(x)` on the support of `μ`, zero elsewhere.
///
/// Fails with the first witness point where `ν` has mass and `μ` does not.
pub fn radon_nikodym<S: Scalar>(
    nu: &FiniteMeasure<S>,
    mu: &FiniteMeasure<S>,
) -> Result<BoundedFunction<S>> {
    same_space(&nu.space, &mu.space, "radon_nikodym")?;
    let mut values = Vec::with_capacity(mu.weights.len());
    for (i, (n, m)) in nu.weights.iter().zip(&mu.weights).enumerate() {
        if m.is_zero() {
            if !n.is_zero() {
                return Err(Error::NotAbsolutelyContinuous {
                    witness: mu.space.label(i).clone(),
                });
            }
            values.push(S::zero());
        } else {
            values.push(n.clone() / m.clone());
        }
    }
    Ok(BoundedFunction {
        space: mu.space.clone(),
        values,
    })
}

/// `ν ≪ μ` on a finite space.
pub fn absolutely_continuous<S: Scalar>(nu: &FiniteMeasure<S>, mu: &FiniteMeasure<S>) -> bool {
    radon_nikodym(nu, mu).is_ok()
}

fn lattice_points(space: &FiniteSpace) -> Result<Vec<Vec<i64>>> {
    let pts = space
        .labels()
        .iter()
        .map(|l| {
            l.lattice_point().ok_or_else(|| {
                Error::UnsupportedStructure(format!("label {l} is not an integer lattice point"))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let dim = pts[0].len();
    if pts.iter().any(|p| p.len() != dim) {
        return Err(Error::UnsupportedStructure(
            "lattice labels of mixed dimension".into(),
        ));
    }
    Ok(pts)
}

pub(crate) fn check_len(space: &FiniteSpace, n: usize) -> Result<()> {
    if space.len() != n {
        return Err(Error::LengthMismatch {
            expected: space.len(),
            actual: n,
        });
    }
    Ok(())
}

pub(crate) fn same_space(a: &FiniteSpace, b: &FiniteSpace, context: &'static str) -> Result<()> {
    if a != b {
        return Err(Error::SpaceMismatch { context });
    }
    Ok(())
}

pub(crate) fn clamp_weights<S: Scalar>(space: &FiniteSpace, weights: Vec<S>) -> Result<Vec<S>> {
    weights
        .into_iter()
        .enumerate()
        .map(|(i, w)| {
            w.clamp_nonnegative().map_err(|bad| Error::NegativeWeight {
                label: space.label(i).clone(),
                value: bad.to_f64(),
            })
        })
        .collect()
}
