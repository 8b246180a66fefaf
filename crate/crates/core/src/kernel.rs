//! Markov kernels between finite spaces.
//!
//! A kernel `T: X ⇝ Y` is stored as a dense row-stochastic matrix: row `x` is
//! the probability measure `T(·|x)` on `Y`. Measurable maps embed as kernels
//! with one-hot (Dirac) rows.

use crate::error::{Error, Result};
use crate::measure::{self, check_len, clamp_weights, same_space, BoundedFunction, FiniteMeasure};
use crate::scalar::{self, Scalar};
use crate::space::{FiniteSpace, Label};

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteKernel<S> {
    source: FiniteSpace,
    target: FiniteSpace,
    rows: Vec<Vec<S>>,
}

/// A measurable map between finite spaces, stored as target indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurableMap {
    source: FiniteSpace,
    target: FiniteSpace,
    assignment: Vec<usize>,
}

/// Selects a factor of a binary product space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    First,
    Second,
}

impl<S: Scalar> FiniteKernel<S> {
    /// Validates that every row is a probability measure on `target`.
    pub fn new(source: FiniteSpace, target: FiniteSpace, rows: Vec<Vec<S>>) -> Result<Self> {
        check_len(&source, rows.len())?;
        let rows = rows
            .into_iter()
            .map(|row| {
                check_len(&target, row.len())?;
                let row = clamp_weights(&target, row)?;
                if !scalar::is_unit_sum(&row) {
                    return Err(Error::NotNormalized {
                        sum: scalar::sum(&row).to_f64(),
                    });
                }
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            source,
            target,
            rows,
        })
    }

    /// Builds a kernel from row measures, one per source point in order.
    pub fn from_measures(source: FiniteSpace, rows: Vec<FiniteMeasure<S>>) -> Result<Self> {
        let target = rows
            .first()
            .map(|m| m.space().clone())
            .ok_or(Error::EmptySpace)?;
        for m in &rows {
            same_space(&target, m.space(), "kernel rows")?;
        }
        Self::new(
            source,
            target,
            rows.into_iter().map(|m| m.into_weights()).collect(),
        )
    }

    /// Rows already known to be stochastic (outputs of closed operations).
    pub(crate) fn from_parts(source: FiniteSpace, target: FiniteSpace, rows: Vec<Vec<S>>) -> Self {
        debug_assert_eq!(rows.len(), source.len());
        Self {
            source,
            target,
            rows,
        }
    }

    pub fn identity(space: FiniteSpace) -> Self {
        dirac_kernel(&MeasurableMap::identity(space))
    }

    /// Kernel ignoring its input: every row is `m`.
    pub fn constant(source: FiniteSpace, m: &FiniteMeasure<S>) -> Self {
        let rows = vec![m.weights().to_vec(); source.len()];
        Self::from_parts(source, m.space().clone(), rows)
    }

    pub fn source(&self) -> &FiniteSpace {
        &self.source
    }

    pub fn target(&self) -> &FiniteSpace {
        &self.target
    }

    pub fn rows(&self) -> &[Vec<S>] {
        &self.rows
    }

    pub fn entry(&self, x: usize, y: usize) -> &S {
        &self.rows[x][y]
    }

    /// `T(·|x)` for the `i`-th source point.
    pub fn row(&self, i: usize) -> FiniteMeasure<S> {
        FiniteMeasure::signed(self.target.clone(), self.rows[i].clone())
            .expect("row length matches target")
    }

    pub fn row_at(&self, x: &Label) -> Result<FiniteMeasure<S>> {
        Ok(self.row(self.source.require_index(x)?))
    }

    /// Replaces the row at `x` with another probability measure.
    pub fn with_row(&self, x: &Label, row: Vec<S>) -> Result<Self> {
        let i = self.source.require_index(x)?;
        let mut rows = self.rows.clone();
        rows[i] = row;
        Self::new(self.source.clone(), self.target.clone(), rows)
    }

    /// Entrywise comparison; exact for rationals.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.source == other.source
            && self.target == other.target
            && self
                .rows
                .iter()
                .zip(&other.rows)
                .all(|(a, b)| a.iter().zip(b).all(|(p, q)| p.close(q, tol)))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.rows
            .iter()
            .zip(&other.rows)
            .flat_map(|(a, b)| a.iter().zip(b))
            .map(|(p, q)| (p.clone() - q.clone()).abs().to_f64())
            .fold(0.0, f64::max)
    }

    pub fn to_float(&self) -> FiniteKernel<f64> {
        FiniteKernel {
            source: self.source.clone(),
            target: self.target.clone(),
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(Scalar::to_f64).collect())
                .collect(),
        }
    }
}

impl MeasurableMap {
    pub fn new(source: FiniteSpace, target: FiniteSpace, images: &[Label]) -> Result<Self> {
        check_len(&source, images.len())?;
        let assignment = images
            .iter()
            .map(|l| target.require_index(l))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            source,
            target,
            assignment,
        })
    }

    pub fn from_fn(
        source: FiniteSpace,
        target: FiniteSpace,
        f: impl Fn(&Label) -> Label,
    ) -> Result<Self> {
        let images: Vec<Label> = source.labels().iter().map(f).collect();
        Self::new(source, target, &images)
    }

    pub fn from_indices(
        source: FiniteSpace,
        target: FiniteSpace,
        assignment: Vec<usize>,
    ) -> Result<Self> {
        check_len(&source, assignment.len())?;
        if let Some(&bad) = assignment.iter().find(|&&j| j >= target.len()) {
            return Err(Error::Invalid(format!("target index {bad} out of range")));
        }
        Ok(Self {
            source,
            target,
            assignment,
        })
    }

    pub fn identity(space: FiniteSpace) -> Self {
        let assignment = (0..space.len()).collect();
        Self {
            source: space.clone(),
            target: space,
            assignment,
        }
    }

    /// Canonical projection of a binary product onto one factor.
    pub fn projection(product: &FiniteSpace, which: Factor) -> Result<Self> {
        let (a, b) = product.binary_factors()?;
        let (target, pick): (FiniteSpace, fn(usize, usize) -> usize) = match which {
            Factor::First => (a.clone(), |i, _| i),
            Factor::Second => (b.clone(), |_, j| j),
        };
        let nb = b.len();
        let assignment = (0..product.len()).map(|k| pick(k / nb, k % nb)).collect();
        Ok(Self {
            source: product.clone(),
            target,
            assignment,
        })
    }

    /// The mirror map `X × Y → Y × X`, `(x, y) ↦ (y, x)`.
    pub fn mirror(product: &FiniteSpace) -> Result<Self> {
        let (a, b) = product.binary_factors()?;
        let target = FiniteSpace::pair(b, a)?;
        let (na, nb) = (a.len(), b.len());
        let assignment = (0..product.len())
            .map(|k| {
                let (i, j) = (k / nb, k % nb);
                j * na + i
            })
            .collect();
        Ok(Self {
            source: product.clone(),
            target,
            assignment,
        })
    }

    pub fn source(&self) -> &FiniteSpace {
        &self.source
    }

    pub fn target(&self) -> &FiniteSpace {
        &self.target
    }

    pub fn image_index(&self, i: usize) -> usize {
        self.assignment[i]
    }

    pub fn apply(&self, x: &Label) -> Result<&Label> {
        Ok(self
            .target
            .label(self.assignment[self.source.require_index(x)?]))
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &MeasurableMap) -> Result<MeasurableMap> {
        same_space(&self.target, &other.source, "map composition")?;
        Ok(MeasurableMap {
            source: self.source.clone(),
            target: other.target.clone(),
            assignment: self
                .assignment
                .iter()
                .map(|&j| other.assignment[j])
                .collect(),
        })
    }
}

/// `t2 ∘ t1`: row `x` of the result is `Σ_y T1(y|x) T2(·|y)`.
pub fn compose<S: Scalar>(t1: &FiniteKernel<S>, t2: &FiniteKernel<S>) -> Result<FiniteKernel<S>> {
    same_space(&t1.target, &t2.source, "compose")?;
    let rows = t1
        .rows
        .iter()
        .map(|row| vec_mat(row, &t2.rows, t2.target.len()))
        .collect();
    Ok(FiniteKernel::from_parts(
        t1.source.clone(),
        t2.target.clone(),
        rows,
    ))
}

/// Markov homomorphism `T_*μ`, defined on signed measures.
pub fn pushforward<S: Scalar>(
    t: &FiniteKernel<S>,
    m: &FiniteMeasure<S>,
) -> Result<FiniteMeasure<S>> {
    same_space(&t.source, m.space(), "pushforward")?;
    FiniteMeasure::signed(
        t.target.clone(),
        vec_mat(m.weights(), &t.rows, t.target.len()),
    )
}

/// Pullback `(T*f)(x) = Σ_y f(y) T(y|x)`.
pub fn pullback<S: Scalar>(
    t: &FiniteKernel<S>,
    f: &BoundedFunction<S>,
) -> Result<BoundedFunction<S>> {
    same_space(&t.target, f.space(), "pullback")?;
    let values = t
        .rows
        .iter()
        .map(|row| scalar::dot(row, f.values()))
        .collect();
    BoundedFunction::new(t.source.clone(), values)
}

/// Embeds a measurable map as the kernel `x ↦ δ_{κ(x)}`.
pub fn dirac_kernel<S: Scalar>(k: &MeasurableMap) -> FiniteKernel<S> {
    let n = k.target.len();
    let rows = k
        .assignment
        .iter()
        .map(|&j| {
            let mut row = vec![S::zero(); n];
            row[j] = S::one();
            row
        })
        .collect();
    FiniteKernel::from_parts(k.source.clone(), k.target.clone(), rows)
}

/// Join `T1 · T2`: row `x` is `T1(·|x) ⊗ T2(·|x)`.
pub fn join<S: Scalar>(t1: &FiniteKernel<S>, t2: &FiniteKernel<S>) -> Result<FiniteKernel<S>> {
    same_space(&t1.source, &t2.source, "join")?;
    let target = FiniteSpace::pair(&t1.target, &t2.target)?;
    let rows = t1
        .rows
        .iter()
        .zip(&t2.rows)
        .map(|(a, b)| {
            a.iter()
                .flat_map(|p| b.iter().map(move |q| p.clone() * q.clone()))
                .collect()
        })
        .collect();
    Ok(FiniteKernel::from_parts(t1.source.clone(), target, rows))
}

/// Graph `Γ_T = Id · T`: row `x` is `δ_x ⊗ T(·|x)`.
pub fn graph<S: Scalar>(t: &FiniteKernel<S>) -> FiniteKernel<S> {
    join(&FiniteKernel::identity(t.source.clone()), t).expect("same source")
}

/// Product morphism `T1 × T2: X1 × X2 ⇝ Y1 × Y2`, built as the join of
/// `T1 ∘ Π_1` and `T2 ∘ Π_2`.
pub fn product_kernel<S: Scalar>(
    t1: &FiniteKernel<S>,
    t2: &FiniteKernel<S>,
) -> Result<FiniteKernel<S>> {
    let source = FiniteSpace::pair(&t1.source, &t2.source)?;
    let p1 = dirac_kernel(&MeasurableMap::projection(&source, Factor::First)?);
    let p2 = dirac_kernel(&MeasurableMap::projection(&source, Factor::Second)?);
    join(&compose(&p1, t1)?, &compose(&p2, t2)?)
}

/// Pushforward of a measure on `X × Y` along the swap `(x, y) ↦ (y, x)`.
pub fn mirror<S: Scalar>(m: &FiniteMeasure<S>) -> Result<FiniteMeasure<S>> {
    let swap = MeasurableMap::mirror(m.space())?;
    let mut weights = vec![S::zero(); m.space().len()];
    for (i, w) in m.weights().iter().enumerate() {
        weights[swap.image_index(i)] = w.clone();
    }
    FiniteMeasure::signed(swap.target, weights)
}

/// Marginal `(Π_X)_*μ` or `(Π_Y)_*μ` of a measure on a binary product.
pub fn marginal<S: Scalar>(m: &FiniteMeasure<S>, which: Factor) -> Result<FiniteMeasure<S>> {
    let proj = MeasurableMap::projection(m.space(), which)?;
    let mut weights = vec![S::zero(); proj.target.len()];
    for (i, w) in m.weights().iter().enumerate() {
        let j = proj.image_index(i);
        weights[j] = weights[j].clone() + w.clone();
    }
    FiniteMeasure::signed(proj.target, weights)
}

fn vec_mat<S: Scalar>(v: &[S], rows: &[Vec<S>], width: usize) -> Vec<S> {
    let mut out = vec![S::zero(); width];
    for (a, row) in v.iter().zip(rows) {
        if a.is_zero() {
            continue;
        }
        for (o, b) in out.iter_mut().zip(row) {
            *o = o.clone() + a.clone() * b.clone();
        }
    }
    out
}

/// Checks the pairing `Σ_y g(y) (T_*μ)(y) = Σ_x (T*g)(x) μ(x)` and returns both sides.
pub fn duality_sides<S: Scalar>(
    t: &FiniteKernel<S>,
    mu: &FiniteMeasure<S>,
    g: &BoundedFunction<S>,
) -> Result<(S, S)> {
    let lhs = g.integrate(&pushforward(t, mu)?)?;
    let rhs = pullback(t, g)?.integrate(mu)?;
    Ok((lhs, rhs))
}

/// `tv_norm(T_*μ) ≤ tv_norm(μ)` on a given signed measure.
pub fn contracts_tv<S: Scalar>(t: &FiniteKernel<S>, mu: &FiniteMeasure<S>) -> Result<bool> {
    let pushed = measure::tv_norm(&pushforward(t, mu)?);
    let bound = measure::tv_norm(mu);
    Ok(pushed <= bound || pushed.close(&bound, 1e-12))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn two() -> FiniteSpace {
        FiniteSpace::range(2).unwrap()
    }

    fn sample() -> FiniteKernel<Rational> {
        FiniteKernel::new(
            two(),
            two(),
            vec![vec![r(3, 10), r(7, 10)], vec![r(9, 10), r(1, 10)]],
        )
        .unwrap()
    }

    #[test]
    fn compose_examples() {
        let t = sample();
        let id = FiniteKernel::identity(two());
        assert_eq!(compose(&id, &t).unwrap(), t);
        assert_eq!(compose(&t, &id).unwrap(), t);

        let one = FiniteSpace::from_names(["x"]).unwrap();
        let t1 = FiniteKernel::new(one, two(), vec![vec![r(1, 2), r(1, 2)]]).unwrap();
        let c = compose(&t1, &t).unwrap();
        assert_eq!(c.rows()[0], vec![r(3, 5), r(2, 5)]);
    }

    #[test]
    fn compose_rejects_mismatch() {
        let t = sample();
        let three = FiniteKernel::<Rational>::identity(FiniteSpace::range(3).unwrap());
        assert_eq!(
            compose(&t, &three).unwrap_err(),
            Error::SpaceMismatch { context: "compose" }
        );
    }

    #[test]
    fn pushforward_examples() {
        let t = sample();
        let mu = FiniteMeasure::probability(two(), vec![r(1, 2), r(1, 2)]).unwrap();
        assert_eq!(pushforward(&t, &mu).unwrap().weights(), &[r(3, 5), r(2, 5)]);
        assert_eq!(
            pushforward(&FiniteKernel::identity(two()), &mu).unwrap(),
            mu
        );
        let d1 = FiniteMeasure::dirac(two(), &Label::Int(1)).unwrap();
        assert_eq!(pushforward(&t, &d1).unwrap(), t.row(1));
    }

    #[test]
    fn pullback_examples() {
        let t = sample();
        let f = BoundedFunction::new(two(), vec![r(1, 1), r(0, 1)]).unwrap();
        assert_eq!(pullback(&t, &f).unwrap().values(), &[r(3, 10), r(9, 10)]);
        let ones = BoundedFunction::constant(two(), r(1, 1));
        assert_eq!(pullback(&t, &ones).unwrap(), ones);
        assert_eq!(pullback(&FiniteKernel::identity(two()), &f).unwrap(), f);
    }

    #[test]
    fn dirac_examples() {
        let ab = FiniteSpace::from_names(["a", "b"]).unwrap();
        let k = MeasurableMap::new(ab.clone(), two(), &[Label::Int(1), Label::Int(0)]).unwrap();
        let t: FiniteKernel<Rational> = dirac_kernel(&k);
        assert_eq!(t.rows(), &[vec![r(0, 1), r(1, 1)], vec![r(1, 1), r(0, 1)]]);

        let constant = MeasurableMap::from_fn(ab.clone(), two(), |_| Label::Int(0)).unwrap();
        let tc: FiniteKernel<f64> = dirac_kernel(&constant);
        assert!(tc.rows().iter().all(|row| row == &vec![1.0, 0.0]));

        let id: FiniteKernel<f64> = dirac_kernel(&MeasurableMap::identity(ab.clone()));
        assert_eq!(id.rows(), &[vec![1.0, 0.0], vec![0.0, 1.0]]);

        let back = MeasurableMap::new(two(), ab.clone(), &["b".into(), "b".into()]).unwrap();
        let composed = k.then(&back).unwrap();
        assert_eq!(
            compose(&dirac_kernel::<Rational>(&k), &dirac_kernel(&back)).unwrap(),
            dirac_kernel(&composed)
        );
    }

    #[test]
    fn join_and_graph_examples() {
        let one = FiniteSpace::from_names(["a"]).unwrap();
        let t1 = FiniteKernel::new(one.clone(), two(), vec![vec![r(1, 2), r(1, 2)]]).unwrap();
        let t2 = FiniteKernel::new(one.clone(), two(), vec![vec![r(3, 10), r(7, 10)]]).unwrap();
        let j = join(&t1, &t2).unwrap();
        assert_eq!(j.rows()[0], vec![r(3, 20), r(7, 20), r(3, 20), r(7, 20)]);

        let jj = join(&t2, &t2).unwrap();
        assert_eq!(
            jj.rows()[0],
            vec![r(9, 100), r(21, 100), r(21, 100), r(49, 100)]
        );

        let g = graph(&t2);
        let pa0 = Label::pair("a".into(), Label::Int(0));
        let pa1 = Label::pair("a".into(), Label::Int(1));
        let row = g.row(0);
        assert_eq!(row.weight(&pa0), Some(&r(3, 10)));
        assert_eq!(row.weight(&pa1), Some(&r(7, 10)));

        let gid: FiniteKernel<Rational> = graph(&FiniteKernel::identity(two()));
        for (i, x) in two().labels().iter().enumerate() {
            let expected =
                FiniteMeasure::dirac(gid.target().clone(), &Label::pair(x.clone(), x.clone()))
                    .unwrap();
            assert_eq!(gid.row(i), expected);
        }
    }

    #[test]
    fn graph_of_map_is_dirac_on_pairs() {
        let ab = FiniteSpace::from_names(["a", "b"]).unwrap();
        let k = MeasurableMap::new(ab.clone(), two(), &[Label::Int(1), Label::Int(0)]).unwrap();
        let g: FiniteKernel<Rational> = graph(&dirac_kernel(&k));
        for (i, x) in ab.labels().iter().enumerate() {
            let at = Label::pair(x.clone(), k.apply(x).unwrap().clone());
            assert_eq!(
                g.row(i),
                FiniteMeasure::dirac(g.target().clone(), &at).unwrap()
            );
        }
    }

    #[test]
    fn mirror_and_marginal_examples() {
        let ab = FiniteSpace::from_names(["a", "b"]).unwrap();
        let xy = FiniteSpace::pair(&ab, &two()).unwrap();
        let m =
            FiniteMeasure::probability(xy, vec![r(1, 10), r(3, 10), r(2, 10), r(4, 10)]).unwrap();
        let mm = mirror(&m).unwrap();
        let at = |y: i64, x: &str| mm.weight(&Label::pair(Label::Int(y), x.into())).cloned();
        assert_eq!(at(0, "a"), Some(r(1, 10)));
        assert_eq!(at(1, "a"), Some(r(3, 10)));
        assert_eq!(at(0, "b"), Some(r(2, 10)));
        assert_eq!(at(1, "b"), Some(r(4, 10)));
        assert_eq!(mirror(&mm).unwrap(), m);

        assert_eq!(
            marginal(&m, Factor::First).unwrap().weights(),
            &[r(2, 5), r(3, 5)]
        );
        assert_eq!(
            marginal(&m, Factor::Second).unwrap().weights(),
            &[r(3, 10), r(7, 10)]
        );

        let plain = FiniteMeasure::<Rational>::uniform(ab);
        assert_eq!(mirror(&plain).unwrap_err(), Error::NotProduct);
        assert_eq!(
            marginal(&plain, Factor::First).unwrap_err(),
            Error::NotProduct
        );
    }

    #[test]
    fn marginal_of_products() {
        let mu = FiniteMeasure::probability(two(), vec![r(1, 4), r(3, 4)]).unwrap();
        let nu =
            FiniteMeasure::probability(FiniteSpace::range(3).unwrap(), vec![r(1, 3); 3]).unwrap();
        let prod = measure::product_measure(&[mu.clone(), nu.clone()]).unwrap();
        assert_eq!(marginal(&prod, Factor::First).unwrap(), mu);
        assert_eq!(marginal(&prod, Factor::Second).unwrap(), nu);

        let xy = FiniteSpace::pair(&two(), &two()).unwrap();
        let d = FiniteMeasure::<Rational>::dirac(xy, &Label::pair(1.into(), 0.into())).unwrap();
        assert_eq!(
            marginal(&d, Factor::First).unwrap(),
            FiniteMeasure::dirac(two(), &Label::Int(1)).unwrap()
        );
    }

    #[test]
    fn kernel_validation() {
        assert!(matches!(
            FiniteKernel::new(two(), two(), vec![vec![0.5, 0.6], vec![1.0, 0.0]]),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(
            FiniteKernel::new(two(), two(), vec![vec![1.0, 0.0]]),
            Err(Error::LengthMismatch { .. })
        ));
    }
}
