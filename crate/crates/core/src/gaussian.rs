//! Affine-Gaussian morphisms `x ↦ N(Ax + b, Σ)` and Gaussian measures.
//!
//! The family is closed under composition, pushforward, graphs and
//! conditioning, so every operation here is a closed-form matrix computation.
//! A zero noise matrix is allowed (deterministic affine maps); singular systems
//! are only rejected where a matrix actually has to be inverted.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::measure::FiniteMeasure;
use crate::space::{FiniteSpace, Label};

/// Symmetry tolerance and eigenvalue clamp threshold for covariance matrices.
pub const PSD_TOL: f64 = 1e-10;

/// Default bound on the condition number of matrices that get inverted.
pub const DEFAULT_MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMeasure {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

/// The Markov kernel `x ↦ N(Ax + b, Σ)` from `R^n` to `R^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineGaussianMap {
    a: DMatrix<f64>,
    b: DVector<f64>,
    noise: DMatrix<f64>,
}

/// Controls for operations that invert a covariance-like matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvertOptions {
    pub max_condition: f64,
    /// Added to the diagonal before inverting. Never applied implicitly.
    pub jitter: Option<f64>,
}

impl Default for InvertOptions {
    fn default() -> Self {
        Self {
            max_condition: DEFAULT_MAX_CONDITION,
            jitter: None,
        }
    }
}

impl InvertOptions {
    pub fn with_jitter(jitter: f64) -> Self {
        Self {
            jitter: Some(jitter),
            ..Self::default()
        }
    }
}

/// Symmetrizes and repairs a covariance: eigenvalues in `[-1e-10, 0)` clamp to
/// zero, anything more negative is rejected.
pub fn check_psd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            context: "covariance must be square",
            expected: m.nrows(),
            actual: m.ncols(),
        });
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("covariance has non-finite entries".into()));
    }
    let asym = (m - m.transpose()).amax();
    if asym > PSD_TOL {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    let sym = (m + m.transpose()) * 0.5;
    if sym.nrows() == 0 {
        return Ok(sym);
    }
    let eig = SymmetricEigen::new(sym.clone());
    let min = eig.eigenvalues.min();
    if min < -PSD_TOL {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
        });
    }
    if min < 0.0 {
        let clamped = eig.eigenvalues.map(|l| l.max(0.0));
        let v = &eig.eigenvectors;
        let rebuilt = v * DMatrix::from_diagonal(&clamped) * v.transpose();
        return Ok((&rebuilt + rebuilt.transpose()) * 0.5);
    }
    Ok(sym)
}

/// 2-norm condition number estimate; infinite for singular matrices.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.singular_values();
    let (max, min) = (sv.max(), sv.min());
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Solves `K X = rhs` for a symmetric `K` after checking its conditioning.
fn guarded_solve(
    k: &DMatrix<f64>,
    rhs: &DMatrix<f64>,
    opts: InvertOptions,
) -> Result<DMatrix<f64>> {
    let mut k = k.clone();
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
    k.lu().solve(rhs).ok_or(Error::IllConditioned {
        condition: f64::INFINITY,
        bound: opts.max_condition,
    })
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

fn dim_check(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            actual,
        });
    }
    Ok(())
}

impl GaussianMeasure {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        dim_check("gaussian covariance rows", mean.len(), cov.nrows())?;
        let cov = check_psd(&cov)?;
        if mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("mean has non-finite entries".into()));
        }
        Ok(Self { mean, cov })
    }

    pub fn from_slices(mean: &[f64], cov_rows: &[Vec<f64>]) -> Result<Self> {
        let n = mean.len();
        if cov_rows.len() != n || cov_rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                context: "covariance shape",
                expected: n,
                actual: cov_rows.len(),
            });
        }
        Self::new(
            DVector::from_column_slice(mean),
            DMatrix::from_fn(n, n, |i, j| cov_rows[i][j]),
        )
    }

    /// One-dimensional `N(mean, var)`.
    pub fn scalar(mean: f64, var: f64) -> Result<Self> {
        Self::new(
            DVector::from_element(1, mean),
            DMatrix::from_element(1, 1, var),
        )
    }

    pub fn standard(dim: usize) -> Self {
        Self {
            mean: DVector::zeros(dim),
            cov: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Marginal on the given coordinates, in the given order.
    pub fn marginal(&self, idx: &[usize]) -> Result<Self> {
        if let Some(&bad) = idx.iter().find(|&&i| i >= self.dim()) {
            return Err(Error::DimensionMismatch {
                context: "marginal index",
                expected: self.dim(),
                actual: bad,
            });
        }
        let mean = DVector::from_iterator(idx.len(), idx.iter().map(|&i| self.mean[i]));
        let cov = DMatrix::from_fn(idx.len(), idx.len(), |r, c| self.cov[(idx[r], idx[c])]);
        Ok(Self { mean, cov })
    }

    /// Swaps the blocks `R^split × R^rest → R^rest × R^split`.
    pub fn mirror(&self, split: usize) -> Result<Self> {
        if split > self.dim() {
            return Err(Error::DimensionMismatch {
                context: "mirror split",
                expected: self.dim(),
                actual: split,
            });
        }
        let order: Vec<usize> = (split..self.dim()).chain(0..split).collect();
        self.marginal(&order)
    }

    /// Regular conditional of the first `split` coordinates given the rest:
    /// `y ↦ N(m1 + S12 S22⁻¹ (y − m2), S11 − S12 S22⁻¹ S21)`.
    pub fn conditional_of_head(
        &self,
        split: usize,
        opts: InvertOptions,
    ) -> Result<AffineGaussianMap> {
        let n = self.dim();
        if split > n {
            return Err(Error::DimensionMismatch {
                context: "conditioning split",
                expected: n,
                actual: split,
            });
        }
        let rest = n - split;
        let m1 = self.mean.rows(0, split).into_owned();
        let m2 = self.mean.rows(split, rest).into_owned();
        let s11 = self.cov.view((0, 0), (split, split)).into_owned();
        let s12 = self.cov.view((0, split), (split, rest)).into_owned();
        let s22 = self.cov.view((split, split), (rest, rest)).into_owned();
        // gain = S12 S22⁻¹, via S22 gainᵀ = S21
        let gain = guarded_solve(&s22, &s12.transpose(), opts)?.transpose();
        let noise = symmetrize(&s11 - &gain * s12.transpose());
        AffineGaussianMap::new(gain.clone(), m1 - &gain * m2, noise)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.dim() == other.dim() && self.max_abs_diff(other) <= tol
    }

    /// Max entrywise difference over mean and covariance.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        (&self.mean - &other.mean)
            .amax()
            .max((&self.cov - &other.cov).amax())
    }

    /// Per-coordinate standard deviations.
    pub fn std_devs(&self) -> Vec<f64> {
        self.cov
            .diagonal()
            .iter()
            .map(|v| v.max(0.0).sqrt())
            .collect()
    }
}

impl AffineGaussianMap {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, noise: DMatrix<f64>) -> Result<Self> {
        dim_check("affine offset length", a.nrows(), b.len())?;
        dim_check("noise dimension", a.nrows(), noise.nrows())?;
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Invalid("affine map has non-finite entries".into()));
        }
        let noise = check_psd(&noise)?;
        Ok(Self { a, b, noise })
    }

    /// Scalar map `x ↦ N(a x + b, s)`.
    pub fn scalar(a: f64, b: f64, noise_var: f64) -> Result<Self> {
        Self::new(
            DMatrix::from_element(1, 1, a),
            DVector::from_element(1, b),
            DMatrix::from_element(1, 1, noise_var),
        )
    }

    pub fn identity(n: usize) -> Self {
        Self {
            a: DMatrix::identity(n, n),
            b: DVector::zeros(n),
            noise: DMatrix::zeros(n, n),
        }
    }

    /// Deterministic affine map, the Dirac case `Σ = 0`.
    pub fn deterministic(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        let m = a.nrows();
        Self::new(a, b, DMatrix::zeros(m, m))
    }

    pub fn translation(b: DVector<f64>) -> Self {
        let n = b.len();
        Self {
            a: DMatrix::identity(n, n),
            b,
            noise: DMatrix::zeros(n, n),
        }
    }

    /// Coordinate projection onto `idx` (noise-free).
    pub fn projection(n: usize, idx: &[usize]) -> Result<Self> {
        let mut a = DMatrix::zeros(idx.len(), n);
        for (r, &c) in idx.iter().enumerate() {
            if c >= n {
                return Err(Error::DimensionMismatch {
                    context: "projection index",
                    expected: n,
                    actual: c,
                });
            }
            a[(r, c)] = 1.0;
        }
        Self::deterministic(a, DVector::zeros(idx.len()))
    }

    pub fn input_dim(&self) -> usize {
        self.a.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn noise(&self) -> &DMatrix<f64> {
        &self.noise
    }

    /// The output measure at a point, `N(Ax + b, Σ)`.
    pub fn apply(&self, x: &DVector<f64>) -> Result<GaussianMeasure> {
        dim_check("apply input", self.input_dim(), x.len())?;
        Ok(GaussianMeasure {
            mean: &self.a * x + &self.b,
            cov: self.noise.clone(),
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.a.shape() != other.a.shape() {
            return f64::INFINITY;
        }
        (&self.a - &other.a)
            .amax()
            .max((&self.b - &other.b).amax())
            .max((&self.noise - &other.noise).amax())
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }
}

/// `t2 ∘ t1` for affine-Gaussian maps.
pub fn gauss_compose(t1: &AffineGaussianMap, t2: &AffineGaussianMap) -> Result<AffineGaussianMap> {
    dim_check("gauss_compose", t1.output_dim(), t2.input_dim())?;
    Ok(AffineGaussianMap {
        a: &t2.a * &t1.a,
        b: &t2.a * &t1.b + &t2.b,
        noise: symmetrize(&t2.a * &t1.noise * t2.a.transpose() + &t2.noise),
    })
}

/// `T_*g = N(Am + b, A S Aᵀ + Σ)`.
pub fn gauss_pushforward(t: &AffineGaussianMap, g: &GaussianMeasure) -> Result<GaussianMeasure> {
    dim_check("gauss_pushforward", t.input_dim(), g.dim())?;
    Ok(GaussianMeasure {
        mean: &t.a * &g.mean + &t.b,
        cov: symmetrize(&t.a * &g.cov * t.a.transpose() + &t.noise),
    })
}

/// Joint `(Γ_T)_*g` on `R^n × R^m`.
pub fn gauss_graph(t: &AffineGaussianMap, g: &GaussianMeasure) -> Result<GaussianMeasure> {
    dim_check("gauss_graph", t.input_dim(), g.dim())?;
    let (n, m) = (t.input_dim(), t.output_dim());
    let image = gauss_pushforward(t, g)?;
    let cross = &t.a * &g.cov;
    let mut cov = DMatrix::zeros(n + m, n + m);
    cov.view_mut((0, 0), (n, n)).copy_from(&g.cov);
    cov.view_mut((n, 0), (m, n)).copy_from(&cross);
    cov.view_mut((0, n), (n, m)).copy_from(&cross.transpose());
    cov.view_mut((n, n), (m, m)).copy_from(&image.cov);
    let mut mean = DVector::zeros(n + m);
    mean.rows_mut(0, n).copy_from(&g.mean);
    mean.rows_mut(n, m).copy_from(&image.mean);
    Ok(GaussianMeasure {
        mean,
        cov: symmetrize(cov),
    })
}

/// Bayesian inversion of `t` relative to a Gaussian prior:
/// `y ↦ N(m + S Aᵀ K⁻¹ (y − Am − b), S − S Aᵀ K⁻¹ A S)` with `K = A S Aᵀ + Σ`.
pub fn gauss_invert(
    t: &AffineGaussianMap,
    prior: &GaussianMeasure,
    opts: InvertOptions,
) -> Result<AffineGaussianMap> {
    dim_check("gauss_invert", t.input_dim(), prior.dim())?;
    let s = &prior.cov;
    let k = &t.a * s * t.a.transpose() + &t.noise;
    let a_s = &t.a * s;
    // gain = S Aᵀ K⁻¹, via K gainᵀ = A S
    let gain = guarded_solve(&k, &a_s, opts)?.transpose();
    let predicted = &t.a * &prior.mean + &t.b;
    let b = &prior.mean - &gain * predicted;
    let noise = symmetrize(s - &gain * a_s);
    AffineGaussianMap::new(gain, b, noise)
}

/// `N(m1 + m2, S1 + S2)`.
pub fn gauss_convolve(g1: &GaussianMeasure, g2: &GaussianMeasure) -> Result<GaussianMeasure> {
    dim_check("gauss_convolve", g1.dim(), g2.dim())?;
    Ok(GaussianMeasure {
        mean: &g1.mean + &g2.mean,
        cov: &g1.cov + &g2.cov,
    })
}

/// One axis of a discretization grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridAxis {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

/// Rectangular grid of cell centers.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub axes: Vec<GridAxis>,
}

/// Grids must reach this many standard deviations on each side of the mean.
pub const GRID_MIN_HALF_WIDTH_SD: f64 = 6.0;
/// Grid steps may not exceed this fraction of a standard deviation.
pub const GRID_MAX_STEP_SD: f64 = 0.2;
const GRID_MAX_POINTS: usize = 4_000_000;

impl GridAxis {
    fn count(&self) -> usize {
        ((self.hi - self.lo) / self.step).round() as usize + 1
    }

    /// Centers are placed symmetrically around the midpoint so that symmetric
    /// inputs give exactly mirrored grids.
    pub fn centers(&self) -> Vec<f64> {
        let mid = 0.5 * (self.lo + self.hi);
        let n = self.count() - 1;
        (0..=n)
            .map(|i| mid + (2.0 * i as f64 - n as f64) * self.step * 0.5)
            .collect()
    }
}

impl GridSpec {
    pub fn uniform_1d(lo: f64, hi: f64, step: f64) -> Self {
        Self {
            axes: vec![GridAxis { lo, hi, step }],
        }
    }

    /// Grid `mean ± half_width_sd·σ` with step `σ / per_sd` on every axis.
    pub fn around(g: &GaussianMeasure, half_width_sd: f64, per_sd: f64) -> Self {
        let axes = g
            .mean
            .iter()
            .zip(g.std_devs())
            .map(|(&m, sd)| GridAxis {
                lo: m - half_width_sd * sd,
                hi: m + half_width_sd * sd,
                step: sd / per_sd,
            })
            .collect();
        Self { axes }
    }
}

/// A discretized Gaussian: a probability measure on grid-cell indices plus the
/// cell centers.
#[derive(Debug, Clone)]
pub struct Discretized {
    pub measure: FiniteMeasure<f64>,
    /// Cell centers per point of `measure`'s space, in order.
    pub points: Vec<Vec<f64>>,
}

impl Discretized {
    pub fn mean(&self) -> Vec<f64> {
        weighted_mean(self.measure.weights(), &self.points)
    }

    pub fn covariance(&self) -> Vec<Vec<f64>> {
        weighted_cov(self.measure.weights(), &self.points)
    }
}

pub(crate) fn weighted_mean(w: &[f64], pts: &[Vec<f64>]) -> Vec<f64> {
    let d = pts.first().map_or(0, Vec::len);
    let mut m = vec![0.0; d];
    for (wi, p) in w.iter().zip(pts) {
        for (mk, pk) in m.iter_mut().zip(p) {
            *mk += wi * pk;
        }
    }
    m
}

pub(crate) fn weighted_cov(w: &[f64], pts: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let m = weighted_mean(w, pts);
    let d = m.len();
    let mut c = vec![vec![0.0; d]; d];
    for (wi, p) in w.iter().zip(pts) {
        for i in 0..d {
            for j in 0..d {
                c[i][j] += wi * (p[i] - m[i]) * (p[j] - m[j]);
            }
        }
    }
    c
}

/// Discretizes a 1-D or 2-D Gaussian: weights proportional to the density at
/// cell centers, renormalized to one.
pub fn gauss_discretize(g: &GaussianMeasure, grid: &GridSpec) -> Result<Discretized> {
    let d = g.dim();
    if d == 0 || d > 2 {
        return Err(Error::BadGrid(format!(
            "dimension {d} unsupported, need 1 or 2"
        )));
    }
    dim_check("grid axes", d, grid.axes.len())?;
    let sds = g.std_devs();
    for (k, (axis, sd)) in grid.axes.iter().zip(&sds).enumerate() {
        if *sd <= 0.0 {
            return Err(Error::BadGrid(format!("axis {k} has zero variance")));
        }
        if axis.step.is_nan()
            || axis.step <= 0.0
            || axis.hi.is_nan()
            || axis.lo.is_nan()
            || axis.hi <= axis.lo
        {
            return Err(Error::BadGrid(format!(
                "axis {k} has an empty range or nonpositive step"
            )));
        }
        let m = g.mean[k];
        let reach = GRID_MIN_HALF_WIDTH_SD * sd;
        if axis.lo > m - reach || axis.hi < m + reach {
            return Err(Error::BadGrid(format!(
                "axis {k} must cover mean ± {GRID_MIN_HALF_WIDTH_SD} sd"
            )));
        }
        if axis.step > GRID_MAX_STEP_SD * sd {
            return Err(Error::BadGrid(format!(
                "axis {k} step {} exceeds {GRID_MAX_STEP_SD} sd",
                axis.step
            )));
        }
    }
    let centers: Vec<Vec<f64>> = grid.axes.iter().map(GridAxis::centers).collect();
    let total: usize = centers.iter().map(Vec::len).product();
    if total > GRID_MAX_POINTS {
        return Err(Error::BadGrid(format!(
            "{total} cells exceed the {GRID_MAX_POINTS} limit"
        )));
    }
    let precision = guarded_solve(&g.cov, &DMatrix::identity(d, d), InvertOptions::default())?;
    let log_density = |p: &[f64]| {
        let diff = DVector::from_iterator(d, p.iter().zip(g.mean.iter()).map(|(x, m)| x - m));
        -0.5 * (diff.transpose() * &precision * &diff)[(0, 0)]
    };
    let (labels, points): (Vec<Label>, Vec<Vec<f64>>) = if d == 1 {
        centers[0]
            .iter()
            .enumerate()
            .map(|(i, &x)| (Label::Int(i as i64), vec![x]))
            .unzip()
    } else {
        centers[0]
            .iter()
            .enumerate()
            .flat_map(|(i, &x)| {
                centers[1].iter().enumerate().map(move |(j, &y)| {
                    (
                        Label::Tuple(vec![Label::Int(i as i64), Label::Int(j as i64)]),
                        vec![x, y],
                    )
                })
            })
            .unzip()
    };
    let raw: Vec<f64> = points.iter().map(|p| log_density(p).exp()).collect();
    let z: f64 = raw.iter().sum();
    let space = FiniteSpace::new(labels)?;
    let measure = FiniteMeasure::probability(space, raw.into_iter().map(|w| w / z).collect())?;
    Ok(Discretized { measure, points })
}
