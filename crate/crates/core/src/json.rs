//! JSON documents for every exchanged object, plus a canonical writer.
//!
//! Scalars are backend-dependent: rationals travel as `"p/q"` strings, floats
//! as numbers. Parsing accepts either form for either backend.
//!
//! The canonical writer sorts object keys and prints floats with 17
//! significant digits (shortest `%g` style), so identical values always
//! serialize to identical bytes and re-parse to the same `f64`.

use nalgebra::{DMatrix, DVector};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bayes::{BayesModel, InversionResult};
use crate::error::{Error, Result};
use crate::gaussian::{AffineGaussianMap, GaussianMeasure};
use crate::kernel::FiniteKernel;
use crate::measure::FiniteMeasure;
use crate::scalar::{Scalar, ScalarKind};
use crate::space::{FiniteSpace, Label};
use crate::supervised::{Posterior, Predictive, SupervisedModel, TestInputs, TrainingSet};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureDoc {
    space: Vec<Label>,
    weights: Vec<Value>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelDoc {
    source: Vec<Label>,
    target: Vec<Label>,
    rows: Vec<Vec<Value>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BayesModelDoc {
    theta: Vec<Label>,
    observations: Vec<Label>,
    prior: Vec<Value>,
    sampling: Vec<Vec<Value>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InversionDoc {
    backend: ScalarKind,
    kernel: KernelDoc,
    null_points: Vec<Label>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SupervisedDoc {
    theta: Vec<Label>,
    inputs: Vec<Label>,
    labels: Vec<Label>,
    prior: Vec<Value>,
    /// `supervisors[θ][x]` is the label distribution at input `x`.
    supervisors: Vec<Vec<Vec<Value>>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GaussianDoc {
    mean: Vec<f64>,
    cov: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AffineDoc {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    noise: Vec<Vec<f64>>,
}

fn schema(e: serde_json::Error) -> Error {
    Error::Schema(e.to_string())
}

/// Parses text into a typed document, reporting failures as schema errors.
pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(schema)
}

pub fn parse_value(text: &str) -> Result<Value> {
    parse(text)
}

fn from_value<T: DeserializeOwned>(v: &Value) -> Result<T> {
    T::deserialize(v).map_err(schema)
}

fn to_value<T: Serialize>(doc: &T) -> Value {
    serde_json::to_value(doc).expect("documents contain only serializable data")
}

fn scalars<S: Scalar>(vs: &[Value]) -> Result<Vec<S>> {
    vs.iter().map(S::from_json).collect()
}

fn scalar_rows<S: Scalar>(rows: &[Vec<Value>]) -> Result<Vec<Vec<S>>> {
    rows.iter().map(|r| scalars(r)).collect()
}

fn values<S: Scalar>(xs: &[S]) -> Vec<Value> {
    xs.iter().map(Scalar::to_json).collect()
}

fn value_rows<S: Scalar>(rows: &[Vec<S>]) -> Vec<Vec<Value>> {
    rows.iter().map(|r| values(r)).collect()
}

fn matrix(rows: &[Vec<f64>], ncols: usize, what: &'static str) -> Result<DMatrix<f64>> {
    if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
        return Err(Error::DimensionMismatch {
            context: what,
            expected: ncols,
            actual: bad.len(),
        });
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn space_to_json(space: &FiniteSpace) -> Value {
    to_value(&space.labels())
}

pub fn space_from_json(v: &Value) -> Result<FiniteSpace> {
    FiniteSpace::new(from_value(v)?)
}

pub fn measure_to_json<S: Scalar>(m: &FiniteMeasure<S>) -> Value {
    to_value(&MeasureDoc {
        space: m.space().labels().to_vec(),
        weights: values(m.weights()),
    })
}

/// Parses a (possibly signed) measure. Callers that need a probability
/// measure check that themselves.
pub fn measure_from_json<S: Scalar>(v: &Value) -> Result<FiniteMeasure<S>> {
    let doc: MeasureDoc = from_value(v)?;
    FiniteMeasure::signed(FiniteSpace::new(doc.space)?, scalars(&doc.weights)?)
}

fn kernel_doc<S: Scalar>(k: &FiniteKernel<S>) -> KernelDoc {
    KernelDoc {
        source: k.source().labels().to_vec(),
        target: k.target().labels().to_vec(),
        rows: value_rows(k.rows()),
    }
}

fn kernel_from_doc<S: Scalar>(doc: KernelDoc) -> Result<FiniteKernel<S>> {
    FiniteKernel::new(
        FiniteSpace::new(doc.source)?,
        FiniteSpace::new(doc.target)?,
        scalar_rows(&doc.rows)?,
    )
}

pub fn kernel_to_json<S: Scalar>(k: &FiniteKernel<S>) -> Value {
    to_value(&kernel_doc(k))
}

pub fn kernel_from_json<S: Scalar>(v: &Value) -> Result<FiniteKernel<S>> {
    kernel_from_doc(from_value(v)?)
}

pub fn bayes_model_to_json<S: Scalar>(m: &BayesModel<S>) -> Value {
    to_value(&BayesModelDoc {
        theta: m.theta().labels().to_vec(),
        observations: m.sampling().target().labels().to_vec(),
        prior: values(m.prior().weights()),
        sampling: value_rows(m.sampling().rows()),
    })
}

pub fn bayes_model_from_json<S: Scalar>(v: &Value) -> Result<BayesModel<S>> {
    let doc: BayesModelDoc = from_value(v)?;
    let theta = FiniteSpace::new(doc.theta)?;
    let xs = FiniteSpace::new(doc.observations)?;
    let prior = FiniteMeasure::probability(theta.clone(), scalars(&doc.prior)?)?;
    let sampling = FiniteKernel::new(theta, xs, scalar_rows(&doc.sampling)?)?;
    BayesModel::new(prior, sampling)
}

pub fn inversion_to_json<S: Scalar>(r: &InversionResult<S>) -> Value {
    to_value(&InversionDoc {
        backend: S::KIND,
        kernel: kernel_doc(&r.kernel),
        null_points: r.null_points.clone(),
    })
}

pub fn inversion_from_json<S: Scalar>(v: &Value) -> Result<InversionResult<S>> {
    let doc: InversionDoc = from_value(v)?;
    if doc.backend != S::KIND {
        return Err(Error::Schema(format!(
            "document was produced by the {} backend",
            doc.backend.as_str()
        )));
    }
    Ok(InversionResult {
        kernel: kernel_from_doc(doc.kernel)?,
        null_points: doc.null_points,
    })
}

pub fn supervised_model_to_json<S: Scalar>(m: &SupervisedModel<S>) -> Value {
    to_value(&SupervisedDoc {
        theta: m.theta().labels().to_vec(),
        inputs: m.inputs().labels().to_vec(),
        labels: m.labels().labels().to_vec(),
        prior: values(m.prior().weights()),
        supervisors: m
            .supervisors()
            .iter()
            .map(|h| value_rows(h.rows()))
            .collect(),
    })
}

pub fn supervised_model_from_json<S: Scalar>(v: &Value) -> Result<SupervisedModel<S>> {
    let doc: SupervisedDoc = from_value(v)?;
    let theta = FiniteSpace::new(doc.theta)?;
    let xs = FiniteSpace::new(doc.inputs)?;
    let ys = FiniteSpace::new(doc.labels)?;
    let prior = FiniteMeasure::probability(theta, scalars(&doc.prior)?)?;
    let supervisors = doc
        .supervisors
        .iter()
        .map(|table| FiniteKernel::new(xs.clone(), ys.clone(), scalar_rows(table)?))
        .collect::<Result<Vec<_>>>()?;
    SupervisedModel::new(prior, supervisors)
}

/// Training data as an array of `[x, y]` pairs.
pub fn training_set_to_json(s: &TrainingSet) -> Value {
    to_value(&s.pairs())
}

pub fn training_set_from_json(v: &Value) -> Result<TrainingSet> {
    Ok(TrainingSet::new(from_value(v)?))
}

pub fn test_inputs_to_json(t: &TestInputs) -> Value {
    to_value(&t.points())
}

pub fn test_inputs_from_json(v: &Value) -> Result<TestInputs> {
    TestInputs::new(from_value(v)?)
}

pub fn posterior_to_json<S: Scalar>(p: &Posterior<S>) -> Value {
    let mut doc = serde_json::Map::new();
    doc.insert("backend".into(), to_value(&S::KIND));
    doc.insert("posterior".into(), measure_to_json(&p.measure));
    doc.insert("null_evidence".into(), Value::Bool(p.null_evidence));
    Value::Object(doc)
}

/// Joint predictive on `Y^m` plus per-coordinate marginals.
pub fn predictive_to_json<S: Scalar>(p: &Predictive<S>, labels: &FiniteSpace) -> Value {
    let mut doc = serde_json::Map::new();
    doc.insert("backend".into(), to_value(&S::KIND));
    doc.insert("joint".into(), measure_to_json(&p.joint));
    doc.insert(
        "marginals".into(),
        Value::Array(p.marginals(labels).iter().map(measure_to_json).collect()),
    );
    doc.insert("null_evidence".into(), Value::Bool(p.null_evidence));
    Value::Object(doc)
}

pub fn gaussian_to_json(g: &GaussianMeasure) -> Value {
    to_value(&GaussianDoc {
        mean: g.mean().iter().copied().collect(),
        cov: matrix_rows(g.cov()),
    })
}

pub fn gaussian_from_json(v: &Value) -> Result<GaussianMeasure> {
    let doc: GaussianDoc = from_value(v)?;
    let n = doc.mean.len();
    if doc.cov.len() != n {
        return Err(Error::DimensionMismatch {
            context: "covariance rows",
            expected: n,
            actual: doc.cov.len(),
        });
    }
    GaussianMeasure::new(
        DVector::from_vec(doc.mean),
        matrix(&doc.cov, n, "covariance columns")?,
    )
}

pub fn affine_to_json(t: &AffineGaussianMap) -> Value {
    to_value(&AffineDoc {
        a: matrix_rows(t.a()),
        b: t.b().iter().copied().collect(),
        noise: matrix_rows(t.noise()),
    })
}

pub fn affine_from_json(v: &Value) -> Result<AffineGaussianMap> {
    let doc: AffineDoc = from_value(v)?;
    let m = doc.b.len();
    if doc.a.len() != m || doc.noise.len() != m {
        return Err(Error::DimensionMismatch {
            context: "affine map rows",
            expected: m,
            actual: doc.a.len().max(doc.noise.len()),
        });
    }
    let n = doc.a.first().map_or(0, Vec::len);
    AffineGaussianMap::new(
        matrix(&doc.a, n, "A columns")?,
        DVector::from_vec(doc.b),
        matrix(&doc.noise, m, "noise columns")?,
    )
}

/// `%.17g`-style rendering: 17 significant digits, trailing zeros removed,
/// scientific notation outside `[1e-4, 1e17)`.
pub fn format_g17(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-4..17).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    } else {
        trim(&format!("{x:.*}", (16 - exp) as usize))
    }
}

/// Pretty-printed JSON with sorted keys and [`format_g17`] floats, ending in a newline.
pub fn to_canonical_string(v: &Value) -> String {
    let mut out = String::new();
    write_value(v, 0, &mut out);
    out.push('\n');
    out
}

fn write_value(v: &Value, depth: usize, out: &mut String) {
    let pad = |d: usize, out: &mut String| out.extend(std::iter::repeat_n("  ", d));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&format_g17(n.as_f64().expect("f64 number")));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) if items.iter().all(is_scalar) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_value(item, depth, out);
            }
            out.push(']');
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                pad(depth + 1, out);
                write_value(item, depth + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(depth, out);
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                pad(depth + 1, out);
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push_str(": ");
                write_value(&map[*k], depth + 1, out);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            pad(depth, out);
            out.push('}');
        }
    }
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}
