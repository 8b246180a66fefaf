//! Finite measurable spaces. The σ-algebra is always the full powerset, so a
//! space is just an ordered list of distinct labels.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Opaque point identifier. Product spaces use [`Label::Tuple`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Label {
    Int(i64),
    Name(String),
    Tuple(Vec<Label>),
}

impl Label {
    pub fn name(s: impl Into<String>) -> Self {
        Label::Name(s.into())
    }

    pub fn pair(a: Label, b: Label) -> Self {
        Label::Tuple(vec![a, b])
    }

    /// Integer-lattice coordinates, if this label is an integer or a tuple of integers.
    pub fn lattice_point(&self) -> Option<Vec<i64>> {
        match self {
            Label::Int(i) => Some(vec![*i]),
            Label::Tuple(parts) => parts
                .iter()
                .map(|p| match p {
                    Label::Int(i) => Some(*i),
                    _ => None,
                })
                .collect(),
            Label::Name(_) => None,
        }
    }

    /// Recursively splices nested tuples into one flat tuple.
    pub fn flatten(&self) -> Label {
        fn walk(l: &Label, out: &mut Vec<Label>) {
            match l {
                Label::Tuple(parts) => parts.iter().for_each(|p| walk(p, out)),
                other => out.push(other.clone()),
            }
        }
        match self {
            Label::Tuple(_) => {
                let mut out = Vec::new();
                walk(self, &mut out);
                Label::Tuple(out)
            }
            other => other.clone(),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Int(i) => write!(f, "{i}"),
            Label::Name(s) => write!(f, "{s}"),
            Label::Tuple(parts) => {
                write!(f, "(")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl From<i64> for Label {
    fn from(i: i64) -> Self {
        Label::Int(i)
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Label::Name(s.to_owned())
    }
}

#[derive(Debug)]
struct SpaceInner {
    labels: Vec<Label>,
    index: HashMap<Label, usize>,
    factors: Option<Vec<FiniteSpace>>,
}

/// A nonempty ordered set of distinct labels. Cheap to clone.
#[derive(Clone)]
pub struct FiniteSpace(Arc<SpaceInner>);

impl FiniteSpace {
    pub fn new(labels: Vec<Label>) -> Result<Self> {
        let factors = detect_factors(&labels);
        Self::build(labels, factors)
    }

    fn build(labels: Vec<Label>, factors: Option<Vec<FiniteSpace>>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptySpace);
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        Ok(FiniteSpace(Arc::new(SpaceInner {
            labels,
            index,
            factors,
        })))
    }

    /// Labels `0, 1, …, n-1`.
    pub fn range(n: usize) -> Result<Self> {
        Self::new((0..n as i64).map(Label::Int).collect())
    }

    pub fn from_names<I, T>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = T>,
        T: Into<String>,
    {
        Self::new(names.into_iter().map(|n| Label::Name(n.into())).collect())
    }

    /// Cartesian product in row-major order (first factor varies slowest).
    /// A single factor is returned unchanged.
    pub fn product(factors: &[FiniteSpace]) -> Result<Self> {
        match factors {
            [] => Err(Error::EmptySpace),
            [only] => Ok(only.clone()),
            _ => {
                let total: usize = factors.iter().map(|f| f.len()).product();
                let mut labels = Vec::with_capacity(total);
                let mut idx = vec![0usize; factors.len()];
                for _ in 0..total {
                    labels.push(Label::Tuple(
                        idx.iter()
                            .zip(factors)
                            .map(|(&i, f)| f.label(i).clone())
                            .collect(),
                    ));
                    for d in (0..factors.len()).rev() {
                        idx[d] += 1;
                        if idx[d] < factors[d].len() {
                            break;
                        }
                        idx[d] = 0;
                    }
                }
                Self::build(labels, Some(factors.to_vec()))
            }
        }
    }

    pub fn pair(a: &FiniteSpace, b: &FiniteSpace) -> Result<Self> {
        Self::product(&[a.clone(), b.clone()])
    }

    /// The one-point space, used as `Y^0`.
    pub fn unit() -> Self {
        Self::build(vec![Label::Tuple(Vec::new())], None).expect("one label")
    }

    pub fn len(&self) -> usize {
        self.0.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn labels(&self) -> &[Label] {
        &self.0.labels
    }

    pub fn label(&self, i: usize) -> &Label {
        &self.0.labels[i]
    }

    pub fn index_of(&self, label: &Label) -> Option<usize> {
        self.0.index.get(label).copied()
    }

    pub fn require_index(&self, label: &Label) -> Result<usize> {
        self.index_of(label)
            .ok_or_else(|| Error::UnknownLabel(label.clone()))
    }

    pub fn factors(&self) -> Option<&[FiniteSpace]> {
        self.0.factors.as_deref()
    }

    /// The two factors of a binary product.
    pub fn binary_factors(&self) -> Result<(&FiniteSpace, &FiniteSpace)> {
        match self.factors() {
            Some([a, b]) => Ok((a, b)),
            _ => Err(Error::NotProduct),
        }
    }

    /// Subspace on the given labels, kept in this space's order.
    pub fn restrict(&self, keep: &[Label]) -> Result<Self> {
        let mut idx = keep
            .iter()
            .map(|l| self.require_index(l))
            .collect::<Result<Vec<_>>>()?;
        idx.sort_unstable();
        idx.dedup();
        Self::new(idx.into_iter().map(|i| self.label(i).clone()).collect())
    }

    pub fn ptr_eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl PartialEq for FiniteSpace {
    fn eq(&self, other: &Self) -> bool {
        self.ptr_eq(other) || self.0.labels == other.0.labels
    }
}

impl Eq for FiniteSpace {}

impl fmt::Debug for FiniteSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.labels()).finish()
    }
}

/// Recovers product structure from tuple labels laid out in row-major order.
fn detect_factors(labels: &[Label]) -> Option<Vec<FiniteSpace>> {
    let arity = match labels.first()? {
        Label::Tuple(p) if p.len() >= 2 => p.len(),
        _ => return None,
    };
    let mut coords: Vec<Vec<Label>> = vec![Vec::new(); arity];
    for l in labels {
        match l {
            Label::Tuple(p) if p.len() == arity => {
                for (c, part) in coords.iter_mut().zip(p) {
                    if !c.contains(part) {
                        c.push(part.clone());
                    }
                }
            }
            _ => return None,
        }
    }
    let factors = coords
        .into_iter()
        .map(FiniteSpace::new)
        .collect::<Result<Vec<_>>>()
        .ok()?;
    let candidate = FiniteSpace::product(&factors).ok()?;
    (candidate.labels() == labels).then_some(factors)
}
