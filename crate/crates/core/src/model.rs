//! Finite domains with a discrete probability measure, concepts, value
//! tables, and the three distances used throughout the crate.
//!
//! All integrals are finite weighted sums. Threshold comparisons elsewhere in
//! the crate are exact `f64` comparisons, so values are stored as given
//! (apart from `-0.0`, which is normalised to `0.0` so that deduplication by
//! bit pattern agrees with `==`).

use std::collections::HashSet;
use std::sync::Arc;

use serde::Serialize;

use crate::bits::BitSet;
use crate::error::{Error, Result};

/// Tolerance on `Σ weights = 1` accepted at load time.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// A finite labelled domain with a probability measure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteSpace {
    labels: Vec<String>,
    weights: Vec<f64>,
}

impl FiniteSpace {
    /// Validates the measure and renormalises it so that the weights sum to
    /// one up to a single rounding step.
    pub fn new(labels: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        validate_labels(&labels)?;
        if labels.len() != weights.len() {
            return Err(Error::Dimension {
                expected: labels.len(),
                found: weights.len(),
            });
        }
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || !(0.0..=1.0).contains(&w) {
                return Err(Error::validation(format!(
                    "weights[{i}] = {w} is not in [0,1]"
                )));
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::validation(format!(
                "weights sum to {sum}, expected 1 within {WEIGHT_SUM_TOLERANCE:e}"
            )));
        }
        let weights = weights.into_iter().map(|w| w / sum).collect();
        Ok(FiniteSpace { labels, weights })
    }

    pub fn uniform(labels: Vec<String>) -> Result<Self> {
        validate_labels(&labels)?;
        let w = 1.0 / labels.len() as f64;
        let weights = vec![w; labels.len()];
        Ok(FiniteSpace { labels, weights })
    }

    /// Uniform space on labels `x1 … xn`.
    pub fn with_size(n: usize) -> Result<Self> {
        Self::uniform((1..=n).map(|i| format!("x{i}")).collect())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    fn check_len(&self, found: usize) -> Result<()> {
        if found != self.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                found,
            });
        }
        Ok(())
    }
}

fn validate_labels(labels: &[String]) -> Result<()> {
    if labels.is_empty() {
        return Err(Error::validation("space must contain at least one point"));
    }
    let mut seen = HashSet::with_capacity(labels.len());
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(Error::validation(format!("duplicate point label {l:?}")));
        }
    }
    Ok(())
}

/// A subset of the domain, stored as its indicator bit-vector.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Concept(BitSet);

impl Concept {
    pub fn empty(n: usize) -> Self {
        Concept(BitSet::new(n))
    }

    pub fn full(n: usize) -> Self {
        Concept(BitSet::full(n))
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        Concept(BitSet::from_bools(bits))
    }

    pub fn from_members(n: usize, members: &[usize]) -> Result<Self> {
        let mut s = BitSet::new(n);
        for &m in members {
            if m >= n {
                return Err(Error::validation(format!(
                    "member index {m} out of range for {n} points"
                )));
            }
            s.insert(m);
        }
        Ok(Concept(s))
    }

    /// Parses a `0`/`1` string, one character per point.
    pub fn parse(bits: &str) -> Result<Self> {
        let mut v = Vec::with_capacity(bits.len());
        for (i, ch) in bits.chars().enumerate() {
            match ch {
                '0' => v.push(false),
                '1' => v.push(true),
                other => {
                    return Err(Error::Parse(format!(
                        "character {i} of concept {bits:?} is {other:?}, expected 0 or 1"
                    )))
                }
            }
        }
        Ok(Concept::from_bools(&v))
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.len() == 0
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.0.contains(i)
    }

    pub fn members(&self) -> Vec<usize> {
        self.0.iter().collect()
    }

    pub fn cardinality(&self) -> usize {
        self.0.count()
    }

    pub fn bits(&self) -> &BitSet {
        &self.0
    }

    pub fn to_bit_string(&self) -> String {
        format!("{:?}", self.0)
    }
}

impl std::fmt::Debug for Concept {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Concept({:?})", self.0)
    }
}

/// A deduplicated family of concepts over one space.
#[derive(Debug, Clone)]
pub struct ConceptClass {
    space: Arc<FiniteSpace>,
    concepts: Vec<Concept>,
}

impl ConceptClass {
    /// Deduplicates by exact bit equality, keeping first occurrences in order.
    pub fn new(space: Arc<FiniteSpace>, concepts: Vec<Concept>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(concepts.len());
        let mut kept = Vec::with_capacity(concepts.len());
        for c in concepts {
            space.check_len(c.len())?;
            if seen.insert(c.clone()) {
                kept.push(c);
            }
        }
        Ok(ConceptClass {
            space,
            concepts: kept,
        })
    }

    pub fn space(&self) -> &Arc<FiniteSpace> {
        &self.space
    }

    pub fn concepts(&self) -> &[Concept] {
        &self.concepts
    }

    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    pub fn points(&self) -> usize {
        self.space.len()
    }

    /// Indicator functions of the concepts, in the same order.
    pub fn to_function_class(&self) -> FunctionClass {
        FunctionClass {
            space: self.space.clone(),
            functions: self
                .concepts
                .iter()
                .map(FunctionTable::indicator)
                .collect(),
        }
    }
}

/// A `[0,1]`-valued function on the domain, one value per point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionTable {
    values: Vec<f64>,
}

impl FunctionTable {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let mut values = values;
        for (i, v) in values.iter_mut().enumerate() {
            if !v.is_finite() || !(0.0..=1.0).contains(v) {
                return Err(Error::validation(format!("value[{i}] = {v} is not in [0,1]")));
            }
            if *v == 0.0 {
                *v = 0.0;
            }
        }
        Ok(FunctionTable { values })
    }

    pub fn constant(n: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; n])
    }

    pub fn indicator(concept: &Concept) -> Self {
        FunctionTable {
            values: (0..concept.len())
                .map(|i| if concept.contains(i) { 1.0 } else { 0.0 })
                .collect(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_binary(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    fn key(&self) -> Vec<u64> {
        self.values.iter().map(|v| v.to_bits()).collect()
    }
}

/// A deduplicated family of value tables over one space.
#[derive(Debug, Clone)]
pub struct FunctionClass {
    space: Arc<FiniteSpace>,
    functions: Vec<FunctionTable>,
}

impl FunctionClass {
    /// Deduplicates by exact value equality, keeping first occurrences in order.
    pub fn new(space: Arc<FiniteSpace>, functions: Vec<FunctionTable>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(functions.len());
        let mut kept = Vec::with_capacity(functions.len());
        for f in functions {
            space.check_len(f.len())?;
            if seen.insert(f.key()) {
                kept.push(f);
            }
        }
        Ok(FunctionClass {
            space,
            functions: kept,
        })
    }

    pub fn space(&self) -> &Arc<FiniteSpace> {
        &self.space
    }

    pub fn functions(&self) -> &[FunctionTable] {
        &self.functions
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn points(&self) -> usize {
        self.space.len()
    }

    pub fn is_binary(&self) -> bool {
        self.functions.iter().all(FunctionTable::is_binary)
    }

    /// The concept class induced by a bit-valued class.
    pub fn to_concept_class(&self) -> Result<ConceptClass> {
        if !self.is_binary() {
            return Err(Error::domain("function class is not bit-valued"));
        }
        let concepts = self
            .functions
            .iter()
            .map(|f| Concept::from_bools(&f.values.iter().map(|&v| v == 1.0).collect::<Vec<_>>()))
            .collect();
        ConceptClass::new(self.space.clone(), concepts)
    }
}

/// A strictly increasing list of point indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PointSubset {
    indices: Vec<usize>,
}

impl PointSubset {
    pub fn new(indices: Vec<usize>, points: usize) -> Result<Self> {
        for w in indices.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::validation(format!(
                    "subset indices must be strictly increasing, got {indices:?}"
                )));
            }
        }
        if let Some(&last) = indices.last() {
            if last >= points {
                return Err(Error::validation(format!(
                    "subset index {last} out of range for {points} points"
                )));
            }
        }
        Ok(PointSubset { indices })
    }

    pub fn empty() -> Self {
        PointSubset {
            indices: Vec::new(),
        }
    }

    pub(crate) fn from_sorted(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        PointSubset { indices }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn labels<'a>(&self, space: &'a FiniteSpace) -> Vec<&'a str> {
        self.indices
            .iter()
            .map(|&i| space.labels()[i].as_str())
            .collect()
    }
}

/// μ(A △ B).
pub fn sym_diff_measure(a: &Concept, b: &Concept, space: &FiniteSpace) -> Result<f64> {
    space.check_len(a.len())?;
    space.check_len(b.len())?;
    let mut total = 0.0;
    for (i, &w) in space.weights().iter().enumerate() {
        if a.contains(i) != b.contains(i) {
            total += w;
        }
    }
    Ok(total)
}

/// `E_μ|f − g|`.
pub fn expected_abs_diff(f: &FunctionTable, g: &FunctionTable, space: &FiniteSpace) -> Result<f64> {
    space.check_len(f.len())?;
    space.check_len(g.len())?;
    let mut total = 0.0;
    for (i, &w) in space.weights().iter().enumerate() {
        let d = (f.values[i] - g.values[i]).abs();
        if d != 0.0 {
            total += w * d;
        }
    }
    Ok(total)
}

/// `‖f − g‖` in `L2(μ)`.
pub fn l2_distance(f: &FunctionTable, g: &FunctionTable, space: &FiniteSpace) -> Result<f64> {
    space.check_len(f.len())?;
    space.check_len(g.len())?;
    Ok(l2_unchecked(f.values(), g.values(), space.weights()))
}

#[inline]
pub(crate) fn l2_unchecked(f: &[f64], g: &[f64], weights: &[f64]) -> f64 {
    let mut total = 0.0;
    for ((&a, &b), &w) in f.iter().zip(g).zip(weights) {
        let d = a - b;
        total += w * d * d;
    }
    total.sqrt()
}

/// L2 product distance `sqrt(Σ dᵢ²)` of component distances.
pub fn l2_product_distance(ds: &[f64]) -> Result<f64> {
    if ds.is_empty() {
        return Err(Error::Dimension {
            expected: 1,
            found: 0,
        });
    }
    if let Some(d) = ds.iter().find(|d| !(**d >= 0.0) || !d.is_finite()) {
        return Err(Error::domain(format!("component distance {d} is not a finite non-negative number")));
    }
    Ok(ds.iter().map(|d| d * d).sum::<f64>().sqrt())
}
