//! The JSON class-definition document.
//!
//! ```json
//! {
//!   "points": ["a", "b", "c"],
//!   "weights": [0.5, 0.25, 0.25],
//!   "concepts": ["100", "110"],
//!   "functions": [[0.1, 0.5, 1.0]],
//!   "classes": [{"name": "left", "concepts": ["100"]}],
//!   "truth_tables": {"implies": "1101"}
//! }
//! ```
//!
//! `weights` defaults to uniform. `classes` holds the operands of a
//! composition and `truth_tables` names user-defined classical connectives.
//! Validation errors name the offending field, e.g. `concepts[2]`.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::compose::ClassicalConnective;
use crate::error::{Error, Result};
use crate::model::{Concept, ConceptClass, FiniteSpace, FunctionClass, FunctionTable};

/// One operand class inside `classes`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub concepts: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functions: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassDocument {
    pub points: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub concepts: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functions: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classes: Option<Vec<ClassEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth_tables: Option<BTreeMap<String, String>>,
}

fn at(path: &str, e: Error) -> Error {
    match e {
        Error::Parse(m) | Error::Validation(m) | Error::Domain(m) => Error::Validation(format!("{path}: {m}")),
        Error::Dimension { expected, found } => {
            Error::Validation(format!("{path}: expected {expected} entries, found {found}"))
        }
        other => other,
    }
}

fn parse_concepts(path: &str, rows: &[String], space: &Arc<FiniteSpace>) -> Result<ConceptClass> {
    let concepts = rows
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let c = Concept::parse(s).map_err(|e| at(&format!("{path}[{i}]"), e))?;
            if c.len() != space.len() {
                return Err(at(
                    &format!("{path}[{i}]"),
                    Error::Dimension {
                        expected: space.len(),
                        found: c.len(),
                    },
                ));
            }
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;
    ConceptClass::new(space.clone(), concepts)
}

fn parse_functions(path: &str, rows: &[Vec<f64>], space: &Arc<FiniteSpace>) -> Result<FunctionClass> {
    let tables = rows
        .iter()
        .enumerate()
        .map(|(i, v)| {
            if v.len() != space.len() {
                return Err(at(
                    &format!("{path}[{i}]"),
                    Error::Dimension {
                        expected: space.len(),
                        found: v.len(),
                    },
                ));
            }
            FunctionTable::new(v.clone()).map_err(|e| at(&format!("{path}[{i}]"), e))
        })
        .collect::<Result<Vec<_>>>()?;
    FunctionClass::new(space.clone(), tables)
}

impl ClassDocument {
    /// Parses JSON text; syntax and shape errors carry line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serialises")
    }

    pub fn space(&self) -> Result<Arc<FiniteSpace>> {
        let space = match &self.weights {
            None => FiniteSpace::uniform(self.points.clone()).map_err(|e| at("points", e))?,
            Some(w) => FiniteSpace::new(self.points.clone(), w.clone()).map_err(|e| at("weights", e))?,
        };
        Ok(Arc::new(space))
    }

    /// The top-level `concepts`.
    pub fn concept_class(&self) -> Result<ConceptClass> {
        let space = self.space()?;
        match &self.concepts {
            Some(rows) => parse_concepts("concepts", rows, &space),
            None => Err(Error::validation("concepts: field is missing")),
        }
    }

    /// The top-level `functions`, or the indicators of `concepts` when no
    /// functions are given.
    pub fn function_class(&self) -> Result<FunctionClass> {
        let space = self.space()?;
        match (&self.functions, &self.concepts) {
            (Some(rows), _) => parse_functions("functions", rows, &space),
            (None, Some(rows)) => Ok(parse_concepts("concepts", rows, &space)?.to_function_class()),
            (None, None) => Err(Error::validation("functions: field is missing")),
        }
    }

    fn entries(&self) -> Result<&[ClassEntry]> {
        match &self.classes {
            Some(c) if !c.is_empty() => Ok(c),
            _ => Err(Error::validation("classes: field is missing or empty")),
        }
    }

    /// Each entry of `classes` as a concept class.
    pub fn concept_classes(&self) -> Result<Vec<ConceptClass>> {
        let space = self.space()?;
        self.entries()?
            .iter()
            .enumerate()
            .map(|(i, e)| match &e.concepts {
                Some(rows) => parse_concepts(&format!("classes[{i}].concepts"), rows, &space),
                None => Err(Error::validation(format!("classes[{i}].concepts: field is missing"))),
            })
            .collect()
    }

    /// Each entry of `classes` as a function class (indicators when only
    /// `concepts` are given).
    pub fn function_classes(&self) -> Result<Vec<FunctionClass>> {
        let space = self.space()?;
        self.entries()?
            .iter()
            .enumerate()
            .map(|(i, e)| match (&e.functions, &e.concepts) {
                (Some(rows), _) => parse_functions(&format!("classes[{i}].functions"), rows, &space),
                (None, Some(rows)) => {
                    Ok(parse_concepts(&format!("classes[{i}].concepts"), rows, &space)?.to_function_class())
                }
                (None, None) => Err(Error::validation(format!("classes[{i}]: no concepts or functions"))),
            })
            .collect()
    }

    /// A connective named in `truth_tables`, else a built-in one, else a
    /// literal truth table such as `"0110"`.
    pub fn connective(&self, name: &str, arity: usize) -> Result<ClassicalConnective> {
        if let Some(bits) = self.truth_tables.as_ref().and_then(|t| t.get(name)) {
            let c = ClassicalConnective::from_truth_table(bits).map_err(|e| at(&format!("truth_tables.{name}"), e))?;
            return ClassicalConnective::new(name, c.arity(), c.table().to_vec());
        }
        if name.chars().all(|ch| ch == '0' || ch == '1') {
            return ClassicalConnective::from_truth_table(name);
        }
        ClassicalConnective::catalog(name, arity)
    }

    pub fn from_concept_class(class: &ConceptClass) -> Self {
        let space = class.space();
        ClassDocument {
            points: space.labels().to_vec(),
            weights: Some(space.weights().to_vec()),
            concepts: Some(class.concepts().iter().map(Concept::to_bit_string).collect()),
            ..Default::default()
        }
    }

    pub fn from_function_class(class: &FunctionClass) -> Self {
        let space = class.space();
        ClassDocument {
            points: space.labels().to_vec(),
            weights: Some(space.weights().to_vec()),
            functions: Some(class.functions().iter().map(|f| f.values().to_vec()).collect()),
            ..Default::default()
        }
    }
}
