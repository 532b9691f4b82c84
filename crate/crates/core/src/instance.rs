//! The JSON instance format.
//!
//! ```json
//! {"spaces": [[0.5, 0.5], [1, 2]],
//!  "edges": [[0, 1]],
//!  "functions": [{"edge": [0, 1], "values": [[1, 2], [3, 4]]}]}
//! ```
//!
//! `values` is a nested array, one nesting level per vertex of `edge`, in
//! increasing vertex order. Space weights are renormalized on load.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::spaces::{EdgeFunction, HypergraphSystem, ProbSpace};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    spaces: Vec<Vec<f64>>,
    edges: Vec<Vec<usize>>,
    #[serde(default)]
    functions: Vec<RawFunction>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFunction {
    edge: Vec<usize>,
    values: Value,
}

/// A validated hypergraph system together with the functions listed in the file.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub system: HypergraphSystem,
    pub functions: Vec<EdgeFunction>,
}

impl Instance {
    pub fn new(system: HypergraphSystem, functions: Vec<EdgeFunction>) -> Self {
        Self { system, functions }
    }

    /// Parses and validates an instance document.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: RawInstance = serde_json::from_str(text).map_err(|e| Error::Instance(e.to_string()))?;
        let spaces = raw
            .spaces
            .iter()
            .map(|w| ProbSpace::new(w))
            .collect::<Result<Vec<_>>>()?;
        let system = HypergraphSystem::new(spaces, raw.edges)?;
        let mut functions = Vec::with_capacity(raw.functions.len());
        for rf in raw.functions {
            system.check_subset(&rf.edge)?;
            let shape = system.shape_of(&rf.edge);
            let mut flat = Vec::with_capacity(shape.iter().product());
            flatten_nested(&rf.values, &shape, &mut flat)?;
            functions.push(EdgeFunction::new(&system, &rf.edge, flat)?);
        }
        Ok(Self { system, functions })
    }

    pub fn from_json_bytes(bytes: &[u8]) -> Result<Self> {
        let text = std::str::from_utf8(bytes).map_err(|e| Error::Instance(e.to_string()))?;
        Self::from_json_str(text)
    }

    pub fn to_json_value(&self) -> Value {
        let raw = RawInstance {
            spaces: self.system.spaces().iter().map(|s| s.weights().to_vec()).collect(),
            edges: self.system.edges().to_vec(),
            functions: self
                .functions
                .iter()
                .map(|f| RawFunction {
                    edge: f.edge().to_vec(),
                    values: nest(f.values(), f.shape()),
                })
                .collect(),
        };
        serde_json::to_value(raw).expect("instance serializes")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("instance serializes")
    }

    /// The first listed function living on `edge`.
    pub fn function_on(&self, edge: &[usize]) -> Option<&EdgeFunction> {
        self.functions.iter().find(|f| f.edge() == edge)
    }

    /// One function per edge of the system, in edge order.
    pub fn assignment(&self) -> Result<Vec<EdgeFunction>> {
        self.system
            .edges()
            .iter()
            .map(|e| {
                self.function_on(e)
                    .cloned()
                    .ok_or_else(|| Error::Instance(format!("no function given for edge {e:?}")))
            })
            .collect()
    }
}

fn flatten_nested(value: &Value, shape: &[usize], out: &mut Vec<f64>) -> Result<()> {
    match shape.split_first() {
        None => match value.as_f64() {
            Some(v) => {
                out.push(v);
                Ok(())
            }
            None => Err(Error::Instance(format!("expected a number, found {value}"))),
        },
        Some((&len, rest)) => {
            let items = value
                .as_array()
                .ok_or_else(|| Error::Instance(format!("expected an array of length {len}")))?;
            if items.len() != len {
                return Err(Error::ShapeMismatch(format!(
                    "nested array has length {} where {len} atoms were expected",
                    items.len()
                )));
            }
            items.iter().try_for_each(|item| flatten_nested(item, rest, out))
        }
    }
}

fn nest(values: &[f64], shape: &[usize]) -> Value {
    match shape.split_first() {
        None => serde_json::json!(values[0]),
        Some((&len, rest)) => {
            let block = rest.iter().product::<usize>();
            Value::Array(
                (0..len)
                    .map(|k| nest(&values[k * block..(k + 1) * block], rest))
                    .collect(),
            )
        }
    }
}
