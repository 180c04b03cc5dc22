//! Construction specifications: JSON trees describing nested forests,
//! normalized so that structurally equal sub-constructions share one plan
//! node.
//!
//! A spec node is an object with a `prop` string, a non-empty `ops` array
//! of operation names and an optional `nests` array of child nodes:
//!
//! ```json
//! {"prop": "int", "ops": ["union"], "nests": [{"prop": "int", "ops": ["union"]}]}
//! ```
//!
//! A plan lists unique nodes children first, one per line:
//!
//! ```text
//! #0 LHF(int, {union})
//! #1 LHF(int, {union}, #0)
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde_json::Value;
use thiserror::Error;

use crate::dedup::Interner;
use crate::error::LhfError;
use crate::forest::OpKind;
use crate::nesting::{Construction, ForestId, NestingConfig, OpSet};

/// Points-to sets nesting pointee sets, next to live-variable sets of the
/// same shape as the pointee sets.
pub const POINTS_TO_LIVENESS_SPEC: &str = include_str!("../fixtures/points_to_liveness.json");

#[derive(Debug, Error)]
pub enum ConstructError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("plan node #{node}: unknown operation `{name}`")]
    UnknownOperation { node: usize, name: String },
    #[error(transparent)]
    Lhf(#[from] LhfError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstructionSpec {
    pub prop: String,
    pub ops: Vec<String>,
    pub nests: Vec<ConstructionSpec>,
}

impl ConstructionSpec {
    pub fn leaf(prop: &str, ops: &[&str]) -> Self {
        Self {
            prop: prop.to_string(),
            ops: ops.iter().map(|s| s.to_string()).collect(),
            nests: Vec::new(),
        }
    }

    pub fn nesting(prop: &str, ops: &[&str], nests: Vec<ConstructionSpec>) -> Self {
        Self {
            nests,
            ..Self::leaf(prop, ops)
        }
    }

    /// Nodes in the tree, this one included.
    pub fn node_count(&self) -> usize {
        1 + self.nests.iter().map(Self::node_count).sum::<usize>()
    }

    pub fn to_json(&self) -> Value {
        let mut obj = serde_json::Map::new();
        obj.insert("prop".into(), Value::from(self.prop.clone()));
        obj.insert("ops".into(), Value::from(self.ops.clone()));
        if !self.nests.is_empty() {
            obj.insert(
                "nests".into(),
                Value::Array(self.nests.iter().map(Self::to_json).collect()),
            );
        }
        Value::Object(obj)
    }
}

fn schema(path: &str, message: impl Into<String>) -> ConstructError {
    ConstructError::Schema {
        path: path.to_string(),
        message: message.into(),
    }
}

pub fn parse_spec(text: &str) -> Result<ConstructionSpec, ConstructError> {
    let value: Value = serde_json::from_str(text)?;
    spec_from_value(&value, "$")
}

fn spec_from_value(value: &Value, path: &str) -> Result<ConstructionSpec, ConstructError> {
    let obj = value
        .as_object()
        .ok_or_else(|| schema(path, "expected an object"))?;
    if let Some(key) = obj.keys().find(|k| !matches!(k.as_str(), "prop" | "ops" | "nests")) {
        return Err(schema(&format!("{path}.{key}"), "unknown field"));
    }
    let prop = match obj.get("prop") {
        None => return Err(schema(path, "missing field `prop`")),
        Some(Value::String(s)) if !s.is_empty() => s.clone(),
        Some(_) => return Err(schema(&format!("{path}.prop"), "expected a non-empty string")),
    };
    let ops = match obj.get("ops") {
        None => return Err(schema(path, "missing field `ops`")),
        Some(Value::Array(items)) if !items.is_empty() => items
            .iter()
            .enumerate()
            .map(|(i, op)| match op {
                Value::String(s) if !s.is_empty() => Ok(s.clone()),
                _ => Err(schema(&format!("{path}.ops[{i}]"), "expected a non-empty string")),
            })
            .collect::<Result<Vec<_>, _>>()?,
        Some(_) => return Err(schema(&format!("{path}.ops"), "expected a non-empty array")),
    };
    let nests = match obj.get("nests") {
        None => Vec::new(),
        Some(Value::Array(items)) => items
            .iter()
            .enumerate()
            .map(|(i, child)| spec_from_value(child, &format!("{path}.nests[{i}]")))
            .collect::<Result<Vec<_>, _>>()?,
        Some(_) => return Err(schema(&format!("{path}.nests"), "expected an array")),
    };
    Ok(ConstructionSpec { prop, ops, nests })
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PlanNode {
    pub prop: String,
    pub ops: BTreeSet<String>,
    /// Plan ids of the nested nodes, in nesting order.
    pub children: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalizedPlan {
    /// Unique nodes, every child before its parents.
    pub nodes: Vec<PlanNode>,
    pub root: usize,
}

/// Interns the spec bottom-up: two nodes share a plan id exactly when they
/// agree on prop, on the set of ops and on the ordered child plan ids.
pub fn normalize(spec: &ConstructionSpec) -> NormalizedPlan {
    let mut interner = Interner::new();
    let root = intern(spec, &mut interner) as usize;
    let nodes = interner.iter().map(|(_, n)| n.clone()).collect();
    NormalizedPlan { nodes, root }
}

fn intern(spec: &ConstructionSpec, interner: &mut Interner<PlanNode>) -> u64 {
    let children = spec
        .nests
        .iter()
        .map(|child| intern(child, interner) as usize)
        .collect();
    interner.intern(PlanNode {
        prop: spec.prop.clone(),
        ops: spec.ops.iter().cloned().collect(),
        children,
    })
}

impl NormalizedPlan {
    /// Rebuilds the tree the plan describes, with ops listed in sorted order.
    pub fn expand(&self) -> ConstructionSpec {
        self.expand_node(self.root)
    }

    fn expand_node(&self, id: usize) -> ConstructionSpec {
        let node = &self.nodes[id];
        ConstructionSpec {
            prop: node.prop.clone(),
            ops: node.ops.iter().cloned().collect(),
            nests: node.children.iter().map(|&c| self.expand_node(c)).collect(),
        }
    }
}

pub fn emit_plan(plan: &NormalizedPlan) -> String {
    let mut out = String::new();
    for (id, node) in plan.nodes.iter().enumerate() {
        let ops: Vec<&str> = node.ops.iter().map(String::as_str).collect();
        write!(out, "#{id} LHF({}, {{{}}}", node.prop, ops.join(", ")).unwrap();
        for c in &node.children {
            write!(out, ", #{c}").unwrap();
        }
        out.push_str(")\n");
    }
    out
}

fn op_kind(name: &str) -> Option<OpKind> {
    Some(match name {
        "union" => OpKind::Union,
        "intersection" => OpKind::Intersection,
        "difference" => OpKind::Difference,
        "insert" => OpKind::InsertSingle,
        "remove" => OpKind::RemoveSingle,
        _ => return None,
    })
}

/// Instantiates one forest per plan node. Returns the construction and the
/// forest of each plan id.
pub fn bind(plan: &NormalizedPlan) -> Result<(Construction, Vec<ForestId>), ConstructError> {
    let mut c = Construction::new();
    let mut forests: Vec<ForestId> = Vec::with_capacity(plan.nodes.len());
    for (id, node) in plan.nodes.iter().enumerate() {
        let mut ops = OpSet::none();
        for name in &node.ops {
            let kind = op_kind(name).ok_or_else(|| ConstructError::UnknownOperation {
                node: id,
                name: name.clone(),
            })?;
            ops = ops.with(kind);
        }
        let forest = if node.children.is_empty() {
            c.add_flat(ops)
        } else {
            let children: Vec<ForestId> = node.children.iter().map(|&k| forests[k]).collect();
            c.add_nested(ops, &children, NestingConfig::default())?
        };
        forests.push(forest);
    }
    Ok((c, forests))
}
