//! JSON serialization of decision trees.
//!
//! Format: a leaf is `{"leaf": 1}` or `{"leaf": -1}`; an internal node is
//! `{"var": i, "0": <subtree>, "1": <subtree>}` with 1-indexed variables.
//! Deserialization reports the JSON path of the offending node.

use serde_json::{json, Map, Value};

use super::DecisionTree;
use crate::error::{Error, Result};

pub fn serialize_tree(t: &DecisionTree) -> String {
    to_value(t).to_string()
}

fn to_value(t: &DecisionTree) -> Value {
    match t {
        DecisionTree::Leaf(l) => json!({ "leaf": l }),
        DecisionTree::Node { var, lo, hi } => json!({
            "var": var,
            "0": to_value(lo),
            "1": to_value(hi),
        }),
    }
}

pub fn deserialize_tree(bytes: &[u8]) -> Result<DecisionTree> {
    let value: Value = serde_json::from_slice(bytes).map_err(|e| Error::Parse {
        at: "$".into(),
        msg: e.to_string(),
    })?;
    let tree = from_value(&value, &mut String::from("$"))?;
    // Reject repeated variables along a path up front.
    tree.validate(None)?;
    Ok(tree)
}

fn from_value(v: &Value, at: &mut String) -> Result<DecisionTree> {
    let obj: &Map<String, Value> = v.as_object().ok_or_else(|| Error::Parse {
        at: at.clone(),
        msg: "expected an object".into(),
    })?;
    if let Some(leaf) = obj.get("leaf") {
        return match leaf.as_i64() {
            Some(1) => Ok(DecisionTree::Leaf(1)),
            Some(-1) => Ok(DecisionTree::Leaf(-1)),
            _ => Err(Error::Parse {
                at: at.clone(),
                msg: format!("leaf must be 1 or -1, got {leaf}"),
            }),
        };
    }
    let var = obj
        .get("var")
        .ok_or_else(|| Error::Parse {
            at: at.clone(),
            msg: "node needs `var` (or `leaf`)".into(),
        })?
        .as_u64()
        .ok_or_else(|| Error::Parse {
            at: at.clone(),
            msg: "`var` must be a positive integer".into(),
        })?;
    if var == 0 {
        return Err(Error::Parse {
            at: at.clone(),
            msg: "variables are 1-indexed".into(),
        });
    }
    let mut branch = |bit: &str| -> Result<DecisionTree> {
        let sub = obj.get(bit).ok_or_else(|| Error::Parse {
            at: at.clone(),
            msg: format!("node missing branch {bit:?}"),
        })?;
        let len = at.len();
        at.push('.');
        at.push_str(bit);
        let t = from_value(sub, at);
        at.truncate(len);
        t
    };
    let lo = branch("0")?;
    let hi = branch("1")?;
    Ok(DecisionTree::Node {
        var: var as usize,
        lo: Box::new(lo),
        hi: Box::new(hi),
    })
}
