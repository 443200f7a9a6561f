use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Outcome of a single inequality evaluation.
///
/// `margin` is signed so that a nonnegative value means the inequality holds:
/// for a claim `lhs ≥ rhs` it is `lhs − rhs`, for a claim `lhs ≤ rhs` it is
/// `rhs − lhs`. Serialises to a flat JSON object with the keys `lhs`, `rhs`,
/// `margin`, `config` and `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub config: Value,
    pub seed: Option<u64>,
}

impl BoundReport {
    /// Report for the claim `lhs ≥ rhs`.
    pub fn at_least(lhs: f64, rhs: f64, config: Value) -> Self {
        Self { lhs, rhs, margin: lhs - rhs, config, seed: None }
    }

    /// Report for the claim `lhs ≤ rhs`.
    pub fn at_most(lhs: f64, rhs: f64, config: Value) -> Self {
        Self { lhs, rhs, margin: rhs - lhs, config, seed: None }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.margin >= -tol
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("BoundReport always serialises")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn flat_json_keys() {
        let r = BoundReport::at_least(2.0, 1.5, json!({"family": "slab"})).with_seed(9);
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys, ["lhs", "rhs", "margin", "config", "seed"]);
        assert_eq!(v["margin"], 0.5);
        assert_eq!(v["seed"], 9);
        assert_eq!(BoundReport::at_most(2.0, 1.5, Value::Null).margin, -0.5);
    }
}
