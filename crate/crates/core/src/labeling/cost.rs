use super::{Label, LabelingProblem};
use crate::error::{Error, Result};
use crate::graph::Graph;
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;

/// Cost of a complete labeling. Infeasible labelings compare greater than
/// every finite cost and never enter arithmetic.
#[derive(Debug, Clone, Copy)]
pub enum Cost {
    Finite(f64),
    Infeasible,
}

impl Cost {
    pub fn finite(&self) -> Option<f64> {
        match self {
            Cost::Finite(c) => Some(*c),
            Cost::Infeasible => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, Cost::Finite(_))
    }
}

impl PartialEq for Cost {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Cost {}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Cost::Finite(a), Cost::Finite(b)) => a.total_cmp(b),
            (Cost::Finite(_), Cost::Infeasible) => Ordering::Less,
            (Cost::Infeasible, Cost::Finite(_)) => Ordering::Greater,
            (Cost::Infeasible, Cost::Infeasible) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cost::Finite(c) => write!(f, "{c}"),
            Cost::Infeasible => f.write_str("inf"),
        }
    }
}

impl Serialize for Cost {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Cost::Finite(c) => s.serialize_f64(*c),
            Cost::Infeasible => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Cost {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(c) => Ok(Cost::Finite(c)),
            Repr::Str(s) if s == "inf" => Ok(Cost::Infeasible),
            Repr::Str(s) => Err(de::Error::custom(format!("invalid cost `{s}`"))),
        }
    }
}

/// Checks a complete labeling and returns `(feasible, cost)`.
pub fn verify_and_cost<P: LabelingProblem + ?Sized>(
    problem: &P,
    g: &Graph,
    labels: &[Label],
) -> Result<(bool, Cost)> {
    if labels.len() != g.node_count() {
        return Err(Error::Usage(format!(
            "labeling covers {} of {} nodes",
            labels.len(),
            g.node_count()
        )));
    }
    if problem.is_feasible(g, labels) {
        Ok((true, Cost::Finite(problem.cost(g, labels))))
    } else {
        Ok((false, Cost::Infeasible))
    }
}

/// JSON form of a complete labeling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelingRecord {
    pub problem: String,
    pub labels: Vec<Label>,
    pub cost: Cost,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labeling::Problem;

    #[test]
    fn alternating_c4() {
        let g = Graph::cycle(4);
        assert_eq!(
            verify_and_cost(&Problem::Coloring, &g, &[1, 2, 1, 2]).unwrap(),
            (true, Cost::Finite(2.0))
        );
    }

    #[test]
    fn monochromatic_edge_is_infeasible() {
        let g = Graph::path(2);
        assert_eq!(
            verify_and_cost(&Problem::Coloring, &g, &[1, 1]).unwrap(),
            (false, Cost::Infeasible)
        );
    }

    #[test]
    fn star_centre_cover() {
        let g = Graph::star(4);
        assert_eq!(
            verify_and_cost(&Problem::VertexCover, &g, &[1, 0, 0, 0, 0]).unwrap(),
            (true, Cost::Finite(1.0))
        );
        assert!(verify_and_cost(&Problem::VertexCover, &g, &[1, 0]).is_err());
    }

    #[test]
    fn infeasible_sorts_last() {
        let mut v = vec![Cost::Infeasible, Cost::Finite(3.0), Cost::Finite(-1.0)];
        v.sort();
        assert_eq!(v, vec![Cost::Finite(-1.0), Cost::Finite(3.0), Cost::Infeasible]);
    }

    #[test]
    fn record_json_shape() {
        let r = LabelingRecord {
            problem: "gc".into(),
            labels: vec![1, 2],
            cost: Cost::Infeasible,
        };
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(s, r#"{"problem":"gc","labels":[1,2],"cost":"inf"}"#);
        let back: LabelingRecord = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
        let r2: LabelingRecord =
            serde_json::from_str(r#"{"problem":"mvc","labels":[0,1],"cost":1}"#).unwrap();
        assert_eq!(r2.cost, Cost::Finite(1.0));
    }
}
