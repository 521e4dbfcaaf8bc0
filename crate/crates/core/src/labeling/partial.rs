use super::Label;
use crate::error::{Error, Result};
use std::collections::{BTreeMap, BTreeSet};

/// A labeling of a subset of the nodes, with its inverse image kept in sync.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialLabeling {
    assignment: Vec<Option<Label>>,
    labeled_count: usize,
    classes: BTreeMap<Label, BTreeSet<usize>>,
}

impl PartialLabeling {
    pub fn new(n: usize) -> Self {
        PartialLabeling {
            assignment: vec![None; n],
            labeled_count: 0,
            classes: BTreeMap::new(),
        }
    }

    /// Rebuilds every derived field from an assignment.
    pub fn from_assignment(assignment: &[Option<Label>]) -> Self {
        let mut p = PartialLabeling::new(assignment.len());
        for (v, l) in assignment.iter().enumerate() {
            if let Some(l) = *l {
                p.assign(v, l).expect("each node appears once");
            }
        }
        p
    }

    pub(crate) fn assign(&mut self, v: usize, label: Label) -> Result<()> {
        if self.assignment[v].is_some() {
            return Err(Error::Usage(format!("node {v} is already labeled")));
        }
        self.assignment[v] = Some(label);
        self.labeled_count += 1;
        self.classes.entry(label).or_default().insert(v);
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.assignment.len()
    }

    #[inline]
    pub fn label(&self, v: usize) -> Option<Label> {
        self.assignment[v]
    }

    #[inline]
    pub fn is_labeled(&self, v: usize) -> bool {
        self.assignment[v].is_some()
    }

    pub fn labeled_count(&self) -> usize {
        self.labeled_count
    }

    pub fn is_complete(&self) -> bool {
        self.labeled_count == self.assignment.len()
    }

    /// Number of non-empty label classes (`k`).
    pub fn distinct_label_count(&self) -> usize {
        self.classes.len()
    }

    pub fn class(&self, label: Label) -> Option<&BTreeSet<usize>> {
        self.classes.get(&label)
    }

    pub fn classes(&self) -> &BTreeMap<Label, BTreeSet<usize>> {
        &self.classes
    }

    pub fn assignment(&self) -> &[Option<Label>] {
        &self.assignment
    }

    pub fn labeled_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.assignment
            .iter()
            .enumerate()
            .filter_map(|(v, l)| l.map(|_| v))
    }

    pub fn unlabeled_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.assignment
            .iter()
            .enumerate()
            .filter_map(|(v, l)| l.is_none().then_some(v))
    }

    /// Complete labeling, if every node is labeled.
    pub fn to_complete(&self) -> Option<Vec<Label>> {
        self.assignment.iter().copied().collect()
    }
}
