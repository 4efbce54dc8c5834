// Copyright 2026 span2records Contributors
// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use super::reconstruct::ExecutionTrace;
use super::ENTRY_LABEL;
use crate::kieker::OperationExecutionRecord;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallTreeNode {
    pub label: String,
    /// Executions merged into this node; for the entry node, the number
    /// of traces folded in.
    pub weight: u64,
    /// Child node indices keyed by label.
    pub children: BTreeMap<String, usize>,
}

/// Execution trees of many traces merged under one entry node. Two
/// executions share a node iff their label paths from the entry match.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggregatedCallTree {
    pub nodes: Vec<CallTreeNode>,
}

impl Default for AggregatedCallTree {
    fn default() -> Self {
        AggregatedCallTree {
            nodes: vec![CallTreeNode {
                label: ENTRY_LABEL.to_owned(),
                weight: 0,
                children: BTreeMap::new(),
            }],
        }
    }
}

/// `<hostname>::<signature>`
pub fn execution_label(record: &OperationExecutionRecord) -> String {
    format!("{}::{}", record.hostname, record.operation_signature)
}

impl AggregatedCallTree {
    pub const ROOT: usize = 0;

    pub fn root(&self) -> &CallTreeNode {
        &self.nodes[Self::ROOT]
    }

    pub fn child(&self, node: usize, label: &str) -> Option<usize> {
        self.nodes[node].children.get(label).copied()
    }

    /// Node reached by following `labels` from the entry node.
    pub fn find_path<S: AsRef<str>>(&self, labels: &[S]) -> Option<usize> {
        labels
            .iter()
            .try_fold(Self::ROOT, |node, label| self.child(node, label.as_ref()))
    }

    pub fn add_trace(&mut self, trace: &ExecutionTrace) {
        self.nodes[Self::ROOT].weight += 1;
        let children = trace.children();
        let mut stack: Vec<(usize, usize)> = trace
            .roots()
            .map(|execution| (execution, Self::ROOT))
            .collect();
        while let Some((execution, parent_node)) = stack.pop() {
            let label = execution_label(&trace.executions[execution].record);
            let node = match self.nodes[parent_node].children.get(&label) {
                Some(&node) => node,
                None => {
                    let node = self.nodes.len();
                    self.nodes.push(CallTreeNode {
                        label: label.clone(),
                        weight: 0,
                        children: BTreeMap::new(),
                    });
                    self.nodes[parent_node].children.insert(label, node);
                    node
                }
            };
            self.nodes[node].weight += 1;
            stack.extend(children[execution].iter().map(|&c| (c, node)));
        }
    }
}

pub fn build_call_tree<'a>(
    traces: impl IntoIterator<Item = &'a ExecutionTrace>,
) -> AggregatedCallTree {
    let mut tree = AggregatedCallTree::default();
    for trace in traces {
        tree.add_trace(trace);
    }
    tree
}
