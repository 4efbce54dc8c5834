// Copyright 2026 span2records Contributors
// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet};

use super::reconstruct::ExecutionTrace;
use super::ENTRY_LABEL;

/// Host-level call graph. Every execution contributes one inbound edge:
/// from its caller's host, or from the entry node for roots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    pub nodes: BTreeSet<String>,
    pub edges: BTreeMap<(String, String), u64>,
}

impl Default for DependencyGraph {
    fn default() -> Self {
        DependencyGraph {
            nodes: BTreeSet::from([ENTRY_LABEL.to_owned()]),
            edges: BTreeMap::new(),
        }
    }
}

impl DependencyGraph {
    pub fn weight(&self, from: &str, to: &str) -> u64 {
        self.edges
            .get(&(from.to_owned(), to.to_owned()))
            .copied()
            .unwrap_or(0)
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.values().sum()
    }

    pub fn add_trace(&mut self, trace: &ExecutionTrace) {
        for execution in &trace.executions {
            let callee = &execution.record.hostname;
            let caller = match execution.parent {
                Some(parent) => &trace.executions[parent].record.hostname,
                None => ENTRY_LABEL,
            };
            self.nodes.insert(callee.clone());
            *self
                .edges
                .entry((caller.to_owned(), callee.clone()))
                .or_insert(0) += 1;
        }
    }
}

pub fn build_dependency_graph<'a>(
    traces: impl IntoIterator<Item = &'a ExecutionTrace>,
) -> DependencyGraph {
    let mut graph = DependencyGraph::default();
    for trace in traces {
        graph.add_trace(trace);
    }
    graph
}
