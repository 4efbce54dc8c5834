// Copyright 2026 span2records Contributors
// SPDX-License-Identifier: Apache-2.0

//! Graphviz DOT rendering. Output is deterministic: nodes sorted by label,
//! edges by endpoints.

use std::fmt::Write;

use super::calltree::AggregatedCallTree;
use super::deps::DependencyGraph;

pub trait ToDot {
    fn to_dot(&self) -> String;
}

pub fn emit_dot(graph: &impl ToDot) -> String {
    graph.to_dot()
}

/// Quotes a DOT identifier, escaping `\`, `"` and line breaks.
pub fn quote(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => {}
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

impl ToDot for DependencyGraph {
    fn to_dot(&self) -> String {
        let mut out = String::from("digraph dependencies {\n  node [shape=box];\n");
        for node in &self.nodes {
            let _ = writeln!(out, "  {};", quote(node));
        }
        for ((from, to), weight) in &self.edges {
            let _ = writeln!(
                out,
                "  {} -> {} [label=\"{weight}\"];",
                quote(from),
                quote(to)
            );
        }
        out.push_str("}\n");
        out
    }
}

impl ToDot for AggregatedCallTree {
    /// Node ids are assigned in depth-first order with children sorted by
    /// label, so equal labels on different paths stay distinct nodes.
    fn to_dot(&self) -> String {
        let mut ids = vec![0usize; self.nodes.len()];
        let mut visit = vec![AggregatedCallTree::ROOT];
        let mut next = 0;
        while let Some(node) = visit.pop() {
            ids[node] = next;
            next += 1;
            visit.extend(self.nodes[node].children.values().rev());
        }

        let mut nodes: Vec<(&str, usize)> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.label.as_str(), ids[i]))
            .collect();
        nodes.sort();

        let mut edges: Vec<(usize, usize, u64)> = self
            .nodes
            .iter()
            .enumerate()
            .flat_map(|(parent, node)| {
                let ids = &ids;
                node.children
                    .values()
                    .map(move |&child| (ids[parent], ids[child], self.nodes[child].weight))
            })
            .collect();
        edges.sort();

        let mut out = String::from("digraph calltree {\n  node [shape=box];\n");
        for (label, id) in nodes {
            let _ = writeln!(out, "  \"{id}\" [label={}];", quote(label));
        }
        for (from, to, weight) in edges {
            let _ = writeln!(out, "  \"{from}\" -> \"{to}\" [label=\"{weight}\"];");
        }
        out.push_str("}\n");
        out
    }
}
