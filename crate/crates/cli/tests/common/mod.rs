// Copyright 2026 span2records Contributors
// SPDX-License-Identifier: Apache-2.0

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::process::{Command, Output};

pub const BIN: &str = env!("CARGO_BIN_EXE_span2records");

pub fn run<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(BIN).args(args).output().expect("binary runs")
}

pub fn code(output: &Output) -> i32 {
    output.status.code().expect("exited normally")
}

pub fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

pub fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

pub fn path(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

/// Nodes and weighted edges of a DOT digraph as written by `analyze`.
#[derive(Debug, Default)]
pub struct Dot {
    pub labels: BTreeMap<String, String>,
    pub edges: Vec<(String, String, u64)>,
}

fn quoted(text: &str) -> Vec<String> {
    text.split('"')
        .skip(1)
        .step_by(2)
        .map(str::to_owned)
        .collect()
}

pub fn parse_dot(text: &str) -> Dot {
    let mut dot = Dot::default();
    for line in text.lines().map(str::trim) {
        if line.starts_with("digraph") || line.starts_with("node ") || line == "}" {
            continue;
        }
        let parts = quoted(line);
        if line.contains("->") {
            let weight = parts[2].parse().expect("numeric edge label");
            dot.edges.push((parts[0].clone(), parts[1].clone(), weight));
        } else if parts.len() == 2 {
            dot.labels.insert(parts[0].clone(), parts[1].clone());
        } else {
            dot.labels.insert(parts[0].clone(), parts[0].clone());
        }
    }
    dot
}

impl Dot {
    /// Child labels of every labelled node that has children.
    pub fn children_by_label(&self) -> BTreeMap<String, BTreeSet<String>> {
        let mut out: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (from, to, _) in &self.edges {
            out.entry(self.labels[from].clone())
                .or_default()
                .insert(self.labels[to].clone());
        }
        out
    }

    pub fn weight(&self, from: &str, to: &str) -> Option<u64> {
        self.edges
            .iter()
            .find(|(f, t, _)| self.labels[f] == from && self.labels[t] == to)
            .map(|e| e.2)
    }
}
