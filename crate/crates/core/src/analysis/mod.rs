// Copyright 2026 span2records Contributors
// SPDX-License-Identifier: Apache-2.0

//! Trace reconstruction from records, aggregated call trees, host
//! dependency graphs and their DOT output.

mod calltree;
mod deps;
mod dot;
mod reconstruct;

pub use calltree::{build_call_tree, execution_label, AggregatedCallTree, CallTreeNode};
pub use deps::{build_dependency_graph, DependencyGraph};
pub use dot::{emit_dot, quote, ToDot};
pub use reconstruct::{
    reconstruct_all, reconstruct_trace, Execution, ExecutionTrace, ReconstructError, TraceMode,
};

/// Label of the synthetic node every trace is entered from.
pub const ENTRY_LABEL: &str = "'Entry'";
