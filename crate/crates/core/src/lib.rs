// Copyright 2026 span2records Contributors
// SPDX-License-Identifier: Apache-2.0

//! Conversion of OpenTelemetry traces into Kieker operation-execution
//! records, plus the analyses Kieker runs on them.
//!
//! The pipeline is `otlp` (decode and buffer spans) → `span` (per-trace
//! forests) → `convert` (records with `eoi`/`ess`) → `kieker` (monitoring
//! log) → `analysis` (execution traces, call trees, dependency graphs).

pub mod analysis;
pub mod convert;
pub mod kieker;
pub mod otlp;
pub mod span;
pub mod synth;

pub use analysis::{
    build_call_tree, build_dependency_graph, emit_dot, reconstruct_all, reconstruct_trace,
    AggregatedCallTree, DependencyGraph, ExecutionTrace, ReconstructError, TraceMode,
};
pub use convert::{
    assign_eoi_ess, convert_spans, derive_hostname, derive_kieker_trace_id, is_synchronous,
    map_span_fields, ConversionReport, ConvertedTrace,
};
pub use kieker::{read_monitoring_log, write_monitoring_log, OperationExecutionRecord};
pub use otlp::{parse_otlp_json, parse_otlp_protobuf, IngestError};
pub use span::{build_span_forest, validate_span, OtelSpan, SpanForest, SpanId, TraceId};
pub use synth::{generate, GeneratorSpec, Pattern};
