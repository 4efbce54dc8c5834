// Copyright 2026 span2records Contributors
// SPDX-License-Identifier: Apache-2.0

//! Span to record conversion.
//!
//! Timestamps, name and host map field by field. Control flow is encoded
//! positionally: spans are enumerated by start time, the position becomes
//! the execution order index (`eoi`) and the span's depth in its forest the
//! execution stack size (`ess`). Spans of one trace that overlap in time
//! cannot be told apart by `eoi`/`ess` under synchronous stack semantics,
//! so such traces are flagged asynchronous instead of being rewritten.

use std::fmt;

use crate::kieker::{OperationExecutionRecord, NO_SESSION_ID};
use crate::span::{build_span_forest, Attributes, OtelSpan, SpanForest, TraceId};

pub const UNKNOWN_HOST: &str = "unknown-host";
pub const UNNAMED_SIGNATURE: &str = "<unnamed>";

pub const ATTR_NET_PEER_NAME: &str = "net.peer.name";
pub const ATTR_NET_SOCK_PEER_ADDR: &str = "net.sock.peer.addr";
pub const ATTR_SERVICE_NAME: &str = "service.name";

/// Outcome of converting one trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConversionReport {
    pub trace_id: TraceId,
    pub kieker_trace_id: i64,
    pub span_count: usize,
    pub synchronous: bool,
    pub orphan_count: usize,
}

impl fmt::Display for ConversionReport {
    /// `<hex trace id> <kieker id> <spans> <sync|async>`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {}",
            self.trace_id,
            self.kieker_trace_id,
            self.span_count,
            if self.synchronous { "sync" } else { "async" }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvertedTrace {
    /// In `eoi` order.
    pub records: Vec<OperationExecutionRecord>,
    pub report: ConversionReport,
}

/// The record fields that come straight from one span.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappedFields {
    pub signature: String,
    pub hostname: String,
    pub tin: i64,
    pub tout: i64,
}

/// Low 64 bits of the OpenTelemetry id, reinterpreted as two's complement.
pub fn derive_kieker_trace_id(trace_id: TraceId) -> i64 {
    trace_id.0 as u64 as i64
}

/// First present of `net.peer.name`, `net.sock.peer.addr` (span attributes),
/// `service.name` (resource attribute), else [`UNKNOWN_HOST`].
pub fn derive_hostname(attributes: &Attributes, resource_attributes: &Attributes) -> String {
    [
        attributes.get(ATTR_NET_PEER_NAME),
        attributes.get(ATTR_NET_SOCK_PEER_ADDR),
        resource_attributes.get(ATTR_SERVICE_NAME),
    ]
    .into_iter()
    .flatten()
    .map(ToString::to_string)
    .find(|host| !host.is_empty())
    .unwrap_or_else(|| UNKNOWN_HOST.to_owned())
}

fn nanos(value: u64) -> i64 {
    i64::try_from(value).unwrap_or(i64::MAX)
}

pub fn map_span_fields(span: &OtelSpan) -> MappedFields {
    let signature = if span.name.is_empty() {
        UNNAMED_SIGNATURE.to_owned()
    } else {
        span.name.clone()
    };
    MappedFields {
        signature,
        hostname: derive_hostname(&span.attributes, &span.resource_attributes),
        tin: nanos(span.start_epoch_nanos),
        tout: nanos(span.end_epoch_nanos),
    }
}

/// Whether the forest fits a single synchronous call stack: one root,
/// children inside their parent's interval, siblings never sharing an
/// instant. Intervals are closed, so a sibling starting at the nanosecond
/// its predecessor ends counts as overlapping.
pub fn is_synchronous(forest: &SpanForest) -> bool {
    if forest.roots.len() != 1 {
        return false;
    }
    forest.nodes.iter().all(|node| {
        let parent = &node.span;
        let mut previous_end: Option<u64> = None;
        node.children.iter().all(|&child| {
            let child = &forest.node(child).span;
            let contained = child.start_epoch_nanos >= parent.start_epoch_nanos
                && child.end_epoch_nanos <= parent.end_epoch_nanos;
            let disjoint = previous_end.is_none_or(|end| child.start_epoch_nanos > end);
            previous_end = Some(
                previous_end.map_or(child.end_epoch_nanos, |end| end.max(child.end_epoch_nanos)),
            );
            contained && disjoint
        })
    })
}

/// Enumerates the forest by `(start, depth, span_id)` and emits one record
/// per span with `eoi` = position and `ess` = depth.
///
/// Depth breaks start-time ties so an ancestor always precedes its
/// descendants.
pub fn assign_eoi_ess(forest: &SpanForest) -> ConvertedTrace {
    let depths = forest.depths();
    let mut order: Vec<usize> = (0..forest.len()).collect();
    order.sort_by_key(|&i| {
        let span = &forest.node(i).span;
        (span.start_epoch_nanos, depths[i], span.span_id, i)
    });

    let kieker_trace_id = derive_kieker_trace_id(forest.trace_id);
    let records = order
        .iter()
        .enumerate()
        .map(|(eoi, &index)| {
            let mapped = map_span_fields(&forest.node(index).span);
            OperationExecutionRecord {
                logging_timestamp: mapped.tout,
                operation_signature: mapped.signature,
                session_id: NO_SESSION_ID.to_owned(),
                trace_id: kieker_trace_id,
                tin: mapped.tin,
                tout: mapped.tout,
                hostname: mapped.hostname,
                eoi: i32::try_from(eoi).expect("trace exceeds i32::MAX spans"),
                ess: i32::try_from(depths[index]).expect("trace deeper than i32::MAX"),
            }
        })
        .collect::<Vec<_>>();

    ConvertedTrace {
        report: ConversionReport {
            trace_id: forest.trace_id,
            kieker_trace_id,
            span_count: records.len(),
            synchronous: is_synchronous(forest),
            orphan_count: forest.orphan_count,
        },
        records,
    }
}

/// Converts a batch of validated spans, one result per trace in trace-id
/// order.
pub fn convert_spans(spans: Vec<OtelSpan>) -> Vec<ConvertedTrace> {
    build_span_forest(spans)
        .iter()
        .map(assign_eoi_ess)
        .collect()
}
