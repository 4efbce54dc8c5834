// Copyright 2026 span2records Contributors
// SPDX-License-Identifier: Apache-2.0

//! OpenTelemetry span model and assembly of spans into per-trace forests.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// 128-bit trace identifier. Displays as 32 lowercase hex characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TraceId(pub u128);

/// 64-bit span identifier. Displays as 16 lowercase hex characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpanId(pub u64);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdParseError {
    #[error("expected {expected} hex characters, got {actual}")]
    Length { expected: usize, actual: usize },
    #[error("invalid hex digit")]
    Digit,
}

fn parse_hex_exact(s: &str, digits: usize) -> Result<u128, IdParseError> {
    if s.len() != digits {
        return Err(IdParseError::Length {
            expected: digits,
            actual: s.len(),
        });
    }
    if !s.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(IdParseError::Digit);
    }
    u128::from_str_radix(s, 16).map_err(|_| IdParseError::Digit)
}

impl TraceId {
    pub fn from_bytes(bytes: [u8; 16]) -> Self {
        TraceId(u128::from_be_bytes(bytes))
    }

    pub fn to_bytes(self) -> [u8; 16] {
        self.0.to_be_bytes()
    }
}

impl SpanId {
    pub fn from_bytes(bytes: [u8; 8]) -> Self {
        SpanId(u64::from_be_bytes(bytes))
    }

    pub fn to_bytes(self) -> [u8; 8] {
        self.0.to_be_bytes()
    }
}

impl fmt::Display for TraceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:032x}", self.0)
    }
}

impl fmt::Display for SpanId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

impl FromStr for TraceId {
    type Err = IdParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_hex_exact(s, 32).map(TraceId)
    }
}

impl FromStr for SpanId {
    type Err = IdParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_hex_exact(s, 16).map(|v| SpanId(v as u64))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SpanKind {
    #[default]
    Internal,
    Server,
    Client,
    Producer,
    Consumer,
}

impl SpanKind {
    /// Maps the OTLP enum number. `SPAN_KIND_UNSPECIFIED` (0) and unknown
    /// values are treated as internal.
    pub fn from_otlp(value: i32) -> Self {
        match value {
            2 => SpanKind::Server,
            3 => SpanKind::Client,
            4 => SpanKind::Producer,
            5 => SpanKind::Consumer,
            _ => SpanKind::Internal,
        }
    }

    pub fn to_otlp(self) -> i32 {
        match self {
            SpanKind::Internal => 1,
            SpanKind::Server => 2,
            SpanKind::Client => 3,
            SpanKind::Producer => 4,
            SpanKind::Consumer => 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AttributeValue {
    String(String),
    Int(i64),
    Double(f64),
    Bool(bool),
}

impl AttributeValue {
    pub fn as_str(&self) -> Option<&str> {
        match self {
            AttributeValue::String(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for AttributeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttributeValue::String(s) => f.write_str(s),
            AttributeValue::Int(v) => write!(f, "{v}"),
            AttributeValue::Double(v) => write!(f, "{v}"),
            AttributeValue::Bool(v) => write!(f, "{v}"),
        }
    }
}

impl From<&str> for AttributeValue {
    fn from(value: &str) -> Self {
        AttributeValue::String(value.to_owned())
    }
}

impl From<String> for AttributeValue {
    fn from(value: String) -> Self {
        AttributeValue::String(value)
    }
}

impl From<i64> for AttributeValue {
    fn from(value: i64) -> Self {
        AttributeValue::Int(value)
    }
}

impl From<f64> for AttributeValue {
    fn from(value: f64) -> Self {
        AttributeValue::Double(value)
    }
}

impl From<bool> for AttributeValue {
    fn from(value: bool) -> Self {
        AttributeValue::Bool(value)
    }
}

pub type Attributes = BTreeMap<String, AttributeValue>;

#[derive(Debug, Clone, PartialEq)]
pub struct SpanEvent {
    pub epoch_nanos: u64,
    pub name: String,
    pub attributes: Attributes,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OtelSpan {
    pub trace_id: TraceId,
    pub span_id: SpanId,
    pub parent_span_id: Option<SpanId>,
    pub name: String,
    pub kind: SpanKind,
    pub start_epoch_nanos: u64,
    pub end_epoch_nanos: u64,
    pub attributes: Attributes,
    pub resource_attributes: Attributes,
    /// Kept for fidelity; never converted into records.
    pub events: Vec<SpanEvent>,
}

impl OtelSpan {
    /// A span with no attributes or events.
    pub fn new(
        trace_id: TraceId,
        span_id: SpanId,
        parent_span_id: Option<SpanId>,
        name: impl Into<String>,
        start_epoch_nanos: u64,
        end_epoch_nanos: u64,
    ) -> Self {
        OtelSpan {
            trace_id,
            span_id,
            parent_span_id,
            name: name.into(),
            kind: SpanKind::Internal,
            start_epoch_nanos,
            end_epoch_nanos,
            attributes: Attributes::new(),
            resource_attributes: Attributes::new(),
            events: Vec::new(),
        }
    }

    pub fn with_attribute(mut self, key: &str, value: impl Into<AttributeValue>) -> Self {
        self.attributes.insert(key.to_owned(), value.into());
        self
    }

    pub fn with_resource_attribute(mut self, key: &str, value: impl Into<AttributeValue>) -> Self {
        self.resource_attributes
            .insert(key.to_owned(), value.into());
        self
    }

    pub fn with_kind(mut self, kind: SpanKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn duration_nanos(&self) -> u64 {
        self.end_epoch_nanos - self.start_epoch_nanos
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid span: {reason}")]
pub struct InvalidSpan {
    pub reason: &'static str,
}

/// Checks the structural invariants of a span and hands it back unchanged.
pub fn validate_span(span: OtelSpan) -> Result<OtelSpan, InvalidSpan> {
    let reason = if span.trace_id.0 == 0 {
        "zero trace id"
    } else if span.span_id.0 == 0 {
        "zero span id"
    } else if span.parent_span_id == Some(span.span_id) {
        "self parent"
    } else if span.end_epoch_nanos < span.start_epoch_nanos {
        "end before start"
    } else {
        return Ok(span);
    };
    Err(InvalidSpan { reason })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpanNode {
    pub span: OtelSpan,
    pub parent: Option<usize>,
    /// Indices into [`SpanForest::nodes`], sorted by `(start, span_id)`.
    pub children: Vec<usize>,
    /// Parent id was set but could not be attached (missing span or cycle).
    pub orphan: bool,
}

/// The spans of one trace arranged by their parent references.
///
/// Nodes live in an arena; `roots` and every `children` list hold arena
/// indices ordered by `(start_epoch_nanos, span_id)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanForest {
    pub trace_id: TraceId,
    pub nodes: Vec<SpanNode>,
    pub roots: Vec<usize>,
    pub orphan_count: usize,
}

impl SpanForest {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, index: usize) -> &SpanNode {
        &self.nodes[index]
    }

    /// Number of ancestors of the node.
    pub fn depth(&self, mut index: usize) -> usize {
        let mut depth = 0;
        while let Some(parent) = self.nodes[index].parent {
            depth += 1;
            index = parent;
        }
        depth
    }

    /// Depth of every node, computed top-down in one pass.
    pub fn depths(&self) -> Vec<usize> {
        let mut depths = vec![0; self.nodes.len()];
        for index in self.preorder() {
            if let Some(parent) = self.nodes[index].parent {
                depths[index] = depths[parent] + 1;
            }
        }
        depths
    }

    /// Depth-first traversal, roots and children in their stored order.
    pub fn preorder(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack: Vec<usize> = self.roots.iter().rev().copied().collect();
        while let Some(index) = stack.pop() {
            order.push(index);
            stack.extend(self.nodes[index].children.iter().rev());
        }
        order
    }

    pub fn find(&self, span_id: SpanId) -> Option<usize> {
        self.nodes.iter().position(|n| n.span.span_id == span_id)
    }
}

fn start_order(a: &OtelSpan, b: &OtelSpan) -> Ordering {
    (a.start_epoch_nanos, a.span_id).cmp(&(b.start_epoch_nanos, b.span_id))
}

/// Groups spans by trace id and links them through their parent references.
///
/// Forests come back sorted by trace id. Unresolvable parents and cycle
/// back-edges turn the affected span into an orphan root.
pub fn build_span_forest(spans: Vec<OtelSpan>) -> Vec<SpanForest> {
    let mut by_trace: BTreeMap<TraceId, Vec<OtelSpan>> = BTreeMap::new();
    for span in spans {
        by_trace.entry(span.trace_id).or_default().push(span);
    }
    by_trace
        .into_iter()
        .map(|(trace_id, spans)| build_one(trace_id, spans))
        .collect()
}

fn build_one(trace_id: TraceId, mut spans: Vec<OtelSpan>) -> SpanForest {
    // Stable sort keeps duplicate ids in arrival order; the later one wins
    // parent lookups below.
    spans.sort_by(start_order);

    let mut by_id: HashMap<SpanId, usize> = HashMap::with_capacity(spans.len());
    for (index, span) in spans.iter().enumerate() {
        by_id.insert(span.span_id, index);
    }

    let mut nodes: Vec<SpanNode> = spans
        .into_iter()
        .map(|span| SpanNode {
            span,
            parent: None,
            children: Vec::new(),
            orphan: false,
        })
        .collect();

    let mut orphan_count = 0;
    for index in 0..nodes.len() {
        let Some(parent_id) = nodes[index].span.parent_span_id else {
            continue;
        };
        let target = by_id.get(&parent_id).copied();
        let accepted = match target {
            Some(parent) if !reaches(&nodes, parent, index) => Some(parent),
            _ => None,
        };
        match accepted {
            Some(parent) => nodes[index].parent = Some(parent),
            None => {
                nodes[index].orphan = true;
                orphan_count += 1;
            }
        }
    }

    // Nodes are already in start order, so pushing in index order yields
    // sorted child lists.
    let mut roots = Vec::new();
    for index in 0..nodes.len() {
        match nodes[index].parent {
            Some(parent) => nodes[parent].children.push(index),
            None => roots.push(index),
        }
    }

    SpanForest {
        trace_id,
        nodes,
        roots,
        orphan_count,
    }
}

/// True if walking up from `from` through attached parents hits `target`.
fn reaches(nodes: &[SpanNode], from: usize, target: usize) -> bool {
    let mut current = Some(from);
    while let Some(index) = current {
        if index == target {
            return true;
        }
        current = nodes[index].parent;
    }
    false
}
