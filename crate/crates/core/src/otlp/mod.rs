// Copyright 2026 span2records Contributors
// SPDX-License-Identifier: Apache-2.0

//! OTLP trace ingestion: payload decoding, trace buffering and the HTTP
//! receiver.

mod buffer;
mod json;
pub mod proto;
mod receiver;

use prost::Message;
use thiserror::Error;

use crate::span::{
    validate_span, AttributeValue, Attributes, OtelSpan, SpanEvent, SpanId, SpanKind, TraceId,
};

pub use buffer::{CompletedTrace, InsertStats, TraceBuffer, DEFAULT_COMPLETION_TIMEOUT};
pub use json::{encode_otlp_json, parse_otlp_json};
pub use receiver::{serve_receiver, ReceiverConfig, ReceiverStats, TRACES_PATH};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed OTLP payload at {position}: {reason}")]
    MalformedPayload { position: String, reason: String },
}

/// Spans decoded from one export request.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedSpans {
    pub spans: Vec<OtelSpan>,
    /// Spans dropped because they failed validation.
    pub skipped: usize,
}

/// Decodes a binary `ExportTraceServiceRequest`.
pub fn parse_otlp_protobuf(payload: &[u8]) -> Result<ParsedSpans, IngestError> {
    let request = proto::ExportTraceServiceRequest::decode(payload).map_err(|err| {
        IngestError::MalformedPayload {
            position: "protobuf message".to_owned(),
            reason: err.to_string(),
        }
    })?;
    Ok(flatten_request(request))
}

/// Encodes spans as a binary `ExportTraceServiceRequest`.
pub fn encode_otlp_protobuf(spans: &[OtelSpan]) -> Vec<u8> {
    to_request(spans).encode_to_vec()
}

pub(crate) fn flatten_request(request: proto::ExportTraceServiceRequest) -> ParsedSpans {
    let mut parsed = ParsedSpans::default();
    for resource_spans in request.resource_spans {
        let resource_attributes = resource_spans
            .resource
            .map(|r| convert_attributes(r.attributes))
            .unwrap_or_default();
        for scope_spans in resource_spans.scope_spans {
            for span in scope_spans.spans {
                match convert_span(span, &resource_attributes) {
                    Some(span) => parsed.spans.push(span),
                    None => parsed.skipped += 1,
                }
            }
        }
    }
    if parsed.skipped > 0 {
        tracing::warn!(
            skipped = parsed.skipped,
            "dropped invalid spans from OTLP payload"
        );
    }
    parsed
}

fn convert_span(span: proto::Span, resource_attributes: &Attributes) -> Option<OtelSpan> {
    let trace_id = TraceId::from_bytes(span.trace_id.as_slice().try_into().ok()?);
    let span_id = SpanId::from_bytes(span.span_id.as_slice().try_into().ok()?);
    let parent_span_id = match span.parent_span_id.len() {
        0 => None,
        _ => {
            let id = SpanId::from_bytes(span.parent_span_id.as_slice().try_into().ok()?);
            // all-zero parent is how some exporters spell "no parent"
            (id.0 != 0).then_some(id)
        }
    };
    let events = span
        .events
        .into_iter()
        .map(|e| SpanEvent {
            epoch_nanos: e.time_unix_nano,
            name: e.name,
            attributes: convert_attributes(e.attributes),
        })
        .collect();
    let candidate = OtelSpan {
        trace_id,
        span_id,
        parent_span_id,
        name: span.name,
        kind: SpanKind::from_otlp(span.kind),
        start_epoch_nanos: span.start_time_unix_nano,
        end_epoch_nanos: span.end_time_unix_nano,
        attributes: convert_attributes(span.attributes),
        resource_attributes: resource_attributes.clone(),
        events,
    };
    match validate_span(candidate) {
        Ok(span) => Some(span),
        Err(err) => {
            tracing::debug!(%err, "skipping span");
            None
        }
    }
}

fn convert_attributes(key_values: Vec<proto::KeyValue>) -> Attributes {
    key_values
        .into_iter()
        .filter_map(|kv| {
            let value = convert_value(kv.value?)?;
            Some((kv.key, value))
        })
        .collect()
}

/// Scalars map one to one; arrays, maps and bytes are flattened to text.
fn convert_value(value: proto::AnyValue) -> Option<AttributeValue> {
    use proto::any_value::Value;
    Some(match value.value? {
        Value::StringValue(s) => AttributeValue::String(s),
        Value::BoolValue(b) => AttributeValue::Bool(b),
        Value::IntValue(i) => AttributeValue::Int(i),
        Value::DoubleValue(d) => AttributeValue::Double(d),
        Value::BytesValue(bytes) => AttributeValue::String(hex::encode(bytes)),
        other => AttributeValue::String(
            any_value_to_json(&proto::AnyValue { value: Some(other) }).to_string(),
        ),
    })
}

fn any_value_to_json(value: &proto::AnyValue) -> serde_json::Value {
    use proto::any_value::Value;
    use serde_json::Value as Json;
    match &value.value {
        None => Json::Null,
        Some(Value::StringValue(s)) => Json::String(s.clone()),
        Some(Value::BoolValue(b)) => Json::Bool(*b),
        Some(Value::IntValue(i)) => Json::from(*i),
        Some(Value::DoubleValue(d)) => Json::from(*d),
        Some(Value::BytesValue(b)) => Json::String(hex::encode(b)),
        Some(Value::ArrayValue(array)) => {
            Json::Array(array.values.iter().map(any_value_to_json).collect())
        }
        Some(Value::KvlistValue(list)) => Json::Object(
            list.values
                .iter()
                .map(|kv| {
                    let v = kv
                        .value
                        .as_ref()
                        .map(any_value_to_json)
                        .unwrap_or(Json::Null);
                    (kv.key.clone(), v)
                })
                .collect(),
        ),
    }
}

fn attribute_to_proto(key: &str, value: &AttributeValue) -> proto::KeyValue {
    use proto::any_value::Value;
    let value = match value {
        AttributeValue::String(s) => Value::StringValue(s.clone()),
        AttributeValue::Int(i) => Value::IntValue(*i),
        AttributeValue::Double(d) => Value::DoubleValue(*d),
        AttributeValue::Bool(b) => Value::BoolValue(*b),
    };
    proto::KeyValue {
        key: key.to_owned(),
        value: Some(proto::AnyValue { value: Some(value) }),
    }
}

fn attributes_to_proto(attributes: &Attributes) -> Vec<proto::KeyValue> {
    attributes
        .iter()
        .map(|(k, v)| attribute_to_proto(k, v))
        .collect()
}

/// Builds an export request, grouping spans that share resource attributes
/// under one `ResourceSpans` in order of first appearance.
pub(crate) fn to_request(spans: &[OtelSpan]) -> proto::ExportTraceServiceRequest {
    let mut groups: Vec<(&Attributes, Vec<proto::Span>)> = Vec::new();
    for span in spans {
        let encoded = proto::Span {
            trace_id: span.trace_id.to_bytes().to_vec(),
            span_id: span.span_id.to_bytes().to_vec(),
            parent_span_id: span
                .parent_span_id
                .map(|p| p.to_bytes().to_vec())
                .unwrap_or_default(),
            name: span.name.clone(),
            kind: span.kind.to_otlp(),
            start_time_unix_nano: span.start_epoch_nanos,
            end_time_unix_nano: span.end_epoch_nanos,
            attributes: attributes_to_proto(&span.attributes),
            events: span
                .events
                .iter()
                .map(|e| proto::Event {
                    time_unix_nano: e.epoch_nanos,
                    name: e.name.clone(),
                    attributes: attributes_to_proto(&e.attributes),
                })
                .collect(),
        };
        match groups
            .iter_mut()
            .find(|(attrs, _)| **attrs == span.resource_attributes)
        {
            Some((_, group)) => group.push(encoded),
            None => groups.push((&span.resource_attributes, vec![encoded])),
        }
    }
    proto::ExportTraceServiceRequest {
        resource_spans: groups
            .into_iter()
            .map(|(attrs, spans)| proto::ResourceSpans {
                resource: Some(proto::Resource {
                    attributes: attributes_to_proto(attrs),
                    dropped_attributes_count: 0,
                }),
                scope_spans: vec![proto::ScopeSpans {
                    scope: Some(proto::InstrumentationScope {
                        name: "span2records".to_owned(),
                        ..Default::default()
                    }),
                    spans,
                    schema_url: String::new(),
                }],
                schema_url: String::new(),
            })
            .collect(),
    }
}
