// Copyright 2026 span2records Contributors
// SPDX-License-Identifier: Apache-2.0

//! The OTLP/JSON mapping of `ExportTraceServiceRequest`.
//!
//! Ids are hex strings, 64-bit integers may arrive as strings or numbers,
//! and `kind` may be the enum number or its name. Decoding goes through the
//! protobuf message types so both encodings share one span conversion.

use base64::Engine;
use serde::{Deserialize, Serialize};

use super::{flatten_request, proto, to_request, IngestError, ParsedSpans};
use crate::span::OtelSpan;

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct RequestJson {
    #[serde(default)]
    resource_spans: Vec<ResourceSpansJson>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct ResourceSpansJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    resource: Option<ResourceJson>,
    #[serde(default)]
    scope_spans: Vec<ScopeSpansJson>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct ResourceJson {
    #[serde(default)]
    attributes: Vec<KeyValueJson>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct ScopeSpansJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scope: Option<ScopeJson>,
    #[serde(default)]
    spans: Vec<SpanJson>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct ScopeJson {
    #[serde(default)]
    name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    version: String,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct SpanJson {
    #[serde(default)]
    trace_id: String,
    #[serde(default)]
    span_id: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    parent_span_id: String,
    #[serde(default)]
    name: String,
    #[serde(default)]
    kind: KindJson,
    #[serde(default)]
    start_time_unix_nano: U64Json,
    #[serde(default)]
    end_time_unix_nano: U64Json,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    attributes: Vec<KeyValueJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    events: Vec<EventJson>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct EventJson {
    #[serde(default)]
    time_unix_nano: U64Json,
    #[serde(default)]
    name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    attributes: Vec<KeyValueJson>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct KeyValueJson {
    key: String,
    #[serde(default)]
    value: AnyValueJson,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct AnyValueJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    string_value: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bool_value: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    int_value: Option<I64Json>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    double_value: Option<F64Json>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    array_value: Option<ArrayValueJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kvlist_value: Option<KvListJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bytes_value: Option<String>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct ArrayValueJson {
    #[serde(default)]
    values: Vec<AnyValueJson>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct KvListJson {
    #[serde(default)]
    values: Vec<KeyValueJson>,
}

/// uint64 in proto3 JSON: a decimal string on the wire, numbers tolerated.
#[derive(Debug, Default, Clone, Copy)]
struct U64Json(u64);

#[derive(Debug, Clone, Copy)]
struct I64Json(i64);

#[derive(Debug, Clone, Copy)]
struct F64Json(f64);

#[derive(Debug, Default, Clone, Copy)]
struct KindJson(i32);

#[derive(Deserialize)]
#[serde(untagged)]
enum NumberOrString<T> {
    Number(T),
    String(String),
}

impl Serialize for U64Json {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for U64Json {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match NumberOrString::<u64>::deserialize(d)? {
            NumberOrString::Number(v) => Ok(U64Json(v)),
            NumberOrString::String(s) => s
                .parse()
                .map(U64Json)
                .map_err(|_| serde::de::Error::custom(format!("invalid uint64 `{s}`"))),
        }
    }
}

impl Serialize for I64Json {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for I64Json {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match NumberOrString::<i64>::deserialize(d)? {
            NumberOrString::Number(v) => Ok(I64Json(v)),
            NumberOrString::String(s) => s
                .parse()
                .map(I64Json)
                .map_err(|_| serde::de::Error::custom(format!("invalid int64 `{s}`"))),
        }
    }
}

impl Serialize for F64Json {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v = self.0;
        if v.is_nan() {
            s.serialize_str("NaN")
        } else if v.is_infinite() {
            s.serialize_str(if v > 0.0 { "Infinity" } else { "-Infinity" })
        } else {
            s.serialize_f64(v)
        }
    }
}

impl<'de> Deserialize<'de> for F64Json {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match NumberOrString::<f64>::deserialize(d)? {
            NumberOrString::Number(v) => Ok(F64Json(v)),
            NumberOrString::String(s) => match s.as_str() {
                "NaN" => Ok(F64Json(f64::NAN)),
                "Infinity" => Ok(F64Json(f64::INFINITY)),
                "-Infinity" => Ok(F64Json(f64::NEG_INFINITY)),
                _ => s
                    .parse()
                    .map(F64Json)
                    .map_err(|_| serde::de::Error::custom(format!("invalid double `{s}`"))),
            },
        }
    }
}

const KIND_NAMES: [&str; 6] = [
    "SPAN_KIND_UNSPECIFIED",
    "SPAN_KIND_INTERNAL",
    "SPAN_KIND_SERVER",
    "SPAN_KIND_CLIENT",
    "SPAN_KIND_PRODUCER",
    "SPAN_KIND_CONSUMER",
];

impl Serialize for KindJson {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i32(self.0)
    }
}

impl<'de> Deserialize<'de> for KindJson {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match NumberOrString::<i32>::deserialize(d)? {
            NumberOrString::Number(v) => Ok(KindJson(v)),
            NumberOrString::String(s) => KIND_NAMES
                .iter()
                .position(|name| *name == s)
                .map(|i| KindJson(i as i32))
                .ok_or_else(|| serde::de::Error::custom(format!("unknown span kind `{s}`"))),
        }
    }
}

/// Decodes an OTLP/JSON `ExportTraceServiceRequest`.
pub fn parse_otlp_json(payload: &[u8]) -> Result<ParsedSpans, IngestError> {
    let request: RequestJson =
        serde_json::from_slice(payload).map_err(|err| IngestError::MalformedPayload {
            position: format!("line {}, column {}", err.line(), err.column()),
            reason: err.to_string(),
        })?;
    Ok(flatten_request(request.into_proto()))
}

/// Encodes spans as a pretty-printed OTLP/JSON export request.
pub fn encode_otlp_json(spans: &[OtelSpan]) -> String {
    let request = RequestJson::from_proto(to_request(spans));
    let mut text = serde_json::to_string_pretty(&request).expect("OTLP JSON model serializes");
    text.push('\n');
    text
}

/// Undecodable ids become empty byte strings; span validation drops them.
fn decode_id(hex_text: &str) -> Vec<u8> {
    hex::decode(hex_text).unwrap_or_default()
}

impl RequestJson {
    fn into_proto(self) -> proto::ExportTraceServiceRequest {
        proto::ExportTraceServiceRequest {
            resource_spans: self
                .resource_spans
                .into_iter()
                .map(|rs| proto::ResourceSpans {
                    resource: rs.resource.map(|r| proto::Resource {
                        attributes: key_values_into_proto(r.attributes),
                        dropped_attributes_count: 0,
                    }),
                    scope_spans: rs
                        .scope_spans
                        .into_iter()
                        .map(|ss| proto::ScopeSpans {
                            scope: ss.scope.map(|s| proto::InstrumentationScope {
                                name: s.name,
                                version: s.version,
                                ..Default::default()
                            }),
                            spans: ss.spans.into_iter().map(SpanJson::into_proto).collect(),
                            schema_url: String::new(),
                        })
                        .collect(),
                    schema_url: String::new(),
                })
                .collect(),
        }
    }

    fn from_proto(request: proto::ExportTraceServiceRequest) -> Self {
        RequestJson {
            resource_spans: request
                .resource_spans
                .into_iter()
                .map(|rs| ResourceSpansJson {
                    resource: rs.resource.map(|r| ResourceJson {
                        attributes: key_values_from_proto(r.attributes),
                    }),
                    scope_spans: rs
                        .scope_spans
                        .into_iter()
                        .map(|ss| ScopeSpansJson {
                            scope: ss.scope.map(|s| ScopeJson {
                                name: s.name,
                                version: s.version,
                            }),
                            spans: ss.spans.into_iter().map(SpanJson::from_proto).collect(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

impl SpanJson {
    fn into_proto(self) -> proto::Span {
        proto::Span {
            trace_id: decode_id(&self.trace_id),
            span_id: decode_id(&self.span_id),
            parent_span_id: decode_id(&self.parent_span_id),
            name: self.name,
            kind: self.kind.0,
            start_time_unix_nano: self.start_time_unix_nano.0,
            end_time_unix_nano: self.end_time_unix_nano.0,
            attributes: key_values_into_proto(self.attributes),
            events: self
                .events
                .into_iter()
                .map(|e| proto::Event {
                    time_unix_nano: e.time_unix_nano.0,
                    name: e.name,
                    attributes: key_values_into_proto(e.attributes),
                })
                .collect(),
        }
    }

    fn from_proto(span: proto::Span) -> Self {
        SpanJson {
            trace_id: hex::encode(span.trace_id),
            span_id: hex::encode(span.span_id),
            parent_span_id: hex::encode(span.parent_span_id),
            name: span.name,
            kind: KindJson(span.kind),
            start_time_unix_nano: U64Json(span.start_time_unix_nano),
            end_time_unix_nano: U64Json(span.end_time_unix_nano),
            attributes: key_values_from_proto(span.attributes),
            events: span
                .events
                .into_iter()
                .map(|e| EventJson {
                    time_unix_nano: U64Json(e.time_unix_nano),
                    name: e.name,
                    attributes: key_values_from_proto(e.attributes),
                })
                .collect(),
        }
    }
}

fn key_values_into_proto(kvs: Vec<KeyValueJson>) -> Vec<proto::KeyValue> {
    kvs.into_iter()
        .map(|kv| proto::KeyValue {
            key: kv.key,
            value: Some(kv.value.into_proto()),
        })
        .collect()
}

fn key_values_from_proto(kvs: Vec<proto::KeyValue>) -> Vec<KeyValueJson> {
    kvs.into_iter()
        .map(|kv| KeyValueJson {
            key: kv.key,
            value: kv.value.map(AnyValueJson::from_proto).unwrap_or_default(),
        })
        .collect()
}

impl AnyValueJson {
    fn into_proto(self) -> proto::AnyValue {
        use proto::any_value::Value;
        let value = if let Some(s) = self.string_value {
            Some(Value::StringValue(s))
        } else if let Some(b) = self.bool_value {
            Some(Value::BoolValue(b))
        } else if let Some(i) = self.int_value {
            Some(Value::IntValue(i.0))
        } else if let Some(d) = self.double_value {
            Some(Value::DoubleValue(d.0))
        } else if let Some(array) = self.array_value {
            Some(Value::ArrayValue(proto::ArrayValue {
                values: array.values.into_iter().map(Self::into_proto).collect(),
            }))
        } else if let Some(list) = self.kvlist_value {
            Some(Value::KvlistValue(proto::KeyValueList {
                values: key_values_into_proto(list.values),
            }))
        } else {
            self.bytes_value.and_then(|b| {
                base64::engine::general_purpose::STANDARD
                    .decode(b)
                    .ok()
                    .map(Value::BytesValue)
            })
        };
        proto::AnyValue { value }
    }

    fn from_proto(value: proto::AnyValue) -> Self {
        use proto::any_value::Value;
        let mut json = AnyValueJson::default();
        match value.value {
            None => {}
            Some(Value::StringValue(s)) => json.string_value = Some(s),
            Some(Value::BoolValue(b)) => json.bool_value = Some(b),
            Some(Value::IntValue(i)) => json.int_value = Some(I64Json(i)),
            Some(Value::DoubleValue(d)) => json.double_value = Some(F64Json(d)),
            Some(Value::ArrayValue(a)) => {
                json.array_value = Some(ArrayValueJson {
                    values: a.values.into_iter().map(Self::from_proto).collect(),
                })
            }
            Some(Value::KvlistValue(l)) => {
                json.kvlist_value = Some(KvListJson {
                    values: key_values_from_proto(l.values),
                })
            }
            Some(Value::BytesValue(b)) => {
                json.bytes_value = Some(base64::engine::general_purpose::STANDARD.encode(b))
            }
        }
        json
    }
}
