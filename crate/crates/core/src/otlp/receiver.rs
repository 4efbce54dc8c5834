// Copyright 2026 span2records Contributors
// SPDX-License-Identifier: Apache-2.0

//! OTLP/HTTP trace receiver.

use std::future::Future;
use std::io;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::post;
use axum::Router;
use prost::Message;
use tokio::net::TcpListener;
use tokio::sync::oneshot;

use super::buffer::{CompletedTrace, TraceBuffer, DEFAULT_COMPLETION_TIMEOUT};
use super::{parse_otlp_json, parse_otlp_protobuf, proto, IngestError, ParsedSpans};

pub const TRACES_PATH: &str = "/v1/traces";

#[derive(Debug, Clone)]
pub struct ReceiverConfig {
    pub completion_timeout: Duration,
    /// How often idle traces are checked for completion.
    pub sweep_interval: Duration,
}

impl Default for ReceiverConfig {
    fn default() -> Self {
        ReceiverConfig::with_timeout(DEFAULT_COMPLETION_TIMEOUT)
    }
}

impl ReceiverConfig {
    pub fn with_timeout(completion_timeout: Duration) -> Self {
        let sweep =
            (completion_timeout / 4).clamp(Duration::from_millis(10), Duration::from_secs(1));
        ReceiverConfig {
            completion_timeout,
            sweep_interval: sweep,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReceiverStats {
    pub requests: u64,
    pub rejected_requests: u64,
    pub spans: u64,
    pub skipped_spans: u64,
    pub flushed_traces: u64,
}

#[derive(Default)]
struct Counters {
    requests: AtomicU64,
    rejected_requests: AtomicU64,
    spans: AtomicU64,
    skipped_spans: AtomicU64,
}

struct Shared {
    buffer: Mutex<TraceBuffer>,
    counters: Counters,
}

#[derive(Clone, Copy)]
enum Encoding {
    Protobuf,
    Json,
}

fn request_encoding(headers: &HeaderMap) -> Option<Encoding> {
    let value = headers.get(header::CONTENT_TYPE)?.to_str().ok()?;
    let mime = value.split(';').next()?.trim().to_ascii_lowercase();
    match mime.as_str() {
        "application/x-protobuf" | "application/protobuf" => Some(Encoding::Protobuf),
        "application/json" => Some(Encoding::Json),
        _ => None,
    }
}

fn export_response(encoding: Encoding, skipped: usize) -> Response {
    let partial_success = (skipped > 0).then(|| proto::ExportTracePartialSuccess {
        rejected_spans: skipped as i64,
        error_message: "invalid spans dropped".to_owned(),
    });
    match encoding {
        Encoding::Protobuf => {
            let body = proto::ExportTraceServiceResponse { partial_success }.encode_to_vec();
            ([(header::CONTENT_TYPE, "application/x-protobuf")], body).into_response()
        }
        Encoding::Json => {
            let body = match partial_success {
                Some(p) => serde_json::json!({
                    "partialSuccess": {
                        "rejectedSpans": p.rejected_spans.to_string(),
                        "errorMessage": p.error_message,
                    }
                }),
                None => serde_json::json!({}),
            };
            (
                [(header::CONTENT_TYPE, "application/json")],
                body.to_string(),
            )
                .into_response()
        }
    }
}

async fn export_traces(
    State(shared): State<Arc<Shared>>,
    headers: HeaderMap,
    body: Bytes,
) -> Response {
    shared.counters.requests.fetch_add(1, Ordering::Relaxed);
    let Some(encoding) = request_encoding(&headers) else {
        shared
            .counters
            .rejected_requests
            .fetch_add(1, Ordering::Relaxed);
        return (
            StatusCode::UNSUPPORTED_MEDIA_TYPE,
            "expected application/x-protobuf or application/json",
        )
            .into_response();
    };
    let parsed: Result<ParsedSpans, IngestError> = match encoding {
        Encoding::Protobuf => parse_otlp_protobuf(&body),
        Encoding::Json => parse_otlp_json(&body),
    };
    let parsed = match parsed {
        Ok(parsed) => parsed,
        Err(err) => {
            shared
                .counters
                .rejected_requests
                .fetch_add(1, Ordering::Relaxed);
            tracing::warn!(%err, "rejecting export request");
            return (StatusCode::BAD_REQUEST, err.to_string()).into_response();
        }
    };
    let counters = &shared.counters;
    counters
        .spans
        .fetch_add(parsed.spans.len() as u64, Ordering::Relaxed);
    counters
        .skipped_spans
        .fetch_add(parsed.skipped as u64, Ordering::Relaxed);
    shared
        .buffer
        .lock()
        .expect("trace buffer lock poisoned")
        .insert(parsed.spans, Instant::now());
    export_response(encoding, parsed.skipped)
}

/// Serves `POST /v1/traces` on `listener` until `shutdown` resolves.
///
/// Each trace is handed to `sink` once it has been idle for the completion
/// timeout. The sink runs on a single flusher task, never concurrently.
/// Traces still pending at shutdown are flushed before this returns.
pub async fn serve_receiver<S, F>(
    listener: TcpListener,
    config: ReceiverConfig,
    mut sink: S,
    shutdown: F,
) -> io::Result<ReceiverStats>
where
    S: FnMut(CompletedTrace) + Send + 'static,
    F: Future<Output = ()> + Send + 'static,
{
    let shared = Arc::new(Shared {
        buffer: Mutex::new(TraceBuffer::new(config.completion_timeout)),
        counters: Counters::default(),
    });

    let (stop_tx, mut stop_rx) = oneshot::channel::<()>();
    let flusher_shared = Arc::clone(&shared);
    let flusher = tokio::spawn(async move {
        let mut flushed = 0u64;
        let mut ticker = tokio::time::interval(config.sweep_interval);
        ticker.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
        loop {
            let stopping = tokio::select! {
                _ = ticker.tick() => false,
                _ = &mut stop_rx => true,
            };
            let completed = {
                let mut buffer = flusher_shared
                    .buffer
                    .lock()
                    .expect("trace buffer lock poisoned");
                if stopping {
                    buffer.drain()
                } else {
                    buffer.take_expired(Instant::now())
                }
            };
            for trace in completed {
                flushed += 1;
                sink(trace);
            }
            if stopping {
                return flushed;
            }
        }
    });

    let app = Router::new()
        .route(TRACES_PATH, post(export_traces))
        .with_state(Arc::clone(&shared));
    let served = axum::serve(listener, app)
        .with_graceful_shutdown(shutdown)
        .await;

    let _ = stop_tx.send(());
    let flushed_traces = flusher.await.map_err(io::Error::other)?;
    served?;

    let c = &shared.counters;
    Ok(ReceiverStats {
        requests: c.requests.load(Ordering::Relaxed),
        rejected_requests: c.rejected_requests.load(Ordering::Relaxed),
        spans: c.spans.load(Ordering::Relaxed),
        skipped_spans: c.skipped_spans.load(Ordering::Relaxed),
        flushed_traces,
    })
}
