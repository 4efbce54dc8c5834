// Copyright 2026 span2records Contributors
// SPDX-License-Identifier: Apache-2.0

use std::net::SocketAddr;
use std::sync::mpsc;
use std::time::Duration;

use prost::Message;
use span2records_core::otlp::{
    encode_otlp_json, encode_otlp_protobuf, proto, serve_receiver, CompletedTrace, ReceiverConfig,
    ReceiverStats, TRACES_PATH,
};
use span2records_core::span::{OtelSpan, SpanId, TraceId};
use tokio::sync::oneshot;
use tokio::task::JoinHandle;

struct Running {
    addr: SocketAddr,
    traces: mpsc::Receiver<CompletedTrace>,
    stop: oneshot::Sender<()>,
    handle: JoinHandle<std::io::Result<ReceiverStats>>,
}

async fn start(timeout: Duration) -> Running {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let (tx, traces) = mpsc::channel();
    let (stop, stop_rx) = oneshot::channel::<()>();
    let handle = tokio::spawn(serve_receiver(
        listener,
        ReceiverConfig::with_timeout(timeout),
        move |trace| tx.send(trace).unwrap(),
        async move {
            let _ = stop_rx.await;
        },
    ));
    Running {
        addr,
        traces,
        stop,
        handle,
    }
}

fn span(trace: u128, id: u64) -> OtelSpan {
    OtelSpan::new(
        TraceId(trace),
        SpanId(id),
        None,
        format!("s{id}"),
        10 * id,
        10 * id + 5,
    )
}

async fn post(addr: SocketAddr, content_type: &str, body: Vec<u8>) -> (u16, Vec<u8>) {
    let response = reqwest::Client::new()
        .post(format!("http://{addr}{TRACES_PATH}"))
        .header("content-type", content_type)
        .body(body)
        .send()
        .await
        .unwrap();
    let status = response.status().as_u16();
    (status, response.bytes().await.unwrap().to_vec())
}

#[tokio::test]
async fn single_trace_flushes_once_after_timeout() {
    let running = start(Duration::from_millis(200)).await;
    let (status, body) = post(
        running.addr,
        "application/x-protobuf",
        encode_otlp_protobuf(&[span(1, 1)]),
    )
    .await;
    assert_eq!(status, 200);
    assert_eq!(
        proto::ExportTraceServiceResponse::decode(body.as_slice()).unwrap(),
        Default::default()
    );

    assert!(running.traces.try_recv().is_err(), "flushed before timeout");
    tokio::time::sleep(Duration::from_millis(600)).await;
    let trace = running.traces.try_recv().unwrap();
    assert_eq!(trace.spans, vec![span(1, 1)]);
    assert!(running.traces.try_recv().is_err());

    running.stop.send(()).unwrap();
    let stats = running.handle.await.unwrap().unwrap();
    assert_eq!(stats.flushed_traces, 1);
    assert_eq!(stats.requests, 1);
}

#[tokio::test]
async fn batches_of_one_trace_merge() {
    let running = start(Duration::from_millis(400)).await;
    let (status, body) = post(
        running.addr,
        "application/json",
        encode_otlp_json(&[span(9, 1)]).into_bytes(),
    )
    .await;
    assert_eq!(status, 200);
    assert_eq!(body, b"{}");
    let (status, _) = post(
        running.addr,
        "application/x-protobuf",
        encode_otlp_protobuf(&[span(9, 2), span(9, 3)]),
    )
    .await;
    assert_eq!(status, 200);

    tokio::time::sleep(Duration::from_millis(1000)).await;
    let trace = running.traces.try_recv().unwrap();
    assert_eq!(trace.trace_id, TraceId(9));
    let mut ids: Vec<u64> = trace.spans.iter().map(|s| s.span_id.0).collect();
    ids.sort();
    assert_eq!(ids, [1, 2, 3]);
    assert!(running.traces.try_recv().is_err());
    running.stop.send(()).unwrap();
    running.handle.await.unwrap().unwrap();
}

#[tokio::test]
async fn rejects_garbage_and_unknown_media_types() {
    let running = start(Duration::from_millis(50)).await;
    let (status, _) = post(
        running.addr,
        "application/x-protobuf",
        vec![0xff, 0xff, 0xff],
    )
    .await;
    assert_eq!(status, 400);
    let (status, _) = post(running.addr, "application/json", b"not json".to_vec()).await;
    assert_eq!(status, 400);
    let (status, _) = post(running.addr, "text/plain", b"hello".to_vec()).await;
    assert_eq!(status, 415);

    tokio::time::sleep(Duration::from_millis(200)).await;
    assert!(running.traces.try_recv().is_err());
    running.stop.send(()).unwrap();
    let stats = running.handle.await.unwrap().unwrap();
    assert_eq!(stats.rejected_requests, 3);
    assert_eq!(stats.flushed_traces, 0);
}

#[tokio::test]
async fn shutdown_flushes_pending_traces() {
    let running = start(Duration::from_secs(3600)).await;
    post(
        running.addr,
        "application/x-protobuf",
        encode_otlp_protobuf(&[span(1, 1), span(2, 1)]),
    )
    .await;
    running.stop.send(()).unwrap();
    let stats = running.handle.await.unwrap().unwrap();
    assert_eq!(stats.flushed_traces, 2);
    let flushed: Vec<CompletedTrace> = running.traces.try_iter().collect();
    assert_eq!(flushed.len(), 2);
}

#[tokio::test]
async fn invalid_spans_reported_as_partial_success() {
    let running = start(Duration::from_secs(3600)).await;
    let mut bad = span(1, 2);
    bad.end_epoch_nanos = 0;
    let (status, body) = post(
        running.addr,
        "application/x-protobuf",
        encode_otlp_protobuf(&[span(1, 1), bad]),
    )
    .await;
    assert_eq!(status, 200);
    let response = proto::ExportTraceServiceResponse::decode(body.as_slice()).unwrap();
    assert_eq!(response.partial_success.unwrap().rejected_spans, 1);
    running.stop.send(()).unwrap();
    let stats = running.handle.await.unwrap().unwrap();
    assert_eq!((stats.spans, stats.skipped_spans), (1, 1));
}
