// Copyright 2026 span2records Contributors
// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;
use std::time::{Duration, Instant};

use crate::span::{OtelSpan, SpanId, TraceId};

pub const DEFAULT_COMPLETION_TIMEOUT: Duration = Duration::from_secs(10);

/// All spans received for one trace id.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletedTrace {
    pub trace_id: TraceId,
    pub spans: Vec<OtelSpan>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct InsertStats {
    pub accepted: usize,
    /// Spans that replaced an earlier span with the same id.
    pub replaced: usize,
}

#[derive(Debug)]
struct PendingTrace {
    spans: Vec<OtelSpan>,
    index: HashMap<SpanId, usize>,
    last_arrival: Instant,
}

/// Holds spans per trace until no new span has arrived for
/// `completion_timeout`.
///
/// OTLP carries no end-of-trace marker, so inactivity is the completion
/// signal. Time is passed in explicitly.
#[derive(Debug)]
pub struct TraceBuffer {
    pending: HashMap<TraceId, PendingTrace>,
    completion_timeout: Duration,
}

impl Default for TraceBuffer {
    fn default() -> Self {
        TraceBuffer::new(DEFAULT_COMPLETION_TIMEOUT)
    }
}

impl TraceBuffer {
    pub fn new(completion_timeout: Duration) -> Self {
        TraceBuffer {
            pending: HashMap::new(),
            completion_timeout,
        }
    }

    pub fn completion_timeout(&self) -> Duration {
        self.completion_timeout
    }

    pub fn pending_traces(&self) -> usize {
        self.pending.len()
    }

    pub fn pending_spans(&self) -> usize {
        self.pending.values().map(|p| p.spans.len()).sum()
    }

    pub fn contains(&self, trace_id: TraceId) -> bool {
        self.pending.contains_key(&trace_id)
    }

    /// Adds spans, refreshing the arrival time of every trace touched.
    /// A span whose id is already buffered for its trace replaces the old one.
    pub fn insert(&mut self, spans: Vec<OtelSpan>, now: Instant) -> InsertStats {
        let mut stats = InsertStats::default();
        for span in spans {
            let pending = self
                .pending
                .entry(span.trace_id)
                .or_insert_with(|| PendingTrace {
                    spans: Vec::new(),
                    index: HashMap::new(),
                    last_arrival: now,
                });
            pending.last_arrival = now;
            stats.accepted += 1;
            match pending.index.get(&span.span_id) {
                Some(&slot) => {
                    tracing::warn!(
                        trace_id = %span.trace_id,
                        span_id = %span.span_id,
                        "duplicate span id, keeping the latest copy"
                    );
                    pending.spans[slot] = span;
                    stats.replaced += 1;
                }
                None => {
                    pending.index.insert(span.span_id, pending.spans.len());
                    pending.spans.push(span);
                }
            }
        }
        stats
    }

    /// Removes and returns traces idle for at least the completion timeout,
    /// oldest last arrival first.
    pub fn take_expired(&mut self, now: Instant) -> Vec<CompletedTrace> {
        let timeout = self.completion_timeout;
        let expired: Vec<TraceId> = self
            .pending
            .iter()
            .filter(|(_, p)| now.saturating_duration_since(p.last_arrival) >= timeout)
            .map(|(id, _)| *id)
            .collect();
        self.remove_ordered(expired)
    }

    /// Removes and returns every pending trace, oldest last arrival first.
    pub fn drain(&mut self) -> Vec<CompletedTrace> {
        let all: Vec<TraceId> = self.pending.keys().copied().collect();
        self.remove_ordered(all)
    }

    fn remove_ordered(&mut self, ids: Vec<TraceId>) -> Vec<CompletedTrace> {
        let mut removed: Vec<(Instant, TraceId, Vec<OtelSpan>)> = ids
            .into_iter()
            .filter_map(|id| {
                self.pending
                    .remove(&id)
                    .map(|p| (p.last_arrival, id, p.spans))
            })
            .collect();
        removed.sort_by_key(|(at, id, _)| (*at, *id));
        removed
            .into_iter()
            .map(|(_, trace_id, spans)| CompletedTrace { trace_id, spans })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn span(trace: u128, id: u64, name: &str) -> OtelSpan {
        OtelSpan::new(TraceId(trace), SpanId(id), None, name, 0, 1)
    }

    #[test]
    fn flushes_after_timeout_only() {
        let t0 = Instant::now();
        let mut buffer = TraceBuffer::new(Duration::from_secs(10));
        buffer.insert(vec![span(1, 1, "a")], t0);
        assert!(buffer.take_expired(t0 + Duration::from_secs(9)).is_empty());
        let flushed = buffer.take_expired(t0 + Duration::from_secs(10));
        assert_eq!(flushed.len(), 1);
        assert_eq!(flushed[0].spans.len(), 1);
        assert!(!buffer.contains(TraceId(1)));
        assert_eq!(buffer.pending_traces(), 0);
    }

    #[test]
    fn later_batch_extends_deadline_and_merges() {
        let t0 = Instant::now();
        let mut buffer = TraceBuffer::new(Duration::from_secs(10));
        buffer.insert(vec![span(1, 1, "a")], t0);
        buffer.insert(vec![span(1, 2, "b")], t0 + Duration::from_secs(5));
        assert!(buffer.take_expired(t0 + Duration::from_secs(12)).is_empty());
        let flushed = buffer.take_expired(t0 + Duration::from_secs(15));
        assert_eq!(flushed.len(), 1);
        assert_eq!(flushed[0].spans.len(), 2);
    }

    #[test]
    fn duplicate_span_id_last_write_wins() {
        let t0 = Instant::now();
        let mut buffer = TraceBuffer::new(Duration::from_secs(1));
        buffer.insert(vec![span(1, 1, "old")], t0);
        let stats = buffer.insert(vec![span(1, 1, "new")], t0);
        assert_eq!(stats.replaced, 1);
        let flushed = buffer.drain();
        assert_eq!(flushed[0].spans.len(), 1);
        assert_eq!(flushed[0].spans[0].name, "new");
    }

    #[test]
    fn flush_order_follows_last_arrival() {
        let t0 = Instant::now();
        let mut buffer = TraceBuffer::new(Duration::from_secs(1));
        buffer.insert(vec![span(3, 1, "x")], t0);
        buffer.insert(vec![span(1, 1, "y")], t0 + Duration::from_millis(10));
        buffer.insert(vec![span(2, 1, "z")], t0 + Duration::from_millis(20));
        let ids: Vec<u128> = buffer
            .take_expired(t0 + Duration::from_secs(5))
            .iter()
            .map(|t| t.trace_id.0)
            .collect();
        assert_eq!(ids, [3, 1, 2]);
    }
}
