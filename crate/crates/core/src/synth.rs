// Copyright 2026 span2records Contributors
// SPDX-License-Identifier: Apache-2.0

//! Deterministic span generator for tests and demos.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::convert::{ATTR_NET_PEER_NAME, ATTR_SERVICE_NAME};
use crate::span::{OtelSpan, SpanId, SpanKind, TraceId};

/// 2023-11-14T22:13:20Z
pub const DEFAULT_BASE_EPOCH_NANOS: u64 = 1_700_000_000_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pattern {
    /// One root with `size` disjoint children.
    Sequential,
    /// A call chain `size` levels deep.
    Nested,
    /// One root with `size` mutually overlapping children.
    Fanout,
    /// The five-span parallel trace: root calls call1, call2 and call3;
    /// call2 calls call4 while call1 and call3 run.
    Fig3,
    /// Seeded random forest of `size` spans.
    Random,
}

impl Pattern {
    pub const ALL: [Pattern; 5] = [
        Pattern::Sequential,
        Pattern::Nested,
        Pattern::Fanout,
        Pattern::Fig3,
        Pattern::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Pattern::Sequential => "sequential",
            Pattern::Nested => "nested",
            Pattern::Fanout => "fanout",
            Pattern::Fig3 => "fig3",
            Pattern::Random => "random",
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pattern {
    type Err = GeneratorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Pattern::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| GeneratorError::UnknownPattern(s.to_owned()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeneratorError {
    #[error("unknown pattern `{0}`")]
    UnknownPattern(String),
    #[error("size must be at least 1")]
    ZeroSize,
    #[error("overlap probability {0} outside [0, 1]")]
    Overlap(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub pattern: Pattern,
    /// Children for sequential/fanout, depth for nested, span count for
    /// random. Ignored by fig3.
    pub size: usize,
    pub seed: u64,
    pub base_epoch_nanos: u64,
    /// Random pattern only: chance that a step departs from strict stack
    /// discipline.
    pub overlap_probability: f64,
}

impl GeneratorSpec {
    pub fn new(pattern: Pattern, size: usize, seed: u64) -> Self {
        GeneratorSpec {
            pattern,
            size,
            seed,
            base_epoch_nanos: DEFAULT_BASE_EPOCH_NANOS,
            overlap_probability: 0.3,
        }
    }

    pub fn with_overlap(mut self, probability: f64) -> Self {
        self.overlap_probability = probability;
        self
    }

    pub fn with_base_epoch_nanos(mut self, base: u64) -> Self {
        self.base_epoch_nanos = base;
        self
    }
}

const SERVICE: &str = "synthetic-service";
const HOSTS: [&str; 3] = ["frontend", "backend", "database"];

struct Builder {
    rng: ChaCha8Rng,
    trace_id: TraceId,
    base: u64,
    used_ids: HashSet<u64>,
    spans: Vec<OtelSpan>,
}

impl Builder {
    fn new(spec: &GeneratorSpec) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let trace_id = TraceId(rng.random::<u128>() | 1);
        Builder {
            rng,
            trace_id,
            base: spec.base_epoch_nanos,
            used_ids: HashSet::new(),
            spans: Vec::new(),
        }
    }

    fn fresh_id(&mut self) -> SpanId {
        loop {
            let id = self.rng.random::<u64>();
            if id != 0 && self.used_ids.insert(id) {
                return SpanId(id);
            }
        }
    }

    /// Adds a span with offsets relative to the base time; returns its index.
    fn push(
        &mut self,
        parent: Option<usize>,
        name: String,
        host: &str,
        start: u64,
        end: u64,
    ) -> usize {
        let span_id = self.fresh_id();
        let parent_span_id = parent.map(|p| self.spans[p].span_id);
        let kind = if parent.is_none() {
            SpanKind::Server
        } else {
            SpanKind::Internal
        };
        let span = OtelSpan::new(
            self.trace_id,
            span_id,
            parent_span_id,
            name,
            self.base + start,
            self.base + end,
        )
        .with_kind(kind)
        .with_attribute(ATTR_NET_PEER_NAME, host)
        .with_resource_attribute(ATTR_SERVICE_NAME, SERVICE);
        self.spans.push(span);
        self.spans.len() - 1
    }
}

pub fn generate(spec: &GeneratorSpec) -> Result<Vec<OtelSpan>, GeneratorError> {
    if spec.size == 0 {
        return Err(GeneratorError::ZeroSize);
    }
    if !(0.0..=1.0).contains(&spec.overlap_probability) {
        return Err(GeneratorError::Overlap(
            spec.overlap_probability.to_string(),
        ));
    }
    let mut b = Builder::new(spec);
    let n = spec.size as u64;
    let host = HOSTS[0];
    match spec.pattern {
        Pattern::Sequential => {
            let root = b.push(None, "root".into(), host, 0, 100 * n + 50);
            for i in 0..n {
                let start = 10 + 100 * i;
                b.push(Some(root), format!("child-{i}"), host, start, start + 50);
            }
        }
        Pattern::Nested => {
            let mut parent = None;
            for i in 0..n {
                parent = Some(b.push(parent, format!("level-{i}"), host, 10 * i, 20 * n - 10 * i));
            }
        }
        Pattern::Fanout => {
            let root = b.push(None, "root".into(), host, 0, n + 1000);
            for i in 0..n {
                b.push(Some(root), format!("worker-{i}"), host, 10 + i, 510 + i);
            }
        }
        Pattern::Fig3 => {
            let root = b.push(None, "root".into(), host, 0, 1000);
            b.push(Some(root), "call1".into(), host, 100, 400);
            let call2 = b.push(Some(root), "call2".into(), host, 200, 900);
            b.push(Some(call2), "call4".into(), host, 300, 620);
            b.push(Some(root), "call3".into(), host, 500, 800);
        }
        Pattern::Random => random_forest(&mut b, spec.size, spec.overlap_probability),
    }
    Ok(b.spans)
}

/// Event simulation over a single root. Each step either opens a span or
/// closes one; time strictly increases between steps.
///
/// With probability `1 - overlap` a step follows stack discipline (open a
/// child of the most recent open span, close the most recent open span).
/// Otherwise it opens a child of a random open level or closes a random
/// open span, which yields overlapping siblings and children outliving
/// their parents. A new span's parent is always the latest-started open
/// span on the parent level, so the parent is recoverable from entry times.
fn random_forest(b: &mut Builder, count: usize, overlap: f64) {
    let mut now = 0u64;
    let mut ends: Vec<Option<u64>> = Vec::new();
    let mut depth: Vec<usize> = Vec::new();
    // open span indices in start order
    let mut open: Vec<usize> = Vec::new();

    let host_of = |rng: &mut ChaCha8Rng| HOSTS[rng.random_range(0..HOSTS.len())];

    let root_host = host_of(&mut b.rng);
    let root = b.push(None, "op-0".into(), root_host, 0, 0);
    ends.push(None);
    depth.push(0);
    open.push(root);

    while b.spans.len() < count {
        now += b.rng.random_range(1..=20);
        let wants_open = open.len() == 1 || b.rng.random_bool(0.55);
        let deviate = overlap > 0.0 && b.rng.random_bool(overlap);
        if wants_open {
            let parent = if deviate {
                let level = depth[open[b.rng.random_range(0..open.len())]];
                *open
                    .iter()
                    .rev()
                    .find(|&&s| depth[s] == level)
                    .expect("level taken from an open span")
            } else {
                *open.last().expect("root stays open")
            };
            let host = host_of(&mut b.rng);
            let index = b.push(
                Some(parent),
                format!("op-{}", b.spans.len()),
                host,
                now,
                now,
            );
            ends.push(None);
            depth.push(depth[parent] + 1);
            open.push(index);
        } else {
            // never close the root early; it must stay open to adopt spans
            let slot = if deviate {
                b.rng.random_range(1..open.len())
            } else {
                open.len() - 1
            };
            let closed = open.remove(slot);
            ends[closed] = Some(now);
        }
    }
    while let Some(span) = open.pop() {
        now += b.rng.random_range(1..=20);
        ends[span] = Some(now);
    }
    for (span, end) in b.spans.iter_mut().zip(ends) {
        span.end_epoch_nanos = b.base + end.expect("every span closed");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convert::is_synchronous;
    use crate::span::{build_span_forest, validate_span};

    fn sync(spec: GeneratorSpec) -> bool {
        let forests = build_span_forest(generate(&spec).unwrap());
        assert_eq!(forests.len(), 1);
        is_synchronous(&forests[0])
    }

    #[test]
    fn pattern_names_parse() {
        for p in Pattern::ALL {
            assert_eq!(p.name().parse::<Pattern>().unwrap(), p);
        }
        assert!("zigzag".parse::<Pattern>().is_err());
    }

    #[test]
    fn shapes_have_expected_synchrony() {
        assert!(sync(GeneratorSpec::new(Pattern::Sequential, 2, 1)));
        assert!(sync(GeneratorSpec::new(Pattern::Nested, 6, 1)));
        assert!(!sync(GeneratorSpec::new(Pattern::Fanout, 3, 1)));
        assert!(!sync(GeneratorSpec::new(Pattern::Fig3, 1, 1)));
        assert!(sync(
            GeneratorSpec::new(Pattern::Random, 30, 4).with_overlap(0.0)
        ));
    }

    #[test]
    fn sizes() {
        let len = |p, n| generate(&GeneratorSpec::new(p, n, 0)).unwrap().len();
        assert_eq!(len(Pattern::Sequential, 4), 5);
        assert_eq!(len(Pattern::Nested, 4), 4);
        assert_eq!(len(Pattern::Fanout, 4), 5);
        assert_eq!(len(Pattern::Fig3, 4), 5);
        assert_eq!(len(Pattern::Random, 17), 17);
        assert_eq!(len(Pattern::Random, 1), 1);
    }

    #[test]
    fn random_is_seeded() {
        let spec = GeneratorSpec::new(Pattern::Random, 25, 99);
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        let other = GeneratorSpec::new(Pattern::Random, 25, 100);
        assert_ne!(generate(&spec).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn invalid_specs() {
        assert_eq!(
            generate(&GeneratorSpec::new(Pattern::Sequential, 0, 0)),
            Err(GeneratorError::ZeroSize)
        );
        assert!(generate(&GeneratorSpec::new(Pattern::Random, 3, 0).with_overlap(1.5)).is_err());
    }

    #[test]
    fn generated_spans_validate() {
        for p in Pattern::ALL {
            for seed in 0..5 {
                for span in generate(&GeneratorSpec::new(p, 12, seed).with_overlap(0.7)).unwrap() {
                    assert!(span.attributes.contains_key(ATTR_NET_PEER_NAME));
                    assert!(span.resource_attributes.contains_key(ATTR_SERVICE_NAME));
                    validate_span(span).unwrap();
                }
            }
        }
    }
}
