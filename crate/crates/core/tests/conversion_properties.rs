// Copyright 2026 span2records Contributors
// SPDX-License-Identifier: Apache-2.0

use std::collections::{HashMap, HashSet};

use proptest::prelude::*;
use span2records_core::analysis::{reconstruct_trace, TraceMode};
use span2records_core::convert::{
    assign_eoi_ess, convert_spans, derive_hostname, derive_kieker_trace_id, is_synchronous,
    map_span_fields, ATTR_NET_PEER_NAME, ATTR_NET_SOCK_PEER_ADDR, ATTR_SERVICE_NAME, UNKNOWN_HOST,
};
use span2records_core::span::{build_span_forest, OtelSpan, SpanId, TraceId};
use span2records_core::synth::{generate, GeneratorSpec, Pattern};

/// Depth by walking parent ids through the raw span list.
fn depth_oracle(spans: &[OtelSpan]) -> HashMap<SpanId, usize> {
    let parent: HashMap<SpanId, Option<SpanId>> = spans
        .iter()
        .map(|s| (s.span_id, s.parent_span_id))
        .collect();
    spans
        .iter()
        .map(|s| {
            let mut depth = 0;
            let mut current = s.parent_span_id;
            while let Some(p) = current.filter(|p| parent.contains_key(p)) {
                depth += 1;
                current = parent[&p];
            }
            (s.span_id, depth)
        })
        .collect()
}

fn parent_names(spans: &[OtelSpan]) -> HashMap<String, Option<String>> {
    let names: HashMap<SpanId, &str> = spans.iter().map(|s| (s.span_id, s.name.as_str())).collect();
    spans
        .iter()
        .map(|s| {
            let parent = s
                .parent_span_id
                .and_then(|p| names.get(&p))
                .map(|n| n.to_string());
            (s.name.clone(), parent)
        })
        .collect()
}

fn random_spans(seed: u64, count: usize, overlap: f64) -> Vec<OtelSpan> {
    generate(&GeneratorSpec::new(Pattern::Random, count, seed).with_overlap(overlap)).unwrap()
}

/// Arbitrary trees: span i > 0 picks a parent among 0..i, intervals are
/// random, so overlap and non-nesting both occur.
fn arbitrary_trace() -> impl Strategy<Value = Vec<OtelSpan>> {
    (1usize..40).prop_flat_map(|n| {
        (
            proptest::collection::vec(any::<prop::sample::Index>(), n),
            proptest::collection::vec((0u64..1_000, 0u64..500), n),
            proptest::collection::vec(1u64..u64::MAX, n),
        )
            .prop_map(move |(parents, times, ids)| {
                let mut seen = HashSet::new();
                let ids: Vec<u64> = ids
                    .into_iter()
                    .enumerate()
                    .map(|(i, id)| if seen.insert(id) { id } else { i as u64 + 1 })
                    .collect();
                (0..n)
                    .map(|i| {
                        let parent = (i > 0).then(|| SpanId(ids[parents[i].index(i)]));
                        let (start, len) = times[i];
                        OtelSpan::new(
                            TraceId(77),
                            SpanId(ids[i]),
                            parent,
                            format!("s{i}"),
                            start,
                            start + len,
                        )
                    })
                    .collect()
            })
    })
}

proptest! {
    #[test]
    fn forest_covers_every_span_once(spans in arbitrary_trace()) {
        let n = spans.len();
        let forests = build_span_forest(spans);
        prop_assert_eq!(forests.len(), 1);
        let forest = &forests[0];
        prop_assert_eq!(forest.len(), n);
        let visited = forest.preorder();
        prop_assert_eq!(visited.len(), n);
        prop_assert_eq!(visited.iter().collect::<HashSet<_>>().len(), n);
        for node in &forest.nodes {
            let keys: Vec<_> = node.children.iter()
                .map(|&c| (forest.node(c).span.start_epoch_nanos, forest.node(c).span.span_id))
                .collect();
            prop_assert!(keys.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn eoi_is_dense_and_ess_is_depth(spans in arbitrary_trace()) {
        let depths = depth_oracle(&spans);
        let by_name: HashMap<String, &OtelSpan> = spans.iter().map(|s| (s.name.clone(), s)).collect();
        let converted = convert_spans(spans.clone());
        let records = &converted[0].records;
        let eois: Vec<i32> = records.iter().map(|r| r.eoi).collect();
        prop_assert_eq!(eois, (0..spans.len() as i32).collect::<Vec<_>>());
        for record in records {
            let span = by_name[&record.operation_signature];
            prop_assert_eq!(record.ess as usize, depths[&span.span_id]);
        }
        let keys: Vec<(i64, i32)> = records.iter().map(|r| (r.tin, r.ess)).collect();
        prop_assert!(keys.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn synchronous_traces_step_ess_by_at_most_one(seed in any::<u64>(), n in 1usize..50) {
        let forest = &build_span_forest(random_spans(seed, n, 0.0))[0];
        prop_assert!(is_synchronous(forest));
        let records = assign_eoi_ess(forest).records;
        prop_assert!(records.windows(2).all(|w| w[1].ess <= w[0].ess + 1));
    }

    #[test]
    fn conversion_ignores_arrival_order(spans in arbitrary_trace(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut shuffled = spans.clone();
        shuffled.shuffle(&mut rand::rngs::StdRng::seed_from_u64(seed));
        prop_assert_eq!(convert_spans(spans), convert_spans(shuffled));
    }

    #[test]
    fn fields_map_one_to_one(
        name in "[a-zA-Z0-9 /;_.()]{1,30}",
        start in 0u64..(i64::MAX as u64 / 2),
        len in 0u64..1_000_000_000,
        peer_name in proptest::option::of("[a-z.]{1,12}"),
        peer_addr in proptest::option::of("[0-9.]{7,15}"),
        service in proptest::option::of("[a-z-]{1,12}"),
    ) {
        let mut span = OtelSpan::new(TraceId(1), SpanId(1), None, name.clone(), start, start + len);
        if let Some(v) = &peer_name { span = span.with_attribute(ATTR_NET_PEER_NAME, v.as_str()); }
        if let Some(v) = &peer_addr { span = span.with_attribute(ATTR_NET_SOCK_PEER_ADDR, v.as_str()); }
        if let Some(v) = &service { span = span.with_resource_attribute(ATTR_SERVICE_NAME, v.as_str()); }
        let mapped = map_span_fields(&span);
        prop_assert_eq!(mapped.tin as u64, start);
        prop_assert_eq!(mapped.tout as u64, start + len);
        prop_assert_eq!(&mapped.signature, &name);
        let expected = peer_name.or(peer_addr).or(service).unwrap_or_else(|| UNKNOWN_HOST.to_owned());
        prop_assert_eq!(&mapped.hostname, &expected);
        prop_assert_eq!(derive_hostname(&span.attributes, &span.resource_attributes), expected);
    }

    #[test]
    fn async_reconstruction_recovers_generated_forest(seed in any::<u64>(), n in 1usize..=50, overlap in 0.0f64..1.0) {
        let spans = random_spans(seed, n, overlap);
        let converted = convert_spans(spans.clone()).remove(0);
        let trace = reconstruct_trace(converted.records, TraceMode::Asynchronous).unwrap();
        let rebuilt: HashMap<String, Option<String>> = trace.executions.iter().map(|e| {
            let parent = e.parent.map(|p| trace.executions[p].record.operation_signature.clone());
            (e.record.operation_signature.clone(), parent)
        }).collect();
        prop_assert_eq!(rebuilt, parent_names(&spans));
    }
}

#[test]
fn depth_oracle_agrees_on_parallel_trace() {
    let spans = generate(&GeneratorSpec::new(Pattern::Fig3, 1, 0)).unwrap();
    let depths = depth_oracle(&spans);
    let by_name: HashMap<&str, usize> = spans
        .iter()
        .map(|s| (s.name.as_str(), depths[&s.span_id]))
        .collect();
    assert_eq!(by_name["root"], 0);
    assert_eq!(by_name["call4"], 2);
}

/// Overlapping same-level spans that both contain a child's entry time
/// leave the child's caller undetermined from records alone. The inference
/// picks the later-started candidate, which differs from the source here.
#[test]
fn ambiguous_parent_resolves_to_latest_candidate() {
    let t = TraceId(5);
    let spans = vec![
        OtelSpan::new(t, SpanId(1), None, "root", 0, 1000),
        OtelSpan::new(t, SpanId(2), Some(SpanId(1)), "p", 10, 500),
        OtelSpan::new(t, SpanId(3), Some(SpanId(1)), "q", 20, 500),
        OtelSpan::new(t, SpanId(4), Some(SpanId(2)), "child-of-p", 30, 40),
    ];
    let converted = convert_spans(spans).remove(0);
    assert!(!converted.report.synchronous);
    let trace = reconstruct_trace(converted.records, TraceMode::Asynchronous).unwrap();
    let child = &trace.executions[3];
    assert_eq!(child.record.operation_signature, "child-of-p");
    assert_eq!(
        trace.executions[child.parent.unwrap()]
            .record
            .operation_signature,
        "q"
    );
}

/// Low 64 bits read as two's complement, via arbitrary-precision arithmetic.
fn kieker_id_oracle(id: u128) -> i64 {
    use num_bigint::BigInt;
    let modulus = BigInt::from(1u8) << 64;
    let mut low = BigInt::from(id) % &modulus;
    if low >= BigInt::from(1u8) << 63 {
        low -= modulus;
    }
    i64::try_from(low).unwrap()
}

proptest! {
    #[test]
    fn kieker_trace_id_is_signed_low_half(id in any::<u128>()) {
        prop_assert_eq!(derive_kieker_trace_id(TraceId(id)), kieker_id_oracle(id));
    }
}

#[test]
fn kieker_trace_id_edges() {
    for id in [1u128, u64::MAX as u128, 1 << 63, (1 << 64) + 5, u128::MAX] {
        assert_eq!(
            derive_kieker_trace_id(TraceId(id)),
            kieker_id_oracle(id),
            "{id:#x}"
        );
    }
    assert_eq!(derive_kieker_trace_id(TraceId(u128::MAX)), -1);
}
