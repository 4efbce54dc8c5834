// Copyright 2026 span2records Contributors
// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;

use thiserror::Error;

use crate::kieker::OperationExecutionRecord;

/// How parents are assigned while rebuilding a trace from `eoi`/`ess`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraceMode {
    /// Single call stack; overlapping executions are an error.
    #[default]
    Synchronous,
    /// Parents are inferred from time containment one stack level up.
    Asynchronous,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReconstructError {
    #[error("trace {trace_id}: execution eoi={eoi} cannot be placed synchronously: {reason}")]
    InvalidSynchronousTrace {
        trace_id: i64,
        eoi: i32,
        reason: String,
    },
    #[error("trace {trace_id}: {reason}")]
    InvalidTrace { trace_id: i64, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Execution {
    pub record: OperationExecutionRecord,
    /// Index of the parent execution within the trace.
    pub parent: Option<usize>,
}

/// Executions of one trace; index equals `eoi`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionTrace {
    pub trace_id: i64,
    pub executions: Vec<Execution>,
}

impl ExecutionTrace {
    pub fn roots(&self) -> impl Iterator<Item = usize> + '_ {
        self.executions
            .iter()
            .enumerate()
            .filter(|(_, e)| e.parent.is_none())
            .map(|(i, _)| i)
    }

    /// Child indices per execution, in `eoi` order.
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut children = vec![Vec::new(); self.executions.len()];
        for (index, execution) in self.executions.iter().enumerate() {
            if let Some(parent) = execution.parent {
                children[parent].push(index);
            }
        }
        children
    }
}

/// Rebuilds the call structure of one trace from records sorted by `eoi`.
pub fn reconstruct_trace(
    records: Vec<OperationExecutionRecord>,
    mode: TraceMode,
) -> Result<ExecutionTrace, ReconstructError> {
    let trace_id = records.first().map_or(0, |r| r.trace_id);
    for (position, record) in records.iter().enumerate() {
        let invalid = |reason: String| ReconstructError::InvalidTrace { trace_id, reason };
        if record.trace_id != trace_id {
            return Err(invalid(format!(
                "mixed trace ids {trace_id} and {}",
                record.trace_id
            )));
        }
        if usize::try_from(record.eoi).ok() != Some(position) {
            return Err(invalid(format!(
                "expected eoi {position}, found {}",
                record.eoi
            )));
        }
        if record.ess < 0 {
            return Err(invalid(format!("negative ess at eoi {}", record.eoi)));
        }
    }

    let parents = match mode {
        TraceMode::Synchronous => synchronous_parents(&records)?,
        TraceMode::Asynchronous => asynchronous_parents(&records),
    };
    Ok(ExecutionTrace {
        trace_id,
        executions: records
            .into_iter()
            .zip(parents)
            .map(|(record, parent)| Execution { record, parent })
            .collect(),
    })
}

fn synchronous_parents(
    records: &[OperationExecutionRecord],
) -> Result<Vec<Option<usize>>, ReconstructError> {
    let mut parents = Vec::with_capacity(records.len());
    let mut stack: Vec<usize> = Vec::new();
    for (index, record) in records.iter().enumerate() {
        let fail = |reason: String| ReconstructError::InvalidSynchronousTrace {
            trace_id: record.trace_id,
            eoi: record.eoi,
            reason,
        };
        let depth = record.ess as usize;
        if depth > stack.len() {
            return Err(fail(format!(
                "ess gap: ess {} after stack depth {}",
                record.ess,
                stack.len()
            )));
        }
        for &popped in &stack[depth..] {
            let previous = &records[popped];
            if previous.tout >= record.tin {
                return Err(fail(format!(
                    "starts at {} while eoi={} (`{}`) runs until {}",
                    record.tin, previous.eoi, previous.operation_signature, previous.tout
                )));
            }
        }
        stack.truncate(depth);
        let parent = stack.last().copied();
        if let Some(parent) = parent {
            let outer = &records[parent];
            if record.tin < outer.tin || record.tout > outer.tout {
                return Err(fail(format!(
                    "[{}, {}] not nested in caller eoi={} [{}, {}]",
                    record.tin, record.tout, outer.eoi, outer.tin, outer.tout
                )));
            }
        }
        parents.push(parent);
        stack.push(index);
    }
    Ok(parents)
}

/// Parent of an execution at stack size k: among earlier executions at
/// k-1 whose interval contains its entry time, the one entered last (ties
/// go to the higher `eoi`). None found makes it a root.
fn asynchronous_parents(records: &[OperationExecutionRecord]) -> Vec<Option<usize>> {
    let mut by_level: HashMap<i32, Vec<usize>> = HashMap::new();
    let mut parents = Vec::with_capacity(records.len());
    for (index, record) in records.iter().enumerate() {
        let parent = if record.ess == 0 {
            None
        } else {
            by_level.get(&(record.ess - 1)).and_then(|candidates| {
                candidates
                    .iter()
                    .copied()
                    .filter(|&c| records[c].tin <= record.tin && record.tin <= records[c].tout)
                    .max_by_key(|&c| (records[c].tin, c))
            })
        };
        if parent.is_none() && record.ess > 0 {
            tracing::debug!(eoi = record.eoi, "no enclosing caller, treating as root");
        }
        parents.push(parent);
        by_level.entry(record.ess).or_default().push(index);
    }
    parents
}

/// Groups records by trace id (first-appearance order), sorts each group by
/// `eoi` and reconstructs it.
pub fn reconstruct_all(
    records: Vec<OperationExecutionRecord>,
    mode: TraceMode,
) -> Result<Vec<ExecutionTrace>, ReconstructError> {
    let mut order: Vec<i64> = Vec::new();
    let mut groups: HashMap<i64, Vec<OperationExecutionRecord>> = HashMap::new();
    for record in records {
        groups
            .entry(record.trace_id)
            .or_insert_with(|| {
                order.push(record.trace_id);
                Vec::new()
            })
            .push(record);
    }
    order
        .into_iter()
        .map(|id| {
            let mut group = groups.remove(&id).unwrap_or_default();
            group.sort_by_key(|r| r.eoi);
            reconstruct_trace(group, mode)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(sig: &str, eoi: i32, ess: i32, tin: i64, tout: i64) -> OperationExecutionRecord {
        OperationExecutionRecord {
            logging_timestamp: tout,
            operation_signature: sig.to_owned(),
            session_id: "<no-session-id>".to_owned(),
            trace_id: 42,
            tin,
            tout,
            hostname: "h".to_owned(),
            eoi,
            ess,
        }
    }

    fn parallel_records() -> Vec<OperationExecutionRecord> {
        vec![
            rec("root", 0, 0, 0, 1000),
            rec("call1", 1, 1, 100, 400),
            rec("call2", 2, 1, 200, 900),
            rec("call4", 3, 2, 300, 620),
            rec("call3", 4, 1, 500, 800),
        ]
    }

    fn parents(trace: &ExecutionTrace) -> Vec<Option<usize>> {
        trace.executions.iter().map(|e| e.parent).collect()
    }

    #[test]
    fn sequential_trace() {
        let records = vec![
            rec("r", 0, 0, 0, 100),
            rec("a", 1, 1, 10, 20),
            rec("b", 2, 1, 30, 40),
        ];
        let trace = reconstruct_trace(records, TraceMode::Synchronous).unwrap();
        assert_eq!(parents(&trace), [None, Some(0), Some(0)]);
        assert_eq!(trace.children()[0], [1, 2]);
    }

    #[test]
    fn parallel_trace_fails_synchronously() {
        let err = reconstruct_trace(parallel_records(), TraceMode::Synchronous).unwrap_err();
        assert!(
            matches!(
                err,
                ReconstructError::InvalidSynchronousTrace { eoi: 2, .. }
            ),
            "{err}"
        );
    }

    #[test]
    fn parallel_trace_recovered_asynchronously() {
        let trace = reconstruct_trace(parallel_records(), TraceMode::Asynchronous).unwrap();
        assert_eq!(parents(&trace), [None, Some(0), Some(0), Some(2), Some(0)]);
    }

    #[test]
    fn ess_gap() {
        let records = vec![rec("r", 0, 0, 0, 100), rec("x", 1, 2, 10, 20)];
        let err = reconstruct_trace(records, TraceMode::Synchronous).unwrap_err();
        let ReconstructError::InvalidSynchronousTrace { eoi, reason, .. } = err else {
            panic!("wrong error");
        };
        assert_eq!(eoi, 1);
        assert!(reason.starts_with("ess gap"), "{reason}");
    }

    #[test]
    fn child_outside_parent_fails_synchronously() {
        let records = vec![rec("r", 0, 0, 0, 100), rec("x", 1, 1, 10, 200)];
        assert!(reconstruct_trace(records, TraceMode::Synchronous).is_err());
    }

    #[test]
    fn orphaned_async_record_becomes_root() {
        let records = vec![rec("r", 0, 0, 0, 100), rec("x", 1, 1, 150, 200)];
        let trace = reconstruct_trace(records, TraceMode::Asynchronous).unwrap();
        assert_eq!(parents(&trace), [None, None]);
        assert_eq!(trace.roots().count(), 2);
    }

    #[test]
    fn eoi_must_be_dense() {
        let records = vec![rec("r", 0, 0, 0, 100), rec("x", 2, 1, 10, 20)];
        assert!(matches!(
            reconstruct_trace(records, TraceMode::Asynchronous),
            Err(ReconstructError::InvalidTrace { .. })
        ));
    }

    #[test]
    fn groups_by_trace_and_sorts_by_eoi() {
        let mut records = parallel_records();
        records.reverse();
        let mut other = rec("solo", 0, 0, 5, 6);
        other.trace_id = 7;
        records.insert(2, other);
        let traces = reconstruct_all(records, TraceMode::Asynchronous).unwrap();
        assert_eq!(traces.len(), 2);
        assert_eq!(traces[0].trace_id, 42);
        assert_eq!(traces[0].executions[3].record.operation_signature, "call4");
        assert_eq!(traces[1].trace_id, 7);
    }

    #[test]
    fn empty_input() {
        let trace = reconstruct_trace(Vec::new(), TraceMode::Synchronous).unwrap();
        assert!(trace.executions.is_empty());
    }
}
