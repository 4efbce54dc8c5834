// Copyright 2026 span2records Contributors
// SPDX-License-Identifier: Apache-2.0

//! Kieker operation-execution records and the text monitoring log.

mod log;

pub use self::log::{
    data_file_name, escape_field, read_monitoring_log, split_line, write_monitoring_log,
    write_monitoring_log_at, LogError, MonitoringLog, MonitoringLogWriter, MAP_FILE_NAME,
};

/// Fully qualified Kieker type name written to `kieker.map`.
pub const OPERATION_EXECUTION_RECORD_TYPE: &str =
    "kieker.common.record.controlflow.OperationExecutionRecord";

/// Key under which [`OPERATION_EXECUTION_RECORD_TYPE`] is registered.
pub const OPERATION_EXECUTION_RECORD_KEY: &str = "$1";

pub const NO_SESSION_ID: &str = "<no-session-id>";

/// Kieker's `OperationExecutionRecord`: one method (here: span) execution,
/// placed in its trace by execution order index and stack size.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OperationExecutionRecord {
    pub logging_timestamp: i64,
    pub operation_signature: String,
    pub session_id: String,
    pub trace_id: i64,
    pub tin: i64,
    pub tout: i64,
    pub hostname: String,
    /// Execution order index.
    pub eoi: i32,
    /// Execution stack size.
    pub ess: i32,
}

impl OperationExecutionRecord {
    /// Number of fields in a serialized line, including the type key.
    pub const LINE_FIELDS: usize = 10;
}
