// Copyright 2026 span2records Contributors
// SPDX-License-Identifier: Apache-2.0

//! Reader and writer for Kieker's ASCII file-system log: a `kieker.map`
//! registry of record types plus `.dat` files of `;`-separated lines.
//!
//! Inside text fields `\`, `;`, LF and CR are written as `\\`, `\;`, `\n`
//! and `\r`.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use thiserror::Error;

use super::{
    OperationExecutionRecord, OPERATION_EXECUTION_RECORD_KEY, OPERATION_EXECUTION_RECORD_TYPE,
};

pub const MAP_FILE_NAME: &str = "kieker.map";

#[derive(Debug, Error)]
pub enum LogError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{}:{line}: record key `{key}` not declared in {MAP_FILE_NAME}", file.display())]
    UnknownRecordKey {
        file: PathBuf,
        line: usize,
        key: String,
    },
    #[error("{}:{line}: expected {expected} fields, found {found}", file.display())]
    FieldCountMismatch {
        file: PathBuf,
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("{}:{line}: cannot parse field `{field}`", file.display())]
    NumberParseError {
        file: PathBuf,
        line: usize,
        field: &'static str,
    },
    #[error("{}:{line}: {reason}", file.display())]
    Malformed {
        file: PathBuf,
        line: usize,
        reason: String,
    },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> LogError + '_ {
    move |source| LogError::Io {
        path: path.to_owned(),
        source,
    }
}

/// A monitoring-log directory and its contents.
#[derive(Debug, Clone, PartialEq)]
pub struct MonitoringLog {
    pub directory: PathBuf,
    pub map_entries: BTreeMap<String, String>,
    pub records: Vec<OperationExecutionRecord>,
    /// Lines of other registered record types, skipped while reading.
    pub skipped_records: usize,
}

pub fn escape_field(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            ';' => out.push_str("\\;"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

/// Splits a line on unescaped `;` and unescapes each field.
pub fn split_line(line: &str) -> Result<Vec<String>, String> {
    let mut fields = Vec::new();
    let mut current = String::new();
    let mut chars = line.chars();
    while let Some(c) = chars.next() {
        match c {
            ';' => fields.push(std::mem::take(&mut current)),
            '\\' => match chars.next() {
                Some('\\') => current.push('\\'),
                Some(';') => current.push(';'),
                Some('n') => current.push('\n'),
                Some('r') => current.push('\r'),
                Some(other) => return Err(format!("unknown escape `\\{other}`")),
                None => return Err("dangling escape at end of line".to_owned()),
            },
            c => current.push(c),
        }
    }
    fields.push(current);
    Ok(fields)
}

fn format_line(record: &OperationExecutionRecord) -> String {
    format!(
        "{};{};{};{};{};{};{};{};{};{}\n",
        OPERATION_EXECUTION_RECORD_KEY,
        record.logging_timestamp,
        escape_field(&record.operation_signature),
        escape_field(&record.session_id),
        record.trace_id,
        record.tin,
        record.tout,
        escape_field(&record.hostname),
        record.eoi,
        record.ess,
    )
}

/// `kieker-<yyyyMMdd-HHmmss>-UTC-<nnn>.dat`
pub fn data_file_name(at: DateTime<Utc>, sequence: u32) -> String {
    format!(
        "kieker-{}-UTC-{:03}.dat",
        at.format("%Y%m%d-%H%M%S"),
        sequence
    )
}

/// Appends records to one data file of a monitoring-log directory.
pub struct MonitoringLogWriter {
    directory: PathBuf,
    data_path: PathBuf,
    out: BufWriter<File>,
    written: usize,
}

impl MonitoringLogWriter {
    /// Creates the directory if needed, writes `kieker.map` and opens a
    /// fresh data file named after `at`.
    pub fn create(directory: impl AsRef<Path>, at: DateTime<Utc>) -> Result<Self, LogError> {
        let directory = directory.as_ref().to_owned();
        fs::create_dir_all(&directory).map_err(io_err(&directory))?;

        let map_path = directory.join(MAP_FILE_NAME);
        let map = format!("{OPERATION_EXECUTION_RECORD_KEY}={OPERATION_EXECUTION_RECORD_TYPE}\n");
        fs::write(&map_path, map).map_err(io_err(&map_path))?;

        let mut sequence = 1;
        let (data_path, file) = loop {
            let path = directory.join(data_file_name(at, sequence));
            match OpenOptions::new().write(true).create_new(true).open(&path) {
                Ok(file) => break (path, file),
                Err(err) if err.kind() == io::ErrorKind::AlreadyExists && sequence < 999 => {
                    sequence += 1;
                }
                Err(err) => return Err(io_err(&path)(err)),
            }
        };

        Ok(MonitoringLogWriter {
            directory,
            data_path,
            out: BufWriter::new(file),
            written: 0,
        })
    }

    /// [`MonitoringLogWriter::create`] with the data file named after now.
    pub fn create_now(directory: impl AsRef<Path>) -> Result<Self, LogError> {
        Self::create(directory, Utc::now())
    }

    pub fn data_path(&self) -> &Path {
        &self.data_path
    }

    pub fn directory(&self) -> &Path {
        &self.directory
    }

    pub fn written(&self) -> usize {
        self.written
    }

    pub fn append(&mut self, record: &OperationExecutionRecord) -> Result<(), LogError> {
        self.out
            .write_all(format_line(record).as_bytes())
            .map_err(io_err(&self.data_path))?;
        self.written += 1;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<(), LogError> {
        self.out.flush().map_err(io_err(&self.data_path))
    }

    pub fn finish(mut self) -> Result<PathBuf, LogError> {
        self.flush()?;
        Ok(self.data_path)
    }
}

/// Writes a complete monitoring log whose data file is named after the
/// current time.
pub fn write_monitoring_log(
    records: &[OperationExecutionRecord],
    directory: impl AsRef<Path>,
) -> Result<MonitoringLog, LogError> {
    write_monitoring_log_at(records, directory, Utc::now())
}

pub fn write_monitoring_log_at(
    records: &[OperationExecutionRecord],
    directory: impl AsRef<Path>,
    at: DateTime<Utc>,
) -> Result<MonitoringLog, LogError> {
    let mut writer = MonitoringLogWriter::create(directory, at)?;
    for record in records {
        writer.append(record)?;
    }
    let directory = writer.directory().to_owned();
    writer.finish()?;
    Ok(MonitoringLog {
        directory,
        map_entries: BTreeMap::from([(
            OPERATION_EXECUTION_RECORD_KEY.to_owned(),
            OPERATION_EXECUTION_RECORD_TYPE.to_owned(),
        )]),
        records: records.to_vec(),
        skipped_records: 0,
    })
}

fn read_map(path: &Path) -> Result<BTreeMap<String, String>, LogError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut entries = BTreeMap::new();
    for (number, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(LogError::Malformed {
                file: path.to_owned(),
                line: number + 1,
                reason: "map entry without `=`".to_owned(),
            });
        };
        entries.insert(key.trim().to_owned(), value.trim().to_owned());
    }
    Ok(entries)
}

fn parse_record(
    fields: &[String],
    file: &Path,
    line: usize,
) -> Result<OperationExecutionRecord, LogError> {
    fn number<T: std::str::FromStr>(
        text: &str,
        file: &Path,
        line: usize,
        field: &'static str,
    ) -> Result<T, LogError> {
        text.parse().map_err(|_| LogError::NumberParseError {
            file: file.to_owned(),
            line,
            field,
        })
    }
    Ok(OperationExecutionRecord {
        logging_timestamp: number(&fields[1], file, line, "loggingTimestamp")?,
        operation_signature: fields[2].clone(),
        session_id: fields[3].clone(),
        trace_id: number(&fields[4], file, line, "traceId")?,
        tin: number(&fields[5], file, line, "tin")?,
        tout: number(&fields[6], file, line, "tout")?,
        hostname: fields[7].clone(),
        eoi: number(&fields[8], file, line, "eoi")?,
        ess: number(&fields[9], file, line, "ess")?,
    })
}

/// Reads every `.dat` file of a monitoring-log directory in file-name order.
///
/// Lines whose key maps to another record type are counted and skipped.
pub fn read_monitoring_log(directory: impl AsRef<Path>) -> Result<MonitoringLog, LogError> {
    let directory = directory.as_ref();
    let map_entries = read_map(&directory.join(MAP_FILE_NAME))?;

    let mut data_files = Vec::new();
    for entry in fs::read_dir(directory).map_err(io_err(directory))? {
        let path = entry.map_err(io_err(directory))?.path();
        if path.extension().is_some_and(|ext| ext == "dat") && path.is_file() {
            data_files.push(path);
        }
    }
    data_files.sort();

    let mut records = Vec::new();
    let mut skipped_records = 0;
    for file in &data_files {
        let text = fs::read_to_string(file).map_err(io_err(file))?;
        for (index, line) in text.lines().enumerate() {
            let line_number = index + 1;
            if line.is_empty() {
                continue;
            }
            let fields = split_line(line).map_err(|reason| LogError::Malformed {
                file: file.clone(),
                line: line_number,
                reason,
            })?;
            let key = fields[0].as_str();
            match map_entries.get(key) {
                None => {
                    return Err(LogError::UnknownRecordKey {
                        file: file.clone(),
                        line: line_number,
                        key: key.to_owned(),
                    })
                }
                Some(kind) if kind != OPERATION_EXECUTION_RECORD_TYPE => {
                    skipped_records += 1;
                    continue;
                }
                Some(_) => {}
            }
            if fields.len() != OperationExecutionRecord::LINE_FIELDS {
                return Err(LogError::FieldCountMismatch {
                    file: file.clone(),
                    line: line_number,
                    expected: OperationExecutionRecord::LINE_FIELDS,
                    found: fields.len(),
                });
            }
            records.push(parse_record(&fields, file, line_number)?);
        }
    }
    if skipped_records > 0 {
        tracing::info!(skipped_records, "skipped records of other types");
    }

    Ok(MonitoringLog {
        directory: directory.to_owned(),
        map_entries,
        records,
        skipped_records,
    })
}
