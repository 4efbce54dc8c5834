// Copyright 2026 span2records Contributors
// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Duration;

use span2records_core::analysis::{
    build_call_tree, build_dependency_graph, emit_dot, reconstruct_all, TraceMode,
};
use span2records_core::convert::{assign_eoi_ess, convert_spans};
use span2records_core::kieker::{read_monitoring_log, write_monitoring_log, MonitoringLogWriter};
use span2records_core::otlp::{
    encode_otlp_json, parse_otlp_json, parse_otlp_protobuf, serve_receiver, ParsedSpans,
    ReceiverConfig,
};
use span2records_core::span::build_span_forest;
use span2records_core::synth::{generate as generate_spans, GeneratorSpec, Pattern};

use crate::error::CliError;

fn parse_file(path: &Path) -> Result<ParsedSpans, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    let binary = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| matches!(e, "binpb" | "pb" | "protobuf"));
    if binary {
        return Ok(parse_otlp_protobuf(&bytes)?);
    }
    // an empty export file carries no spans
    if bytes.iter().all(u8::is_ascii_whitespace) {
        return Ok(ParsedSpans::default());
    }
    Ok(parse_otlp_json(&bytes)?)
}

pub fn convert(input: &Path, output: &Path) -> Result<(), CliError> {
    let parsed = parse_file(input)?;
    if parsed.skipped > 0 {
        eprintln!("warning: skipped {} invalid spans", parsed.skipped);
    }
    let converted = convert_spans(parsed.spans);
    let records: Vec<_> = converted
        .iter()
        .flat_map(|c| c.records.iter().cloned())
        .collect();
    write_monitoring_log(&records, output)?;
    let mut stdout = std::io::stdout().lock();
    for trace in &converted {
        let _ = writeln!(stdout, "{}", trace.report);
    }
    Ok(())
}

pub fn receive(listen: &str, output: &Path, completion_timeout: f64) -> Result<(), CliError> {
    let timeout = Duration::try_from_secs_f64(completion_timeout)
        .map_err(|_| CliError::Usage(format!("invalid completion timeout {completion_timeout}")))?;
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Io(e.to_string()))?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(listen)
            .await
            .map_err(|e| CliError::Io(format!("cannot listen on {listen}: {e}")))?;
        let local = listener
            .local_addr()
            .map_err(|e| CliError::Io(e.to_string()))?;
        let mut writer = MonitoringLogWriter::create_now(output)?;
        eprintln!("listening on http://{local}/v1/traces");

        let sink = move |trace: span2records_core::otlp::CompletedTrace| {
            for forest in build_span_forest(trace.spans) {
                let converted = assign_eoi_ess(&forest);
                let written = converted
                    .records
                    .iter()
                    .try_for_each(|r| writer.append(r))
                    .and_then(|()| writer.flush());
                match written {
                    Ok(()) => println!("{}", converted.report),
                    Err(err) => tracing::error!(%err, "failed to write trace"),
                }
            }
        };
        let stats = serve_receiver(
            listener,
            ReceiverConfig::with_timeout(timeout),
            sink,
            shutdown_signal(),
        )
        .await
        .map_err(|e| CliError::Io(e.to_string()))?;
        tracing::info!(?stats, "receiver stopped");
        Ok(())
    })
}

async fn shutdown_signal() {
    #[cfg(unix)]
    {
        use tokio::signal::unix::{signal, SignalKind};
        match signal(SignalKind::terminate()) {
            Ok(mut term) => {
                tokio::select! {
                    _ = tokio::signal::ctrl_c() => {}
                    _ = term.recv() => {}
                }
            }
            Err(_) => {
                let _ = tokio::signal::ctrl_c().await;
            }
        }
    }
    #[cfg(not(unix))]
    {
        let _ = tokio::signal::ctrl_c().await;
    }
}

pub fn analyze(
    input: &Path,
    asynchronous: bool,
    calltree: Option<&Path>,
    deps: Option<&Path>,
) -> Result<(), CliError> {
    let log = read_monitoring_log(input)?;
    let mode = if asynchronous {
        TraceMode::Asynchronous
    } else {
        TraceMode::Synchronous
    };
    let executions = log.records.len();
    let traces = reconstruct_all(log.records, mode)?;

    if let Some(path) = calltree {
        let dot = emit_dot(&build_call_tree(&traces));
        fs::write(path, dot).map_err(|e| CliError::io(path, e))?;
    }
    if let Some(path) = deps {
        let dot = emit_dot(&build_dependency_graph(&traces));
        fs::write(path, dot).map_err(|e| CliError::io(path, e))?;
    }
    println!("{} traces, {} executions", traces.len(), executions);
    Ok(())
}

pub fn generate(
    pattern: Pattern,
    seed: u64,
    size: usize,
    overlap: f64,
    traces: u64,
    output: &Path,
) -> Result<(), CliError> {
    let mut spans = Vec::new();
    for offset in 0..traces {
        let spec =
            GeneratorSpec::new(pattern, size, seed.wrapping_add(offset)).with_overlap(overlap);
        spans.extend(generate_spans(&spec)?);
    }
    fs::write(output, encode_otlp_json(&spans)).map_err(|e| CliError::io(output, e))?;
    Ok(())
}
