// Copyright 2026 span2records Contributors
// SPDX-License-Identifier: Apache-2.0

//! Criterion benchmarks for span2records.
