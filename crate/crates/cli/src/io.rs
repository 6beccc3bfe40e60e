use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, Read, Write};
use std::path::Path;

use anyhow::Context;
use webdir_core::log_ingest::{open_log, parse_stream, LogRecord, ParseErrorKind};

/// Records read from a raw log or from `webdir parse` output.
#[derive(Debug, Default)]
pub struct Loaded {
    pub lines: usize,
    pub records: Vec<LogRecord>,
    pub errors: BTreeMap<ParseErrorKind, usize>,
    /// First few failures as (physical line, reason).
    pub samples: Vec<(usize, ParseErrorKind)>,
}

const MAX_ERROR_SAMPLES: usize = 10;

impl Loaded {
    pub fn error_count(&self) -> usize {
        self.errors.values().sum()
    }

    /// `13 records, 1 error (FieldCountMismatch)`
    pub fn summary(&self) -> String {
        let n = self.error_count();
        let mut s = format!(
            "{} records, {} {}",
            self.records.len(),
            n,
            if n == 1 { "error" } else { "errors" }
        );
        if n > 0 {
            let parts: Vec<String> = if self.errors.len() == 1 {
                self.errors.keys().map(|k| k.to_string()).collect()
            } else {
                self.errors.iter().map(|(k, c)| format!("{k}: {c}")).collect()
            };
            s.push_str(&format!(" ({})", parts.join(", ")));
        }
        s
    }
}

fn looks_like_records(line: &str) -> bool {
    line.split('\t').count() == 9
}

/// Reads a log file, or a tab-separated record file, recognized by its
/// first non-blank line.
pub fn load_records(path: &Path) -> anyhow::Result<Loaded> {
    let mut reader = open_log(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut loaded = Loaded::default();
    let mut first = String::new();
    let mut skipped = 0;
    loop {
        first.clear();
        if reader.read_line(&mut first)? == 0 {
            return Ok(loaded);
        }
        skipped += 1;
        if !first.trim().is_empty() {
            break;
        }
    }
    let first_line = first.trim_end_matches(['\n', '\r']).to_string();
    if looks_like_records(&first_line) {
        let push = |loaded: &mut Loaded, number: usize, line: &str| {
            loaded.lines += 1;
            match LogRecord::from_tsv(line) {
                Ok(r) => loaded.records.push(r),
                Err(kind) => {
                    *loaded.errors.entry(kind).or_default() += 1;
                    if loaded.samples.len() < MAX_ERROR_SAMPLES {
                        loaded.samples.push((number, kind));
                    }
                }
            }
        };
        push(&mut loaded, skipped, &first_line);
        for (i, line) in reader.lines().enumerate() {
            let line = line.with_context(|| format!("reading {}", path.display()))?;
            let line = line.trim_end_matches('\r');
            if !line.trim().is_empty() {
                push(&mut loaded, skipped + i + 1, line);
            }
        }
    } else {
        let chained = std::io::Cursor::new(first.into_bytes()).chain(reader);
        for outcome in parse_stream(chained) {
            let outcome = outcome.with_context(|| format!("reading {}", path.display()))?;
            loaded.lines += 1;
            match outcome.result {
                Ok(r) => loaded.records.push(r),
                Err(e) => {
                    *loaded.errors.entry(e.kind).or_default() += 1;
                    if loaded.samples.len() < MAX_ERROR_SAMPLES {
                        loaded.samples.push((outcome.line_number + skipped - 1, e.kind));
                    }
                }
            }
        }
    }
    Ok(loaded)
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp =
        tempfile::NamedTempFile::new_in(dir).with_context(|| format!("cannot write in {}", dir.display()))?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// Removes files in `dir` whose names start with `prefix`.
pub fn remove_stale(dir: &Path, prefix: &str) -> anyhow::Result<()> {
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        if entry.file_name().to_string_lossy().starts_with(prefix) && entry.file_type()?.is_file() {
            fs::remove_file(entry.path())?;
        }
    }
    Ok(())
}
