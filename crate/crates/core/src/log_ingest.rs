//! Streaming parser for Common Log Format access logs.
//!
//! A line has the shape `host ident authuser [date] "request" status bytes`,
//! where `-` stands for a missing value. Every line yields either a
//! [`LogRecord`] or a [`ParseError`]; a bad line never stops the stream.

use std::collections::BTreeSet;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read};
use std::path::Path;

use chrono::{DateTime, FixedOffset, NaiveDate};
use flate2::read::MultiGzDecoder;
use serde::Serialize;
use thiserror::Error;

/// Lines longer than this are rejected without tokenizing.
pub const MAX_LINE_LEN: usize = 64 * 1024;

const GZIP_MAGIC: [u8; 2] = [0x1f, 0x8b];

const MONTHS: [&str; 12] = [
    "Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec",
];

/// One parsed access-log line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LogRecord {
    pub host: String,
    pub ident: Option<String>,
    pub authuser: Option<String>,
    /// Kept at the logged UTC offset.
    pub timestamp: DateTime<FixedOffset>,
    pub method: String,
    /// Request path exactly as logged, query string included.
    pub resource: String,
    pub protocol: String,
    pub status: u16,
    pub bytes: Option<u64>,
}

impl LogRecord {
    /// `authuser@host` when an authenticated user is logged, else the host.
    pub fn user_id(&self) -> String {
        match &self.authuser {
            Some(user) => format!("{user}@{}", self.host),
            None => self.host.clone(),
        }
    }

    /// Number of whole hundreds in the status code, e.g. 2 for 200-299.
    pub fn status_class(&self) -> u16 {
        self.status / 100
    }

    /// Canonical tab-separated form used by `webdir parse`.
    pub fn to_tsv(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.host,
            dash(self.ident.as_deref()),
            dash(self.authuser.as_deref()),
            format_clf_date(&self.timestamp),
            self.method,
            self.resource,
            self.protocol,
            self.status,
            self.bytes.map_or_else(|| "-".to_string(), |b| b.to_string()),
        )
    }

    /// Inverse of [`LogRecord::to_tsv`].
    pub fn from_tsv(line: &str) -> Result<Self, ParseErrorKind> {
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 9 || cols[0].is_empty() {
            return Err(ParseErrorKind::FieldCountMismatch);
        }
        let timestamp = parse_clf_date(cols[3]).ok_or(ParseErrorKind::MalformedDate)?;
        if !is_method(cols[4]) || cols[5].is_empty() || cols[6].is_empty() {
            return Err(ParseErrorKind::MalformedRequest);
        }
        Ok(LogRecord {
            host: cols[0].to_string(),
            ident: optional(cols[1]),
            authuser: optional(cols[2]),
            timestamp,
            method: cols[4].to_string(),
            resource: cols[5].to_string(),
            protocol: cols[6].to_string(),
            status: parse_status(cols[7])?,
            bytes: parse_bytes(cols[8])?,
        })
    }
}

/// Re-serializes the record as a Common Log Format line.
impl fmt::Display for LogRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} [{}] \"{} {} {}\" {} ",
            self.host,
            dash(self.ident.as_deref()),
            dash(self.authuser.as_deref()),
            format_clf_date(&self.timestamp),
            self.method,
            self.resource,
            self.protocol,
            self.status,
        )?;
        match self.bytes {
            Some(b) => write!(f, "{b}"),
            None => f.write_str("-"),
        }
    }
}

fn dash(field: Option<&str>) -> &str {
    field.unwrap_or("-")
}

fn optional(field: &str) -> Option<String> {
    (field != "-").then(|| field.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ParseErrorKind {
    MalformedDate,
    MalformedRequest,
    BadStatus,
    BadBytes,
    FieldCountMismatch,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind}: {raw_line:?}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub raw_line: String,
}

/// Result of parsing one non-empty physical line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseOutcome {
    /// 1-based physical line number in the source.
    pub line_number: usize,
    pub result: Result<LogRecord, ParseError>,
}

/// Reading the underlying source failed.
#[derive(Debug, Error)]
#[error("read failed after line {last_good_line}: {source}")]
pub struct StreamError {
    pub last_good_line: usize,
    #[source]
    pub source: io::Error,
}

/// Parses one physical line (without its newline).
pub fn parse_line(line: &str) -> Result<LogRecord, ParseError> {
    parse_fields(line).map_err(|kind| ParseError {
        kind,
        raw_line: line.to_string(),
    })
}

fn parse_fields(line: &str) -> Result<LogRecord, ParseErrorKind> {
    if line.len() > MAX_LINE_LEN {
        return Err(ParseErrorKind::FieldCountMismatch);
    }
    let mut fields = [""; 7];
    let mut count = 0;
    for field in Fields::new(line) {
        if count == fields.len() {
            return Err(ParseErrorKind::FieldCountMismatch);
        }
        fields[count] = field;
        count += 1;
    }
    if count != fields.len() {
        return Err(ParseErrorKind::FieldCountMismatch);
    }
    let [host, ident, authuser, date, request, status, bytes] = fields;

    let timestamp = date
        .strip_prefix('[')
        .and_then(|d| d.strip_suffix(']'))
        .and_then(parse_clf_date)
        .ok_or(ParseErrorKind::MalformedDate)?;
    let (method, resource, protocol) = request
        .strip_prefix('"')
        .and_then(|r| r.strip_suffix('"'))
        .and_then(split_request)
        .ok_or(ParseErrorKind::MalformedRequest)?;
    let status = parse_status(status)?;
    let bytes = parse_bytes(bytes)?;

    Ok(LogRecord {
        host: host.to_string(),
        ident: optional(ident),
        authuser: optional(authuser),
        timestamp,
        method: method.to_string(),
        resource: resource.to_string(),
        protocol: protocol.to_string(),
        status,
        bytes,
    })
}

/// Splits a line into fields on runs of spaces or tabs. Text inside `[...]`
/// or `"..."` (with backslash escapes) is kept together.
struct Fields<'a> {
    line: &'a str,
    pos: usize,
}

impl<'a> Fields<'a> {
    fn new(line: &'a str) -> Self {
        Fields { line, pos: 0 }
    }
}

impl<'a> Iterator for Fields<'a> {
    type Item = &'a str;

    fn next(&mut self) -> Option<&'a str> {
        let bytes = self.line.as_bytes();
        let mut i = self.pos;
        while i < bytes.len() && is_blank(bytes[i]) {
            i += 1;
        }
        if i == bytes.len() {
            self.pos = i;
            return None;
        }
        let start = i;
        match bytes[i] {
            b'[' => {
                i += 1;
                while i < bytes.len() && bytes[i] != b']' {
                    i += 1;
                }
                i = (i + 1).min(bytes.len());
            }
            b'"' => {
                i += 1;
                while i < bytes.len() && bytes[i] != b'"' {
                    if bytes[i] == b'\\' {
                        i += 1;
                    }
                    i += 1;
                }
                i = (i + 1).min(bytes.len());
            }
            _ => {}
        }
        // A closing delimiter glued to more text still belongs to this field.
        while i < bytes.len() && !is_blank(bytes[i]) {
            i += 1;
        }
        self.pos = i;
        Some(&self.line[start..i])
    }
}

fn is_blank(b: u8) -> bool {
    b == b' ' || b == b'\t'
}

fn split_request(request: &str) -> Option<(&str, &str, &str)> {
    let bytes = request.as_bytes();
    let mut tokens: [&str; 3] = [""; 3];
    let mut n = 0;
    let mut i = 0;
    while i < bytes.len() {
        if is_blank(bytes[i]) {
            i += 1;
            continue;
        }
        let start = i;
        while i < bytes.len() && !is_blank(bytes[i]) {
            if bytes[i] == b'\\' {
                i += 1;
            }
            i += 1;
        }
        let end = i.min(bytes.len());
        if n == 3 {
            return None;
        }
        tokens[n] = &request[start..end];
        n += 1;
    }
    if n != 3 || !is_method(tokens[0]) {
        return None;
    }
    Some((tokens[0], tokens[1], tokens[2]))
}

fn is_method(token: &str) -> bool {
    !token.is_empty()
        && token
            .bytes()
            .all(|b| b.is_ascii_uppercase() || b == b'-' || b == b'_')
}

fn parse_status(field: &str) -> Result<u16, ParseErrorKind> {
    if field.len() != 3 || !field.bytes().all(|b| b.is_ascii_digit()) {
        return Err(ParseErrorKind::BadStatus);
    }
    let status: u16 = field.parse().map_err(|_| ParseErrorKind::BadStatus)?;
    if (100..=599).contains(&status) {
        Ok(status)
    } else {
        Err(ParseErrorKind::BadStatus)
    }
}

fn parse_bytes(field: &str) -> Result<Option<u64>, ParseErrorKind> {
    if field == "-" {
        return Ok(None);
    }
    if field.is_empty() || !field.bytes().all(|b| b.is_ascii_digit()) {
        return Err(ParseErrorKind::BadBytes);
    }
    field.parse().map(Some).map_err(|_| ParseErrorKind::BadBytes)
}

/// Parses `dd/Mon/yyyy:HH:MM:SS ±zzzz`.
pub fn parse_clf_date(s: &str) -> Option<DateTime<FixedOffset>> {
    let b = s.as_bytes();
    if b.len() != 26
        || b[2] != b'/'
        || b[6] != b'/'
        || b[11] != b':'
        || b[14] != b':'
        || b[17] != b':'
        || b[20] != b' '
    {
        return None;
    }
    let day = digits(&b[0..2])?;
    let month = MONTHS.iter().position(|m| m.as_bytes() == &b[3..6])? as u32 + 1;
    let year = digits(&b[7..11])? as i32;
    let hour = digits(&b[12..14])?;
    let minute = digits(&b[15..17])?;
    let second = digits(&b[18..20])?;
    let sign = match b[21] {
        b'+' => 1,
        b'-' => -1,
        _ => return None,
    };
    let off_h = digits(&b[22..24])? as i32;
    let off_m = digits(&b[24..26])? as i32;
    if off_m >= 60 {
        return None;
    }
    let offset = FixedOffset::east_opt(sign * (off_h * 3600 + off_m * 60))?;
    let naive = NaiveDate::from_ymd_opt(year, month, day)?.and_hms_opt(hour, minute, second)?;
    naive.and_local_timezone(offset).single()
}

fn digits(b: &[u8]) -> Option<u32> {
    b.iter().try_fold(0u32, |acc, &c| {
        c.is_ascii_digit().then(|| acc * 10 + u32::from(c - b'0'))
    })
}

pub fn format_clf_date(ts: &DateTime<FixedOffset>) -> String {
    ts.format("%d/%b/%Y:%H:%M:%S %z").to_string()
}

/// Lazily parses every non-empty line of `source`.
pub fn parse_stream<R: BufRead>(source: R) -> ParseStream<R> {
    ParseStream {
        source,
        buf: Vec::with_capacity(512),
        line_number: 0,
        failed: false,
    }
}

pub struct ParseStream<R> {
    source: R,
    buf: Vec<u8>,
    line_number: usize,
    failed: bool,
}

impl<R: BufRead> Iterator for ParseStream<R> {
    type Item = Result<ParseOutcome, StreamError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        loop {
            self.buf.clear();
            match self.source.read_until(b'\n', &mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
                Err(source) => {
                    self.failed = true;
                    return Some(Err(StreamError {
                        last_good_line: self.line_number,
                        source,
                    }));
                }
            }
            self.line_number += 1;
            let mut raw = &self.buf[..];
            if let Some(rest) = raw.strip_suffix(b"\n") {
                raw = rest;
            }
            if let Some(rest) = raw.strip_suffix(b"\r") {
                raw = rest;
            }
            if raw.iter().all(|&b| is_blank(b)) {
                continue;
            }
            let line = String::from_utf8_lossy(raw);
            return Some(Ok(ParseOutcome {
                line_number: self.line_number,
                result: parse_line(&line),
            }));
        }
    }
}

/// Opens a log file, transparently decompressing gzip input.
pub fn open_log(path: &Path) -> io::Result<Box<dyn BufRead>> {
    let mut reader = BufReader::with_capacity(1 << 16, File::open(path)?);
    let is_gzip = reader.fill_buf()?.starts_with(&GZIP_MAGIC);
    if is_gzip {
        Ok(Box::new(BufReader::with_capacity(
            1 << 16,
            MultiGzDecoder::new(reader),
        )))
    } else {
        Ok(Box::new(reader))
    }
}

/// Wraps any reader, decompressing it when it starts with the gzip magic.
pub fn maybe_gunzip<R: Read + 'static>(reader: R) -> io::Result<Box<dyn BufRead>> {
    let mut reader = BufReader::new(reader);
    if reader.fill_buf()?.starts_with(&GZIP_MAGIC) {
        Ok(Box::new(BufReader::new(MultiGzDecoder::new(reader))))
    } else {
        Ok(Box::new(reader))
    }
}

/// Which records take part in mining.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FilterPolicy {
    pub methods: BTreeSet<String>,
    pub status_classes: BTreeSet<u16>,
}

impl Default for FilterPolicy {
    fn default() -> Self {
        FilterPolicy {
            methods: BTreeSet::from(["GET".to_string()]),
            status_classes: BTreeSet::from([2]),
        }
    }
}

impl FilterPolicy {
    pub fn accepts(&self, record: &LogRecord) -> bool {
        self.methods.contains(&record.method) && self.status_classes.contains(&record.status_class())
    }
}

pub fn filter_records<I>(records: I, policy: &FilterPolicy) -> Vec<LogRecord>
where
    I: IntoIterator<Item = LogRecord>,
{
    records.into_iter().filter(|r| policy.accepts(r)).collect()
}
