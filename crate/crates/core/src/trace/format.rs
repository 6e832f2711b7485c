use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use flate2::read::MultiGzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;

use super::TraceError;
use crate::cache::{AccessKind, AccessRecord};

/// Streaming parser; holds one line in memory at a time.
pub struct TraceReader<R> {
    reader: R,
    block_bytes: usize,
    line: u64,
    buf: String,
    prev: Option<(u64, u64)>,
    failed: bool,
}

impl<R: BufRead> TraceReader<R> {
    pub fn new(reader: R, block_bytes: usize) -> Self {
        Self {
            reader,
            block_bytes,
            line: 0,
            buf: String::new(),
            prev: None,
            failed: false,
        }
    }

    fn malformed(&self, column: usize, msg: impl Into<String>) -> TraceError {
        TraceError::MalformedLine {
            line: self.line,
            column,
            msg: msg.into(),
        }
    }

    fn parse_line(&self, text: &str) -> Result<Option<AccessRecord>, TraceError> {
        let body = text.split('#').next().unwrap_or("");
        // (column, token) pairs, columns 1-based
        let mut tokens = body
            .char_indices()
            .filter(|&(i, c)| {
                !c.is_whitespace() && (i == 0 || body[..i].ends_with(char::is_whitespace))
            })
            .map(|(i, _)| {
                let tok = body[i..].split_whitespace().next().unwrap_or("");
                (i + 1, tok)
            });
        let Some((ts_col, ts_tok)) = tokens.next() else {
            return Ok(None);
        };
        let timestamp_ns: u64 = ts_tok
            .parse()
            .map_err(|_| self.malformed(ts_col, format!("bad timestamp {ts_tok:?}")))?;
        let end_col = body.trim_end().len() + 1;
        let (kind_col, kind_tok) = tokens
            .next()
            .ok_or_else(|| self.malformed(end_col, "missing access kind"))?;
        let kind = match kind_tok {
            "R" | "r" => AccessKind::Read,
            "W" | "w" => AccessKind::Write,
            "F" | "f" => AccessKind::Fill,
            "E" | "e" => AccessKind::Evict,
            other => return Err(self.malformed(kind_col, format!("unknown access kind {other:?}"))),
        };
        let (addr_col, addr_tok) = tokens
            .next()
            .ok_or_else(|| self.malformed(end_col, "missing address"))?;
        let address = u64::from_str_radix(strip_hex(addr_tok), 16)
            .map_err(|_| self.malformed(addr_col, format!("bad address {addr_tok:?}")))?;
        let data = match tokens.next() {
            None => None,
            Some((col, tok)) => {
                if !kind.needs_payload() {
                    return Err(self.malformed(col, format!("{kind:?} records carry no data")));
                }
                Some(
                    hex::decode(strip_hex(tok))
                        .map_err(|e| self.malformed(col, format!("bad data: {e}")))?,
                )
            }
        };
        if let Some((col, _)) = tokens.next() {
            return Err(self.malformed(col, "unexpected trailing field"));
        }
        if kind.needs_payload() {
            let got = data.as_ref().map_or(0, Vec::len);
            if got != self.block_bytes {
                return Err(TraceError::BadDataLength {
                    line: self.line,
                    expected: self.block_bytes,
                    got,
                });
            }
        }
        if let Some((prev_line, prev_ts)) = self.prev {
            if timestamp_ns < prev_ts {
                return Err(TraceError::TimeRegression {
                    line: self.line,
                    ts: timestamp_ns,
                    prev_line,
                    prev_ts,
                });
            }
        }
        Ok(Some(AccessRecord {
            timestamp_ns,
            kind,
            address,
            data,
        }))
    }
}

fn strip_hex(tok: &str) -> &str {
    tok.strip_prefix("0x")
        .or_else(|| tok.strip_prefix("0X"))
        .unwrap_or(tok)
}

impl<R: BufRead> Iterator for TraceReader<R> {
    type Item = Result<AccessRecord, TraceError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        loop {
            self.buf.clear();
            match self.reader.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => {
                    self.failed = true;
                    return Some(Err(e.into()));
                }
            }
            self.line += 1;
            let text = std::mem::take(&mut self.buf);
            let parsed = self.parse_line(&text);
            self.buf = text;
            match parsed {
                Ok(None) => continue,
                Ok(Some(rec)) => {
                    self.prev = Some((self.line, rec.timestamp_ns));
                    return Some(Ok(rec));
                }
                Err(e) => {
                    self.failed = true;
                    return Some(Err(e));
                }
            }
        }
    }
}

/// Parses a trace from any buffered reader.
pub fn parse_trace<R: BufRead>(reader: R, block_bytes: usize) -> TraceReader<R> {
    TraceReader::new(reader, block_bytes)
}

/// Opens a trace file, decompressing it when the name ends in `.gz`.
pub fn open_trace(
    path: &Path,
    block_bytes: usize,
) -> Result<TraceReader<Box<dyn BufRead + Send>>, TraceError> {
    let file = File::open(path)?;
    let reader: Box<dyn BufRead + Send> = if path.extension().is_some_and(|e| e == "gz") {
        Box::new(BufReader::new(MultiGzDecoder::new(file)))
    } else {
        Box::new(BufReader::new(file))
    };
    Ok(TraceReader::new(reader, block_bytes))
}

pub fn write_record<W: Write>(out: &mut W, rec: &AccessRecord) -> std::io::Result<()> {
    let kind = match rec.kind {
        AccessKind::Read => 'R',
        AccessKind::Write => 'W',
        AccessKind::Fill => 'F',
        AccessKind::Evict => 'E',
    };
    write!(out, "{} {} 0x{:x}", rec.timestamp_ns, kind, rec.address)?;
    if let Some(data) = &rec.data {
        write!(out, " {}", hex::encode(data))?;
    }
    writeln!(out)
}

pub fn write_trace<'a, W, I>(out: &mut W, records: I) -> std::io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a AccessRecord>,
{
    records.into_iter().try_for_each(|r| write_record(out, r))
}

/// Writes records to `path`, gzip-compressed when the name ends in `.gz`,
/// and returns how many were written.
pub fn save_trace<I>(path: &Path, records: I) -> std::io::Result<u64>
where
    I: IntoIterator<Item = AccessRecord>,
{
    let file = std::io::BufWriter::new(File::create(path)?);
    let mut n = 0;
    if path.extension().is_some_and(|e| e == "gz") {
        let mut gz = GzEncoder::new(file, Compression::default());
        for r in records {
            write_record(&mut gz, &r)?;
            n += 1;
        }
        gz.finish()?.flush()?;
    } else {
        let mut out = file;
        for r in records {
            write_record(&mut out, &r)?;
            n += 1;
        }
        out.flush()?;
    }
    Ok(n)
}
