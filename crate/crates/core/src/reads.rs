//! Streaming FASTA/FASTQ reader with gzip sniffing.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use flate2::read::MultiGzDecoder;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReadFormat {
    #[default]
    Auto,
    Fasta,
    Fastq,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeqRead {
    pub id: String,
    pub seq: Vec<u8>,
}

#[derive(Debug, thiserror::Error)]
pub enum ReadsError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
}

/// Opens a read file, transparently decompressing gzip input.
pub fn open_reads(path: &Path, format: ReadFormat) -> Result<ReadStream, ReadsError> {
    let io_err = |source| ReadsError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut raw = BufReader::new(File::open(path).map_err(io_err)?);
    let gz = {
        let head = raw.fill_buf().map_err(io_err)?;
        head.len() >= 2 && head[0] == 0x1f && head[1] == 0x8b
    };
    let inner: Box<dyn Read + Send> = if gz {
        Box::new(MultiGzDecoder::new(raw))
    } else {
        Box::new(raw)
    };
    ReadStream::new(BufReader::new(inner), path.to_path_buf(), format)
}

/// Parses reads from any buffered source (used for in-memory input).
pub fn parse_reads<R: BufRead + Send + 'static>(
    reader: R,
    name: impl Into<PathBuf>,
    format: ReadFormat,
) -> Result<ReadStream, ReadsError> {
    ReadStream::new(Box::new(reader), name.into(), format)
}

/// Single-pass iterator over the records of one file.
pub struct ReadStream {
    reader: Box<dyn BufRead + Send>,
    path: PathBuf,
    format: ReadFormat,
    line_no: usize,
    // header line carried over from the previous FASTA record
    pending: Option<String>,
    buf: String,
    done: bool,
}

impl ReadStream {
    fn new<R: BufRead + Send + 'static>(
        reader: R,
        path: PathBuf,
        format: ReadFormat,
    ) -> Result<Self, ReadsError> {
        let mut stream = ReadStream {
            reader: Box::new(reader),
            path,
            format,
            line_no: 0,
            pending: None,
            buf: String::new(),
            done: false,
        };
        stream.detect()?;
        Ok(stream)
    }

    fn detect(&mut self) -> Result<(), ReadsError> {
        // skip leading blank lines and peek the first record marker
        loop {
            match self.next_line()? {
                None => {
                    self.done = true;
                    return Ok(());
                }
                Some(line) if line.trim().is_empty() => continue,
                Some(line) => {
                    let detected = match line.as_bytes()[0] {
                        b'>' => ReadFormat::Fasta,
                        b'@' => ReadFormat::Fastq,
                        _ => return Err(self.parse_err("expected '>' or '@' record header")),
                    };
                    if self.format != ReadFormat::Auto && self.format != detected {
                        return Err(self.parse_err("record header does not match requested format"));
                    }
                    self.format = detected;
                    self.pending = Some(line);
                    return Ok(());
                }
            }
        }
    }

    fn next_line(&mut self) -> Result<Option<String>, ReadsError> {
        self.buf.clear();
        let n = self
            .reader
            .read_line(&mut self.buf)
            .map_err(|source| ReadsError::Io {
                path: self.path.clone(),
                source,
            })?;
        if n == 0 {
            return Ok(None);
        }
        self.line_no += 1;
        let line = self.buf.trim_end_matches(['\n', '\r']).to_string();
        Ok(Some(line))
    }

    fn parse_err(&self, msg: &str) -> ReadsError {
        ReadsError::Parse {
            path: self.path.clone(),
            line: self.line_no,
            msg: msg.to_string(),
        }
    }

    fn record_id(header: &str) -> String {
        header[1..]
            .split_whitespace()
            .next()
            .unwrap_or("")
            .to_string()
    }

    fn next_fasta(&mut self) -> Result<Option<SeqRead>, ReadsError> {
        let Some(header) = self.pending.take() else {
            return Ok(None);
        };
        let id = Self::record_id(&header);
        let mut seq = Vec::new();
        while let Some(line) = self.next_line()? {
            if line.starts_with('>') {
                self.pending = Some(line);
                break;
            }
            seq.extend(line.trim().bytes().map(|b| b.to_ascii_uppercase()));
        }
        Ok(Some(SeqRead { id, seq }))
    }

    fn next_fastq(&mut self) -> Result<Option<SeqRead>, ReadsError> {
        let header = match self.pending.take() {
            Some(h) => h,
            None => loop {
                match self.next_line()? {
                    None => return Ok(None),
                    Some(l) if l.trim().is_empty() => continue,
                    Some(l) => break l,
                }
            },
        };
        if !header.starts_with('@') {
            return Err(self.parse_err("expected '@' record header"));
        }
        let header_line = self.line_no;
        let id = Self::record_id(&header);
        let seq = self
            .next_line()?
            .ok_or_else(|| self.parse_err("truncated record: missing sequence"))?;
        let plus = self
            .next_line()?
            .ok_or_else(|| self.parse_err("truncated record: missing '+' line"))?;
        if !plus.starts_with('+') {
            return Err(self.parse_err("expected '+' separator"));
        }
        let qual = self
            .next_line()?
            .ok_or_else(|| self.parse_err("truncated record: missing quality line"))?;
        if qual.len() != seq.len() {
            return Err(ReadsError::Parse {
                path: self.path.clone(),
                line: header_line,
                msg: format!(
                    "quality length {} does not match sequence length {}",
                    qual.len(),
                    seq.len()
                ),
            });
        }
        Ok(Some(SeqRead {
            id,
            seq: seq.bytes().map(|b| b.to_ascii_uppercase()).collect(),
        }))
    }
}

impl Iterator for ReadStream {
    type Item = Result<SeqRead, ReadsError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let res = match self.format {
            ReadFormat::Fastq => self.next_fastq(),
            _ => self.next_fasta(),
        };
        match res {
            Ok(Some(r)) => Some(Ok(r)),
            Ok(None) => {
                self.done = true;
                None
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}
