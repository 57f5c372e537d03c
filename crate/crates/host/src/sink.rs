use std::fs::File;
use std::io::{self, LineWriter, Write};
use std::path::Path;

use rtdevs_core::logging::{LogError, LogSink};

/// Writes each line followed by `\n` to any `io::Write`.
#[derive(Debug)]
pub struct WriterSink<W: Write> {
    out: W,
}

impl<W: Write> WriterSink<W> {
    pub fn new(out: W) -> Self {
        WriterSink { out }
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl<W: Write> LogSink for WriterSink<W> {
    fn write_line(&mut self, line: &str) -> Result<(), LogError> {
        writeln!(self.out, "{line}").map_err(|e| LogError(e.to_string()))
    }
}

pub type StdoutSink = WriterSink<LineWriter<io::Stdout>>;
pub type FileSink = WriterSink<LineWriter<File>>;

pub fn stdout_sink() -> StdoutSink {
    WriterSink::new(LineWriter::new(io::stdout()))
}

/// Creates (or truncates) `path`.
pub fn file_sink(path: &Path) -> io::Result<FileSink> {
    Ok(WriterSink::new(LineWriter::new(File::create(path)?)))
}
