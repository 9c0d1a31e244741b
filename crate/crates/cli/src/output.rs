use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        }
    }
}

/// Destination for a command's artifacts: files `<out>/<name>.<ext>` or stdout.
pub struct Sink {
    out: Option<PathBuf>,
    formats: Vec<Format>,
}

impl Sink {
    pub fn new(out: Option<PathBuf>, formats: Vec<Format>) -> Result<Self> {
        if let Some(dir) = &out {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        Ok(Self { out, formats })
    }

    pub fn wants(&self, format: Format) -> bool {
        self.formats.contains(&format)
    }

    pub fn writes_files(&self) -> bool {
        self.out.is_some()
    }

    /// Emits `content` when `format` was requested.
    pub fn emit(&self, name: &str, format: Format, content: &str) -> Result<()> {
        if !self.wants(format) {
            return Ok(());
        }
        self.put(&format!("{name}.{}", format.extension()), content)
    }

    /// Auxiliary file written only alongside `--out`.
    pub fn attach(&self, file: &str, content: &str) -> Result<()> {
        if self.out.is_some() {
            self.put(file, content)?;
        }
        Ok(())
    }

    fn put(&self, file: &str, content: &str) -> Result<()> {
        match &self.out {
            Some(dir) => {
                let path = dir.join(file);
                fs::write(&path, content).with_context(|| format!("writing {}", path.display()))
            }
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(content.as_bytes())?;
                Ok(())
            }
        }
    }
}

/// CSV with a versioned `# hyperlune <schema> v1` comment line.
pub fn csv_table<T: Serialize>(schema: &str, rows: &[T]) -> Result<String> {
    let mut buf = format!("# hyperlune {schema} v1\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    Ok(String::from_utf8(buf)?)
}

#[derive(Serialize)]
struct Document<'a, T: Serialize, S: Serialize> {
    schema: String,
    summary: &'a S,
    rows: &'a [T],
}

pub fn json_table<T: Serialize, S: Serialize>(schema: &str, summary: &S, rows: &[T]) -> Result<String> {
    let doc = Document {
        schema: format!("hyperlune {schema} v1"),
        summary,
        rows,
    };
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}
