//! Tables, records and run manifests.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

pub const MANIFEST_SCHEMA: &str = "recur-manifest/1";

pub struct Table {
    pub schema: &'static str,
    /// One entry per column, e.g. `"ratio=nats per symbol"`.
    pub units: Vec<&'static str>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
    pub summary: Vec<(String, Value)>,
}

impl Table {
    pub fn new(schema: &'static str, columns: Vec<&'static str>, units: Vec<&'static str>) -> Self {
        Table { schema, units, columns, rows: Vec::new(), summary: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &str, v: impl Into<Value>) {
        self.summary.push((key.to_string(), v.into()));
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut head = format!("# {}\n# units: {}\n", self.schema, self.units.join("; "));
        for (k, v) in &self.summary {
            head.push_str(&format!("# {k}: {}\n", cell(v)));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r.iter().map(cell))?;
        }
        let body = String::from_utf8(w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?)?;
        Ok(head + &body)
    }

    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Out<'a> {
            schema: &'a str,
            units: &'a [&'a str],
            summary: Map<String, Value>,
            records: Vec<Map<String, Value>>,
        }
        let records = self
            .rows
            .iter()
            .map(|r| self.columns.iter().map(|c| c.to_string()).zip(r.iter().cloned()).collect())
            .collect();
        let summary = self.summary.iter().cloned().collect();
        Ok(serde_json::to_string(&Out { schema: self.schema, units: &self.units, summary, records })? + "\n")
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// A single structured result: `key: value` lines as text, one object as JSON.
pub struct Record {
    pub schema: &'static str,
    pub fields: Vec<(String, Value)>,
}

impl Record {
    pub fn new(schema: &'static str) -> Self {
        Record { schema, fields: Vec::new() }
    }

    pub fn set(&mut self, key: &str, v: impl Into<Value>) {
        self.fields.push((key.to_string(), v.into()));
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("# {}\n", self.schema);
        for (k, v) in &self.fields {
            s.push_str(&format!("{k}: {}\n", cell(v)));
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        let mut m = Map::new();
        m.insert("schema".into(), Value::from(self.schema));
        for (k, v) in &self.fields {
            m.insert(k.clone(), v.clone());
        }
        Ok(serde_json::to_string(&m)? + "\n")
    }
}

pub enum Doc {
    Table(Table),
    Record(Record),
    /// Preformatted text that already carries its schema line.
    Text { schema: &'static str, text: String },
}

impl Doc {
    pub fn schema(&self) -> &'static str {
        match self {
            Doc::Table(t) => t.schema,
            Doc::Record(r) => r.schema,
            Doc::Text { schema, .. } => schema,
        }
    }

    pub fn render(&self, json: bool) -> Result<String> {
        match (self, json) {
            (Doc::Table(t), false) => t.to_csv(),
            (Doc::Table(t), true) => t.to_json(),
            (Doc::Record(r), false) => Ok(r.to_text()),
            (Doc::Record(r), true) => r.to_json(),
            (Doc::Text { text, .. }, _) => Ok(text.clone()),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Serialize)]
struct OutputEntry {
    path: String,
    schema: String,
    bytes: usize,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema: &'static str,
    tool: &'static str,
    tool_version: &'static str,
    command: &'a str,
    argv: &'a [String],
    seed: Option<u64>,
    schemas: Vec<String>,
    wall_clock_seconds: f64,
    outputs: Vec<OutputEntry>,
    /// SHA-256 over the output digests in order; independent of timing.
    digest: String,
}

/// Collects the files written by one command and records them in one manifest.
pub struct Run {
    pub command: String,
    pub argv: Vec<String>,
    pub seed: Option<u64>,
    pub started: Instant,
    written: Vec<(PathBuf, String, String, usize)>,
}

impl Run {
    pub fn new(command: &str, argv: Vec<String>) -> Self {
        Run { command: command.to_string(), argv, seed: None, started: Instant::now(), written: Vec::new() }
    }

    pub fn write(&mut self, path: &Path, schema: &str, content: &str) -> Result<()> {
        fs::write(path, content).with_context(|| format!("writing {}", path.display()))?;
        self.written.push((path.to_path_buf(), schema.to_string(), sha256_hex(content.as_bytes()), content.len()));
        Ok(())
    }

    pub fn finish(self, manifest: &Path) -> Result<()> {
        let base = manifest.parent().map(Path::to_path_buf).unwrap_or_default();
        let outputs: Vec<OutputEntry> = self
            .written
            .iter()
            .map(|(p, schema, sha, bytes)| OutputEntry {
                path: p.strip_prefix(&base).unwrap_or(p).display().to_string(),
                schema: schema.clone(),
                bytes: *bytes,
                sha256: sha.clone(),
            })
            .collect();
        let joined: String = outputs.iter().map(|o| o.sha256.as_str()).collect::<Vec<_>>().join("\n");
        let mut schemas: Vec<String> = outputs.iter().map(|o| o.schema.clone()).collect();
        schemas.push(MANIFEST_SCHEMA.to_string());
        schemas.dedup();
        let m = Manifest {
            schema: MANIFEST_SCHEMA,
            tool: "recur",
            tool_version: env!("CARGO_PKG_VERSION"),
            command: &self.command,
            argv: &self.argv,
            seed: self.seed,
            schemas,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            digest: sha256_hex(joined.as_bytes()),
            outputs,
        };
        let text = serde_json::to_string(&m)? + "\n";
        fs::write(manifest, text).with_context(|| format!("writing {}", manifest.display()))?;
        Ok(())
    }
}

/// Manifest path for a single output file: `FILE.manifest.json`.
pub fn manifest_for(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}
