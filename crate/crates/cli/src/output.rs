//! Output files and the run manifest.
//!
//! JSON floats are written with 17 significant digits (`{:.16e}`) so
//! identical runs produce byte-identical files.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use nanofock::constants::POLARIZABILITY_PER_LENGTH_UNIT;
use nanofock::device::{DerivedParams, ValidationReport};
use nanofock::liouvillian::SolverDiagnostics;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{CliError, Result};

pub const MANIFEST_SCHEMA: &str = "nanofock manifest v1";

struct FixedDigits<'a>(PrettyFormatter<'a>);

impl Formatter for FixedDigits<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedDigits(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("output types serialize to JSON");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

/// Run output directory; remembers what was written for the manifest.
pub struct OutputDir {
    pub path: PathBuf,
    pub written: Vec<String>,
}

impl OutputDir {
    pub fn create(path: &Path) -> Result<Self> {
        fs::create_dir_all(path).map_err(|e| CliError::io(path, e))?;
        Ok(Self {
            path: path.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.path.join(name);
        fs::write(&path, to_json(value)).map_err(|e| CliError::io(&path, e))?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn write_with<F>(&mut self, name: &str, body: F) -> Result<()>
    where
        F: FnOnce(&mut BufWriter<fs::File>) -> io::Result<()>,
    {
        let path = self.path.join(name);
        let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut w = BufWriter::new(file);
        body(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(&path, e))?;
        self.written.push(name.to_string());
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverRecord {
    pub label: String,
    pub mech_truncation: usize,
    pub residual: f64,
    pub diagnostics: SolverDiagnostics,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub schema: &'static str,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub arguments: Vec<String>,
    pub config_path: String,
    pub config_sha256: String,
    pub started: String,
    pub finished: String,
    pub threads: usize,
    /// Factor from `4πε₀Å²` to F·m used for polarizability inputs.
    pub polarizability_unit_f_m: f64,
    pub derived: Option<DerivedParams>,
    pub validation: Option<ValidationReport>,
    pub solver: Vec<SolverRecord>,
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
    pub exit_code: u8,
    pub error: Option<String>,
}

pub fn timestamp() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

impl Manifest {
    pub fn new(command: &str, config_path: &Path, config_sha256: &str) -> Self {
        Self {
            schema: MANIFEST_SCHEMA,
            tool: "nanofock",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            arguments: std::env::args().skip(1).collect(),
            config_path: config_path.display().to_string(),
            config_sha256: config_sha256.to_string(),
            started: timestamp(),
            finished: String::new(),
            threads: rayon::current_num_threads(),
            polarizability_unit_f_m: POLARIZABILITY_PER_LENGTH_UNIT,
            derived: None,
            validation: None,
            solver: Vec::new(),
            outputs: Vec::new(),
            warnings: Vec::new(),
            exit_code: 0,
            error: None,
        }
    }

    pub fn finish(mut self, out: &OutputDir, outcome: &Result<()>) -> Result<()> {
        self.finished = timestamp();
        self.outputs = out.written.clone();
        if let Err(e) = outcome {
            self.exit_code = e.exit_code();
            self.error = Some(e.to_string());
        }
        let path = out.path.join("manifest.json");
        fs::write(&path, to_json(&self)).map_err(|e| CliError::io(&path, e))
    }
}
