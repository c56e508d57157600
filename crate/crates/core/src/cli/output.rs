//! CSV formatting, output sinks, SVG polylines and the run manifest.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Rows joined with single newlines, including a trailing one.
#[derive(Debug, Default, Clone)]
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut c = Self::default();
        c.row(header.iter().map(|s| s.to_string()));
        c
    }

    pub fn row<I: IntoIterator<Item = String>>(&mut self, fields: I) {
        let line: Vec<String> = fields.into_iter().collect();
        self.buf.push_str(&line.join(","));
        self.buf.push('\n');
    }

    pub fn as_bytes(&self) -> &[u8] {
        self.buf.as_bytes()
    }
}

/// Writes to `path`, or to stdout when `path` is `None` or `-`.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) if p != Path::new("-") => std::fs::write(p, bytes)?,
        _ => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

/// Unit circle plus one polyline through `points` in the given order.
pub fn hull_svg(points: &[Complex64]) -> String {
    let extent = points.iter().fold(1.0f64, |m, p| m.max(p.re.abs()).max(p.im.abs())) * 1.05;
    let size = 800.0;
    let scale = size / (2.0 * extent);
    let map = |z: Complex64| ((z.re + extent) * scale, (extent - z.im) * scale);
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">\n"
    ));
    let (cx, cy) = map(Complex64::new(0.0, 0.0));
    s.push_str(&format!(
        "<circle cx=\"{cx:.3}\" cy=\"{cy:.3}\" r=\"{:.3}\" fill=\"none\" stroke=\"#999999\" stroke-width=\"1\"/>\n",
        scale
    ));
    let coords: Vec<String> = points
        .iter()
        .map(|&z| {
            let (x, y) = map(z);
            format!("{x:.3},{y:.3}")
        })
        .collect();
    s.push_str(&format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#1f4e99\" stroke-width=\"1\"/>\n",
        coords.join(" ")
    ));
    s.push_str("</svg>\n");
    s
}

/// One JSON line in `runs.log`.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub command: String,
    pub master_seed: Option<u64>,
    pub config_sha256: String,
    pub version: String,
    pub wall_time_s: f64,
    pub output: String,
    pub output_sha256: String,
    pub exit_code: i32,
}

/// `runs.log` beside the output file, or in the working directory for stdout.
pub fn default_log_path(out: Option<&Path>) -> PathBuf {
    match out {
        Some(p) if p != Path::new("-") => {
            p.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new(".")).join("runs.log")
        }
        _ => PathBuf::from("runs.log"),
    }
}

pub fn append_manifest(log: &Path, m: &RunManifest) -> Result<()> {
    let mut f = OpenOptions::new().create(true).append(true).open(log)?;
    let line = serde_json::to_string(m).map_err(|e| crate::Error::Io(e.to_string()))?;
    writeln!(f, "{line}")?;
    Ok(())
}
