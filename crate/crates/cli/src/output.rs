//! CSV, SVG and manifest writers. All float output goes through [`num`] so
//! repeated runs are byte-identical.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct Csv {
    columns: Vec<String>,
    comments: Vec<String>,
    rows: String,
}

impl Csv {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            comments: Vec::new(),
            rows: String::new(),
        }
    }

    pub fn comment(&mut self, line: &str) {
        self.comments.push(line.to_string());
    }

    pub fn row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push_str(&cells.join(","));
        self.rows.push('\n');
    }

    pub fn into_string(self) -> String {
        let mut out = format!("# columns: {}\n", self.columns.join(","));
        for c in &self.comments {
            out.push_str(&format!("# {c}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        out + &self.rows
    }
}

pub struct Svg {
    body: String,
    width: f64,
    height: f64,
    x_range: (f64, f64),
    y_range: (f64, f64),
}

const MARGIN: f64 = 40.0;

impl Svg {
    pub fn new(x_range: (f64, f64), y_range: (f64, f64), x_label: &str, y_label: &str) -> Self {
        let mut svg = Self {
            body: String::new(),
            width: 640.0,
            height: 480.0,
            x_range,
            y_range,
        };
        let (x0, y0) = (MARGIN, svg.height - MARGIN);
        let (x1, y1) = (svg.width - MARGIN, MARGIN);
        let _ = writeln!(
            svg.body,
            r#"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            x1 - x0,
            y0 - y1
        );
        let _ = writeln!(
            svg.body,
            r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#,
            svg.width / 2.0,
            svg.height - 8.0
        );
        let _ = writeln!(
            svg.body,
            r#"<text x="12" y="{}" transform="rotate(-90 12 {})" text-anchor="middle">{y_label}</text>"#,
            svg.height / 2.0,
            svg.height / 2.0
        );
        svg
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let (ax, bx) = self.x_range;
        let (ay, by) = self.y_range;
        let px = MARGIN + (x - ax) / (bx - ax) * (self.width - 2.0 * MARGIN);
        let py = self.height - MARGIN - (y - ay) / (by - ay) * (self.height - 2.0 * MARGIN);
        (px, py)
    }

    fn inside(&self, x: f64, y: f64) -> bool {
        x.is_finite() && y.is_finite() && x >= self.x_range.0 && x <= self.x_range.1 && y >= self.y_range.0 && y <= self.y_range.1
    }

    /// Breaks the line wherever a point leaves the frame.
    pub fn polyline(&mut self, points: &[[f64; 2]], color: &str, label: &str) {
        let mut run: Vec<String> = Vec::new();
        let flush = |run: &mut Vec<String>, body: &mut String| {
            if run.len() >= 2 {
                let _ = writeln!(
                    body,
                    r#"<polyline data-label="{label}" fill="none" stroke="{color}" points="{}"/>"#,
                    run.join(" ")
                );
            }
            run.clear();
        };
        for p in points {
            if self.inside(p[0], p[1]) {
                let (x, y) = self.map(p[0], p[1]);
                run.push(format!("{x:.2},{y:.2}"));
            } else {
                flush(&mut run, &mut self.body);
            }
        }
        flush(&mut run, &mut self.body);
    }

    pub fn marker(&mut self, x: f64, y: f64, label: &str) {
        if !self.inside(x, y) {
            return;
        }
        let (px, py) = self.map(x, y);
        let _ = writeln!(self.body, r#"<circle cx="{px:.2}" cy="{py:.2}" r="3" fill="black"/>"#);
        let _ = writeln!(
            self.body,
            r#"<text x="{:.2}" y="{:.2}" font-size="12">{label}</text>"#,
            px + 5.0,
            py - 5.0
        );
    }

    pub fn vline(&mut self, x: f64, label: &str) {
        if x < self.x_range.0 || x > self.x_range.1 {
            return;
        }
        let (px, top) = self.map(x, self.y_range.1);
        let (_, bottom) = self.map(x, self.y_range.0);
        let _ = writeln!(
            self.body,
            r#"<line x1="{px:.2}" y1="{top:.2}" x2="{px:.2}" y2="{bottom:.2}" stroke="gray" stroke-dasharray="4 3"/>"#
        );
        let _ = writeln!(self.body, r#"<text x="{:.2}" y="{:.2}" font-size="11">{label}</text>"#, px + 3.0, top + 12.0);
    }

    pub fn into_string(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n{}</svg>\n",
            self.width, self.height, self.width, self.height, self.body
        )
    }
}

#[derive(Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Value,
    pub tool_version: String,
    pub timestamp_unix: u64,
    pub input_sha256: String,
    pub outputs: Vec<String>,
}

/// Collects output files for one command run.
pub struct Run {
    dir: PathBuf,
    command: String,
    config: Value,
    inputs: Vec<u8>,
    outputs: Vec<String>,
}

impl Run {
    pub fn new(dir: &Path, command: &str, config: Value) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let inputs = serde_json::to_vec(&config)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            command: command.to_string(),
            config,
            inputs,
            outputs: Vec::new(),
        })
    }

    /// Adds raw input bytes (config or jet files) to the content hash.
    pub fn hash_input(&mut self, bytes: &[u8]) {
        self.inputs.extend_from_slice(bytes);
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(name.to_string());
        Ok(path)
    }

    pub fn finish(self) -> Result<PathBuf> {
        let manifest = RunManifest {
            command: self.command.clone(),
            config: self.config,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp_unix: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            input_sha256: format!("{:x}", Sha256::digest(&self.inputs)),
            outputs: self.outputs,
        };
        let path = self.dir.join(format!("{}.manifest.json", self.command));
        std::fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
        Ok(path)
    }
}
