use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use evdeblur::frames::format_manifest;
use evdeblur::imaging::write_pgm;
use evdeblur::ImageBuffer;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

pub fn create_dir(path: &Path) -> CliResult<()> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

/// Writes `frame_NNNN.pgm` files plus a `frames.txt` manifest into `dir`.
/// `header` lines go on top of the manifest as comments.
pub fn write_frame_dir<'a, I>(
    dir: &Path,
    frames: I,
    digits: usize,
    header: &[String],
) -> CliResult<PathBuf>
where
    I: IntoIterator<Item = (f64, &'a ImageBuffer)>,
{
    create_dir(dir)?;
    let mut entries = Vec::new();
    for (i, (t, img)) in frames.into_iter().enumerate() {
        let name = format!("frame_{i:0digits$}.pgm");
        write_pgm(&dir.join(&name), img)?;
        entries.push((t, name));
    }
    let mut text: String = header.iter().map(|h| format!("# {h}\n")).collect();
    text.push_str(&format_manifest(
        entries.iter().map(|(t, n)| (*t, n.as_str())),
    ));
    let manifest = dir.join("frames.txt");
    write_text(&manifest, &text)?;
    Ok(manifest)
}

/// The record every command leaves in its output directory.
#[derive(Serialize, Debug)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: Map<String, Value>,
    pub inputs: Map<String, Value>,
    pub outputs: Map<String, Value>,
    pub c_used: Option<f64>,
    pub c_estimated: Option<f64>,
    pub energy_trace: Option<String>,
    pub timing_seconds: f64,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config: Map::new(),
            inputs: Map::new(),
            outputs: Map::new(),
            c_used: None,
            c_estimated: None,
            energy_trace: None,
            timing_seconds: 0.0,
        }
    }

    pub fn config(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.config.insert(key.into(), value.into());
        self
    }

    pub fn input(&mut self, key: &str, path: &Path) -> &mut Self {
        self.inputs
            .insert(key.into(), path.display().to_string().into());
        self
    }

    pub fn output(&mut self, key: &str, path: &Path) -> &mut Self {
        self.outputs
            .insert(key.into(), path.display().to_string().into());
        self
    }

    pub fn finish(mut self, out_dir: &Path, elapsed: Duration) -> CliResult<()> {
        self.timing_seconds = elapsed.as_secs_f64();
        write_json(&out_dir.join("run_manifest.json"), &self)
    }
}
