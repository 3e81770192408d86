//! Intensity frames and the `t filename` frame manifest.
//!
//! By default a manifest timestamp is the exposure midpoint `f`; with
//! [`TimestampConvention::ExposureStart`] it marks the start of exposure and
//! `f = t + T/2`.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::events::{EventIndex, Resolution};
use crate::imaging::{read_pgm, ImageBuffer};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TimestampConvention {
    #[default]
    Midpoint,
    ExposureStart,
}

/// One blurred intensity frame: exposure window `[f - T/2, f + T/2]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameRecord {
    pub center: f64,
    pub exposure: f64,
    pub image: ImageBuffer,
}

impl FrameRecord {
    pub fn new(center: f64, exposure: f64, image: ImageBuffer) -> Result<Self> {
        if !(exposure > 0.0) || !exposure.is_finite() {
            return Err(Error::Validation(format!(
                "exposure {exposure} must be positive"
            )));
        }
        if !center.is_finite() {
            return Err(Error::Validation(format!(
                "frame timestamp {center} is not finite"
            )));
        }
        Ok(Self {
            center,
            exposure,
            image,
        })
    }

    pub fn exposure_start(&self) -> f64 {
        self.center - 0.5 * self.exposure
    }

    pub fn exposure_end(&self) -> f64 {
        self.center + 0.5 * self.exposure
    }

    pub fn resolution(&self) -> Resolution {
        Resolution::new(self.image.width(), self.image.height())
    }
}

/// Checks frames against an event index. Returns warnings for exposure
/// windows that overhang the event stream; dimension mismatches are errors.
pub fn check_frames(frames: &[FrameRecord], index: &EventIndex) -> Result<Vec<String>> {
    let mut warnings = Vec::new();
    for (i, fr) in frames.iter().enumerate() {
        if fr.resolution() != index.resolution() {
            let r = index.resolution();
            return Err(Error::DimensionMismatch {
                left_w: fr.image.width(),
                left_h: fr.image.height(),
                right_w: r.width,
                right_h: r.height,
            });
        }
        if let Some((t0, t1)) = index.time_span() {
            if fr.exposure_start() < t0 || fr.exposure_end() > t1 {
                warnings.push(format!(
                    "frame {i}: exposure [{}, {}] overhangs event span [{t0}, {t1}]",
                    fr.exposure_start(),
                    fr.exposure_end()
                ));
            }
        }
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(warnings)
}

/// One parsed manifest line.
#[derive(Clone, Debug, PartialEq)]
pub struct ManifestEntry {
    pub timestamp: f64,
    pub path: PathBuf,
}

/// Parses manifest text; relative file names resolve against `base_dir`.
pub fn parse_manifest_entries(source: &str, base_dir: &Path) -> Result<Vec<ManifestEntry>> {
    let mut entries: Vec<ManifestEntry> = Vec::new();
    for (lineno, raw) in source.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (t, name) = line
            .split_once(char::is_whitespace)
            .ok_or_else(|| Error::Parse {
                line: lineno + 1,
                reason: "expected `t filename`".into(),
            })?;
        let timestamp: f64 = t.parse().map_err(|_| Error::Parse {
            line: lineno + 1,
            reason: format!("bad timestamp `{t}`"),
        })?;
        if !timestamp.is_finite() {
            return Err(Error::Parse {
                line: lineno + 1,
                reason: format!("timestamp `{t}` is not finite"),
            });
        }
        if let Some(prev) = entries.last() {
            if timestamp <= prev.timestamp {
                return Err(Error::Validation(format!(
                    "line {}: non-monotonic timestamps ({} after {})",
                    lineno + 1,
                    timestamp,
                    prev.timestamp
                )));
            }
        }
        entries.push(ManifestEntry {
            timestamp,
            path: base_dir.join(name.trim()),
        });
    }
    Ok(entries)
}

/// Parses a frame manifest and loads its images.
pub fn parse_frame_manifest(
    source: &str,
    base_dir: &Path,
    exposure: f64,
    convention: TimestampConvention,
) -> Result<Vec<FrameRecord>> {
    if !(exposure > 0.0) {
        return Err(Error::Validation(format!(
            "exposure {exposure} must be positive"
        )));
    }
    let entries = parse_manifest_entries(source, base_dir)?;
    let mut frames: Vec<FrameRecord> = Vec::with_capacity(entries.len());
    for entry in entries {
        let image = read_pgm(&entry.path)?;
        if let Some(first) = frames.first() {
            if !first.image.same_size(&image) {
                return Err(Error::Image {
                    path: entry.path,
                    reason: format!(
                        "inconsistent resolution {}x{} (expected {}x{})",
                        image.width(),
                        image.height(),
                        first.image.width(),
                        first.image.height()
                    ),
                });
            }
        }
        let center = match convention {
            TimestampConvention::Midpoint => entry.timestamp,
            TimestampConvention::ExposureStart => entry.timestamp + 0.5 * exposure,
        };
        frames.push(FrameRecord::new(center, exposure, image)?);
    }
    Ok(frames)
}

pub fn load_frame_manifest(
    path: &Path,
    exposure: f64,
    convention: TimestampConvention,
) -> Result<Vec<FrameRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_frame_manifest(&text, base, exposure, convention)
}

/// Exposure declared by a `# exposure <seconds>` comment line, if any.
pub fn manifest_exposure(source: &str) -> Option<f64> {
    source.lines().find_map(|line| {
        let rest = line.trim().strip_prefix('#')?.trim();
        let value = rest.strip_prefix("exposure")?.trim();
        value.parse().ok()
    })
}

/// Formats manifest lines `t filename`.
pub fn format_manifest<'a, I>(entries: I) -> String
where
    I: IntoIterator<Item = (f64, &'a str)>,
{
    let mut out = String::new();
    for (t, name) in entries {
        out.push_str(&format!("{t} {name}\n"));
    }
    out
}
