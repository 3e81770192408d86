//! Single-frame event-based double integral (EDI) deblurring and
//! event-driven high-frame-rate expansion.
//!
//! Per pixel, the blurred frame satisfies `ln B = ln L(f) + ln J(c)`, so the
//! sharp frame at the exposure center is `ln L(f) = ln B - ln J(c)`, and any
//! other instant follows from `ln L(t) = ln L(f) + c E(t)`.

use rayon::prelude::*;

use crate::error::Result;
use crate::events::EventIndex;
use crate::frames::FrameRecord;
use crate::imaging::{to_log_value, Domain, ImageBuffer};
use crate::integrals::{build_exposure_profile, log_double_integral, ExposureProfile};

/// Reconstructed sharp frame.
#[derive(Clone, Debug, PartialEq)]
pub struct LatentFrame {
    pub timestamp: f64,
    /// Unclamped log intensity.
    pub log_image: ImageBuffer,
    /// Linear intensity clamped to `[0, 1]`.
    pub image: ImageBuffer,
    pub c: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LatentSequence {
    pub frames: Vec<LatentFrame>,
    /// Index of the blurred frame each latent frame was integrated from.
    pub sources: Vec<usize>,
}

impl LatentSequence {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn append(&mut self, other: LatentSequence) {
        self.frames.extend(other.frames);
        self.sources.extend(other.sources);
    }
}

/// Maps a reconstructed log value back to linear intensity. A value equal to
/// the blurred log sample maps back to the blurred sample itself, so pixels
/// the reconstruction leaves untouched reproduce their input exactly (even
/// below the log floor).
pub(crate) fn relinearize(blurred: f64, blurred_log: f64, latent_log: f64) -> f64 {
    if latent_log == blurred_log {
        blurred
    } else {
        latent_log.exp().clamp(0.0, 1.0)
    }
}

pub(crate) fn assemble_latent(
    timestamp: f64,
    c: f64,
    width: usize,
    height: usize,
    log_values: Vec<f64>,
    linear_values: Vec<f64>,
) -> LatentFrame {
    LatentFrame {
        timestamp,
        log_image: ImageBuffer::new(width, height, log_values, Domain::Log)
            .expect("pixel count matches"),
        image: ImageBuffer::new(width, height, linear_values, Domain::Linear)
            .expect("pixel count matches"),
        c,
    }
}

/// Per-pixel exposure profiles of one frame, reusable across values of `c`.
pub struct EdiProblem<'a> {
    frame: &'a FrameRecord,
    profiles: Vec<ExposureProfile>,
    blurred_log: Vec<f64>,
}

impl<'a> EdiProblem<'a> {
    pub fn new(frame: &'a FrameRecord, index: &EventIndex) -> Self {
        let (w, h) = (frame.image.width(), frame.image.height());
        let profiles = (0..w * h)
            .into_par_iter()
            .map(|p| build_exposure_profile(index, (p % w, p / w), frame.center, frame.exposure))
            .collect();
        let blurred_log = frame
            .image
            .data()
            .iter()
            .map(|&v| to_log_value(v))
            .collect();
        Self {
            frame,
            profiles,
            blurred_log,
        }
    }

    pub fn frame(&self) -> &FrameRecord {
        self.frame
    }

    pub fn profiles(&self) -> &[ExposureProfile] {
        &self.profiles
    }

    pub fn deblur(&self, c: f64) -> Result<LatentFrame> {
        let log_values: Vec<f64> = self
            .profiles
            .par_iter()
            .zip(self.blurred_log.par_iter())
            .map(|(profile, &bl)| Ok(bl - log_double_integral(profile, c)?))
            .collect::<Result<_>>()?;
        let linear = log_values
            .iter()
            .zip(self.frame.image.data())
            .zip(&self.blurred_log)
            .map(|((&l, &b), &bl)| relinearize(b, bl, l))
            .collect();
        Ok(assemble_latent(
            self.frame.center,
            c,
            self.frame.image.width(),
            self.frame.image.height(),
            log_values,
            linear,
        ))
    }
}

/// Deblurs one frame: `ln L(f) = ln B - ln J(c)` per pixel.
pub fn edi_deblur(frame: &FrameRecord, index: &EventIndex, c: f64) -> Result<LatentFrame> {
    EdiProblem::new(frame, index).deblur(c)
}

/// Timestamps at which the expansion emits frames inside `(t_lo, t_hi]`: the
/// events are walked in time order, and a frame is emitted at the timestamp
/// of the event that brings the running count since the previous emission to
/// `events_per_frame`. Events sharing a timestamp are counted together.
pub fn emission_times(
    index: &EventIndex,
    (t_lo, t_hi): (f64, f64),
    events_per_frame: usize,
) -> Vec<f64> {
    assert!(events_per_frame >= 1, "events_per_frame must be at least 1");
    let times = index.global_times();
    let start = times.partition_point(|&t| t <= t_lo);
    let end = times.partition_point(|&t| t <= t_hi);
    let mut out = Vec::new();
    let mut count = 0usize;
    let mut i = start;
    while i < end {
        let t = times[i];
        let mut j = i;
        while j < end && times[j] == t {
            j += 1;
        }
        count += j - i;
        if count >= events_per_frame {
            out.push(t);
            count = 0;
        }
        i = j;
    }
    out
}

/// Expands a latent frame into a video over `(t_lo, t_hi]`, one frame per
/// `events_per_frame` sensor-wide events plus the anchor frame itself.
pub fn expand_video(
    latent: &LatentFrame,
    index: &EventIndex,
    window: (f64, f64),
    events_per_frame: usize,
) -> LatentSequence {
    expand_video_from(latent, None, index, window, events_per_frame, 0)
}

/// As [`expand_video`], with the blurred frame used to map unchanged pixels
/// back exactly and a source id recorded for each frame.
pub(crate) fn expand_video_from(
    latent: &LatentFrame,
    blurred: Option<&ImageBuffer>,
    index: &EventIndex,
    (t_lo, t_hi): (f64, f64),
    events_per_frame: usize,
    source: usize,
) -> LatentSequence {
    let f = latent.timestamp;
    debug_assert!(t_lo <= f && f <= t_hi);
    let mut stamps = emission_times(index, (t_lo, t_hi), events_per_frame);
    stamps.retain(|&t| t != f);
    let at = stamps.partition_point(|&t| t < f);
    stamps.insert(at, f);

    let (w, h) = (latent.image.width(), latent.image.height());
    let base_log = latent.log_image.data();
    let base_lin = latent.image.data();
    let c = latent.c;
    let frames = stamps
        .par_iter()
        .map(|&t| {
            if t == f {
                return latent.clone();
            }
            let log_values: Vec<f64> = (0..w * h)
                .map(|p| {
                    let n = index.events_between(p % w, p / w, f, t);
                    crate::integrals::log_latent_at(base_log[p], c, n)
                })
                .collect();
            let linear = log_values
                .iter()
                .enumerate()
                .map(|(p, &l)| {
                    if l == base_log[p] {
                        base_lin[p]
                    } else {
                        match blurred {
                            Some(b) => relinearize(b.data()[p], to_log_value(b.data()[p]), l),
                            None => l.exp().clamp(0.0, 1.0),
                        }
                    }
                })
                .collect();
            assemble_latent(t, c, w, h, log_values, linear)
        })
        .collect::<Vec<_>>();
    let sources = vec![source; frames.len()];
    LatentSequence { frames, sources }
}

/// Expansion windows for frames centered at `centers`: each frame covers
/// half the gap to each neighbor. A lone frame covers its exposure.
pub fn expansion_windows(centers: &[f64], exposure: f64) -> Vec<(f64, f64)> {
    let n = centers.len();
    (0..n)
        .map(|i| {
            let lo = if i > 0 {
                0.5 * (centers[i - 1] + centers[i])
            } else if n > 1 {
                centers[0] - 0.5 * (centers[1] - centers[0])
            } else {
                centers[0] - 0.5 * exposure
            };
            let hi = if i + 1 < n {
                0.5 * (centers[i] + centers[i + 1])
            } else if n > 1 {
                centers[n - 1] + 0.5 * (centers[n - 1] - centers[n - 2])
            } else {
                centers[0] + 0.5 * exposure
            };
            (lo, hi)
        })
        .collect()
}

/// Expands every latent frame over its window and concatenates the results.
pub fn expand_sequence(
    latents: &[LatentFrame],
    blurred: &[FrameRecord],
    index: &EventIndex,
    events_per_frame: usize,
) -> LatentSequence {
    let centers: Vec<f64> = latents.iter().map(|l| l.timestamp).collect();
    let exposure = blurred.first().map_or(0.0, |b| b.exposure);
    let windows = expansion_windows(&centers, exposure);
    let mut out = LatentSequence::default();
    for (i, (latent, window)) in latents.iter().zip(windows).enumerate() {
        let src = blurred.get(i).map(|b| &b.image);
        out.append(expand_video_from(
            latent,
            src,
            index,
            window,
            events_per_frame,
            i,
        ));
    }
    out
}
