//! Synthetic event streams and blurred frames from sharp high-rate video.
//!
//! Each pixel keeps a reference log intensity. Whenever the log intensity
//! of a new sharp frame differs from the reference by at least `c`, an event
//! of that sign is emitted and the reference moves by `c`, repeating until
//! the difference falls below `c`. Event times are placed where the log
//! intensity, interpolated linearly between the two sharp frames, crosses
//! the new reference. Blurred frames are linear-domain averages of
//! consecutive sharp frames, paired with the middle frame as ground truth.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::events::{Event, EventIndex, Polarity, Resolution};
use crate::frames::FrameRecord;
use crate::imaging::{Domain, ImageBuffer, LOG_FLOOR};

/// Relative slack on the threshold comparison, absorbing rounding in the
/// reference update.
const THRESHOLD_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SceneKind {
    TranslatingBar,
    DriftingSinusoid,
    TwoLevelChecker,
}

impl fmt::Display for SceneKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SceneKind::TranslatingBar => "translating-bar",
            SceneKind::DriftingSinusoid => "drifting-sinusoid",
            SceneKind::TwoLevelChecker => "two-level-checker",
        })
    }
}

impl FromStr for SceneKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "translating-bar" => Ok(SceneKind::TranslatingBar),
            "drifting-sinusoid" => Ok(SceneKind::DriftingSinusoid),
            "two-level-checker" => Ok(SceneKind::TwoLevelChecker),
            other => Err(format!("unknown scene `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SceneSpec {
    pub kind: SceneKind,
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    /// Pixels per sharp frame.
    pub speed: f64,
    pub seed: u64,
}

/// Sharp frames with their timestamps.
#[derive(Clone, Debug, PartialEq)]
pub struct SharpSequence {
    pub frames: Vec<ImageBuffer>,
    pub timestamps: Vec<f64>,
}

impl SharpSequence {
    /// Frame `k` at `k / rate` seconds.
    pub fn at_rate(frames: Vec<ImageBuffer>, rate: f64) -> Self {
        let timestamps = (0..frames.len()).map(|k| k as f64 / rate).collect();
        Self { frames, timestamps }
    }

    pub fn resolution(&self) -> Option<Resolution> {
        self.frames
            .first()
            .map(|f| Resolution::new(f.width(), f.height()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub c_true: f64,
    /// Sharp frame rate in Hz.
    pub rate: f64,
    /// Sharp frames averaged per blurred frame; odd.
    pub blur_span: usize,
    pub floor: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            c_true: 0.23,
            rate: 240.0,
            blur_span: 11,
            floor: LOG_FLOOR,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c_true > 0.0) {
            return Err(Error::Validation(format!(
                "c_true {} must be positive",
                self.c_true
            )));
        }
        if !(self.rate > 0.0) {
            return Err(Error::Validation(format!(
                "frame rate {} must be positive",
                self.rate
            )));
        }
        if self.blur_span == 0 || self.blur_span.is_multiple_of(2) {
            return Err(Error::Validation(format!(
                "blur span {} must be odd and at least 1",
                self.blur_span
            )));
        }
        if !(self.floor > 0.0) {
            return Err(Error::Validation("log floor must be positive".into()));
        }
        Ok(())
    }
}

/// Fraction of the pixel column `[j, j + 1)` covered by `[start, start + len)`
/// on a circle of circumference `period`.
fn wrapped_coverage(j: f64, start: f64, len: f64, period: f64) -> f64 {
    let s = start.rem_euclid(period);
    let mut cov = 0.0;
    for shift in [-period, 0.0, period] {
        let (a, b) = (s + shift, s + shift + len);
        cov += (b.min(j + 1.0) - a.max(j)).max(0.0);
    }
    cov.min(1.0)
}

/// Deterministic synthetic scene; intensities stay within `[LOG_FLOOR, 1]`.
///
/// * translating bar: a vertical bar, brighter toward the bottom, on a dark
///   background, moving `speed` pixels per frame to the right (wrapping);
/// * drifting sinusoid: an oriented grating in `[0.1, 0.9]` drifting across
///   its stripes;
/// * two-level checker: 0.2 / 0.8 squares translating horizontally.
///
/// Fractional positions are box-filtered over each pixel.
pub fn make_test_scene(spec: &SceneSpec) -> Vec<ImageBuffer> {
    let (w, h) = (spec.width, spec.height);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let hf = (h.max(2) - 1) as f64;
    match spec.kind {
        SceneKind::TranslatingBar => {
            let bar = (w / 8).max(2) as f64;
            let x0 = (w / 4) as f64;
            (0..spec.frames)
                .map(|k| {
                    let pos = x0 + k as f64 * spec.speed;
                    ImageBuffer::from_fn(w, h, Domain::Linear, |x, y| {
                        let fg = 0.6 + 0.35 * y as f64 / hf;
                        let bg = 0.1 - 0.04 * y as f64 / hf;
                        let cov = wrapped_coverage(x as f64, pos, bar, w as f64);
                        bg + cov * (fg - bg)
                    })
                })
                .collect()
        }
        SceneKind::DriftingSinusoid => {
            let theta = rng.gen_range(0.0..PI);
            let phase = rng.gen_range(0.0..2.0 * PI);
            let period = (w.max(h) as f64 / 4.0).max(4.0);
            (0..spec.frames)
                .map(|k| {
                    ImageBuffer::from_fn(w, h, Domain::Linear, |x, y| {
                        let u =
                            x as f64 * theta.cos() + y as f64 * theta.sin() - k as f64 * spec.speed;
                        0.5 + 0.4 * (2.0 * PI * u / period + phase).sin()
                    })
                })
                .collect()
        }
        SceneKind::TwoLevelChecker => {
            let size = (w.min(h) / 8).max(2) as f64;
            let offset = rng.gen_range(0.0..size);
            (0..spec.frames)
                .map(|k| {
                    let shift = offset + k as f64 * spec.speed;
                    ImageBuffer::from_fn(w, h, Domain::Linear, |x, y| {
                        let row_parity = ((y as f64 / size).floor() as i64).rem_euclid(2);
                        // coverage of the "bright" columns in this row
                        let period = 2.0 * size;
                        let start = shift + row_parity as f64 * size;
                        let cov = wrapped_coverage(
                            (x as f64 - start).rem_euclid(period),
                            0.0,
                            size,
                            period,
                        );
                        0.2 + 0.6 * cov
                    })
                })
                .collect()
        }
    }
}

fn check_sequence(seq: &SharpSequence) -> Result<Resolution> {
    let res = seq
        .resolution()
        .ok_or_else(|| Error::Validation("sharp sequence is empty".into()))?;
    if seq.timestamps.len() != seq.frames.len() {
        return Err(Error::Validation(
            "one timestamp per sharp frame required".into(),
        ));
    }
    if seq.timestamps.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Validation(
            "sharp frames must be strictly time ordered".into(),
        ));
    }
    if seq
        .frames
        .iter()
        .any(|f| f.width() != res.width || f.height() != res.height)
    {
        return Err(Error::Validation("sharp frames differ in size".into()));
    }
    Ok(res)
}

/// Emits events for every pixel of a sharp sequence.
pub fn simulate_events(seq: &SharpSequence, config: &SimConfig) -> Result<EventIndex> {
    config.validate()?;
    let res = check_sequence(seq)?;
    let c = config.c_true;
    let mut clamped = 0usize;
    let mut events = Vec::new();
    for p in 0..res.pixel_count() {
        let (x, y) = (p % res.width, p / res.width);
        let logs: Vec<f64> = seq
            .frames
            .iter()
            .map(|f| {
                let v = f.data()[p];
                if v < config.floor {
                    clamped += 1;
                }
                v.max(config.floor).ln()
            })
            .collect();
        // the reference is base + c * steps, recomputed rather than accumulated
        let base = logs[0];
        let mut steps: i64 = 0;
        for k in 1..logs.len() {
            let (l0, l1) = (logs[k - 1], logs[k]);
            let (t0, t1) = (seq.timestamps[k - 1], seq.timestamps[k]);
            loop {
                let diff = l1 - (base + c * steps as f64);
                if diff.abs() < c * (1.0 - THRESHOLD_SLACK) {
                    break;
                }
                let sign = if diff > 0.0 { 1 } else { -1 };
                steps += sign;
                let level = base + c * steps as f64;
                let frac = ((level - l0) / (l1 - l0)).clamp(0.0, 1.0);
                events.push(Event {
                    t: t0 + frac * (t1 - t0),
                    x,
                    y,
                    polarity: Polarity::from_sign(sign as i32).expect("sign is +-1"),
                });
            }
        }
    }
    if clamped > 0 {
        log::warn!(
            "{clamped} samples below the log floor {} were clamped",
            config.floor
        );
    }
    EventIndex::from_events(res, events)
}

/// Blurred frames with their ground truth.
#[derive(Clone, Debug, PartialEq)]
pub struct BlurredSet {
    pub frames: Vec<FrameRecord>,
    pub ground_truth: Vec<ImageBuffer>,
}

/// Averages consecutive groups of `blur_span` sharp frames.
pub fn simulate_blur(seq: &SharpSequence, config: &SimConfig) -> Result<BlurredSet> {
    config.validate()?;
    let res = check_sequence(seq)?;
    let span = config.blur_span;
    if seq.frames.len() < span {
        return Err(Error::Validation(format!(
            "{} sharp frames cannot fill a blur span of {span}",
            seq.frames.len()
        )));
    }
    // the sequence's own frame spacing wins over the configured rate
    let period = match seq.timestamps.len() {
        1 => 1.0 / config.rate,
        n => (seq.timestamps[n - 1] - seq.timestamps[0]) / (n - 1) as f64,
    };
    let exposure = span as f64 * period;
    let count = seq.frames.len() / span;
    let mut frames = Vec::with_capacity(count);
    let mut ground_truth = Vec::with_capacity(count);
    for j in 0..count {
        let group = &seq.frames[j * span..(j + 1) * span];
        // averaged as offsets from the first frame, so unchanged pixels
        // average to exactly their value
        let base = group[0].data();
        let mut acc = vec![0.0; res.pixel_count()];
        for f in &group[1..] {
            for ((a, v), b) in acc.iter_mut().zip(f.data()).zip(base) {
                *a += v - b;
            }
        }
        let mean = acc
            .into_iter()
            .zip(base)
            .map(|(s, b)| b + s / span as f64)
            .collect();
        let mid = j * span + span / 2;
        frames.push(FrameRecord::new(
            seq.timestamps[mid],
            exposure,
            ImageBuffer::linear(res.width, res.height, mean)?,
        )?);
        ground_truth.push(seq.frames[mid].clone());
    }
    Ok(BlurredSet {
        frames,
        ground_truth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_frame(a: f64, b: f64) -> SharpSequence {
        SharpSequence::at_rate(
            vec![
                ImageBuffer::linear(1, 1, vec![a]).unwrap(),
                ImageBuffer::linear(1, 1, vec![b]).unwrap(),
            ],
            100.0,
        )
    }

    fn cfg(c: f64) -> SimConfig {
        SimConfig {
            c_true: c,
            ..Default::default()
        }
    }

    #[test]
    fn static_scene_is_silent() {
        let spec = SceneSpec {
            kind: SceneKind::TranslatingBar,
            width: 16,
            height: 8,
            frames: 12,
            speed: 0.0,
            seed: 1,
        };
        let seq = SharpSequence::at_rate(make_test_scene(&spec), 240.0);
        assert!(simulate_events(&seq, &cfg(0.1)).unwrap().is_empty());
    }

    #[test]
    fn doubling_fires_once_at_ln2() {
        let idx = simulate_events(&two_frame(0.25, 0.5), &cfg(std::f64::consts::LN_2)).unwrap();
        assert_eq!(idx.timeline(0, 0).collect::<Vec<_>>(), vec![(0.01, 1)]);
    }

    #[test]
    fn doubling_fires_twice_at_half_ln2() {
        let idx =
            simulate_events(&two_frame(0.25, 0.5), &cfg(std::f64::consts::LN_2 / 2.0)).unwrap();
        let tl: Vec<_> = idx.timeline(0, 0).collect();
        assert_eq!(tl.len(), 2);
        assert!(tl.iter().all(|&(_, s)| s == 1));
        assert!((tl[0].0 - 0.005).abs() < 1e-12);
    }

    #[test]
    fn residual_below_threshold_at_end() {
        let spec = SceneSpec {
            kind: SceneKind::DriftingSinusoid,
            width: 12,
            height: 10,
            frames: 30,
            speed: 0.7,
            seed: 3,
        };
        let seq = SharpSequence::at_rate(make_test_scene(&spec), 240.0);
        let c = 0.15;
        let idx = simulate_events(&seq, &cfg(c)).unwrap();
        assert!(!idx.is_empty());
        let last = seq.frames.last().unwrap();
        for y in 0..10 {
            for x in 0..12 {
                let n: i32 = idx.timeline(x, y).map(|(_, s)| s).sum();
                let change = last.get(x, y).ln() - seq.frames[0].get(x, y).ln();
                assert!((change - c * n as f64).abs() < c, "({x}, {y})");
            }
        }
    }

    #[test]
    fn bar_offsets_by_speed() {
        let spec = SceneSpec {
            kind: SceneKind::TranslatingBar,
            width: 64,
            height: 64,
            frames: 5,
            speed: 1.0,
            seed: 0,
        };
        let frames = make_test_scene(&spec);
        for k in 1..5 {
            for y in [0, 31, 63] {
                for x in 0..64 {
                    assert_eq!(frames[k].get((x + k) % 64, y), frames[0].get(x, y));
                }
            }
        }
        let bright: usize = (0..64).filter(|&x| frames[0].get(x, 10) > 0.5).count();
        assert_eq!(bright, 8);
    }

    #[test]
    fn sinusoid_bounded() {
        let spec = SceneSpec {
            kind: SceneKind::DriftingSinusoid,
            width: 20,
            height: 20,
            frames: 6,
            speed: 1.3,
            seed: 9,
        };
        for f in make_test_scene(&spec) {
            assert!(f.data().iter().all(|&v| (0.1..=0.9).contains(&v)));
        }
    }

    #[test]
    fn checker_two_levels_at_integer_shift() {
        let spec = SceneSpec {
            kind: SceneKind::TwoLevelChecker,
            width: 16,
            height: 16,
            frames: 3,
            speed: 2.0,
            seed: 0,
        };
        let frames = make_test_scene(&spec);
        assert!(frames
            .iter()
            .all(|f| f.data().iter().all(|&v| (0.2..=0.8).contains(&v))));
        let seq = SharpSequence::at_rate(frames, 240.0);
        assert!(!simulate_events(&seq, &cfg(0.3)).unwrap().is_empty());
    }

    #[test]
    fn blur_span_one_is_identity() {
        let seq = two_frame(0.3, 0.6);
        let set = simulate_blur(
            &seq,
            &SimConfig {
                blur_span: 1,
                ..cfg(0.2)
            },
        )
        .unwrap();
        assert_eq!(set.frames.len(), 2);
        assert_eq!(set.frames[1].image, seq.frames[1]);
        assert!((set.frames[1].exposure - 1.0 / 100.0).abs() < 1e-15);
        assert_eq!(set.frames[1].center, 0.01);
    }

    #[test]
    fn blur_averages_and_centers() {
        let frames: Vec<ImageBuffer> = (0..22)
            .map(|k| ImageBuffer::linear(1, 1, vec![k as f64 / 32.0]).unwrap())
            .collect();
        let seq = SharpSequence::at_rate(frames, 110.0);
        let set = simulate_blur(&seq, &cfg(0.2)).unwrap();
        assert_eq!(set.frames.len(), 2);
        assert_eq!(set.frames[0].image.data()[0], 5.0 / 32.0);
        assert_eq!(set.ground_truth[1].data()[0], 16.0 / 32.0);
        assert_eq!(set.frames[1].center, 16.0 / 110.0);
        assert!((set.frames[0].exposure - 0.1).abs() < 1e-15);
    }

    #[test]
    fn constant_sequence_blurs_to_itself() {
        let img = ImageBuffer::filled(3, 3, 0.4, Domain::Linear);
        let seq = SharpSequence::at_rate(vec![img.clone(); 11], 240.0);
        let set = simulate_blur(&seq, &SimConfig::default()).unwrap();
        assert_eq!(set.frames[0].image, img);
    }

    #[test]
    fn invalid_configs() {
        let seq = two_frame(0.3, 0.6);
        assert!(simulate_blur(
            &seq,
            &SimConfig {
                blur_span: 2,
                ..cfg(0.2)
            }
        )
        .is_err());
        assert!(simulate_blur(
            &seq,
            &SimConfig {
                blur_span: 3,
                ..cfg(0.2)
            }
        )
        .is_err());
        assert!(simulate_events(&seq, &cfg(0.0)).is_err());
    }
}
