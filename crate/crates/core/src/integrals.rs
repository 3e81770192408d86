//! Exact per-pixel event integrals.
//!
//! Within one exposure the signed event count `E(t)`, measured from the
//! frame center `f`, is a step function that jumps by the polarity of each
//! event. Every integral here is a finite sum over its constant pieces.

use crate::error::{Error, Result};
use crate::events::EventIndex;

/// Largest `c * |E|` accepted before exponentials are declared out of range.
pub const EXPONENT_LIMIT: f64 = 700.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub duration: f64,
    pub level: i64,
}

/// `E(t)` over `[f - T/2, f + T/2]` as time-ordered constant segments.
#[derive(Clone, Debug, PartialEq)]
pub struct ExposureProfile {
    segments: Vec<Segment>,
    exposure: f64,
}

impl ExposureProfile {
    /// Builds a profile from explicit segments. Zero-length segments are
    /// dropped.
    pub fn from_segments(exposure: f64, segments: impl IntoIterator<Item = Segment>) -> Self {
        Self {
            segments: segments.into_iter().filter(|s| s.duration > 0.0).collect(),
            exposure,
        }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn exposure(&self) -> f64 {
        self.exposure
    }

    pub fn max_abs_level(&self) -> i64 {
        self.segments
            .iter()
            .map(|s| s.level.abs())
            .max()
            .unwrap_or(0)
    }

    pub fn has_events(&self) -> bool {
        self.segments.iter().any(|s| s.level != 0)
    }

    fn check_range(&self, c: f64) -> Result<()> {
        let exponent = c.abs() * self.max_abs_level() as f64;
        if exponent > EXPONENT_LIMIT {
            return Err(Error::Range {
                exponent,
                limit: EXPONENT_LIMIT,
            });
        }
        Ok(())
    }
}

/// Builds the exposure profile of pixel `(x, y)` for a frame centered at `f`
/// with exposure `T`.
///
/// Levels follow the half-open event convention: an event at time `t_e`
/// belongs to the segment starting at `t_e`.
pub fn build_exposure_profile(
    index: &EventIndex,
    (x, y): (usize, usize),
    f: f64,
    exposure: f64,
) -> ExposureProfile {
    debug_assert!(exposure > 0.0);
    let pixel = index.resolution().offset(x, y);
    let lo = f - 0.5 * exposure;
    let hi = f + 0.5 * exposure;
    let mut level = index.cumulative_at(pixel, lo) - index.cumulative_at(pixel, f);
    let mut segments: Vec<Segment> = Vec::new();
    let mut start = lo;
    let push = |segments: &mut Vec<Segment>, duration: f64, level: i64| {
        if duration <= 0.0 {
            return;
        }
        match segments.last_mut() {
            Some(last) if last.level == level => last.duration += duration,
            _ => segments.push(Segment { duration, level }),
        }
    };
    for (t, sign) in index.window(x, y, lo, hi) {
        push(&mut segments, t - start, level);
        level += sign as i64;
        start = t;
    }
    push(&mut segments, hi - start, level);
    ExposureProfile { segments, exposure }
}

/// `J(c) = (1/T) * sum_k d_k * exp(c * E_k)`.
///
/// The sum is normalized by the total segment duration, so `J(0) == 1.0`
/// exactly.
pub fn double_integral(profile: &ExposureProfile, c: f64) -> Result<f64> {
    profile.check_range(c)?;
    let (mut num, mut den) = (0.0, 0.0);
    for s in profile.segments() {
        num += s.duration * (c * s.level as f64).exp();
        den += s.duration;
    }
    Ok(num / den)
}

/// `ln J(c)`, evaluated with the largest exponent factored out.
pub fn log_double_integral(profile: &ExposureProfile, c: f64) -> Result<f64> {
    profile.check_range(c)?;
    let segs = profile.segments();
    if segs.is_empty() {
        return Ok(0.0);
    }
    let peak = segs
        .iter()
        .map(|s| c * s.level as f64)
        .fold(f64::NEG_INFINITY, f64::max);
    let (mut num, mut den) = (0.0, 0.0);
    for s in segs {
        num += s.duration * (c * s.level as f64 - peak).exp();
        den += s.duration;
    }
    Ok(peak + (num / den).ln())
}

/// Exponentially weighted signed event sum at the frame center:
/// `M(f) = sum_j sigma_j * exp(-|f - t_j| * decay)` over events in the
/// exposure window.
pub fn event_sum_signal(
    index: &EventIndex,
    (x, y): (usize, usize),
    f: f64,
    exposure: f64,
    decay: f64,
) -> f64 {
    let lo = f - 0.5 * exposure;
    let hi = f + 0.5 * exposure;
    index
        .window(x, y, lo, hi)
        .map(|(t, s)| s as f64 * (-(f - t).abs() * decay).exp())
        .sum()
}

/// `L~(t) = L~(f) + c * E(t)`.
pub fn log_latent_at(center_log: f64, c: f64, signed_count: i64) -> f64 {
    center_log + c * signed_count as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::{Event, Polarity, Resolution};

    fn index_of(events: &[(f64, i32)]) -> EventIndex {
        EventIndex::from_events(
            Resolution::new(1, 1),
            events.iter().map(|&(t, s)| Event {
                t,
                x: 0,
                y: 0,
                polarity: Polarity::from_sign(s).unwrap(),
            }),
        )
        .unwrap()
    }

    fn segs(p: &ExposureProfile) -> Vec<(f64, i64)> {
        p.segments().iter().map(|s| (s.duration, s.level)).collect()
    }

    #[test]
    fn no_events_single_segment() {
        let p = build_exposure_profile(&index_of(&[]), (0, 0), 3.0, 0.2);
        assert_eq!(p.segments().len(), 1);
        assert_eq!(p.segments()[0].level, 0);
        assert!((p.segments()[0].duration - 0.2).abs() < 1e-15);
    }

    #[test]
    fn positive_event_after_center() {
        let p = build_exposure_profile(&index_of(&[(0.25, 1)]), (0, 0), 0.0, 1.0);
        assert_eq!(segs(&p), vec![(0.75, 0), (0.25, 1)]);
    }

    #[test]
    fn negative_event_before_center() {
        // timestamps are non-negative, so shift the f = 0 case by 0.5
        let p = build_exposure_profile(&index_of(&[(0.25, -1)]), (0, 0), 0.5, 1.0);
        assert_eq!(segs(&p), vec![(0.25, 1), (0.75, 0)]);
    }

    #[test]
    fn events_outside_window_shift_nothing() {
        let idx = index_of(&[(0.1, 1), (5.0, -1), (9.0, 1)]);
        let p = build_exposure_profile(&idx, (0, 0), 5.0, 2.0);
        // E(t) measured from f = 5: -1 event at 5.0 lies in (4, 5], so E = +1 before it
        assert_eq!(segs(&p), vec![(1.0, 1), (1.0, 0)]);
    }

    #[test]
    fn profile_level_at_center_is_zero() {
        let idx = index_of(&[(0.2, 1), (0.3, 1), (0.55, -1), (0.7, 1)]);
        let f = 0.5;
        let p = build_exposure_profile(&idx, (0, 0), f, 0.8);
        let mut t = f - 0.4;
        for s in p.segments() {
            if t <= f && f < t + s.duration {
                assert_eq!(s.level, 0);
            }
            t += s.duration;
        }
        let total: f64 = p.segments().iter().map(|s| s.duration).sum();
        assert!((total - 0.8).abs() <= 1e-12 * 0.8);
    }

    #[test]
    fn j_examples() {
        let p = ExposureProfile::from_segments(
            1.0,
            [
                Segment {
                    duration: 0.75,
                    level: 0,
                },
                Segment {
                    duration: 0.25,
                    level: 1,
                },
            ],
        );
        assert_eq!(double_integral(&p, 0.0).unwrap(), 1.0);
        assert!((double_integral(&p, std::f64::consts::LN_2).unwrap() - 1.25).abs() < 1e-15);
        let flat = ExposureProfile::from_segments(
            0.3,
            [Segment {
                duration: 0.3,
                level: 0,
            }],
        );
        for c in [0.0, 0.1, 0.5, 3.0] {
            assert_eq!(double_integral(&flat, c).unwrap(), 1.0);
            assert_eq!(log_double_integral(&flat, c).unwrap(), 0.0);
        }
        assert!(
            (log_double_integral(&p, 0.4).unwrap() - double_integral(&p, 0.4).unwrap().ln()).abs()
                < 1e-15
        );
    }

    #[test]
    fn j_overflow_guard() {
        let p = ExposureProfile::from_segments(
            1.0,
            [Segment {
                duration: 1.0,
                level: 1000,
            }],
        );
        assert!(matches!(double_integral(&p, 0.8), Err(Error::Range { .. })));
        assert!(matches!(
            log_double_integral(&p, 0.8),
            Err(Error::Range { .. })
        ));
        assert!(double_integral(&p, 0.6).unwrap().is_finite());
    }

    #[test]
    fn event_sum_signal_examples() {
        assert_eq!(event_sum_signal(&index_of(&[]), (0, 0), 1.0, 1.0, 2.0), 0.0);
        assert_eq!(
            event_sum_signal(&index_of(&[(1.0, 1)]), (0, 0), 1.0, 1.0, 2.0),
            1.0
        );
        let m = event_sum_signal(&index_of(&[(0.9, -1), (1.1, 1)]), (0, 0), 1.0, 1.0, 10.0);
        assert!(m.abs() < 1e-12, "{m}");
    }

    #[test]
    fn log_latent_examples() {
        assert_eq!(log_latent_at(0.0, 0.2, 0), 0.0);
        assert!((log_latent_at(-1.0, 0.2, 3) - (-0.4)).abs() < 1e-15);
        assert!((log_latent_at(-1.0, 0.2, -3) - (-1.6)).abs() < 1e-15);
    }

    #[test]
    fn splitting_a_segment_keeps_j() {
        let a = ExposureProfile::from_segments(
            1.0,
            [
                Segment {
                    duration: 0.5,
                    level: 2,
                },
                Segment {
                    duration: 0.5,
                    level: -1,
                },
            ],
        );
        let b = ExposureProfile::from_segments(
            1.0,
            [
                Segment {
                    duration: 0.25,
                    level: 2,
                },
                Segment {
                    duration: 0.25,
                    level: 2,
                },
                Segment {
                    duration: 0.5,
                    level: -1,
                },
            ],
        );
        for c in [0.05, 0.23, 0.9] {
            let (ja, jb) = (
                double_integral(&a, c).unwrap(),
                double_integral(&b, c).unwrap(),
            );
            assert!((ja - jb).abs() <= 1e-15 * ja);
        }
    }
}
