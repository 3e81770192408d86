//! Event streams: parsing, validation and per-pixel time indexing.
//!
//! An events file holds one event per line as `t x y p`, with `t` in seconds
//! and `p` either `0`/`1` or `-1`/`+1`. Lines starting with `#` are comments.
//! Lines need not be globally time ordered; each pixel's timeline is sorted
//! on ingestion (stable, so equal timestamps keep their file order).

use std::fmt::Write as _;
use std::io::Write;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn sign(self) -> i32 {
        match self {
            Polarity::Positive => 1,
            Polarity::Negative => -1,
        }
    }

    pub fn from_sign(sign: i32) -> Option<Self> {
        match sign {
            1 => Some(Polarity::Positive),
            -1 => Some(Polarity::Negative),
            _ => None,
        }
    }

    /// Accepts both the `0/1` and the `-1/+1` encodings.
    fn from_token(token: &str) -> Option<Self> {
        match token {
            "1" | "+1" => Some(Polarity::Positive),
            "0" | "-1" => Some(Polarity::Negative),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Event {
    pub t: f64,
    pub x: usize,
    pub y: usize,
    pub polarity: Polarity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Resolution {
    pub width: usize,
    pub height: usize,
}

impl Resolution {
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height }
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x < self.width && y < self.height
    }

    pub fn offset(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }
}

/// One pixel's events, time ascending, with a running polarity sum so that
/// range queries are two binary searches.
#[derive(Clone, Debug, Default)]
struct Timeline {
    times: Vec<f64>,
    signs: Vec<i8>,
    // cumulative[k] = sum of signs[..k]
    cumulative: Vec<i64>,
}

impl Timeline {
    fn finish(&mut self) {
        let mut order: Vec<usize> = (0..self.times.len()).collect();
        order.sort_by(|&a, &b| self.times[a].total_cmp(&self.times[b]));
        self.times = order.iter().map(|&i| self.times[i]).collect();
        self.signs = order.iter().map(|&i| self.signs[i]).collect();
        self.cumulative = Vec::with_capacity(self.times.len() + 1);
        let mut acc = 0i64;
        self.cumulative.push(acc);
        for &s in &self.signs {
            acc += s as i64;
            self.cumulative.push(acc);
        }
    }

    /// Number of events with timestamp <= t.
    fn count_upto(&self, t: f64) -> usize {
        self.times.partition_point(|&s| s <= t)
    }

    /// Signed polarity sum over events with timestamp <= t.
    fn cumulative_at(&self, t: f64) -> i64 {
        self.cumulative[self.count_upto(t)]
    }
}

/// Immutable per-pixel index of an event stream.
#[derive(Clone, Debug)]
pub struct EventIndex {
    resolution: Resolution,
    timelines: Vec<Timeline>,
    // every event timestamp over the whole sensor, ascending
    global_times: Vec<f64>,
}

impl EventIndex {
    pub fn empty(resolution: Resolution) -> Self {
        let mut timelines = vec![Timeline::default(); resolution.pixel_count()];
        timelines.iter_mut().for_each(Timeline::finish);
        Self {
            resolution,
            timelines,
            global_times: Vec::new(),
        }
    }

    pub fn from_events<I>(resolution: Resolution, events: I) -> Result<Self>
    where
        I: IntoIterator<Item = Event>,
    {
        let mut timelines = vec![Timeline::default(); resolution.pixel_count()];
        let mut global_times = Vec::new();
        for ev in events {
            if !resolution.contains(ev.x, ev.y) {
                return Err(Error::Validation(format!(
                    "event at ({}, {}) outside {}x{} sensor",
                    ev.x, ev.y, resolution.width, resolution.height
                )));
            }
            if !ev.t.is_finite() || ev.t < 0.0 {
                return Err(Error::Validation(format!(
                    "event timestamp {} is not a non-negative number",
                    ev.t
                )));
            }
            let tl = &mut timelines[resolution.offset(ev.x, ev.y)];
            tl.times.push(ev.t);
            tl.signs.push(ev.polarity.sign() as i8);
            global_times.push(ev.t);
        }
        timelines.iter_mut().for_each(Timeline::finish);
        global_times.sort_by(f64::total_cmp);
        Ok(Self {
            resolution,
            timelines,
            global_times,
        })
    }

    pub fn resolution(&self) -> Resolution {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.global_times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.global_times.is_empty()
    }

    /// First and last event timestamps, if any events exist.
    pub fn time_span(&self) -> Option<(f64, f64)> {
        Some((*self.global_times.first()?, *self.global_times.last()?))
    }

    /// All event timestamps on the sensor, ascending.
    pub fn global_times(&self) -> &[f64] {
        &self.global_times
    }

    /// `(t, sign)` pairs for one pixel, time ascending.
    pub fn timeline(&self, x: usize, y: usize) -> impl Iterator<Item = (f64, i32)> + '_ {
        let tl = &self.timelines[self.resolution.offset(x, y)];
        tl.times
            .iter()
            .zip(tl.signs.iter())
            .map(|(&t, &s)| (t, s as i32))
    }

    /// Events of one pixel with timestamps in `(t0, t1]`.
    pub fn window(
        &self,
        x: usize,
        y: usize,
        t0: f64,
        t1: f64,
    ) -> impl Iterator<Item = (f64, i32)> + '_ {
        let tl = &self.timelines[self.resolution.offset(x, y)];
        let lo = tl.count_upto(t0);
        let hi = tl.count_upto(t1).max(lo);
        tl.times[lo..hi]
            .iter()
            .zip(tl.signs[lo..hi].iter())
            .map(|(&t, &s)| (t, s as i32))
    }

    /// Signed event count at pixel `(x, y)` over `(t0, t1]`; for `t1 < t0` the
    /// negation of the count over `(t1, t0]`.
    ///
    /// Panics if the pixel lies outside the sensor.
    pub fn events_between(&self, x: usize, y: usize, t0: f64, t1: f64) -> i64 {
        assert!(
            self.resolution.contains(x, y),
            "pixel ({x}, {y}) outside sensor"
        );
        let tl = &self.timelines[self.resolution.offset(x, y)];
        tl.cumulative_at(t1) - tl.cumulative_at(t0)
    }

    /// Signed polarity sum over events with timestamp <= t.
    pub(crate) fn cumulative_at(&self, pixel: usize, t: f64) -> i64 {
        self.timelines[pixel].cumulative_at(t)
    }

    /// Number of sensor-wide events with timestamps in `(t0, t1]`.
    pub fn global_count_between(&self, t0: f64, t1: f64) -> usize {
        let lo = self.global_times.partition_point(|&s| s <= t0);
        let hi = self.global_times.partition_point(|&s| s <= t1);
        hi.saturating_sub(lo)
    }

    /// Every event, ordered by timestamp (stable within equal timestamps by
    /// row-major pixel order, then per-pixel ingestion order).
    pub fn events(&self) -> Vec<Event> {
        let mut out = Vec::with_capacity(self.len());
        for y in 0..self.resolution.height {
            for x in 0..self.resolution.width {
                out.extend(self.timeline(x, y).map(|(t, s)| Event {
                    t,
                    x,
                    y,
                    polarity: Polarity::from_sign(s).expect("stored polarity is +-1"),
                }));
            }
        }
        out.sort_by(|a, b| a.t.total_cmp(&b.t));
        out
    }

    /// Writes the index in the `t x y p` text format with `p` in `{0, 1}`.
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut line = String::new();
        for ev in self.events() {
            line.clear();
            let p = match ev.polarity {
                Polarity::Positive => 1,
                Polarity::Negative => 0,
            };
            let _ = writeln!(line, "{} {} {} {}", ev.t, ev.x, ev.y, p);
            w.write_all(line.as_bytes())?;
        }
        w.flush()
    }
}

/// Parses a `t x y p` event stream for a sensor of the given resolution.
pub fn parse_event_stream(source: &str, resolution: Resolution) -> Result<EventIndex> {
    let mut events = Vec::new();
    for (lineno, raw) in source.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |reason: String| Error::Parse {
            line: lineno + 1,
            reason,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(parse_err(format!(
                "expected `t x y p`, found {} fields",
                fields.len()
            )));
        }
        let t: f64 = fields[0]
            .parse()
            .map_err(|_| parse_err(format!("bad timestamp `{}`", fields[0])))?;
        let x: usize = fields[1]
            .parse()
            .map_err(|_| parse_err(format!("bad column `{}`", fields[1])))?;
        let y: usize = fields[2]
            .parse()
            .map_err(|_| parse_err(format!("bad row `{}`", fields[2])))?;
        let polarity = Polarity::from_token(fields[3])
            .ok_or_else(|| parse_err(format!("bad polarity `{}`", fields[3])))?;
        if !t.is_finite() || t < 0.0 {
            return Err(parse_err(format!("timestamp {t} must be non-negative")));
        }
        if !resolution.contains(x, y) {
            return Err(Error::Validation(format!(
                "line {}: event at ({x}, {y}) outside {}x{} sensor",
                lineno + 1,
                resolution.width,
                resolution.height
            )));
        }
        events.push(Event { t, x, y, polarity });
    }
    EventIndex::from_events(resolution, events)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn res8() -> Resolution {
        Resolution::new(8, 8)
    }

    #[test]
    fn single_event_line() {
        let idx = parse_event_stream("0.5 3 4 1", res8()).unwrap();
        assert_eq!(idx.len(), 1);
        assert_eq!(
            idx.events(),
            vec![Event {
                t: 0.5,
                x: 3,
                y: 4,
                polarity: Polarity::Positive
            }]
        );
    }

    #[test]
    fn empty_input() {
        let idx = parse_event_stream("", res8()).unwrap();
        assert!(idx.is_empty());
        for y in 0..8 {
            for x in 0..8 {
                assert_eq!(idx.timeline(x, y).count(), 0);
            }
        }
        assert_eq!(idx.time_span(), None);
    }

    #[test]
    fn zero_polarity_maps_to_negative() {
        let idx = parse_event_stream("1.0 0 0 0\n2.0 0 0 1\n", res8()).unwrap();
        let tl: Vec<_> = idx.timeline(0, 0).collect();
        assert_eq!(tl, vec![(1.0, -1), (2.0, 1)]);
    }

    #[test]
    fn signed_polarity_encoding_and_comments() {
        let src = "# header\n\n1.0 1 1 -1\n  2.0 1 1 +1 \n";
        let idx = parse_event_stream(src, res8()).unwrap();
        assert_eq!(
            idx.timeline(1, 1).collect::<Vec<_>>(),
            vec![(1.0, -1), (2.0, 1)]
        );
    }

    #[test]
    fn out_of_order_lines_sorted_per_pixel() {
        let idx = parse_event_stream("3.0 0 0 1\n1.0 0 0 0\n2.0 1 0 1\n", res8()).unwrap();
        assert_eq!(
            idx.timeline(0, 0).collect::<Vec<_>>(),
            vec![(1.0, -1), (3.0, 1)]
        );
        assert_eq!(idx.global_times(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn equal_timestamps_keep_ingestion_order() {
        let idx = parse_event_stream("1.0 0 0 1\n1.0 0 0 0\n1.0 0 0 1\n", res8()).unwrap();
        assert_eq!(
            idx.timeline(0, 0).collect::<Vec<_>>(),
            vec![(1.0, 1), (1.0, -1), (1.0, 1)]
        );
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = parse_event_stream("0.1 0 0 1\n0.2 zero 0 1\n", res8()).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
        assert!(matches!(
            parse_event_stream("0.1 0 0 2", res8()),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_event_stream("0.1 0 0", res8()),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn out_of_resolution_is_validation_error() {
        assert!(matches!(
            parse_event_stream("0.1 8 0 1", res8()),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn events_between_examples() {
        let idx = parse_event_stream("1 0 0 1\n2 0 0 0\n", res8()).unwrap();
        assert_eq!(idx.events_between(1, 1, 0.0, 10.0), 0);
        assert_eq!(idx.events_between(0, 0, 0.0, 1.5), 1);
        assert_eq!(idx.events_between(0, 0, 1.5, 0.0), -1);
        // half-open: event at the start excluded, at the end included
        assert_eq!(idx.events_between(0, 0, 1.0, 2.0), -1);
        assert_eq!(idx.events_between(0, 0, 0.5, 1.0), 1);
    }

    #[test]
    fn write_text_round_trips() {
        let src = "0.25 1 2 1\n0.125 7 7 0\n0.5 1 2 0\n";
        let idx = parse_event_stream(src, res8()).unwrap();
        let mut buf = Vec::new();
        idx.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "0.125 7 7 0\n0.25 1 2 1\n0.5 1 2 0\n");
        let again = parse_event_stream(&text, res8()).unwrap();
        assert_eq!(again.events(), idx.events());
    }
}
