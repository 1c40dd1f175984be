use super::{Channel, LearningUnit, Millis, Timed};

/// A contiguous run of one channel's events inside `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window<'a, T> {
    pub channel: Channel,
    pub start: Millis,
    pub end: Millis,
    pub events: &'a [T],
}

impl<T> Window<'_, T> {
    pub fn duration_ms(&self) -> Millis {
        self.end - self.start
    }
}

/// Events with `unit.start <= t < unit.end`, stably sorted by timestamp.
pub fn slice_unit<T: Timed + Clone>(stream: &[T], unit: &LearningUnit) -> Vec<T> {
    let mut out: Vec<T> = stream
        .iter()
        .filter(|e| (unit.start..unit.end).contains(&e.timestamp()))
        .cloned()
        .collect();
    out.sort_by_key(Timed::timestamp);
    out
}

/// The sub-slice of an already time-sorted stream falling inside the unit.
/// Equivalent to [`slice_unit`] without copying.
pub fn unit_span<'a, T: Timed>(sorted: &'a [T], unit: &LearningUnit) -> &'a [T] {
    let lo = sorted.partition_point(|e| e.timestamp() < unit.start);
    let hi = sorted.partition_point(|e| e.timestamp() < unit.end);
    &sorted[lo..hi.max(lo)]
}

/// Tiles the unit span with `interval_ms` windows; the last one may be short.
/// `unit_stream` must be sorted by timestamp (as returned by [`slice_unit`]).
pub fn cut_windows<'a, T: Timed>(
    unit_stream: &'a [T],
    unit: &LearningUnit,
    interval_ms: Millis,
    channel: Channel,
) -> Vec<Window<'a, T>> {
    assert!(interval_ms > 0, "interval must be positive");
    let mut windows = Vec::new();
    let mut start = unit.start;
    while start < unit.end {
        let end = (start + interval_ms).min(unit.end);
        let lo = unit_stream.partition_point(|e| e.timestamp() < start);
        let hi = unit_stream.partition_point(|e| e.timestamp() < end);
        windows.push(Window {
            channel,
            start,
            end,
            events: &unit_stream[lo..hi],
        });
        start = end;
    }
    windows
}

/// A series sampled on a uniform grid starting at `start`.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformSeries {
    pub start: Millis,
    pub rate_hz: f64,
    /// Empty when the source window held no events.
    pub values: Vec<f64>,
}

impl UniformSeries {
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Number of grid points over a span: `floor(duration_s * rate) + 1`.
pub fn grid_len(duration_ms: Millis, rate_hz: f64) -> usize {
    // The epsilon absorbs rounding in products like 0.3 * 10.
    (duration_ms as f64 * rate_hz / 1000.0 + 1e-9).floor() as usize + 1
}

/// Linear interpolation of time-sorted `(t, value)` points onto a uniform
/// grid over `[start, end]`, holding the nearest value outside the points' span.
pub fn resample_points(
    points: &[(Millis, f64)],
    start: Millis,
    end: Millis,
    rate_hz: f64,
) -> UniformSeries {
    assert!(rate_hz > 0.0, "rate must be positive");
    if points.is_empty() {
        return UniformSeries {
            start,
            rate_hz,
            values: Vec::new(),
        };
    }
    let n = grid_len(end - start, rate_hz);
    let step = 1000.0 / rate_hz;
    let mut values = Vec::with_capacity(n);
    // Index of the last point with t <= grid time.
    let mut idx = 0usize;
    for j in 0..n {
        let t = start as f64 + j as f64 * step;
        while idx + 1 < points.len() && points[idx + 1].0 as f64 <= t {
            idx += 1;
        }
        let (t0, v0) = points[idx];
        let v = if (t0 as f64) >= t || idx + 1 == points.len() {
            v0
        } else {
            let (t1, v1) = points[idx + 1];
            let frac = (t - t0 as f64) / (t1 - t0) as f64;
            v0 + frac * (v1 - v0)
        };
        values.push(v);
    }
    UniformSeries {
        start,
        rate_hz,
        values,
    }
}

/// Resamples one scalar attribute of a window's events.
pub fn resample_uniform<T: Timed>(
    window: &Window<'_, T>,
    rate_hz: f64,
    value: impl Fn(&T) -> f64,
) -> UniformSeries {
    let points: Vec<(Millis, f64)> = window
        .events
        .iter()
        .map(|e| (e.timestamp(), value(e)))
        .collect();
    resample_points(&points, window.start, window.end, rate_hz)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit(start: Millis, end: Millis) -> LearningUnit {
        LearningUnit {
            unit_id: "u".into(),
            start,
            end,
            self_eval: 50.0,
            class_eval: 50.0,
            mastery: 50.0,
        }
    }

    #[test]
    fn slice_is_half_open() {
        let events = vec![(10_000, 1.0), (70_000, 2.0), (130_000, 3.0), (120_000, 4.0)];
        let s = slice_unit(&events, &unit(60_000, 120_000));
        assert_eq!(s, vec![(70_000, 2.0)]);
        assert!(slice_unit(&events, &unit(200_000, 300_000)).is_empty());
    }

    #[test]
    fn slice_sorts_stably() {
        let events = vec![(30, 1.0), (10, 2.0), (20, 3.0), (10, 4.0)];
        let s = slice_unit(&events, &unit(0, 100));
        assert_eq!(s, vec![(10, 2.0), (10, 4.0), (20, 3.0), (30, 1.0)]);
    }

    #[test]
    fn window_counts() {
        let empty: Vec<(Millis, f64)> = vec![];
        let w = cut_windows(&empty, &unit(0, 120_000), 60_000, Channel::Eye);
        assert_eq!(w.len(), 2);
        assert!(w.iter().all(|w| w.duration_ms() == 60_000));

        let w = cut_windows(&empty, &unit(0, 90_000), 60_000, Channel::Eye);
        assert_eq!(
            w.iter().map(|w| w.duration_ms()).collect::<Vec<_>>(),
            vec![60_000, 30_000]
        );

        assert_eq!(cut_windows(&empty, &unit(0, 600_000), 60_000, Channel::Eye).len(), 10);
    }

    #[test]
    fn windows_hold_their_events() {
        let events = vec![(0, 0.0), (59_999, 1.0), (60_000, 2.0), (89_999, 3.0)];
        let w = cut_windows(&events, &unit(0, 90_000), 60_000, Channel::Mouse);
        assert_eq!(w[0].events, &events[..2]);
        assert_eq!(w[1].events, &events[2..]);
    }

    #[test]
    fn interpolates_midpoint() {
        let points = [(0, 0.0), (1000, 10.0)];
        let s = resample_points(&points, 0, 1000, 10.0);
        assert_eq!(s.values.len(), 11);
        assert!((s.values[5] - 5.0).abs() < 1e-12);
        assert_eq!(s.values[10], 10.0);
    }

    #[test]
    fn single_point_holds() {
        let s = resample_points(&[(400, 3.0)], 0, 1000, 10.0);
        assert!(s.values.iter().all(|&v| v == 3.0));
    }

    #[test]
    fn empty_window_flagged() {
        let s = resample_points(&[], 0, 1000, 10.0);
        assert!(s.is_empty());
    }

    proptest! {
        #[test]
        fn tiling_is_exact(start in 0i64..1_000_000, len in 1i64..2_000_000, interval in 500i64..300_000) {
            let empty: Vec<(Millis, f64)> = vec![];
            let u = unit(start, start + len);
            let w = cut_windows(&empty, &u, interval, Channel::Video);
            prop_assert_eq!(w.len() as i64, (len + interval - 1) / interval);
            prop_assert_eq!(w[0].start, u.start);
            prop_assert_eq!(w.last().unwrap().end, u.end);
            for pair in w.windows(2) {
                prop_assert_eq!(pair[0].end, pair[1].start);
                prop_assert_eq!(pair[0].duration_ms(), interval);
            }
        }

        #[test]
        fn slice_matches_brute_force(
            ts in proptest::collection::vec(0i64..1000, 0..60),
            a in 0i64..1000,
            len in 1i64..500,
        ) {
            let events: Vec<(Millis, f64)> = ts.iter().map(|&t| (t, t as f64)).collect();
            let u = unit(a, a + len);
            let s = slice_unit(&events, &u);
            let expected = ts.iter().filter(|&&t| t >= a && t < a + len).count();
            prop_assert_eq!(s.len(), expected);
            prop_assert!(s.iter().all(|e| e.0 >= u.start && e.0 < u.end));
            prop_assert!(s.windows(2).all(|p| p[0].0 <= p[1].0));
            let mut sorted = events.clone();
            sorted.sort_by_key(|e| e.0);
            prop_assert_eq!(unit_span(&sorted, &u), &s[..]);
        }

        #[test]
        fn resample_length_and_constancy(
            dur in 1i64..20_000,
            rate in 1u32..60,
            c in -100.0f64..100.0,
            ts in proptest::collection::vec(0i64..20_000, 1..20),
        ) {
            let mut ts = ts;
            ts.sort();
            let points: Vec<(Millis, f64)> = ts.iter().map(|&t| (t.min(dur), c)).collect();
            let s = resample_points(&points, 0, dur, rate as f64);
            let expected = (dur * rate as i64 / 1000) as usize + 1;
            prop_assert_eq!(s.values.len(), expected);
            prop_assert!(s.values.iter().all(|&v| v == c));
        }
    }
}
