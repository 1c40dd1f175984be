//! Window-level feature vectors for each channel.

use serde::{Deserialize, Serialize};

use super::fourier::{fourier_values, FOURIER_NAMES};
use super::stats::{stat_values, STAT_NAMES};
use super::subjective::{gaze_subjective, SUBJECTIVE_NAMES};
use super::wavelet::{wavelet_feature_names, wavelet_features_fixed};
use super::FeatureVector;
use crate::ingest::{
    resample_points, Channel, FrameSample, GazeEvent, Millis, MouseEvent, MouseMessage, Window,
    EMOTION_NAMES, N_EMOTIONS,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    /// Fixed extraction interval.
    pub interval_ms: Millis,
    pub gaze_rate_hz: f64,
    pub mouse_rate_hz: f64,
    pub frames_rate_hz: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            interval_ms: 60_000,
            gaze_rate_hz: 30.0,
            mouse_rate_hz: 20.0,
            frames_rate_hz: 15.0,
        }
    }
}

impl FeatureConfig {
    pub fn rate_for(&self, channel: Channel) -> f64 {
        match channel {
            Channel::Video => self.frames_rate_hz,
            Channel::Eye => self.gaze_rate_hz,
            Channel::Mouse => self.mouse_rate_hz,
        }
    }
}

const GAZE_SERIES: [&str; 4] = ["x", "y", "step_distance", "speed"];
const MOUSE_SERIES: [&str; 5] = ["x", "y", "step_distance", "speed", "wheel_cum"];
const MOUSE_COUNTS: [&str; 5] = [
    "n_moves",
    "n_left_clicks",
    "n_right_clicks",
    "n_wheel",
    "mean_click_interval_ms",
];

fn frame_series_names() -> Vec<String> {
    let mut names: Vec<String> = ["yaw", "pitch", "roll"].map(String::from).to_vec();
    names.extend(EMOTION_NAMES.iter().map(|e| format!("emo_{e}")));
    names
}

fn battery_names(series: &str) -> impl Iterator<Item = String> + '_ {
    STAT_NAMES
        .iter()
        .map(|s| s.to_string())
        .chain(wavelet_feature_names())
        .chain(FOURIER_NAMES.iter().map(|s| s.to_string()))
        .map(move |n| format!("{series}.{n}"))
}

/// The general battery over one base series: stats on the raw values, then
/// wavelet and Fourier features on the uniformly resampled series.
fn battery(
    out: &mut FeatureVector,
    series: &str,
    points: &[(Millis, f64)],
    start: Millis,
    end: Millis,
    rate_hz: f64,
) {
    let raw: Vec<f64> = points.iter().map(|p| p.1).collect();
    let stats = stat_values(&raw).ok();
    for (i, name) in STAT_NAMES.iter().enumerate() {
        out.push(format!("{series}.{name}"), stats.map(|s| s[i]));
    }

    let uniform = resample_points(points, start, end, rate_hz);
    match wavelet_features_fixed(&uniform.values) {
        Ok(w) => out.extend_prefixed(series, w),
        Err(_) => {
            for name in wavelet_feature_names() {
                out.push(format!("{series}.{name}"), None);
            }
        }
    }
    let spectrum = fourier_values(&uniform.values, rate_hz).ok();
    for (i, name) in FOURIER_NAMES.iter().enumerate() {
        out.push(format!("{series}.{name}"), spectrum.map(|s| s[i]));
    }
}

/// Column names a channel produces, in output order.
pub fn channel_feature_names(channel: Channel) -> Vec<String> {
    let prefix = channel.feature_prefix();
    let mut names: Vec<String> = Vec::new();
    match channel {
        Channel::Eye => {
            for s in GAZE_SERIES {
                names.extend(battery_names(s));
            }
            names.extend(SUBJECTIVE_NAMES.map(String::from));
        }
        Channel::Mouse => {
            for s in MOUSE_SERIES {
                names.extend(battery_names(s));
            }
            names.extend(MOUSE_COUNTS.map(String::from));
        }
        Channel::Video => {
            for s in frame_series_names() {
                names.extend(battery_names(&s).collect::<Vec<_>>());
            }
            names.extend(EMOTION_NAMES.iter().map(|e| format!("emotion_mean.{e}")));
            names.extend(EMOTION_NAMES.iter().map(|e| format!("emotion_max.{e}")));
            names.extend(EMOTION_NAMES.iter().map(|e| format!("argmax_share.{e}")));
        }
    }
    names.into_iter().map(|n| format!("{prefix}.{n}")).collect()
}

fn with_prefix(channel: Channel, fv: FeatureVector) -> FeatureVector {
    let mut out = FeatureVector::default();
    out.extend_prefixed(channel.feature_prefix(), fv);
    out
}

/// Step lengths and speeds between consecutive positions, stamped at the later
/// event. Speeds are only defined where time advances.
fn motion_series(positions: &[(Millis, f64, f64)]) -> (Vec<(Millis, f64)>, Vec<(Millis, f64)>) {
    let mut steps = Vec::with_capacity(positions.len().saturating_sub(1));
    let mut speeds = Vec::with_capacity(positions.len().saturating_sub(1));
    for pair in positions.windows(2) {
        let (t0, x0, y0) = pair[0];
        let (t1, x1, y1) = pair[1];
        let d = (x1 - x0).hypot(y1 - y0);
        steps.push((t1, d));
        if t1 > t0 {
            speeds.push((t1, d * 1000.0 / (t1 - t0) as f64));
        }
    }
    (steps, speeds)
}

pub fn gaze_features(window: &Window<'_, GazeEvent>, config: &FeatureConfig) -> FeatureVector {
    let channel = Channel::Eye;
    if window.events.is_empty() {
        return FeatureVector::missing(channel_feature_names(channel));
    }
    let rate = config.gaze_rate_hz;
    let positions: Vec<(Millis, f64, f64)> =
        window.events.iter().map(|e| (e.timestamp, e.x, e.y)).collect();
    let xs: Vec<(Millis, f64)> = positions.iter().map(|p| (p.0, p.1)).collect();
    let ys: Vec<(Millis, f64)> = positions.iter().map(|p| (p.0, p.2)).collect();
    let (steps, speeds) = motion_series(&positions);

    let mut fv = FeatureVector::default();
    for (name, points) in GAZE_SERIES.iter().zip([&xs, &ys, &steps, &speeds]) {
        battery(&mut fv, name, points, window.start, window.end, rate);
    }
    let subjective = gaze_subjective(window.events);
    fv.names.extend(subjective.names);
    fv.values.extend(subjective.values);
    with_prefix(channel, fv)
}

pub fn mouse_features(window: &Window<'_, MouseEvent>, config: &FeatureConfig) -> FeatureVector {
    let channel = Channel::Mouse;
    if window.events.is_empty() {
        return FeatureVector::missing(channel_feature_names(channel));
    }
    let rate = config.mouse_rate_hz;
    let events = window.events;
    let positions: Vec<(Millis, f64, f64)> = events.iter().map(|e| (e.time, e.x, e.y)).collect();
    let xs: Vec<(Millis, f64)> = positions.iter().map(|p| (p.0, p.1)).collect();
    let ys: Vec<(Millis, f64)> = positions.iter().map(|p| (p.0, p.2)).collect();
    let (steps, speeds) = motion_series(&positions);
    let mut total = 0i64;
    let wheel_cum: Vec<(Millis, f64)> = events
        .iter()
        .map(|e| {
            total += e.wheel;
            (e.time, total as f64)
        })
        .collect();

    let mut fv = FeatureVector::default();
    for (name, points) in MOUSE_SERIES
        .iter()
        .zip([&xs, &ys, &steps, &speeds, &wheel_cum])
    {
        battery(&mut fv, name, points, window.start, window.end, rate);
    }

    let count = |m: MouseMessage| events.iter().filter(|e| e.message == m).count() as f64;
    let clicks: Vec<Millis> = events
        .iter()
        .filter(|e| matches!(e.message, MouseMessage::LeftDown | MouseMessage::RightDown))
        .map(|e| e.time)
        .collect();
    let click_interval = (clicks.len() >= 2).then(|| {
        let span: i64 = clicks.windows(2).map(|w| w[1] - w[0]).sum();
        span as f64 / (clicks.len() - 1) as f64
    });
    fv.push(MOUSE_COUNTS[0], Some(count(MouseMessage::Move)));
    fv.push(MOUSE_COUNTS[1], Some(count(MouseMessage::LeftDown)));
    fv.push(MOUSE_COUNTS[2], Some(count(MouseMessage::RightDown)));
    fv.push(MOUSE_COUNTS[3], Some(count(MouseMessage::Wheel)));
    fv.push(MOUSE_COUNTS[4], click_interval);
    with_prefix(channel, fv)
}

pub fn frame_features(window: &Window<'_, FrameSample>, config: &FeatureConfig) -> FeatureVector {
    let channel = Channel::Video;
    if window.events.is_empty() {
        return FeatureVector::missing(channel_feature_names(channel));
    }
    let rate = config.frames_rate_hz;
    let frames = window.events;
    let mut fv = FeatureVector::default();
    for (i, name) in frame_series_names().iter().enumerate() {
        let points: Vec<(Millis, f64)> = frames
            .iter()
            .map(|f| {
                let v = match i {
                    0 => f.yaw,
                    1 => f.pitch,
                    2 => f.roll,
                    k => f.emotion[k - 3],
                };
                (f.timestamp, v)
            })
            .collect();
        battery(&mut fv, name, &points, window.start, window.end, rate);
    }

    let n = frames.len() as f64;
    let mut sums = [0.0; N_EMOTIONS];
    let mut maxes = [f64::NEG_INFINITY; N_EMOTIONS];
    let mut argmax_counts = [0usize; N_EMOTIONS];
    for f in frames {
        let mut best = 0;
        for k in 0..N_EMOTIONS {
            sums[k] += f.emotion[k];
            maxes[k] = maxes[k].max(f.emotion[k]);
            if f.emotion[k] > f.emotion[best] {
                best = k;
            }
        }
        argmax_counts[best] += 1;
    }
    for (k, e) in EMOTION_NAMES.iter().enumerate() {
        fv.push(format!("emotion_mean.{e}"), Some(sums[k] / n));
    }
    for (k, e) in EMOTION_NAMES.iter().enumerate() {
        fv.push(format!("emotion_max.{e}"), Some(maxes[k]));
    }
    for (k, e) in EMOTION_NAMES.iter().enumerate() {
        fv.push(format!("argmax_share.{e}"), Some(argmax_counts[k] as f64 / n));
    }
    with_prefix(channel, fv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::GazeEventType;
    use std::collections::HashSet;

    fn window<T>(channel: Channel, events: &[T]) -> Window<'_, T> {
        Window {
            channel,
            start: 0,
            end: 60_000,
            events,
        }
    }

    fn gaze_events() -> Vec<GazeEvent> {
        (0..200)
            .map(|i| GazeEvent {
                timestamp: i * 250,
                event_type: GazeEventType::Fixation,
                x: (i as f64 * 0.7).sin() * 300.0 + 500.0,
                y: (i as f64 * 0.3).cos() * 100.0 + 400.0,
            })
            .collect()
    }

    #[test]
    fn gaze_battery_exceeds_forty() {
        let events = gaze_events();
        let fv = gaze_features(&window(Channel::Eye, &events), &FeatureConfig::default());
        assert_eq!(fv.names, channel_feature_names(Channel::Eye));
        // 4 series x (21 + 12 + 11) + 2 subjective
        assert_eq!(fv.len(), 4 * 44 + 2);
        assert!(fv.len() - 2 > 40);
        assert!(fv.values.iter().all(|v| v.is_some_and(f64::is_finite)));
        assert!(fv.get("gaze.x.mean").is_some());
    }

    #[test]
    fn names_unique_and_stable() {
        for channel in Channel::ALL {
            let names = channel_feature_names(channel);
            let unique: HashSet<_> = names.iter().collect();
            assert_eq!(unique.len(), names.len(), "{channel}");
            assert_eq!(names, channel_feature_names(channel));
            assert!(names.len() > 40);
        }
    }

    #[test]
    fn empty_mouse_window_all_missing() {
        let fv = mouse_features(&window(Channel::Mouse, &[]), &FeatureConfig::default());
        assert_eq!(fv.names, channel_feature_names(Channel::Mouse));
        assert!(fv.values.iter().all(Option::is_none));
    }

    #[test]
    fn stationary_mouse() {
        let events: Vec<MouseEvent> = (0..30)
            .map(|i| MouseEvent {
                message: MouseMessage::Move,
                time: i * 100,
                x: 40.0,
                y: 50.0,
                wheel: 0,
            })
            .collect();
        let fv = mouse_features(&window(Channel::Mouse, &events), &FeatureConfig::default());
        assert_eq!(fv.names, channel_feature_names(Channel::Mouse));
        assert_eq!(fv.get("mouse.speed.max"), Some(Some(0.0)));
        assert_eq!(fv.get("mouse.speed.mean"), Some(Some(0.0)));
        assert_eq!(fv.get("mouse.n_moves"), Some(Some(30.0)));
        assert_eq!(fv.get("mouse.mean_click_interval_ms"), Some(None));
    }

    #[test]
    fn frames_features_line_up() {
        let frames: Vec<FrameSample> = (0..90)
            .map(|i| {
                let mut emotion = [0.05; N_EMOTIONS];
                emotion[6] = 0.7;
                FrameSample {
                    timestamp: i * 66,
                    yaw: (i as f64 / 10.0).sin() * 0.3,
                    pitch: 0.1,
                    roll: 0.0,
                    emotion,
                }
            })
            .collect();
        let fv = frame_features(&window(Channel::Video, &frames), &FeatureConfig::default());
        assert_eq!(fv.names, channel_feature_names(Channel::Video));
        assert_eq!(fv.get("frames.argmax_share.neutral"), Some(Some(1.0)));
        assert_eq!(fv.get("frames.emotion_max.neutral"), Some(Some(0.7)));
    }
}
