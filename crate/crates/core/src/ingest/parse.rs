use std::fmt::Write as _;

use super::{
    FrameSample, GazeEvent, GazeEventType, IngestError, Millis, MouseEvent, MouseMessage,
    N_EMOTIONS,
};

/// Parsed records plus the count of tolerated anomalies.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed<T> {
    pub events: Vec<T>,
    /// Unknown gaze event tokens mapped to `unclassified`.
    pub warnings: usize,
}

const EMOTION_TOLERANCE: f64 = 1e-3;

/// A leading line is a header when its first field is not a number.
fn numeric_header(first: &str) -> bool {
    first.parse::<f64>().is_err()
}

/// Yields `(line_no, fields)` for every non-blank data line. Line numbers are
/// 1-based over the raw text; the header (if any) is skipped.
fn records<'a>(
    text: &'a str,
    is_header: impl Fn(&str) -> bool + 'a,
) -> impl Iterator<Item = (usize, Vec<&'a str>)> + 'a {
    text.lines()
        .enumerate()
        .filter_map(move |(i, raw)| {
            let line = raw.strip_suffix('\r').unwrap_or(raw).trim();
            if line.is_empty() {
                return None;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if i == 0 && is_header(fields[0]) {
                return None;
            }
            Some((i + 1, fields))
        })
}

fn malformed(line: usize, reason: impl Into<String>) -> IngestError {
    IngestError::MalformedLine {
        line,
        reason: reason.into(),
    }
}

fn check_arity(line: usize, fields: &[&str], expected: usize) -> Result<(), IngestError> {
    if fields.len() != expected {
        return Err(malformed(
            line,
            format!("expected {expected} fields, found {}", fields.len()),
        ));
    }
    Ok(())
}

fn parse_time(line: usize, field: &str) -> Result<Millis, IngestError> {
    let t: Millis = field
        .parse()
        .map_err(|_| malformed(line, format!("non-integer timestamp {field:?}")))?;
    if t < 0 {
        return Err(malformed(line, "negative timestamp"));
    }
    Ok(t)
}

fn parse_real(line: usize, field: &str) -> Result<f64, IngestError> {
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(malformed(line, format!("non-numeric value {field:?}"))),
    }
}

/// Parses `timestamp,event_type,x,y` lines.
pub fn parse_gaze(text: &str) -> Result<Parsed<GazeEvent>, IngestError> {
    let mut events = Vec::new();
    let mut warnings = 0;
    for (line, fields) in records(text, numeric_header) {
        check_arity(line, &fields, 4)?;
        let timestamp = parse_time(line, fields[0])?;
        let event_type = match fields[1].to_ascii_lowercase().as_str() {
            "fixation" => GazeEventType::Fixation,
            "saccade" => GazeEventType::Saccade,
            "unclassified" => GazeEventType::Unclassified,
            _ => {
                warnings += 1;
                GazeEventType::Unclassified
            }
        };
        events.push(GazeEvent {
            timestamp,
            event_type,
            x: parse_real(line, fields[2])?,
            y: parse_real(line, fields[3])?,
        });
    }
    Ok(Parsed { events, warnings })
}

/// Parses `message,time,x,y,wheel` lines.
pub fn parse_mouse(text: &str) -> Result<Parsed<MouseEvent>, IngestError> {
    let mut events = Vec::new();
    for (line, fields) in records(text, |f| f.eq_ignore_ascii_case("message")) {
        check_arity(line, &fields, 5)?;
        let message = MouseMessage::parse(&fields[0].to_ascii_lowercase())
            .ok_or_else(|| malformed(line, format!("unknown mouse message {:?}", fields[0])))?;
        let time = parse_time(line, fields[1])?;
        let x = parse_real(line, fields[2])?;
        let y = parse_real(line, fields[3])?;
        let wheel: i64 = fields[4]
            .parse()
            .map_err(|_| malformed(line, format!("non-integer wheel delta {:?}", fields[4])))?;
        if wheel != 0 && message != MouseMessage::Wheel {
            return Err(malformed(line, "wheel delta on a non-wheel message"));
        }
        events.push(MouseEvent {
            message,
            time,
            x,
            y,
            wheel,
        });
    }
    Ok(Parsed {
        events,
        warnings: 0,
    })
}

/// Parses `timestamp,yaw,pitch,roll,e1..e7` lines. Emotion vectors within
/// 1e-3 of the simplex are renormalized to sum to one.
pub fn parse_frames(text: &str) -> Result<Parsed<FrameSample>, IngestError> {
    let mut events = Vec::new();
    for (line, fields) in records(text, numeric_header) {
        check_arity(line, &fields, 4 + N_EMOTIONS)?;
        let timestamp = parse_time(line, fields[0])?;
        let mut pose = [0.0; 3];
        for (slot, field) in pose.iter_mut().zip(&fields[1..4]) {
            let v = parse_real(line, field)?;
            if v.abs() > 1.0 {
                return Err(IngestError::PoseOutOfRange { line, value: v });
            }
            *slot = v;
        }
        let mut emotion = [0.0; N_EMOTIONS];
        for (slot, field) in emotion.iter_mut().zip(&fields[4..]) {
            *slot = parse_real(line, field)?;
        }
        let sum: f64 = emotion.iter().sum();
        if emotion.iter().any(|&e| e < 0.0) || (sum - 1.0).abs() > EMOTION_TOLERANCE {
            return Err(IngestError::EmotionNotSimplex { line, sum });
        }
        // Already-normalized vectors are kept bit-exact.
        if (sum - 1.0).abs() > 1e-9 {
            emotion.iter_mut().for_each(|e| *e /= sum);
        }
        events.push(FrameSample {
            timestamp,
            yaw: pose[0],
            pitch: pose[1],
            roll: pose[2],
            emotion,
        });
    }
    Ok(Parsed {
        events,
        warnings: 0,
    })
}

pub const GAZE_HEADER: &str = "timestamp,event_type,x,y";
pub const MOUSE_HEADER: &str = "message,time,x,y,wheel";

pub fn frames_header() -> String {
    let mut out = String::from("timestamp,yaw,pitch,roll");
    for name in super::EMOTION_NAMES {
        let _ = write!(out, ",e_{name}");
    }
    out
}

/// Appends data rows only, no header.
pub fn write_gaze_rows(out: &mut String, events: &[GazeEvent]) {
    for e in events {
        let _ = writeln!(out, "{},{},{},{}", e.timestamp, e.event_type.as_str(), e.x, e.y);
    }
}

pub fn write_mouse_rows(out: &mut String, events: &[MouseEvent]) {
    for e in events {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            e.message.as_str(),
            e.time,
            e.x,
            e.y,
            e.wheel
        );
    }
}

pub fn write_frame_rows(out: &mut String, frames: &[FrameSample]) {
    for f in frames {
        let _ = write!(out, "{},{},{},{}", f.timestamp, f.yaw, f.pitch, f.roll);
        for e in f.emotion {
            let _ = write!(out, ",{e}");
        }
        out.push('\n');
    }
}

pub fn gaze_to_csv(events: &[GazeEvent]) -> String {
    let mut out = format!("{GAZE_HEADER}\n");
    write_gaze_rows(&mut out, events);
    out
}

pub fn mouse_to_csv(events: &[MouseEvent]) -> String {
    let mut out = format!("{MOUSE_HEADER}\n");
    write_mouse_rows(&mut out, events);
    out
}

pub fn frames_to_csv(frames: &[FrameSample]) -> String {
    let mut out = frames_header() + "\n";
    write_frame_rows(&mut out, frames);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn gaze_line_in_field_order() {
        let parsed = parse_gaze("1530000000123,fixation,512,384").unwrap();
        assert_eq!(
            parsed.events,
            vec![GazeEvent {
                timestamp: 1530000000123,
                event_type: GazeEventType::Fixation,
                x: 512.0,
                y: 384.0
            }]
        );
        assert_eq!(parsed.warnings, 0);
    }

    #[test]
    fn empty_text_is_empty() {
        assert!(parse_gaze("").unwrap().events.is_empty());
        assert!(parse_mouse("").unwrap().events.is_empty());
        assert!(parse_frames("").unwrap().events.is_empty());
    }

    #[test]
    fn gaze_arity_violation() {
        let err = parse_gaze("10,fixation,1").unwrap_err();
        assert!(matches!(err, IngestError::MalformedLine { line: 1, .. }), "{err}");
    }

    #[test]
    fn gaze_header_and_crlf() {
        let text = "timestamp,event_type,x,y\r\n10,saccade,1.5,2\r\n20,blink,3,4\r\n";
        let parsed = parse_gaze(text).unwrap();
        assert_eq!(parsed.events.len(), 2);
        assert_eq!(parsed.events[1].event_type, GazeEventType::Unclassified);
        assert_eq!(parsed.warnings, 1);
    }

    #[test]
    fn gaze_header_is_any_non_numeric_first_field() {
        let named = parse_gaze("Time(ms),Type,GazeX,GazeY\n10,fixation,1,2\n").unwrap();
        let bare = parse_gaze("10,fixation,1,2\n").unwrap();
        assert_eq!(named.events, bare.events);
        assert!(parse_gaze("10,fixation,1,2\nts,fixation,1,2\n").is_err());
    }

    #[test]
    fn gaze_error_line_counts_header() {
        let err = parse_gaze("timestamp,event_type,x,y\n10,fixation,1,2\n11,fixation,x,2\n")
            .unwrap_err();
        assert!(matches!(err, IngestError::MalformedLine { line: 3, .. }));
    }

    #[test]
    fn mouse_move_and_wheel() {
        let parsed = parse_mouse("move,1530000000200,100,200,0\nwheel,1530000000300,100,200,-120")
            .unwrap();
        assert_eq!(
            parsed.events[0],
            MouseEvent {
                message: MouseMessage::Move,
                time: 1530000000200,
                x: 100.0,
                y: 200.0,
                wheel: 0
            }
        );
        assert_eq!(parsed.events[1].message, MouseMessage::Wheel);
        assert_eq!(parsed.events[1].wheel, -120);
    }

    #[test]
    fn mouse_non_numeric_time() {
        let err = parse_mouse("move,xx,1,2,0").unwrap_err();
        assert!(matches!(err, IngestError::MalformedLine { line: 1, .. }));
    }

    #[test]
    fn mouse_wheel_delta_only_on_wheel() {
        assert!(parse_mouse("move,1,1,2,5").is_err());
        assert!(parse_mouse("click,1,1,2,0").is_err());
    }

    #[test]
    fn frame_valid_line() {
        let parsed =
            parse_frames("1000,0.1,-0.2,0.0,0.9,0.02,0.02,0.02,0.02,0.01,0.01").unwrap();
        let f = parsed.events[0];
        assert_eq!(f.timestamp, 1000);
        assert_eq!((f.yaw, f.pitch, f.roll), (0.1, -0.2, 0.0));
        assert!((f.emotion.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn frame_pose_out_of_range() {
        let err = parse_frames("1000,1.5,0,0,0.9,0.02,0.02,0.02,0.02,0.01,0.01").unwrap_err();
        assert!(matches!(err, IngestError::PoseOutOfRange { line: 1, .. }));
    }

    #[test]
    fn frame_emotion_not_simplex() {
        let err = parse_frames("1000,0,0,0,0.2,0.1,0.1,0.05,0.05,0,0").unwrap_err();
        assert!(matches!(err, IngestError::EmotionNotSimplex { line: 1, .. }));
    }

    #[test]
    fn frame_emotion_renormalized_within_tolerance() {
        let parsed = parse_frames("5,0,0,0,0.9005,0.02,0.02,0.02,0.02,0.01,0.01").unwrap();
        let sum: f64 = parsed.events[0].emotion.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    fn gaze_strategy() -> impl Strategy<Value = GazeEvent> {
        (0i64..2_000_000_000_000, 0usize..3, -1e4f64..1e4, -1e4f64..1e4).prop_map(
            |(timestamp, k, x, y)| GazeEvent {
                timestamp,
                event_type: [
                    GazeEventType::Fixation,
                    GazeEventType::Saccade,
                    GazeEventType::Unclassified,
                ][k],
                x,
                y,
            },
        )
    }

    fn mouse_strategy() -> impl Strategy<Value = MouseEvent> {
        (0i64..2_000_000_000_000, 0usize..6, -1e4f64..1e4, -1e4f64..1e4, -600i64..600).prop_map(
            |(time, k, x, y, w)| {
                let message = [
                    MouseMessage::Move,
                    MouseMessage::LeftDown,
                    MouseMessage::LeftUp,
                    MouseMessage::RightDown,
                    MouseMessage::RightUp,
                    MouseMessage::Wheel,
                ][k];
                let wheel = if message == MouseMessage::Wheel { w } else { 0 };
                MouseEvent { message, time, x, y, wheel }
            },
        )
    }

    proptest! {
        #[test]
        fn gaze_round_trip(events in proptest::collection::vec(gaze_strategy(), 0..40)) {
            let parsed = parse_gaze(&gaze_to_csv(&events)).unwrap();
            prop_assert_eq!(parsed.events, events);
        }

        #[test]
        fn mouse_round_trip(events in proptest::collection::vec(mouse_strategy(), 0..40)) {
            let parsed = parse_mouse(&mouse_to_csv(&events)).unwrap();
            prop_assert_eq!(parsed.events, events);
        }
    }
}
