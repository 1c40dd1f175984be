//! Channel stream parsing, session manifests, and time slicing.
//!
//! Three channel formats come in as line-delimited CSV (gaze fixations,
//! mouse trail, per-frame head pose plus emotion scores) and a JSON manifest
//! describes the learner and the learning units. Units are sliced out of each
//! stream and cut into fixed-interval windows on the shared millisecond
//! timeline.

mod manifest;
mod parse;
mod window;

pub use manifest::{load_manifest, ChannelFiles, Learner, LearningUnit, Session};
pub use parse::{
    frames_header, frames_to_csv, gaze_to_csv, mouse_to_csv, parse_frames, parse_gaze,
    parse_mouse, write_frame_rows, write_gaze_rows, write_mouse_rows, Parsed, GAZE_HEADER,
    MOUSE_HEADER,
};
pub use window::{
    cut_windows, grid_len, resample_points, resample_uniform, slice_unit, unit_span,
    UniformSeries, Window,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Milliseconds since the shared epoch.
pub type Millis = i64;

/// Number of emotion components carried by a frame sample.
pub const N_EMOTIONS: usize = 7;

/// Emotion component names, in file column order.
pub const EMOTION_NAMES: [&str; N_EMOTIONS] = [
    "happiness",
    "sadness",
    "surprise",
    "fear",
    "anger",
    "disgust",
    "neutral",
];

/// The three data channels. Declaration order is the fusion column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Video,
    Eye,
    Mouse,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::Video, Channel::Eye, Channel::Mouse];

    pub fn as_str(self) -> &'static str {
        match self {
            Channel::Video => "video",
            Channel::Eye => "eye",
            Channel::Mouse => "mouse",
        }
    }

    /// Prefix used for feature column names produced from this channel.
    pub fn feature_prefix(self) -> &'static str {
        match self {
            Channel::Video => "frames",
            Channel::Eye => "gaze",
            Channel::Mouse => "mouse",
        }
    }

    pub fn parse(s: &str) -> Option<Channel> {
        match s.trim().to_ascii_lowercase().as_str() {
            "video" | "image" | "frames" => Some(Channel::Video),
            "eye" | "gaze" => Some(Channel::Eye),
            "mouse" => Some(Channel::Mouse),
            _ => None,
        }
    }
}

impl std::fmt::Display for Channel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GazeEventType {
    Fixation,
    Saccade,
    Unclassified,
}

impl GazeEventType {
    pub fn as_str(self) -> &'static str {
        match self {
            GazeEventType::Fixation => "fixation",
            GazeEventType::Saccade => "saccade",
            GazeEventType::Unclassified => "unclassified",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GazeEvent {
    pub timestamp: Millis,
    pub event_type: GazeEventType,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MouseMessage {
    Move,
    LeftDown,
    LeftUp,
    RightDown,
    RightUp,
    Wheel,
}

impl MouseMessage {
    pub fn as_str(self) -> &'static str {
        match self {
            MouseMessage::Move => "move",
            MouseMessage::LeftDown => "left_down",
            MouseMessage::LeftUp => "left_up",
            MouseMessage::RightDown => "right_down",
            MouseMessage::RightUp => "right_up",
            MouseMessage::Wheel => "wheel",
        }
    }

    pub fn parse(token: &str) -> Option<MouseMessage> {
        Some(match token {
            "move" => MouseMessage::Move,
            "left_down" => MouseMessage::LeftDown,
            "left_up" => MouseMessage::LeftUp,
            "right_down" => MouseMessage::RightDown,
            "right_up" => MouseMessage::RightUp,
            "wheel" => MouseMessage::Wheel,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MouseEvent {
    pub message: MouseMessage,
    pub time: Millis,
    pub x: f64,
    pub y: f64,
    /// Signed scroll delta; zero for every message other than `Wheel`.
    pub wheel: i64,
}

/// Head pose (each angle normalized to [-1, 1]) and the emotion simplex for one video frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameSample {
    pub timestamp: Millis,
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
    pub emotion: [f64; N_EMOTIONS],
}

/// Anything positioned on the shared timeline.
pub trait Timed {
    fn timestamp(&self) -> Millis;
}

impl Timed for GazeEvent {
    fn timestamp(&self) -> Millis {
        self.timestamp
    }
}

impl Timed for MouseEvent {
    fn timestamp(&self) -> Millis {
        self.time
    }
}

impl Timed for FrameSample {
    fn timestamp(&self) -> Millis {
        self.timestamp
    }
}

impl Timed for (Millis, f64) {
    fn timestamp(&self) -> Millis {
        self.0
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: malformed record ({reason})")]
    MalformedLine { line: usize, reason: String },
    #[error("line {line}: emotion scores sum to {sum}, not a probability simplex")]
    EmotionNotSimplex { line: usize, sum: f64 },
    #[error("line {line}: head pose angle {value} outside [-1, 1]")]
    PoseOutOfRange { line: usize, value: f64 },
    #[error("units {first} and {second} overlap")]
    OverlappingUnits { first: String, second: String },
    #[error("{field} = {value} out of range for {owner}")]
    EvalOutOfRange {
        owner: String,
        field: &'static str,
        value: f64,
    },
    #[error("unit {0}: start must precede end and be non-negative")]
    InvalidUnitSpan(String),
    #[error("missing channel file: {0}")]
    MissingChannelFile(String),
    #[error("manifest: {0}")]
    Manifest(#[from] serde_json::Error),
}
