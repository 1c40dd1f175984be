use serde::{Deserialize, Serialize};

use super::{IngestError, Millis};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Learner {
    pub name: String,
    pub major: String,
    pub sex: String,
    pub age: u32,
    /// Self-reported mastery of the topic, 0..=100.
    pub mastery: f64,
}

/// Channel file paths, relative to the manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelFiles {
    pub gaze: String,
    pub mouse: String,
    pub frames: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningUnit {
    pub unit_id: String,
    pub start: Millis,
    pub end: Millis,
    /// Self-evaluation on the 10..=100 scale.
    pub self_eval: f64,
    /// Class evaluation on the 0..=100 scale.
    pub class_eval: f64,
    /// The learner's mastery, carried onto every unit.
    pub mastery: f64,
}

impl LearningUnit {
    pub fn duration(&self) -> Millis {
        self.end - self.start
    }

    /// Checks the span and the evaluation ranges.
    pub fn validate(&self) -> Result<(), IngestError> {
        if self.start < 0 || self.start >= self.end {
            return Err(IngestError::InvalidUnitSpan(self.unit_id.clone()));
        }
        check_range(&self.unit_id, "self_eval", self.self_eval, 10.0, 100.0)?;
        check_range(&self.unit_id, "class_eval", self.class_eval, 0.0, 100.0)?;
        check_range(&self.unit_id, "mastery", self.mastery, 0.0, 100.0)
    }
}

fn check_range(
    owner: &str,
    field: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
) -> Result<(), IngestError> {
    if !(lo..=hi).contains(&value) {
        return Err(IngestError::EvalOutOfRange {
            owner: owner.to_string(),
            field,
            value,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub learner: Learner,
    pub channels: ChannelFiles,
    /// Sorted by start, pairwise disjoint.
    pub units: Vec<LearningUnit>,
}

#[derive(Deserialize, Serialize)]
struct RawManifest {
    learner: Learner,
    channels: RawChannels,
    units: Vec<RawUnit>,
}

#[derive(Deserialize, Serialize)]
struct RawChannels {
    gaze: Option<String>,
    mouse: Option<String>,
    frames: Option<String>,
}

#[derive(Deserialize, Serialize)]
struct RawUnit {
    unit_id: String,
    start_ms: Millis,
    end_ms: Millis,
    self_eval: f64,
    class_eval: f64,
}

/// Parses and validates a session manifest.
pub fn load_manifest(text: &str) -> Result<Session, IngestError> {
    let raw: RawManifest = serde_json::from_str(text)?;
    check_range(&raw.learner.name, "mastery", raw.learner.mastery, 0.0, 100.0)?;
    let channel = |path: Option<String>, name: &str| match path {
        Some(p) if !p.trim().is_empty() => Ok(p),
        _ => Err(IngestError::MissingChannelFile(name.to_string())),
    };
    let channels = ChannelFiles {
        gaze: channel(raw.channels.gaze, "gaze")?,
        mouse: channel(raw.channels.mouse, "mouse")?,
        frames: channel(raw.channels.frames, "frames")?,
    };
    let mut units: Vec<LearningUnit> = raw
        .units
        .into_iter()
        .map(|u| LearningUnit {
            unit_id: u.unit_id,
            start: u.start_ms,
            end: u.end_ms,
            self_eval: u.self_eval,
            class_eval: u.class_eval,
            mastery: raw.learner.mastery,
        })
        .collect();
    for unit in &units {
        unit.validate()?;
    }
    units.sort_by_key(|u| u.start);
    for pair in units.windows(2) {
        if pair[1].start < pair[0].end {
            return Err(IngestError::OverlappingUnits {
                first: pair[0].unit_id.clone(),
                second: pair[1].unit_id.clone(),
            });
        }
    }
    Ok(Session {
        learner: raw.learner,
        channels,
        units,
    })
}

impl Session {
    /// Renders the manifest JSON this session was (or could have been) loaded from.
    pub fn to_manifest_json(&self) -> String {
        let raw = RawManifest {
            learner: self.learner.clone(),
            channels: RawChannels {
                gaze: Some(self.channels.gaze.clone()),
                mouse: Some(self.channels.mouse.clone()),
                frames: Some(self.channels.frames.clone()),
            },
            units: self
                .units
                .iter()
                .map(|u| RawUnit {
                    unit_id: u.unit_id.clone(),
                    start_ms: u.start,
                    end_ms: u.end,
                    self_eval: u.self_eval,
                    class_eval: u.class_eval,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("manifest serializes") + "\n"
    }
}
