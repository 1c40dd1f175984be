//! Seeded synthetic sessions driven by a hidden per-unit state.
//!
//! Every unit draws a latent `L ~ U[0.2, 0.95]`. Each channel sees its own
//! noisy copy `E_c = clamp(L + N(0, noise_c), 0, 1)` and is shaped by the
//! drive `d_c = beta_c * (1 - E_c)`:
//!
//! - gaze: saccade rate, saccade length, and fixation jitter grow with `d`;
//! - mouse: idle bouts lengthen and wheel bursts get larger with `d`;
//! - frames: yaw/pitch wander wider and emotions lean neutral/negative with `d`.
//!
//! With `beta_c = 0` a channel carries no information about `L`.
//!
//! Randomness: ChaCha8 seeded by `seed`. Stream 0 draws the learner, stream
//! `2i + 1` unit `i`'s plan (duration, gap, latent, evaluations), stream
//! `2i + 2` its events. Units can therefore be generated independently.

use std::fs::File;
use std::io::{BufWriter, Write as _};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{
    frames_header, write_frame_rows, write_gaze_rows, write_mouse_rows, Channel, ChannelFiles,
    FrameSample, GazeEvent, GazeEventType, Learner, LearningUnit, Millis, MouseEvent,
    MouseMessage, Session, GAZE_HEADER, MOUSE_HEADER, N_EMOTIONS,
};

pub const GAZE_FILE: &str = "gaze.csv";
pub const MOUSE_FILE: &str = "mouse.csv";
pub const FRAMES_FILE: &str = "frames.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const GROUND_TRUTH_FILE: &str = "ground_truth.csv";

const SCREEN_W: f64 = 1920.0;
const SCREEN_H: f64 = 1080.0;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synth config: {0}")]
    InvalidConfig(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// One value per channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerChannel {
    pub video: f64,
    pub eye: f64,
    pub mouse: f64,
}

impl PerChannel {
    pub fn splat(v: f64) -> Self {
        PerChannel {
            video: v,
            eye: v,
            mouse: v,
        }
    }

    pub fn get(&self, channel: Channel) -> f64 {
        match channel {
            Channel::Video => self.video,
            Channel::Eye => self.eye,
            Channel::Mouse => self.mouse,
        }
    }

    pub fn set(&mut self, channel: Channel, v: f64) {
        match channel {
            Channel::Video => self.video = v,
            Channel::Eye => self.eye = v,
            Channel::Mouse => self.mouse = v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub n_units: usize,
    pub seed: u64,
    pub min_duration_ms: Millis,
    pub max_duration_ms: Millis,
    /// Idle time before each unit.
    pub min_gap_ms: Millis,
    pub max_gap_ms: Millis,
    /// How strongly the latent shapes each channel, in `[0, 1]`.
    pub coupling: PerChannel,
    /// Std of the per-channel perturbation of the latent.
    pub latent_noise: PerChannel,
    pub self_eval_noise: f64,
    pub class_eval_noise: f64,
    pub gaze_hz: f64,
    pub mouse_move_hz: f64,
    pub frame_fps: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_units: 200,
            seed: 0,
            min_duration_ms: 5 * 60_000,
            max_duration_ms: 15 * 60_000,
            min_gap_ms: 5_000,
            max_gap_ms: 30_000,
            coupling: PerChannel::splat(1.0),
            latent_noise: PerChannel::splat(0.25),
            self_eval_noise: 4.0,
            class_eval_noise: 5.0,
            gaze_hz: 30.0,
            mouse_move_hz: 20.0,
            frame_fps: 15.0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |msg: String| Err(SynthError::InvalidConfig(msg));
        if self.n_units < 1 {
            return bad("n_units must be at least 1".into());
        }
        if self.min_duration_ms < 1000 || self.max_duration_ms < self.min_duration_ms {
            return bad(format!(
                "duration range {}..{} ms",
                self.min_duration_ms, self.max_duration_ms
            ));
        }
        if self.min_gap_ms < 0 || self.max_gap_ms < self.min_gap_ms {
            return bad(format!("gap range {}..{} ms", self.min_gap_ms, self.max_gap_ms));
        }
        for c in Channel::ALL {
            let beta = self.coupling.get(c);
            if !(0.0..=1.0).contains(&beta) {
                return bad(format!("coupling for {c} = {beta}, outside [0, 1]"));
            }
            let noise = self.latent_noise.get(c);
            if !(noise >= 0.0 && noise.is_finite()) {
                return bad(format!("latent noise for {c} = {noise}"));
            }
        }
        for (name, v) in [
            ("self_eval_noise", self.self_eval_noise),
            ("class_eval_noise", self.class_eval_noise),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} = {v}"));
            }
        }
        for (name, v) in [
            ("gaze_hz", self.gaze_hz),
            ("mouse_move_hz", self.mouse_move_hz),
            ("frame_fps", self.frame_fps),
        ] {
            if !(v > 0.0 && v <= 1000.0) {
                return bad(format!("{name} = {v}"));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, SynthError> {
        let config: SynthConfig =
            serde_json::from_str(text).map_err(|e| SynthError::InvalidConfig(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }
}

/// Per-unit decisions drawn before any events.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitPlan {
    pub unit: LearningUnit,
    pub latent: f64,
    /// `d_c` for each channel.
    pub drive: PerChannel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthUnit {
    pub plan: UnitPlan,
    pub gaze: Vec<GazeEvent>,
    pub mouse: Vec<MouseEvent>,
    pub frames: Vec<FrameSample>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSession {
    pub session: Session,
    /// `(unit_id, latent)` in unit order.
    pub latents: Vec<(String, f64)>,
    pub gaze: Vec<GazeEvent>,
    pub mouse: Vec<MouseEvent>,
    pub frames: Vec<FrameSample>,
}

fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn gauss(rng: &mut ChaCha8Rng, sd: f64) -> f64 {
    if sd == 0.0 {
        return 0.0;
    }
    Normal::new(0.0, sd).expect("finite sd").sample(rng)
}

fn round_to(v: f64, step: f64) -> f64 {
    (v / step).round() * step
}

/// The session skeleton: learner plus every unit's plan.
pub fn plan_session(config: &SynthConfig) -> Result<(Learner, Vec<UnitPlan>), SynthError> {
    config.validate()?;
    let mut rng = stream(config.seed, 0);
    let learner = Learner {
        name: format!("synthetic-{}", config.seed),
        major: "unspecified".into(),
        sex: if rng.gen_bool(0.5) { "f" } else { "m" }.into(),
        age: rng.gen_range(18..=30),
        mastery: round_to(rng.gen_range(30.0..90.0), 0.1),
    };
    let mut plans = Vec::with_capacity(config.n_units);
    let mut clock: Millis = 0;
    for i in 0..config.n_units {
        let mut rng = stream(config.seed, 2 * i as u64 + 1);
        let gap = rng.gen_range(config.min_gap_ms..=config.max_gap_ms);
        let duration = rng.gen_range(config.min_duration_ms..=config.max_duration_ms);
        let latent: f64 = rng.gen_range(0.2..0.95);
        let mut drive = PerChannel::splat(0.0);
        for c in Channel::ALL {
            let seen = (latent + gauss(&mut rng, config.latent_noise.get(c))).clamp(0.0, 1.0);
            drive.set(c, config.coupling.get(c) * (1.0 - seen));
        }
        let self_eval =
            (10.0 + 90.0 * latent + gauss(&mut rng, config.self_eval_noise)).clamp(10.0, 100.0);
        let class_eval =
            (100.0 * latent + gauss(&mut rng, config.class_eval_noise)).clamp(0.0, 100.0);
        let start = clock + gap;
        clock = start + duration;
        plans.push(UnitPlan {
            unit: LearningUnit {
                unit_id: format!("u{i:04}"),
                start,
                end: clock,
                self_eval: round_to(self_eval, 0.1).clamp(10.0, 100.0),
                class_eval: round_to(class_eval, 0.1).clamp(0.0, 100.0),
                mastery: learner.mastery,
            },
            latent,
            drive,
        });
    }
    Ok((learner, plans))
}

/// Sample times `start + k * 1000 / hz` strictly before `end`.
fn sample_times(start: Millis, end: Millis, hz: f64) -> impl Iterator<Item = Millis> {
    let period = 1000.0 / hz;
    (0..)
        .map(move |k: i64| start + (k as f64 * period).round() as Millis)
        .take_while(move |&t| t < end)
}

fn reflect(v: f64, hi: f64) -> f64 {
    let v = if v < 0.0 { -v } else { v };
    let v = if v > hi { 2.0 * hi - v } else { v };
    v.clamp(0.0, hi)
}

fn gaze_stream(rng: &mut ChaCha8Rng, start: Millis, end: Millis, d: f64, hz: f64) -> Vec<GazeEvent> {
    let saccade_prob = (0.07 * (1.0 + 2.5 * d)).min(0.5);
    let jitter = 3.0 + 12.0 * d;
    let reach = 120.0 + 450.0 * d;
    let mut fix = (
        rng.gen_range(0.3..0.7) * SCREEN_W,
        rng.gen_range(0.3..0.7) * SCREEN_H,
    );
    let mut saccade: Option<((f64, f64), (f64, f64), u8)> = None;
    let mut events = Vec::new();
    for t in sample_times(start, end, hz) {
        let (kind, x, y) = if let Some((from, to, step)) = saccade {
            let f = step as f64 / 2.0;
            saccade = if step >= 2 { None } else { Some((from, to, step + 1)) };
            (
                GazeEventType::Saccade,
                from.0 + (to.0 - from.0) * f,
                from.1 + (to.1 - from.1) * f,
            )
        } else if rng.gen_bool(saccade_prob) {
            let angle = rng.gen_range(0.0..std::f64::consts::TAU);
            let len = 40.0 + gauss(rng, reach).abs();
            let to = (
                reflect(fix.0 + len * angle.cos(), SCREEN_W),
                reflect(fix.1 + len * angle.sin(), SCREEN_H),
            );
            let from = fix;
            fix = to;
            saccade = Some((from, to, 2));
            (
                GazeEventType::Saccade,
                from.0 + (to.0 - from.0) * 0.5,
                from.1 + (to.1 - from.1) * 0.5,
            )
        } else if rng.gen_bool(0.01) {
            (GazeEventType::Unclassified, fix.0, fix.1)
        } else {
            (
                GazeEventType::Fixation,
                fix.0 + gauss(rng, jitter),
                fix.1 + gauss(rng, jitter),
            )
        };
        events.push(GazeEvent {
            timestamp: t,
            event_type: kind,
            x: round_to(x.clamp(0.0, SCREEN_W), 0.01),
            y: round_to(y.clamp(0.0, SCREEN_H), 0.01),
        });
    }
    events
}

fn mouse_stream(rng: &mut ChaCha8Rng, start: Millis, end: Millis, d: f64, hz: f64) -> Vec<MouseEvent> {
    let active_mean = 4000.0 * (1.0 - 0.5 * d);
    let idle_mean = 1500.0 * (1.0 + 5.0 * d);
    let burst_prob = 0.004 * (1.0 + 4.0 * d);
    let burst = Poisson::new(1.0 + 6.0 * d).expect("positive rate");
    let speed_scale = rng.gen_range(0.7..1.3);
    let period = (1000.0 / hz).round().max(1.0) as Millis;

    let mut pos = (rng.gen_range(0.0..SCREEN_W), rng.gen_range(0.0..SCREEN_H));
    let mut vel = (0.0, 0.0);
    let mut events = Vec::new();
    let emit = |events: &mut Vec<MouseEvent>, message, time, pos: (f64, f64), wheel| {
        events.push(MouseEvent {
            message,
            time,
            x: pos.0.round(),
            y: pos.1.round(),
            wheel,
        })
    };
    let mut t = start + rng.gen_range(0..period);
    let mut active = rng.gen_bool(0.5);
    while t < end {
        let bout_mean = if active { active_mean } else { idle_mean };
        let bout = Exp::new(1.0 / bout_mean).expect("positive mean").sample(rng) as Millis + 1;
        let bout_end = (t + bout).min(end);
        if !active {
            t = bout_end;
            active = true;
            continue;
        }
        while t < bout_end {
            vel.0 = 0.85 * vel.0 + gauss(rng, 6.0 * speed_scale);
            vel.1 = 0.85 * vel.1 + gauss(rng, 4.0 * speed_scale);
            pos.0 = reflect(pos.0 + vel.0, SCREEN_W);
            pos.1 = reflect(pos.1 + vel.1, SCREEN_H);
            emit(&mut events, MouseMessage::Move, t, pos, 0);
            let r: f64 = rng.gen();
            if r < 0.02 || (0.02..0.023).contains(&r) {
                let (down, up) = if r < 0.02 {
                    (MouseMessage::LeftDown, MouseMessage::LeftUp)
                } else {
                    (MouseMessage::RightDown, MouseMessage::RightUp)
                };
                let hold = rng.gen_range(60..160);
                if t + hold < end {
                    emit(&mut events, down, t, pos, 0);
                    emit(&mut events, up, t + hold, pos, 0);
                    t += hold;
                }
            } else if rng.gen_bool(burst_prob) {
                let n = 1 + burst.sample(rng) as u32;
                let delta = if rng.gen_bool(0.7) { -120 } else { 120 };
                for _ in 0..n {
                    if t >= end {
                        break;
                    }
                    emit(&mut events, MouseMessage::Wheel, t, pos, delta);
                    t += 30;
                }
            }
            t += period + rng.gen_range(0..=period / 5);
        }
        active = false;
    }
    events
}

/// Emotion leanings as a function of the drive: happiness falls, neutral and
/// the negative emotions rise.
fn emotion_bias(d: f64) -> [f64; N_EMOTIONS] {
    [
        1.0 - 2.0 * d,
        -0.5 + 1.5 * d,
        0.0,
        -1.0 + d,
        -1.0 + d,
        -1.0 + 0.5 * d,
        0.5 + 1.5 * d,
    ]
}

fn frame_stream(rng: &mut ChaCha8Rng, start: Millis, end: Millis, d: f64, fps: f64) -> Vec<FrameSample> {
    let wander = 0.01 + 0.06 * d;
    let yaw_center = rng.gen_range(-0.2..0.2);
    let pitch_center = rng.gen_range(-0.15..0.15);
    let bias = emotion_bias(d);
    let (mut yaw, mut pitch) = (yaw_center, pitch_center);
    let mut mood = [0.0; N_EMOTIONS];
    let mut frames = Vec::new();
    for t in sample_times(start, end, fps) {
        yaw = (yaw_center + 0.97 * (yaw - yaw_center) + gauss(rng, wander)).clamp(-1.0, 1.0);
        pitch =
            (pitch_center + 0.97 * (pitch - pitch_center) + gauss(rng, 0.7 * wander)).clamp(-1.0, 1.0);
        let roll = gauss(rng, 0.02).clamp(-1.0, 1.0);
        let mut logits = [0.0; N_EMOTIONS];
        for k in 0..N_EMOTIONS {
            mood[k] = 0.95 * mood[k] + gauss(rng, 0.15);
            logits[k] = bias[k] + mood[k];
        }
        let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
        let total: f64 = weights.iter().sum();
        // Floor the first six to 1e-4 and give the remainder to neutral so the
        // written vector sums to one and survives a text round trip unchanged.
        let mut emotion = [0.0; N_EMOTIONS];
        for k in 0..N_EMOTIONS - 1 {
            emotion[k] = (weights[k] / total * 1e4).floor() / 1e4;
        }
        emotion[N_EMOTIONS - 1] = 1.0 - emotion[..N_EMOTIONS - 1].iter().sum::<f64>();
        frames.push(FrameSample {
            timestamp: t,
            yaw: round_to(yaw, 1e-4),
            pitch: round_to(pitch, 1e-4),
            roll: round_to(roll, 1e-4),
            emotion,
        });
    }
    frames
}

/// Generates the events of one planned unit.
pub fn generate_unit(config: &SynthConfig, index: usize, plan: &UnitPlan) -> SynthUnit {
    let mut rng = stream(config.seed, 2 * index as u64 + 2);
    let (start, end) = (plan.unit.start, plan.unit.end);
    let gaze = gaze_stream(&mut rng, start, end, plan.drive.eye, config.gaze_hz);
    let mouse = mouse_stream(&mut rng, start, end, plan.drive.mouse, config.mouse_move_hz);
    let frames = frame_stream(&mut rng, start, end, plan.drive.video, config.frame_fps);
    SynthUnit {
        plan: plan.clone(),
        gaze,
        mouse,
        frames,
    }
}

fn session_of(learner: Learner, plans: &[UnitPlan]) -> Session {
    Session {
        learner,
        channels: ChannelFiles {
            gaze: GAZE_FILE.into(),
            mouse: MOUSE_FILE.into(),
            frames: FRAMES_FILE.into(),
        },
        units: plans.iter().map(|p| p.unit.clone()).collect(),
    }
}

/// Whole session in memory.
pub fn generate_session(config: &SynthConfig) -> Result<SynthSession, SynthError> {
    let (learner, plans) = plan_session(config)?;
    let mut out = SynthSession {
        session: session_of(learner, &plans),
        latents: plans
            .iter()
            .map(|p| (p.unit.unit_id.clone(), p.latent))
            .collect(),
        gaze: Vec::new(),
        mouse: Vec::new(),
        frames: Vec::new(),
    };
    for (i, plan) in plans.iter().enumerate() {
        let unit = generate_unit(config, i, plan);
        out.gaze.extend(unit.gaze);
        out.mouse.extend(unit.mouse);
        out.frames.extend(unit.frames);
    }
    Ok(out)
}

pub fn ground_truth_csv(latents: &[(String, f64)]) -> String {
    let mut out = String::from("unit_id,latent\n");
    for (id, l) in latents {
        out.push_str(&format!("{id},{l}\n"));
    }
    out
}

/// Writes manifest, the three channel files, and `ground_truth.csv` into
/// `dir`, one unit at a time.
pub fn write_session(config: &SynthConfig, dir: &Path) -> Result<Session, SynthError> {
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| SynthError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let (learner, plans) = plan_session(config)?;
    let open = |name: &str| -> Result<BufWriter<File>, SynthError> {
        let path = dir.join(name);
        Ok(BufWriter::new(File::create(&path).map_err(io(&path))?))
    };
    let mut gaze = open(GAZE_FILE)?;
    let mut mouse = open(MOUSE_FILE)?;
    let mut frames = open(FRAMES_FILE)?;
    let mut chunks = [
        format!("{GAZE_HEADER}\n"),
        format!("{MOUSE_HEADER}\n"),
        frames_header() + "\n",
    ];
    for (i, plan) in plans.iter().enumerate() {
        let unit = generate_unit(config, i, plan);
        write_gaze_rows(&mut chunks[0], &unit.gaze);
        write_mouse_rows(&mut chunks[1], &unit.mouse);
        write_frame_rows(&mut chunks[2], &unit.frames);
        for (chunk, (file, name)) in chunks.iter_mut().zip([
            (&mut gaze, GAZE_FILE),
            (&mut mouse, MOUSE_FILE),
            (&mut frames, FRAMES_FILE),
        ]) {
            file.write_all(chunk.as_bytes())
                .map_err(io(&dir.join(name)))?;
            chunk.clear();
        }
    }
    for (mut file, name) in [(gaze, GAZE_FILE), (mouse, MOUSE_FILE), (frames, FRAMES_FILE)] {
        file.flush().map_err(io(&dir.join(name)))?;
    }
    let session = session_of(learner, &plans);
    let latents: Vec<(String, f64)> = plans
        .iter()
        .map(|p| (p.unit.unit_id.clone(), p.latent))
        .collect();
    for (name, text) in [
        (MANIFEST_FILE, session.to_manifest_json()),
        (GROUND_TRUTH_FILE, ground_truth_csv(&latents)),
    ] {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(io(&path))?;
    }
    Ok(session)
}
