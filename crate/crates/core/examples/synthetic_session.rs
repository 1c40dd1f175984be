//! Writes a seeded synthetic session, reads it back through ingest, and
//! shows how the hidden latent shows up in the channels.
//!
//! ```text
//! cargo run --example synthetic_session -- [out_dir] [n_units]
//! ```

use std::path::PathBuf;

use fuselearn::ingest::{unit_span, MouseMessage};
use fuselearn::pipeline::load_session;
use fuselearn::synth::{plan_session, write_session, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let dir: PathBuf = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("fuselearn-session"));
    let n_units: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(8);

    let config = SynthConfig {
        n_units,
        seed: 9,
        min_duration_ms: 60_000,
        max_duration_ms: 180_000,
        ..SynthConfig::default()
    };
    write_session(&config, &dir)?;
    let (session, streams) = load_session(&dir.join("manifest.json"))?;
    println!(
        "{}: {} units, {} gaze events, {} mouse events, {} frames",
        dir.display(),
        session.units.len(),
        streams.gaze.len(),
        streams.mouse.len(),
        streams.frames.len()
    );

    let (_, plans) = plan_session(&config)?;
    println!("\n{:<10}{:>8}{:>10}{:>12}{:>10}", "unit", "latent", "minutes", "gaze/s", "wheel/min");
    for plan in &plans {
        let unit = &plan.unit;
        let minutes = unit.duration() as f64 / 60_000.0;
        let gaze = unit_span(&streams.gaze, unit).len() as f64 / (minutes * 60.0);
        let wheel = unit_span(&streams.mouse, unit)
            .iter()
            .filter(|e| e.message == MouseMessage::Wheel)
            .count() as f64
            / minutes;
        println!(
            "{:<10}{:>8.3}{:>10.2}{:>12.1}{:>10.1}",
            unit.unit_id, plan.latent, minutes, gaze, wheel
        );
    }
    Ok(())
}
