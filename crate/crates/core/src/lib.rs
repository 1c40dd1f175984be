pub mod ingest;
pub mod features;
pub mod fusion;
pub mod models;
pub mod labeling;
pub mod synth;
pub mod pipeline;
pub mod cli;
