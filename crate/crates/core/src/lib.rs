pub mod cli;
pub mod dataset;
pub mod dsp;
pub mod eval;
pub mod features;
pub mod models;
pub mod pipeline;
pub mod synth;
