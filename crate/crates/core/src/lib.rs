pub mod augment;
pub mod cli;
pub mod beats;
pub mod geometry;
pub mod measure;
pub mod metrics;
pub mod pipeline;
pub mod synth;
