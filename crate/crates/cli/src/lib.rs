//! IO, configuration, embedding backends, and the experiment runner for the
//! transcript analysis pipeline. The algorithmic core lives in
//! `oddspeech-core`; this crate owns everything that touches files, sockets,
//! processes, and threads.

pub mod config;
pub mod load;
pub mod providers;
pub mod reports;
pub mod runner;
pub mod synth;
