//! Editorial queue simulator and waiting-time distribution toolkit.
//!
//! * [`sim`]: periodic batch-service queue with FIFO/RANDOM selection and
//!   LIFO/RANDOM overflow rejection.
//! * [`stats`]: waiting-time samples, summaries, normalized histograms.
//! * [`fitting`]: log-normal and cutoff power-law curve fits.
//! * [`ingest`]: submission/acceptance record files.
//! * [`cli`]: the `edqueue` command line.

pub mod cli;
pub mod fitting;
pub mod ingest;
pub mod rng;
pub mod sim;
pub mod stats;
