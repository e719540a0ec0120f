//! Verification of asynchronous event-driven programs modeled as systems of
//! machines communicating through FIFO queues.

pub mod abstraction;
pub mod frontend;
pub mod model;
pub mod qutl;
pub mod transformer;
pub mod explore;
pub mod driver;
pub mod invariants;
pub mod report;
