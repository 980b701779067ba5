//! Converting multi-agent systems with a system-level objective into
//! (state based) potential games: exact potential-equation verification,
//! local-information utility design, and learning-dynamics analysis.

pub mod chain;
pub mod definition;
pub mod dynamics;
pub mod game;
pub mod potential;
pub mod ratmat;
pub mod scenarios;
pub mod state_based;
pub mod stp;
