//! Optimal putting strategies for stroke play and two-player match play.
//!
//! A player's putting skill is a direction error and a distance profile.
//! Sampling putts under a simple green model gives a discrete transition
//! model over distances to the hole. Stroke play is solved as a stochastic
//! shortest path; match play as a zero-sum stochastic game whose state tracks
//! both balls and the running hole difference.

pub mod analysis;
pub mod chain;
pub mod config;
pub mod error;
pub mod game;
pub mod par;
pub mod physics;
pub mod pipeline;
pub mod players;
pub mod rng;
pub mod skill;
pub mod ssp;
pub mod transitions;

pub use error::{Error, Result};
pub use physics::GreenModel;
pub use skill::PlayerSkill;
pub use transitions::{Discretization, TransitionModel};
