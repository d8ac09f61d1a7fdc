//! Per-player putting dispersion: directional error with a constant
//! standard deviation, distance error with a standard deviation that varies
//! along a knot profile.

mod fit;
pub(crate) mod records;

pub use fit::{estimate_angle_sd, estimate_distance_profile, DEFAULT_WINDOW};
pub use records::{
    read_angle_sds, read_profiles, read_putt_records, skills_from_tables, write_angle_sds, write_profiles,
};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::physics::GreenModel;

/// One row of a distance profile: at `hole` inches from the hole the player
/// rolls the ball `target` inches on average, with `sd` inches of spread.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Knot {
    pub hole: f64,
    pub target: f64,
    pub sd: f64,
}

impl Knot {
    pub const fn new(hole: f64, target: f64, sd: f64) -> Self {
        Self { hole, target, sd }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlayerSkill {
    pub name: String,
    /// Directional error standard deviation, radians.
    pub angle_sd: f64,
    profile: Vec<Knot>,
}

impl PlayerSkill {
    pub fn new(name: impl Into<String>, angle_sd: f64, profile: Vec<Knot>) -> Result<Self> {
        let name = name.into();
        if !(angle_sd.is_finite() && angle_sd >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "{name}: angle sd must be non-negative, got {angle_sd}"
            )));
        }
        if profile.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "{name}: distance profile needs at least two knots"
            )));
        }
        for k in &profile {
            if !(k.hole > 0.0 && k.target > 0.0 && k.sd >= 0.0 && k.sd.is_finite() && k.target.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name}: bad knot {k:?}")));
            }
        }
        if profile.windows(2).any(|w| w[1].hole <= w[0].hole) {
            return Err(Error::InvalidParameter(format!(
                "{name}: knot hole distances must be strictly increasing"
            )));
        }
        Ok(Self {
            name,
            angle_sd,
            profile,
        })
    }

    pub fn profile(&self) -> &[Knot] {
        &self.profile
    }

    /// Target roll and roll sd at `hole_dist`, linear between knots and
    /// clamped to the end knots outside the profile.
    pub fn interpolate(&self, hole_dist: f64) -> (f64, f64) {
        let first = self.profile[0];
        let last = self.profile[self.profile.len() - 1];
        if hole_dist <= first.hole {
            return (first.target, first.sd);
        }
        if hole_dist >= last.hole {
            return (last.target, last.sd);
        }
        let i = self.profile.partition_point(|k| k.hole <= hole_dist);
        let (a, b) = (self.profile[i - 1], self.profile[i]);
        let t = (hole_dist - a.hole) / (b.hole - a.hole);
        (a.target + t * (b.target - a.target), a.sd + t * (b.sd - a.sd))
    }

    /// Draws a directional error (radians) and an unobstructed roll length
    /// (inches) for a putt aimed `aim_dist` inches away. The roll sd is read
    /// off the profile at the aim distance.
    pub fn sample_putt<R: Rng + ?Sized>(&self, aim_dist: f64, rng: &mut R) -> (f64, f64) {
        let za: f64 = rng.sample(StandardNormal);
        let zr: f64 = rng.sample(StandardNormal);
        let (_, sd) = self.interpolate(aim_dist);
        (self.angle_sd * za, (aim_dist + sd * zr).max(0.0))
    }

    /// Samples and resolves one putt from `hole_dist` inches aimed to roll
    /// `aim_dist` inches.
    pub fn resolve_putt<R: Rng + ?Sized>(
        &self,
        hole_dist: f64,
        aim_dist: f64,
        green: &GreenModel,
        rng: &mut R,
    ) -> PuttOutcome {
        let (angle, roll) = self.sample_putt(aim_dist, rng);
        resolve_roll(hole_dist, angle, roll, green)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PuttOutcome {
    Holed,
    /// Ball at rest `rest_dist` inches from the hole; `x`, `y` in the
    /// start-centered frame with the hole on the positive y-axis.
    Missed {
        x: f64,
        y: f64,
        rest_dist: f64,
    },
}

impl PuttOutcome {
    pub fn is_holed(&self) -> bool {
        matches!(self, PuttOutcome::Holed)
    }

    /// Remaining distance to the hole, zero when holed.
    pub fn remaining(&self) -> f64 {
        match *self {
            PuttOutcome::Holed => 0.0,
            PuttOutcome::Missed { rest_dist, .. } => rest_dist,
        }
    }
}

/// Deterministic part of putt resolution: the ball leaves the origin at
/// `angle` off the hole line and would stop after `roll` inches.
pub fn resolve_roll(hole_dist: f64, angle: f64, roll: f64, green: &GreenModel) -> PuttOutcome {
    let (sin, cos) = angle.sin_cos();
    // Closest approach to the hole center along the ray.
    let along = hole_dist * cos;
    if along >= 0.0 && roll >= along {
        let lateral = green.to_meters(hole_dist * sin.abs());
        let speed = (green.to_meters(roll - along) / green.k_friction).sqrt();
        if green.captures(lateral, speed) {
            return PuttOutcome::Holed;
        }
    }
    let x = roll * sin;
    let y = roll * cos;
    PuttOutcome::Missed {
        x,
        y,
        rest_dist: x.hypot(y - hole_dist),
    }
}

/// A recorded putt in the rotated frame: start at the origin, hole on the
/// positive y-axis at `hole_dist` inches.
#[derive(Debug, Clone, PartialEq)]
pub struct PuttRecord {
    pub player: String,
    pub hole_dist: f64,
    pub final_x: f64,
    pub final_y: f64,
    pub holed: bool,
}
