//! Flat-green ball physics.
//!
//! Distances on the green are carried in inches; the roll law `D = k·s²`
//! and the capture condition are evaluated in meters and m/s.

use crate::error::{Error, Result};

pub const METERS_PER_INCH: f64 = 0.0254;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenModel {
    /// `k` in `D = k·s²` (D in meters, s in m/s). 1.093 for a 12-foot stimp.
    pub k_friction: f64,
    /// Hole radius in meters.
    pub hole_radius: f64,
    /// Capture speed limit for a dead-center approach, m/s.
    pub max_capture_speed: f64,
    pub inches_per_meter: f64,
}

impl Default for GreenModel {
    fn default() -> Self {
        Self {
            k_friction: 1.093,
            hole_radius: 0.054,
            max_capture_speed: 1.63,
            inches_per_meter: 1.0 / METERS_PER_INCH,
        }
    }
}

impl GreenModel {
    pub fn new(k_friction: f64, hole_radius: f64, max_capture_speed: f64) -> Result<Self> {
        let green = Self {
            k_friction,
            hole_radius,
            max_capture_speed,
            ..Self::default()
        };
        green.validate()?;
        Ok(green)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("k_friction", self.k_friction),
            ("hole_radius", self.hole_radius),
            ("max_capture_speed", self.max_capture_speed),
            ("inches_per_meter", self.inches_per_meter),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn to_meters(&self, inches: f64) -> f64 {
        inches / self.inches_per_meter
    }

    pub fn to_inches(&self, meters: f64) -> f64 {
        meters * self.inches_per_meter
    }

    /// Hole radius in inches.
    pub fn hole_radius_in(&self) -> f64 {
        self.to_inches(self.hole_radius)
    }

    /// Speed (m/s) of a ball passing the hole at `hole_dist` along its path
    /// when it would come to rest at `rest_dist` without obstacles.
    pub fn speed_at_hole(&self, hole_dist: f64, rest_dist: f64) -> Result<f64> {
        if rest_dist < hole_dist || hole_dist < 0.0 {
            return Err(Error::BallShortOfHole {
                hole_in: hole_dist,
                rest_in: rest_dist,
            });
        }
        Ok((self.to_meters(rest_dist - hole_dist) / self.k_friction).sqrt())
    }

    /// Longest roll past the hole (inches) that can still be captured.
    pub fn max_overshoot(&self) -> f64 {
        self.to_inches(self.k_friction * self.max_capture_speed * self.max_capture_speed)
    }

    /// Capture test for a ball passing `lateral_dev` meters from the hole
    /// center at `speed` m/s. Strict on speed, so a ball at the rim is never
    /// captured.
    pub fn captures(&self, lateral_dev: f64, speed: f64) -> bool {
        if lateral_dev > self.hole_radius {
            return false;
        }
        let r = lateral_dev / self.hole_radius;
        speed < self.max_capture_speed * (1.0 - r * r)
    }
}
