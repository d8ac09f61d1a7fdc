//! Bundled parameters for eight tour players: directional sd in radians and
//! (hole, target, sd) distance knots in inches.

use crate::skill::{Knot, PlayerSkill};

pub const NAMES: [&str; 8] = [
    "Cejka",
    "Els",
    "Johnson",
    "McIlroy",
    "Mickelson",
    "Owen",
    "Trahan",
    "Woods",
];

const ANGLE_SD: [(&str, f64); 8] = [
    ("Cejka", 0.028),
    ("Els", 0.025),
    ("Johnson", 0.027),
    ("McIlroy", 0.029),
    ("Mickelson", 0.028),
    ("Owen", 0.029),
    ("Trahan", 0.031),
    ("Woods", 0.025),
];

const PROFILES: [(&str, [Knot; 5]); 8] = [
    (
        "Johnson",
        [
            Knot::new(40.0, 58.33, 15.65),
            Knot::new(100.0, 117.84, 12.41),
            Knot::new(200.0, 211.65, 17.10),
            Knot::new(400.0, 406.10, 33.84),
            Knot::new(800.0, 800.70, 55.82),
        ],
    ),
    (
        "Els",
        [
            Knot::new(40.0, 58.71, 15.15),
            Knot::new(100.0, 113.76, 9.56),
            Knot::new(200.0, 212.41, 19.29),
            Knot::new(400.0, 409.76, 33.50),
            Knot::new(800.0, 802.37, 44.59),
        ],
    ),
    (
        "Woods",
        [
            Knot::new(40.0, 64.49, 22.49),
            Knot::new(100.0, 114.81, 11.83),
            Knot::new(200.0, 220.71, 18.72),
            Knot::new(400.0, 412.20, 30.38),
            Knot::new(800.0, 808.77, 44.61),
        ],
    ),
    (
        "Mickelson",
        [
            Knot::new(40.0, 67.10, 19.01),
            Knot::new(100.0, 121.29, 13.19),
            Knot::new(200.0, 215.84, 18.32),
            Knot::new(400.0, 407.37, 37.79),
            Knot::new(800.0, 801.95, 59.84),
        ],
    ),
    (
        "McIlroy",
        [
            Knot::new(40.0, 56.89, 11.27),
            Knot::new(100.0, 122.02, 15.49),
            Knot::new(200.0, 217.90, 14.40),
            Knot::new(400.0, 411.13, 35.01),
            Knot::new(800.0, 798.36, 47.98),
        ],
    ),
    (
        "Cejka",
        [
            Knot::new(40.0, 60.36, 16.28),
            Knot::new(100.0, 113.59, 13.57),
            Knot::new(200.0, 211.14, 18.02),
            Knot::new(400.0, 398.35, 37.14),
            Knot::new(800.0, 795.15, 69.29),
        ],
    ),
    (
        "Owen",
        [
            Knot::new(40.0, 63.69, 13.17),
            Knot::new(100.0, 117.67, 13.03),
            Knot::new(200.0, 212.63, 15.79),
            Knot::new(400.0, 402.33, 40.88),
            Knot::new(800.0, 798.66, 49.42),
        ],
    ),
    (
        "Trahan",
        [
            Knot::new(40.0, 54.59, 19.68),
            Knot::new(100.0, 120.60, 13.02),
            Knot::new(200.0, 213.92, 19.95),
            Knot::new(400.0, 408.32, 31.98),
            Knot::new(800.0, 808.22, 32.72),
        ],
    ),
];

pub fn builtin(name: &str) -> Option<PlayerSkill> {
    let angle = ANGLE_SD.iter().find(|(n, _)| *n == name)?.1;
    let profile = PROFILES.iter().find(|(n, _)| *n == name)?.1;
    Some(PlayerSkill::new(name, angle, profile.to_vec()).expect("bundled tables are valid"))
}

/// All bundled players in alphabetical order.
pub fn all() -> Vec<PlayerSkill> {
    NAMES.iter().map(|n| builtin(n).unwrap()).collect()
}

/// Nine head-to-head pairings over the bundled players, `(player 1, player 2)`.
pub const SCENARIOS: [(&str, &str); 9] = [
    ("Johnson", "Els"),
    ("Woods", "Mickelson"),
    ("McIlroy", "Cejka"),
    ("Owen", "Trahan"),
    ("Els", "Woods"),
    ("Mickelson", "McIlroy"),
    ("Cejka", "Owen"),
    ("Trahan", "Johnson"),
    ("Woods", "Johnson"),
];
