//! Comparisons between stroke-play and match-play strategies.

use std::io::Write;

use rand::Rng;

use crate::error::{Error, Result};
use crate::game::{best_response, MatchGame, MatchSolution, Node, Player, Profile, SolverConfig, TurnBasedGame};
use crate::par;
use crate::physics::GreenModel;
use crate::rng::substream;
use crate::skill::{PlayerSkill, PuttOutcome};
use crate::ssp::StrokeSolution;

/// Plays the stroke-play offset for the player's own distance at every
/// state that player owns, ignoring the opponent and the score. Entries at
/// other states are zero.
pub fn lift_stroke_policy(stroke: &StrokeSolution, game: &MatchGame<'_>, player: Player) -> Result<Profile> {
    if stroke.policy.len() != game.n_positions() + 1 {
        return Err(Error::MismatchedDiscretization);
    }
    Ok((0..game.num_states())
        .map(|i| {
            if game.owner(i) != Some(player) {
                return 0;
            }
            let st = game.state(i);
            let own = match player {
                Player::One => st.s1,
                Player::Two => st.s2,
            };
            stroke.policy[own]
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapRow {
    pub delta: i32,
    pub weight: f64,
    pub sum: f64,
    pub max: f64,
}

impl GapRow {
    pub fn mean(&self) -> f64 {
        if self.weight > 0.0 {
            self.sum / self.weight
        } else {
            0.0
        }
    }
}

/// Per shot difference, the mean and largest value player two gains by
/// playing the match equilibrium instead of its stroke-play strategy
/// (player one best-responding either way). Accumulates over any number of
/// games.
#[derive(Debug, Clone, PartialEq)]
pub struct GapTable {
    pub rows: Vec<GapRow>,
}

impl GapTable {
    pub fn new(delta_cap: usize) -> Self {
        let c = delta_cap as i32;
        Self {
            rows: (-c..=c)
                .map(|delta| GapRow {
                    delta,
                    weight: 0.0,
                    sum: 0.0,
                    max: 0.0,
                })
                .collect(),
        }
    }

    pub fn row(&self, delta: i32) -> Option<&GapRow> {
        self.rows.iter().find(|r| r.delta == delta)
    }

    /// Adds one game's per-state gaps over its non-terminal states, each
    /// weighted by `weight(state)`.
    pub fn accumulate<F: Fn(usize) -> f64>(&mut self, game: &MatchGame<'_>, gaps: &[f64], weight: F) {
        for (i, &g) in gaps.iter().enumerate() {
            if game.owner(i).is_none() {
                continue;
            }
            let delta = game.state(i).delta;
            let w = weight(i);
            if let Some(row) = self.rows.iter_mut().find(|r| r.delta == delta) {
                row.weight += w;
                row.sum += w * g;
                if w > 0.0 {
                    row.max = row.max.max(g);
                }
            }
        }
    }

    pub fn min_gap_seen(&self) -> f64 {
        self.rows.iter().map(|r| r.mean()).fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateGaps {
    /// Values with player two fixed to the lifted stroke strategy and player
    /// one best-responding.
    pub fixed_values: Vec<f64>,
    /// Best response of player one to the lifted strategy.
    pub fixed_profile: Profile,
    /// `fixed_values − equilibrium values`, per state.
    pub gaps: Vec<f64>,
}

pub fn state_gaps(
    game: &MatchGame<'_>,
    equilibrium: &MatchSolution,
    lifted2: &[usize],
    cfg: &SolverConfig,
) -> Result<StateGaps> {
    let (fixed_profile, fixed_values) = best_response(game, Player::Two, lifted2, cfg)?;
    let gaps = fixed_values
        .iter()
        .zip(&equilibrium.values)
        .map(|(f, e)| f - e)
        .collect();
    Ok(StateGaps {
        fixed_values,
        fixed_profile,
        gaps,
    })
}

/// Gap table of a single game with uniform weights over non-terminal states.
pub fn gap_table(
    game: &MatchGame<'_>,
    equilibrium: &MatchSolution,
    lifted2: &[usize],
    cfg: &SolverConfig,
) -> Result<GapTable> {
    let g = state_gaps(game, equilibrium, lifted2, cfg)?;
    let mut table = GapTable::new(game.delta_cap);
    table.accumulate(game, &g.gaps, |_| 1.0);
    Ok(table)
}

/// `delta,mean_gap,max_gap`.
pub fn write_gap_table<W: Write>(mut w: W, table: &GapTable) -> std::io::Result<()> {
    writeln!(w, "delta,mean_gap,max_gap")?;
    for r in &table.rows {
        writeln!(w, "{},{:.4},{:.4}", r.delta, r.mean(), r.max)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiffClass {
    Aggressive,
    Conservative,
    Same,
}

impl DiffClass {
    pub fn label(self) -> &'static str {
        match self {
            DiffClass::Aggressive => "AGGRESSIVE",
            DiffClass::Conservative => "CONSERVATIVE",
            DiffClass::Same => "SAME",
        }
    }

    pub fn classify(diff_in: f64, threshold: f64) -> Self {
        if diff_in >= threshold {
            DiffClass::Aggressive
        } else if diff_in <= -threshold {
            DiffClass::Conservative
        } else {
            DiffClass::Same
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffEntry {
    pub delta: i32,
    pub s1: usize,
    pub s2: usize,
    pub class: DiffClass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyDiffMap {
    pub threshold: f64,
    pub entries: Vec<DiffEntry>,
}

impl PolicyDiffMap {
    pub fn count(&self, delta: i32, class: DiffClass) -> usize {
        self.entries
            .iter()
            .filter(|e| e.delta == delta && e.class == class)
            .count()
    }
}

pub const DEFAULT_THRESHOLD_IN: f64 = 10.0;

/// Classifies player two's equilibrium aim against its stroke-play aim at
/// every state player two owns.
pub fn diff_map(
    stroke2: &StrokeSolution,
    game: &MatchGame<'_>,
    equilibrium: &MatchSolution,
    threshold: f64,
) -> Result<PolicyDiffMap> {
    let lifted = lift_stroke_policy(stroke2, game, Player::Two)?;
    let entries = (0..game.num_states())
        .filter(|&i| game.owner(i) == Some(Player::Two))
        .map(|i| {
            let st = game.state(i);
            let diff = game.offset_in(equilibrium.profile[i]) - game.offset_in(lifted[i]);
            DiffEntry {
                delta: st.delta,
                s1: st.s1,
                s2: st.s2,
                class: DiffClass::classify(diff, threshold),
            }
        })
        .collect();
    Ok(PolicyDiffMap { threshold, entries })
}

/// `delta,s1,s2,class`.
pub fn write_diff_map<W: Write>(mut w: W, map: &PolicyDiffMap) -> std::io::Result<()> {
    writeln!(w, "delta,s1,s2,class")?;
    for e in &map.entries {
        writeln!(w, "{},{},{},{}", e.delta, e.s1, e.s2, e.class.label())?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationResult {
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
}

const MAX_STEPS_PER_TRIAL: usize = 1_000_000;

/// Monte Carlo play-out of the match from `start`, each trial on its own
/// sub-stream of `seed`. Player one follows `strategy1` and player two
/// `strategy2` (both indexed by state).
pub fn simulate_match(
    game: &MatchGame<'_>,
    strategy1: &[usize],
    strategy2: &[usize],
    start: usize,
    trials: usize,
    seed: u64,
) -> Result<SimulationResult> {
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let outcomes = par::map_indices(trials, |t| {
        let mut rng = substream(seed, &[t as u64]);
        let mut state = start;
        for _ in 0..MAX_STEPS_PER_TRIAL {
            let action = match game.node(state) {
                Node::Terminal(v) => return Some(v),
                Node::Decision { owner: Player::One, .. } => strategy1[state],
                Node::Decision { owner: Player::Two, .. } => strategy2[state],
            };
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut next = None;
            game.successors(state, action, &mut |s, p| {
                acc += p;
                if next.is_none() && u < acc {
                    next = Some(s);
                }
            });
            // Rounding can leave `u` just above the accumulated mass.
            state = match next {
                Some(s) => s,
                None => {
                    let mut last = state;
                    game.successors(state, action, &mut |s, p| {
                        if p > 0.0 {
                            last = s
                        }
                    });
                    last
                }
            };
        }
        None
    });
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for o in &outcomes {
        let v = o.ok_or(Error::NoConvergence {
            iterations: MAX_STEPS_PER_TRIAL,
            residual: f64::NAN,
        })?;
        sum += v;
        sum_sq += v * v;
    }
    let n = trials as f64;
    let mean = sum / n;
    let var = if trials > 1 {
        ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(SimulationResult {
        mean,
        std_error: (var / n).sqrt(),
        trials,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaptureRow {
    pub player: String,
    pub distance: f64,
    pub capture_rate: f64,
    /// Mean distance left by missed putts; `None` when every putt dropped.
    pub mean_remaining: Option<f64>,
}

/// Holing rate and mean leave when each player aims at their own fitted
/// target from each distance.
pub fn capture_rate_table(
    skills: &[PlayerSkill],
    green: &GreenModel,
    distances: &[f64],
    samples: usize,
    seed: u64,
) -> Result<Vec<CaptureRow>> {
    if samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let nd = distances.len();
    Ok(par::map_indices(skills.len() * nd, |cell| {
        let (p, k) = (cell / nd, cell % nd);
        let skill = &skills[p];
        let d = distances[k];
        let aim = skill.interpolate(d).0;
        let mut rng = substream(seed, &[p as u64, k as u64]);
        let (mut holed, mut left) = (0usize, 0.0);
        for _ in 0..samples {
            match skill.resolve_putt(d, aim, green, &mut rng) {
                PuttOutcome::Holed => holed += 1,
                PuttOutcome::Missed { rest_dist, .. } => left += rest_dist,
            }
        }
        let misses = samples - holed;
        CaptureRow {
            player: skill.name.clone(),
            distance: d,
            capture_rate: holed as f64 / samples as f64,
            mean_remaining: (misses > 0).then(|| left / misses as f64),
        }
    }))
}

/// `player,cr,rd,dh`.
pub fn write_capture_rates<W: Write>(mut w: W, rows: &[CaptureRow]) -> std::io::Result<()> {
    writeln!(w, "player,cr,rd,dh")?;
    for r in rows {
        let rd = r.mean_remaining.map_or(String::new(), |x| format!("{x:.4}"));
        writeln!(w, "{},{:.4},{},{:.4}", r.player, r.capture_rate, rd, r.distance)?;
    }
    Ok(())
}
