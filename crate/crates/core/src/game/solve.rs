use rand::Rng;

use super::{evaluate_profile, greedy_action, profile_residual, q_value, Node, Player, Profile, TurnBasedGame};
use crate::chain::SolveOptions;
use crate::error::{Error, Result};
use crate::par;
use crate::rng::stream;

/// Upper bound on the profile count accepted by [`brute_force_value`].
pub const BRUTE_FORCE_LIMIT: u64 = 1_000_000;

/// How many improving states are switched before the next evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwitchRule {
    /// One state per evaluation, lowest index first.
    Single,
    /// Every improvable state of the moving player at once.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Improvement margin: a switch must gain more than this.
    pub tol: f64,
    /// Seeds the random initial profile.
    pub init_seed: u64,
    pub switch: SwitchRule,
    pub chain: SolveOptions,
    /// Cap on evaluations before giving up.
    pub max_evaluations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            init_seed: 0,
            switch: SwitchRule::All,
            chain: SolveOptions::default(),
            max_evaluations: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchSolution {
    pub profile: Profile,
    /// Game value per state, in player-one points.
    pub values: Vec<f64>,
    /// Rounds of the outer (player two) loop.
    pub iterations: usize,
    pub evaluations: usize,
}

/// States of `player` where some action beats the current value by more
/// than `tol`, with that player's greedy action.
fn improvements<G: TurnBasedGame>(game: &G, values: &[f64], player: Player, tol: f64) -> Vec<(usize, usize)> {
    par::map_indices(game.num_states(), |s| {
        if game.owner(s) != Some(player) {
            return None;
        }
        let (a, q) = greedy_action(game, values, s)?;
        player.prefers(q, values[s], tol).then_some((s, a))
    })
    .into_iter()
    .flatten()
    .collect()
}

fn apply(profile: &mut [usize], switches: &[(usize, usize)], rule: SwitchRule) {
    let take = match rule {
        SwitchRule::Single => 1,
        SwitchRule::All => switches.len(),
    };
    for &(s, a) in &switches[..take] {
        profile[s] = a;
    }
}

struct Evaluator<'a, G> {
    game: &'a G,
    cfg: &'a SolverConfig,
    count: usize,
}

impl<G: TurnBasedGame> Evaluator<'_, G> {
    fn eval(&mut self, profile: &[usize], warm: Option<&[f64]>) -> Result<Vec<f64>> {
        if self.count >= self.cfg.max_evaluations {
            return Err(Error::NoConvergence {
                iterations: self.count,
                residual: f64::NAN,
            });
        }
        self.count += 1;
        evaluate_profile(self.game, profile, &self.cfg.chain, warm)
    }

    /// Improves `player`'s strategy against the other player's fixed one
    /// until no state can gain more than `tol`.
    fn optimize(&mut self, profile: &mut [usize], values: &mut Vec<f64>, player: Player) -> Result<()> {
        loop {
            let switches = improvements(self.game, values, player, self.cfg.tol);
            if switches.is_empty() {
                return Ok(());
            }
            apply(profile, &switches, self.cfg.switch);
            *values = self.eval(profile, Some(values))?;
        }
    }
}

/// Strategy iteration: starting from a random profile, player one (max)
/// improves to a best response against player two's current strategy; then
/// player two (min) switches wherever a one-step deviation lowers the value.
/// Stops when player two has no improving switch.
pub fn strategy_iteration<G: TurnBasedGame>(game: &G, cfg: &SolverConfig) -> Result<MatchSolution> {
    if cfg.tol.is_nan() || cfg.tol <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {}",
            cfg.tol
        )));
    }
    let mut rng = stream(cfg.init_seed);
    let mut profile: Profile = (0..game.num_states())
        .map(|s| match game.node(s) {
            Node::Decision { actions, .. } => rng.random_range(0..actions),
            Node::Terminal(_) => 0,
        })
        .collect();
    let mut ev = Evaluator { game, cfg, count: 0 };
    let mut values = ev.eval(&profile, None)?;
    let mut rounds = 0;
    loop {
        ev.optimize(&mut profile, &mut values, Player::One)?;
        let switches = improvements(game, &values, Player::Two, cfg.tol);
        if switches.is_empty() {
            break;
        }
        apply(&mut profile, &switches, cfg.switch);
        values = ev.eval(&profile, Some(&values))?;
        rounds += 1;
    }
    // Cold re-evaluation so the values depend only on the final profile.
    let values = ev.eval(&profile, None)?;
    Ok(MatchSolution {
        profile,
        values,
        iterations: rounds,
        evaluations: ev.count,
    })
}

/// Improves `player`'s entries of `profile` against the rest, in place,
/// returning the profile's values.
pub fn optimize_player<G: TurnBasedGame>(
    game: &G,
    profile: &mut [usize],
    player: Player,
    cfg: &SolverConfig,
) -> Result<Vec<f64>> {
    let mut ev = Evaluator { game, cfg, count: 0 };
    let mut values = ev.eval(profile, None)?;
    ev.optimize(profile, &mut values, player)?;
    ev.eval(profile, None)
}

/// Best response of the other player to `fixed_player` playing `fixed`.
///
/// The fixed strategy turns the game into a one-controller decision process,
/// solved by value iteration; the greedy policy is then polished by policy
/// improvement so the returned values are exact for the returned profile.
pub fn best_response<G: TurnBasedGame>(
    game: &G,
    fixed_player: Player,
    fixed: &[usize],
    cfg: &SolverConfig,
) -> Result<(Profile, Vec<f64>)> {
    let n = game.num_states();
    let free = fixed_player.other();
    let backup = |values: &[f64], s: usize| match game.node(s) {
        Node::Terminal(v) => v,
        Node::Decision { owner, .. } if owner == fixed_player => q_value(game, values, s, fixed[s]),
        Node::Decision { .. } => greedy_action(game, values, s).map_or(0.0, |x| x.1),
    };
    let mut values = vec![0.0; n];
    let mut next = vec![0.0; n];
    let max_iter = 1_000_000;
    let mut converged = false;
    let mut change = f64::INFINITY;
    for _ in 0..max_iter {
        par::fill_indexed(&mut next, |s| backup(&values, s));
        change = values.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        std::mem::swap(&mut values, &mut next);
        if change <= cfg.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            iterations: max_iter,
            residual: change,
        });
    }
    let mut profile: Profile = (0..n)
        .map(|s| match game.node(s) {
            Node::Terminal(_) => 0,
            Node::Decision { owner, .. } if owner == fixed_player => fixed[s],
            Node::Decision { .. } => greedy_action(game, &values, s).map_or(0, |x| x.0),
        })
        .collect();
    let values = optimize_player(game, &mut profile, free, cfg)?;
    Ok((profile, values))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumReport {
    /// Largest one-step gain available to either player at any state.
    pub max_deviation_gain: f64,
    /// How far the reported values are from the profile's own values.
    pub consistency_residual: f64,
    pub ok: bool,
}

pub fn verify_equilibrium<G: TurnBasedGame>(game: &G, sol: &MatchSolution, tol: f64) -> EquilibriumReport {
    let values = &sol.values;
    let gains = par::map_indices(game.num_states(), |s| match game.node(s) {
        Node::Terminal(_) => 0.0,
        Node::Decision { owner, actions } => (0..actions)
            .map(|a| {
                let q = q_value(game, values, s, a);
                match owner {
                    Player::One => q - values[s],
                    Player::Two => values[s] - q,
                }
            })
            .fold(f64::NEG_INFINITY, f64::max),
    });
    let max_deviation_gain = gains.into_iter().fold(0.0, f64::max);
    let consistency_residual = profile_residual(game, &sol.profile, values);
    EquilibriumReport {
        max_deviation_gain,
        consistency_residual,
        ok: max_deviation_gain <= tol && consistency_residual <= tol,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForce {
    /// `min over player-two strategies of max over player-one strategies`.
    pub minmax: Vec<f64>,
    /// `max over player-one strategies of min over player-two strategies`.
    pub maxmin: Vec<f64>,
    pub profiles: u64,
}

impl BruteForce {
    pub fn max_gap(&self) -> f64 {
        self.minmax
            .iter()
            .zip(&self.maxmin)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Decision states of one player with their action counts.
fn choice_points<G: TurnBasedGame>(game: &G, player: Player) -> Vec<(usize, usize)> {
    (0..game.num_states())
        .filter_map(|s| match game.node(s) {
            Node::Decision { owner, actions } if owner == player => Some((s, actions)),
            _ => None,
        })
        .collect()
}

fn strategy_count(points: &[(usize, usize)]) -> f64 {
    points.iter().map(|&(_, a)| a as f64).product()
}

/// Writes the `index`-th strategy (mixed radix over `points`) into `profile`.
fn decode(points: &[(usize, usize)], mut index: u64, profile: &mut [usize]) {
    for &(s, a) in points {
        profile[s] = (index % a as u64) as usize;
        index /= a as u64;
    }
}

/// Exhaustive minimax over every deterministic profile, each evaluated by an
/// exact linear solve.
pub fn brute_force_value<G: TurnBasedGame>(game: &G) -> Result<BruteForce> {
    let max_points = choice_points(game, Player::One);
    let min_points = choice_points(game, Player::Two);
    let (n_max, n_min) = (strategy_count(&max_points), strategy_count(&min_points));
    let total = n_max * n_min;
    if total > BRUTE_FORCE_LIMIT as f64 {
        return Err(Error::TooManyProfiles {
            count: total,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let (n_max, n_min) = (n_max as u64, n_min as u64);
    let n = game.num_states();
    let exact = SolveOptions {
        dense_limit: usize::MAX,
        ..SolveOptions::default()
    };

    // For each strategy of `outer`, fold the inner player's strategies with
    // `inner_pick`; then fold across outer strategies with `outer_pick`.
    let sweep = |outer: &[(usize, usize)],
                 n_outer: u64,
                 inner: &[(usize, usize)],
                 n_inner: u64,
                 inner_pick: fn(f64, f64) -> f64,
                 outer_pick: fn(f64, f64) -> f64|
     -> Result<Vec<f64>> {
        let per_outer = par::map_indices(n_outer as usize, |o| -> Result<Vec<f64>> {
            let mut profile = vec![0usize; n];
            decode(outer, o as u64, &mut profile);
            let mut acc: Option<Vec<f64>> = None;
            for i in 0..n_inner {
                decode(inner, i, &mut profile);
                let v = evaluate_profile(game, &profile, &exact, None)?;
                acc = Some(match acc {
                    None => v,
                    Some(a) => a.iter().zip(&v).map(|(&x, &y)| inner_pick(x, y)).collect(),
                });
            }
            Ok(acc.unwrap_or_default())
        });
        let mut out: Option<Vec<f64>> = None;
        for v in per_outer {
            let v = v?;
            out = Some(match out {
                None => v,
                Some(a) => a.iter().zip(&v).map(|(&x, &y)| outer_pick(x, y)).collect(),
            });
        }
        Ok(out.unwrap_or_default())
    };

    let minmax = sweep(&min_points, n_min, &max_points, n_max, f64::max, f64::min)?;
    let maxmin = sweep(&max_points, n_max, &min_points, n_min, f64::min, f64::max)?;
    Ok(BruteForce {
        minmax,
        maxmin,
        profiles: n_max * n_min,
    })
}
