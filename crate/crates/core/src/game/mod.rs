//! Two-player zero-sum turn-based stochastic games with inevitable
//! termination.
//!
//! Player one maximizes and player two minimizes the expected total of
//! action costs plus the terminal value reached. Strategies are positional:
//! one action per state, stored together as a [`Profile`].

mod explicit;
mod match_game;
mod solve;

pub use explicit::{ExplicitAction, ExplicitGame};
pub use match_game::{build_match_game, read_match_profile, write_match, MatchGame, MatchState};
pub use solve::{
    best_response, brute_force_value, optimize_player, strategy_iteration, verify_equilibrium, BruteForce,
    EquilibriumReport, MatchSolution, SolverConfig, SwitchRule, BRUTE_FORCE_LIMIT,
};

use crate::chain::{self, AbsorbingChain, SolveOptions};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Player {
    /// Maximizer.
    One,
    /// Minimizer.
    Two,
}

impl Player {
    pub fn other(self) -> Self {
        match self {
            Player::One => Player::Two,
            Player::Two => Player::One,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Player::One => 1,
            Player::Two => 2,
        }
    }

    /// Whether `candidate` beats `incumbent` by more than `tol` from this
    /// player's side.
    pub fn prefers(self, candidate: f64, incumbent: f64, tol: f64) -> bool {
        match self {
            Player::One => candidate > incumbent + tol,
            Player::Two => candidate < incumbent - tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node {
    Terminal(f64),
    Decision { owner: Player, actions: usize },
}

pub trait TurnBasedGame: Sync {
    fn num_states(&self) -> usize;

    fn node(&self, state: usize) -> Node;

    fn action_cost(&self, _state: usize, _action: usize) -> f64 {
        0.0
    }

    /// Successor distribution of `action` in decision state `state`.
    fn successors(&self, state: usize, action: usize, f: &mut dyn FnMut(usize, f64));

    fn owner(&self, state: usize) -> Option<Player> {
        match self.node(state) {
            Node::Terminal(_) => None,
            Node::Decision { owner, .. } => Some(owner),
        }
    }
}

/// One action per state; entries at terminal states are ignored.
pub type Profile = Vec<usize>;

/// `c_a + Σ P(s'|a)·V(s')`.
pub fn q_value<G: TurnBasedGame + ?Sized>(game: &G, values: &[f64], state: usize, action: usize) -> f64 {
    let mut q = game.action_cost(state, action);
    game.successors(state, action, &mut |t, p| q += p * values[t]);
    q
}

/// The owner's best action at `state` under `values`, first index on ties.
pub fn greedy_action<G: TurnBasedGame + ?Sized>(game: &G, values: &[f64], state: usize) -> Option<(usize, f64)> {
    let Node::Decision { owner, actions } = game.node(state) else {
        return None;
    };
    let mut best = (0, q_value(game, values, state, 0));
    for a in 1..actions {
        let q = q_value(game, values, state, a);
        if owner.prefers(q, best.1, 0.0) {
            best = (a, q);
        }
    }
    Some(best)
}

struct ProfileChain<'a, G: ?Sized> {
    game: &'a G,
    profile: &'a [usize],
}

impl<G: TurnBasedGame + ?Sized> AbsorbingChain for ProfileChain<'_, G> {
    fn len(&self) -> usize {
        self.game.num_states()
    }

    fn cost(&self, i: usize) -> f64 {
        match self.game.node(i) {
            Node::Terminal(v) => v,
            Node::Decision { .. } => self.game.action_cost(i, self.profile[i]),
        }
    }

    fn transitions(&self, i: usize, f: &mut dyn FnMut(usize, f64)) {
        if let Node::Decision { .. } = self.game.node(i) {
            self.game.successors(i, self.profile[i], f);
        }
    }
}

/// Exact value of a strategy profile. Terminal states carry their value as
/// the cost of a single move into the absorbing target.
pub fn evaluate_profile<G: TurnBasedGame + ?Sized>(
    game: &G,
    profile: &[usize],
    opts: &SolveOptions,
    warm: Option<&[f64]>,
) -> Result<Vec<f64>> {
    chain::solve(&ProfileChain { game, profile }, opts, warm)
}

/// `max_s |c + Q·V − V|` for the profile's chain.
pub fn profile_residual<G: TurnBasedGame + ?Sized>(game: &G, profile: &[usize], values: &[f64]) -> f64 {
    chain::residual_norm(&ProfileChain { game, profile }, values)
}
