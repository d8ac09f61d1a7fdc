//! Match play as a turn-based game over `(s1, s2, Δ)`: both players' grid
//! distances and the shot difference (player one's shots minus player
//! two's). The farther player putts; equal distances are settled by a
//! seeded draw per distance.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use rand::Rng;

use super::{MatchSolution, Node, Player, Profile, TurnBasedGame};
use crate::error::{Error, Result};
use crate::rng::substream;
use crate::skill::records;
use crate::transitions::TransitionModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MatchState {
    pub s1: usize,
    pub s2: usize,
    pub delta: i32,
}

#[derive(Debug, Clone)]
pub struct MatchGame<'a> {
    pub tm1: &'a TransitionModel,
    pub tm2: &'a TransitionModel,
    pub delta_cap: usize,
    pub tie_seed: u64,
    /// Who putts first when both balls are `s` steps out, indexed by `s`.
    tie_owner: Vec<Player>,
    n: usize,
}

/// Builds the match between two players' stroke models. Player one is the
/// maximizer; terminal values are in player-one points.
pub fn build_match_game<'a>(
    tm1: &'a TransitionModel,
    tm2: &'a TransitionModel,
    delta_cap: usize,
    tie_seed: u64,
) -> Result<MatchGame<'a>> {
    let n = tm1.n_states();
    let tie_owner = (0..=n)
        .map(|s| {
            if substream(tie_seed, &[s as u64]).random::<bool>() {
                Player::One
            } else {
                Player::Two
            }
        })
        .collect();
    MatchGame::with_tie_owners(tm1, tm2, delta_cap, tie_seed, tie_owner)
}

impl<'a> MatchGame<'a> {
    pub fn with_tie_owners(
        tm1: &'a TransitionModel,
        tm2: &'a TransitionModel,
        delta_cap: usize,
        tie_seed: u64,
        tie_owner: Vec<Player>,
    ) -> Result<Self> {
        if tm1.disc != tm2.disc {
            return Err(Error::MismatchedDiscretization);
        }
        if delta_cap == 0 {
            return Err(Error::InvalidParameter("shot-difference cap must be at least 1".into()));
        }
        let n = tm1.n_states();
        if tie_owner.len() != n + 1 {
            return Err(Error::InvalidParameter("need one tie owner per distance".into()));
        }
        Ok(Self {
            tm1,
            tm2,
            delta_cap,
            tie_seed,
            tie_owner,
            n,
        })
    }

    /// The same match seen from the other side: players swapped, positions
    /// swapped, shot difference negated. Its values are the negatives of
    /// this game's at mirrored states.
    pub fn mirrored(&self) -> MatchGame<'a> {
        Self {
            tm1: self.tm2,
            tm2: self.tm1,
            delta_cap: self.delta_cap,
            tie_seed: self.tie_seed,
            tie_owner: self.tie_owner.iter().map(|p| p.other()).collect(),
            n: self.n,
        }
    }

    pub fn n_positions(&self) -> usize {
        self.n
    }

    pub fn tie_owner(&self, s: usize) -> Player {
        self.tie_owner[s]
    }

    fn width(&self) -> usize {
        2 * self.delta_cap + 1
    }

    pub fn index(&self, st: MatchState) -> usize {
        ((st.s1 * (self.n + 1)) + st.s2) * self.width() + (st.delta + self.delta_cap as i32) as usize
    }

    pub fn state(&self, index: usize) -> MatchState {
        let w = self.width();
        let delta = (index % w) as i32 - self.delta_cap as i32;
        let pos = index / w;
        MatchState {
            s1: pos / (self.n + 1),
            s2: pos % (self.n + 1),
            delta,
        }
    }

    pub fn mirror_index(&self, index: usize) -> usize {
        let st = self.state(index);
        self.index(MatchState {
            s1: st.s2,
            s2: st.s1,
            delta: -st.delta,
        })
    }

    /// Shot differences that are not terminal, `-cap+1..=cap-1`.
    pub fn open_deltas(&self) -> std::ops::RangeInclusive<i32> {
        let c = self.delta_cap as i32;
        -(c - 1)..=(c - 1)
    }

    fn model(&self, p: Player) -> &TransitionModel {
        match p {
            Player::One => self.tm1,
            Player::Two => self.tm2,
        }
    }

    /// Offset in inches chosen at a decision state.
    pub fn offset_in(&self, action: usize) -> f64 {
        self.tm1.disc.distance(action)
    }
}

impl TurnBasedGame for MatchGame<'_> {
    fn num_states(&self) -> usize {
        (self.n + 1) * (self.n + 1) * self.width()
    }

    fn node(&self, index: usize) -> Node {
        let MatchState { s1, s2, delta } = self.state(index);
        let cap = self.delta_cap as i32;
        if delta >= cap {
            return Node::Terminal(-1.0);
        }
        if delta <= -cap {
            return Node::Terminal(1.0);
        }
        if s1 == 0 && s2 == 0 {
            return Node::Terminal(-(delta.signum() as f64));
        }
        let owner = match s1.cmp(&s2) {
            std::cmp::Ordering::Greater => Player::One,
            std::cmp::Ordering::Less => Player::Two,
            std::cmp::Ordering::Equal => self.tie_owner[s1],
        };
        Node::Decision {
            owner,
            actions: self.model(owner).n_actions(),
        }
    }

    fn successors(&self, index: usize, action: usize, f: &mut dyn FnMut(usize, f64)) {
        let st = self.state(index);
        match self.owner(index) {
            Some(Player::One) => {
                for &(d, p) in self.tm1.row(st.s1, action) {
                    f(
                        self.index(MatchState {
                            s1: d as usize,
                            s2: st.s2,
                            delta: st.delta + 1,
                        }),
                        p,
                    );
                }
            }
            Some(Player::Two) => {
                for &(d, p) in self.tm2.row(st.s2, action) {
                    f(
                        self.index(MatchState {
                            s1: st.s1,
                            s2: d as usize,
                            delta: st.delta - 1,
                        }),
                        p,
                    );
                }
            }
            None => {}
        }
    }
}

/// `s1,s2,delta,owner,value,offset_in`; owner `T` and an empty offset mark
/// terminal states.
pub fn write_match<W: Write>(mut w: W, game: &MatchGame<'_>, sol: &MatchSolution) -> std::io::Result<()> {
    writeln!(w, "s1,s2,delta,owner,value,offset_in")?;
    for i in 0..game.num_states() {
        let st = game.state(i);
        match game.owner(i) {
            None => writeln!(w, "{},{},{},T,{:.4},", st.s1, st.s2, st.delta, sol.values[i])?,
            Some(p) => writeln!(
                w,
                "{},{},{},{},{:.4},{:.4}",
                st.s1,
                st.s2,
                st.delta,
                p.number(),
                sol.values[i],
                game.offset_in(sol.profile[i])
            )?,
        }
    }
    Ok(())
}

/// Recovers the strategy profile from a written solution.
pub fn read_match_profile(path: &Path, game: &MatchGame<'_>) -> Result<Profile> {
    let cols = ["s1", "s2", "delta", "offset_in"];
    let mut seen: HashMap<usize, usize> = HashMap::new();
    for (line, f) in records::read_columns(path, &cols)? {
        if f[3].is_empty() {
            continue;
        }
        let num = |k: usize| records::parse_f64(path, line, cols[k], &f[k]);
        let st = MatchState {
            s1: num(0)? as usize,
            s2: num(1)? as usize,
            delta: num(2)? as i32,
        };
        if st.s1 > game.n || st.s2 > game.n || st.delta.unsigned_abs() as usize >= game.delta_cap {
            return Err(Error::parse(path, line, "state outside the game"));
        }
        let idx = game.index(st);
        let action = (num(3)? / game.tm1.disc.delta).round() as usize;
        match game.node(idx) {
            Node::Decision { actions, .. } if action < actions => {
                seen.insert(idx, action);
            }
            _ => return Err(Error::parse(path, line, "offset is not an action of this state")),
        }
    }
    (0..game.num_states())
        .map(|i| match game.node(i) {
            Node::Terminal(_) => Ok(0),
            Node::Decision { .. } => seen
                .get(&i)
                .copied()
                .ok_or_else(|| Error::parse(path, 0, format!("no strategy entry for state {:?}", game.state(i)))),
        })
        .collect()
}
