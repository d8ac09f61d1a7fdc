use super::{Node, Player, TurnBasedGame};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitAction {
    pub cost: f64,
    pub successors: Vec<(usize, f64)>,
}

/// A game given by explicit per-state action lists.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitGame {
    nodes: Vec<Node>,
    actions: Vec<Vec<ExplicitAction>>,
}

impl ExplicitGame {
    /// `states[i]` is `Err(value)` for a terminal or `Ok((owner, actions))`.
    pub fn new(states: Vec<std::result::Result<(Player, Vec<ExplicitAction>), f64>>) -> Result<Self> {
        let n = states.len();
        let mut nodes = Vec::with_capacity(n);
        let mut actions = Vec::with_capacity(n);
        for (i, st) in states.into_iter().enumerate() {
            match st {
                Err(v) => {
                    nodes.push(Node::Terminal(v));
                    actions.push(Vec::new());
                }
                Ok((owner, acts)) => {
                    if acts.is_empty() {
                        return Err(Error::InvalidParameter(format!("state {i} has no actions")));
                    }
                    for a in &acts {
                        let mass: f64 = a.successors.iter().map(|x| x.1).sum();
                        if a.successors.iter().any(|&(t, p)| t >= n || p < 0.0) || (mass - 1.0).abs() > 1e-9 {
                            return Err(Error::InvalidParameter(format!(
                                "state {i}: successor list is not a distribution over states"
                            )));
                        }
                    }
                    nodes.push(Node::Decision {
                        owner,
                        actions: acts.len(),
                    });
                    actions.push(acts);
                }
            }
        }
        Ok(Self { nodes, actions })
    }
}

impl TurnBasedGame for ExplicitGame {
    fn num_states(&self) -> usize {
        self.nodes.len()
    }

    fn node(&self, state: usize) -> Node {
        self.nodes[state]
    }

    fn action_cost(&self, state: usize, action: usize) -> f64 {
        self.actions[state][action].cost
    }

    fn successors(&self, state: usize, action: usize, f: &mut dyn FnMut(usize, f64)) {
        for &(t, p) in &self.actions[state][action].successors {
            f(t, p);
        }
    }
}
