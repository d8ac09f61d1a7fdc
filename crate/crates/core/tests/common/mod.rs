#![allow(dead_code)]

use greenside::game::{ExplicitAction, ExplicitGame, Player};
use greenside::transitions::{Discretization, Row, TransitionModel};
use rand::Rng;

/// Random distribution over `0..=n` with at least `hole` mass on 0.
fn random_row<R: Rng>(rng: &mut R, n: usize, hole: f64) -> Row {
    let mut w: Vec<f64> = (0..=n)
        .map(|_| if rng.random_bool(0.6) { rng.random::<f64>() } else { 0.0 })
        .collect();
    let rest: f64 = w[1..].iter().sum();
    w[0] = w[0].max(hole * (rest + w[0]) / (1.0 - hole)).max(1e-3);
    let total: f64 = w.iter().sum();
    w.iter()
        .enumerate()
        .filter(|(_, &x)| x > 0.0)
        .map(|(d, &x)| (d as u32, x / total))
        .collect()
}

/// Random transition model on `n` states with `m + 1` actions where every
/// row holes with probability at least 0.05.
pub fn random_model<R: Rng>(rng: &mut R, name: &str, n: usize, m: usize) -> TransitionModel {
    let disc = Discretization::new(20.0, 20.0 * n as f64, m).unwrap();
    let rows = (0..n * (m + 1)).map(|_| random_row(rng, n, 0.05)).collect();
    TransitionModel::from_rows(name, disc, rows).unwrap()
}

/// Random game with `terminals` terminal states (values in `[-1, 1]`) and
/// `deciders` decision states. Every action reaches a terminal with
/// probability at least 0.1, so every profile absorbs.
pub fn random_explicit<R: Rng>(rng: &mut R, terminals: usize, deciders: usize, max_actions: usize) -> ExplicitGame {
    let n = terminals + deciders;
    let mut states = Vec::with_capacity(n);
    for _ in 0..terminals {
        states.push(Err(rng.random_range(-1.0..=1.0)));
    }
    for _ in 0..deciders {
        let owner = if rng.random_bool(0.5) { Player::One } else { Player::Two };
        let actions = (0..rng.random_range(1..=max_actions))
            .map(|_| {
                let mut w: Vec<f64> = (0..n).map(|_| rng.random::<f64>().powi(2)).collect();
                let t = rng.random_range(0..terminals);
                let total: f64 = w.iter().sum();
                w[t] += total / 9.0;
                let total: f64 = w.iter().sum();
                ExplicitAction {
                    cost: rng.random_range(-0.3..=0.3),
                    successors: w.iter().enumerate().map(|(i, &x)| (i, x / total)).collect(),
                }
            })
            .collect();
        states.push(Ok((owner, actions)));
    }
    ExplicitGame::new(states).unwrap()
}
