//! Stroke play: minimum expected putts from every distance.

use std::io::Write;

use crate::chain::{self, AbsorbingChain};
use crate::error::{Error, Result};
use crate::par;
use crate::transitions::TransitionModel;

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct StrokeSolution {
    /// Expected putts to hole out, indexed by state; `values[0] == 0`.
    pub values: Vec<f64>,
    /// Aim offset per state; `policy[0]` is unused.
    pub policy: Vec<usize>,
    /// Bellman residual `max_s |T V(s) − V(s)|` at the returned values.
    pub residual: f64,
    pub iterations: usize,
}

/// `1 + Σ P(s'|s,j)·V(s')`.
fn q_value(tm: &TransitionModel, values: &[f64], s: usize, j: usize) -> f64 {
    1.0 + tm.row(s, j).iter().map(|&(d, p)| p * values[d as usize]).sum::<f64>()
}

/// Lowest-cost offset and its value; ties go to the smallest offset.
fn greedy(tm: &TransitionModel, values: &[f64], s: usize) -> (usize, f64) {
    let mut best = (0, q_value(tm, values, s, 0));
    for j in 1..tm.n_actions() {
        let q = q_value(tm, values, s, j);
        if q < best.1 {
            best = (j, q);
        }
    }
    best
}

/// Synchronous value iteration from `V ≡ 0`, stopping once the sup-norm
/// Bellman residual is at most `tol`.
pub fn value_iteration(tm: &TransitionModel, tol: f64, max_iter: usize) -> Result<StrokeSolution> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let n = tm.n_states();
    let mut values = vec![0.0; n + 1];
    let mut next = vec![0.0; n + 1];
    let mut residual = f64::INFINITY;
    for iter in 0..max_iter {
        par::fill_indexed(&mut next[1..], |i| greedy(tm, &values, i + 1).1);
        residual = values.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if residual <= tol {
            let mut policy = vec![0; n + 1];
            par::fill_indexed(&mut policy[1..], |i| greedy(tm, &values, i + 1).0);
            return Ok(StrokeSolution {
                values,
                policy,
                residual,
                iterations: iter,
            });
        }
        std::mem::swap(&mut values, &mut next);
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual,
    })
}

struct StrokeChain<'a, F> {
    tm: &'a TransitionModel,
    policy: &'a [usize],
    cost: F,
}

impl<F: Fn(usize, usize) -> f64 + Sync> AbsorbingChain for StrokeChain<'_, F> {
    fn len(&self) -> usize {
        self.tm.n_states()
    }

    fn cost(&self, i: usize) -> f64 {
        (self.cost)(i + 1, self.policy[i + 1])
    }

    fn transitions(&self, i: usize, f: &mut dyn FnMut(usize, f64)) {
        for &(d, p) in self.tm.row(i + 1, self.policy[i + 1]) {
            if d > 0 {
                f(d as usize - 1, p);
            }
        }
    }
}

/// Exact value of a stationary policy: solves `(I − Q)·V = c` over states
/// `1..=n` by LU. `cost(s, j)` is the cost of offset `j` in state `s`.
pub fn policy_evaluation<F>(tm: &TransitionModel, policy: &[usize], cost: F) -> Result<Vec<f64>>
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    let n = tm.n_states();
    if policy.len() != n + 1 || policy[1..].iter().any(|&j| j >= tm.n_actions()) {
        return Err(Error::InvalidParameter(
            "policy must give a valid offset for every state".into(),
        ));
    }
    let chain = StrokeChain { tm, policy, cost };
    let v = chain::solve_dense(&chain)?;
    Ok(std::iter::once(0.0).chain(v).collect())
}

pub fn unit_cost(_: usize, _: usize) -> f64 {
    1.0
}

/// Largest amount by which any single-state deviation undercuts `values`:
/// `max_{s,j} V(s) − (1 + Σ P(s'|s,j)·V(s'))`. Non-positive (up to solver
/// error) exactly when `values` satisfy Bellman optimality.
pub fn max_deviation_gain(tm: &TransitionModel, values: &[f64]) -> f64 {
    par::map_indices(tm.n_states(), |i| {
        let s = i + 1;
        (0..tm.n_actions())
            .map(|j| values[s] - q_value(tm, values, s, j))
            .fold(f64::NEG_INFINITY, f64::max)
    })
    .into_iter()
    .fold(f64::NEG_INFINITY, f64::max)
}

/// `state,distance_in,expected_putts,offset_in`.
pub fn write_stroke<W: Write>(mut w: W, tm: &TransitionModel, sol: &StrokeSolution) -> std::io::Result<()> {
    writeln!(w, "state,distance_in,expected_putts,offset_in")?;
    for s in 1..=tm.n_states() {
        writeln!(
            w,
            "{s},{:.4},{:.4},{:.4}",
            tm.disc.distance(s),
            sol.values[s],
            tm.disc.distance(sol.policy[s])
        )?;
    }
    Ok(())
}
