//! Policy evaluation on absorbing Markov chains: solve `(I − Q)·V = c` where
//! `Q` is the (substochastic) transition matrix among transient states.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// An absorbing chain over transient states `0..len()`. Probability mass not
/// listed by [`AbsorbingChain::transitions`] leaves to the absorbing target.
pub trait AbsorbingChain: Sync {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cost incurred on leaving state `i`.
    fn cost(&self, i: usize) -> f64;

    fn transitions(&self, i: usize, f: &mut dyn FnMut(usize, f64));
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Largest chain solved by dense LU; bigger chains use Gauss–Seidel.
    pub dense_limit: usize,
    /// Sup-norm bound on `c + Q·V − V` for the iterative solver.
    pub residual: f64,
    pub max_sweeps: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            dense_limit: 1500,
            residual: 1e-12,
            max_sweeps: 200_000,
        }
    }
}

/// Fails with the first state that cannot reach the target.
pub fn check_absorbing<C: AbsorbingChain + ?Sized>(chain: &C) -> Result<()> {
    let n = chain.len();
    let mut reaches = vec![false; n];
    for (i, r) in reaches.iter_mut().enumerate() {
        let mut mass = 0.0;
        chain.transitions(i, &mut |_, p| mass += p);
        *r = mass < 1.0 - 1e-12;
    }
    loop {
        let mut changed = false;
        for i in 0..n {
            if reaches[i] {
                continue;
            }
            let mut hit = false;
            chain.transitions(i, &mut |j, p| hit |= p > 0.0 && reaches[j]);
            if hit {
                reaches[i] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    match reaches.iter().position(|r| !r) {
        Some(state) => Err(Error::NotAbsorbing { state }),
        None => Ok(()),
    }
}

pub fn solve_dense<C: AbsorbingChain + ?Sized>(chain: &C) -> Result<Vec<f64>> {
    check_absorbing(chain)?;
    let n = chain.len();
    let mut a = DMatrix::<f64>::identity(n, n);
    let mut b = DVector::<f64>::zeros(n);
    for i in 0..n {
        b[i] = chain.cost(i);
        chain.transitions(i, &mut |j, p| a[(i, j)] -= p);
    }
    let x = a.lu().solve(&b).ok_or(Error::Singular)?;
    Ok(x.iter().copied().collect())
}

/// Gauss–Seidel sweeps in index order until the residual bound holds.
pub fn solve_iterative<C: AbsorbingChain + ?Sized>(
    chain: &C,
    opts: &SolveOptions,
    warm: Option<&[f64]>,
) -> Result<Vec<f64>> {
    check_absorbing(chain)?;
    let n = chain.len();
    let mut v = match warm {
        Some(w) if w.len() == n => w.to_vec(),
        _ => vec![0.0; n],
    };
    let mut residual = f64::INFINITY;
    for _ in 0..opts.max_sweeps {
        let mut change: f64 = 0.0;
        for i in 0..n {
            let mut x = chain.cost(i);
            chain.transitions(i, &mut |j, p| x += p * v[j]);
            change = change.max((x - v[i]).abs());
            v[i] = x;
        }
        if change <= opts.residual {
            residual = residual_norm(chain, &v);
            if residual <= opts.residual {
                return Ok(v);
            }
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_sweeps,
        residual,
    })
}

pub fn solve<C: AbsorbingChain + ?Sized>(chain: &C, opts: &SolveOptions, warm: Option<&[f64]>) -> Result<Vec<f64>> {
    if chain.len() <= opts.dense_limit {
        solve_dense(chain)
    } else {
        solve_iterative(chain, opts, warm)
    }
}

/// `max_i |c_i + (Q·V)_i − V_i|`.
pub fn residual_norm<C: AbsorbingChain + ?Sized>(chain: &C, v: &[f64]) -> f64 {
    (0..chain.len())
        .map(|i| {
            let mut x = chain.cost(i);
            chain.transitions(i, &mut |j, p| x += p * v[j]);
            (x - v[i]).abs()
        })
        .fold(0.0, f64::max)
}

/// A chain given by explicit sparse rows, mostly for tests and small models.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseChain {
    pub rows: Vec<Vec<(usize, f64)>>,
    pub costs: Vec<f64>,
}

impl AbsorbingChain for SparseChain {
    fn len(&self) -> usize {
        self.rows.len()
    }

    fn cost(&self, i: usize) -> f64 {
        self.costs[i]
    }

    fn transitions(&self, i: usize, f: &mut dyn FnMut(usize, f64)) {
        for &(j, p) in &self.rows[i] {
            f(j, p);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn geometric_chain() {
        let c = SparseChain {
            rows: vec![vec![(0, 0.5)]],
            costs: vec![1.0],
        };
        assert!((solve_dense(&c).unwrap()[0] - 2.0).abs() < 1e-12);
        let v = solve_iterative(&c, &SolveOptions::default(), None).unwrap();
        assert!((v[0] - 2.0).abs() < 1e-11);
    }

    #[test]
    fn closed_loop_is_rejected() {
        let c = SparseChain {
            rows: vec![vec![(1, 1.0)], vec![(0, 1.0)], vec![(0, 0.5)]],
            costs: vec![1.0; 3],
        };
        assert!(matches!(solve_dense(&c), Err(Error::NotAbsorbing { state: 0 })));
        assert!(matches!(
            solve_iterative(&c, &SolveOptions::default(), None),
            Err(Error::NotAbsorbing { .. })
        ));
    }

    fn random_chain(seed: u64, n: usize) -> SparseChain {
        use rand::Rng;
        let mut rng = crate::rng::stream(seed);
        let rows = (0..n)
            .map(|_| {
                let exit = rng.random_range(0.05..0.5);
                let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
                let total: f64 = w.iter().sum();
                w.iter()
                    .enumerate()
                    .map(|(j, x)| (j, (1.0 - exit) * x / total))
                    .collect()
            })
            .collect();
        let costs = (0..n).map(|_| rng.random_range(-1.0..2.0)).collect();
        SparseChain { rows, costs }
    }

    proptest! {
        #[test]
        fn dense_and_iterative_agree(seed in 0u64..500, n in 1usize..25) {
            let c = random_chain(seed, n);
            let a = solve_dense(&c).unwrap();
            let b = solve_iterative(&c, &SolveOptions::default(), None).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-9);
            }
            prop_assert!(residual_norm(&c, &a) < 1e-10);
        }
    }
}
