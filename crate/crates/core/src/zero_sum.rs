//! Minimax solutions of two-person zero-sum games.
//!
//! The solver shifts the matrix to be strictly positive and solves the
//! column player's linear program
//!
//! ```text
//! maximize  sum_j w_j   subject to   B w <= 1,  w >= 0
//! ```
//!
//! with a dense tableau simplex using Bland's rule. The optimum is `1 / v`
//! for the shifted value `v`; the row player's optimal strategy is read off
//! the dual prices of the slack columns.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::ZeroSumGame;

/// Probability tolerance for [`MixedStrategy`] validation.
pub const PROB_TOL: f64 = 1e-9;

const PIVOT_EPS: f64 = 1e-12;

/// A probability distribution over one player's actions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MixedStrategy(Vec<f64>);

impl MixedStrategy {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Domain("a strategy needs at least one action".into()));
        }
        if probs
            .iter()
            .any(|p| !p.is_finite() || *p < -PROB_TOL || *p > 1.0 + PROB_TOL)
        {
            return Err(Error::Domain(format!("probabilities out of range: {probs:?}")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_TOL {
            return Err(Error::Domain(format!("probabilities sum to {sum}, not 1")));
        }
        Ok(MixedStrategy(probs))
    }

    pub fn pure(actions: usize, action: usize) -> Self {
        assert!(action < actions);
        let mut p = vec![0.0; actions];
        p[action] = 1.0;
        MixedStrategy(p)
    }

    pub fn uniform(actions: usize) -> Self {
        assert!(actions > 0);
        MixedStrategy(vec![1.0 / actions as f64; actions])
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The action played with certainty, if the strategy is pure.
    pub fn as_pure(&self) -> Option<usize> {
        let k = self.0.iter().position(|&p| p == 1.0)?;
        self.0
            .iter()
            .enumerate()
            .all(|(i, &p)| i == k || p == 0.0)
            .then_some(k)
    }

    /// Sample an action from one uniform draw in `[0, 1)`.
    pub fn sample_with(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (k, &p) in self.0.iter().enumerate() {
            acc += p;
            if u < acc {
                return k;
            }
        }
        // rounding left the cumulative sum just under one
        self.0.iter().rposition(|&p| p > 0.0).unwrap_or(0)
    }
}

impl TryFrom<Vec<f64>> for MixedStrategy {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        MixedStrategy::new(v)
    }
}

impl From<MixedStrategy> for Vec<f64> {
    fn from(s: MixedStrategy) -> Self {
        s.0
    }
}

/// Value and optimal strategies of a zero-sum game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroSumSolution {
    /// Game value to player 1.
    pub value: f64,
    pub row_strategy: MixedStrategy,
    pub col_strategy: MixedStrategy,
}

impl ZeroSumSolution {
    /// Worst case for player 1 when playing `row_strategy`.
    pub fn row_guarantee(&self, game: &ZeroSumGame) -> f64 {
        row_guarantee(game, self.row_strategy.probs())
    }

    /// Best case for player 1 against `col_strategy`.
    pub fn col_ceiling(&self, game: &ZeroSumGame) -> f64 {
        col_ceiling(game, self.col_strategy.probs())
    }
}

/// `min_j sum_i p_i A_ij`.
pub fn row_guarantee(game: &ZeroSumGame, p: &[f64]) -> f64 {
    (0..game.cols())
        .map(|j| (0..game.rows()).map(|i| p[i] * game.get(i, j)).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

/// `max_i sum_j A_ij q_j`.
pub fn col_ceiling(game: &ZeroSumGame, q: &[f64]) -> f64 {
    (0..game.rows())
        .map(|i| (0..game.cols()).map(|j| game.get(i, j) * q[j]).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
}

struct Tableau {
    m: usize,
    width: usize,
    // (m + 1) rows of `width + 1` entries; the last row is the objective
    cells: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.cells[r * (self.width + 1) + c]
    }

    fn row_mut(&mut self, r: usize) -> &mut [f64] {
        let w = self.width + 1;
        &mut self.cells[r * w..(r + 1) * w]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width + 1;
        let piv = self.at(pr, pc);
        for v in self.row_mut(pr) {
            *v /= piv;
        }
        let pivot_row: Vec<f64> = self.cells[pr * w..(pr + 1) * w].to_vec();
        for r in 0..=self.m {
            if r == pr {
                continue;
            }
            let f = self.at(r, pc);
            if f != 0.0 {
                for (v, p) in self.row_mut(r).iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
            }
        }
        self.basis[pr] = pc;
    }
}

fn polish(raw: Vec<f64>) -> MixedStrategy {
    let mut p: Vec<f64> = raw.into_iter().map(|x| if x > PIVOT_EPS { x } else { 0.0 }).collect();
    let s: f64 = p.iter().sum();
    for x in &mut p {
        *x /= s;
    }
    MixedStrategy(p)
}

/// Solve a zero-sum game by linear programming.
///
/// The reported value is player 1's exact guarantee under the returned row
/// strategy, so pure saddle points report the matrix entry bit-for-bit.
pub fn solve_zero_sum(game: &ZeroSumGame) -> ZeroSumSolution {
    let (m, n) = (game.rows(), game.cols());
    let min = (0..m)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| game.get(i, j))
        .fold(f64::INFINITY, f64::min);
    let shift = 1.0 - min;

    let width = n + m;
    let mut t = Tableau {
        m,
        width,
        cells: vec![0.0; (m + 1) * (width + 1)],
        basis: (n..n + m).collect(),
    };
    for i in 0..m {
        let row = t.row_mut(i);
        for j in 0..n {
            row[j] = game.get(i, j) + shift;
        }
        row[n + i] = 1.0;
        row[width] = 1.0;
    }
    for v in &mut t.row_mut(m)[..n] {
        *v = -1.0;
    }

    loop {
        let Some(pc) = (0..width).find(|&c| t.at(m, c) < -PIVOT_EPS) else {
            break;
        };
        let mut best: Option<(usize, f64)> = None;
        for r in 0..m {
            let a = t.at(r, pc);
            if a > PIVOT_EPS {
                let ratio = t.at(r, width) / a;
                best = match best {
                    None => Some((r, ratio)),
                    Some((br, bv)) => {
                        if ratio < bv - PIVOT_EPS
                            || ((ratio - bv).abs() <= PIVOT_EPS && t.basis[r] < t.basis[br])
                        {
                            Some((r, ratio))
                        } else {
                            Some((br, bv))
                        }
                    }
                };
            }
        }
        // the feasible region is bounded because every entry of B is positive
        let (pr, _) = best.expect("shifted matrix game LP is bounded");
        t.pivot(pr, pc);
    }

    let mut w = vec![0.0; n];
    for (r, &b) in t.basis.iter().enumerate() {
        if b < n {
            w[b] = t.at(r, width);
        }
    }
    let u: Vec<f64> = (0..m).map(|i| t.at(m, n + i)).collect();

    let row_strategy = polish(u);
    let col_strategy = polish(w);
    let value = row_guarantee(game, row_strategy.probs());
    ZeroSumSolution {
        value,
        row_strategy,
        col_strategy,
    }
}
