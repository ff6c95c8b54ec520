//! Named games used by the examples, tests and figure presets.

use crate::game::MatrixGame;
use crate::teaching::TeachingGame;

/// Example 1: mutual cooperation is the efficient joint action; a lone
/// deviator earns 10 against a cooperator.
pub fn prisoners_dilemma() -> MatrixGame {
    MatrixGame::from_rows(&[[(2.0, 2.0), (-10.0, 10.0)], [(10.0, -10.0), (-5.0, -5.0)]])
        .expect("fixture is well formed")
}

/// Example 2: three efficient joint actions with different incentives.
pub fn three_efficient_dilemma() -> MatrixGame {
    MatrixGame::from_rows(&[[(0.0, 0.0), (-10.0, 10.0)], [(10.0, -10.0), (-5.0, -5.0)]])
        .expect("fixture is well formed")
}

/// The prisoner's dilemma used in every teaching experiment.
pub fn teaching_pd() -> TeachingGame {
    TeachingGame::symmetric(10.0, -13.0, 13.0, -6.0)
}

/// Cooperative block pushing: action 1 is a hard push, action 2 a gentle
/// one. The teacher wants the student to push hard.
pub fn block_pushing() -> TeachingGame {
    TeachingGame::symmetric(3.0, 2.0, 6.0, 1.0)
}

/// A payoff-indifferent game; every DIF is zero.
pub fn flat_game(v: f64) -> TeachingGame {
    TeachingGame::symmetric(v, v, v, v)
}

/// Iterated prisoner's dilemmas for the DIF sweep: every `(a, b, c, d)` drawn
/// from a 3x4x4x3 grid with `c > a > d > b` and `2a > b + c`.
pub fn dif_matrices() -> Vec<TeachingGame> {
    let mut out = Vec::new();
    for a in [2.0, 5.0, 10.0] {
        for b in [-20.0, -13.0, -8.0, -3.0] {
            for c in [11.0, 13.0, 16.0, 22.0] {
                for d in [-6.0, -1.0, 1.0] {
                    if c > a && a > d && d > b && 2.0 * a > b + c {
                        out.push(TeachingGame::symmetric(a, b, c, d));
                    }
                }
            }
        }
    }
    out
}

pub const DIF_GAMMAS: [f64; 3] = [0.5, 0.7, 0.9];
