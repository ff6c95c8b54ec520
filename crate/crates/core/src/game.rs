//! Two-person matrix games and the structural operations used by punishment
//! design: efficiency, punishment/benefit accounting, projection and
//! transposition.
//!
//! A k-person game is a k-dimensional matrix of payoff vectors. Every
//! computation in this crate works with k = 2, which is the case all the
//! punishment results are stated for. [`validate_k_person`] checks the shape
//! of a general k-person payoff table but nothing else consumes one.
//!
//! Action indices are zero-based in the Rust API. Files, the CLI, and printed
//! reports use one-based indices, the usual strategic-form notation.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which side of a two-person game an agent plays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Player {
    One,
    Two,
}

impl Player {
    pub fn other(self) -> Self {
        match self {
            Player::One => Player::Two,
            Player::Two => Player::One,
        }
    }
}

/// A joint strategy `(row, col)`.
///
/// Serialized as a one-based pair `[i, j]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JointAction {
    pub row: usize,
    pub col: usize,
}

impl JointAction {
    pub const fn new(row: usize, col: usize) -> Self {
        JointAction { row, col }
    }

    /// Build from one-based indices, as written in files and on the CLI.
    pub fn from_one_based(i: usize, j: usize) -> Result<Self> {
        if i == 0 || j == 0 {
            return Err(Error::Config(format!(
                "joint action ({i},{j}): indices are one-based"
            )));
        }
        Ok(JointAction::new(i - 1, j - 1))
    }

    pub fn swapped(self) -> Self {
        JointAction::new(self.col, self.row)
    }

    /// The action this joint strategy prescribes for `player`.
    pub fn action_of(self, player: Player) -> usize {
        match player {
            Player::One => self.row,
            Player::Two => self.col,
        }
    }
}

impl fmt::Display for JointAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row + 1, self.col + 1)
    }
}

impl std::str::FromStr for JointAction {
    type Err = Error;

    /// Parses `"i,j"` or `"(i,j)"` with one-based indices.
    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim();
        let inner = inner
            .strip_prefix('(')
            .and_then(|x| x.strip_suffix(')'))
            .unwrap_or(inner);
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        let [i, j] = parts.as_slice() else {
            return Err(Error::Config(format!("expected `i,j`, got `{s}`")));
        };
        let parse = |v: &str| {
            v.parse::<usize>()
                .map_err(|_| Error::Config(format!("bad action index `{v}`")))
        };
        JointAction::from_one_based(parse(i)?, parse(j)?)
    }
}

impl Serialize for JointAction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.row + 1, self.col + 1].serialize(s)
    }
}

impl<'de> Deserialize<'de> for JointAction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [i, j] = <[usize; 2]>::deserialize(d)?;
        JointAction::from_one_based(i, j).map_err(serde::de::Error::custom)
    }
}

/// A two-person game in strategic form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixGameFile", into = "MatrixGameFile")]
pub struct MatrixGame {
    rows: usize,
    cols: usize,
    payoffs: Vec<(f64, f64)>,
}

#[derive(Serialize, Deserialize)]
struct MatrixGameFile {
    rows: usize,
    cols: usize,
    payoffs: Vec<[f64; 2]>,
}

impl TryFrom<MatrixGameFile> for MatrixGame {
    type Error = Error;

    fn try_from(f: MatrixGameFile) -> Result<Self> {
        MatrixGame::new(
            f.rows,
            f.cols,
            f.payoffs.into_iter().map(|[a, b]| (a, b)).collect(),
        )
    }
}

impl From<MatrixGame> for MatrixGameFile {
    fn from(g: MatrixGame) -> Self {
        MatrixGameFile {
            rows: g.rows,
            cols: g.cols,
            payoffs: g.payoffs.into_iter().map(|(a, b)| [a, b]).collect(),
        }
    }
}

fn check_shape(rows: usize, cols: usize, len: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidGame(format!(
            "a game needs at least one action per player, got {rows}x{cols}"
        )));
    }
    if len != rows * cols {
        return Err(Error::InvalidGame(format!(
            "{rows}x{cols} game needs {} payoff cells, got {len}",
            rows * cols
        )));
    }
    Ok(())
}

impl MatrixGame {
    /// `payoffs` is row-major: cell `(i, j)` is at `i * cols + j`.
    pub fn new(rows: usize, cols: usize, payoffs: Vec<(f64, f64)>) -> Result<Self> {
        check_shape(rows, cols, payoffs.len())?;
        if let Some(k) = payoffs
            .iter()
            .position(|(a, b)| !a.is_finite() || !b.is_finite())
        {
            return Err(Error::InvalidGame(format!(
                "payoff at ({},{}) is not finite",
                k / cols + 1,
                k % cols + 1
            )));
        }
        Ok(MatrixGame {
            rows,
            cols,
            payoffs,
        })
    }

    /// Build from nested rows of `(P1, P2)` pairs.
    pub fn from_rows<R: AsRef<[(f64, f64)]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != cols) {
            return Err(Error::InvalidGame("ragged payoff rows".into()));
        }
        let payoffs = rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect();
        MatrixGame::new(rows.len(), cols, payoffs)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn contains(&self, a: JointAction) -> bool {
        a.row < self.rows && a.col < self.cols
    }

    fn check(&self, a: JointAction) -> Result<()> {
        if self.contains(a) {
            Ok(())
        } else {
            Err(Error::OutOfBounds {
                row: a.row + 1,
                col: a.col + 1,
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    /// The payoff pair `(P1, P2)` at a joint action.
    pub fn payoff(&self, a: JointAction) -> Result<(f64, f64)> {
        self.check(a)?;
        Ok(self.cell(a.row, a.col))
    }

    /// Unchecked cell access for hot loops; panics when out of range.
    pub fn cell(&self, row: usize, col: usize) -> (f64, f64) {
        assert!(row < self.rows && col < self.cols);
        self.payoffs[row * self.cols + col]
    }

    pub fn payoff_of(&self, a: JointAction, player: Player) -> Result<f64> {
        let (p1, p2) = self.payoff(a)?;
        Ok(match player {
            Player::One => p1,
            Player::Two => p2,
        })
    }

    pub fn joint_actions(&self) -> impl Iterator<Item = JointAction> + '_ {
        (0..self.rows).flat_map(move |i| (0..self.cols).map(move |j| JointAction::new(i, j)))
    }

    /// Every joint action whose payoff sum is maximal, in lexicographic order.
    ///
    /// Sums are compared exactly; ties are all returned.
    pub fn efficient_solutions(&self) -> Vec<JointAction> {
        let sum = |a: JointAction| {
            let (p1, p2) = self.cell(a.row, a.col);
            p1 + p2
        };
        let best = self
            .joint_actions()
            .map(sum)
            .fold(f64::NEG_INFINITY, f64::max);
        self.joint_actions().filter(|&a| sum(a) == best).collect()
    }

    /// Signed change in `player`'s payoff when `played` happens instead of
    /// `reference`: `p(reference) - p(played)`.
    ///
    /// Positive values are a punishment, negative values a benefit.
    pub fn punishment_benefit(
        &self,
        reference: JointAction,
        played: JointAction,
        player: Player,
    ) -> Result<f64> {
        Ok(self.payoff_of(reference, player)? - self.payoff_of(played, player)?)
    }

    /// The zero-sum game whose row payoff is `-P2`: the row player of the
    /// projected game wants to hurt player 2 of this game.
    pub fn project(&self) -> ZeroSumGame {
        ZeroSumGame {
            rows: self.rows,
            cols: self.cols,
            payoffs: self.payoffs.iter().map(|&(_, p2)| -p2).collect(),
        }
    }

    /// The same game with the players' roles exchanged.
    pub fn transpose(&self) -> MatrixGame {
        let mut payoffs = Vec::with_capacity(self.payoffs.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                let (p1, p2) = self.cell(i, j);
                payoffs.push((p2, p1));
            }
        }
        MatrixGame {
            rows: self.cols,
            cols: self.rows,
            payoffs,
        }
    }

    /// True when `transpose()` reproduces the game.
    pub fn is_symmetric(&self) -> bool {
        self.transpose() == *self
    }

    pub fn min_payoff(&self) -> f64 {
        self.payoffs
            .iter()
            .flat_map(|&(a, b)| [a, b])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_payoff(&self) -> f64 {
        self.payoffs
            .iter()
            .flat_map(|&(a, b)| [a, b])
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// A two-person zero-sum game; entries are player 1's payoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ZeroSumFile", into = "ZeroSumFile")]
pub struct ZeroSumGame {
    rows: usize,
    cols: usize,
    payoffs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ZeroSumFile {
    rows: usize,
    cols: usize,
    payoffs: Vec<f64>,
}

impl TryFrom<ZeroSumFile> for ZeroSumGame {
    type Error = Error;

    fn try_from(f: ZeroSumFile) -> Result<Self> {
        ZeroSumGame::new(f.rows, f.cols, f.payoffs)
    }
}

impl From<ZeroSumGame> for ZeroSumFile {
    fn from(g: ZeroSumGame) -> Self {
        ZeroSumFile {
            rows: g.rows,
            cols: g.cols,
            payoffs: g.payoffs,
        }
    }
}

impl ZeroSumGame {
    pub fn new(rows: usize, cols: usize, payoffs: Vec<f64>) -> Result<Self> {
        check_shape(rows, cols, payoffs.len())?;
        if payoffs.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGame("zero-sum payoff is not finite".into()));
        }
        Ok(ZeroSumGame {
            rows,
            cols,
            payoffs,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != cols) {
            return Err(Error::InvalidGame("ragged payoff rows".into()));
        }
        let payoffs = rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect();
        ZeroSumGame::new(rows.len(), cols, payoffs)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        assert!(row < self.rows && col < self.cols);
        self.payoffs[row * self.cols + col]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.payoffs.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }
}

/// Checks a k-person payoff table: `dims[m]` actions for player m, one
/// length-k payoff vector per joint strategy in row-major order.
pub fn validate_k_person(dims: &[usize], payoffs: &[Vec<f64>]) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::InvalidGame(
            "every player needs at least one action".into(),
        ));
    }
    let cells: usize = dims.iter().product();
    if payoffs.len() != cells {
        return Err(Error::InvalidGame(format!(
            "expected {cells} payoff vectors, got {}",
            payoffs.len()
        )));
    }
    for (k, v) in payoffs.iter().enumerate() {
        if v.len() != dims.len() {
            return Err(Error::InvalidGame(format!(
                "payoff vector {k} has {} entries, expected {}",
                v.len(),
                dims.len()
            )));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidGame(format!("payoff vector {k} is not finite")));
        }
    }
    Ok(())
}
