//! Weighted voting games among the largest shareholders and their exact
//! Shapley-Shubik power index.
//!
//! Every game keeps its weights twice: the caller's fractions and an integer
//! image on a fixed grid (10^6 units per whole by default). Win/lose decisions
//! are made on the integer image only, so the permutation oracle, the subset
//! enumeration and the generating-function DP see exactly the same game.
//! Pivot counts are accumulated as integers over `n!`; conversion to `f64`
//! happens only when a caller asks for floating values.

mod dp;
mod oracle;
mod subset;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dp::{spi_dp, spi_dp_player, CoalitionCount};
pub use oracle::{spi_permutation_oracle, ORACLE_MAX_PLAYERS};
pub use subset::spi_subset;

/// Largest game any of the index algorithms accepts.
pub const MAX_PLAYERS: usize = 20;

/// Default number of integer grid units per unit of weight.
pub const DEFAULT_GRID_SCALE: u64 = 1_000_000;

// Keeps every grid weight exactly representable in f64 and every coalition
// sum (at most 21 terms) far from u64 overflow.
const MAX_GRID_WEIGHT: f64 = 9_007_199_254_740_992.0; // 2^53

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("a game needs at least one player")]
    Empty,
    #[error("{0} players exceeds the supported maximum of {MAX_PLAYERS}")]
    TooManyPlayers(usize),
    #[error("weight of player {index} is negative ({value})")]
    NegativeWeight { index: usize, value: f64 },
    #[error("weight of player {index} is not a finite number")]
    NonFinite { index: usize },
    #[error("total weight is zero on the integer grid")]
    ZeroTotal,
    #[error("grid resolution must be positive")]
    ZeroGrid,
    #[error("weight of player {index} overflows the integer grid")]
    GridOverflow { index: usize },
    #[error("player index {index} out of range for a {players}-player game")]
    PlayerOutOfRange { index: usize, players: usize },
    #[error("the permutation oracle enumerates n! orderings and refuses {0} players (max {ORACLE_MAX_PLAYERS})")]
    OracleTooLarge(usize),
}

/// Players with non-negative weights under the strict-majority rule: a
/// coalition wins iff its weight is strictly more than half the total weight
/// of the players in the game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedVotingGame {
    weights: Vec<f64>,
    grid: Vec<u64>,
    total: u64,
    scale: u64,
}

impl WeightedVotingGame {
    /// Builds a game on the default 10^6 grid.
    pub fn new(weights: &[f64]) -> Result<Self, GameError> {
        Self::with_grid(weights, DEFAULT_GRID_SCALE)
    }

    /// Builds a game whose weights are scaled by `scale` and rounded half to
    /// even onto integers.
    pub fn with_grid(weights: &[f64], scale: u64) -> Result<Self, GameError> {
        if scale == 0 {
            return Err(GameError::ZeroGrid);
        }
        if weights.is_empty() {
            return Err(GameError::Empty);
        }
        if weights.len() > MAX_PLAYERS {
            return Err(GameError::TooManyPlayers(weights.len()));
        }
        let mut grid = Vec::with_capacity(weights.len());
        for (index, &value) in weights.iter().enumerate() {
            if !value.is_finite() {
                return Err(GameError::NonFinite { index });
            }
            if value < 0.0 {
                return Err(GameError::NegativeWeight { index, value });
            }
            let scaled = (value * scale as f64).round_ties_even();
            if !scaled.is_finite() || scaled > MAX_GRID_WEIGHT {
                return Err(GameError::GridOverflow { index });
            }
            grid.push(scaled as u64);
        }
        let total: u64 = grid.iter().sum();
        if total == 0 {
            return Err(GameError::ZeroTotal);
        }
        Ok(Self {
            weights: weights.to_vec(),
            grid,
            total,
            scale,
        })
    }

    pub fn players(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integer images of the weights on the game's grid.
    pub fn grid_weights(&self) -> &[u64] {
        &self.grid
    }

    pub fn grid_scale(&self) -> u64 {
        self.scale
    }

    /// Sum of the caller-supplied weights.
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn grid_total(&self) -> u64 {
        self.total
    }

    /// A coalition wins iff its weight strictly exceeds this value.
    pub fn quota(&self) -> f64 {
        self.total_weight() / 2.0
    }

    /// Largest losing coalition weight on the grid.
    pub(crate) fn losing_cap(&self) -> u64 {
        self.total / 2
    }

    #[inline]
    pub(crate) fn wins_grid(&self, weight: u64) -> bool {
        // grid weights are capped at 2^53, so 2w fits in u64 for any coalition
        weight * 2 > self.total
    }

    /// Whether the given players, taken as a set, form a winning coalition.
    pub fn is_winning(&self, coalition: &[usize]) -> Result<bool, GameError> {
        let mut seen = 0u32;
        let mut weight = 0u64;
        for &index in coalition {
            if index >= self.players() {
                return Err(GameError::PlayerOutOfRange {
                    index,
                    players: self.players(),
                });
            }
            if seen & (1 << index) == 0 {
                seen |= 1 << index;
                weight += self.grid[index];
            }
        }
        Ok(self.wins_grid(weight))
    }

    /// Appends `max(residual_share, 0)` as one more player; the quota follows
    /// the new total.
    pub fn extend_with_residual(&self, residual_share: f64) -> Result<Self, GameError> {
        let residual = if residual_share > 0.0 {
            residual_share
        } else {
            0.0
        };
        let mut weights = self.weights.clone();
        weights.push(residual);
        Self::with_grid(&weights, self.scale)
    }
}

/// Builds the game played by the given shareholders.
pub fn make_game(shares: &[f64]) -> Result<WeightedVotingGame, GameError> {
    WeightedVotingGame::new(shares)
}

/// Appends the residual meeting share as an extra player.
pub fn extend_with_residual(
    game: &WeightedVotingGame,
    residual_share: f64,
) -> Result<WeightedVotingGame, GameError> {
    game.extend_with_residual(residual_share)
}

/// Exact Shapley-Shubik values: player `i` holds `numerators[i] / n!`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerProfile {
    numerators: Vec<u128>,
    denominator: u128,
}

impl PowerProfile {
    pub(crate) fn from_counts(numerators: Vec<u128>) -> Self {
        let denominator = factorial(numerators.len());
        Self {
            numerators,
            denominator,
        }
    }

    pub fn players(&self) -> usize {
        self.numerators.len()
    }

    pub fn numerators(&self) -> &[u128] {
        &self.numerators
    }

    /// Always `n!`.
    pub fn denominator(&self) -> u128 {
        self.denominator
    }

    /// Exact value of player `i` as `(numerator, denominator)`.
    pub fn exact(&self, i: usize) -> (u128, u128) {
        (self.numerators[i], self.denominator)
    }

    pub fn value(&self, i: usize) -> f64 {
        ratio_to_f64(self.numerators[i], self.denominator)
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.players()).map(|i| self.value(i)).collect()
    }

    /// Sum of the exact numerators; equals the denominator for every game.
    pub fn numerator_sum(&self) -> u128 {
        self.numerators.iter().sum()
    }
}

impl Serialize for PowerProfile {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.values().serialize(serializer)
    }
}

pub(crate) fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// `k! (n-1-k)!` for every coalition size `k` in an `n`-player game.
pub(crate) fn pivot_weights(n: usize) -> Vec<u128> {
    (0..n).map(|k| factorial(k) * factorial(n - 1 - k)).collect()
}

fn ratio_to_f64(num: u128, den: u128) -> f64 {
    if num == den {
        return 1.0;
    }
    // Split off the integer part so large denominators keep full precision.
    let whole = num / den;
    let rem = num % den;
    whole as f64 + rem as f64 / den as f64
}
