use super::{pivot_weights, PowerProfile, WeightedVotingGame};

/// Number of coalitions at each (accumulated grid weight, size) cell, stored
/// sparsely: only weights that some coalition actually reaches get a row.
/// Rows are sorted by weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoalitionCount {
    rows: Vec<(u64, Vec<u64>)>,
    players: usize,
}

impl CoalitionCount {
    /// Counts subsets of `weights`, optionally dropping every coalition whose
    /// weight exceeds `cap`.
    pub fn build(weights: &[u64], cap: Option<u64>) -> Self {
        let width = weights.len() + 1;
        let mut empty = vec![0u64; width];
        empty[0] = 1;
        let mut rows = vec![(0u64, empty)];
        let cap = cap.unwrap_or(u64::MAX);
        for &w in weights {
            rows = merge_shifted(&rows, w, cap);
        }
        Self {
            rows,
            players: weights.len(),
        }
    }

    pub fn players(&self) -> usize {
        self.players
    }

    /// Distinct coalition weights present in the table.
    pub fn weights(&self) -> impl Iterator<Item = u64> + '_ {
        self.rows.iter().map(|(w, _)| *w)
    }

    /// Count of coalitions with exactly this weight and size.
    pub fn get(&self, weight: u64, size: usize) -> u64 {
        match self.rows.binary_search_by_key(&weight, |(w, _)| *w) {
            Ok(i) => self.rows[i].1.get(size).copied().unwrap_or(0),
            Err(_) => 0,
        }
    }

    /// Sum over every cell.
    pub fn total(&self) -> u128 {
        self.rows
            .iter()
            .flat_map(|(_, c)| c.iter())
            .map(|&c| c as u128)
            .sum()
    }

    /// Per-size counts of coalitions with weight in `[lo, hi]`.
    fn sizes_between(&self, lo: u64, hi: u64) -> Vec<u64> {
        let mut out = vec![0u64; self.players + 1];
        let start = self.rows.partition_point(|(w, _)| *w < lo);
        for (w, counts) in &self.rows[start..] {
            if *w > hi {
                break;
            }
            for (o, c) in out.iter_mut().zip(counts) {
                *o += c;
            }
        }
        out
    }
}

// rows ∪ (rows shifted by w, one size up), merged by weight
fn merge_shifted(rows: &[(u64, Vec<u64>)], w: u64, cap: u64) -> Vec<(u64, Vec<u64>)> {
    let mut out: Vec<(u64, Vec<u64>)> = Vec::with_capacity(rows.len() * 2);
    let (mut i, mut j) = (0, 0);
    let shifted_ok = |j: usize| j < rows.len() && rows[j].0 + w <= cap;
    while i < rows.len() || shifted_ok(j) {
        let take_left = i < rows.len() && (!shifted_ok(j) || rows[i].0 <= rows[j].0 + w);
        let (weight, counts, offset) = if take_left {
            i += 1;
            (rows[i - 1].0, &rows[i - 1].1, 0)
        } else {
            j += 1;
            (rows[j - 1].0 + w, &rows[j - 1].1, 1)
        };
        if out.last().map(|(last, _)| *last) != Some(weight) {
            out.push((weight, vec![0; counts.len()]));
        }
        let row = &mut out.last_mut().expect("row pushed above").1;
        for k in 0..counts.len() - offset {
            row[k + offset] += counts[k];
        }
    }
    out
}

/// Shapley-Shubik value of one player via a generating-function count of
/// the other players' coalitions over (size, weight).
///
/// Only losing coalitions matter, so the table is truncated at the largest
/// losing weight; its support is bounded by both `2^(n-1)` and the grid.
pub fn spi_dp_player(game: &WeightedVotingGame, player: usize) -> (u128, u128) {
    let n = game.players();
    let weights = game.grid_weights();
    let others: Vec<u64> = weights
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != player)
        .map(|(_, &w)| w)
        .collect();
    let cap = game.losing_cap();
    let table = CoalitionCount::build(&others, Some(cap));
    let numerator = pivot_numerator(&table, weights[player], cap, n);
    (numerator, super::factorial(n))
}

fn pivot_numerator(table: &CoalitionCount, own: u64, cap: u64, n: usize) -> u128 {
    if own == 0 {
        return 0;
    }
    // losing S that `own` lifts over the quota: cap - own < w(S) <= cap
    let swing = table.sizes_between((cap + 1).saturating_sub(own), cap);
    let factor = pivot_weights(n);
    swing
        .iter()
        .zip(&factor)
        .map(|(&count, &f)| count as u128 * f)
        .sum()
}

/// Shapley-Shubik index of every player via [`spi_dp_player`].
pub fn spi_dp(game: &WeightedVotingGame) -> PowerProfile {
    let numerators = (0..game.players())
        .map(|i| spi_dp_player(game, i).0)
        .collect();
    PowerProfile::from_counts(numerators)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::power_index::{make_game, spi_permutation_oracle, spi_subset};

    #[test]
    fn uncapped_table_counts_every_subset() {
        let t = CoalitionCount::build(&[3, 1, 1, 2, 5], None);
        assert_eq!(t.total(), 32);
        assert_eq!(t.get(0, 0), 1);
        assert_eq!(t.get(2, 2), 1); // {1,1}
        assert_eq!(t.get(2, 1), 1); // {2}
        assert_eq!(t.get(12, 5), 1);
        assert_eq!(t.get(4, 2), 2); // {3,1} twice
    }

    #[test]
    fn capped_table_drops_heavy_coalitions() {
        let t = CoalitionCount::build(&[3, 1, 1, 2, 5], Some(4));
        assert!(t.weights().all(|w| w <= 4));
    }

    #[test]
    fn halves() {
        let p = spi_dp(&make_game(&[0.5, 0.5]).unwrap());
        assert_eq!(p.values(), vec![0.5, 0.5]);
    }

    #[test]
    fn two_one_one() {
        let p = spi_dp(&make_game(&[2.0, 1.0, 1.0]).unwrap());
        assert_eq!(p.numerators(), &[4, 1, 1]);
    }

    #[test]
    fn dictator_gets_everything() {
        let game = make_game(&[0.40, 0.10, 0.10]).unwrap();
        assert_eq!(spi_dp_player(&game, 0), (6, 6));
        assert_eq!(spi_dp(&game).values(), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn agrees_with_oracle_and_subsets() {
        for w in [
            vec![3.0, 2.0, 1.0, 1.0],
            vec![0.30, 0.10, 0.05, 0.05, 0.04, 0.03, 0.02, 0.01, 0.0],
            vec![7.0, 7.0, 1.0],
            vec![1.0],
        ] {
            let game = make_game(&w).unwrap();
            let dp = spi_dp(&game);
            assert_eq!(dp, spi_subset(&game));
            assert_eq!(dp, spi_permutation_oracle(&game).unwrap());
        }
    }

    #[test]
    fn paper_mean_game_top1_matches_subsets() {
        let mut shares = vec![0.278];
        shares.extend(std::iter::repeat(0.293 / 9.0).take(9));
        let game = make_game(&shares).unwrap();
        let (num, den) = spi_dp_player(&game, 0);
        assert_eq!((num, den), spi_subset(&game).exact(0));
        let v = num as f64 / den as f64;
        assert!(v > 0.0 && v < 1.0);
    }
}
