use super::{pivot_weights, PowerProfile, WeightedVotingGame};

/// Shapley-Shubik index by enumerating every coalition: player `i` collects
/// `|S|! (n-1-|S|)!` for each losing `S` (without `i`) that `i` turns winning.
pub fn spi_subset(game: &WeightedVotingGame) -> PowerProfile {
    let n = game.players();
    let weights = game.grid_weights();
    let factor = pivot_weights(n);

    // subset sums via lowest set bit
    let size = 1usize << n;
    let mut sums = vec![0u64; size];
    for mask in 1..size {
        let low = mask.trailing_zeros() as usize;
        sums[mask] = sums[mask & (mask - 1)] + weights[low];
    }

    let mut pivots = vec![0u128; n];
    for (mask, &sum) in sums.iter().enumerate() {
        if game.wins_grid(sum) {
            continue;
        }
        let k = mask.count_ones() as usize;
        if k == n {
            continue;
        }
        for (i, pivot) in pivots.iter_mut().enumerate() {
            if mask & (1 << i) == 0 && game.wins_grid(sum + weights[i]) {
                *pivot += factor[k];
            }
        }
    }
    PowerProfile::from_counts(pivots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::power_index::{make_game, spi_permutation_oracle};

    #[test]
    fn two_one_one_by_subsets() {
        let p = spi_subset(&make_game(&[2.0, 1.0, 1.0]).unwrap());
        assert_eq!(p.numerators(), &[4, 1, 1]);
        assert!((p.value(0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((p.value(1) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn matches_oracle_on_3211() {
        let game = make_game(&[3.0, 2.0, 1.0, 1.0]).unwrap();
        assert_eq!(spi_subset(&game), spi_permutation_oracle(&game).unwrap());
    }

    #[test]
    fn single_player() {
        let p = spi_subset(&make_game(&[1.0]).unwrap());
        assert_eq!(p.values(), vec![1.0]);
    }

    #[test]
    fn twenty_players_sum_to_one() {
        let w: Vec<f64> = (1..=20).map(|i| i as f64).collect();
        let p = spi_subset(&make_game(&w).unwrap());
        assert_eq!(p.numerator_sum(), p.denominator());
    }
}
