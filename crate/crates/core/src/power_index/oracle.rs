use super::{GameError, PowerProfile, WeightedVotingGame};

/// The oracle walks all n! orderings; 9! = 362 880 is the ceiling.
pub const ORACLE_MAX_PLAYERS: usize = 9;

/// Shapley-Shubik index by direct enumeration of every ordering of the
/// players. Each ordering credits exactly one pivot: the player whose arrival
/// first lifts the running coalition over the quota.
pub fn spi_permutation_oracle(game: &WeightedVotingGame) -> Result<PowerProfile, GameError> {
    let n = game.players();
    if n > ORACLE_MAX_PLAYERS {
        return Err(GameError::OracleTooLarge(n));
    }
    let weights = game.grid_weights();
    let mut pivots = vec![0u128; n];
    let mut order: Vec<usize> = (0..n).collect();

    let mut credit = |order: &[usize]| {
        let mut acc = 0u64;
        for &p in order {
            acc += weights[p];
            if game.wins_grid(acc) {
                pivots[p] += 1;
                return;
            }
        }
        unreachable!("the grand coalition always wins");
    };

    // Heap's algorithm, iterative form.
    credit(&order);
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                order.swap(0, i);
            } else {
                order.swap(c[i], i);
            }
            credit(&order);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(PowerProfile::from_counts(pivots))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::power_index::make_game;

    fn oracle(w: &[f64]) -> PowerProfile {
        spi_permutation_oracle(&make_game(w).unwrap()).unwrap()
    }

    #[test]
    fn symmetric_three() {
        let p = oracle(&[1.0, 1.0, 1.0]);
        assert_eq!(p.numerators(), &[2, 2, 2]);
        assert_eq!(p.denominator(), 6);
    }

    #[test]
    fn dictator_and_dummy() {
        let p = oracle(&[60.0, 40.0]);
        assert_eq!(p.values(), vec![1.0, 0.0]);
    }

    #[test]
    fn two_one_one() {
        // player 0 pivots in every ordering where it does not come first
        let p = oracle(&[2.0, 1.0, 1.0]);
        assert_eq!(p.numerators(), &[4, 1, 1]);
    }

    #[test]
    fn every_ordering_credits_once() {
        let p = oracle(&[5.0, 3.0, 3.0, 2.0, 1.0, 1.0, 1.0]);
        assert_eq!(p.numerator_sum(), 5040);
    }

    #[test]
    fn refuses_ten_players() {
        let game = make_game(&[1.0; 10]).unwrap();
        assert_eq!(
            spi_permutation_oracle(&game),
            Err(GameError::OracleTooLarge(10))
        );
    }
}
