use ctrlpower::fitting::pearson;
use ctrlpower::power_index::{make_game, spi_dp, spi_subset};
use proptest::prelude::*;

fn weights(max_players: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0u32..1000, 1..=max_players)
        .prop_filter("some weight", |w| w.iter().any(|&x| x > 0))
        .prop_map(|w| w.into_iter().map(|x| f64::from(x) / 1000.0).collect())
}

proptest! {
    #[test]
    fn indices_sum_to_one(w in weights(12)) {
        let p = spi_dp(&make_game(&w).unwrap());
        prop_assert_eq!(p.numerator_sum(), p.denominator());
    }

    #[test]
    fn dp_matches_subset_enumeration(w in weights(10)) {
        let game = make_game(&w).unwrap();
        let (a, b) = (spi_dp(&game), spi_subset(&game));
        prop_assert_eq!(a.numerators(), b.numerators());
    }

    #[test]
    fn relabelling_permutes_indices(w in weights(10), rot in 0usize..10) {
        let k = rot % w.len();
        let mut r = w.clone();
        r.rotate_left(k);
        let a = spi_dp(&make_game(&w).unwrap());
        let b = spi_dp(&make_game(&r).unwrap());
        for i in 0..w.len() {
            prop_assert_eq!(a.exact((i + k) % w.len()), b.exact(i));
        }
    }

    #[test]
    fn heavier_players_never_weaker(w in weights(12)) {
        let v = spi_dp(&make_game(&w).unwrap()).values();
        for i in 0..w.len() {
            for j in 0..w.len() {
                if w[i] > w[j] {
                    prop_assert!(v[i] >= v[j]);
                }
            }
        }
    }

    #[test]
    fn indices_lie_in_unit_interval(w in weights(12)) {
        let p = spi_dp(&make_game(&w).unwrap());
        for v in p.values() {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn pearson_is_affine_invariant(
        pairs in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 5..40),
        scale in 0.1f64..50.0,
        shift in -100.0f64..100.0,
    ) {
        let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let Ok(base) = pearson(&x, &y) else { return Ok(()); };
        let moved: Vec<f64> = x.iter().map(|v| v * scale + shift).collect();
        let r = pearson(&moved, &y).unwrap().r;
        prop_assert!((r - base.r).abs() < 1e-9);
        let flipped: Vec<f64> = x.iter().map(|v| -v).collect();
        prop_assert!((pearson(&flipped, &y).unwrap().r + base.r).abs() < 1e-9);
        prop_assert!((pearson(&y, &x).unwrap().r - base.r).abs() < 1e-12);
        prop_assert!(base.r.abs() <= 1.0 + 1e-12);
        prop_assert!((0.0..=1.0).contains(&base.p_value));
    }
}
