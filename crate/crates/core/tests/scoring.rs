mod common;

use approx::assert_relative_eq;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reducedkey::bbn::{bayes_factor, log_marginal_likelihood, NetworkStructure, VariableSpec, Xi};
use reducedkey::corpus::CountStore;

use common::{random_parents, random_rows, sequential_marginal_likelihood};

fn specs(cards: &[usize]) -> Vec<VariableSpec> {
    cards
        .iter()
        .enumerate()
        .map(|(i, &c)| VariableSpec::new(format!("X{i}"), c).unwrap())
        .collect()
}

fn score(cards: &[usize], parents: &[Vec<usize>], rows: &[Vec<usize>], xi: f64) -> f64 {
    let specs = specs(cards);
    let structure = NetworkStructure::new(parents.to_vec()).unwrap();
    let counts = CountStore::from_rows(&specs, &structure, rows.iter().map(Vec::as_slice)).unwrap();
    log_marginal_likelihood(&structure, &counts, Xi::new(xi).unwrap())
        .unwrap()
        .exp()
}

#[test]
fn two_observations_of_a_coin() {
    let p = score(&[2], &[vec![]], &[vec![0], vec![1]], 1.0);
    assert_relative_eq!(p, 0.125, max_relative = 1e-14);
    assert_eq!(sequential_marginal_likelihood(&[2], &[vec![]], &[vec![0], vec![1]], 1.0), 0.125);
}

#[test]
fn same_outcome_twice_is_likelier() {
    // (1/2)·(1.5/2)
    assert_relative_eq!(score(&[2], &[vec![]], &[vec![1], vec![1]], 1.0), 0.375, max_relative = 1e-14);
}

#[test]
fn no_data_has_probability_one() {
    assert_eq!(score(&[3, 2], &[vec![], vec![0]], &[], 2.0), 1.0);
}

#[test]
fn matches_sequential_oracle_on_random_datasets() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..300 {
        let m = rng.gen_range(1..=3);
        let cards: Vec<usize> = (0..m).map(|_| rng.gen_range(2..=3)).collect();
        let parents = random_parents(&mut rng, m);
        let count = rng.gen_range(0..=6);
        let rows = random_rows(&mut rng, &cards, count);
        let xi = rng.gen_range(0.1..10.0);
        let got = score(&cards, &parents, &rows, xi);
        let want = sequential_marginal_likelihood(&cards, &parents, &rows, xi);
        assert_relative_eq!(got, want, max_relative = 1e-9);
    }
}

#[test]
fn score_does_not_depend_on_row_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cards = [3, 2, 2];
    let parents = vec![vec![], vec![0], vec![0, 1]];
    let mut rows = random_rows(&mut rng, &cards, 20);
    let a = score(&cards, &parents, &rows, 1.7);
    rows.reverse();
    assert_relative_eq!(a, score(&cards, &parents, &rows, 1.7), max_relative = 1e-12);
}

/// Cardinalities, two parent lists, rows, Ξ.
type Dataset = (Vec<usize>, Vec<Vec<usize>>, Vec<Vec<usize>>, Vec<Vec<usize>>, f64);

fn dataset() -> impl Strategy<Value = Dataset> {
    (1usize..=3, any::<u64>(), 0usize..=12, 0.1f64..10.0).prop_map(|(m, seed, n, xi)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cards: Vec<usize> = (0..m).map(|_| rng.gen_range(2..=3)).collect();
        let a = random_parents(&mut rng, m);
        let b = random_parents(&mut rng, m);
        let rows = random_rows(&mut rng, &cards, n);
        (cards, a, b, rows, xi)
    })
}

fn factor(cards: &[usize], a: &[Vec<usize>], b: &[Vec<usize>], rows: &[Vec<usize>], xi: f64) -> f64 {
    let specs = specs(cards);
    let sa = NetworkStructure::new(a.to_vec()).unwrap();
    let sb = NetworkStructure::new(b.to_vec()).unwrap();
    let ca = CountStore::from_rows(&specs, &sa, rows.iter().map(Vec::as_slice)).unwrap();
    let cb = CountStore::from_rows(&specs, &sb, rows.iter().map(Vec::as_slice)).unwrap();
    bayes_factor((&sa, &ca), (&sb, &cb), Xi::new(xi).unwrap()).unwrap()
}

proptest! {
    #[test]
    fn bayes_factor_against_itself_is_one((cards, a, _b, rows, xi) in dataset()) {
        let r = factor(&cards, &a, &a, &rows, xi);
        prop_assert!((r - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn bayes_factor_is_antisymmetric((cards, a, b, rows, xi) in dataset()) {
        let ab = factor(&cards, &a, &b, &rows, xi);
        let ba = factor(&cards, &b, &a, &rows, xi);
        prop_assert!((ab * ba - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn bayes_factor_is_the_oracle_ratio((cards, a, b, rows, xi) in dataset()) {
        let want = sequential_marginal_likelihood(&cards, &a, &rows, xi)
            / sequential_marginal_likelihood(&cards, &b, &rows, xi);
        let got = factor(&cards, &a, &b, &rows, xi);
        prop_assert!((got / want - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn log_score_is_never_positive((cards, a, _b, rows, xi) in dataset()) {
        prop_assert!(score(&cards, &a, &rows, xi) <= 1.0 + 1e-12);
    }
}

#[test]
fn mismatched_counts_are_rejected() {
    let specs = specs(&[2, 2]);
    let a = NetworkStructure::new(vec![vec![], vec![0]]).unwrap();
    let b = NetworkStructure::new(vec![vec![], vec![]]).unwrap();
    let counts = CountStore::from_rows(&specs, &b, [&[0usize, 1][..]]).unwrap();
    assert!(log_marginal_likelihood(&a, &counts, Xi::new(1.0).unwrap()).is_err());
}
