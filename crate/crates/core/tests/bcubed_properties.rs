mod common;

use andkit_core::metrics::{bcubed, bcubed_exact, BCubed, B3Averaging};
use common::{brute_bcubed, partitions, refines};
use proptest::prelude::*;

#[test]
fn refining_never_lowers_precision_and_coarsening_never_lowers_recall() {
    for n in 1..=6 {
        let parts = partitions(n);
        let exact: Vec<Vec<_>> = parts
            .iter()
            .map(|p| parts.iter().map(|g| bcubed_exact(p, g).unwrap()).collect())
            .collect();
        for (a, pa) in parts.iter().enumerate() {
            for (b, pb) in parts.iter().enumerate() {
                if a == b || !refines(pb, pa) {
                    continue;
                }
                for g in 0..parts.len() {
                    let (coarse, fine) = (exact[a][g], exact[b][g]);
                    assert!(fine.0 >= coarse.0, "precision dropped: {pa:?} -> {pb:?} vs {:?}", parts[g]);
                    assert!(coarse.1 >= fine.1, "recall dropped: {pb:?} -> {pa:?} vs {:?}", parts[g]);
                }
            }
        }
    }
}

#[test]
fn identical_partitions_score_one() {
    for p in partitions(5) {
        let s = bcubed(&p, &p).unwrap();
        assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
    }
}

#[test]
fn pooled_sums_match_the_oracle_across_blocks() {
    let blocks: [(&[usize], &[usize]); 3] = [(&[0, 0, 1], &[0, 1, 1]), (&[0, 1], &[0, 0]), (&[0], &[0])];
    let mut acc = BCubed::default();
    let (mut sp, mut sr, mut n) = (0.0, 0.0, 0.0);
    for (p, g) in blocks {
        acc.add_block(p, g).unwrap();
        let (bp, br, _) = brute_bcubed(p, g);
        let k = p.len() as f64;
        sp += k * (*bp.numer() as f64 / *bp.denom() as f64);
        sr += k * (*br.numer() as f64 / *br.denom() as f64);
        n += k;
    }
    let s = acc.score(B3Averaging::Pooled).unwrap();
    assert!((s.precision - sp / n).abs() < 1e-12);
    assert!((s.recall - sr / n).abs() < 1e-12);
}

proptest! {
    #[test]
    fn relabeling_does_not_change_scores(
        (pred, gold) in (1usize..9).prop_flat_map(|n| (
            prop::collection::vec(0usize..4, n),
            prop::collection::vec(0usize..4, n),
        )),
        shift in 1usize..50,
    ) {
        let base = bcubed_exact(&pred, &gold).unwrap();
        let renamed: Vec<String> = pred.iter().map(|p| format!("c{}", (p * 7 + shift) % 97)).collect();
        let regold: Vec<usize> = gold.iter().map(|g| 1000 - g).collect();
        prop_assert_eq!(bcubed_exact(&renamed, &regold).unwrap(), base);
        let (p, r, f) = brute_bcubed(&pred, &gold);
        prop_assert_eq!(base, (p, r, f));
        let s = bcubed(&pred, &gold).unwrap();
        for v in [s.precision, s.recall, s.f1] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }
}
