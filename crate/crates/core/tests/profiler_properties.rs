mod common;

use std::sync::Arc;

use andkit_core::builder::build_block_dataset;
use andkit_core::linker::LinkedClaim;
use andkit_core::namekit::{VariationChecker, VariationMeasure};
use andkit_core::profiler::{
    block_profile, corpus_instances, name_popularity, position_distribution, variation_report, year_distribution,
    DistributionReport, NameKey,
};
use common::citation;
use proptest::prelude::*;

fn byline_claim(author_id: &str, cfn: &str, paper_id: &str, printed: &str) -> LinkedClaim {
    let c = citation(paper_id, &[printed]);
    LinkedClaim {
        doi: c.doi.clone(),
        author_id: author_id.into(),
        cfn: cfn.into(),
        citation: Arc::new(c),
        position: 1,
    }
}

fn total(r: &DistributionReport) -> f64 {
    r.bins.iter().map(|b| b.proportion).sum()
}

#[test]
fn endwith_variation_on_fifty_claims() {
    let mut claims: Vec<LinkedClaim> = (0..47)
        .map(|i| byline_claim(&format!("a{i}"), "Ana Charas", &format!("P{i}"), "A. Charas"))
        .collect();
    claims.push(byline_claim("v1", "Ana Charas", "V1", "Ana Charás"));
    claims.push(byline_claim("v2", "Luís Silva Dias", "V2", "Luís Silva"));
    claims.push(byline_claim("v3", "Ana Charas", "V3", "Charas Ana"));
    let rows = variation_report(&claims, &VariationChecker::default()).unwrap();
    let endwith = rows.iter().find(|r| r.measure == VariationMeasure::EndWith).unwrap();
    assert_eq!(endwith.total, 50);
    assert_eq!(endwith.csvd, 3.0 / 50.0);
    // Folding the accent makes "Charás" match; the other two remain.
    assert_eq!(endwith.civd, 2.0 / 50.0);
}

#[test]
fn variants_are_counted_per_block_size_bucket() {
    let claims = vec![
        // Block of one citation, one variant.
        byline_claim("a", "Ana Charas", "P1", "Ana Charás"),
        // Block of three citations, two variants.
        byline_claim("b", "Rui Lopes", "P2", "R. Lopes"),
        byline_claim("b", "Rui Lopes", "P3", "Lopes Rui"),
        byline_claim("c", "Rui Lopes", "P4", "Rui Lópes"),
        // Block of two citations, none.
        byline_claim("d", "Eva Mota", "P5", "Eva Mota"),
        byline_claim("d", "Eva Mota", "P6", "E. Mota"),
    ];
    let ds = build_block_dataset(claims);
    let p = block_profile(&ds, &VariationChecker::default());
    let v = &p.variants_by_block_size;
    assert_eq!((v.count("1"), v.count("2-3")), (1, 2));
    assert_eq!(v.total, 3);
    assert_eq!((p.block_size.count("1"), p.block_size.count("2"), p.block_size.count("3")), (1, 1, 1));
    assert_eq!((p.authors_per_block.count("1"), p.authors_per_block.count("2")), (2, 1));
}

#[test]
fn fixture_counts() {
    let mut a = citation("P1", &["Ana Charas", "Rui Lopes", "Eva Mota"]);
    a.year = None;
    let b = citation("P2", &["A. Charas"]);
    let c = citation("P3", &["Rui Lopes", "Ana Charas"]);
    let cits = [a, b, c];
    let years = year_distribution(&cits);
    assert_eq!((years.count("2000"), years.count("unknown")), (2, 1));
    assert_eq!(years.bins.last().unwrap().key, "unknown");
    let inst = corpus_instances(&cits);
    let pos = position_distribution(&inst, 2);
    assert_eq!((pos.count("1"), pos.count("2"), pos.count("3+")), (3, 2, 1));
    let ln = name_popularity(&inst, NameKey::Ln);
    // charas x3 -> bucket 2-3 holds 3 instances; lopes x2 -> 2 more; mota x1.
    assert_eq!((ln.count("1"), ln.count("2-3")), (1, 5));
    let lnfi = name_popularity(&inst, NameKey::Lnfi);
    assert_eq!(lnfi.facet, "name_popularity_LNFI");
    assert_eq!(lnfi.total, 6);
}

fn cit_strategy() -> impl Strategy<Value = Vec<(Option<i32>, usize)>> {
    prop::collection::vec((prop::option::of(1990i32..2000), 1usize..6), 1..40)
}

const NAMES: [&str; 6] = ["Ana Charas", "Rui Lopes", "Eva Mota", "A. Charas", "Zoë Ruiz", "Jan van Dijk"];

proptest! {
    #[test]
    fn reports_sum_to_one_and_ignore_order(spec in cit_strategy(), rot in 0usize..40) {
        let cits: Vec<_> = spec
            .iter()
            .enumerate()
            .map(|(i, &(year, k))| {
                let names: Vec<&str> = (0..k).map(|j| NAMES[(i + j) % NAMES.len()]).collect();
                let mut c = citation(&format!("P{i}"), &names);
                c.year = year;
                c
            })
            .collect();
        let mut shuffled = cits.clone();
        let len = shuffled.len();
        shuffled.rotate_left(rot % len);
        shuffled.reverse();
        let reports = |cs: &[andkit_core::ingest::CitationRecord]| {
            let inst = corpus_instances(cs);
            vec![
                year_distribution(cs),
                position_distribution(&inst, 3),
                name_popularity(&inst, NameKey::Ln),
                name_popularity(&inst, NameKey::Lnfi),
            ]
        };
        let a = reports(&cits);
        prop_assert_eq!(&a, &reports(&shuffled));
        for r in &a {
            prop_assert!((total(r) - 1.0).abs() < 1e-12);
            prop_assert_eq!(r.bins.iter().map(|b| b.count).sum::<u64>(), r.total);
            prop_assert!(r.bins.iter().all(|b| b.count > 0));
        }
    }

    #[test]
    fn insensitive_variation_never_exceeds_sensitive(
        picks in prop::collection::vec(0usize..6, 1..30)
    ) {
        let printed = ["Ana Charás", "A. Charas", "Charas Ana", "Ana CHARAS", "Ana Chäras", "Ana Charas-Lima"];
        let claims: Vec<LinkedClaim> = picks
            .iter()
            .enumerate()
            .map(|(i, &p)| byline_claim("a", "Ana Charas", &format!("P{i}"), printed[p]))
            .collect();
        for row in variation_report(&claims, &VariationChecker::default()).unwrap() {
            prop_assert!(row.civd <= row.csvd, "{:?}", row);
        }
    }
}
