mod common;

use std::collections::{HashMap, HashSet};

use andkit_core::builder::{
    build_block_dataset, cfn_key, sample_pairwise, split, trim_single_author_blocks, BlockDataset, Fold,
};
use andkit_core::linker::{link_and_position, CitationIndex, PositionConfig};
use andkit_core::metrics::{audit_id_system, B3Averaging, ExternalIdLine, ExternalIds};
use andkit_core::synth::{generate, SynthConfig, SynthCorpus};
use common::{brute_bcubed, claim};
use num_traits::ToPrimitive;

fn corpus(blocks: usize, seed: u64) -> SynthCorpus {
    generate(&SynthConfig { blocks, ..SynthConfig::default() }, seed)
}

fn build(c: &SynthCorpus) -> BlockDataset {
    let index = CitationIndex::new(c.citations.clone());
    let (claims, report) = link_and_position(c.registry.clone(), &index, &PositionConfig::default());
    assert_eq!(report.positioned as usize, claims.len());
    build_block_dataset(claims)
}

#[test]
fn linked_positions_agree_with_the_generator() {
    let c = corpus(400, 5);
    let ds = build(&c);
    let truth: HashMap<(&str, &str), u32> =
        c.truth.iter().map(|t| ((t.author_id.as_str(), t.doi.as_str()), t.position)).collect();
    // Initials-only bylines next to a co-author sharing the given name can
    // outscore the true slot, so agreement is near-total rather than exact.
    let mut checked = 0;
    let mut wrong = 0;
    for claim in ds.claims() {
        if let Some(&want) = truth.get(&(claim.author_id.as_str(), claim.doi.as_str())) {
            checked += 1;
            wrong += usize::from(claim.position != want);
        }
    }
    assert!(checked > 1000, "{checked}");
    assert!(wrong * 100 <= checked, "{wrong} of {checked}");
}

#[test]
fn pair_labels_match_the_registry() {
    let c = corpus(600, 6);
    let ds = build(&c);
    let pairs = sample_pairwise(&ds, 10, 1);
    let claimed: HashSet<(&str, &str)> = c
        .registry
        .iter()
        .flat_map(|a| a.claimed_dois.iter().map(move |d| (a.author_id.as_str(), d.as_str())))
        .collect();
    let cfn: HashMap<&str, &str> = c.registry.iter().map(|a| (a.author_id.as_str(), a.cfn.as_str())).collect();
    let mut mismatches = 0;
    for p in &pairs {
        assert!(claimed.contains(&(p.left_author_id.as_str(), p.left_doi.as_str())));
        assert!(claimed.contains(&(p.right_author_id.as_str(), p.right_doi.as_str())));
        assert_eq!(cfn_key(cfn[p.left_author_id.as_str()]), p.cfn_key);
        assert_eq!(cfn_key(cfn[p.right_author_id.as_str()]), p.cfn_key);
        mismatches += usize::from(p.label != (p.left_author_id == p.right_author_id));
    }
    assert_eq!(mismatches, 0);
    let ids: Vec<u64> = pairs.iter().map(|p| p.id).collect();
    assert_eq!(ids, (0..pairs.len() as u64).collect::<Vec<_>>());
}

#[test]
fn every_claim_lands_in_exactly_one_block() {
    let c = corpus(500, 7);
    let ds = build(&c);
    let per_block: usize = ds.blocks.iter().map(|b| b.claims().count()).sum();
    assert_eq!(per_block, ds.claims().count());
    for b in &ds.blocks {
        assert!(b.claims().all(|c| cfn_key(&c.cfn) == b.cfn_key));
    }
    let keys: Vec<&str> = ds.blocks.iter().map(|b| b.cfn_key.as_str()).collect();
    let mut sorted = keys.clone();
    sorted.sort_unstable();
    sorted.dedup();
    assert_eq!(keys, sorted);
}

#[test]
fn single_author_share_is_close_to_the_configured_rate() {
    let ds = build(&corpus(3000, 8));
    let single = ds.blocks.iter().filter(|b| b.n_authors() == 1).count() as f64;
    let share = single / ds.blocks.len() as f64;
    assert!((share - 0.945).abs() < 0.02, "{share}");
}

#[test]
fn trimming_keeps_exactly_the_multi_author_blocks() {
    let ds = build(&corpus(800, 9));
    let trimmed = trim_single_author_blocks(&ds);
    assert!(trimmed.provenance.trimmed);
    assert!(trimmed.blocks.iter().all(|b| b.n_authors() >= 2));
    let kept: HashSet<&str> = trimmed.blocks.iter().map(|b| b.cfn_key.as_str()).collect();
    for b in &ds.blocks {
        assert_eq!(kept.contains(b.cfn_key.as_str()), b.n_authors() >= 2);
        if let Some(t) = trimmed.block(&b.cfn_key) {
            assert_eq!(t, b);
        }
    }
    assert_eq!(trim_single_author_blocks(&trimmed).blocks, trimmed.blocks);
}

#[test]
fn split_keeps_blocks_and_their_pairs_together() {
    let ds = build(&corpus(1000, 10));
    let pairs = sample_pairwise(&ds, 10, 2);
    let s = split(&ds, &pairs, [50, 25, 25], 3).unwrap();
    let n = ds.blocks.len() as f64;
    for (fold, share) in Fold::ALL.into_iter().zip([0.5, 0.25, 0.25]) {
        assert!((s.count(fold) as f64 - n * share).abs() <= 1.0);
    }
    let mut seen = HashSet::new();
    for fold in Fold::ALL {
        let part = s.blocks_in(&ds, fold);
        assert_eq!(part.blocks.len(), s.count(fold));
        for b in &part.blocks {
            assert!(seen.insert(b.cfn_key.clone()));
        }
        for p in s.pairs_in(&pairs, fold) {
            assert!(part.block(&p.cfn_key).is_some());
        }
    }
    assert_eq!(seen.len(), ds.blocks.len());
    let total: usize = Fold::ALL.iter().map(|&f| s.pairs_in(&pairs, f).len()).sum();
    assert_eq!(total, pairs.len());
    assert_eq!(split(&ds, &pairs, [50, 25, 25], 3).unwrap(), s);
}

fn external(ds: &BlockDataset, id: impl Fn(&andkit_core::linker::LinkedClaim) -> String) -> ExternalIds {
    ExternalIds::from_lines(ds.claims().map(|c| ExternalIdLine {
        paper_id: c.citation.paper_id.clone(),
        position: c.position,
        external_id: id(c),
    }))
}

#[test]
fn audit_of_gold_ids_is_perfect() {
    let ds = build(&corpus(300, 11));
    let pairs = sample_pairwise(&ds, 10, 1);
    let ext = external(&ds, |c| format!("x{}", c.author_id));
    let r = audit_id_system(&ds, &pairs, &ext, B3Averaging::Pooled).unwrap();
    assert_eq!((r.bcubed.precision, r.bcubed.recall, r.bcubed.f1), (1.0, 1.0, 1.0));
    assert_eq!(r.missing, 0);
    let cls = r.classification.unwrap();
    assert_eq!((cls.fp, cls.fn_), (0, 0));
}

#[test]
fn audit_of_per_claim_ids_has_full_precision() {
    let ds = build(&corpus(300, 12));
    let ext = external(&ds, |c| format!("{}/{}", c.citation.paper_id, c.position));
    let r = audit_id_system(&ds, &[], &ext, B3Averaging::Pooled).unwrap();
    assert_eq!(r.bcubed.precision, 1.0);
    assert!(r.bcubed.recall < 1.0);
    assert!(r.classification.is_none());
}

#[test]
fn audit_matches_brute_force_on_a_mixed_fixture() {
    // Gold: a = {P1, P2, P3}, b = {P4, P5}. External IDs merge P3 with b and
    // split P1 from P2.
    let claims = vec![
        claim("a", "X Y", "P1"),
        claim("a", "X Y", "P2"),
        claim("a", "X Y", "P3"),
        claim("b", "X Y", "P4"),
        claim("b", "X Y", "P5"),
    ];
    let ds = build_block_dataset(claims);
    let ext_of = |paper: &str| match paper {
        "P1" => "e1",
        "P2" | "P3" => "e2",
        _ => "e3",
    };
    let ext = ExternalIds::from_lines(ds.claims().map(|c| ExternalIdLine {
        paper_id: c.citation.paper_id.clone(),
        position: c.position,
        external_id: ext_of(&c.citation.paper_id).into(),
    }));
    let r = audit_id_system(&ds, &[], &ext, B3Averaging::Pooled).unwrap();
    let papers: Vec<&str> = ds.claims().map(|c| c.citation.paper_id.as_str()).collect();
    let ext_ids = ["e1", "e2", "e3"];
    let pred: Vec<usize> = papers.iter().map(|p| ext_ids.iter().position(|e| *e == ext_of(p)).unwrap()).collect();
    let gold: Vec<usize> = ds.claims().map(|c| usize::from(c.author_id == "b")).collect();
    let (p, rc, f) = brute_bcubed(&pred, &gold);
    let close = |a: f64, b: num_rational::Ratio<i64>| (a - b.to_f64().unwrap()).abs() < 1e-12;
    assert!(close(r.bcubed.precision, p) && close(r.bcubed.recall, rc) && close(r.bcubed.f1, f));
}
