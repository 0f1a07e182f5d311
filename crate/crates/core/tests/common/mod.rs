#![allow(dead_code)]

use std::sync::Arc;

use andkit_core::ingest::{AuthorSlot, CitationRecord};
use andkit_core::linker::LinkedClaim;
use num_rational::Ratio;

/// Every set partition of `0..n` as a restricted growth string.
pub fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn grow(prefix: &mut Vec<usize>, max: usize, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for b in 0..=max + 1 {
            prefix.push(b);
            grow(prefix, max.max(b), n, out);
            prefix.pop();
        }
    }
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    grow(&mut vec![0], 0, n, &mut out);
    out
}

/// B-cubed straight from the per-element definition.
pub fn brute_bcubed(pred: &[usize], gold: &[usize]) -> (Ratio<i64>, Ratio<i64>, Ratio<i64>) {
    let n = pred.len();
    let mut sp = Ratio::from_integer(0);
    let mut sr = Ratio::from_integer(0);
    for i in 0..n {
        let same_pred = (0..n).filter(|&j| pred[j] == pred[i]).count() as i64;
        let same_gold = (0..n).filter(|&j| gold[j] == gold[i]).count() as i64;
        let both = (0..n).filter(|&j| pred[j] == pred[i] && gold[j] == gold[i]).count() as i64;
        sp += Ratio::new(both, same_pred);
        sr += Ratio::new(both, same_gold);
    }
    let p = sp / n as i64;
    let r = sr / n as i64;
    let f = if p + r == Ratio::from_integer(0) {
        Ratio::from_integer(0)
    } else {
        Ratio::from_integer(2) * p * r / (p + r)
    };
    (p, r, f)
}

/// Does `fine` refine `coarse` (every fine cluster inside one coarse cluster)?
pub fn refines(fine: &[usize], coarse: &[usize]) -> bool {
    (0..fine.len()).all(|i| (0..fine.len()).all(|j| fine[i] != fine[j] || coarse[i] == coarse[j]))
}

pub fn citation(paper_id: &str, names: &[&str]) -> CitationRecord {
    CitationRecord {
        doi: format!("10.1/{}", paper_id.to_lowercase()),
        paper_id: paper_id.into(),
        title: format!("title of {paper_id}"),
        abstract_text: String::new(),
        venue: String::new(),
        year: Some(2000),
        authors: names
            .iter()
            .map(|n| AuthorSlot {
                name: n.to_string(),
                affiliation: String::new(),
            })
            .collect(),
    }
}

pub fn claim(author_id: &str, cfn: &str, paper_id: &str) -> LinkedClaim {
    let c = citation(paper_id, &[cfn]);
    LinkedClaim {
        doi: c.doi.clone(),
        author_id: author_id.into(),
        cfn: cfn.into(),
        citation: Arc::new(c),
        position: 1,
    }
}
