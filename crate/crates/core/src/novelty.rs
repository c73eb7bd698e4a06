//! Similarity scorers and the novelty weight of an interaction against the
//! user's recent comparison history.
//!
//! Three scorers ship here. Anything implementing [`Similarity`] (including a
//! plain closure) can be plugged into [`novelty_weight_with`], which is the
//! seam for embedding-based scorers living outside this crate.

use std::collections::VecDeque;

use crate::config::SimilarityMethod;
use crate::types::TaskRepresentation;

/// A similarity score in `[0, 1]`; 1 means maximally similar.
pub trait Similarity {
    fn similarity(&self, a: &TaskRepresentation, b: &TaskRepresentation) -> f64;
}

impl<F> Similarity for F
where
    F: Fn(&TaskRepresentation, &TaskRepresentation) -> f64,
{
    fn similarity(&self, a: &TaskRepresentation, b: &TaskRepresentation) -> f64 {
        self(a, b)
    }
}

impl Similarity for SimilarityMethod {
    fn similarity(&self, a: &TaskRepresentation, b: &TaskRepresentation) -> f64 {
        match self {
            SimilarityMethod::Edit => edit_similarity(a, b),
            SimilarityMethod::Keyword => keyword_similarity(a, b),
            SimilarityMethod::Hybrid => hybrid_similarity(a, b),
        }
    }
}

/// Character-level Levenshtein distance.
pub fn levenshtein(a: &[char], b: &[char]) -> usize {
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// `1 - lev(a, b) / max(|a|, |b|)` over normalized text; two empty texts
/// score 1.
pub fn edit_similarity(a: &TaskRepresentation, b: &TaskRepresentation) -> f64 {
    if a.normalized_text == b.normalized_text {
        return 1.0;
    }
    let ca: Vec<char> = a.normalized_text.chars().collect();
    let cb: Vec<char> = b.normalized_text.chars().collect();
    let longest = ca.len().max(cb.len());
    1.0 - levenshtein(&ca, &cb) as f64 / longest as f64
}

/// Jaccard index of the keyword sets; two empty sets score 1.
pub fn keyword_similarity(a: &TaskRepresentation, b: &TaskRepresentation) -> f64 {
    if a.keywords.is_empty() && b.keywords.is_empty() {
        return 1.0;
    }
    let shared = a.keywords.intersection(&b.keywords).count();
    let union = a.keywords.len() + b.keywords.len() - shared;
    shared as f64 / union as f64
}

pub fn hybrid_similarity(a: &TaskRepresentation, b: &TaskRepresentation) -> f64 {
    let kw = keyword_similarity(a, b);
    if kw >= 1.0 {
        return 1.0;
    }
    kw.max(edit_similarity(a, b))
}

/// Novelty weight `max(0, 1 - max_j sim(task, history_j))`, or 1 when the
/// history is empty.
pub fn novelty_weight_with<S: Similarity + ?Sized>(
    scorer: &S,
    task: &TaskRepresentation,
    history: &VecDeque<TaskRepresentation>,
) -> f64 {
    let mut best = 0.0_f64;
    for past in history {
        best = best.max(scorer.similarity(task, past));
        if best >= 1.0 {
            break;
        }
    }
    (1.0 - best).clamp(0.0, 1.0)
}

pub fn novelty_weight(
    task: &TaskRepresentation,
    history: &VecDeque<TaskRepresentation>,
    method: SimilarityMethod,
) -> f64 {
    novelty_weight_with(&method, task, history)
}

/// Appends `task`, evicting from the front beyond `capacity`.
pub fn push_history(
    history: &mut VecDeque<TaskRepresentation>,
    task: TaskRepresentation,
    capacity: usize,
) {
    history.push_back(task);
    while history.len() > capacity {
        history.pop_front();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rep(s: &str) -> TaskRepresentation {
        TaskRepresentation::from_prompt(s)
    }

    const METHODS: [SimilarityMethod; 3] = [
        SimilarityMethod::Edit,
        SimilarityMethod::Keyword,
        SimilarityMethod::Hybrid,
    ];

    #[test]
    fn levenshtein_small_cases() {
        let c = |s: &str| s.chars().collect::<Vec<_>>();
        assert_eq!(levenshtein(&c(""), &c("")), 0);
        assert_eq!(levenshtein(&c("abc"), &c("")), 3);
        assert_eq!(levenshtein(&c("kitten"), &c("sitting")), 3);
        assert_eq!(levenshtein(&c("ab"), &c("ba")), 2);
        assert_eq!(levenshtein(&c("flaw"), &c("lawn")), 2);
    }

    #[test]
    fn edit_similarity_examples() {
        assert_eq!(
            edit_similarity(&rep("draft q3 report"), &rep("draft q3 report")),
            1.0
        );
        assert_eq!(edit_similarity(&rep("abcd"), &rep("wxyz")), 0.0);
        assert_eq!(edit_similarity(&rep("abcd"), &rep("abce")), 0.75);
        assert_eq!(edit_similarity(&rep(""), &rep("")), 1.0);
        assert_eq!(edit_similarity(&rep(""), &rep("abc")), 0.0);
    }

    #[test]
    fn keyword_similarity_examples() {
        assert_eq!(
            keyword_similarity(&rep("alpha beta"), &rep("beta alpha")),
            1.0
        );
        assert_eq!(
            keyword_similarity(&rep("alpha beta"), &rep("gamma delta")),
            0.0
        );
        assert_eq!(
            keyword_similarity(&rep("alpha beta gamma"), &rep("beta gamma delta")),
            0.5
        );
        assert_eq!(keyword_similarity(&rep("a b"), &rep("c d")), 1.0);
        assert_eq!(keyword_similarity(&rep("alpha"), &rep("")), 0.0);
    }

    #[test]
    fn hybrid_takes_the_max() {
        assert_eq!(hybrid_similarity(&rep("same text"), &rep("same text")), 1.0);
        // keyword 2/4 = 0.5 beats the edit score on reordered words.
        let a = rep("alpha beta gamma");
        let b = rep("delta gamma beta");
        let e = edit_similarity(&a, &b);
        assert!(e < 0.5);
        assert_eq!(hybrid_similarity(&a, &b), 0.5);
        // Disjoint alphabets, one keyword each: both components are 0.
        assert_eq!(hybrid_similarity(&rep("abcd"), &rep("wxyz")), 0.0);

        let custom = |_: &TaskRepresentation, _: &TaskRepresentation| 0.2;
        assert_eq!(custom.similarity(&a, &b), 0.2);
    }

    #[test]
    fn novelty_examples() {
        let mut h = VecDeque::new();
        assert_eq!(
            novelty_weight(&rep("anything"), &h, SimilarityMethod::Hybrid),
            1.0
        );
        push_history(&mut h, rep("write the quarterly summary"), 50);
        assert_eq!(
            novelty_weight(
                &rep("write the quarterly summary"),
                &h,
                SimilarityMethod::Hybrid
            ),
            0.0
        );
        let fixed = |_: &TaskRepresentation, _: &TaskRepresentation| 0.3;
        assert!((novelty_weight_with(&fixed, &rep("x"), &h) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn history_is_bounded() {
        let mut h = VecDeque::new();
        push_history(&mut h, rep("first"), 50);
        assert_eq!(h.len(), 1);
        for i in 1..51 {
            push_history(&mut h, rep(&format!("entry {i}")), 50);
        }
        assert_eq!(h.len(), 50);
        assert!(!h.contains(&rep("first")));
        assert_eq!(h.front(), Some(&rep("entry 1")));
    }

    fn text() -> impl Strategy<Value = String> {
        proptest::string::string_regex("[a-e ]{0,24}").unwrap()
    }

    proptest! {
        #[test]
        fn scorers_are_reflexive_symmetric_bounded(a in text(), b in text()) {
            let (ra, rb) = (rep(&a), rep(&b));
            for m in METHODS {
                let s = m.similarity(&ra, &rb);
                prop_assert!((0.0..=1.0).contains(&s));
                prop_assert_eq!(s, m.similarity(&rb, &ra));
                prop_assert_eq!(m.similarity(&ra, &ra), 1.0);
            }
        }

        #[test]
        fn novelty_in_unit_interval_and_monotone(
            task in text(),
            hist in proptest::collection::vec(text(), 0..8),
        ) {
            let t = rep(&task);
            for m in METHODS {
                let mut h = VecDeque::new();
                let mut last = novelty_weight(&t, &h, m);
                prop_assert_eq!(last, 1.0);
                for s in &hist {
                    push_history(&mut h, rep(s), 64);
                    let nu = novelty_weight(&t, &h, m);
                    prop_assert!((0.0..=1.0).contains(&nu));
                    prop_assert!(nu <= last);
                    last = nu;
                }
                push_history(&mut h, t.clone(), 64);
                prop_assert_eq!(novelty_weight(&t, &h, m), 0.0);
            }
        }
    }
}
