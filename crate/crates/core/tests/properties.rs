use proptest::prelude::*;

use sdprel::corpus::{
    parse_conll, parse_semeval, write_conll, write_semeval, DirectedLabel, Direction, LabelSet, ParsedSentence,
    ParsedToken, RawInstance, Span,
};
use sdprel::deppath::{build_graph, extract, reverse_path, shortest_path, PathMode};
use sdprel::infer_eval::macro_f1;
use sdprel::training::epoch_permutation;

/// `(parents, relabel)`: node `relabel[i]` hangs under `relabel[parents[i-1]]`.
fn tree_strategy(max: usize) -> impl Strategy<Value = ParsedSentence> {
    (2..=max)
        .prop_flat_map(|n| {
            let parents: Vec<_> = (1..n).map(|i| 0..i).collect();
            (parents, Just((0..n).collect::<Vec<usize>>()).prop_shuffle())
        })
        .prop_map(|(parents, relabel)| {
            let n = relabel.len();
            let mut heads = vec![None; n];
            for (i, p) in parents.into_iter().enumerate() {
                heads[relabel[i + 1]] = Some(relabel[p]);
            }
            let tokens = (0..n)
                .map(|i| ParsedToken::new(format!("T{}", i % 4), heads[i], if heads[i].is_some() { "dep" } else { "root" }))
                .collect();
            ParsedSentence::new(tokens).unwrap()
        })
}

fn simple_paths(parse: &ParsedSentence, a: usize, b: usize) -> Vec<Vec<usize>> {
    let n = parse.len();
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        if let Some(h) = parse.head(i) {
            adj[i].push(h);
            adj[h].push(i);
        }
    }
    let mut out = Vec::new();
    let mut stack = vec![vec![a]];
    while let Some(path) = stack.pop() {
        let last = *path.last().unwrap();
        if last == b {
            out.push(path);
            continue;
        }
        for &next in &adj[last] {
            if !path.contains(&next) {
                let mut p = path.clone();
                p.push(next);
                stack.push(p);
            }
        }
    }
    out
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    parent[x] = r;
    r
}

/// Union-find acceptance oracle: one root and no cycle among head links.
fn is_tree(heads: &[Option<usize>]) -> bool {
    let n = heads.len();
    if heads.iter().filter(|h| h.is_none()).count() != 1 {
        return false;
    }
    let mut parent: Vec<usize> = (0..n).collect();
    for (i, h) in heads.iter().enumerate() {
        if let Some(h) = *h {
            if h >= n {
                return false;
            }
            let (a, b) = (find(&mut parent, i), find(&mut parent, h));
            if a == b {
                return false;
            }
            parent[a] = b;
        }
    }
    true
}

fn label_strategy() -> impl Strategy<Value = DirectedLabel> {
    let names = LabelSet::semeval().relations().to_vec();
    prop_oneof![
        1 => Just(DirectedLabel::Other),
        4 => (prop::sample::select(names), any::<bool>()).prop_map(|(n, fwd)| {
            DirectedLabel::relation(n, if fwd { Direction::E1ToE2 } else { Direction::E2ToE1 })
        }),
    ]
}

proptest! {
    #[test]
    fn bfs_matches_brute_force(parse in tree_strategy(12), a in 0usize..12, b in 0usize..12) {
        let n = parse.len();
        let (a, b) = (a % n, b % n);
        prop_assume!(a != b);
        let bfs = shortest_path(&build_graph(&parse), a, b).unwrap();
        prop_assert_eq!(simple_paths(&parse, a, b), vec![bfs]);
    }

    #[test]
    fn tree_acceptance_matches_union_find(heads in prop::collection::vec(prop::option::weighted(0.9, 0usize..9), 1..9)) {
        let tokens = heads.iter().map(|&h| ParsedToken::new("w", h, "dep")).collect();
        prop_assert_eq!(ParsedSentence::new(tokens).is_ok(), is_tree(&heads));
    }

    #[test]
    fn reversal_duality(parse in tree_strategy(15), a in 0usize..15, b in 0usize..15, lcnn in any::<bool>()) {
        let n = parse.len();
        let (a, b) = (a % n, b % n);
        prop_assume!(a != b);
        let mode = if lcnn { PathMode::Lcnn } else { PathMode::DirOnly };
        let ab = extract(&parse, a, b, mode).unwrap();
        let ba = extract(&parse, b, a, mode).unwrap();
        prop_assert_eq!(&reverse_path(&ab), &ba);
        prop_assert_eq!(reverse_path(&reverse_path(&ab)), ab);
    }

    #[test]
    fn conll_round_trip(parse in tree_strategy(10)) {
        let back = parse_conll(&write_conll(std::slice::from_ref(&parse))).unwrap();
        prop_assert_eq!(back, vec![parse]);
    }

    #[test]
    fn semeval_round_trip(
        words in prop::collection::vec("[a-z]{1,6}", 2..12),
        cut in any::<prop::sample::Index>(),
        len1 in 1usize..3,
        len2 in 1usize..3,
        label in label_strategy(),
        id in 1u64..100_000,
    ) {
        let n = words.len();
        let s1 = cut.index(n - 1);
        let e1 = Span::new(s1, (s1 + len1 - 1).min(n - 2));
        let s2 = e1.end + 1;
        let e2 = Span::new(s2, (s2 + len2 - 1).min(n - 1));
        let inst = RawInstance { id, tokens: words, e1, e2, label };
        let back = parse_semeval(&write_semeval(std::slice::from_ref(&inst))).unwrap();
        prop_assert_eq!(back, vec![inst]);
    }

    #[test]
    fn macro_f1_identity(mut x in prop::collection::vec(label_strategy(), 0..40), extra in label_strategy()) {
        let extra = if extra.is_other() { DirectedLabel::relation("Cause-Effect", Direction::E1ToE2) } else { extra };
        x.push(extra);
        let r = macro_f1(&x, &x, &LabelSet::semeval()).unwrap();
        prop_assert_eq!(r.macro_f1, 1.0);
        prop_assert_eq!(r.accuracy, 1.0);
    }

    #[test]
    fn macro_f1_permutation_invariant(
        pairs in prop::collection::vec((label_strategy(), label_strategy()), 1..40),
        seed in any::<u64>(),
    ) {
        let labels = LabelSet::semeval();
        let (g, p): (Vec<_>, Vec<_>) = pairs.iter().cloned().unzip();
        let order = epoch_permutation(seed, 1, pairs.len());
        let g2: Vec<_> = order.iter().map(|&i| g[i].clone()).collect();
        let p2: Vec<_> = order.iter().map(|&i| p[i].clone()).collect();
        let a = macro_f1(&g, &p, &labels).unwrap();
        let b = macro_f1(&g2, &p2, &labels).unwrap();
        prop_assert!((a.macro_f1 - b.macro_f1).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&a.macro_f1));
    }
}
