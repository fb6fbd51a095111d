use super::dfs::{dfs_events, prove_dfs, DfsEvent, DfsVerifier};
use super::*;
use crate::graph::{bfs_dist, connected_gnm, gnm, is_bipartite};
use crate::protocol::run_in_memory;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn run_with(make: &dyn Fn(&mut ChaCha8Rng, &StreamHeader) -> Box<dyn Verifier>, g: &Graph, ann: &Annotation, seed: u64) -> Outcome {
    let s = g.to_stream();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = make(&mut rng, &s.header);
    run_in_memory(v.as_mut(), &s, ann).0
}

fn bfs(g: &Graph, ann: &Annotation, seed: u64) -> Outcome {
    run_with(&|r, h| Box::new(BfsVerifier::new(PrimeField::default(), r, h).unwrap()), g, ann, seed)
}

fn bip(g: &Graph, ann: &Annotation, seed: u64) -> Outcome {
    run_with(&|r, h| Box::new(BipartiteVerifier::new(PrimeField::default(), r, h).unwrap()), g, ann, seed)
}

fn dfs(g: &Graph, ann: &Annotation, seed: u64) -> Outcome {
    run_with(&|r, h| Box::new(DfsVerifier::new(PrimeField::default(), r, h).unwrap()), g, ann, seed)
}

fn ints(o: &Outcome) -> Vec<i128> {
    match o {
        Outcome::Value(Answer::Ints(v)) => v.clone(),
        other => panic!("expected a vector, got {other:?}"),
    }
}

#[test]
fn bfs_small_examples() {
    let path = Graph::from_pairs(3, false, &[(1, 2), (2, 3)]);
    assert_eq!(ints(&bfs(&path, &prove_bfs(&path, 1).unwrap(), 0)), vec![0, 1, 2]);
    let k3 = Graph::from_pairs(3, false, &[(1, 2), (2, 3), (1, 3)]);
    let ann = prove_bfs(&k3, 1).unwrap();
    let flat: Vec<_> = ann.tokens.iter().filter(|t| t.tag == Tag::BfsEdge && t.int(2) == t.int(3)).collect();
    assert_eq!(flat.len(), 1);
    assert_eq!(flat[0].int(2).unwrap(), 1);
    assert_eq!(ints(&bfs(&k3, &ann, 0)), vec![0, 1, 1]);
}

#[test]
fn bfs_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for trial in 0..200 {
        let n = rng.gen_range(1..=40u64);
        let m = rng.gen_range(n as usize - 1..=(n * (n - 1) / 2).min(3 * n) as usize);
        let g = connected_gnm(&mut rng, n, m).unwrap();
        let s = rng.gen_range(1..=n);
        let mut g2 = g.clone();
        g2.edges.clone_from(&g.edges);
        let stream = g.to_stream();
        let mut header = stream.header.clone();
        header.params.insert("s".into(), s.to_string());
        let mut vr = ChaCha8Rng::seed_from_u64(trial);
        let mut v = BfsVerifier::new(PrimeField::default(), &mut vr, &header).unwrap();
        let (out, _) = run_in_memory(&mut v, &crate::stream::Stream { header, tokens: stream.tokens }, &prove_bfs(&g, s).unwrap());
        let expect: Vec<i128> = bfs_dist(&g, s).into_iter().skip(1).map(|d| d.unwrap() as i128).collect();
        assert_eq!(ints(&out), expect);
    }
}

#[test]
fn bfs_forgeries_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let g = connected_gnm(&mut rng, 12, 20).unwrap();
    let honest = prove_bfs(&g, 1).unwrap();
    // Shift one node's level by one everywhere it is announced.
    let victim = 5i64;
    let shifted = Annotation {
        header: honest.header.clone(),
        tokens: honest
            .tokens
            .iter()
            .map(|t| {
                let mut t = t.clone();
                if t.tag == Tag::NodeRow && t.int(0).unwrap() == victim {
                    t.args[1] = crate::annotation::Num::Int(t.int(1).unwrap() + 1);
                }
                t
            })
            .collect(),
    };
    for seed in 0..500 {
        assert!(bfs(&g, &shifted, seed).is_bottom());
    }
    // Swap the first level-1 block and the first level-2 row.
    let mut reordered = honest.clone();
    let a = reordered.tokens.iter().position(|t| t.tag == Tag::BfsLevel && t.int(0) == Ok(1)).unwrap();
    let b = reordered.tokens.iter().position(|t| t.tag == Tag::BfsLevel && t.int(0) == Ok(2)).unwrap();
    reordered.tokens.swap(a, b);
    match bfs(&g, &reordered, 0) {
        Outcome::Bottom(r) => assert_eq!(r.reason, Reason::Structure),
        o => panic!("{o:?}"),
    }
}

#[test]
fn bipartite_examples_and_oracle() {
    let c4 = Graph::from_pairs(4, false, &[(1, 2), (2, 3), (3, 4), (4, 1)]);
    assert_eq!(bip(&c4, &prove_bipartite(&c4), 0), Outcome::Value(Answer::Int(1)));
    let c3 = Graph::from_pairs(3, false, &[(1, 2), (2, 3), (3, 1)]);
    assert_eq!(bip(&c3, &prove_bipartite(&c3), 0), Outcome::Value(Answer::Int(0)));
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for trial in 0..300 {
        let n = rng.gen_range(2..=20u64);
        let m = rng.gen_range(0..=(n * (n - 1) / 2).min(2 * n) as usize);
        let g = gnm(&mut rng, n, m, false).unwrap();
        let expect = is_bipartite(&g) as i128;
        assert_eq!(bip(&g, &prove_bipartite(&g), trial), Outcome::Value(Answer::Int(expect)));
    }
}

#[test]
fn bipartite_claim_flip_rejected() {
    let c3 = Graph::from_pairs(3, false, &[(1, 2), (2, 3), (3, 1)]);
    // Claiming bipartite forces a level-flat edge or a bad transcript.
    let mut forged = Annotation::new(AnnHeader::new("bipartite"));
    forged.push_ints(Tag::Claim, &[1]);
    push_bfs_transcript(&mut forged, &[1, 2, 3], &[(1, 2), (2, 3), (3, 1)], &[0, 0, 1, 1]);
    assert!(bip(&c3, &forged, 0).is_bottom());
    // An even closed walk does not prove anything.
    let c4 = Graph::from_pairs(4, false, &[(1, 2), (2, 3), (3, 4), (4, 1)]);
    let mut even = Annotation::new(AnnHeader::new("bipartite"));
    even.push_ints(Tag::Claim, &[0]);
    for (u, v) in [(1, 2), (2, 3), (3, 4), (4, 1)] {
        even.push_ints(Tag::OddWalk, &[u, v]);
    }
    assert!(bip(&c4, &even, 0).is_bottom());
}

/// Trusted stack machine: checks an event list against the DFS rules.
fn valid_dfs(g: &Graph, events: &[DfsEvent]) -> bool {
    let n = g.n as usize;
    let mut remaining = std::collections::HashMap::new();
    for &(u, v, _) in &g.edges {
        *remaining.entry((u.min(v), u.max(v))).or_insert(0) += 1;
    }
    let mut incident_left = g.degrees();
    let mut pushed = vec![false; n + 1];
    let mut popped = vec![false; n + 1];
    let mut stack: Vec<u64> = Vec::new();
    let mut must_push = None;
    for (i, ev) in events.iter().enumerate() {
        if let Some(v) = must_push.take() {
            if *ev != DfsEvent::Push(v) {
                return false;
            }
        }
        match *ev {
            DfsEvent::Push(u) => {
                if pushed[u as usize] || (i > 0 && stack.is_empty()) {
                    return false;
                }
                pushed[u as usize] = true;
                stack.push(u);
            }
            DfsEvent::Edge(u, v) => {
                let key = (u.min(v), u.max(v));
                match remaining.get_mut(&key) {
                    Some(c) if *c > 0 && stack.last() == Some(&u) => *c -= 1,
                    _ => return false,
                }
                incident_left[u as usize] -= 1;
                incident_left[v as usize] -= 1;
                if !pushed[v as usize] {
                    must_push = Some(v);
                }
            }
            DfsEvent::Pop(u, next) => {
                if stack.pop() != Some(u) || incident_left[u as usize] != 0 || popped[u as usize] {
                    return false;
                }
                popped[u as usize] = true;
                if stack.last().copied().unwrap_or(0) != next {
                    return false;
                }
            }
        }
    }
    stack.is_empty() && pushed.iter().skip(1).all(|&p| p) && remaining.values().all(|&c| c == 0)
}

#[test]
fn dfs_path_rows() {
    let path = Graph::from_pairs(3, false, &[(1, 2), (2, 3)]);
    let ev = dfs_events(&path, 1).unwrap();
    use DfsEvent::*;
    assert_eq!(ev, vec![Push(1), Edge(1, 2), Push(2), Edge(2, 3), Push(3), Pop(3, 2), Pop(2, 1), Pop(1, 0)]);
    assert_eq!(ints(&dfs(&path, &prove_dfs(&path, 1).unwrap(), 0)), vec![1, 2, 3]);
}

#[test]
fn dfs_star_counts() {
    let star = Graph::from_pairs(4, false, &[(1, 2), (1, 3), (1, 4)]);
    let ann = prove_dfs(&star, 1).unwrap();
    // Centre is top at t=1,2,4,5,7,8,10 and popped last, at t = m + 2n = 11.
    assert_eq!(ann.tokens[0], AnnToken::ints(Tag::DfsPrologue, &[1, 1, 7, 1, 11, 8]));
    assert_eq!(dfs(&star, &ann, 0), Outcome::Value(Answer::Ints(vec![1, 2, 3, 4])));
}

#[test]
fn dfs_random_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for trial in 0..300 {
        let n = rng.gen_range(1..=30u64);
        let m = rng.gen_range(n as usize - 1..=(n * (n - 1) / 2).min(3 * n) as usize);
        let g = connected_gnm(&mut rng, n, m).unwrap();
        let ev = dfs_events(&g, 1).unwrap();
        assert!(valid_dfs(&g, &ev));
        let pre: Vec<i128> = ev.iter().filter_map(|e| if let DfsEvent::Push(u) = e { Some(*u as i128) } else { None }).collect();
        assert_eq!(ints(&dfs(&g, &prove_dfs(&g, 1).unwrap(), trial)), pre);
    }
}

#[test]
fn dfs_forgeries_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let g = connected_gnm(&mut rng, 10, 18).unwrap();
    let honest = prove_dfs(&g, 1).unwrap();
    // An edge row whose first endpoint is not the top.
    let mut off_top = honest.clone();
    let k = off_top.tokens.iter().position(|t| t.tag == Tag::DfsRow && t.int(0) == Ok(0)).unwrap();
    let row = off_top.tokens[k].clone();
    let swapped = vec![0, row.int(2).unwrap(), row.int(1).unwrap(), row.int(5).unwrap(), row.int(6).unwrap(), row.int(3).unwrap(), row.int(4).unwrap()];
    off_top.tokens[k] = AnnToken::ints(Tag::DfsRow, &swapped);
    match dfs(&g, &off_top, 0) {
        Outcome::Bottom(r) => assert_eq!(r.reason, Reason::Transcript),
        o => panic!("{o:?}"),
    }
    // Lie about the new top after some pop that leaves a nonempty stack.
    let mut wrong_top = honest.clone();
    let k = wrong_top
        .tokens
        .iter()
        .position(|t| t.tag == Tag::DfsRow && t.int(0) == Ok(2) && t.int(3) != Ok(0) && t.int(3) != Ok(1))
        .unwrap();
    let row = wrong_top.tokens[k].clone();
    let parent = row.int(3).unwrap() as usize;
    // Claim the root instead, with the root's true timestamps.
    let root = honest.tokens[0].clone();
    let mut args: Vec<i64> = row.args.iter().map(|a| if let crate::annotation::Num::Int(x) = a { *x } else { 0 }).collect();
    args[3] = 1;
    args[4] = root.int(3).unwrap();
    args[5] = root.int(4).unwrap();
    assert_ne!(parent, 1);
    wrong_top.tokens[k] = AnnToken::ints(Tag::DfsRow, &args);
    for seed in 0..200 {
        assert!(dfs(&g, &wrong_top, seed).is_bottom());
    }
}
