use annostream_core::field::PrimeField;
use annostream_core::protocol::Outcome;
use annostream_core::registry::{GenParams, ProtocolKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_params(kind: ProtocolKind, seed: u64) -> GenParams {
    let n = 4 + seed % 6;
    let n = if kind.name() == "mwbpm" { n & !1 } else { n };
    GenParams { n, m: None, b: 2 + seed % 4, c: 2 + seed % 5, alpha: "1/2".into() }
}

#[test]
fn honest_runs_match_oracle() {
    let field = PrimeField::default();
    for kind in ProtocolKind::ALL {
        for seed in 0..25 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = kind.generate(&mut rng, &small_params(kind, seed)).unwrap();
            let expect = kind.oracle(&s).unwrap_or_else(|| panic!("{kind} seed {seed}: oracle has no answer"));
            let ann = kind.prove(field, &s).unwrap_or_else(|| panic!("{kind} seed {seed}: no certificate"));
            let (out, _) = kind.run(field, seed, &s, &ann);
            assert_eq!(out, expect, "{kind} seed {seed}");
        }
    }
}

#[test]
fn tags_round_trip() {
    for kind in ProtocolKind::ALL {
        assert_eq!(kind.name().parse::<ProtocolKind>().unwrap(), kind);
    }
    assert!("nope".parse::<ProtocolKind>().is_err());
}

#[test]
fn foreign_annotation_is_a_protocol_mismatch() {
    let field = PrimeField::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let s = ProtocolKind::Bfs.generate(&mut rng, &GenParams::default()).unwrap();
    let mut ann = ProtocolKind::Bfs.prove(field, &s).unwrap();
    ann.header.protocol = "dfs".into();
    let (out, _) = ProtocolKind::Bfs.run(field, 1, &s, &ann);
    let Outcome::Bottom(r) = out else { panic!("accepted a foreign annotation") };
    assert_eq!(r.reason.code(), "protocol-mismatch");
}

#[test]
fn generation_is_deterministic() {
    for kind in ProtocolKind::ALL {
        let p = small_params(kind, 3);
        let a = kind.generate(&mut ChaCha8Rng::seed_from_u64(9), &p).unwrap();
        let b = kind.generate(&mut ChaCha8Rng::seed_from_u64(9), &p).unwrap();
        assert_eq!(a.to_text(), b.to_text(), "{kind}");
    }
}

#[test]
fn bad_sizes_are_usage_errors() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let zero = GenParams { n: 0, ..GenParams::default() };
    assert!(ProtocolKind::Matching.generate(&mut rng, &zero).is_err());
    let dense = GenParams { n: 4, m: Some(17), ..GenParams::default() };
    assert!(ProtocolKind::Dag.generate(&mut rng, &dense).is_err());
}
