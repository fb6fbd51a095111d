use annostream_core::attack::{attack, mutate, MutationKind};
use annostream_core::field::PrimeField;
use annostream_core::registry::{GenParams, ProtocolKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn instance(kind: ProtocolKind) -> (annostream_core::stream::Stream, annostream_core::annotation::Annotation) {
    let p = GenParams { n: 8, m: None, b: 4, c: 5, alpha: "1/2".into() };
    let s = kind.generate(&mut ChaCha8Rng::seed_from_u64(4), &p).unwrap();
    let ann = kind.prove(PrimeField::default(), &s).unwrap();
    (s, ann)
}

#[test]
fn identity_list_gives_empty_table() {
    let (s, ann) = instance(ProtocolKind::Matching);
    assert!(attack(ProtocolKind::Matching, PrimeField::default(), &s, &ann, &[], 10, 1).is_empty());
}

#[test]
fn claiming_one_more_matched_edge_is_always_rejected() {
    let (s, ann) = instance(ProtocolKind::Matching);
    let rows = attack(ProtocolKind::Matching, PrimeField::default(), &s, &ann, &[MutationKind::WrongAnswer], 200, 2);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].rejected, 200);
}

#[test]
fn every_kind_changes_the_annotation() {
    for kind in ProtocolKind::ALL {
        let (_, ann) = instance(kind);
        for mk in MutationKind::ALL {
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            if let Some((m, bad)) = mutate(kind, mk, &ann, &mut rng) {
                assert_ne!(bad, ann, "{kind} {mk} {m:?}");
            } else {
                assert!(mk == MutationKind::WrongAnswer && kind.accepts_only(), "{kind} {mk} not applicable");
            }
        }
    }
}

#[test]
fn attack_is_deterministic() {
    let (s, ann) = instance(ProtocolKind::Bfs);
    let run = || attack(ProtocolKind::Bfs, PrimeField::default(), &s, &ann, &MutationKind::ALL, 40, 9);
    assert_eq!(run(), run());
}

#[test]
fn mutation_names_round_trip() {
    for mk in MutationKind::ALL {
        assert_eq!(mk.name().parse::<MutationKind>().unwrap(), mk);
    }
}
