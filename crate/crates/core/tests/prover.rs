mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use clbk::formula::{parse_formula, Formula};
use clbk::prover::{hybridize, prove, termination_stats, verify_proof};
use common::proof_oracle::{mutate, oracle_accepts};
use common::random_provable;

fn f(s: &str) -> Formula {
    parse_formula(s).unwrap()
}

const PROVABLE: &[&str] = &[
    "(p /\\ q) -> (p \\/ q)",
    "((p & q) -> (p & q)) @ w",
    "((p & q) -> p) @ w",
    "((p & q) -> q) @ w",
    "(p -> (p | q)) @ w",
    "C -> C @ w",
    "(C /\\ C) -> (C \\/ C) @ w",
    "(C & D) -> (C | D)",
    "((D /\\ D) -> (C /\\ C)) -> ((D /\\ D) -> (C /\\ C))",
];

const UNPROVABLE: &[&str] = &[
    "P -> (P /\\ P)",
    "C \\/ C",
    "p | ~p",
    "(C | D) -> (C & D)",
    "C -> D",
];

#[test]
fn fixture_verdicts() {
    for s in PROVABLE {
        let t = prove(&f(s)).unwrap_or_else(|_| panic!("{s} should be provable"));
        assert!(verify_proof(&t), "{s}");
        assert!(verify_proof(&hybridize(&t)), "{s}");
        assert!(oracle_accepts(&t) && oracle_accepts(&hybridize(&t)), "{s}");
    }
    for s in UNPROVABLE {
        assert!(prove(&f(s)).is_err(), "{s} should be unprovable");
    }
}

#[test]
fn example_listing() {
    let t = prove(&f("(C /\\ C) -> (C \\/ C) @ w")).unwrap();
    assert_eq!(t.rules(), vec!['C', 'C', 'A']);
    let h = hybridize(&t);
    assert_eq!(h.conclusion, t.conclusion);
    assert_eq!(
        h.premises[0].premises[0].conclusion.to_string(),
        "(C_p /\\ C_q) -> (C_p \\/ C_q) @ w"
    );
}

#[test]
fn random_proofs_verify_and_mutants_agree_with_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..60 {
        let (_, t) = random_provable(&mut rng);
        for tree in [t.clone(), hybridize(&t)] {
            assert!(verify_proof(&tree));
            assert!(oracle_accepts(&tree));
            for _ in 0..5 {
                let m = mutate(&mut rng, &tree);
                assert_eq!(verify_proof(&m), oracle_accepts(&m), "{:?}", m.rule);
            }
        }
    }
}

#[test]
fn search_is_deterministic_and_ignores_annotations() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let (g, t) = random_provable(&mut rng);
        assert_eq!(prove(&g).unwrap(), t);
        let bare = prove(&g.skeleton()).unwrap();
        assert_eq!(bare.rules(), t.rules());
        assert_eq!(bare.node_count(), t.node_count());
    }
}

#[test]
fn measure_never_increases() {
    for s in PROVABLE {
        let _ = prove(&f(s));
    }
    let (checks, violations) = termination_stats();
    assert!(checks > 0);
    assert_eq!(violations, 0);
}
