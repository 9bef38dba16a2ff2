#![allow(dead_code)]

pub mod play;
pub mod proof_oracle;

use rand::seq::SliceRandom;
use rand::Rng;

use clbk::formula::{AgentId, Annotation, Atom, Formula};
use clbk::prover::{prove, ProofTree};

pub fn agent(s: &str) -> AgentId {
    AgentId::new(s).unwrap()
}

/// Random elementary formula over `p..s` and the constants.
pub fn random_elementary<R: Rng>(rng: &mut R, depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..10) {
            0 => Formula::True,
            1 => Formula::False,
            _ => Formula::elementary(*["p", "q", "r", "s"].choose(rng).unwrap()),
        };
    }
    let a = random_elementary(rng, depth - 1);
    match rng.gen_range(0..4) {
        0 => Formula::not(a),
        1 => Formula::and(a, random_elementary(rng, depth - 1)),
        2 => Formula::or(a, random_elementary(rng, depth - 1)),
        _ => Formula::implies(a, random_elementary(rng, depth - 1)),
    }
}

fn random_leaf<R: Rng>(rng: &mut R) -> Formula {
    match rng.gen_range(0..6) {
        0 | 1 => Formula::elementary(*["p", "q"].choose(rng).unwrap()),
        2 => Formula::Atom(Atom::General {
            name: "D".into(),
            annotation: Annotation::None,
        }),
        _ => Formula::general("C"),
    }
}

/// Random non-switching formula over `p, q, C, D` with choices, no env annotations.
pub fn random_game_formula<R: Rng>(rng: &mut R, depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.3) {
        return random_leaf(rng);
    }
    let mut sub = || random_game_formula(rng, depth - 1);
    let a = sub();
    let b = sub();
    match rng.gen_range(0..6) {
        0 => Formula::not(a),
        1 => Formula::and(a, b),
        2 => Formula::or(a, b),
        3 => Formula::implies(a, b),
        4 => Formula::Chand(vec![a, b]),
        _ => Formula::Chor(vec![a, b]),
    }
}

/// A formula with a proof: candidates of shapes that are often provable,
/// kept only when the prover finds a proof.
pub fn random_provable<R: Rng>(rng: &mut R) -> (Formula, ProofTree) {
    loop {
        let g = random_game_formula(rng, 2);
        let h = random_game_formula(rng, 2);
        let mut f = match rng.gen_range(0..7) {
            0 => Formula::implies(g.clone(), g),
            1 => Formula::implies(Formula::and(g.clone(), h), g),
            2 => Formula::implies(g.clone(), Formula::or(g, h)),
            3 => Formula::implies(Formula::Chand(vec![g.clone(), h]), g),
            4 => Formula::implies(g.clone(), Formula::Chor(vec![h, g])),
            5 => Formula::implies(Formula::not(Formula::not(g.clone())), g),
            _ => Formula::implies(g, h),
        };
        if rng.gen_bool(0.5) {
            f = Formula::env(f, agent("w"));
        }
        if let Ok(t) = prove(&f) {
            return (f, t);
        }
    }
}

fn random_annotation<R: Rng>(rng: &mut R) -> Annotation {
    match rng.gen_range(0..4) {
        0 => Annotation::Heuristic(format!("h{}", rng.gen_range(0..3))),
        1 => Annotation::Script(format!("s{}", rng.gen_range(0..3))),
        _ => Annotation::None,
    }
}

fn random_core<R: Rng>(rng: &mut R, depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.2) {
        return match rng.gen_range(0..8) {
            0 => Formula::True,
            1 => Formula::False,
            2 | 3 => Formula::elementary(*["p", "q", "r1"].choose(rng).unwrap()),
            4 => Formula::Atom(Atom::Hybrid {
                general: "C".into(),
                elementary: "q".into(),
                annotation: random_annotation(rng),
            }),
            _ => Formula::Atom(Atom::General {
                name: ["C", "D", "Tea"].choose(rng).unwrap().to_string(),
                annotation: random_annotation(rng),
            }),
        };
    }
    let mut sub = || random_core(rng, depth - 1);
    let (a, b, c) = (sub(), sub(), sub());
    match rng.gen_range(0..7) {
        0 => Formula::not(a),
        1 => Formula::and(a, b),
        2 => Formula::or(a, b),
        3 => Formula::implies(a, b),
        4 => Formula::Chand(vec![a, b]),
        5 => Formula::Chor(vec![a, b, c]),
        _ => Formula::Chor(vec![a, b]),
    }
}

/// Random non-switching formula of depth at most `depth`, using the whole syntax.
pub fn random_formula<R: Rng>(rng: &mut R, depth: usize) -> Formula {
    let agents = ["w", "*1", "God"];
    match rng.gen_range(0..4) {
        0 => Formula::env(
            random_core(rng, depth - 1),
            agent(agents.choose(rng).unwrap()),
        ),
        1 => Formula::implies(
            Formula::env(
                random_core(rng, depth - 2),
                agent(agents.choose(rng).unwrap()),
            ),
            Formula::env(
                random_core(rng, depth - 2),
                agent(agents.choose(rng).unwrap()),
            ),
        ),
        _ => random_core(rng, depth),
    }
}
