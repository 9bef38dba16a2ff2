//! Random environment play against a session, and the copy-cat check.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use clbk::engine::{Labmove, Move, Player, Registry, Session};
use clbk::formula::{AgentId, Atom, Formula, OccurrenceKind, SpecString};
use clbk::prover::{hybridize, ProofTree};

const PAYLOADS: &[&str] = &[
    "x=1", "x=3", "y=1", "y=2", "z=2", "z=4", "z=7", "v=1", "v=3", "r=2", "r=6", "x=0", "w=1",
];

fn random_env_move<R: Rng>(rng: &mut R, f: &Formula) -> Option<Labmove> {
    let mut targets: Vec<(SpecString, bool)> = Vec::new();
    for kind in [OccurrenceKind::GeneralAtom, OccurrenceKind::HybridAtom] {
        targets.extend(
            f.surface_occurrences(kind)
                .into_iter()
                .map(|o| (o.spec, false)),
        );
    }
    targets.extend(
        f.surface_occurrences(OccurrenceKind::ChoiceOp)
            .into_iter()
            .map(|o| (o.spec, true)),
    );
    let (spec, choice) = targets.choose(rng)?.clone();
    let payload = if choice {
        rng.gen_range(1..=3).to_string()
    } else {
        PAYLOADS.choose(rng).unwrap().to_string()
    };
    Some(Labmove::new(
        Player::Environment,
        spec,
        Move::new(payload).unwrap(),
    ))
}

/// Plays up to `moves` random environment moves, then drains the session to quiescence.
pub fn random_play<R: Rng>(rng: &mut R, tree: &ProofTree, moves: usize) -> Session {
    let me = AgentId::new("me").unwrap();
    let mut s = Session::new(hybridize(tree), Arc::new(Registry::builtin()), me).unwrap();
    s.machine_turn();
    for _ in 0..moves {
        let Some(lm) = random_env_move(rng, s.formula()) else {
            break;
        };
        s.env_move(lm);
    }
    while let Some(lm) = s.pump_environment() {
        s.env_move(lm);
    }
    s
}

/// Every hybrid pair's atom subruns are equal up to complementary labels.
pub fn copy_cat_holds(s: &Session) -> bool {
    let f = s.formula();
    let mut pairs: BTreeMap<(String, String), Vec<SpecString>> = BTreeMap::new();
    for occ in f.surface_occurrences(OccurrenceKind::HybridAtom) {
        if let Some(Formula::Atom(Atom::Hybrid {
            general,
            elementary,
            ..
        })) = f.subformula(&occ.path)
        {
            pairs
                .entry((general.clone(), elementary.clone()))
                .or_default()
                .push(occ.spec);
        }
    }
    pairs.values().all(|specs| {
        let run = |spec: &SpecString| s.omega().subrun(spec).atom_moves();
        specs.len() == 2 && run(&specs[0]).flipped() == run(&specs[1])
    })
}

/// Number of hybrid pairs with at least one move.
pub fn active_pairs(s: &Session) -> usize {
    let f = s.formula();
    f.surface_occurrences(OccurrenceKind::HybridAtom)
        .iter()
        .filter(|o| !s.omega().subrun(&o.spec).atom_moves().is_empty())
        .count()
        / 2
}
