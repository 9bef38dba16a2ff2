//! Node-local re-statement of the three rules, used to judge mutated proofs.

use rand::seq::SliceRandom;
use rand::Rng;

use clbk::classical::is_valid_by_truth_table;
use clbk::formula::{Annotation, Atom, Formula, OccurrenceKind, Path, Polarity, SpecString};
use clbk::prover::{ProofTree, RuleTag};

/// Environment-choice occurrences (positive `&`, negative `|`) in surface order,
/// one entry per branch.
fn env_choices(f: &Formula) -> Vec<(SpecString, usize, Formula)> {
    let mut out = Vec::new();
    for occ in f.surface_occurrences(OccurrenceKind::ChoiceOp) {
        let (branches, env_side) = match f.subformula(&occ.path) {
            Some(Formula::Chand(gs)) => (gs, occ.polarity == Polarity::Positive),
            Some(Formula::Chor(gs)) => (gs, occ.polarity == Polarity::Negative),
            _ => continue,
        };
        if env_side {
            for (i, g) in branches.iter().enumerate() {
                out.push((
                    occ.spec.clone(),
                    i + 1,
                    f.substitute_at(&occ.path, g.clone()).unwrap(),
                ));
            }
        }
    }
    out
}

fn rule_a(t: &ProofTree) -> bool {
    let f = &t.conclusion;
    let expected = env_choices(f);
    is_valid_by_truth_table(&f.elementarize()) == Ok(true)
        && expected.len() == t.premises.len()
        && expected.len() == t.premise_index.len()
        && expected
            .iter()
            .zip(&t.premises)
            .zip(&t.premise_index)
            .all(|(((s, b, g), p), (s2, b2))| s == s2 && b == b2 && *g == p.conclusion)
}

fn rule_b(t: &ProofTree, spec: &SpecString, branch: usize, env: Option<&str>) -> bool {
    let f = &t.conclusion;
    let Ok(path) = f.resolve_spec(spec) else {
        return false;
    };
    let Ok(pol) = f.polarity(&path) else {
        return false;
    };
    let branches = match f.subformula(&path) {
        Some(Formula::Chand(gs)) if pol == Polarity::Negative => gs,
        Some(Formula::Chor(gs)) if pol == Polarity::Positive => gs,
        _ => return false,
    };
    let actual_env = f.enclosing_env(&path).map(|(_, a)| a.as_str().to_string());
    t.premises.len() == 1
        && t.premise_index.is_empty()
        && (1..=branches.len()).contains(&branch)
        && actual_env.as_deref() == env
        && f.substitute_at(&path, branches[branch - 1].clone())
            .as_ref()
            == Ok(&t.premises[0].conclusion)
}

fn general_at(f: &Formula, p: &Path) -> Option<(String, Annotation)> {
    match f.subformula(p)? {
        Formula::Atom(Atom::General { name, annotation }) => {
            Some((name.clone(), annotation.clone()))
        }
        _ => None,
    }
}

fn rule_c(t: &ProofTree, pos: &SpecString, neg: &SpecString, fresh: &str) -> bool {
    let f = &t.conclusion;
    let (Ok(pp), Ok(np)) = (f.resolve_spec(pos), f.resolve_spec(neg)) else {
        return false;
    };
    let (Some((g1, a1)), Some((g2, a2))) = (general_at(f, &pp), general_at(f, &np)) else {
        return false;
    };
    if t.premises.len() != 1
        || !t.premise_index.is_empty()
        || g1 != g2
        || f.polarity(&pp) != Ok(Polarity::Positive)
        || f.polarity(&np) != Ok(Polarity::Negative)
        || f.elementary_names().contains(fresh)
    {
        return false;
    }
    let premise = &t.premises[0].conclusion;
    let e = Formula::elementary(fresh);
    let h = |a: Annotation| {
        Formula::Atom(Atom::Hybrid {
            general: g1.clone(),
            elementary: fresh.to_string(),
            annotation: a,
        })
    };
    let plain = f
        .substitute_at(&pp, e.clone())
        .unwrap()
        .substitute_at(&np, e)
        .unwrap();
    let hybrid = f
        .substitute_at(&pp, h(a1))
        .unwrap()
        .substitute_at(&np, h(a2))
        .unwrap();
    *premise == plain || *premise == hybrid
}

/// Whether every node is a correct rule application with a decreasing measure.
pub fn oracle_accepts(t: &ProofTree) -> bool {
    let local = match &t.rule {
        RuleTag::A => rule_a(t),
        RuleTag::B { spec, branch, env } => {
            rule_b(t, spec, *branch, env.as_ref().map(|a| a.as_str()))
        }
        RuleTag::C { pos, neg, fresh } => rule_c(t, pos, neg, fresh),
    };
    local
        && t.premises
            .iter()
            .all(|p| p.conclusion.measure() < t.conclusion.measure())
        && t.premises.iter().all(oracle_accepts)
}

fn node_count(t: &ProofTree) -> usize {
    1 + t.premises.iter().map(node_count).sum::<usize>()
}

fn node_mut(t: &mut ProofTree, mut k: usize) -> &mut ProofTree {
    if k == 0 {
        return t;
    }
    k -= 1;
    for p in t.premises.iter_mut() {
        let n = node_count(p);
        if k < n {
            return node_mut(p, k);
        }
        k -= n;
    }
    unreachable!()
}

fn random_spec<R: Rng>(rng: &mut R, f: &Formula) -> SpecString {
    let mut specs: Vec<SpecString> = f.surface_nodes().into_iter().map(|(_, s)| s).collect();
    specs.push(SpecString::from_components(vec![9]));
    specs.push(SpecString::empty());
    specs.choose(rng).unwrap().clone()
}

fn random_fresh<R: Rng>(rng: &mut R, f: &Formula) -> String {
    let mut names: Vec<String> = ["p", "q", "r", "s", "t", "u"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    names.extend(f.elementary_names());
    names.choose(rng).unwrap().clone()
}

/// Changes one field of one rule tag (or premise-index entry) at random.
/// The result always differs from `t`.
pub fn mutate<R: Rng>(rng: &mut R, t: &ProofTree) -> ProofTree {
    loop {
        let mut m = t.clone();
        let k = rng.gen_range(0..node_count(t));
        let node = node_mut(&mut m, k);
        let f = node.conclusion.clone();
        match &mut node.rule {
            RuleTag::A => {
                if node.premise_index.is_empty() || rng.gen_bool(0.2) {
                    node.rule = RuleTag::B {
                        spec: random_spec(rng, &f),
                        branch: rng.gen_range(1..=2),
                        env: None,
                    };
                } else {
                    let i = rng.gen_range(0..node.premise_index.len());
                    if rng.gen_bool(0.5) {
                        node.premise_index[i].0 = random_spec(rng, &f);
                    } else {
                        node.premise_index[i].1 = rng.gen_range(0..=4);
                    }
                }
            }
            RuleTag::B { spec, branch, env } => match rng.gen_range(0..4) {
                0 => *spec = random_spec(rng, &f),
                1 => *branch = rng.gen_range(0..=4),
                2 => {
                    *env = match env {
                        Some(_) => None,
                        None => Some(clbk::formula::AgentId::new("w").unwrap()),
                    }
                }
                _ => node.rule = RuleTag::A,
            },
            RuleTag::C { pos, neg, fresh } => match rng.gen_range(0..4) {
                0 => *pos = random_spec(rng, &f),
                1 => *neg = random_spec(rng, &f),
                2 => *fresh = random_fresh(rng, &f),
                _ => std::mem::swap(pos, neg),
            },
        }
        if m != *t {
            return m;
        }
    }
}
