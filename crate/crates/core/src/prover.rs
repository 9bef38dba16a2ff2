//! Proof search, proof checking and hybridization for the three-rule system.
//!
//! * Rule A: a stable conclusion, with one premise per branch of every positive
//!   surface `&` and negative surface `|`.
//! * Rule B: one branch chosen at a negative surface `&` or positive surface `|`.
//! * Rule C: a positive and a negative surface occurrence of the same general
//!   atom replaced by a fresh elementary atom. After [`hybridize`] the fresh
//!   atom `q` becomes the hybrid atom `P_q` in the premise and everything above it.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};

use crate::classical;
use crate::formula::{AgentId, Atom, Formula, OccurrenceKind, Path, Polarity, SpecString};

static MEASURE_CHECKS: AtomicUsize = AtomicUsize::new(0);
static MEASURE_VIOLATIONS: AtomicUsize = AtomicUsize::new(0);

/// Process-wide count of (rule applications checked, measure violations).
pub fn termination_stats() -> (usize, usize) {
    (
        MEASURE_CHECKS.load(Ordering::Relaxed),
        MEASURE_VIOLATIONS.load(Ordering::Relaxed),
    )
}

fn check_measure(conclusion: &Formula, premise: &Formula) {
    MEASURE_CHECKS.fetch_add(1, Ordering::Relaxed);
    if premise.measure() >= conclusion.measure() {
        MEASURE_VIOLATIONS.fetch_add(1, Ordering::Relaxed);
        debug_assert!(false, "measure did not decrease: {conclusion} => {premise}");
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RuleTag {
    A,
    B {
        spec: SpecString,
        branch: usize,
        env: Option<AgentId>,
    },
    /// Pairing of a positive and a negative general-atom occurrence under `fresh`.
    C {
        pos: SpecString,
        neg: SpecString,
        fresh: String,
    },
}

impl RuleTag {
    pub fn letter(&self) -> char {
        match self {
            RuleTag::A => 'A',
            RuleTag::B { .. } => 'B',
            RuleTag::C { .. } => 'C',
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofTree {
    pub conclusion: Formula,
    pub rule: RuleTag,
    pub premises: Vec<ProofTree>,
    /// For rule A: `(occurrence spec, branch)` of each premise, in premise order.
    pub premise_index: Vec<(SpecString, usize)>,
}

impl ProofTree {
    pub fn node_count(&self) -> usize {
        1 + self
            .premises
            .iter()
            .map(ProofTree::node_count)
            .sum::<usize>()
    }

    /// Rule letters in pre-order (root first).
    pub fn rules(&self) -> Vec<char> {
        let mut out = vec![self.rule.letter()];
        for p in &self.premises {
            out.extend(p.rules());
        }
        out
    }

    /// The A-premise chosen by branch `branch` at occurrence `spec`.
    pub fn a_premise(&self, spec: &SpecString, branch: usize) -> Option<usize> {
        self.premise_index
            .iter()
            .position(|(s, b)| s == spec && *b == branch)
    }

    /// Numbered listing, premises before conclusions:
    /// `<id> <formula> rule <A|B|C> <premise ids or 0>`.
    pub fn listing(&self) -> String {
        let mut lines = Vec::new();
        self.list_into(&mut lines);
        lines.join("\n")
    }

    fn list_into(&self, lines: &mut Vec<String>) -> usize {
        let ids: Vec<usize> = self.premises.iter().map(|p| p.list_into(lines)).collect();
        let id = lines.len() + 1;
        let refs = if ids.is_empty() {
            "0".to_string()
        } else {
            ids.iter()
                .map(usize::to_string)
                .collect::<Vec<_>>()
                .join(",")
        };
        lines.push(format!(
            "{id} {} rule {} {refs}",
            self.conclusion,
            self.rule.letter()
        ));
        id
    }
}

impl fmt::Display for ProofTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.listing())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unprovable: {0}")]
pub struct Unprovable(pub String);

/// Stable iff the elementarization is classically valid.
pub fn is_stable(f: &Formula) -> bool {
    classical::is_valid(&f.elementarize()).expect("elementarization is elementary")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChoicePremise {
    pub spec: SpecString,
    pub branch: usize,
    pub env: Option<AgentId>,
    pub formula: Formula,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairPremise {
    pub pos: SpecString,
    pub neg: SpecString,
    pub general: String,
    pub fresh: String,
    pub formula: Formula,
}

fn choice_premises(f: &Formula, for_rule_a: bool) -> Vec<ChoicePremise> {
    let mut out = Vec::new();
    for occ in f.surface_occurrences(OccurrenceKind::ChoiceOp) {
        let node = f.subformula(&occ.path).expect("occurrence resolves");
        let (is_and, branches) = match node {
            Formula::Chand(gs) => (true, gs),
            Formula::Chor(gs) => (false, gs),
            _ => unreachable!(),
        };
        // rule A takes positive & and negative |, rule B the other two
        let env_choice = is_and == (occ.polarity == Polarity::Positive);
        if env_choice != for_rule_a {
            continue;
        }
        for (i, g) in branches.iter().enumerate() {
            out.push(ChoicePremise {
                spec: occ.spec.clone(),
                branch: i + 1,
                env: occ.env.clone(),
                formula: f
                    .substitute_at(&occ.path, g.clone())
                    .expect("path resolves"),
            });
        }
    }
    out
}

/// One premise per branch of each positive surface `&` and negative surface `|`.
pub fn premises_a(f: &Formula) -> Vec<ChoicePremise> {
    choice_premises(f, true)
}

/// One candidate premise per branch of each negative surface `&` and positive surface `|`.
pub fn premises_b(f: &Formula) -> Vec<ChoicePremise> {
    choice_premises(f, false)
}

/// Fresh elementary names: p, q, ..., z, a, ..., o, then the same with numeric suffixes.
fn fresh_name(avoid: &BTreeSet<String>) -> String {
    let letters: Vec<char> = ('p'..='z').chain('a'..='o').collect();
    (0..)
        .flat_map(|round| {
            letters.iter().map(move |c| {
                if round == 0 {
                    c.to_string()
                } else {
                    format!("{c}{round}")
                }
            })
        })
        .find(|n| !avoid.contains(n))
        .unwrap()
}

/// Rule C candidates in search form, fresh atom avoiding the names of `f`.
pub fn premises_c(f: &Formula) -> Vec<PairPremise> {
    premises_c_avoiding(f, &BTreeSet::new())
}

/// Rule C candidates whose fresh atom avoids both `extra` and the names of `f`.
pub fn premises_c_avoiding(f: &Formula, extra: &BTreeSet<String>) -> Vec<PairPremise> {
    let mut avoid = f.elementary_names();
    avoid.extend(extra.iter().cloned());
    let fresh = fresh_name(&avoid);
    let occs = f.surface_occurrences(OccurrenceKind::GeneralAtom);
    let name_at = |p: &Path| match f.subformula(p) {
        Some(Formula::Atom(Atom::General { name, .. })) => name.clone(),
        _ => unreachable!(),
    };
    let mut out = Vec::new();
    for pos in occs.iter().filter(|o| o.polarity == Polarity::Positive) {
        let name = name_at(&pos.path);
        for neg in occs.iter().filter(|o| o.polarity == Polarity::Negative) {
            if name_at(&neg.path) != name {
                continue;
            }
            let atom = Formula::elementary(fresh.clone());
            let formula = f
                .substitute_at(&pos.path, atom.clone())
                .and_then(|g| g.substitute_at(&neg.path, atom))
                .expect("paths resolve");
            out.push(PairPremise {
                pos: pos.spec.clone(),
                neg: neg.spec.clone(),
                general: name.clone(),
                fresh: fresh.clone(),
                formula,
            });
        }
    }
    out
}

struct Search {
    root_names: BTreeSet<String>,
    failed: HashSet<Formula>,
}

impl Search {
    /// Memo key: agents and strategies erased, fresh atoms renamed by first appearance.
    fn key(&self, f: &Formula) -> Formula {
        let base = f.skeleton().strip_strategies();
        let mut order: BTreeMap<String, usize> = BTreeMap::new();
        fn number(f: &Formula, root: &BTreeSet<String>, order: &mut BTreeMap<String, usize>) {
            if let Formula::Atom(Atom::Elementary(n)) = f {
                if !root.contains(n) && !order.contains_key(n) {
                    let k = order.len();
                    order.insert(n.clone(), k);
                }
            }
            for c in f.children() {
                number(c, root, order);
            }
        }
        number(&base, &self.root_names, &mut order);
        base.map_nodes(&|g| match g {
            Formula::Atom(Atom::Elementary(n)) => order
                .get(n)
                .map(|k| Formula::Atom(Atom::general(format!("#{k}")))),
            _ => None,
        })
    }

    fn search(&mut self, f: &Formula) -> Option<ProofTree> {
        let key = self.key(f);
        if self.failed.contains(&key) {
            return None;
        }
        for p in premises_c_avoiding(f, &self.root_names) {
            check_measure(f, &p.formula);
            if let Some(t) = self.search(&p.formula) {
                return Some(ProofTree {
                    conclusion: f.clone(),
                    rule: RuleTag::C {
                        pos: p.pos,
                        neg: p.neg,
                        fresh: p.fresh,
                    },
                    premises: vec![t],
                    premise_index: vec![],
                });
            }
        }
        if is_stable(f) {
            let prem = premises_a(f);
            let mut subs = Vec::with_capacity(prem.len());
            for p in &prem {
                check_measure(f, &p.formula);
                match self.search(&p.formula) {
                    Some(t) => subs.push(t),
                    None => break,
                }
            }
            if subs.len() == prem.len() {
                return Some(ProofTree {
                    conclusion: f.clone(),
                    rule: RuleTag::A,
                    premises: subs,
                    premise_index: prem.into_iter().map(|p| (p.spec, p.branch)).collect(),
                });
            }
        }
        for p in premises_b(f) {
            check_measure(f, &p.formula);
            if let Some(t) = self.search(&p.formula) {
                return Some(ProofTree {
                    conclusion: f.clone(),
                    rule: RuleTag::B {
                        spec: p.spec,
                        branch: p.branch,
                        env: p.env,
                    },
                    premises: vec![t],
                    premise_index: vec![],
                });
            }
        }
        self.failed.insert(key);
        None
    }
}

/// Searches for a proof in a fixed order: C pairings left to right, then A when
/// stable, then B entries left to right.
/// The returned tree is in search form (fresh elementary atoms).
pub fn prove(f: &Formula) -> Result<ProofTree, Unprovable> {
    let mut s = Search {
        root_names: f.elementary_names(),
        failed: HashSet::new(),
    };
    s.search(f).ok_or_else(|| Unprovable(f.to_string()))
}

/// Replaces each fresh atom introduced by a C step with the hybrid atom over the
/// general atom it paired, in that premise and all of its descendants.
pub fn hybridize(t: &ProofTree) -> ProofTree {
    hybridize_with(t, &[])
}

fn hybridize_with(t: &ProofTree, reps: &[(Path, Atom)]) -> ProofTree {
    let mut conclusion = t.conclusion.clone();
    for (path, atom) in reps {
        let fresh = match atom {
            Atom::Hybrid { elementary, .. } => elementary,
            _ => unreachable!(),
        };
        if matches!(conclusion.subformula(path), Some(Formula::Atom(Atom::Elementary(n))) if n == fresh)
        {
            conclusion = conclusion
                .substitute_at(path, Formula::Atom(atom.clone()))
                .expect("path resolves");
        }
    }
    let mut inner = reps.to_vec();
    if let RuleTag::C { pos, neg, fresh } = &t.rule {
        for spec in [pos, neg] {
            let path = conclusion.resolve_spec(spec).expect("C spec resolves");
            if let Some(Formula::Atom(Atom::General { name, annotation })) =
                conclusion.subformula(&path)
            {
                inner.push((
                    path,
                    Atom::Hybrid {
                        general: name.clone(),
                        elementary: fresh.clone(),
                        annotation: annotation.clone(),
                    },
                ));
            }
        }
    }
    ProofTree {
        conclusion,
        rule: t.rule.clone(),
        premises: t
            .premises
            .iter()
            .map(|p| hybridize_with(p, &inner))
            .collect(),
        premise_index: t.premise_index.clone(),
    }
}

/// Checks every node against its rule's side conditions. Accepts search-form
/// and hybridized trees.
pub fn verify_proof(t: &ProofTree) -> bool {
    let f = &t.conclusion;
    let node_ok = match &t.rule {
        RuleTag::A => {
            let prem = premises_a(f);
            is_stable(f)
                && prem.len() == t.premises.len()
                && prem.len() == t.premise_index.len()
                && prem.iter().zip(&t.premises).zip(&t.premise_index).all(
                    |((p, sub), (spec, branch))| {
                        p.spec == *spec && p.branch == *branch && p.formula == sub.conclusion
                    },
                )
        }
        RuleTag::B { spec, branch, env } => {
            t.premises.len() == 1
                && t.premise_index.is_empty()
                && premises_b(f).iter().any(|p| {
                    p.spec == *spec
                        && p.branch == *branch
                        && p.env == *env
                        && p.formula == t.premises[0].conclusion
                })
        }
        RuleTag::C { pos, neg, fresh } => {
            t.premises.len() == 1
                && t.premise_index.is_empty()
                && verify_pair(f, pos, neg, fresh, &t.premises[0].conclusion)
        }
    };
    node_ok
        && t.premises
            .iter()
            .all(|p| p.conclusion.measure() < f.measure())
        && t.premises.iter().all(verify_proof)
}

fn verify_pair(
    f: &Formula,
    pos: &SpecString,
    neg: &SpecString,
    fresh: &str,
    premise: &Formula,
) -> bool {
    let (Ok(pp), Ok(np)) = (f.resolve_spec(pos), f.resolve_spec(neg)) else {
        return false;
    };
    let general_at = |p: &Path| match f.subformula(p) {
        Some(Formula::Atom(Atom::General { name, annotation })) => {
            Some((name.clone(), annotation.clone()))
        }
        _ => None,
    };
    let (Some((pn, pa)), Some((nn, na))) = (general_at(&pp), general_at(&np)) else {
        return false;
    };
    if pn != nn
        || f.polarity(&pp) != Ok(Polarity::Positive)
        || f.polarity(&np) != Ok(Polarity::Negative)
        || f.elementary_names().contains(fresh)
    {
        return false;
    }
    let atom = Formula::elementary(fresh);
    let search_form = f
        .substitute_at(&pp, atom.clone())
        .and_then(|g| g.substitute_at(&np, atom));
    let hybrid = |ann| {
        Formula::Atom(Atom::Hybrid {
            general: pn.clone(),
            elementary: fresh.to_string(),
            annotation: ann,
        })
    };
    let hybrid_form = f
        .substitute_at(&pp, hybrid(pa))
        .and_then(|g| g.substitute_at(&np, hybrid(na)));
    search_form.as_ref() == Ok(premise) || hybrid_form.as_ref() == Ok(premise)
}
