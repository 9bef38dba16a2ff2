//! Agents with resource bases and query queues, connected by an in-process bus.
//!
//! An agent serves its queries one at a time: for query `Q` it proves
//! `RB -> Q` (the resource base conjoined left to right), executes the
//! hybridized proof as a session, and afterwards keeps whatever part of the
//! resource base was not used up.

mod bus;
mod scenario;
mod sim;

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use crate::engine::{GameRecord, Registry, Run, Session};
use crate::formula::{AgentId, Atom, Formula, OccurrenceKind, Polarity, SpecString};

pub use bus::Bus;
pub use scenario::{parse_scenario, ScenarioError};
pub use sim::{run_simulation, AgentReport, SimError, Simulation, SimulationReport, TraceLine};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AgentKind {
    Provider,
    Consumer,
    Regular,
}

/// One resource, with the position reached in it so far.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RbEntry {
    pub formula: Formula,
    pub position: Run,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ResourceBase {
    entries: Vec<RbEntry>,
}

impl ResourceBase {
    pub fn push(&mut self, f: Formula) {
        self.entries.push(RbEntry {
            formula: f,
            position: Run::new(),
        });
    }

    pub fn entries(&self) -> &[RbEntry] {
        &self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, RbEntry> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn formulas(&self) -> Vec<Formula> {
        self.entries.iter().map(|e| e.formula.clone()).collect()
    }

    /// `RB -> q`, or `q` itself when the base is empty.
    pub fn goal(&self, q: &Formula) -> Formula {
        match Formula::conjoin(self.formulas()) {
            Some(ante) => Formula::implies(ante, q.clone()),
            None => q.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Won,
    Lost,
    /// `RB -> Q` has no proof; the resource base is left as it was.
    Rejected,
    /// Ended at global quiescence with some game or choice still open.
    Incomplete,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Won => "won",
            Outcome::Lost => "lost",
            Outcome::Rejected => "rejected",
            Outcome::Incomplete => "incomplete",
        })
    }
}

#[derive(Clone, Debug)]
pub struct SessionOutcome {
    pub query: Formula,
    pub outcome: Outcome,
    pub records: Vec<GameRecord>,
}

/// Completed atom games of an agent, by game name. Games at negative
/// occurrences were received from a counterpart; positive ones were paid out.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Ledger {
    pub received: BTreeMap<String, usize>,
    pub paid: BTreeMap<String, usize>,
}

impl Ledger {
    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a GameRecord>) -> Ledger {
        let mut l = Ledger::default();
        for r in records.into_iter().filter(|r| r.complete) {
            let side = match r.polarity {
                Polarity::Negative => &mut l.received,
                Polarity::Positive => &mut l.paid,
            };
            *side.entry(r.game.clone()).or_insert(0) += 1;
        }
        l
    }

    pub fn received(&self, game: &str) -> usize {
        self.received.get(game).copied().unwrap_or(0)
    }

    pub fn paid(&self, game: &str) -> usize {
        self.paid.get(game).copied().unwrap_or(0)
    }
}

#[derive(Debug)]
pub struct Agent {
    pub id: AgentId,
    pub kind: AgentKind,
    pub rb: ResourceBase,
    pub queue: VecDeque<Formula>,
    pub outcomes: Vec<SessionOutcome>,
    registry: Arc<Registry>,
    session: Option<Session>,
}

impl Agent {
    pub fn new(id: AgentId, kind: AgentKind, registry: Registry) -> Agent {
        Agent {
            id,
            kind,
            rb: ResourceBase::default(),
            queue: VecDeque::new(),
            outcomes: Vec::new(),
            registry: Arc::new(registry),
            session: None,
        }
    }

    pub fn submit_query(&mut self, q: Formula) {
        self.queue.push_back(q);
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn registry_mut(&mut self) -> &mut Registry {
        Arc::make_mut(&mut self.registry)
    }

    pub fn session(&self) -> Option<&Session> {
        self.session.as_ref()
    }

    pub fn ledger(&self) -> Ledger {
        Ledger::from_records(self.outcomes.iter().flat_map(|o| &o.records))
    }
}

/// The resource base left after a session over `RB -> Q` with `rb_len` entries:
/// the antecedent of the final formula split back into its entries, hybrid atoms
/// reverted to general atoms. Entries whose atom games all completed are used up
/// and dropped; the others keep their subrun as their position.
pub fn evolve_rb(
    rb_len: usize,
    final_formula: &Formula,
    omega: &Run,
    registry: &Registry,
) -> ResourceBase {
    let mut out = ResourceBase::default();
    let Formula::Implies(ante, _) = final_formula else {
        return out;
    };
    if rb_len == 0 {
        return out;
    }
    // peel the left-associated conjunction from the right
    let mut entries = Vec::with_capacity(rb_len);
    let mut cur: &Formula = ante;
    let mut spec = SpecString::from_components(vec![1]);
    for _ in 1..rb_len {
        match cur {
            Formula::And(rest, last) => {
                entries.push(((**last).clone(), spec.push(2)));
                spec = spec.push(1);
                cur = rest;
            }
            _ => break,
        }
    }
    entries.push((cur.clone(), spec));
    entries.reverse();

    let sites: Vec<_> = [OccurrenceKind::GeneralAtom, OccurrenceKind::HybridAtom]
        .into_iter()
        .flat_map(|k| final_formula.surface_occurrences(k))
        .collect();
    for (formula, spec) in entries {
        let mine: Vec<_> = sites
            .iter()
            .filter(|o| spec.is_prefix_of(&o.spec))
            .collect();
        let used_up = !mine.is_empty()
            && mine.iter().all(|o| {
                let name = match final_formula.subformula(&o.path) {
                    Some(Formula::Atom(a)) => a.game_name().unwrap_or_default().to_string(),
                    _ => return false,
                };
                registry
                    .games
                    .get(&name)
                    .is_some_and(|g| g.is_complete(&omega.subrun(&o.spec).atom_moves()))
            });
        if used_up {
            continue;
        }
        out.entries.push(RbEntry {
            formula: revert_hybrids(&formula),
            position: omega.subrun(&spec),
        });
    }
    out
}

/// Replaces every hybrid atom by its general atom, keeping the annotation.
pub fn revert_hybrids(f: &Formula) -> Formula {
    f.map_nodes(&|g| match g {
        Formula::Atom(Atom::Hybrid {
            general,
            annotation,
            ..
        }) => Some(Formula::Atom(Atom::General {
            name: general.clone(),
            annotation: annotation.clone(),
        })),
        _ => None,
    })
}
