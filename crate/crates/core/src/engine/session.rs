use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;

use super::{EngineError, GameDef, Labmove, Move, Player, Registry, Run};
use crate::formula::{AgentId, Annotation, Atom, Formula, OccurrenceKind, Polarity, SpecString};
use crate::prover::{verify_proof, ProofTree, RuleTag};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Running,
    Quiescent,
    Finished(Player),
}

/// A machine move together with the agent it concerns. `wrapper` is the spec of
/// the env wrapper enclosing the move's occurrence (empty when there is none).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outgoing {
    pub to: Option<AgentId>,
    pub wrapper: SpecString,
    pub labmove: Labmove,
}

/// Final state of one surface atom game. `run` and `winner` are from the
/// game's own side (`Machine` = provider).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameRecord {
    pub spec: SpecString,
    pub game: String,
    pub polarity: Polarity,
    pub hybrid: bool,
    pub counterpart: Option<AgentId>,
    /// Environment moves here came from a heuristic played on the environment's behalf.
    pub stand_in: bool,
    pub run: Run,
    pub complete: bool,
    pub winner: Player,
}

#[derive(Clone, Debug)]
struct Site {
    spec: SpecString,
    polarity: Polarity,
    atom: Atom,
    env: Option<AgentId>,
}

impl Site {
    fn local_env(&self) -> bool {
        self.env.as_ref().is_none_or(AgentId::is_god)
    }

    /// The game-side player the machine acts as at this occurrence.
    fn machine_role(&self) -> Player {
        match self.polarity {
            Polarity::Positive => Player::Machine,
            Polarity::Negative => Player::Environment,
        }
    }
}

/// Execution of one hybridized proof: the current formula `E` (always the
/// conclusion of the current proof node) and the position `Ω`.
#[derive(Debug)]
pub struct Session {
    owner: AgentId,
    root: ProofTree,
    node_path: Vec<usize>,
    omega: Run,
    registry: Arc<Registry>,
    inbox: VecDeque<Labmove>,
    script_pos: BTreeMap<SpecString, usize>,
    stand_in: BTreeSet<SpecString>,
    status: Status,
}

impl Session {
    pub fn new(
        tree: ProofTree,
        registry: Arc<Registry>,
        owner: AgentId,
    ) -> Result<Session, EngineError> {
        if !verify_proof(&tree) {
            return Err(EngineError::InvalidProof);
        }
        let f = &tree.conclusion;
        if let Some(g) = f
            .game_names()
            .into_iter()
            .find(|g| !registry.games.contains_key(g))
        {
            return Err(EngineError::MissingGame(g));
        }
        for a in f.annotations() {
            match a {
                Annotation::Heuristic(h) if !registry.heuristics.contains_key(&h) => {
                    return Err(EngineError::MissingHeuristic(h))
                }
                Annotation::Script(s) if !registry.scripts.contains_key(&s) => {
                    return Err(EngineError::MissingScript(s))
                }
                _ => {}
            }
        }
        Ok(Session {
            owner,
            root: tree,
            node_path: Vec::new(),
            omega: Run::new(),
            registry,
            inbox: VecDeque::new(),
            script_pos: BTreeMap::new(),
            stand_in: BTreeSet::new(),
            status: Status::Running,
        })
    }

    pub fn owner(&self) -> &AgentId {
        &self.owner
    }

    /// Agents named by env annotations of the root formula.
    pub fn agents_to_activate(&self) -> Vec<AgentId> {
        self.root.conclusion.agents()
    }

    /// Number of surface general/hybrid atom occurrences in the root formula.
    pub fn bound_occurrences(&self) -> usize {
        Self::sites_of(&self.root.conclusion).len()
    }

    pub fn node(&self) -> &ProofTree {
        self.node_path
            .iter()
            .fold(&self.root, |t, &i| &t.premises[i])
    }

    /// The current formula `E`.
    pub fn formula(&self) -> &Formula {
        &self.node().conclusion
    }

    pub fn omega(&self) -> &Run {
        &self.omega
    }

    pub fn status(&self) -> Status {
        self.status
    }

    /// Queues a move received from a peer; it is consumed by the next pump.
    pub fn deliver(&mut self, lm: Labmove) {
        if !matches!(self.status, Status::Finished(_)) {
            self.status = Status::Running;
        }
        self.inbox.push_back(lm);
    }

    fn game(&self, name: &str) -> &Arc<dyn GameDef> {
        &self.registry.games[name]
    }

    fn sites_of(f: &Formula) -> Vec<Site> {
        let mut occs: Vec<_> = f
            .surface_occurrences(OccurrenceKind::GeneralAtom)
            .into_iter()
            .chain(f.surface_occurrences(OccurrenceKind::HybridAtom))
            .collect();
        occs.sort_by(|a, b| a.path.cmp(&b.path));
        occs.into_iter()
            .map(|o| {
                let atom = match f.subformula(&o.path) {
                    Some(Formula::Atom(a)) => a.clone(),
                    _ => unreachable!(),
                };
                Site {
                    spec: o.spec,
                    polarity: o.polarity,
                    atom,
                    env: o.env,
                }
            })
            .collect()
    }

    fn sites(&self) -> Vec<Site> {
        Self::sites_of(self.formula())
    }

    /// The atom game's run at `site`, from the game's own side.
    fn view(&self, site: &Site) -> Run {
        let run = self.omega.subrun(&site.spec).atom_moves();
        match site.polarity {
            Polarity::Positive => run,
            Polarity::Negative => run.flipped(),
        }
    }

    fn legal_for(&self, site: &Site, game_player: Player, m: &Move) -> bool {
        let game = self.game(site.atom.game_name().unwrap());
        game.legal(
            &self.view(site),
            &Labmove::new(game_player, SpecString::empty(), m.clone()),
        )
    }

    fn script_front(&self, spec: &SpecString, name: &str) -> Option<Move> {
        let pos = self.script_pos.get(spec).copied().unwrap_or(0);
        self.registry.scripts[name].get(pos).cloned()
    }

    fn advance_script(&mut self, spec: &SpecString) {
        *self.script_pos.entry(spec.clone()).or_insert(0) += 1;
    }

    /// Appends `⊤ spec payload` to Ω and addresses it by the enclosing env wrapper in `E`.
    fn emit(&mut self, spec: SpecString, payload: Move) -> Outgoing {
        let f = self.formula();
        let (to, wrapper) = match f.resolve_spec(&spec).ok().and_then(|p| f.enclosing_env(&p)) {
            Some((wpath, agent)) => (
                Some(agent.clone()),
                f.specification(&wpath).unwrap_or_default(),
            ),
            None => (None, SpecString::empty()),
        };
        let labmove = Labmove::new(Player::Machine, spec, payload);
        self.omega.push(labmove.clone());
        Outgoing {
            to,
            wrapper,
            labmove,
        }
    }

    /// Mainloop: plays B and C° nodes until an A node is reached, then makes
    /// any moves the machine's own heuristics and scripts call for.
    pub fn machine_turn(&mut self) -> Vec<Outgoing> {
        let mut out = Vec::new();
        if matches!(self.status, Status::Finished(_)) {
            return out;
        }
        loop {
            match self.node().rule.clone() {
                RuleTag::B { spec, branch, .. } => {
                    let m = Move::new(branch.to_string()).expect("branch number");
                    out.push(self.emit(spec, m));
                    self.node_path.push(0);
                }
                RuleTag::C { pos, neg, .. } => {
                    let env_payloads = |spec: &SpecString| -> Vec<Move> {
                        self.omega
                            .subrun(spec)
                            .atom_moves()
                            .iter()
                            .filter(|lm| lm.player == Player::Environment)
                            .map(|lm| lm.payload.clone())
                            .collect()
                    };
                    let (from_pos, from_neg) = (env_payloads(&pos), env_payloads(&neg));
                    for m in from_neg {
                        out.push(self.emit(pos.clone(), m));
                    }
                    for m in from_pos {
                        out.push(self.emit(neg.clone(), m));
                    }
                    self.node_path.push(0);
                }
                RuleTag::A => break,
            }
        }
        out.extend(self.sweep());
        out
    }

    /// Moves from the machine's own strategies at unpaired general atoms:
    /// heuristics at positive occurrences, scripts at negative ones.
    fn sweep(&mut self) -> Vec<Outgoing> {
        let mut out = Vec::new();
        loop {
            let mut moved = false;
            for site in self.sites() {
                let Atom::General { name, annotation } = &site.atom else {
                    continue;
                };
                let view = self.view(&site);
                let (candidate, scripted) = match (site.polarity, annotation) {
                    (Polarity::Positive, Annotation::Heuristic(h)) => {
                        (self.registry.heuristics[h].next_move(&view), false)
                    }
                    (Polarity::Positive, Annotation::None) => (
                        self.game(name)
                            .default_heuristic()
                            .and_then(|h| h.next_move(&view)),
                        false,
                    ),
                    (Polarity::Negative, Annotation::Script(s)) => {
                        (self.script_front(&site.spec, s), true)
                    }
                    _ => (None, false),
                };
                let Some(m) = candidate else { continue };
                let legal = self.legal_for(&site, site.machine_role(), &m);
                if scripted {
                    self.advance_script(&site.spec);
                    moved = true;
                }
                if legal {
                    out.push(self.emit(site.spec.clone(), m));
                    moved = true;
                }
            }
            if !moved {
                return out;
            }
        }
    }

    /// Innerloop: handles one environment move at the current A node.
    /// Moves matching none of the subcases are ignored.
    pub fn env_move(&mut self, lm: Labmove) -> Vec<Outgoing> {
        if matches!(self.status, Status::Finished(_)) || lm.player != Player::Environment {
            return Vec::new();
        }
        self.status = Status::Running;
        if let Some(branch) = lm.payload.branch() {
            return self.env_choice(lm, branch);
        }
        let Some(site) = self.sites().into_iter().find(|s| s.spec == lm.spec) else {
            return Vec::new();
        };
        if !self.legal_for(&site, site.machine_role().opponent(), &lm.payload) {
            return Vec::new();
        }
        self.omega.push(lm.clone());
        let mut out = Vec::new();
        if let Atom::Hybrid { .. } = &site.atom {
            let twin = self.sites().into_iter().find(|s| {
                s.atom.game_name() == site.atom.game_name()
                    && same_hybrid(&s.atom, &site.atom)
                    && s.spec != site.spec
            });
            if let Some(twin) = twin {
                out.push(self.emit(twin.spec, lm.payload.clone()));
            }
        }
        out.extend(self.sweep());
        out
    }

    fn env_choice(&mut self, lm: Labmove, branch: usize) -> Vec<Outgoing> {
        let node = self.node();
        if node.rule != RuleTag::A {
            return Vec::new();
        }
        let Some(k) = node.a_premise(&lm.spec, branch) else {
            return Vec::new();
        };
        self.omega.push(lm);
        self.node_path.push(k);
        self.machine_turn()
    }

    /// Next environment move: peer deliveries first, then scripts bound at
    /// environment-side occurrences, then heuristics played on behalf of a local
    /// (God or unannotated) environment. `None` marks the session quiescent.
    pub fn pump_environment(&mut self) -> Option<Labmove> {
        if matches!(self.status, Status::Finished(_)) {
            return None;
        }
        if let Some(lm) = self.inbox.pop_front() {
            return Some(lm);
        }
        let sites = self.sites();
        for site in sites
            .iter()
            .filter(|s| s.local_env() && s.polarity == Polarity::Positive)
        {
            let Some(Annotation::Script(name)) = site.atom.annotation() else {
                continue;
            };
            while let Some(m) = self.script_front(&site.spec, name) {
                self.advance_script(&site.spec);
                if self.legal_for(site, Player::Environment, &m) {
                    return Some(Labmove::new(Player::Environment, site.spec.clone(), m));
                }
            }
        }
        for site in sites
            .iter()
            .filter(|s| s.local_env() && s.polarity == Polarity::Negative)
        {
            let Some(Annotation::Heuristic(h)) = site.atom.annotation() else {
                continue;
            };
            if let Some(m) = self.registry.heuristics[h].next_move(&self.view(site)) {
                if self.legal_for(site, Player::Machine, &m) {
                    self.stand_in.insert(site.spec.clone());
                    return Some(Labmove::new(Player::Environment, site.spec.clone(), m));
                }
            }
        }
        self.status = Status::Quiescent;
        None
    }

    /// True once no surface choice is left open and every surface atom game is complete.
    pub fn is_complete(&self) -> bool {
        let f = self.formula();
        f.surface_occurrences(OccurrenceKind::ChoiceOp).is_empty()
            && self.sites().iter().all(|s| {
                self.game(s.atom.game_name().unwrap())
                    .is_complete(&self.view(s))
            })
    }

    /// Winner of the current position; requires quiescence.
    pub fn evaluate_winner(&mut self) -> Result<Player, EngineError> {
        match self.status {
            Status::Finished(w) => Ok(w),
            Status::Quiescent => Ok(self.finish()),
            Status::Running => Err(EngineError::NotQuiescent),
        }
    }

    /// Ends the session now and returns the winner of the current position.
    pub fn finish(&mut self) -> Player {
        if let Status::Finished(w) = self.status {
            return w;
        }
        let w = self.winner_now();
        self.status = Status::Finished(w);
        w
    }

    /// Winner of the current position without changing the status.
    pub fn winner_now(&self) -> Player {
        position_winner(&self.registry, self.formula(), &self.omega)
    }

    /// One record per surface atom occurrence of the current formula.
    pub fn records(&self) -> Vec<GameRecord> {
        self.sites()
            .into_iter()
            .map(|s| {
                let game = self.game(s.atom.game_name().unwrap());
                let run = self.view(&s);
                GameRecord {
                    game: s.atom.game_name().unwrap().to_string(),
                    polarity: s.polarity,
                    hybrid: matches!(s.atom, Atom::Hybrid { .. }),
                    counterpart: s.env.clone(),
                    stand_in: self.stand_in.contains(&s.spec),
                    complete: game.is_complete(&run),
                    winner: game.winner(&run),
                    run,
                    spec: s.spec,
                }
            })
            .collect()
    }

    /// Path of the current node from the root, as premise indexes.
    pub fn node_path(&self) -> &[usize] {
        &self.node_path
    }
}

fn same_hybrid(a: &Atom, b: &Atom) -> bool {
    match (a, b) {
        (
            Atom::Hybrid {
                general: g1,
                elementary: e1,
                ..
            },
            Atom::Hybrid {
                general: g2,
                elementary: e2,
                ..
            },
        ) => g1 == g2 && e1 == e2,
        _ => false,
    }
}

/// Winner of formula `f` on run `run`: atom games decide atoms, elementary
/// atoms follow the interpretation (default false), an open `&` goes to the
/// machine and an open `|` to the environment.
pub fn position_winner(reg: &Registry, f: &Formula, run: &Run) -> Player {
    let sub = |i| run.subrun(&SpecString::from_components(vec![i]));
    let of = |b: bool| {
        if b {
            Player::Machine
        } else {
            Player::Environment
        }
    };
    match f {
        Formula::True => Player::Machine,
        Formula::False => Player::Environment,
        Formula::Atom(Atom::Elementary(n)) => {
            of(reg.interpretation.get(n).copied().unwrap_or(false))
        }
        Formula::Atom(a) => reg.games[a.game_name().unwrap()].winner(&run.atom_moves()),
        Formula::Not(g) => position_winner(reg, g, &run.flipped()).opponent(),
        Formula::Env(g, _) => position_winner(reg, g, run),
        Formula::And(a, b) => of(position_winner(reg, a, &sub(1)) == Player::Machine
            && position_winner(reg, b, &sub(2)) == Player::Machine),
        Formula::Or(a, b) => of(position_winner(reg, a, &sub(1)) == Player::Machine
            || position_winner(reg, b, &sub(2)) == Player::Machine),
        Formula::Implies(a, b) => of(position_winner(reg, a, &sub(1).flipped())
            == Player::Environment
            || position_winner(reg, b, &sub(2)) == Player::Machine),
        Formula::Chand(_) => Player::Machine,
        Formula::Chor(_) => Player::Environment,
    }
}
