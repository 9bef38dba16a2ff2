use std::fmt;

use super::{evolve_rb, Agent, Bus, Ledger, Outcome, SessionOutcome};
use crate::engine::{EngineError, Labmove, Outgoing, Player, Session};
use crate::formula::{AgentId, Formula};
use crate::prover::{hybridize, prove};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("agent `{from}` addressed unknown agent `{to}`")]
    UnknownAgent { from: AgentId, to: AgentId },
    #[error("agent `{agent}`: {source}")]
    Engine { agent: AgentId, source: EngineError },
}

/// `<seq> <agent> <T|B> <spec><payload>`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceLine {
    pub seq: usize,
    pub agent: AgentId,
    pub labmove: Labmove,
}

impl fmt::Display for TraceLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lm = &self.labmove;
        write!(
            f,
            "{} {} {} {}{}",
            self.seq, self.agent, lm.player, lm.spec, lm.payload
        )
    }
}

#[derive(Clone, Debug)]
pub struct AgentReport {
    pub id: AgentId,
    pub outcomes: Vec<SessionOutcome>,
    pub rb: Vec<Formula>,
    pub ledger: Ledger,
}

impl AgentReport {
    pub fn won(&self) -> usize {
        self.outcomes
            .iter()
            .filter(|o| o.outcome == Outcome::Won)
            .count()
    }
}

#[derive(Clone, Debug)]
pub struct SimulationReport {
    pub steps: usize,
    /// The step budget ran out while work remained.
    pub exhausted: bool,
    pub agents: Vec<AgentReport>,
    pub trace: Vec<TraceLine>,
    /// Messages still on the bus at the end.
    pub undelivered: usize,
}

impl SimulationReport {
    /// `u: 1/1 won; o: 1/1 won; ...` in registration order.
    pub fn summary(&self) -> String {
        self.agents
            .iter()
            .map(|a| format!("{}: {}/{} won", a.id, a.won(), a.outcomes.len()))
            .collect::<Vec<_>>()
            .join("; ")
    }

    pub fn all_won(&self) -> bool {
        !self.exhausted
            && self
                .agents
                .iter()
                .all(|a| a.outcomes.iter().all(|o| o.outcome == Outcome::Won))
    }

    pub fn agent(&self, id: &str) -> Option<&AgentReport> {
        self.agents.iter().find(|a| a.id.as_str() == id)
    }

    pub fn trace_text(&self) -> String {
        self.trace.iter().map(|l| format!("{l}\n")).collect()
    }

    /// Trace lines of one agent.
    pub fn agent_trace(&self, id: &AgentId) -> String {
        self.trace
            .iter()
            .filter(|l| &l.agent == id)
            .map(|l| format!("{l}\n"))
            .collect()
    }
}

/// Deterministic round-robin scheduler over agents in registration order.
#[derive(Debug)]
pub struct Simulation {
    agents: Vec<Agent>,
    bus: Bus,
    trace: Vec<TraceLine>,
}

impl Simulation {
    pub fn new(agents: Vec<Agent>) -> Simulation {
        let bus = Bus::new(agents.iter().map(|a| a.id.clone()).collect());
        Simulation {
            agents,
            bus,
            trace: Vec::new(),
        }
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    fn log(&mut self, agent: &AgentId, labmove: Labmove) {
        let seq = self.trace.len() + 1;
        self.trace.push(TraceLine {
            seq,
            agent: agent.clone(),
            labmove,
        });
    }

    fn dispatch(&mut self, idx: usize, out: Vec<Outgoing>) -> Result<(), SimError> {
        let me = self.agents[idx].id.clone();
        for o in out {
            self.log(&me, o.labmove.clone());
            let Some(to) = o.to else { continue };
            let rel = o
                .labmove
                .spec
                .strip_prefix(&o.wrapper)
                .expect("move lies under its wrapper");
            let lm = Labmove::new(Player::Machine, rel, o.labmove.payload);
            self.bus
                .route(idx, &to, lm)
                .map_err(|to| SimError::UnknownAgent {
                    from: me.clone(),
                    to,
                })?;
        }
        Ok(())
    }

    /// Feeds one environment move to the session and routes the replies.
    fn consume(&mut self, idx: usize, lm: Labmove) -> Result<(), SimError> {
        let me = self.agents[idx].id.clone();
        let session = self.agents[idx].session.as_mut().unwrap();
        let before = session.omega().len();
        let out = session.env_move(lm.clone());
        if session.omega().len() > before {
            self.log(&me, lm);
        }
        self.dispatch(idx, out)
    }

    fn open_session(&mut self, idx: usize) -> Result<bool, SimError> {
        let agent = &mut self.agents[idx];
        let Some(q) = agent.queue.front().cloned() else {
            return Ok(false);
        };
        let goal = agent.rb.goal(&q);
        let Ok(tree) = prove(&goal) else {
            agent.queue.pop_front();
            agent.outcomes.push(SessionOutcome {
                query: q,
                outcome: Outcome::Rejected,
                records: Vec::new(),
            });
            return Ok(true);
        };
        let mut session = Session::new(hybridize(&tree), agent.registry.clone(), agent.id.clone())
            .map_err(|source| SimError::Engine {
                agent: agent.id.clone(),
                source,
            })?;
        let out = session.machine_turn();
        agent.session = Some(session);
        self.dispatch(idx, out)?;
        Ok(true)
    }

    /// Closes the running session of agent `idx`, evolving its resource base.
    fn close_session(&mut self, idx: usize) {
        let agent = &mut self.agents[idx];
        let Some(mut session) = agent.session.take() else {
            return;
        };
        let complete = session.is_complete();
        let winner = session.finish();
        let outcome = match (complete, winner) {
            (false, _) => Outcome::Incomplete,
            (true, Player::Machine) => Outcome::Won,
            (true, Player::Environment) => Outcome::Lost,
        };
        let query = agent
            .queue
            .pop_front()
            .expect("a session serves the front query");
        agent.rb = evolve_rb(
            agent.rb.len(),
            session.formula(),
            session.omega(),
            &agent.registry,
        );
        agent.outcomes.push(SessionOutcome {
            query,
            outcome,
            records: session.records(),
        });
    }

    /// One unit of work for agent `idx`: open a session for the front query,
    /// or take one bus message, or one pumped environment move, or close a
    /// completed session. `false` means the agent is waiting.
    pub fn exec_step(&mut self, idx: usize) -> Result<bool, SimError> {
        let Some(session) = self.agents[idx].session.as_ref() else {
            return self.open_session(idx);
        };
        let formula = session.formula().clone();
        let delivered = self
            .bus
            .take_for(idx, |from| !formula.env_wrappers_for(from).is_empty());
        if let Some((from, rel)) = delivered {
            let (_, wrapper) = formula.env_wrappers_for(&from).swap_remove(0);
            let lm = Labmove::new(Player::Environment, wrapper.concat(&rel.spec), rel.payload);
            let session = self.agents[idx].session.as_mut().unwrap();
            session.deliver(lm);
            let lm = session.pump_environment().expect("just delivered");
            self.consume(idx, lm)?;
            return Ok(true);
        }
        let session = self.agents[idx].session.as_mut().unwrap();
        if let Some(lm) = session.pump_environment() {
            self.consume(idx, lm)?;
            return Ok(true);
        }
        if session.is_complete() {
            self.close_session(idx);
            return Ok(true);
        }
        Ok(false)
    }

    fn has_work(&self) -> bool {
        self.agents
            .iter()
            .any(|a| a.session.is_some() || !a.queue.is_empty())
    }

    /// Runs rounds until nothing moves. Sessions still open at that point are
    /// closed (as incomplete unless every game finished) so later queries can start.
    pub fn run(&mut self, max_steps: usize) -> Result<SimulationReport, SimError> {
        let mut steps = 0;
        let mut exhausted = false;
        'rounds: loop {
            let mut progress = false;
            for idx in 0..self.agents.len() {
                if steps >= max_steps {
                    exhausted = self.has_work();
                    break 'rounds;
                }
                if self.exec_step(idx)? {
                    steps += 1;
                    progress = true;
                }
            }
            if !progress {
                let open: Vec<usize> = (0..self.agents.len())
                    .filter(|&i| self.agents[i].session.is_some())
                    .collect();
                if open.is_empty() {
                    break;
                }
                for idx in open {
                    self.close_session(idx);
                }
            }
        }
        Ok(self.report(steps, exhausted))
    }

    fn report(&self, steps: usize, exhausted: bool) -> SimulationReport {
        SimulationReport {
            steps,
            exhausted,
            agents: self
                .agents
                .iter()
                .map(|a| AgentReport {
                    id: a.id.clone(),
                    outcomes: a.outcomes.clone(),
                    rb: a.rb.formulas(),
                    ledger: a.ledger(),
                })
                .collect(),
            trace: self.trace.clone(),
            undelivered: self.bus.pending(),
        }
    }
}

/// Runs `agents` to global quiescence or until `max_steps` steps were taken.
pub fn run_simulation(agents: Vec<Agent>, max_steps: usize) -> Result<SimulationReport, SimError> {
    Simulation::new(agents).run(max_steps)
}
