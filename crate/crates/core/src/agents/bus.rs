use std::collections::{BTreeMap, VecDeque};

use crate::engine::Labmove;
use crate::formula::AgentId;

/// FIFO channels between registered agents, one per (sender, receiver) pair.
/// Specs on the bus are relative to the env wrapper naming the counterpart.
#[derive(Debug, Default)]
pub struct Bus {
    ids: Vec<AgentId>,
    channels: BTreeMap<(usize, usize), VecDeque<Labmove>>,
    // per receiver: the sender to try first on the next visit
    cursor: Vec<usize>,
}

impl Bus {
    pub fn new(ids: Vec<AgentId>) -> Bus {
        let n = ids.len();
        Bus {
            ids,
            channels: BTreeMap::new(),
            cursor: vec![0; n],
        }
    }

    pub fn index_of(&self, id: &AgentId) -> Option<usize> {
        self.ids.iter().position(|a| a == id)
    }

    pub fn ids(&self) -> &[AgentId] {
        &self.ids
    }

    /// Enqueues `lm` from `from` to `to`. Returns `false` without enqueueing
    /// for moves addressed to God, which nobody receives.
    pub fn route(&mut self, from: usize, to: &AgentId, lm: Labmove) -> Result<bool, AgentId> {
        if to.is_god() {
            return Ok(false);
        }
        let to = self.index_of(to).ok_or_else(|| to.clone())?;
        self.channels.entry((from, to)).or_default().push_back(lm);
        Ok(true)
    }

    /// Takes the oldest message for `to` from the next sender in round-robin
    /// order whose channel is nonempty and whom `accept` admits.
    pub fn take_for(
        &mut self,
        to: usize,
        accept: impl Fn(&AgentId) -> bool,
    ) -> Option<(AgentId, Labmove)> {
        let n = self.ids.len();
        for k in 0..n {
            let from = (self.cursor[to] + k) % n;
            let Some(q) = self.channels.get_mut(&(from, to)) else {
                continue;
            };
            if q.is_empty() || !accept(&self.ids[from]) {
                continue;
            }
            let lm = q.pop_front().unwrap();
            self.cursor[to] = (from + 1) % n;
            return Some((self.ids[from].clone(), lm));
        }
        None
    }

    pub fn pending(&self) -> usize {
        self.channels.values().map(VecDeque::len).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> AgentId {
        AgentId::new(s).unwrap()
    }

    fn lm(t: &str) -> Labmove {
        Labmove::parse(t).unwrap()
    }

    #[test]
    fn fifo_and_round_robin() {
        let mut bus = Bus::new(vec![id("a"), id("b"), id("c")]);
        bus.route(0, &id("c"), lm("T1.x=1")).unwrap();
        bus.route(0, &id("c"), lm("T1.x=2")).unwrap();
        bus.route(1, &id("c"), lm("T2.x=3")).unwrap();
        let order: Vec<String> = std::iter::from_fn(|| bus.take_for(2, |_| true))
            .map(|(from, m)| format!("{from}:{m}"))
            .collect();
        assert_eq!(order, vec!["a:T1.x=1", "b:T2.x=3", "a:T1.x=2"]);
        assert_eq!(bus.pending(), 0);
    }

    #[test]
    fn god_and_strangers() {
        let mut bus = Bus::new(vec![id("a")]);
        assert_eq!(bus.route(0, &id("God"), lm("T1.x=1")), Ok(false));
        assert_eq!(bus.route(0, &id("zz"), lm("T1.x=1")), Err(id("zz")));
        assert_eq!(bus.pending(), 0);
    }

    #[test]
    fn refused_senders_wait() {
        let mut bus = Bus::new(vec![id("a"), id("b")]);
        bus.route(0, &id("b"), lm("T1.x=1")).unwrap();
        assert!(bus.take_for(1, |_| false).is_none());
        assert_eq!(bus.pending(), 1);
    }
}
