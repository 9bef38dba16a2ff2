//! The two built-in atom games: coffee (`C`) and dollar (`D`).
//!
//! Both are played on game-view runs, where `Machine` is the provider. The
//! environment opens with its parameters and the machine answers once:
//!
//! * coffee: `B x=i`, `B y=j` (sugar grams, cream cc), then `T z=k` with
//!   `1 <= k <= zmax`; the machine wins iff `|k - i*j - 1| = 0`.
//! * dollar: `B v=i` with `1 <= i <= vmax`, then `T r=k`; the machine wins iff `k = 2i`.
//!
//! A run in which one side never finished its part is won by the other side;
//! the first player to make an illegal move loses.

use std::sync::Arc;

use super::{GameDef, Heuristic, Labmove, Move, Player, Run};

/// Splits `key=value` payloads; `None` for anything else.
pub fn key_value(m: &Move) -> Option<(&str, u64)> {
    let (k, v) = m.as_str().split_once('=')?;
    Some((k, v.parse().ok()?))
}

fn lookup(run: &Run, key: &str) -> Option<u64> {
    run.iter()
        .filter_map(|lm| key_value(&lm.payload))
        .find(|(k, _)| *k == key)
        .map(|(_, v)| v)
}

/// Checks `run` move by move; `Err(player)` names the first illegal mover.
fn replay(game: &dyn GameDef, run: &Run) -> Result<(), Player> {
    let mut prefix = Run::new();
    for lm in run.iter() {
        if !game.legal(&prefix, lm) {
            return Err(lm.player);
        }
        prefix.push(lm.clone());
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct Coffee {
    pub zmax: u64,
}

impl GameDef for Coffee {
    fn name(&self) -> &str {
        "coffee"
    }

    fn legal(&self, run: &Run, next: &Labmove) -> bool {
        let Some((key, value)) = key_value(&next.payload) else {
            return false;
        };
        let (x, y, z) = (lookup(run, "x"), lookup(run, "y"), lookup(run, "z"));
        match (next.player, key) {
            (Player::Environment, "x") => run.is_empty() && value >= 1,
            (Player::Environment, "y") => x.is_some() && y.is_none() && value >= 1,
            (Player::Machine, "z") => {
                x.is_some() && y.is_some() && z.is_none() && (1..=self.zmax).contains(&value)
            }
            _ => false,
        }
    }

    fn winner(&self, run: &Run) -> Player {
        if let Err(p) = replay(self, run) {
            return p.opponent();
        }
        match (lookup(run, "x"), lookup(run, "y"), lookup(run, "z")) {
            (Some(x), Some(y), Some(z)) if z == x.saturating_mul(y).saturating_add(1) => {
                Player::Machine
            }
            (Some(_), Some(_), _) => Player::Environment,
            _ => Player::Machine,
        }
    }

    fn is_complete(&self, run: &Run) -> bool {
        lookup(run, "z").is_some()
    }

    fn default_heuristic(&self) -> Option<Arc<dyn Heuristic>> {
        Some(Arc::new(CoffeeHeuristic { zmax: self.zmax }))
    }
}

#[derive(Debug, Clone)]
pub struct Dollar {
    pub vmax: u64,
}

impl GameDef for Dollar {
    fn name(&self) -> &str {
        "dollar"
    }

    fn legal(&self, run: &Run, next: &Labmove) -> bool {
        let Some((key, value)) = key_value(&next.payload) else {
            return false;
        };
        match (next.player, key) {
            (Player::Environment, "v") => run.is_empty() && (1..=self.vmax).contains(&value),
            (Player::Machine, "r") => {
                lookup(run, "v").is_some() && lookup(run, "r").is_none() && value >= 1
            }
            _ => false,
        }
    }

    fn winner(&self, run: &Run) -> Player {
        if let Err(p) = replay(self, run) {
            return p.opponent();
        }
        match (lookup(run, "v"), lookup(run, "r")) {
            (Some(v), Some(r)) if r == 2 * v => Player::Machine,
            (Some(_), _) => Player::Environment,
            (None, _) => Player::Machine,
        }
    }

    fn is_complete(&self, run: &Run) -> bool {
        lookup(run, "r").is_some()
    }

    fn default_heuristic(&self) -> Option<Arc<dyn Heuristic>> {
        Some(Arc::new(DollarHeuristic))
    }
}

/// `z = k` minimising `|k - x*y - 1|` over `1..=zmax`, smallest `k` on ties;
/// `None` until both `x` and `y` are known or once `z` has been played.
pub fn coffee_heuristic(subrun: &Run, zmax: u64) -> Option<Move> {
    let x = lookup(subrun, "x")?;
    let y = lookup(subrun, "y")?;
    if lookup(subrun, "z").is_some() || zmax == 0 {
        return None;
    }
    let target = x.saturating_mul(y).saturating_add(1);
    let k = (1..=zmax).min_by_key(|k| k.abs_diff(target))?;
    Some(Move::new(format!("z={k}")).expect("valid payload"))
}

#[derive(Debug, Clone)]
pub struct CoffeeHeuristic {
    pub zmax: u64,
}

impl Heuristic for CoffeeHeuristic {
    fn next_move(&self, subrun: &Run) -> Option<Move> {
        coffee_heuristic(subrun, self.zmax)
    }
}

/// Answers `v = i` with `r = 2i`.
#[derive(Debug, Clone)]
pub struct DollarHeuristic;

impl Heuristic for DollarHeuristic {
    fn next_move(&self, subrun: &Run) -> Option<Move> {
        let v = lookup(subrun, "v")?;
        if lookup(subrun, "r").is_some() {
            return None;
        }
        Some(Move::new(format!("r={}", 2 * v)).expect("valid payload"))
    }
}
