//! Game-playing side: moves, runs, atom games and the session that executes a
//! hybridized proof against an environment.

pub mod games;
mod session;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::formula::{FormulaError, SpecString};

pub use session::{position_winner, GameRecord, Outgoing, Session, Status};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Player {
    /// ⊤, written `T`.
    Machine,
    /// ⊥, written `B`.
    Environment,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Machine => Player::Environment,
            Player::Environment => Player::Machine,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Player::Machine => 'T',
            Player::Environment => 'B',
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("malformed move `{0}`")]
    BadMove(String),
    #[error(transparent)]
    Spec(#[from] FormulaError),
    #[error("no game bound to general atom `{0}`")]
    MissingGame(String),
    #[error("unknown heuristic `{0}`")]
    MissingHeuristic(String),
    #[error("unknown script `{0}`")]
    MissingScript(String),
    #[error("proof tree fails verification")]
    InvalidProof,
    #[error("session is not quiescent")]
    NotQuiescent,
}

/// A move payload: a bare branch number or a `[a-z][a-z0-9=]*` atom move.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Move(String);

impl Move {
    pub fn new(text: impl Into<String>) -> Result<Move, EngineError> {
        let text = text.into();
        let choice = !text.is_empty() && text.bytes().all(|b| b.is_ascii_digit());
        let atom = text.starts_with(|c: char| c.is_ascii_lowercase())
            && text
                .bytes()
                .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'=');
        if choice || atom {
            Ok(Move(text))
        } else {
            Err(EngineError::BadMove(text))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The branch number of a choice move.
    pub fn branch(&self) -> Option<usize> {
        if self.0.bytes().all(|b| b.is_ascii_digit()) {
            self.0.parse().ok()
        } else {
            None
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A move prefixed with its player and the specification of the occurrence it addresses.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Labmove {
    pub player: Player,
    pub spec: SpecString,
    pub payload: Move,
}

impl Labmove {
    pub fn new(player: Player, spec: SpecString, payload: Move) -> Labmove {
        Labmove {
            player,
            spec,
            payload,
        }
    }

    /// Reads `T2.1.x=3` / `B1.2`.
    pub fn parse(text: &str) -> Result<Labmove, EngineError> {
        let player = match text.chars().next() {
            Some('T') => Player::Machine,
            Some('B') => Player::Environment,
            _ => return Err(EngineError::BadMove(text.to_string())),
        };
        let (spec, payload) = parse_addressed_move(&text[1..])?;
        Ok(Labmove::new(player, spec, payload))
    }

    pub fn flipped(&self) -> Labmove {
        Labmove::new(
            self.player.opponent(),
            self.spec.clone(),
            self.payload.clone(),
        )
    }
}

impl fmt::Display for Labmove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.player, self.spec, self.payload)
    }
}

/// Splits `2.1.x=3` into spec `2.1.` and payload `x=3`; the payload is whatever
/// follows the last dot.
pub fn parse_addressed_move(text: &str) -> Result<(SpecString, Move), EngineError> {
    let text = text.trim();
    match text.rfind('.') {
        Some(i) => Ok((SpecString::parse(&text[..=i])?, Move::new(&text[i + 1..])?)),
        None => Ok((SpecString::empty(), Move::new(text)?)),
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Run(Vec<Labmove>);

impl Run {
    pub fn new() -> Run {
        Run(Vec::new())
    }

    pub fn push(&mut self, lm: Labmove) {
        self.0.push(lm);
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Labmove> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn moves(&self) -> &[Labmove] {
        &self.0
    }

    /// Labmoves under `spec`, with the prefix stripped, in order.
    pub fn subrun(&self, spec: &SpecString) -> Run {
        self.iter()
            .filter_map(|lm| {
                lm.spec
                    .strip_prefix(spec)
                    .map(|rest| Labmove::new(lm.player, rest, lm.payload.clone()))
            })
            .collect()
    }

    pub fn flipped(&self) -> Run {
        self.iter().map(Labmove::flipped).collect()
    }

    /// Drops choice moves, leaving what an atom's game sees.
    pub fn atom_moves(&self) -> Run {
        self.iter()
            .filter(|lm| lm.payload.branch().is_none())
            .cloned()
            .collect()
    }
}

impl FromIterator<Labmove> for Run {
    fn from_iter<I: IntoIterator<Item = Labmove>>(iter: I) -> Run {
        Run(iter.into_iter().collect())
    }
}

impl fmt::Display for Run {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(Labmove::to_string).collect();
        write!(f, "<{}>", parts.join(", "))
    }
}

/// Subrun of `omega` under `spec`.
pub fn subrun(omega: &Run, spec: &SpecString) -> Run {
    omega.subrun(spec)
}

/// An atom game. Runs are given from the provider's side: `Machine` is the
/// player who supplies the resource.
pub trait GameDef: fmt::Debug + Send + Sync {
    fn name(&self) -> &str;
    fn legal(&self, run: &Run, next: &Labmove) -> bool;
    fn winner(&self, run: &Run) -> Player;
    fn is_complete(&self, run: &Run) -> bool;
    fn default_heuristic(&self) -> Option<Arc<dyn Heuristic>>;
}

/// A provider-side strategy for one atom game.
pub trait Heuristic: fmt::Debug + Send + Sync {
    fn next_move(&self, subrun: &Run) -> Option<Move>;
}

/// Games, strategies and elementary-atom truth values available to a session.
#[derive(Clone, Debug, Default)]
pub struct Registry {
    pub games: BTreeMap<String, Arc<dyn GameDef>>,
    pub heuristics: BTreeMap<String, Arc<dyn Heuristic>>,
    pub scripts: BTreeMap<String, Vec<Move>>,
    pub interpretation: BTreeMap<String, bool>,
}

impl Registry {
    /// `C` = coffee (zmax 10), `D` = dollar (vmax 5), heuristics `coffee` and `dollar`.
    pub fn builtin() -> Registry {
        let mut r = Registry::default();
        r.games
            .insert("C".into(), Arc::new(games::Coffee { zmax: 10 }));
        r.games
            .insert("D".into(), Arc::new(games::Dollar { vmax: 5 }));
        r.heuristics.insert(
            "coffee".into(),
            Arc::new(games::CoffeeHeuristic { zmax: 10 }),
        );
        r.heuristics
            .insert("dollar".into(), Arc::new(games::DollarHeuristic));
        r
    }
}
