//! Formula AST for CL2 with environment annotations and hybrid atoms,
//! plus the structural queries the prover and the engine are built on.

mod syntax;

use std::collections::BTreeSet;
use std::fmt;

pub use syntax::{parse_formula, print_formula, ParseError};

/// Identifier of an agent; the formula `F @ w` plays `F` against `w`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AgentId(String);

/// The agent that stands for the ultimate provider and consumer of every resource.
pub const GOD: &str = "God";

impl AgentId {
    pub fn new(id: impl Into<String>) -> Result<Self, FormulaError> {
        let id = id.into();
        if id.is_empty() || id.chars().any(|c| c.is_whitespace() || c == '"') {
            return Err(FormulaError::BadAgentId(id));
        }
        Ok(AgentId(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_god(&self) -> bool {
        self.0 == GOD
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Strategy attached to a general atom occurrence.
///
/// `Heuristic` names a strategy for the player that provides the atom's game,
/// `Script` names the preprogrammed moves of the player that consumes it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Annotation {
    #[default]
    None,
    Heuristic(String),
    Script(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Elementary(String),
    General {
        name: String,
        annotation: Annotation,
    },
    /// A general atom paired with the elementary atom that replaced it in search form.
    Hybrid {
        general: String,
        elementary: String,
        annotation: Annotation,
    },
}

impl Atom {
    pub fn general(name: impl Into<String>) -> Self {
        Atom::General {
            name: name.into(),
            annotation: Annotation::None,
        }
    }

    pub fn annotation(&self) -> Option<&Annotation> {
        match self {
            Atom::Elementary(_) => None,
            Atom::General { annotation, .. } | Atom::Hybrid { annotation, .. } => Some(annotation),
        }
    }

    /// Name of the game the atom stands for, for general and hybrid atoms.
    pub fn game_name(&self) -> Option<&str> {
        match self {
            Atom::Elementary(_) => None,
            Atom::General { name, .. } => Some(name),
            Atom::Hybrid { general, .. } => Some(general),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    /// The constant won by the machine.
    True,
    /// The constant won by the environment.
    False,
    Atom(Atom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    /// Choice conjunction, n >= 2 operands.
    Chand(Vec<Formula>),
    /// Choice disjunction, n >= 2 operands.
    Chor(Vec<Formula>),
    Env(Box<Formula>, AgentId),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormulaError {
    #[error("path {0:?} does not resolve")]
    InvalidPath(Path),
    #[error("path {0:?} crosses a choice operator")]
    CrossesChoice(Path),
    #[error("specification `{0}` does not address a surface occurrence")]
    BadSpec(String),
    #[error("malformed specification string `{0}`")]
    MalformedSpec(String),
    #[error("invalid agent id `{0}`")]
    BadAgentId(String),
}

/// Address of a subformula: 1-based child indexes from the root.
/// `Not` and `Env` nodes have a single child with index 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Path(pub Vec<usize>);

impl Path {
    pub fn root() -> Self {
        Path(Vec::new())
    }

    pub fn child(&self, i: usize) -> Self {
        let mut v = self.0.clone();
        v.push(i);
        Path(v)
    }

    pub fn is_prefix_of(&self, other: &Path) -> bool {
        other.0.starts_with(&self.0)
    }
}

/// Dot-terminated operand indexes, e.g. `""`, `"1."`, `"2.1."`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SpecString(Vec<usize>);

impl SpecString {
    pub fn empty() -> Self {
        SpecString(Vec::new())
    }

    pub fn from_components(c: Vec<usize>) -> Self {
        SpecString(c)
    }

    pub fn components(&self) -> &[usize] {
        &self.0
    }

    pub fn push(&self, i: usize) -> Self {
        let mut v = self.0.clone();
        v.push(i);
        SpecString(v)
    }

    pub fn concat(&self, other: &SpecString) -> Self {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        SpecString(v)
    }

    pub fn is_prefix_of(&self, other: &SpecString) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn strip_prefix(&self, prefix: &SpecString) -> Option<SpecString> {
        self.0
            .strip_prefix(prefix.0.as_slice())
            .map(|rest| SpecString(rest.to_vec()))
    }

    pub fn parse(text: &str) -> Result<Self, FormulaError> {
        if text.is_empty() {
            return Ok(SpecString::empty());
        }
        let body = text
            .strip_suffix('.')
            .ok_or_else(|| FormulaError::MalformedSpec(text.to_string()))?;
        body.split('.')
            .map(|c| match c.parse::<usize>() {
                Ok(n) if n >= 1 && !c.starts_with('+') => Ok(n),
                _ => Err(FormulaError::MalformedSpec(text.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(SpecString)
    }
}

impl fmt::Display for SpecString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.0 {
            write!(f, "{c}.")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn flip(self) -> Self {
        match self {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OccurrenceKind {
    ChoiceOp,
    GeneralAtom,
    HybridAtom,
}

type SurfaceVisitor<'v> = dyn FnMut(&Formula, &Path, &[usize], Polarity, Option<&AgentId>) + 'v;

/// A surface occurrence found by [`Formula::surface_occurrences`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Occurrence {
    pub path: Path,
    pub spec: SpecString,
    pub polarity: Polarity,
    pub env: Option<AgentId>,
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_formula(self))
    }
}

impl Formula {
    pub fn elementary(name: impl Into<String>) -> Self {
        Formula::Atom(Atom::Elementary(name.into()))
    }

    pub fn general(name: impl Into<String>) -> Self {
        Formula::Atom(Atom::general(name))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn env(f: Formula, agent: AgentId) -> Self {
        Formula::Env(Box::new(f), agent)
    }

    /// Left-associated conjunction of a nonempty list.
    pub fn conjoin(mut items: Vec<Formula>) -> Option<Formula> {
        if items.is_empty() {
            return None;
        }
        let rest = items.split_off(1);
        let first = items.pop().unwrap();
        Some(rest.into_iter().fold(first, Formula::and))
    }

    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => vec![],
            Formula::Not(g) | Formula::Env(g, _) => vec![g],
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => vec![a, b],
            Formula::Chand(gs) | Formula::Chor(gs) => gs.iter().collect(),
        }
    }

    fn child_mut(&mut self, i: usize) -> Option<&mut Formula> {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => None,
            Formula::Not(g) | Formula::Env(g, _) => (i == 1).then_some(&mut **g),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => match i {
                1 => Some(&mut **a),
                2 => Some(&mut **b),
                _ => None,
            },
            Formula::Chand(gs) | Formula::Chor(gs) => i.checked_sub(1).and_then(|k| gs.get_mut(k)),
        }
    }

    pub fn is_choice(&self) -> bool {
        matches!(self, Formula::Chand(_) | Formula::Chor(_))
    }

    pub fn subformula(&self, path: &Path) -> Option<&Formula> {
        let mut cur = self;
        for &i in &path.0 {
            cur = *cur.children().get(i.checked_sub(1)?)?;
        }
        Some(cur)
    }

    /// Returns a copy with the subformula at `path` replaced by `g`.
    pub fn substitute_at(&self, path: &Path, g: Formula) -> Result<Formula, FormulaError> {
        let mut out = self.clone();
        let mut cur = &mut out;
        for &i in &path.0 {
            cur = cur
                .child_mut(i)
                .ok_or_else(|| FormulaError::InvalidPath(path.clone()))?;
        }
        *cur = g;
        Ok(out)
    }

    /// Polarity of the occurrence at `path`, reading `E -> F` as `~E \/ F`.
    pub fn polarity(&self, path: &Path) -> Result<Polarity, FormulaError> {
        let mut cur = self;
        let mut pol = Polarity::Positive;
        for &i in &path.0 {
            match cur {
                Formula::Not(_) => pol = pol.flip(),
                Formula::Implies(..) if i == 1 => pol = pol.flip(),
                _ => {}
            }
            cur = *cur
                .children()
                .get(i.wrapping_sub(1))
                .ok_or_else(|| FormulaError::InvalidPath(path.clone()))?;
        }
        Ok(pol)
    }

    /// Spec string of the occurrence at `path`; fails if the path enters a choice operand.
    pub fn specification(&self, path: &Path) -> Result<SpecString, FormulaError> {
        let mut cur = self;
        let mut spec = Vec::new();
        for &i in &path.0 {
            match cur {
                Formula::Chand(_) | Formula::Chor(_) => {
                    return Err(FormulaError::CrossesChoice(path.clone()))
                }
                Formula::And(..) | Formula::Or(..) | Formula::Implies(..) => spec.push(i),
                _ => {}
            }
            cur = *cur
                .children()
                .get(i.wrapping_sub(1))
                .ok_or_else(|| FormulaError::InvalidPath(path.clone()))?;
        }
        Ok(SpecString(spec))
    }

    /// Path of the surface occurrence addressed by `spec`.
    ///
    /// Negations and env-annotations are transparent, so the result is the
    /// unique node reached after skipping them: an atom, a constant, a choice
    /// operator or a binary connective.
    pub fn resolve_spec(&self, spec: &SpecString) -> Result<Path, FormulaError> {
        let bad = || FormulaError::BadSpec(spec.to_string());
        let mut cur = self;
        let mut path = Vec::new();
        let mut comps = spec.0.iter();
        loop {
            match cur {
                Formula::Not(g) | Formula::Env(g, _) => {
                    path.push(1);
                    cur = g;
                }
                Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                    match comps.next() {
                        None => return Ok(Path(path)),
                        Some(1) => {
                            path.push(1);
                            cur = a;
                        }
                        Some(2) => {
                            path.push(2);
                            cur = b;
                        }
                        Some(_) => return Err(bad()),
                    }
                }
                _ => {
                    return match comps.next() {
                        None => Ok(Path(path)),
                        Some(_) => Err(bad()),
                    }
                }
            }
        }
    }

    /// Surface occurrences of the requested kind, in left-to-right order.
    pub fn surface_occurrences(&self, kind: OccurrenceKind) -> Vec<Occurrence> {
        let mut out = Vec::new();
        self.walk_surface(
            &mut Path::root(),
            &mut Vec::new(),
            Polarity::Positive,
            None,
            &mut |f, path, spec, pol, env| {
                let hit = matches!(
                    (kind, f),
                    (
                        OccurrenceKind::ChoiceOp,
                        Formula::Chand(_) | Formula::Chor(_)
                    ) | (
                        OccurrenceKind::GeneralAtom,
                        Formula::Atom(Atom::General { .. })
                    ) | (
                        OccurrenceKind::HybridAtom,
                        Formula::Atom(Atom::Hybrid { .. })
                    )
                );
                if hit {
                    out.push(Occurrence {
                        path: path.clone(),
                        spec: SpecString(spec.to_vec()),
                        polarity: pol,
                        env: env.cloned(),
                    });
                }
            },
        );
        out
    }

    fn walk_surface<'a>(
        &'a self,
        path: &mut Path,
        spec: &mut Vec<usize>,
        pol: Polarity,
        env: Option<&'a AgentId>,
        visit: &mut SurfaceVisitor<'_>,
    ) {
        visit(self, path, spec, pol, env);
        match self {
            Formula::Not(g) => {
                path.0.push(1);
                g.walk_surface(path, spec, pol.flip(), env, visit);
                path.0.pop();
            }
            Formula::Env(g, w) => {
                path.0.push(1);
                g.walk_surface(path, spec, pol, Some(w), visit);
                path.0.pop();
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                let left_pol = if matches!(self, Formula::Implies(..)) {
                    pol.flip()
                } else {
                    pol
                };
                for (i, (g, p)) in [(a, left_pol), (b, pol)].into_iter().enumerate() {
                    path.0.push(i + 1);
                    spec.push(i + 1);
                    g.walk_surface(path, spec, p, env, visit);
                    spec.pop();
                    path.0.pop();
                }
            }
            _ => {}
        }
    }

    /// All surface nodes other than negations and env wrappers, with their specs.
    pub fn surface_nodes(&self) -> Vec<(Path, SpecString)> {
        let mut out = Vec::new();
        self.walk_surface(
            &mut Path::root(),
            &mut Vec::new(),
            Polarity::Positive,
            None,
            &mut |f, path, spec, _, _| {
                if !matches!(f, Formula::Not(_) | Formula::Env(..)) {
                    out.push((path.clone(), SpecString(spec.to_vec())));
                }
            },
        );
        out
    }

    /// The env wrapper enclosing `path` (or sitting at it): its path and agent.
    pub fn enclosing_env(&self, path: &Path) -> Option<(Path, &AgentId)> {
        let mut cur = self;
        let mut found = None;
        for (depth, &i) in path.0.iter().enumerate() {
            if let Formula::Env(_, w) = cur {
                found = Some((Path(path.0[..depth].to_vec()), w));
            }
            cur = *cur.children().get(i.checked_sub(1)?)?;
        }
        if let Formula::Env(_, w) = cur {
            found = Some((path.clone(), w));
        }
        found
    }

    /// Surface env wrappers annotated with `agent`, as (path, spec) pairs.
    pub fn env_wrappers_for(&self, agent: &AgentId) -> Vec<(Path, SpecString)> {
        let mut out = Vec::new();
        self.walk_surface(
            &mut Path::root(),
            &mut Vec::new(),
            Polarity::Positive,
            None,
            &mut |f, path, spec, _, _| {
                if let Formula::Env(_, w) = f {
                    if w == agent {
                        out.push((path.clone(), SpecString(spec.to_vec())));
                    }
                }
            },
        );
        out
    }

    /// Removes every env-annotation.
    pub fn skeleton(&self) -> Formula {
        self.map_nodes(&|f| match f {
            Formula::Env(g, _) => Some(g.skeleton()),
            _ => None,
        })
    }

    /// Removes heuristic and script annotations from atoms.
    pub fn strip_strategies(&self) -> Formula {
        self.map_nodes(&|f| match f {
            Formula::Atom(Atom::General { name, .. }) => Some(Formula::Atom(Atom::general(name))),
            Formula::Atom(Atom::Hybrid {
                general,
                elementary,
                ..
            }) => Some(Formula::Atom(Atom::Hybrid {
                general: general.clone(),
                elementary: elementary.clone(),
                annotation: Annotation::None,
            })),
            _ => None,
        })
    }

    /// Bottom-up rewrite: `rewrite` returns `Some` to replace a node outright.
    pub fn map_nodes(&self, rewrite: &dyn Fn(&Formula) -> Option<Formula>) -> Formula {
        if let Some(g) = rewrite(self) {
            return g;
        }
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => self.clone(),
            Formula::Not(g) => Formula::not(g.map_nodes(rewrite)),
            Formula::Env(g, w) => Formula::env(g.map_nodes(rewrite), w.clone()),
            Formula::And(a, b) => Formula::and(a.map_nodes(rewrite), b.map_nodes(rewrite)),
            Formula::Or(a, b) => Formula::or(a.map_nodes(rewrite), b.map_nodes(rewrite)),
            Formula::Implies(a, b) => Formula::implies(a.map_nodes(rewrite), b.map_nodes(rewrite)),
            Formula::Chand(gs) => Formula::Chand(gs.iter().map(|g| g.map_nodes(rewrite)).collect()),
            Formula::Chor(gs) => Formula::Chor(gs.iter().map(|g| g.map_nodes(rewrite)).collect()),
        }
    }

    /// No choice operators, no general atoms and no hybrid atoms.
    pub fn is_elementary(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Atom(Atom::Elementary(_)) => true,
            Formula::Atom(_) | Formula::Chand(_) | Formula::Chor(_) => false,
            _ => self.children().into_iter().all(Formula::is_elementary),
        }
    }

    /// Collapses surface choices and general atoms to constants and hybrid atoms to
    /// their elementary components. Env wrappers are dropped.
    pub fn elementarize(&self) -> Formula {
        self.elementarize_at(Polarity::Positive)
    }

    fn elementarize_at(&self, pol: Polarity) -> Formula {
        match self {
            Formula::True | Formula::False | Formula::Atom(Atom::Elementary(_)) => self.clone(),
            Formula::Atom(Atom::Hybrid { elementary, .. }) => Formula::elementary(elementary),
            Formula::Atom(Atom::General { .. }) => match pol {
                Polarity::Positive => Formula::False,
                Polarity::Negative => Formula::True,
            },
            Formula::Chand(_) => Formula::True,
            Formula::Chor(_) => Formula::False,
            Formula::Not(g) => Formula::not(g.elementarize_at(pol.flip())),
            Formula::Env(g, _) => g.elementarize_at(pol),
            Formula::And(a, b) => Formula::and(a.elementarize_at(pol), b.elementarize_at(pol)),
            Formula::Or(a, b) => Formula::or(a.elementarize_at(pol), b.elementarize_at(pol)),
            Formula::Implies(a, b) => {
                Formula::implies(a.elementarize_at(pol.flip()), b.elementarize_at(pol))
            }
        }
    }

    /// Choice operators plus general-atom occurrences, anywhere in the formula.
    pub fn measure(&self) -> usize {
        let own = match self {
            Formula::Chand(_) | Formula::Chor(_) | Formula::Atom(Atom::General { .. }) => 1,
            _ => 0,
        };
        own + self
            .children()
            .into_iter()
            .map(Formula::measure)
            .sum::<usize>()
    }

    /// Elementary atom names, including the elementary components of hybrid atoms.
    pub fn elementary_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut |a| match a {
            Atom::Elementary(n) => {
                out.insert(n.clone());
            }
            Atom::Hybrid { elementary, .. } => {
                out.insert(elementary.clone());
            }
            Atom::General { .. } => {}
        });
        out
    }

    /// Names of general atoms, including the general components of hybrid atoms.
    pub fn game_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut |a| {
            if let Some(n) = a.game_name() {
                out.insert(n.to_string());
            }
        });
        out
    }

    /// Every strategy annotation used in the formula.
    pub fn annotations(&self) -> Vec<Annotation> {
        let mut out = Vec::new();
        self.collect_atoms(&mut |a| {
            if let Some(ann) = a.annotation() {
                if *ann != Annotation::None {
                    out.push(ann.clone());
                }
            }
        });
        out
    }

    fn collect_atoms(&self, f: &mut dyn FnMut(&Atom)) {
        if let Formula::Atom(a) = self {
            f(a);
        }
        for c in self.children() {
            c.collect_atoms(f);
        }
    }

    /// Agents named by env-annotations, in order of first appearance.
    pub fn agents(&self) -> Vec<AgentId> {
        let mut out: Vec<AgentId> = Vec::new();
        fn go(f: &Formula, out: &mut Vec<AgentId>) {
            if let Formula::Env(_, w) = f {
                if !out.contains(w) {
                    out.push(w.clone());
                }
            }
            for c in f.children() {
                go(c, out);
            }
        }
        go(self, &mut out);
        out
    }

    /// True when no env wrapper is nested inside another one.
    pub fn is_non_switching(&self) -> bool {
        fn go(f: &Formula, inside: bool) -> bool {
            match f {
                Formula::Env(g, _) => !inside && go(g, true),
                _ => f.children().into_iter().all(|c| go(c, inside)),
            }
        }
        go(self, false)
    }

    /// Top-level conjuncts, flattening left-associated `/\` chains.
    pub fn conjuncts(&self) -> Vec<&Formula> {
        match self {
            Formula::And(a, b) => {
                let mut v = a.conjuncts();
                v.extend(b.conjuncts());
                v
            }
            _ => vec![self],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn path_of(formula: &Formula, spec: &str) -> Path {
        formula
            .resolve_spec(&SpecString::parse(spec).unwrap())
            .unwrap()
    }

    #[test]
    fn skeleton_examples() {
        assert_eq!(f("(p & (q & r)) @ w").skeleton(), f("p & (q & r)"));
        assert_eq!(f("p").skeleton(), f("p"));
        assert_eq!(f("(P @ w) /\\ (Q @ u)").skeleton(), f("P /\\ Q"));
    }

    #[test]
    fn polarity_examples() {
        let g = f("P -> Q");
        assert_eq!(g.polarity(&Path(vec![1])).unwrap(), Polarity::Negative);
        let g = f("~~p");
        assert_eq!(g.polarity(&Path(vec![1, 1])).unwrap(), Polarity::Positive);
        let g = f("(p -> q) -> r");
        assert_eq!(g.polarity(&Path(vec![1, 1])).unwrap(), Polarity::Positive);
        assert!(g.polarity(&Path(vec![3])).is_err());
    }

    #[test]
    fn surface_general_atoms_of_coffee_formula() {
        let occ = f("(C /\\ C) -> (C \\/ C)").surface_occurrences(OccurrenceKind::GeneralAtom);
        let got: Vec<_> = occ
            .iter()
            .map(|o| (o.spec.to_string(), o.polarity))
            .collect();
        assert_eq!(
            got,
            vec![
                ("1.1.".to_string(), Polarity::Negative),
                ("1.2.".to_string(), Polarity::Negative),
                ("2.1.".to_string(), Polarity::Positive),
                ("2.2.".to_string(), Polarity::Positive),
            ]
        );
    }

    #[test]
    fn surface_choices() {
        let occ = f("(p & q) -> p").surface_occurrences(OccurrenceKind::ChoiceOp);
        assert_eq!(occ.len(), 1);
        assert_eq!(occ[0].spec.to_string(), "1.");
        assert_eq!(occ[0].polarity, Polarity::Negative);

        let occ = f("p | (q & r)").surface_occurrences(OccurrenceKind::ChoiceOp);
        assert_eq!(occ.len(), 1);
        assert_eq!(occ[0].spec.to_string(), "");
    }

    #[test]
    fn matching_environment_is_reported() {
        let occ = f("(P @ w) /\\ Q").surface_occurrences(OccurrenceKind::GeneralAtom);
        assert_eq!(occ[0].env.as_ref().map(AgentId::as_str), Some("w"));
        assert_eq!(occ[1].env, None);
    }

    #[test]
    fn specification_examples() {
        let g = f("(p & q) -> r");
        assert_eq!(g.specification(&Path(vec![1])).unwrap().to_string(), "1.");
        let g = f("~(P \\/ Q)");
        assert_eq!(
            g.specification(&Path(vec![1, 2])).unwrap().to_string(),
            "2."
        );
        let g = f("((C /\\ C) -> (C \\/ C)) @ w");
        assert_eq!(
            g.specification(&Path(vec![1, 2, 2])).unwrap().to_string(),
            "2.2."
        );
        let g = f("p & q");
        assert!(matches!(
            g.specification(&Path(vec![1])),
            Err(FormulaError::CrossesChoice(_))
        ));
    }

    #[test]
    fn resolve_spec_examples() {
        assert_eq!(path_of(&f("p -> q"), "2."), Path(vec![2]));
        let g = f("(C /\\ C) -> (C \\/ C)");
        assert_eq!(path_of(&g, "1.2."), Path(vec![1, 2]));
        let err = f("p & q").resolve_spec(&SpecString::parse("1.").unwrap());
        assert!(err.is_err());
        // transparent through negation and env wrapper
        assert_eq!(path_of(&f("~(p @ w)"), ""), Path(vec![1, 1]));
    }

    #[test]
    fn spec_string_parsing() {
        assert_eq!(SpecString::parse("").unwrap(), SpecString::empty());
        assert_eq!(SpecString::parse("2.1.").unwrap().components(), &[2, 1]);
        assert!(SpecString::parse("2.1").is_err());
        assert!(SpecString::parse("0.").is_err());
        assert!(SpecString::parse("a.").is_err());
    }

    #[test]
    fn substitute_examples() {
        let g = f("p /\\ q");
        assert_eq!(
            g.substitute_at(&Path(vec![2]), f("r")).unwrap(),
            f("p /\\ r")
        );
        let g = f("((p & q) -> p) @ w");
        let h = g.substitute_at(&Path(vec![1, 1]), f("p")).unwrap();
        assert_eq!(h, f("(p -> p) @ w"));
        let g = f("C -> C");
        let hyb = f("C_p");
        let h = g
            .substitute_at(&Path(vec![1]), hyb.clone())
            .unwrap()
            .substitute_at(&Path(vec![2]), hyb)
            .unwrap();
        assert_eq!(h, f("C_p -> C_p"));
        assert!(g.substitute_at(&Path(vec![3]), f("p")).is_err());
    }

    #[test]
    fn elementary_examples() {
        assert!(f("p /\\ ~q").is_elementary());
        assert!(!f("P").is_elementary());
        assert!(!f("C_p").is_elementary());
    }

    #[test]
    fn elementarize_examples() {
        assert_eq!(f("(p & q) -> p").elementarize(), f("T -> p"));
        assert_eq!(f("P -> P").elementarize(), f("T -> F"));
        assert_eq!(
            f("((C_p /\\ C_q) -> (C_p \\/ C_q)) @ w").elementarize(),
            f("(p /\\ q) -> (p \\/ q)")
        );
    }

    #[test]
    fn enclosing_env_and_wrappers() {
        let g = f("((D /\\ D) -> (C /\\ C) @ o) -> (C @ \"*1\")");
        let (p, w) = g.enclosing_env(&Path(vec![1, 1, 2, 1])).unwrap();
        assert_eq!(p, Path(vec![1]));
        assert_eq!(w.as_str(), "o");
        let ws = g.env_wrappers_for(&AgentId::new("*1").unwrap());
        assert_eq!(ws.len(), 1);
        assert_eq!(ws[0].1.to_string(), "2.");
        assert!(g.enclosing_env(&Path(vec![])).is_none());
    }

    #[test]
    fn measure_counts_choices_and_general_atoms() {
        assert_eq!(f("(C /\\ C) -> (C \\/ C)").measure(), 4);
        assert_eq!(f("(p & Q) -> C_p").measure(), 2);
    }
}
