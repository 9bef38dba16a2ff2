//! Classical propositional validity for elementary formulas.
//!
//! [`is_valid`] refutes the negation with a small DPLL solver over a Tseitin
//! encoding; [`is_valid_by_truth_table`] enumerates every valuation and is kept
//! as the reference the solver is tested against.

use std::collections::{BTreeMap, BTreeSet};

use crate::formula::{Atom, Formula};

/// Truth values for the elementary atoms of a formula.
pub type Valuation = BTreeMap<String, bool>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClassicalError {
    #[error("formula is not elementary: {0}")]
    NotElementary(String),
    #[error("valuation has no value for atom `{0}`")]
    Unassigned(String),
}

fn require_elementary(f: &Formula) -> Result<(), ClassicalError> {
    if f.is_elementary() {
        Ok(())
    } else {
        Err(ClassicalError::NotElementary(f.to_string()))
    }
}

/// Evaluates an elementary formula under a total valuation.
pub fn evaluate(f: &Formula, v: &Valuation) -> Result<bool, ClassicalError> {
    require_elementary(f)?;
    eval(f, v)
}

fn eval(f: &Formula, v: &Valuation) -> Result<bool, ClassicalError> {
    Ok(match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(Atom::Elementary(n)) => *v
            .get(n)
            .ok_or_else(|| ClassicalError::Unassigned(n.clone()))?,
        Formula::Not(g) => !eval(g, v)?,
        Formula::Env(g, _) => eval(g, v)?,
        Formula::And(a, b) => eval(a, v)? && eval(b, v)?,
        Formula::Or(a, b) => eval(a, v)? || eval(b, v)?,
        Formula::Implies(a, b) => !eval(a, v)? || eval(b, v)?,
        Formula::Atom(_) | Formula::Chand(_) | Formula::Chor(_) => {
            return Err(ClassicalError::NotElementary(f.to_string()))
        }
    })
}

/// Exhaustive check over all `2^n` valuations.
pub fn is_valid_by_truth_table(f: &Formula) -> Result<bool, ClassicalError> {
    require_elementary(f)?;
    let atoms: Vec<String> = f.elementary_names().into_iter().collect();
    assert!(atoms.len() < 24, "truth table over {} atoms", atoms.len());
    for bits in 0u32..(1 << atoms.len()) {
        let v: Valuation = atoms
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), bits >> i & 1 == 1))
            .collect();
        if !eval(f, &v)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// True iff `f` holds under every valuation of its atoms.
pub fn is_valid(f: &Formula) -> Result<bool, ClassicalError> {
    require_elementary(f)?;
    Ok(!satisfiable_unchecked(&Formula::not(f.clone())))
}

/// True iff some valuation makes `f` true.
pub fn is_satisfiable(f: &Formula) -> Result<bool, ClassicalError> {
    require_elementary(f)?;
    Ok(satisfiable_unchecked(f))
}

fn satisfiable_unchecked(f: &Formula) -> bool {
    let mut enc = Tseitin::default();
    let top = enc.encode(f);
    enc.clauses.push(vec![top]);
    Dpll::new(enc.next_var as usize, enc.clauses).solve()
}

type Lit = i32;

#[derive(Default)]
struct Tseitin {
    next_var: i32,
    atoms: BTreeMap<String, i32>,
    clauses: Vec<Vec<Lit>>,
}

impl Tseitin {
    fn fresh(&mut self) -> i32 {
        self.next_var += 1;
        self.next_var
    }

    fn encode(&mut self, f: &Formula) -> Lit {
        match f {
            Formula::True | Formula::False => {
                let x = self.fresh();
                self.clauses
                    .push(vec![if matches!(f, Formula::True) { x } else { -x }]);
                x
            }
            Formula::Atom(Atom::Elementary(n)) => {
                if let Some(&x) = self.atoms.get(n) {
                    return x;
                }
                let x = self.fresh();
                self.atoms.insert(n.clone(), x);
                x
            }
            Formula::Not(g) => -self.encode(g),
            Formula::Env(g, _) => self.encode(g),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                let la = self.encode(a);
                let lb = self.encode(b);
                let la = if matches!(f, Formula::Implies(..)) {
                    -la
                } else {
                    la
                };
                let x = self.fresh();
                if matches!(f, Formula::And(..)) {
                    self.clauses.push(vec![-x, la]);
                    self.clauses.push(vec![-x, lb]);
                    self.clauses.push(vec![x, -la, -lb]);
                } else {
                    self.clauses.push(vec![-x, la, lb]);
                    self.clauses.push(vec![x, -la]);
                    self.clauses.push(vec![x, -lb]);
                }
                x
            }
            Formula::Atom(_) | Formula::Chand(_) | Formula::Chor(_) => {
                unreachable!("elementary input checked by caller")
            }
        }
    }
}

struct Dpll {
    clauses: Vec<Vec<Lit>>,
    // 0 unassigned, 1 true, -1 false; index by variable
    assign: Vec<i8>,
    trail: Vec<i32>,
}

impl Dpll {
    fn new(vars: usize, clauses: Vec<Vec<Lit>>) -> Self {
        Dpll {
            clauses,
            assign: vec![0; vars + 1],
            trail: Vec::new(),
        }
    }

    fn value(&self, l: Lit) -> i8 {
        let v = self.assign[l.unsigned_abs() as usize];
        if l > 0 {
            v
        } else {
            -v
        }
    }

    fn set(&mut self, l: Lit) {
        self.assign[l.unsigned_abs() as usize] = if l > 0 { 1 } else { -1 };
        self.trail.push(l.abs());
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let v = self.trail.pop().unwrap();
            self.assign[v as usize] = 0;
        }
    }

    /// Unit propagation to fixpoint; false on conflict.
    fn propagate(&mut self) -> bool {
        loop {
            let mut changed = false;
            for ci in 0..self.clauses.len() {
                let mut unassigned = None;
                let mut open = 0;
                let mut satisfied = false;
                for &l in &self.clauses[ci] {
                    match self.value(l) {
                        1 => {
                            satisfied = true;
                            break;
                        }
                        0 => {
                            open += 1;
                            unassigned = Some(l);
                        }
                        _ => {}
                    }
                }
                if satisfied {
                    continue;
                }
                match open {
                    0 => return false,
                    1 => {
                        self.set(unassigned.unwrap());
                        changed = true;
                    }
                    _ => {}
                }
            }
            if !changed {
                return true;
            }
        }
    }

    fn pick(&self) -> Option<Lit> {
        let mut seen = BTreeSet::new();
        for c in &self.clauses {
            if c.iter().any(|&l| self.value(l) == 1) {
                continue;
            }
            for &l in c {
                if self.value(l) == 0 && seen.insert(l.abs()) {
                    return Some(l);
                }
            }
        }
        None
    }

    fn solve(&mut self) -> bool {
        if !self.propagate() {
            return false;
        }
        let Some(l) = self.pick() else {
            return true;
        };
        for choice in [l, -l] {
            let mark = self.trail.len();
            self.set(choice);
            if self.solve() {
                return true;
            }
            self.undo_to(mark);
        }
        false
    }
}
