//! Python bindings for `clbk`.

use std::collections::BTreeMap;
use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use clbk::agents::{parse_scenario, run_simulation};
use clbk::classical;
use clbk::engine::{parse_addressed_move, Labmove, Player, Registry, Session, Status};
use clbk::formula::{self as fm, AgentId, OccurrenceKind};
use clbk::prover::{self, ProofTree};

fn value_error(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A parsed formula.
#[pyclass(frozen, eq, skip_from_py_object, module = "clbk_py")]
#[derive(Clone, PartialEq)]
pub struct Formula {
    inner: fm::Formula,
}

#[pymethods]
impl Formula {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        parse(text)
    }

    fn __str__(&self) -> String {
        fm::print_formula(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!("Formula({:?})", fm::print_formula(&self.inner))
    }

    fn is_elementary(&self) -> bool {
        self.inner.is_elementary()
    }

    fn elementarize(&self) -> Formula {
        Formula {
            inner: self.inner.elementarize(),
        }
    }

    fn skeleton(&self) -> Formula {
        Formula {
            inner: self.inner.skeleton(),
        }
    }

    fn measure(&self) -> usize {
        self.inner.measure()
    }

    fn agents(&self) -> Vec<String> {
        self.inner
            .agents()
            .iter()
            .map(|a| a.as_str().to_string())
            .collect()
    }

    /// `(spec, polarity)` of each surface occurrence of `kind`
    /// (`"choice"`, `"general"` or `"hybrid"`).
    fn surface_occurrences(&self, kind: &str) -> PyResult<Vec<(String, String)>> {
        let kind = match kind {
            "choice" => OccurrenceKind::ChoiceOp,
            "general" => OccurrenceKind::GeneralAtom,
            "hybrid" => OccurrenceKind::HybridAtom,
            other => return Err(value_error(format!("unknown occurrence kind `{other}`"))),
        };
        Ok(self
            .inner
            .surface_occurrences(kind)
            .into_iter()
            .map(|o| {
                let pol = match o.polarity {
                    fm::Polarity::Positive => "+",
                    fm::Polarity::Negative => "-",
                };
                (o.spec.to_string(), pol.to_string())
            })
            .collect())
    }
}

/// A proof tree found by `prove`.
#[pyclass(frozen, skip_from_py_object, module = "clbk_py")]
#[derive(Clone)]
pub struct Proof {
    inner: ProofTree,
}

#[pymethods]
impl Proof {
    #[getter]
    fn conclusion(&self) -> Formula {
        Formula {
            inner: self.inner.conclusion.clone(),
        }
    }

    fn node_count(&self) -> usize {
        self.inner.node_count()
    }

    /// Rule letters in pre-order.
    fn rules(&self) -> String {
        self.inner.rules().into_iter().collect()
    }

    fn listing(&self) -> String {
        self.inner.listing()
    }

    fn hybridize(&self) -> Proof {
        Proof {
            inner: prover::hybridize(&self.inner),
        }
    }

    fn verify(&self) -> bool {
        prover::verify_proof(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "Proof({} nodes, rules {})",
            self.inner.node_count(),
            self.rules()
        )
    }
}

#[pyfunction]
fn parse(text: &str) -> PyResult<Formula> {
    fm::parse_formula(text)
        .map(|inner| Formula { inner })
        .map_err(value_error)
}

fn formula_arg(f: &Bound<'_, PyAny>) -> PyResult<fm::Formula> {
    if let Ok(g) = f.cast::<Formula>() {
        return Ok(g.get().inner.clone());
    }
    let text: String = f.extract()?;
    Ok(parse(&text)?.inner)
}

/// A proof of `formula` (a `Formula` or a string), or `None` if there is none.
#[pyfunction]
fn prove(formula: &Bound<'_, PyAny>) -> PyResult<Option<Proof>> {
    Ok(prover::prove(&formula_arg(formula)?)
        .ok()
        .map(|inner| Proof { inner }))
}

/// Classical validity of an elementary formula.
#[pyfunction]
fn is_valid(formula: &Bound<'_, PyAny>) -> PyResult<bool> {
    classical::is_valid(&formula_arg(formula)?).map_err(value_error)
}

fn load_registry(definitions: Option<&str>) -> PyResult<Registry> {
    let Some(text) = definitions else {
        return Ok(Registry::builtin());
    };
    let mut agents = parse_scenario(&format!("agent me\n{text}")).map_err(value_error)?;
    Ok(agents.remove(0).registry().clone())
}

fn labmove_text(lm: &Labmove) -> String {
    format!("{}{}{}", lm.player, lm.spec, lm.payload)
}

/// Proves `formula` and plays it against the environment `moves` (e.g. `"2.1.x=3"`),
/// then against the scripts and heuristics in `definitions` (scenario-file
/// `game`/`script`/`heuristic` lines). Returns `(trace, winner)`.
#[pyfunction]
#[pyo3(signature = (formula, moves=Vec::new(), definitions=None))]
fn play(
    formula: &Bound<'_, PyAny>,
    moves: Vec<String>,
    definitions: Option<&str>,
) -> PyResult<(Vec<String>, String)> {
    let f = formula_arg(formula)?;
    let registry = load_registry(definitions)?;
    let tree = prover::prove(&f).map_err(|_| value_error("formula is not provable"))?;
    let me = AgentId::new("me").expect("valid id");
    let mut s =
        Session::new(prover::hybridize(&tree), Arc::new(registry), me).map_err(value_error)?;
    let mut trace: Vec<Labmove> = s.machine_turn().into_iter().map(|o| o.labmove).collect();
    for text in &moves {
        let (spec, payload) =
            parse_addressed_move(text.trim_start_matches('B')).map_err(value_error)?;
        s.deliver(Labmove::new(Player::Environment, spec, payload));
    }
    while let Some(lm) = s.pump_environment() {
        let before = s.omega().len();
        let replies = s.env_move(lm.clone());
        if s.omega().len() > before {
            trace.push(lm);
        }
        trace.extend(replies.into_iter().map(|o| o.labmove));
    }
    let winner = match s.status() {
        Status::Quiescent => s
            .evaluate_winner()
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))?,
        _ => s.finish(),
    };
    Ok((trace.iter().map(labmove_text).collect(), winner.to_string()))
}

type Counts = BTreeMap<String, usize>;

/// Result of `simulate`.
#[pyclass(frozen, get_all, module = "clbk_py")]
pub struct Simulation {
    steps: usize,
    all_won: bool,
    summary: String,
    trace: String,
    /// `(agent, outcome, query)` per served query.
    outcomes: Vec<(String, String, String)>,
    /// agent -> (received, paid) counts per game.
    ledgers: BTreeMap<String, (Counts, Counts)>,
}

/// Runs a scenario (the text of a `.clbk` file) to quiescence.
#[pyfunction]
#[pyo3(signature = (scenario, max_steps=1_000_000))]
fn simulate(scenario: &str, max_steps: usize) -> PyResult<Simulation> {
    let agents = parse_scenario(scenario).map_err(value_error)?;
    let r =
        run_simulation(agents, max_steps).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(Simulation {
        steps: r.steps,
        all_won: r.all_won(),
        summary: r.summary(),
        trace: r.trace_text(),
        outcomes: r
            .agents
            .iter()
            .flat_map(|a| {
                a.outcomes
                    .iter()
                    .map(|o| (a.id.to_string(), o.outcome.to_string(), o.query.to_string()))
            })
            .collect(),
        ledgers: r
            .agents
            .iter()
            .map(|a| {
                (
                    a.id.to_string(),
                    (a.ledger.received.clone(), a.ledger.paid.clone()),
                )
            })
            .collect(),
    })
}

#[pymodule]
pub fn clbk_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Formula>()?;
    m.add_class::<Proof>()?;
    m.add_class::<Simulation>()?;
    m.add_function(wrap_pyfunction!(parse, m)?)?;
    m.add_function(wrap_pyfunction!(prove, m)?)?;
    m.add_function(wrap_pyfunction!(is_valid, m)?)?;
    m.add_function(wrap_pyfunction!(play, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
