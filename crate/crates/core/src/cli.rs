//! The `clbk` command line.
//!
//! Exit codes: 0 success, 1 unprovable, 2 input error, 3 the run ended incomplete.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};

use crate::agents::{parse_scenario, run_simulation, SimulationReport};
use crate::engine::{parse_addressed_move, Labmove, Player, Registry, Session, Status};
use crate::formula::{parse_formula, print_formula, AgentId, Formula};
use crate::prover::{hybridize, prove};

pub const EXIT_OK: i32 = 0;
pub const EXIT_UNPROVABLE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INCOMPLETE: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "clbk",
    version,
    about = "Prove and play CL2 formulas with environment annotations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Search for a proof of a formula.
    Prove {
        formula: String,
        /// Print the proof, one numbered line per node.
        #[arg(long)]
        tree: bool,
        /// Print the proof with fresh atoms replaced by hybrid atoms.
        #[arg(long)]
        hybrid: bool,
    },
    /// Prove a formula and play it against scripted or typed-in environment moves.
    Play {
        formula: String,
        /// File with `script`, `heuristic`, `game` and `interpret` lines.
        #[arg(long)]
        scripts: Option<PathBuf>,
        /// Read environment moves (e.g. `2.1.x=3`) from standard input.
        #[arg(long)]
        interactive: bool,
        #[arg(long, default_value_t = 10_000)]
        max_steps: usize,
        /// Also write the trace to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run a scenario of agents to quiescence.
    Simulate {
        path: PathBuf,
        /// Directory for one trace file per agent.
        #[arg(long)]
        trace_dir: Option<PathBuf>,
        #[arg(long, default_value_t = 1_000_000)]
        max_steps: usize,
    },
    /// Print every formula of a file (one per line) in canonical form.
    Fmt { path: PathBuf },
}

/// Parses `args` and runs the command; returns the exit code.
pub fn main_with<I, T>(args: I, input: &mut dyn BufRead, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(out, "{e}");
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match run(cli.command, input, out) {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(out, "error: {msg}");
            EXIT_INPUT
        }
    }
}

fn run(cmd: Command, input: &mut dyn BufRead, out: &mut dyn Write) -> Result<i32, String> {
    match cmd {
        Command::Prove {
            formula,
            tree,
            hybrid,
        } => cmd_prove(&formula, tree, hybrid, out),
        Command::Play {
            formula,
            scripts,
            interactive,
            max_steps,
            trace,
        } => {
            let stdin = if interactive { Some(input) } else { None };
            cmd_play(
                &formula,
                scripts.as_deref(),
                stdin,
                max_steps,
                trace.as_deref(),
                out,
            )
        }
        Command::Simulate {
            path,
            trace_dir,
            max_steps,
        } => cmd_simulate(&path, trace_dir.as_deref(), max_steps, out),
        Command::Fmt { path } => cmd_fmt(&path, out),
    }
    .map_err(|e| e.to_string())
}

type CmdResult = Result<i32, Box<dyn std::error::Error>>;

fn parse(source: &str) -> Result<Formula, String> {
    parse_formula(source).map_err(|e| e.to_string())
}

pub fn cmd_prove(source: &str, tree: bool, hybrid: bool, out: &mut dyn Write) -> CmdResult {
    let f = parse(source)?;
    match prove(&f) {
        Ok(t) => {
            writeln!(out, "provable")?;
            if hybrid {
                writeln!(out, "{}", hybridize(&t).listing())?;
            } else if tree {
                writeln!(out, "{}", t.listing())?;
            }
            Ok(EXIT_OK)
        }
        Err(_) => {
            writeln!(out, "unprovable")?;
            Ok(EXIT_UNPROVABLE)
        }
    }
}

/// Reads a registry file: the body of a scenario agent without the header.
fn load_registry(path: Option<&Path>) -> Result<Registry, String> {
    let Some(path) = path else {
        return Ok(Registry::builtin());
    };
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut agents = parse_scenario(&format!("agent me\n{text}")).map_err(|e| {
        format!(
            "{}:{}: {}",
            path.display(),
            e.line.saturating_sub(1),
            e.message
        )
    })?;
    Ok(agents.remove(0).registry().clone())
}

pub fn cmd_play(
    source: &str,
    scripts: Option<&Path>,
    mut stdin: Option<&mut dyn BufRead>,
    max_steps: usize,
    trace_path: Option<&Path>,
    out: &mut dyn Write,
) -> CmdResult {
    let f = parse(source)?;
    let registry = load_registry(scripts)?;
    let Ok(tree) = prove(&f) else {
        writeln!(out, "unprovable")?;
        return Ok(EXIT_UNPROVABLE);
    };
    let me = AgentId::new("me").expect("valid id");
    let mut s = Session::new(hybridize(&tree), Arc::new(registry), me)?;
    let mut trace: Vec<Labmove> = s.machine_turn().into_iter().map(|o| o.labmove).collect();
    let mut steps = 0;
    let mut exhausted = false;
    loop {
        let next = match stdin.as_mut() {
            Some(reader) => {
                let mut line = String::new();
                if reader.read_line(&mut line)? == 0 || line.trim().is_empty() {
                    stdin = None;
                    continue;
                }
                let text = line.trim();
                let text = text.strip_prefix('B').unwrap_or(text);
                let (spec, payload) = parse_addressed_move(text).map_err(|e| e.to_string())?;
                s.deliver(Labmove::new(Player::Environment, spec, payload));
                s.pump_environment()
            }
            None => s.pump_environment(),
        };
        let Some(lm) = next else { break };
        if steps >= max_steps {
            exhausted = true;
            break;
        }
        steps += 1;
        let before = s.omega().len();
        let replies = s.env_move(lm.clone());
        if s.omega().len() > before {
            trace.push(lm);
        }
        trace.extend(replies.into_iter().map(|o| o.labmove));
    }
    let lines: Vec<String> = trace
        .iter()
        .enumerate()
        .map(|(i, lm)| format!("{} me {} {}{}", i + 1, lm.player, lm.spec, lm.payload))
        .collect();
    for l in &lines {
        writeln!(out, "{l}")?;
    }
    if let Some(p) = trace_path {
        std::fs::write(
            p,
            lines.iter().map(|l| format!("{l}\n")).collect::<String>(),
        )?;
    }
    let winner = if s.status() == Status::Quiescent {
        s.evaluate_winner()?
    } else {
        s.finish()
    };
    writeln!(out, "winner: {winner}")?;
    Ok(if exhausted { EXIT_INCOMPLETE } else { EXIT_OK })
}

/// File name for an agent's trace; `*` is spelled `star`.
pub fn trace_file_name(id: &AgentId) -> String {
    format!("{}.trace", id.as_str().replace('*', "star"))
}

fn write_traces(report: &SimulationReport, dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for a in &report.agents {
        std::fs::write(dir.join(trace_file_name(&a.id)), report.agent_trace(&a.id))?;
    }
    std::fs::write(dir.join("all.trace"), report.trace_text())
}

pub fn cmd_simulate(
    path: &Path,
    trace_dir: Option<&Path>,
    max_steps: usize,
    out: &mut dyn Write,
) -> CmdResult {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let agents = parse_scenario(&text).map_err(|e| format!("{}:{e}", path.display()))?;
    let report = run_simulation(agents, max_steps)?;
    if let Some(dir) = trace_dir {
        write_traces(&report, dir)?;
    }
    for a in &report.agents {
        for o in &a.outcomes {
            writeln!(out, "{}: {} {}", a.id, o.outcome, o.query)?;
        }
        let fmt_counts = |m: &std::collections::BTreeMap<String, usize>| {
            m.iter()
                .map(|(g, n)| format!("{g}={n}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        writeln!(
            out,
            "{}: received {}; paid {}",
            a.id,
            fmt_counts(&a.ledger.received),
            fmt_counts(&a.ledger.paid)
        )?;
    }
    writeln!(out, "steps: {}", report.steps)?;
    if report.exhausted {
        writeln!(out, "step budget exhausted")?;
    }
    writeln!(out, "{}", report.summary())?;
    Ok(if report.all_won() {
        EXIT_OK
    } else {
        EXIT_INCOMPLETE
    })
}

pub fn cmd_fmt(path: &Path, out: &mut dyn Write) -> CmdResult {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut lines = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            lines.push(t.to_string());
            continue;
        }
        let f = parse_formula(t).map_err(|e| {
            let indent = line.len() - line.trim_start().len();
            format!(
                "{}:{}:{}: {}",
                path.display(),
                i + 1,
                e.column + indent,
                e.message
            )
        })?;
        lines.push(print_formula(&f));
    }
    for l in lines {
        writeln!(out, "{l}")?;
    }
    Ok(EXIT_OK)
}
