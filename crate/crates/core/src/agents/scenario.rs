//! Line-oriented scenario files.
//!
//! ```text
//! agent "*C" kind=provider
//!   game C = coffee(zmax=10)
//!   script d0 = [v=1]
//!   heuristic hC = coffee
//!   rb ((D{s=d0} -> C{h=hC})) @ God
//! agent u
//!   query ((D /\ D) -> (C /\ C)) @ o
//! ```
//!
//! Every agent starts from the built-in registry (`C`, `D`, `coffee`, `dollar`);
//! `game`, `heuristic`, `script` and `interpret` lines add to or override it.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::{Agent, AgentKind};
use crate::engine::games::{Coffee, CoffeeHeuristic, Dollar, DollarHeuristic};
use crate::engine::{GameDef, Heuristic, Move, Registry};
use crate::formula::{parse_formula, AgentId};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ScenarioError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> ScenarioError {
    ScenarioError {
        line,
        message: message.into(),
    }
}

/// Parses `name(key=value, ...)` or a bare `name`.
fn call(text: &str, line: usize) -> Result<(String, BTreeMap<String, u64>), ScenarioError> {
    let text = text.trim();
    let Some(open) = text.find('(') else {
        return Ok((text.to_string(), BTreeMap::new()));
    };
    let inner = text[open + 1..]
        .strip_suffix(')')
        .ok_or_else(|| err(line, format!("missing `)` in `{text}`")))?;
    let mut args = BTreeMap::new();
    for part in inner.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| err(line, format!("expected key=value, got `{part}`")))?;
        let v: u64 = v
            .trim()
            .parse()
            .map_err(|_| err(line, format!("expected a number in `{part}`")))?;
        args.insert(k.trim().to_string(), v);
    }
    Ok((text[..open].trim().to_string(), args))
}

fn make_game(text: &str, line: usize) -> Result<Arc<dyn GameDef>, ScenarioError> {
    let (kind, args) = call(text, line)?;
    match kind.as_str() {
        "coffee" => Ok(Arc::new(Coffee {
            zmax: args.get("zmax").copied().unwrap_or(10),
        })),
        "dollar" => Ok(Arc::new(Dollar {
            vmax: args.get("vmax").copied().unwrap_or(5),
        })),
        other => Err(err(line, format!("unknown game kind `{other}`"))),
    }
}

fn make_heuristic(text: &str, line: usize) -> Result<Arc<dyn Heuristic>, ScenarioError> {
    let (kind, args) = call(text, line)?;
    match kind.as_str() {
        "coffee" => Ok(Arc::new(CoffeeHeuristic {
            zmax: args.get("zmax").copied().unwrap_or(10),
        })),
        "dollar" => Ok(Arc::new(DollarHeuristic)),
        other => Err(err(line, format!("unknown heuristic kind `{other}`"))),
    }
}

fn make_script(text: &str, line: usize) -> Result<Vec<Move>, ScenarioError> {
    let inner = text
        .trim()
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| err(line, "script must be written as [m1, m2, ...]"))?;
    inner
        .split(',')
        .map(str::trim)
        .filter(|m| !m.is_empty())
        .map(|m| Move::new(m).map_err(|e| err(line, e.to_string())))
        .collect()
}

fn agent_header(rest: &str, line: usize) -> Result<(AgentId, AgentKind), ScenarioError> {
    let rest = rest.trim();
    let (id, tail) = if let Some(quoted) = rest.strip_prefix('"') {
        let end = quoted
            .find('"')
            .ok_or_else(|| err(line, "unterminated agent id"))?;
        (&quoted[..end], &quoted[end + 1..])
    } else {
        rest.split_once(char::is_whitespace).unwrap_or((rest, ""))
    };
    let id = AgentId::new(id).map_err(|e| err(line, e.to_string()))?;
    let mut kind = AgentKind::Regular;
    for word in tail.split_whitespace() {
        kind = match word {
            "kind=provider" => AgentKind::Provider,
            "kind=consumer" => AgentKind::Consumer,
            "kind=regular" => AgentKind::Regular,
            other => return Err(err(line, format!("unexpected `{other}` in agent header"))),
        };
    }
    Ok((id, kind))
}

/// Reads a scenario; agents are returned in declaration order.
pub fn parse_scenario(text: &str) -> Result<Vec<Agent>, ScenarioError> {
    let mut agents: Vec<Agent> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = strip_comment(raw).trim();
        if content.is_empty() {
            continue;
        }
        let (keyword, rest) = content
            .split_once(char::is_whitespace)
            .unwrap_or((content, ""));
        if keyword == "agent" {
            let (id, kind) = agent_header(rest, line)?;
            if agents.iter().any(|a| a.id == id) {
                return Err(err(line, format!("agent `{id}` declared twice")));
            }
            if id.is_god() {
                return Err(err(line, "God is not a declarable agent"));
            }
            agents.push(Agent::new(id, kind, Registry::builtin()));
            continue;
        }
        let agent = agents
            .last_mut()
            .ok_or_else(|| err(line, format!("`{keyword}` before any agent")))?;
        match keyword {
            "rb" | "query" => {
                let f = parse_formula(rest).map_err(|e| {
                    err(
                        line,
                        format!(
                            "column {}: {}",
                            e.column + raw.find(rest).unwrap_or(0),
                            e.message
                        ),
                    )
                })?;
                if keyword == "rb" {
                    agent.rb.push(f);
                } else {
                    agent.submit_query(f);
                }
            }
            "game" | "heuristic" | "script" | "interpret" => {
                let (name, value) = rest
                    .split_once('=')
                    .ok_or_else(|| err(line, format!("expected `{keyword} name = ...`")))?;
                let name = name.trim().to_string();
                let reg = agent.registry_mut();
                match keyword {
                    "game" => {
                        reg.games.insert(name, make_game(value, line)?);
                    }
                    "heuristic" => {
                        reg.heuristics.insert(name, make_heuristic(value, line)?);
                    }
                    "script" => {
                        reg.scripts.insert(name, make_script(value, line)?);
                    }
                    _ => {
                        let v = match value.trim() {
                            "true" => true,
                            "false" => false,
                            other => {
                                return Err(err(
                                    line,
                                    format!("expected true or false, got `{other}`"),
                                ))
                            }
                        };
                        reg.interpretation.insert(name, v);
                    }
                }
            }
            other => return Err(err(line, format!("unknown keyword `{other}`"))),
        }
    }
    for a in &agents {
        if a.kind == AgentKind::Provider
            && !a
                .rb
                .iter()
                .any(|e| e.formula.agents().iter().any(AgentId::is_god))
        {
            return Err(err(
                0,
                format!("provider `{}` has no God-annotated resource", a.id),
            ));
        }
    }
    Ok(agents)
}

fn strip_comment(line: &str) -> &str {
    // `#` never occurs inside formulas or quoted ids used by scenarios
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_agents_in_order() {
        let src = "\
# two agents
agent \"*C\" kind=provider
  game C = coffee(zmax=10)
  script d0 = [v=1]
  heuristic hC = coffee
  rb (D{s=d0} -> C{h=hC}) @ God
  query (D -> C) @ o   # served to the owner
agent o
  rb (D -> C) @ \"*C\"
";
        let agents = parse_scenario(src).unwrap();
        assert_eq!(agents.len(), 2);
        assert_eq!(agents[0].id.as_str(), "*C");
        assert_eq!(agents[0].kind, AgentKind::Provider);
        assert_eq!(agents[0].rb.len(), 1);
        assert_eq!(agents[0].queue.len(), 1);
        assert_eq!(
            agents[0].registry().scripts["d0"],
            vec![Move::new("v=1").unwrap()]
        );
        assert_eq!(
            agents[1].rb.entries()[0].formula.to_string(),
            "D -> C @ \"*C\""
        );
    }

    #[test]
    fn reports_line_numbers() {
        let e = parse_scenario("agent u\n  query (p /\\ ) @ o\n").unwrap_err();
        assert_eq!(e.line, 2);
        let e = parse_scenario("rb p\n").unwrap_err();
        assert_eq!(e.line, 1);
        let e = parse_scenario("agent u\n  game C = tea\n").unwrap_err();
        assert!(e.message.contains("tea"));
        let e = parse_scenario("agent u kind=provider\n  rb p\n").unwrap_err();
        assert!(e.message.contains("God"));
    }
}
