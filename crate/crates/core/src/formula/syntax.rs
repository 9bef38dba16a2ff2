//! Concrete text syntax.
//!
//! ```text
//! formula  := impl [ "@" agentid ]
//! impl     := orx [ "->" impl ]
//! orx      := andx { ("\/" | "|") andx }
//! andx     := unary { ("/\" | "&") unary }
//! unary    := "~" unary | "(" formula ")" | atom
//! atom     := lower | upper [ "_" lower ] [ "{" ("h"|"s") "=" ident "}" ] | "T" | "F"
//! ```
//!
//! `&` and `|` build n-ary choice operators; `/\` and `\/` build binary,
//! left-associated conjunction and disjunction.

use std::fmt;

use super::{AgentId, Annotation, Atom, Formula};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Lower(String),
    Upper(String),
    Quoted(String),
    Not,
    Wedge,
    Vee,
    Amp,
    Bar,
    Arrow,
    At,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Eq,
    Underscore,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Lower(s) | Tok::Upper(s) => write!(f, "`{s}`"),
            Tok::Quoted(s) => write!(f, "\"{s}\""),
            Tok::Not => f.write_str("`~`"),
            Tok::Wedge => f.write_str("`/\\`"),
            Tok::Vee => f.write_str("`\\/`"),
            Tok::Amp => f.write_str("`&`"),
            Tok::Bar => f.write_str("`|`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::At => f.write_str("`@`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Underscore => f.write_str("`_`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

struct Lexed {
    tok: Tok,
    line: usize,
    column: usize,
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric()
}

fn lex(src: &str) -> Result<Vec<Lexed>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, column, message: String| ParseError {
        line,
        column,
        message,
    };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let two: String = chars[i..chars.len().min(i + 2)].iter().collect();
        let (tok, len) = match two.as_str() {
            "/\\" => (Tok::Wedge, 2),
            "\\/" => (Tok::Vee, 2),
            "->" => (Tok::Arrow, 2),
            _ => match c {
                '~' => (Tok::Not, 1),
                '&' => (Tok::Amp, 1),
                '|' => (Tok::Bar, 1),
                '@' => (Tok::At, 1),
                '(' => (Tok::LParen, 1),
                ')' => (Tok::RParen, 1),
                '{' => (Tok::LBrace, 1),
                '}' => (Tok::RBrace, 1),
                '=' => (Tok::Eq, 1),
                '_' => (Tok::Underscore, 1),
                '"' => {
                    let start = i + 1;
                    let mut j = start;
                    while j < chars.len() && chars[j] != '"' && chars[j] != '\n' {
                        j += 1;
                    }
                    if j >= chars.len() || chars[j] != '"' {
                        return Err(err(l0, c0, "unterminated quoted agent id".into()));
                    }
                    let s: String = chars[start..j].iter().collect();
                    (Tok::Quoted(s), j + 1 - i)
                }
                c if c.is_ascii_alphanumeric() => {
                    let mut j = i;
                    while j < chars.len() && is_ident_char(chars[j]) {
                        j += 1;
                    }
                    let s: String = chars[i..j].iter().collect();
                    let tok = if c.is_ascii_uppercase() {
                        Tok::Upper(s)
                    } else {
                        Tok::Lower(s)
                    };
                    (tok, j - i)
                }
                other => return Err(err(l0, c0, format!("unexpected character `{other}`"))),
            },
        };
        out.push(Lexed {
            tok,
            line: l0,
            column: c0,
        });
        i += len;
        col += len;
    }
    out.push(Lexed {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Lexed>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, message: impl Into<String>) -> ParseError {
        let l = &self.toks[self.pos];
        ParseError {
            line: l.line,
            column: l.column,
            message: message.into(),
        }
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.error_here(format!("expected {want}, found {}", self.peek())))
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let inner = self.implication()?;
        if *self.peek() != Tok::At {
            return Ok(inner);
        }
        self.bump();
        let at = self.pos;
        let id = match self.bump() {
            Tok::Lower(s) | Tok::Upper(s) | Tok::Quoted(s) => s,
            other => {
                self.pos = at;
                return Err(self.error_here(format!("expected agent id, found {other}")));
            }
        };
        let agent = AgentId::new(id).map_err(|e| {
            self.pos = at;
            self.error_here(e.to_string())
        })?;
        if !inner.agents().is_empty() {
            self.pos = at;
            return Err(self.error_here(
                "env-switching annotation: an annotated formula may not contain another annotation",
            ));
        }
        Ok(Formula::env(inner, agent))
    }

    fn implication(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.implication()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        self.level(
            Tok::Vee,
            Tok::Bar,
            Self::conjunction,
            Formula::or,
            Formula::Chor,
        )
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        self.level(
            Tok::Wedge,
            Tok::Amp,
            Self::unary,
            Formula::and,
            Formula::Chand,
        )
    }

    fn level(
        &mut self,
        binary: Tok,
        choice: Tok,
        operand: fn(&mut Self) -> Result<Formula, ParseError>,
        mk_binary: fn(Formula, Formula) -> Formula,
        mk_choice: fn(Vec<Formula>) -> Formula,
    ) -> Result<Formula, ParseError> {
        let first = operand(self)?;
        let op = self.peek().clone();
        if op != binary && op != choice {
            return Ok(first);
        }
        let mut items = vec![first];
        while *self.peek() == binary || *self.peek() == choice {
            if *self.peek() != op {
                return Err(self.error_here(format!(
                    "mixing {binary} and {choice} at one level requires parentheses"
                )));
            }
            self.bump();
            items.push(operand(self)?);
        }
        if op == choice {
            Ok(mk_choice(items))
        } else {
            Ok(Formula::conjoin_with(items, mk_binary))
        }
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Not => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Lower(name) => {
                self.bump();
                if *self.peek() == Tok::LBrace {
                    return Err(self.error_here("annotations are only allowed on general atoms"));
                }
                Ok(Formula::elementary(name))
            }
            Tok::Upper(name) => {
                self.bump();
                if (name == "T" || name == "F")
                    && !matches!(self.peek(), Tok::Underscore | Tok::LBrace)
                {
                    return Ok(if name == "T" {
                        Formula::True
                    } else {
                        Formula::False
                    });
                }
                if name == "T" || name == "F" {
                    return Err(self.error_here("`T` and `F` are reserved constants"));
                }
                let elementary = if *self.peek() == Tok::Underscore {
                    self.bump();
                    match self.bump() {
                        Tok::Lower(e) => Some(e),
                        other => {
                            self.pos -= 1;
                            return Err(self.error_here(format!(
                                "expected lowercase elementary component, found {other}"
                            )));
                        }
                    }
                } else {
                    None
                };
                let annotation = if *self.peek() == Tok::LBrace {
                    self.bump();
                    let kind = match self.bump() {
                        Tok::Lower(k) if k == "h" || k == "s" => k,
                        other => {
                            self.pos -= 1;
                            return Err(
                                self.error_here(format!("expected `h` or `s`, found {other}"))
                            );
                        }
                    };
                    self.expect(Tok::Eq)?;
                    let name = match self.bump() {
                        Tok::Lower(n) | Tok::Upper(n) => n,
                        other => {
                            self.pos -= 1;
                            return Err(
                                self.error_here(format!("expected strategy name, found {other}"))
                            );
                        }
                    };
                    self.expect(Tok::RBrace)?;
                    if kind == "h" {
                        Annotation::Heuristic(name)
                    } else {
                        Annotation::Script(name)
                    }
                } else {
                    Annotation::None
                };
                Ok(Formula::Atom(match elementary {
                    Some(elementary) => Atom::Hybrid {
                        general: name,
                        elementary,
                        annotation,
                    },
                    None => Atom::General { name, annotation },
                }))
            }
            other => Err(self.error_here(format!("expected a formula, found {other}"))),
        }
    }
}

impl Formula {
    fn conjoin_with(items: Vec<Formula>, mk: fn(Formula, Formula) -> Formula) -> Formula {
        let mut it = items.into_iter();
        let first = it.next().expect("nonempty operand list");
        it.fold(first, mk)
    }
}

/// Parses one formula; the whole input must be consumed.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let f = p.formula()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error_here(format!("unexpected {}", p.peek())));
    }
    Ok(f)
}

// Binding strength used by the printer: larger binds tighter.
const P_ENV: u8 = 0;
const P_IMPL: u8 = 1;
const P_OR: u8 = 2;
const P_AND: u8 = 3;
const P_UNARY: u8 = 4;

fn prec(f: &Formula) -> u8 {
    match f {
        Formula::Env(..) => P_ENV,
        Formula::Implies(..) => P_IMPL,
        Formula::Or(..) | Formula::Chor(_) => P_OR,
        Formula::And(..) | Formula::Chand(_) => P_AND,
        _ => P_UNARY,
    }
}

fn agent_text(a: &AgentId) -> String {
    let s = a.as_str();
    if s.chars().all(|c| c.is_ascii_alphanumeric()) {
        s.to_string()
    } else {
        format!("\"{s}\"")
    }
}

fn annotation_text(a: &Annotation) -> String {
    match a {
        Annotation::None => String::new(),
        Annotation::Heuristic(n) => format!("{{h={n}}}"),
        Annotation::Script(n) => format!("{{s={n}}}"),
    }
}

fn wrap(out: &mut String, f: &Formula, parens: bool) {
    if parens {
        out.push('(');
        write_formula(out, f);
        out.push(')');
    } else {
        write_formula(out, f);
    }
}

fn write_formula(out: &mut String, f: &Formula) {
    match f {
        Formula::True => out.push('T'),
        Formula::False => out.push('F'),
        Formula::Atom(Atom::Elementary(n)) => out.push_str(n),
        Formula::Atom(Atom::General { name, annotation }) => {
            out.push_str(name);
            out.push_str(&annotation_text(annotation));
        }
        Formula::Atom(Atom::Hybrid {
            general,
            elementary,
            annotation,
        }) => {
            out.push_str(general);
            out.push('_');
            out.push_str(elementary);
            out.push_str(&annotation_text(annotation));
        }
        Formula::Not(g) => {
            out.push('~');
            wrap(out, g, prec(g) < P_UNARY);
        }
        Formula::Env(g, w) => {
            // implications read unambiguously before `@`; other connectives get parentheses
            wrap(
                out,
                g,
                !matches!(**g, Formula::Implies(..)) && prec(g) < P_UNARY,
            );
            out.push_str(" @ ");
            out.push_str(&agent_text(w));
        }
        Formula::Implies(a, b) => {
            // operands other than atoms and negations are always parenthesised
            wrap(out, a, prec(a) < P_UNARY);
            out.push_str(" -> ");
            wrap(out, b, prec(b) < P_UNARY);
        }
        Formula::And(a, b) | Formula::Or(a, b) => {
            let (level, op) = if matches!(f, Formula::And(..)) {
                (P_AND, " /\\ ")
            } else {
                (P_OR, " \\/ ")
            };
            // left-associated chains print without parentheses
            let same_left = std::mem::discriminant(&**a) == std::mem::discriminant(f);
            wrap(out, a, !same_left && prec(a) <= level);
            out.push_str(op);
            wrap(out, b, prec(b) <= level);
        }
        Formula::Chand(gs) | Formula::Chor(gs) => {
            let (level, op) = if matches!(f, Formula::Chand(_)) {
                (P_AND, " & ")
            } else {
                (P_OR, " | ")
            };
            for (i, g) in gs.iter().enumerate() {
                if i > 0 {
                    out.push_str(op);
                }
                wrap(out, g, prec(g) <= level);
            }
        }
    }
}

/// Canonical text; [`parse_formula`] reads it back to an identical tree.
pub fn print_formula(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(&mut out, f);
    out
}
