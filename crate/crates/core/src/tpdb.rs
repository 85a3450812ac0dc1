//! Reader and writer for the plain (old-style) TPDB format:
//!
//! ```text
//! (VAR x y)
//! (RULES
//!   hd(:(x,y)) -> x
//! )
//! ```
//!
//! `(COMMENT ...)` sections are skipped, as are other sections this tool has
//! no use for (e.g. `STRATEGY`). Equational `THEORY` sections and
//! conditional rules are rejected.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use crate::rewriting::{Trs, TrsError};
use crate::term::{Name, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("{0}")]
    Trs(#[from] TrsError),
}

#[derive(Debug, Clone)]
pub struct ParsedProblem {
    pub trs: Trs,
    pub source_name: String,
    pub declared_variables: BTreeSet<Name>,
}

pub fn parse_trs(text: &str) -> Result<ParsedProblem, ParseError> {
    parse_named(text, "<input>")
}

pub fn parse_named(text: &str, source_name: &str) -> Result<ParsedProblem, ParseError> {
    let mut p = Parser::new(text);
    let mut vars: BTreeSet<Name> = BTreeSet::new();
    let mut raw_rules: Vec<(usize, usize, RawTerm, RawTerm)> = Vec::new();
    loop {
        p.skip_ws();
        if p.eof() {
            break;
        }
        p.expect('(')?;
        p.skip_ws();
        let (line, col) = p.here();
        let section = p.ident()?;
        match section.as_str() {
            "VAR" => loop {
                p.skip_ws();
                if p.eat(')') {
                    break;
                }
                vars.insert(Arc::from(p.ident()?.as_str()));
            },
            "RULES" => loop {
                p.skip_ws();
                if p.eat(')') {
                    break;
                }
                if p.eat(',') {
                    continue;
                }
                let (line, col) = p.here();
                let lhs = p.raw_term()?;
                p.skip_ws();
                if !p.eat_str("->") {
                    return Err(p.error("expected `->`"));
                }
                let rhs = p.raw_term()?;
                p.skip_ws();
                if p.peek() == Some('|') {
                    return Err(p.error("conditional rules are not supported"));
                }
                raw_rules.push((line, col, lhs, rhs));
            },
            "THEORY" => {
                return Err(ParseError::Syntax { line, col, message: "THEORY sections are not supported".into() })
            }
            _ => p.skip_balanced()?,
        }
    }
    let mut rules = Vec::with_capacity(raw_rules.len());
    for (line, col, l, r) in raw_rules {
        let lhs = l.resolve(&vars).map_err(|message| ParseError::Syntax { line, col, message })?;
        let rhs = r.resolve(&vars).map_err(|message| ParseError::Syntax { line, col, message })?;
        rules.push((lhs, rhs));
    }
    let trs = Trs::new(rules)?;
    Ok(ParsedProblem { trs, source_name: source_name.to_string(), declared_variables: vars })
}

/// Parses a single term; identifiers in `vars` are variables.
pub fn parse_term(text: &str, vars: &[&str]) -> Result<Term, ParseError> {
    let mut p = Parser::new(text);
    let raw = p.raw_term()?;
    p.skip_ws();
    if !p.eof() {
        return Err(p.error("trailing input after term"));
    }
    let vars: BTreeSet<Name> = vars.iter().map(|v| Arc::from(*v)).collect();
    raw.resolve(&vars).map_err(|message| ParseError::Syntax { line: 1, col: 1, message })
}

/// Writes a system in the format read by [`parse_trs`].
pub fn format_trs(trs: &Trs) -> String {
    let mut vars = BTreeSet::new();
    for r in trs.rules() {
        vars.extend(r.vars());
    }
    let mut out = String::new();
    if !vars.is_empty() {
        out.push_str("(VAR");
        for v in &vars {
            let _ = write!(out, " {v}");
        }
        out.push_str(")\n");
    }
    out.push_str("(RULES\n");
    for r in trs.rules() {
        let _ = writeln!(out, "  {r}");
    }
    out.push_str(")\n");
    out
}

#[derive(Debug, Clone)]
struct RawTerm {
    name: String,
    args: Option<Vec<RawTerm>>,
}

impl RawTerm {
    fn resolve(&self, vars: &BTreeSet<Name>) -> Result<Term, String> {
        if vars.contains(self.name.as_str()) {
            return match &self.args {
                None => Ok(Term::Var(Arc::from(self.name.as_str()))),
                Some(_) => Err(format!("variable {} applied to arguments", self.name)),
            };
        }
        let args = match &self.args {
            None => Vec::new(),
            Some(a) => a.iter().map(|t| t.resolve(vars)).collect::<Result<_, _>>()?,
        };
        Ok(Term::App(Arc::from(self.name.as_str()), args))
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn new(src: &str) -> Self {
        Parser { chars: src.chars().collect(), pos: 0 }
    }

    fn eof(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn here(&self) -> (usize, usize) {
        let mut line = 1;
        let mut col = 1;
        for &c in &self.chars[..self.pos.min(self.chars.len())] {
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        }
        (line, col)
    }

    fn error(&self, message: &str) -> ParseError {
        let (line, col) = self.here();
        ParseError::Syntax { line, col, message: message.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_str(&mut self, s: &str) -> bool {
        let n = s.chars().count();
        if self.pos + n <= self.chars.len() && self.chars[self.pos..self.pos + n].iter().copied().eq(s.chars()) {
            self.pos += n;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{c}`")))
        }
    }

    fn at_arrow(&self) -> bool {
        self.chars.get(self.pos) == Some(&'-') && self.chars.get(self.pos + 1) == Some(&'>')
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_whitespace() || matches!(c, '(' | ')' | ',' | '|') || self.at_arrow() {
                break;
            }
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.error("expected an identifier"));
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    fn raw_term(&mut self) -> Result<RawTerm, ParseError> {
        self.skip_ws();
        let name = self.ident()?;
        self.skip_ws();
        if !self.eat('(') {
            return Ok(RawTerm { name, args: None });
        }
        let mut args = Vec::new();
        self.skip_ws();
        if self.eat(')') {
            return Ok(RawTerm { name, args: Some(args) });
        }
        loop {
            args.push(self.raw_term()?);
            self.skip_ws();
            if self.eat(')') {
                break;
            }
            self.expect(',')?;
        }
        Ok(RawTerm { name, args: Some(args) })
    }

    /// Skips to the `)` closing the current section.
    fn skip_balanced(&mut self) -> Result<(), ParseError> {
        let mut depth = 1usize;
        while let Some(c) = self.peek() {
            self.pos += 1;
            match c {
                '(' => depth += 1,
                ')' => {
                    depth -= 1;
                    if depth == 0 {
                        return Ok(());
                    }
                }
                _ => {}
            }
        }
        Err(self.error("unterminated section"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn parses_minimal_problem() {
        let p = parse_trs("(VAR x y)(RULES hd(:(x,y)) -> x)").unwrap();
        assert_eq!(p.trs.len(), 1);
        let sig = p.trs.signature();
        assert_eq!(sig.get("hd"), Some(&1));
        assert_eq!(sig.get(":"), Some(&2));
        assert_eq!(p.declared_variables.len(), 2);
    }

    #[test]
    fn parses_stream_system_in_file_order() {
        let r = fixtures::streams();
        assert_eq!(r.len(), 5);
        let idx: Vec<usize> = r.rules().iter().map(|r| r.index).collect();
        assert_eq!(idx, vec![0, 1, 2, 3, 4]);
        assert_eq!(r.rules()[4].to_string(), "inc(tl(nat)) -> tl(inc(nat))");
    }

    #[test]
    fn rejects_variable_lhs() {
        assert_eq!(
            parse_trs("(VAR x)(RULES x -> a)").unwrap_err(),
            ParseError::Trs(TrsError::VariableLhs { rule: 0 })
        );
    }

    #[test]
    fn rejects_extra_variables_and_arity_clash() {
        assert!(matches!(
            parse_trs("(VAR x y)(RULES f(x) -> y)").unwrap_err(),
            ParseError::Trs(TrsError::ExtraVariable { rule: 0, .. })
        ));
        assert!(matches!(
            parse_trs("(VAR x)(RULES a -> b f(x) -> f(x,x))").unwrap_err(),
            ParseError::Trs(TrsError::ArityClash { rule: 1, .. })
        ));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match parse_trs("(RULES\n  f(a -> b)").unwrap_err() {
            ParseError::Syntax { line, .. } => assert_eq!(line, 2),
            e => panic!("unexpected {e}"),
        }
        assert!(parse_trs("(RULES a b)").is_err());
        assert!(parse_trs("(RULES a -> b").is_err());
        assert!(parse_trs("(THEORY (AC f))(RULES a -> b)").is_err());
        assert!(parse_trs("(VAR x)(RULES x(a) -> a)").is_err());
    }

    #[test]
    fn comments_and_unknown_sections_are_skipped() {
        let p = parse_trs("(COMMENT a (nested) comment -> with arrows)\n(STRATEGY INNERMOST)\n(RULES a -> b)").unwrap();
        assert_eq!(p.trs.len(), 1);
    }

    #[test]
    fn arrows_without_spaces() {
        let p = parse_trs("(RULES a->b f(a)->c)").unwrap();
        assert_eq!(p.trs.len(), 2);
        assert_eq!(p.trs.rules()[1].to_string(), "f(a) -> c");
    }

    #[test]
    fn format_round_trips() {
        for name in ["streams", "streams_d", "f_aa", "fgh", "cps_prime", "nonlinear_fx"] {
            let original = parse_trs(fixtures::source(name).unwrap()).unwrap().trs;
            let again = parse_trs(&format_trs(&original)).unwrap().trs;
            assert_eq!(original, again, "{name}");
        }
    }

    #[test]
    fn parse_single_terms() {
        let t = parse_term("f(x, g(a))", &["x"]).unwrap();
        assert_eq!(t.to_string(), "f(x,g(a))");
        assert!(parse_term("f(x", &["x"]).is_err());
        assert!(parse_term("f(x) y", &["x"]).is_err());
        assert_eq!(parse_term("a()", &[]).unwrap(), Term::constant("a"));
    }
}
