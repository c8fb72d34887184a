//! Parser and printer for `.bpi` files.
//!
//! ```text
//! system := sum ("||" sum)*
//! sum    := prefix ("+" prefix)*
//! prefix := "nil" | "tau" "." prefix | a "(" x, .. ")" "." prefix
//!         | a "<" y, .. ">" ["." prefix] | "(" "rec" A ["<" x, .. ">"] "." sum ")" ["<" y, .. ">"]
//!         | A ["<" y, .. ">"] | "(" sum ")"
//! ```

use super::lexer::{tokenize, Cursor, Tok};
use super::ParseError;
use crate::bpi::{Bpi, BpiName, BpiProgram};

struct Parser {
    cur: Cursor,
    scope: Vec<String>,
    recs: Vec<String>,
}

const KEYWORDS: [&str; 3] = ["nil", "tau", "rec"];

impl Parser {
    fn ident(&mut self) -> Result<String, ParseError> {
        match self.cur.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.cur.next();
                Ok(s)
            }
            _ => Err(self.cur.expected("a name")),
        }
    }

    fn name(&mut self) -> Result<BpiName, ParseError> {
        let s = self.ident()?;
        Ok(if self.scope.contains(&s) { BpiName::Var(s) } else { BpiName::Chan(s) })
    }

    fn list<T>(
        &mut self,
        open: &Tok,
        close: &Tok,
        mut item: impl FnMut(&mut Self) -> Result<T, ParseError>,
    ) -> Result<Vec<T>, ParseError> {
        self.cur.expect(open)?;
        let mut out = Vec::new();
        if self.cur.eat(close) {
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            if self.cur.eat(close) {
                return Ok(out);
            }
            self.cur.expect(&Tok::Comma)?;
        }
    }

    fn system(&mut self) -> Result<Vec<Bpi>, ParseError> {
        let mut out = vec![self.sum()?];
        while self.cur.eat(&Tok::BarBar) {
            out.push(self.sum()?);
        }
        Ok(out)
    }

    fn sum(&mut self) -> Result<Bpi, ParseError> {
        let mut p = self.prefix()?;
        while self.cur.eat(&Tok::Plus) {
            let q = self.prefix()?;
            p = Bpi::sum(p, q);
        }
        Ok(p)
    }

    fn bind<T>(&mut self, names: &[String], f: impl FnOnce(&mut Self) -> Result<T, ParseError>) -> Result<T, ParseError> {
        let depth = self.scope.len();
        self.scope.extend(names.iter().cloned());
        let r = f(self);
        self.scope.truncate(depth);
        r
    }

    fn prefix(&mut self) -> Result<Bpi, ParseError> {
        if self.cur.eat_ident("nil") {
            return Ok(Bpi::Nil);
        }
        if self.cur.eat_ident("tau") {
            self.cur.expect(&Tok::Dot)?;
            return Ok(Bpi::Tau(Box::new(self.prefix()?)));
        }
        if self.cur.eat(&Tok::LParen) {
            if self.cur.eat_ident("rec") {
                let name = self.ident()?;
                let params = if self.cur.at(&Tok::Lt) {
                    self.list(&Tok::Lt, &Tok::Gt, Self::ident)?
                } else {
                    Vec::new()
                };
                self.cur.expect(&Tok::Dot)?;
                self.recs.push(name.clone());
                let body = self.bind(&params, Self::sum);
                self.recs.pop();
                let body = body?;
                self.cur.expect(&Tok::RParen)?;
                let args = if self.cur.at(&Tok::Lt) { self.list(&Tok::Lt, &Tok::Gt, Self::name)? } else { Vec::new() };
                return Ok(Bpi::Rec { name, params, body: Box::new(body), args });
            }
            let p = self.sum()?;
            self.cur.expect(&Tok::RParen)?;
            return Ok(p);
        }
        let first = self.ident()?;
        if self.recs.contains(&first) && !self.scope.contains(&first) {
            let args = if self.cur.at(&Tok::Lt) { self.list(&Tok::Lt, &Tok::Gt, Self::name)? } else { Vec::new() };
            return Ok(Bpi::Call { name: first, args });
        }
        let chan = if self.scope.contains(&first) { BpiName::Var(first) } else { BpiName::Chan(first) };
        match self.cur.peek() {
            Tok::LParen => {
                let params = self.list(&Tok::LParen, &Tok::RParen, Self::ident)?;
                for (i, x) in params.iter().enumerate() {
                    if params[..i].contains(x) {
                        return Err(self.cur.error(format!("`{x}` bound twice")));
                    }
                }
                self.cur.expect(&Tok::Dot)?;
                let cont = self.bind(&params, Self::prefix)?;
                Ok(Bpi::Input { chan, params, cont: Box::new(cont) })
            }
            Tok::Lt => {
                let args = self.list(&Tok::Lt, &Tok::Gt, Self::name)?;
                let cont = if self.cur.eat(&Tok::Dot) { self.prefix()? } else { Bpi::Nil };
                Ok(Bpi::Output { chan, args, cont: Box::new(cont) })
            }
            _ => Err(self.cur.expected("`(` or `<` after a channel")),
        }
    }
}

/// Parses a `.bpi` term and lifts its recursion into definitions.
pub fn parse_bpi(src: &str) -> Result<BpiProgram, ParseError> {
    let mut p = Parser { cur: Cursor::new(tokenize(src)?), scope: Vec::new(), recs: Vec::new() };
    let terms = match p.system() {
        Ok(t) => t,
        Err(e) => return Err(p.cur.best_error(e)),
    };
    if !p.cur.at(&Tok::Eof) {
        let e = p.cur.expected("`||`, `+` or end of input");
        return Err(p.cur.best_error(e));
    }
    BpiProgram::new(terms).map_err(|e| ParseError { line: 1, col: 1, message: e.to_string() })
}

fn names_text(ns: &[BpiName]) -> String {
    ns.iter().map(BpiName::text).collect::<Vec<_>>().join(", ")
}

/// Concrete syntax of a bπ term.
pub fn bpi_text(t: &Bpi) -> String {
    sum_text(t)
}

fn sum_text(t: &Bpi) -> String {
    match t {
        Bpi::Sum(p, q) => {
            let right = if matches!(**q, Bpi::Sum(..)) { format!("({})", sum_text(q)) } else { sum_text(q) };
            format!("{} + {}", sum_text(p), right)
        }
        other => prefix_text(other),
    }
}

fn prefix_text(t: &Bpi) -> String {
    match t {
        Bpi::Nil => "nil".into(),
        Bpi::Tau(p) => format!("tau.{}", prefix_text(p)),
        Bpi::Input { chan, params, cont } => format!("{}({}).{}", chan.text(), params.join(", "), prefix_text(cont)),
        Bpi::Output { chan, args, cont } => format!("{}<{}>.{}", chan.text(), names_text(args), prefix_text(cont)),
        Bpi::Sum(..) => format!("({})", sum_text(t)),
        Bpi::Rec { name, params, body, args } => {
            let params = if params.is_empty() { String::new() } else { format!("<{}>", params.join(", ")) };
            let args = if args.is_empty() { String::new() } else { format!("<{}>", names_text(args)) };
            format!("(rec {name}{params}. {}){args}", sum_text(body))
        }
        Bpi::Call { name, args } if args.is_empty() => name.clone(),
        Bpi::Call { name, args } => format!("{name}<{}>", names_text(args)),
    }
}

pub fn program_text(p: &BpiProgram) -> String {
    p.source.iter().map(bpi_text).collect::<Vec<_>>().join(" || ")
}
