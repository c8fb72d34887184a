//! Recursive-descent parser for `.abc` model files.

use std::collections::BTreeMap;

use super::lexer::{tokenize, Cursor, Tok};
use super::ParseError;
use crate::predicates::{close, ClosedPredicate};
use crate::semantics::Message;
use crate::terms::{
    AttributeEnv, Component, Defs, Expr, Interface, Op, Predicate, Process, Rel, RestrictionFn, Update, Value,
};

/// Everything declared in a model file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AbcFile {
    pub defs: Defs,
    pub components: BTreeMap<String, Component>,
    pub functions: BTreeMap<String, RestrictionFn>,
    pub systems: BTreeMap<String, Component>,
    /// The anonymous `system ...;` item, if any.
    pub main: Option<Component>,
    pub universe: Vec<Message>,
}

impl AbcFile {
    /// Resolves a system by name (systems first, then components). Without
    /// a name: the anonymous system, else the only named system, else the
    /// only component.
    pub fn system(&self, name: Option<&str>) -> Option<&Component> {
        match name {
            Some(n) => self.systems.get(n).or_else(|| self.components.get(n)),
            None => self.main.as_ref().or_else(|| {
                if self.systems.len() == 1 {
                    self.systems.values().next()
                } else if self.systems.is_empty() && self.components.len() == 1 {
                    self.components.values().next()
                } else {
                    None
                }
            }),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum PredMode {
    /// Inside a process: `this.a` and variables allowed.
    Process,
    /// Restriction function: `msg[i]` and `snd.a` allowed.
    Template,
    /// Universe entries and standalone closed predicates.
    Closed,
}

struct Parser {
    cur: Cursor,
    scope: Vec<String>,
    file: AbcFile,
    def_locations: Vec<(String, usize, usize)>,
    system_locations: Vec<(Component, usize, usize)>,
}

fn keyword_function(name: &str) -> Option<Op> {
    Op::from_function_name(name)
}

impl Parser {
    fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Parser { cur: Cursor::new(tokenize(src)?), scope: Vec::new(), file: AbcFile::default(), def_locations: Vec::new(), system_locations: Vec::new() })
    }

    fn fail<T>(&mut self, e: ParseError) -> Result<T, ParseError> {
        Err(self.cur.best_error(e))
    }

    // ----- values -------------------------------------------------------

    fn value(&mut self) -> Result<Value, ParseError> {
        match self.cur.peek().clone() {
            Tok::Int(n) => {
                self.cur.next();
                Ok(Value::Int(n))
            }
            Tok::Minus => {
                self.cur.next();
                match self.cur.next() {
                    Tok::Int(n) => Ok(Value::Int(-n)),
                    _ => Err(self.cur.expected("an integer after `-`")),
                }
            }
            Tok::Str(s) => {
                self.cur.next();
                Ok(Value::Name(s))
            }
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.cur.next();
                Ok(Value::Bool(s == "true"))
            }
            Tok::LBracket => {
                self.cur.next();
                let items = self.list(&Tok::RBracket, Self::value)?;
                Ok(Value::Tuple(items))
            }
            Tok::LBrace => {
                self.cur.next();
                let items = self.list(&Tok::RBrace, Self::value)?;
                Ok(Value::set(items))
            }
            _ => Err(self.cur.expected("a value")),
        }
    }

    /// Comma separated items up to and including `close`.
    fn list<T>(&mut self, close: &Tok, mut item: impl FnMut(&mut Self) -> Result<T, ParseError>) -> Result<Vec<T>, ParseError> {
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

    fn env(&mut self) -> Result<AttributeEnv, ParseError> {
        self.cur.expect(&Tok::LBrace)?;
        let pairs = self.list(&Tok::RBrace, |p| {
            let a = p.cur.expect_ident()?;
            p.cur.expect(&Tok::Eq)?;
            let v = p.value()?;
            Ok((a, v))
        })?;
        Ok(pairs.into_iter().collect())
    }

    // ----- expressions --------------------------------------------------

    fn expr(&mut self, mode: PredMode) -> Result<Expr, ParseError> {
        let mut lhs = self.term(mode)?;
        loop {
            let op = match self.cur.peek() {
                Tok::Plus => Op::Add,
                Tok::Minus => Op::Sub,
                _ => return Ok(lhs),
            };
            self.cur.next();
            let rhs = self.term(mode)?;
            lhs = Expr::Op(op, vec![lhs, rhs]);
        }
    }

    fn term(&mut self, mode: PredMode) -> Result<Expr, ParseError> {
        let mut lhs = self.factor(mode)?;
        while self.cur.eat(&Tok::Star) {
            let rhs = self.factor(mode)?;
            lhs = Expr::Op(Op::Mul, vec![lhs, rhs]);
        }
        Ok(lhs)
    }

    fn factor(&mut self, mode: PredMode) -> Result<Expr, ParseError> {
        match self.cur.peek().clone() {
            Tok::Int(_) | Tok::Minus | Tok::Str(_) | Tok::LBracket | Tok::LBrace => Ok(Expr::Const(self.value()?)),
            Tok::LParen => {
                self.cur.next();
                let e = self.expr(mode)?;
                self.cur.expect(&Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "true" | "false" => Ok(Expr::Const(self.value()?)),
                "this" => {
                    if mode == PredMode::Template {
                        return Err(self.cur.error("`this` is not available in restriction functions"));
                    }
                    if mode == PredMode::Closed {
                        return Err(self.cur.error("`this` is not available in closed predicates"));
                    }
                    self.cur.next();
                    self.cur.expect(&Tok::Dot)?;
                    Ok(Expr::This(self.cur.expect_ident()?))
                }
                "msg" if mode == PredMode::Template => {
                    self.cur.next();
                    self.cur.expect(&Tok::LBracket)?;
                    let i = match self.cur.next() {
                        Tok::Int(i) if i >= 0 => i as usize,
                        _ => return Err(self.cur.expected("a message index")),
                    };
                    self.cur.expect(&Tok::RBracket)?;
                    Ok(Expr::Msg(i))
                }
                "snd" if mode == PredMode::Template => {
                    self.cur.next();
                    self.cur.expect(&Tok::Dot)?;
                    Ok(Expr::Snd(self.cur.expect_ident()?))
                }
                _ if self.cur.peek_at(1) == &Tok::LParen => {
                    let Some(op) = keyword_function(&name) else {
                        return Err(self.cur.error(format!("unknown operator `{name}`")));
                    };
                    self.cur.next();
                    self.cur.next();
                    let args = self.list(&Tok::RParen, |p| p.expr(mode))?;
                    if let Some(n) = op.arity() {
                        if args.len() != n {
                            return Err(self.cur.error(format!("`{name}` takes {n} arguments, got {}", args.len())));
                        }
                    }
                    Ok(Expr::Op(op, args))
                }
                _ => {
                    self.cur.next();
                    if self.scope.contains(&name) {
                        Ok(Expr::Var(name))
                    } else {
                        Ok(Expr::Attr(name))
                    }
                }
            },
            _ => Err(self.cur.expected("an expression")),
        }
    }

    // ----- predicates ---------------------------------------------------

    fn pred(&mut self, mode: PredMode, no_gt: bool) -> Result<Predicate, ParseError> {
        let mut lhs = self.conj(mode, no_gt)?;
        while self.cur.eat(&Tok::BarBar) {
            let rhs = self.conj(mode, no_gt)?;
            lhs = Predicate::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conj(&mut self, mode: PredMode, no_gt: bool) -> Result<Predicate, ParseError> {
        let mut lhs = self.unary(mode, no_gt)?;
        while self.cur.eat(&Tok::AndAnd) {
            let rhs = self.unary(mode, no_gt)?;
            lhs = Predicate::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self, mode: PredMode, no_gt: bool) -> Result<Predicate, ParseError> {
        if self.cur.eat(&Tok::Bang) {
            return Ok(Predicate::negate(self.unary(mode, no_gt)?));
        }
        if self.cur.at_ident("tt") {
            self.cur.next();
            return Ok(Predicate::True);
        }
        if self.cur.at_ident("ff") {
            self.cur.next();
            return Ok(Predicate::False);
        }
        if self.cur.at(&Tok::LParen) {
            if let Ok(p) = self.cur_attempt(|s| s.atom(mode, no_gt)) {
                return Ok(p);
            }
            self.cur.next();
            let p = self.pred(mode, false)?;
            self.cur.expect(&Tok::RParen)?;
            return Ok(p);
        }
        self.atom(mode, no_gt)
    }

    fn atom(&mut self, mode: PredMode, no_gt: bool) -> Result<Predicate, ParseError> {
        let lhs = self.expr(mode)?;
        let rel = match self.cur.peek() {
            Tok::EqEq => Rel::Eq,
            Tok::Ne => Rel::Ne,
            Tok::Lt => Rel::Lt,
            Tok::Le => Rel::Le,
            Tok::Gt if !no_gt => Rel::Gt,
            Tok::Ge => Rel::Ge,
            Tok::Ident(s) if s == "in" => Rel::In,
            _ => return Err(self.cur.expected("a relation (`==`, `!=`, `<`, `<=`, `>`, `>=`, `in`)")),
        };
        self.cur.next();
        let rhs = self.expr(mode)?;
        Ok(Predicate::Atom(rel, lhs, rhs))
    }

    /// `tt`, `ff` or a parenthesised predicate.
    fn pred_atom(&mut self, mode: PredMode) -> Result<Predicate, ParseError> {
        if self.cur.eat_ident("tt") {
            return Ok(Predicate::True);
        }
        if self.cur.eat_ident("ff") {
            return Ok(Predicate::False);
        }
        self.cur.expect(&Tok::LParen)?;
        let p = self.pred(mode, false)?;
        self.cur.expect(&Tok::RParen)?;
        Ok(p)
    }

    fn check_pred(&mut self, p: &Predicate) -> Result<(), ParseError> {
        if p.any_expr(&|e| e.has_attr_under_op(false)) {
            return Err(self.cur.error("attributes of the partner cannot appear inside operator applications"));
        }
        Ok(())
    }

    // ----- processes ----------------------------------------------------

    fn process(&mut self) -> Result<Process, ParseError> {
        let mut p = self.par_proc()?;
        while self.cur.eat(&Tok::Plus) {
            let q = self.par_proc()?;
            p = Process::choice(p, q);
        }
        Ok(p)
    }

    fn par_proc(&mut self) -> Result<Process, ParseError> {
        let mut p = self.prefixed()?;
        while self.cur.eat(&Tok::Bar) {
            let q = self.prefixed()?;
            p = Process::par(p, q);
        }
        Ok(p)
    }

    fn updates(&mut self) -> Result<Vec<Update>, ParseError> {
        let mut out = Vec::new();
        while self.cur.eat(&Tok::LBracket) {
            if self.cur.eat_ident("this") {
                self.cur.expect(&Tok::Dot)?;
            }
            let a = self.cur.expect_ident()?;
            self.cur.expect(&Tok::Assign)?;
            let e = self.expr(PredMode::Process)?;
            self.cur.expect(&Tok::RBracket)?;
            out.push(Update::new(a, e));
        }
        Ok(out)
    }

    fn prefixed(&mut self) -> Result<Process, ParseError> {
        match self.cur.peek().clone() {
            Tok::Int(0) => {
                self.cur.next();
                Ok(Process::Nil)
            }
            Tok::Lt => {
                self.cur.next();
                let g = self.pred(PredMode::Process, true)?;
                self.check_pred(&g)?;
                self.cur.expect(&Tok::Gt)?;
                let p = self.prefixed()?;
                Ok(Process::aware(g, p))
            }
            Tok::Bang => {
                let pred = self.unary(PredMode::Process, false)?;
                if !self.cur.at(&Tok::LParen) {
                    return Err(self.cur.expected("`(` starting the received variables"));
                }
                self.input_rest(pred)
            }
            Tok::Ident(s) if (s == "tt" || s == "ff") && self.cur.peek_at(1) == &Tok::LParen => {
                let pred = if s == "tt" { Predicate::True } else { Predicate::False };
                self.cur.next();
                self.input_rest(pred)
            }
            Tok::Ident(name) => {
                self.cur.next();
                let args = if self.cur.eat(&Tok::LParen) {
                    self.list(&Tok::RParen, |p| p.expr(PredMode::Process))?
                } else {
                    Vec::new()
                };
                Ok(Process::Call(name, args))
            }
            Tok::LParen => {
                let start = self.cur.pos;
                if let Ok(p) = self.cur_attempt(Self::output) {
                    return Ok(p);
                }
                if let Ok(p) = self.cur_attempt(|s| {
                    s.cur.next();
                    let pred = s.pred(PredMode::Process, false)?;
                    s.cur.expect(&Tok::RParen)?;
                    if !s.cur.at(&Tok::LParen) {
                        return Err(s.cur.expected("`(` starting the received variables"));
                    }
                    s.input_rest(pred)
                }) {
                    return Ok(p);
                }
                self.cur.pos = start;
                let r = self.cur_attempt(|s| {
                    s.cur.next();
                    let p = s.process()?;
                    s.cur.expect(&Tok::RParen)?;
                    Ok(p)
                });
                match r {
                    Ok(p) => Ok(p),
                    Err(e) => self.fail(e),
                }
            }
            _ => {
                let e = self.cur.expected("a process");
                self.fail(e)
            }
        }
    }

    fn cur_attempt<T>(&mut self, f: impl FnOnce(&mut Self) -> Result<T, ParseError>) -> Result<T, ParseError> {
        let saved = self.cur.pos;
        let r = f(self);
        if r.is_err() {
            self.cur.pos = saved;
        }
        r
    }

    fn output(&mut self) -> Result<Process, ParseError> {
        self.cur.expect(&Tok::LParen)?;
        let args = self.list(&Tok::RParen, |p| p.expr(PredMode::Process))?;
        self.cur.expect(&Tok::At)?;
        let pred = self.pred_atom(PredMode::Process)?;
        self.check_pred(&pred)?;
        self.cur.expect(&Tok::Dot)?;
        let updates = self.updates()?;
        let cont = self.prefixed()?;
        Ok(Process::Output { args, pred, updates, cont: Box::new(cont) })
    }

    /// Binder list, updates and continuation of an input prefix whose
    /// predicate has been read already.
    fn input_rest(&mut self, pred: Predicate) -> Result<Process, ParseError> {
        self.cur.expect(&Tok::LParen)?;
        let vars = self.list(&Tok::RParen, |p| p.cur.expect_ident())?;
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].contains(v) {
                return Err(self.cur.error(format!("variable `{v}` bound twice")));
            }
        }
        let pred = bind_vars(&pred, &vars);
        self.check_pred(&pred)?;
        self.cur.expect(&Tok::Dot)?;
        let depth = self.scope.len();
        self.scope.extend(vars.iter().cloned());
        let r = (|| {
            let updates = self.updates()?;
            let cont = self.prefixed()?;
            Ok((updates, cont))
        })();
        self.scope.truncate(depth);
        let (updates, cont) = r?;
        Ok(Process::Input { pred, vars, updates, cont: Box::new(cont) })
    }

    // ----- components and systems ---------------------------------------

    fn comp_body(&mut self) -> Result<Component, ParseError> {
        self.cur.expect(&Tok::LBrace)?;
        let mut iface = Interface::new();
        let mut env = AttributeEnv::new();
        let mut run = None;
        while !self.cur.eat(&Tok::RBrace) {
            let field = self.cur.expect_ident()?;
            self.cur.expect(&Tok::Colon)?;
            match field.as_str() {
                "iface" => {
                    self.cur.expect(&Tok::LBracket)?;
                    iface = self.list(&Tok::RBracket, |p| p.cur.expect_ident())?.into_iter().collect();
                }
                "env" => env = self.env()?,
                "run" => run = Some(self.process()?),
                other => return Err(self.cur.error(format!("unknown component field `{other}`"))),
            }
            if !self.cur.eat(&Tok::Semi) && !self.cur.at(&Tok::RBrace) {
                return Err(self.cur.expected("`;` or `}`"));
            }
        }
        let Some(proc) = run else {
            return Err(self.cur.error("component has no `run` field"));
        };
        Ok(Component::Leaf { env, iface, proc })
    }

    fn system(&mut self) -> Result<Component, ParseError> {
        let mut c = self.system_atom()?;
        while self.cur.eat(&Tok::BarBar) {
            let d = self.system_atom()?;
            c = Component::par(c, d);
        }
        Ok(c)
    }

    fn restriction_arg(&mut self) -> Result<RestrictionFn, ParseError> {
        self.cur.expect(&Tok::LParen)?;
        if let Tok::Ident(name) = self.cur.peek().clone() {
            if self.cur.peek_at(1) == &Tok::RParen {
                if let Some(f) = self.file.functions.get(&name).cloned() {
                    self.cur.next();
                    self.cur.next();
                    return Ok(f);
                }
            }
        }
        let p = self.pred(PredMode::Template, false)?;
        self.check_pred(&p)?;
        self.cur.expect(&Tok::RParen)?;
        Ok(RestrictionFn::new(p))
    }

    fn system_atom(&mut self) -> Result<Component, ParseError> {
        match self.cur.peek().clone() {
            Tok::LParen => {
                self.cur.next();
                let c = self.system()?;
                self.cur.expect(&Tok::RParen)?;
                Ok(c)
            }
            Tok::Ident(k) if k == "restrictOut" || k == "restrictIn" => {
                self.cur.next();
                let f = self.restriction_arg()?;
                self.cur.expect(&Tok::LBrace)?;
                let c = self.system()?;
                self.cur.expect(&Tok::RBrace)?;
                Ok(if k == "restrictOut" { Component::restrict_out(f, c) } else { Component::restrict_in(f, c) })
            }
            Tok::Ident(k) if k == "comp" => {
                self.cur.next();
                self.comp_body()
            }
            Tok::Ident(name) => {
                let found = self.file.components.get(&name).or_else(|| self.file.systems.get(&name)).cloned();
                match found {
                    Some(c) => {
                        self.cur.next();
                        Ok(c)
                    }
                    None => Err(self.cur.error(format!("unknown component or system `{name}`"))),
                }
            }
            _ => Err(self.cur.expected("a component")),
        }
    }

    // ----- items --------------------------------------------------------

    fn finish_file(self) -> Result<AbcFile, ParseError> {
        if let Err(e) = self.file.defs.validate() {
            let loc = self
                .def_locations
                .iter()
                .find(|(n, _, _)| e.to_string().contains(&format!("`{n}`")))
                .map(|(_, l, c)| (*l, *c))
                .unwrap_or((1, 1));
            return Err(ParseError { line: loc.0, col: loc.1, message: e.to_string() });
        }
        for (c, line, col) in &self.system_locations {
            if let Err(e) = self.file.defs.validate_component(c) {
                return Err(ParseError { line: *line, col: *col, message: e.to_string() });
            }
        }
        Ok(self.file)
    }

    fn item(&mut self) -> Result<(), ParseError> {
        let tok = &self.cur.peek().clone();
        let Tok::Ident(kw) = tok else {
            return Err(self.cur.expected("an item (`domain`, `def`, `comp`, `fn`, `universe` or `system`)"));
        };
        let (line, col) = self.position();
        match kw.as_str() {
            "domain" => {
                self.cur.next();
                let a = self.cur.expect_ident()?;
                self.cur.expect(&Tok::Colon)?;
                self.cur.expect(&Tok::LBrace)?;
                let vals = self.list(&Tok::RBrace, Self::value)?;
                self.cur.expect(&Tok::Semi)?;
                self.file
                    .defs
                    .domains
                    .declare(&a, vals)
                    .map_err(|e| ParseError { line, col, message: e.to_string() })?;
            }
            "def" => {
                self.cur.next();
                let name = self.cur.expect_ident()?;
                let params = if self.cur.eat(&Tok::LParen) {
                    self.list(&Tok::RParen, |p| p.cur.expect_ident())?
                } else {
                    Vec::new()
                };
                self.cur.expect(&Tok::Eq)?;
                self.scope = params.clone();
                let body = self.process();
                self.scope.clear();
                let body = body?;
                self.cur.expect(&Tok::Semi)?;
                if self.file.defs.get(&name).is_some() {
                    return Err(ParseError { line, col, message: format!("process `{name}` defined twice") });
                }
                self.file.defs.insert(name.clone(), params, body);
                self.def_locations.push((name, line, col));
            }
            "comp" => {
                self.cur.next();
                let name = self.cur.expect_ident()?;
                let c = self.comp_body()?;
                self.cur.eat(&Tok::Semi);
                self.system_locations.push((c.clone(), line, col));
                self.file.components.insert(name, c);
            }
            "fn" => {
                self.cur.next();
                let name = self.cur.expect_ident()?;
                self.cur.expect(&Tok::Eq)?;
                let p = self.pred(PredMode::Template, false)?;
                self.check_pred(&p)?;
                self.cur.expect(&Tok::Semi)?;
                self.file.functions.insert(name, RestrictionFn::new(p));
            }
            "universe" => {
                self.cur.next();
                self.cur.expect(&Tok::LBrace)?;
                while !self.cur.eat(&Tok::RBrace) {
                    let m = self.universe_entry()?;
                    self.file.universe.push(m);
                }
            }
            "system" => {
                self.cur.next();
                let name = if matches!(self.cur.peek(), Tok::Ident(_)) && self.cur.peek_at(1) == &Tok::Eq {
                    let n = self.cur.expect_ident()?;
                    self.cur.next();
                    Some(n)
                } else {
                    None
                };
                let c = self.system()?;
                self.cur.expect(&Tok::Semi)?;
                self.system_locations.push((c.clone(), line, col));
                match name {
                    Some(n) => {
                        self.file.systems.insert(n, c);
                    }
                    None => {
                        if self.file.main.is_some() {
                            return Err(ParseError { line, col, message: "more than one anonymous system".into() });
                        }
                        self.file.main = Some(c);
                    }
                }
            }
            other => {
                let msg = format!("unknown item `{other}`");
                return Err(self.cur.error(msg));
            }
        }
        Ok(())
    }

    fn position(&mut self) -> (usize, usize) {
        let e = self.cur.error("");
        (e.line, e.col)
    }

    fn universe_entry(&mut self) -> Result<Message, ParseError> {
        self.cur.expect_keyword("in")?;
        let env = self.env()?;
        let (line, col) = self.position();
        let pred = self.pred_atom(PredMode::Closed)?;
        self.check_pred(&pred)?;
        let closed = close(&pred, &AttributeEnv::new()).map_err(|e| ParseError { line, col, message: e.to_string() })?;
        self.cur.expect(&Tok::LParen)?;
        let values = self.list(&Tok::RParen, Self::value)?;
        self.cur.expect(&Tok::Semi)?;
        Ok(Message::new(env, closed, values))
    }
}

/// Turns free attribute references named like a binder into variables.
fn bind_vars(pred: &Predicate, vars: &[String]) -> Predicate {
    fn go(e: &Expr, vars: &[String]) -> Expr {
        match e {
            Expr::Attr(a) if vars.contains(a) => Expr::Var(a.clone()),
            Expr::Op(op, args) => Expr::Op(*op, args.iter().map(|x| go(x, vars)).collect()),
            other => other.clone(),
        }
    }
    pred.map_exprs(&|e| go(e, vars))
}

fn finish<T>(mut p: Parser, r: Result<T, ParseError>) -> Result<T, ParseError> {
    let v = match r {
        Ok(v) => v,
        Err(e) => return Err(p.cur.best_error(e)),
    };
    if !p.cur.at(&Tok::Eof) {
        let e = p.cur.expected("end of input");
        return Err(p.cur.best_error(e));
    }
    Ok(v)
}

/// Parses a whole model file and validates its definitions.
pub fn parse_abc(src: &str) -> Result<AbcFile, ParseError> {
    let mut p = Parser::new(src)?;
    let mut items = Ok(());
    while !p.cur.at(&Tok::Eof) {
        items = p.item();
        if items.is_err() {
            break;
        }
    }
    match items {
        Err(e) => Err(p.cur.best_error(e)),
        Ok(()) => p.finish_file(),
    }
}

/// Parses a single process (variables must be bound inside it).
pub fn parse_process(src: &str) -> Result<Process, ParseError> {
    let mut p = Parser::new(src)?;
    let r = p.process();
    finish(p, r)
}

/// Parses a predicate as written in processes.
pub fn parse_predicate(src: &str) -> Result<Predicate, ParseError> {
    let mut p = Parser::new(src)?;
    let r = p.pred(PredMode::Process, false).and_then(|pr| {
        p.check_pred(&pr)?;
        Ok(pr)
    });
    finish(p, r)
}

/// Parses a closed predicate: attributes and constants only.
pub fn parse_closed_predicate(src: &str) -> Result<ClosedPredicate, ParseError> {
    let mut p = Parser::new(src)?;
    let r = p.pred(PredMode::Closed, false).and_then(|pr| {
        p.check_pred(&pr)?;
        Ok(pr)
    });
    let pred = finish(p, r)?;
    close(&pred, &AttributeEnv::new()).map_err(|e| ParseError { line: 1, col: 1, message: e.to_string() })
}

/// Parses a system expression built from inline `comp { .. }` blocks.
pub fn parse_component(src: &str) -> Result<Component, ParseError> {
    let mut p = Parser::new(src)?;
    let r = p.system();
    finish(p, r)
}

pub fn parse_value(src: &str) -> Result<Value, ParseError> {
    let mut p = Parser::new(src)?;
    let r = p.value();
    finish(p, r)
}
