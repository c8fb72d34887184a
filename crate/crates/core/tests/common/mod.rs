//! Random terms and small helpers shared by the integration tests.
#![allow(dead_code)]

use abc_core::bpi::{Bpi, BpiName};
use abc_core::equivalence::{verdict, Mode, Verdict};
use abc_core::lts::{explore, shared_alphabet, ExploreOptions, Lts};
use abc_core::predicates::{ClosedPredicate, Term};
use abc_core::terms::{Rel, RestrictionFn, Update};
use abc_core::{AttributeEnv, Component, Defs, Expr, Message, Predicate, Process, Value};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub const ATTRS: [&str; 2] = ["a", "b"];

pub struct Gen {
    rng: StdRng,
    fresh: usize,
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen { rng: StdRng::seed_from_u64(seed), fresh: 0 }
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    fn attr(&mut self) -> String {
        ATTRS[self.below(2)].to_string()
    }

    pub fn int(&mut self) -> Value {
        Value::Int(self.rng.gen_range(0..3))
    }

    fn rel(&mut self) -> Rel {
        [Rel::Eq, Rel::Ne, Rel::Lt, Rel::Ge][self.below(4)]
    }

    /// Expression over constants, local attributes and bound variables.
    fn expr(&mut self, vars: &[String]) -> Expr {
        match self.below(if vars.is_empty() { 2 } else { 3 }) {
            0 => Expr::Const(self.int()),
            1 => Expr::This(self.attr()),
            _ => Expr::Var(vars[self.below(vars.len())].clone()),
        }
    }

    fn combine(&mut self, depth: usize, atom: &mut dyn FnMut(&mut Self) -> Predicate) -> Predicate {
        if depth == 0 || self.chance(0.5) {
            return match self.below(10) {
                0 => Predicate::True,
                1 => Predicate::False,
                _ => atom(self),
            };
        }
        match self.below(3) {
            0 => Predicate::negate(self.combine(depth - 1, atom)),
            1 => {
                let p = self.combine(depth - 1, atom);
                Predicate::and(p, self.combine(depth - 1, atom))
            }
            _ => {
                let p = self.combine(depth - 1, atom);
                Predicate::or(p, self.combine(depth - 1, atom))
            }
        }
    }

    /// Sending predicate: partner attributes against constants or local
    /// attributes.
    pub fn out_pred(&mut self, depth: usize) -> Predicate {
        self.combine(depth, &mut |g| {
            let rhs = if g.chance(0.7) { Expr::Const(g.int()) } else { Expr::This(g.attr()) };
            Predicate::atom(g.rel(), Expr::Attr(g.attr()), rhs)
        })
    }

    /// Receiving predicate over the sender's attributes and the received
    /// variables.
    fn in_pred(&mut self, vars: &[String], depth: usize) -> Predicate {
        let vars = vars.to_vec();
        self.combine(depth, &mut |g| {
            let lhs = if !vars.is_empty() && g.chance(0.5) {
                Expr::Var(vars[g.below(vars.len())].clone())
            } else {
                Expr::Attr(g.attr())
            };
            let rhs = if g.chance(0.7) { Expr::Const(g.int()) } else { Expr::This(g.attr()) };
            Predicate::atom(g.rel(), lhs, rhs)
        })
    }

    fn guard(&mut self) -> Predicate {
        self.combine(1, &mut |g| Predicate::atom(g.rel(), Expr::This(g.attr()), Expr::Const(g.int())))
    }

    fn updates(&mut self, vars: &[String]) -> Vec<Update> {
        if self.chance(0.25) {
            vec![Update::new(self.attr(), self.expr(vars))]
        } else {
            Vec::new()
        }
    }

    pub fn process(&mut self, depth: usize, vars: &[String]) -> Process {
        if depth == 0 {
            return Process::Nil;
        }
        match self.below(8) {
            0 => Process::Nil,
            1 | 2 => {
                let n = self.below(3);
                let args = (0..n).map(|_| self.expr(vars)).collect();
                let pred = if self.chance(0.15) { Predicate::False } else { self.out_pred(1) };
                let updates = self.updates(vars);
                Process::output_with(args, pred, updates, self.process(depth - 1, vars))
            }
            3 | 4 => {
                self.fresh += 1;
                let arity = self.below(2) + 1;
                let bound: Vec<String> = (0..arity).map(|i| format!("x{}_{i}", self.fresh)).collect();
                let mut inner = vars.to_vec();
                inner.extend(bound.iter().cloned());
                let pred = self.in_pred(&inner, 1);
                let updates = self.updates(&inner);
                Process::input_with(pred, bound, updates, self.process(depth - 1, &inner))
            }
            5 => Process::aware(self.guard(), self.process(depth - 1, vars)),
            6 => Process::choice(self.process(depth - 1, vars), self.process(depth - 1, vars)),
            _ => Process::par(self.process(depth - 1, vars), self.process(depth - 1, vars)),
        }
    }

    pub fn env(&mut self) -> AttributeEnv {
        let mut env = AttributeEnv::new();
        for a in ATTRS {
            env.set(a, self.int());
        }
        env
    }

    pub fn leaf(&mut self, depth: usize) -> Component {
        let iface: Vec<&str> = ATTRS.iter().copied().filter(|_| self.chance(0.6)).collect();
        let env = self.env();
        Component::leaf(env, &iface, self.process(depth, &[]))
    }

    pub fn template(&mut self) -> Predicate {
        match self.below(5) {
            0 => Predicate::True,
            1 => Predicate::False,
            2 => Predicate::atom(self.rel(), Expr::Snd(self.attr()), Expr::Const(self.int())),
            3 => Predicate::atom(self.rel(), Expr::Msg(0), Expr::Const(self.int())),
            _ => Predicate::atom(Rel::Eq, Expr::Attr(self.attr()), Expr::Snd(self.attr())),
        }
    }

    pub fn restriction(&mut self) -> RestrictionFn {
        RestrictionFn::new(self.template())
    }

    pub fn component(&mut self, depth: usize) -> Component {
        match self.below(6) {
            0 | 1 | 2 => self.leaf(depth),
            3 => Component::par(self.leaf(depth - 1), self.leaf(depth - 1)),
            4 => Component::restrict_out(self.restriction(), self.leaf(depth)),
            _ => Component::restrict_in(self.restriction(), self.leaf(depth)),
        }
    }

    pub fn closed_pred(&mut self, depth: usize) -> ClosedPredicate {
        if depth == 0 || self.chance(0.4) {
            return match self.below(10) {
                0 => ClosedPredicate::True,
                1 => ClosedPredicate::False,
                _ => ClosedPredicate::atom(self.rel(), Term::Attr(self.attr()), Term::Const(self.int())),
            };
        }
        let p = self.closed_pred(depth - 1);
        match self.below(3) {
            0 => ClosedPredicate::negate(p),
            1 => ClosedPredicate::and(p, self.closed_pred(depth - 1)),
            _ => ClosedPredicate::or(p, self.closed_pred(depth - 1)),
        }
    }

    pub fn message(&mut self) -> Message {
        let n = self.below(3);
        let values = (0..n).map(|_| self.int()).collect();
        let env = self.env();
        Message::new(env, self.closed_pred(2), values)
    }
}

/// Rewrites the process of every leaf with a law that preserves weak
/// bisimilarity.
pub fn law_rewrite(g: &mut Gen, c: &Component) -> Component {
    match c {
        Component::Leaf { env, iface, proc } => {
            let p = proc.clone();
            let proc = match g.below(6) {
                0 => Process::choice(p, Process::Nil),
                1 => Process::par(Process::Nil, p),
                2 => Process::choice(p.clone(), p),
                3 => Process::aware(Predicate::True, p),
                4 => {
                    // a listener without outputs next to the component
                    let leaf = Component::Leaf { env: env.clone(), iface: iface.clone(), proc: p };
                    let silent = Component::leaf(env.clone(), &[], Process::input(Predicate::True, &["silent"], Process::Nil));
                    return Component::par(leaf, silent);
                }
                _ => match p {
                    Process::Choice(l, r) => Process::Choice(r, l),
                    Process::Par(l, r) => Process::Par(r, l),
                    other => Process::choice(Process::aware(Predicate::False, other.clone()), other),
                },
            };
            Component::Leaf { env: env.clone(), iface: iface.clone(), proc }
        }
        Component::Par(l, r) => Component::par(law_rewrite(g, l), law_rewrite(g, r)),
        Component::RestrictOut(f, c) => Component::restrict_out(f.clone(), law_rewrite(g, c)),
        Component::RestrictIn(f, c) => Component::restrict_in(f.clone(), law_rewrite(g, c)),
    }
}

pub fn options() -> ExploreOptions {
    ExploreOptions { bounds: abc_core::lts::Bounds { max_states: 20_000, max_depth: 200 }, ..Default::default() }
}

/// Verdict plus both explored systems, over the shared alphabet.
pub fn compare_systems(l: &Component, r: &Component, defs: &Defs, mode: Mode) -> Option<(Verdict, Lts, Lts)> {
    let opts = options();
    let u = shared_alphabet(&[l, r], &[], defs, &opts).ok()?;
    let lts_l = explore(l, &u, defs, &opts).ok()?;
    let lts_r = explore(r, &u, defs, &opts).ok()?;
    Some((verdict(&lts_l, &lts_r, u, mode), lts_l, lts_r))
}

const CHANNELS: [&str; 3] = ["a", "b", "c"];

impl Gen {
    fn bpi_name(&mut self, vars: &[String]) -> BpiName {
        if !vars.is_empty() && self.chance(0.4) {
            BpiName::Var(vars[self.below(vars.len())].clone())
        } else {
            BpiName::Chan(CHANNELS[self.below(3)].to_string())
        }
    }

    /// A closed sequential bπ term; recursion only where no outer variable
    /// is in scope.
    pub fn bpi_seq(&mut self, depth: usize, vars: &[String]) -> Bpi {
        if depth == 0 {
            return Bpi::Nil;
        }
        match self.below(7) {
            0 => Bpi::Nil,
            1 => Bpi::Tau(Box::new(self.bpi_seq(depth - 1, vars))),
            2 | 6 => {
                let n = self.below(3);
                let args = (0..n).map(|_| self.bpi_name(vars)).collect();
                Bpi::Output { chan: self.bpi_name(vars), args, cont: Box::new(self.bpi_seq(depth - 1, vars)) }
            }
            3 => {
                self.fresh += 1;
                let params: Vec<String> = (0..self.below(2) + 1).map(|i| format!("x{}_{i}", self.fresh)).collect();
                let mut inner = vars.to_vec();
                inner.extend(params.iter().cloned());
                Bpi::Input { chan: self.bpi_name(vars), params, cont: Box::new(self.bpi_seq(depth - 1, &inner)) }
            }
            4 => Bpi::Sum(Box::new(self.bpi_seq(depth - 1, vars)), Box::new(self.bpi_seq(depth - 1, vars))),
            _ if vars.is_empty() => {
                self.fresh += 1;
                let (name, p) = (format!("R{}", self.fresh), format!("p{}", self.fresh));
                let call = Bpi::Call { name: name.clone(), args: vec![BpiName::Var(p.clone())] };
                let again = Bpi::Output { chan: BpiName::Var(p.clone()), args: Vec::new(), cont: Box::new(call) };
                let body = Bpi::Sum(Box::new(again), Box::new(self.bpi_seq(depth - 1, &[p.clone()])));
                let arg = BpiName::Chan(CHANNELS[self.below(3)].to_string());
                Bpi::Rec { name, params: vec![p], body: Box::new(body), args: vec![arg] }
            }
            _ => Bpi::Tau(Box::new(self.bpi_seq(depth - 1, vars))),
        }
    }

    pub fn bpi_terms(&mut self, depth: usize) -> Vec<Bpi> {
        (0..self.below(3) + 1).map(|_| self.bpi_seq(depth, &[])).collect()
    }
}
