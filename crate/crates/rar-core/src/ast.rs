//! Abstract syntax for the command language, litmus specs and assertions.

use crate::event::{Tid, Val, VarId, VarTable};
use std::collections::BTreeMap;
use std::fmt;

/// Source position carried by every AST node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl Pos {
    pub fn new(line: u32, col: u32) -> Self {
        Pos { line, col }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnOp {
    Not,
    Neg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    And,
    Or,
    Eq,
    Neq,
    Lt,
    Add,
    Sub,
}

/// Read annotation on a variable occurrence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ReadAnn {
    Relaxed,
    Acquire,
}

/// Write annotation on an assignment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WriteAnn {
    Relaxed,
    Release,
}

/// Expressions. Boolean results are encoded as integers 0/1; `true`/`false`
/// in the surface syntax are sugar for 1/0.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Literal {
        value: Val,
        pos: Pos,
    },
    VarRead {
        var: VarId,
        ann: ReadAnn,
        pos: Pos,
    },
    Unary {
        op: UnOp,
        arg: Box<Expr>,
        pos: Pos,
    },
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
        pos: Pos,
    },
}

impl Expr {
    pub fn pos(&self) -> Pos {
        match self {
            Expr::Literal { pos, .. }
            | Expr::VarRead { pos, .. }
            | Expr::Unary { pos, .. }
            | Expr::Binary { pos, .. } => *pos,
        }
    }

    /// True when the expression contains no variable reads, i.e. it is
    /// fully evaluable.
    pub fn is_variable_free(&self) -> bool {
        match self {
            Expr::Literal { .. } => true,
            Expr::VarRead { .. } => false,
            Expr::Unary { arg, .. } => arg.is_variable_free(),
            Expr::Binary { lhs, rhs, .. } => lhs.is_variable_free() && rhs.is_variable_free(),
        }
    }

    /// Variable occurrences in left-to-right order (with repetition).
    pub fn read_occurrences(&self) -> Vec<(VarId, ReadAnn)> {
        let mut out = Vec::new();
        self.collect_reads(&mut out);
        out
    }

    fn collect_reads(&self, out: &mut Vec<(VarId, ReadAnn)>) {
        match self {
            Expr::Literal { .. } => {}
            Expr::VarRead { var, ann, .. } => out.push((*var, *ann)),
            Expr::Unary { arg, .. } => arg.collect_reads(out),
            Expr::Binary { lhs, rhs, .. } => {
                lhs.collect_reads(out);
                rhs.collect_reads(out);
            }
        }
    }

    /// Value of a variable-free expression. `and`/`or`/`not` treat any
    /// nonzero operand as true and produce 0/1.
    pub fn value(&self) -> Val {
        match self {
            Expr::Literal { value, .. } => *value,
            Expr::VarRead { .. } => panic!("value() on expression with free variables"),
            Expr::Unary { op, arg, .. } => {
                let v = arg.value();
                match op {
                    UnOp::Not => (v == 0) as Val,
                    UnOp::Neg => v.wrapping_neg(),
                }
            }
            Expr::Binary { op, lhs, rhs, .. } => {
                let a = lhs.value();
                let b = rhs.value();
                match op {
                    BinOp::And => (a != 0 && b != 0) as Val,
                    BinOp::Or => (a != 0 || b != 0) as Val,
                    BinOp::Eq => (a == b) as Val,
                    BinOp::Neq => (a != b) as Val,
                    BinOp::Lt => (a < b) as Val,
                    BinOp::Add => a.wrapping_add(b),
                    BinOp::Sub => a.wrapping_sub(b),
                }
            }
        }
    }
}

/// Commands of a single thread. `Label` is pure annotation used by the
/// `at(t, @l)` program-location predicate; it is transparent to stepping.
///
/// A `While` node keeps the loop's original guard (`guard`) alongside the
/// in-flight partial evaluation (`partial`): when the evaluated guard turns
/// out true the unfolded loop restarts from the original guard, so each
/// iteration re-reads its variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Command {
    Skip,
    Assign {
        var: VarId,
        ann: WriteAnn,
        expr: Expr,
        pos: Pos,
    },
    /// `x.swap(n)` with release-acquire annotation; generates an update.
    Swap {
        var: VarId,
        value: Val,
        pos: Pos,
    },
    Seq(Box<Command>, Box<Command>),
    If {
        guard: Expr,
        then_branch: Box<Command>,
        else_branch: Box<Command>,
        pos: Pos,
    },
    While {
        guard: Expr,
        partial: Option<Expr>,
        body: Box<Command>,
        pos: Pos,
    },
    Label {
        name: String,
        body: Box<Command>,
        pos: Pos,
    },
}

impl Command {
    pub fn seq(a: Command, b: Command) -> Command {
        Command::Seq(Box::new(a), Box::new(b))
    }

    /// Skip, possibly under labels. Skip-like commands have no step and a
    /// sequence `c1; c2` with skip-like `c1` takes a silent step to `c2`.
    pub fn is_skip_like(&self) -> bool {
        match self {
            Command::Skip => true,
            Command::Label { body, .. } => body.is_skip_like(),
            _ => false,
        }
    }

    /// Labels heading this command: the command "starts at" these program
    /// locations.
    pub fn leading_labels<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Command::Label { name, body, .. } => {
                out.push(name);
                body.leading_labels(out);
            }
            Command::Seq(first, _) => first.leading_labels(out),
            _ => {}
        }
    }

    /// All labels in the command, for well-formedness checks.
    pub fn all_labels<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Command::Skip | Command::Swap { .. } | Command::Assign { .. } => {}
            Command::Seq(a, b) => {
                a.all_labels(out);
                b.all_labels(out);
            }
            Command::If {
                then_branch,
                else_branch,
                ..
            } => {
                then_branch.all_labels(out);
                else_branch.all_labels(out);
            }
            Command::While { body, .. } => body.all_labels(out),
            Command::Label { name, body, .. } => {
                out.push(name);
                body.all_labels(out);
            }
        }
    }

    /// Variables read or written anywhere in the command.
    pub fn variables(&self, out: &mut Vec<VarId>) {
        match self {
            Command::Skip => {}
            Command::Assign { var, expr, .. } => {
                out.push(*var);
                for (v, _) in expr.read_occurrences() {
                    out.push(v);
                }
            }
            Command::Swap { var, .. } => out.push(*var),
            Command::Seq(a, b) => {
                a.variables(out);
                b.variables(out);
            }
            Command::If {
                guard,
                then_branch,
                else_branch,
                ..
            } => {
                for (v, _) in guard.read_occurrences() {
                    out.push(v);
                }
                then_branch.variables(out);
                else_branch.variables(out);
            }
            Command::While { guard, body, .. } => {
                for (v, _) in guard.read_occurrences() {
                    out.push(v);
                }
                body.variables(out);
            }
            Command::Label { body, .. } => body.variables(out),
        }
    }

    /// Integer literals appearing in the command, used to bound the value
    /// domain of candidate enumeration.
    pub fn literals(&self, out: &mut Vec<Val>) {
        fn expr_lits(e: &Expr, out: &mut Vec<Val>) {
            match e {
                Expr::Literal { value, .. } => out.push(*value),
                Expr::VarRead { .. } => {}
                Expr::Unary { arg, .. } => expr_lits(arg, out),
                Expr::Binary { lhs, rhs, .. } => {
                    expr_lits(lhs, out);
                    expr_lits(rhs, out);
                }
            }
        }
        match self {
            Command::Skip => {}
            Command::Assign { expr, .. } => expr_lits(expr, out),
            Command::Swap { value, .. } => out.push(*value),
            Command::Seq(a, b) => {
                a.literals(out);
                b.literals(out);
            }
            Command::If {
                guard,
                then_branch,
                else_branch,
                ..
            } => {
                expr_lits(guard, out);
                then_branch.literals(out);
                else_branch.literals(out);
            }
            Command::While { guard, body, .. } => {
                expr_lits(guard, out);
                body.literals(out);
            }
            Command::Label { body, .. } => body.literals(out),
        }
    }
}

/// A multi-threaded program: residual command per thread. Thread 0 is
/// reserved for initialising writes and never appears as a key.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Program {
    pub threads: BTreeMap<Tid, Command>,
}

impl Program {
    pub fn new(threads: BTreeMap<Tid, Command>) -> Self {
        debug_assert!(!threads.contains_key(&0));
        Program { threads }
    }

    /// Final iff every residual command is skip-like.
    pub fn is_final(&self) -> bool {
        self.threads.values().all(|c| c.is_skip_like())
    }

    /// True when the labeled command heads thread `t`'s residual command.
    pub fn at_label(&self, t: Tid, label: &str) -> bool {
        let Some(cmd) = self.threads.get(&t) else {
            return false;
        };
        let mut labels = Vec::new();
        cmd.leading_labels(&mut labels);
        labels.iter().any(|l| *l == label)
    }
}

/// Scope of a litmus assertion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scope {
    /// Must hold at every reachable configuration.
    Always,
    /// Must hold at every final configuration within bound.
    FinallyAll,
    /// Some reachable configuration must satisfy it.
    Reachable,
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scope::Always => write!(f, "always"),
            Scope::FinallyAll => write!(f, "finally"),
            Scope::Reachable => write!(f, "reachable"),
        }
    }
}

/// Assertions over configurations.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Assertion {
    /// Determinate-value: thread `t` can only read `v` for `x`.
    DetVal { t: Tid, var: VarId, v: Val },
    /// Variable-order: the last modifications of `x` and `y` are hb-ordered.
    VarOrd { x: VarId, y: VarId },
    /// Every modification of `x` is an update or an initialising write.
    UpdateOnly { var: VarId },
    /// Thread `t`'s residual command starts at label `l`.
    At { t: Tid, label: String },
    /// The last write to `x` wrote `v`.
    OutcomeEq { var: VarId, v: Val },
    Not(Box<Assertion>),
    And(Box<Assertion>, Box<Assertion>),
    Or(Box<Assertion>, Box<Assertion>),
    Implies(Box<Assertion>, Box<Assertion>),
}

impl Assertion {
    pub fn not(a: Assertion) -> Assertion {
        Assertion::Not(Box::new(a))
    }
    pub fn and(a: Assertion, b: Assertion) -> Assertion {
        Assertion::And(Box::new(a), Box::new(b))
    }
    pub fn or(a: Assertion, b: Assertion) -> Assertion {
        Assertion::Or(Box::new(a), Box::new(b))
    }
    pub fn implies(a: Assertion, b: Assertion) -> Assertion {
        Assertion::Implies(Box::new(a), Box::new(b))
    }

    pub fn display<'a>(&'a self, vars: &'a VarTable) -> AssertionDisplay<'a> {
        AssertionDisplay { a: self, vars }
    }
}

pub struct AssertionDisplay<'a> {
    a: &'a Assertion,
    vars: &'a VarTable,
}

impl fmt::Display for AssertionDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(a: &Assertion, vars: &VarTable, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match a {
                Assertion::DetVal { t, var, v } => {
                    write!(f, "detval({},{},{})", t, vars.name(*var), v)
                }
                Assertion::VarOrd { x, y } => {
                    write!(f, "varord({},{})", vars.name(*x), vars.name(*y))
                }
                Assertion::UpdateOnly { var } => write!(f, "updonly({})", vars.name(*var)),
                Assertion::At { t, label } => write!(f, "at({},@{})", t, label),
                Assertion::OutcomeEq { var, v } => {
                    write!(f, "last({}) == {}", vars.name(*var), v)
                }
                Assertion::Not(inner) => {
                    write!(f, "!(")?;
                    go(inner, vars, f)?;
                    write!(f, ")")
                }
                Assertion::And(a, b) => {
                    write!(f, "(")?;
                    go(a, vars, f)?;
                    write!(f, " && ")?;
                    go(b, vars, f)?;
                    write!(f, ")")
                }
                Assertion::Or(a, b) => {
                    write!(f, "(")?;
                    go(a, vars, f)?;
                    write!(f, " || ")?;
                    go(b, vars, f)?;
                    write!(f, ")")
                }
                Assertion::Implies(a, b) => {
                    write!(f, "(")?;
                    go(a, vars, f)?;
                    write!(f, " -> ")?;
                    go(b, vars, f)?;
                    write!(f, ")")
                }
            }
        }
        go(self.a, self.vars, f)
    }
}

/// A parsed litmus test: initial values, threads, assertions and the
/// default event bound.
#[derive(Clone, Debug, PartialEq)]
pub struct LitmusSpec {
    pub name: String,
    pub vars: VarTable,
    /// Initial value per variable, in declaration order.
    pub init: Vec<Val>,
    pub threads: BTreeMap<Tid, Command>,
    pub assertions: Vec<(Scope, Assertion)>,
    /// Max non-initialising events per execution path.
    pub bound: u32,
}

impl LitmusSpec {
    pub fn program(&self) -> Program {
        Program::new(self.threads.clone())
    }

    /// The candidate value domain: program literals plus initial values.
    pub fn value_domain(&self) -> Vec<Val> {
        let mut vals: Vec<Val> = self.init.clone();
        for cmd in self.threads.values() {
            cmd.literals(&mut vals);
        }
        vals.sort_unstable();
        vals.dedup();
        vals
    }
}
