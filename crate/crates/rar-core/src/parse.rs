//! Recursive-descent parser for the litmus text format.
//!
//! ```text
//! name "mp"
//! init f = 0, d = 0;
//! thread 1 { d := 5; f :=[rel] 1; }
//! thread 2 { while (!acq(f)) { } @done: r := d; }
//! assert finally last(r) == 5;
//! ```
//!
//! Statements: `skip;`, `x := e;`, `x :=[rel] e;`, `swap(x, n);`,
//! `if (e) { .. } else { .. }`, `while (e) { .. }`, `@label: stmt`.
//! Expression reads: bare `x` is relaxed, `acq(x)` acquiring. Operators:
//! `== != < ! && || + -`. Assertions: `assert always|reachable|finally a;`
//! with atoms `at(t,@l)`, `detval(t,x,v)`, `varord(x,y)`, `updonly(x)`,
//! `last(x) == v` and connectives `! && || ->`. An optional `bound N;`
//! line sets the default event bound (overridable from the CLI).

use crate::ast::*;
use crate::event::{Tid, Val, VarTable};
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub message: String,
    /// Tokens that would have been accepted at this point, when known.
    pub expected: Vec<String>,
}

impl ParseError {
    fn new(pos: Pos, message: impl Into<String>) -> Self {
        ParseError {
            line: pos.line,
            col: pos.col,
            message: message.into(),
            expected: Vec::new(),
        }
    }

    fn expected(pos: Pos, expected: &[&str], found: &str) -> Self {
        ParseError {
            line: pos.line,
            col: pos.col,
            message: format!("expected {}, found {}", expected.join(" or "), found),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for ParseError {}

const KEYWORDS: &[&str] = &[
    "name", "init", "thread", "bound", "skip", "swap", "if", "else", "while", "acq", "rel",
    "true", "false", "assert", "always", "reachable", "finally", "at", "detval", "varord",
    "updonly", "last",
];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(Val),
    Str(String),
    Punct(&'static str),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Str(_) => "string".to_string(),
            Tok::Punct(p) => format!("`{p}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
}

struct Token {
    tok: Tok,
    pos: Pos,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self) -> u8 {
        let c = self.src[self.pos];
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        c
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek2(&self) -> Option<u8> {
        self.src.get(self.pos + 1).copied()
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b'/') if self.peek2() == Some(b'/') => {
                    while let Some(c) = self.peek() {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }

    fn next_token(&mut self) -> Result<Token, ParseError> {
        self.skip_trivia();
        let pos = Pos::new(self.line, self.col);
        let Some(c) = self.peek() else {
            return Ok(Token { tok: Tok::Eof, pos });
        };
        let tok = match c {
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
                    self.bump();
                }
                let word = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                Tok::Ident(word.to_string())
            }
            b'0'..=b'9' => {
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.bump();
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let n: Val = text
                    .parse()
                    .map_err(|_| ParseError::new(pos, format!("integer literal `{text}` out of range")))?;
                Tok::Int(n)
            }
            b'"' => {
                self.bump();
                let start = self.pos;
                while let Some(c) = self.peek() {
                    if c == b'"' {
                        break;
                    }
                    if c == b'\n' {
                        return Err(ParseError::new(pos, "unterminated string"));
                    }
                    self.bump();
                }
                if self.peek().is_none() {
                    return Err(ParseError::new(pos, "unterminated string"));
                }
                let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string();
                self.bump(); // closing quote
                Tok::Str(s)
            }
            _ => {
                self.bump();
                match (c, self.peek()) {
                    (b':', Some(b'=')) => {
                        self.bump();
                        Tok::Punct(":=")
                    }
                    (b':', _) => Tok::Punct(":"),
                    (b'=', Some(b'=')) => {
                        self.bump();
                        Tok::Punct("==")
                    }
                    (b'=', _) => Tok::Punct("="),
                    (b'!', Some(b'=')) => {
                        self.bump();
                        Tok::Punct("!=")
                    }
                    (b'!', _) => Tok::Punct("!"),
                    (b'&', Some(b'&')) => {
                        self.bump();
                        Tok::Punct("&&")
                    }
                    (b'|', Some(b'|')) => {
                        self.bump();
                        Tok::Punct("||")
                    }
                    (b'-', Some(b'>')) => {
                        self.bump();
                        Tok::Punct("->")
                    }
                    (b'-', _) => Tok::Punct("-"),
                    (b'+', _) => Tok::Punct("+"),
                    (b'<', _) => Tok::Punct("<"),
                    (b'(', _) => Tok::Punct("("),
                    (b')', _) => Tok::Punct(")"),
                    (b'{', _) => Tok::Punct("{"),
                    (b'}', _) => Tok::Punct("}"),
                    (b'[', _) => Tok::Punct("["),
                    (b']', _) => Tok::Punct("]"),
                    (b',', _) => Tok::Punct(","),
                    (b';', _) => Tok::Punct(";"),
                    (b'@', _) => Tok::Punct("@"),
                    (b'&', _) | (b'|', _) => {
                        return Err(ParseError::new(pos, format!("stray `{}`", c as char)))
                    }
                    _ => {
                        return Err(ParseError::new(
                            pos,
                            format!("unexpected character `{}`", c as char),
                        ))
                    }
                }
            }
        };
        Ok(Token { tok, pos })
    }
}

struct Parser {
    tokens: Vec<Token>,
    cursor: usize,
    vars: VarTable,
    declared: usize,
}

/// Parse litmus source text into a [`LitmusSpec`].
pub fn parse(text: &str) -> Result<LitmusSpec, ParseError> {
    let mut lexer = Lexer::new(text);
    let mut tokens = Vec::new();
    loop {
        let t = lexer.next_token()?;
        let done = t.tok == Tok::Eof;
        tokens.push(t);
        if done {
            break;
        }
    }
    Parser {
        tokens,
        cursor: 0,
        vars: VarTable::new(),
        declared: 0,
    }
    .spec()
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.cursor].tok
    }

    fn pos(&self) -> Pos {
        self.tokens[self.cursor].pos
    }

    fn bump(&mut self) -> Tok {
        let t = self.tokens[self.cursor].tok.clone();
        if self.cursor + 1 < self.tokens.len() {
            self.cursor += 1;
        }
        t
    }

    fn eat_punct(&mut self, p: &'static str) -> Result<(), ParseError> {
        if self.peek() == &Tok::Punct(p) {
            self.bump();
            Ok(())
        } else {
            Err(ParseError::expected(
                self.pos(),
                &[&format!("`{p}`")],
                &self.peek().describe(),
            ))
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Ident(s) if s == kw => {
                self.bump();
                Ok(())
            }
            other => Err(ParseError::expected(
                self.pos(),
                &[&format!("`{kw}`")],
                &other.describe(),
            )),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn ident(&mut self) -> Result<(String, Pos), ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok((s, pos))
            }
            other => Err(ParseError::expected(pos, &["identifier"], &other.describe())),
        }
    }

    fn int(&mut self) -> Result<(Val, Pos), ParseError> {
        let pos = self.pos();
        let neg = if self.peek() == &Tok::Punct("-") {
            self.bump();
            true
        } else {
            false
        };
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok((if neg { -n } else { n }, pos))
            }
            Tok::Ident(s) if s == "true" => {
                self.bump();
                Ok((1, pos))
            }
            Tok::Ident(s) if s == "false" => {
                self.bump();
                Ok((0, pos))
            }
            other => Err(ParseError::expected(pos, &["integer"], &other.describe())),
        }
    }

    fn declared_var(&mut self) -> Result<(crate::event::VarId, Pos), ParseError> {
        let (name, pos) = self.ident()?;
        match self.vars.lookup(&name) {
            Some(v) => Ok((v, pos)),
            None => Err(ParseError::new(pos, format!("undeclared variable {name}"))),
        }
    }

    fn spec(mut self) -> Result<LitmusSpec, ParseError> {
        let mut name = String::new();
        if self.at_keyword("name") {
            self.bump();
            match self.bump() {
                Tok::Str(s) => name = s,
                other => {
                    return Err(ParseError::expected(
                        self.tokens[self.cursor - 1].pos,
                        &["string"],
                        &other.describe(),
                    ))
                }
            }
        }

        let mut bound: Option<u32> = None;
        if self.at_keyword("bound") {
            let pos = self.pos();
            self.bump();
            let (n, _) = self.int()?;
            if n < 1 {
                return Err(ParseError::new(pos, "bound must be a positive integer"));
            }
            bound = Some(n as u32);
            self.eat_punct(";")?;
        }

        // init declarations
        self.eat_keyword("init")?;
        let mut init: Vec<Val> = Vec::new();
        loop {
            let (var_name, pos) = self.ident()?;
            if self.vars.lookup(&var_name).is_some() {
                return Err(ParseError::new(
                    pos,
                    format!("variable {var_name} initialised twice"),
                ));
            }
            self.vars.intern(&var_name);
            self.eat_punct("=")?;
            let (v, _) = self.int()?;
            init.push(v);
            if self.peek() == &Tok::Punct(",") {
                self.bump();
            } else {
                break;
            }
        }
        self.eat_punct(";")?;
        self.declared = init.len();

        // threads
        let mut threads = std::collections::BTreeMap::new();
        while self.at_keyword("thread") {
            let kw_pos = self.pos();
            self.bump();
            let (tid, tid_pos) = self.int()?;
            if tid == 0 {
                return Err(ParseError::new(tid_pos, "thread id 0 is reserved for initialising writes"));
            }
            if tid < 0 || tid > u32::MAX as Val {
                return Err(ParseError::new(tid_pos, "thread id out of range"));
            }
            let tid = tid as Tid;
            if threads.contains_key(&tid) {
                return Err(ParseError::new(kw_pos, format!("duplicate thread {tid}")));
            }
            self.eat_punct("{")?;
            let body = self.stmt_seq()?;
            self.eat_punct("}")?;
            let mut labels = Vec::new();
            body.all_labels(&mut labels);
            let mut sorted = labels.clone();
            sorted.sort_unstable();
            for w in sorted.windows(2) {
                if w[0] == w[1] {
                    return Err(ParseError::new(
                        kw_pos,
                        format!("duplicate label @{} in thread {}", w[0], tid),
                    ));
                }
            }
            threads.insert(tid, body);
        }

        // assertions
        let mut assertions = Vec::new();
        while self.at_keyword("assert") {
            self.bump();
            let pos = self.pos();
            let scope = match self.bump() {
                Tok::Ident(s) if s == "always" => Scope::Always,
                Tok::Ident(s) if s == "reachable" => Scope::Reachable,
                Tok::Ident(s) if s == "finally" => Scope::FinallyAll,
                other => {
                    return Err(ParseError::expected(
                        pos,
                        &["`always`", "`reachable`", "`finally`"],
                        &other.describe(),
                    ))
                }
            };
            let a = self.assertion_expr(&threads)?;
            self.eat_punct(";")?;
            assertions.push((scope, a));
        }

        if self.peek() != &Tok::Eof {
            return Err(ParseError::expected(
                self.pos(),
                &["`thread`", "`assert`", "end of input"],
                &self.peek().describe(),
            ));
        }

        Ok(LitmusSpec {
            name,
            vars: self.vars,
            init,
            threads,
            assertions,
            bound: bound.unwrap_or(20),
        })
    }

    fn stmt_seq(&mut self) -> Result<Command, ParseError> {
        let mut stmts = Vec::new();
        while self.peek() != &Tok::Punct("}") && self.peek() != &Tok::Eof {
            stmts.push(self.stmt()?);
        }
        let mut iter = stmts.into_iter().rev();
        let Some(last) = iter.next() else {
            return Ok(Command::Skip);
        };
        Ok(iter.fold(last, |acc, s| Command::seq(s, acc)))
    }

    fn stmt(&mut self) -> Result<Command, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Punct("@") => {
                self.bump();
                let (label, _) = self.ident()?;
                self.eat_punct(":")?;
                let inner = self.stmt()?;
                Ok(Command::Label {
                    name: label,
                    body: Box::new(inner),
                    pos,
                })
            }
            Tok::Ident(kw) if kw == "skip" => {
                self.bump();
                self.eat_punct(";")?;
                Ok(Command::Skip)
            }
            Tok::Ident(kw) if kw == "swap" => {
                self.bump();
                self.eat_punct("(")?;
                let (var, _) = self.declared_var()?;
                self.eat_punct(",")?;
                let (value, _) = self.int()?;
                self.eat_punct(")")?;
                self.eat_punct(";")?;
                Ok(Command::Swap { var, value, pos })
            }
            Tok::Ident(kw) if kw == "if" => {
                self.bump();
                self.eat_punct("(")?;
                let guard = self.expr()?;
                self.eat_punct(")")?;
                self.eat_punct("{")?;
                let then_branch = self.stmt_seq()?;
                self.eat_punct("}")?;
                self.eat_keyword("else")?;
                self.eat_punct("{")?;
                let else_branch = self.stmt_seq()?;
                self.eat_punct("}")?;
                Ok(Command::If {
                    guard,
                    then_branch: Box::new(then_branch),
                    else_branch: Box::new(else_branch),
                    pos,
                })
            }
            Tok::Ident(kw) if kw == "while" => {
                self.bump();
                self.eat_punct("(")?;
                let guard = self.expr()?;
                self.eat_punct(")")?;
                self.eat_punct("{")?;
                let body = self.stmt_seq()?;
                self.eat_punct("}")?;
                Ok(Command::While {
                    guard,
                    partial: None,
                    body: Box::new(body),
                    pos,
                })
            }
            Tok::Ident(_) => {
                let (var, _) = self.declared_var()?;
                self.eat_punct(":=")?;
                let ann = if self.peek() == &Tok::Punct("[") {
                    self.bump();
                    self.eat_keyword("rel")?;
                    self.eat_punct("]")?;
                    WriteAnn::Release
                } else {
                    WriteAnn::Relaxed
                };
                let expr = self.expr()?;
                self.eat_punct(";")?;
                Ok(Command::Assign { var, ann, expr, pos })
            }
            other => Err(ParseError::expected(
                pos,
                &["statement"],
                &other.describe(),
            )),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.or_expr()
    }

    fn or_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.and_expr()?;
        while self.peek() == &Tok::Punct("||") {
            let pos = self.pos();
            self.bump();
            let rhs = self.and_expr()?;
            lhs = Expr::Binary {
                op: BinOp::Or,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                pos,
            };
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.cmp_expr()?;
        while self.peek() == &Tok::Punct("&&") {
            let pos = self.pos();
            self.bump();
            let rhs = self.cmp_expr()?;
            lhs = Expr::Binary {
                op: BinOp::And,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                pos,
            };
        }
        Ok(lhs)
    }

    fn cmp_expr(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.add_expr()?;
        let op = match self.peek() {
            Tok::Punct("==") => BinOp::Eq,
            Tok::Punct("!=") => BinOp::Neq,
            Tok::Punct("<") => BinOp::Lt,
            _ => return Ok(lhs),
        };
        let pos = self.pos();
        self.bump();
        let rhs = self.add_expr()?;
        Ok(Expr::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
            pos,
        })
    }

    fn add_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Punct("+") => BinOp::Add,
                Tok::Punct("-") => BinOp::Sub,
                _ => break,
            };
            let pos = self.pos();
            self.bump();
            let rhs = self.unary_expr()?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                pos,
            };
        }
        Ok(lhs)
    }

    fn unary_expr(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.peek() {
            Tok::Punct("!") => {
                self.bump();
                let arg = self.unary_expr()?;
                Ok(Expr::Unary {
                    op: UnOp::Not,
                    arg: Box::new(arg),
                    pos,
                })
            }
            Tok::Punct("-") => {
                self.bump();
                let arg = self.unary_expr()?;
                Ok(Expr::Unary {
                    op: UnOp::Neg,
                    arg: Box::new(arg),
                    pos,
                })
            }
            _ => self.atom_expr(),
        }
    }

    fn atom_expr(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::Literal { value: n, pos })
            }
            Tok::Ident(s) if s == "true" => {
                self.bump();
                Ok(Expr::Literal { value: 1, pos })
            }
            Tok::Ident(s) if s == "false" => {
                self.bump();
                Ok(Expr::Literal { value: 0, pos })
            }
            Tok::Ident(s) if s == "acq" => {
                self.bump();
                self.eat_punct("(")?;
                let (var, _) = self.declared_var()?;
                self.eat_punct(")")?;
                Ok(Expr::VarRead {
                    var,
                    ann: ReadAnn::Acquire,
                    pos,
                })
            }
            Tok::Ident(_) => {
                let (var, _) = self.declared_var()?;
                Ok(Expr::VarRead {
                    var,
                    ann: ReadAnn::Relaxed,
                    pos,
                })
            }
            Tok::Punct("(") => {
                self.bump();
                let e = self.expr()?;
                self.eat_punct(")")?;
                Ok(e)
            }
            other => Err(ParseError::expected(
                pos,
                &["integer", "identifier", "`acq`", "`(`", "`!`", "`-`"],
                &other.describe(),
            )),
        }
    }

    fn assertion_expr(
        &mut self,
        threads: &std::collections::BTreeMap<Tid, Command>,
    ) -> Result<Assertion, ParseError> {
        let lhs = self.assertion_or(threads)?;
        if self.peek() == &Tok::Punct("->") {
            self.bump();
            let rhs = self.assertion_expr(threads)?;
            Ok(Assertion::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn assertion_or(
        &mut self,
        threads: &std::collections::BTreeMap<Tid, Command>,
    ) -> Result<Assertion, ParseError> {
        let mut lhs = self.assertion_and(threads)?;
        while self.peek() == &Tok::Punct("||") {
            self.bump();
            let rhs = self.assertion_and(threads)?;
            lhs = Assertion::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn assertion_and(
        &mut self,
        threads: &std::collections::BTreeMap<Tid, Command>,
    ) -> Result<Assertion, ParseError> {
        let mut lhs = self.assertion_unary(threads)?;
        while self.peek() == &Tok::Punct("&&") {
            self.bump();
            let rhs = self.assertion_unary(threads)?;
            lhs = Assertion::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn assertion_unary(
        &mut self,
        threads: &std::collections::BTreeMap<Tid, Command>,
    ) -> Result<Assertion, ParseError> {
        if self.peek() == &Tok::Punct("!") {
            self.bump();
            let inner = self.assertion_unary(threads)?;
            return Ok(Assertion::not(inner));
        }
        self.assertion_atom(threads)
    }

    fn thread_ref(
        &mut self,
        threads: &std::collections::BTreeMap<Tid, Command>,
    ) -> Result<Tid, ParseError> {
        let (t, pos) = self.int()?;
        if t <= 0 || !threads.contains_key(&(t as Tid)) {
            return Err(ParseError::new(pos, format!("unknown thread {t}")));
        }
        Ok(t as Tid)
    }

    fn assertion_atom(
        &mut self,
        threads: &std::collections::BTreeMap<Tid, Command>,
    ) -> Result<Assertion, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Punct("(") => {
                self.bump();
                let a = self.assertion_expr(threads)?;
                self.eat_punct(")")?;
                Ok(a)
            }
            Tok::Ident(s) if s == "at" => {
                self.bump();
                self.eat_punct("(")?;
                let t = self.thread_ref(threads)?;
                self.eat_punct(",")?;
                self.eat_punct("@")?;
                let (label, lpos) = self.ident()?;
                self.eat_punct(")")?;
                let mut labels = Vec::new();
                threads[&t].all_labels(&mut labels);
                if !labels.contains(&label.as_str()) {
                    return Err(ParseError::new(
                        lpos,
                        format!("thread {t} has no label @{label}"),
                    ));
                }
                Ok(Assertion::At { t, label })
            }
            Tok::Ident(s) if s == "detval" => {
                self.bump();
                self.eat_punct("(")?;
                let t = self.thread_ref(threads)?;
                self.eat_punct(",")?;
                let (var, _) = self.declared_var()?;
                self.eat_punct(",")?;
                let (v, _) = self.int()?;
                self.eat_punct(")")?;
                Ok(Assertion::DetVal { t, var, v })
            }
            Tok::Ident(s) if s == "varord" => {
                self.bump();
                self.eat_punct("(")?;
                let (x, _) = self.declared_var()?;
                self.eat_punct(",")?;
                let (y, _) = self.declared_var()?;
                self.eat_punct(")")?;
                Ok(Assertion::VarOrd { x, y })
            }
            Tok::Ident(s) if s == "updonly" => {
                self.bump();
                self.eat_punct("(")?;
                let (var, _) = self.declared_var()?;
                self.eat_punct(")")?;
                Ok(Assertion::UpdateOnly { var })
            }
            Tok::Ident(s) if s == "last" => {
                self.bump();
                self.eat_punct("(")?;
                let (var, _) = self.declared_var()?;
                self.eat_punct(")")?;
                self.eat_punct("==")?;
                let (v, _) = self.int()?;
                Ok(Assertion::OutcomeEq { var, v })
            }
            other => Err(ParseError::expected(
                pos,
                &["`at`", "`detval`", "`varord`", "`updonly`", "`last`", "`(`", "`!`"],
                &other.describe(),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::VarId;

    #[test]
    fn undeclared_variable_is_rejected() {
        let err = parse("init x = 0;\nthread 1 { y := x; }").unwrap_err();
        assert!(err.message.contains("undeclared variable y"), "{err}");
        assert_eq!(err.line, 2);
    }

    #[test]
    fn relaxed_assignment_maps_to_assign() {
        let spec = parse("init x = 0;\nthread 1 { x := 5; }").unwrap();
        match &spec.threads[&1] {
            Command::Assign { var, ann, expr, .. } => {
                assert_eq!(*var, VarId(0));
                assert_eq!(*ann, WriteAnn::Relaxed);
                assert_eq!(expr, &Expr::Literal { value: 5, pos: expr.pos() });
            }
            other => panic!("unexpected command {other:?}"),
        }
    }

    #[test]
    fn release_assignment_carries_annotation() {
        let spec = parse("init x = 0;\nthread 1 { x :=[rel] 0; }").unwrap();
        match &spec.threads[&1] {
            Command::Assign { ann, expr, .. } => {
                assert_eq!(*ann, WriteAnn::Release);
                assert_eq!(expr.value(), 0);
            }
            other => panic!("unexpected command {other:?}"),
        }
    }

    #[test]
    fn thread_zero_rejected() {
        let err = parse("init x = 0;\nthread 0 { skip; }").unwrap_err();
        assert!(err.message.contains("thread id 0"), "{err}");
    }

    #[test]
    fn duplicate_label_rejected() {
        let err = parse("init x = 0;\nthread 1 { @a: skip; @a: skip; }").unwrap_err();
        assert!(err.message.contains("duplicate label"), "{err}");
    }

    #[test]
    fn left_to_right_structure_preserved() {
        let spec = parse("init f = 0, t = 0;\nthread 1 { while (acq(f) == 1 && t == 2) { } }")
            .unwrap();
        match &spec.threads[&1] {
            Command::While { guard, partial, .. } => {
                assert!(partial.is_none());
                let reads = guard.read_occurrences();
                assert_eq!(
                    reads,
                    vec![(VarId(0), ReadAnn::Acquire), (VarId(1), ReadAnn::Relaxed)]
                );
            }
            other => panic!("unexpected command {other:?}"),
        }
    }

    #[test]
    fn assertions_parse_and_validate() {
        let spec = parse(
            "init x = 0, y = 0;\nthread 1 { @l: x := 1; }\n\
             assert always detval(1,x,0) || varord(x,y);\n\
             assert reachable at(1,@l) -> last(y) == 0;\n\
             assert finally updonly(y);",
        )
        .unwrap();
        assert_eq!(spec.assertions.len(), 3);
        assert_eq!(spec.assertions[0].0, Scope::Always);
        assert_eq!(spec.assertions[1].0, Scope::Reachable);
        assert_eq!(spec.assertions[2].0, Scope::FinallyAll);
    }

    #[test]
    fn unknown_label_in_assertion_rejected() {
        let err = parse("init x = 0;\nthread 1 { x := 1; }\nassert always at(1,@nope);")
            .unwrap_err();
        assert!(err.message.contains("no label"), "{err}");
    }

    #[test]
    fn parse_error_reports_position_and_expectation() {
        let err = parse("init x = 0;\nthread 1 { x := ; }").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(!err.expected.is_empty());
    }

    #[test]
    fn value_domain_collects_literals_and_inits() {
        let spec = parse("init x = 0, y = 7;\nthread 1 { x := 5; swap(y, 3); }").unwrap();
        assert_eq!(spec.value_domain(), vec![0, 3, 5, 7]);
    }
}
