//! Modeling-language front end: lexer, parser, hash-consed expression DAG,
//! and outward-rounded range annotation.
//!
//! Expressions are interned bottom-up, so structurally identical subtrees
//! share one node and the arena order is already topological. Numeric
//! literals stay exact rationals (constant subtrees fold at intern time);
//! nothing is converted to floating point before range evaluation.

use crate::interval::{Interval, StdFun};
use crate::rat;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use std::collections::{BTreeMap, HashMap};
use std::fmt;

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rel {
    Eq,
    Le,
    Ge,
}

impl Rel {
    fn symbol(self) -> &'static str {
        match self {
            Rel::Eq => "=",
            Rel::Le => "<=",
            Rel::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Var(String),
    Const(BigRational),
    Neg(NodeId),
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Div(NodeId, NodeId),
    Fun(StdFun, NodeId),
    /// `items[0] rels[0] items[1] rels[1] ...` — a constraint root.
    Chain { items: Vec<NodeId>, rels: Vec<Rel> },
}

#[derive(Debug, Clone)]
pub struct ExprNode {
    pub kind: NodeKind,
    /// Filled in by `evaluate_ranges`; `ENTIRE` until then (trivially sound).
    pub enclosure: Interval,
}

/// Shared node store with hash-consing. Children always precede parents.
#[derive(Debug, Clone, Default)]
pub struct Dag {
    nodes: Vec<ExprNode>,
    index: HashMap<NodeKind, NodeId>,
}

impl Dag {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &ExprNode {
        &self.nodes[id]
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &ExprNode)> {
        self.nodes.iter().enumerate()
    }

    pub fn intern(&mut self, kind: NodeKind) -> NodeId {
        let kind = self.fold(kind);
        if let Some(&id) = self.index.get(&kind) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(ExprNode {
            kind: kind.clone(),
            enclosure: Interval::ENTIRE,
        });
        self.index.insert(kind, id);
        id
    }

    fn constant(&self, id: NodeId) -> Option<&BigRational> {
        match &self.nodes[id].kind {
            NodeKind::Const(r) => Some(r),
            _ => None,
        }
    }

    // Exact folding of arithmetic on constants; this is what turns the two
    // tokens of `1/3` into a single rational literal.
    fn fold(&self, kind: NodeKind) -> NodeKind {
        match &kind {
            NodeKind::Neg(a) => {
                if let Some(x) = self.constant(*a) {
                    return NodeKind::Const(-x.clone());
                }
            }
            NodeKind::Add(a, b) => {
                if let (Some(x), Some(y)) = (self.constant(*a), self.constant(*b)) {
                    return NodeKind::Const(x + y);
                }
            }
            NodeKind::Sub(a, b) => {
                if let (Some(x), Some(y)) = (self.constant(*a), self.constant(*b)) {
                    return NodeKind::Const(x - y);
                }
            }
            NodeKind::Mul(a, b) => {
                if let (Some(x), Some(y)) = (self.constant(*a), self.constant(*b)) {
                    return NodeKind::Const(x * y);
                }
            }
            NodeKind::Div(a, b) => {
                if let (Some(x), Some(y)) = (self.constant(*a), self.constant(*b)) {
                    if !y.is_zero() {
                        return NodeKind::Const(x / y);
                    }
                }
            }
            _ => {}
        }
        kind
    }
}

#[derive(Debug, Clone)]
pub struct Model {
    pub dag: Dag,
    /// Constraint roots (always `Chain` nodes), in statement order.
    pub roots: Vec<NodeId>,
    /// Declared or implicit (entire) domain per variable.
    pub variables: BTreeMap<String, Interval>,
    pub warnings: Vec<String>,
    /// Set when range evaluation proves the model has no solution (empty
    /// enclosure, undefined quotient, or a domain violation).
    pub infeasible: Option<String>,
}

#[derive(Debug, thiserror::Error)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub msg: String,
}

impl Model {
    pub fn parse(text: &str) -> Result<Model, ParseError> {
        parse(text)
    }

    /// One bottom-up pass annotating every node with an outward-rounded
    /// enclosure of its range over the variable domains. Undefined operations
    /// (division by an exactly-zero interval, empty domain intersection of a
    /// standard function) mark the node Empty and the model infeasible.
    pub fn evaluate_ranges(&mut self) {
        self.infeasible = None;
        for i in 0..self.dag.nodes.len() {
            let kind = self.dag.nodes[i].kind.clone();
            let enc = match &kind {
                NodeKind::Var(name) => self
                    .variables
                    .get(name)
                    .copied()
                    .unwrap_or(Interval::ENTIRE),
                NodeKind::Const(r) => rat::enclose(r),
                NodeKind::Neg(a) => self.dag.nodes[*a].enclosure.neg(),
                NodeKind::Add(a, b) => self.dag.nodes[*a]
                    .enclosure
                    .add(self.dag.nodes[*b].enclosure),
                NodeKind::Sub(a, b) => self.dag.nodes[*a]
                    .enclosure
                    .sub(self.dag.nodes[*b].enclosure),
                NodeKind::Mul(a, b) => self.dag.nodes[*a]
                    .enclosure
                    .mul(self.dag.nodes[*b].enclosure),
                NodeKind::Div(a, b) => {
                    let num = self.dag.nodes[*a].enclosure;
                    let den = self.dag.nodes[*b].enclosure;
                    match num.checked_div(den) {
                        Ok(iv) => iv,
                        Err(e) => {
                            self.note_infeasible(&format!("{e}"));
                            Interval::EMPTY
                        }
                    }
                }
                NodeKind::Fun(f, a) => {
                    let arg = self.dag.nodes[*a].enclosure;
                    match Interval::eval_std(*f, arg) {
                        Ok(iv) => iv,
                        Err(e) => {
                            self.note_infeasible(&format!("{e} in {}", f.name()));
                            Interval::EMPTY
                        }
                    }
                }
                NodeKind::Chain { .. } => Interval::ENTIRE,
            };
            if enc.is_empty() && !matches!(kind, NodeKind::Chain { .. }) {
                self.note_infeasible("empty range enclosure");
            }
            self.dag.nodes[i].enclosure = enc;
        }
    }

    fn note_infeasible(&mut self, reason: &str) {
        if self.infeasible.is_none() {
            self.infeasible = Some(reason.to_string());
        }
    }
}

/// Exact rational value of an expression at a rational point, where one is
/// defined (`None` under transcendental functions, sqrt, or division by
/// zero). Reference evaluator for tests and the oracle; not a solver path.
pub fn eval_rational(
    dag: &Dag,
    id: NodeId,
    point: &BTreeMap<String, BigRational>,
) -> Option<BigRational> {
    match &dag.node(id).kind {
        NodeKind::Var(name) => point.get(name).cloned(),
        NodeKind::Const(r) => Some(r.clone()),
        NodeKind::Neg(a) => Some(-eval_rational(dag, *a, point)?),
        NodeKind::Add(a, b) => Some(eval_rational(dag, *a, point)? + eval_rational(dag, *b, point)?),
        NodeKind::Sub(a, b) => Some(eval_rational(dag, *a, point)? - eval_rational(dag, *b, point)?),
        NodeKind::Mul(a, b) => Some(eval_rational(dag, *a, point)? * eval_rational(dag, *b, point)?),
        NodeKind::Div(a, b) => {
            let d = eval_rational(dag, *b, point)?;
            if d.is_zero() {
                None
            } else {
                Some(eval_rational(dag, *a, point)? / d)
            }
        }
        NodeKind::Fun(StdFun::Abs, a) => Some(eval_rational(dag, *a, point)?.abs()),
        NodeKind::Fun(..) | NodeKind::Chain { .. } => None,
    }
}

/// Whether a constraint root holds exactly at a rational point (`None` when
/// some member cannot be evaluated rationally).
pub fn chain_holds_rational(
    dag: &Dag,
    root: NodeId,
    point: &BTreeMap<String, BigRational>,
) -> Option<bool> {
    let NodeKind::Chain { items, rels } = &dag.node(root).kind else {
        return None;
    };
    let mut vals = Vec::with_capacity(items.len());
    for &it in items {
        vals.push(eval_rational(dag, it, point)?);
    }
    for (k, rel) in rels.iter().enumerate() {
        let ok = match rel {
            Rel::Eq => vals[k] == vals[k + 1],
            Rel::Le => vals[k] <= vals[k + 1],
            Rel::Ge => vals[k] >= vals[k + 1],
        };
        if !ok {
            return Some(false);
        }
    }
    Some(true)
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(BigRational),
    Fun(StdFun),
    BoolWord(String),
    KwIn,
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Eq,
    Le,
    Ge,
    Lt,
    Gt,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier '{s}'"),
            Tok::Num(_) => "number".into(),
            Tok::Fun(f) => format!("function '{}'", f.name()),
            Tok::BoolWord(w) => format!("'{w}'"),
            Tok::KwIn => "'in'".into(),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::LBracket => "'['".into(),
            Tok::RBracket => "']'".into(),
            Tok::Comma => "','".into(),
            Tok::Semi => "';'".into(),
            Tok::Eq => "'='".into(),
            Tok::Le => "'<='".into(),
            Tok::Ge => "'>='".into(),
            Tok::Lt => "'<'".into(),
            Tok::Gt => "'>'".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: u32,
    col: u32,
}

const BOOL_WORDS: [&str; 6] = ["and", "or", "not", "true", "false", "xor"];

struct Lexer {
    chars: Vec<char>,
    i: usize,
    line: u32,
    col: u32,
}

impl Lexer {
    fn new(text: &str) -> Lexer {
        Lexer {
            chars: text.chars().collect(),
            i: 0,
            line: 1,
            col: 1,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.i).copied()
    }

    fn peek_at(&self, k: usize) -> Option<char> {
        self.chars.get(self.i + k).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.i += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            col: self.col,
            msg: msg.into(),
        }
    }

    fn tokens(mut self) -> Result<Vec<Token>, ParseError> {
        let mut out = Vec::new();
        loop {
            while let Some(c) = self.peek() {
                if c == '#' {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                } else if c.is_whitespace() {
                    self.bump();
                } else {
                    break;
                }
            }
            let (line, col) = (self.line, self.col);
            let Some(c) = self.peek() else {
                out.push(Token {
                    tok: Tok::Eof,
                    line,
                    col,
                });
                return Ok(out);
            };
            let tok = if c.is_ascii_digit() {
                self.lex_number()?
            } else if c.is_ascii_alphabetic() {
                self.lex_word()
            } else {
                self.bump();
                match c {
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    '/' => Tok::Slash,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    ',' => Tok::Comma,
                    ';' => Tok::Semi,
                    '=' => Tok::Eq,
                    '<' => {
                        if self.peek() == Some('=') {
                            self.bump();
                            Tok::Le
                        } else {
                            Tok::Lt
                        }
                    }
                    '>' => {
                        if self.peek() == Some('=') {
                            self.bump();
                            Tok::Ge
                        } else {
                            Tok::Gt
                        }
                    }
                    _ => {
                        return Err(ParseError {
                            line,
                            col,
                            msg: format!("unexpected character '{c}'"),
                        })
                    }
                }
            };
            out.push(Token { tok, line, col });
        }
    }

    fn lex_digits(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        s
    }

    fn lex_number(&mut self) -> Result<Tok, ParseError> {
        let int_part = self.lex_digits();
        let mut frac_part = String::new();
        if self.peek() == Some('.') {
            if self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
                self.bump();
                frac_part = self.lex_digits();
            } else {
                return Err(self.error("expected digits after decimal point"));
            }
        }
        let mut exp: i64 = 0;
        if matches!(self.peek(), Some('e') | Some('E')) {
            let sign_ofs = if matches!(self.peek_at(1), Some('+') | Some('-')) {
                2
            } else {
                1
            };
            if self.peek_at(sign_ofs).is_some_and(|c| c.is_ascii_digit()) {
                self.bump();
                let neg = if matches!(self.peek(), Some('+') | Some('-')) {
                    self.bump() == Some('-')
                } else {
                    false
                };
                let digits = self.lex_digits();
                let mag: i64 = digits
                    .parse()
                    .map_err(|_| self.error("exponent out of range"))?;
                if mag > 100_000 {
                    return Err(self.error("exponent out of range"));
                }
                exp = if neg { -mag } else { mag };
            }
            // A bare 'e' not followed by an exponent is left for the next
            // token (it will be an identifier and a syntax error downstream).
        }
        let digits = format!("{int_part}{frac_part}");
        let mantissa: BigInt = digits.parse().expect("digit string");
        let scale = exp - frac_part.len() as i64;
        let ten = BigInt::from(10u32);
        let value = if scale >= 0 {
            BigRational::from_integer(mantissa * ten.pow(scale as u32))
        } else {
            BigRational::new(mantissa, ten.pow((-scale) as u32))
        };
        Ok(Tok::Num(value))
    }

    fn lex_word(&mut self) -> Tok {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        if s == "in" {
            Tok::KwIn
        } else if let Some(f) = StdFun::from_name(&s) {
            Tok::Fun(f)
        } else if BOOL_WORDS.contains(&s.as_str()) {
            Tok::BoolWord(s)
        } else {
            Tok::Ident(s)
        }
    }
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser {
    toks: Vec<Token>,
    i: usize,
    dag: Dag,
    roots: Vec<NodeId>,
    variables: BTreeMap<String, Interval>,
    declared: BTreeMap<String, (BigRational, BigRational)>,
    warnings: Vec<String>,
}

pub fn parse(text: &str) -> Result<Model, ParseError> {
    let toks = Lexer::new(text).tokens()?;
    let mut p = Parser {
        toks,
        i: 0,
        dag: Dag::default(),
        roots: Vec::new(),
        variables: BTreeMap::new(),
        declared: BTreeMap::new(),
        warnings: Vec::new(),
    };
    while p.current().tok != Tok::Eof {
        p.statement()?;
    }
    // Implicit declaration of every referenced variable.
    for node in &p.dag.nodes {
        if let NodeKind::Var(name) = &node.kind {
            p.variables.entry(name.clone()).or_insert(Interval::ENTIRE);
        }
    }
    Ok(Model {
        dag: p.dag,
        roots: p.roots,
        variables: p.variables,
        warnings: p.warnings,
        infeasible: None,
    })
}

impl Parser {
    fn current(&self) -> &Token {
        &self.toks[self.i]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn err_here(&self, msg: impl Into<String>) -> ParseError {
        let t = self.current();
        ParseError {
            line: t.line,
            col: t.col,
            msg: msg.into(),
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Token, ParseError> {
        if self.current().tok == want {
            Ok(self.bump())
        } else {
            Err(self.err_here(format!(
                "expected {what}, found {}",
                self.current().tok.describe()
            )))
        }
    }

    fn reject_bool(&self) -> Result<(), ParseError> {
        if let Tok::BoolWord(w) = &self.current().tok {
            return Err(self.err_here(format!(
                "unsupported construct: Boolean term '{w}' (only real-valued constraints are accepted)"
            )));
        }
        Ok(())
    }

    fn statement(&mut self) -> Result<(), ParseError> {
        self.reject_bool()?;
        let is_domain = matches!(self.current().tok, Tok::Ident(_))
            && self
                .toks
                .get(self.i + 1)
                .is_some_and(|t| t.tok == Tok::KwIn);
        if is_domain {
            self.domain()
        } else {
            self.constraint()
        }
    }

    fn domain(&mut self) -> Result<(), ParseError> {
        let (line, col) = (self.current().line, self.current().col);
        let Tok::Ident(name) = self.bump().tok else {
            unreachable!()
        };
        self.expect(Tok::KwIn, "'in'")?;
        self.expect(Tok::LBracket, "'['")?;
        let lo = self.signed_number()?;
        self.expect(Tok::Comma, "','")?;
        let hi = self.signed_number()?;
        self.expect(Tok::RBracket, "']'")?;
        self.expect(Tok::Semi, "';'")?;
        if lo > hi {
            return Err(ParseError {
                line,
                col,
                msg: format!("empty domain for '{name}'"),
            });
        }
        if let Some(prev) = self.declared.get(&name) {
            if prev != &(lo.clone(), hi.clone()) {
                return Err(ParseError {
                    line,
                    col,
                    msg: format!("conflicting domain redeclaration for '{name}'"),
                });
            }
            return Ok(());
        }
        let iv = Interval::new(rat::f64_below(&lo), rat::f64_above(&hi));
        self.declared.insert(name.clone(), (lo, hi));
        self.variables.insert(name, iv);
        Ok(())
    }

    fn signed_number(&mut self) -> Result<BigRational, ParseError> {
        let neg = match self.current().tok {
            Tok::Minus => {
                self.bump();
                true
            }
            Tok::Plus => {
                self.bump();
                false
            }
            _ => false,
        };
        let Tok::Num(n) = self.current().tok.clone() else {
            return Err(self.err_here(format!(
                "expected a number, found {}",
                self.current().tok.describe()
            )));
        };
        self.bump();
        let mut value = n;
        if self.current().tok == Tok::Slash {
            self.bump();
            let Tok::Num(d) = self.current().tok.clone() else {
                return Err(self.err_here("expected a denominator"));
            };
            if d.is_zero() {
                return Err(self.err_here("zero denominator"));
            }
            self.bump();
            value /= d;
        }
        Ok(if neg { -value } else { value })
    }

    fn constraint(&mut self) -> Result<(), ParseError> {
        let mut items = vec![self.expr()?];
        let mut rels = Vec::new();
        loop {
            self.reject_bool()?;
            let t = self.current().clone();
            let rel = match t.tok {
                Tok::Eq => Rel::Eq,
                Tok::Le => Rel::Le,
                Tok::Ge => Rel::Ge,
                Tok::Lt => {
                    self.warnings.push(format!(
                        "{}:{}: strict '<' treated as '<='",
                        t.line, t.col
                    ));
                    Rel::Le
                }
                Tok::Gt => {
                    self.warnings.push(format!(
                        "{}:{}: strict '>' treated as '>='",
                        t.line, t.col
                    ));
                    Rel::Ge
                }
                Tok::Semi if !rels.is_empty() => {
                    self.bump();
                    break;
                }
                _ => {
                    return Err(self.err_here(if rels.is_empty() {
                        format!(
                            "expected a relational operator, found {}",
                            t.tok.describe()
                        )
                    } else {
                        format!(
                            "expected a relational operator or ';', found {}",
                            t.tok.describe()
                        )
                    }))
                }
            };
            self.bump();
            items.push(self.expr()?);
            rels.push(rel);
        }
        let id = self.dag.intern(NodeKind::Chain { items, rels });
        self.roots.push(id);
        Ok(())
    }

    fn expr(&mut self) -> Result<NodeId, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.current().tok {
                Tok::Plus => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = self.dag.intern(NodeKind::Add(lhs, rhs));
                }
                Tok::Minus => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = self.dag.intern(NodeKind::Sub(lhs, rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<NodeId, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.current().tok {
                Tok::Star => {
                    self.bump();
                    let rhs = self.factor()?;
                    lhs = self.dag.intern(NodeKind::Mul(lhs, rhs));
                }
                Tok::Slash => {
                    self.bump();
                    let rhs = self.factor()?;
                    lhs = self.dag.intern(NodeKind::Div(lhs, rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<NodeId, ParseError> {
        self.reject_bool()?;
        let t = self.current().clone();
        match t.tok {
            Tok::Num(n) => {
                self.bump();
                Ok(self.dag.intern(NodeKind::Const(n)))
            }
            Tok::Ident(name) => {
                self.bump();
                Ok(self.dag.intern(NodeKind::Var(name)))
            }
            Tok::Minus => {
                self.bump();
                let inner = self.factor()?;
                Ok(self.dag.intern(NodeKind::Neg(inner)))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Tok::Fun(f) => {
                self.bump();
                self.expect(Tok::LParen, "'(' after function name")?;
                let arg = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(self.dag.intern(NodeKind::Fun(f, arg)))
            }
            other => Err(self.err_here(format!(
                "expected a number, variable, '(' or function, found {}",
                other.describe()
            ))),
        }
    }
}

// ---------------------------------------------------------------------------
// Printing (inverse of the parser, up to constant folding)
// ---------------------------------------------------------------------------

fn rational_str(r: &BigRational) -> String {
    if r.denom() == &BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn node_prec(kind: &NodeKind) -> u8 {
    match kind {
        NodeKind::Add(..) | NodeKind::Sub(..) => 1,
        NodeKind::Mul(..) | NodeKind::Div(..) => 2,
        NodeKind::Neg(_) => 3,
        NodeKind::Const(r) => {
            if r.denom() != &BigInt::from(1) {
                2 // prints as p/q, a term-level expression
            } else if r.is_negative() {
                3 // prints as -p, a unary-minus expression
            } else {
                4
            }
        }
        NodeKind::Var(_) | NodeKind::Fun(..) => 4,
        NodeKind::Chain { .. } => 0,
    }
}

pub fn format_expr(dag: &Dag, id: NodeId) -> String {
    let mut s = String::new();
    fmt_expr(dag, id, 0, &mut s);
    s
}

fn fmt_expr(dag: &Dag, id: NodeId, min_prec: u8, out: &mut String) {
    let kind = &dag.node(id).kind;
    let prec = node_prec(kind);
    let parens = prec < min_prec;
    if parens {
        out.push('(');
    }
    match kind {
        NodeKind::Var(name) => out.push_str(name),
        NodeKind::Const(r) => out.push_str(&rational_str(r)),
        NodeKind::Neg(a) => {
            out.push('-');
            fmt_expr(dag, *a, 3, out);
        }
        NodeKind::Add(a, b) => {
            fmt_expr(dag, *a, 1, out);
            out.push_str(" + ");
            fmt_expr(dag, *b, 2, out);
        }
        NodeKind::Sub(a, b) => {
            fmt_expr(dag, *a, 1, out);
            out.push_str(" - ");
            fmt_expr(dag, *b, 2, out);
        }
        NodeKind::Mul(a, b) => {
            fmt_expr(dag, *a, 2, out);
            out.push_str(" * ");
            fmt_expr(dag, *b, 3, out);
        }
        NodeKind::Div(a, b) => {
            fmt_expr(dag, *a, 2, out);
            out.push_str(" / ");
            fmt_expr(dag, *b, 3, out);
        }
        NodeKind::Fun(f, a) => {
            out.push_str(f.name());
            out.push('(');
            fmt_expr(dag, *a, 0, out);
            out.push(')');
        }
        NodeKind::Chain { items, rels } => {
            fmt_expr(dag, items[0], 0, out);
            for (k, rel) in rels.iter().enumerate() {
                out.push(' ');
                out.push_str(rel.symbol());
                out.push(' ');
                fmt_expr(dag, items[k + 1], 0, out);
            }
        }
    }
    if parens {
        out.push(')');
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, dom) in &self.variables {
            if *dom == Interval::ENTIRE {
                continue;
            }
            debug_assert!(dom.is_finite(), "declared domains are finite");
            writeln!(
                f,
                "{} in [{}, {}];",
                name,
                rational_str(&rat::rational_of(dom.lo())),
                rational_str(&rat::rational_of(dom.hi()))
            )?;
        }
        for &root in &self.roots {
            writeln!(f, "{};", format_expr(&self.dag, root))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::FromPrimitive;
    use proptest::prelude::*;

    fn count_kind(m: &Model, pred: impl Fn(&NodeKind) -> bool) -> usize {
        m.dag.iter().filter(|(_, n)| pred(&n.kind)).count()
    }

    // Compares the structure reachable from the roots; arena layout may
    // differ (constant folding leaves unreachable literal nodes behind).
    fn nodes_equal(da: &Dag, a: NodeId, db: &Dag, b: NodeId) -> bool {
        match (&da.node(a).kind, &db.node(b).kind) {
            (NodeKind::Var(x), NodeKind::Var(y)) => x == y,
            (NodeKind::Const(x), NodeKind::Const(y)) => x == y,
            (NodeKind::Neg(x), NodeKind::Neg(y)) => nodes_equal(da, *x, db, *y),
            (NodeKind::Add(x1, x2), NodeKind::Add(y1, y2))
            | (NodeKind::Sub(x1, x2), NodeKind::Sub(y1, y2))
            | (NodeKind::Mul(x1, x2), NodeKind::Mul(y1, y2))
            | (NodeKind::Div(x1, x2), NodeKind::Div(y1, y2)) => {
                nodes_equal(da, *x1, db, *y1) && nodes_equal(da, *x2, db, *y2)
            }
            (NodeKind::Fun(f, x), NodeKind::Fun(g, y)) => f == g && nodes_equal(da, *x, db, *y),
            (
                NodeKind::Chain { items: xi, rels: xr },
                NodeKind::Chain { items: yi, rels: yr },
            ) => {
                xr == yr
                    && xi.len() == yi.len()
                    && xi
                        .iter()
                        .zip(yi)
                        .all(|(&x, &y)| nodes_equal(da, x, db, y))
            }
            _ => false,
        }
    }

    fn structurally_equal(a: &Model, b: &Model) -> bool {
        a.variables == b.variables
            && a.roots.len() == b.roots.len()
            && a.roots
                .iter()
                .zip(&b.roots)
                .all(|(&x, &y)| nodes_equal(&a.dag, x, &b.dag, y))
    }

    #[test]
    fn parses_simple_equality() {
        let m = Model::parse("x + y = 3;").unwrap();
        assert_eq!(m.roots.len(), 1);
        let NodeKind::Chain { items, rels } = &m.dag.node(m.roots[0]).kind else {
            panic!("root must be a chain");
        };
        assert_eq!(rels, &[Rel::Eq]);
        assert_eq!(items.len(), 2);
        assert_eq!(count_kind(&m, |k| matches!(k, NodeKind::Var(_))), 2);
        assert_eq!(count_kind(&m, |k| matches!(k, NodeKind::Add(..))), 1);
        assert_eq!(
            count_kind(&m, |k| matches!(k, NodeKind::Const(c) if *c == BigRational::from_i64(3).unwrap())),
            1
        );
    }

    #[test]
    fn parses_comparison_chain_as_single_root() {
        let m = Model::parse("0 <= x - y <= 1;").unwrap();
        assert_eq!(m.roots.len(), 1);
        let NodeKind::Chain { items, rels } = &m.dag.node(m.roots[0]).kind else {
            panic!()
        };
        assert_eq!(rels, &[Rel::Le, Rel::Le]);
        assert_eq!(items.len(), 3);
    }

    #[test]
    fn shares_identical_subexpressions() {
        let m = Model::parse("sin(x + y) = 0; x + y <= 2;").unwrap();
        assert_eq!(count_kind(&m, |k| matches!(k, NodeKind::Add(..))), 1);
        assert_eq!(count_kind(&m, |k| matches!(k, NodeKind::Fun(..))), 1);
    }

    #[test]
    fn literals_stay_exact_rationals() {
        let m = Model::parse("y = 1/3 + 0.1 + 2.5e-3;").unwrap();
        let want = BigRational::new(BigInt::from(1), BigInt::from(3))
            + BigRational::new(BigInt::from(1), BigInt::from(10))
            + BigRational::new(BigInt::from(25), BigInt::from(10000));
        assert_eq!(
            count_kind(&m, |k| matches!(k, NodeKind::Const(c) if *c == want)),
            1,
            "constant subtree folds to one exact rational"
        );
    }

    #[test]
    fn syntax_errors_carry_position() {
        let e = Model::parse("x +\n* y = 1;").unwrap_err();
        assert_eq!((e.line, e.col), (2, 1));
        let e = Model::parse("x = ;").unwrap_err();
        assert_eq!((e.line, e.col), (1, 5));
        assert!(Model::parse("x + y;").is_err(), "missing relation");
        assert!(Model::parse("x = 1").is_err(), "missing semicolon");
    }

    #[test]
    fn domain_declarations() {
        let m = Model::parse("x in [0, 1]; x + y <= 2;").unwrap();
        assert_eq!(m.variables["x"], Interval::new(0.0, 1.0));
        assert_eq!(m.variables["y"], Interval::ENTIRE);
        // Outward conversion of non-representable endpoints.
        let m = Model::parse("x in [1/3, 2/3]; x = x;").unwrap();
        let third = BigRational::new(BigInt::from(1), BigInt::from(3));
        assert!(rat::rational_of(m.variables["x"].lo()) <= third);
        // Signed endpoints.
        let m = Model::parse("x in [-10000000, 10000000]; x = 1;").unwrap();
        assert_eq!(m.variables["x"], Interval::new(-1e7, 1e7));

        let e = Model::parse("x in [0,1]; x in [0,2]; x = 1;").unwrap_err();
        assert!(e.msg.contains("conflicting"));
        assert!(Model::parse("x in [0,1]; x in [0,1]; x = 1;").is_ok());
        assert!(Model::parse("x in [2,1]; x = 1;").unwrap_err().msg.contains("empty domain"));
    }

    #[test]
    fn boolean_constructs_rejected() {
        let e = Model::parse("x = 1 and y = 2;").unwrap_err();
        assert!(e.msg.contains("unsupported construct"), "{}", e.msg);
        let e = Model::parse("true;").unwrap_err();
        assert!(e.msg.contains("unsupported construct"));
    }

    #[test]
    fn strict_inequalities_warn_and_close() {
        let m = Model::parse("x < 1; y > 0;").unwrap();
        assert_eq!(m.warnings.len(), 2);
        let NodeKind::Chain { rels, .. } = &m.dag.node(m.roots[0]).kind else {
            panic!()
        };
        assert_eq!(rels, &[Rel::Le]);
    }

    #[test]
    fn evaluate_ranges_basics() {
        let mut m = Model::parse("x in [0, 1]; x + x <= 2;").unwrap();
        m.evaluate_ranges();
        assert!(m.infeasible.is_none());
        let add = m
            .dag
            .iter()
            .find(|(_, n)| matches!(n.kind, NodeKind::Add(..)))
            .unwrap()
            .1;
        assert!(add.enclosure.contains_interval(&Interval::new(0.0, 2.0)));

        let mut m = Model::parse("y = 1/3;").unwrap();
        m.evaluate_ranges();
        let third = BigRational::new(BigInt::from(1), BigInt::from(3));
        let c = m
            .dag
            .iter()
            .find(|(_, n)| matches!(&n.kind, NodeKind::Const(r) if *r == third))
            .unwrap()
            .1;
        assert!(rat::rational_of(c.enclosure.lo()) <= third);
        assert!(third <= rat::rational_of(c.enclosure.hi()));
        assert_eq!(c.enclosure.lo().next_up(), c.enclosure.hi());

        let mut m =
            Model::parse("x in [-10000000, 10000000]; y in [-10000000, 10000000]; x + y = 0;")
                .unwrap();
        m.evaluate_ranges();
        let add = m
            .dag
            .iter()
            .find(|(_, n)| matches!(n.kind, NodeKind::Add(..)))
            .unwrap()
            .1;
        assert_eq!(add.enclosure, Interval::new(-2e7, 2e7));
    }

    #[test]
    fn evaluate_ranges_flags_domain_violations() {
        let mut m = Model::parse("x in [-2, -1]; ln(x) = 0;").unwrap();
        m.evaluate_ranges();
        assert!(m.infeasible.is_some());
        let mut m = Model::parse("x / (1 - 1) = 2;").unwrap();
        m.evaluate_ranges();
        assert!(m.infeasible.as_deref().unwrap().contains("quotient"));
        let mut m = Model::parse("x in [1, 4]; sqrt(x) <= 2;").unwrap();
        m.evaluate_ranges();
        assert!(m.infeasible.is_none());
    }

    #[test]
    fn print_parse_round_trip() {
        let sources = [
            "x + y = 3;",
            "0 <= x - y <= 1;",
            "sin(x + y) = 0; x + y <= 2;",
            "x in [0, 1]; y in [-1/2, 1/2]; (1/3)*x - 2*y >= 0.25;",
            "abs(x - 2) <= exp(y) - 1; sqrt(x) >= 0;",
            "z = -(x + y) / 3 - -2;",
            "x in [-10000000, 10000000]; x + y = 3e-7; x + (1 + 1e-7) * y = 1e-7;",
        ];
        for src in sources {
            let m1 = Model::parse(src).unwrap();
            let printed = m1.to_string();
            let m2 = Model::parse(&printed)
                .unwrap_or_else(|e| panic!("reparse of {printed:?} failed: {e}"));
            assert!(
                structurally_equal(&m1, &m2),
                "round trip changed structure:\n{src}\n-> {printed}"
            );
        }
    }

    proptest! {
        #[test]
        fn range_soundness_on_random_points(
            xn in -8i64..8, xd in 1i64..4, yn in -8i64..8, yd in 1i64..4
        ) {
            let mut m = Model::parse(
                "x in [-2, 2]; y in [-2, 2]; (x + 2*y) * (x - y) - x/4 = 0; abs(x) <= 2;",
            )
            .unwrap();
            m.evaluate_ranges();
            let clamp = |n: i64, d: i64| {
                let r = BigRational::new(BigInt::from(n), BigInt::from(4 * d));
                let two = BigRational::from_i64(2).unwrap();
                if r > two { two } else if r < -two.clone() { -two } else { r }
            };
            let mut point = BTreeMap::new();
            point.insert("x".to_string(), clamp(xn, xd));
            point.insert("y".to_string(), clamp(yn, yd));
            for (id, node) in m.dag.iter() {
                if matches!(node.kind, NodeKind::Chain { .. }) {
                    continue;
                }
                if let Some(v) = eval_rational(&m.dag, id, &point) {
                    let lo_ok = node.enclosure.lo() == f64::NEG_INFINITY
                        || rat::rational_of(node.enclosure.lo()) <= v;
                    let hi_ok = node.enclosure.hi() == f64::INFINITY
                        || v <= rat::rational_of(node.enclosure.hi());
                    prop_assert!(lo_ok && hi_ok, "node {id} enclosure misses exact value");
                }
            }
        }
    }

    #[test]
    fn one_ulp_rational_constants() {
        // Denominator not a power of two: enclosure is exactly one ulp wide.
        let mut m = Model::parse("x = 1/10;").unwrap();
        m.evaluate_ranges();
        let c = m
            .dag
            .iter()
            .find(|(_, n)| {
                matches!(&n.kind, NodeKind::Const(r) if r.denom() != &BigInt::from(1))
            })
            .unwrap()
            .1;
        assert!(c.enclosure.width() <= 0.1f64.next_up() - 0.1);
    }
}
