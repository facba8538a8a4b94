//! The `.crn` network text format and the JSON report schemas.
//!
//! ```text
//! # comment
//! species A, B, U
//! A -> U : k=1
//! U -> A : k=2
//! A + U -> U : rate=2*((A+1)!)^2*[A>=1, U>=1]
//! A -> 0 : k=1/2
//! set fast = U
//! scaling U=1
//! ```
//!
//! The `species` header is optional; without it species are numbered in order
//! of first appearance. `0` is the zero complex. Coefficients are integer
//! prefixes (`2 B` or `2B`).

pub mod json;
mod lexer;

use std::collections::HashSet;

use thiserror::Error;

use crate::expr::{CmpOp, Expr};
use crate::model::{Complex, Kinetics, ModelError, Network, Reaction};
use crate::num::{format_rat, parse_rat, Rat};

use lexer::{Lexer, Token};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error, expected {expected}")]
    Syntax {
        line: usize,
        col: usize,
        expected: String,
    },
    #[error("{line}:{col}: unknown species `{name}`")]
    UnknownSpecies {
        line: usize,
        col: usize,
        name: String,
    },
    #[error("{line}:{col}: duplicate reaction (merge the rates into one line)")]
    DuplicateReaction { line: usize, col: usize },
    #[error("{line}:{col}: stoichiometric coefficient must be a nonnegative integer, got `{text}`")]
    BadCoefficient {
        line: usize,
        col: usize,
        text: String,
    },
    #[error("{line}: {source}")]
    Model { line: usize, source: ModelError },
}

impl ParseError {
    pub fn line(&self) -> usize {
        match self {
            ParseError::Syntax { line, .. }
            | ParseError::UnknownSpecies { line, .. }
            | ParseError::DuplicateReaction { line, .. }
            | ParseError::BadCoefficient { line, .. }
            | ParseError::Model { line, .. } => *line,
        }
    }
}

/// A named set of species declared with `set NAME = A, B`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpeciesSet {
    pub name: String,
    pub species: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkDocument {
    pub network: Network,
    pub sets: Vec<SpeciesSet>,
    /// Scaling exponents per species, in declaration order.
    pub scaling: Option<Vec<(String, Rat)>>,
}

impl NetworkDocument {
    pub fn set(&self, name: &str) -> Option<&SpeciesSet> {
        self.sets.iter().find(|s| s.name == name)
    }
}

struct RawReaction {
    line: usize,
    reactant: Vec<(String, u64, usize)>,
    product: Vec<(String, u64, usize)>,
    kinetics: RawKinetics,
}

enum RawKinetics {
    Rate(Rat),
    Expr { text: String, col: usize },
}

type ScalingEntry = (String, Rat, usize);

/// Parse a `.crn` document.
pub fn parse_network(text: &str) -> Result<NetworkDocument, ParseError> {
    let mut header: Option<Vec<String>> = None;
    let mut raw = Vec::new();
    let mut sets = Vec::new();
    // Line of the scaling block and its `(species, beta, column)` entries.
    let mut scaling_raw: Option<(usize, Vec<ScalingEntry>)> = None;

    for (idx, full_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match full_line.find('#') {
            Some(p) => &full_line[..p],
            None => full_line,
        };
        if line.trim().is_empty() {
            continue;
        }
        let mut lx = Lexer::new(line, line_no);
        match lx.peek_ident() {
            Some("species") if !line.contains("->") => {
                lx.next_token()?;
                lx.eat_symbol(":");
                let names = lx.ident_list()?;
                lx.expect_end()?;
                header = Some(names);
            }
            Some("set") if !line.contains("->") => {
                lx.next_token()?;
                let (name, _) = lx.expect_ident()?;
                lx.expect_symbol("=")?;
                let members = lx.ident_list()?;
                lx.expect_end()?;
                sets.push((line_no, name, members));
            }
            Some("scaling") if !line.contains("->") => {
                lx.next_token()?;
                lx.eat_symbol(":");
                let mut entries = Vec::new();
                loop {
                    let (name, col) = lx.expect_ident()?;
                    lx.expect_symbol("=")?;
                    let value = lx.expect_rational()?;
                    entries.push((name, value, col));
                    if !lx.eat_symbol(",") {
                        break;
                    }
                }
                lx.expect_end()?;
                scaling_raw = Some((line_no, entries));
            }
            _ => raw.push(parse_reaction_line(line, line_no)?),
        }
    }

    let names: Vec<String> = match &header {
        Some(h) => h.clone(),
        None => {
            let mut order = Vec::new();
            for r in &raw {
                for (name, _, _) in r.reactant.iter().chain(&r.product) {
                    if !order.contains(name) {
                        order.push(name.clone());
                    }
                }
            }
            order
        }
    };
    let index_of = |name: &str| names.iter().position(|n| n == name);
    let n = names.len();

    let mut reactions = Vec::with_capacity(raw.len());
    let mut seen = HashSet::new();
    for r in &raw {
        let build = |terms: &[(String, u64, usize)]| -> Result<Complex, ParseError> {
            let mut counts = vec![0u64; n];
            for (name, coeff, col) in terms {
                let i = index_of(name).ok_or_else(|| ParseError::UnknownSpecies {
                    line: r.line,
                    col: *col,
                    name: name.clone(),
                })?;
                counts[i] += coeff;
            }
            Ok(Complex::new(counts))
        };
        let reactant = build(&r.reactant)?;
        let product = build(&r.product)?;
        if !seen.insert((reactant.clone(), product.clone())) {
            return Err(ParseError::DuplicateReaction { line: r.line, col: 1 });
        }
        let kinetics = match &r.kinetics {
            RawKinetics::Rate(k) => Kinetics::MassAction(k.clone()),
            RawKinetics::Expr { text, col } => {
                Kinetics::Expr(parse_expr_at(text, &names, r.line, *col)?)
            }
        };
        reactions.push(Reaction::new(reactant, product, kinetics));
    }

    let mut species_sets = Vec::new();
    for (line, name, members) in sets {
        for m in &members {
            if index_of(m).is_none() {
                return Err(ParseError::UnknownSpecies {
                    line,
                    col: 1,
                    name: m.clone(),
                });
            }
        }
        species_sets.push(SpeciesSet {
            name,
            species: members,
        });
    }

    let scaling = match scaling_raw {
        Some((line, entries)) => {
            let mut out = Vec::new();
            for (name, value, col) in entries {
                if index_of(&name).is_none() {
                    return Err(ParseError::UnknownSpecies { line, col, name });
                }
                out.push((name, value));
            }
            Some(out)
        }
        None => None,
    };

    let network = Network::new(names, reactions).map_err(|source| ParseError::Model {
        line: raw.first().map_or(1, |r| r.line),
        source,
    })?;
    Ok(NetworkDocument {
        network,
        sets: species_sets,
        scaling,
    })
}

fn parse_reaction_line(line: &str, line_no: usize) -> Result<RawReaction, ParseError> {
    let mut lx = Lexer::new(line, line_no);
    let reactant = parse_complex(&mut lx)?;
    lx.expect_symbol("->")?;
    let product = parse_complex(&mut lx)?;
    lx.expect_symbol(":")?;
    let (key, key_col) = lx.expect_ident()?;
    lx.expect_symbol("=")?;
    let kinetics = match key.as_str() {
        "k" => {
            let value = lx.expect_rational()?;
            lx.expect_end()?;
            RawKinetics::Rate(value)
        }
        "rate" => {
            let (text, col) = lx.rest();
            if text.trim().is_empty() {
                return Err(lx.error_at(col, "a rate expression"));
            }
            RawKinetics::Expr {
                text: text.to_string(),
                col,
            }
        }
        _ => return Err(lx.error_at(key_col, "`k=` or `rate=`")),
    };
    Ok(RawReaction {
        line: line_no,
        reactant,
        product,
        kinetics,
    })
}

fn parse_complex(lx: &mut Lexer<'_>) -> Result<Vec<(String, u64, usize)>, ParseError> {
    let mut terms = Vec::new();
    // The empty complex may be written `0` or left blank.
    if matches!(lx.peek()?, Token::Symbol("->") | Token::Symbol(":")) {
        return Ok(terms);
    }
    loop {
        let col = lx.column();
        match lx.next_token()? {
            Token::Number(text) => {
                if text.contains('.') || text.contains('/') {
                    return Err(ParseError::BadCoefficient {
                        line: lx.line(),
                        col,
                        text: text.to_string(),
                    });
                }
                let coeff: u64 = text.parse().map_err(|_| ParseError::BadCoefficient {
                    line: lx.line(),
                    col,
                    text: text.to_string(),
                })?;
                if let Token::Ident(_) = lx.peek()? {
                    let (name, name_col) = lx.expect_ident()?;
                    terms.push((name, coeff, name_col));
                } else if coeff != 0 {
                    let at = lx.column();
                    return Err(lx.error_at(at, "a species name"));
                }
            }
            Token::Ident(name) => terms.push((name.to_string(), 1, col)),
            Token::Symbol("-") => {
                return Err(ParseError::BadCoefficient {
                    line: lx.line(),
                    col,
                    text: "-".into(),
                })
            }
            _ => return Err(lx.error_at(col, "a species term")),
        }
        if !lx.eat_symbol("+") {
            break;
        }
    }
    Ok(terms)
}

/// Parse a rate expression over the given species names.
pub fn parse_expr(text: &str, names: &[String]) -> Result<Expr, ParseError> {
    parse_expr_at(text, names, 1, 1)
}

fn parse_expr_at(text: &str, names: &[String], line: usize, col: usize) -> Result<Expr, ParseError> {
    let mut p = ExprParser {
        lx: Lexer::with_offset(text, line, col),
        names,
    };
    let e = p.expr()?;
    p.lx.expect_end()?;
    Ok(e)
}

struct ExprParser<'a> {
    lx: Lexer<'a>,
    names: &'a [String],
}

impl ExprParser<'_> {
    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.lx.eat_symbol("+") {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.lx.eat_symbol("-") {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.lx.eat_symbol("*") {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.lx.eat_symbol("/") {
                let rhs = self.unary()?;
                lhs = match (lhs, rhs) {
                    (Expr::Const(a), Expr::Const(b)) if !num_traits::Zero::is_zero(&b) => {
                        Expr::Const(a / b)
                    }
                    (a, b) => Expr::Div(Box::new(a), Box::new(b)),
                };
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.lx.eat_symbol("-") {
            return Ok(match self.unary()? {
                Expr::Const(c) => Expr::Const(-c),
                e => Expr::Neg(Box::new(e)),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.postfix()?;
        if self.lx.eat_symbol("^") {
            let col = self.lx.column();
            match self.lx.next_token()? {
                Token::Number(text) => {
                    let k: u32 = text
                        .parse()
                        .map_err(|_| self.lx.error_at(col, "a nonnegative integer exponent"))?;
                    return Ok(Expr::Pow(Box::new(base), k));
                }
                _ => return Err(self.lx.error_at(col, "a nonnegative integer exponent")),
            }
        }
        Ok(base)
    }

    fn postfix(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.primary()?;
        while self.lx.eat_symbol("!") {
            e = Expr::Factorial(Box::new(e));
        }
        Ok(e)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let col = self.lx.column();
        match self.lx.next_token()? {
            Token::Number(text) => parse_rat(text)
                .map(Expr::Const)
                .ok_or_else(|| self.lx.error_at(col, "a number")),
            Token::Ident(name) => match self.names.iter().position(|n| n == name) {
                Some(i) => Ok(Expr::Var(i)),
                None => Err(ParseError::UnknownSpecies {
                    line: self.lx.line(),
                    col,
                    name: name.to_string(),
                }),
            },
            Token::Symbol("(") => {
                let e = self.expr()?;
                self.lx.expect_symbol(")")?;
                Ok(e)
            }
            Token::Symbol("[") => {
                let mut conds = Vec::new();
                loop {
                    let lhs = self.expr()?;
                    let op_col = self.lx.column();
                    let op = match self.lx.next_token()? {
                        Token::Symbol(">=") => CmpOp::Ge,
                        Token::Symbol(">") => CmpOp::Gt,
                        Token::Symbol("<=") => CmpOp::Le,
                        Token::Symbol("<") => CmpOp::Lt,
                        Token::Symbol("==") => CmpOp::Eq,
                        _ => return Err(self.lx.error_at(op_col, "a comparison operator")),
                    };
                    let rhs = self.expr()?;
                    conds.push((lhs, op, rhs));
                    if !self.lx.eat_symbol(",") {
                        break;
                    }
                }
                self.lx.expect_symbol("]")?;
                Ok(Expr::Indicator(conds))
            }
            _ => Err(self.lx.error_at(col, "a number, species, `(` or `[`")),
        }
    }
}

/// Canonical text: species header, reactions in order with species sorted
/// alphabetically inside each complex, then sets and scaling.
pub fn serialize_network(doc: &NetworkDocument) -> String {
    let net = &doc.network;
    let names = net.species_names();
    let mut out = String::new();
    out.push_str(&format!("species {}\n", names.join(", ")));
    for r in net.reactions() {
        let kin = match &r.kinetics {
            Kinetics::MassAction(k) => format!("k={}", format_rat(k)),
            Kinetics::Expr(e) => format!("rate={}", e.display(names)),
        };
        out.push_str(&format!(
            "{} -> {} : {}\n",
            r.reactant.format_with(names),
            r.product.format_with(names),
            kin
        ));
    }
    for set in &doc.sets {
        out.push_str(&format!("set {} = {}\n", set.name, set.species.join(", ")));
    }
    if let Some(scaling) = &doc.scaling {
        let entries: Vec<String> = scaling
            .iter()
            .map(|(name, b)| format!("{}={}", name, format_rat(b)))
            .collect();
        out.push_str(&format!("scaling {}\n", entries.join(", ")));
    }
    out
}

/// Serialize a bare network (no sets or scaling).
pub fn serialize_plain(net: &Network) -> String {
    serialize_network(&NetworkDocument {
        network: net.clone(),
        sets: Vec::new(),
        scaling: None,
    })
}
