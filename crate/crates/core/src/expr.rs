//! Closed-form rate expressions over species counts.
//!
//! The language covers sums, differences, products, quotients, nonnegative
//! integer powers, factorials and indicators of conjunctions of linear
//! comparisons, e.g. `2*((A+1)!)^2*[A>=1, U>=1]`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::num::{factorial, format_rat, rat_pow, Rat};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExprError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("factorial of non-natural value {0}")]
    BadFactorial(String),
    #[error("expression evaluated to negative value {0}")]
    Negative(String),
    #[error("variable index {0} out of range")]
    UnknownVariable(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Ge,
    Gt,
    Le,
    Lt,
    Eq,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
            CmpOp::Le => "<=",
            CmpOp::Lt => "<",
            CmpOp::Eq => "==",
        }
    }

    fn holds(self, lhs: &Rat, rhs: &Rat) -> bool {
        match self {
            CmpOp::Ge => lhs >= rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Lt => lhs < rhs,
            CmpOp::Eq => lhs == rhs,
        }
    }
}

/// Rate expression AST. Variables are species indices.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(Rat),
    Var(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, u32),
    Factorial(Box<Expr>),
    /// 1 when every comparison holds, else 0.
    Indicator(Vec<(Expr, CmpOp, Expr)>),
}

impl Expr {
    /// Evaluate at a state. Intermediate values may be negative; the
    /// caller decides whether a negative final value is an error.
    pub fn eval(&self, x: &[u64]) -> Result<Rat, ExprError> {
        Ok(match self {
            Expr::Const(c) => c.clone(),
            Expr::Var(i) => {
                let v = x.get(*i).ok_or(ExprError::UnknownVariable(*i))?;
                Rat::from_integer(BigInt::from(*v))
            }
            Expr::Add(a, b) => a.eval(x)? + b.eval(x)?,
            Expr::Sub(a, b) => a.eval(x)? - b.eval(x)?,
            Expr::Mul(a, b) => {
                let lhs = a.eval(x)?;
                if lhs.is_zero() {
                    // Still evaluate the right side so errors surface.
                    b.eval(x)?;
                    return Ok(lhs);
                }
                lhs * b.eval(x)?
            }
            Expr::Div(a, b) => {
                let den = b.eval(x)?;
                if den.is_zero() {
                    return Err(ExprError::DivisionByZero);
                }
                a.eval(x)? / den
            }
            Expr::Neg(a) => -a.eval(x)?,
            Expr::Pow(a, k) => rat_pow(&a.eval(x)?, u64::from(*k)),
            Expr::Factorial(a) => {
                let v = a.eval(x)?;
                if !v.is_integer() || v.is_negative() {
                    return Err(ExprError::BadFactorial(format_rat(&v)));
                }
                let n = v
                    .to_integer()
                    .to_u64()
                    .ok_or_else(|| ExprError::BadFactorial(format_rat(&v)))?;
                Rat::from_integer(factorial(n))
            }
            Expr::Indicator(conds) => {
                for (lhs, op, rhs) in conds {
                    if !op.holds(&lhs.eval(x)?, &rhs.eval(x)?) {
                        return Ok(Rat::zero());
                    }
                }
                Rat::from_integer(BigInt::from(1))
            }
        })
    }

    /// Render with species names; the output parses back to an equal tree.
    pub fn display<'a>(&'a self, names: &'a [String]) -> ExprDisplay<'a> {
        ExprDisplay { expr: self, names }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(..) => 3,
            Expr::Pow(..) => 4,
            Expr::Factorial(..) => 5,
            Expr::Const(c) if c.is_negative() || !c.is_integer() => 2,
            _ => 6,
        }
    }
}

pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    names: &'a [String],
}

impl ExprDisplay<'_> {
    fn sub<'b>(&'b self, e: &'b Expr) -> ExprDisplay<'b> {
        ExprDisplay {
            expr: e,
            names: self.names,
        }
    }

    fn wrapped(&self, f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
        if e.precedence() < min_prec {
            write!(f, "({})", self.sub(e))
        } else {
            write!(f, "{}", self.sub(e))
        }
    }
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.expr {
            Expr::Const(c) => write!(f, "{}", format_rat(c)),
            Expr::Var(i) => match self.names.get(*i) {
                Some(name) => write!(f, "{name}"),
                None => write!(f, "?{i}"),
            },
            Expr::Add(a, b) => {
                self.wrapped(f, a, 1)?;
                write!(f, " + ")?;
                self.wrapped(f, b, 2)
            }
            Expr::Sub(a, b) => {
                self.wrapped(f, a, 1)?;
                write!(f, " - ")?;
                self.wrapped(f, b, 2)
            }
            Expr::Mul(a, b) => {
                self.wrapped(f, a, 2)?;
                write!(f, "*")?;
                self.wrapped(f, b, 3)
            }
            Expr::Div(a, b) => {
                self.wrapped(f, a, 2)?;
                write!(f, "/")?;
                self.wrapped(f, b, 3)
            }
            Expr::Neg(a) => {
                write!(f, "-")?;
                self.wrapped(f, a, 4)
            }
            Expr::Pow(a, k) => {
                self.wrapped(f, a, 5)?;
                write!(f, "^{k}")
            }
            Expr::Factorial(a) => {
                self.wrapped(f, a, 6)?;
                write!(f, "!")
            }
            Expr::Indicator(conds) => {
                write!(f, "[")?;
                for (k, (lhs, op, rhs)) in conds.iter().enumerate() {
                    if k > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{} {} {}", self.sub(lhs), op.symbol(), self.sub(rhs))?;
                }
                write!(f, "]")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::rat;

    fn var(i: usize) -> Box<Expr> {
        Box::new(Expr::Var(i))
    }

    #[test]
    fn factorial_rate_with_indicator() {
        // 2((A+1)!)^2 [A>=1, U>=1]
        let e = Expr::Mul(
            Box::new(Expr::Const(rat(2))),
            Box::new(Expr::Mul(
                Box::new(Expr::Pow(
                    Box::new(Expr::Factorial(Box::new(Expr::Add(
                        var(0),
                        Box::new(Expr::Const(rat(1))),
                    )))),
                    2,
                )),
                Box::new(Expr::Indicator(vec![
                    (Expr::Var(0), CmpOp::Ge, Expr::Const(rat(1))),
                    (Expr::Var(1), CmpOp::Ge, Expr::Const(rat(1))),
                ])),
            )),
        );
        assert_eq!(e.eval(&[1, 1]).unwrap(), rat(8));
        assert_eq!(e.eval(&[0, 1]).unwrap(), rat(0));
        assert_eq!(e.eval(&[2, 3]).unwrap(), rat(72));
    }

    #[test]
    fn division_by_zero_is_reported() {
        let e = Expr::Div(Box::new(Expr::Const(rat(1))), var(0));
        assert_eq!(e.eval(&[0]), Err(ExprError::DivisionByZero));
    }

    #[test]
    fn factorial_of_negative_is_reported() {
        let e = Expr::Factorial(Box::new(Expr::Sub(var(0), Box::new(Expr::Const(rat(1))))));
        assert!(matches!(e.eval(&[0]), Err(ExprError::BadFactorial(_))));
    }
}
