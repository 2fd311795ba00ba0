//! Arithmetic expressions over the state coordinates `x1..xd` and time `t`.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?          // right associative
//! primary := number | x<i> | t | func '(' args ')' | '(' expr ')'
//! ```
//!
//! Functions: `sin cos exp ln sqrt abs` (one argument) and `min max` (two).

mod parse;

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;

use crate::math;

pub use parse::parse_expression;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    /// Zero-based coordinate index; `x1` is `Coord(0)`.
    Coord(usize),
    Time,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
    Abs,
    Min,
    Max,
}

impl Func {
    pub(crate) fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("ln of non-positive argument {0}")]
    LnDomain(f64),
    #[error("sqrt of negative argument {0}")]
    SqrtDomain(f64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("non-finite result from `{0}`")]
    NonFinite(&'static str),
}

/// Parsed expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

impl Expr {
    pub fn eval(&self, x: &[f64], t: f64) -> Result<f64, EvalError> {
        let v = match self {
            Expr::Num(v) => *v,
            Expr::Var(Var::Coord(i)) => x[*i],
            Expr::Var(Var::Time) => t,
            Expr::Neg(e) => -e.eval(x, t)?,
            Expr::Bin(op, l, r) => {
                let a = l.eval(x, t)?;
                let b = r.eval(x, t)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(EvalError::DivisionByZero);
                        }
                        a / b
                    }
                    BinOp::Pow => check(math::pow(a, b), "^")?,
                }
            }
            Expr::Call(f, args) => {
                let a = args[0].eval(x, t)?;
                match f {
                    Func::Sin => math::sin(a),
                    Func::Cos => math::cos(a),
                    Func::Exp => check(math::exp(a), "exp")?,
                    Func::Ln => {
                        if a <= 0.0 {
                            return Err(EvalError::LnDomain(a));
                        }
                        math::ln(a)
                    }
                    Func::Sqrt => {
                        if a < 0.0 {
                            return Err(EvalError::SqrtDomain(a));
                        }
                        math::sqrt(a)
                    }
                    Func::Abs => a.abs(),
                    Func::Min => a.min(args[1].eval(x, t)?),
                    Func::Max => a.max(args[1].eval(x, t)?),
                }
            }
        };
        check(v, "arithmetic")
    }

    /// True if the expression mentions `t`.
    pub fn uses_time(&self) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(v) => *v == Var::Time,
            Expr::Neg(e) => e.uses_time(),
            Expr::Bin(_, l, r) => l.uses_time() || r.uses_time(),
            Expr::Call(_, args) => args.iter().any(Expr::uses_time),
        }
    }

    /// Largest coordinate index used (one-based), 0 if none.
    pub fn max_coord(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Var(Var::Time) => 0,
            Expr::Var(Var::Coord(i)) => i + 1,
            Expr::Neg(e) => e.max_coord(),
            Expr::Bin(_, l, r) => l.max_coord().max(r.max_coord()),
            Expr::Call(_, args) => args.iter().map(Expr::max_coord).max().unwrap_or(0),
        }
    }

    fn is_atom(&self) -> bool {
        matches!(self, Expr::Num(_) | Expr::Var(_) | Expr::Call(..))
    }
}

fn check(v: f64, op: &'static str) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite(op))
    }
}

struct Wrapped<'a>(&'a Expr);

impl fmt::Display for Wrapped<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_atom() {
            write!(f, "{}", self.0)
        } else {
            write!(f, "({})", self.0)
        }
    }
}

/// Prints text that parses back to a structurally identical tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var(Var::Coord(i)) => write!(f, "x{}", i + 1),
            Expr::Var(Var::Time) => f.write_str("t"),
            Expr::Neg(e) => write!(f, "-{}", Wrapped(e)),
            Expr::Bin(op, l, r) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "{} {sym} {}", Wrapped(l), Wrapped(r))
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Evaluates a vector of expressions into `out`.
pub(crate) fn eval_all(exprs: &[Expr], x: &[f64], t: f64, out: &mut Vec<f64>) -> Result<(), EvalError> {
    out.clear();
    for e in exprs {
        out.push(e.eval(x, t)?);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use alloc::string::ToString;

    fn p(s: &str, d: usize) -> Expr {
        parse_expression(s, d).unwrap()
    }

    #[test]
    fn evaluates_translation_coordinate() {
        let e = p("x1 + t", 2);
        assert_eq!(e.eval(&[0.25, 0.7], 0.5).unwrap(), 0.75);
    }

    #[test]
    fn evaluates_radial_decay() {
        let e = p("x1*exp(-t)", 2);
        let v = e.eval(&[1.0, 0.0], 1.0).unwrap();
        assert!((v - libm::exp(-1.0)).abs() < 1e-16);
    }

    #[test]
    fn unbound_coordinate() {
        assert_eq!(
            parse_expression("x3", 2),
            Err(Error::UnboundVariable { name: "x3".into() })
        );
        assert!(matches!(
            parse_expression("x0 + 1", 2),
            Err(Error::UnboundVariable { .. })
        ));
        assert!(matches!(parse_expression("y", 2), Err(Error::UnboundVariable { .. })));
    }

    #[test]
    fn precedence_and_associativity() {
        let v = |s: &str| p(s, 1).eval(&[2.0], 0.0).unwrap();
        assert_eq!(v("-x1^2"), -4.0);
        assert_eq!(v("2^3^2"), 512.0);
        assert_eq!(v("2^-1"), 0.5);
        assert_eq!(v("1 - 2 - 3"), -4.0);
        assert_eq!(v("8 / 4 / 2"), 1.0);
        assert_eq!(v("1 + 2 * 3"), 7.0);
        assert_eq!(v("(1 + 2) * 3"), 9.0);
        assert_eq!(v("max(x1, 3) - min(1, -x1)"), 5.0);
        assert_eq!(v("--x1"), 2.0);
        assert_eq!(v("1.5e1 + .5"), 15.5);
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match parse_expression("1 + * 2", 1) {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_expression("", 1), Err(Error::Syntax { .. })));
        assert!(matches!(parse_expression("(x1", 1), Err(Error::Syntax { .. })));
        assert!(matches!(parse_expression("x1 x1", 1), Err(Error::Syntax { .. })));
        assert!(matches!(parse_expression("sin(1, 2)", 1), Err(Error::Syntax { .. })));
        assert!(matches!(parse_expression("foo(1)", 1), Err(Error::Syntax { .. })));
        assert!(matches!(parse_expression("1 $ 2", 1), Err(Error::Syntax { .. })));
    }

    #[test]
    fn tagged_evaluation_errors() {
        assert_eq!(p("ln(x1)", 1).eval(&[0.0], 0.0), Err(EvalError::LnDomain(0.0)));
        assert_eq!(p("sqrt(x1)", 1).eval(&[-1.0], 0.0), Err(EvalError::SqrtDomain(-1.0)));
        assert_eq!(p("1 / x1", 1).eval(&[0.0], 0.0), Err(EvalError::DivisionByZero));
        assert!(p("exp(x1)", 1).eval(&[1e4], 0.0).is_err());
        assert!(p("x1 ^ 0.5", 1).eval(&[-1.0], 0.0).is_err());
    }

    #[test]
    fn display_reparses_to_same_tree() {
        for s in [
            "x1 + t",
            "-(x1 - x2) * 3",
            "(-x1)^2",
            "2^3^2",
            "(2^3)^2",
            "1 - (2 - 3)",
            "sqrt(1 - x2^2)",
            "x1^2 + x2^2 - exp(-2)",
            "max(x1, -1e-10) / 3.25",
        ] {
            let e = p(s, 2);
            let again = p(&e.to_string(), 2);
            assert_eq!(e, again, "{s} -> {e}");
        }
    }

    proptest::proptest! {
        #[test]
        fn random_sums_roundtrip(a in 0.0f64..1e6, b in 1e-9f64..1e3, c in 0usize..2) {
            let s = alloc::format!("{a:?} * x{} - {b:?} / (t + 1)", c + 1);
            let e = p(&s, 2);
            proptest::prop_assert_eq!(p(&e.to_string(), 2), e);
        }
    }
}
