//! Infix text syntax for expressions.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := factor (('*' | '/') factor)*
//! factor  := '-' factor | power
//! power   := atom ('^' factor)?            -- exponent must fold to a rational
//! atom    := NUMBER | 'pi' | IDENT '\''* call? | '(' expr ')'
//! call    := '(' expr (',' expr)* ')'
//! NUMBER  := digits ['.' digits] [('e'|'E') ['+'|'-'] digits]
//! ```
//!
//! Numeric literals are converted exactly (`0.125` becomes 1/8). Built-in
//! functions are `sin cos tan atan atan2 acos exp ln sqrt` and
//! `quad(dummy, integrand, lower, upper)`. Any other identifier applied to
//! arguments is a formal function symbol; primes mark derivative orders, so
//! `f''(t)` is the second derivative of `f` at `t`. Bare identifiers are
//! parameters when they match a known parameter name (`rho`, `kappa0`–`kappa4`,
//! `a`, `b`, `c`, `a1`–`a3`, `b1`–`b3`, `mu`, `eps`, `alpha`, `beta`, `t0`)
//! and variables otherwise.

use super::{rat, Expr, Rat, Sym};
use num_bigint::BigInt;
use num_traits::{One, Zero};

/// Names parsed as parameters rather than variables.
const PARAM_NAMES: &[&str] = &[
    "rho", "kappa0", "kappa1", "kappa2", "kappa3", "kappa4", "a", "b", "c", "a1", "a2", "a3",
    "b1", "b2", "b3", "mu", "eps", "alpha", "beta", "t0",
];

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
#[error("parse error at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

/// Parse an expression from its text form.
pub fn parse(input: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        src: input.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> ParseError {
        ParseError {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{}`", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    terms.push(self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    terms.push(self.term()?.neg());
                }
                _ => break,
            }
        }
        Ok(Expr::add(terms))
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    acc = acc * rhs;
                }
                Some(b'/') => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    acc = acc / rhs;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            return Ok(self.factor()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let at = self.pos;
            let exp = self.factor()?;
            let r = fold_rational(&exp).ok_or(ParseError {
                pos: at,
                msg: "exponent must be a rational constant".to_string(),
            })?;
            return Ok(Expr::pow(base, r));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            Some(c) => Err(self.err(&format!("unexpected `{}`", c as char))),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let mut int_digits = String::new();
        let mut frac_digits = String::new();
        while let Some(&c) = self.src.get(self.pos) {
            if c.is_ascii_digit() {
                int_digits.push(c as char);
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            while let Some(&c) = self.src.get(self.pos) {
                if c.is_ascii_digit() {
                    frac_digits.push(c as char);
                    self.pos += 1;
                } else {
                    break;
                }
            }
        }
        if int_digits.is_empty() && frac_digits.is_empty() {
            self.pos = start;
            return Err(self.err("malformed number"));
        }
        let mut exp10: i64 = 0;
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            // Only treat as an exponent if followed by digits or a sign.
            let save = self.pos;
            self.pos += 1;
            let mut sign = 1i64;
            if self.src.get(self.pos) == Some(&b'-') {
                sign = -1;
                self.pos += 1;
            } else if self.src.get(self.pos) == Some(&b'+') {
                self.pos += 1;
            }
            let mut digits = String::new();
            while let Some(&c) = self.src.get(self.pos) {
                if c.is_ascii_digit() {
                    digits.push(c as char);
                    self.pos += 1;
                } else {
                    break;
                }
            }
            if digits.is_empty() {
                self.pos = save;
            } else {
                exp10 = sign * digits.parse::<i64>().unwrap();
            }
        }
        let mantissa: BigInt = format!(
            "{}{}",
            if int_digits.is_empty() { "0" } else { &int_digits },
            frac_digits
        )
        .parse()
        .unwrap();
        let shift = exp10 - frac_digits.len() as i64;
        let ten = BigInt::from(10);
        let mut value = Rat::from_integer(mantissa);
        if shift >= 0 {
            value *= Rat::from_integer(ten.pow(shift as u32));
        } else {
            value /= Rat::from_integer(ten.pow((-shift) as u32));
        }
        Ok(Expr::Num(value))
    }

    fn identifier(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while let Some(&c) = self.src.get(self.pos) {
            if c.is_ascii_alphanumeric() || c == b'_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        let name = std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .to_string();
        let mut primes = 0u32;
        while self.src.get(self.pos) == Some(&b'\'') {
            primes += 1;
            self.pos += 1;
        }
        let calls = self.peek() == Some(b'(');
        if !calls {
            if primes > 0 {
                return Err(self.err("derivative marks require an argument list"));
            }
            return Ok(match name.as_str() {
                "pi" => Expr::Pi,
                n if PARAM_NAMES.contains(&n) => Expr::Param(Sym::new(n)),
                n => Expr::Var(Sym::new(n)),
            });
        }
        self.expect(b'(')?;
        let mut args = vec![self.expr()?];
        while self.eat(b',') {
            args.push(self.expr()?);
        }
        self.expect(b')')?;
        let argn = |n: usize, args: &[Expr], s: &mut Self| -> Result<(), ParseError> {
            if args.len() != n {
                Err(s.err(&format!("`{name}` takes {n} argument(s)")))
            } else {
                Ok(())
            }
        };
        let one_arg = |args: &mut Vec<Expr>| args.pop().unwrap();
        if primes > 0 {
            argn(1, &args, self)?;
            return Ok(Expr::Func {
                name: Sym::new(&name),
                order: primes,
                arg: Box::new(one_arg(&mut args)),
            });
        }
        match name.as_str() {
            "sin" => {
                argn(1, &args, self)?;
                Ok(one_arg(&mut args).sin())
            }
            "cos" => {
                argn(1, &args, self)?;
                Ok(one_arg(&mut args).cos())
            }
            "tan" => {
                argn(1, &args, self)?;
                Ok(one_arg(&mut args).tan())
            }
            "atan" | "arctan" => {
                argn(1, &args, self)?;
                Ok(one_arg(&mut args).atan())
            }
            "acos" | "arccos" => {
                argn(1, &args, self)?;
                Ok(one_arg(&mut args).acos())
            }
            "exp" => {
                argn(1, &args, self)?;
                Ok(one_arg(&mut args).exp())
            }
            "ln" | "log" => {
                argn(1, &args, self)?;
                Ok(one_arg(&mut args).ln())
            }
            "sqrt" => {
                argn(1, &args, self)?;
                Ok(Expr::pow(one_arg(&mut args), rat(1, 2)))
            }
            "atan2" => {
                argn(2, &args, self)?;
                let x = args.pop().unwrap();
                let y = args.pop().unwrap();
                Ok(Expr::atan2(y, x))
            }
            "quad" => {
                argn(4, &args, self)?;
                let upper = args.pop().unwrap();
                let lower = args.pop().unwrap();
                let integrand = args.pop().unwrap();
                let dummy = match args.pop().unwrap() {
                    Expr::Var(s) => s,
                    _ => return Err(self.err("quad dummy must be a bare variable name")),
                };
                let lo = fold_rational(&lower)
                    .ok_or_else(|| self.err("quad lower limit must be rational"))?;
                Ok(Expr::Quad(Box::new(super::Quadrature {
                    dummy,
                    integrand,
                    lower: lo,
                    upper,
                })))
            }
            _ => {
                argn(1, &args, self)?;
                Ok(Expr::Func {
                    name: Sym::new(&name),
                    order: 0,
                    arg: Box::new(one_arg(&mut args)),
                })
            }
        }
    }
}

/// Fold a constant expression (built from numbers with + - * / ^ and unary
/// minus) to an exact rational, if possible.
fn fold_rational(e: &Expr) -> Option<Rat> {
    match e {
        Expr::Num(r) => Some(r.clone()),
        Expr::Add(ts) => {
            let mut acc = Rat::zero();
            for t in ts {
                acc += fold_rational(t)?;
            }
            Some(acc)
        }
        Expr::Mul(fs) => {
            let mut acc = Rat::one();
            for f in fs {
                acc *= fold_rational(f)?;
            }
            Some(acc)
        }
        Expr::Pow(b, r) => {
            if !r.is_integer() {
                return None;
            }
            let base = fold_rational(b)?;
            if base.is_zero() {
                return None;
            }
            let e = num_traits::ToPrimitive::to_i32(&r.to_integer())?;
            let mut acc = Rat::one();
            let b = if e >= 0 { base } else { base.recip() };
            for _ in 0..e.unsigned_abs() {
                acc *= b.clone();
            }
            Some(acc)
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::super::{var, Env};
    use super::*;

    #[test]
    fn precedence_and_unary_minus() {
        let e = parse("-x^2 + 2*x*y - y/2").unwrap();
        let mut env = Env::new();
        env.set_var("x", 3.0).set_var("y", 2.0);
        assert_eq!(e.eval(&env).unwrap(), -9.0 + 12.0 - 1.0);
    }

    #[test]
    fn power_is_right_associative_enough() {
        // `x^-2` and `x^(1/2)` both parse.
        let e = parse("x^-2").unwrap();
        let mut env = Env::new();
        env.set_var("x", 2.0);
        assert_eq!(e.eval(&env).unwrap(), 0.25);
        let h = parse("x^(1/2)").unwrap();
        assert_eq!(h.eval(&env).unwrap(), 2.0f64.sqrt());
    }

    #[test]
    fn scientific_notation_is_exact() {
        assert_eq!(parse("2.5e-3").unwrap(), Expr::Num(rat(1, 400)));
        assert_eq!(parse("1e3").unwrap(), Expr::Num(rat(1000, 1)));
    }

    #[test]
    fn primes_mark_derivative_order() {
        match parse("g''(t)").unwrap() {
            Expr::Func { name, order, .. } => {
                assert_eq!(name.as_str(), "g");
                assert_eq!(order, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn params_and_vars_are_distinguished() {
        assert_eq!(parse("rho").unwrap(), Expr::Param(Sym::new("rho")));
        assert_eq!(parse("xi").unwrap(), var("xi"));
    }

    #[test]
    fn rejects_trailing_garbage() {
        assert!(parse("x + ").is_err());
        assert!(parse("x y").is_err());
        assert!(parse("sin(x").is_err());
        assert!(parse("f'").is_err());
    }

    #[test]
    fn quad_literal() {
        let e = parse("quad(eta, 1/eta, 1, x)").unwrap();
        let mut env = Env::new();
        env.set_var("x", std::f64::consts::E);
        assert!((e.eval(&env).unwrap() - 1.0).abs() < 1e-9);
    }
}
