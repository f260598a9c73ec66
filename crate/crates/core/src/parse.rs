//! Text syntax for polynomials.
//!
//! ```text
//! poly    := [sign] term { sign term }
//! term    := coeff [ "*" factors ] | factors
//! factors := factor { "*" factor }
//! factor  := var [ "^" nat ] | "(" poly ")" [ "^" nat ]
//! var     := "x" | "y" | "z"
//! coeff   := nat [ "/" nat ]
//! sign    := "+" | "-"
//! ```
//!
//! Whitespace is ignored. A parenthesised sub-expression may be raised to a
//! power, which keeps literal curve definitions such as `x^2*(x+y+1)^2`
//! readable.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::field::{FieldContext, FieldElement};
use crate::poly::{Arity, Monomial, PolyError, Polynomial, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

/// Parses over ℚ. The result is projective if `z` occurs, affine otherwise.
pub fn parse_polynomial(text: &str) -> Result<Polynomial, ParseError> {
    let mut p = Parser::new(text);
    let poly = p.poly()?;
    p.skip_ws();
    if let Some(c) = p.peek() {
        return Err(p.error(format!("unexpected character '{c}'")));
    }
    let arity = if p.saw_z {
        Arity::Projective
    } else {
        Arity::Affine
    };
    Ok(Polynomial::from_terms(
        &FieldContext::Rationals,
        arity,
        poly.into_iter().map(|(m, c)| (m, FieldElement::Rational(c))),
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyInputError {
    #[error(transparent)]
    Syntax(#[from] ParseError),
    #[error("cannot use this polynomial here: {0}")]
    Poly(#[from] PolyError),
}

/// Parses and maps into the given field with the requested arity.
pub fn parse_in(text: &str, ctx: &FieldContext, arity: Arity) -> Result<Polynomial, PolyInputError> {
    let poly = parse_polynomial(text)?;
    let poly = match (poly.arity(), arity) {
        (Arity::Projective, Arity::Affine) => return Err(PolyError::ArityMismatch.into()),
        (Arity::Affine, Arity::Projective) => poly.to_projective(),
        _ => poly,
    };
    Ok(poly.to_context(ctx)?)
}

type Terms = Vec<(Monomial, BigRational)>;

struct Parser {
    chars: Vec<char>,
    pos: usize,
    saw_z: bool,
}

impl Parser {
    fn new(text: &str) -> Self {
        Parser {
            chars: text.chars().collect(),
            pos: 0,
            saw_z: false,
        }
    }

    fn error(&self, message: String) -> ParseError {
        let consumed: String = self.chars[..self.pos.min(self.chars.len())].iter().collect();
        let line = consumed.matches('\n').count() + 1;
        let column = consumed.rsplit('\n').next().map_or(0, |s| s.chars().count()) + 1;
        ParseError {
            line,
            column,
            message,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn nat(&mut self) -> Result<BigInt, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected a natural number".into()));
        }
        let digits: String = self.chars[start..self.pos].iter().collect();
        Ok(digits.parse().expect("digits"))
    }

    fn exponent(&mut self) -> Result<u32, ParseError> {
        let n = self.nat()?;
        u32::try_from(n).map_err(|_| self.error("exponent too large".into()))
    }

    fn poly(&mut self) -> Result<Terms, ParseError> {
        let mut acc: Terms = Vec::new();
        let mut negative = if self.eat('-') {
            true
        } else {
            self.eat('+');
            false
        };
        loop {
            let term = self.term()?;
            for (m, c) in term {
                acc.push((m, if negative { -c } else { c }));
            }
            if self.eat('+') {
                negative = false;
            } else if self.eat('-') {
                negative = true;
            } else {
                break;
            }
        }
        Ok(normalize(acc))
    }

    fn term(&mut self) -> Result<Terms, ParseError> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                let num = self.nat()?;
                let coeff = if self.eat('/') {
                    let den = self.nat()?;
                    if den.is_zero() {
                        return Err(self.error("zero denominator".into()));
                    }
                    BigRational::new(num, den)
                } else {
                    BigRational::from_integer(num)
                };
                let base = vec![(Monomial::ONE, coeff)];
                if self.eat('*') {
                    let rest = self.factors()?;
                    Ok(multiply(&base, &rest))
                } else {
                    Ok(normalize(base))
                }
            }
            Some(_) => self.factors(),
            None => Err(self.error("unexpected end of input".into())),
        }
    }

    fn factors(&mut self) -> Result<Terms, ParseError> {
        let mut acc = self.factor()?;
        while self.eat('*') {
            let f = self.factor()?;
            acc = multiply(&acc, &f);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Terms, ParseError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.poly()?;
                if !self.eat(')') {
                    return Err(self.error("expected ')'".into()));
                }
                if self.eat('^') {
                    let e = self.exponent()?;
                    let mut acc = vec![(Monomial::ONE, BigRational::from_integer(1.into()))];
                    for _ in 0..e {
                        acc = multiply(&acc, &inner);
                    }
                    Ok(acc)
                } else {
                    Ok(inner)
                }
            }
            Some(c) => match Var::from_char(c) {
                Some(v) => {
                    self.pos += 1;
                    if v == Var::Z {
                        self.saw_z = true;
                    }
                    let e = if self.eat('^') { self.exponent()? } else { 1 };
                    let mut exps = [0u32; 3];
                    exps[v.index()] = e;
                    Ok(vec![(Monomial(exps), BigRational::from_integer(1.into()))])
                }
                None => Err(self.error(format!("unexpected character '{c}'"))),
            },
            None => Err(self.error("unexpected end of input".into())),
        }
    }
}

fn normalize(terms: Terms) -> Terms {
    let mut map = std::collections::BTreeMap::<Monomial, BigRational>::new();
    for (m, c) in terms {
        *map.entry(m).or_insert_with(BigRational::zero) += c;
    }
    map.into_iter().filter(|(_, c)| !c.is_zero()).collect()
}

fn multiply(a: &Terms, b: &Terms) -> Terms {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for (m1, c1) in a {
        for (m2, c2) in b {
            out.push((m1.mul(m2), c1 * c2));
        }
    }
    normalize(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_cusp() {
        let f = parse_polynomial("x^2 - y^3").unwrap();
        assert_eq!(f.to_string(), "-y^3 + x^2");
        assert_eq!(f.arity(), Arity::Affine);
    }

    #[test]
    fn parses_conic_with_fractions() {
        let f = parse_polynomial("2*x^2+2*x*y+x+2*y+2").unwrap();
        assert_eq!(f.degree(), Some(2));
        let g = parse_polynomial("1/8*(x + y - z)").unwrap();
        assert_eq!(g.arity(), Arity::Projective);
        assert_eq!(g.to_string(), "1/8*x + 1/8*y - 1/8*z");
    }

    #[test]
    fn power_of_parenthesis() {
        let f = parse_polynomial("(x+y)^2").unwrap();
        assert_eq!(f, parse_polynomial("x^2+2*x*y+y^2").unwrap());
        assert_eq!(parse_polynomial("(x)^0").unwrap().to_string(), "1");
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let e = parse_polynomial("x^^2").unwrap_err();
        assert_eq!((e.line, e.column), (1, 3));
        let e = parse_polynomial("x +\n  w").unwrap_err();
        assert_eq!((e.line, e.column), (2, 3));
        assert!(parse_polynomial("").is_err());
        assert!(parse_polynomial("x*2").is_err());
        assert!(parse_polynomial("(x+1").is_err());
        assert!(parse_polynomial("1/0").is_err());
    }

    #[test]
    fn parse_into_prime_field() {
        let f = parse_in("1/2*x + 8", &FieldContext::Prime(7), Arity::Affine).unwrap();
        assert_eq!(f.to_string(), "4*x + 1");
        assert!(parse_in("z", &FieldContext::Rationals, Arity::Affine).is_err());
    }
}
