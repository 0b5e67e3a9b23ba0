//! Recursive-descent parser for polynomial expressions in `x, y`.
//!
//! Grammar (whitespace ignored):
//!
//! ```text
//! expr   ::= term (('+' | '-') term)*
//! term   ::= unary (('*' unary) | ('/' number))*
//! unary  ::= ('-' | '+') unary | power
//! power  ::= atom ('^' nonneg-integer)*
//! atom   ::= number | 'x' | 'y' | '(' expr ')'
//! number ::= digits ['.' digits]
//! ```
//!
//! Division is restricted to numeric literals; decimals convert exactly to
//! rationals. Errors carry the byte offset of the offending token.

use super::{BiPoly, Rat};
use crate::{Error, Result};
use num_bigint::BigInt;
use num_traits::{One, Zero};

/// Parses an expression string into an exact expanded sparse polynomial.
pub fn parse_polynomial(text: &str) -> Result<BiPoly> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    p.skip_ws();
    let out = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, message: &str) -> Error {
        Error::Parse { offset: self.pos, message: message.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            self.skip_ws();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<BiPoly> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = acc.add(&self.term()?);
            } else if self.eat(b'-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<BiPoly> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc = acc.mul(&self.unary()?);
            } else if self.eat(b'/') {
                let at = self.pos;
                let neg = self.eat(b'-');
                let d = self.number()?;
                let d = if neg { -d } else { d };
                if d.is_zero() {
                    return Err(Error::Parse {
                        offset: at,
                        message: "division by zero literal".into(),
                    });
                }
                acc = acc.scale(&(Rat::one() / d));
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<BiPoly> {
        if self.eat(b'-') {
            return Ok(self.unary()?.neg());
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<BiPoly> {
        let mut base = self.atom()?;
        while self.eat(b'^') {
            let at = self.pos;
            let e = self.number()?;
            if !e.denom().is_one() || e < Rat::zero() {
                return Err(Error::Parse {
                    offset: at,
                    message: "exponent must be a nonnegative integer".into(),
                });
            }
            let e: u32 = e.numer().try_into().map_err(|_| Error::Parse {
                offset: at,
                message: "exponent too large".into(),
            })?;
            base = base.pow(e);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<BiPoly> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                self.skip_ws();
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.number()?;
                Ok(BiPoly::constant(n))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self
                    .peek()
                    .map(|c| c.is_ascii_alphanumeric() || c == b'_')
                    .unwrap_or(false)
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let out = match name {
                    "x" => BiPoly::x(),
                    "y" => BiPoly::y(),
                    _ => {
                        return Err(Error::Parse {
                            offset: start,
                            message: format!("unknown identifier `{name}`"),
                        })
                    }
                };
                self.skip_ws();
                Ok(out)
            }
            _ => Err(self.err("expected a number, variable, or '('")),
        }
    }

    /// Unsigned integer or decimal literal, converted exactly.
    fn number(&mut self) -> Result<Rat> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected a number"));
        }
        let int_part: BigInt = std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .unwrap();
        let mut value = Rat::from_integer(int_part);
        if self.peek() == Some(b'.') {
            self.pos += 1;
            let fstart = self.pos;
            while self.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
                self.pos += 1;
            }
            if self.pos == fstart {
                return Err(self.err("expected digits after decimal point"));
            }
            let digits = std::str::from_utf8(&self.src[fstart..self.pos]).unwrap();
            let num: BigInt = digits.parse().unwrap();
            let den = BigInt::from(10u32).pow(digits.len() as u32);
            value += Rat::new(num, den);
        }
        self.skip_ws();
        Ok(value)
    }
}


#[cfg(test)]
mod prop_tests {
    use super::*;
    use crate::poly::{ratio, MonomialOrder};
    use proptest::prelude::*;

    fn arb_poly() -> impl Strategy<Value = BiPoly> {
        proptest::collection::vec(((0u32..5, 0u32..5), -20i64..20, 1i64..6), 0..8).prop_map(
            |terms| {
                let mut p = BiPoly::zero();
                for ((i, j), n, d) in terms {
                    p.add_term((i, j), ratio(n, d));
                }
                p
            },
        )
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(p in arb_poly()) {
            let back = parse_polynomial(&p.to_string()).unwrap();
            prop_assert_eq!(back, p);
        }

        #[test]
        fn add_sub_cancels(a in arb_poly(), b in arb_poly()) {
            prop_assert_eq!(a.add(&b).sub(&b), a);
        }

        #[test]
        fn gcd_divides_both(a in arb_poly(), b in arb_poly()) {
            let g = crate::poly::poly_gcd(&a, &b);
            if !g.is_zero() {
                prop_assert!(a.exact_div(&g).is_some());
                prop_assert!(b.exact_div(&g).is_some());
                // monic under grevlex
                let (_, lc) = g.leading_term(MonomialOrder::GrevLex).unwrap();
                prop_assert_eq!(lc, crate::poly::rat(1));
            }
        }
    }
}
