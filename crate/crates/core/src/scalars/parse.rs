//! Parser for scalar expressions in the canonical rendering syntax.
//!
//! Accepts integers, the symbols `q[i,j]`, `q` and `v`, the operators
//! `+ - * /`, integer powers `^k` (including `^-k`) and parentheses.

use num_bigint::BigInt;
use num_rational::BigRational;

use super::poly::Symbol;
use super::rational::Scalar;
use crate::error::{Error, Result};

pub fn parse_scalar(src: &str) -> Result<Scalar> {
    let mut p = Parser {
        s: src.as_bytes(),
        pos: 0,
    };
    let v = p.expr()?;
    p.ws();
    if p.pos != p.s.len() {
        return Err(p.err("trailing input"));
    }
    Ok(v)
}

/// Parses a single symbol name such as `q[1,2]` or `v`.
pub fn parse_symbol(src: &str) -> Result<Symbol> {
    let mut p = Parser {
        s: src.trim().as_bytes(),
        pos: 0,
    };
    let s = p.symbol()?;
    if p.pos != p.s.len() {
        return Err(p.err("trailing input after symbol"));
    }
    Ok(s)
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse(format!(
            "{msg} at offset {} in {:?}",
            self.pos,
            String::from_utf8_lossy(self.s)
        ))
    }

    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Scalar> {
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

    fn term(&mut self) -> Result<Scalar> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc = acc.mul(&self.unary()?);
            } else if self.eat(b'/') {
                let d = self.unary()?;
                acc = acc.div(&d).map_err(|_| self.err("division by zero"))?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Scalar> {
        if self.eat(b'-') {
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<Scalar> {
        let base = self.atom()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        let paren = self.eat(b'(');
        let neg = self.eat(b'-');
        let n = self.integer()?;
        if paren && !self.eat(b')') {
            return Err(self.err("expected ')'"));
        }
        let e: i32 = n
            .try_into()
            .map_err(|_| self.err("exponent out of range"))?;
        let e = if neg { -e } else { e };
        if e < 0 && base.is_zero() {
            return Err(self.err("negative power of zero"));
        }
        Ok(base.powi(e))
    }

    fn integer(&mut self) -> Result<BigInt> {
        self.ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected integer"));
        }
        let txt = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
        Ok(txt.parse().unwrap())
    }

    fn atom(&mut self) -> Result<Scalar> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer()?;
                Ok(Scalar::from_rational(BigRational::from_integer(n)))
            }
            Some(_) => Ok(Scalar::symbol(self.symbol()?)),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn small(&mut self) -> Result<u16> {
        let n = self.integer()?;
        n.try_into().map_err(|_| self.err("index out of range"))
    }

    fn symbol(&mut self) -> Result<Symbol> {
        match self.peek() {
            Some(b'q') => {
                self.pos += 1;
                if self.s.get(self.pos) == Some(&b'[') {
                    self.pos += 1;
                    let i = self.small()?;
                    if !self.eat(b',') {
                        return Err(self.err("expected ','"));
                    }
                    let j = self.small()?;
                    if !self.eat(b']') {
                        return Err(self.err("expected ']'"));
                    }
                    Ok(Symbol::Pair(i, j))
                } else {
                    Ok(Symbol::Base(0))
                }
            }
            Some(b'v') => {
                self.pos += 1;
                Ok(Symbol::Base(1))
            }
            Some(b'b') => {
                self.pos += 1;
                Ok(Symbol::Base(self.small()?))
            }
            _ => Err(self.err("expected symbol")),
        }
    }
}
