//! Text syntax: `c*X0^e0*X1^e1 + ...`.
//!
//! A coefficient is an integer (reduced mod p) or a bracketed coordinate list
//! `[c0,c1,...]` for extension fields. Terms may also be joined by `-`.
//! Factors of a term can appear in any order and repeat; they are multiplied.

use super::{Exponent, MultiPoly, PolyError, EXPONENT_LIMIT};
use crate::ff::{FieldCtx, FieldElem};

struct Term {
    coeff: FieldElem,
    exp: Vec<(usize, u32)>,
}

struct Parser<'a> {
    ctx: &'a FieldCtx,
    chars: Vec<char>,
    pos: usize,
}

fn err(msg: impl Into<String>) -> PolyError {
    PolyError::Parse(msg.into())
}

impl Parser<'_> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        self.pos += 1;
        c
    }

    fn number(&mut self) -> Result<u128, PolyError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(err(format!("expected a number at position {start}")));
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse::<u128>().map_err(|_| err(format!("number too large: {s}")))
    }

    fn reduce(&self, n: u128) -> FieldElem {
        self.ctx.from_u64((n % self.ctx.p() as u128) as u64)
    }

    fn coordinate_list(&mut self) -> Result<FieldElem, PolyError> {
        let mut coords = Vec::new();
        loop {
            let neg = if self.peek() == Some('-') {
                self.pos += 1;
                true
            } else {
                false
            };
            let n = self.number()?;
            let v = self.reduce(n);
            let v = if neg { self.ctx.neg(&v) } else { v };
            coords.push(self.ctx.as_prime_field(&v).expect("reduced integer lies in the prime field"));
            match self.bump() {
                Some(',') => continue,
                Some(']') => break,
                _ => return Err(err("unterminated coordinate list")),
            }
        }
        if coords.len() > self.ctx.degree() {
            return Err(err(format!(
                "coordinate list of length {} for a degree-{} field",
                coords.len(),
                self.ctx.degree()
            )));
        }
        coords.resize(self.ctx.degree(), 0);
        Ok(self.ctx.from_coords(&coords)?)
    }

    fn term(&mut self) -> Result<Term, PolyError> {
        let mut t = Term { coeff: self.ctx.one(), exp: Vec::new() };
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_digit() => {
                    let n = self.number()?;
                    let v = self.reduce(n);
                    t.coeff = self.ctx.mul(&t.coeff, &v);
                }
                Some('[') => {
                    self.pos += 1;
                    let v = self.coordinate_list()?;
                    t.coeff = self.ctx.mul(&t.coeff, &v);
                }
                Some('X') | Some('x') => {
                    self.pos += 1;
                    let idx = self.number()?;
                    let idx = usize::try_from(idx).map_err(|_| err("variable index too large"))?;
                    let e = if self.peek() == Some('^') {
                        self.pos += 1;
                        self.number()?
                    } else {
                        1
                    };
                    if e >= EXPONENT_LIMIT as u128 {
                        return Err(PolyError::ExponentOverflow);
                    }
                    t.exp.push((idx, e as u32));
                }
                other => {
                    return Err(err(format!(
                        "unexpected {} at position {}",
                        other.map_or("end of input".to_string(), |c| format!("'{c}'")),
                        self.pos
                    )))
                }
            }
            if self.peek() == Some('*') {
                self.pos += 1;
            } else {
                return Ok(t);
            }
        }
    }
}

/// Parses the text syntax. Without `nvars` the variable count is one more than
/// the largest index mentioned.
pub fn parse_poly(ctx: &FieldCtx, text: &str, nvars: Option<usize>) -> Result<MultiPoly, PolyError> {
    let chars: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
    if chars.is_empty() {
        return Err(err("empty polynomial"));
    }
    let mut p = Parser { ctx, chars, pos: 0 };
    let mut terms = Vec::new();
    let mut negate = false;
    if p.peek() == Some('-') {
        p.pos += 1;
        negate = true;
    } else if p.peek() == Some('+') {
        p.pos += 1;
    }
    loop {
        let mut t = p.term()?;
        if negate {
            t.coeff = ctx.neg(&t.coeff);
        }
        terms.push(t);
        match p.bump() {
            None => break,
            Some('+') => negate = false,
            Some('-') => negate = true,
            Some(c) => return Err(err(format!("unexpected '{c}' at position {}", p.pos - 1))),
        }
    }
    let max_idx = terms.iter().flat_map(|t| t.exp.iter().map(|&(i, _)| i)).max();
    let needed = max_idx.map_or(0, |i| i + 1);
    let n = match nvars {
        Some(n) if n < needed => {
            return Err(PolyError::VariableOutOfRange { index: needed - 1, nvars: n })
        }
        Some(n) => n,
        None => needed,
    };
    let mut out = MultiPoly::zero(ctx, n);
    for t in terms {
        let mut e = vec![0u32; n];
        for (i, k) in t.exp {
            e[i] += k;
            if e[i] >= EXPONENT_LIMIT {
                return Err(PolyError::ExponentOverflow);
            }
        }
        let e: Exponent = e.into_iter().map(|k| k as u16).collect();
        out.add_term(e, &t.coeff);
    }
    Ok(out)
}
