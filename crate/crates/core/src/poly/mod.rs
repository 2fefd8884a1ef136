//! Sparse multivariate polynomials over a finite field.
//!
//! Terms are kept in a `BTreeMap` keyed by exponent vector, so iteration and
//! every textual or JSON rendering follow lexicographic exponent order. Zero
//! coefficients are never stored.

mod parse;

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

use crate::ff::{FieldCtx, FieldElem, FieldError, TowerEmbedding};

pub use parse::parse_poly;

/// Per-variable exponent bound (exclusive).
pub const EXPONENT_LIMIT: u32 = 1 << 16;

pub type Exponent = SmallVec<[u16; 8]>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("polynomials live over different fields or variable sets: {0}")]
    ContextMismatch(String),
    #[error("exponent exceeds the per-variable limit of {EXPONENT_LIMIT}")]
    ExponentOverflow,
    #[error("f_p needs an odd prime, got {0}")]
    BadPrime(u64),
    #[error("variable index {index} out of range for {nvars} variables")]
    VariableOutOfRange { index: usize, nvars: usize },
    #[error("expected {expected} coordinates, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Clone, PartialEq, Eq)]
pub struct MultiPoly {
    ctx: FieldCtx,
    nvars: usize,
    terms: BTreeMap<Exponent, FieldElem>,
}

fn add_exponents(a: &Exponent, b: &Exponent) -> Result<Exponent, PolyError> {
    a.iter()
        .zip(b.iter())
        .map(|(&x, &y)| {
            let s = x as u32 + y as u32;
            if s >= EXPONENT_LIMIT {
                Err(PolyError::ExponentOverflow)
            } else {
                Ok(s as u16)
            }
        })
        .collect()
}

impl MultiPoly {
    pub fn zero(ctx: &FieldCtx, nvars: usize) -> Self {
        MultiPoly { ctx: ctx.clone(), nvars, terms: BTreeMap::new() }
    }

    pub fn constant(ctx: &FieldCtx, nvars: usize, c: FieldElem) -> Self {
        Self::monomial(ctx, &vec![0; nvars], c)
    }

    pub fn one(ctx: &FieldCtx, nvars: usize) -> Self {
        Self::constant(ctx, nvars, ctx.one())
    }

    /// `X_i`.
    pub fn variable(ctx: &FieldCtx, nvars: usize, i: usize) -> Self {
        let mut e = vec![0u16; nvars];
        e[i] = 1;
        Self::monomial(ctx, &e, ctx.one())
    }

    pub fn monomial(ctx: &FieldCtx, exp: &[u16], c: FieldElem) -> Self {
        let mut p = Self::zero(ctx, exp.len());
        if !ctx.is_zero(&c) {
            p.terms.insert(exp.iter().copied().collect(), c);
        }
        p
    }

    /// Builds from `(exponent, coefficient)` pairs, summing repeats.
    pub fn from_terms<I>(ctx: &FieldCtx, nvars: usize, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (Vec<u16>, FieldElem)>,
    {
        let mut p = Self::zero(ctx, nvars);
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(PolyError::LengthMismatch { expected: nvars, got: e.len() });
            }
            ctx.validate(&c)?;
            p.add_term(e.into_iter().collect(), &c);
        }
        Ok(p)
    }

    fn add_term(&mut self, e: Exponent, c: &FieldElem) {
        if self.ctx.is_zero(c) {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(cur) => {
                let s = self.ctx.add(cur, c);
                if self.ctx.is_zero(&s) {
                    self.terms.remove(&e);
                } else {
                    *cur = s;
                }
            }
            None => {
                self.terms.insert(e, c.clone());
            }
        }
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u16], &FieldElem)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    pub fn total_degree(&self) -> Option<usize> {
        self.terms.keys().map(|e| e.iter().map(|&x| x as usize).sum()).max()
    }

    pub fn is_homogeneous(&self, d: usize) -> bool {
        self.terms.keys().all(|e| e.iter().map(|&x| x as usize).sum::<usize>() == d)
    }

    /// The common degree of all terms, if the polynomial is nonzero and homogeneous.
    pub fn homogeneous_degree(&self) -> Option<usize> {
        let d = self.total_degree()?;
        self.is_homogeneous(d).then_some(d)
    }

    fn check_compatible(&self, other: &Self) -> Result<(), PolyError> {
        if self.ctx != other.ctx {
            return Err(PolyError::ContextMismatch(format!("{:?} vs {:?}", self.ctx, other.ctx)));
        }
        if self.nvars != other.nvars {
            return Err(PolyError::ContextMismatch(format!(
                "{} vs {} variables",
                self.nvars, other.nvars
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c);
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = self.ctx.neg(c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PolyError> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &FieldElem) -> Self {
        if self.ctx.is_zero(c) {
            return Self::zero(&self.ctx, self.nvars);
        }
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v = self.ctx.mul(v, c);
        }
        out
    }

    /// Product; large products split the left factor's terms across threads
    /// and merge the partial sums, which gives the same canonical result.
    pub fn mul(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_compatible(other)?;
        let left: Vec<(&Exponent, &FieldElem)> = self.terms.iter().collect();
        let partial = |chunk: &[(&Exponent, &FieldElem)]| -> Result<MultiPoly, PolyError> {
            let mut acc = MultiPoly::zero(&self.ctx, self.nvars);
            for (ea, ca) in chunk {
                for (eb, cb) in &other.terms {
                    acc.add_term(add_exponents(ea, eb)?, &self.ctx.mul(ca, cb));
                }
            }
            Ok(acc)
        };
        if left.len() * other.terms.len() < 20_000 {
            return partial(&left);
        }
        let chunk = left.len().div_ceil(rayon::current_num_threads().max(1) * 4).max(1);
        let parts: Vec<MultiPoly> = left.par_chunks(chunk).map(partial).collect::<Result<_, _>>()?;
        let mut out = MultiPoly::zero(&self.ctx, self.nvars);
        for part in parts {
            for (e, c) in part.terms {
                out.add_term(e, &c);
            }
        }
        Ok(out)
    }

    /// Repeated multiplication; reference implementation for [`MultiPoly::pow`].
    pub fn pow_naive(&self, e: u64) -> Result<Self, PolyError> {
        let mut acc = Self::one(&self.ctx, self.nvars);
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    fn pow_by_squaring(&self, mut e: u64) -> Result<Self, PolyError> {
        let mut acc = Self::one(&self.ctx, self.nvars);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// `self^(p^j)`: every exponent scaled by `p^j`, every coefficient raised to `p^j`.
    pub fn frobenius_power(&self, j: usize) -> Result<Self, PolyError> {
        let scale = (self.ctx.p() as u32)
            .checked_pow(j as u32)
            .filter(|&s| s < EXPONENT_LIMIT)
            .ok_or(PolyError::ExponentOverflow);
        let mut out = Self::zero(&self.ctx, self.nvars);
        for (e, c) in &self.terms {
            let scale = scale.clone()?;
            let ne: Exponent = e
                .iter()
                .map(|&x| {
                    let v = x as u32 * scale;
                    if v >= EXPONENT_LIMIT {
                        Err(PolyError::ExponentOverflow)
                    } else {
                        Ok(v as u16)
                    }
                })
                .collect::<Result<_, _>>()?;
            out.terms.insert(ne, self.ctx.frobenius(c, j));
        }
        Ok(out)
    }

    /// Power by base-p digits: `a^e = prod_j (a^(d_j))^(p^j)` for `e = sum_j d_j p^j`.
    pub fn pow(&self, e: u64) -> Result<Self, PolyError> {
        let p = self.ctx.p();
        let mut acc = Self::one(&self.ctx, self.nvars);
        let mut rest = e;
        let mut j = 0usize;
        while rest > 0 {
            let digit = rest % p;
            rest /= p;
            if digit > 0 {
                let factor = self.pow_by_squaring(digit)?.frobenius_power(j)?;
                acc = acc.mul(&factor)?;
            }
            j += 1;
        }
        Ok(acc)
    }

    pub fn coeff(&self, exp: &[u16]) -> FieldElem {
        let key: Exponent = exp.iter().copied().collect();
        self.terms.get(&key).cloned().unwrap_or_else(|| self.ctx.zero())
    }

    /// Coefficient at an exponent given with signed entries; zero if any entry is negative.
    pub fn coeff_signed(&self, exp: &[i64]) -> FieldElem {
        if exp.iter().any(|&x| x < 0 || x >= EXPONENT_LIMIT as i64) {
            return self.ctx.zero();
        }
        let e: Vec<u16> = exp.iter().map(|&x| x as u16).collect();
        self.coeff(&e)
    }

    pub fn partial_derivative(&self, i: usize) -> Result<Self, PolyError> {
        if i >= self.nvars {
            return Err(PolyError::VariableOutOfRange { index: i, nvars: self.nvars });
        }
        let mut out = Self::zero(&self.ctx, self.nvars);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut ne = e.clone();
            ne[i] -= 1;
            out.add_term(ne, &self.ctx.scale(c, e[i] as u64));
        }
        Ok(out)
    }

    /// Evaluation at a point; with an embedding the coefficients are pushed into
    /// the extension field and the point is read there.
    pub fn evaluate(
        &self,
        point: &[FieldElem],
        emb: Option<&TowerEmbedding>,
    ) -> Result<FieldElem, PolyError> {
        match emb {
            Some(emb) => {
                if emb.sub() != &self.ctx {
                    return Err(PolyError::ContextMismatch("embedding source differs from coefficient field".into()));
                }
                self.base_change(emb)?.evaluate(point, None)
            }
            None => {
                if point.len() != self.nvars {
                    return Err(PolyError::LengthMismatch { expected: self.nvars, got: point.len() });
                }
                for x in point {
                    self.ctx
                        .validate(x)
                        .map_err(|e| PolyError::ContextMismatch(e.to_string()))?;
                }
                Ok(self.eval_unchecked(point))
            }
        }
    }

    pub(crate) fn eval_unchecked(&self, point: &[FieldElem]) -> FieldElem {
        let ctx = &self.ctx;
        let mut acc = ctx.zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, &k) in point.iter().zip(e.iter()) {
                if k == 0 {
                    continue;
                }
                if ctx.is_zero(x) {
                    t = ctx.zero();
                    break;
                }
                t = ctx.mul(&t, &ctx.pow(x, k as u128));
            }
            acc = ctx.add(&acc, &t);
        }
        acc
    }

    /// Same polynomial with coefficients mapped into a larger field.
    pub fn base_change(&self, emb: &TowerEmbedding) -> Result<Self, PolyError> {
        if emb.sub() != &self.ctx {
            return Err(PolyError::ContextMismatch("embedding source differs from coefficient field".into()));
        }
        let mut out = Self::zero(emb.sup(), self.nvars);
        for (e, c) in &self.terms {
            out.terms.insert(e.clone(), emb.embed_unchecked(c));
        }
        Ok(out)
    }

    /// Substitutes `X_i -> X_{i+1 mod n}`.
    pub fn cyclic_shift(&self) -> Self {
        let n = self.nvars;
        let mut out = Self::zero(&self.ctx, n);
        for (e, c) in &self.terms {
            let mut ne: Exponent = SmallVec::from_elem(0, n);
            for i in 0..n {
                ne[(i + 1) % n] = e[i];
            }
            out.terms.insert(ne, c.clone());
        }
        out
    }

    pub fn to_repr(&self) -> PolyRepr {
        PolyRepr {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| TermRepr { exp: e.to_vec(), coeff: c.clone() })
                .collect(),
        }
    }

    pub fn from_repr(ctx: &FieldCtx, repr: &PolyRepr) -> Result<Self, PolyError> {
        Self::from_terms(ctx, repr.nvars, repr.terms.iter().map(|t| (t.exp.clone(), t.coeff.clone())))
    }
}

/// JSON form `{nvars, terms: [{exp, coeff}]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyRepr {
    pub nvars: usize,
    pub terms: Vec<TermRepr>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermRepr {
    pub exp: Vec<u16>,
    pub coeff: FieldElem,
}

impl Serialize for MultiPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_repr().serialize(s)
    }
}

fn fmt_coeff(ctx: &FieldCtx, c: &FieldElem) -> String {
    match ctx.as_prime_field(c) {
        Some(v) => v.to_string(),
        None => format!("{:?}", c.coords()),
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let vars: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| if k == 1 { format!("X{i}") } else { format!("X{i}^{k}") })
                .collect();
            let is_one = self.ctx.is_one(c);
            match (vars.is_empty(), is_one) {
                (true, _) => write!(f, "{}", fmt_coeff(&self.ctx, c))?,
                (false, true) => write!(f, "{}", vars.join("*"))?,
                (false, false) => write!(f, "{}*{}", fmt_coeff(&self.ctx, c), vars.join("*"))?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiPoly[{:?}, {} vars]({})", self.ctx, self.nvars, self)
    }
}

/// `f_p = X_0 X_1 ... X_{p-1} + sum_i X_i^{p-1} X_{i+1}` over GF(p), indices mod p.
pub fn build_fp(p: u64) -> Result<MultiPoly, PolyError> {
    if p == 2 || !crate::ff::is_prime(p) {
        return Err(PolyError::BadPrime(p));
    }
    let ctx = crate::ff::make_field(p, 1)?;
    let n = p as usize;
    let mut terms = vec![(vec![1u16; n], ctx.one())];
    for i in 0..n {
        let mut e = vec![0u16; n];
        e[i] = (p - 1) as u16;
        e[(i + 1) % n] += 1;
        terms.push((e, ctx.one()));
    }
    MultiPoly::from_terms(&ctx, n, terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::make_field;

    fn gf(p: u64) -> FieldCtx {
        make_field(p, 1).unwrap()
    }

    fn parse(ctx: &FieldCtx, s: &str) -> MultiPoly {
        parse_poly(ctx, s, None).unwrap()
    }

    #[test]
    fn product_examples() {
        let f5 = gf(5);
        let x0 = MultiPoly::variable(&f5, 2, 0);
        let x1 = MultiPoly::variable(&f5, 2, 1);
        assert_eq!(x0.mul(&x1).unwrap(), MultiPoly::monomial(&f5, &[1, 1], f5.one()));
        let lhs = x0.add(&x1).unwrap().mul(&x0.sub(&x1).unwrap()).unwrap();
        assert_eq!(lhs, parse(&f5, "X0^2 + 4*X1^2"));
    }

    #[test]
    fn fp_square_oracle() {
        // Brute-force expansion of the 4-term square: collect all 16 ordered
        // products and read off the X0^2 X1^2 X2^2 coefficient.
        let f3 = build_fp(3).unwrap();
        let terms: Vec<Vec<u16>> = f3.terms().map(|(e, _)| e.to_vec()).collect();
        let mut count = 0u64;
        for a in &terms {
            for b in &terms {
                let s: Vec<u16> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                if s == [2, 2, 2] {
                    count += 1;
                }
            }
        }
        assert_eq!(count, 1);
        let sq = f3.mul(&f3).unwrap();
        assert_eq!(sq.coeff(&[2, 2, 2]), f3.ctx().from_u64(count));
        assert_eq!(f3.pow(2).unwrap(), sq);
    }

    #[test]
    fn pow_examples() {
        let f3 = gf(3);
        let s = parse(&f3, "X0 + X1");
        assert_eq!(s.pow(3).unwrap(), parse(&f3, "X0^3 + X1^3"));
        assert_eq!(s.pow(0).unwrap(), MultiPoly::one(&f3, 2));
        assert_eq!(s.pow(2).unwrap().coeff(&[1, 1]), f3.from_u64(2));
    }

    #[test]
    fn pow_agrees_with_naive_over_extension() {
        let f9 = make_field(3, 2).unwrap();
        let t = f9.generator();
        let a = MultiPoly::from_terms(
            &f9,
            3,
            vec![(vec![1, 0, 0], t.clone()), (vec![0, 1, 1], f9.one()), (vec![0, 0, 2], f9.from_u64(2))],
        )
        .unwrap();
        for e in [1, 2, 3, 4, 5, 8, 9, 10] {
            assert_eq!(a.pow(e).unwrap(), a.pow_naive(e).unwrap(), "e = {e}");
        }
    }

    #[test]
    fn coeff_examples() {
        let f3 = build_fp(3).unwrap();
        assert_eq!(f3.coeff(&[1, 1, 1]), f3.ctx().one());
        assert_eq!(f3.coeff(&[3, 0, 0]), f3.ctx().zero());
        assert_eq!(f3.coeff_signed(&[-1, 2, 2]), f3.ctx().zero());
    }

    #[test]
    fn derivative_examples() {
        let ctx = gf(3);
        assert!(parse(&ctx, "X0^3").partial_derivative(0).unwrap().is_zero());
        let f3 = build_fp(3).unwrap();
        // Terms containing X0: X0X1X2, X0^2X1, X2^2X0.
        assert_eq!(f3.partial_derivative(0).unwrap(), parse(&ctx, "X1*X2 + 2*X0*X1 + X2^2"));
        assert!(MultiPoly::one(&ctx, 3).partial_derivative(1).unwrap().is_zero());
        assert!(matches!(
            f3.partial_derivative(3),
            Err(PolyError::VariableOutOfRange { index: 3, nvars: 3 })
        ));
    }

    #[test]
    fn evaluation_examples() {
        let f3 = build_fp(3).unwrap();
        let ones = vec![f3.ctx().one(); 3];
        assert_eq!(f3.evaluate(&ones, None).unwrap(), f3.ctx().one());
        let zeros = vec![f3.ctx().zero(); 3];
        assert!(f3.ctx().is_zero(&f3.evaluate(&zeros, None).unwrap()));
        let f5 = build_fp(5).unwrap();
        let ones5 = vec![f5.ctx().one(); 5];
        assert_eq!(f5.evaluate(&ones5, None).unwrap(), f5.ctx().one());
    }

    #[test]
    fn evaluation_through_embedding() {
        let f3 = build_fp(3).unwrap();
        let f27 = make_field(3, 3).unwrap();
        let emb = TowerEmbedding::new(f3.ctx(), &f27).unwrap();
        let ones = vec![f27.one(); 3];
        assert_eq!(f3.evaluate(&ones, Some(&emb)).unwrap(), f27.one());
        assert!(f3.evaluate(&ones, None).is_err());
    }

    #[test]
    fn fp_structure() {
        let f3 = build_fp(3).unwrap();
        assert_eq!(f3, parse(f3.ctx(), "X0*X1*X2 + X0^2*X1 + X1^2*X2 + X2^2*X0"));
        assert_eq!(f3.cyclic_shift(), f3);
        let f5 = build_fp(5).unwrap();
        assert_eq!(f5.num_terms(), 6);
        assert_eq!(f5.homogeneous_degree(), Some(5));
        assert_eq!(f5.nvars(), 5);
        assert_eq!(f5.cyclic_shift(), f5);
        assert_eq!(build_fp(2).unwrap_err(), PolyError::BadPrime(2));
        assert_eq!(build_fp(9).unwrap_err(), PolyError::BadPrime(9));
    }

    #[test]
    fn context_mismatch_is_reported() {
        let a = MultiPoly::variable(&gf(3), 2, 0);
        let b = MultiPoly::variable(&gf(5), 2, 0);
        assert!(matches!(a.mul(&b), Err(PolyError::ContextMismatch(_))));
        let c = MultiPoly::variable(&gf(3), 3, 0);
        assert!(matches!(a.mul(&c), Err(PolyError::ContextMismatch(_))));
    }

    #[test]
    fn exponent_overflow_is_guarded() {
        let ctx = gf(3);
        let big = MultiPoly::monomial(&ctx, &[40_000], ctx.one());
        assert_eq!(big.mul(&big).unwrap_err(), PolyError::ExponentOverflow);
    }

    #[test]
    fn json_roundtrip() {
        let f3 = build_fp(3).unwrap();
        let v = serde_json::to_value(&f3).unwrap();
        assert_eq!(v["nvars"], 3);
        assert_eq!(v["terms"].as_array().unwrap().len(), 4);
        let repr: PolyRepr = serde_json::from_value(v).unwrap();
        assert_eq!(MultiPoly::from_repr(f3.ctx(), &repr).unwrap(), f3);
    }
}
