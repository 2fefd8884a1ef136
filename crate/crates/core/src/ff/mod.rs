//! Explicit finite fields GF(p^f).
//!
//! A field is described by a [`FieldCtx`]: the prime `p`, the degree `f` and a
//! monic irreducible modulus of degree `f`. The modulus is always the
//! lexicographically smallest monic irreducible polynomial (coefficients compared
//! constant term first), so two contexts built from the same `(p, f)` agree
//! bit for bit. Elements are coordinate vectors in the power basis
//! `1, t, ..., t^(f-1)` and carry no reference to their context; all arithmetic
//! goes through the context.

mod embed;
pub(crate) mod gfp_poly;
pub mod linalg;
pub mod upoly;

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::SmallVec;
use thiserror::Error;

pub use embed::{prime_subfield_embedding, TowerEmbedding};
pub use linalg::{FieldOps, Matrix, PrimeField, SolveResult};

/// Largest characteristic accepted; keeps every product of two residues in a `u64`.
pub const MAX_PRIME: u64 = (1 << 31) - 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not a prime")]
    NonPrime(u64),
    #[error("{0} exceeds the supported characteristic bound")]
    PrimeTooLarge(u64),
    #[error("extension degree must be at least 1")]
    DegreeZero,
    #[error("field context mismatch: {0}")]
    ContextMismatch(String),
    #[error("malformed field element: {0}")]
    Malformed(String),
    #[error("GF({p}^{sub}) does not embed in GF({p}^{sup})")]
    NoEmbedding { p: u64, sub: usize, sup: usize },
}

/// Coordinates of an element with respect to `1, t, ..., t^(f-1)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FieldElem(pub(crate) SmallVec<[u64; 4]>);

impl FieldElem {
    pub fn coords(&self) -> &[u64] {
        &self.0
    }
}

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            write!(f, "{}", self.0[0])
        } else {
            write!(f, "{:?}", self.0.as_slice())
        }
    }
}

struct FieldInner {
    p: u64,
    f: usize,
    /// `f + 1` coefficients, monic.
    modulus: Vec<u64>,
    /// Column `j` holds the coordinates of `(t^j)^p`.
    frob: Vec<Vec<u64>>,
}

/// Context for GF(p^f). Cheap to clone.
#[derive(Clone)]
pub struct FieldCtx(Arc<FieldInner>);

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{})[{:?}]", self.0.p, self.0.f, self.0.modulus)
    }
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.p == other.0.p && self.0.modulus == other.0.modulus)
    }
}

impl Eq for FieldCtx {}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn field_cache() -> &'static Mutex<HashMap<(u64, usize), FieldCtx>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, usize), FieldCtx>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Builds the canonical context for GF(p^f).
pub fn make_field(p: u64, f: usize) -> Result<FieldCtx, FieldError> {
    if !is_prime(p) {
        return Err(FieldError::NonPrime(p));
    }
    if p > MAX_PRIME {
        return Err(FieldError::PrimeTooLarge(p));
    }
    if f < 1 {
        return Err(FieldError::DegreeZero);
    }
    if let Some(ctx) = field_cache().lock().expect("field cache poisoned").get(&(p, f)) {
        return Ok(ctx.clone());
    }
    let modulus = smallest_irreducible(p, f);
    let ctx = FieldCtx::with_modulus(p, modulus);
    field_cache()
        .lock()
        .expect("field cache poisoned")
        .insert((p, f), ctx.clone());
    Ok(ctx)
}

/// Lexicographically smallest monic irreducible of degree `f`, constant term most significant.
fn smallest_irreducible(p: u64, f: usize) -> Vec<u64> {
    if f == 1 {
        return vec![0, 1];
    }
    // Any candidate with zero constant term has the root 0, so start at c0 = 1.
    let mut digits = vec![0u64; f];
    digits[0] = 1;
    loop {
        let mut cand = digits.clone();
        cand.push(1);
        if gfp_poly::is_irreducible(&cand, p) {
            return cand;
        }
        // Odometer with the highest-degree coefficient moving fastest.
        let mut i = f - 1;
        loop {
            digits[i] += 1;
            if digits[i] < p {
                break;
            }
            digits[i] = 0;
            assert!(i > 0, "no irreducible polynomial of degree {f} over GF({p})");
            i -= 1;
        }
    }
}

impl FieldCtx {
    fn with_modulus(p: u64, modulus: Vec<u64>) -> Self {
        let f = modulus.len() - 1;
        let mut frob = Vec::with_capacity(f);
        let tp = gfp_poly::powmod(&[0, 1], p, &modulus, p);
        let mut cur = vec![1u64];
        for _ in 0..f {
            let mut col = cur.clone();
            col.resize(f, 0);
            frob.push(col);
            cur = gfp_poly::mulmod(&cur, &tp, &modulus, p);
        }
        FieldCtx(Arc::new(FieldInner { p, f, modulus, frob }))
    }

    pub fn p(&self) -> u64 {
        self.0.p
    }

    /// Extension degree `f` over the prime field.
    pub fn degree(&self) -> usize {
        self.0.f
    }

    pub fn modulus(&self) -> &[u64] {
        &self.0.modulus
    }

    /// `p^f`, when it fits in a `u64`.
    pub fn order(&self) -> Option<u64> {
        self.0.p.checked_pow(u32::try_from(self.0.f).ok()?)
    }

    pub fn zero(&self) -> FieldElem {
        FieldElem(SmallVec::from_elem(0, self.0.f))
    }

    pub fn one(&self) -> FieldElem {
        self.from_u64(1)
    }

    pub fn from_u64(&self, c: u64) -> FieldElem {
        let mut v = self.zero();
        v.0[0] = c % self.0.p;
        v
    }

    pub fn from_i64(&self, c: i64) -> FieldElem {
        let p = self.0.p as i64;
        self.from_u64(c.rem_euclid(p) as u64)
    }

    /// The class of `t`, a root of the modulus.
    pub fn generator(&self) -> FieldElem {
        if self.0.f == 1 {
            // the modulus is `x`, whose root is 0
            return self.zero();
        }
        let mut v = self.zero();
        v.0[1] = 1;
        v
    }

    pub fn from_coords(&self, coords: &[u64]) -> Result<FieldElem, FieldError> {
        if coords.len() > self.0.f {
            return Err(FieldError::Malformed(format!(
                "{} coordinates for a degree-{} field",
                coords.len(),
                self.0.f
            )));
        }
        let mut v = self.zero();
        for (i, &c) in coords.iter().enumerate() {
            v.0[i] = c % self.0.p;
        }
        Ok(v)
    }

    pub fn validate(&self, x: &FieldElem) -> Result<(), FieldError> {
        if x.0.len() != self.0.f {
            return Err(FieldError::Malformed(format!(
                "expected {} coordinates, got {}",
                self.0.f,
                x.0.len()
            )));
        }
        if let Some(c) = x.0.iter().find(|&&c| c >= self.0.p) {
            return Err(FieldError::Malformed(format!("coordinate {c} not reduced mod {}", self.0.p)));
        }
        Ok(())
    }

    /// Element with coordinates given by the base-`p` digits of `idx`, constant term first.
    pub fn elem_from_index(&self, mut idx: u64) -> FieldElem {
        let mut v = self.zero();
        for c in v.0.iter_mut() {
            *c = idx % self.0.p;
            idx /= self.0.p;
        }
        v
    }

    /// Inverse of [`FieldCtx::elem_from_index`]; the field order must fit in a `u64`.
    pub fn elem_index(&self, x: &FieldElem) -> u64 {
        x.0.iter().rev().fold(0u64, |acc, &c| acc * self.0.p + c)
    }

    /// All elements in index order. Only sensible for small fields.
    pub fn elements(&self) -> impl Iterator<Item = FieldElem> + '_ {
        let q = self.order().expect("field too large to enumerate");
        (0..q).map(move |i| self.elem_from_index(i))
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElem {
        let mut v = self.zero();
        for c in v.0.iter_mut() {
            *c = rng.gen_range(0..self.0.p);
        }
        v
    }

    pub fn is_zero(&self, x: &FieldElem) -> bool {
        x.0.iter().all(|&c| c == 0)
    }

    pub fn is_one(&self, x: &FieldElem) -> bool {
        x.0[0] == 1 && x.0[1..].iter().all(|&c| c == 0)
    }

    /// The integer representative when `x` lies in the prime field.
    pub fn as_prime_field(&self, x: &FieldElem) -> Option<u64> {
        if x.0[1..].iter().all(|&c| c == 0) {
            Some(x.0[0])
        } else {
            None
        }
    }

    pub fn add(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        let p = self.0.p;
        FieldElem(a.0.iter().zip(b.0.iter()).map(|(&x, &y)| (x + y) % p).collect())
    }

    pub fn sub(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        let p = self.0.p;
        FieldElem(a.0.iter().zip(b.0.iter()).map(|(&x, &y)| (x + p - y) % p).collect())
    }

    pub fn neg(&self, a: &FieldElem) -> FieldElem {
        let p = self.0.p;
        FieldElem(a.0.iter().map(|&x| (p - x) % p).collect())
    }

    pub fn scale(&self, a: &FieldElem, c: u64) -> FieldElem {
        let p = self.0.p;
        let c = c % p;
        FieldElem(a.0.iter().map(|&x| x * c % p).collect())
    }

    pub fn mul(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        let FieldInner { p, f, modulus, .. } = &*self.0;
        let (p, f) = (*p, *f);
        if f == 1 {
            return FieldElem(SmallVec::from_elem(a.0[0] * b.0[0] % p, 1));
        }
        let mut buf: SmallVec<[u64; 8]> = SmallVec::from_elem(0, 2 * f - 1);
        // Delay reductions while 2f(p-1)^2 + ... still fits in a u64.
        let lazy = (2 * f as u128 + 2) * (p as u128) * (p as u128) < u64::MAX as u128;
        if lazy {
            for (i, &x) in a.0.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                for (j, &y) in b.0.iter().enumerate() {
                    buf[i + j] += x * y;
                }
            }
            for k in (f..2 * f - 1).rev() {
                let c = buf[k] % p;
                if c == 0 {
                    continue;
                }
                let c = p - c;
                for i in 0..f {
                    buf[k - f + i] += c * modulus[i];
                }
            }
            buf.truncate(f);
            return FieldElem(buf.into_iter().map(|x| x % p).collect());
        }
        for (i, &x) in a.0.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.0.iter().enumerate() {
                buf[i + j] = (buf[i + j] + x * y) % p;
            }
        }
        for k in (f..2 * f - 1).rev() {
            let c = buf[k];
            if c == 0 {
                continue;
            }
            // t^f = -(m_0 + ... + m_{f-1} t^{f-1})
            for i in 0..f {
                let m = modulus[i];
                if m != 0 {
                    buf[k - f + i] = (buf[k - f + i] + (p - c) * m) % p;
                }
            }
        }
        buf.truncate(f);
        FieldElem(buf.into_iter().collect())
    }

    pub fn square(&self, a: &FieldElem) -> FieldElem {
        self.mul(a, a)
    }

    pub fn pow(&self, a: &FieldElem, mut e: u128) -> FieldElem {
        let mut acc = self.one();
        let mut base = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: &FieldElem) -> Option<FieldElem> {
        if self.is_zero(a) {
            return None;
        }
        let p = self.0.p;
        if self.0.f == 1 {
            return Some(self.from_u64(gfp_poly::inv_u64(a.0[0], p)));
        }
        let inv = gfp_poly::inverse_mod(&a.0, &self.0.modulus, p)?;
        self.from_coords(&inv).ok()
    }

    pub fn div(&self, a: &FieldElem, b: &FieldElem) -> Option<FieldElem> {
        Some(self.mul(a, &self.inv(b)?))
    }

    /// `x^(p^i)`; the q-power map of GF(q), q = p^f, is `i = f`.
    pub fn frobenius(&self, x: &FieldElem, i: usize) -> FieldElem {
        let f = self.0.f;
        let p = self.0.p;
        let lazy = (f as u128 + 1) * (p as u128) * (p as u128) < u64::MAX as u128;
        let mut cur = x.clone();
        for _ in 0..(i % f) {
            let mut next = self.zero();
            for (j, &c) in cur.0.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                for (r, &m) in self.0.frob[j].iter().enumerate() {
                    next.0[r] += c * m;
                    if !lazy {
                        next.0[r] %= p;
                    }
                }
            }
            if lazy {
                next.0.iter_mut().for_each(|x| *x %= p);
            }
            cur = next;
        }
        cur
    }

    /// Product `x * x^p * ... * x^(p^(k-1))`.
    pub fn twisted_norm(&self, x: &FieldElem, k: usize) -> FieldElem {
        let mut acc = self.one();
        let mut cur = x.clone();
        for _ in 0..k {
            acc = self.mul(&acc, &cur);
            cur = self.frobenius(&cur, 1);
        }
        acc
    }
}

#[derive(Serialize, Deserialize)]
struct FieldCtxRepr {
    p: u64,
    f: usize,
    modulus: Vec<u64>,
}

impl Serialize for FieldCtx {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        FieldCtxRepr {
            p: self.0.p,
            f: self.0.f,
            modulus: self.0.modulus.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FieldCtx {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = FieldCtxRepr::deserialize(d)?;
        let ctx = make_field(repr.p, repr.f).map_err(serde::de::Error::custom)?;
        if repr.modulus != ctx.modulus() {
            return Err(serde::de::Error::custom(
                "modulus is not the canonical one for this field",
            ));
        }
        Ok(ctx)
    }
}
